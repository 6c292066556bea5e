use rayon::prelude::*;

use super::{l_weight, simulate, DiagnosticsRecord, ExperimentError};
use crate::calculus::mollify;
use crate::dynamics::{step_schedule, DynamicsError, Integrator, SolverParams, State};
use crate::fields::{synth_field, GridSpec, SynthSpec, VectorField};
use crate::norms::{seminorms, SeminormReport};

/// Norm used to size random initial data.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SizeNorm {
    H1,
    H2,
}

fn divergence_free(grid: &GridSpec, seed: u64, kmax: usize) -> Result<VectorField, ExperimentError> {
    Ok(synth_field(grid, &SynthSpec::RandomBandlimited { seed, kmax, amplitude: 1.0, divergence_free: true })?)
}

// b draws from a stream disjoint from u's
fn magnetic_seed(seed: u64) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15
}

/// Seeded divergence-free `u` and `b` on `0 < |m|∞ ≤ kmax`, each carrying half
/// of `size²` so that `√(‖u‖² + ‖b‖²) = size` in the chosen norm.
pub fn random_state(grid: &GridSpec, seed: u64, kmax: usize, size: f64, norm: SizeNorm) -> Result<State, ExperimentError> {
    if !(size >= 0.0 && size.is_finite()) {
        return Err(ExperimentError::InvalidInput(format!("size must be finite and >= 0 (got {size})")));
    }
    let pick = |f: &VectorField| {
        let r = seminorms(f);
        match norm {
            SizeNorm::H1 => r.h1,
            SizeNorm::H2 => r.h2,
        }
    };
    let half = size / std::f64::consts::SQRT_2;
    let u = divergence_free(grid, seed, kmax)?;
    let b = divergence_free(grid, magnetic_seed(seed), kmax)?;
    let u = u.scaled(half / pick(&u));
    let b = b.scaled(half / pick(&b));
    Ok(State::new(u, b, 0.0)?)
}

fn h2_sq(state: &State) -> f64 {
    seminorms(&state.u).h2.powi(2) + seminorms(&state.b).h2.powi(2)
}

#[derive(Clone, Debug)]
pub struct SmallDataReport {
    pub amplitude: f64,
    /// `‖u₀‖²_{H²} + ‖b₀‖²_{H²}`.
    pub initial: f64,
    /// Sup over observed times of `‖u‖²_{H²} + ‖b‖²_{H²}`.
    pub max_over_time: f64,
    pub survived: bool,
    pub failure_time: Option<f64>,
    /// `survived` and `max_over_time ≤ 3 · initial`.
    pub bound_satisfied: bool,
    pub records: Vec<DiagnosticsRecord>,
}

/// Run seeded divergence-free data of `H²` size `amplitude` to `params.t_end`,
/// observing every step, and check the factor-3 bound.
pub fn smalldata_probe(
    grid: &GridSpec,
    amplitude: f64,
    params: &SolverParams,
    seed: u64,
    kmax: usize,
) -> Result<SmallDataReport, ExperimentError> {
    let initial_state = random_state(grid, seed, kmax, amplitude, SizeNorm::H2)?;
    let initial = h2_sq(&initial_state);
    let sim = simulate(initial_state, params, 1, &[])?;
    let max_over_time = sim.records.iter().map(|r| r.u.h2.powi(2) + r.b.h2.powi(2)).fold(0.0, f64::max);
    let (survived, failure_time) = match &sim.outcome {
        Ok(_) => (true, None),
        Err(DynamicsError::NonFinite { t, .. }) => (false, Some(*t)),
        Err(e) => return Err(e.clone().into()),
    };
    Ok(SmallDataReport {
        amplitude,
        initial,
        max_over_time,
        survived,
        failure_time,
        bound_satisfied: survived && max_over_time <= 3.0 * initial,
        records: sim.records,
    })
}

/// Probe every amplitude; runs are independent and execute concurrently.
pub fn smalldata_sweep(
    grid: &GridSpec,
    amplitudes: &[f64],
    params: &SolverParams,
    seed: u64,
    kmax: usize,
) -> Result<Vec<SmallDataReport>, ExperimentError> {
    amplitudes.par_iter().map(|&a| smalldata_probe(grid, a, params, seed, kmax)).collect()
}

/// Which fields the stability sweep perturbs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Perturbation {
    Both,
    MagneticOnly,
}

/// Base norms and difference norms at one observed time.
#[derive(Clone, Debug, PartialEq)]
pub struct PairSample {
    pub t: f64,
    pub base_u: SeminormReport,
    pub base_b: SeminormReport,
    pub diff_u: SeminormReport,
    pub diff_b: SeminormReport,
}

#[derive(Clone, Debug)]
pub struct StabilityReport {
    pub seed: u64,
    /// Target initial `‖U₀‖²_{H²} + ‖B₀‖²_{H²}`.
    pub delta: f64,
    /// Achieved initial distance².
    pub initial_distance: f64,
    /// Sup over steps of `‖U‖²_{H²} + ‖B‖²_{H²}`.
    pub sup_distance: f64,
    pub final_distance: f64,
    /// Trapezoidal `∫ L` of the base run.
    pub l_total: f64,
    pub survived: bool,
    pub failure_time: Option<f64>,
    pub trace: Vec<PairSample>,
}

/// Perturbed runs whose `H²` size² exceeds this multiple of their initial
/// size² (or of 1) are stopped and reported as not surviving.
const GROWTH_LIMIT: f64 = 1e8;

fn distance(base: &State, other: &State) -> (SeminormReport, SeminormReport) {
    (seminorms(&other.u.sub(&base.u)), seminorms(&other.b.sub(&base.b)))
}

fn dist_sq(d: &(SeminormReport, SeminormReport)) -> f64 {
    d.0.h2.powi(2) + d.1.h2.powi(2)
}

/// Scale `s` so that `base + s·(du, db)` sits at initial distance² `delta`.
fn perturb(base: &State, du: &VectorField, db: &VectorField, delta: f64) -> Result<State, ExperimentError> {
    let make = |s: f64| State::new(base.u.axpy(s, du), base.b.axpy(s, db), base.t);
    if delta == 0.0 {
        return Ok(make(0.0)?);
    }
    let unit = seminorms(du).h2.powi(2) + seminorms(db).h2.powi(2);
    let mut s = (delta / unit).sqrt();
    let mut state = make(s)?;
    for _ in 0..8 {
        let d = dist_sq(&distance(base, &state));
        if (d - delta).abs() <= 1e-13 * delta {
            break;
        }
        s *= (delta / d).sqrt();
        state = make(s)?;
    }
    Ok(state)
}

struct Lane {
    state: State,
    delta: f64,
    seed: u64,
    initial: f64,
    limit: f64,
    sup: f64,
    last: f64,
    failure: Option<f64>,
    trace: Vec<PairSample>,
}

/// Options of [`stability_sweep`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilityOptions {
    pub perturbation: Perturbation,
    /// Spectral support of the perturbation directions.
    pub kmax: usize,
    /// Trace sampling stride in steps; distances enter the sup at every step.
    pub sample_interval: usize,
}

/// Co-run the base data with one perturbed copy per (seed, δ) to
/// `params.t_end`. Directions are seeded divergence-free fields; `deltas` must
/// be nonnegative and nonincreasing.
pub fn stability_sweep(
    base: &State,
    seeds: &[u64],
    deltas: &[f64],
    params: &SolverParams,
    options: &StabilityOptions,
) -> Result<Vec<StabilityReport>, ExperimentError> {
    params.validate()?;
    if deltas.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
        return Err(ExperimentError::InvalidInput("deltas must be finite and >= 0".into()));
    }
    if deltas.windows(2).any(|w| w[1] > w[0]) {
        return Err(ExperimentError::InvalidInput("deltas must be sorted in descending order".into()));
    }
    let grid = base.u.grid();
    let mut base = match params.mollifier_level {
        Some(n) => State { u: mollify(&base.u, n), b: mollify(&base.b, n), t: base.t },
        None => base.clone(),
    };
    let mut lanes = Vec::with_capacity(seeds.len() * deltas.len());
    for &seed in seeds {
        let du = match options.perturbation {
            Perturbation::Both => divergence_free(grid, seed, options.kmax)?,
            Perturbation::MagneticOnly => VectorField::zeros(grid),
        };
        let db = divergence_free(grid, magnetic_seed(seed), options.kmax)?;
        for &delta in deltas {
            let state = perturb(&base, &du, &db, delta)?;
            let d = distance(&base, &state);
            let initial = dist_sq(&d);
            lanes.push(Lane {
                limit: GROWTH_LIMIT * h2_sq(&state).max(1.0),
                state,
                delta,
                seed,
                initial,
                sup: initial,
                last: initial,
                failure: None,
                trace: Vec::new(),
            });
        }
    }

    let sample = |base: &State, lane: &mut Lane, d: (SeminormReport, SeminormReport)| {
        lane.trace.push(PairSample {
            t: base.t,
            base_u: seminorms(&base.u),
            base_b: seminorms(&base.b),
            diff_u: d.0,
            diff_b: d.1,
        });
    };
    for lane in lanes.iter_mut() {
        let d = distance(&base, &lane.state);
        sample(&base, lane, d);
    }

    let integrator = Integrator::new(grid, params);
    let schedule = step_schedule(base.t, params.t_end, params.dt);
    let t0 = base.t;
    let last_step = schedule.len();
    let interval = options.sample_interval.max(1);
    let mut l_prev = l_weight(&seminorms(&base.u), &seminorms(&base.b));
    let mut l_total = 0.0;
    for (k, &h) in schedule.iter().enumerate() {
        let steps = k + 1;
        let t_next = if steps == last_step && h != params.dt { params.t_end } else { t0 + steps as f64 * params.dt };
        let mut next = integrator.step_by(&base, h).map_err(ExperimentError::BaseRunFailed)?;
        next.t = t_next;
        base = next;
        let l_now = l_weight(&seminorms(&base.u), &seminorms(&base.b));
        l_total += 0.5 * h * (l_prev + l_now);
        l_prev = l_now;
        let record = steps % interval == 0 || steps == last_step;
        let base_ref = &base;
        lanes.par_iter_mut().filter(|l| l.failure.is_none()).for_each(|lane| {
            match integrator.step_by(&lane.state, h) {
                Ok(mut s) => {
                    s.t = t_next;
                    lane.state = s;
                }
                Err(_) => {
                    lane.failure = Some(t_next);
                    return;
                }
            }
            let d = distance(base_ref, &lane.state);
            let dsq = dist_sq(&d);
            lane.sup = lane.sup.max(dsq);
            lane.last = dsq;
            if h2_sq(&lane.state) > lane.limit {
                lane.failure = Some(t_next);
            }
            if record {
                sample(base_ref, lane, d);
            }
        });
    }

    Ok(lanes
        .into_iter()
        .map(|lane| StabilityReport {
            seed: lane.seed,
            delta: lane.delta,
            initial_distance: lane.initial,
            sup_distance: lane.sup,
            final_distance: lane.last,
            l_total,
            survived: lane.failure.is_none(),
            failure_time: lane.failure,
            trace: lane.trace,
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MollifierRow {
    pub level: usize,
    /// `√(‖uₙ − u‖²_{H²} + ‖bₙ − b‖²_{H²})` at the horizon; `None` if the
    /// regularized run failed.
    pub error: Option<f64>,
}

/// Horizon `H²` distance between each mollified run and the unregularized one.
pub fn mollifier_convergence(
    initial: &State,
    params: &SolverParams,
    levels: &[usize],
) -> Result<Vec<MollifierRow>, ExperimentError> {
    params.validate()?;
    let cutoff = initial.u.grid().cutoff();
    if levels.first() == Some(&0) || levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ExperimentError::InvalidInput("levels must be >= 1 and strictly increasing".into()));
    }
    if levels.last().is_some_and(|&l| l > cutoff) {
        return Err(ExperimentError::InvalidInput(format!("levels must not exceed the grid cutoff {cutoff}")));
    }
    let plain = params.clone().with_mollifier(None);
    let mut configs = vec![plain];
    configs.extend(levels.iter().map(|&l| params.clone().with_mollifier(Some(l))));
    let finals: Vec<Result<State, DynamicsError>> =
        configs.par_iter().map(|p| crate::dynamics::run(initial.clone(), p, usize::MAX, &mut |_, _| {})).collect();
    let mut finals = finals.into_iter();
    let reference = finals.next().expect("reference run").map_err(ExperimentError::BaseRunFailed)?;
    Ok(levels
        .iter()
        .zip(finals)
        .map(|(&level, result)| MollifierRow {
            level,
            error: result.ok().map(|s| dist_sq(&distance(&reference, &s)).sqrt()),
        })
        .collect())
}
