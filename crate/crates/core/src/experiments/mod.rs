//! Experiment harness: recorded runs with energy-budget residuals, blow-up
//! monitoring, the small-data probe, the stability sweep, mollifier
//! convergence and the identity suite.

mod budget;
mod monitors;
mod probes;
mod verify;

use thiserror::Error;

use crate::calculus::div;
use crate::dynamics::{run, DynamicsError, SolverParams, State};
use crate::fields::FieldError;
use crate::norms::{l2_norm_scalar, seminorms, SeminormReport};

pub use budget::{
    budget_terms, cancellation_checks, energy_budget, pair_cancellation_checks, residual_series, BudgetTerms,
    Cancellations,
};
pub use monitors::{difference_monitors, trajectory_monitors, MonitorTable};
pub use probes::{
    mollifier_convergence, random_state, smalldata_probe, smalldata_sweep, stability_sweep, MollifierRow, PairSample,
    Perturbation, SizeNorm, SmallDataReport, StabilityOptions, StabilityReport,
};
pub use verify::{identity_suite, CheckOutcome, SuiteConfig};

#[derive(Debug, Error, Clone)]
pub enum ExperimentError {
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("{0}")]
    InvalidInput(String),
    #[error("base run failed: {0}")]
    BaseRunFailed(DynamicsError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Diagnostics of one observed state.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// `½(‖u‖² + ‖b‖²)`.
    pub energy: f64,
    /// `μ‖∇u‖² + γ‖∇b‖²`.
    pub dissipation: f64,
    pub u: SeminormReport,
    pub b: SeminormReport,
    /// Trapezoidal `∫₀ᵗ (‖∇u‖⁴ + ‖∇b‖⁴ + ‖Δb‖⁴) ds`.
    pub blowup_running: f64,
    /// Trapezoidal `∫₀ᵗ L(s) ds`.
    pub l_running: f64,
    /// Budget residuals at the `L²`, `H¹` and `H²` levels; `None` when the
    /// level was not requested or fewer than three samples exist.
    pub r0: Option<f64>,
    pub r1: Option<f64>,
    pub r2: Option<f64>,
    pub div_u_l2: f64,
    pub div_b_l2: f64,
}

/// `‖∇u‖⁴ + ‖∇b‖⁴ + ‖Δb‖⁴`.
pub fn blowup_integrand(u: &SeminormReport, b: &SeminormReport) -> f64 {
    u.grad_l2.powi(4) + b.grad_l2.powi(4) + b.lap_l2.powi(4)
}

/// `L = ‖∇u‖⁴ + ‖∇b‖⁴ + ‖Δu‖⁴ + ‖Δb‖⁴ + ‖∇×Δb‖² + ‖div Δb‖²`.
pub fn l_weight(u: &SeminormReport, b: &SeminormReport) -> f64 {
    u.grad_l2.powi(4)
        + b.grad_l2.powi(4)
        + u.lap_l2.powi(4)
        + b.lap_l2.powi(4)
        + b.curl_lap_l2.powi(2)
        + b.div_lap_l2.powi(2)
}

#[derive(Clone, Debug)]
struct RawSample {
    t: f64,
    u: SeminormReport,
    b: SeminormReport,
    div_u: f64,
    div_b: f64,
    budgets: [Option<BudgetTerms>; 3],
}

/// Accumulates per-sample diagnostics; budget terms are evaluated as states
/// arrive so no trajectory has to be stored.
#[derive(Clone, Debug)]
pub struct Recorder {
    params: SolverParams,
    levels: [bool; 3],
    samples: Vec<RawSample>,
}

impl Recorder {
    pub fn new(params: &SolverParams, budget_levels: &[usize]) -> Result<Self, ExperimentError> {
        let mut levels = [false; 3];
        for &l in budget_levels {
            if l > 2 {
                return Err(ExperimentError::InvalidInput(format!("budget level must be 0, 1 or 2 (got {l})")));
            }
            levels[l] = true;
        }
        Ok(Self { params: params.clone(), levels, samples: Vec::new() })
    }

    pub fn observe(&mut self, state: &State) {
        let mut budgets = [None; 3];
        for (level, slot) in budgets.iter_mut().enumerate() {
            if self.levels[level] {
                *slot = Some(budget_terms(state, &self.params, level).expect("level validated"));
            }
        }
        self.samples.push(RawSample {
            t: state.t,
            u: seminorms(&state.u),
            b: seminorms(&state.b),
            div_u: l2_norm_scalar(&div(&state.u)),
            div_b: l2_norm_scalar(&div(&state.b)),
            budgets,
        });
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sample times and budget terms of `level`, if that level was recorded.
    pub fn budget_series(&self, level: usize) -> Option<(Vec<f64>, Vec<BudgetTerms>)> {
        let terms: Option<Vec<BudgetTerms>> = self.samples.iter().map(|s| *s.budgets.get(level)?).collect();
        terms.map(|t| (self.samples.iter().map(|s| s.t).collect(), t))
    }

    pub fn records(&self) -> Vec<DiagnosticsRecord> {
        let times: Vec<f64> = self.samples.iter().map(|s| s.t).collect();
        let residuals: Vec<Option<Vec<f64>>> = (0..3)
            .map(|level| {
                let terms: Option<Vec<BudgetTerms>> = self.samples.iter().map(|s| s.budgets[level]).collect();
                terms.and_then(|terms| residual_series(&times, &terms).ok())
            })
            .collect();
        let (mut blowup, mut l_run) = (0.0, 0.0);
        let mut out = Vec::with_capacity(self.samples.len());
        for (i, s) in self.samples.iter().enumerate() {
            if i > 0 {
                let p = &self.samples[i - 1];
                let h = s.t - p.t;
                blowup += 0.5 * h * (blowup_integrand(&p.u, &p.b) + blowup_integrand(&s.u, &s.b));
                l_run += 0.5 * h * (l_weight(&p.u, &p.b) + l_weight(&s.u, &s.b));
            }
            let r = |level: usize| residuals[level].as_ref().map(|v| v[i]);
            out.push(DiagnosticsRecord {
                t: s.t,
                energy: 0.5 * (s.u.l2.powi(2) + s.b.l2.powi(2)),
                dissipation: self.params.mu * s.u.grad_l2.powi(2) + self.params.gamma * s.b.grad_l2.powi(2),
                u: s.u,
                b: s.b,
                blowup_running: blowup,
                l_running: l_run,
                r0: r(0),
                r1: r(1),
                r2: r(2),
                div_u_l2: s.div_u,
                div_b_l2: s.div_b,
            });
        }
        out
    }
}

/// Result of a recorded run; `outcome` carries the final state or the solver failure.
#[derive(Debug)]
pub struct Simulation {
    pub records: Vec<DiagnosticsRecord>,
    pub outcome: Result<State, DynamicsError>,
}

/// Run to `params.t_end`, recording every `sample_interval` steps.
pub fn simulate(initial: State, params: &SolverParams, sample_interval: usize, budget_levels: &[usize]) -> Result<Simulation, ExperimentError> {
    let mut recorder = Recorder::new(params, budget_levels)?;
    let outcome = run(initial, params, sample_interval, &mut |s, _| recorder.observe(s));
    if let Err(DynamicsError::InvalidParams(m)) = &outcome {
        return Err(ExperimentError::InvalidInput(m.clone()));
    }
    Ok(Simulation { records: recorder.records(), outcome })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlowupSummary {
    pub integral_total: f64,
    /// Mean integrand over the trailing fifth of the time span.
    pub window_rate: f64,
    /// Mean integrand over the leading fifth.
    pub early_rate: f64,
    pub quiescent: bool,
}

/// Trapezoidal blow-up integral and its late-time rate; a run is quiescent
/// when the trailing rate does not exceed the leading one.
pub fn blowup_monitor(records: &[DiagnosticsRecord]) -> Result<BlowupSummary, ExperimentError> {
    let (first, last) = match (records.first(), records.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(ExperimentError::InsufficientSamples { needed: 1, got: 0 }),
    };
    let span = last.t - first.t;
    if span <= 0.0 {
        return Ok(BlowupSummary { integral_total: 0.0, window_rate: 0.0, early_rate: 0.0, quiescent: true });
    }
    let width = 0.2 * span;
    let at = |t: f64| -> f64 {
        // running integral linearly interpolated between samples
        let i = records.partition_point(|r| r.t < t);
        if i == 0 {
            return records[0].blowup_running;
        }
        if i >= records.len() {
            return last.blowup_running;
        }
        let (a, b) = (&records[i - 1], &records[i]);
        let w = (t - a.t) / (b.t - a.t);
        a.blowup_running + w * (b.blowup_running - a.blowup_running)
    };
    let window_rate = (last.blowup_running - at(last.t - width)) / width;
    let early_rate = (at(first.t + width) - first.blowup_running) / width;
    Ok(BlowupSummary {
        integral_total: last.blowup_running - first.blowup_running,
        window_rate,
        early_rate,
        quiescent: window_rate <= early_rate,
    })
}

#[cfg(test)]
mod tests;
