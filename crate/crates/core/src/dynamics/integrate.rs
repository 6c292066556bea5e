use super::rhs::tendency_of;
use super::{DynamicsError, Scheme, SolverParams, State, Tendency};
use crate::calculus::{in_mollifier_band, leray_project, mollify};
use crate::fields::{GridSpec, VectorField};

/// Per-mode diffusion multipliers for one step size.
struct Factors {
    dt: f64,
    // if_rk4: e^{L dt/2}, e^{L dt}; imex2: (1 + dt/2 L)/(1 − dt/2 L), dt/(1 − dt/2 L)
    a_u: Vec<f64>,
    c_u: Vec<f64>,
    a_b: Vec<f64>,
    c_b: Vec<f64>,
}

/// Fixed-step time integrator; diffusion is treated exactly (if_rk4) or
/// implicitly (imex2), the nonlinear tendency explicitly.
pub struct Integrator {
    params: SolverParams,
    lin_u: Vec<f64>,
    lin_b: Vec<f64>,
    factors: Factors,
}

impl Integrator {
    pub fn new(grid: &GridSpec, params: &SolverParams) -> Self {
        let len = grid.len();
        let mut lin_u = vec![0.0; len];
        let mut lin_b = vec![0.0; len];
        for idx in 0..len {
            let k = grid.k_vec(idx);
            let kk = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            let band = params.mollifier_level.is_none_or(|n| in_mollifier_band(grid, idx, n));
            if band {
                lin_u[idx] = -params.mu * kk;
                lin_b[idx] = -params.gamma * kk;
            }
        }
        let factors = make_factors(params.scheme, &lin_u, &lin_b, params.dt);
        Self { params: params.clone(), lin_u, lin_b, factors }
    }

    pub fn params(&self) -> &SolverParams {
        &self.params
    }

    /// Advance by the configured `dt`.
    pub fn step(&self, state: &State) -> Result<State, DynamicsError> {
        self.advance(state, &self.factors)
    }

    /// Advance by an arbitrary step size.
    pub fn step_by(&self, state: &State, dt: f64) -> Result<State, DynamicsError> {
        if dt == self.factors.dt {
            return self.step(state);
        }
        let f = make_factors(self.params.scheme, &self.lin_u, &self.lin_b, dt);
        self.advance(state, &f)
    }

    fn advance(&self, state: &State, f: &Factors) -> Result<State, DynamicsError> {
        let next = match self.params.scheme {
            Scheme::IfRk4 => self.if_rk4(state, f),
            Scheme::Imex2 => self.imex2(state, f),
        };
        if !(next.u.is_finite() && next.b.is_finite()) {
            return Err(DynamicsError::NonFinite { t: next.t, snapshot: Box::new(state.clone()) });
        }
        Ok(next)
    }

    fn eval(&self, u: &VectorField, b: &VectorField) -> Tendency {
        tendency_of(u, b, &self.params)
    }

    fn if_rk4(&self, s: &State, f: &Factors) -> State {
        let dt = f.dt;
        let (eh_u, e_u, eh_b, e_b) = (&f.a_u, &f.c_u, &f.a_b, &f.c_b);
        let mul = |v: &VectorField, m: &[f64]| v.map_multiplier(|idx| m[idx]);

        let k1 = self.eval(&s.u, &s.b);
        let u2 = leray_project(&mul(&s.u.axpy(0.5 * dt, &k1.du), eh_u));
        let b2 = mul(&s.b.axpy(0.5 * dt, &k1.db), eh_b);
        let k2 = self.eval(&u2, &b2);

        let ehu = mul(&s.u, eh_u);
        let ehb = mul(&s.b, eh_b);
        let u3 = leray_project(&ehu.axpy(0.5 * dt, &k2.du));
        let b3 = ehb.axpy(0.5 * dt, &k2.db);
        let k3 = self.eval(&u3, &b3);

        let eu = mul(&s.u, e_u);
        let eb = mul(&s.b, e_b);
        let u4 = leray_project(&eu.axpy(dt, &mul(&k3.du, eh_u)));
        let b4 = eb.axpy(dt, &mul(&k3.db, eh_b));
        let k4 = self.eval(&u4, &b4);

        let u = eu
            .axpy(dt / 6.0, &mul(&k1.du, e_u))
            .axpy(dt / 3.0, &mul(&k2.du.add(&k3.du), eh_u))
            .axpy(dt / 6.0, &k4.du);
        let b = eb
            .axpy(dt / 6.0, &mul(&k1.db, e_b))
            .axpy(dt / 3.0, &mul(&k2.db.add(&k3.db), eh_b))
            .axpy(dt / 6.0, &k4.db);
        State { u: leray_project(&u), b, t: s.t + dt }
    }

    // Crank–Nicolson diffusion with a Heun predictor–corrector for the tendency.
    fn imex2(&self, s: &State, f: &Factors) -> State {
        let dt = f.dt;
        let (ratio_u, gain_u, ratio_b, gain_b) = (&f.a_u, &f.c_u, &f.a_b, &f.c_b);
        let cn = |v: &VectorField, n: &VectorField, ratio: &[f64], gain: &[f64], w: f64| {
            let mut out = v.map_multiplier(|idx| ratio[idx]);
            out.add_scaled(w, &n.map_multiplier(|idx| gain[idx] / dt));
            out
        };
        let n0 = self.eval(&s.u, &s.b);
        let us = leray_project(&cn(&s.u, &n0.du, ratio_u, gain_u, dt));
        let bs = cn(&s.b, &n0.db, ratio_b, gain_b, dt);
        let n1 = self.eval(&us, &bs);
        let u = cn(&s.u, &n0.du.add(&n1.du), ratio_u, gain_u, 0.5 * dt);
        let b = cn(&s.b, &n0.db.add(&n1.db), ratio_b, gain_b, 0.5 * dt);
        State { u: leray_project(&u), b, t: s.t + dt }
    }
}

fn make_factors(scheme: Scheme, lin_u: &[f64], lin_b: &[f64], dt: f64) -> Factors {
    let pair = |lin: &[f64]| -> (Vec<f64>, Vec<f64>) {
        match scheme {
            Scheme::IfRk4 => (lin.iter().map(|l| (0.5 * dt * l).exp()).collect(), lin.iter().map(|l| (dt * l).exp()).collect()),
            Scheme::Imex2 => (
                lin.iter().map(|l| (1.0 + 0.5 * dt * l) / (1.0 - 0.5 * dt * l)).collect(),
                lin.iter().map(|l| dt / (1.0 - 0.5 * dt * l)).collect(),
            ),
        }
    };
    let (a_u, c_u) = pair(lin_u);
    let (a_b, c_b) = pair(lin_b);
    Factors { dt, a_u, c_u, a_b, c_b }
}

/// Advance one step of `params.dt`.
pub fn step(state: &State, params: &SolverParams) -> Result<State, DynamicsError> {
    Integrator::new(state.u.grid(), params).step(state)
}

/// Step sizes taking `t0` to `t_end`: whole steps of `dt`, then one shorter
/// step if a remainder is left.
pub fn step_schedule(t0: f64, t_end: f64, dt: f64) -> Vec<f64> {
    let total = t_end - t0;
    if total <= 0.0 {
        return Vec::new();
    }
    let whole = (total / dt + 1e-9).floor() as usize;
    let mut out = vec![dt; whole];
    let rem = total - whole as f64 * dt;
    if rem > 1e-9 * dt {
        out.push(rem);
    }
    out
}

/// Step from `initial` to `params.t_end`, calling `observer(state, step)` at
/// step 0, every `sample_interval` steps and at the final step.
///
/// A mollified run starts from the mollified initial data.
pub fn run(
    initial: State,
    params: &SolverParams,
    sample_interval: usize,
    observer: &mut dyn FnMut(&State, usize),
) -> Result<State, DynamicsError> {
    params.validate()?;
    let interval = sample_interval.max(1);
    let integrator = Integrator::new(initial.u.grid(), params);
    let mut state = match params.mollifier_level {
        Some(n) => State { u: mollify(&initial.u, n), b: mollify(&initial.b, n), t: initial.t },
        None => initial,
    };
    let t0 = state.t;
    let schedule = step_schedule(t0, params.t_end, params.dt);
    observer(&state, 0);
    let last = schedule.len();
    for (k, &h) in schedule.iter().enumerate() {
        let mut next = integrator.step_by(&state, h)?;
        let steps = k + 1;
        // whole steps land on t0 + k dt exactly; the remainder step lands on t_end
        next.t = if steps == last && h != params.dt { params.t_end } else { t0 + steps as f64 * params.dt };
        state = next;
        if steps % interval == 0 || steps == last {
            observer(&state, steps);
        }
    }
    Ok(state)
}
