//! Right-hand side of the projected Hall-MHD system, its mollified variant,
//! pressure recovery and fixed-step time integration.

mod integrate;
mod rhs;

use thiserror::Error;

use crate::calculus::{curl, div, leray_project};
use crate::fields::VectorField;
use crate::norms::{l2_norm_scalar, lp_norm, seminorms};

pub use integrate::{run, step, step_schedule, Integrator};
pub use rhs::{recover_pressure, rhs, rhs_regularized, tendency};
#[cfg(test)]
pub(crate) use rhs::pressure_source;

#[derive(Debug, Error, Clone)]
pub enum DynamicsError {
    #[error("{0}")]
    InvalidParams(String),
    #[error("u and b live on different grids")]
    GridMismatch,
    #[error("u is not divergence-free (‖div u‖ = {div:.3e}, ‖u‖_H1 = {h1:.3e})")]
    NotSolenoidal { div: f64, h1: f64 },
    #[error("non-finite values after the step ending at t = {t}")]
    NonFinite { t: f64, snapshot: Box<State> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    IfRk4,
    Imex2,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::IfRk4 => "if_rk4",
            Scheme::Imex2 => "imex2",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "if_rk4" => Ok(Scheme::IfRk4),
            "imex2" => Ok(Scheme::Imex2),
            other => Err(format!("unknown scheme '{other}' (expected if_rk4 or imex2)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverParams {
    pub mu: f64,
    pub gamma: f64,
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub mollifier_level: Option<usize>,
    pub hall_on: bool,
}

impl SolverParams {
    /// Unregularized if_rk4 with the Hall term on.
    pub fn new(mu: f64, gamma: f64, dt: f64, t_end: f64) -> Result<Self, DynamicsError> {
        let p = Self { mu, gamma, dt, t_end, scheme: Scheme::IfRk4, mollifier_level: None, hall_on: true };
        p.validate()?;
        Ok(p)
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_mollifier(mut self, level: Option<usize>) -> Self {
        self.mollifier_level = level;
        self
    }

    pub fn with_hall(mut self, hall_on: bool) -> Self {
        self.hall_on = hall_on;
        self
    }

    pub fn with_t_end(mut self, t_end: f64) -> Self {
        self.t_end = t_end;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let bad = |m: &str| Err(DynamicsError::InvalidParams(m.to_string()));
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return bad("mu must be > 0");
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad("gamma must be > 0");
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be > 0");
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad("t_end must be >= 0");
        }
        if self.mollifier_level == Some(0) {
            return bad("mollifier_level must be >= 1");
        }
        Ok(())
    }
}

/// Velocity, magnetic field and time.
#[derive(Clone, Debug)]
pub struct State {
    pub u: VectorField,
    pub b: VectorField,
    pub t: f64,
}

impl State {
    /// Checked constructor: shared grid and divergence-free `u`.
    pub fn new(u: VectorField, b: VectorField, t: f64) -> Result<Self, DynamicsError> {
        if u.grid() != b.grid() {
            return Err(DynamicsError::GridMismatch);
        }
        let d = l2_norm_scalar(&div(&u));
        let h1 = seminorms(&u).h1;
        if d > 1e-10 * h1 + 1e-14 {
            return Err(DynamicsError::NotSolenoidal { div: d, h1 });
        }
        Ok(Self { u, b, t })
    }

    /// Project `u` first, then build the state.
    pub fn projected(u: VectorField, b: VectorField, t: f64) -> Result<Self, DynamicsError> {
        Self::new(leray_project(&u), b, t)
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.b.is_finite()
    }
}

/// Non-diffusive parts of `∂ₜu` and `∂ₜb`.
#[derive(Clone, Debug)]
pub struct Tendency {
    pub du: VectorField,
    pub db: VectorField,
}

/// Advisory step-size bounds; never enforced.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CflReport {
    pub max_u: f64,
    pub max_b: f64,
    /// `dx / max|u|`.
    pub dt_advective: f64,
    /// `dx² / (π max|b|)`, the whistler bound from the Hall term.
    pub dt_whistler: f64,
    /// `0.5 · min(dt_advective, dt_whistler)`.
    pub advised: f64,
    pub dt: f64,
}

impl CflReport {
    pub fn satisfied(&self) -> bool {
        self.dt <= self.advised
    }
}

pub fn cfl_report(state: &State, params: &SolverParams) -> CflReport {
    let dx = state.u.grid().spacing();
    let max_u = lp_norm(&state.u, f64::INFINITY).expect("supported exponent");
    let max_b = lp_norm(&state.b, f64::INFINITY).expect("supported exponent");
    let dt_advective = if max_u > 0.0 { dx / max_u } else { f64::INFINITY };
    let dt_whistler =
        if params.hall_on && max_b > 0.0 { dx * dx / (std::f64::consts::PI * max_b) } else { f64::INFINITY };
    CflReport { max_u, max_b, dt_advective, dt_whistler, advised: 0.5 * dt_advective.min(dt_whistler), dt: params.dt }
}

/// `‖div b‖_{L²}`, conserved by the b-equation.
pub fn div_b_l2(state: &State) -> f64 {
    l2_norm_scalar(&div(&state.b))
}

/// `J = ∇×b`.
pub fn current(state: &State) -> VectorField {
    curl(&state.b)
}

#[cfg(test)]
mod tests;
