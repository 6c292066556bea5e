//! Energy-budget identities at the `L²`, `H¹` and `H²` levels and the
//! pairing cancellations behind them.

use std::collections::BTreeMap;

use super::ExperimentError;
use crate::calculus::{advect, cross, curl, curl_curl, laplacian, leray_project};
use crate::dynamics::{SolverParams, State};
use crate::fields::VectorField;
use crate::norms::{inner_quadrature, l2_norm, l2_norm_scalar, seminorms};

/// Quadratic quantity `q`, dissipation `d` and nonlinear pairing sum `n` of one
/// budget level, so that `dq/dt + d = n` along exact trajectories.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BudgetTerms {
    pub q: f64,
    pub d: f64,
    pub n: f64,
}

fn pair(a: &VectorField, b: &VectorField) -> f64 {
    inner_quadrature(a, b)
}

fn prod(r: Result<VectorField, crate::calculus::CalculusError>) -> VectorField {
    r.expect("state fields share a grid")
}

/// Evaluate the terms of `level ∈ {0, 1, 2}` on one state.
pub fn budget_terms(state: &State, params: &SolverParams, level: usize) -> Result<BudgetTerms, ExperimentError> {
    let (u, b) = (&state.u, &state.b);
    let (mu, gamma) = (params.mu, params.gamma);
    let hall = if params.hall_on { 1.0 } else { 0.0 };
    let j = curl(b);
    let su = seminorms(u);
    let sb = seminorms(b);
    match level {
        0 => {
            let i1 = pair(&leray_project(&prod(advect(u, u))), u);
            let i2 = pair(&leray_project(&prod(cross(&j, b))), u);
            let i3 = pair(&curl(&prod(cross(u, b))), b);
            let i4 = pair(&curl(&prod(cross(&j, b))), b);
            Ok(BudgetTerms {
                q: 0.5 * (su.l2.powi(2) + sb.l2.powi(2)),
                d: mu * su.grad_l2.powi(2) + gamma * sb.grad_l2.powi(2),
                n: -i1 + i2 + i3 - hall * i4,
            })
        }
        1 => {
            let lap_u = laplacian(u);
            let lap_b = laplacian(b);
            let j1 = pair(&leray_project(&prod(advect(u, u))), &lap_u);
            let j2 = pair(&leray_project(&prod(cross(&j, b))), &lap_u);
            let j3 = pair(&curl(&prod(cross(u, b))), &lap_b);
            let j4 = pair(&curl(&prod(cross(&j, b))), &lap_b);
            Ok(BudgetTerms {
                q: 0.5 * (su.grad_l2.powi(2) + sb.grad_l2.powi(2)),
                d: mu * su.lap_l2.powi(2) + gamma * sb.lap_l2.powi(2),
                n: j1 - j2 - j3 + hall * j4,
            })
        }
        2 => {
            let curl_lap_u = curl(&laplacian(u));
            let curl_lap_b = curl(&laplacian(b));
            let jxb = prod(cross(&j, b));
            let k1 = pair(&curl(&prod(advect(u, u))), &curl_lap_u);
            let k2 = pair(&curl(&jxb), &curl_lap_u);
            let k3 = pair(&curl_curl(&prod(cross(u, b))), &curl_lap_b);
            // Hall part split through ∇×∇×b and w = ∇×∇×∇×b
            let cc_b = curl(&j);
            let w = curl(&cc_b);
            let minus_w = w.scaled(-1.0);
            let ccb_x_b = prod(cross(&cc_b, b));
            let k5 = pair(&curl_curl(&jxb).sub(&curl(&ccb_x_b)), &minus_w);
            let k6 = pair(&curl(&ccb_x_b).sub(&prod(cross(&w, b))), &minus_w);
            let div_lap_b = l2_norm_scalar(&crate::calculus::div(&laplacian(b)));
            Ok(BudgetTerms {
                q: 0.5 * (su.lap_l2.powi(2) + sb.lap_l2.powi(2)),
                d: mu * l2_norm(&curl_lap_u).powi(2) + gamma * (l2_norm(&curl_lap_b).powi(2) + div_lap_b.powi(2)),
                n: k1 - k2 - k3 + hall * (k5 + k6),
            })
        }
        other => Err(ExperimentError::InvalidInput(format!("budget level must be 0, 1 or 2 (got {other})"))),
    }
}

/// Three-point derivative of `q` at sample `i`, second order on any spacing.
pub(super) fn derivative(times: &[f64], q: &[f64], i: usize) -> f64 {
    let m = times.len();
    let (a, b, c) = if i == 0 {
        (0, 1, 2)
    } else if i == m - 1 {
        (m - 3, m - 2, m - 1)
    } else {
        (i - 1, i, i + 1)
    };
    let (ta, tb, tc) = (times[a], times[b], times[c]);
    let t = times[i];
    // derivative of the Lagrange interpolant through (a, b, c)
    let la = (2.0 * t - tb - tc) / ((ta - tb) * (ta - tc));
    let lb = (2.0 * t - ta - tc) / ((tb - ta) * (tb - tc));
    let lc = (2.0 * t - ta - tb) / ((tc - ta) * (tc - tb));
    la * q[a] + lb * q[b] + lc * q[c]
}

/// `|dq/dt + d − n|` at every sample, with `dq/dt` from three-point differences.
pub fn residual_series(times: &[f64], terms: &[BudgetTerms]) -> Result<Vec<f64>, ExperimentError> {
    if times.len() != terms.len() {
        return Err(ExperimentError::InvalidInput("one budget entry per sample time is required".into()));
    }
    if times.len() < 3 {
        return Err(ExperimentError::InsufficientSamples { needed: 3, got: times.len() });
    }
    if times.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
        return Err(ExperimentError::InvalidInput("sample times must increase strictly".into()));
    }
    let q: Vec<f64> = terms.iter().map(|t| t.q).collect();
    Ok((0..times.len()).map(|i| (derivative(times, &q, i) + terms[i].d - terms[i].n).abs()).collect())
}

/// Residual series of one budget level over stored trajectory samples.
pub fn energy_budget(samples: &[State], params: &SolverParams, level: usize) -> Result<Vec<f64>, ExperimentError> {
    let terms = samples.iter().map(|s| budget_terms(s, params, level)).collect::<Result<Vec<_>, _>>()?;
    let times: Vec<f64> = samples.iter().map(|s| s.t).collect();
    residual_series(&times, &terms)
}

/// Named cancellation residuals with the norm scale they should be compared against.
#[derive(Clone, Debug, PartialEq)]
pub struct Cancellations {
    pub residuals: BTreeMap<&'static str, f64>,
    pub scale: f64,
}

impl Cancellations {
    pub fn worst_ratio(&self) -> f64 {
        self.residuals.values().fold(0.0f64, |m, r| m.max(r / self.scale))
    }

    pub fn passes(&self, tolerance: f64) -> bool {
        self.residuals.values().all(|r| *r <= tolerance * self.scale)
    }
}

fn cube_scale(a: &VectorField, b: &VectorField) -> f64 {
    (seminorms(a).h2 + seminorms(b).h2).powi(3).max(1e-14)
}

/// `I₁`, `I₄` and `I₂ + I₃` on a single state.
pub fn cancellation_checks(state: &State) -> Cancellations {
    let (u, b) = (&state.u, &state.b);
    let j = curl(b);
    let jxb = prod(cross(&j, b));
    let i1 = pair(&leray_project(&prod(advect(u, u))), u);
    let i2 = pair(&leray_project(&jxb), u);
    let i3 = pair(&curl(&prod(cross(u, b))), b);
    let i4 = pair(&curl(&jxb), b);
    let residuals = BTreeMap::from([("I1", i1.abs()), ("I4", i4.abs()), ("I2+I3", (i2 + i3).abs())]);
    Cancellations { residuals, scale: cube_scale(u, b) }
}

/// `L₁`, `L₃`, `L₁₀`, `L₁₁` and `L₄ + L₇` for the difference `(U, B) = (v − u, h − b)`.
pub fn pair_cancellation_checks(base: &State, other: &State) -> Cancellations {
    let (u, b) = (&base.u, &base.b);
    let du = other.u.sub(u);
    let db = other.b.sub(b);
    let curl_db = curl(&db);
    let l1 = pair(&leray_project(&prod(advect(&du, &du))), &du);
    let l3 = pair(&leray_project(&prod(advect(u, &du))), &du);
    let cb_x_b = prod(cross(&curl_db, &db));
    let l4 = pair(&leray_project(&cb_x_b), &du);
    let l7 = pair(&curl(&prod(cross(&du, &db))), &db);
    let l10 = pair(&curl(&cb_x_b), &db);
    let l11 = pair(&curl(&prod(cross(&curl_db, b))), &db);
    let residuals = BTreeMap::from([
        ("L1", l1.abs()),
        ("L3", l3.abs()),
        ("L10", l10.abs()),
        ("L11", l11.abs()),
        ("L4+L7", (l4 + l7).abs()),
    ]);
    let scale = (seminorms(u).h2 + seminorms(b).h2 + seminorms(&du).h2 + seminorms(&db).h2).powi(3).max(1e-14);
    Cancellations { residuals, scale }
}
