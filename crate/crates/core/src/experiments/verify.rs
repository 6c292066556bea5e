use rayon::prelude::*;

use super::{cancellation_checks, pair_cancellation_checks};
use crate::calculus::{curl_curl, grad_div, hall_identity_residual, laplacian, leray_project, HallIdentity};
use crate::dynamics::State;
use crate::fields::{synth_field, GridSpec, SynthSpec, VectorField};
use crate::norms::{equivalence_residuals, inner_quadrature, l2_norm, seminorms};

/// Identity-suite settings. Seed `s` draws fields with spectral support
/// `2 + s mod (max_kmax − 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuiteConfig {
    pub n: usize,
    pub seeds: usize,
    pub max_kmax: usize,
    pub tolerance: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { n: 64, seeds: 100, max_kmax: 8, tolerance: 1e-10 }
    }
}

/// Worst residual-to-scale ratio of one identity over all seeds.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub worst: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub passed: bool,
}

fn random(g: &GridSpec, seed: u64, kmax: usize, divergence_free: bool) -> VectorField {
    synth_field(g, &SynthSpec::RandomBandlimited { seed, kmax, amplitude: 1.0, divergence_free })
        .expect("kmax checked against the cutoff")
}

fn checks_for_seed(g: &GridSpec, seed: u64, kmax: usize) -> Vec<(&'static str, f64)> {
    let base = 10 * seed;
    let a = random(g, base, kmax, false);
    let b = random(g, base + 1, kmax, false);
    let u = random(g, base + 2, kmax, true);
    let v = random(g, base + 3, kmax, true);
    let h = random(g, base + 4, kmax, false);
    let mut out = Vec::new();

    let hall_scale = seminorms(&a).h3 * seminorms(&b).h3 + 1.0;
    for (name, which) in [("hall_identity_first", HallIdentity::First), ("hall_identity_second", HallIdentity::Second)] {
        let r = hall_identity_residual(&a, &b, which).expect("same grid");
        out.push((name, r.value / hall_scale));
    }

    let sa = seminorms(&a);
    let split = laplacian(&a).sub(&grad_div(&a).sub(&curl_curl(&a)));
    out.push(("laplacian_grad_div_curl_curl", l2_norm(&split) / sa.h2));
    let eq = equivalence_residuals(&a);
    out.push(("delta_split", eq.delta_split / sa.h2.powi(2)));
    out.push(("h3_split", eq.h3_split / sa.h3.powi(2)));
    let equ = equivalence_residuals(&u);
    let su = seminorms(&u);
    out.push(("h3_split_div_free", equ.h3_split_div_free.expect("divergence-free input") / su.h3.powi(2)));

    let pa = leray_project(&a);
    let norm_a = l2_norm(&a);
    out.push(("leray_idempotent", l2_norm(&leray_project(&pa).sub(&pa)) / norm_a));
    out.push(("leray_orthogonal", inner_quadrature(&pa, &a.sub(&pa)).abs() / norm_a.powi(2)));

    let state = State::new(u.clone(), b.clone(), 0.0).expect("divergence-free u");
    let other = State::new(v, h, 0.0).expect("divergence-free u");
    for c in [cancellation_checks(&state), pair_cancellation_checks(&state, &other)] {
        for (name, r) in &c.residuals {
            out.push((name, r / c.scale));
        }
    }
    out
}

/// Calculus identities, norm splits, projection properties and pairing
/// cancellations over seeded random band-limited fields.
pub fn identity_suite(config: &SuiteConfig) -> Result<Vec<CheckOutcome>, super::ExperimentError> {
    let g = GridSpec::standard(config.n)?;
    if config.max_kmax < 2 || 2 * config.max_kmax > g.cutoff() {
        return Err(super::ExperimentError::InvalidInput(format!(
            "max_kmax must lie in [2, {}] so products stay alias-free",
            g.cutoff() / 2
        )));
    }
    let per_seed: Vec<Vec<(&'static str, f64)>> = (0..config.seeds as u64)
        .into_par_iter()
        .map(|s| checks_for_seed(&g, s, 2 + (s as usize) % (config.max_kmax - 1)))
        .collect();
    let mut outcomes: Vec<CheckOutcome> = Vec::new();
    for row in &per_seed {
        for &(name, ratio) in row {
            match outcomes.iter_mut().find(|o| o.name == name) {
                Some(o) => {
                    o.worst = o.worst.max(ratio);
                    o.samples += 1;
                }
                None => outcomes.push(CheckOutcome {
                    name,
                    worst: ratio,
                    tolerance: config.tolerance,
                    samples: 1,
                    passed: false,
                }),
            }
        }
    }
    for o in outcomes.iter_mut() {
        o.passed = o.worst <= o.tolerance;
    }
    Ok(outcomes)
}
