use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::field::ZERO;
use super::{FieldError, GridSpec, VectorField};
use crate::calculus::leray_project;

/// Recipe for a deterministic initial field.
#[derive(Clone, Debug, PartialEq)]
pub enum SynthSpec {
    Zero,
    /// `amplitude * direction * sin(k·x)`.
    SingleMode { k: [i64; 3], direction: [f64; 3], amplitude: f64 },
    /// Seeded Gaussian coefficients on `0 < |m|∞ <= kmax`, rescaled so that
    /// `‖∇f‖_{L²}` equals `amplitude`.
    RandomBandlimited { seed: u64, kmax: usize, amplitude: f64, divergence_free: bool },
}

pub fn synth_field(grid: &GridSpec, spec: &SynthSpec) -> Result<VectorField, FieldError> {
    match *spec {
        SynthSpec::Zero => Ok(VectorField::zeros(grid)),
        SynthSpec::SingleMode { k, direction, amplitude } => single_mode(grid, k, direction, amplitude),
        SynthSpec::RandomBandlimited { seed, kmax, amplitude, divergence_free } => {
            random_bandlimited(grid, seed, kmax, amplitude, divergence_free)
        }
    }
}

fn single_mode(grid: &GridSpec, k: [i64; 3], direction: [f64; 3], amplitude: f64) -> Result<VectorField, FieldError> {
    let mut field = VectorField::zeros(grid);
    if k == [0, 0, 0] {
        return Ok(field);
    }
    let idx = grid.index_of_mode(k).ok_or(FieldError::ModeNotRepresentable(k))?;
    if k.iter().any(|&m| m.unsigned_abs() as usize * 2 == grid.n()) {
        return Err(FieldError::ModeNotRepresentable(k));
    }
    let neg = grid.negate(idx);
    // sin(θ) = (e^{iθ} - e^{-iθ}) / 2i
    for (c, &d) in direction.iter().enumerate() {
        let a = amplitude * d;
        field.component_mut(c)[idx] = Complex64::new(0.0, -0.5 * a);
        field.component_mut(c)[neg] = Complex64::new(0.0, 0.5 * a);
    }
    Ok(field)
}

fn random_bandlimited(
    grid: &GridSpec,
    seed: u64,
    kmax: usize,
    amplitude: f64,
    divergence_free: bool,
) -> Result<VectorField, FieldError> {
    if kmax > grid.cutoff() {
        return Err(FieldError::KmaxOutsideMask { kmax, cutoff: grid.cutoff() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = grid.len();
    let mut raw = [vec![ZERO; len], vec![ZERO; len], vec![ZERO; len]];
    for idx in 0..len {
        let m = grid.mode_vec(idx);
        let linf = m.iter().map(|v| v.unsigned_abs() as usize).max().unwrap_or(0);
        if linf == 0 || linf > kmax {
            continue;
        }
        for comp in raw.iter_mut() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            comp[idx] = Complex64::new(re, im);
        }
    }
    let mut sym = [vec![ZERO; len], vec![ZERO; len], vec![ZERO; len]];
    for (out, src) in sym.iter_mut().zip(&raw) {
        for idx in 0..len {
            out[idx] = (src[idx] + src[grid.negate(idx)].conj()) * 0.5;
        }
    }
    let mut field = VectorField::from_components(grid, sym)?;
    if divergence_free {
        field = leray_project(&field);
    }
    let grad = grad_l2(&field);
    if grad > 0.0 {
        field = field.scaled(amplitude / grad);
    }
    Ok(field)
}

fn grad_l2(field: &VectorField) -> f64 {
    let g = field.grid();
    let mut acc = 0.0;
    for idx in 0..g.len() {
        let k = g.k_vec(idx);
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        for c in 0..3 {
            acc += k2 * field.component(c)[idx].norm_sqr();
        }
    }
    (acc * g.volume()).sqrt()
}
