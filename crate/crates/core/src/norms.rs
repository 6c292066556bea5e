//! `Lᵖ` norms, Sobolev seminorms, norm-equivalence residuals and
//! Gagliardo–Nirenberg ratio monitors on the periodic box.

use num_complex::Complex64;
use thiserror::Error;

use crate::calculus::{curl_curl, grad_div, laplacian};
use crate::fields::{GridSpec, ScalarField, VectorField, ZERO};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NormError {
    #[error("unsupported exponent p = {0} (expected 2, 3, 6 or infinity)")]
    UnsupportedExponent(f64),
}

/// Scalar or vector fields, seen as collections of spectral components.
pub trait SpectralField {
    fn grid(&self) -> &GridSpec;
    fn spectral_components(&self) -> Vec<&[Complex64]>;
    /// Pointwise Euclidean magnitude on the grid.
    fn magnitudes(&self) -> Vec<f64>;
}

impl SpectralField for ScalarField {
    fn grid(&self) -> &GridSpec {
        ScalarField::grid(self)
    }

    fn spectral_components(&self) -> Vec<&[Complex64]> {
        vec![self.coeffs()]
    }

    fn magnitudes(&self) -> Vec<f64> {
        self.to_physical().into_iter().map(f64::abs).collect()
    }
}

impl SpectralField for VectorField {
    fn grid(&self) -> &GridSpec {
        VectorField::grid(self)
    }

    fn spectral_components(&self) -> Vec<&[Complex64]> {
        self.components().iter().map(|c| c.as_slice()).collect()
    }

    fn magnitudes(&self) -> Vec<f64> {
        let p = self.to_physical();
        (0..p[0].len()).map(|i| (p[0][i] * p[0][i] + p[1][i] * p[1][i] + p[2][i] * p[2][i]).sqrt()).collect()
    }
}

/// `vol · Σ_k w(k) Σ_c |f̂_c(k)|²`.
fn weighted_sq<F: SpectralField + ?Sized>(f: &F, weight: impl Fn([f64; 3]) -> f64) -> f64 {
    let g = f.grid();
    let comps = f.spectral_components();
    let mut acc = 0.0;
    for idx in 0..g.len() {
        let e: f64 = comps.iter().map(|c| c[idx].norm_sqr()).sum();
        if e != 0.0 {
            acc += weight(g.k_vec(idx)) * e;
        }
    }
    acc * g.volume()
}

fn k2(k: [f64; 3]) -> f64 {
    k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
}

/// Spectral `L²` norm.
pub fn l2_norm(v: &VectorField) -> f64 {
    weighted_sq(v, |_| 1.0).sqrt()
}

pub fn l2_norm_scalar(f: &ScalarField) -> f64 {
    weighted_sq(f, |_| 1.0).sqrt()
}

/// `‖∇f‖_{L²}`.
pub fn grad_l2<F: SpectralField + ?Sized>(f: &F) -> f64 {
    weighted_sq(f, k2).sqrt()
}

/// `‖Δf‖_{L²}`.
pub fn lap_l2<F: SpectralField + ?Sized>(f: &F) -> f64 {
    weighted_sq(f, |k| k2(k) * k2(k)).sqrt()
}

/// Real `L²` pairing evaluated spectrally.
pub fn inner_spectral(a: &VectorField, b: &VectorField) -> f64 {
    let g = a.grid();
    let mut acc = 0.0;
    for c in 0..3 {
        for (x, y) in a.component(c).iter().zip(b.component(c)) {
            acc += (x * y.conj()).re;
        }
    }
    acc * g.volume()
}

/// Real `L²` pairing by grid quadrature, `vol/N Σ a·b`.
pub fn inner_quadrature(a: &VectorField, b: &VectorField) -> f64 {
    let g = a.grid();
    let pa = a.to_physical();
    let pb = b.to_physical();
    let mut acc = 0.0;
    for c in 0..3 {
        for (x, y) in pa[c].iter().zip(&pb[c]) {
            acc += x * y;
        }
    }
    acc * g.volume() / g.len() as f64
}

/// `‖f‖_{Lᵖ}` for `p ∈ {2, 3, 6, ∞}`; finite `p` uses grid quadrature.
pub fn lp_norm<F: SpectralField + ?Sized>(f: &F, p: f64) -> Result<f64, NormError> {
    let mags = f.magnitudes();
    let g = f.grid();
    let w = g.volume() / g.len() as f64;
    if p == f64::INFINITY {
        return Ok(mags.iter().fold(0.0f64, |m, &v| m.max(v)));
    }
    let sum: f64 = if p == 2.0 {
        mags.iter().map(|v| v * v).sum()
    } else if p == 3.0 {
        mags.iter().map(|v| v * v * v).sum()
    } else if p == 6.0 {
        mags.iter().map(|v| (v * v * v).powi(2)).sum()
    } else {
        return Err(NormError::UnsupportedExponent(p));
    };
    Ok((sum * w).powf(1.0 / p))
}

/// Torus `L²`-based seminorms and norms of a vector field.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct SeminormReport {
    pub l2: f64,
    pub grad_l2: f64,
    pub lap_l2: f64,
    pub curl_lap_l2: f64,
    pub div_lap_l2: f64,
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
}

pub fn seminorms(f: &VectorField) -> SeminormReport {
    let g = f.grid();
    let mut sums = [0.0f64; 5];
    for idx in 0..g.len() {
        let c = [f.component(0)[idx], f.component(1)[idx], f.component(2)[idx]];
        let e = c[0].norm_sqr() + c[1].norm_sqr() + c[2].norm_sqr();
        if e == 0.0 {
            continue;
        }
        let k = g.k_vec(idx);
        let kk = k2(k);
        // |k·ĉ|² and |k×ĉ|² split |k|²|ĉ|²
        let kc = k[0] * c[0] + k[1] * c[1] + k[2] * c[2];
        let kxc = [k[1] * c[2] - k[2] * c[1], k[2] * c[0] - k[0] * c[2], k[0] * c[1] - k[1] * c[0]];
        let curl2 = kxc[0].norm_sqr() + kxc[1].norm_sqr() + kxc[2].norm_sqr();
        sums[0] += e;
        sums[1] += kk * e;
        sums[2] += kk * kk * e;
        sums[3] += kk * kk * curl2;
        sums[4] += kk * kk * kc.norm_sqr();
    }
    let vol = g.volume();
    let [l2s, g2, lap2, curl_lap2, div_lap2] = sums.map(|s| s * vol);
    let h1s = l2s + g2;
    let h2s = h1s + lap2;
    let h3s = h2s + curl_lap2 + div_lap2;
    SeminormReport {
        l2: l2s.sqrt(),
        grad_l2: g2.sqrt(),
        lap_l2: lap2.sqrt(),
        curl_lap_l2: curl_lap2.sqrt(),
        div_lap_l2: div_lap2.sqrt(),
        h1: h1s.sqrt(),
        h2: h2s.sqrt(),
        h3: h3s.sqrt(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EquivalenceResiduals {
    /// `|‖Δf‖² − ‖∇×∇×f‖² − ‖∇div f‖²|`.
    pub delta_split: f64,
    /// `|‖∇Δf‖² − ‖∇×Δf‖²|`, only when `div f` vanishes.
    pub h3_split_div_free: Option<f64>,
    /// `|‖∇Δf‖² − ‖div Δf‖² − ‖∇×Δf‖²|` for any field.
    pub h3_split: f64,
}

pub fn equivalence_residuals(f: &VectorField) -> EquivalenceResiduals {
    let lap = laplacian(f);
    let lap2 = l2_norm(&lap).powi(2);
    let cc2 = l2_norm(&curl_curl(f)).powi(2);
    let gd2 = l2_norm(&grad_div(f)).powi(2);
    let delta_split = (lap2 - cc2 - gd2).abs();

    // ‖∇Δf‖² as the sum of component gradients
    let grad_lap2: f64 = (0..3).map(|c| grad_l2(&lap.component_field(c)).powi(2)).sum();
    let curl_lap2 = l2_norm(&crate::calculus::curl(&lap)).powi(2);
    let div_lap2 = l2_norm_scalar(&crate::calculus::div(&lap)).powi(2);
    let h3_split = (grad_lap2 - curl_lap2 - div_lap2).abs();

    let div_f = l2_norm_scalar(&crate::calculus::div(f));
    let report = seminorms(f);
    let div_free = div_f <= 1e-12 * report.h1 + 1e-14;
    EquivalenceResiduals {
        delta_split,
        h3_split_div_free: div_free.then(|| (grad_lap2 - curl_lap2).abs()),
        h3_split,
    }
}

/// Gagliardo–Nirenberg ratios; `None` marks a vanishing denominator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GnRatios {
    pub r6: Option<f64>,
    pub r3: Option<f64>,
    pub rinf: Option<f64>,
}

trait WithoutMean: Sized {
    fn without_mean(&self) -> Self;
}

impl WithoutMean for ScalarField {
    fn without_mean(&self) -> Self {
        let mut out = self.clone();
        out.coeffs_mut()[0] = ZERO;
        out
    }
}

impl WithoutMean for VectorField {
    fn without_mean(&self) -> Self {
        let mut out = self.clone();
        for c in 0..3 {
            out.component_mut(c)[0] = ZERO;
        }
        out
    }
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den > 0.0 && den.is_finite()).then(|| num / den)
}

/// Monitors; the mean is removed before evaluation.
#[allow(private_bounds)]
pub fn gn_ratios<F: SpectralField + WithoutMean>(f: &F) -> GnRatios {
    let f = f.without_mean();
    let l2 = lp_norm(&f, 2.0).expect("supported");
    let l3 = lp_norm(&f, 3.0).expect("supported");
    let l6 = lp_norm(&f, 6.0).expect("supported");
    let linf = lp_norm(&f, f64::INFINITY).expect("supported");
    let g = grad_l2(&f);
    let lap = lap_l2(&f);
    GnRatios {
        r6: ratio(l6, g),
        r3: ratio(l3, (l2 * g).sqrt()),
        rinf: ratio(linf, (g * lap).sqrt()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{derive, grad, AnyField, DerivKind};
    use crate::fields::{synth_field, SynthSpec};
    use std::f64::consts::PI;

    fn random(n: usize, seed: u64, kmax: usize, divfree: bool) -> VectorField {
        let g = GridSpec::standard(n).unwrap();
        synth_field(&g, &SynthSpec::RandomBandlimited { seed, kmax, amplitude: 1.0, divergence_free: divfree })
            .unwrap()
    }

    fn sin_y(g: &GridSpec) -> VectorField {
        synth_field(g, &SynthSpec::SingleMode { k: [0, 1, 0], direction: [1.0, 0.0, 0.0], amplitude: 1.0 }).unwrap()
    }

    #[test]
    fn shear_norms() {
        let g = GridSpec::standard(16).unwrap();
        let f = sin_y(&g);
        let expected = ((2.0 * PI).powi(3) / 2.0).sqrt();
        assert!((lp_norm(&f, 2.0).unwrap() - expected).abs() < 1e-12 * expected);
        let r = seminorms(&f);
        assert!((r.l2 - expected).abs() < 1e-12 * expected);
        assert!((r.grad_l2 - r.l2).abs() < 1e-12 * expected);
        assert!((r.lap_l2 - r.l2).abs() < 1e-12 * expected);
    }

    #[test]
    fn zero_field_norms() {
        let g = GridSpec::standard(8).unwrap();
        let z = VectorField::zeros(&g);
        for p in [2.0, 3.0, 6.0, f64::INFINITY] {
            assert_eq!(lp_norm(&z, p).unwrap(), 0.0);
        }
        assert_eq!(seminorms(&z), SeminormReport::default());
        let e = equivalence_residuals(&z);
        assert_eq!((e.delta_split, e.h3_split_div_free), (0.0, Some(0.0)));
        assert_eq!(gn_ratios(&z), GnRatios { r6: None, r3: None, rinf: None });
    }

    #[test]
    fn unsupported_exponent() {
        let g = GridSpec::standard(8).unwrap();
        assert_eq!(lp_norm(&VectorField::zeros(&g), 4.0), Err(NormError::UnsupportedExponent(4.0)));
    }

    // Oracle: the same band-limited field sampled on a grid of twice the resolution.
    #[test]
    fn l3_matches_refined_grid() {
        let coarse = random(32, 21, 4, false);
        let fine_grid = GridSpec::standard(64).unwrap();
        let mut fine = VectorField::zeros(&fine_grid);
        for idx in 0..coarse.grid().len() {
            let m = coarse.grid().mode_vec(idx);
            if let Some(j) = fine_grid.index_of_mode(m) {
                for c in 0..3 {
                    fine.component_mut(c)[j] = coarse.component(c)[idx];
                }
            }
        }
        let a = lp_norm(&coarse, 3.0).unwrap();
        let b = lp_norm(&fine, 3.0).unwrap();
        assert!((a - b).abs() <= 1e-4 * b, "{a} vs {b}");
    }

    #[test]
    fn grad_matches_quadrature_of_derivative() {
        let f = random(16, 22, 5, false);
        let direct = seminorms(&f).grad_l2;
        let mut acc = 0.0;
        for c in 0..3 {
            let g = derive(&AnyField::Scalar(f.component_field(c)), DerivKind::Grad).unwrap().into_vector().unwrap();
            acc += inner_quadrature(&g, &g);
        }
        assert!((acc.sqrt() - direct).abs() <= 1e-12 * direct);
    }

    #[test]
    fn parseval_consistency() {
        let f = random(16, 23, 5, false);
        let spectral = seminorms(&f).l2;
        let quad = lp_norm(&f, 2.0).unwrap();
        assert!((spectral - quad).abs() <= 1e-12 * spectral);
        assert!((inner_spectral(&f, &f) - inner_quadrature(&f, &f)).abs() <= 1e-12 * spectral * spectral);
    }

    #[test]
    fn equivalence_on_gradient_field() {
        let g = GridSpec::standard(16).unwrap();
        let phi = ScalarField::from_physical(
            &g,
            &(0..g.len()).map(|i| g.coordinate(g.unflatten(i).0).sin()).collect::<Vec<_>>(),
        )
        .unwrap();
        let f = grad(&phi);
        assert!(l2_norm(&curl_curl(&f)) < 1e-13);
        assert!(equivalence_residuals(&f).delta_split <= 1e-13);
    }

    #[test]
    fn equivalence_on_div_free_field() {
        let f = random(32, 24, 8, true);
        let e = equivalence_residuals(&f);
        let h3 = seminorms(&f).h3;
        assert!(e.h3_split_div_free.unwrap() <= 1e-11 * h3 * h3);
        assert!(e.delta_split <= 1e-11 * (1.0 + h3 * h3));
    }

    #[test]
    fn gn_scale_invariance_on_scalar() {
        let g = GridSpec::standard(16).unwrap();
        let s = ScalarField::from_physical(
            &g,
            &(0..g.len()).map(|i| g.coordinate(g.unflatten(i).1).sin()).collect::<Vec<_>>(),
        )
        .unwrap();
        let a = gn_ratios(&s);
        let b = gn_ratios(&s.scaled(2.0));
        assert!(a.r6.unwrap().is_finite());
        assert!((a.r6.unwrap() - b.r6.unwrap()).abs() <= 1e-14 * a.r6.unwrap());
    }

    #[test]
    fn gn_r6_baseline_over_seeds() {
        let g = GridSpec::standard(32).unwrap();
        let mut sup = 0.0f64;
        for seed in 0..100 {
            let f = synth_field(&g, &SynthSpec::RandomBandlimited { seed, kmax: 8, amplitude: 1.0, divergence_free: false })
                .unwrap();
            let r = gn_ratios(&f);
            sup = sup.max(r.r6.unwrap());
        }
        assert!(sup.is_finite() && sup > 0.0);
        println!("baseline sup r6 over 100 seeds at n=32: {sup:.6}");
    }
}
