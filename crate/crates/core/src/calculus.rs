//! Spectral differential operators, Leray projection, the spectral mollifier
//! and dealiased pointwise products.
//!
//! Every linear operator here is a Fourier multiplier, so they commute with
//! each other and with [`dealias`](crate::fields::dealias). Products are
//! formed on the grid and dealiased once; for inputs inside the 2/3 mask the
//! retained modes are then exact.

use num_complex::Complex64;
use thiserror::Error;

use crate::fields::{
    dealias_in_place, forward_many, inverse_many, FieldError, GridSpec, PhysicalVector, ScalarField, VectorField,
    ZERO,
};
use crate::norms::l2_norm;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CalculusError {
    #[error("{kind:?} is not defined for a {rank} field")]
    RankMismatch { kind: DerivKind, rank: &'static str },
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivKind {
    Grad,
    Div,
    Curl,
    Laplacian,
    CurlCurl,
    GradDiv,
}

/// A scalar or vector field, for the rank-generic [`derive`].
#[derive(Clone, Debug)]
pub enum AnyField {
    Scalar(ScalarField),
    Vector(VectorField),
}

impl AnyField {
    fn rank(&self) -> &'static str {
        match self {
            AnyField::Scalar(_) => "scalar",
            AnyField::Vector(_) => "vector",
        }
    }

    pub fn into_vector(self) -> Option<VectorField> {
        match self {
            AnyField::Vector(v) => Some(v),
            AnyField::Scalar(_) => None,
        }
    }

    pub fn into_scalar(self) -> Option<ScalarField> {
        match self {
            AnyField::Scalar(s) => Some(s),
            AnyField::Vector(_) => None,
        }
    }
}

impl From<ScalarField> for AnyField {
    fn from(s: ScalarField) -> Self {
        AnyField::Scalar(s)
    }
}

impl From<VectorField> for AnyField {
    fn from(v: VectorField) -> Self {
        AnyField::Vector(v)
    }
}

/// Exact spectral differentiation.
pub fn derive(field: &AnyField, kind: DerivKind) -> Result<AnyField, CalculusError> {
    use DerivKind::*;
    match (field, kind) {
        (AnyField::Scalar(s), Grad) => Ok(grad(s).into()),
        (AnyField::Scalar(s), Laplacian) => Ok(laplacian_scalar(s).into()),
        (AnyField::Vector(v), Div) => Ok(div(v).into()),
        (AnyField::Vector(v), Curl) => Ok(curl(v).into()),
        (AnyField::Vector(v), Laplacian) => Ok(laplacian(v).into()),
        (AnyField::Vector(v), CurlCurl) => Ok(curl_curl(v).into()),
        (AnyField::Vector(v), GradDiv) => Ok(grad_div(v).into()),
        (f, kind) => Err(CalculusError::RankMismatch { kind, rank: f.rank() }),
    }
}

#[inline]
fn k2(k: [f64; 3]) -> f64 {
    k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
}

pub fn grad(f: &ScalarField) -> VectorField {
    let g = f.grid();
    let len = g.len();
    let mut out = [vec![ZERO; len], vec![ZERO; len], vec![ZERO; len]];
    for (idx, &c) in f.coeffs().iter().enumerate() {
        let k = g.k_vec(idx);
        for d in 0..3 {
            out[d][idx] = I * k[d] * c;
        }
    }
    VectorField::from_components(g, out).expect("shape preserved")
}

pub fn div(v: &VectorField) -> ScalarField {
    let g = v.grid();
    let coeffs = (0..g.len())
        .map(|idx| {
            let k = g.k_vec(idx);
            I * (k[0] * v.component(0)[idx] + k[1] * v.component(1)[idx] + k[2] * v.component(2)[idx])
        })
        .collect();
    ScalarField::from_coeffs(g, coeffs).expect("shape preserved")
}

pub fn curl(v: &VectorField) -> VectorField {
    let g = v.grid().clone();
    v.map_modes(|idx, c| {
        let k = g.k_vec(idx);
        [
            I * (k[1] * c[2] - k[2] * c[1]),
            I * (k[2] * c[0] - k[0] * c[2]),
            I * (k[0] * c[1] - k[1] * c[0]),
        ]
    })
}

pub fn laplacian(v: &VectorField) -> VectorField {
    let g = v.grid().clone();
    v.map_multiplier(|idx| -k2(g.k_vec(idx)))
}

pub fn laplacian_scalar(f: &ScalarField) -> ScalarField {
    let g = f.grid().clone();
    f.map_spectral(|idx, c| c * -k2(g.k_vec(idx)))
}

pub fn curl_curl(v: &VectorField) -> VectorField {
    curl(&curl(v))
}

pub fn grad_div(v: &VectorField) -> VectorField {
    grad(&div(v))
}

/// Leray–Helmholtz projection onto divergence-free fields; the mean mode is left as is.
pub fn leray_project(v: &VectorField) -> VectorField {
    let g = v.grid().clone();
    v.map_modes(|idx, c| {
        let k = g.k_vec(idx);
        let kk = k2(k);
        if kk == 0.0 {
            return c;
        }
        let kc = (k[0] * c[0] + k[1] * c[1] + k[2] * c[2]) / kk;
        [c[0] - k[0] * kc, c[1] - k[1] * kc, c[2] - k[2] * kc]
    })
}

/// Whether the flat index lies inside the mollifier band `|m|∞ <= level`.
#[inline]
pub fn in_mollifier_band(grid: &GridSpec, idx: usize, level: usize) -> bool {
    grid.mode_vec(idx).iter().all(|m| m.unsigned_abs() as usize <= level)
}

/// Sharp spectral low-pass keeping modes with `|m|∞ <= level`.
pub fn mollify(v: &VectorField, level: usize) -> VectorField {
    let g = v.grid().clone();
    v.map_multiplier(|idx| if in_mollifier_band(&g, idx, level) { 1.0 } else { 0.0 })
}

pub fn mollify_scalar(f: &ScalarField, level: usize) -> ScalarField {
    let g = f.grid().clone();
    f.map_spectral(|idx, c| if in_mollifier_band(&g, idx, level) { c } else { ZERO })
}

fn check_grids(a: &GridSpec, b: &GridSpec) -> Result<(), CalculusError> {
    if a != b {
        return Err(FieldError::GridMismatch.into());
    }
    Ok(())
}

pub(crate) fn phys_cross(a: &PhysicalVector, b: &PhysicalVector) -> PhysicalVector {
    let len = a[0].len();
    let mut out = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    for p in 0..len {
        out[0][p] = a[1][p] * b[2][p] - a[2][p] * b[1][p];
        out[1][p] = a[2][p] * b[0][p] - a[0][p] * b[2][p];
        out[2][p] = a[0][p] * b[1][p] - a[1][p] * b[0][p];
    }
    out
}

/// Forward transform of grid values followed by one dealias pass.
pub(crate) fn to_spectral_dealiased(grid: &GridSpec, v: &PhysicalVector) -> VectorField {
    let mut comps: [Vec<Complex64>; 3] =
        forward_many(grid, &[&v[0], &v[1], &v[2]]).try_into().expect("three components");
    for c in comps.iter_mut() {
        dealias_in_place(grid, c);
    }
    VectorField::from_components(grid, comps).expect("shape preserved")
}

/// `∂_j f_i` on the grid, indexed `[i][j]`.
pub(crate) fn gradient_physical(f: &VectorField) -> [PhysicalVector; 3] {
    let g = f.grid();
    let len = g.len();
    let mut derivs: Vec<Vec<Complex64>> = Vec::with_capacity(9);
    for i in 0..3 {
        for j in 0..3 {
            let comp = f.component(i);
            derivs.push((0..len).map(|idx| I * g.k_vec(idx)[j] * comp[idx]).collect());
        }
    }
    let refs: Vec<&[Complex64]> = derivs.iter().map(|d| d.as_slice()).collect();
    let mut phys = inverse_many(g, &refs).into_iter();
    let mut next = || -> PhysicalVector { [phys.next().unwrap(), phys.next().unwrap(), phys.next().unwrap()] };
    [next(), next(), next()]
}

pub(crate) fn phys_advect(u: &PhysicalVector, grad_f: &[PhysicalVector; 3]) -> PhysicalVector {
    let len = u[0].len();
    let mut out = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    for (i, o) in out.iter_mut().enumerate() {
        let gi = &grad_f[i];
        for p in 0..len {
            o[p] = u[0][p] * gi[0][p] + u[1][p] * gi[1][p] + u[2][p] * gi[2][p];
        }
    }
    out
}

/// Dealiased pointwise cross product `a × b`.
pub fn cross(a: &VectorField, b: &VectorField) -> Result<VectorField, CalculusError> {
    check_grids(a.grid(), b.grid())?;
    let g = a.grid();
    let pa = a.to_physical();
    let pb = b.to_physical();
    Ok(to_spectral_dealiased(g, &phys_cross(&pa, &pb)))
}

/// Dealiased `[u·∇] f`.
pub fn advect(u: &VectorField, f: &VectorField) -> Result<VectorField, CalculusError> {
    check_grids(u.grid(), f.grid())?;
    let g = u.grid();
    let pu = u.to_physical();
    let gf = gradient_physical(f);
    Ok(to_spectral_dealiased(g, &phys_advect(&pu, &gf)))
}

/// Dealiased pointwise dot product.
pub fn dot(a: &VectorField, b: &VectorField) -> Result<ScalarField, CalculusError> {
    check_grids(a.grid(), b.grid())?;
    let g = a.grid();
    let pa = a.to_physical();
    let pb = b.to_physical();
    let vals: Vec<f64> = (0..g.len()).map(|p| pa[0][p] * pb[0][p] + pa[1][p] * pb[1][p] + pa[2][p] * pb[2][p]).collect();
    let mut s = ScalarField::from_physical(g, &vals)?;
    dealias_in_place(g, s.coeffs_mut());
    Ok(s)
}

/// Dealiased pointwise product `s v`.
pub fn scalar_times(s: &ScalarField, v: &VectorField) -> Result<VectorField, CalculusError> {
    check_grids(s.grid(), v.grid())?;
    let g = v.grid();
    let ps = s.to_physical();
    let pv = v.to_physical();
    let prod: PhysicalVector = [0, 1, 2].map(|c| ps.iter().zip(&pv[c]).map(|(a, b)| a * b).collect());
    Ok(to_spectral_dealiased(g, &prod))
}

/// Which of the two Hall-term commutator identities to check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HallIdentity {
    /// `∇×((∇×A)×B) − (∇×∇×A)×B = (∇×A) div B − 2[(∇×A)·∇]B − (∇×A)×(∇×B) + ∇((∇×A)·B)`
    First,
    /// The same identity with `∇×A` replaced by `∇×∇×A`.
    Second,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HallIdentityResidual {
    /// `‖lhs − rhs‖_{L²}`.
    pub value: f64,
    /// Both inputs lie inside the dealias mask, so every product is exact.
    pub alias_free: bool,
}

/// Evaluate both sides of a Hall commutator identity term by term.
pub fn hall_identity_residual(
    a: &VectorField,
    b: &VectorField,
    which: HallIdentity,
) -> Result<HallIdentityResidual, CalculusError> {
    check_grids(a.grid(), b.grid())?;
    let g = a.grid();
    let alias_free = [a, b].iter().all(|f| {
        (0..g.len()).all(|idx| g.in_mask(idx) || (0..3).all(|c| f.component(c)[idx] == ZERO))
    });
    // c = ∇×A (first) or ∇×∇×A (second); the left side uses ∇×c as the "next" curl.
    let c = match which {
        HallIdentity::First => curl(a),
        HallIdentity::Second => curl_curl(a),
    };
    let curl_c = curl(&c);

    let lhs = curl(&cross(&c, b)?).sub(&cross(&curl_c, b)?);

    let t1 = scalar_times(&div(b), &c)?;
    let t2 = advect(&c, b)?.scaled(2.0);
    let t3 = cross(&c, &curl(b))?;
    let t4 = grad(&dot(&c, b)?);
    let rhs = t1.sub(&t2).sub(&t3).add(&t4);

    Ok(HallIdentityResidual { value: l2_norm(&lhs.sub(&rhs)), alias_free })
}
