use num_complex::Complex64;

use super::{FieldError, GridSpec};

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Direction of a physical/spectral transform.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    ToSpectral,
    ToPhysical,
}

/// Scalar field stored by its spectral coefficients (grid-average normalization).
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

/// Three-component field stored by its spectral coefficients.
#[derive(Clone, Debug)]
pub struct VectorField {
    grid: GridSpec,
    comps: [Vec<Complex64>; 3],
}

/// Real grid values of a vector field, one array per component.
pub type PhysicalVector = [Vec<f64>; 3];

impl ScalarField {
    pub fn zeros(grid: &GridSpec) -> Self {
        Self { grid: grid.clone(), coeffs: vec![ZERO; grid.len()] }
    }

    pub fn from_coeffs(grid: &GridSpec, coeffs: Vec<Complex64>) -> Result<Self, FieldError> {
        if coeffs.len() != grid.len() {
            return Err(FieldError::ShapeMismatch { expected: grid.len(), got: coeffs.len() });
        }
        Ok(Self { grid: grid.clone(), coeffs })
    }

    /// Forward-transform real grid values.
    pub fn from_physical(grid: &GridSpec, values: &[f64]) -> Result<Self, FieldError> {
        if values.len() != grid.len() {
            return Err(FieldError::ShapeMismatch { expected: grid.len(), got: values.len() });
        }
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        grid.fft().forward(&mut buf);
        hermitian_part(grid, &mut buf);
        Ok(Self { grid: grid.clone(), coeffs: buf })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn to_physical(&self) -> Vec<f64> {
        let mut buf = self.coeffs.clone();
        self.grid.fft().inverse(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Largest imaginary part produced by a plain complex inverse transform.
    pub fn max_imag_residue(&self) -> f64 {
        let mut buf = self.coeffs.clone();
        self.grid.fft().inverse(&mut buf);
        buf.iter().fold(0.0, |m, c| m.max(c.im.abs()))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { grid: self.grid.clone(), coeffs: self.coeffs.iter().map(|c| c * factor).collect() }
    }

    pub fn map_spectral(&self, mut f: impl FnMut(usize, Complex64) -> Complex64) -> Self {
        let coeffs = self.coeffs.iter().enumerate().map(|(i, &c)| f(i, c)).collect();
        Self { grid: self.grid.clone(), coeffs }
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }
}

impl VectorField {
    pub fn zeros(grid: &GridSpec) -> Self {
        let z = vec![ZERO; grid.len()];
        Self { grid: grid.clone(), comps: [z.clone(), z.clone(), z] }
    }

    pub fn from_components(grid: &GridSpec, comps: [Vec<Complex64>; 3]) -> Result<Self, FieldError> {
        for c in &comps {
            if c.len() != grid.len() {
                return Err(FieldError::ShapeMismatch { expected: grid.len(), got: c.len() });
            }
        }
        Ok(Self { grid: grid.clone(), comps })
    }

    /// Forward-transform real grid values (no dealiasing).
    pub fn from_physical(grid: &GridSpec, values: &PhysicalVector) -> Result<Self, FieldError> {
        for v in values {
            if v.len() != grid.len() {
                return Err(FieldError::ShapeMismatch { expected: grid.len(), got: v.len() });
            }
        }
        let [x, y, z] = forward_many(grid, &[&values[0], &values[1], &values[2]])
            .try_into()
            .expect("three components");
        Ok(Self { grid: grid.clone(), comps: [x, y, z] })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        &self.comps[c]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        &mut self.comps[c]
    }

    pub fn components(&self) -> &[Vec<Complex64>; 3] {
        &self.comps
    }

    pub fn into_components(self) -> [Vec<Complex64>; 3] {
        self.comps
    }

    pub fn component_field(&self, c: usize) -> ScalarField {
        ScalarField { grid: self.grid.clone(), coeffs: self.comps[c].clone() }
    }

    pub fn from_scalars(x: ScalarField, y: ScalarField, z: ScalarField) -> Result<Self, FieldError> {
        if !(x.grid.same_as(&y.grid) && x.grid.same_as(&z.grid)) {
            return Err(FieldError::GridMismatch);
        }
        Ok(Self { grid: x.grid, comps: [x.coeffs, y.coeffs, z.coeffs] })
    }

    /// The `k = 0` coefficient of each component.
    pub fn mean(&self) -> [f64; 3] {
        [self.comps[0][0].re, self.comps[1][0].re, self.comps[2][0].re]
    }

    pub fn to_physical(&self) -> PhysicalVector {
        let [x, y, z] = inverse_many(&self.grid, &[&self.comps[0], &self.comps[1], &self.comps[2]])
            .try_into()
            .expect("three components");
        [x, y, z]
    }

    /// Largest imaginary part over all components of an unpacked inverse transform.
    pub fn max_imag_residue(&self) -> f64 {
        (0..3).map(|c| self.component_field(c).max_imag_residue()).fold(0.0, f64::max)
    }

    /// Largest deviation from `c(-k) = conj(c(k))` over all coefficients.
    pub fn hermitian_defect(&self) -> f64 {
        let g = &self.grid;
        let mut worst = 0.0f64;
        for comp in &self.comps {
            for (idx, c) in comp.iter().enumerate() {
                worst = worst.max((c - comp[g.negate(idx)].conj()).norm());
            }
        }
        worst
    }

    pub fn max_coeff(&self) -> f64 {
        self.comps.iter().flatten().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let comps = self.comps.clone().map(|v| v.into_iter().map(|c| c * factor).collect());
        Self { grid: self.grid.clone(), comps }
    }

    /// `self + factor * other`.
    pub fn axpy(&self, factor: f64, other: &VectorField) -> Self {
        let mut out = self.clone();
        out.add_scaled(factor, other);
        out
    }

    pub fn add_scaled(&mut self, factor: f64, other: &VectorField) {
        debug_assert!(self.grid.same_as(&other.grid));
        for (a, b) in self.comps.iter_mut().zip(&other.comps) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y * factor;
            }
        }
    }

    pub fn add(&self, other: &VectorField) -> Self {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &VectorField) -> Self {
        self.axpy(-1.0, other)
    }

    /// Apply a per-mode 3×3 complex map to the coefficient vector.
    pub fn map_modes(&self, mut f: impl FnMut(usize, [Complex64; 3]) -> [Complex64; 3]) -> Self {
        let len = self.grid.len();
        let mut out = [Vec::with_capacity(len), Vec::with_capacity(len), Vec::with_capacity(len)];
        for idx in 0..len {
            let v = f(idx, [self.comps[0][idx], self.comps[1][idx], self.comps[2][idx]]);
            for (o, x) in out.iter_mut().zip(v) {
                o.push(x);
            }
        }
        Self { grid: self.grid.clone(), comps: out }
    }

    /// Per-mode real multiplier applied to every component.
    pub fn map_multiplier(&self, mut f: impl FnMut(usize) -> f64) -> Self {
        let len = self.grid.len();
        let mut out = self.comps.clone();
        for idx in 0..len {
            let m = f(idx);
            for comp in out.iter_mut() {
                comp[idx] *= m;
            }
        }
        Self { grid: self.grid.clone(), comps: out }
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().flatten().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Transform raw coefficient/value arrays between representations.
///
/// `ToSpectral` expects grid values (imaginary parts allowed) and returns
/// grid-average coefficients; `ToPhysical` is its exact inverse.
pub fn transform(grid: &GridSpec, data: &[Complex64], direction: Direction) -> Result<Vec<Complex64>, FieldError> {
    if data.len() != grid.len() {
        return Err(FieldError::ShapeMismatch { expected: grid.len(), got: data.len() });
    }
    let mut buf = data.to_vec();
    match direction {
        Direction::ToSpectral => grid.fft().forward(&mut buf),
        Direction::ToPhysical => grid.fft().inverse(&mut buf),
    }
    Ok(buf)
}

/// Inverse-transform Hermitian coefficient arrays to real grid values, two per FFT.
pub(crate) fn inverse_many(grid: &GridSpec, specs: &[&[Complex64]]) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(specs.len());
    for pair in specs.chunks(2) {
        match pair {
            [a, b] => {
                let mut buf: Vec<Complex64> =
                    a.iter().zip(b.iter()).map(|(x, y)| Complex64::new(x.re - y.im, x.im + y.re)).collect();
                grid.fft().inverse(&mut buf);
                out.push(buf.iter().map(|c| c.re).collect());
                out.push(buf.iter().map(|c| c.im).collect());
            }
            [a] => {
                let mut buf = a.to_vec();
                grid.fft().inverse(&mut buf);
                out.push(buf.iter().map(|c| c.re).collect());
            }
            _ => unreachable!(),
        }
    }
    out
}

/// Forward-transform real grid values, two per FFT. Outputs are exactly Hermitian.
pub(crate) fn forward_many(grid: &GridSpec, values: &[&[f64]]) -> Vec<Vec<Complex64>> {
    let mut out = Vec::with_capacity(values.len());
    for pair in values.chunks(2) {
        match pair {
            [a, b] => {
                let mut buf: Vec<Complex64> = a.iter().zip(b.iter()).map(|(&x, &y)| Complex64::new(x, y)).collect();
                grid.fft().forward(&mut buf);
                let len = buf.len();
                let mut fa = vec![ZERO; len];
                let mut fb = vec![ZERO; len];
                for idx in 0..len {
                    let c = buf[idx];
                    let cn = buf[grid.negate(idx)].conj();
                    fa[idx] = (c + cn) * 0.5;
                    // (c - cn) / 2i
                    let d = (c - cn) * 0.5;
                    fb[idx] = Complex64::new(d.im, -d.re);
                }
                out.push(fa);
                out.push(fb);
            }
            [a] => {
                let mut buf: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                grid.fft().forward(&mut buf);
                hermitian_part(grid, &mut buf);
                out.push(buf);
            }
            _ => unreachable!(),
        }
    }
    out
}

fn hermitian_part(grid: &GridSpec, buf: &mut [Complex64]) {
    let src = buf.to_vec();
    for (idx, c) in buf.iter_mut().enumerate() {
        *c = (src[idx] + src[grid.negate(idx)].conj()) * 0.5;
    }
}

/// Zero every mode outside the grid's dealias mask.
pub fn dealias(field: &VectorField) -> VectorField {
    let g = field.grid();
    field.map_multiplier(|idx| if g.in_mask(idx) { 1.0 } else { 0.0 })
}

pub fn dealias_scalar(field: &ScalarField) -> ScalarField {
    let g = field.grid().clone();
    field.map_spectral(|idx, c| if g.in_mask(idx) { c } else { ZERO })
}

pub(crate) fn dealias_in_place(grid: &GridSpec, comp: &mut [Complex64]) {
    for (idx, c) in comp.iter_mut().enumerate() {
        if !grid.in_mask(idx) {
            *c = ZERO;
        }
    }
}
