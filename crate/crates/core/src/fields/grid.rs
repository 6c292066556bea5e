use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use super::fft::Fft3;
use super::FieldError;

/// Periodic cubic grid with precomputed wavenumbers, dealias mask and FFT plans.
///
/// Cheap to clone; all clones share the same precomputed tables. Two grids
/// compare equal when resolution, box length and dealias fraction match.
#[derive(Clone)]
pub struct GridSpec {
    inner: Arc<GridData>,
}

struct GridData {
    n: usize,
    length: f64,
    dealias_fraction: f64,
    cutoff: usize,
    /// Signed integer mode index per axis position, in FFT order.
    modes: Vec<i64>,
    /// Physical wavenumber per axis position; the Nyquist entry is zero.
    wavenumbers: Vec<f64>,
    keep: Vec<bool>,
    // per flat index
    kvecs: Vec<[f64; 3]>,
    ksq: Vec<f64>,
    mask: Vec<bool>,
    negated: Vec<usize>,
    fft: Fft3,
}

impl GridSpec {
    /// Build a grid of `n³` points on a box of edge `length`.
    ///
    /// Modes with `|m| <= floor(dealias_fraction * n / 2)` on every axis are
    /// kept by [`dealias`](super::dealias).
    pub fn new(n: usize, length: f64, dealias_fraction: f64) -> Result<Self, FieldError> {
        if !n.is_multiple_of(2) {
            return Err(FieldError::OddResolution(n));
        }
        if n < 8 {
            return Err(FieldError::ResolutionTooSmall(n));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(FieldError::BadLength(length));
        }
        if !(dealias_fraction > 0.0 && dealias_fraction <= 1.0) {
            return Err(FieldError::BadDealias(dealias_fraction));
        }
        let half = n / 2;
        let cutoff = ((dealias_fraction * half as f64) + 1e-12).floor() as usize;
        let modes: Vec<i64> = (0..n)
            .map(|m| if m <= half { m as i64 } else { m as i64 - n as i64 })
            .collect();
        let scale = 2.0 * PI / length;
        let wavenumbers = modes
            .iter()
            .map(|&m| if m as usize == half { 0.0 } else { m as f64 * scale })
            .collect();
        let keep: Vec<bool> = modes.iter().map(|&m| m.unsigned_abs() as usize <= cutoff).collect();
        let wavenumbers: Vec<f64> = wavenumbers;
        let len = n * n * n;
        let mut kvecs = Vec::with_capacity(len);
        let mut mask = Vec::with_capacity(len);
        let mut negated = Vec::with_capacity(len);
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    kvecs.push([wavenumbers[i], wavenumbers[j], wavenumbers[l]]);
                    mask.push(keep[i] && keep[j] && keep[l]);
                    negated.push((((n - i) % n) * n + (n - j) % n) * n + (n - l) % n);
                }
            }
        }
        let ksq = kvecs.iter().map(|k: &[f64; 3]| k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).collect();
        Ok(Self {
            inner: Arc::new(GridData {
                n,
                length,
                dealias_fraction,
                cutoff,
                modes,
                wavenumbers,
                keep,
                kvecs,
                ksq,
                mask,
                negated,
                fft: Fft3::new(n),
            }),
        })
    }

    /// Grid on the standard `2π` box with the 2/3 dealias rule.
    pub fn standard(n: usize) -> Result<Self, FieldError> {
        Self::new(n, 2.0 * PI, 2.0 / 3.0)
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    pub fn length(&self) -> f64 {
        self.inner.length
    }

    pub fn dealias_fraction(&self) -> f64 {
        self.inner.dealias_fraction
    }

    /// Largest integer mode index kept per axis by the dealias mask.
    pub fn cutoff(&self) -> usize {
        self.inner.cutoff
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        let n = self.inner.n;
        n * n * n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn volume(&self) -> f64 {
        self.inner.length.powi(3)
    }

    pub fn spacing(&self) -> f64 {
        self.inner.length / self.inner.n as f64
    }

    /// Signed mode index for an axis position.
    #[inline]
    pub fn mode(&self, pos: usize) -> i64 {
        self.inner.modes[pos]
    }

    /// Wavenumber used by spectral multipliers at an axis position.
    #[inline]
    pub fn wavenumber(&self, pos: usize) -> f64 {
        self.inner.wavenumbers[pos]
    }

    #[inline]
    pub fn keeps(&self, pos: usize) -> bool {
        self.inner.keep[pos]
    }

    /// Wavevector of the flat spectral index `idx`.
    #[inline]
    pub fn k_vec(&self, idx: usize) -> [f64; 3] {
        self.inner.kvecs[idx]
    }

    /// `|k|²` of the flat spectral index `idx`.
    #[inline]
    pub fn k_squared(&self, idx: usize) -> f64 {
        self.inner.ksq[idx]
    }

    #[inline]
    pub fn mode_vec(&self, idx: usize) -> [i64; 3] {
        let (i, j, l) = self.unflatten(idx);
        let m = &self.inner.modes;
        [m[i], m[j], m[l]]
    }

    /// Whether the flat spectral index survives the dealias mask.
    #[inline]
    pub fn in_mask(&self, idx: usize) -> bool {
        self.inner.mask[idx]
    }

    #[inline]
    pub fn flatten(&self, i: usize, j: usize, l: usize) -> usize {
        let n = self.inner.n;
        (i * n + j) * n + l
    }

    #[inline]
    pub fn unflatten(&self, idx: usize) -> (usize, usize, usize) {
        let n = self.inner.n;
        (idx / (n * n), (idx / n) % n, idx % n)
    }

    /// Flat index of `-k` for the flat index of `k`.
    #[inline]
    pub fn negate(&self, idx: usize) -> usize {
        self.inner.negated[idx]
    }

    /// Flat index of an integer mode, if representable on this grid.
    pub fn index_of_mode(&self, mode: [i64; 3]) -> Option<usize> {
        let n = self.inner.n as i64;
        let half = n / 2;
        let mut pos = [0usize; 3];
        for (p, &m) in pos.iter_mut().zip(mode.iter()) {
            if m <= -half || m > half {
                return None;
            }
            *p = m.rem_euclid(n) as usize;
        }
        Some(self.flatten(pos[0], pos[1], pos[2]))
    }

    /// Physical coordinate of a grid point along one axis.
    #[inline]
    pub fn coordinate(&self, pos: usize) -> f64 {
        pos as f64 * self.spacing()
    }

    pub(crate) fn fft(&self) -> &Fft3 {
        &self.inner.fft
    }

    pub(crate) fn same_as(&self, other: &GridSpec) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self == other
    }
}

impl PartialEq for GridSpec {
    fn eq(&self, other: &Self) -> bool {
        self.inner.n == other.inner.n
            && self.inner.length == other.inner.length
            && self.inner.dealias_fraction == other.inner.dealias_fraction
    }
}

impl fmt::Debug for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GridSpec")
            .field("n", &self.inner.n)
            .field("length", &self.inner.length)
            .field("dealias_fraction", &self.inner.dealias_fraction)
            .field("cutoff", &self.inner.cutoff)
            .finish()
    }
}

/// Validate and build a grid.
pub fn make_grid(n: usize, length: f64, dealias_fraction: f64) -> Result<GridSpec, FieldError> {
    GridSpec::new(n, length, dealias_fraction)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_thirds_cutoff_on_32() {
        let g = make_grid(32, 2.0 * PI, 2.0 / 3.0).unwrap();
        assert_eq!(g.cutoff(), 10);
        assert!(g.keeps(10));
        assert!(!g.keeps(11));
        assert!(g.keeps(32 - 10));
        assert!(!g.keeps(32 - 11));
    }

    #[test]
    fn full_mask_keeps_everything() {
        let g = make_grid(8, 2.0 * PI, 1.0).unwrap();
        assert!((0..g.len()).all(|i| g.in_mask(i)));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(
            make_grid(7, 1.0, 0.5).unwrap_err().to_string(),
            "resolution must be even (got 7)"
        );
        assert!(matches!(make_grid(6, 1.0, 0.5), Err(FieldError::ResolutionTooSmall(6))));
        assert!(matches!(make_grid(8, 0.0, 0.5), Err(FieldError::BadLength(_))));
        assert!(matches!(make_grid(8, 1.0, 0.0), Err(FieldError::BadDealias(_))));
        assert!(matches!(make_grid(8, 1.0, 1.5), Err(FieldError::BadDealias(_))));
    }

    #[test]
    fn wavenumber_set() {
        let g = make_grid(8, 4.0 * PI, 1.0).unwrap();
        let modes: Vec<i64> = (0..8).map(|p| g.mode(p)).collect();
        assert_eq!(modes, vec![0, 1, 2, 3, 4, -3, -2, -1]);
        assert_eq!(g.wavenumber(1), 0.5);
        assert_eq!(g.wavenumber(4), 0.0);
    }

    #[test]
    fn negate_and_lookup() {
        let g = GridSpec::standard(16).unwrap();
        let idx = g.index_of_mode([1, -2, 3]).unwrap();
        assert_eq!(g.mode_vec(idx), [1, -2, 3]);
        assert_eq!(g.mode_vec(g.negate(idx)), [-1, 2, -3]);
        assert!(g.index_of_mode([-8, 0, 0]).is_none());
    }
}
