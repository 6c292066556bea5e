//! Periodic grid, spectral storage and physical/spectral transforms.
//!
//! Fields live on the torus `[0, L)³` and are stored by their Fourier
//! coefficients normalized as grid averages: `f(x) = Σ_k f̂(k) e^{ik·x}`.
//! With that normalization Parseval reads `mean(|f|²) = Σ |f̂|²`, and every
//! `L²` integral is the box volume times a coefficient sum.

mod fft;
mod field;
mod grid;
mod synth;

use thiserror::Error;

pub use field::{dealias, dealias_scalar, transform, Direction, PhysicalVector, ScalarField, VectorField};
pub(crate) use field::{dealias_in_place, forward_many, inverse_many, ZERO};
pub use grid::{make_grid, GridSpec};
pub use synth::{synth_field, SynthSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("resolution must be even (got {0})")]
    OddResolution(usize),
    #[error("resolution must be at least 8 (got {0})")]
    ResolutionTooSmall(usize),
    #[error("box length must be positive and finite (got {0})")]
    BadLength(f64),
    #[error("dealias fraction must lie in (0, 1] (got {0})")]
    BadDealias(f64),
    #[error("array has {got} entries, grid expects {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("kmax {kmax} lies outside the dealias mask (cutoff {cutoff})")]
    KmaxOutsideMask { kmax: usize, cutoff: usize },
    #[error("mode {0:?} cannot be represented as a real single mode on this grid")]
    ModeNotRepresentable([i64; 3]),
}
