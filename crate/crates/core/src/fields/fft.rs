//! Pencil-wise 3D complex FFT on an `n³` row-major buffer.
//!
//! Index `(i, j, l)` maps to `(i * n + j) * n + l`; `l` is contiguous. Each
//! axis pass transforms independent pencils, so the passes run in parallel
//! without changing the arithmetic performed on any single pencil.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub(crate) struct Fft3 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft3 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    /// Forward transform scaled by `1/n³`, so coefficients are grid averages.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.process(data, &self.forward);
        let scale = 1.0 / (self.n * self.n * self.n) as f64;
        data.par_iter_mut().for_each(|c| *c *= scale);
    }

    /// Unscaled inverse transform (synthesis from grid-average coefficients).
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.process(data, &self.inverse);
    }

    fn process(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        let plane = n * n;
        assert_eq!(data.len(), plane * n, "buffer does not match grid");
        let scratch_len = fft.get_inplace_scratch_len();

        // axis 2: contiguous rows
        data.par_chunks_mut(plane).for_each_init(
            || vec![ZERO; scratch_len],
            |scratch, chunk| fft.process_with_scratch(chunk, scratch),
        );

        // axis 1: transpose each plane, transform, transpose back
        data.par_chunks_mut(plane).for_each_init(
            || (vec![ZERO; plane], vec![ZERO; scratch_len]),
            |(buf, scratch), chunk| {
                for j in 0..n {
                    for l in 0..n {
                        buf[l * n + j] = chunk[j * n + l];
                    }
                }
                fft.process_with_scratch(buf, scratch);
                for l in 0..n {
                    for j in 0..n {
                        chunk[j * n + l] = buf[l * n + j];
                    }
                }
            },
        );

        // axis 0: global transpose to (j, l, i) layout
        let mut tmp = vec![ZERO; plane * n];
        {
            let src: &[Complex64] = data;
            tmp.par_chunks_mut(plane).enumerate().for_each(|(j, chunk)| {
                for l in 0..n {
                    for i in 0..n {
                        chunk[l * n + i] = src[(i * n + j) * n + l];
                    }
                }
            });
        }
        tmp.par_chunks_mut(plane).for_each_init(
            || vec![ZERO; scratch_len],
            |scratch, chunk| fft.process_with_scratch(chunk, scratch),
        );
        data.par_chunks_mut(plane).enumerate().for_each(|(i, chunk)| {
            for j in 0..n {
                for l in 0..n {
                    chunk[j * n + l] = tmp[(j * n + l) * n + i];
                }
            }
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Direct O(N²) DFT on an 8³ grid as an independent reference.
    fn naive_dft(data: &[Complex64], n: usize, sign: f64) -> Vec<Complex64> {
        let mut out = vec![ZERO; data.len()];
        let w = 2.0 * std::f64::consts::PI / n as f64;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let mut acc = ZERO;
                    for i in 0..n {
                        for j in 0..n {
                            for l in 0..n {
                                let phase = sign * w * ((a * i + b * j + c * l) % n) as f64;
                                acc += data[(i * n + j) * n + l] * Complex64::from_polar(1.0, phase);
                            }
                        }
                    }
                    out[(a * n + b) * n + c] = acc;
                }
            }
        }
        out
    }

    #[test]
    fn matches_naive_dft() {
        let n = 8;
        let fft = Fft3::new(n);
        let data: Vec<Complex64> = (0..n * n * n)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut fwd = data.clone();
        fft.forward(&mut fwd);
        let reference = naive_dft(&data, n, -1.0);
        for (a, b) in fwd.iter().zip(&reference) {
            assert!((a * (n * n * n) as f64 - b).norm() < 1e-10);
        }
        let mut inv = data.clone();
        fft.inverse(&mut inv);
        let reference = naive_dft(&data, n, 1.0);
        for (a, b) in inv.iter().zip(&reference) {
            assert!((a - b).norm() < 1e-10);
        }
    }
}
