//! Discrete Fourier transforms on square grids and Fourier multipliers in the
//! periodic regime.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::{GridFunction, GridSpec};

/// Forward and inverse FFTs for `n^dim` row-major data.
#[derive(Clone)]
pub struct Fourier {
    dim: usize,
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fourier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Fourier {{ dim: {}, n: {} }}", self.dim, self.n)
    }
}

impl Fourier {
    pub fn new(dim: usize, n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fourier {
            dim,
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    pub fn for_spec(spec: &GridSpec) -> Self {
        Self::new(spec.dim, spec.n)
    }

    fn run(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.n.pow(self.dim as u32));
        // rustfft transforms every length-n chunk, i.e. every row.
        plan.process(data);
        if self.dim == 2 {
            transpose(data, self.n);
            plan.process(data);
            transpose(data, self.n);
        }
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.fwd);
    }

    /// Inverse transform including the `1/n^dim` normalisation.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inv);
        let scale = 1.0 / data.len() as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

fn transpose(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in i + 1..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

/// Angular frequency of DFT index `k` on an axis of `n` points with box
/// length `2L`: `πk/L`, with indices `k ≥ n/2` wrapped to `k - n`.
#[inline]
pub fn frequency(k: usize, n: usize, half_width: f64) -> f64 {
    let signed = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
    std::f64::consts::PI * signed / half_width
}

/// Whether index `k` is the Nyquist index of its axis.
#[inline]
pub fn is_nyquist(k: usize, n: usize) -> bool {
    k == n / 2
}

/// Frequency vector `ξ` at each flat index, paired with a Nyquist flag.
pub fn frequency_grid(spec: &GridSpec) -> Vec<([f64; 2], bool)> {
    (0..spec.len())
        .map(|idx| {
            let [kx, ky] = spec.unflatten(idx);
            let xi0 = frequency(kx, spec.n, spec.half_width);
            if spec.dim == 1 {
                ([xi0, 0.0], is_nyquist(kx, spec.n))
            } else {
                let xi1 = frequency(ky, spec.n, spec.half_width);
                ([xi0, xi1], is_nyquist(kx, spec.n) || is_nyquist(ky, spec.n))
            }
        })
        .collect()
}

/// Spectrum of `f` (unnormalised DFT).
pub fn spectrum(f: &GridFunction, fft: &Fourier) -> Vec<Complex64> {
    let mut data = f.to_complex();
    fft.forward(&mut data);
    data
}

/// `ℱ⁻¹[m · f̂]` given a precomputed spectrum and a multiplier evaluated per
/// flat frequency index.
pub fn apply_multiplier(
    spec: &GridSpec,
    fhat: &[Complex64],
    fft: &Fourier,
    m: impl Fn(usize, [f64; 2], bool) -> Complex64,
) -> Vec<Complex64> {
    let freqs = frequency_grid(spec);
    let mut data: Vec<Complex64> = fhat
        .iter()
        .zip(freqs.iter().enumerate())
        .map(|(v, (idx, (xi, nyq)))| v * m(idx, *xi, *nyq))
        .collect();
    fft.inverse(&mut data);
    data
}
