//! Convolution-type Calderón–Zygmund operators: Hilbert, Riesz and an odd
//! power-sign kernel, realised either by exact symbols or by direct sums of
//! the truncated kernel.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::atoms::{hardy_norm_default, AtomSpec};
use crate::error::{Error, Result};
use crate::fourier::{apply_multiplier, spectrum, Fourier};
use crate::grid::{GridFunction, GridSpec, Point, Region};
use crate::maximal::{default_radii, dyadic_scales, hl_uncentered_at, radial_maximal, Extension, TestFunction};
use crate::norms::{indicator_slice_norm, slice_norm_values, SliceParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelKind {
    /// `1/(πx)` on the line.
    Hilbert,
    /// `x_j / (2π|x|³)` in the plane, `j ∈ {0, 1}`.
    Riesz(usize),
    /// `sign(x₁)|x₁|^δ / |x|^{n+δ}`.
    PowerSign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Realization {
    Multiplier,
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CzKernel {
    pub kind: KernelKind,
    pub delta: f64,
    pub eps: f64,
    pub realization: Realization,
}

impl CzKernel {
    pub fn hilbert(spec: &GridSpec) -> Self {
        CzKernel {
            kind: KernelKind::Hilbert,
            delta: 1.0,
            eps: 2.0 * spec.h(),
            realization: Realization::Multiplier,
        }
    }

    pub fn riesz(axis: usize, spec: &GridSpec) -> Self {
        CzKernel {
            kind: KernelKind::Riesz(axis),
            delta: 1.0,
            eps: 2.0 * spec.h(),
            realization: Realization::Multiplier,
        }
    }

    pub fn power_sign(delta: f64, spec: &GridSpec) -> Self {
        CzKernel {
            kind: KernelKind::PowerSign,
            delta,
            eps: 2.0 * spec.h(),
            realization: Realization::Direct,
        }
    }

    pub fn with_realization(mut self, r: Realization) -> Self {
        self.realization = r;
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn label(&self) -> String {
        match self.kind {
            KernelKind::Hilbert => "hilbert".into(),
            KernelKind::Riesz(j) => format!("riesz{}", j + 1),
            KernelKind::PowerSign => format!("powersign({})", self.delta),
        }
    }

    /// Dimension the kernel lives in, if fixed.
    pub fn dim(&self) -> Option<usize> {
        match self.kind {
            KernelKind::Hilbert => Some(1),
            KernelKind::Riesz(_) => Some(2),
            KernelKind::PowerSign => None,
        }
    }

    /// `k(x)` for `x ≠ 0`.
    pub fn eval(&self, dim: usize, x: Point) -> f64 {
        let r = if dim == 1 { x[0].abs() } else { x[0].hypot(x[1]) };
        if r == 0.0 {
            return 0.0;
        }
        match self.kind {
            KernelKind::Hilbert => 1.0 / (std::f64::consts::PI * x[0]),
            KernelKind::Riesz(j) => x[j] / (2.0 * std::f64::consts::PI * r.powi(3)),
            KernelKind::PowerSign => x[0].signum() * x[0].abs().powf(self.delta) / r.powf(dim as f64 + self.delta),
        }
    }

    fn symbol(&self, xi: [f64; 2], nyquist: bool) -> Option<Complex64> {
        let r = xi[0].hypot(xi[1]);
        if r == 0.0 || nyquist {
            return Some(Complex64::new(0.0, 0.0));
        }
        match self.kind {
            KernelKind::Hilbert => Some(Complex64::new(0.0, -xi[0].signum())),
            KernelKind::Riesz(j) => Some(Complex64::new(0.0, -xi[j] / r)),
            KernelKind::PowerSign => None,
        }
    }
}

/// `T f`. The multiplier path works in the periodic regime; the direct path
/// sums the `ε`-truncated kernel against the zero extension of `f`.
pub fn apply_cz(t: &CzKernel, f: &GridFunction) -> Result<GridFunction> {
    let dim = f.spec.dim;
    if let Some(want) = t.dim() {
        if want != dim {
            return Err(Error::DimensionMismatch { expected: want, found: dim });
        }
    }
    if let KernelKind::Riesz(j) = t.kind {
        if j > 1 {
            return Err(Error::DimensionMismatch { expected: 2, found: j + 1 });
        }
    }
    let has_symbol = t.symbol([1.0, 0.0], false).is_some();
    if t.realization == Realization::Multiplier && has_symbol {
        let fft = Fourier::for_spec(&f.spec);
        let fhat = spectrum(f, &fft);
        let out = apply_multiplier(&f.spec, &fhat, &fft, |_, xi, nyq| t.symbol(xi, nyq).expect("symbol exists"));
        return Ok(f.with_values(out.iter().map(|c| c.re).collect()));
    }
    Ok(f.with_values(direct_fft(t, f)))
}

/// Linear convolution with the sampled truncated kernel on a doubled grid.
fn direct_fft(t: &CzKernel, f: &GridFunction) -> Vec<f64> {
    let spec = &f.spec;
    let (n, dim, h) = (spec.n, spec.dim, spec.h());
    let m = 2 * n;
    let len = m.pow(dim as u32);
    let at = |x: usize, y: usize| if dim == 1 { x } else { y * m + x };
    let mut kern = vec![Complex64::new(0.0, 0.0); len];
    let signed = |k: usize| if k < n { k as f64 } else { k as f64 - m as f64 };
    let ys = if dim == 1 { 1 } else { m };
    for ky in 0..ys {
        for kx in 0..m {
            let z = [signed(kx) * h, if dim == 2 { signed(ky) * h } else { 0.0 }];
            let r = z[0].hypot(z[1]);
            if r >= t.eps {
                kern[at(kx, ky)] = Complex64::new(spec.cell() * t.eval(dim, z), 0.0);
            }
        }
    }
    let mut data = vec![Complex64::new(0.0, 0.0); len];
    let vals = f.re();
    for idx in 0..spec.len() {
        let [ix, iy] = spec.unflatten(idx);
        data[at(ix, iy)] = Complex64::new(vals[idx], 0.0);
    }
    let fft = Fourier::new(dim, m);
    fft.forward(&mut kern);
    fft.forward(&mut data);
    for (a, b) in data.iter_mut().zip(&kern) {
        *a *= b;
    }
    fft.inverse(&mut data);
    (0..spec.len())
        .map(|idx| {
            let [ix, iy] = spec.unflatten(idx);
            data[at(ix, iy)].re
        })
        .collect()
}

/// Sample pairs `(x, y)` with `|x| ≥ 2|y|`, dense near `|x| = 2|y|`.
pub fn regularity_samples(dim: usize, count: usize, seed: u64) -> Vec<(Point, Point)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let ry = 10f64.powf(rng.random_range(-3.0..1.0));
            let u: f64 = rng.random_range(0.0..1.0);
            let rx = 2.0 * ry * 50f64.powf(u * u);
            let dir = |rng: &mut ChaCha8Rng| -> [f64; 2] {
                if dim == 1 {
                    [if rng.random_bool(0.5) { 1.0 } else { -1.0 }, 0.0]
                } else {
                    let a: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                    [a.cos(), a.sin()]
                }
            };
            let (dx, dy) = (dir(&mut rng), dir(&mut rng));
            ([rx * dx[0], rx * dx[1]], [ry * dy[0], ry * dy[1]])
        })
        .collect()
}

/// `max |k(x-y) - k(x)| |x|^{n+δ} / |y|^δ` over the pairs; `y = 0` contributes 0.
pub fn kernel_regularity_check(t: &CzKernel, dim: usize, pairs: &[(Point, Point)]) -> f64 {
    let norm = |p: Point| if dim == 1 { p[0].abs() } else { p[0].hypot(p[1]) };
    pairs
        .iter()
        .map(|&(x, y)| {
            let ry = norm(y);
            if ry == 0.0 {
                return 0.0;
            }
            let diff = (t.eval(dim, [x[0] - y[0], x[1] - y[1]]) - t.eval(dim, x)).abs();
            diff * norm(x).powf(dim as f64 + t.delta) / ry.powf(t.delta)
        })
        .fold(0.0, f64::max)
}

/// Requires `min(p_Φ⁻, q) ∈ (n/(n+δ), 1]`.
pub fn check_window(dim: usize, delta: f64, params: &SliceParams) -> Result<()> {
    let m = params.min_exponent();
    let lo = dim as f64 / (dim as f64 + delta);
    if m > lo && m <= 1.0 {
        Ok(())
    } else {
        Err(Error::ParameterWindow(format!(
            "min(p⁻, q) = {m} outside ({lo}, 1] for δ = {delta}"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CzCase {
    /// `‖Tf‖_{(E)} / ‖f‖_{(HE)}`.
    pub slice_ratio: f64,
    /// `‖Tf‖_{(HE)} / ‖f‖_{(HE)}`.
    pub hardy_ratio: f64,
}

/// Slice and Hardy ratios of `Tf` to `f` over a corpus. Functions
/// with zero Hardy norm are skipped.
pub fn cz_boundedness(t: &CzKernel, corpus: &[GridFunction], params: &SliceParams) -> Result<Vec<Option<CzCase>>> {
    let dim = corpus.first().map(|f| f.spec.dim).unwrap_or(1);
    check_window(dim, t.delta, params)?;
    let unit = params.clone().truncated();
    corpus
        .iter()
        .map(|f| {
            let hf = hardy_norm_default(f, &unit)?;
            if hf == 0.0 {
                return Ok(None);
            }
            let tf = apply_cz(t, f)?;
            Ok(Some(CzCase {
                slice_ratio: slice_norm_values(&f.spec, &tf.abs(), &unit) / hf,
                hardy_ratio: hardy_norm_default(&tf, &unit)? / hf,
            }))
        })
        .collect()
}

/// Grid indices of `count` probe points outside `4√n Q`, spread over angles
/// and geometric distances inside the box.
pub fn far_field_probes(spec: &GridSpec, cube: &crate::grid::Cube, count: usize) -> Vec<usize> {
    let dim = spec.dim;
    let inner = 0.5 * 4.0 * (dim as f64).sqrt() * cube.side * 1.05;
    let excl = cube.dilate(4.0 * (dim as f64).sqrt());
    let room = |dir: [f64; 2]| -> f64 {
        (0..dim)
            .map(|a| {
                if dir[a] > 0.0 {
                    (spec.half_width - spec.h() - cube.center[a]) / dir[a]
                } else if dir[a] < 0.0 {
                    (-spec.half_width - cube.center[a]) / dir[a]
                } else {
                    f64::INFINITY
                }
            })
            .fold(f64::INFINITY, f64::min)
    };
    let mut out = Vec::with_capacity(count);
    let mut k = 0usize;
    while out.len() < count && k < 64 * count {
        let dir = if dim == 1 {
            [if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0]
        } else {
            let a = k as f64 * 2.399_963_229_728_653;
            [a.cos(), a.sin()]
        };
        let outer = room(dir);
        k += 1;
        if outer <= inner {
            continue;
        }
        let frac = ((k * 7) % 16) as f64 / 15.0;
        let dist = inner * (outer / inner).powf(frac);
        let p = [cube.center[0] + dist * dir[0], cube.center[1] + dist * dir[1]];
        let ix = spec.nearest_index(p[0]);
        let iy = if dim == 2 { spec.nearest_index(p[1]) } else { 0 };
        let idx = spec.flatten(ix, iy);
        if !excl.contains(dim, spec.point(idx)) {
            out.push(idx);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FarField {
    /// `max M(Ta, φ)(x) ‖χ_Q‖ / [ℳ(χ_Q)(x)]^{(n+δ)/n}` over the probes.
    pub maximal_constant: f64,
    /// `max |Ta(x)| ‖χ_Q‖ |x - x_Q|^{n+δ} / r_Q^{n+δ}` over the probes.
    pub decay_constant: f64,
    pub probes: usize,
}

/// Far-field constants of `Ta` for one atom at the given probe count.
///
/// `Ta` is always computed by linear convolution: the multiplier realization is
/// periodic, and its wrap-around dominates the tail far from the cube.
pub fn far_field_check(t: &CzKernel, atom: &AtomSpec, params: &SliceParams, probes: usize) -> Result<FarField> {
    let a = atom.payload.to_dense();
    let spec = a.spec;
    let dim = spec.dim;
    let ta = apply_cz(&t.with_realization(Realization::Direct), &a)?;
    let mta = radial_maximal(&ta, &TestFunction::unit_gaussian(dim), &dyadic_scales(&spec), Extension::Zero)?.re();
    let chi = GridFunction::indicator(spec, Region::Cube(atom.cube));
    let points = far_field_probes(&spec, &atom.cube, probes);
    let hl = hl_uncentered_at(&chi, &default_radii(&spec), &points);
    let chi_norm = indicator_slice_norm(&spec, Region::Cube(atom.cube), &params.clone().truncated());
    let expo = (dim as f64 + t.delta) / dim as f64;
    let rq = 0.5 * atom.cube.side;
    let tv = ta.re();
    let mut out = FarField {
        maximal_constant: 0.0,
        decay_constant: 0.0,
        probes: points.len(),
    };
    for (&idx, &hl) in points.iter().zip(&hl) {
        let p = spec.point(idx);
        let dist = (p[0] - atom.cube.center[0]).hypot(if dim == 2 { p[1] - atom.cube.center[1] } else { 0.0 });
        if hl > 0.0 {
            out.maximal_constant = out.maximal_constant.max(mta[idx] * chi_norm / hl.powf(expo));
        }
        out.decay_constant = out
            .decay_constant
            .max(tv[idx].abs() * chi_norm * (dist / rq).powf(dim as f64 + t.delta));
    }
    Ok(out)
}
