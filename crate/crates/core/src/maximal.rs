//! Hardy–Littlewood, radial, non-tangential, Peetre and grand maximal
//! functions on grids, and the vector-valued Fefferman–Stein ratio.
//!
//! Suprema over scales run over a dyadic [`scale set`](dyadic_scales);
//! suprema over points run over grid points. The grand maximal functions use a
//! finite dictionary of Hermite–Gaussian test functions normalised so that
//! their sampled seminorm `p_N` equals one.

use std::collections::{HashMap, VecDeque};
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::Fourier;
use crate::grid::{ball_sums, GridFunction, GridSpec, LatticeBall, Point};
use crate::norms::{slice_norm, slice_norm_values, SliceParams};

/// How a function is continued outside the box for convolutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extension {
    Zero,
    Periodic,
}

/// Physicists' Hermite polynomials `H_0..=H_m` at `u`.
fn hermite_all(m: usize, u: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(m + 1);
    h.push(1.0);
    if m >= 1 {
        h.push(2.0 * u);
    }
    for k in 1..m {
        let next = 2.0 * u * h[k] - 2.0 * k as f64 * h[k - 1];
        h.push(next);
    }
    h
}

/// `φ(x) = c · Π_a H_{α_a}(x_a/σ) e^{-(x_a/σ)²}`.
///
/// Derivatives are exact: `d/du [H_m(u) e^{-u²}] = -H_{m+1}(u) e^{-u²}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub orders: [usize; 2],
    pub width: f64,
    pub coef: f64,
}

impl TestFunction {
    /// `π^{-n/2} e^{-|x|²}`, of unit integral.
    pub fn unit_gaussian(dim: usize) -> Self {
        TestFunction {
            orders: [0, 0],
            width: 1.0,
            coef: std::f64::consts::PI.powf(-(dim as f64) / 2.0),
        }
    }

    pub fn hermite(orders: [usize; 2], width: f64) -> Self {
        TestFunction {
            orders,
            width,
            coef: 1.0,
        }
    }

    pub fn label(&self) -> String {
        format!("hg[{},{}]w{}", self.orders[0], self.orders[1], self.width)
    }

    fn axis(&self, order: usize, beta: usize, x: f64) -> f64 {
        let u = x / self.width;
        let h = hermite_all(order + beta, u);
        let sign = if beta % 2 == 1 { -1.0 } else { 1.0 };
        sign * self.width.powi(-(beta as i32)) * h[order + beta] * (-u * u).exp()
    }

    pub fn eval(&self, dim: usize, x: Point) -> f64 {
        self.derivative(dim, [0, 0], x)
    }

    /// `∂^β φ(x)`.
    pub fn derivative(&self, dim: usize, beta: [usize; 2], x: Point) -> f64 {
        let mut v = self.coef * self.axis(self.orders[0], beta[0], x[0]);
        if dim == 2 {
            v *= self.axis(self.orders[1], beta[1], x[1]);
        }
        v
    }

    /// `∫ φ`; only the pure Gaussian has a nonzero integral.
    pub fn integral(&self, dim: usize) -> f64 {
        let active = if dim == 1 { self.orders[0] } else { self.orders[0] + self.orders[1] };
        if active > 0 {
            0.0
        } else {
            self.coef * (self.width * std::f64::consts::PI.sqrt()).powi(dim as i32)
        }
    }

    /// `p_N(φ) = Σ_{|β|≤N} sup_x (1+|x|)^{N+n} |∂^β φ(x)|`, with the sup taken
    /// over a fine sample set (step `σ/40` in 1-D, `σ/40` per axis in 2-D).
    pub fn seminorm(&self, dim: usize, n_ord: usize) -> f64 {
        let step = self.width / 40.0;
        let reach = self.width * 9.0;
        let count = (reach / step).ceil() as usize;
        let xs: Vec<f64> = (0..=count).map(|i| i as f64 * step).collect();
        let power = (n_ord + dim) as i32;
        let betas = crate::norms::multi_indices(dim, n_ord);
        if dim == 1 {
            let total: f64 = betas
                .iter()
                .map(|b| {
                    xs.iter()
                        .map(|&x| (1.0 + x).powi(power) * self.axis(self.orders[0], b[0], x).abs())
                        .fold(0.0, f64::max)
                })
                .sum();
            return total * self.coef.abs();
        }
        // |∂^β φ| is even in each coordinate, so the positive quadrant suffices.
        let weight: Vec<f64> = xs
            .iter()
            .flat_map(|&y| xs.iter().map(move |&x| (1.0 + (x * x + y * y).sqrt()).powi(power)))
            .collect();
        let table = |order: usize, beta: usize| -> Vec<f64> { xs.iter().map(|&x| self.axis(order, beta, x).abs()).collect() };
        let k = xs.len();
        let total: f64 = betas
            .iter()
            .map(|b| {
                let tx = table(self.orders[0], b[0]);
                let ty = table(self.orders[1], b[1]);
                let mut best = 0.0f64;
                for j in 0..k {
                    let row = &weight[j * k..(j + 1) * k];
                    for i in 0..k {
                        best = best.max(row[i] * tx[i] * ty[j]);
                    }
                }
                best
            })
            .sum();
        total * self.coef.abs()
    }

    pub fn normalized(mut self, dim: usize, n_ord: usize) -> Self {
        self.coef = 1.0;
        self.coef = 1.0 / self.seminorm(dim, n_ord);
        self
    }
}

/// Hermite–Gaussians `H_α(x) e^{-|x|²}` for `|α| ≤ N`, each scaled to `p_N = 1`.
pub fn default_dictionary(dim: usize, n_ord: usize) -> Vec<TestFunction> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Vec<TestFunction>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(d) = cache.lock().expect("dictionary cache").get(&(dim, n_ord)) {
        return d.clone();
    }
    let dict: Vec<TestFunction> = crate::norms::multi_indices(dim, n_ord)
        .into_iter()
        .map(|alpha| TestFunction::hermite(alpha, 1.0).normalized(dim, n_ord))
        .collect();
    cache.lock().expect("dictionary cache").insert((dim, n_ord), dict.clone());
    dict
}

/// `2^j h` for `j = 0..=log₂ N`, covering `(0, 2L]` dyadically.
pub fn dyadic_scales(spec: &GridSpec) -> Vec<f64> {
    let levels = spec.n.trailing_zeros();
    (0..=levels).map(|j| spec.h() * 2f64.powi(j as i32)).collect()
}

/// Default radius set: every multiple of `h` up to `2L` in 1-D; four radii per
/// octave from `h` to `2L` in 2-D.
pub fn default_radii(spec: &GridSpec) -> Vec<f64> {
    let h = spec.h();
    if spec.dim == 1 {
        (1..=spec.n).map(|k| k as f64 * h).collect()
    } else {
        let octaves = spec.n.trailing_zeros() as usize;
        (0..=4 * octaves).map(|k| h * 2f64.powf(k as f64 / 4.0)).collect()
    }
}

/// `N = ⌊n/min(p⁻, q) + 1⌋ + 1`.
pub fn default_order(dim: usize, min_exponent: f64) -> usize {
    (dim as f64 / min_exponent + 1.0).floor() as usize + 1
}

/// `b = n/min(p⁻, q) + 1/2`.
pub fn default_peetre_b(dim: usize, min_exponent: f64) -> f64 {
    dim as f64 / min_exponent + 0.5
}

#[derive(Debug, Clone)]
pub struct MaximalConfig {
    pub radii: Vec<f64>,
    pub aperture: f64,
    pub peetre_b: f64,
    pub order: usize,
    pub dictionary: Vec<TestFunction>,
    pub scales: Vec<f64>,
    pub extension: Extension,
}

impl MaximalConfig {
    /// Defaults tied to the space: `N` and `b` from `min(p_Φ⁻, q)`.
    pub fn for_space(spec: &GridSpec, params: &SliceParams) -> Self {
        let m = params.min_exponent();
        let order = default_order(spec.dim, m);
        MaximalConfig {
            radii: default_radii(spec),
            aperture: 1.0,
            peetre_b: default_peetre_b(spec.dim, m),
            order,
            dictionary: default_dictionary(spec.dim, order),
            scales: dyadic_scales(spec),
            extension: Extension::Zero,
        }
    }
}

/// Convolutions `φ_s * f` with `φ_s = s^{-n} φ(·/s)`, as Riemann sums over the
/// grid. In the zero-extended regime the spectrum lives on a doubled grid, so
/// the circular convolution equals the linear one.
pub struct Convolver {
    spec: GridSpec,
    m: usize,
    fft: Fourier,
    fhat: Vec<Complex64>,
    extension: Extension,
}

impl Convolver {
    pub fn new(f: &GridFunction, extension: Extension) -> Self {
        let spec = f.spec;
        let n = spec.n;
        let m = match extension {
            Extension::Zero => 2 * n,
            Extension::Periodic => n,
        };
        let fft = Fourier::new(spec.dim, m);
        let src = f.to_complex();
        let mut data = vec![Complex64::new(0.0, 0.0); m.pow(spec.dim as u32)];
        if spec.dim == 1 {
            data[..n].copy_from_slice(&src);
        } else {
            for iy in 0..n {
                data[iy * m..iy * m + n].copy_from_slice(&src[iy * n..(iy + 1) * n]);
            }
        }
        fft.forward(&mut data);
        Convolver {
            spec,
            m,
            fft,
            fhat: data,
            extension,
        }
    }

    fn offset(&self, k: usize) -> f64 {
        let signed = if k < self.m / 2 { k as f64 } else { k as f64 - self.m as f64 };
        signed * self.spec.h()
    }

    /// Kernel `h^n φ_s(z)` at every offset of the working grid; periodic mode
    /// sums the images `z + 2L·j`.
    fn kernel(&self, phi: &TestFunction, s: f64) -> Vec<Complex64> {
        let dim = self.spec.dim;
        let w = self.spec.cell() * s.powi(-(dim as i32));
        let period = 2.0 * self.spec.half_width;
        let images = match self.extension {
            Extension::Zero => 0i64,
            Extension::Periodic => ((12.0 * phi.width * s) / period).ceil() as i64 + 1,
        };
        let axis_vals = |k: usize, order: usize| -> f64 {
            let z = self.offset(k);
            (-images..=images)
                .map(|j| phi.axis(order, 0, (z + j as f64 * period) / s))
                .sum::<f64>()
        };
        // Coarse scales alias the sampled kernel; restore the exact mass per axis.
        let corrected = |order: usize| -> Vec<f64> {
            let mut v: Vec<f64> = (0..self.m).map(|k| axis_vals(k, order)).collect();
            if order == 0 {
                let step = self.spec.h() / (s * phi.width);
                let exact = std::f64::consts::PI.sqrt() / step;
                let reach = (12.0 / step).ceil() as i64;
                let lattice = crate::grid::compensated_sum((-reach..=reach).map(|k| (-(k as f64 * step).powi(2)).exp()));
                v.iter_mut().for_each(|x| *x *= exact / lattice);
            }
            v
        };
        let ax = corrected(phi.orders[0]);
        if dim == 1 {
            return ax.iter().map(|&v| Complex64::new(phi.coef * w * v, 0.0)).collect();
        }
        let ay = corrected(phi.orders[1]);
        let mut out = Vec::with_capacity(self.m * self.m);
        for vy in &ay {
            for vx in &ax {
                out.push(Complex64::new(phi.coef * w * vx * vy, 0.0));
            }
        }
        out
    }

    /// `φ_s * f` at the grid points of the box.
    pub fn convolve(&self, phi: &TestFunction, s: f64) -> Vec<Complex64> {
        let mut k = self.kernel(phi, s);
        self.fft.forward(&mut k);
        for (a, b) in k.iter_mut().zip(&self.fhat) {
            *a *= b;
        }
        self.fft.inverse(&mut k);
        let n = self.spec.n;
        if self.spec.dim == 1 {
            k.truncate(n);
            k
        } else {
            let mut out = Vec::with_capacity(n * n);
            for iy in 0..n {
                out.extend_from_slice(&k[iy * self.m..iy * self.m + n]);
            }
            out
        }
    }

    pub fn convolve_abs(&self, phi: &TestFunction, s: f64) -> Vec<f64> {
        self.convolve(phi, s).iter().map(|c| c.norm()).collect()
    }
}

fn check_integral(phi: &TestFunction, dim: usize) -> Result<()> {
    if phi.integral(dim).abs() < 1e-14 {
        Err(Error::ZeroIntegralTestFunction)
    } else {
        Ok(())
    }
}

fn pointwise_max(acc: &mut [f64], v: &[f64]) {
    for (a, b) in acc.iter_mut().zip(v) {
        if *b > *a {
            *a = *b;
        }
    }
}

/// Dyadic max-pyramid over grid values, for branch-and-bound suprema of
/// `|G(y)| w(|x - y|)` with non-increasing weights.
struct Pyramid {
    dim: usize,
    n: usize,
    h: f64,
    levels: Vec<Vec<f64>>,
}

impl Pyramid {
    fn new(spec: &GridSpec, values: Vec<f64>) -> Self {
        let dim = spec.dim;
        let mut levels = vec![values];
        let mut side = spec.n;
        while side > 1 {
            let prev = levels.last().expect("nonempty");
            let half = side / 2;
            let next: Vec<f64> = if dim == 1 {
                (0..half).map(|i| prev[2 * i].max(prev[2 * i + 1])).collect()
            } else {
                let mut v = vec![0.0; half * half];
                for by in 0..half {
                    for bx in 0..half {
                        let a = prev[(2 * by) * side + 2 * bx];
                        let b = prev[(2 * by) * side + 2 * bx + 1];
                        let c = prev[(2 * by + 1) * side + 2 * bx];
                        let d = prev[(2 * by + 1) * side + 2 * bx + 1];
                        v[by * half + bx] = a.max(b).max(c).max(d);
                    }
                }
                v
            };
            levels.push(next);
            side = half;
        }
        Pyramid {
            dim,
            n: spec.n,
            h: spec.h(),
            levels,
        }
    }

    /// Distance from cell `x` to the nearest lattice point of a block.
    fn distance(&self, level: usize, b: [usize; 2], x: [usize; 2]) -> f64 {
        let size = 1usize << level;
        let mut d2 = 0.0;
        for a in 0..self.dim {
            let lo = (b[a] * size) as f64;
            let hi = lo + (size - 1) as f64;
            let p = x[a] as f64;
            let near = (lo - p).max(p - hi).max(0.0);
            d2 += near * near;
        }
        d2.sqrt() * self.h
    }

    /// `sup_y |G(y)| w(|x-y|)` and a maximiser, starting from a known lower
    /// bound. `bound(dmin, gmax)` bounds a block from above.
    fn sup(&self, x: [usize; 2], start: (f64, [usize; 2]), bound: impl Fn(f64, f64) -> f64) -> (f64, [usize; 2]) {
        let top = self.levels.len() - 1;
        let (mut best, mut arg) = start;
        let mut stack: Vec<(usize, [usize; 2], f64)> = vec![(top, [0, 0], f64::INFINITY)];
        while let Some((level, b, ub)) = stack.pop() {
            if ub <= best {
                continue;
            }
            if level == 0 {
                best = ub;
                arg = b;
                continue;
            }
            let mut kids: Vec<(usize, [usize; 2], f64)> = Vec::with_capacity(4);
            let ys = if self.dim == 1 { 1 } else { 2 };
            let cside = self.n >> (level - 1);
            for dy in 0..ys {
                for dx in 0..2 {
                    let cb = [2 * b[0] + dx, if self.dim == 1 { 0 } else { 2 * b[1] + dy }];
                    let cg = self.levels[level - 1][if self.dim == 1 { cb[0] } else { cb[1] * cside + cb[0] }];
                    let cmin = self.distance(level - 1, cb, x);
                    let cb_bound = bound(cmin, cg);
                    if cb_bound > best {
                        kids.push((level - 1, cb, cb_bound));
                    }
                }
            }
            kids.sort_by(|a, b| a.2.total_cmp(&b.2));
            stack.extend(kids);
        }
        (best, arg)
    }
}

/// `sup_{|y-x| < ρ} G(y)` at every grid point, for non-negative `G`. In 2-D the
/// lattice disc is split into rows, each a 1-D sliding maximum.
fn ball_sup(spec: &GridSpec, values: &[f64], rho: f64) -> Vec<f64> {
    let ball = LatticeBall::new(spec.dim, rho / spec.h());
    if ball.rows.is_empty() {
        return values.to_vec();
    }
    if spec.dim == 1 {
        return sliding_max(values, ball.rows[0].1);
    }
    let n = spec.n;
    let mut out = vec![0.0; spec.len()];
    let mut widths: Vec<usize> = ball.rows.iter().map(|r| r.1).collect();
    widths.sort_unstable();
    widths.dedup();
    let mut slid = vec![0.0; spec.len()];
    for w in widths {
        for y in 0..n {
            slid[y * n..(y + 1) * n].copy_from_slice(&sliding_max(&values[y * n..(y + 1) * n], w));
        }
        for &(dy, _) in ball.rows.iter().filter(|r| r.1 == w) {
            for y in 0..n {
                let src = y as i64 + dy;
                if src < 0 || src >= n as i64 {
                    continue;
                }
                let (o, s) = (&mut out[y * n..(y + 1) * n], &slid[src as usize * n..(src as usize + 1) * n]);
                for (a, b) in o.iter_mut().zip(s) {
                    if *b > *a {
                        *a = *b;
                    }
                }
            }
        }
    }
    out
}

/// Centered sliding maximum over `[i - w, i + w]` (monotone deque).
fn sliding_max(values: &[f64], w: usize) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![0.0; n];
    let mut dq: VecDeque<usize> = VecDeque::new();
    let mut next = 0usize;
    for (i, o) in out.iter_mut().enumerate() {
        let hi = (i + w).min(n - 1);
        while next <= hi {
            while let Some(&b) = dq.back() {
                if values[b] <= values[next] {
                    dq.pop_back();
                } else {
                    break;
                }
            }
            dq.push_back(next);
            next += 1;
        }
        while let Some(&f) = dq.front() {
            if f + w < i {
                dq.pop_front();
            } else {
                break;
            }
        }
        *o = values[*dq.front().expect("window is nonempty")];
    }
    out
}

/// Ball averages `|B(x,r)|⁻¹ ∫_{B(x,r)} |f|` for every grid point, with the
/// lattice ball count as measure and zero extension.
fn ball_averages(spec: &GridSpec, abs: &[f64], r: f64) -> Vec<f64> {
    let ball = LatticeBall::new(spec.dim, r / spec.h());
    if ball.count == 0 {
        return vec![0.0; abs.len()];
    }
    let inv = 1.0 / ball.count as f64;
    ball_sums(spec, abs, &ball).into_iter().map(|s| s * inv).collect()
}

/// Centered Hardy–Littlewood maximal function over the radius set.
pub fn hl_centered(f: &GridFunction, radii: &[f64]) -> GridFunction {
    let abs = f.abs();
    let mut acc = vec![0.0; abs.len()];
    for &r in radii {
        pointwise_max(&mut acc, &ball_averages(&f.spec, &abs, r));
    }
    f.with_values(acc)
}

/// Uncentered Hardy–Littlewood maximal function: balls `B(y, r)` with grid
/// centres `y` and `r` in the radius set that contain `x`.
pub fn hl_uncentered(f: &GridFunction, radii: &[f64]) -> GridFunction {
    let abs = f.abs();
    let mut acc = vec![0.0; abs.len()];
    for &r in radii {
        let avg = ball_averages(&f.spec, &abs, r);
        pointwise_max(&mut acc, &ball_sup(&f.spec, &avg, r));
    }
    f.with_values(acc)
}

/// `hl_uncentered` at the listed grid indices only.
pub fn hl_uncentered_at(f: &GridFunction, radii: &[f64], points: &[usize]) -> Vec<f64> {
    let spec = &f.spec;
    let abs = f.abs();
    let (n, rows) = (spec.n, if spec.dim == 1 { 1 } else { spec.n });
    let mut acc = vec![0.0; points.len()];
    for &r in radii {
        let avg = ball_averages(spec, &abs, r);
        let ball = LatticeBall::new(spec.dim, r / spec.h());
        for (a, &idx) in acc.iter_mut().zip(points) {
            let [ix, iy] = spec.unflatten(idx);
            let m = if ball.rows.is_empty() {
                avg[idx]
            } else {
                ball.rows
                    .iter()
                    .filter_map(|&(dy, w)| {
                        let y = iy as i64 + dy;
                        if y < 0 || y >= rows as i64 {
                            return None;
                        }
                        let row = y as usize * n;
                        let (lo, hi) = (ix.saturating_sub(w), (ix + w).min(n - 1));
                        Some(avg[row + lo..=row + hi].iter().fold(0.0f64, |m, v| m.max(*v)))
                    })
                    .fold(0.0, f64::max)
            };
            if m > *a {
                *a = m;
            }
        }
    }
    acc
}

/// `M(f, φ)(x) = max_s |φ_s * f(x)|`.
pub fn radial_maximal(f: &GridFunction, phi: &TestFunction, scales: &[f64], ext: Extension) -> Result<GridFunction> {
    check_integral(phi, f.spec.dim)?;
    Ok(radial_unchecked(&Convolver::new(f, ext), f, phi, scales))
}

fn radial_unchecked(conv: &Convolver, f: &GridFunction, phi: &TestFunction, scales: &[f64]) -> GridFunction {
    let mut acc = vec![0.0; f.spec.len()];
    for &s in scales {
        pointwise_max(&mut acc, &conv.convolve_abs(phi, s));
    }
    f.with_values(acc)
}

/// `M_a^*(f, φ)(x) = max_s max_{|y-x| < a s} |φ_s * f(y)|`.
pub fn nontangential_maximal(
    f: &GridFunction,
    phi: &TestFunction,
    a: f64,
    scales: &[f64],
    ext: Extension,
) -> GridFunction {
    nontangential_with(&Convolver::new(f, ext), f, phi, a, scales)
}

fn nontangential_with(conv: &Convolver, f: &GridFunction, phi: &TestFunction, a: f64, scales: &[f64]) -> GridFunction {
    let mut acc = vec![0.0; f.spec.len()];
    for &s in scales {
        let g = conv.convolve_abs(phi, s);
        pointwise_max(&mut acc, &ball_sup(&f.spec, &g, a * s));
    }
    f.with_values(acc)
}

/// `M_b^{**}(f, φ)(x) = max_s max_y |φ_s * f(x - y)| / (1 + |y|/s)^b`.
pub fn peetre_maximal(f: &GridFunction, phi: &TestFunction, b: f64, scales: &[f64], ext: Extension) -> GridFunction {
    peetre_with(&Convolver::new(f, ext), f, phi, b, scales)
}

fn peetre_with(conv: &Convolver, f: &GridFunction, phi: &TestFunction, b: f64, scales: &[f64]) -> GridFunction {
    let spec = &f.spec;
    let mut acc = vec![0.0; spec.len()];
    for &s in scales {
        let g = conv.convolve_abs(phi, s);
        let pyr = Pyramid::new(spec, g.clone());
        let weight = |d: f64| (1.0 + d / s).powf(-b);
        let h = spec.h();
        let mut prev = [0usize, 0usize];
        for (idx, a) in acc.iter_mut().enumerate() {
            let x = spec.unflatten(idx);
            // The neighbour's maximiser is a good first candidate.
            let d = ((x[0] as f64 - prev[0] as f64).hypot(x[1] as f64 - prev[1] as f64)) * h;
            let warm = g[spec.flatten(prev[0], prev[1])] * weight(d);
            let start = if warm > g[idx] { (warm, prev) } else { (g[idx], x) };
            let (v, arg) = pyr.sup(x, (start.0.max(*a), start.1), |dmin, gmax| gmax * weight(dmin));
            prev = arg;
            if v > *a {
                *a = v;
            }
        }
    }
    f.with_values(acc)
}

/// Grand maximal function `M_N(f)`: the non-tangential maximal function of
/// aperture 1, maximised over the dictionary.
pub fn grand_maximal(f: &GridFunction, cfg: &MaximalConfig) -> GridFunction {
    let conv = Convolver::new(f, cfg.extension);
    let mut acc = vec![0.0; f.spec.len()];
    for phi in &cfg.dictionary {
        pointwise_max(&mut acc, &nontangential_with(&conv, f, phi, 1.0, &cfg.scales).re());
    }
    f.with_values(acc)
}

/// Grand radial maximal function `M_N⁰(f)`.
pub fn grand_radial_maximal(f: &GridFunction, cfg: &MaximalConfig) -> GridFunction {
    let conv = Convolver::new(f, cfg.extension);
    let mut acc = vec![0.0; f.spec.len()];
    for phi in &cfg.dictionary {
        pointwise_max(&mut acc, &radial_unchecked(&conv, f, phi, &cfg.scales).re());
    }
    f.with_values(acc)
}

/// Grand Peetre maximal function `M_{b,N}^{**}(f)`.
pub fn grand_peetre_maximal(f: &GridFunction, cfg: &MaximalConfig) -> GridFunction {
    let conv = Convolver::new(f, cfg.extension);
    let mut acc = vec![0.0; f.spec.len()];
    for phi in &cfg.dictionary {
        pointwise_max(&mut acc, &peetre_with(&conv, f, phi, cfg.peetre_b, &cfg.scales).re());
    }
    f.with_values(acc)
}

/// The five maximal functions whose slice norms are mutually equivalent.
#[derive(Debug, Clone)]
pub struct MaximalFamily {
    pub radial: GridFunction,
    pub nontangential: GridFunction,
    pub grand: GridFunction,
    pub peetre: GridFunction,
    pub grand_peetre: GridFunction,
}

impl MaximalFamily {
    pub fn compute(f: &GridFunction, phi: &TestFunction, cfg: &MaximalConfig) -> Result<Self> {
        check_integral(phi, f.spec.dim)?;
        let conv = Convolver::new(f, cfg.extension);
        Ok(MaximalFamily {
            radial: radial_unchecked(&conv, f, phi, &cfg.scales),
            nontangential: nontangential_with(&conv, f, phi, cfg.aperture, &cfg.scales),
            grand: grand_maximal(f, cfg),
            peetre: peetre_with(&conv, f, phi, cfg.peetre_b, &cfg.scales),
            grand_peetre: grand_peetre_maximal(f, cfg),
        })
    }

    pub fn labels() -> [&'static str; 5] {
        ["radial", "nontangential", "grand", "peetre", "grand-peetre"]
    }

    pub fn members(&self) -> [&GridFunction; 5] {
        [&self.radial, &self.nontangential, &self.grand, &self.peetre, &self.grand_peetre]
    }

    /// Slice norms of the five members (box-truncated outer integral).
    pub fn slice_norms(&self, params: &SliceParams) -> [f64; 5] {
        let p = params.clone().truncated();
        self.members().map(|g| slice_norm_values(&g.spec, &g.abs(), &p))
    }
}

/// Outcome of the vector-valued maximal inequality check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeffermanStein {
    pub ratio: f64,
    /// Set when every input vanishes and the ratio is undefined.
    pub empty: bool,
}

/// `‖(Σ_j (ℳf_j)^r)^{1/r}‖ / ‖(Σ_j |f_j|^r)^{1/r}‖` in `(E_Φ^q)_t`, with the
/// centred maximal operator over the given radii.
pub fn fefferman_stein_check(fs: &[GridFunction], r: f64, params: &SliceParams, radii: &[f64]) -> Result<FeffermanStein> {
    let maxed: Vec<GridFunction> = fs.iter().map(|f| hl_centered(f, radii)).collect();
    fefferman_stein_from(fs, &maxed, r, params)
}

/// As [`fefferman_stein_check`] with the maximal functions precomputed.
pub fn fefferman_stein_from(
    fs: &[GridFunction],
    maxed: &[GridFunction],
    r: f64,
    params: &SliceParams,
) -> Result<FeffermanStein> {
    if !(r > 1.0 && r.is_finite()) {
        return Err(Error::ExponentOutOfRange(format!("vector exponent r = {r} must lie in (1, ∞)")));
    }
    if !(params.q > 1.0 && params.phi.p_minus > 1.0) {
        return Err(Error::ExponentOutOfRange(format!(
            "maximal inequality needs q > 1 and lower type > 1, got q = {} and {}",
            params.q, params.phi.p_minus
        )));
    }
    let Some(first) = fs.first() else {
        return Ok(FeffermanStein { ratio: 0.0, empty: true });
    };
    let spec = first.spec;
    let lr = |items: &[GridFunction]| -> Vec<f64> {
        let mut acc = vec![0.0; spec.len()];
        for g in items {
            for (a, v) in acc.iter_mut().zip(g.abs()) {
                *a += v.powf(r);
            }
        }
        acc.iter().map(|a| a.powf(1.0 / r)).collect()
    };
    let den_vals = lr(fs);
    if den_vals.iter().all(|v| *v == 0.0) {
        return Ok(FeffermanStein { ratio: 0.0, empty: true });
    }
    let den = slice_norm(&first.with_values(den_vals), params)?;
    let num = slice_norm_values(&spec, &lr(maxed), &params.clone().truncated());
    Ok(FeffermanStein {
        ratio: num / den,
        empty: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Ball, Cube, Region};
    use crate::orlicz::OrliczFunction;

    fn spec1(l: f64, n: usize) -> GridSpec {
        GridSpec::new(1, l, n).unwrap()
    }

    fn interval(s: GridSpec, a: f64, b: f64) -> GridFunction {
        GridFunction::indicator(s, Region::Cube(Cube::from_corner(1, [a, 0.0], b - a)))
    }

    /// Direct `O(N^2)` convolution oracle.
    fn direct_conv(f: &GridFunction, phi: &TestFunction, s: f64, x: Point) -> f64 {
        let spec = f.spec;
        let v = f.re();
        let w = spec.cell() * s.powi(-(spec.dim as i32));
        (0..spec.len())
            .map(|j| {
                let y = spec.point(j);
                let z = [(x[0] - y[0]) / s, (x[1] - y[1]) / s];
                w * phi.eval(spec.dim, z) * v[j]
            })
            .sum()
    }

    #[test]
    fn hermite_derivatives_match_finite_differences() {
        for dim in [1usize, 2] {
            for phi in default_dictionary(dim, 3) {
                for &x in &[[0.3, -0.4], [1.1, 0.7], [-2.0, 0.2]] {
                    for beta in crate::norms::multi_indices(dim, 2) {
                        let exact = phi.derivative(dim, beta, x);
                        let hstep = 1e-4;
                        // Central difference of the next-lower derivative along one axis.
                        let (axis, lower) = if beta[0] > 0 {
                            (0, [beta[0] - 1, beta[1]])
                        } else if beta[1] > 0 {
                            (1, [beta[0], beta[1] - 1])
                        } else {
                            continue;
                        };
                        let mut xp = x;
                        let mut xm = x;
                        xp[axis] += hstep;
                        xm[axis] -= hstep;
                        let fd = (phi.derivative(dim, lower, xp) - phi.derivative(dim, lower, xm)) / (2.0 * hstep);
                        assert!((fd - exact).abs() < 1e-6 * (1.0 + exact.abs()), "dim {dim} {beta:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn dictionary_members_have_unit_seminorm() {
        for dim in [1usize, 2] {
            let dict = default_dictionary(dim, 3);
            assert_eq!(dict.len(), if dim == 1 { 4 } else { 10 });
            for phi in &dict {
                assert!((phi.seminorm(dim, 3) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sampled_seminorm_is_stable_under_refinement() {
        // A finer sup grid may only reveal slightly larger values.
        let phi = TestFunction::hermite([2, 0], 1.0).normalized(1, 3);
        let fine = {
            let xs: Vec<f64> = (0..200_000).map(|i| i as f64 * 1e-4).collect();
            crate::norms::multi_indices(1, 3)
                .iter()
                .map(|b| xs.iter().map(|&x| (1.0 + x).powi(4) * phi.derivative(1, *b, [x, 0.0]).abs()).fold(0.0, f64::max))
                .sum::<f64>()
        };
        assert!(fine >= 1.0 - 1e-12 && fine < 1.0 + 1e-3, "{fine}");
    }

    #[test]
    fn hl_centered_examples() {
        let s = spec1(8.0, 4096);
        let f = interval(s, -1.0, 1.0);
        let m = hl_centered(&f, &default_radii(&s));
        let i2 = s.nearest_index(2.0);
        assert!((m.re()[i2] - 1.0 / 3.0).abs() <= 2.0 * s.h());
        let i0 = s.nearest_index(0.25);
        assert_eq!(m.re()[i0], 1.0);
        // Brute force over the radius grid.
        let v = f.re();
        let brute = default_radii(&s)
            .iter()
            .map(|&r| {
                let idx = crate::grid::region_indices(&s, Region::Ball(Ball::new(s.point(i2), r)));
                idx.iter().map(|&j| v[j]).sum::<f64>() / idx.len() as f64
            })
            .fold(0.0, f64::max);
        assert!((m.re()[i2] - brute).abs() < 1e-12);
    }

    #[test]
    fn hl_uncentered_examples() {
        let s = spec1(4.0, 256);
        let f = interval(s, 0.0, 1.0);
        let radii = default_radii(&s);
        let mu = hl_uncentered(&f, &radii);
        let mc = hl_centered(&f, &radii);
        assert!(mu.re().iter().zip(mc.re()).all(|(u, c)| *u >= c));
        // The best ball containing 1.5 is (0, 1.5+): average 2/3.
        let i = s.nearest_index(1.5);
        assert!((mu.re()[i] - 2.0 / 3.0).abs() <= 4.0 * s.h());
        let v = f.re();
        let x = s.point(i);
        let mut brute = 0.0f64;
        for &r in &radii {
            for y in 0..s.len() {
                let b = Ball::new(s.point(y), r);
                if b.contains(1, x) {
                    let idx = crate::grid::region_indices(&s, Region::Ball(b));
                    let count = LatticeBall::new(1, r / s.h()).count;
                    brute = brute.max(idx.iter().map(|&j| v[j]).sum::<f64>() / count as f64);
                }
            }
        }
        assert!((mu.re()[i] - brute).abs() < 1e-12);
        let c = GridFunction::from_fn(s, |_| 2.5);
        let mc = hl_uncentered(&c, &radii[..4]);
        assert!((mc.re()[128] - 2.5).abs() < 1e-12);
    }

    #[test]
    fn hl_uncentered_at_matches_full_grid() {
        for spec in [GridSpec::new(1, 4.0, 256).unwrap(), GridSpec::new(2, 2.0, 32).unwrap()] {
            let f = GridFunction::from_fn(spec, |p| (p[0] - 0.3).abs().min(1.0) * (2.0 * p[1]).cos() - 0.2);
            let radii = default_radii(&spec);
            let full = hl_uncentered(&f, &radii).re();
            let points: Vec<usize> = (0..spec.len()).step_by(7).collect();
            let at = hl_uncentered_at(&f, &radii, &points);
            for (k, &i) in points.iter().enumerate() {
                assert_eq!(at[k], full[i], "dim {} index {i}", spec.dim);
            }
        }
    }

    #[test]
    fn hl_uncentered_2d_matches_brute_force() {
        let s = GridSpec::new(2, 1.0, 16).unwrap();
        let f = GridFunction::from_fn(s, |p| (3.0 * p[0] + p[1]).sin().abs());
        let radii = [0.2, 0.35, 0.6];
        let mu = hl_uncentered(&f, &radii);
        let v = f.re();
        for x in [0usize, 37, 130, 255] {
            let mut brute = 0.0f64;
            for &r in &radii {
                let count = LatticeBall::new(2, r / s.h()).count as f64;
                for y in 0..s.len() {
                    let b = Ball::new(s.point(y), r);
                    if b.contains(2, s.point(x)) {
                        let idx = crate::grid::region_indices(&s, Region::Ball(b));
                        brute = brute.max(idx.iter().map(|&j| v[j]).sum::<f64>() / count);
                    }
                }
            }
            assert!((mu.re()[x] - brute).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn hl_is_sublinear_and_reflection_covariant() {
        let s = spec1(4.0, 512);
        let f = GridFunction::from_fn(s, |p| (2.0 * p[0]).sin() * (1.0 - p[0] * p[0] / 9.0).max(0.0));
        let g = GridFunction::from_fn(s, |p| if p[0].abs() < 0.7 { 1.0 - p[0] } else { 0.0 });
        let radii = default_radii(&s);
        let mf = hl_centered(&f, &radii).re();
        let mg = hl_centered(&g, &radii).re();
        let ms = hl_centered(&f.add(&g), &radii).re();
        for i in 0..s.len() {
            assert!(ms[i] <= mf[i] + mg[i] + 1e-15);
        }
        let mr = hl_centered(&f.reflect(), &radii);
        let rm = hl_centered(&f, &radii).reflect();
        // Index 0 reflects onto itself but its ball is asymmetric in the box.
        for i in 1..s.len() {
            assert!((mr.re()[i] - rm.re()[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn radial_examples() {
        let s = spec1(4.0, 256);
        let one = GridFunction::from_fn(s, |_| 1.0);
        let phi = TestFunction::unit_gaussian(1);
        let scales = &dyadic_scales(&s)[..6];
        let m = radial_maximal(&one, &phi, scales, Extension::Periodic).unwrap();
        assert!(m.re().iter().all(|v| (v - 1.0).abs() < 1e-12), "{:?}", &m.re()[..4]);
        let zero_mean = TestFunction::hermite([1, 0], 1.0);
        assert!(matches!(
            radial_maximal(&one, &zero_mean, scales, Extension::Zero),
            Err(Error::ZeroIntegralTestFunction)
        ));
        // Atom-like input: FFT convolution matches the direct sum at probe points.
        let a = interval(s, 0.0, 0.5).add(&interval(s, 0.5, 1.0).scale(-1.0));
        let conv = Convolver::new(&a, Extension::Zero);
        for &sc in &[0.125, 0.5, 2.0] {
            let fast = conv.convolve(&phi, sc);
            for &x in &[-1.0, 0.4, 2.5] {
                let i = s.nearest_index(x);
                let slow = direct_conv(&a, &phi, sc, s.point(i));
                assert!((fast[i].re - slow).abs() < 1e-12, "s={sc} x={x}");
            }
        }
        let ma = radial_maximal(&a, &phi, &dyadic_scales(&s), Extension::Zero).unwrap().re();
        assert!(ma[s.nearest_index(3.5)] < ma[s.nearest_index(2.0)]);
        for &sc in &dyadic_scales(&s) {
            let single = conv.convolve_abs(&phi, sc);
            assert!(ma.iter().zip(&single).all(|(m, v)| m >= v));
        }
    }

    #[test]
    fn convolution_2d_matches_direct_sum() {
        let s = GridSpec::new(2, 2.0, 16).unwrap();
        let f = GridFunction::from_fn(s, |p| if p[0].abs() + p[1].abs() < 1.0 { p[0] - 0.2 } else { 0.0 });
        let phi = TestFunction::hermite([1, 2], 0.7);
        let conv = Convolver::new(&f, Extension::Zero);
        let out = conv.convolve(&phi, 0.6);
        for idx in [0usize, 45, 136, 255] {
            let slow = direct_conv(&f, &phi, 0.6, s.point(idx));
            assert!((out[idx].re - slow).abs() < 1e-12);
        }
    }

    #[test]
    fn maximal_chain_holds_pointwise() {
        for s in [spec1(4.0, 256), GridSpec::new(2, 2.0, 32).unwrap()] {
            let f = GridFunction::from_fn(s, |p| {
                let r2 = p[0] * p[0] + p[1] * p[1];
                (1.0 - r2).max(0.0) * (3.0 * p[0]).cos()
            });
            let params = SliceParams::new(0.5, 0.8, OrliczFunction::power(0.8));
            let cfg = MaximalConfig::for_space(&s, &params);
            let phi = TestFunction::unit_gaussian(s.dim);
            let fam = MaximalFamily::compute(&f, &phi, &cfg).unwrap();
            let (m, ma, mb) = (fam.radial.re(), fam.nontangential.re(), fam.peetre.re());
            let factor = (1.0 + cfg.aperture).powf(cfg.peetre_b);
            for i in 0..s.len() {
                assert!(m[i] <= ma[i]);
                assert!(ma[i] <= factor * mb[i] * (1.0 + 1e-12));
            }
            let g0 = grand_radial_maximal(&f, &cfg).re();
            let g = fam.grand.re();
            assert!(g0.iter().zip(&g).all(|(a, b)| a <= b));
        }
    }

    #[test]
    fn tiny_aperture_reduces_to_radial() {
        let s = spec1(4.0, 256);
        let f = GridFunction::from_fn(s, |p| (-(p[0] - 0.3).powi(2) * 4.0).exp() * p[0]);
        let phi = TestFunction::unit_gaussian(1);
        let scales = dyadic_scales(&s);
        let smax = scales.last().copied().unwrap();
        let m = radial_maximal(&f, &phi, &scales, Extension::Zero).unwrap().re();
        let ma = nontangential_maximal(&f, &phi, s.h() / smax, &scales, Extension::Zero).re();
        for (a, b) in m.iter().zip(&ma) {
            assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
        }
    }

    #[test]
    fn peetre_matches_brute_force() {
        for s in [spec1(2.0, 64), GridSpec::new(2, 1.0, 16).unwrap()] {
            let f = GridFunction::from_fn(s, |p| (2.0 * p[0] - p[1]).sin() * (-(p[0] * p[0] + p[1] * p[1])).exp());
            let phi = TestFunction::unit_gaussian(s.dim);
            let scales = dyadic_scales(&s);
            let b = 1.75;
            let fast = peetre_maximal(&f, &phi, b, &scales, Extension::Zero).re();
            let conv = Convolver::new(&f, Extension::Zero);
            let gs: Vec<Vec<f64>> = scales.iter().map(|&sc| conv.convolve_abs(&phi, sc)).collect();
            for x in 0..s.len() {
                let px = s.point(x);
                let mut brute = 0.0f64;
                for (k, &sc) in scales.iter().enumerate() {
                    for y in 0..s.len() {
                        let py = s.point(y);
                        let d = ((px[0] - py[0]).powi(2) + (px[1] - py[1]).powi(2)).sqrt();
                        brute = brute.max(gs[k][y] * (1.0 + d / sc).powf(-b));
                    }
                }
                assert!((fast[x] - brute).abs() <= 1e-12 * brute.max(1e-300), "x={x}");
            }
        }
    }

    #[test]
    fn nontangential_2d_matches_brute_force() {
        let s = GridSpec::new(2, 1.0, 16).unwrap();
        let f = GridFunction::from_fn(s, |p| (p[0] + 2.0 * p[1]).cos() * (-(p[0] * p[0])).exp());
        let phi = TestFunction::unit_gaussian(2);
        let scales = dyadic_scales(&s);
        let fast = nontangential_maximal(&f, &phi, 1.0, &scales, Extension::Zero).re();
        let conv = Convolver::new(&f, Extension::Zero);
        for x in [0usize, 17, 100, 255] {
            let mut brute = 0.0f64;
            for &sc in &scales {
                let g = conv.convolve_abs(&phi, sc);
                for y in 0..s.len() {
                    if Ball::new(s.point(x), sc).contains(2, s.point(y)) {
                        brute = brute.max(g[y]);
                    }
                }
            }
            assert!((fast[x] - brute).abs() < 1e-14);
        }
    }

    #[test]
    fn fefferman_stein_examples() {
        let s = spec1(8.0, 1024);
        let p = SliceParams::new(1.0, 2.0, OrliczFunction::power(2.0));
        let chi = GridFunction::indicator(s, Region::Ball(Ball::new([0.0, 0.0], 1.0)));
        let radii = default_radii(&s);
        let r = fefferman_stein_check(std::slice::from_ref(&chi), 2.0, &p, &radii).unwrap();
        assert!(!r.empty && r.ratio >= 1.0 && r.ratio.is_finite());
        let z = fefferman_stein_check(&[GridFunction::zeros(s)], 2.0, &p, &radii).unwrap();
        assert!(z.empty && z.ratio == 0.0);
        let bad = SliceParams::new(1.0, 0.8, OrliczFunction::power(2.0));
        assert!(fefferman_stein_check(std::slice::from_ref(&chi), 2.0, &bad, &radii).is_err());
        let ratios: Vec<f64> = [0.25, 0.5, 1.0, 2.0]
            .iter()
            .map(|&t| fefferman_stein_check(std::slice::from_ref(&chi), 2.0, &p.with_t(t), &radii).unwrap().ratio)
            .collect();
        let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        assert!(hi / lo <= 4.0);
    }

    #[test]
    fn sliding_max_matches_naive() {
        let v: Vec<f64> = (0..50).map(|i| ((i * 37) % 11) as f64).collect();
        for w in [0usize, 1, 3, 60] {
            let fast = sliding_max(&v, w);
            for i in 0..v.len() {
                let lo = i.saturating_sub(w);
                let hi = (i + w).min(v.len() - 1);
                let naive = v[lo..=hi].iter().cloned().fold(f64::MIN, f64::max);
                assert_eq!(fast[i], naive);
            }
        }
    }
}
