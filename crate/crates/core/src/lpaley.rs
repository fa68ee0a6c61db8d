//! Littlewood–Paley square functions `g`, `S`, `g_λ*` and the Poisson
//! maximal function, all in the periodic regime via Fourier multipliers.

use std::collections::HashMap;
use std::sync::Mutex;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::{apply_multiplier, spectrum, Fourier};
use crate::grid::{unit_ball_volume, GridFunction, GridSpec, LatticeBall};

fn rho(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u).exp()
    }
}

/// Smooth step from 0 at `u ≤ 0` to 1 at `u ≥ 1`.
fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        rho(u) / (rho(u) + rho(1.0 - u))
    }
}

/// Radial profile: rises on `[1, 2]`, equals 1 on `[2, 4]`, falls on `[4, 8]`.
pub fn bump_profile(r: f64) -> f64 {
    if r <= 1.0 || r >= 8.0 {
        0.0
    } else if r < 2.0 {
        smooth_step(r - 1.0)
    } else if r <= 4.0 {
        1.0
    } else {
        1.0 - smooth_step((r - 4.0) / 4.0)
    }
}

/// The band bump `φ` sampled on the frequency lattice of a grid.
#[derive(Debug, Clone)]
pub struct BandBump {
    pub spec: GridSpec,
    pub lattice: Vec<f64>,
}

impl BandBump {
    #[inline]
    pub fn at(&self, r: f64) -> f64 {
        bump_profile(r)
    }
}

pub fn make_band_bump(spec: &GridSpec) -> Result<BandBump> {
    let step = std::f64::consts::PI / spec.half_width;
    let nyquist = step * (spec.n / 2) as f64;
    if step > 1.0 || nyquist < 8.0 {
        return Err(Error::InsufficientResolution(format!(
            "frequency lattice [{step:.3}, {nyquist:.3}] does not resolve 1 ≤ |ξ| ≤ 8"
        )));
    }
    let lattice = crate::fourier::frequency_grid(spec)
        .into_iter()
        .map(|(xi, _)| bump_profile(xi[0].hypot(xi[1])))
        .collect();
    Ok(BandBump { spec: *spec, lattice })
}

/// `ℱ⁻¹[φ(τ·) f̂]`.
pub fn band_project(f: &GridFunction, bump: &BandBump, tau: f64) -> GridFunction {
    let fft = Fourier::for_spec(&f.spec);
    let fhat = spectrum(f, &fft);
    let out = apply_multiplier(&f.spec, &fhat, &fft, |_, xi, _| Complex64::new(bump.at(tau * xi[0].hypot(xi[1])), 0.0));
    GridFunction::complex(f.spec, out).expect("finite projection")
}

#[derive(Debug, Clone)]
pub struct LpConfig {
    pub taus: Vec<f64>,
    pub lambda: f64,
}

impl LpConfig {
    /// `per_octave` log-spaced scales from `h/8` to `16L`.
    pub fn new(spec: &GridSpec, lambda: f64, per_octave: usize) -> Result<Self> {
        if !(lambda > 1.0) {
            return Err(Error::ExponentOutOfRange(format!("λ = {lambda} must exceed 1")));
        }
        let lo = spec.h() / 8.0;
        let hi = 16.0 * spec.half_width;
        let steps = ((hi / lo).log2() * per_octave as f64).round() as usize;
        let taus = (0..=steps).map(|k| lo * 2f64.powf(k as f64 / per_octave as f64)).collect();
        Ok(LpConfig { taus, lambda })
    }

    /// `λ = 1 + 2/min(p⁻, q) + 1/2`.
    pub fn default_lambda(min_exponent: f64) -> f64 {
        1.0 + 2.0 / min_exponent + 0.5
    }

    /// Trapezoid weights in `log τ`.
    pub fn weights(&self) -> Vec<f64> {
        let k = self.taus.len();
        (0..k)
            .map(|i| {
                let left = if i > 0 { (self.taus[i] / self.taus[i - 1]).ln() } else { 0.0 };
                let right = if i + 1 < k { (self.taus[i + 1] / self.taus[i]).ln() } else { 0.0 };
                0.5 * (left + right)
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct SquareFunctions {
    pub g: GridFunction,
    pub s: GridFunction,
    pub gstar: GridFunction,
}

/// Precomputed transforms and cone/weight kernels for one grid and config.
pub struct LittlewoodPaley {
    spec: GridSpec,
    bump: BandBump,
    cfg: LpConfig,
    weights: Vec<f64>,
    fft: Fourier,
    kernels: Mutex<HashMap<usize, (Vec<Complex64>, Vec<Complex64>)>>,
}

const WEIGHT_CUTOFF: f64 = 1e-12;
const EXPLICIT_IMAGES: i64 = 3;

impl LittlewoodPaley {
    pub fn new(spec: &GridSpec, cfg: LpConfig) -> Result<Self> {
        let bump = make_band_bump(spec)?;
        Ok(LittlewoodPaley {
            spec: *spec,
            bump,
            weights: cfg.weights(),
            cfg,
            fft: Fourier::for_spec(spec),
            kernels: Mutex::new(HashMap::new()),
        })
    }

    pub fn config(&self) -> &LpConfig {
        &self.cfg
    }

    pub fn bump(&self) -> &BandBump {
        &self.bump
    }

    /// Spectra of the periodised kernels `h^n τ^{-n} χ_{|z|<τ}` and
    /// `h^n τ^{-n} (1 + |z|/τ)^{-λn}`.
    fn kernel_pair(&self, k: usize) -> (Vec<Complex64>, Vec<Complex64>) {
        if let Some(p) = self.kernels.lock().expect("kernel cache").get(&k) {
            return p.clone();
        }
        let spec = &self.spec;
        let (n, dim, h) = (spec.n as i64, spec.dim, spec.h());
        let tau = self.cfg.taus[k];
        let scale = spec.cell() * tau.powi(-(dim as i32));
        let at = |ix: i64, iy: i64| -> usize { spec.flatten(ix.rem_euclid(n) as usize, iy.rem_euclid(n) as usize) };

        let mut cone = vec![Complex64::new(0.0, 0.0); spec.len()];
        let ball = LatticeBall::new(dim, tau / h);
        for &(dy, w) in &ball.rows {
            for dx in -(w as i64)..=(w as i64) {
                cone[at(dx, dy)] += scale;
            }
        }

        let ln = self.cfg.lambda * dim as f64;
        let weight = |d: f64| (1.0 + d / tau).powf(-ln);
        let cutoff = tau * (WEIGHT_CUTOFF.powf(-1.0 / ln) - 1.0);
        let period = 2.0 * spec.half_width;
        let needed = (cutoff / period).ceil() as i64 + 1;
        let explicit = needed.min(EXPLICIT_IMAGES);
        let ys = if dim == 1 { 0..=0 } else { -explicit..=explicit };
        let mut star = vec![Complex64::new(0.0, 0.0); spec.len()];
        for idx in 0..spec.len() {
            let [ix, iy] = spec.unflatten(idx);
            let z0 = if ix < spec.n / 2 { ix as f64 } else { ix as f64 - n as f64 } * h;
            let z1 = if iy < spec.n / 2 { iy as f64 } else { iy as f64 - n as f64 } * h;
            let mut acc = 0.0;
            for my in ys.clone() {
                for mx in -explicit..=explicit {
                    let d = (z0 + mx as f64 * period).hypot(if dim == 1 { 0.0 } else { z1 + my as f64 * period });
                    if d <= cutoff {
                        acc += weight(d);
                    }
                }
            }
            star[idx] = Complex64::new(acc * scale, 0.0);
        }
        // Images beyond the explicit block see a nearly constant weight.
        if needed > explicit {
            let mut tail = 0.0;
            let ys = if dim == 1 { 0..=0 } else { -needed..=needed };
            for my in ys {
                for mx in -needed..=needed {
                    if mx.abs().max(my.abs()) <= explicit {
                        continue;
                    }
                    let d = (mx as f64 * period).hypot(my as f64 * period);
                    if d <= cutoff {
                        tail += weight(d);
                    }
                }
            }
            for v in star.iter_mut() {
                v.re += tail * scale;
            }
        }
        self.fft.forward(&mut cone);
        self.fft.forward(&mut star);
        let pair = (cone, star);
        self.kernels.lock().expect("kernel cache").insert(k, pair.clone());
        pair
    }

    fn convolve(&self, values: &[f64], khat: &[Complex64]) -> Vec<f64> {
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft.forward(&mut data);
        for (a, b) in data.iter_mut().zip(khat) {
            *a *= b;
        }
        self.fft.inverse(&mut data);
        data.iter().map(|c| c.re.max(0.0)).collect()
    }

    /// `|φ(τ_k D) f|²` for every scale, skipping scales whose band misses the lattice.
    fn band_energies(&self, f: &GridFunction) -> Vec<(usize, Vec<f64>)> {
        let fhat = spectrum(f, &self.fft);
        let freqs: Vec<f64> = crate::fourier::frequency_grid(&self.spec)
            .into_iter()
            .map(|(xi, _)| xi[0].hypot(xi[1]))
            .collect();
        let mut out = Vec::new();
        for (k, &tau) in self.cfg.taus.iter().enumerate() {
            let mut any = false;
            let mut data: Vec<Complex64> = fhat
                .iter()
                .zip(&freqs)
                .map(|(v, r)| {
                    let m = self.bump.at(tau * r);
                    if m != 0.0 {
                        any = true;
                    }
                    v * m
                })
                .collect();
            if !any {
                continue;
            }
            self.fft.inverse(&mut data);
            out.push((k, data.iter().map(|c| c.norm_sqr()).collect()));
        }
        out
    }

    pub fn g_function(&self, f: &GridFunction) -> GridFunction {
        let mut acc = vec![0.0; self.spec.len()];
        for (k, e) in self.band_energies(f) {
            for (a, v) in acc.iter_mut().zip(&e) {
                *a += self.weights[k] * v;
            }
        }
        f.with_values(acc.into_iter().map(f64::sqrt).collect())
    }

    pub fn all(&self, f: &GridFunction) -> SquareFunctions {
        let n = self.spec.len();
        let (mut g, mut s, mut gs) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for (k, e) in self.band_energies(f) {
            let w = self.weights[k];
            let (cone, star) = self.kernel_pair(k);
            let ce = self.convolve(&e, &cone);
            let se = self.convolve(&e, &star);
            for i in 0..n {
                g[i] += w * e[i];
                s[i] += w * ce[i];
                gs[i] += w * se[i];
            }
        }
        let root = |v: Vec<f64>| f.with_values(v.into_iter().map(f64::sqrt).collect());
        SquareFunctions {
            g: root(g),
            s: root(s),
            gstar: root(gs),
        }
    }

    pub fn lusin_s(&self, f: &GridFunction) -> GridFunction {
        self.all(f).s
    }

    pub fn g_lambda_star(&self, f: &GridFunction) -> GridFunction {
        self.all(f).gstar
    }
}

/// `∫ (1 + |w|)^{-λn} dw`, the mass of the `g_λ*` weight at unit scale.
pub fn gstar_weight_mass(dim: usize, lambda: f64) -> f64 {
    match dim {
        1 => 2.0 / (lambda - 1.0),
        _ => 2.0 * std::f64::consts::PI / ((2.0 * lambda - 1.0) * (2.0 * lambda - 2.0)),
    }
}

/// Ratio of the cone and `g_λ*` contributions of a single frequency band in
/// the continuum: `ε_n / ∫(1+|w|)^{-λn} dw`.
pub fn cone_to_gstar_ratio(dim: usize, lambda: f64) -> f64 {
    unit_ball_volume(dim) / gstar_weight_mass(dim, lambda)
}

/// `max_s |ℱ⁻¹(e^{-s|ξ|} f̂)|`.
pub fn poisson_maximal(f: &GridFunction, s_grid: &[f64]) -> GridFunction {
    let fft = Fourier::for_spec(&f.spec);
    let fhat = spectrum(f, &fft);
    let mut acc = vec![0.0f64; f.spec.len()];
    for &s in s_grid {
        let u = apply_multiplier(&f.spec, &fhat, &fft, |_, xi, _| Complex64::new((-s * xi[0].hypot(xi[1])).exp(), 0.0));
        for (a, v) in acc.iter_mut().zip(&u) {
            *a = a.max(v.norm());
        }
    }
    f.with_values(acc)
}
