//! Orlicz functions, their inverses, Young conjugates and type exponents.
//!
//! An [`OrliczFunction`] is a non-decreasing growth function `Φ` with
//! `Φ(0) = 0`, together with declared lower and upper type exponents and the
//! range of arguments over which its values are trusted. Closed forms cover
//! the power scale, a power-times-logarithm scale and `τ / log(e + τ)`;
//! anything else can be supplied as a table interpolated linearly in log-log
//! coordinates.

use serde::{Deserialize, Serialize};
use std::f64::consts::E;

use crate::error::{Error, Result};

const INVERSE_REL_TOL: f64 = 1e-12;
const INVERSE_MAX_ITER: usize = 200;
const CONJUGATE_GRID_POINTS: usize = 4096;

/// Sampled `(log τ, log Φ(τ))` pairs with strictly increasing abscissae.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    log_tau: Vec<f64>,
    log_phi: Vec<f64>,
    // Present when the log-abscissae are equally spaced; enables O(1) lookup.
    uniform_step: Option<f64>,
}

impl Table {
    pub fn new(taus: &[f64], values: &[f64]) -> Result<Self> {
        if taus.len() != values.len() || taus.len() < 2 {
            return Err(Error::Format(
                "tabulated Orlicz function needs at least two (τ, Φ(τ)) pairs of equal length".into(),
            ));
        }
        for w in taus.windows(2) {
            if !(w[0] > 0.0 && w[1] > w[0]) {
                return Err(Error::Format("τ samples must be positive and strictly increasing".into()));
            }
        }
        for w in values.windows(2) {
            if !(w[0] > 0.0 && w[1] > w[0]) {
                return Err(Error::Format("Φ samples must be positive and strictly increasing".into()));
            }
        }
        let log_tau: Vec<f64> = taus.iter().map(|t| t.ln()).collect();
        let log_phi: Vec<f64> = values.iter().map(|v| v.ln()).collect();
        let step = (log_tau[log_tau.len() - 1] - log_tau[0]) / (log_tau.len() - 1) as f64;
        let uniform = log_tau
            .iter()
            .enumerate()
            .all(|(i, lt)| (lt - (log_tau[0] + i as f64 * step)).abs() <= 1e-9 * step.max(1e-300));
        Ok(Table {
            log_tau,
            log_phi,
            uniform_step: uniform.then_some(step),
        })
    }

    pub fn taus(&self) -> Vec<f64> {
        self.log_tau.iter().map(|l| l.exp()).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.log_phi.iter().map(|l| l.exp()).collect()
    }

    /// `(c, r)` when the table is exactly `Φ(τ) = c·τ^r` (a single log-log slope).
    fn power_law(&self) -> Option<(f64, f64)> {
        let n = self.log_tau.len();
        let r = (self.log_phi[n - 1] - self.log_phi[0]) / (self.log_tau[n - 1] - self.log_tau[0]);
        let lc = self.log_phi[0] - r * self.log_tau[0];
        let scale = 1.0 + self.log_phi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let exact = self
            .log_tau
            .iter()
            .zip(&self.log_phi)
            .all(|(lt, lp)| (lc + r * lt - lp).abs() <= 1e-9 * scale);
        exact.then(|| (lc.exp(), r))
    }

    fn tau_min(&self) -> f64 {
        self.log_tau[0].exp()
    }

    fn tau_max(&self) -> f64 {
        self.log_tau[self.log_tau.len() - 1].exp()
    }

    fn segment(&self, lt: f64) -> usize {
        let last = self.log_tau.len() - 2;
        if lt <= self.log_tau[0] {
            return 0;
        }
        if lt >= self.log_tau[last + 1] {
            return last;
        }
        match self.uniform_step {
            Some(step) => {
                let i = ((lt - self.log_tau[0]) / step) as usize;
                i.min(last)
            }
            None => {
                let i = self.log_tau.partition_point(|&x| x <= lt);
                (i - 1).min(last)
            }
        }
    }

    /// Log-log linear interpolation; the end segments extend beyond the table.
    fn eval(&self, tau: f64) -> f64 {
        if tau <= 0.0 {
            return 0.0;
        }
        let lt = tau.ln();
        let i = self.segment(lt);
        let (x0, x1) = (self.log_tau[i], self.log_tau[i + 1]);
        let (y0, y1) = (self.log_phi[i], self.log_phi[i + 1]);
        (y0 + (y1 - y0) * (lt - x0) / (x1 - x0)).exp()
    }

    fn inverse(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let ly = y.ln();
        let last = self.log_phi.len() - 2;
        let i = if ly <= self.log_phi[0] {
            0
        } else if ly >= self.log_phi[last + 1] {
            last
        } else {
            (self.log_phi.partition_point(|&v| v <= ly) - 1).min(last)
        };
        let (x0, x1) = (self.log_tau[i], self.log_tau[i + 1]);
        let (y0, y1) = (self.log_phi[i], self.log_phi[i + 1]);
        (x0 + (x1 - x0) * (ly - y0) / (y1 - y0)).exp()
    }
}

/// The shape of an Orlicz function.
#[derive(Debug, Clone, PartialEq)]
pub enum OrliczKind {
    /// `Φ(τ) = τ^r`.
    Power(f64),
    /// `Φ(τ) = τ^p · log(e + τ)`.
    PowerLog(f64),
    /// `Φ(τ) = τ / log(e + τ)`.
    LogQuotient,
    Tabulated(Table),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrliczFunction {
    pub kind: OrliczKind,
    pub p_minus: f64,
    pub p_plus: f64,
    pub eval_domain: (f64, f64),
}

const CLOSED_FORM_DOMAIN: (f64, f64) = (1e-100, 1e100);

impl OrliczFunction {
    pub fn power(r: f64) -> Self {
        assert!(r > 0.0, "power exponent must be positive");
        OrliczFunction {
            kind: OrliczKind::Power(r),
            p_minus: r,
            p_plus: r,
            eval_domain: CLOSED_FORM_DOMAIN,
        }
    }

    /// `τ^p log(e + τ)`: lower type `p`, upper type `p + ε` for every `ε > 0`;
    /// the declared upper exponent uses `ε = 0.1`.
    pub fn power_log(p: f64) -> Self {
        assert!(p > 0.0, "power exponent must be positive");
        OrliczFunction {
            kind: OrliczKind::PowerLog(p),
            p_minus: p,
            p_plus: p + 0.1,
            eval_domain: CLOSED_FORM_DOMAIN,
        }
    }

    /// `τ / log(e + τ)`: upper type 1 and lower type `p` for every `p < 1`;
    /// the declared lower exponent is 1/2.
    pub fn log_quotient() -> Self {
        OrliczFunction {
            kind: OrliczKind::LogQuotient,
            p_minus: 0.5,
            p_plus: 1.0,
            eval_domain: CLOSED_FORM_DOMAIN,
        }
    }

    pub fn tabulated(taus: &[f64], values: &[f64], p_minus: f64, p_plus: f64) -> Result<Self> {
        let table = Table::new(taus, values)?;
        let domain = (table.tau_min(), table.tau_max());
        Ok(OrliczFunction {
            kind: OrliczKind::Tabulated(table),
            p_minus,
            p_plus,
            eval_domain: domain,
        })
    }

    /// Samples `other` on `taus` and stores the result as a table.
    pub fn tabulate_from(other: &OrliczFunction, taus: &[f64]) -> Result<Self> {
        let values: Vec<f64> = taus.iter().map(|&t| other.eval_ext(t)).collect();
        Self::tabulated(taus, &values, other.p_minus, other.p_plus)
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            OrliczKind::Power(_) => "power",
            OrliczKind::PowerLog(_) => "powerlog",
            OrliczKind::LogQuotient => "logquotient",
            OrliczKind::Tabulated(_) => "tabulated",
        }
    }

    /// Short label such as `power(2)` used in reports.
    pub fn label(&self) -> String {
        match self.kind {
            OrliczKind::Power(r) => format!("power({r})"),
            OrliczKind::PowerLog(p) => format!("powerlog({p})"),
            OrliczKind::LogQuotient => "logquotient".to_string(),
            OrliczKind::Tabulated(_) => "tabulated".to_string(),
        }
    }

    pub fn power_exponent(&self) -> Option<f64> {
        match self.kind {
            OrliczKind::Power(r) => Some(r),
            _ => None,
        }
    }

    /// `(c, r)` when `Φ(τ) = c·τ^r` on the whole half-line, as for powers and
    /// for tables of a power (conjugates of powers, in particular).
    pub fn power_law(&self) -> Option<(f64, f64)> {
        match &self.kind {
            OrliczKind::Power(r) => Some((1.0, *r)),
            OrliczKind::Tabulated(t) => t.power_law(),
            _ => None,
        }
    }

    /// `Φ(τ)` for `τ ∈ [0, τ_max]`.
    pub fn eval(&self, tau: f64) -> Result<f64> {
        if tau > self.eval_domain.1 {
            return Err(Error::DomainExceeded {
                tau,
                max: self.eval_domain.1,
            });
        }
        Ok(self.eval_ext(tau))
    }

    /// `Φ(τ)` without the domain check. Tables extend their end segments,
    /// which preserves the power-law envelope.
    #[inline]
    pub fn eval_ext(&self, tau: f64) -> f64 {
        if tau <= 0.0 {
            return 0.0;
        }
        match &self.kind {
            OrliczKind::Power(r) => {
                if *r == 1.0 {
                    tau
                } else if *r == 2.0 {
                    tau * tau
                } else {
                    tau.powf(*r)
                }
            }
            OrliczKind::PowerLog(p) => tau.powf(*p) * (E + tau).ln(),
            OrliczKind::LogQuotient => tau / (E + tau).ln(),
            OrliczKind::Tabulated(t) => t.eval(tau),
        }
    }

    /// `Φ⁻¹(y)` for `y` in the image of the trusted domain.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        let max = self.eval_ext(self.eval_domain.1);
        if y > max {
            return Err(Error::OutOfRange { y, max });
        }
        Ok(self.inverse_ext(y))
    }

    /// `Φ⁻¹(y)` without the range check.
    pub fn inverse_ext(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        match &self.kind {
            OrliczKind::Power(r) => {
                if *r == 1.0 {
                    y
                } else if *r == 2.0 {
                    y.sqrt()
                } else {
                    y.powf(1.0 / r)
                }
            }
            OrliczKind::Tabulated(t) => t.inverse(y),
            _ => invert_monotone(|x| self.eval_ext(x), y),
        }
    }

    /// `Φ(t₁ + t₂) / (Φ(t₁) + Φ(t₂))`.
    pub fn quasi_triangle_ratio(&self, t1: f64, t2: f64) -> f64 {
        let den = self.eval_ext(t1) + self.eval_ext(t2);
        if den == 0.0 {
            return 0.0;
        }
        self.eval_ext(t1 + t2) / den
    }
}

/// Bisection for a continuous strictly increasing `g` with `g(0) = 0`.
pub fn invert_monotone(g: impl Fn(f64) -> f64, y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (1.0, 1.0);
    let mut guard = 0;
    while g(hi) < y && guard < 2100 {
        hi *= 2.0;
        guard += 1;
    }
    guard = 0;
    while g(lo) > y && guard < 2100 {
        lo *= 0.5;
        guard += 1;
    }
    if g(lo) >= y {
        return lo;
    }
    for _ in 0..INVERSE_MAX_ITER {
        if hi - lo <= INVERSE_REL_TOL * hi {
            break;
        }
        // Geometric midpoint while the bracket spans orders of magnitude.
        let mid = if hi > 4.0 * lo { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        if g(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `n` log-spaced points covering `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Empirical type exponents and constants over finite grids.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypeEstimate {
    pub p_lo: f64,
    pub p_hi: f64,
    pub c_lo: f64,
    pub c_hi: f64,
}

/// Tightest unit-constant exponents on the grids: `p_lo` is the largest `p`
/// with `Φ(sτ) ≤ s^p Φ(τ)` for all sampled `s < 1`, and `p_hi` the smallest
/// `p` with the same inequality for all sampled `s > 1`. The returned
/// constants are the measured maxima of `Φ(sτ) / (s^p Φ(τ))` at those
/// exponents, i.e. one up to rounding.
pub fn estimate_types(phi: &OrliczFunction, s_grid: &[f64], tau_grid: &[f64]) -> TypeEstimate {
    let mut p_lo = f64::INFINITY;
    let mut p_hi = f64::NEG_INFINITY;
    for &s in s_grid {
        if s <= 0.0 || s == 1.0 {
            continue;
        }
        for &tau in tau_grid {
            let base = phi.eval_ext(tau);
            let scaled = phi.eval_ext(s * tau);
            if base <= 0.0 || scaled <= 0.0 {
                continue;
            }
            let slope = (scaled / base).ln() / s.ln();
            if s < 1.0 {
                p_lo = p_lo.min(slope);
            } else {
                p_hi = p_hi.max(slope);
            }
        }
    }
    let constant = |p: f64, lower: bool| {
        let mut c: f64 = 0.0;
        for &s in s_grid {
            if s <= 0.0 || s == 1.0 || (s < 1.0) != lower {
                continue;
            }
            for &tau in tau_grid {
                let base = phi.eval_ext(tau);
                if base > 0.0 {
                    c = c.max(phi.eval_ext(s * tau) / (s.powf(p) * base));
                }
            }
        }
        c
    };
    let c_lo = if p_lo.is_finite() { constant(p_lo, true) } else { f64::NAN };
    let c_hi = if p_hi.is_finite() { constant(p_hi, false) } else { f64::NAN };
    TypeEstimate { p_lo, p_hi, c_lo, c_hi }
}

/// Checks that `Φ` has non-decreasing difference quotients on `grid`.
pub fn is_convex_on(phi: &OrliczFunction, grid: &[f64]) -> bool {
    let mut prev_slope = f64::NEG_INFINITY;
    let mut prev = (0.0, 0.0);
    for &x in grid {
        let v = phi.eval_ext(x);
        let slope = (v - prev.1) / (x - prev.0);
        if slope < prev_slope * (1.0 - 1e-9) - 1e-300 {
            return false;
        }
        prev_slope = slope;
        prev = (x, v);
    }
    true
}

/// Convex minorant-equivalent built from the running supremum of `Φ(τ)/τ`:
/// `Φ̃(t) = ∫₀ᵗ sup_{τ<s} Φ(τ)/τ ds`, integrated by cumulative trapezoid on
/// `grid`. The first cell treats the ratio as constant on `[0, grid[0]]`.
pub fn convexify(phi: &OrliczFunction, grid: &[f64]) -> Result<OrliczFunction> {
    let mut running = 0.0f64;
    let mut acc = 0.0;
    let mut values = Vec::with_capacity(grid.len());
    let mut prev: Option<(f64, f64)> = None;
    for &s in grid {
        running = running.max(phi.eval_ext(s) / s);
        match prev {
            None => acc = running * s,
            Some((s0, r0)) => acc += 0.5 * (r0 + running) * (s - s0),
        }
        values.push(acc);
        prev = Some((s, running));
    }
    let p_minus = phi.p_minus.max(1.0);
    let p_plus = phi.p_plus.max(1.0);
    OrliczFunction::tabulated(grid, &values, p_minus, p_plus)
}

/// Options for [`conjugate`].
#[derive(Debug, Clone, Copy)]
pub struct ConjugateOptions {
    /// Replace a non-convex `Φ` by its running-supremum convexification.
    pub convexify: bool,
    /// Number of log-spaced primal samples.
    pub grid_points: usize,
}

impl Default for ConjugateOptions {
    fn default() -> Self {
        ConjugateOptions {
            convexify: false,
            grid_points: CONJUGATE_GRID_POINTS,
        }
    }
}

/// The complementary function `Ψ(y) = sup_x {xy − Φ(x)}` of a Young function.
#[derive(Debug, Clone)]
pub struct YoungConjugate {
    phi: OrliczFunction,
    x_grid: Vec<f64>,
    phi_on_grid: Vec<f64>,
    /// `(y, Ψ(y))` on the requested sample set.
    pub samples: Vec<(f64, f64)>,
}

/// Computes the Young conjugate of `phi` on the log-spaced `y_grid`.
pub fn conjugate(phi: &OrliczFunction, y_grid: &[f64], opts: ConjugateOptions) -> Result<YoungConjugate> {
    let lo = phi.eval_domain.0.max(1e-8);
    let hi = phi.eval_domain.1.min(1e8);
    let x_grid = log_grid(lo, hi, opts.grid_points);
    let primal = if is_convex_on(phi, &x_grid) {
        phi.clone()
    } else if opts.convexify {
        convexify(phi, &log_grid(lo, hi, 4 * opts.grid_points))?
    } else {
        return Err(Error::NonConvex);
    };
    let phi_on_grid = x_grid.iter().map(|&x| primal.eval_ext(x)).collect();
    let mut conj = YoungConjugate {
        phi: primal,
        x_grid,
        phi_on_grid,
        samples: Vec::new(),
    };
    conj.samples = y_grid.iter().map(|&y| (y, conj.value_at(y))).collect();
    Ok(conj)
}

impl YoungConjugate {
    /// The (possibly convexified) primal function.
    pub fn primal(&self) -> &OrliczFunction {
        &self.phi
    }

    /// `Ψ(y)`: grid argmax followed by golden-section refinement on the two
    /// neighbouring cells.
    pub fn value_at(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let mut best = 0.0;
        let mut arg = usize::MAX;
        for (i, (&x, &p)) in self.x_grid.iter().zip(&self.phi_on_grid).enumerate() {
            let v = x * y - p;
            if v > best {
                best = v;
                arg = i;
            }
        }
        if arg == usize::MAX {
            return 0.0;
        }
        let a = if arg == 0 { 0.0 } else { self.x_grid[arg - 1] };
        let b = self.x_grid[(arg + 1).min(self.x_grid.len() - 1)];
        let f = |x: f64| x * y - self.phi.eval_ext(x);
        best.max(golden_max(f, a, b))
    }

    /// `Ψ⁻¹(t)` by monotone bisection.
    pub fn inverse(&self, t: f64) -> f64 {
        invert_monotone(|y| self.value_at(y), t)
    }

    /// The positive samples as a tabulated Orlicz function.
    pub fn to_orlicz(&self) -> Result<OrliczFunction> {
        let (taus, values): (Vec<f64>, Vec<f64>) = self
            .samples
            .iter()
            .filter(|(y, v)| *y > 0.0 && *v > 0.0 && v.is_finite())
            .copied()
            .unzip();
        // Conjugate exponents: 1/p + 1/p' = 1 swaps and inverts the types.
        let conj = |p: f64| if p > 1.0 { p / (p - 1.0) } else { f64::INFINITY };
        OrliczFunction::tabulated(&taus, &values, conj(self.phi.p_plus), conj(self.phi.p_minus))
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * b.abs().max(1e-300) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd)
}

/// Structured-text form of an Orlicz function.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OrliczRecord {
    pub kind: String,
    #[serde(default)]
    pub params: Vec<f64>,
    pub p_minus: f64,
    pub p_plus: f64,
    pub eval_domain: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub taus: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl OrliczFunction {
    pub fn to_record(&self) -> OrliczRecord {
        let (params, taus, values) = match &self.kind {
            OrliczKind::Power(r) => (vec![*r], None, None),
            OrliczKind::PowerLog(p) => (vec![*p], None, None),
            OrliczKind::LogQuotient => (vec![], None, None),
            OrliczKind::Tabulated(t) => (vec![], Some(t.taus()), Some(t.values())),
        };
        OrliczRecord {
            kind: self.kind_name().to_string(),
            params,
            p_minus: self.p_minus,
            p_plus: self.p_plus,
            eval_domain: [self.eval_domain.0, self.eval_domain.1],
            taus,
            values,
        }
    }

    pub fn from_record(rec: &OrliczRecord) -> Result<Self> {
        let param = || {
            rec.params
                .first()
                .copied()
                .filter(|p| *p > 0.0)
                .ok_or_else(|| Error::Format(format!("kind `{}` needs one positive parameter", rec.kind)))
        };
        let kind = match rec.kind.as_str() {
            "power" => OrliczKind::Power(param()?),
            "powerlog" => OrliczKind::PowerLog(param()?),
            "logquotient" => OrliczKind::LogQuotient,
            "tabulated" => {
                let (Some(t), Some(v)) = (&rec.taus, &rec.values) else {
                    return Err(Error::Format("tabulated kind needs `taus` and `values`".into()));
                };
                OrliczKind::Tabulated(Table::new(t, v)?)
            }
            other => return Err(Error::Format(format!("unknown Orlicz kind `{other}`"))),
        };
        Ok(OrliczFunction {
            kind,
            p_minus: rec.p_minus,
            p_plus: rec.p_plus,
            eval_domain: (rec.eval_domain[0], rec.eval_domain[1]),
        })
    }

    pub fn to_text(&self) -> String {
        toml::to_string(&self.to_record()).expect("Orlicz records always serialize")
    }

    pub fn from_text(s: &str) -> Result<Self> {
        let rec: OrliczRecord = toml::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
        Self::from_record(&rec)
    }

    /// Parses short specs such as `power:2`, `powerlog:1.5` or `logquotient`.
    pub fn parse_spec(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let num = || -> Result<f64> {
            arg.and_then(|a| a.parse::<f64>().ok())
                .filter(|p| *p > 0.0)
                .ok_or_else(|| Error::Format(format!("`{s}` needs a positive numeric parameter")))
        };
        match name {
            "power" => Ok(Self::power(num()?)),
            "powerlog" => Ok(Self::power_log(num()?)),
            "logquotient" => Ok(Self::log_quotient()),
            _ => Err(Error::Format(format!("unknown Orlicz spec `{s}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn eval_examples() {
        assert_eq!(OrliczFunction::power(2.0).eval(3.0).unwrap(), 9.0);
        assert_eq!(OrliczFunction::power(1.7).eval(0.0).unwrap(), 0.0);
        let lq = OrliczFunction::log_quotient().eval(1.0).unwrap();
        // 1 / ln(e + 1), ln(e + 1) = 1.31326168751822...
        assert_relative_eq!(lq, 1.0 / 1.313_261_687_518_222_8, max_relative = 1e-14);
        assert!((lq - 0.7615).abs() < 1e-4);
    }

    #[test]
    fn tabulated_domain_is_enforced() {
        let taus = log_grid(1e-3, 1e3, 64);
        let phi = OrliczFunction::tabulate_from(&OrliczFunction::power(1.5), &taus).unwrap();
        assert!(matches!(phi.eval(2e3), Err(Error::DomainExceeded { .. })));
        assert!(matches!(phi.inverse(1e6), Err(Error::OutOfRange { .. })));
        assert_relative_eq!(phi.eval(10.0).unwrap(), 10f64.powf(1.5), max_relative = 1e-12);
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(OrliczFunction::power(2.0).inverse(4.0).unwrap(), 2.0);
        for r in [0.5, 0.8, 1.0, 2.0, 3.0] {
            assert_relative_eq!(OrliczFunction::power(r).inverse(1.0).unwrap(), 1.0, max_relative = 1e-15);
        }
        let phi = OrliczFunction::log_quotient();
        let y = 1.0 / (E + 1.0).ln();
        assert!((phi.inverse(y).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn inverse_roundtrip_all_kinds() {
        let taus = log_grid(1e-4, 1e4, 200);
        let kinds = [
            OrliczFunction::power(0.8),
            OrliczFunction::power_log(1.5),
            OrliczFunction::log_quotient(),
            OrliczFunction::tabulate_from(&OrliczFunction::power_log(1.2), &taus).unwrap(),
        ];
        for phi in &kinds {
            for y in log_grid(1e-3, 1e3, 50) {
                let back = phi.eval_ext(phi.inverse(y).unwrap());
                assert!(((back - y) / y).abs() <= 1e-10, "{} at {y}: {back}", phi.label());
            }
        }
    }

    #[test]
    fn quasi_triangle_examples() {
        assert_eq!(OrliczFunction::power(1.0).quasi_triangle_ratio(1.0, 1.0), 1.0);
        assert_eq!(OrliczFunction::power(2.0).quasi_triangle_ratio(1.0, 1.0), 2.0);
        let r = OrliczFunction::log_quotient().quasi_triangle_ratio(0.5, 0.5);
        assert!(r <= 2.0 && r > 0.0);
        // Uniform bound over sampled pairs (upper type 1 gives C = 1).
        let grid = log_grid(1e-3, 1e3, 40);
        let worst = grid
            .iter()
            .flat_map(|&a| grid.iter().map(move |&b| (a, b)))
            .map(|(a, b)| OrliczFunction::log_quotient().quasi_triangle_ratio(a, b))
            .fold(0.0, f64::max);
        assert!(worst <= 1.0 + 1e-12);
    }

    #[test]
    fn conjugate_examples() {
        let ys = log_grid(1e-2, 1e2, 32);
        let sq = conjugate(&OrliczFunction::power(2.0), &ys, ConjugateOptions::default()).unwrap();
        assert!((sq.value_at(2.0) - 1.0).abs() < 1e-6);
        let lin = conjugate(&OrliczFunction::power(1.0), &ys, ConjugateOptions::default()).unwrap();
        assert_eq!(lin.value_at(0.5), 0.0);
        let p15 = conjugate(&OrliczFunction::power(1.5), &ys, ConjugateOptions::default()).unwrap();
        assert!((p15.value_at(1.0) - 4.0 / 27.0).abs() < 1e-6);
        assert_eq!(sq.value_at(0.0), 0.0);
    }

    #[test]
    fn conjugate_of_non_convex_needs_convexification() {
        let ys = log_grid(1e-2, 1e2, 16);
        let phi = OrliczFunction::log_quotient();
        assert!(matches!(
            conjugate(&phi, &ys, ConjugateOptions::default()),
            Err(Error::NonConvex)
        ));
        let opts = ConjugateOptions {
            convexify: true,
            ..Default::default()
        };
        let c = conjugate(&phi, &ys, opts).unwrap();
        // The running-sup convexification of τ/log(e+τ) is τ, whose conjugate vanishes on [0, 1].
        assert!(c.value_at(0.5) < 1e-12);
    }

    #[test]
    fn convexified_function_is_convex_and_equivalent() {
        let phi = OrliczFunction::power_log(1.5);
        let grid = log_grid(1e-6, 1e6, 4000);
        let cvx = convexify(&phi, &grid).unwrap();
        assert!(is_convex_on(&cvx, &log_grid(1e-5, 1e5, 500)));
        for t in log_grid(1e-3, 1e3, 30) {
            let r = cvx.eval_ext(t) / phi.eval_ext(t);
            assert!(r > 0.2 && r < 5.0, "ratio {r} at {t}");
        }
    }

    #[test]
    fn young_inequality_pointwise() {
        let ys = log_grid(1e-3, 1e3, 64);
        for phi in [OrliczFunction::power(2.0), OrliczFunction::power(1.5), OrliczFunction::power_log(1.2)] {
            let c = conjugate(&phi, &ys, ConjugateOptions::default()).unwrap();
            for x in log_grid(1e-2, 1e2, 25) {
                for y in log_grid(1e-2, 1e2, 25) {
                    assert!(x * y <= phi.eval_ext(x) + c.value_at(y) + 1e-9);
                }
            }
        }
    }

    #[test]
    fn young_bracket() {
        let ys = log_grid(1e-3, 1e3, 16);
        for phi in [OrliczFunction::power(2.0), OrliczFunction::power(1.5), OrliczFunction::power(3.0)] {
            let c = conjugate(&phi, &ys, ConjugateOptions::default()).unwrap();
            for t in log_grid(1e-3, 1e3, 30) {
                let prod = phi.inverse_ext(t) * c.inverse(t);
                assert!(prod >= t * (1.0 - 1e-9), "{} lower at {t}", phi.label());
                assert!(prod <= 2.0 * t + 1e-9 * t, "{} upper at {t}: {}", phi.label(), prod / t);
            }
        }
    }

    #[test]
    fn type_estimates() {
        let s_grid: Vec<f64> = log_grid(1e-3, 1e3, 41);
        let tau_grid = log_grid(1e-4, 1e4, 41);
        for r in [0.5, 1.0, 1.5, 2.0, 3.0] {
            let est = estimate_types(&OrliczFunction::power(r), &s_grid, &tau_grid);
            assert!((est.p_lo - r).abs() < 1e-12 && (est.p_hi - r).abs() < 1e-12, "{r}: {est:?}");
            assert!((est.c_lo - 1.0).abs() < 1e-9 && (est.c_hi - 1.0).abs() < 1e-9);
        }
        let tau_fine = log_grid(1e-7, 1e4, 60);
        let lq = estimate_types(&OrliczFunction::log_quotient(), &s_grid, &tau_fine);
        assert!(lq.p_lo <= 1.0 && lq.p_lo > 0.0);
        assert!(lq.p_hi <= 1.0 && lq.p_hi >= 1.0 - 1e-3, "{lq:?}");
        assert!(lq.c_lo.is_finite() && lq.c_hi.is_finite());

        let taus = log_grid(1e-6, 1e6, 97);
        let tab = OrliczFunction::tabulate_from(&OrliczFunction::power(1.5), &taus).unwrap();
        let est = estimate_types(&tab, &s_grid, &tau_grid);
        assert!((est.p_lo - 1.5).abs() < 0.05 && (est.p_hi - 1.5).abs() < 0.05);
        assert!((est.c_lo - 1.0).abs() < 0.05 && (est.c_hi - 1.0).abs() < 0.05);
    }

    #[test]
    fn record_roundtrip() {
        let taus = log_grid(1e-3, 1e3, 17);
        for phi in [
            OrliczFunction::power(0.8),
            OrliczFunction::power_log(1.5),
            OrliczFunction::log_quotient(),
            OrliczFunction::tabulate_from(&OrliczFunction::power(2.5), &taus).unwrap(),
        ] {
            let text = phi.to_text();
            let back = OrliczFunction::from_text(&text).unwrap();
            assert_eq!(back.kind_name(), phi.kind_name());
            for t in log_grid(1e-2, 1e2, 9) {
                assert_relative_eq!(back.eval_ext(t), phi.eval_ext(t), max_relative = 1e-12);
            }
        }
        assert!(OrliczFunction::from_text("kind = \"bogus\"\np_minus = 1.0\np_plus = 1.0\neval_domain = [1.0, 2.0]").is_err());
    }
}
