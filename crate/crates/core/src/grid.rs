//! Sampled functions on uniform grids, with the geometry (balls, cubes,
//! dyadic tilings, annuli) and Riemann-sum quadrature used by every other
//! module.
//!
//! A grid covers the half-open box `[-L, L)^n` with `N` points per axis at
//! spacing `h = 2L/N`, the first point sitting on `-L`. Norms and maximal
//! operators treat a [`GridFunction`] as zero outside the box; Fourier
//! multipliers treat it as periodic.

use num_complex::Complex64;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Volume of the unit ball in dimension 1 or 2.
pub fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => std::f64::consts::PI,
        _ => panic!("unsupported dimension {dim}"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub dim: usize,
    pub half_width: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn new(dim: usize, half_width: f64, n: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::UnsupportedDimension(dim));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidGrid(format!("half width {half_width} must be positive")));
        }
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("{n} points per axis: need a power of two ≥ 16")));
        }
        Ok(GridSpec { dim, half_width, n })
    }

    #[inline]
    pub fn h(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    /// Cell volume `h^n`.
    #[inline]
    pub fn cell(&self) -> f64 {
        self.h().powi(self.dim as i32)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.h()
    }

    /// Per-axis indices of a flat (row-major) index. Rows are the second axis.
    #[inline]
    pub fn unflatten(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx % self.n, idx / self.n]
        }
    }

    #[inline]
    pub fn flatten(&self, ix: usize, iy: usize) -> usize {
        if self.dim == 1 {
            ix
        } else {
            iy * self.n + ix
        }
    }

    #[inline]
    pub fn point(&self, idx: usize) -> Point {
        let [ix, iy] = self.unflatten(idx);
        if self.dim == 1 {
            [self.coord(ix), 0.0]
        } else {
            [self.coord(ix), self.coord(iy)]
        }
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }

    /// Nearest grid index along one axis, clamped to the box.
    pub fn nearest_index(&self, x: f64) -> usize {
        let i = ((x + self.half_width) / self.h()).round();
        i.clamp(0.0, (self.n - 1) as f64) as usize
    }

    pub fn with_points(&self, n: usize) -> Result<Self> {
        GridSpec::new(self.dim, self.half_width, n)
    }
}

/// Open Euclidean ball `{y : |y - x| < r}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Self {
        Ball { center, radius }
    }

    #[inline]
    pub fn contains(&self, dim: usize, p: Point) -> bool {
        let dx = p[0] - self.center[0];
        let d2 = if dim == 1 {
            dx * dx
        } else {
            let dy = p[1] - self.center[1];
            dx * dx + dy * dy
        };
        d2 < self.radius * self.radius
    }

    pub fn volume(&self, dim: usize) -> f64 {
        unit_ball_volume(dim) * self.radius.powi(dim as i32)
    }
}

/// Axis-parallel cube with half-open edges `[c - l/2, c + l/2)` per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cube {
    pub center: Point,
    pub side: f64,
}

impl Cube {
    pub fn new(center: Point, side: f64) -> Self {
        Cube { center, side }
    }

    /// The cube `[lo, lo + side)^n`.
    pub fn from_corner(dim: usize, lo: Point, side: f64) -> Self {
        let c1 = if dim == 1 { 0.0 } else { lo[1] + 0.5 * side };
        Cube {
            center: [lo[0] + 0.5 * side, c1],
            side,
        }
    }

    #[inline]
    pub fn contains(&self, dim: usize, p: Point) -> bool {
        let half = 0.5 * self.side;
        (0..dim).all(|a| p[a] >= self.center[a] - half && p[a] < self.center[a] + half)
    }

    /// Same centre, side scaled by `factor`.
    pub fn dilate(&self, factor: f64) -> Cube {
        Cube {
            center: self.center,
            side: self.side * factor,
        }
    }

    pub fn volume(&self, dim: usize) -> f64 {
        self.side.powi(dim as i32)
    }

    pub fn diameter(&self, dim: usize) -> f64 {
        self.side * (dim as f64).sqrt()
    }

    pub fn lower(&self, axis: usize) -> f64 {
        self.center[axis] - 0.5 * self.side
    }

    /// Flat indices of the grid points inside the cube.
    pub fn indices(&self, spec: &GridSpec) -> Vec<usize> {
        let h = spec.h();
        let range = |axis: usize| {
            let lo = ((self.lower(axis) + spec.half_width) / h).ceil().max(0.0) as usize;
            let hi_f = ((self.lower(axis) + self.side + spec.half_width) / h).ceil();
            let hi = (hi_f.max(0.0) as usize).min(spec.n);
            lo..hi.max(lo)
        };
        let mut out = Vec::new();
        if spec.dim == 1 {
            out.extend(range(0).filter(|&i| self.contains(1, spec.point(i))));
        } else {
            for iy in range(1) {
                for ix in range(0) {
                    let idx = spec.flatten(ix, iy);
                    if self.contains(2, spec.point(idx)) {
                        out.push(idx);
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    All,
    Ball(Ball),
    Cube(Cube),
}

impl Region {
    #[inline]
    pub fn contains(&self, dim: usize, p: Point) -> bool {
        match self {
            Region::All => true,
            Region::Ball(b) => b.contains(dim, p),
            Region::Cube(c) => c.contains(dim, p),
        }
    }
}

/// Sample storage.
#[derive(Debug, Clone, PartialEq)]
pub enum Samples {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

impl Samples {
    pub fn len(&self) -> usize {
        match self {
            Samples::Real(v) => v.len(),
            Samples::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub spec: GridSpec,
    pub data: Samples,
    pub support_hint: Option<Cube>,
}

impl GridFunction {
    pub fn real(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        Self::check(&spec, values.len(), values.iter().all(|v| v.is_finite()))?;
        Ok(GridFunction {
            spec,
            data: Samples::Real(values),
            support_hint: None,
        })
    }

    pub fn complex(spec: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        Self::check(&spec, values.len(), values.iter().all(|v| v.re.is_finite() && v.im.is_finite()))?;
        Ok(GridFunction {
            spec,
            data: Samples::Complex(values),
            support_hint: None,
        })
    }

    fn check(spec: &GridSpec, len: usize, finite: bool) -> Result<()> {
        if len != spec.len() {
            return Err(Error::InvalidGrid(format!("{} samples for a grid of {}", len, spec.len())));
        }
        if !finite {
            return Err(Error::InvalidGrid("samples must be finite".into()));
        }
        Ok(())
    }

    pub fn zeros(spec: GridSpec) -> Self {
        GridFunction {
            spec,
            data: Samples::Real(vec![0.0; spec.len()]),
            support_hint: None,
        }
    }

    pub fn from_fn(spec: GridSpec, f: impl Fn(Point) -> f64) -> Self {
        let values = spec.points().map(f).collect();
        GridFunction {
            spec,
            data: Samples::Real(values),
            support_hint: None,
        }
    }

    pub fn indicator(spec: GridSpec, region: Region) -> Self {
        let mut g = Self::from_fn(spec, |p| if region.contains(spec.dim, p) { 1.0 } else { 0.0 });
        if let Region::Cube(c) = region {
            g.support_hint = Some(c);
        }
        g
    }

    pub fn with_support_hint(mut self, cube: Cube) -> Self {
        self.support_hint = Some(cube);
        self
    }

    pub fn is_complex(&self) -> bool {
        matches!(self.data, Samples::Complex(_))
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Real samples; for complex data, the real parts.
    pub fn re(&self) -> Vec<f64> {
        match &self.data {
            Samples::Real(v) => v.clone(),
            Samples::Complex(v) => v.iter().map(|c| c.re).collect(),
        }
    }

    /// Borrow the real samples without copying, if the data is real.
    pub fn as_real(&self) -> Option<&[f64]> {
        match &self.data {
            Samples::Real(v) => Some(v),
            Samples::Complex(_) => None,
        }
    }

    pub fn abs(&self) -> Vec<f64> {
        match &self.data {
            Samples::Real(v) => v.iter().map(|x| x.abs()).collect(),
            Samples::Complex(v) => v.iter().map(|c| c.norm()).collect(),
        }
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        match &self.data {
            Samples::Real(v) => v.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            Samples::Complex(v) => v.clone(),
        }
    }

    /// A new function on the same grid with the given real samples.
    pub fn with_values(&self, values: Vec<f64>) -> Self {
        GridFunction {
            spec: self.spec,
            data: Samples::Real(values),
            support_hint: None,
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        let data = match &self.data {
            Samples::Real(v) => Samples::Real(v.iter().map(|x| c * x).collect()),
            Samples::Complex(v) => Samples::Complex(v.iter().map(|x| x * c).collect()),
        };
        GridFunction {
            spec: self.spec,
            data,
            support_hint: self.support_hint,
        }
    }

    /// Pointwise sum of two real functions on the same grid.
    pub fn add(&self, other: &GridFunction) -> Self {
        let a = self.re();
        let b = other.re();
        self.with_values(a.iter().zip(&b).map(|(x, y)| x + y).collect())
    }

    /// Periodic shift by whole grid steps: `g(x) = f(x - steps·h)`.
    pub fn shift(&self, steps: [i64; 2]) -> Self {
        let n = self.spec.n as i64;
        let spec = self.spec;
        let src = |idx: usize| {
            let [ix, iy] = spec.unflatten(idx);
            let sx = (ix as i64 - steps[0]).rem_euclid(n) as usize;
            let sy = if spec.dim == 1 { 0 } else { (iy as i64 - steps[1]).rem_euclid(n) as usize };
            spec.flatten(sx, sy)
        };
        self.permuted(src)
    }

    /// Reflection through the origin on the lattice: index `i ↦ (N - i) mod N`.
    pub fn reflect(&self) -> Self {
        let n = self.spec.n;
        let spec = self.spec;
        let src = |idx: usize| {
            let [ix, iy] = spec.unflatten(idx);
            let rx = (n - ix) % n;
            let ry = if spec.dim == 1 { 0 } else { (n - iy) % n };
            spec.flatten(rx, ry)
        };
        self.permuted(src)
    }

    fn permuted(&self, src: impl Fn(usize) -> usize) -> Self {
        let data = match &self.data {
            Samples::Real(v) => Samples::Real((0..v.len()).map(|i| v[src(i)]).collect()),
            Samples::Complex(v) => Samples::Complex((0..v.len()).map(|i| v[src(i)]).collect()),
        };
        GridFunction {
            spec: self.spec,
            data,
            support_hint: None,
        }
    }

    /// Bounding box `(lower, upper)` of the grid points carrying nonzero values.
    pub fn support_bbox(&self) -> Option<(Point, Point)> {
        let abs = self.abs();
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        let mut any = false;
        for (i, v) in abs.iter().enumerate() {
            if *v != 0.0 {
                any = true;
                let p = self.spec.point(i);
                for a in 0..self.spec.dim {
                    lo[a] = lo[a].min(p[a]);
                    hi[a] = hi[a].max(p[a]);
                }
            }
        }
        any.then_some((lo, hi))
    }

    /// Distance from the support to the box boundary; `+∞` for `f = 0`.
    pub fn boundary_margin(&self) -> f64 {
        let l = self.spec.half_width;
        match self.support_bbox() {
            None => f64::INFINITY,
            Some((lo, hi)) => (0..self.spec.dim)
                .map(|a| (lo[a] + l).min(l - hi[a]))
                .fold(f64::INFINITY, f64::min),
        }
    }
}

/// Neumaier-compensated sum in a fixed order.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `h^n Σ f` over the grid points in `region`, real parts only.
pub fn integrate(f: &GridFunction, region: Region) -> f64 {
    integrate_values(&f.spec, &f.re(), region)
}

pub fn integrate_values(spec: &GridSpec, values: &[f64], region: Region) -> f64 {
    let sum = match region {
        Region::All => compensated_sum(values.iter().copied()),
        Region::Cube(c) => compensated_sum(c.indices(spec).into_iter().map(|i| values[i])),
        Region::Ball(_) => compensated_sum(region_indices(spec, region).into_iter().map(|i| values[i])),
    };
    sum * spec.cell()
}

/// Flat indices of the grid points inside `region`.
pub fn region_indices(spec: &GridSpec, region: Region) -> Vec<usize> {
    match region {
        Region::Cube(c) => c.indices(spec),
        Region::Ball(b) => {
            let h = spec.h();
            let range = |axis: usize| {
                let lo = ((b.center[axis] - b.radius + spec.half_width) / h).floor().max(0.0) as usize;
                let hi = (((b.center[axis] + b.radius + spec.half_width) / h).ceil().max(-1.0) + 1.0) as usize;
                lo.min(spec.n)..hi.min(spec.n)
            };
            let mut out = Vec::new();
            let ys = if spec.dim == 1 { 0..1 } else { range(1) };
            for iy in ys {
                for ix in range(0) {
                    let idx = spec.flatten(ix, iy);
                    if b.contains(spec.dim, spec.point(idx)) {
                        out.push(idx);
                    }
                }
            }
            out
        }
        Region::All => (0..spec.len()).collect(),
    }
}

/// Grid points of `S_0(Q) = 2Q` and of the annuli `S_j(Q) = 2^{j+1}Q \ 2^j Q`
/// for `j = 1..=jmax`.
pub fn annulus_rings(spec: &GridSpec, q: &Cube, jmax: usize) -> Vec<Vec<usize>> {
    let mut rings = vec![Vec::new(); jmax + 1];
    for idx in 0..spec.len() {
        let p = spec.point(idx);
        for (j, ring) in rings.iter_mut().enumerate() {
            let outer = q.dilate(2f64.powi(j as i32 + 1));
            if outer.contains(spec.dim, p) {
                if j == 0 || !q.dilate(2f64.powi(j as i32)).contains(spec.dim, p) {
                    ring.push(idx);
                }
                break;
            }
        }
    }
    rings
}

/// The level-`level` dyadic partition of the box into `2^{level·n}` cubes.
pub fn dyadic_cubes(spec: &GridSpec, level: u32) -> Result<Vec<Cube>> {
    let per_axis = 1usize
        .checked_shl(level)
        .filter(|p| *p <= spec.n && spec.n % p == 0)
        .ok_or(Error::IndivisibleLevel { level, points: spec.n })?;
    let side = 2.0 * spec.half_width / per_axis as f64;
    let mut cubes = Vec::with_capacity(per_axis.pow(spec.dim as u32));
    let ys = if spec.dim == 1 { 1 } else { per_axis };
    for ky in 0..ys {
        for kx in 0..per_axis {
            let lo = [
                -spec.half_width + kx as f64 * side,
                -spec.half_width + ky as f64 * side,
            ];
            cubes.push(Cube::from_corner(spec.dim, lo, side));
        }
    }
    Ok(cubes)
}

/// The cubes `Q_{tk} = t(k + [0,1)^n)` meeting the box, with their `k`.
/// The side `t` must be a whole multiple of the grid step.
pub fn tile_cubes(spec: &GridSpec, t: f64) -> Result<Vec<([i64; 2], Cube)>> {
    let h = spec.h();
    let ratio = t / h;
    if !(ratio >= 1.0 && (ratio - ratio.round()).abs() < 1e-9) {
        return Err(Error::IncompatibleTiling { t, h });
    }
    let l = spec.half_width;
    let kmin = (-l / t).floor() as i64;
    let kmax = ((l / t).ceil() as i64) - 1;
    let mut out = Vec::new();
    let ys: Vec<i64> = if spec.dim == 1 { vec![0] } else { (kmin..=kmax).collect() };
    for &ky in &ys {
        for kx in kmin..=kmax {
            let lo = [kx as f64 * t, ky as f64 * t];
            out.push(([kx, ky], Cube::from_corner(spec.dim, lo, t)));
        }
    }
    Ok(out)
}

/// Lattice version of an open ball: for each row offset `dy ∈ [-R, R]` the
/// half-width of the row segment inside the ball, in grid steps.
#[derive(Debug, Clone)]
pub struct LatticeBall {
    pub rows: Vec<(i64, usize)>,
    pub count: usize,
}

impl LatticeBall {
    pub fn new(dim: usize, radius_steps: f64) -> Self {
        let rr = radius_steps * radius_steps;
        let max_k = |dy2: f64| -> Option<usize> {
            if dy2 >= rr {
                return None;
            }
            let mut k = (rr - dy2).sqrt().floor() as i64;
            while k >= 0 && (k * k) as f64 + dy2 >= rr {
                k -= 1;
            }
            while ((k + 1) * (k + 1)) as f64 + dy2 < rr {
                k += 1;
            }
            (k >= 0).then_some(k as usize)
        };
        let mut rows = Vec::new();
        if dim == 1 {
            if let Some(w) = max_k(0.0) {
                rows.push((0, w));
            }
        } else {
            let r = radius_steps.ceil() as i64;
            for dy in -r..=r {
                if let Some(w) = max_k((dy * dy) as f64) {
                    rows.push((dy, w));
                }
            }
        }
        let count = rows.iter().map(|(_, w)| 2 * w + 1).sum();
        LatticeBall { rows, count }
    }
}

/// Prefix sums kept as an unevaluated pair `hi + lo` so that window sums far
/// from the bulk of the mass keep their relative accuracy.
#[derive(Debug, Clone)]
pub struct PrefixSum {
    hi: Vec<f64>,
    lo: Vec<f64>,
}

impl PrefixSum {
    pub fn new(values: impl IntoIterator<Item = f64>) -> Self {
        let mut hi = vec![0.0];
        let mut lo = vec![0.0];
        let (mut s, mut c) = (0.0f64, 0.0f64);
        for v in values {
            let t = s + v;
            let e = if s.abs() >= v.abs() { (s - t) + v } else { (v - t) + s };
            s = t;
            c += e;
            hi.push(s);
            lo.push(c);
        }
        PrefixSum { hi, lo }
    }

    /// Sum of entries `a..b` (clamped to the stored range).
    #[inline]
    pub fn window(&self, a: i64, b: i64) -> f64 {
        let n = (self.hi.len() - 1) as i64;
        let a = a.clamp(0, n) as usize;
        let b = b.clamp(0, n) as usize;
        if b <= a {
            return 0.0;
        }
        (self.hi[b] - self.hi[a]) + (self.lo[b] - self.lo[a])
    }
}

/// For every grid point, the sum of `values` over the lattice ball of the
/// given radius (in grid steps) around it, with zero extension.
pub fn ball_sums(spec: &GridSpec, values: &[f64], ball: &LatticeBall) -> Vec<f64> {
    let n = spec.n;
    if spec.dim == 1 {
        let ps = PrefixSum::new(values.iter().copied());
        let w = ball.rows.first().map(|r| r.1 as i64);
        return (0..n as i64)
            .map(|i| match w {
                Some(w) => ps.window(i - w, i + w + 1).max(0.0),
                None => 0.0,
            })
            .collect();
    }
    let rows: Vec<PrefixSum> = (0..n).map(|iy| PrefixSum::new(values[iy * n..(iy + 1) * n].iter().copied())).collect();
    let mut out = vec![0.0; spec.len()];
    for iy in 0..n as i64 {
        for ix in 0..n as i64 {
            let mut s = 0.0;
            for &(dy, w) in &ball.rows {
                let y = iy + dy;
                if y < 0 || y >= n as i64 {
                    continue;
                }
                let w = w as i64;
                s += rows[y as usize].window(ix - w, ix + w + 1);
            }
            out[(iy as usize) * n + ix as usize] = s.max(0.0);
        }
    }
    out
}

/// Writes the `GRIDFN1` binary format.
pub fn write_gridfn(w: &mut impl Write, f: &GridFunction) -> Result<()> {
    let dtype = if f.is_complex() { "complex" } else { "real" };
    writeln!(w, "GRIDFN1 {} {} {} {}", f.spec.dim, f.spec.n, f.spec.half_width, dtype)?;
    match &f.data {
        Samples::Real(v) => {
            for x in v {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Samples::Complex(v) => {
            for c in v {
                w.write_all(&c.re.to_le_bytes())?;
                w.write_all(&c.im.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

/// Reads the `GRIDFN1` binary format.
pub fn read_gridfn(r: &mut impl BufRead) -> Result<GridFunction> {
    let mut header = String::new();
    r.read_line(&mut header)?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 5 || parts[0] != "GRIDFN1" {
        return Err(Error::Format(format!("bad GRIDFN1 header `{}`", header.trim_end())));
    }
    let parse_err = |what: &str| Error::Format(format!("bad {what} in GRIDFN1 header"));
    let dim: usize = parts[1].parse().map_err(|_| parse_err("dim"))?;
    let n: usize = parts[2].parse().map_err(|_| parse_err("N"))?;
    let l: f64 = parts[3].parse().map_err(|_| parse_err("L"))?;
    let spec = GridSpec::new(dim, l, n)?;
    let complex = match parts[4] {
        "real" => false,
        "complex" => true,
        other => return Err(Error::Format(format!("unknown dtype `{other}`"))),
    };
    let count = spec.len() * if complex { 2 } else { 1 };
    let mut bytes = vec![0u8; count * 8];
    r.read_exact(&mut bytes)?;
    let floats: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("chunk of 8")))
        .collect();
    if complex {
        let v = floats.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
        GridFunction::complex(spec, v)
    } else {
        GridFunction::real(spec, floats)
    }
}

/// Imports a 1-D function from CSV: either one value per line (then the half
/// width must be given) or `x,value` rows on a uniform grid starting at `-L`.
pub fn read_csv_1d(r: impl BufRead, half_width: Option<f64>) -> Result<GridFunction> {
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::Format(format!("line {}: `{s}` is not a number", lineno + 1)))
        };
        match cols.as_slice() {
            [v] => vs.push(num(v)?),
            [x, v] => {
                // A non-numeric first row is a header.
                if xs.is_empty() && vs.is_empty() && x.parse::<f64>().is_err() {
                    continue;
                }
                xs.push(num(x)?);
                vs.push(num(v)?);
            }
            _ => return Err(Error::Format(format!("line {}: expected 1 or 2 columns", lineno + 1))),
        }
    }
    let l = match (half_width, xs.first()) {
        (Some(l), _) => l,
        (None, Some(&x0)) => -x0,
        (None, None) => return Err(Error::Format("value-only CSV needs an explicit half width".into())),
    };
    let spec = GridSpec::new(1, l, vs.len())?;
    if !xs.is_empty() {
        if xs.len() != vs.len() {
            return Err(Error::Format("mixed one- and two-column rows".into()));
        }
        for (i, x) in xs.iter().enumerate() {
            if (x - spec.coord(i)).abs() > 1e-9 * l.max(1.0) {
                return Err(Error::Format(format!("row {i}: abscissa {x} is not on the uniform grid")));
            }
        }
    }
    GridFunction::real(spec, vs)
}
