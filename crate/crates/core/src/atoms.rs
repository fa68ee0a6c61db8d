//! Orlicz-slice Hardy quasi-norm, atoms and molecules, the level-set atomic
//! decomposition and the finite atomic functional.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{annulus_rings, GridFunction, GridSpec, Region};
use crate::maximal::{dyadic_scales, grand_maximal, radial_maximal, Extension, MaximalConfig, TestFunction};
use crate::norms::{indicator_slice_norm, multi_indices, slice_norm_values, SliceParams};

/// `‖M(f, φ)‖_{(E_Φ^q)_t}`, the outer norm truncated at the box.
pub fn hardy_norm(f: &GridFunction, params: &SliceParams, phi: &TestFunction, scales: &[f64]) -> Result<f64> {
    let m = radial_maximal(f, phi, scales, Extension::Zero)?;
    Ok(slice_norm_values(&f.spec, &m.re(), params))
}

/// Hardy norm with the unit Gaussian and dyadic scales.
pub fn hardy_norm_default(f: &GridFunction, params: &SliceParams) -> Result<f64> {
    hardy_norm(f, params, &TestFunction::unit_gaussian(f.spec.dim), &dyadic_scales(&f.spec))
}

/// A grid function stored by its nonzero entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Sparse {
    pub spec: GridSpec,
    pub idx: Vec<usize>,
    pub val: Vec<f64>,
}

impl Sparse {
    pub fn from_dense(f: &GridFunction) -> Self {
        let (idx, val) = f.re().into_iter().enumerate().filter(|(_, v)| *v != 0.0).unzip();
        Sparse { spec: f.spec, idx, val }
    }

    pub fn to_dense(&self) -> GridFunction {
        let mut out = vec![0.0; self.spec.len()];
        self.add_into(&mut out, 1.0);
        GridFunction::real(self.spec, out).expect("finite values")
    }

    pub fn add_into(&self, out: &mut [f64], c: f64) {
        for (&i, &v) in self.idx.iter().zip(&self.val) {
            out[i] += c * v;
        }
    }

    pub fn norm(&self, r: f64) -> f64 {
        if r.is_infinite() {
            return self.val.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        }
        let s: f64 = self.val.iter().map(|v| v.abs().powf(r)).sum();
        (s * self.spec.cell()).powf(1.0 / r)
    }

    fn restricted_norm(&self, keep: &[bool], r: f64) -> f64 {
        let vals = self.idx.iter().zip(&self.val).filter(|(i, _)| keep[**i]).map(|(_, v)| v.abs());
        if r.is_infinite() {
            return vals.fold(0.0f64, f64::max);
        }
        (vals.map(|v| v.powf(r)).sum::<f64>() * self.spec.cell()).powf(1.0 / r)
    }

    /// `∫ a(x) (x - c)^α dx`.
    fn moment(&self, c: [f64; 2], alpha: [usize; 2]) -> f64 {
        let dim = self.spec.dim;
        let s: f64 = self
            .idx
            .iter()
            .zip(&self.val)
            .map(|(&i, &v)| {
                let p = self.spec.point(i);
                let m = (p[0] - c[0]).powi(alpha[0] as i32) * if dim == 2 { (p[1] - c[1]).powi(alpha[1] as i32) } else { 1.0 };
                v * m
            })
            .sum();
        s * self.spec.cell()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomSpec {
    pub cube: crate::grid::Cube,
    pub r: f64,
    pub d: usize,
    pub payload: Sparse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MoleculeSpec {
    pub cube: crate::grid::Cube,
    pub r: f64,
    pub d: usize,
    pub tau: f64,
    pub payload: Sparse,
}

/// Outcome of an atom or molecule check. `size_slack` is `1 - measured/bound`
/// at the tightest size constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Validation {
    pub support: bool,
    pub size: bool,
    pub moments: bool,
    pub size_slack: f64,
    pub moment_max: f64,
    pub moment_tol: f64,
}

impl Validation {
    pub fn valid(&self) -> bool {
        self.support && self.size && self.moments
    }
}

/// `|Q|^{1/r} / ‖χ_Q‖_{(E_Φ^q)_t}`.
pub fn size_bound(spec: &GridSpec, cube: &crate::grid::Cube, r: f64, params: &SliceParams) -> f64 {
    let vol = cube.volume(spec.dim);
    let vr = if r.is_infinite() { 1.0 } else { vol.powf(1.0 / r) };
    vr / indicator_slice_norm(spec, Region::Cube(*cube), &params.clone().truncated())
}

fn moment_check(payload: &Sparse, cube: &crate::grid::Cube, d: usize) -> (bool, f64, f64) {
    let tol = 1e-10 * payload.norm(1.0) * cube.diameter(payload.spec.dim).powi(d as i32);
    let worst = multi_indices(payload.spec.dim, d)
        .into_iter()
        .map(|a| payload.moment(cube.center, a).abs())
        .fold(0.0f64, f64::max);
    (worst <= tol, worst, tol)
}

const SIZE_SLACK: f64 = 1e-9;

pub fn validate_atom(a: &AtomSpec, params: &SliceParams) -> Validation {
    let spec = &a.payload.spec;
    let support = a
        .payload
        .idx
        .iter()
        .zip(&a.payload.val)
        .all(|(&i, &v)| v == 0.0 || a.cube.contains(spec.dim, spec.point(i)));
    let bound = size_bound(spec, &a.cube, a.r, params);
    let measured = a.payload.norm(a.r);
    let (moments, moment_max, moment_tol) = moment_check(&a.payload, &a.cube, a.d);
    Validation {
        support,
        size: measured <= bound * (1.0 + SIZE_SLACK),
        moments,
        size_slack: 1.0 - measured / bound,
        moment_max,
        moment_tol,
    }
}

/// Number of rings needed for `2^{j+1}Q` to cover the box.
fn ring_count(spec: &GridSpec, cube: &crate::grid::Cube) -> usize {
    let reach = (0..spec.dim)
        .map(|a| cube.center[a].abs() + spec.half_width)
        .fold(0.0f64, f64::max);
    ((2.0 * reach / cube.side).log2().ceil().max(0.0) as usize) + 1
}

pub fn validate_molecule(m: &MoleculeSpec, params: &SliceParams) -> Validation {
    let spec = &m.payload.spec;
    let bound = size_bound(spec, &m.cube, m.r, params);
    let rings = annulus_rings(spec, &m.cube, ring_count(spec, &m.cube));
    let mut covered = vec![false; spec.len()];
    let mut size = true;
    let mut slack = f64::INFINITY;
    for (j, ring) in rings.iter().enumerate() {
        let mut keep = vec![false; spec.len()];
        for &i in ring {
            keep[i] = true;
            covered[i] = true;
        }
        let bj = bound * 2f64.powf(-m.tau * j as f64);
        let measured = m.payload.restricted_norm(&keep, m.r);
        size &= measured <= bj * (1.0 + SIZE_SLACK);
        slack = slack.min(1.0 - measured / bj);
    }
    let support = m.payload.idx.iter().zip(&m.payload.val).all(|(&i, &v)| v == 0.0 || covered[i]);
    let (moments, moment_max, moment_tol) = moment_check(&m.payload, &m.cube, m.d);
    Validation {
        support,
        size,
        moments,
        size_slack: slack,
        moment_max,
        moment_tol,
    }
}

/// Least-squares fit of polynomials of degree `≤ d` in `(x - c)/ρ` on the
/// given points; returns the fitted values.
fn polynomial_fit(spec: &GridSpec, idx: &[usize], vals: &[f64], c: [f64; 2], rho: f64, d: usize) -> Vec<f64> {
    let alphas = multi_indices(spec.dim, d);
    let a = DMatrix::from_fn(idx.len(), alphas.len(), |i, j| {
        let p = spec.point(idx[i]);
        let u = (p[0] - c[0]) / rho;
        let v = (p[1] - c[1]) / rho;
        u.powi(alphas[j][0] as i32) * if spec.dim == 2 { v.powi(alphas[j][1] as i32) } else { 1.0 }
    });
    let b = DVector::from_column_slice(vals);
    let svd = a.clone().svd(true, true);
    let coef = svd.solve(&b, 1e-13).expect("SVD computed with U and V");
    (&a * coef).iter().copied().collect()
}

/// Removes the polynomial part twice, which takes the moments down to rounding.
fn remove_polynomials(spec: &GridSpec, idx: &[usize], vals: &mut [f64], c: [f64; 2], rho: f64, d: usize) -> Vec<f64> {
    let mut removed = vec![0.0; vals.len()];
    for _ in 0..2 {
        let fit = polynomial_fit(spec, idx, vals, c, rho, d);
        for ((v, r), p) in vals.iter_mut().zip(removed.iter_mut()).zip(fit) {
            *v -= p;
            *r += p;
        }
    }
    removed
}

fn scaled_to(vals: &mut [f64], spec: &GridSpec, r: f64, target: f64) {
    let s = Sparse {
        spec: *spec,
        idx: (0..vals.len()).collect(),
        val: vals.to_vec(),
    };
    let cur = s.norm(r);
    if cur > 0.0 {
        for v in vals.iter_mut() {
            *v *= target / cur;
        }
    }
}

/// Random atom on `Q` saturating `0.9` of the size bound.
pub fn synthesize_atom(
    spec: &GridSpec,
    cube: &crate::grid::Cube,
    r: f64,
    d: usize,
    params: &SliceParams,
    seed: u64,
) -> Result<AtomSpec> {
    let idx = cube.indices(spec);
    let constraints = multi_indices(spec.dim, d).len();
    if idx.len() <= constraints {
        return Err(Error::DegenerateCube {
            points: idx.len(),
            constraints,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vals: Vec<f64> = idx.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
    remove_polynomials(spec, &idx, &mut vals, cube.center, 0.5 * cube.side, d);
    scaled_to(&mut vals, spec, r, 0.9 * size_bound(spec, cube, r, params));
    Ok(AtomSpec {
        cube: *cube,
        r,
        d,
        payload: Sparse { spec: *spec, idx, val: vals },
    })
}

/// Random molecule built from moment-free pieces on the rings `S_j(Q)`,
/// `j ≤ rings`, each at `0.9` of its ring bound. Rings leaving the box are
/// truncated to their grid points.
pub fn synthesize_molecule(
    spec: &GridSpec,
    cube: &crate::grid::Cube,
    r: f64,
    d: usize,
    tau: f64,
    rings: usize,
    params: &SliceParams,
    seed: u64,
) -> Result<MoleculeSpec> {
    let bound = size_bound(spec, cube, r, params);
    let constraints = multi_indices(spec.dim, d).len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx_all = Vec::new();
    let mut val_all = Vec::new();
    for (j, ring) in annulus_rings(spec, cube, rings).into_iter().enumerate() {
        if ring.len() <= constraints {
            if j == 0 {
                return Err(Error::DegenerateCube {
                    points: ring.len(),
                    constraints,
                });
            }
            continue;
        }
        let mut vals: Vec<f64> = ring.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
        remove_polynomials(spec, &ring, &mut vals, cube.center, 0.5 * cube.side * 2f64.powi(j as i32 + 1), d);
        scaled_to(&mut vals, spec, r, 0.9 * bound * 2f64.powf(-tau * j as f64));
        idx_all.extend(ring);
        val_all.extend(vals);
    }
    let mut order: Vec<usize> = (0..idx_all.len()).collect();
    order.sort_by_key(|&k| idx_all[k]);
    Ok(MoleculeSpec {
        cube: *cube,
        r,
        d,
        tau,
        payload: Sparse {
            spec: *spec,
            idx: order.iter().map(|&k| idx_all[k]).collect(),
            val: order.iter().map(|&k| val_all[k]).collect(),
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomTerm {
    pub level: i32,
    pub lambda: f64,
    pub atom: AtomSpec,
}

#[derive(Debug, Clone)]
pub struct AtomicDecomposition {
    pub terms: Vec<AtomTerm>,
    pub s: f64,
    /// The part of `f` not carried by atoms: the coarsest good function plus
    /// the polynomial mass removed from the pieces.
    pub residual: GridFunction,
    pub levels: (i32, i32),
}

impl AtomicDecomposition {
    /// `Σ λ_j a_j` over terms with level `≤ max_level`.
    pub fn partial_sum(&self, max_level: i32) -> GridFunction {
        let mut out = vec![0.0; self.residual.spec.len()];
        for t in self.terms.iter().filter(|t| t.level <= max_level) {
            t.atom.payload.add_into(&mut out, t.lambda);
        }
        GridFunction::real(self.residual.spec, out).expect("finite values")
    }

    pub fn atom_sum(&self) -> GridFunction {
        self.partial_sum(i32::MAX)
    }

    /// `Σ λ_j a_j + residual`, with the residual carried at the coarsest level.
    pub fn reconstruct(&self) -> GridFunction {
        self.atom_sum().add(&self.residual)
    }
}

fn morton(x: usize, y: usize) -> u64 {
    let spread = |v: usize| {
        let mut v = v as u64 & 0xffff_ffff;
        v = (v | (v << 16)) & 0x0000_ffff_0000_ffff;
        v = (v | (v << 8)) & 0x00ff_00ff_00ff_00ff;
        v = (v | (v << 4)) & 0x0f0f_0f0f_0f0f_0f0f;
        v = (v | (v << 2)) & 0x3333_3333_3333_3333;
        (v | (v << 1)) & 0x5555_5555_5555_5555
    };
    spread(x) | (spread(y) << 1)
}

/// A dyadic cube in index space: lower corner and points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct IndexCube {
    lo: [usize; 2],
    m: usize,
}

impl IndexCube {
    fn cube(&self, spec: &GridSpec) -> crate::grid::Cube {
        let h = spec.h();
        let lo = [spec.coord(self.lo[0]) - 0.5 * h, spec.coord(self.lo[1]) - 0.5 * h];
        crate::grid::Cube::from_corner(spec.dim, lo, self.m as f64 * h)
    }

    fn indices(&self, spec: &GridSpec) -> Vec<usize> {
        let ys = if spec.dim == 1 { 0..1 } else { self.lo[1]..self.lo[1] + self.m };
        let mut out = Vec::with_capacity(self.m.pow(spec.dim as u32));
        for y in ys {
            for x in self.lo[0]..self.lo[0] + self.m {
                out.push(spec.flatten(x, y));
            }
        }
        out
    }
}

/// Summed-area table of a 0/1 mask for `O(1)` rectangle counts.
struct MaskCounts {
    n: usize,
    dim: usize,
    table: Vec<u32>,
}

impl MaskCounts {
    fn new(spec: &GridSpec, mask: &[bool]) -> Self {
        let n = spec.n;
        let rows = if spec.dim == 1 { 1 } else { n };
        let mut table = vec![0u32; (n + 1) * (rows + 1)];
        for y in 0..rows {
            for x in 0..n {
                let v = mask[spec.flatten(x, y)] as u32;
                table[(y + 1) * (n + 1) + x + 1] = v + table[y * (n + 1) + x + 1] + table[(y + 1) * (n + 1) + x] - table[y * (n + 1) + x];
            }
        }
        MaskCounts { n, dim: spec.dim, table }
    }

    /// Count over `[x0, x1) × [y0, y1)`.
    fn count(&self, x0: usize, x1: usize, y0: usize, y1: usize) -> u32 {
        let (y0, y1) = if self.dim == 1 { (0, 1) } else { (y0, y1) };
        let w = self.n + 1;
        self.table[y1 * w + x1] + self.table[y0 * w + x0] - self.table[y0 * w + x1] - self.table[y1 * w + x0]
    }
}

/// Maximal dyadic cubes `Q` with `3Q ⊂ O`, down to cubes of `min_points` per
/// axis. Cubes whose triple leaves the box are never selected.
fn whitney_cover(spec: &GridSpec, mask: &[bool], min_points: usize) -> Vec<IndexCube> {
    let outside: Vec<bool> = mask.iter().map(|b| !b).collect();
    let counts = MaskCounts::new(spec, &outside);
    let n = spec.n;
    let mut chosen: Vec<IndexCube> = Vec::new();
    let mut taken = vec![false; spec.len()];
    let mut m = n;
    while m >= min_points {
        let per = n / m;
        let ys = if spec.dim == 1 { 1 } else { per };
        for ky in 0..ys {
            for kx in 0..per {
                let c = IndexCube { lo: [kx * m, ky * m], m };
                if taken[spec.flatten(c.lo[0], c.lo[1])] {
                    continue;
                }
                let fits = |k: usize| k >= 1 && k + 2 <= per;
                if !fits(kx) || (spec.dim == 2 && !fits(ky)) {
                    continue;
                }
                let (x0, x1) = ((kx - 1) * m, (kx + 2) * m);
                let (y0, y1) = if spec.dim == 2 { ((ky - 1) * m, (ky + 2) * m) } else { (0, 1) };
                if counts.count(x0, x1, y0, y1) == 0 {
                    for i in c.indices(spec) {
                        taken[i] = true;
                    }
                    chosen.push(c);
                }
            }
        }
        m /= 2;
    }
    chosen
}

/// Level-set atomic decomposition driven by the grand maximal function.
/// Pieces at level `j` are `(g_{j+1} - g_j)χ_Q` over the Whitney cubes of
/// `O_j = {M_N f > 2^j}`, where `g_j` equals `f` off the cover and its local
/// polynomial projection on each cube. Atoms use `r = ∞`.
pub fn atomic_decompose(
    f: &GridFunction,
    params: &SliceParams,
    cfg: &MaximalConfig,
    s: f64,
    d: usize,
) -> Result<AtomicDecomposition> {
    let spec = f.spec;
    if spec.dim > 2 || spec.dim == 0 {
        return Err(Error::UnsupportedDimension(spec.dim));
    }
    let cap = params.min_exponent().min(1.0);
    if !(s > 0.0 && s < cap) {
        return Err(Error::ParameterWindow(format!("s = {s} must lie in (0, {cap})")));
    }
    let need = (spec.dim as f64 * (1.0 / s - 1.0)).floor() as usize;
    if d < need {
        return Err(Error::ParameterWindow(format!("d = {d} below ⌊n(1/s - 1)⌋ = {need}")));
    }
    let fv = f.re();
    let mn = grand_maximal(f, cfg).re();
    let max = mn.iter().fold(0.0f64, |a, v| a.max(*v));
    let min_pos = mn.iter().filter(|v| **v > 0.0).fold(f64::INFINITY, |a, v| a.min(*v));
    if max == 0.0 {
        return Err(Error::EmptyLevelRange);
    }
    let j1 = max.log2().ceil() as i32;
    let j0 = (min_pos.log2().ceil() as i32).max(j1 - 39);
    if j0 >= j1 {
        return Err(Error::EmptyLevelRange);
    }
    let min_points = (2 * (d + 1)).max(4);
    let unit = params.clone().truncated();
    let mut chi_norms: HashMap<usize, f64> = HashMap::new();

    // Good functions g_j for j0..=j1, with g_{j1} = f.
    let mut covers = Vec::new();
    let mut goods = Vec::new();
    for j in j0..=j1 {
        let thresh = 2f64.powi(j);
        let mask: Vec<bool> = mn.iter().map(|v| *v > thresh).collect();
        let cover = if j == j1 { Vec::new() } else { whitney_cover(&spec, &mask, min_points) };
        let mut g = fv.clone();
        for c in &cover {
            let idx = c.indices(&spec);
            let vals: Vec<f64> = idx.iter().map(|&i| fv[i]).collect();
            let cube = c.cube(&spec);
            let fit = polynomial_fit(&spec, &idx, &vals, cube.center, 0.5 * cube.side, d);
            for (&i, p) in idx.iter().zip(fit) {
                g[i] = p;
            }
        }
        covers.push(cover);
        goods.push(g);
    }

    let mut residual = goods[0].clone();
    let mut terms = Vec::new();
    let tiny = 1e-14 * fv.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    for (k, cover) in covers.iter().enumerate() {
        let level = j0 + k as i32;
        let mut ordered = cover.clone();
        ordered.sort_by_key(|c| (morton(c.lo[0], c.lo[1]), c.m));
        for c in ordered {
            let idx = c.indices(&spec);
            let cube = c.cube(&spec);
            let mut vals: Vec<f64> = idx.iter().map(|&i| goods[k + 1][i] - goods[k][i]).collect();
            let removed = remove_polynomials(&spec, &idx, &mut vals, cube.center, 0.5 * cube.side, d);
            for (&i, p) in idx.iter().zip(&removed) {
                residual[i] += p;
            }
            let sup = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if sup <= tiny {
                for (&i, v) in idx.iter().zip(&vals) {
                    residual[i] += v;
                }
                continue;
            }
            let chi = *chi_norms
                .entry(c.m)
                .or_insert_with(|| indicator_slice_norm(&spec, Region::Cube(cube), &unit));
            let lambda = sup * chi;
            let (kept_idx, kept_val): (Vec<usize>, Vec<f64>) = idx
                .into_iter()
                .zip(vals)
                .filter(|(_, v)| *v != 0.0)
                .map(|(i, v)| (i, v / lambda))
                .unzip();
            terms.push(AtomTerm {
                level,
                lambda,
                atom: AtomSpec {
                    cube,
                    r: f64::INFINITY,
                    d,
                    payload: Sparse {
                        spec,
                        idx: kept_idx,
                        val: kept_val,
                    },
                },
            });
        }
    }
    Ok(AtomicDecomposition {
        terms,
        s,
        residual: f.with_values(residual),
        levels: (j0, j1),
    })
}

/// `‖{Σ_j [λ_j/‖χ_{Q_j}‖]^s χ_{Q_j}}^{1/s}‖_{(E_Φ^q)_t}` for finitely many terms.
pub fn finite_atomic_norm(terms: &[(f64, crate::grid::Cube)], spec: &GridSpec, params: &SliceParams, s: f64) -> f64 {
    let unit = params.clone().truncated();
    let mut acc = vec![0.0; spec.len()];
    let mut chi_norms: HashMap<u64, f64> = HashMap::new();
    for (lambda, cube) in terms {
        let chi = *chi_norms
            .entry(cube.side.to_bits())
            .or_insert_with(|| indicator_slice_norm(spec, Region::Cube(*cube), &unit));
        let w = (lambda / chi).powf(s);
        for i in cube.indices(spec) {
            acc[i] += w;
        }
    }
    let vals: Vec<f64> = acc.into_iter().map(|v| v.powf(1.0 / s)).collect();
    slice_norm_values(spec, &vals, &unit)
}

/// The s-functional of a decomposition's atom terms.
pub fn decomposition_functional(dec: &AtomicDecomposition, params: &SliceParams) -> f64 {
    let terms: Vec<(f64, crate::grid::Cube)> = dec.terms.iter().map(|t| (t.lambda, t.atom.cube)).collect();
    finite_atomic_norm(&terms, &dec.residual.spec, params, dec.s)
}
