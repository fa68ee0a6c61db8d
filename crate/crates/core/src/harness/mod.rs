//! Seeded corpus, verification suites and their reports.

mod suites;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::atoms::{synthesize_atom, synthesize_molecule};
use crate::error::{Error, Result};
use crate::grid::{Ball, Cube, GridFunction, GridSpec, Point, Region};
use crate::norms::SliceParams;
use crate::orlicz::OrliczFunction;

pub use suites::{suite_groups, SUITES};

/// Grid of a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub dim: usize,
    pub half_width: f64,
    pub n: usize,
}

impl GridConfig {
    pub fn spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.dim, self.half_width, self.n)
    }
}

/// Members per corpus family; a zero count omits the family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FamilyCounts {
    pub indicators: usize,
    pub gaussians: usize,
    pub atoms: usize,
    pub molecules: usize,
    pub trig: usize,
    pub whitney: usize,
}

impl FamilyCounts {
    pub fn uniform(k: usize) -> Self {
        FamilyCounts {
            indicators: k,
            gaussians: k,
            atoms: k,
            molecules: k,
            trig: k,
            whitney: k,
        }
    }

    fn get(&self, f: Family) -> usize {
        match f {
            Family::Indicator => self.indicators,
            Family::Gaussian => self.gaussians,
            Family::Atom => self.atoms,
            Family::Molecule => self.molecules,
            Family::Trig => self.trig,
            Family::Whitney => self.whitney,
        }
    }

    pub fn total(&self) -> usize {
        Family::ALL.iter().map(|&f| self.get(f)).sum()
    }
}

impl Default for FamilyCounts {
    fn default() -> Self {
        FamilyCounts::uniform(2)
    }
}

/// Harness configuration, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub seed: u64,
    /// Seed of the first corpus used to freeze brackets.
    pub calibration_seed: u64,
    /// Calibration corpora; round `k` uses seed `calibration_seed + k`.
    pub calibration_rounds: u64,
    pub grid_1d: GridConfig,
    pub grid_2d: GridConfig,
    pub t_sweep: Vec<f64>,
    pub corpus_1d: FamilyCounts,
    pub corpus_2d: FamilyCounts,
    /// Atoms synthesized by the atom and singular-integral suites, per dimension.
    pub atoms_1d: usize,
    pub atoms_2d: usize,
    pub holder_pairs: usize,
    pub fs_families: usize,
    pub fs_family_size: usize,
    pub far_field_probes: usize,
    /// Phase-two widening of frozen brackets.
    pub bracket_slack: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 7,
            calibration_seed: 1009,
            calibration_rounds: 4,
            grid_1d: GridConfig {
                dim: 1,
                half_width: 8.0,
                n: 4096,
            },
            grid_2d: GridConfig {
                dim: 2,
                half_width: 4.0,
                n: 256,
            },
            t_sweep: vec![0.25, 0.5, 1.0, 2.0],
            corpus_1d: FamilyCounts {
                indicators: 3,
                gaussians: 3,
                atoms: 3,
                molecules: 2,
                trig: 2,
                whitney: 2,
            },
            corpus_2d: FamilyCounts::uniform(2),
            atoms_1d: 100,
            atoms_2d: 100,
            holder_pairs: 50,
            fs_families: 10,
            fs_family_size: 8,
            far_field_probes: 32,
            bracket_slack: 1.5,
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Format(format!("config: {e}")))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn check(&self) -> Result<()> {
        if self.t_sweep.is_empty() || self.t_sweep.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(Error::Format("t_sweep must be a nonempty list of positive heights".into()));
        }
        if self.calibration_rounds == 0 {
            return Err(Error::Format("calibration_rounds must be positive".into()));
        }
        if !(self.bracket_slack >= 1.0) {
            return Err(Error::Format("bracket_slack must be at least 1".into()));
        }
        self.grid_1d.spec()?;
        self.grid_2d.spec()?;
        Ok(())
    }

    pub fn t_max(&self) -> f64 {
        self.t_sweep.iter().fold(0.0, |m, t| m.max(*t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    Indicator,
    Gaussian,
    Atom,
    Molecule,
    Trig,
    Whitney,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Indicator,
        Family::Gaussian,
        Family::Atom,
        Family::Molecule,
        Family::Trig,
        Family::Whitney,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Family::Indicator => "indicator",
            Family::Gaussian => "gaussian",
            Family::Atom => "atom",
            Family::Molecule => "molecule",
            Family::Trig => "trig",
            Family::Whitney => "whitney",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Member {
    pub id: String,
    pub family: Family,
    pub f: GridFunction,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub seed: u64,
    pub spec: GridSpec,
    pub members: Vec<Member>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for m in &self.members {
            h.update(m.id.as_bytes());
            for v in m.f.re() {
                h.update(v.to_le_bytes());
            }
        }
        hex(&h.finalize())
    }
}

/// Everything needed to regenerate a corpus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusSpec {
    pub grid: GridSpec,
    pub counts: FamilyCounts,
    /// Largest slice height the corpus must support: every member keeps this
    /// distance (plus four cells) from the box boundary.
    pub reach: f64,
}

/// Slice space used to normalize corpus atoms and molecules.
pub fn reference_params() -> SliceParams {
    SliceParams::new(1.0, 0.8, OrliczFunction::power(0.8))
}

/// Deterministic corpus: each family draws from its own ChaCha stream, so
/// changing one count leaves the other families untouched.
pub fn generate_corpus(seed: u64, spec: &CorpusSpec) -> Result<Corpus> {
    let grid = spec.grid;
    let usable = grid.half_width - spec.reach - 4.0 * grid.h();
    if !(usable > 0.25) {
        return Err(Error::InvalidGrid(format!(
            "box half-width {} leaves no room for supports at reach {}",
            grid.half_width, spec.reach
        )));
    }
    let mut members = Vec::new();
    for (tag, family) in Family::ALL.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(tag as u64 + 1);
        for k in 0..spec.counts.get(*family) {
            let f = draw(*family, k, &grid, usable, &mut rng)?;
            members.push(Member {
                id: format!("{}d-{}-{k:03}", grid.dim, family.name()),
                family: *family,
                f,
            });
        }
    }
    Ok(Corpus {
        seed,
        spec: grid,
        members,
    })
}

fn snap(spec: &GridSpec, x: f64) -> f64 {
    let h = spec.h();
    -spec.half_width + ((x + spec.half_width) / h).round() * h
}

/// Grid-aligned cube of side `side` whose `dilation`-fold dilate stays in `[-u, u]ⁿ`.
fn random_cube(spec: &GridSpec, side: f64, dilation: f64, u: f64, rng: &mut ChaCha8Rng) -> Cube {
    let room = (u - 0.5 * dilation * side).max(0.0);
    let mut lo: Point = [0.0; 2];
    for a in lo.iter_mut().take(spec.dim) {
        let c = rng.random_range(-room..=room);
        *a = snap(spec, c - 0.5 * side);
    }
    Cube::from_corner(spec.dim, lo, side)
}

fn random_center(dim: usize, room: f64, rng: &mut ChaCha8Rng) -> Point {
    let mut c: Point = [0.0; 2];
    for a in c.iter_mut().take(dim) {
        *a = if room > 0.0 { rng.random_range(-room..=room) } else { 0.0 };
    }
    c
}

fn dist(dim: usize, a: Point, b: Point) -> f64 {
    (0..dim).map(|i| (a[i] - b[i]).powi(2)).sum::<f64>().sqrt()
}

fn draw(family: Family, k: usize, spec: &GridSpec, u: f64, rng: &mut ChaCha8Rng) -> Result<GridFunction> {
    let dim = spec.dim;
    let h = spec.h();
    Ok(match family {
        Family::Indicator => {
            if dim == 2 && k % 2 == 1 {
                let radius = rng.random_range(0.125..=(0.75f64).min(u));
                let c = random_center(dim, u - radius, rng);
                GridFunction::indicator(*spec, Region::Ball(Ball::new(c, radius))).with_support_hint(Cube::new(c, 2.0 * radius))
            } else {
                let side = rng.random_range(0.25..=(2.0f64).min(u));
                let cube = random_cube(spec, side, 1.0, u, rng);
                GridFunction::indicator(*spec, Region::Cube(cube))
            }
        }
        Family::Gaussian => {
            // Truncated at six widths, where the tail is below 1e-15.
            let theta = [1.0, 2.0, 4.0][k % 3];
            let sigma_max = u / 7.5;
            let sigma = rng.random_range(sigma_max / 3.0..=sigma_max);
            let w = sigma / theta;
            let c = random_center(dim, u - 6.0 * w, rng);
            let amp = rng.random_range(0.5..=2.0);
            GridFunction::from_fn(*spec, |p| {
                let r = dist(dim, p, c);
                if r < 6.0 * w {
                    amp * (-(r / w).powi(2)).exp()
                } else {
                    0.0
                }
            })
            .with_support_hint(Cube::new(c, 12.0 * w))
        }
        Family::Atom => {
            let sides: &[f64] = if dim == 1 { &[0.25, 0.5, 1.0] } else { &[0.25, 0.5] };
            let side = sides[rng.random_range(0..sides.len())];
            let cube = random_cube(spec, side, 1.0, u, rng);
            let a = synthesize_atom(spec, &cube, f64::INFINITY, 1, &reference_params(), rng.random())?;
            a.payload.to_dense().with_support_hint(cube)
        }
        Family::Molecule => {
            let side = if dim == 1 { [0.25, 0.5][k % 2] } else { 0.125 };
            let cube = random_cube(spec, side, 8.0, u, rng);
            let m = synthesize_molecule(spec, &cube, 2.0, 1, 2.0, 2, &reference_params(), rng.random())?;
            m.payload.to_dense().with_support_hint(cube.dilate(8.0))
        }
        Family::Trig => {
            let radius = rng.random_range(0.5..=(2.0f64).min(u));
            let c = random_center(dim, u - radius, rng);
            let terms: Vec<(f64, Point, f64)> = (0..3)
                .map(|_| {
                    let amp = rng.random_range(-1.0..=1.0);
                    let mut w: Point = [0.0; 2];
                    for a in w.iter_mut().take(dim) {
                        *a = rng.random_range(-8.0..=8.0);
                    }
                    (amp, w, rng.random_range(0.0..std::f64::consts::TAU))
                })
                .collect();
            GridFunction::from_fn(*spec, |p| {
                let r = dist(dim, p, c) / radius;
                if r >= 1.0 {
                    return 0.0;
                }
                let bump = (1.0 - 1.0 / (1.0 - r * r)).exp();
                let wave: f64 = terms
                    .iter()
                    .map(|(a, w, ph)| a * ((0..dim).map(|i| w[i] * (p[i] - c[i])).sum::<f64>() + ph).cos())
                    .sum();
                bump * wave
            })
            .with_support_hint(Cube::new(c, 2.0 * radius))
        }
        Family::Whitney => {
            // Dyadic cubes accumulating at a grid point z, side comparable to the distance to z.
            let top = if dim == 1 { [1.0, 0.5][k % 2] } else { 0.5 };
            let room = u - 2.0 * top;
            let z = random_center(dim, room, rng).map(|x| snap(spec, x));
            let mut values = vec![0.0; spec.len()];
            let mut side = top;
            while side >= 4.0 * h - 1e-12 {
                for sign in [1.0, -1.0] {
                    let mut lo: Point = [0.0; 2];
                    for a in 0..dim {
                        lo[a] = if sign > 0.0 { z[a] + side } else { z[a] - 2.0 * side };
                    }
                    let cube = Cube::from_corner(dim, lo, side);
                    let coef = rng.random_range(0.5..=2.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
                    for i in cube.indices(spec) {
                        values[i] += coef;
                    }
                }
                side *= 0.5;
            }
            GridFunction::real(*spec, values)?.with_support_hint(Cube::new(z, 4.0 * top))
        }
    })
}

/// Hex of the first eight bytes of a SHA-256.
fn hex(bytes: &[u8]) -> String {
    bytes.iter().take(8).fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Digest of the inputs of one case.
pub fn input_digest(fs: &[&GridFunction], extra: &str) -> String {
    let mut h = Sha256::new();
    for f in fs {
        for v in f.re() {
            h.update(v.to_le_bytes());
        }
    }
    h.update(extra.as_bytes());
    hex(&h.finalize())
}

/// One checked value. A case passes when
/// `lo - tol·|lo| ≤ measured ≤ hi + tol·|hi|`.
#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub id: String,
    pub group: &'static str,
    pub digest: String,
    pub measured: f64,
    pub lo: f64,
    pub hi: f64,
    pub tol: f64,
    pub pass: bool,
    /// Bracket key, for cases checked against frozen brackets.
    pub key: Option<String>,
}

impl Case {
    pub fn new(id: String, group: &'static str, digest: String, measured: f64, lo: f64, hi: f64, tol: f64) -> Self {
        let pass = measured.is_finite()
            && (lo == f64::NEG_INFINITY || measured >= lo - tol * lo.abs())
            && (hi == f64::INFINITY || measured <= hi + tol * hi.abs());
        Case {
            id,
            group,
            digest,
            measured,
            lo,
            hi,
            tol,
            pass,
            key: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    pub grids: Vec<GridSpec>,
    pub t_sweep: Vec<f64>,
    pub phis: Vec<String>,
    pub qs: Vec<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub suite: String,
    pub environment: Environment,
    /// Sorted by case id.
    pub cases: Vec<Case>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> usize {
        self.cases.iter().filter(|c| !c.pass).count()
    }

    pub fn summary(&self) -> String {
        format!(
            "SUITE {} {} cases={} failures={}",
            self.suite,
            if self.passed() { "PASS" } else { "FAIL" },
            self.cases.len(),
            self.failures()
        )
    }

    pub fn to_csv(&self) -> String {
        let env = &self.environment;
        let grids: Vec<String> = env
            .grids
            .iter()
            .map(|g| format!("n={} L={} N={}", g.dim, g.half_width, g.n))
            .collect();
        let mut out = String::new();
        let _ = writeln!(out, "# suite={} seed={}", self.suite, env.seed);
        let _ = writeln!(out, "# grids={}", grids.join("; "));
        let _ = writeln!(out, "# t_sweep={:?}", env.t_sweep);
        let _ = writeln!(out, "# phi={}", env.phis.join("; "));
        let _ = writeln!(out, "# q={:?}", env.qs);
        out.push_str("case,group,property,digest,measured,lo,hi,tol,pass\n");
        for c in &self.cases {
            let _ = writeln!(
                out,
                "{},{},\"{}\",{},{:.12e},{:.12e},{:.12e},{:.3e},{}",
                c.id,
                c.group,
                suites::property(c.group),
                c.digest,
                c.measured,
                c.lo,
                c.hi,
                c.tol,
                c.pass
            );
        }
        out
    }

    pub fn digest(&self) -> String {
        hex(&Sha256::digest(self.to_csv().as_bytes()))
    }
}

/// Frozen two-sided brackets keyed by property and configuration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Brackets {
    /// Seeds of the calibration corpora.
    pub seeds: Vec<u64>,
    pub brackets: BTreeMap<String, [f64; 2]>,
}

impl Brackets {
    /// The brackets shipped with the crate.
    pub fn golden() -> Self {
        Brackets::from_toml(include_str!("../../golden/brackets.toml")).expect("golden brackets parse")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Format(format!("brackets: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("brackets serialize")
    }

    /// `[min, max]` of the measured values per key.
    pub fn from_reports(seeds: Vec<u64>, reports: &[VerificationReport]) -> Self {
        let mut brackets: BTreeMap<String, [f64; 2]> = BTreeMap::new();
        for c in reports.iter().flat_map(|r| &r.cases) {
            let Some(key) = &c.key else { continue };
            if !c.measured.is_finite() {
                continue;
            }
            let e = brackets.entry(key.clone()).or_insert([f64::INFINITY, f64::NEG_INFINITY]);
            e[0] = e[0].min(c.measured);
            e[1] = e[1].max(c.measured);
        }
        Brackets { seeds, brackets }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Compare bracketed cases against frozen brackets.
    Check,
    /// Record bracketed cases without bounds.
    Calibrate,
}

/// Configuration, corpora and brackets shared by the suites.
#[derive(Debug, Clone)]
pub struct Context {
    pub cfg: Config,
    pub corpus_1d: Corpus,
    pub corpus_2d: Corpus,
    pub brackets: Brackets,
    pub mode: Mode,
}

impl Context {
    pub fn new(cfg: Config, brackets: Brackets, mode: Mode) -> Result<Self> {
        cfg.check()?;
        let seed = match mode {
            Mode::Check => cfg.seed,
            Mode::Calibrate => cfg.calibration_seed,
        };
        let reach = cfg.t_max();
        let corpus_1d = generate_corpus(
            seed,
            &CorpusSpec {
                grid: cfg.grid_1d.spec()?,
                counts: cfg.corpus_1d,
                reach,
            },
        )?;
        let corpus_2d = generate_corpus(
            seed,
            &CorpusSpec {
                grid: cfg.grid_2d.spec()?,
                counts: cfg.corpus_2d,
                reach,
            },
        )?;
        Ok(Context {
            cfg,
            corpus_1d,
            corpus_2d,
            brackets,
            mode,
        })
    }

    /// Context with replaced corpora, e.g. empty ones.
    pub fn with_corpora(mut self, corpus_1d: Corpus, corpus_2d: Corpus) -> Self {
        self.corpus_1d = corpus_1d;
        self.corpus_2d = corpus_2d;
        self
    }

    pub fn seed(&self) -> u64 {
        match self.mode {
            Mode::Check => self.cfg.seed,
            Mode::Calibrate => self.cfg.calibration_seed,
        }
    }

    /// A case against the frozen bracket of `key`, widened by the slack. With
    /// `upper_only` the lower end is 0. Unknown keys fail in check mode.
    pub fn bracket_case(&self, id: String, group: &'static str, digest: String, key: String, measured: f64, upper_only: bool) -> Case {
        let (lo, hi) = match self.mode {
            Mode::Calibrate => (0.0, f64::INFINITY),
            Mode::Check => match self.brackets.brackets.get(&key) {
                Some([a, b]) => (if upper_only { 0.0 } else { a / self.cfg.bracket_slack }, b * self.cfg.bracket_slack),
                None => (f64::NAN, f64::NAN),
            },
        };
        let mut c = Case::new(id, group, digest, measured, lo, hi, 0.0);
        if lo.is_nan() {
            c.pass = false;
        }
        c.key = Some(key);
        c
    }
}

/// Runs one registered suite. Failing cases never abort the run.
pub fn run_suite(name: &str, ctx: &Context) -> Result<VerificationReport> {
    let (env, mut cases) = suites::run(name, ctx)?;
    cases.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(VerificationReport {
        suite: name.to_string(),
        environment: env,
        cases,
    })
}

/// Runs every suite on the calibration corpus and freezes the observed brackets.
/// Runs every suite on each calibration corpus and freezes the brackets of
/// their union. Reports are returned for all rounds.
pub fn calibrate(cfg: &Config) -> Result<(Brackets, Vec<VerificationReport>)> {
    cfg.check()?;
    let seeds: Vec<u64> = (0..cfg.calibration_rounds).map(|k| cfg.calibration_seed + k).collect();
    let mut reports = Vec::new();
    for &seed in &seeds {
        let round = Config {
            calibration_seed: seed,
            ..cfg.clone()
        };
        let ctx = Context::new(round, Brackets::default(), Mode::Calibrate)?;
        for s in SUITES {
            reports.push(run_suite(s, &ctx)?);
        }
    }
    Ok((Brackets::from_reports(seeds, &reports), reports))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::{validate_atom, AtomSpec, Sparse};

    fn small_spec(dim: usize) -> CorpusSpec {
        let grid = if dim == 1 {
            GridSpec::new(1, 8.0, 1024).unwrap()
        } else {
            GridSpec::new(2, 4.0, 64).unwrap()
        };
        CorpusSpec {
            grid,
            counts: FamilyCounts::uniform(2),
            reach: 2.0,
        }
    }

    #[test]
    fn corpus_is_deterministic_and_respects_margin() {
        for dim in [1, 2] {
            let spec = small_spec(dim);
            let a = generate_corpus(11, &spec).unwrap();
            let b = generate_corpus(11, &spec).unwrap();
            assert_eq!(a.digest(), b.digest());
            assert_eq!(a.len(), 12);
            for m in &a.members {
                assert!(m.f.boundary_margin() >= 2.0, "{} margin {}", m.id, m.f.boundary_margin());
                assert!(m.f.re().iter().any(|v| *v != 0.0), "{} vanishes", m.id);
            }
            assert_ne!(generate_corpus(12, &spec).unwrap().digest(), a.digest());
        }
    }

    #[test]
    fn zero_count_family_is_omitted() {
        let mut spec = small_spec(1);
        spec.counts.trig = 0;
        let c = generate_corpus(3, &spec).unwrap();
        assert_eq!(c.len(), 10);
        assert!(c.members.iter().all(|m| m.family != Family::Trig));
        // Other families are unchanged by the missing one.
        let full = generate_corpus(3, &small_spec(1)).unwrap();
        let pick = |c: &Corpus, f: Family| -> Vec<Vec<f64>> {
            c.members.iter().filter(|m| m.family == f).map(|m| m.f.re()).collect()
        };
        assert_eq!(pick(&c, Family::Whitney), pick(&full, Family::Whitney));
    }

    #[test]
    fn corpus_atoms_validate() {
        let mut spec = small_spec(1);
        spec.counts = FamilyCounts {
            atoms: 20,
            ..FamilyCounts::uniform(0)
        };
        let c = generate_corpus(5, &spec).unwrap();
        assert_eq!(c.len(), 20);
        for m in &c.members {
            let cube = m.f.support_hint.unwrap();
            let atom = AtomSpec {
                cube,
                r: f64::INFINITY,
                d: 1,
                payload: Sparse::from_dense(&m.f),
            };
            assert!(validate_atom(&atom, &reference_params()).valid(), "{}", m.id);
        }
    }

    #[test]
    fn case_bounds() {
        let c = Case::new("a".into(), "g", String::new(), 1.0 + 5e-10, 0.0, 1.0, 1e-9);
        assert!(c.pass);
        let c = Case::new("a".into(), "g", String::new(), 1.0 + 5e-9, 0.0, 1.0, 1e-9);
        assert!(!c.pass);
        let c = Case::new("a".into(), "g", String::new(), f64::NAN, 0.0, 1.0, 0.0);
        assert!(!c.pass);
        let c = Case::new("a".into(), "g", String::new(), -3.0, f64::NEG_INFINITY, 0.0, 0.0);
        assert!(c.pass);
    }

    #[test]
    fn config_roundtrip_and_partial_override() {
        let cfg = Config::default();
        assert_eq!(Config::from_toml(&cfg.to_toml()).unwrap(), cfg);
        let partial = Config::from_toml("seed = 99\n[corpus_1d]\ntrig = 0\n").unwrap();
        assert_eq!(partial.seed, 99);
        assert_eq!(partial.corpus_1d.trig, 0);
        assert_eq!(partial.corpus_1d.atoms, 2);
        assert!(Config::from_toml("t_sweep = []").is_err());
    }

    #[test]
    fn brackets_roundtrip() {
        let mut b = Brackets::default();
        b.brackets.insert("x/y".into(), [0.5, 2.0]);
        assert_eq!(Brackets::from_toml(&b.to_toml()).unwrap(), b);
        let _ = Brackets::golden();
    }
}
