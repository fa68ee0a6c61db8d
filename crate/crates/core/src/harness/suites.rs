use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{input_digest, random_cube, Case, Context, Corpus, Environment};
use crate::atoms::{
    atomic_decompose, decomposition_functional, hardy_norm_default, synthesize_atom, validate_atom, AtomSpec,
};
use crate::cz::{apply_cz, check_window, far_field_check, CzKernel};
use crate::error::{Error, Result};
use crate::grid::{compensated_sum, unit_ball_volume, Ball, GridFunction, GridSpec, LatticeBall, Region};
use crate::lpaley::{LittlewoodPaley, LpConfig};
use crate::maximal::{
    default_radii, dyadic_scales, grand_radial_maximal, hl_centered, radial_maximal, Extension, MaximalConfig,
    MaximalFamily, TestFunction, fefferman_stein_from,
};
use crate::norms::{
    amalgam_norm, ball_indicator_norm, campanato_norm, conjugate_orlicz, holder_check, lebesgue_norm, local_norms,
    luxemburg_norm, slice_duality_check_with, slice_norm_values, CampanatoParams, SliceParams,
};
use crate::orlicz::{conjugate, log_grid, ConjugateOptions, OrliczFunction};

pub const SUITES: [&str; 13] = [
    "orlicz-basics",
    "norm-identities",
    "embeddings",
    "slice-amalgam",
    "fefferman-stein",
    "maximal-equiv",
    "poisson",
    "square-functions",
    "atoms",
    "decomposition",
    "duality",
    "campanato",
    "cz-bounded",
];

/// `(suite, group, property)` for every case group.
const GROUPS: &[(&str, &str, &str)] = &[
    ("orlicz-basics", "type-constant", "growth obeys its declared lower and upper types with a bounded constant"),
    ("orlicz-basics", "inverse-roundtrip", "the inverse of the Orlicz function is exact to rounding"),
    ("orlicz-basics", "young-bracket", "t <= inverse(phi)(t) * inverse(psi)(t) <= 2t for the Young conjugate psi"),
    ("norm-identities", "indicator-identity", "Luxemburg norm of a ball indicator equals 1/inverse(phi)(1/|B|)"),
    ("norm-identities", "lq-coincidence", "slice norm with phi = power(q) equals the L^q norm"),
    ("embeddings", "embedding-lq", "slice norm of (E_r^q) is at most the L^q norm when r <= q"),
    ("embeddings", "embedding-lr", "slice norm of (E_r^q) is at most the L^r norm when r <= q"),
    ("embeddings", "embedding-lr-scaled", "slice norm of (E_r^q) is at most |B(0,t)|^(1/q-1/r) times the L^r norm when r <= q"),
    ("embeddings", "embedding-reverse", "L^q norm is at most the slice norm of (E_r^q) when q <= r"),
    ("slice-amalgam", "slice-amalgam", "slice norm and scaled amalgam norm agree within a factor 8"),
    ("slice-amalgam", "slice-amalgam-stability", "the slice/amalgam bracket varies by at most 2 across t"),
    ("fefferman-stein", "fs-ratio", "vector-valued maximal inequality ratio stays in its frozen bracket"),
    ("fefferman-stein", "fs-stability", "the vector-valued maximal bracket varies by at most 4 across t"),
    ("maximal-equiv", "maximal-ratio", "slice norms of the five maximal functions are mutually comparable"),
    ("maximal-equiv", "maximal-chain", "radial <= non-tangential and grand radial <= grand pointwise"),
    ("poisson", "poisson-ratio", "Poisson maximal norm is comparable to the Hardy norm"),
    ("square-functions", "cone-bound", "Lusin area function is at most g_lambda^* pointwise"),
    ("square-functions", "cone-bound-scaled", "Lusin area function is at most 2^(lambda n/2) g_lambda^* pointwise"),
    ("square-functions", "square-ratio", "slice norms of g, S and g_lambda^* are comparable to the Hardy norm"),
    ("atoms", "atom-valid", "synthesized atoms satisfy support, size and moment conditions"),
    ("atoms", "atom-hardy", "Hardy norms of atoms are uniformly bounded"),
    ("decomposition", "reconstruction", "the atomic decomposition reconstructs the function in L^2"),
    ("decomposition", "decomposition-atoms", "every emitted atom validates"),
    ("decomposition", "s-functional", "the atomic s-functional is comparable to the Hardy norm"),
    ("duality", "slice-duality", "pairing is bounded by the slice norm times the conjugate slice norm"),
    ("duality", "holder", "integral of |fg| is at most 2 |f|_phi |g|_psi"),
    ("campanato", "atom-campanato", "atom pairings are bounded by the Campanato norm"),
    ("cz-bounded", "cz-slice", "singular integrals map the Hardy space into the slice space"),
    ("cz-bounded", "cz-hardy", "singular integrals are bounded on the Hardy space"),
    ("cz-bounded", "cz-stability", "singular-integral brackets vary by at most 4 across t"),
    ("cz-bounded", "far-field", "the transform of an atom decays like the maximal function of the cube indicator"),
];

/// Case groups of a registered suite.
pub fn suite_groups(name: &str) -> Option<Vec<&'static str>> {
    if !SUITES.contains(&name) {
        return None;
    }
    Some(GROUPS.iter().filter(|g| g.0 == name).map(|g| g.1).collect())
}

pub(super) fn property(group: &str) -> &'static str {
    GROUPS.iter().find(|g| g.1 == group).map(|g| g.2).unwrap_or("")
}

pub(super) fn run(name: &str, ctx: &Context) -> Result<(Environment, Vec<Case>)> {
    let cases = match name {
        "orlicz-basics" => orlicz_basics(ctx),
        "norm-identities" => norm_identities(ctx),
        "embeddings" => embeddings(ctx),
        "slice-amalgam" => slice_amalgam(ctx),
        "fefferman-stein" => fefferman_stein(ctx),
        "maximal-equiv" => maximal_equiv(ctx),
        "poisson" => poisson(ctx),
        "square-functions" => square_functions(ctx),
        "atoms" => atoms(ctx),
        "decomposition" => decomposition(ctx),
        "duality" => duality(ctx),
        "campanato" => campanato(ctx),
        "cz-bounded" => cz_bounded(ctx),
        _ => return Err(Error::UnknownSuite(name.to_string())),
    };
    Ok((environment(name, ctx), cases))
}

fn environment(name: &str, ctx: &Context) -> Environment {
    let (phis, qs): (Vec<OrliczFunction>, Vec<f64>) = match name {
        "orlicz-basics" => (young_phis(), vec![]),
        "norm-identities" | "embeddings" | "slice-amalgam" => (default_phis(), default_qs()),
        "fefferman-stein" | "duality" => (vec![OrliczFunction::power(2.0), OrliczFunction::power(1.5)], vec![2.0, 1.5]),
        "poisson" => (poisson_spaces().into_iter().map(|p| p.0).collect(), vec![0.8, 2.0, 1.0]),
        "maximal-equiv" | "square-functions" => (hardy_spaces().into_iter().map(|p| p.0).collect(), vec![0.8, 2.0]),
        _ => (vec![OrliczFunction::power(0.8)], vec![0.8]),
    };
    let mut grids = vec![ctx.corpus_1d.spec];
    if matches!(name, "norm-identities" | "embeddings" | "slice-amalgam" | "atoms" | "cz-bounded") {
        grids.push(ctx.corpus_2d.spec);
    }
    Environment {
        grids,
        t_sweep: ctx.cfg.t_sweep.clone(),
        phis: phis.iter().map(|p| p.label()).collect(),
        qs,
        seed: ctx.seed(),
    }
}

fn default_phis() -> Vec<OrliczFunction> {
    vec![OrliczFunction::power(0.8), OrliczFunction::power(2.0), OrliczFunction::log_quotient()]
}

fn default_qs() -> Vec<f64> {
    vec![0.8, 1.0, 2.0]
}

fn young_phis() -> Vec<OrliczFunction> {
    vec![
        OrliczFunction::power(2.0),
        OrliczFunction::power(1.5),
        OrliczFunction::power(3.0),
        OrliczFunction::power_log(1.5),
    ]
}

/// `(Φ, q)` pairs for the Hardy-space suites.
fn hardy_spaces() -> Vec<(OrliczFunction, f64)> {
    vec![(OrliczFunction::power(0.8), 0.8), (OrliczFunction::power(2.0), 2.0)]
}

fn poisson_spaces() -> Vec<(OrliczFunction, f64)> {
    let mut v = hardy_spaces();
    v.push((OrliczFunction::log_quotient(), 1.0));
    v
}

fn atom_params(t: f64) -> SliceParams {
    SliceParams::new(t, 0.8, OrliczFunction::power(0.8))
}

fn space_label(phi: &OrliczFunction, q: f64) -> String {
    format!("{},q={q}", phi.label())
}

fn failed(id: String, group: &'static str, digest: String, e: &Error) -> Case {
    let mut c = Case::new(id, group, digest, f64::NAN, f64::NAN, f64::NAN, 0.0);
    c.key = Some(format!("error: {e}"));
    c
}

/// Slice norms for several outer exponents from one pass of local norms.
fn slice_for_qs(spec: &GridSpec, abs: &[f64], t: f64, phi: &OrliczFunction, qs: &[f64]) -> Vec<f64> {
    let den = ball_indicator_norm(phi, spec.dim, t);
    let local = local_norms(spec, abs, t, phi);
    qs.iter()
        .map(|&q| {
            let s = compensated_sum(local.iter().map(|&v| if v > 0.0 { (v / den).powf(q) } else { 0.0 }));
            (s * spec.cell()).powf(1.0 / q)
        })
        .collect()
}

fn sup_excess(a: &[f64], b: &[f64], c: f64) -> f64 {
    a.iter().zip(b).fold(f64::NEG_INFINITY, |m, (x, y)| m.max(x - c * y))
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// `max_t hi_t / min_t hi_t` and the same for the lower ends, per key.
fn stability(obs: &[(String, f64, f64)], group: &'static str, bound: f64, ctx: &Context) -> Vec<Case> {
    let mut per: BTreeMap<&str, BTreeMap<u64, (f64, f64)>> = BTreeMap::new();
    for (key, t, v) in obs {
        if !(v.is_finite() && *v > 0.0) {
            continue;
        }
        let e = per
            .entry(key.as_str())
            .or_default()
            .entry(t.to_bits())
            .or_insert((f64::INFINITY, 0.0));
        e.0 = e.0.min(*v);
        e.1 = e.1.max(*v);
    }
    per.into_iter()
        .map(|(key, by_t)| {
            let spread = |pick: fn(&(f64, f64)) -> f64| {
                let vals: Vec<f64> = by_t.values().map(pick).collect();
                vals.iter().fold(0.0f64, |m, v| m.max(*v)) / vals.iter().fold(f64::INFINITY, |m, v| m.min(*v))
            };
            let measured = spread(|e| e.0).max(spread(|e| e.1));
            let mut c = Case::new(format!("{group}/{key}"), group, input_digest(&[], key), measured, 1.0, bound, 0.0);
            if by_t.len() < ctx.cfg.t_sweep.len() {
                c.pass = false;
            }
            c
        })
        .collect()
}

fn orlicz_basics(ctx: &Context) -> Vec<Case> {
    let mut cases = Vec::new();
    let s_lo = log_grid(1e-4, 0.99, 40);
    let s_hi = log_grid(1.01, 1e4, 40);
    let taus = log_grid(1e-6, 1e6, 61);
    for phi in [
        OrliczFunction::power(0.8),
        OrliczFunction::power(2.0),
        OrliczFunction::log_quotient(),
        OrliczFunction::power_log(1.5),
    ] {
        let label = phi.label();
        for (side, ss, p) in [("lower", &s_lo, phi.p_minus), ("upper", &s_hi, phi.p_plus)] {
            let mut c: f64 = 0.0;
            for &s in ss.iter() {
                for &tau in &taus {
                    c = c.max(phi.eval_ext(s * tau) / (s.powf(p) * phi.eval_ext(tau)));
                }
            }
            cases.push(ctx.bracket_case(
                format!("type-constant/{label}/{side}"),
                "type-constant",
                input_digest(&[], &label),
                format!("type-constant/{label}/{side}"),
                c,
                true,
            ));
        }
        let err = taus
            .iter()
            .map(|&y| (phi.eval_ext(phi.inverse_ext(y)) / y - 1.0).abs())
            .fold(0.0f64, f64::max);
        cases.push(Case::new(
            format!("inverse-roundtrip/{label}"),
            "inverse-roundtrip",
            input_digest(&[], &label),
            err,
            0.0,
            1e-9,
            0.0,
        ));
    }
    for phi in young_phis() {
        let label = phi.label();
        let conj = match conjugate(&phi, &[], ConjugateOptions::default()) {
            Ok(c) => c,
            Err(e) => {
                cases.push(failed(format!("young-bracket/{label}"), "young-bracket", String::new(), &e));
                continue;
            }
        };
        for (k, t) in log_grid(1e-3, 1e3, 100).into_iter().enumerate() {
            let ratio = phi.inverse_ext(t) * conj.inverse(t) / t;
            cases.push(Case::new(
                format!("young-bracket/{label}/{k:03}"),
                "young-bracket",
                input_digest(&[], &format!("{label} {t:e}")),
                ratio,
                1.0,
                2.0,
                1e-9,
            ));
        }
    }
    cases
}

fn norm_identities(ctx: &Context) -> Vec<Case> {
    let mut cases = Vec::new();
    let spec1 = ctx.corpus_1d.spec;
    let spec2 = ctx.corpus_2d.spec;
    // Random sub-cell centres make the lattice count of a ball an unbiased estimate of its volume.
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed());
    let offsets: Vec<[f64; 2]> = (0..16)
        .map(|_| [rng.random_range(0.0..spec2.h()), rng.random_range(0.0..spec2.h())])
        .collect();
    for phi in default_phis() {
        for &t in &ctx.cfg.t_sweep {
            let want1 = ball_indicator_norm(&phi, 1, t);
            let chi = GridFunction::indicator(spec1, Region::Ball(Ball::new([0.5 * spec1.h(), 0.0], t)));
            let got = luxemburg_norm(&chi, &phi, Region::All);
            cases.push(Case::new(
                format!("indicator-identity/1d/{}/t={t}", phi.label()),
                "indicator-identity",
                input_digest(&[&chi], &phi.label()),
                ((got - want1) / want1).abs(),
                0.0,
                0.01,
                0.0,
            ));
            let want2 = ball_indicator_norm(&phi, 2, t);
            let got: f64 = offsets
                .par_iter()
                .map(|o| {
                    let chi = GridFunction::indicator(spec2, Region::Ball(Ball::new(*o, t)));
                    luxemburg_norm(&chi, &phi, Region::All)
                })
                .sum::<f64>()
                / offsets.len() as f64;
            cases.push(Case::new(
                format!("indicator-identity/2d/{}/t={t}", phi.label()),
                "indicator-identity",
                input_digest(&[], &format!("{} {t} {offsets:?}", phi.label())),
                ((got - want2) / want2).abs(),
                0.0,
                0.02,
                0.0,
            ));
        }
    }
    let t_sweep = &ctx.cfg.t_sweep;
    let lq: Vec<Vec<Case>> = ctx
        .corpus_1d
        .members
        .par_iter()
        .map(|m| {
            let abs = m.f.abs();
            let mut out = Vec::new();
            for q in default_qs() {
                let phi = OrliczFunction::power(q);
                let norm = lebesgue_norm(&m.f, q);
                for &t in t_sweep {
                    let sl = slice_for_qs(&m.f.spec, &abs, t, &phi, &[q])[0];
                    out.push(Case::new(
                        format!("lq-coincidence/{}/q={q}/t={t}", m.id),
                        "lq-coincidence",
                        input_digest(&[&m.f], &format!("{q} {t}")),
                        ((sl - norm) / norm).abs(),
                        0.0,
                        0.02,
                        0.0,
                    ));
                }
            }
            out
        })
        .collect();
    cases.extend(lq.into_iter().flatten());
    cases
}

fn embeddings(ctx: &Context) -> Vec<Case> {
    let exps = default_qs();
    let t_sweep = &ctx.cfg.t_sweep;
    let run = |corpus: &Corpus| -> Vec<Case> {
        let spec = corpus.spec;
        let dim = spec.dim;
        let nested: Vec<Vec<Case>> = corpus
            .members
            .par_iter()
            .map(|m| {
                let abs = m.f.abs();
                let mut out = Vec::new();
                for &t in t_sweep {
                    let ball = LatticeBall::new(dim, t / spec.h());
                    let volume = unit_ball_volume(dim) * t.powi(dim as i32);
                    let kappa = ball.count as f64 * spec.cell() / volume;
                    for &r in &exps {
                        let slices = slice_for_qs(&spec, &abs, t, &OrliczFunction::power(r), &exps);
                        let nr = lebesgue_norm(&m.f, r);
                        for (&q, &sl) in exps.iter().zip(&slices) {
                            let nq = lebesgue_norm(&m.f, q);
                            let id = |g: &str| format!("{g}/{}/r={r}/q={q}/t={t}", m.id);
                            let digest = input_digest(&[&m.f], &format!("{r} {q} {t}"));
                            if r <= q {
                                let budget = 1e-6 + (kappa.powf(1.0 / r) - 1.0).max(0.0);
                                out.push(Case::new(id("embedding-lq"), "embedding-lq", digest.clone(), sl / nq, 0.0, 1.0, budget));
                                let budget = 1e-6 + (kappa.powf(1.0 / q) - 1.0).max(0.0);
                                out.push(Case::new(id("embedding-lr"), "embedding-lr", digest.clone(), sl / nr, 0.0, 1.0, budget));
                                let scale = volume.powf(1.0 / q - 1.0 / r);
                                out.push(Case::new(
                                    id("embedding-lr-scaled"),
                                    "embedding-lr-scaled",
                                    digest.clone(),
                                    sl / (scale * nr),
                                    0.0,
                                    1.0,
                                    budget,
                                ));
                            }
                            if q <= r {
                                let budget = 1e-6 + (kappa.powf(-1.0 / r) - 1.0).max(0.0);
                                out.push(Case::new(id("embedding-reverse"), "embedding-reverse", digest, nq / sl, 0.0, 1.0, budget));
                            }
                        }
                    }
                }
                out
            })
            .collect();
        nested.into_iter().flatten().collect()
    };
    let mut cases = run(&ctx.corpus_1d);
    cases.extend(run(&ctx.corpus_2d));
    cases
}

fn slice_amalgam(ctx: &Context) -> Vec<Case> {
    let qs = default_qs();
    let t_sweep = &ctx.cfg.t_sweep;
    let run = |corpus: &Corpus, phis: Vec<OrliczFunction>| -> Vec<(Case, String, f64)> {
        let spec = corpus.spec;
        let dim = spec.dim;
        let nested: Vec<Vec<(Case, String, f64)>> = corpus
            .members
            .par_iter()
            .map(|m| {
                let abs = m.f.abs();
                let mut out = Vec::new();
                for phi in &phis {
                    for &t in t_sweep {
                        let slices = slice_for_qs(&spec, &abs, t, phi, &qs);
                        let den = ball_indicator_norm(phi, dim, t);
                        for (&q, &sl) in qs.iter().zip(&slices) {
                            let id = format!("slice-amalgam/{}/{}/t={t}", m.id, space_label(phi, q));
                            let digest = input_digest(&[&m.f], &format!("{} {q} {t}", phi.label()));
                            let key = format!("{dim}d/{}", space_label(phi, q));
                            match amalgam_norm(&m.f, t, q, phi) {
                                Ok(am) => {
                                    let ratio = sl / (t.powf(dim as f64 / q) * am / den);
                                    out.push((Case::new(id, "slice-amalgam", digest, ratio, 0.125, 8.0, 0.0), key, t));
                                }
                                Err(e) => out.push((failed(id, "slice-amalgam", digest, &e), key, t)),
                            }
                        }
                    }
                }
                out
            })
            .collect();
        nested.into_iter().flatten().collect()
    };
    let mut rows = run(&ctx.corpus_1d, default_phis());
    rows.extend(run(&ctx.corpus_2d, vec![OrliczFunction::power(0.8), OrliczFunction::power(2.0)]));
    let obs: Vec<(String, f64, f64)> = rows.iter().map(|(c, k, t)| (k.clone(), *t, c.measured)).collect();
    let mut cases: Vec<Case> = rows.into_iter().map(|r| r.0).collect();
    cases.extend(stability(&obs, "slice-amalgam-stability", 2.0, ctx));
    cases
}

fn fefferman_stein(ctx: &Context) -> Vec<Case> {
    let corpus = &ctx.corpus_1d;
    if corpus.is_empty() {
        return Vec::new();
    }
    let radii = default_radii(&corpus.spec);
    let maxed: Vec<GridFunction> = corpus.members.par_iter().map(|m| hl_centered(&m.f, &radii)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed());
    rng.set_stream(101);
    let families: Vec<(Vec<GridFunction>, Vec<GridFunction>, String)> = (0..ctx.cfg.fs_families)
        .map(|_| {
            let mut fs = Vec::new();
            let mut ms = Vec::new();
            let mut ids = Vec::new();
            for _ in 0..ctx.cfg.fs_family_size {
                let i = rng.random_range(0..corpus.len());
                let a = rng.random_range(0.5..=2.0);
                fs.push(corpus.members[i].f.scale(a));
                ms.push(maxed[i].scale(a));
                ids.push(format!("{}*{a:.4}", corpus.members[i].id));
            }
            (fs, ms, ids.join("+"))
        })
        .collect();
    let spaces = [(OrliczFunction::power(2.0), 2.0), (OrliczFunction::power(1.5), 1.5)];
    let mut rows = Vec::new();
    for (k, (fs, ms, ids)) in families.iter().enumerate() {
        let refs: Vec<&GridFunction> = fs.iter().collect();
        for (phi, q) in &spaces {
            for &t in &ctx.cfg.t_sweep {
                let params = SliceParams::new(t, *q, phi.clone());
                let id = format!("fs-ratio/family-{k:02}/{}/t={t}", space_label(phi, *q));
                let digest = input_digest(&refs, &format!("{ids} {} {t}", space_label(phi, *q)));
                let key = format!("fs-ratio/{}", space_label(phi, *q));
                let case = match fefferman_stein_from(fs, ms, 2.0, &params) {
                    Ok(r) => ctx.bracket_case(id, "fs-ratio", digest, key.clone(), r.ratio, false),
                    Err(e) => failed(id, "fs-ratio", digest, &e),
                };
                rows.push((case, key, t));
            }
        }
    }
    let obs: Vec<(String, f64, f64)> = rows.iter().map(|(c, k, t)| (k.clone(), *t, c.measured)).collect();
    let mut cases: Vec<Case> = rows.into_iter().map(|r| r.0).collect();
    cases.extend(stability(&obs, "fs-stability", 4.0, ctx));
    cases
}

fn maximal_equiv(ctx: &Context) -> Vec<Case> {
    let corpus = &ctx.corpus_1d;
    let spec = corpus.spec;
    let cfg = MaximalConfig::for_space(&spec, &atom_params(1.0));
    let phi0 = TestFunction::unit_gaussian(spec.dim);
    let labels = MaximalFamily::labels();
    let nested: Vec<Vec<Case>> = corpus
        .members
        .par_iter()
        .map(|m| {
            let digest = input_digest(&[&m.f], "maximal");
            let fam = match MaximalFamily::compute(&m.f, &phi0, &cfg) {
                Ok(f) => f,
                Err(e) => return vec![failed(format!("maximal-ratio/{}", m.id), "maximal-ratio", digest, &e)],
            };
            let mut out = Vec::new();
            let radial = fam.radial.re();
            let nt = fam.nontangential.re();
            let scale = sup(&nt).max(f64::MIN_POSITIVE);
            out.push(Case::new(
                format!("maximal-chain/{}/radial<=nontangential", m.id),
                "maximal-chain",
                digest.clone(),
                sup_excess(&radial, &nt, 1.0) / scale,
                f64::NEG_INFINITY,
                0.0,
                0.0,
            ));
            let grand_radial = grand_radial_maximal(&m.f, &cfg).re();
            let grand = fam.grand.re();
            out.push(Case::new(
                format!("maximal-chain/{}/grand-radial<=grand", m.id),
                "maximal-chain",
                digest.clone(),
                sup_excess(&grand_radial, &grand, 1.0) / sup(&grand).max(f64::MIN_POSITIVE),
                f64::NEG_INFINITY,
                0.0,
                0.0,
            ));
            for (phi, q) in hardy_spaces() {
                for &t in &ctx.cfg.t_sweep {
                    let norms = fam.slice_norms(&SliceParams::new(t, q, phi.clone()));
                    for i in 0..5 {
                        for j in i + 1..5 {
                            let pair = format!("{}:{}", labels[i], labels[j]);
                            out.push(ctx.bracket_case(
                                format!("maximal-ratio/{}/{pair}/{}/t={t}", m.id, space_label(&phi, q)),
                                "maximal-ratio",
                                digest.clone(),
                                format!("maximal-ratio/{pair}/{}", space_label(&phi, q)),
                                norms[i] / norms[j],
                                false,
                            ));
                        }
                    }
                }
            }
            out
        })
        .collect();
    nested.into_iter().flatten().collect()
}

/// `M(f, φ)` with the unit Gaussian over dyadic scales.
fn radial(f: &GridFunction) -> Result<Vec<f64>> {
    Ok(radial_maximal(f, &TestFunction::unit_gaussian(f.spec.dim), &dyadic_scales(&f.spec), Extension::Zero)?.re())
}

fn poisson(ctx: &Context) -> Vec<Case> {
    let corpus = &ctx.corpus_1d;
    let spec = corpus.spec;
    let nested: Vec<Vec<Case>> = corpus
        .members
        .par_iter()
        .map(|m| {
            let digest = input_digest(&[&m.f], "poisson");
            let pm = crate::lpaley::poisson_maximal(&m.f, &dyadic_scales(&spec)).abs();
            let mf = match radial(&m.f) {
                Ok(v) => v,
                Err(e) => return vec![failed(format!("poisson-ratio/{}", m.id), "poisson-ratio", digest, &e)],
            };
            let mut out = Vec::new();
            for (phi, q) in poisson_spaces() {
                for &t in &ctx.cfg.t_sweep {
                    let p = SliceParams::new(t, q, phi.clone()).truncated();
                    let ratio = slice_norm_values(&spec, &pm, &p) / slice_norm_values(&spec, &mf, &p);
                    out.push(ctx.bracket_case(
                        format!("poisson-ratio/{}/{}/t={t}", m.id, space_label(&phi, q)),
                        "poisson-ratio",
                        digest.clone(),
                        format!("poisson-ratio/{}", space_label(&phi, q)),
                        ratio,
                        false,
                    ));
                }
            }
            out
        })
        .collect();
    nested.into_iter().flatten().collect()
}

fn square_functions(ctx: &Context) -> Vec<Case> {
    let corpus = &ctx.corpus_1d;
    let spec = corpus.spec;
    let dim = spec.dim;
    let mut cases = Vec::new();
    for (phi, q) in hardy_spaces() {
        let space = space_label(&phi, q);
        let lambda = LpConfig::default_lambda(phi.p_minus.min(q));
        let lp = match LpConfig::new(&spec, lambda, 4).and_then(|c| LittlewoodPaley::new(&spec, c)) {
            Ok(lp) => lp,
            Err(e) => {
                cases.push(failed(format!("square-ratio/{space}"), "square-ratio", String::new(), &e));
                continue;
            }
        };
        let scaled = 2f64.powf(lambda * dim as f64 / 2.0);
        let nested: Vec<Vec<Case>> = corpus
            .members
            .par_iter()
            .map(|m| {
                let digest = input_digest(&[&m.f], &format!("square {lambda}"));
                let sq = lp.all(&m.f);
                let (s, gs) = (sq.s.re(), sq.gstar.re());
                let smax = sup(&s).max(f64::MIN_POSITIVE);
                let mut out = vec![
                    Case::new(
                        format!("cone-bound/{}/lambda={lambda}", m.id),
                        "cone-bound",
                        digest.clone(),
                        sup_excess(&s, &gs, 1.0) / smax,
                        f64::NEG_INFINITY,
                        0.0,
                        0.0,
                    ),
                    Case::new(
                        format!("cone-bound-scaled/{}/lambda={lambda}", m.id),
                        "cone-bound-scaled",
                        digest.clone(),
                        sup_excess(&s, &gs, scaled) / smax,
                        f64::NEG_INFINITY,
                        1e-9,
                        0.0,
                    ),
                ];
                let mf = match radial(&m.f) {
                    Ok(v) => v,
                    Err(e) => {
                        out.push(failed(format!("square-ratio/{}/{space}", m.id), "square-ratio", digest, &e));
                        return out;
                    }
                };
                let g = sq.g.re();
                for &t in &ctx.cfg.t_sweep {
                    let p = SliceParams::new(t, q, phi.clone()).truncated();
                    let hardy = slice_norm_values(&spec, &mf, &p);
                    for (name, v) in [("g", &g), ("S", &s), ("gstar", &gs)] {
                        out.push(ctx.bracket_case(
                            format!("square-ratio/{}/{name}/{space}/t={t}", m.id),
                            "square-ratio",
                            digest.clone(),
                            format!("square-ratio/{name}/{space}"),
                            slice_norm_values(&spec, v, &p) / hardy,
                            false,
                        ));
                    }
                }
                out
            })
            .collect();
        cases.extend(nested.into_iter().flatten());
    }
    cases
}

/// Random `(r, d)` atoms on grid-aligned cubes inside the usable region, one
/// slice height per atom cycling through the sweep.
fn random_atoms(ctx: &Context, spec: &GridSpec, count: usize, stream: u64, fixed: Option<(f64, usize)>) -> Vec<(f64, Result<AtomSpec>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed());
    rng.set_stream(stream);
    let usable = spec.half_width - ctx.cfg.t_max() - 4.0 * spec.h();
    let sides: &[f64] = if spec.dim == 1 { &[0.125, 0.25, 0.5, 1.0] } else { &[0.25, 0.5] };
    (0..count)
        .map(|k| {
            let t = ctx.cfg.t_sweep[k % ctx.cfg.t_sweep.len()];
            let (r, d) = fixed.unwrap_or(([2.0, f64::INFINITY][k % 2], k % 3));
            let side = sides[rng.random_range(0..sides.len())];
            let cube = random_cube(spec, side, 1.0, usable, &mut rng);
            let seed = rng.random();
            (t, synthesize_atom(spec, &cube, r, d, &atom_params(t), seed))
        })
        .collect()
}

fn atoms(ctx: &Context) -> Vec<Case> {
    let mut cases = Vec::new();
    for (spec, count) in [(ctx.corpus_1d.spec, ctx.cfg.atoms_1d), (ctx.corpus_2d.spec, ctx.cfg.atoms_2d)] {
        let dim = spec.dim;
        let list = random_atoms(ctx, &spec, count, 200 + dim as u64, None);
        let nested: Vec<Vec<Case>> = list
            .par_iter()
            .enumerate()
            .map(|(k, (t, atom))| {
                let id = |g: &str| format!("{g}/{dim}d/atom-{k:03}");
                let atom = match atom {
                    Ok(a) => a,
                    Err(e) => return vec![failed(id("atom-valid"), "atom-valid", String::new(), e)],
                };
                let dense = atom.payload.to_dense();
                let digest = input_digest(&[&dense], &format!("{t} {} {}", atom.r, atom.d));
                let params = atom_params(*t);
                let ok = validate_atom(atom, &params).valid();
                let mut out = vec![Case::new(id("atom-valid"), "atom-valid", digest.clone(), ok as u8 as f64, 1.0, 1.0, 0.0)];
                out.push(match hardy_norm_default(&dense, &params.clone().truncated()) {
                    Ok(h) => ctx.bracket_case(id("atom-hardy"), "atom-hardy", digest, format!("atom-hardy/{dim}d"), h, true),
                    Err(e) => failed(id("atom-hardy"), "atom-hardy", digest, &e),
                });
                out
            })
            .collect();
        cases.extend(nested.into_iter().flatten());
    }
    cases
}

fn decomposition(ctx: &Context) -> Vec<Case> {
    let corpus = &ctx.corpus_1d;
    let spec = corpus.spec;
    let cfg = MaximalConfig::for_space(&spec, &atom_params(1.0));
    let (s, d) = (0.7, 1);
    let nested: Vec<Vec<Case>> = corpus
        .members
        .par_iter()
        .map(|m| {
            let mut out = Vec::new();
            let norm = lebesgue_norm(&m.f, 2.0);
            for &t in &ctx.cfg.t_sweep {
                let params = atom_params(t);
                let digest = input_digest(&[&m.f], &format!("decompose {t} {s} {d}"));
                let id = |g: &str| format!("{g}/{}/t={t}", m.id);
                let dec = match atomic_decompose(&m.f, &params, &cfg, s, d) {
                    Ok(dec) => dec,
                    Err(e) => {
                        out.push(failed(id("reconstruction"), "reconstruction", digest, &e));
                        continue;
                    }
                };
                let err = lebesgue_norm(&dec.reconstruct().add(&m.f.scale(-1.0)), 2.0) / norm;
                out.push(Case::new(id("reconstruction"), "reconstruction", digest.clone(), err, 0.0, 1e-2, 0.0));
                let invalid = dec.terms.iter().filter(|term| !validate_atom(&term.atom, &params).valid()).count();
                out.push(Case::new(
                    id("decomposition-atoms"),
                    "decomposition-atoms",
                    digest.clone(),
                    invalid as f64,
                    0.0,
                    0.0,
                    0.0,
                ));
                out.push(match hardy_norm_default(&m.f, &params.clone().truncated()) {
                    Ok(h) => ctx.bracket_case(
                        id("s-functional"),
                        "s-functional",
                        digest,
                        format!("s-functional/s={s}"),
                        decomposition_functional(&dec, &params) / h,
                        false,
                    ),
                    Err(e) => failed(id("s-functional"), "s-functional", digest, &e),
                });
            }
            out
        })
        .collect();
    nested.into_iter().flatten().collect()
}

fn duality(ctx: &Context) -> Vec<Case> {
    let corpus = &ctx.corpus_1d;
    let mut cases = Vec::new();
    if corpus.len() >= 2 {
        for phi in [OrliczFunction::power(2.0), OrliczFunction::power(1.5)] {
            let q = 2.0;
            let space = space_label(&phi, q);
            let psi = match conjugate_orlicz(&phi) {
                Ok(p) => p,
                Err(e) => {
                    cases.push(failed(format!("slice-duality/{space}"), "slice-duality", String::new(), &e));
                    continue;
                }
            };
            let nested: Vec<Vec<Case>> = (0..corpus.len())
                .into_par_iter()
                .map(|i| {
                    let f = &corpus.members[i];
                    let g = &corpus.members[(i + 1) % corpus.len()];
                    ctx.cfg
                        .t_sweep
                        .iter()
                        .map(|&t| {
                            let id = format!("slice-duality/{}:{}/{space}/t={t}", f.id, g.id);
                            let digest = input_digest(&[&f.f, &g.f], &format!("{space} {t}"));
                            match slice_duality_check_with(&f.f, &g.f, &SliceParams::new(t, q, phi.clone()), &psi) {
                                Ok(v) => ctx.bracket_case(id, "slice-duality", digest, format!("slice-duality/{space}"), v, true),
                                Err(e) => failed(id, "slice-duality", digest, &e),
                            }
                        })
                        .collect()
                })
                .collect();
            cases.extend(nested.into_iter().flatten());
        }
    }
    if corpus.is_empty() {
        return cases;
    }
    let phis = young_phis();
    let psis: Vec<Result<OrliczFunction>> = phis.iter().map(conjugate_orlicz).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed());
    rng.set_stream(300);
    for k in 0..ctx.cfg.holder_pairs {
        let i = rng.random_range(0..corpus.len());
        let j = rng.random_range(0..corpus.len());
        let a = rng.random_range(0.1..=10.0);
        let which = k % phis.len();
        let f = corpus.members[i].f.scale(a);
        let g = &corpus.members[j].f;
        let id = format!("holder/pair-{k:03}/{}", phis[which].label());
        let digest = input_digest(&[&f, g], &phis[which].label());
        cases.push(match &psis[which] {
            Ok(psi) => Case::new(id, "holder", digest, holder_check(&f, g, &phis[which], psi), 0.0, 1.0, 1e-6),
            Err(e) => failed(id, "holder", digest, e),
        });
    }
    cases
}

fn campanato(ctx: &Context) -> Vec<Case> {
    let corpus = &ctx.corpus_1d;
    let spec = corpus.spec;
    let dim = spec.dim;
    let mut cases = Vec::new();
    for (ti, &t) in ctx.cfg.t_sweep.iter().enumerate() {
        let params = atom_params(t);
        let list: Vec<AtomSpec> = random_atoms(ctx, &spec, 10, 400 + ti as u64, Some((2.0, 1)))
            .into_iter()
            .filter_map(|(_, a)| a.ok())
            .collect();
        let balls: Vec<Ball> = list
            .iter()
            .map(|a| Ball::new(a.cube.center, 0.5 * a.cube.side * (dim as f64).sqrt() * (1.0 + 1e-9)))
            .collect();
        let cp = CampanatoParams { rprime: 2.0, d: 1, balls };
        let nested: Vec<Vec<Case>> = corpus
            .members
            .par_iter()
            .map(|m| {
                let digest = input_digest(&[&m.f], &format!("campanato {t}"));
                let norm = match campanato_norm(&m.f, &cp, &params) {
                    Ok(v) => v.value,
                    Err(e) => return vec![failed(format!("atom-campanato/{}/t={t}", m.id), "atom-campanato", digest, &e)],
                };
                let g = m.f.re();
                list.iter()
                    .enumerate()
                    .filter(|_| norm > 0.0)
                    .map(|(k, a)| {
                        let pairing = a.payload.idx.iter().zip(&a.payload.val).map(|(&i, v)| v * g[i]).sum::<f64>() * spec.cell();
                        ctx.bracket_case(
                            format!("atom-campanato/{}/atom-{k:02}/t={t}", m.id),
                            "atom-campanato",
                            digest.clone(),
                            format!("atom-campanato/{dim}d"),
                            pairing.abs() / norm,
                            true,
                        )
                    })
                    .collect()
            })
            .collect();
        cases.extend(nested.into_iter().flatten());
    }
    cases
}

fn cz_bounded(ctx: &Context) -> Vec<Case> {
    let mut rows: Vec<(Case, String, f64)> = Vec::new();
    let mut cases = Vec::new();
    for (spec, count) in [(ctx.corpus_1d.spec, ctx.cfg.atoms_1d), (ctx.corpus_2d.spec, ctx.cfg.atoms_2d)] {
        let dim = spec.dim;
        let name = if dim == 1 { "hilbert" } else { "riesz" };
        for &t in &ctx.cfg.t_sweep {
            if let Err(e) = check_window(dim, 1.0, &atom_params(t)) {
                cases.push(failed(format!("cz-slice/{name}/t={t}"), "cz-slice", String::new(), &e));
            }
        }
        let list = random_atoms(ctx, &spec, count, 500 + dim as u64, Some((f64::INFINITY, 1)));
        let nested: Vec<(Vec<(Case, String, f64)>, Vec<Case>)> = list
            .par_iter()
            .enumerate()
            .map(|(k, (_, atom))| {
                let kernel = if dim == 1 { CzKernel::hilbert(&spec) } else { CzKernel::riesz(k % 2, &spec) };
                let id = |g: &str| format!("{g}/{name}/atom-{k:03}");
                let atom = match atom {
                    Ok(a) => a,
                    Err(e) => return (Vec::new(), vec![failed(id("cz-slice"), "cz-slice", String::new(), e)]),
                };
                let a = atom.payload.to_dense();
                let digest = input_digest(&[&a], &kernel.label());
                let computed = apply_cz(&kernel, &a).and_then(|ta| Ok((radial(&a)?, radial(&ta)?, ta.abs())));
                let (ma, mta, ta) = match computed {
                    Ok(v) => v,
                    Err(e) => return (Vec::new(), vec![failed(id("cz-slice"), "cz-slice", digest, &e)]),
                };
                let mut rows = Vec::new();
                for &t in &ctx.cfg.t_sweep {
                    let p = atom_params(t).truncated();
                    let hf = slice_norm_values(&spec, &ma, &p);
                    for (group, v) in [("cz-slice", &ta), ("cz-hardy", &mta)] {
                        let key = format!("{group}/{name}");
                        rows.push((
                            ctx.bracket_case(
                                format!("{}/t={t}", id(group)),
                                group,
                                digest.clone(),
                                key.clone(),
                                slice_norm_values(&spec, v, &p) / hf,
                                false,
                            ),
                            key,
                            t,
                        ));
                    }
                }
                let far = match far_field_check(&kernel, atom, &atom_params(1.0), ctx.cfg.far_field_probes) {
                    Ok(ff) => vec![
                        Case::new(
                            id("far-field/probes"),
                            "far-field",
                            digest.clone(),
                            ff.probes as f64,
                            ctx.cfg.far_field_probes as f64,
                            f64::INFINITY,
                            0.0,
                        ),
                        ctx.bracket_case(
                            id("far-field/maximal"),
                            "far-field",
                            digest.clone(),
                            format!("far-field/maximal/{name}"),
                            ff.maximal_constant,
                            true,
                        ),
                        ctx.bracket_case(
                            id("far-field/decay"),
                            "far-field",
                            digest,
                            format!("far-field/decay/{name}"),
                            ff.decay_constant,
                            true,
                        ),
                    ],
                    Err(e) => vec![failed(id("far-field"), "far-field", digest, &e)],
                };
                (rows, far)
            })
            .collect();
        for (r, c) in nested {
            rows.extend(r);
            cases.extend(c);
        }
    }
    let obs: Vec<(String, f64, f64)> = rows.iter().map(|(c, k, t)| (k.clone(), *t, c.measured)).collect();
    cases.extend(rows.into_iter().map(|r| r.0));
    cases.extend(stability(&obs, "cz-stability", 4.0, ctx));
    cases
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{Brackets, Config, Mode};

    fn empty(dim: usize) -> Corpus {
        let spec = if dim == 1 { GridSpec::new(1, 8.0, 64).unwrap() } else { GridSpec::new(2, 4.0, 16).unwrap() };
        Corpus { seed: 0, spec, members: Vec::new() }
    }

    #[test]
    fn every_suite_has_described_groups() {
        for s in SUITES {
            let groups = suite_groups(s).unwrap();
            assert!(!groups.is_empty(), "{s}");
            for g in groups {
                assert!(!property(g).is_empty());
            }
        }
        assert!(suite_groups("nope").is_none());
        let mut names: Vec<&str> = GROUPS.iter().map(|g| g.1).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), GROUPS.len());
    }

    #[test]
    fn orlicz_basics_pass() {
        let ctx = Context::new(Config::default(), Brackets::default(), Mode::Calibrate)
            .unwrap()
            .with_corpora(empty(1), empty(2));
        let cases = orlicz_basics(&ctx);
        for c in &cases {
            assert!(c.pass, "{c:?}");
        }
        assert_eq!(cases.iter().filter(|c| c.group == "young-bracket").count(), 400);
    }
}
