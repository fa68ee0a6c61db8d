use oslab::harness::{
    run_suite, suite_groups, Brackets, Config, Context, Corpus, FamilyCounts, GridConfig, Mode, SUITES,
};
use oslab::Error;

fn small_config() -> Config {
    Config {
        grid_1d: GridConfig {
            dim: 1,
            half_width: 8.0,
            n: 1024,
        },
        grid_2d: GridConfig {
            dim: 2,
            half_width: 4.0,
            n: 64,
        },
        corpus_1d: FamilyCounts::uniform(1),
        corpus_2d: FamilyCounts::uniform(1),
        atoms_1d: 4,
        atoms_2d: 2,
        holder_pairs: 5,
        fs_families: 2,
        fs_family_size: 3,
        far_field_probes: 8,
        ..Config::default()
    }
}

fn empty(ctx: &Context) -> Context {
    let none = |c: &Corpus| Corpus {
        seed: c.seed,
        spec: c.spec,
        members: Vec::new(),
    };
    ctx.clone().with_corpora(none(&ctx.corpus_1d), none(&ctx.corpus_2d))
}

#[test]
fn reports_are_byte_stable() {
    let ctx = Context::new(small_config(), Brackets::default(), Mode::Calibrate).unwrap();
    let a = run_suite("embeddings", &ctx).unwrap();
    let b = run_suite("embeddings", &ctx).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(a.digest(), b.digest());
    let again = Context::new(small_config(), Brackets::default(), Mode::Calibrate).unwrap();
    assert_eq!(run_suite("embeddings", &again).unwrap().digest(), a.digest());
    let ids: Vec<&str> = a.cases.iter().map(|c| c.id.as_str()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(ids, sorted, "case ids are unique and ordered");
}

#[test]
fn unknown_suite_is_rejected() {
    let ctx = Context::new(small_config(), Brackets::default(), Mode::Calibrate).unwrap();
    assert!(matches!(run_suite("no-such-suite", &ctx), Err(Error::UnknownSuite(_))));
    assert!(suite_groups("no-such-suite").is_none());
}

#[test]
fn empty_corpus_gives_empty_passing_reports() {
    let ctx = empty(&Context::new(small_config(), Brackets::default(), Mode::Check).unwrap());
    for suite in ["embeddings", "slice-amalgam", "fefferman-stein", "poisson", "decomposition", "duality"] {
        let r = run_suite(suite, &ctx).unwrap();
        assert!(r.cases.is_empty(), "{suite}: {} cases", r.cases.len());
        assert!(r.passed());
        assert_eq!(r.summary(), format!("SUITE {suite} PASS cases=0 failures=0"));
    }
}

#[test]
fn calibrated_brackets_admit_their_own_corpus() {
    let cfg = small_config();
    let cal = Context::new(cfg.clone(), Brackets::default(), Mode::Calibrate).unwrap();
    let report = run_suite("poisson", &cal).unwrap();
    assert!(report.passed());
    let frozen = Brackets::from_reports(vec![cfg.calibration_seed], std::slice::from_ref(&report));
    assert!(!frozen.brackets.is_empty());
    // Same corpus in check mode: every value sits inside its own bracket.
    let check = Context::new(
        Config {
            seed: cfg.calibration_seed,
            ..cfg
        },
        frozen,
        Mode::Check,
    )
    .unwrap();
    let r = run_suite("poisson", &check).unwrap();
    assert!(r.passed(), "{}", r.summary());
}

#[test]
fn missing_bracket_fails_in_check_mode() {
    let ctx = Context::new(small_config(), Brackets::default(), Mode::Check).unwrap();
    let r = run_suite("poisson", &ctx).unwrap();
    assert!(!r.cases.is_empty());
    assert_eq!(r.failures(), r.cases.len());
    assert!(r.summary().starts_with("SUITE poisson FAIL"));
}

#[test]
fn every_suite_is_registered_with_groups() {
    assert_eq!(SUITES.len(), 13);
    for s in SUITES {
        assert!(!suite_groups(s).unwrap().is_empty());
    }
}

#[test]
fn report_csv_carries_environment() {
    let ctx = Context::new(small_config(), Brackets::default(), Mode::Calibrate).unwrap();
    let csv = run_suite("norm-identities", &ctx).unwrap().to_csv();
    assert!(csv.starts_with("# suite=norm-identities seed=1009\n"));
    assert!(csv.contains("n=1 L=8 N=1024"));
    assert!(csv.contains("case,group,property,digest,measured,lo,hi,tol,pass\n"));
}
