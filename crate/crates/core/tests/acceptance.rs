//! Runs every verification suite on the default configuration and reports
//! one line per acceptance criterion. Exits nonzero if any criterion fails.

use std::collections::HashMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use oslab::harness::{run_suite, Brackets, Config, Context, Mode, VerificationReport, SUITES};

struct Criterion {
    number: usize,
    title: &'static str,
    groups: &'static [&'static str],
    /// Suite whose wall time is limited, with the limit.
    limit: Option<(&'static str, u64)>,
    /// Groups reported alongside but not part of the criterion.
    companions: &'static [&'static str],
}

const CRITERIA: &[Criterion] = &[
    Criterion {
        number: 1,
        title: "indicator-norm identity",
        groups: &["indicator-identity"],
        limit: Some(("norm-identities", 10)),
        companions: &[],
    },
    Criterion {
        number: 2,
        title: "L^q coincidence",
        groups: &["lq-coincidence"],
        limit: None,
        companions: &[],
    },
    Criterion {
        number: 3,
        title: "embedding inequalities",
        groups: &["embedding-lq", "embedding-lr", "embedding-reverse"],
        limit: None,
        companions: &["embedding-lr-scaled"],
    },
    Criterion {
        number: 4,
        title: "slice and amalgam norms",
        groups: &["slice-amalgam", "slice-amalgam-stability"],
        limit: Some(("slice-amalgam", 60)),
        companions: &[],
    },
    Criterion {
        number: 5,
        title: "Young bracket and Holder",
        groups: &["young-bracket", "holder"],
        limit: None,
        companions: &[],
    },
    Criterion {
        number: 6,
        title: "vector-valued maximal inequality",
        groups: &["fs-ratio", "fs-stability"],
        limit: None,
        companions: &[],
    },
    Criterion {
        number: 7,
        title: "maximal equivalences",
        groups: &["maximal-ratio", "maximal-chain"],
        limit: None,
        companions: &[],
    },
    Criterion {
        number: 8,
        title: "Poisson characterization",
        groups: &["poisson-ratio"],
        limit: None,
        companions: &[],
    },
    Criterion {
        number: 9,
        title: "atoms and decomposition",
        groups: &["atom-valid", "atom-hardy", "reconstruction", "decomposition-atoms", "s-functional"],
        limit: None,
        companions: &[],
    },
    Criterion {
        number: 10,
        title: "square functions",
        groups: &["cone-bound", "square-ratio"],
        limit: None,
        companions: &["cone-bound-scaled"],
    },
    Criterion {
        number: 11,
        title: "Calderon-Zygmund boundedness",
        groups: &["cz-slice", "cz-hardy", "cz-stability", "far-field"],
        limit: Some(("cz-bounded", 300)),
        companions: &[],
    },
    Criterion {
        number: 12,
        title: "duality pairings",
        groups: &["slice-duality", "atom-campanato"],
        limit: None,
        companions: &[],
    },
];

fn tally(reports: &[VerificationReport], groups: &[&str]) -> (usize, usize, String) {
    let mut cases = 0;
    let mut failures = 0;
    let mut worst = String::new();
    for c in reports.iter().flat_map(|r| &r.cases) {
        if !groups.contains(&c.group) {
            continue;
        }
        cases += 1;
        if !c.pass {
            failures += 1;
            if worst.is_empty() {
                worst = format!("{} measured={:.4e} bound=[{:.4e}, {:.4e}]", c.id, c.measured, c.lo, c.hi);
            }
        }
    }
    (cases, failures, worst)
}

fn main() -> ExitCode {
    let ctx = Context::new(Config::default(), Brackets::golden(), Mode::Check).expect("default context");
    let mut reports = Vec::new();
    let mut times: HashMap<&str, Duration> = HashMap::new();
    for suite in SUITES {
        let start = Instant::now();
        let report = run_suite(suite, &ctx).expect("registered suite");
        let took = start.elapsed();
        println!("{} time={:.1}s", report.summary(), took.as_secs_f64());
        times.insert(suite, took);
        reports.push(report);
    }
    let mut all = true;
    for c in CRITERIA {
        let (cases, failures, worst) = tally(&reports, c.groups);
        let mut ok = cases > 0 && failures == 0;
        let mut timing = String::new();
        if let Some((suite, secs)) = c.limit {
            let took = times[suite].as_secs_f64();
            ok &= took < secs as f64;
            timing = format!(" time={took:.1}s limit={secs}s");
        }
        all &= ok;
        println!(
            "CRITERION {} {} {}: cases={cases} failures={failures}{timing}",
            c.number,
            if ok { "PASS" } else { "FAIL" },
            c.title
        );
        if !worst.is_empty() {
            println!("  first failure: {worst}");
        }
        for g in c.companions {
            let (n, f, _) = tally(&reports, &[g]);
            println!("  companion {g}: cases={n} failures={f}");
        }
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
