use std::fs::{self, File};
use std::io::BufReader;
use std::path::PathBuf;
use std::process::Command;

use oslab::grid::{read_gridfn, write_gridfn, Cube, GridFunction, GridSpec};
use oslab::norms::lebesgue_norm;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("oslab-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn oslab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_oslab"))
}

fn sample(dir: &PathBuf) -> (PathBuf, GridFunction) {
    let spec = GridSpec::new(1, 8.0, 1024).unwrap();
    let f = GridFunction::from_fn(spec, |p| (-4.0 * p[0] * p[0]).exp() * (3.0 * p[0]).sin())
        .with_support_hint(Cube::new([0.0, 0.0], 4.0));
    let path = dir.join("f.gridfn");
    write_gridfn(&mut File::create(&path).unwrap(), &f).unwrap();
    (path, f)
}

fn read(path: PathBuf) -> GridFunction {
    read_gridfn(&mut BufReader::new(File::open(path).unwrap())).unwrap()
}

#[test]
fn norm_prints_a_report_row() {
    let dir = scratch("norm");
    let (input, f) = sample(&dir);
    let out = oslab()
        .args(["norm", "--input"])
        .arg(&input)
        .args(["--kind", "lebesgue", "--q", "2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("function_id,space,t,q,phi_kind,value,tolerance"));
    let value: f64 = lines.next().unwrap().split(',').nth(5).unwrap().parse().unwrap();
    assert!((value / lebesgue_norm(&f, 2.0) - 1.0).abs() < 1e-10);
}

#[test]
fn operators_write_gridfn_outputs() {
    let dir = scratch("ops");
    let (input, f) = sample(&dir);
    for (args, name) in [
        (vec!["czop", "--kernel", "hilbert"], "czop"),
        (vec!["maximal", "--op", "centered"], "maximal"),
        (vec!["lpaley", "--op", "S", "--lambda", "3"], "lpaley"),
        (vec!["hardy"], "hardy"),
    ] {
        let status = oslab()
            .args(&args)
            .arg("--input")
            .arg(&input)
            .arg("--out")
            .arg(&dir)
            .status()
            .unwrap();
        assert!(status.success(), "{args:?}");
        let g = read(dir.join(format!("{name}.gridfn")));
        assert_eq!(g.spec, f.spec);
    }
    let out = oslab().args(["hardy", "--norm", "--input"]).arg(&input).output().unwrap();
    let v: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!(v > 0.0);
}

#[test]
fn decompose_writes_manifest_and_payloads() {
    let dir = scratch("decompose");
    let (input, _) = sample(&dir);
    let out_dir = dir.join("atoms");
    let status = oslab()
        .args(["decompose", "--s", "0.7", "--d", "1", "--phi", "power:0.8", "--q", "0.8", "--input"])
        .arg(&input)
        .arg("--out")
        .arg(&out_dir)
        .status()
        .unwrap();
    assert!(status.success());
    let manifest = fs::read_to_string(out_dir.join("manifest.csv")).unwrap();
    let rows: Vec<&str> = manifest.lines().skip(1).collect();
    assert!(!rows.is_empty());
    for row in rows {
        let file = row.rsplit(',').next().unwrap();
        assert!(out_dir.join(file).exists(), "{file}");
    }
    assert!(out_dir.join("residual.gridfn").exists());
}

#[test]
fn verify_prints_summaries_and_reports() {
    let dir = scratch("verify");
    let out = oslab()
        .args(["verify", "--suite", "orlicz-basics", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("SUITE orlicz-basics PASS cases="), "{text}");
    assert!(out.status.success());
    assert!(fs::read_to_string(dir.join("orlicz-basics.csv")).unwrap().contains("young-bracket"));
}

#[test]
fn verify_rejects_unknown_suite() {
    let out = oslab().args(["verify", "--suite", "bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("bogus"));
}

#[test]
fn config_file_is_read() {
    let dir = scratch("config");
    let cfg = dir.join("cfg.toml");
    fs::write(&cfg, "seed = 3\nt_sweep = [0.5, 1.0]\n").unwrap();
    let out = oslab()
        .args(["verify", "--suite", "norm-identities", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let csv = fs::read_to_string(dir.join("norm-identities.csv")).unwrap();
    assert!(csv.starts_with("# suite=norm-identities seed=3\n"));
    assert!(csv.contains("# t_sweep=[0.5, 1.0]"));
    let bad = dir.join("bad.toml");
    fs::write(&bad, "t_sweep = []\n").unwrap();
    let out = oslab().args(["verify", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
