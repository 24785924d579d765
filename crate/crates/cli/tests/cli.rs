use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sisphase"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(dir: &TempDir, args: &[&str], config: &Path, out: &str) -> Output {
    bin()
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(dir.path().join(out))
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const CHIRP4: &str = r#"{ "kind": "chirp", "a": 4, "b": 0.8, "p": 1 }"#;

#[test]
fn ghc_plausible_and_inconclusive() {
    let d = TempDir::new().unwrap();
    let cfg = write(d.path(), "g.json", &format!(r#"{{ "generator": {CHIRP4}, "system": "Xi_phi" }}"#));
    let o = run(&d, &["check-ghc"], &cfg, "a");
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(d.path().join("a/ghc_report.json"))["verdict"], "plausible");

    // Unit-periodic table: all shifts coincide on (0, 1).
    let vals: Vec<String> = (0..=12).map(|i| format!("[{}, 0]", [0.0, 1.0, 0.5][i % 3])).collect();
    let cfg = write(
        d.path(),
        "t.json",
        &format!(
            r#"{{ "generator": {{ "kind": "tabulated", "support": 4, "values": [{}] }}, "system": "Lambda_varphi", "tuples": 20 }}"#,
            vals.join(",")
        ),
    );
    let o = run(&d, &["check-ghc"], &cfg, "b");
    assert_eq!(code(&o), 2);
    assert_eq!(json(d.path().join("b/ghc_report.json"))["verdict"], "inconclusive");
}

#[test]
fn input_errors_exit_one() {
    let d = TempDir::new().unwrap();
    let missing = d.path().join("nope.json");
    assert_eq!(code(&run(&d, &["check-ghc"], &missing, "o")), 1);
    let bad = write(d.path(), "bad.json", &format!(r#"{{ "generator": {CHIRP4}, "system": "Xi_phi", "extra": 1 }}"#));
    assert_eq!(code(&run(&d, &["check-ghc"], &bad, "o")), 1);
    assert_eq!(code(&bin().args(["montecarlo", "--bogus"]).output().unwrap()), 1);
    assert_eq!(code(&bin().arg("reconstruct").output().unwrap()), 1);
}

fn truth_csv(dir: &Path) -> PathBuf {
    write(dir, "truth.csv", "index,re,im\n0,0.62,-0.31\n1,-0.18,0.77\n2,0.45,0.4\n3,-0.52,-0.12\n4,0.09,0.66\n")
}

#[test]
fn synthesize_then_reconstruct() {
    let d = TempDir::new().unwrap();
    truth_csv(d.path());
    let cfg = write(
        d.path(),
        "r.json",
        &format!(r#"{{ "generator": {CHIRP4}, "mode": "complex", "truth": "truth.csv", "n_max": 6 }}"#),
    );
    let o = run(&d, &["reconstruct", "--seed", "5"], &cfg, "o");
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let res = json(d.path().join("o/result.json"));
    assert_eq!(res["status"]["kind"], "ok");
    assert!(res["error"].as_f64().unwrap() <= -6.0);
    let coeffs = fs::read_to_string(d.path().join("o/coefficients.csv")).unwrap();
    assert_eq!(coeffs.lines().count(), 8);

    // The written samples reconstruct to the same coefficients.
    let again = write(
        d.path(),
        "s.json",
        &format!(r#"{{ "generator": {CHIRP4}, "mode": "complex", "samples": "o/samples.csv" }}"#),
    );
    let o2 = run(&d, &["reconstruct"], &again, "o2");
    assert_eq!(code(&o2), 0, "{}", String::from_utf8_lossy(&o2.stderr));
    assert_eq!(coeffs, fs::read_to_string(d.path().join("o2/coefficients.csv")).unwrap());

    // No seed anywhere.
    assert_eq!(code(&run(&d, &["reconstruct"], &cfg, "o3")), 1);
}

#[test]
fn malformed_samples_exit_one() {
    let d = TempDir::new().unwrap();
    truth_csv(d.path());
    let cfg = write(
        d.path(),
        "r.json",
        &format!(r#"{{ "generator": {CHIRP4}, "mode": "complex", "truth": "truth.csv", "n_max": 6 }}"#),
    );
    assert_eq!(code(&run(&d, &["reconstruct", "--seed", "1"], &cfg, "o")), 0);
    let text = fs::read_to_string(d.path().join("o/samples.csv")).unwrap();
    let holed: Vec<&str> = text.lines().filter(|l| !l.starts_with("3,")).collect();
    write(d.path(), "holed.csv", &holed.join("\n"));
    let cfg = write(
        d.path(),
        "h.json",
        &format!(r#"{{ "generator": {CHIRP4}, "mode": "complex", "samples": "holed.csv" }}"#),
    );
    let o = run(&d, &["reconstruct"], &cfg, "h");
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("interval 3"));
}

#[test]
fn reconstruction_failure_exits_three() {
    let d = TempDir::new().unwrap();
    // f vanishes on [5, 6): every history coefficient there is zero.
    write(d.path(), "sparse.csv", "index,re,im\n0,1,0\n1,0.5,0.5\n");
    let cfg = write(
        d.path(),
        "r.json",
        &format!(r#"{{ "generator": {CHIRP4}, "mode": "complex", "truth": "sparse.csv", "n_max": 6 }}"#),
    );
    let o = run(&d, &["reconstruct", "--seed", "2"], &cfg, "o");
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stdout));
    assert_ne!(json(d.path().join("o/result.json"))["status"]["kind"], "ok");
}

fn mc_config(dir: &Path, extra: &str) -> PathBuf {
    write(
        dir,
        "mc.json",
        &format!(
            r#"{{ "generator": {CHIRP4}, "truth": {{ "source": "random", "len": 6 }}, "trials": 8,
                 "mode": "complex", "n_max": 8, "threshold": -6 {extra} }}"#
        ),
    )
}

#[test]
fn montecarlo_is_reproducible() {
    let d = TempDir::new().unwrap();
    let cfg = mc_config(d.path(), "");
    assert_eq!(code(&run(&d, &["montecarlo"], &cfg, "x")), 1);
    let a = run(&d, &["montecarlo", "--seed", "9"], &cfg, "a");
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    let b = run(&d, &["montecarlo", "--seed", "9", "--jobs", "1"], &cfg, "b");
    assert_eq!(code(&b), 0);
    for f in ["report.json", "errors.csv", "cdf.csv"] {
        assert_eq!(fs::read(d.path().join("a").join(f)).unwrap(), fs::read(d.path().join("b").join(f)).unwrap(), "{f}");
    }
    let report = json(d.path().join("a/report.json"));
    assert_eq!(report["success_rate"], 1.0);
    assert_eq!(report["config"]["seed"], 9);
    let errors = fs::read_to_string(d.path().join("a/errors.csv")).unwrap();
    assert_eq!(errors.lines().count(), 9);
}

#[test]
fn montecarlo_single_trial() {
    let d = TempDir::new().unwrap();
    let cfg = mc_config(d.path(), "").to_string_lossy().replace("mc.json", "one.json");
    let text = fs::read_to_string(d.path().join("mc.json")).unwrap().replace(r#""trials": 8"#, r#""trials": 1"#);
    fs::write(&cfg, text).unwrap();
    assert_eq!(code(&run(&d, &["montecarlo", "--seed", "1"], Path::new(&cfg), "o")), 0);
    let errors = fs::read_to_string(d.path().join("o/errors.csv")).unwrap();
    assert_eq!(errors.lines().count(), 2);
}

#[test]
fn montecarlo_grid_table() {
    let d = TempDir::new().unwrap();
    let cfg = mc_config(d.path(), r#", "sweep": { "a": [4, 50], "snr_db": [300, 320] }"#);
    let o = run(&d, &["montecarlo", "--seed", "3"], &cfg, "o");
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(d.path().join("o/table.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "a,300,320");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("4,") && lines[2].starts_with("50,"));
    assert!(d.path().join("o/a50_snr320/report.json").exists());

    let empty = mc_config(d.path(), r#", "sweep": { "snr_db": [] }"#);
    assert_eq!(code(&run(&d, &["montecarlo", "--seed", "3"], &empty, "e")), 0);
    assert_eq!(fs::read_to_string(d.path().join("e/table.csv")).unwrap(), "a\n4\n");
}

#[test]
fn ambiguity_demo() {
    let d = TempDir::new().unwrap();
    let cfg = write(d.path(), "a.json", r#"{ "alpha": 1.0, "beta": 0.0 }"#);
    let o = run(&d, &["ambiguity-demo"], &cfg, "o");
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(d.path().join("o/demo.json"));
    assert!(r["max_magnitude_gap"].as_f64().unwrap() < 1e-12);
    assert!(r["alignment_residual"].as_f64().unwrap() > 0.1);
    let c1 = &r["c_tilde_1"];
    assert!((c1[0].as_f64().unwrap() - 2f64.cos()).abs() < 1e-15);
    assert!((c1[1].as_f64().unwrap() - 2f64.sin()).abs() < 1e-15);
    // Both runs complete, each landing on its own source signal.
    for (key, own, other) in [("from_f_samples", "error_vs_f", "error_vs_g"), ("from_g_samples", "error_vs_g", "error_vs_f")] {
        assert_eq!(r[key]["status"]["kind"], "ok");
        assert!(r[key][own].as_f64().unwrap() < -6.0);
        assert!(r[key][other].as_f64().unwrap() > -2.0);
    }
    let grid = fs::read_to_string(d.path().join("o/grid.csv")).unwrap();
    assert_eq!(grid.lines().count(), 10_001);

    let degenerate = write(d.path(), "b.json", r#"{ "alpha": 0.5, "beta": 0.5 }"#);
    assert_eq!(code(&run(&d, &["ambiguity-demo"], &degenerate, "p")), 1);
}
