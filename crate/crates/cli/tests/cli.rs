use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hamsys(args: &[&str], config: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hamsys"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let p = dir.join("run.toml");
    std::fs::write(&p, body).unwrap();
    p
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn check_vector(v: &Value) -> Vec<(String, bool)> {
    v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| (c["name"].as_str().unwrap().to_string(), c["pass"].as_bool().unwrap()))
        .collect()
}

const SMALL: &str = "[domain]\nm = 3\nn = 2\nn_r = 33\nn_theta = 17\n\n[exponents]\np = 3.2\nq = 3.2\n";

#[test]
fn hardy_report_for_n4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[domain]\nm = 2\nn = 2\nn_r = 65\nn_theta = 33\n[exponents]\np = 3\nq = 3\n");
    let out = dir.path().join("o");
    let o = hamsys(&["hardy"], &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&out.join("hardy.json"));
    let value = r["hardy"]["estimate"]["value"].as_f64().unwrap();
    assert!((value - 1.0).abs() < 1e-6, "{value}");
    assert_eq!(r["hardy"]["estimate"]["lower_bound"].as_f64(), Some(1.0));
    assert!(check_vector(&r).iter().any(|(n, p)| n == "lower_bound_margin" && *p));
    assert!(out.join("hardy_summary.txt").exists());
}

#[test]
fn invalid_config_names_the_violation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("m = 3\nn = 2", "m = 2\nn = 3"));
    let o = hamsys(&["solve"], &cfg, &dir.path().join("o"), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n = 3 must be <= m = 2"));
    let o = hamsys(&["solve"], &write_config(dir.path(), SMALL), &dir.path().join("o"), &["--override", "solver.nope=1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_round_trip_and_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("o");
    let o = hamsys(&["solve"], &cfg, &out, &["--seed", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let solved = json(&out.join("solve.json"));
    assert_eq!(solved["provenance"]["seed"].as_u64(), Some(5));
    let csv = std::fs::read_to_string(out.join("solve.csv")).unwrap();
    assert!(csv.starts_with("r,theta,u,v\n"));

    let o = hamsys(&["verify"], &cfg, &out, &["--seed", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let verified = json(&out.join("verify.json"));
    assert_eq!(check_vector(&solved), check_vector(&verified));
    assert_eq!(solved["solutions"][0]["residual_u"], verified["solutions"][0]["residual_u"]);

    // one interior node set to -1
    let mut lines: Vec<String> = csv.lines().map(String::from).collect();
    let k = 1 + 10 * 17 + 4;
    let mut cols: Vec<&str> = lines[k].split(',').collect();
    cols[2] = "-1";
    lines[k] = cols.join(",");
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, lines.join("\n")).unwrap();
    let o = hamsys(&["verify"], &cfg, &dir.path().join("v"), &["--fields", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let failed: Vec<String> = check_vector(&json(&dir.path().join("v").join("verify.json")))
        .into_iter()
        .filter(|(_, p)| !p)
        .map(|(n, _)| n)
        .collect();
    assert!(failed.contains(&"positivity_margin".to_string()), "{failed:?}");
    assert!(failed.contains(&"cone_violation".to_string()), "{failed:?}");
}

#[test]
fn verify_accepts_a_coarser_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let coarse = dir.path().join("coarse");
    let o = hamsys(&["solve"], &cfg, &coarse, &["--override", "domain.n_r=17", "--override", "domain.n_theta=9"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let fields = coarse.join("solve.csv");
    let o = hamsys(&["verify"], &cfg, &dir.path().join("v"), &["--fields", fields.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&dir.path().join("v").join("verify.json"));
    assert_eq!(r["provenance"]["grid"]["n_r"].as_u64(), Some(17));
    assert_eq!(r["provenance"]["grid"]["n_theta"].as_u64(), Some(9));
}

#[test]
fn sweep_records_distinctness() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[domain]\nm = 4\nn = 2\nn_r = 65\nn_theta = 33\n[exponents]\np = 3.5\nq = 3.5\n[sweep]\nk = 3\n",
    );
    let out = dir.path().join("o");
    let o = hamsys(&["sweep"], &cfg, &out, &["--threads", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&out.join("sweep.json"));
    assert_eq!(r["solutions"].as_array().unwrap().len(), 2);
    assert_eq!(r["distinctness"][0]["verdict"].as_str(), Some("distinct"));
    assert!(out.join("sweep_m4_n2.csv").exists() && out.join("sweep_m3_n3.csv").exists());
}

#[test]
fn config_reference_is_a_valid_config() {
    let o = Command::new(env!("CARGO_BIN_EXE_hamsys")).arg("config-reference").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(hamsys_cli::RunConfig::parse(&text, &[]).is_ok());
}
