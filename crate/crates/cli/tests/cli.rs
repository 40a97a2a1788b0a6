use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn urp(args: &[&str]) -> Output {
    urp_env(args, &[])
}

fn urp_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_urp"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_lines(o: &Output) -> Vec<Value> {
    stdout(o).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

const FIG2: [&str; 4] = ["--beta", "0.306102", "--eta", "10"];

fn with<'a>(base: &[&'a str], more: &[&'a str]) -> Vec<&'a str> {
    base.iter().chain(more).copied().collect()
}

fn write_fig2_topology(dir: &Path) -> String {
    let path = dir.join("fig2.json");
    std::fs::write(
        &path,
        r#"{"r0": 20, "alpha": 3.5, "interferers": [30, 50, 70, 90, 110, 130, 150, 170, 190, 210]}"#,
    )
    .unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn rate_headline_payloads() {
    let args = with(&["rate"], &FIG2);
    let o = urp(&with(&args, &["--M", "2", "--n", "200", "--eps", "7e-5", "--scheme", "sc", "--method", "approx,fb", "--json"]));
    assert_eq!(code(&o), 0);
    let lines = json_lines(&o);
    assert_eq!(lines[0]["method"], "sc_approx");
    let approx = lines[0]["k_star"].as_i64().unwrap();
    assert!((7..=9).contains(&approx), "{approx}");
    assert_eq!(lines[1]["method"], "fb_sc");
    assert_eq!(lines[1]["k_star"], 4);
}

#[test]
fn rate_text_lists_every_default_method() {
    let args = with(&["rate"], &FIG2);
    let o = urp(&with(&args, &["--M", "4", "--n", "200", "--eps", "1e-5", "--scheme", "mrc"]));
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let methods: Vec<&str> = text.lines().map(|l| l.split_whitespace().next().unwrap()).collect();
    assert_eq!(methods, ["mrc_numeric", "mrc_closed", "fb_mrc"]);
}

#[test]
fn topology_file_exact_and_approx_agree() {
    let dir = tempfile::tempdir().unwrap();
    let topo = write_fig2_topology(dir.path());
    let o = urp(&["rate", "--topology", &topo, "--M", "1", "--n", "20000", "--eps", "1e-4", "--scheme", "sc", "--method", "exact,approx", "--json"]);
    assert_eq!(code(&o), 0);
    let lines = json_lines(&o);
    let exact = lines[0]["k_star"].as_i64().unwrap();
    let approx = lines[1]["k_star"].as_i64().unwrap();
    assert!(exact >= 1 && (exact - approx).abs() <= 1, "{exact} {approx}");
}

#[test]
fn exit_codes() {
    let args = with(&["rate"], &FIG2);
    // infeasible
    assert_eq!(code(&urp(&with(&args, &["--M", "1", "--n", "200", "--eps", "1e-6"]))), 2);
    // usage
    assert_eq!(code(&urp(&with(&args, &["--n", "200", "--eps", "1e-3"]))), 64);
    assert_eq!(code(&urp(&["rate", "--beta", "0.3"])), 64);
    assert_eq!(code(&urp(&["rate", "--bogus"])), 64);
    assert_eq!(code(&urp(&["frobnicate"])), 64);
    assert_eq!(code(&urp(&["sweep", "--preset", "fig9"])), 64);
    // invalid configuration
    assert_eq!(code(&urp(&with(&args, &["--M", "2", "--n", "200", "--eps", "1.5"]))), 65);
    assert_eq!(code(&urp(&with(&args, &["--M", "0", "--n", "200", "--eps", "1e-3"]))), 65);
    assert_eq!(code(&urp(&with(&args, &["--M", "2", "--n", "200", "--eps", "1e-3", "--method", "exact"]))), 65);
    assert_eq!(code(&urp(&with(&args, &["--M", "2", "--n", "200", "--eps", "1e-3", "--scheme", "mrc", "--method", "exact"]))), 65);
    assert_eq!(code(&urp(&["rate", "--topology", "/nonexistent.json", "--M", "1", "--n", "200", "--eps", "1e-3"])), 65);
    // help and version succeed
    assert_eq!(code(&urp(&["--help"])), 0);
    assert_eq!(code(&urp(&["--version"])), 0);
}

#[test]
fn invalid_topology_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    for (name, body) in [
        ("both.json", r#"{"r0": 1, "alpha": 3, "interferers": [2], "path_losses": {"l0": 1, "lj": [1]}}"#),
        ("alpha.json", r#"{"r0": 1, "alpha": 2, "interferers": [2]}"#),
        ("unknown.json", r#"{"r0": 1, "alpha": 3, "interferers": [2], "noise": 1}"#),
        ("broken.json", r#"{"r0": "#),
    ] {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        let o = urp(&["rate", "--topology", p.to_str().unwrap(), "--M", "1", "--n", "200", "--eps", "0.1"]);
        assert_eq!(code(&o), 65, "{name}");
    }
}

#[test]
fn environment_overrides() {
    let env = [("URP_M", "2"), ("URP_N", "200"), ("URP_EPS", "7e-5"), ("URP_BETA", "0.306102"), ("URP_ETA", "10")];
    let o = urp_env(&["rate", "--method", "fb", "--json"], &env);
    assert_eq!(code(&o), 0);
    assert_eq!(json_lines(&o)[0]["k_star"], 4);
    // an explicit flag wins over the environment
    let o = urp_env(&["rate", "--method", "fb", "--json", "--n", "400"], &env);
    assert_eq!(json_lines(&o)[0]["blocklength"], 400);
}

#[test]
fn single_value_sweep_equals_rate() {
    let o = urp(&with(&with(&["sweep"], &FIG2), &["--axis", "eps", "--values", "7e-5", "--M", "2", "--n", "200", "--method", "approx,fb"]));
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let mut rows = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = rows.headers().unwrap().clone();
    let k_col = headers.iter().position(|h| h == "k_star").unwrap();
    let ks: Vec<String> = rows.records().map(|r| r.unwrap()[k_col].to_string()).collect();
    let rate = urp(&with(&with(&["rate"], &FIG2), &["--M", "2", "--n", "200", "--eps", "7e-5", "--method", "approx,fb", "--json"]));
    let expected: Vec<String> = json_lines(&rate).iter().map(|v| v["k_star"].to_string()).collect();
    assert_eq!(ks, expected);
}

#[test]
fn sweep_output_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for (path, workers) in [(&a, "1"), (&b, "4")] {
        let o = urp(&["sweep", "--preset", "fig6", "--out", path.to_str().unwrap(), "--workers", workers]);
        assert_eq!(code(&o), 0);
    }
    let first = std::fs::read(&a).unwrap();
    assert_eq!(first, std::fs::read(&b).unwrap());
    assert!(first.starts_with(b"# preset: fig6\n"));
}

#[test]
fn every_preset_runs() {
    for preset in ["fig2", "fig2pp", "fig3", "fig4", "fig5", "fig6"] {
        let o = urp(&["sweep", "--preset", preset]);
        assert_eq!(code(&o), 0, "{preset}");
        let text = stdout(&o);
        assert!(text.lines().filter(|l| !l.starts_with('#')).count() > 100, "{preset}");
    }
}

#[test]
fn simulate_report_shape() {
    let dir = tempfile::tempdir().unwrap();
    let topo = write_fig2_topology(dir.path());
    let o = urp(&["simulate", "--topology", &topo, "--M", "2", "--n", "200", "--k", "7", "--trials", "1e5", "--seed", "3"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1);
    let v: Value = serde_json::from_str(text.trim()).unwrap();
    for key in ["trials", "errors", "epsilon_hat", "ci95", "seed", "estimator"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert!(v.get("elapsed").is_none());
    assert_eq!(v["trials"], 100_000);
    assert!(String::from_utf8(o.stderr).unwrap().contains("elapsed"));
}

#[test]
fn simulate_from_spec_file_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(
        &spec,
        r#"{"topology": {"path_losses": {"l0": 1.0, "lj": [0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1]}},
            "antennas": 2, "scheme": "mrc", "threshold_bits": 13, "blocklength": 200,
            "semantics": "finite_blocklength", "trials": 100000, "seed": 5, "workers": 2}"#,
    )
    .unwrap();
    let from_file = urp(&["simulate", "--spec", spec.to_str().unwrap()]);
    assert_eq!(code(&from_file), 0);
    let from_flags = urp(&[
        "simulate", "--beta", "0.8", "--eta", "8", "--M", "2", "--n", "200", "--k", "13", "--scheme", "mrc",
        "--semantics", "fb", "--trials", "100000", "--seed", "5",
    ]);
    assert_eq!(stdout(&from_file), stdout(&from_flags));
}

#[test]
fn simulate_refuses_underpowered_runs() {
    let args = with(&["simulate"], &FIG2);
    let base = with(&args, &["--M", "2", "--n", "200", "--k", "7", "--trials", "1000", "--eps", "1e-4"]);
    assert_eq!(code(&urp(&base)), 65);
    assert_eq!(code(&urp(&with(&base, &["--allow-underpowered"]))), 0);
}

#[test]
fn validate_analytic_scopes() {
    for scope in ["tails", "bounds"] {
        let o = urp(&["validate", scope]);
        assert_eq!(code(&o), 0, "{scope}");
        let lines = json_lines(&o);
        assert!(!lines.is_empty());
        assert!(lines.iter().all(|l| l["passed"] == true && l["scope"] == scope));
    }
    assert_eq!(code(&urp(&["validate", "everything"])), 64);
}
