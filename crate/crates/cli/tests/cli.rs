use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deutsch-sim"))
        .args(args)
        .env_remove("DEUTSCH_SIM_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn gates_verify_passes_and_negative_control_fails() {
    let ok = sim(&["gates-verify"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).contains("oracle equivalences: 4/4"));

    let bad = sim(&["gates-verify", "--wrong-dp-sign"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("[FAIL] oracle CNOT"));
}

#[test]
fn run_reports_each_class() {
    for (oracle, class, d1) in [
        ("const0", "Constant", "0.000000000000"),
        ("const1", "Constant", "0.000000000000"),
        ("id", "Balanced", "1.000000000000"),
        ("inv", "Balanced", "1.000000000000"),
    ] {
        for source in ["ideal", "sagnac"] {
            let o = sim(&[
                "run", "--oracle", oracle, "--phase", "pi", "--source", source, "--json",
            ]);
            assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
            let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
            assert_eq!(v["classification"], class);
            assert_eq!(v["p_d1"], d1);
            assert_eq!(v["quantum_queries"], 1);
            assert_eq!(v["classical_queries"], 2);
        }
    }
}

#[test]
fn run_at_zero_phase_is_indeterminate() {
    let o = sim(&["run", "--oracle", "id", "--phase", "0"]);
    assert!(stdout(&o).contains("classification: Indeterminate"));
}

#[test]
fn run_rejects_bad_arguments() {
    assert_eq!(
        sim(&["run", "--oracle", "xor", "--phase", "pi"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        sim(&["run", "--oracle", "id", "--phase", "2 rad"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        sim(&["run", "--oracle", "id", "--phase", "pi", "--tol", "0.7"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn sweep_analyze_plot_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("id.csv");
    let o = sim(&["sweep", "--oracle", "id", "--out", p(&csv)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("voltage_V,phase_rad,counts_d1,counts_d2\n"));
    assert_eq!(text.lines().count(), 36);

    let a = sim(&["analyze", "--in", p(&csv), "--json"]);
    assert_eq!(a.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["decision"], "Balanced");
    assert_eq!(v["proper_points"].as_array().unwrap().len(), 2);

    let svg = dir.path().join("id.svg");
    let pl = sim(&["plot", "--in", p(&csv), "--out", p(&svg)]);
    assert_eq!(pl.status.code(), Some(0), "{}", stderr(&pl));
    let svg_text = fs::read_to_string(&svg).unwrap();
    assert!(svg_text.starts_with("<svg") || svg_text.starts_with("<?xml"));
    assert_eq!(svg_text.matches("class=\"marker\"").count(), 2);
    let side = fs::read_to_string(dir.path().join("id.txt")).unwrap();
    assert!(side.contains("8.5"));
}

#[test]
fn sweep_seed_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let st = Command::new(env!("CARGO_BIN_EXE_deutsch-sim"))
        .args(["sweep", "--oracle", "inv", "--out", p(&a)])
        .env("DEUTSCH_SIM_SEED", "7")
        .status()
        .unwrap();
    assert!(st.success());
    assert!(
        sim(&["sweep", "--oracle", "inv", "--out", p(&b), "--seed", "7"])
            .status
            .success()
    );
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn sweep_invalid_config_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    for extra in [
        ["--v-step", "0"],
        ["--visibility", "1.5"],
        ["--extinction", "0.6"],
        ["--rate", "-1"],
    ] {
        let mut args = vec!["sweep", "--oracle", "id", "--out", p(&out)];
        args.extend(extra);
        let o = sim(&args);
        assert_eq!(o.status.code(), Some(2), "{extra:?}: {}", stderr(&o));
    }
}

#[test]
fn sweep_unwritable_output_is_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("missing").join("x.csv");
    assert_eq!(
        sim(&["sweep", "--oracle", "id", "--out", p(&out)])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn analyze_rejects_malformed_csv() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.csv");
    fs::write(&f, "voltage_V,phase_rad,counts_d1,counts_d2\n1,0.3,12,x\n").unwrap();
    let o = sim(&["analyze", "--in", p(&f)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("row 2"), "{}", stderr(&o));
    let missing = dir.path().join("nope.csv");
    assert_eq!(
        sim(&["analyze", "--in", p(&missing)]).status.code(),
        Some(1)
    );
}

#[test]
fn bench_run_matches_run() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("cnot.bench");
    fs::write(
        &f,
        "polarizer V\nbs\nphase mode=r value=PHI\nhwp angle=22.5\nsagnac pbs=on dp=+45\nhwp angle=22.5\nmeasure pol\n",
    )
    .unwrap();
    let bench = sim(&[
        "bench",
        "run",
        "--file",
        p(&f),
        "--bind",
        "PHI=pi",
        "--json",
    ]);
    assert_eq!(bench.status.code(), Some(0), "{}", stderr(&bench));
    let run = sim(&[
        "run", "--oracle", "id", "--phase", "pi", "--source", "sagnac", "--json",
    ]);
    assert_eq!(stdout(&bench), stdout(&run));

    let c = sim(&["bench", "compile", "--file", p(&f), "--bind", "PHI=0"]);
    assert_eq!(c.status.code(), Some(0));
    assert_eq!(stdout(&c).lines().count(), 4);

    let unbound = sim(&["bench", "run", "--file", p(&f)]);
    assert_eq!(unbound.status.code(), Some(2));
    assert!(stderr(&unbound).contains("PHI"));
}

#[test]
fn bench_parse_errors_carry_positions() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.bench");
    fs::write(&f, "polarizer V\nhwp angle=22.5deg\nmeasure pol\n").unwrap();
    let o = sim(&["bench", "run", "--file", p(&f)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("bad.bench:2:11: error"),
        "{}",
        stderr(&o)
    );
}
