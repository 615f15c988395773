use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_affine-ensemble"))
}

fn run(args: &[&str], out_dir: &Path) -> Output {
    bin().args(args).env("AFFINE_ENSEMBLE_OUT", out_dir).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn keys(v: &serde_json::Value) -> Vec<String> {
    v.as_object().unwrap().keys().cloned().collect()
}

#[test]
fn variance_csv_header_and_json_keys_are_pinned() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["variance", "--B", "3.5", "--n", "0", "--R", "0.3,0.4", "--method", "trace", "--depth", "1"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("variance.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "R,v_geometric,v_double,v_trace,expected,bound_area,bound_admissible,normalization");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("0.3,,,") && lines[1].ends_with(",diagonal1"), "{}", lines[1]);
    assert_eq!(stdout(&o), csv);

    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("variance.json")).unwrap()).unwrap();
    assert_eq!(keys(&v), ["depth", "kernel", "rows"]);
    assert_eq!(keys(&v["kernel"]), ["B", "alpha", "n", "normalization", "variant"]);
    let row = &v["rows"][0];
    assert_eq!(
        keys(row),
        ["R", "bounds", "c_estimate", "expected", "kappa", "normalization", "v_double", "v_geometric", "v_trace"]
    );
    assert_eq!(keys(&row["bounds"]), ["bound_admissible", "bound_area"]);
}

#[test]
fn sample_json_keys_are_pinned() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["sample", "--B", "3.5", "--R", "0.5", "--depth", "1"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(keys(&v), ["kernel", "points", "region", "seed"]);
    assert_eq!(keys(&v["region"]), ["R", "center"]);
    assert_eq!(v["region"]["center"], serde_json::json!([0.0, 1.0]));
    assert_eq!(v["seed"], 0);
    for p in v["points"].as_array().unwrap() {
        assert_eq!(p.as_array().unwrap().len(), 2);
        assert!(p[1].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn commands_are_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let svg_a = dir.path().join("a.svg");
    let svg_b = dir.path().join("b.svg");
    let cases: Vec<Vec<&str>> = vec![
        vec!["kernel", "--B", "3.5", "--n", "1", "--z", "0.3+1.2i", "--w", "-0.5+2i", "--check-quadrature"],
        vec!["kernel", "--alpha", "6", "--z", "i", "--w", "2i", "--json"],
        vec!["constants", "--B", "3.5", "--n", "0", "--json"],
        vec!["variance", "--B", "3.5", "--R", "0.5", "--depth", "1"],
        vec!["sample", "--B", "3.5", "--R", "0.8", "--seed", "17"],
        vec!["sample", "--B", "3.5", "--R", "0.6", "--samples", "50", "--stats", "--depth", "1"],
        vec!["verify", "--only", "specfun,geometry"],
    ];
    for args in &cases {
        let a = run(args, dir.path());
        let csv_a = std::fs::read(dir.path().join("variance.csv")).ok();
        let b = run(args, dir.path());
        let csv_b = std::fs::read(dir.path().join("variance.csv")).ok();
        assert_eq!(a.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(csv_a, csv_b);
    }
    for path in [&svg_a, &svg_b] {
        let o = run(&["sample", "--B", "3.5", "--seed", "4", "--svg", path.to_str().unwrap()], dir.path());
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&svg_a).unwrap(), std::fs::read(&svg_b).unwrap());
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["kernel", "--B", "0.6", "--n", "1", "--z", "i", "--w", "i"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("floor(B - 1/2)"));
    for args in [
        vec!["variance", "--B", "3.5", "--R", "1.2"],
        vec!["kernel", "--B", "3.5", "--z", "1-2i", "--w", "i"],
        vec!["kernel", "--z", "i", "--w", "i"],
        vec!["sample", "--B", "3.5", "--center", "0,-1"],
        vec!["verify", "--only", "nothing"],
        vec!["verify", "--tol-profile", "loose"],
    ] {
        assert_eq!(run(&args, dir.path()).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn numerical_failure_exits_with_one() {
    // alpha = 0: the admissibility constant is infinite
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["constants", "--B", "3.5", "--n", "3"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn diagonal_value_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["kernel", "--B", "3.5", "--n", "1", "--z", "0.3+1.2i", "--w", "0.3+1.2i", "--json"], dir.path());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["value"][0].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(v["value"][1].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn constants_match_four_pi_over_alpha() {
    let dir = tempfile::tempdir().unwrap();
    let a: serde_json::Value =
        serde_json::from_str(&stdout(&run(&["constants", "--alpha", "6", "--n", "2", "--json"], dir.path()))).unwrap();
    let b: serde_json::Value =
        serde_json::from_str(&stdout(&run(&["constants", "--B", "3.5", "--n", "0", "--json"], dir.path()))).unwrap();
    let c = 2.0 * std::f64::consts::PI / 3.0;
    assert!((a["c_psi"].as_f64().unwrap() - c).abs() < 1e-12);
    assert_eq!(a["c_psi"], b["c_psi"]);
}

#[test]
fn projection_variance_scales_by_density_squared() {
    let dir = tempfile::tempdir().unwrap();
    let read = |norm: &str| -> serde_json::Value {
        let o = run(&["variance", "--B", "3.5", "--R", "0.6", "--depth", "1", "--normalization", norm], dir.path());
        assert_eq!(o.status.code(), Some(0));
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("variance.json")).unwrap()).unwrap()
    };
    let d = read("diagonal1");
    let p = read("projection");
    let factor = (6.0 / (4.0 * std::f64::consts::PI)).powi(2);
    for key in ["v_geometric", "v_double", "v_trace"] {
        let (a, b) = (d["rows"][0][key].as_f64().unwrap(), p["rows"][0][key].as_f64().unwrap());
        assert!((b / a - factor).abs() < 1e-10 * factor, "{key}: {b} / {a}");
    }
}
