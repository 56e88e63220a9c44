use gkz_cli::{load_problem, save_problem, ProblemFile};
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn gkz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gkz-asym"))
        .args(args)
        .env_remove("GKZ_ASYM_MAX_LEVELS")
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn check_names(r: &Value) -> Vec<(String, bool)> {
    r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| (c["name"].as_str().unwrap().to_string(), c["pass"].as_bool().unwrap()))
        .collect()
}

fn write_variant(dir: &Path, name: &str, from: &str, to: &str) -> PathBuf {
    let text = std::fs::read_to_string(data("e1.json")).unwrap();
    assert!(text.contains(from));
    let path = dir.join(name);
    std::fs::write(&path, text.replacen(from, to, 1)).unwrap();
    path
}

#[test]
fn check_on_flagship_passes() {
    let out = gkz(&["check", data("e3.json").to_str().unwrap(), "--deterministic"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["status"], "pass");
    assert_eq!(r["results"]["assumption"]["ok"], true);
    assert_eq!(r["results"]["geometry"]["gevrey_index"], "3/2");
    assert_eq!(r["results"]["reduced"]["lattice_index"], 4);
}

#[test]
fn basis_on_index_two_instance() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("tables");
    let out = gkz(&[
        "basis",
        data("e2.json").to_str().unwrap(),
        "--order",
        "4",
        "--deterministic",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let res = &r["results"];
    assert_eq!(res["omega"], serde_json::json!([[0], [1]]));
    let m: Vec<Vec<(f64, f64)>> = res["connection"]["matrix"]
        .as_array()
        .unwrap()
        .iter()
        .map(|row| {
            row.as_array()
                .unwrap()
                .iter()
                .map(|z| (z["re"].as_str().unwrap().parse().unwrap(), z["im"].as_str().unwrap().parse().unwrap()))
                .collect()
        })
        .collect();
    assert_eq!(m, vec![vec![(1.0, 0.0), (1.0, 0.0)], vec![(1.0, 0.0), (-1.0, 0.0)]]);
    assert_eq!(res["tables"].as_array().unwrap().len(), 2);
    let header = std::fs::read_to_string(csv.join("S_0.csv")).unwrap();
    assert!(header.starts_with("multi_index,re,im,abs\n(0),"));
    assert!(csv.join("S_1.csv").exists());
}

#[test]
fn contiguity_suite_on_index_one_instance() {
    let out = gkz(&["verify", data("e1.json").to_str().unwrap(), "--suite", "contiguity", "--tol", "1e-7"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(
        check_names(&r),
        vec![("contiguity-beta".to_string(), true), ("contiguity-derivative".to_string(), true)]
    );
    assert!(r["results"]["suites"]["contiguity"]["beta_relations"].as_array().unwrap().len() == 1);
}

#[test]
fn full_suite_passes_on_reference_instances() {
    for name in ["e1.json", "e2.json", "e3.json"] {
        let out = gkz(&["verify", data(name).to_str().unwrap(), "--jobs", "2"]);
        let r = report(&out);
        assert_eq!(out.status.code(), Some(0), "{name}: {:?}", check_names(&r));
        assert_eq!(check_names(&r).len(), 9);
    }
}

#[test]
fn hankel_and_eval_agree() {
    let path = data("e2.json");
    let out = gkz(&["hankel", path.to_str().unwrap(), "--epsilon", "0.2"]);
    assert_eq!(out.status.code(), Some(0));
    let h = report(&out);
    let run = &h["results"]["identity"]["runs"][0];
    assert_eq!(run["epsilon"], "2.0000000000000001e-1");
    let out = gkz(&["eval", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let e = report(&out);
    let f = &e["results"]["evaluations"][0]["F"];
    let re: f64 = f["re"].as_str().unwrap().parse().unwrap();
    let pred: f64 = run["predicted"]["re"].as_str().unwrap().parse().unwrap();
    let factor = &h["results"]["identity"]["hankel_factor"];
    let (fr, fi): (f64, f64) = (
        factor["re"].as_str().unwrap().parse().unwrap(),
        factor["im"].as_str().unwrap().parse().unwrap(),
    );
    let im: f64 = f["im"].as_str().unwrap().parse().unwrap();
    assert!((fr * re - fi * im - pred).abs() < 1e-12 * pred.abs().max(1.0));
}

#[test]
fn eval_over_all_representatives() {
    let out = gkz(&["eval", data("e3.json").to_str().unwrap(), "--all-reps", "--jobs", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let evals = r["results"]["evaluations"].as_array().unwrap();
    assert_eq!(evals.len(), 4);
    assert!(evals.iter().all(|e| e["method"] == "quadrature"));
}

#[test]
fn continuation_outside_half_space() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_variant(dir.path(), "plus.json", r#""re": "-0.5", "im": "0.2""#, r#""re": "0.5", "im": "0.2""#);
    let out = gkz(&["eval", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["results"]["evaluations"][0]["method"], "continuation");
    assert_eq!(r["results"]["evaluations"][0]["status"], "continued");
    let out = gkz(&["verify", path.to_str().unwrap(), "--suite", "continuation"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn expansion_slopes_near_the_origin() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_variant(dir.path(), "small.json", r#""re": "-0.5", "im": "0"}"#, r#""re": "-0.05", "im": "0"}"#);
    let path = {
        let text = std::fs::read_to_string(&path).unwrap().replace(r#""im": "0.2""#, r#""im": "0""#);
        std::fs::write(&path, text).unwrap();
        path
    };
    let out = gkz(&["verify", path.to_str().unwrap(), "--suite", "expansion"]);
    let r = report(&out);
    assert_eq!(out.status.code(), Some(0), "{:?}", r["results"]);
    let out = gkz(&["expand", path.to_str().unwrap(), "--order", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["results"]["coefficients"].as_array().unwrap().len(), 4);
}

#[test]
fn deterministic_reports_are_byte_identical() {
    let path = data("e3.json");
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = gkz(&["basis", path.to_str().unwrap(), "--deterministic", "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        assert!(o.stdout.is_empty());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let text = std::fs::read_to_string(&a).unwrap();
    assert!(!text.contains("timings"));
    let keys: Vec<String> = serde_json::from_str::<Value>(&text).unwrap().as_object().unwrap().keys().cloned().collect();
    assert_eq!(keys, ["schema", "command", "status", "exit_code", "inputs", "results", "checks"]);
}

#[test]
fn parallel_and_serial_reports_agree() {
    let path = data("e3.json");
    let serial = gkz(&["eval", path.to_str().unwrap(), "--all-reps", "--deterministic"]);
    let parallel = gkz(&["eval", path.to_str().unwrap(), "--all-reps", "--jobs", "4"]);
    assert_eq!(report(&serial)["results"], report(&parallel)["results"]);
}

#[test]
fn problem_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["e1.json", "e2.json", "e3.json"] {
        let tp = load_problem(&data(name)).unwrap();
        let saved = dir.path().join(name);
        save_problem(&saved, &tp).unwrap();
        let back = load_problem(&saved).unwrap();
        assert_eq!(back, tp);
        let again = dir.path().join(format!("again-{name}"));
        save_problem(&again, &back).unwrap();
        assert_eq!(std::fs::read(&saved).unwrap(), std::fs::read(&again).unwrap());
        let file = ProblemFile::from_json(&std::fs::read_to_string(&saved).unwrap()).unwrap();
        assert_eq!(file.schema, "gkz-asym/1");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cases = [
        (write_variant(d, "zero.json", r#""re": "1", "im": "0", "arg""#, r#""re": "0", "im": "0", "arg""#), 2, "parse"),
        (write_variant(d, "frac.json", "[[1, 2]]", "[[1, 2.5]]"), 2, "parse"),
        (write_variant(d, "schema.json", "gkz-asym/1", "gkz-asym/2"), 2, "schema-version-mismatch"),
        (write_variant(d, "assume.json", "[[1, 2]]", "[[3, 2]]"), 4, "assumption-violation"),
        (
            write_variant(d, "levels.json", r#""sigma": [0],"#, r#""sigma": [0], "tolerances": {"rel_tol": "1e-30", "abs_tol": "1e-300", "max_levels": 6},"#),
            3,
            "non-convergence",
        ),
    ];
    for (path, code, kind) in cases {
        let out = gkz(&["eval", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(code), "{}", path.display());
        let r = report(&out);
        assert_eq!(r["status"], "error");
        assert_eq!(r["error"]["kind"], kind);
        assert_eq!(r["exit_code"], code);
    }
    let out = gkz(&["check", d.join("assume.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(report(&out)["error"]["diagnostics"]["ok"], false);
    let out = gkz(&["eval", data("e1.json").to_str().unwrap(), "--delta=-0.3"]);
    assert_eq!(out.status.code(), Some(4));
    let out = gkz(&["check", d.join("missing.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failed_check_exits_one() {
    let out = gkz(&["verify", data("e1.json").to_str().unwrap(), "--suite", "expansion"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["status"], "fail");
}
