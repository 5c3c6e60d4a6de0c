use std::path::PathBuf;
use std::process::{Command, Output};

fn freelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freelab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("freelab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write(name: &str, text: &str) -> String {
    let p = tmp(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const MODEL: &str = r#"{
  "factors": [{"dim": 2, "xi": [[1, 0], [0, 0]]}, {"dim": 2, "xi": [[0.6, 0], [0, 0.8]]}],
  "depth": 4,
  "assignment": {
    "a1": [[[0, 0], [1, 0]], [[1, 0], [0, 0]]],
    "b1": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]]
  }
}"#;

#[test]
fn fock_moments_csv() {
    let o = freelab(&["fock", "moments", "--k", "3", "--depth", "8"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "order,moment,reference,error");
    assert_eq!(lines.len(), 8);
    assert!(lines[7].starts_with("6,5.0,5.0,"));
}

#[test]
fn moment_of_a_mixed_word() {
    let model = write("model.json", MODEL);
    let o = freelab(&["freeprod", "moment", "--model", &model, "--poly", "a1.b1.a1"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    // ⟨a1 a1⟩ ⟨b1⟩ = 1 · (0.36 − 0.64)
    let re = v["value"][0].as_f64().unwrap();
    assert!((re + 0.28).abs() < 1e-12, "{re}");
}

#[test]
fn norm_and_space_dump() {
    let model = write("model2.json", MODEL);
    let o = freelab(&["norm", "--poly", "a1 + a1'", "--model", &model]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["value"].as_f64().unwrap() - 2.0).abs() < 1e-9);

    let o = freelab(&["space", "dump", "--model", &model, "--depth", "2"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["dim"], 5);
    assert_eq!(v["words"].as_array().unwrap().len(), 5);
}

#[test]
fn exactness_run_writes_csv_and_passes() {
    let out = tmp("exactness.csv");
    let o = freelab(&["exactness", "run", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.starts_with("name,value,bound,threshold,depth,margin,pass"));
    assert!(!text.contains(",false"));
}

#[test]
fn converge_reports_are_byte_identical() {
    let (a, b) = (tmp("t31a.json"), tmp("t31b.json"));
    let plot = tmp("plot.csv");
    for p in [&a, &b] {
        let o = freelab(&["converge", "t31", "--out", p.to_str().unwrap(), "--emit-plot", plot.to_str().unwrap()]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(std::fs::read_to_string(plot).unwrap().starts_with("poly,k,epsilon,gap\n"));
}

#[test]
fn extension_from_a_case_file() {
    let case = write(
        "case.json",
        r#"{"basis": [[[[1,0],[0,0]],[[0,0],[0,0]]], [[[0,0],[0,0]],[[0,0],[1,0]]]],
            "images": [[[[1,0],[0,0]],[[0,0],[0,0]]], [[[0,0],[0,0]],[[0,0],[1,0]]]],
            "xi": [[1,0],[0,0]], "eta": [[1,0],[0,0]]}"#,
    );
    let o = freelab(&["cpmaps", "extend", "--input", &case]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["choi"].as_array().unwrap().len(), 4);
    assert!(v["report"]["restriction_residual"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn pimsner_fejer_table() {
    let o = freelab(&["pimsner", "fejer", "--op", "S*", "--n", "3"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[0]["band"], -1);
    assert_eq!(v[0]["weight"], 0.75);
    assert_eq!(v[0]["residual"], 0.0);
}

#[test]
fn bad_input_exits_with_error() {
    let bad = write("bad.json", r#"{"factors": [], "depth": 2, "unknown": 1}"#);
    let o = freelab(&["space", "dump", "--model", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    let o = freelab(&["norm", "--poly", "a1 +", "--model", &bad]);
    assert_eq!(o.status.code(), Some(2));
}
