use std::process::{Command, Output};

use serde_json::Value;

fn dirgeom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dirgeom"))
        .args(args)
        .output()
        .expect("run dirgeom")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let o = dirgeom(&all);
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{args:?}: {e}: {}", stdout(&o)))
}

#[test]
fn directions_of_cube_graph() {
    let o = dirgeom(&["directions", "-p", "5", "--points", "0,0 1,1 2,3 3,2 4,4"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&["directions", "-p", "5", "--points", "0,0 1,1 2,3 3,2 4,4"]);
    assert_eq!(v["d"], 4);
    assert_eq!(v["is_line"], false);
    assert!(stdout(&o).lines().any(|l| l == "d = 4"));
}

#[test]
fn directions_of_line_and_single_point() {
    let v = json(&["directions", "-p", "5", "--points", "0,1 1,1 2,1 3,1 4,1"]);
    assert_eq!(v["d"], 1);
    assert_eq!(v["is_line"], true);
    assert_eq!(dirgeom(&["directions", "-p", "5", "--points", "1,1"]).status.code(), Some(2));
    assert_eq!(dirgeom(&["directions", "-p", "5", "--points", "1,x"]).status.code(), Some(2));
    assert_eq!(dirgeom(&["directions", "-p", "9", "--points", "0,0 1,1"]).status.code(), Some(2));
}

#[test]
fn directions_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("set.txt");
    std::fs::write(&path, "0,0\n1,1\n2,3\n3,2\n4,4\n").unwrap();
    let v = json(&["directions", "-p", "5", "--file", path.to_str().unwrap()]);
    assert_eq!(v["d"], 4);
    let missing = dir.path().join("missing.txt");
    let o = dirgeom(&["directions", "-p", "5", "--file", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn interpolate_examples() {
    let v = json(&["interpolate", "-p", "5", "--values", "1,2,0,0,2"]);
    assert_eq!(v["coefficients"], "[1,0,1]");
    assert_eq!(v["degree"], 2);
    assert_eq!(v["lifted_value_sum"], 5);
    let v = json(&["interpolate", "-p", "5", "--values", "0,0,0,0,0"]);
    assert_eq!(v["degree"], Value::Null);
    let v = json(&["interpolate", "-p", "5", "--values", "0,1,2,3,4"]);
    assert_eq!(v["coefficients"], "[0,1]");
    assert_eq!(v["degree"], 1);
    assert_eq!(dirgeom(&["interpolate", "-p", "5", "--values", "1,2"]).status.code(), Some(2));
}

#[test]
fn verify_main_exhaustive_p5() {
    let o = dirgeom(&["verify", "main", "-p", "5", "--exhaustive"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&["verify", "main", "-p", "5", "--exhaustive"]);
    assert_eq!(v["scanned"], 3125);
    assert_eq!(v["failed"], 0);
}

#[test]
fn verify_single_instances() {
    let o = dirgeom(&["verify", "redei", "-p", "5", "--points", "0,0 1,1 2,3 3,2 4,4"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("Rédei–Megyesi bound (p+3)/2"));
    let v = json(&["verify", "main", "-p", "5", "--poly", "[1,0,1]"]);
    assert_eq!(v["passed"], true);
    let v = json(&["verify", "proposition", "-p", "5", "--values", "1,2,0,0,2"]);
    assert_eq!(v["passed"], true);
}

#[test]
fn counterexample_exits_one() {
    // two parallel lines at k = 2, under the exploratory notion of special
    let o = dirgeom(&["verify", "kiss_somlai", "-p", "3", "--points", "0,0 0,1 0,2 1,0 1,1 1,2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn guards_exit_three() {
    assert_eq!(dirgeom(&["classify", "polys", "-p", "17"]).status.code(), Some(3));
    assert_eq!(dirgeom(&["verify", "main", "-p", "11", "--exhaustive"]).status.code(), Some(3));
    assert_eq!(dirgeom(&["verify", "redei", "-p", "11", "--exhaustive"]).status.code(), Some(3));
}

#[test]
fn bad_arguments_exit_two() {
    assert_eq!(dirgeom(&["verify", "nonsense", "-p", "5", "--exhaustive"]).status.code(), Some(2));
    assert_eq!(dirgeom(&["interpolate", "-p", "4", "--values", "0,0,0,0"]).status.code(), Some(2));
}

#[test]
fn classify_contains_reference_orbits() {
    let v = json(&["classify", "polys", "-p", "5"]);
    assert_eq!(v["reference_present"], true);
    let classes = v["classes"].as_array().unwrap();
    // x^2 + 1 at x -> 4x + 2 is x^2 + x, the least member of its orbit
    assert!(classes.iter().any(|c| c["canonical"] == "[0,1,1]"));

    let v = json(&["classify", "sets", "-p", "5"]);
    assert_eq!(v["all_reverified"], true);
    assert_eq!(v["orbit_count"], 1);
    assert_eq!(v["extremal"], 1500);
}

#[test]
fn product_bound() {
    let v = json(&["product", "-p", "7", "--a", "0,1", "--b", "0,1,2"]);
    assert_eq!(v["passed"], true);
    let o = dirgeom(&["product", "-p", "7", "--a", "", "--b", "0,1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn gacs_sampled_is_evidence() {
    let o = dirgeom(&["verify", "gacs", "-p", "19", "--sample", "20000", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("evidence"));
}

#[test]
fn seeded_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    for (path, workers) in [(&a, "1"), (&b, "3")] {
        let o = dirgeom(&[
            "verify", "main", "-p", "13", "--sample", "5000", "--workers", workers, "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let census = |extra: &[&str]| {
        let mut args = vec!["census", "-p", "7", "--sample", "3000", "--format", "csv"];
        args.extend(extra);
        dirgeom(&args).stdout
    };
    let base = census(&[]);
    assert!(String::from_utf8_lossy(&base).starts_with("p,k,d,count,exemplar"));
    assert_eq!(base, census(&[]));
    assert_eq!(base, census(&["--workers", "2", "--chunks", "5"]));
    assert_ne!(base, census(&["--seed", "1"]));
}
