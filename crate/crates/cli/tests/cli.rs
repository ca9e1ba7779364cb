use std::path::Path;
use std::process::{Command, Output};

fn convexlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_convexlab")).args(args).output().unwrap()
}

fn gen(dir: &Path, families: &str, dims: &str) {
    let out = convexlab(&["--dims", dims, "--families", families, "--out", dir.to_str().unwrap(), "zoo", "gen"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let head: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = head.iter().position(|c| *c == name).unwrap();
    lines.map(|l| l.split(',').nth(i).unwrap().to_string()).collect()
}

#[test]
fn zoo_gen_writes_loadable_bodies() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "cube,cross", "2,3");
    let zoo: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("zoo.json")).unwrap()).unwrap();
    assert_eq!(zoo.as_array().unwrap().len(), 4);
    let out = convexlab(&["vol", dir.path().join("bodies/cross_n3.json").to_str().unwrap()]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(column(&csv, "volume"), ["1.33333333333"]);
    assert_eq!(column(&csv, "polar_volume"), ["8"]);
}

#[test]
fn single_body_commands_succeed() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "simplex", "2");
    let body = dir.path().join("bodies/simplex_n2.json");
    let body = body.to_str().unwrap();
    let out_dir = dir.path().join("out");
    let out_dir = out_dir.to_str().unwrap();
    for cmd in ["isotropize", "santalo", "klartag", "mellipsoid"] {
        let out = convexlab(&["--out", out_dir, "--format", "json", cmd, body]);
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        let rep: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join(format!("out/{cmd}.json"))).unwrap()).unwrap();
        assert_eq!(rep["suite"], cmd);
    }
    for extra in ["simplex_n2_isotropic.json", "simplex_n2_T.json", "simplex_n2_certificate.json"] {
        assert!(dir.path().join("out").join(extra).exists(), "{extra}");
    }
    let cert: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/simplex_n2_certificate.json")).unwrap()).unwrap();
    for key in ["body_id", "ellipsoid", "beta_measured", "covering"] {
        assert!(cert.get(key).is_some(), "{key}");
    }
}

#[test]
fn isotropic_image_has_the_same_constant() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "simplex", "3");
    let out_dir = dir.path().join("out");
    let first = convexlab(&["--out", out_dir.to_str().unwrap(), "isotropize", dir.path().join("bodies/simplex_n3.json").to_str().unwrap()]);
    assert!(first.status.success());
    let again = convexlab(&["isotropize", out_dir.join("simplex_n3_isotropic.json").to_str().unwrap()]);
    let csv = String::from_utf8(again.stdout).unwrap();
    let l: f64 = column(&csv, "L")[0].parse().unwrap();
    let det: f64 = column(&csv, "det")[0].parse().unwrap();
    let closed = (6f64.powf(2.0 / 3.0) / (4f64.powf(4.0 / 3.0) * 5.0)).sqrt();
    assert!((l - closed).abs() < 1e-9, "{l}");
    assert!((det - 1.0).abs() < 1e-9);
}

#[test]
fn verify_is_deterministic_and_exits_zero_on_pass() {
    let args = ["--dims", "2,3", "--families", "cube,simplex", "--seed", "5", "--samples", "20000", "verify", "volumes"];
    let a = convexlab(&args);
    let b = convexlab(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let csv = String::from_utf8(a.stdout).unwrap();
    assert!(csv.contains("table=volumes") && csv.contains("table=isotropic"));
}

#[test]
fn failing_rows_give_a_nonzero_exit() {
    // square and cross have n s^{1/n} = 4 sqrt 2 < 8
    let out = convexlab(&["--dims", "2", "--families", "cube", "mahler-scan"]);
    assert_eq!(out.status.code(), Some(1));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("cube_n2,") && l.ends_with(",false")));
}

#[test]
fn bad_input_is_an_error() {
    assert_eq!(convexlab(&["verify", "nope"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("broken.json");
    std::fs::write(&p, "{\"type\": \"vpolytope\", \"vertices\": [[0, 0], [1, 0]]}").unwrap();
    let out = convexlab(&["vol", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}
