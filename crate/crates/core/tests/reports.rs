use convexlab_core::bodies::{body_from_json, body_to_json};
use convexlab_core::report::Format;
use convexlab_core::suites::{run_suite, Suite, SuiteConfig};
use convexlab_core::zoo::{generate_zoo, Family, ZooSpec};

fn small() -> ZooSpec {
    ZooSpec {
        families: vec![Family::Cube, Family::Simplex, Family::Zonotope { m: Some(4) }],
        dims: vec![2, 3],
        seed: 5,
        centered: true,
    }
}

#[test]
fn written_reports_are_byte_identical() {
    let cfg = SuiteConfig::new(5).with_samples(4000);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for fmt in [Format::Csv, Format::Json] {
        let pa = run_suite(Suite::Volumes, &small(), &cfg).unwrap().write(a.path(), fmt).unwrap();
        let pb = run_suite(Suite::Volumes, &small(), &cfg).unwrap().write(b.path(), fmt).unwrap();
        assert_eq!(pa.len(), pb.len());
        for (x, y) in pa.iter().zip(&pb) {
            assert_eq!(x.file_name(), y.file_name());
            assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
        }
    }
    let names: Vec<String> = std::fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert!(names.contains(&"volumes.json".to_string()));
    assert!(names.contains(&"volumes_isotropic.csv".to_string()));
}

#[test]
fn json_mirrors_csv_rows() {
    let rep = run_suite(Suite::Volumes, &small(), &SuiteConfig::new(5).with_samples(4000)).unwrap();
    let j: serde_json::Value = serde_json::from_str(&rep.to_json()).unwrap();
    assert_eq!(j["seed"], 5);
    assert_eq!(j["version"], env!("CARGO_PKG_VERSION"));
    assert!(j.get("wall_time").is_none());
    let csv = rep.tables[0].to_csv();
    let first = csv.lines().nth(1).unwrap();
    let row = &j["tables"][0]["rows"][0];
    assert_eq!(first.split(',').next().unwrap(), row["body_id"].as_str().unwrap());
    let exact: f64 = first.split(',').nth(2).unwrap().parse().unwrap();
    assert_eq!(exact, row["exact"].as_f64().unwrap());
}

#[test]
fn zoo_bodies_survive_json() {
    for z in generate_zoo(&small()).unwrap() {
        let back = body_from_json(&body_to_json(&z.body)).unwrap();
        assert!((back.volume() - z.body.volume()).abs() < 1e-12 * z.body.volume());
    }
}

#[test]
fn klartag_suite_passes_on_small_zoo() {
    let rep = run_suite(Suite::Klartag, &small(), &SuiteConfig::new(5)).unwrap();
    assert!(rep.pass(), "{}", rep.to_csv());
    let names: Vec<&str> = rep.tables.iter().map(|t| t.name.as_str()).collect();
    assert_eq!(names, ["laplace", "ball_bodies", "klartag"]);
}
