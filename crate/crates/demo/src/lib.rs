//! Browser bindings: bodies in and out as the JSON body format.

use convexlab_core::bodies::{body_from_json, body_to_json, polar, translate};
use convexlab_core::linalg::to_vec;
use convexlab_core::mposition::{m_ellipsoid, MConfig};
use convexlab_core::randgeom::isotropic_constant;
use convexlab_core::santalo::{santalo_point, volume_product, CenterChoice, VolumeMethod};
use convexlab_core::zoo::{generate_zoo, Family, ZooSpec};
use convexlab_core::{ConvexBody, GeomError};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn err(e: GeomError) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn points(k: &ConvexBody) -> Vec<Vec<f64>> {
    k.polytope_points().iter().map(to_vec).collect()
}

fn pretty(v: Value) -> String {
    serde_json::to_string_pretty(&v).expect("json")
}

/// Volume, isotropic constant, Santaló point, volume product and the polar about the Santaló point.
pub fn analyze_body(k: &ConvexBody) -> Result<Value, GeomError> {
    let sp = santalo_point(k)?;
    let vp = volume_product(k, CenterChoice::Santalo, VolumeMethod::Exact)?;
    let p = polar(k, &sp.z)?;
    let shifted: Vec<Vec<f64>> = p.polytope_points().iter().map(|v| to_vec(&(v + &sp.z))).collect();
    Ok(json!({
        "n": k.dim(),
        "volume": k.volume(),
        "barycenter": to_vec(&k.barycenter()),
        "isotropic_constant": isotropic_constant(k)?,
        "santalo_point": to_vec(&sp.z),
        "polar_volume": vp.polar_volume,
        "s": vp.s,
        "s_ratio": vp.s_ratio,
        "n_s_root": vp.n_s_root,
        "mahler_value": vp.mahler_value,
        "points": points(k),
        "polar_points": shifted,
    }))
}

/// M-ellipsoid of the body recentred at its barycenter, reported in the original coordinates.
pub fn m_ellipsoid_body(k: &ConvexBody, seed: u64) -> Result<Value, GeomError> {
    let b = k.barycenter();
    let centered = translate(k, &-&b)?;
    let mut cfg = MConfig::default();
    cfg.klartag.seed = seed;
    cfg.covering.seed = seed;
    let cert = m_ellipsoid(&centered, "demo", &cfg)?;
    let e = &cert.ellipsoid;
    let boundary: Vec<Vec<f64>> = e.boundary_points(96).iter().map(|x| to_vec(&(x + &b))).collect();
    Ok(json!({
        "center": to_vec(&(e.center() + &b)),
        "shape": e.shape().row_iter().map(|r| r.iter().copied().collect::<Vec<f64>>()).collect::<Vec<_>>(),
        "beta_measured": cert.beta_measured,
        "covering": cert.covering,
        "entropy_ratio": cert.entropy_ratio,
        "boundary": boundary,
    }))
}

#[wasm_bindgen]
pub fn analyze(body_json: &str) -> Result<String, JsValue> {
    let k = body_from_json(body_json).map_err(err)?;
    analyze_body(&k).map(pretty).map_err(err)
}

#[wasm_bindgen]
pub fn mellipsoid(body_json: &str, seed: u32) -> Result<String, JsValue> {
    let k = body_from_json(body_json).map_err(err)?;
    m_ellipsoid_body(&k, seed as u64).map(pretty).map_err(err)
}

/// A zoo body such as `cube`, `simplex` or `symhull` in dimension `n`.
#[wasm_bindgen]
pub fn zoo_body(family: &str, n: usize, seed: u32) -> Result<String, JsValue> {
    let fam = Family::parse(family).ok_or_else(|| JsValue::from_str(&format!("unknown family {family}")))?;
    let spec = ZooSpec {
        families: vec![fam],
        ..ZooSpec::default_families(&[n], seed as u64)
    };
    let z = generate_zoo(&spec).map_err(err)?;
    Ok(body_to_json(&z[0].body))
}

#[cfg(test)]
mod tests {
    use super::*;
    use convexlab_core::zoo::{cube, simplex};

    #[test]
    fn square_analysis() {
        let v = analyze_body(&cube(2)).unwrap();
        assert_eq!(v["volume"], 4.0);
        assert!((v["s"].as_f64().unwrap() - 8.0).abs() < 1e-9);
        assert_eq!(v["polar_points"].as_array().unwrap().len(), 4);
    }

    #[test]
    fn off_centre_triangle_ellipsoid_follows_the_body() {
        let k = translate(&simplex(2), &convexlab_core::linalg::Vector::from_vec(vec![3.0, -1.0])).unwrap();
        let v = m_ellipsoid_body(&k, 1).unwrap();
        let c: Vec<f64> = serde_json::from_value(v["center"].clone()).unwrap();
        let b = k.barycenter();
        assert!((c[0] - b[0]).abs() < 1e-9 && (c[1] - b[1]).abs() < 1e-9);
    }

    #[test]
    fn zoo_bodies_round_trip() {
        let s = zoo_body("symhull", 2, 3).unwrap();
        let k = body_from_json(&s).unwrap();
        assert!(analyze_body(&k).unwrap()["s_ratio"].as_f64().unwrap() <= 1.0 + 1e-9);
    }
}
