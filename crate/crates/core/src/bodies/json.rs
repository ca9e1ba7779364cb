use serde::{Deserialize, Serialize};

use super::{AffineMap, BodyRep, ConvexBody, Ellipsoid, HPolytope, VPolytope};
use crate::error::{GeomError, Result};
use crate::linalg::{matrix_from_rows, matrix_rows, to_vec, Matrix, Vector};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum BodyJson {
    Hpolytope {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
    Vpolytope {
        vertices: Vec<Vec<f64>>,
    },
    Ellipsoid {
        center: Vec<f64>,
        shape: Vec<Vec<f64>>,
    },
}

fn square(rows: &[Vec<f64>], what: &str) -> Result<Matrix> {
    matrix_from_rows(rows).ok_or_else(|| GeomError::Parse(format!("ragged {what}")))
}

impl TryFrom<BodyJson> for ConvexBody {
    type Error = GeomError;

    fn try_from(j: BodyJson) -> Result<Self> {
        match j {
            BodyJson::Hpolytope { a, b } => {
                let a = square(&a, "matrix A")?;
                Ok(HPolytope::new(a, Vector::from_vec(b))?.into())
            }
            BodyJson::Vpolytope { vertices } => {
                Ok(VPolytope::new(vertices.into_iter().map(Vector::from_vec).collect())?.into())
            }
            BodyJson::Ellipsoid { center, shape } => {
                let m = square(&shape, "shape")?;
                Ok(Ellipsoid::new(Vector::from_vec(center), m)?.into())
            }
        }
    }
}

impl From<&ConvexBody> for BodyJson {
    fn from(k: &ConvexBody) -> Self {
        match k.rep() {
            BodyRep::H(h) => BodyJson::Hpolytope {
                a: matrix_rows(h.a()),
                b: to_vec(h.b()),
            },
            BodyRep::V(v) => BodyJson::Vpolytope {
                vertices: v.vertices().iter().map(to_vec).collect(),
            },
            BodyRep::Ellipsoid(e) => BodyJson::Ellipsoid {
                center: to_vec(e.center()),
                shape: matrix_rows(e.shape()),
            },
        }
    }
}

impl Serialize for ConvexBody {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BodyJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ConvexBody {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = BodyJson::deserialize(d)?;
        ConvexBody::try_from(j).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct EllipsoidJson {
    center: Vec<f64>,
    shape: Vec<Vec<f64>>,
}

impl Serialize for Ellipsoid {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        EllipsoidJson {
            center: to_vec(self.center()),
            shape: matrix_rows(self.shape()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Ellipsoid {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = EllipsoidJson::deserialize(d)?;
        let m = square(&j.shape, "shape").map_err(serde::de::Error::custom)?;
        Ellipsoid::new(Vector::from_vec(j.center), m).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct AffineJson {
    linear: Vec<Vec<f64>>,
    shift: Vec<f64>,
}

impl Serialize for AffineMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        AffineJson {
            linear: matrix_rows(self.linear()),
            shift: to_vec(self.shift()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for AffineMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = AffineJson::deserialize(d)?;
        let m = square(&j.linear, "linear part").map_err(serde::de::Error::custom)?;
        AffineMap::new(m, Vector::from_vec(j.shift)).map_err(serde::de::Error::custom)
    }
}

pub fn body_to_json(k: &ConvexBody) -> String {
    serde_json::to_string(k).expect("bodies always serialize")
}

pub fn body_from_json(s: &str) -> Result<ConvexBody> {
    let j: BodyJson = serde_json::from_str(s).map_err(|e| GeomError::Parse(e.to_string()))?;
    ConvexBody::try_from(j)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_three_kinds() {
        let h = body_from_json(r#"{"type":"hpolytope","A":[[1,0],[-1,0],[0,1],[0,-1]],"b":[1,1,1,1]}"#).unwrap();
        assert!((h.volume() - 4.0).abs() < 1e-12);
        let v = body_from_json(r#"{"type":"vpolytope","vertices":[[0,0],[1,0],[0,1]]}"#).unwrap();
        assert!((v.volume() - 0.5).abs() < 1e-15);
        let e = body_from_json(r#"{"type":"ellipsoid","center":[0,0],"shape":[[1,0],[0,1]]}"#).unwrap();
        assert!((e.volume() - std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn bad_input_is_a_parse_error() {
        assert!(matches!(body_from_json("{\"type\":\"cone\"}"), Err(GeomError::Parse(_))));
        assert!(matches!(
            body_from_json(r#"{"type":"ellipsoid","center":[0,0],"shape":[[1,2],[2,1]]}"#),
            Err(GeomError::InvalidBody(_))
        ));
    }

    #[test]
    fn awkward_doubles_round_trip() {
        let s = r#"{"type":"vpolytope","vertices":[[0.1,0.2],[1e-17,0.30000000000000004],[-0.7071067811865476,3.141592653589793]]}"#;
        let k = body_from_json(s).unwrap();
        let out = body_to_json(&k);
        let k2 = body_from_json(&out).unwrap();
        assert_eq!(k, k2);
        assert_eq!(out, body_to_json(&k2));
    }
}
