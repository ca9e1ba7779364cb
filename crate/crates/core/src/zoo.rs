//! Seeded families of test bodies.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bodies::{translate, ConvexBody, HPolytope, VPolytope};
use crate::error::{GeomError, Result};
use crate::linalg::{Matrix, Vector};
use crate::randgeom::{mix, substream};

/// Redraws allowed before giving up on a degenerate sample.
const MAX_ATTEMPTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Cube,
    CrossPolytope,
    Simplex,
    /// `conv(±p_1, ..., ±p_k)` for Gaussian points; `k` defaults to `n + 3`.
    RandomSymmetricHull { k: Option<usize> },
    /// Sum of `m` random centred segments; `m` defaults to `n + 2`.
    Zonotope { m: Option<usize> },
    /// `{x : <a_i, x> <= 1}` for `m` random unit normals; `m` defaults to `3n`.
    RandomHpoly { m: Option<usize> },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Cube => "cube",
            Family::CrossPolytope => "cross",
            Family::Simplex => "simplex",
            Family::RandomSymmetricHull { .. } => "symhull",
            Family::Zonotope { .. } => "zonotope",
            Family::RandomHpoly { .. } => "hpoly",
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(
            self,
            Family::RandomSymmetricHull { .. } | Family::Zonotope { .. } | Family::RandomHpoly { .. }
        )
    }

    pub fn is_symmetric(&self) -> bool {
        !matches!(self, Family::Simplex | Family::RandomHpoly { .. })
    }

    pub fn parse(s: &str) -> Option<Family> {
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a, b.parse().ok()),
            None => (s, None),
        };
        Some(match name {
            "cube" => Family::Cube,
            "cross" | "cross_polytope" => Family::CrossPolytope,
            "simplex" => Family::Simplex,
            "symhull" | "random_symmetric_hull" => Family::RandomSymmetricHull { k: arg },
            "zonotope" => Family::Zonotope { m: arg },
            "hpoly" | "random_hpoly" => Family::RandomHpoly { m: arg },
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZooSpec {
    /// Repeated entries give independent draws of a random family.
    pub families: Vec<Family>,
    pub dims: Vec<usize>,
    pub seed: u64,
    /// Translate asymmetric bodies to their barycenter.
    #[serde(default = "yes")]
    pub centered: bool,
}

fn yes() -> bool {
    true
}

impl ZooSpec {
    /// Cube, cross-polytope, simplex, three symmetric hulls and two zonotopes in `n = 2..5`.
    pub fn default_zoo(seed: u64) -> Self {
        Self::default_families(&[2, 3, 4, 5], seed)
    }

    pub fn default_families(dims: &[usize], seed: u64) -> Self {
        let h = Family::RandomSymmetricHull { k: None };
        let z = Family::Zonotope { m: None };
        ZooSpec {
            families: vec![Family::Cube, Family::CrossPolytope, Family::Simplex, h, h, h, z, z],
            dims: dims.to_vec(),
            seed,
            centered: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ZooBody {
    pub id: String,
    pub family: Family,
    pub n: usize,
    /// Occurrence of this family in the spec.
    pub index: usize,
    pub body: ConvexBody,
    /// Degenerate draws discarded before this one.
    pub retries: usize,
}

/// Bodies ordered by family entry, then dimension.
pub fn generate_zoo(spec: &ZooSpec) -> Result<Vec<ZooBody>> {
    let mut out = Vec::new();
    for (pos, fam) in spec.families.iter().enumerate() {
        let index = spec.families[..pos].iter().filter(|f| f.name() == fam.name()).count();
        for &n in &spec.dims {
            if !(2..=8).contains(&n) {
                return Err(GeomError::TooHighDimensional { dim: n });
            }
            let (mut body, retries) = generate(*fam, n, spec.seed, index)?;
            if spec.centered && !fam.is_symmetric() {
                body = translate(&body, &-body.barycenter())?;
            }
            let id = if fam.is_random() || index > 0 {
                format!("{}{}_n{}", fam.name(), index, n)
            } else {
                format!("{}_n{}", fam.name(), n)
            };
            out.push(ZooBody {
                id,
                family: *fam,
                n,
                index,
                body,
                retries,
            });
        }
    }
    Ok(out)
}

fn generate(fam: Family, n: usize, seed: u64, index: usize) -> Result<(ConvexBody, usize)> {
    match fam {
        Family::Cube => Ok((cube(n), 0)),
        Family::CrossPolytope => Ok((cross_polytope(n), 0)),
        Family::Simplex => Ok((simplex(n), 0)),
        _ => {
            let code = match fam {
                Family::RandomSymmetricHull { .. } => 1,
                Family::Zonotope { .. } => 2,
                _ => 3,
            };
            let tag = mix(mix(seed, code * 1000 + index as u64), n as u64);
            for attempt in 0..MAX_ATTEMPTS {
                let mut rng = substream(tag, attempt as u64);
                let r = match fam {
                    Family::RandomSymmetricHull { k } => symmetric_hull(&mut rng, n, k.unwrap_or(n + 3)),
                    Family::Zonotope { m } => random_zonotope(&mut rng, n, m.unwrap_or(n + 2)),
                    Family::RandomHpoly { m } => random_hpoly(&mut rng, n, m.unwrap_or(3 * n)),
                    _ => unreachable!(),
                };
                if let Ok(b) = r {
                    return Ok((b, attempt));
                }
            }
            Err(GeomError::DegenerateSample { attempts: MAX_ATTEMPTS })
        }
    }
}

/// `[-1, 1]^n`.
pub fn cube(n: usize) -> ConvexBody {
    let mut a = Matrix::zeros(2 * n, n);
    for i in 0..n {
        a[(2 * i, i)] = 1.0;
        a[(2 * i + 1, i)] = -1.0;
    }
    ConvexBody::hpolytope(a, Vector::from_element(2 * n, 1.0)).expect("cube")
}

/// `conv(±e_i)`.
pub fn cross_polytope(n: usize) -> ConvexBody {
    let mut pts = Vec::with_capacity(2 * n);
    for i in 0..n {
        let mut e = Vector::zeros(n);
        e[i] = 1.0;
        pts.push(e.clone());
        pts.push(-e);
    }
    ConvexBody::vpolytope(pts).expect("cross-polytope")
}

/// `conv(0, e_1, ..., e_n)`.
pub fn simplex(n: usize) -> ConvexBody {
    let mut pts = vec![Vector::zeros(n)];
    for i in 0..n {
        let mut e = Vector::zeros(n);
        e[i] = 1.0;
        pts.push(e);
    }
    ConvexBody::vpolytope(pts).expect("simplex")
}

fn gaussian<R: Rng>(rng: &mut R, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

fn symmetric_hull<R: Rng>(rng: &mut R, n: usize, k: usize) -> Result<ConvexBody> {
    let mut pts = Vec::with_capacity(2 * k);
    for _ in 0..k {
        let p = gaussian(rng, n);
        pts.push(-&p);
        pts.push(p);
    }
    Ok(VPolytope::new(pts)?.into())
}

/// Minkowski sum of the segments `[-s_i, s_i]`.
pub fn zonotope(segments: &[Vector]) -> Result<ConvexBody> {
    let n = segments.first().map_or(0, |s| s.len());
    let mut pts = vec![Vector::zeros(n)];
    for s in segments {
        let next: Vec<Vector> = pts.iter().flat_map(|p| [p + s, p - s]).collect();
        pts = match VPolytope::new(next.clone()) {
            Ok(v) => v.vertices().to_vec(),
            // still lower dimensional: keep every point
            Err(GeomError::DegenerateBody(_)) => next,
            Err(e) => return Err(e),
        };
    }
    Ok(VPolytope::new(pts)?.into())
}

fn random_zonotope<R: Rng>(rng: &mut R, n: usize, m: usize) -> Result<ConvexBody> {
    let segs: Vec<Vector> = (0..m).map(|_| gaussian(rng, n) * 0.5).collect();
    zonotope(&segs)
}

fn random_hpoly<R: Rng>(rng: &mut R, n: usize, m: usize) -> Result<ConvexBody> {
    let mut a = Matrix::zeros(m, n);
    for i in 0..m {
        let g = gaussian(rng, n);
        let g = &g / g.norm();
        a.set_row(i, &g.transpose());
    }
    Ok(HPolytope::new(a, Vector::from_element(m, 1.0))?.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_spec() {
        let spec = ZooSpec {
            families: vec![Family::Cube],
            dims: vec![3],
            seed: 0,
            centered: true,
        };
        let z = generate_zoo(&spec).unwrap();
        assert_eq!(z.len(), 1);
        assert_eq!(z[0].id, "cube_n3");
        assert!((z[0].body.volume() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_segments_make_a_rectangle() {
        let z = zonotope(&[Vector::from_vec(vec![2.0, 0.0]), Vector::from_vec(vec![0.0, 0.5])]).unwrap();
        assert_eq!(z.vertices().unwrap().len(), 4);
        assert!((z.volume() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn default_zoo_is_deterministic_and_symmetric_where_promised() {
        let spec = ZooSpec::default_families(&[2, 3], 11);
        let a = generate_zoo(&spec).unwrap();
        let b = generate_zoo(&spec).unwrap();
        assert_eq!(a.len(), 16);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.id, y.id);
            assert_eq!(x.body, y.body);
            if x.family.is_symmetric() {
                assert!(x.body.is_symmetric(1e-9), "{}", x.id);
            }
            assert!(x.body.barycenter().amax() < 1e-12, "{}", x.id);
        }
        let ids: std::collections::BTreeSet<_> = a.iter().map(|z| z.id.clone()).collect();
        assert_eq!(ids.len(), a.len());
    }

    #[test]
    fn parse_family_names() {
        assert_eq!(Family::parse("zonotope:5"), Some(Family::Zonotope { m: Some(5) }));
        assert_eq!(Family::parse("cross"), Some(Family::CrossPolytope));
        assert_eq!(Family::parse("blob"), None);
    }
}
