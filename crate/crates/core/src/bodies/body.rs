use std::sync::OnceLock;

use super::{Ellipsoid, HPolytope, PolytopeData, VPolytope};
use crate::error::{GeomError, Result};
use crate::linalg::{Matrix, Vector};

/// Relative tolerance used by membership tests.
pub const CONTAINS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum BodyRep {
    H(HPolytope),
    V(VPolytope),
    Ellipsoid(Ellipsoid),
}

/// Volume, barycenter and covariance of the uniform measure, computed exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactMoments {
    pub volume: f64,
    pub barycenter: Vector,
    pub covariance: Matrix,
}

#[derive(Debug, Clone)]
pub struct ConvexBody {
    rep: BodyRep,
    moments: OnceLock<ExactMoments>,
}

impl PartialEq for ConvexBody {
    fn eq(&self, other: &Self) -> bool {
        self.rep == other.rep
    }
}

impl From<HPolytope> for ConvexBody {
    fn from(p: HPolytope) -> Self {
        Self::from_rep(BodyRep::H(p))
    }
}

impl From<VPolytope> for ConvexBody {
    fn from(p: VPolytope) -> Self {
        Self::from_rep(BodyRep::V(p))
    }
}

impl From<Ellipsoid> for ConvexBody {
    fn from(e: Ellipsoid) -> Self {
        Self::from_rep(BodyRep::Ellipsoid(e))
    }
}

impl ConvexBody {
    pub fn from_rep(rep: BodyRep) -> Self {
        ConvexBody {
            rep,
            moments: OnceLock::new(),
        }
    }

    pub fn hpolytope(a: Matrix, b: Vector) -> Result<Self> {
        Ok(HPolytope::new(a, b)?.into())
    }

    pub fn vpolytope(points: Vec<Vector>) -> Result<Self> {
        Ok(VPolytope::new(points)?.into())
    }

    pub fn ellipsoid(center: Vector, shape: Matrix) -> Result<Self> {
        Ok(Ellipsoid::new(center, shape)?.into())
    }

    /// Euclidean ball of radius `r` centered at the origin.
    pub fn ball(n: usize, r: f64) -> Result<Self> {
        Ok(Ellipsoid::ball(Vector::zeros(n), r)?.into())
    }

    pub fn rep(&self) -> &BodyRep {
        &self.rep
    }

    pub fn dim(&self) -> usize {
        match &self.rep {
            BodyRep::H(p) => p.dim(),
            BodyRep::V(p) => p.dim(),
            BodyRep::Ellipsoid(e) => e.dim(),
        }
    }

    pub fn is_polytope(&self) -> bool {
        !matches!(self.rep, BodyRep::Ellipsoid(_))
    }

    pub fn polytope_data(&self) -> Option<&PolytopeData> {
        match &self.rep {
            BodyRep::H(p) => Some(p.data()),
            BodyRep::V(p) => Some(p.data()),
            BodyRep::Ellipsoid(_) => None,
        }
    }

    pub fn as_ellipsoid(&self) -> Option<&Ellipsoid> {
        match &self.rep {
            BodyRep::Ellipsoid(e) => Some(e),
            _ => None,
        }
    }

    pub fn vertices(&self) -> Result<&[Vector]> {
        self.polytope_data()
            .map(|d| d.vertices.as_slice())
            .ok_or(GeomError::NonPolytope)
    }

    /// Vertices of a polytope, or a fine boundary sample of an ellipsoid.
    pub fn polytope_points(&self) -> Vec<Vector> {
        match &self.rep {
            BodyRep::Ellipsoid(e) => e.boundary_points(Ellipsoid::polytope_resolution(e.dim())),
            _ => self.vertices().expect("polytope").to_vec(),
        }
    }

    pub fn support(&self, u: &Vector) -> f64 {
        match &self.rep {
            BodyRep::Ellipsoid(e) => e.support(u),
            _ => self.polytope_data().expect("polytope").support(u),
        }
    }

    /// Width-normalized size used to scale tolerances.
    pub fn scale(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut e = Vector::zeros(n);
                e[i] = 1.0;
                self.support(&e).abs().max(self.support(&-e).abs())
            })
            .fold(0.0, f64::max)
            .max(1e-300)
    }

    pub fn contains(&self, x: &Vector) -> bool {
        self.contains_tol(x, CONTAINS_TOL)
    }

    pub fn contains_tol(&self, x: &Vector, tol: f64) -> bool {
        match &self.rep {
            BodyRep::Ellipsoid(e) => e.quad(x) <= 1.0 + tol,
            _ => {
                let d = self.polytope_data().expect("polytope");
                d.violation(x) <= tol * self.scale()
            }
        }
    }

    /// Minimum over directions of `h_K(u) - <x,u>`: positive iff `x` is interior.
    pub fn margin(&self, x: &Vector) -> f64 {
        match &self.rep {
            BodyRep::Ellipsoid(e) => {
                let q = e.quad(x).max(0.0).sqrt();
                let eig = e.inv_shape().clone().symmetric_eigen();
                let rmin = eig.eigenvalues.min().max(0.0).sqrt();
                (1.0 - q) * rmin
            }
            _ => -self.polytope_data().expect("polytope").violation(x),
        }
    }

    pub fn interior_point(&self) -> Vector {
        match &self.rep {
            BodyRep::Ellipsoid(e) => e.center().clone(),
            _ => self.polytope_data().expect("polytope").interior.clone(),
        }
    }

    /// `sup { r : r θ ∈ K }` for a body containing the origin in its interior.
    pub fn radial(&self, theta: &Vector) -> Result<f64> {
        let g = self.gauge(theta)?;
        if g <= 0.0 {
            return Err(GeomError::UnboundedResult { margin: g });
        }
        Ok(1.0 / g)
    }

    /// Minkowski functional about the origin.
    pub fn gauge(&self, x: &Vector) -> Result<f64> {
        let zero = Vector::zeros(self.dim());
        let margin = self.margin(&zero);
        if margin <= 0.0 {
            return Err(GeomError::PointNotInterior { margin });
        }
        Ok(match &self.rep {
            BodyRep::Ellipsoid(e) => {
                // smallest s > 0 with (x/s - c)^T M (x/s - c) <= 1
                let m = e.shape();
                let c = e.center();
                let a = x.dot(&(m * x));
                let b = x.dot(&(m * c));
                let cc = c.dot(&(m * c)) - 1.0;
                // cc s^2 - 2 b s + a = 0 with cc < 0
                let disc = (b * b - a * cc).max(0.0);
                let s = (disc.sqrt() - b) / -cc;
                s.max(0.0)
            }
            _ => {
                let d = self.polytope_data().expect("polytope");
                d.normals
                    .iter()
                    .zip(&d.offsets)
                    .map(|(a, b)| a.dot(x) / b)
                    .fold(0.0, f64::max)
            }
        })
    }

    pub fn bounding_box(&self) -> (Vector, Vector) {
        let n = self.dim();
        let mut lo = Vector::zeros(n);
        let mut hi = Vector::zeros(n);
        for i in 0..n {
            let mut e = Vector::zeros(n);
            e[i] = 1.0;
            hi[i] = self.support(&e);
            lo[i] = -self.support(&-e);
        }
        (lo, hi)
    }

    pub fn exact_moments(&self) -> &ExactMoments {
        self.moments.get_or_init(|| match &self.rep {
            BodyRep::Ellipsoid(e) => {
                let n = e.dim();
                ExactMoments {
                    volume: e.volume(),
                    barycenter: e.center().clone(),
                    covariance: e.inv_shape() / (n as f64 + 2.0),
                }
            }
            _ => polytope_moments(self.polytope_data().expect("polytope")),
        })
    }

    pub fn volume(&self) -> f64 {
        match &self.rep {
            BodyRep::Ellipsoid(e) => e.volume(),
            _ => self.polytope_data().expect("polytope").volume,
        }
    }

    pub fn barycenter(&self) -> Vector {
        self.exact_moments().barycenter.clone()
    }

    /// Support symmetric about the origin on a direction grid, relative tolerance `tol`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let n = self.dim();
        let scale = self.scale();
        let dirs = crate::linalg::sphere_directions(n, 50 * n);
        let check = dirs
            .iter()
            .all(|u| (self.support(u) - self.support(&-u)).abs() <= tol * scale);
        if let Some(d) = self.polytope_data() {
            check
                && d
                    .vertices
                    .iter()
                    .all(|v| self.contains_tol(&-v, tol))
        } else {
            check
        }
    }
}

/// Exact degree-two moments of a polytope from its cone decomposition.
pub fn polytope_moments(d: &PolytopeData) -> ExactMoments {
    let n = d.dim;
    let mut vol = 0.0;
    let mut first = Vector::zeros(n);
    let mut second = Matrix::zeros(n, n);
    let k = (n as f64 + 1.0) * (n as f64 + 2.0);
    for (ci, v) in d.cones() {
        if v == 0.0 {
            continue;
        }
        let mut sum = Vector::zeros(n);
        let mut outer = Matrix::zeros(n, n);
        for &p in &d.cells[ci] {
            let w = &d.points[p] - &d.interior;
            outer.ger(1.0, &w, &w, 1.0);
            sum += w;
        }
        outer.ger(1.0, &sum, &sum, 1.0);
        vol += v;
        first.axpy(v / (n as f64 + 1.0), &sum, 1.0);
        second += outer * (v / k);
    }
    let mean = first / vol;
    let mut cov = second / vol - &mean * mean.transpose();
    cov = (&cov + cov.transpose()) * 0.5;
    ExactMoments {
        volume: vol,
        barycenter: &d.interior + mean,
        covariance: cov,
    }
}
