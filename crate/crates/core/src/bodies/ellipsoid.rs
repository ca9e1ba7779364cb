use crate::error::{GeomError, Result};
use crate::linalg::{is_spd, sphere_directions, unit_ball_volume, Matrix, Vector};

/// `{x : (x - c)^T M (x - c) <= 1}` with `M` symmetric positive definite.
#[derive(Debug, Clone)]
pub struct Ellipsoid {
    center: Vector,
    shape: Matrix,
    /// `E = center + half * B`.
    half: Matrix,
    inv_shape: Matrix,
}

impl PartialEq for Ellipsoid {
    fn eq(&self, other: &Self) -> bool {
        self.center == other.center && self.shape == other.shape
    }
}

impl Ellipsoid {
    pub fn new(center: Vector, shape: Matrix) -> Result<Self> {
        let n = center.len();
        if shape.nrows() != n || shape.ncols() != n {
            return Err(GeomError::DimensionMismatch {
                expected: n,
                got: shape.nrows(),
            });
        }
        if center.iter().chain(shape.iter()).any(|x| !x.is_finite()) {
            return Err(GeomError::InvalidBody("non-finite entry".into()));
        }
        if !is_spd(&shape) {
            return Err(GeomError::InvalidBody(
                "ellipsoid shape must be symmetric positive definite".into(),
            ));
        }
        let chol = shape.clone().cholesky().expect("checked SPD");
        let l = chol.l();
        let half = l
            .transpose()
            .try_inverse()
            .ok_or_else(|| GeomError::DegenerateBody("singular shape".into()))?;
        let inv_shape = &half * half.transpose();
        Ok(Ellipsoid {
            center,
            shape,
            half,
            inv_shape,
        })
    }

    /// Ball of radius `r` about `center`.
    pub fn ball(center: Vector, r: f64) -> Result<Self> {
        let n = center.len();
        Self::new(center, Matrix::identity(n, n) / (r * r))
    }

    /// `center + L * B` for an invertible `L`.
    pub fn from_map(center: Vector, l: &Matrix) -> Result<Self> {
        let inv = l
            .clone()
            .try_inverse()
            .ok_or(GeomError::SingularMap { det: 0.0 })?;
        let m = inv.transpose() * &inv;
        Self::new(center, (&m + m.transpose()) * 0.5)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn shape(&self) -> &Matrix {
        &self.shape
    }

    /// Matrix `L` with `E = c + L B` (lower-triangular-transpose inverse factor).
    pub fn half_axes(&self) -> &Matrix {
        &self.half
    }

    pub fn inv_shape(&self) -> &Matrix {
        &self.inv_shape
    }

    pub fn volume(&self) -> f64 {
        unit_ball_volume(self.dim()) * self.half.determinant().abs()
    }

    pub fn support(&self, u: &Vector) -> f64 {
        self.center.dot(u) + u.dot(&(&self.inv_shape * u)).max(0.0).sqrt()
    }

    pub fn quad(&self, x: &Vector) -> f64 {
        let d = x - &self.center;
        d.dot(&(&self.shape * &d))
    }

    /// Boundary points along a deterministic direction grid.
    pub fn boundary_points(&self, count: usize) -> Vec<Vector> {
        sphere_directions(self.dim(), count)
            .into_iter()
            .map(|d| &self.center + &self.half * d)
            .collect()
    }

    /// Number of boundary points used when an ellipsoid enters a polytope operation.
    pub fn polytope_resolution(n: usize) -> usize {
        64 * n * (n - 1).max(1)
    }
}
