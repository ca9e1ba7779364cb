use crate::error::{GeomError, Result};
use crate::linalg::{Matrix, Vector};

/// `x -> linear * x + shift` with an invertible linear part.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    linear: Matrix,
    shift: Vector,
    det: f64,
    inverse: Matrix,
}

impl AffineMap {
    pub fn new(linear: Matrix, shift: Vector) -> Result<Self> {
        let n = shift.len();
        if linear.nrows() != n || linear.ncols() != n {
            return Err(GeomError::DimensionMismatch {
                expected: n,
                got: linear.nrows(),
            });
        }
        let det = linear.determinant();
        if !det.is_finite() || det == 0.0 {
            return Err(GeomError::SingularMap { det });
        }
        let inverse = linear
            .clone()
            .try_inverse()
            .ok_or(GeomError::SingularMap { det })?;
        let resid = (&linear * &inverse - Matrix::identity(n, n)).amax();
        if resid > 1e-10 {
            return Err(GeomError::SingularMap { det });
        }
        Ok(AffineMap {
            linear,
            shift,
            det,
            inverse,
        })
    }

    pub fn linear_map(linear: Matrix) -> Result<Self> {
        let n = linear.nrows();
        Self::new(linear, Vector::zeros(n))
    }

    pub fn identity(n: usize) -> Self {
        Self::new(Matrix::identity(n, n), Vector::zeros(n)).expect("identity is invertible")
    }

    pub fn translation(v: Vector) -> Self {
        let n = v.len();
        Self::new(Matrix::identity(n, n), v).expect("identity is invertible")
    }

    pub fn scaling(s: f64, n: usize) -> Result<Self> {
        Self::new(Matrix::identity(n, n) * s, Vector::zeros(n))
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    pub fn linear(&self) -> &Matrix {
        &self.linear
    }

    pub fn shift(&self) -> &Vector {
        &self.shift
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn inverse_linear(&self) -> &Matrix {
        &self.inverse
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        &self.linear * x + &self.shift
    }

    pub fn apply_inverse(&self, y: &Vector) -> Vector {
        &self.inverse * (y - &self.shift)
    }

    pub fn inverse(&self) -> Self {
        Self::new(self.inverse.clone(), -(&self.inverse * &self.shift))
            .expect("inverse of an invertible map")
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &AffineMap) -> Result<Self> {
        Self::new(&self.linear * &other.linear, &self.linear * &other.shift + &self.shift)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_round_trip() {
        let t = AffineMap::new(
            Matrix::from_row_slice(2, 2, &[2.0, 1.0, 0.5, 3.0]),
            Vector::from_vec(vec![1.0, -2.0]),
        )
        .unwrap();
        let x = Vector::from_vec(vec![0.3, 0.7]);
        assert!((t.apply_inverse(&t.apply(&x)) - &x).amax() < 1e-14);
        let id = t.compose(&t.inverse()).unwrap();
        assert!((id.linear() - Matrix::identity(2, 2)).amax() < 1e-12);
        assert!(id.shift().amax() < 1e-12);
        assert!((t.det() - 5.5).abs() < 1e-12);
    }

    #[test]
    fn singular_rejected() {
        let err = AffineMap::linear_map(Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]));
        assert!(matches!(err, Err(GeomError::SingularMap { .. })));
    }
}
