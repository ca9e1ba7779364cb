//! Logarithmic Laplace transform of the uniform measure on a body and the
//! exponential-tilt search built on it.

mod divdiff;
mod klartag;

pub use divdiff::{simplex_exp, SimplexExp, MAX_SPREAD};
pub use klartag::{
    feasible_width, klartag_body, klartag_search, KlartagConfig, PerturbationResult, SearchGoal, SearchOutcome,
};

use serde::{Deserialize, Serialize};

use crate::bodies::{BodyRep, ConvexBody, Ellipsoid, PolytopeData};
use crate::error::{GeomError, Result};
use crate::linalg::{factorial, serde_mat, serde_vec, unit_ball_volume, Matrix, Vector};

/// `Λ(ξ) = log(|K|^{-1} ∫_K e^{<ξ,x>} dx)` with its gradient (tilted barycenter) and
/// Hessian (tilted covariance).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaplaceEval {
    #[serde(with = "serde_vec")]
    pub xi: Vector,
    pub value: f64,
    #[serde(with = "serde_vec")]
    pub grad: Vector,
    #[serde(with = "serde_mat")]
    pub hess: Matrix,
}

pub fn log_laplace(k: &ConvexBody, xi: &Vector) -> Result<LaplaceEval> {
    if xi.len() != k.dim() {
        return Err(GeomError::DimensionMismatch {
            expected: k.dim(),
            got: xi.len(),
        });
    }
    match k.rep() {
        BodyRep::Ellipsoid(e) => Ok(ellipsoid_laplace(e, xi)),
        _ => polytope_laplace(k.polytope_data().expect("polytope"), xi),
    }
}

fn polytope_laplace(d: &PolytopeData, xi: &Vector) -> Result<LaplaceEval> {
    let n = d.dim;
    let h = d.support(xi);
    let p = &d.interior;
    let nf = factorial(n);
    let tp = xi.dot(p) - h;
    let mut z = 0.0;
    let mut first = Vector::zeros(n);
    let mut second = Matrix::zeros(n, n);
    let mut t = vec![0.0; n + 1];
    let mut w: Vec<Vector> = vec![Vector::zeros(n); n];
    for (ci, vol) in d.cones() {
        if vol == 0.0 {
            continue;
        }
        t[0] = tp;
        for (r, &pi) in d.cells[ci].iter().enumerate() {
            w[r] = &d.points[pi] - p;
            t[r + 1] = xi.dot(&d.points[pi]) - h;
        }
        let s = simplex_exp(&t, true).ok_or_else(|| {
            GeomError::DegenerateBody(format!("exponent spread above {MAX_SPREAD} on one cell"))
        })?;
        let f = nf * vol * s.shift.exp();
        if f == 0.0 {
            continue;
        }
        z += f * s.d0;
        // the apex sits at the reference point, so only nodes 1..=n carry weight
        for i in 0..n {
            first.axpy(f * s.d1[i + 1], &w[i], 1.0);
            for j in 0..n {
                let c = f * s.d2[(i + 1) * (n + 1) + j + 1];
                if c != 0.0 {
                    second.ger(c, &w[i], &w[j], 1.0);
                }
            }
        }
    }
    let mean = first / z;
    let mut cov = second / z - &mean * mean.transpose();
    cov = (&cov + cov.transpose()) * 0.5;
    Ok(LaplaceEval {
        xi: xi.clone(),
        value: (z / d.volume).ln() + h,
        grad: p + mean,
        hess: cov,
    })
}

/// `∫_0^π e^{a (cos φ - 1)} cos^k φ sin^j φ dφ` by the trapezoid rule (spectrally accurate here).
fn trig_moment(a: f64, k: i32, j: i32) -> f64 {
    let m = (400.0 + 40.0 * a.abs()).min(40_000.0) as usize;
    let h = std::f64::consts::PI / m as f64;
    let mut s = 0.0;
    for i in 0..=m {
        let phi = i as f64 * h;
        let (sn, cs) = phi.sin_cos();
        let w = if i == 0 || i == m { 0.5 } else { 1.0 };
        s += w * (a * (cs - 1.0)).exp() * cs.powi(k) * sn.powi(j);
    }
    s * h
}

fn ellipsoid_laplace(e: &Ellipsoid, xi: &Vector) -> LaplaceEval {
    let n = e.dim();
    let l = e.half_axes();
    let v = l.transpose() * xi;
    let a = v.norm();
    let nn = n as i32;
    // ball integrals along the tilt direction, all scaled by e^{-a} ω_{n-1}
    let z = trig_moment(a, 0, nn);
    let m1 = trig_moment(a, 1, nn) / z;
    let m2 = trig_moment(a, 2, nn) / z;
    let perp = trig_moment(a, 0, nn + 2) / (n as f64 + 1.0) / z;
    let log_ball = (unit_ball_volume(n - 1) * z).ln() + a - unit_ball_volume(n).ln();
    let (mean_ball, cov_ball) = if a > 0.0 {
        let u = &v / a;
        let par = m2 - m1 * m1;
        let uu = &u * u.transpose();
        (
            &u * m1,
            Matrix::identity(n, n) * perp + uu * (par - perp),
        )
    } else {
        (Vector::zeros(n), Matrix::identity(n, n) * perp)
    };
    let hess = l * cov_ball * l.transpose();
    LaplaceEval {
        xi: xi.clone(),
        value: xi.dot(e.center()) + log_ball,
        grad: e.center() + l * mean_ball,
        hess: (&hess + hess.transpose()) * 0.5,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(r: f64) -> ConvexBody {
        let a = Matrix::from_row_slice(4, 2, &[1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0]);
        ConvexBody::hpolytope(a, Vector::from_element(4, r)).unwrap()
    }

    #[test]
    fn square_closed_form() {
        let ev = log_laplace(&square(1.0), &Vector::from_vec(vec![1.0, 0.0])).unwrap();
        assert!((ev.value - 1f64.sinh().ln()).abs() < 1e-12);
        // barycenter coth(1) - 1
        let b = 1.0 / 1f64.tanh() - 1.0;
        assert!((ev.grad[0] - b).abs() < 1e-12);
        assert!(ev.grad[1].abs() < 1e-14);
        // variance 1 - 1/sinh^2
        let var = 1.0 - 1.0 / 1f64.sinh().powi(2);
        assert!((ev.hess[(0, 0)] - var).abs() < 1e-12);
        assert!((ev.hess[(1, 1)] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_tilt_gives_uniform_moments() {
        let k = ConvexBody::vpolytope(vec![
            Vector::from_vec(vec![0.0, 0.0]),
            Vector::from_vec(vec![2.0, 0.0]),
            Vector::from_vec(vec![0.0, 1.0]),
        ])
        .unwrap();
        let ev = log_laplace(&k, &Vector::zeros(2)).unwrap();
        let m = k.exact_moments();
        assert!(ev.value.abs() < 1e-15);
        assert!((&ev.grad - &m.barycenter).amax() < 1e-14);
        assert!((&ev.hess - &m.covariance).amax() < 1e-14);
    }

    #[test]
    fn ball_matches_polytope_limit_along_axis() {
        // disc, tilt a: Λ = log(2 I_1(a)/a)
        let k = ConvexBody::ball(2, 1.0).unwrap();
        let a = 1.7;
        let ev = log_laplace(&k, &Vector::from_vec(vec![a, 0.0])).unwrap();
        // I_1 via its series
        let mut i1 = 0.0;
        let mut term = a / 2.0;
        for m in 0..40 {
            i1 += term;
            term *= (a / 2.0).powi(2) / ((m + 1) as f64 * (m + 2) as f64);
        }
        assert!((ev.value - (2.0 * i1 / a).ln()).abs() < 1e-12);
    }
}
