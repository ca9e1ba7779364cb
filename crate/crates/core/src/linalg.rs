//! Small numeric helpers shared by the geometry modules.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Volume of the Euclidean unit ball in dimension `n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    let mut even = 1.0;
    let mut odd = 2.0;
    if n == 0 {
        return 1.0;
    }
    let mut k = 1;
    while k < n {
        k += 1;
        if k % 2 == 0 {
            even *= 2.0 * PI / k as f64;
        } else {
            odd *= 2.0 * PI / k as f64;
        }
    }
    if n % 2 == 0 {
        even
    } else {
        odd
    }
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Determinant of a small dense row-major `m x m` matrix, destroying its contents.
pub fn det_in_place(a: &mut [f64], m: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..m {
        let mut piv = col;
        let mut best = a[col * m + col].abs();
        for row in col + 1..m {
            let v = a[row * m + col].abs();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if piv != col {
            for j in 0..m {
                a.swap(col * m + j, piv * m + j);
            }
            det = -det;
        }
        let d = a[col * m + col];
        det *= d;
        for row in col + 1..m {
            let f = a[row * m + col] / d;
            if f != 0.0 {
                for j in col + 1..m {
                    a[row * m + j] -= f * a[col * m + j];
                }
            }
        }
    }
    det
}

/// Symmetric eigen-decomposition based inverse square root of an SPD matrix.
pub fn sym_inv_sqrt(m: &Matrix) -> Option<Matrix> {
    sym_power(m, -0.5)
}

pub fn sym_sqrt(m: &Matrix) -> Option<Matrix> {
    sym_power(m, 0.5)
}

fn sym_power(m: &Matrix, power: f64) -> Option<Matrix> {
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
        return None;
    }
    let d = Matrix::from_diagonal(&eig.eigenvalues.map(|l| l.powf(power)));
    Some(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

pub fn is_spd(m: &Matrix) -> bool {
    let asym = (m - m.transpose()).abs().max();
    if asym > 1e-9 * m.abs().max().max(1.0) {
        return false;
    }
    m.clone().cholesky().is_some()
}

pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vector {
    loop {
        let v = Vector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let norm = v.norm();
        if norm > 1e-12 {
            return v / norm;
        }
    }
}

/// Deterministic, roughly uniform direction grid on the sphere.
///
/// Equally spaced angles in the plane, a Fibonacci lattice in dimension three,
/// and a Kronecker sequence pushed through Box-Muller above that.
pub fn sphere_directions(n: usize, count: usize) -> Vec<Vector> {
    match n {
        0 => Vec::new(),
        1 => vec![Vector::from_element(1, 1.0), Vector::from_element(1, -1.0)],
        2 => (0..count)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / count as f64;
                Vector::from_vec(vec![a.cos(), a.sin()])
            })
            .collect(),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|i| {
                    let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let phi = golden * i as f64;
                    Vector::from_vec(vec![r * phi.cos(), r * phi.sin(), z])
                })
                .collect()
        }
        _ => {
            let m = 2 * n.div_ceil(2);
            // generalised golden ratio: root of x^(m+1) = x + 1
            let mut phi = 2.0f64;
            for _ in 0..64 {
                phi = (1.0 + phi).powf(1.0 / (m as f64 + 1.0));
            }
            let alpha: Vec<f64> = (1..=m).map(|j| (1.0 / phi.powi(j as i32)).fract()).collect();
            let mut out = Vec::with_capacity(count);
            let mut i = 0usize;
            while out.len() < count {
                i += 1;
                let u: Vec<f64> = alpha
                    .iter()
                    .map(|a| (0.5 + a * i as f64).fract().clamp(1e-12, 1.0 - 1e-12))
                    .collect();
                let mut g = Vec::with_capacity(m);
                for pair in u.chunks(2) {
                    let r = (-2.0 * pair[0].ln()).sqrt();
                    let t = 2.0 * PI * pair[1];
                    g.push(r * t.cos());
                    g.push(r * t.sin());
                }
                g.truncate(n);
                let v = Vector::from_vec(g);
                let norm = v.norm();
                if norm > 1e-9 {
                    out.push(v / norm);
                }
            }
            out
        }
    }
}

pub fn to_vec(v: &Vector) -> Vec<f64> {
    v.iter().copied().collect()
}

pub fn matrix_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Option<Matrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    if rows.iter().any(|row| row.len() != c) {
        return None;
    }
    Some(Matrix::from_fn(r, c, |i, j| rows[i][j]))
}

/// Serde adapters writing vectors as flat arrays and matrices as row lists.
pub mod serde_vec {
    use super::Vector;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Vector, s: S) -> Result<S::Ok, S::Error> {
        v.as_slice().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vector, D::Error> {
        Ok(Vector::from_vec(Vec::<f64>::deserialize(d)?))
    }
}

pub mod serde_mat {
    use super::{matrix_from_rows, matrix_rows, Matrix};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &Matrix, s: S) -> Result<S::Ok, S::Error> {
        matrix_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Matrix, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        matrix_from_rows(&rows).ok_or_else(|| serde::de::Error::custom("ragged matrix"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-15);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn small_determinant() {
        let mut a = vec![2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0];
        assert!((det_in_place(&mut a, 3) - 18.0).abs() < 1e-12);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6.0);
        assert_eq!(binomial(6, 3), 20.0);
        assert_eq!(factorial(5), 120.0);
    }

    #[test]
    fn direction_grids_are_unit() {
        for n in 2..=6 {
            let dirs = sphere_directions(n, 300);
            assert_eq!(dirs.len(), 300);
            let mean = dirs.iter().fold(Vector::zeros(n), |acc, d| acc + d) / 300.0;
            assert!(mean.norm() < 0.1, "n={n} mean {}", mean.norm());
            assert!(dirs.iter().all(|d| (d.norm() - 1.0).abs() < 1e-12));
        }
    }
}
