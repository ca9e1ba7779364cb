use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::rng::SampleConfig;
use super::sample::sample_uniform;
use crate::ballbodies::ExpMeasure;
use crate::bodies::{affine_image, AffineMap, ConvexBody};
use crate::error::{GeomError, Result};
use crate::laplace::log_laplace;
use crate::linalg::{serde_mat, serde_vec, sym_inv_sqrt, Matrix, Vector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub volume: f64,
    #[serde(with = "serde_vec")]
    pub barycenter: Vector,
    #[serde(with = "serde_mat")]
    pub covariance: Matrix,
    /// `q -> I_q(K, B_2^n)`.
    pub iq: BTreeMap<u32, f64>,
    pub isotropic_constant: f64,
}

/// Volume, barycenter and covariance exactly; `I_1` by sampling, `I_2` from the second moments.
pub fn moments(k: &ConvexBody, cfg: &SampleConfig) -> Result<MomentSummary> {
    let m = k.exact_moments();
    let n = k.dim();
    if !(m.volume > 0.0) {
        return Err(GeomError::DegenerateBody("zero volume".into()));
    }
    let ball = ConvexBody::ball(n, 1.0)?;
    let (i1, _) = iq_functional(k, &ball, 1.0, cfg)?;
    let second = m.covariance.trace() + m.barycenter.norm_squared();
    let i2 = second.sqrt() / m.volume.powf(1.0 / n as f64);
    let mut iq = BTreeMap::new();
    iq.insert(1, i1);
    iq.insert(2, i2);
    Ok(MomentSummary {
        volume: m.volume,
        barycenter: m.barycenter.clone(),
        covariance: m.covariance.clone(),
        iq,
        isotropic_constant: isotropic_constant(k)?,
    })
}

/// `I_q(K, B) = (|K|^{-1-q/n} ∫_K ||x||_B^q dx)^{1/q}` with a delta-method standard error.
pub fn iq_functional(k: &ConvexBody, b: &ConvexBody, q: f64, cfg: &SampleConfig) -> Result<(f64, f64)> {
    let n = k.dim();
    let xs = sample_uniform(k, cfg)?;
    let mut vals = Vec::with_capacity(xs.len());
    for x in &xs {
        vals.push(b.gauge(x)?.powf(q));
    }
    let m = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / m;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
    let scale = k.volume().powf(-1.0 / n as f64);
    let value = mean.powf(1.0 / q) * scale;
    let se = (var / m).sqrt() * mean.powf(1.0 / q - 1.0) / q * scale;
    Ok((value, se))
}

/// Whitening map `x -> s Cov^{-1/2} (x - bar)` whose image is isotropic of volume one.
pub fn isotropic_map(k: &ConvexBody) -> Result<AffineMap> {
    let m = k.exact_moments();
    let n = k.dim();
    let w = sym_inv_sqrt(&m.covariance)
        .ok_or_else(|| GeomError::DegenerateBody("covariance is not positive definite".into()))?;
    let det = w.determinant().abs();
    let s = (1.0 / (m.volume * det)).powf(1.0 / n as f64);
    let lin = w * s;
    let shift = -(&lin * &m.barycenter);
    AffineMap::new(lin, shift)
}

pub fn isotropic_transform(k: &ConvexBody) -> Result<(AffineMap, ConvexBody)> {
    let t = isotropic_map(k)?;
    let image = affine_image(k, &t)?;
    Ok((t, image))
}

/// `L_K = I_2(K̃, B_2^n) / sqrt(n)` for the isotropic image `K̃`, read off the moments.
pub fn isotropic_constant(k: &ConvexBody) -> Result<f64> {
    let t = isotropic_map(k)?;
    let m = k.exact_moments();
    let lin = t.linear();
    let cov = lin * &m.covariance * lin.transpose();
    Ok((cov.trace() / k.dim() as f64).sqrt())
}

/// `L_μ = (||f||_∞ / ∫f)^{1/n} det Cov(μ)^{1/2n}` for `f = e^{<ξ,x>} 1_K`.
pub fn l_mu(mu: &ExpMeasure) -> Result<f64> {
    let k = mu.body();
    let n = k.dim() as f64;
    let eval = log_laplace(k, mu.xi())?;
    let sup = k.support(mu.xi());
    // log ∫ f = log |K| + Λ(ξ)
    let log_ratio = sup - (k.volume().ln() + eval.value);
    let det = eval.hess.determinant();
    if !(det > 0.0) {
        return Err(GeomError::DegenerateBody("tilted covariance is singular".into()));
    }
    Ok((log_ratio / n + det.ln() / (2.0 * n)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube(n: usize, r: f64) -> ConvexBody {
        let mut a = Matrix::zeros(2 * n, n);
        for i in 0..n {
            a[(2 * i, i)] = 1.0;
            a[(2 * i + 1, i)] = -1.0;
        }
        ConvexBody::hpolytope(a, Vector::from_element(2 * n, r)).unwrap()
    }

    #[test]
    fn cube_covariance_is_one_twelfth() {
        let m = cube(3, 0.5).exact_moments().clone();
        assert!((m.covariance - Matrix::identity(3, 3) / 12.0).amax() < 1e-14);
        assert!(m.barycenter.amax() < 1e-15);
    }

    #[test]
    fn isotropic_image_is_normalized() {
        let k = cube(3, 1.0);
        let (_, img) = isotropic_transform(&k).unwrap();
        let m = img.exact_moments();
        assert!((m.volume - 1.0).abs() < 1e-12);
        assert!((m.covariance.clone() - Matrix::identity(3, 3) / 12.0).amax() < 1e-12);
        assert!((isotropic_constant(&k).unwrap() - (1.0f64 / 12.0).sqrt()).abs() < 1e-12);
    }
}
