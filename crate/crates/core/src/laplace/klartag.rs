//! Search for an exponential tilt with small covariance determinant and the
//! resulting centered body of bounded isotropic constant.

use serde::{Deserialize, Serialize};

use super::log_laplace;
use crate::ballbodies::{body_from_function_with, default_grid_size, ExpMeasure, SandwichCheck};
use crate::bodies::{affine_image, difference_body, polar0, scale, AffineMap, ConvexBody};
use crate::error::{GeomError, Result};
use crate::linalg::{serde_vec, Vector};
use crate::randgeom::{sample_uniform, SampleConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchGoal {
    /// Stop at the first candidate, in a fixed order, that meets the target.
    FirstCertified,
    /// Spend the whole budget and return the smallest determinant seen.
    Minimize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KlartagConfig {
    pub eps: f64,
    /// Maximum number of Laplace evaluations.
    pub budget: usize,
    pub seed: u64,
    pub goal: SearchGoal,
    /// Direction grid for the Ball body; `None` uses the default size.
    pub grid: Option<usize>,
}

impl Default for KlartagConfig {
    fn default() -> Self {
        KlartagConfig {
            eps: 0.5,
            budget: 200,
            seed: 0,
            goal: SearchGoal::FirstCertified,
            grid: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    /// Tilt for the normalized body `λ (K - bar)`.
    #[serde(with = "serde_vec")]
    pub xi: Vector,
    /// The same tilt acting on `K` itself.
    #[serde(with = "serde_vec")]
    pub xi_original: Vector,
    pub det_cov: f64,
    pub target: f64,
    pub certified: bool,
    pub evaluations: usize,
    /// `|K - K|^{-1/n}`.
    pub lambda: f64,
    #[serde(with = "serde_vec")]
    pub bar: Vector,
}

impl SearchOutcome {
    pub fn certified_xi(&self) -> Result<&Vector> {
        if self.certified {
            Ok(&self.xi)
        } else {
            Err(GeomError::BudgetExhaustedWithoutCertificate {
                best_xi: self.xi.iter().copied().collect(),
                best_det: self.det_cov,
                target: self.target,
            })
        }
    }
}

/// `h_{K-K}(ξ) / (εn)`: at most one exactly when `ξ ∈ εn (K-K)°`.
pub fn feasible_width(k: &ConvexBody, xi: &Vector, eps: f64) -> f64 {
    let n = k.dim() as f64;
    (k.support(xi) + k.support(&-xi)) / (eps * n)
}

struct Normalized {
    body: ConvexBody,
    lambda: f64,
    bar: Vector,
    /// `εn (K̃ - K̃)°`.
    region: ConvexBody,
}

fn normalize(k: &ConvexBody, eps: f64) -> Result<Normalized> {
    let n = k.dim();
    let bar = k.barycenter();
    let diff = difference_body(k)?;
    let lambda = diff.volume().powf(-1.0 / n as f64);
    let t = AffineMap::new(
        crate::linalg::Matrix::identity(n, n) * lambda,
        -&bar * lambda,
    )?;
    let body = affine_image(k, &t)?;
    let region = scale(&polar0(&scale(&diff, lambda)?)?, eps * n as f64)?;
    Ok(Normalized {
        body,
        lambda,
        bar,
        region,
    })
}

struct Search<'a> {
    body: &'a ConvexBody,
    eps: f64,
    evaluations: usize,
    budget: usize,
    best: (Vector, f64),
}

impl Search<'_> {
    fn log_det(&mut self, xi: &Vector) -> Result<f64> {
        self.evaluations += 1;
        let h = log_laplace(self.body, xi)?.hess;
        let d = h.determinant();
        let v = if d > 0.0 { d.ln() } else { f64::INFINITY };
        // finite-difference probes may step just outside the region
        if v < self.best.1 && feasible_width(self.body, xi, self.eps) <= 1.0 {
            self.best = (xi.clone(), v);
        }
        Ok(v)
    }

    fn exhausted(&self) -> bool {
        self.evaluations >= self.budget
    }

    /// Pull `xi` radially back inside the region.
    fn project(&self, xi: Vector) -> Vector {
        let w = feasible_width(self.body, &xi, self.eps);
        if w > 1.0 - 1e-9 {
            xi * ((1.0 - 1e-9) / w)
        } else {
            xi
        }
    }

    /// Projected descent on `log det Hess Λ` with central-difference gradients.
    fn descend(&mut self, start: Vector, mut value: f64, stop_below: Option<f64>) -> Result<()> {
        let n = start.len();
        let mut x = start;
        let mut step = 0.25 * self.eps * n as f64;
        let fd = 1e-5 * self.eps * n as f64;
        while !self.exhausted() && step > 1e-6 {
            if stop_below.is_some_and(|t| value <= t) {
                return Ok(());
            }
            if self.evaluations + 2 * n + 1 > self.budget {
                return Ok(());
            }
            let mut g = Vector::zeros(n);
            for i in 0..n {
                let mut a = x.clone();
                let mut b = x.clone();
                a[i] += fd;
                b[i] -= fd;
                g[i] = (self.log_det(&a)? - self.log_det(&b)?) / (2.0 * fd);
            }
            let gn = g.norm();
            if !(gn > 1e-12) || !gn.is_finite() {
                return Ok(());
            }
            let cand = self.project(&x - &g * (step / gn));
            let v = self.log_det(&cand)?;
            if v < value {
                x = cand;
                value = v;
                step *= 1.5;
            } else {
                step *= 0.5;
            }
        }
        Ok(())
    }
}

/// Tilt `ξ ∈ εn (K̃ - K̃)°` for the normalized body with `det Cov(μ_ξ)` at most
/// `(εn s(K-K)^{1/n})^{-n}` when found within the budget.
pub fn klartag_search(k: &ConvexBody, cfg: &KlartagConfig) -> Result<SearchOutcome> {
    if !(cfg.eps > 0.0 && cfg.eps < 1.0) {
        return Err(GeomError::InvalidBody(format!("eps must lie in (0, 1), got {}", cfg.eps)));
    }
    let norm = normalize(k, cfg.eps)?;
    search_normalized(&norm, cfg)
}

fn search_normalized(norm: &Normalized, cfg: &KlartagConfig) -> Result<SearchOutcome> {
    let n = norm.body.dim();
    let target = 1.0 / norm.region.volume();
    let log_target = target.ln();
    let mut s = Search {
        body: &norm.body,
        eps: cfg.eps,
        evaluations: 0,
        budget: cfg.budget.max(1),
        best: (Vector::zeros(n), f64::INFINITY),
    };
    let first = cfg.goal == SearchGoal::FirstCertified;
    let stop = first.then_some(log_target);

    let zero = Vector::zeros(n);
    let v0 = s.log_det(&zero)?;
    if !(first && v0 <= log_target) {
        let starts = (s.budget / (4 * n + 4)).clamp(1, 64);
        let pts = sample_uniform(&norm.region, &SampleConfig::new(cfg.seed, starts))?;
        let mut vals = Vec::with_capacity(pts.len());
        for p in &pts {
            if s.exhausted() {
                break;
            }
            let p = s.project(p.clone());
            let v = s.log_det(&p)?;
            vals.push((p, v));
            if first && v <= log_target {
                break;
            }
        }
        if !(first && s.best.1 <= log_target) {
            let mut order: Vec<(Vector, f64)> = vec![(zero, v0)];
            order.extend(vals);
            order.sort_by(|a, b| a.1.total_cmp(&b.1));
            for (p, v) in order {
                if s.exhausted() || stop.is_some_and(|t| s.best.1 <= t) {
                    break;
                }
                s.descend(p, v, stop)?;
            }
        }
    }
    let (xi, lv) = s.best.clone();
    let det_cov = lv.exp();
    Ok(SearchOutcome {
        xi_original: &xi * norm.lambda,
        xi,
        det_cov,
        target,
        certified: det_cov <= target,
        evaluations: s.evaluations,
        lambda: norm.lambda,
        bar: norm.bar.clone(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PerturbationResult {
    #[serde(with = "serde_vec")]
    pub xi_star: Vector,
    #[serde(skip)]
    pub t: ConvexBody,
    /// Shift with `(1/m) T ⊆ K + x ⊆ m T`.
    #[serde(with = "serde_vec")]
    pub x: Vector,
    pub l_t: f64,
    pub l_f: f64,
    pub eps: f64,
    pub detcov: f64,
    pub target: f64,
    pub certified: bool,
    pub evaluations: usize,
    pub budget: usize,
    pub seed: u64,
    pub sandwich: SandwichCheck,
}

/// The centered body `T` and shift `x` with `e^{-2ε} T ⊆ K + x ⊆ e^{2ε} T`.
pub fn klartag_body(k: &ConvexBody, cfg: &KlartagConfig) -> Result<PerturbationResult> {
    if !(cfg.eps > 0.0 && cfg.eps < 1.0) {
        return Err(GeomError::InvalidBody(format!("eps must lie in (0, 1), got {}", cfg.eps)));
    }
    let norm = normalize(k, cfg.eps)?;
    let out = search_normalized(&norm, cfg)?;
    let mu = ExpMeasure::new(norm.body.clone(), out.xi.clone())?;
    let m = (2.0 * cfg.eps).exp();
    let grid = cfg.grid.unwrap_or_else(|| default_grid_size(k.dim()));
    let fb = body_from_function_with(&mu, m, cfg.seed, grid)?;
    let inv = 1.0 / norm.lambda;
    let t = scale(&fb.t, inv)?;
    let x = -(&norm.bar + &fb.x0 * inv);
    Ok(PerturbationResult {
        xi_star: out.xi_original,
        t,
        x,
        l_t: fb.l_t,
        l_f: fb.l_f,
        eps: cfg.eps,
        detcov: out.det_cov,
        target: out.target,
        certified: out.certified,
        evaluations: out.evaluations,
        budget: cfg.budget,
        seed: cfg.seed,
        sandwich: fb.sandwich,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn cube(n: usize) -> ConvexBody {
        let mut a = Matrix::zeros(2 * n, n);
        for i in 0..n {
            a[(2 * i, i)] = 1.0;
            a[(2 * i + 1, i)] = -1.0;
        }
        ConvexBody::hpolytope(a, Vector::from_element(2 * n, 1.0)).unwrap()
    }

    fn triangle() -> ConvexBody {
        ConvexBody::vpolytope(vec![
            Vector::from_vec(vec![0.0, 0.0]),
            Vector::from_vec(vec![1.0, 0.0]),
            Vector::from_vec(vec![0.0, 1.0]),
        ])
        .unwrap()
    }

    #[test]
    fn square_target_and_certificate() {
        let k = cube(2);
        let out = klartag_search(&k, &KlartagConfig::default()).unwrap();
        // normalized K - K is the unit square, its polar the cross polytope of area 8, and εn = 1
        assert!((out.target - 0.125).abs() < 1e-12);
        assert!(out.certified);
        assert!(out.evaluations <= 200);
        assert!(feasible_width(&k, &out.xi_original, 0.5) <= 1.0 + 1e-12);
    }

    #[test]
    fn minimize_never_worse_than_zero_tilt() {
        let k = triangle();
        let cfg = KlartagConfig {
            goal: SearchGoal::Minimize,
            budget: 120,
            ..Default::default()
        };
        let out = klartag_search(&k, &cfg).unwrap();
        let norm = normalize(&k, 0.5).unwrap();
        let d0 = log_laplace(&norm.body, &Vector::zeros(2)).unwrap().hess.determinant();
        assert!(out.det_cov <= d0 * (1.0 + 1e-12));
        assert!(out.evaluations <= 120);
        assert!(norm.region.contains(&out.xi));
    }

    #[test]
    fn cube_gives_itself_back() {
        let k = cube(2);
        let cfg = KlartagConfig {
            grid: Some(360),
            ..Default::default()
        };
        let r = klartag_body(&k, &cfg).unwrap();
        assert!(r.xi_star.amax() < 1e-15);
        assert!(r.x.amax() < 1e-12);
        // with no tilt T = K_3(1_K) = K
        for u in crate::linalg::sphere_directions(2, 50) {
            let a = r.t.radial(&u).unwrap();
            let b = k.radial(&u).unwrap();
            assert!((a - b).abs() < 0.01 * b);
        }
    }

    #[test]
    fn uncertified_search_reports_best() {
        let out = SearchOutcome {
            xi: Vector::from_vec(vec![0.1, 0.0]),
            xi_original: Vector::from_vec(vec![0.1, 0.0]),
            det_cov: 2.0,
            target: 1.0,
            certified: false,
            evaluations: 5,
            lambda: 1.0,
            bar: Vector::zeros(2),
        };
        assert!(matches!(
            out.certified_xi(),
            Err(GeomError::BudgetExhaustedWithoutCertificate { best_det, .. }) if best_det == 2.0
        ));
    }
}
