//! Exponential densities on bodies and Ball's bodies `K_p(μ)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bodies::{translate, ConvexBody};
use crate::error::{GeomError, Result};
use crate::laplace::log_laplace;
use crate::linalg::{random_unit, sphere_directions, Vector};
use crate::randgeom::{isotropic_constant, l_mu, map_chunks};

/// Default sandwich slack for [`body_from_function`].
pub const SANDWICH_SLACK: f64 = 1.02;

/// Density proportional to `e^{<ξ,x>} 1_K(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpMeasure {
    body: ConvexBody,
    xi: Vector,
}

impl ExpMeasure {
    pub fn new(body: ConvexBody, xi: Vector) -> Result<Self> {
        if xi.len() != body.dim() {
            return Err(GeomError::DimensionMismatch {
                expected: body.dim(),
                got: xi.len(),
            });
        }
        if xi.iter().any(|x| !x.is_finite()) {
            return Err(GeomError::InvalidBody("non-finite exponent".into()));
        }
        Ok(ExpMeasure { body, xi })
    }

    pub fn indicator(body: ConvexBody) -> Self {
        let n = body.dim();
        ExpMeasure {
            body,
            xi: Vector::zeros(n),
        }
    }

    pub fn body(&self) -> &ConvexBody {
        &self.body
    }

    pub fn xi(&self) -> &Vector {
        &self.xi
    }

    pub fn dim(&self) -> usize {
        self.body.dim()
    }

    /// Unnormalized density.
    pub fn density(&self, x: &Vector) -> f64 {
        if self.body.contains(x) {
            self.xi.dot(x).exp()
        } else {
            0.0
        }
    }

    /// `sup f / inf f` over the support, `exp(h_K(ξ) + h_K(-ξ))`.
    pub fn range_ratio(&self) -> f64 {
        (self.body.support(&self.xi) + self.body.support(&-&self.xi)).exp()
    }

    pub fn barycenter(&self) -> Result<Vector> {
        Ok(log_laplace(&self.body, &self.xi)?.grad)
    }

    /// The measure `g(x) = f(x + x0)`, supported on `K - x0`.
    pub fn shifted(&self, x0: &Vector) -> Result<Self> {
        Ok(ExpMeasure {
            body: translate(&self.body, &-x0)?,
            xi: self.xi.clone(),
        })
    }

    /// `(p ∫_0^{ρ_K(θ)} f(rθ) r^{p-1} dr / f(0))^{1/p}` for a unit vector `θ`.
    pub fn ball_radius(&self, theta: &Vector, p: f64) -> Result<f64> {
        let rho = self.body.radial(theta)?;
        let a = self.xi.dot(theta);
        Ok((p * ray_integral(a, rho, p)).powf(1.0 / p))
    }
}

/// `∫_0^R e^{a r} r^{p-1} dr` by positive-term series.
///
/// For `aR >= 0`: `R^p Σ (aR)^k / (k! (p+k))`.
/// For `aR < 0`: `R^p e^{aR} Σ (-aR)^k / (p (p+1) ... (p+k))`.
pub fn ray_integral(a: f64, r: f64, p: f64) -> f64 {
    let x = a * r;
    let rp = r.powf(p);
    let y = x.abs();
    let mut sum = 0.0;
    let mut k = 0usize;
    if x >= 0.0 {
        let mut pow_over_fact = 1.0;
        loop {
            let term = pow_over_fact / (p + k as f64);
            sum += term;
            k += 1;
            if (k as f64 > y && term < 1e-17 * sum) || k > 5000 {
                break;
            }
            pow_over_fact *= y / k as f64;
        }
        rp * sum
    } else {
        let mut term = 1.0 / p;
        loop {
            sum += term;
            k += 1;
            term *= y / (p + k as f64);
            if (k as f64 > y && term < 1e-17 * sum) || k > 5000 {
                break;
            }
        }
        rp * x.exp() * sum
    }
}

/// Star body given by radii on a direction grid, optionally backed by its exact radial function.
#[derive(Debug, Clone)]
pub struct RadialBody {
    pub dirs: Vec<Vector>,
    pub radii: Vec<f64>,
    source: Option<(ExpMeasure, f64)>,
}

/// Direction count used for Ball bodies: 720 in the plane, `2000 (n-1)` above.
pub fn default_grid_size(n: usize) -> usize {
    if n == 2 {
        720
    } else {
        2000 * (n - 1)
    }
}

impl RadialBody {
    pub fn from_grid(dirs: Vec<Vector>, radii: Vec<f64>) -> Result<Self> {
        if dirs.len() != radii.len() || dirs.is_empty() {
            return Err(GeomError::InvalidBody("grid and radii differ in length".into()));
        }
        if radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
            return Err(GeomError::InvalidBody("radii must be positive".into()));
        }
        Ok(RadialBody {
            dirs,
            radii,
            source: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.dirs[0].len()
    }

    pub fn has_exact_radius(&self) -> bool {
        self.source.is_some()
    }

    /// Radius along the unit vector `theta`: exact when the body came from a measure,
    /// otherwise interpolated through the nearest grid simplex.
    pub fn radius(&self, theta: &Vector) -> f64 {
        match &self.source {
            Some((mu, p)) => mu.ball_radius(theta, *p).unwrap_or_else(|_| self.interpolated_radius(theta)),
            None => self.interpolated_radius(theta),
        }
    }

    pub fn interpolated_radius(&self, theta: &Vector) -> f64 {
        let n = self.dim();
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(n + 1);
        for (i, d) in self.dirs.iter().enumerate() {
            let c = d.dot(theta);
            if best.len() < n || c > best[n - 1].0 {
                if best.len() == n {
                    best.pop();
                }
                let pos = best.partition_point(|(v, _)| *v >= c);
                best.insert(pos, (c, i));
            }
        }
        // hyperplane through the n nearest boundary points: <a, p_i> = 1
        let pts = crate::linalg::Matrix::from_fn(n, n, |r, c| {
            let i = best[r].1;
            self.dirs[i][c] * self.radii[i]
        });
        if let Some(a) = pts.lu().solve(&Vector::from_element(n, 1.0)) {
            let s = a.dot(theta);
            if s > 0.0 && s.is_finite() {
                let r = 1.0 / s;
                let lo = best.iter().map(|&(_, i)| self.radii[i]).fold(f64::INFINITY, f64::min);
                let hi = best.iter().map(|&(_, i)| self.radii[i]).fold(0.0, f64::max);
                if r >= 0.5 * lo && r <= 2.0 * hi {
                    return r;
                }
            }
        }
        self.radii[best[0].1]
    }

    pub fn gauge(&self, x: &Vector) -> f64 {
        let norm = x.norm();
        if norm == 0.0 {
            return 0.0;
        }
        norm / self.radius(&(x / norm))
    }

    pub fn boundary_points(&self) -> Vec<Vector> {
        self.dirs.iter().zip(&self.radii).map(|(d, r)| d * *r).collect()
    }

    /// Inner polytope approximation: hull of the boundary grid points.
    pub fn to_polytope(&self) -> Result<ConvexBody> {
        ConvexBody::vpolytope(self.boundary_points())
    }

    /// Largest relative violation of `||x+y|| <= ||x|| + ||y||` over random pairs.
    pub fn convexity_defect(&self, pairs: usize, seed: u64) -> f64 {
        let n = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..pairs {
            let x = random_unit(&mut rng, n) * self.radius_unit_scale(&mut rng);
            let y = random_unit(&mut rng, n) * self.radius_unit_scale(&mut rng);
            let gx = self.gauge(&x);
            let gy = self.gauge(&y);
            let gs = self.gauge(&(&x + &y));
            worst = worst.max((gs - gx - gy) / (gx + gy));
        }
        worst
    }

    fn radius_unit_scale<R: Rng>(&self, rng: &mut R) -> f64 {
        0.1 + rng.random::<f64>()
    }
}

/// `K_p(μ)` on the default grid plus the directions of the body's vertices.
pub fn ball_body(mu: &ExpMeasure, p: f64) -> Result<RadialBody> {
    let grid = default_grid_size(mu.dim());
    ball_body_on(mu, p, grid)
}

pub fn ball_body_on(mu: &ExpMeasure, p: f64, grid: usize) -> Result<RadialBody> {
    if !(p > 0.0) {
        return Err(GeomError::NonPositiveP(p));
    }
    let n = mu.dim();
    let zero = Vector::zeros(n);
    if mu.body().margin(&zero) <= 0.0 {
        return Err(GeomError::ZeroAtOrigin);
    }
    let mut dirs = sphere_directions(n, grid);
    if let Ok(vs) = mu.body().vertices() {
        for v in vs {
            let norm = v.norm();
            if norm > 0.0 {
                dirs.push(v / norm);
            }
        }
    }
    let radii = map_chunks(dirs.len(), |i| mu.ball_radius(&dirs[i], p));
    let radii = radii.into_iter().collect::<Result<Vec<f64>>>()?;
    let mut body = RadialBody::from_grid(dirs, radii)?;
    body.source = Some((mu.clone(), p));
    Ok(body)
}

#[derive(Debug, Clone, Serialize)]
pub struct SandwichCheck {
    pub m: f64,
    pub slack: f64,
    /// `max_θ ρ_T(θ) / (m ρ_{K-x0}(θ))`; at most `slack` when `(1/m) T ⊆ K - x0`.
    pub inner_ratio: f64,
    /// `max_θ ρ_{K-x0}(θ) / (m ρ_T(θ))`; at most `slack` when `K - x0 ⊆ m T`.
    pub outer_ratio: f64,
    pub directions: usize,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct FunctionBody {
    /// `K_{n+1}(g)` as the hull of its boundary grid points.
    pub t: ConvexBody,
    pub radial: RadialBody,
    pub x0: Vector,
    pub sandwich: SandwichCheck,
    pub l_t: f64,
    pub l_f: f64,
}

/// The body `T = K_{n+1}(g)`, `g(x) = f(x + x0)` with `x0` the barycenter of `f`,
/// together with the sandwich `(1/m) T ⊆ K - x0 ⊆ m T` checked on random directions.
pub fn body_from_function(f: &ExpMeasure, m: f64, seed: u64) -> Result<FunctionBody> {
    body_from_function_with(f, m, seed, default_grid_size(f.dim()))
}

pub fn body_from_function_with(f: &ExpMeasure, m: f64, seed: u64, grid: usize) -> Result<FunctionBody> {
    let n = f.dim();
    let ratio = f.range_ratio();
    let allowed = m.powi(n as i32);
    if ratio > allowed * (1.0 + 1e-12) {
        return Err(GeomError::RangeRatioExceeded { ratio, allowed });
    }
    let x0 = f.barycenter()?;
    let g = f.shifted(&x0)?;
    let radial = ball_body_on(&g, n as f64 + 1.0, grid)?;
    let t = radial.to_polytope()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let directions = 200;
    let mut inner: f64 = 0.0;
    let mut outer: f64 = 0.0;
    for _ in 0..directions {
        let u = random_unit(&mut rng, n);
        let rt = radial.radius(&u);
        let rk = g.body().radial(&u)?;
        inner = inner.max(rt / (m * rk));
        outer = outer.max(rk / (m * rt));
    }
    let sandwich = SandwichCheck {
        m,
        slack: SANDWICH_SLACK,
        inner_ratio: inner,
        outer_ratio: outer,
        directions,
        pass: inner <= SANDWICH_SLACK && outer <= SANDWICH_SLACK,
    };
    Ok(FunctionBody {
        l_t: isotropic_constant(&t)?,
        l_f: l_mu(f)?,
        t,
        radial,
        x0,
        sandwich,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn square() -> ConvexBody {
        let a = Matrix::from_row_slice(4, 2, &[1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0]);
        ConvexBody::hpolytope(a, Vector::from_element(4, 1.0)).unwrap()
    }

    /// Composite Simpson rule on [0, r].
    fn simpson(f: impl Fn(f64) -> f64, r: f64) -> f64 {
        let m = 20_000;
        let h = r / m as f64;
        let mut s = f(0.0) + f(r);
        for i in 1..m {
            s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn ray_integral_agrees_with_quadrature() {
        for &(a, r, p) in &[(1.0, 1.0, 3.0), (-2.5, 1.3, 4.0), (1e-6, 2.0, 3.0), (-1e-7, 0.5, 6.0), (12.0, 1.0, 2.0), (-30.0, 1.0, 3.0)] {
            let q = simpson(|x: f64| (a * x).exp() * x.powf(p - 1.0), r);
            let s = ray_integral(a, r, p);
            assert!((s - q).abs() < 1e-9 * q.abs(), "a={a} r={r} p={p}: {s} vs {q}");
        }
    }

    #[test]
    fn exponential_on_square_along_axis() {
        let mu = ExpMeasure::new(square(), Vector::from_vec(vec![1.0, 0.0])).unwrap();
        let r = mu.ball_radius(&Vector::from_vec(vec![1.0, 0.0]), 3.0).unwrap();
        let oracle = (3.0 * simpson(|x: f64| x.exp() * x * x, 1.0)).cbrt();
        assert!((r - oracle).abs() < 1e-10);
        assert!((r - 1.291632).abs() < 1e-6);
    }

    #[test]
    fn indicator_gives_the_body_back() {
        let k = square();
        let rb = ball_body(&ExpMeasure::indicator(k.clone()), 2.5).unwrap();
        for (d, r) in rb.dirs.iter().zip(&rb.radii) {
            assert!((r - k.radial(d).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn origin_outside_rejected() {
        let k = translate(&square(), &Vector::from_vec(vec![3.0, 0.0])).unwrap();
        assert_eq!(ball_body(&ExpMeasure::indicator(k), 2.0).unwrap_err(), GeomError::ZeroAtOrigin);
        assert_eq!(
            ball_body(&ExpMeasure::indicator(square()), 0.0).unwrap_err(),
            GeomError::NonPositiveP(0.0)
        );
    }

    #[test]
    fn range_ratio_is_enforced() {
        let mu = ExpMeasure::new(square(), Vector::from_vec(vec![1.0, 0.0])).unwrap();
        // ratio e^2 needs m >= e
        assert!(matches!(
            body_from_function(&mu, 2.0, 1),
            Err(GeomError::RangeRatioExceeded { .. })
        ));
        let fb = body_from_function_with(&mu, 1f64.exp(), 1, 360).unwrap();
        assert!(fb.sandwich.pass, "{:?}", fb.sandwich);
    }
}
