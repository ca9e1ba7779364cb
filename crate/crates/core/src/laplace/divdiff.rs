//! Divided differences of `exp` over simplex vertex exponents.
//!
//! With barycentric coordinates `λ` on the standard simplex,
//! `∫ e^{Σ λ_k t_k} dλ = exp[t_0..t_n]`, and differentiating in the nodes gives
//! `∫ λ_i e = exp[t, t_i]` and `∫ λ_i λ_j e = exp[t, t_i, t_j]` (`2 exp[t, t_i, t_i]` on the diagonal).
//! After shifting by the smallest node every node is non-negative, so the series
//! `exp[u_0..u_m] = Σ_k h_k(u) / (k+m)!` has positive terms and no cancellation.

/// Exponent spread above which the series would overflow.
pub const MAX_SPREAD: f64 = 600.0;

/// Integrals of `e^{<ξ,x>}`, `λ_i e^{<ξ,x>}` and `λ_i λ_j e^{<ξ,x>}` over the standard simplex,
/// all scaled by `e^{-shift}`.
#[derive(Debug, Clone)]
pub struct SimplexExp {
    pub shift: f64,
    pub d0: f64,
    pub d1: Vec<f64>,
    /// Row-major `(n+1) x (n+1)`; empty unless second moments were requested.
    pub d2: Vec<f64>,
}

fn tail_coeffs(kmax: usize, m: usize) -> Vec<f64> {
    // k! / (k+m)!
    (0..=kmax)
        .map(|k| {
            let mut c = 1.0;
            for j in 1..=m {
                c /= (k + j) as f64;
            }
            c
        })
        .collect()
}

/// `t` holds the vertex exponents. Returns `None` if their spread exceeds [`MAX_SPREAD`].
pub fn simplex_exp(t: &[f64], second: bool) -> Option<SimplexExp> {
    let m = t.len() - 1;
    let tmin = t.iter().copied().fold(f64::INFINITY, f64::min);
    let u: Vec<f64> = t.iter().map(|x| x - tmin).collect();
    let umax = u.iter().copied().fold(0.0, f64::max);
    if !(umax <= MAX_SPREAD) {
        return None;
    }

    Some(series(&u, m, umax, second, tmin))
}

fn series(u: &[f64], m: usize, umax: f64, second: bool, tmin: f64) -> SimplexExp {
    // terms behave like umax^k / k!, so 2 umax + 40 terms reach machine precision
    let kmax = (2.0 * umax).ceil() as usize + 40 + m;
    // h[k] = h_k(u) / k!, built one node at a time
    let mut h = vec![0.0; kmax + 1];
    h[0] = 1.0;
    let mut cur = vec![0.0; kmax + 1];
    for &uj in u {
        cur[0] = 1.0;
        for k in 1..=kmax {
            cur[k] = h[k] + uj / k as f64 * cur[k - 1];
        }
        std::mem::swap(&mut h, &mut cur);
    }
    let c0 = tail_coeffs(kmax, m);
    let c1 = tail_coeffs(kmax, m + 1);
    let d0 = dot(&h, &c0);

    let mut g1 = vec![vec![0.0; kmax + 1]; m + 1];
    let mut d1 = vec![0.0; m + 1];
    for i in 0..=m {
        let g = &mut g1[i];
        g[0] = 1.0;
        for k in 1..=kmax {
            g[k] = h[k] + u[i] / k as f64 * g[k - 1];
        }
        d1[i] = dot(g, &c1);
    }

    let mut d2 = Vec::new();
    if second {
        let c2 = tail_coeffs(kmax, m + 2);
        d2 = vec![0.0; (m + 1) * (m + 1)];
        let mut g = vec![0.0; kmax + 1];
        for i in 0..=m {
            for j in i..=m {
                g[0] = 1.0;
                for k in 1..=kmax {
                    g[k] = g1[i][k] + u[j] / k as f64 * g[k - 1];
                }
                let mut v = dot(&g, &c2);
                if i == j {
                    v *= 2.0;
                }
                d2[i * (m + 1) + j] = v;
                d2[j * (m + 1) + i] = v;
            }
        }
    }
    SimplexExp {
        shift: tmin,
        d0,
        d1,
        d2,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Integral of `f(λ)` over the standard triangle by a fine midpoint rule.
    fn triangle_quad(t: [f64; 3], f: impl Fn(f64, f64, f64) -> f64) -> f64 {
        let m = 600;
        let h = 1.0 / m as f64;
        let mut s = 0.0;
        for i in 0..m {
            for j in 0..m - i {
                // two sub-triangles per cell; use centroids
                let a = (i as f64 + 1.0 / 3.0) * h;
                let b = (j as f64 + 1.0 / 3.0) * h;
                let c = 1.0 - a - b;
                s += f(a, b, c) * (t[1] * a + t[2] * b + t[0] * c).exp();
                if j < m - i - 1 {
                    let a = (i as f64 + 2.0 / 3.0) * h;
                    let b = (j as f64 + 2.0 / 3.0) * h;
                    let c = 1.0 - a - b;
                    s += f(a, b, c) * (t[1] * a + t[2] * b + t[0] * c).exp();
                }
            }
        }
        s * h * h / 2.0
    }

    #[test]
    fn equal_nodes_reduce_to_factorials() {
        let r = simplex_exp(&[0.7, 0.7, 0.7, 0.7], true).unwrap();
        let e = 0.7f64.exp();
        assert!((r.d0 * r.shift.exp() - e / 6.0).abs() < 1e-15);
        assert!((r.d1[2] * r.shift.exp() - e / 24.0).abs() < 1e-15);
        assert!((r.d2[5] * r.shift.exp() - 2.0 * e / 120.0).abs() < 1e-15);
        assert!((r.d2[1] * r.shift.exp() - e / 120.0).abs() < 1e-15);
    }

    #[test]
    fn two_nodes_closed_form() {
        let (a, b) = (-0.3, 1.9);
        let r = simplex_exp(&[a, b], false).unwrap();
        let exact = (f64::exp(b) - f64::exp(a)) / (b - a);
        assert!(((r.d0 * r.shift.exp()) - exact).abs() < 1e-14 * exact);
    }

    #[test]
    fn nearly_equal_nodes_stay_accurate() {
        let (a, b) = (1.0, 1.0 + 1e-9);
        let r = simplex_exp(&[a, b], false).unwrap();
        let exact = f64::exp(a) * (1e-9f64).exp_m1() / 1e-9;
        assert!(((r.d0 * r.shift.exp()) - exact).abs() < 1e-15 * exact);
    }

    #[test]
    fn matches_triangle_quadrature() {
        let t = [0.4, -1.2, 2.1];
        let r = simplex_exp(&t, true).unwrap();
        let s = r.shift.exp();
        let q0 = triangle_quad(t, |_, _, _| 1.0);
        let q1 = triangle_quad(t, |a, _, _| a);
        let q12 = triangle_quad(t, |a, b, _| a * b);
        let q11 = triangle_quad(t, |a, _, _| a * a);
        assert!((r.d0 * s - q0).abs() < 1e-5 * q0);
        assert!((r.d1[1] * s - q1).abs() < 1e-5 * q1);
        assert!((r.d2[1 * 3 + 2] * s - q12).abs() < 1e-4 * q12);
        assert!((r.d2[1 * 3 + 1] * s - q11).abs() < 1e-4 * q11);
    }

    #[test]
    fn large_spread_is_positive_and_finite() {
        let r = simplex_exp(&[0.0, -300.0, -150.0], true).unwrap();
        assert!(r.d0.is_finite() && r.d0 > 0.0);
        // exp[0, -300, -150] ≈ 1/(300*150) for well separated nodes
        let approx = 1.0 / (300.0 * 150.0);
        assert!((r.d0 * r.shift.exp() - approx).abs() < 1e-3 * approx);
        assert!(simplex_exp(&[0.0, -700.0], false).is_none());
    }
}
