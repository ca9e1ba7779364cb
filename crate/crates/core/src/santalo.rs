//! Santaló points, volume products and the lower bounds for them.

use serde::{Deserialize, Serialize};

use crate::bodies::{difference_body, polar, translate, ConvexBody};
use crate::error::{GeomError, Result};
use crate::laplace::{klartag_body, KlartagConfig};
use crate::linalg::{factorial, serde_vec, sphere_directions, unit_ball_volume, Matrix, Vector};
use crate::randgeom::{isotropic_constant, mc_volume, SampleConfig};
use crate::report::{Cell, Tabular};

/// Initial damping of the Newton step.
pub const SANTALO_DAMPING: f64 = 0.5;
/// Desk floor for the measured constant `c_1`.
pub const C1_FLOOR: f64 = 0.5;
/// Desk floor for `n s(K)^{1/n}` on symmetric bodies.
pub const MAHLER_FLOOR: f64 = 8.0;

#[derive(Debug, Clone, Serialize)]
pub struct SantaloPoint {
    #[serde(with = "serde_vec")]
    pub z: Vector,
    /// `|bar((K - z)°)| / diam((K - z)°)`.
    pub residual: f64,
    pub iterations: usize,
    /// `|(K - z_k)°|` along the iteration.
    pub polar_volumes: Vec<f64>,
    /// `|(K - z ± δ e_i)°| >= |(K - z)°|` for all `2n` probes.
    pub local_min: bool,
}

struct PolarStats {
    volume: f64,
    bar: Vector,
    second: Matrix,
    diam: f64,
}

fn polar_stats(k: &ConvexBody, z: &Vector) -> Result<PolarStats> {
    let p = polar(k, z)?;
    let m = p.exact_moments();
    let second = &m.covariance + &m.barycenter * m.barycenter.transpose();
    let diam = 2.0 * p.polytope_points().iter().map(|v| v.norm()).fold(0.0, f64::max);
    Ok(PolarStats {
        volume: m.volume,
        bar: m.barycenter.clone(),
        second,
        diam,
    })
}

/// Minimizer of `x -> |(K - x)°|`, found by damped Newton steps on the polar volume.
pub fn santalo_point(k: &ConvexBody) -> Result<SantaloPoint> {
    let n = k.dim();
    if let Some(e) = k.as_ellipsoid() {
        return Ok(SantaloPoint {
            z: e.center().clone(),
            residual: 0.0,
            iterations: 0,
            polar_volumes: vec![polar(k, e.center())?.volume()],
            local_min: true,
        });
    }
    let mut z = k.barycenter();
    let mut st = polar_stats(k, &z)?;
    let mut vols = vec![st.volume];
    let mut eta = SANTALO_DAMPING;
    let max_iter = 200;
    let mut it = 0;
    let mut residual = st.bar.norm() / st.diam;
    while residual > 1e-6 && it < max_iter {
        it += 1;
        // gradient (n+1)|P| bar(P), Hessian (n+1)(n+2)|P| E[y y^T]
        let step = st
            .second
            .clone()
            .lu()
            .solve(&st.bar)
            .ok_or_else(|| GeomError::DegenerateBody("singular polar second moment".into()))?
            / -(n as f64 + 2.0);
        let mut accepted = false;
        let mut tries = 0;
        while !accepted && tries < 40 {
            let cand = &z + &step * eta;
            match polar_stats(k, &cand) {
                Ok(next) if next.volume <= st.volume * (1.0 + 1e-14) => {
                    z = cand;
                    st = next;
                    accepted = true;
                    eta = (eta * 2.0).min(1.0);
                }
                _ => {
                    eta *= 0.5;
                    tries += 1;
                }
            }
        }
        vols.push(st.volume);
        residual = st.bar.norm() / st.diam;
        if !accepted {
            break;
        }
    }
    if residual > 1e-6 {
        return Err(GeomError::NoConvergence {
            best: z.iter().copied().collect(),
            residual,
            iterations: it,
        });
    }
    let delta = 1e-4 * k.scale();
    let mut local_min = true;
    for i in 0..n {
        for s in [-1.0, 1.0] {
            let mut p = z.clone();
            p[i] += s * delta;
            if polar(k, &p)?.volume() < st.volume * (1.0 - 1e-12) {
                local_min = false;
            }
        }
    }
    Ok(SantaloPoint {
        z,
        residual,
        iterations: it,
        polar_volumes: vols,
        local_min,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterChoice {
    Origin,
    Santalo,
    Barycenter,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeMethod {
    Exact,
    MonteCarlo { seed: u64, samples: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct VolumeProductReport {
    pub body_id: String,
    pub n: usize,
    pub s: f64,
    pub s_ratio: f64,
    pub n_s_root: f64,
    pub center_used: CenterChoice,
    #[serde(with = "serde_vec")]
    pub center: Vector,
    pub volume: f64,
    pub polar_volume: f64,
    /// Standard error of `s`; zero for exact volumes.
    pub s_stderr: f64,
    /// `4^n / n!`.
    pub mahler_value: f64,
}

/// `s(B_2^n) = ω_n^2`.
pub fn ball_volume_product(n: usize) -> f64 {
    unit_ball_volume(n).powi(2)
}

/// `s(K) = |K| |(K - c)°|` about the chosen centre.
pub fn volume_product(k: &ConvexBody, center: CenterChoice, method: VolumeMethod) -> Result<VolumeProductReport> {
    let n = k.dim();
    let c = match center {
        CenterChoice::Origin => Vector::zeros(n),
        CenterChoice::Barycenter => k.barycenter(),
        CenterChoice::Santalo => santalo_point(k)?.z,
    };
    let p = polar(k, &c)?;
    let (vk, vp, se) = match method {
        VolumeMethod::Exact => (k.volume(), p.volume(), 0.0),
        VolumeMethod::MonteCarlo { seed, samples } => {
            let cfg = SampleConfig::new(seed, samples);
            let (a, sa) = mc_volume(k, &cfg)?;
            let (b, sb) = mc_volume(&p, &cfg.fork(1))?;
            (a, b, ((sa / a).powi(2) + (sb / b).powi(2)).sqrt() * a * b)
        }
    };
    let s = vk * vp;
    Ok(VolumeProductReport {
        body_id: String::new(),
        n,
        s,
        s_ratio: s / ball_volume_product(n),
        n_s_root: n as f64 * s.powf(1.0 / n as f64),
        center_used: center,
        center: c,
        volume: vk,
        polar_volume: vp,
        s_stderr: se,
        mahler_value: 4f64.powi(n as i32) / factorial(n),
    })
}

/// Santaló point for asymmetric bodies, origin otherwise.
pub fn default_center(k: &ConvexBody) -> CenterChoice {
    if k.is_symmetric(1e-9) && k.barycenter().amax() <= 1e-9 * k.scale() {
        CenterChoice::Origin
    } else {
        CenterChoice::Santalo
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Prop31Report {
    pub body_id: String,
    pub n: usize,
    /// `4 |K|^{1/n} |nK°|^{1/n}`.
    pub left: f64,
    /// `|K-K|^{1/n} |n(K-K)°|^{1/n}`.
    pub middle: f64,
    pub l_k: f64,
    /// `middle · L_K`.
    pub c1: f64,
    pub pass_inclusion: bool,
    pub pass_c1: bool,
}

/// `4|K|^{1/n}|nK°|^{1/n} >= |K-K|^{1/n}|n(K-K)°|^{1/n} >= c_1 / L_K`, with the polar about the origin.
pub fn prop_3_1_check(k: &ConvexBody) -> Result<Prop31Report> {
    let n = k.dim();
    let nf = n as f64;
    let zero = Vector::zeros(n);
    let kp = polar(k, &zero)?;
    let d = difference_body(k)?;
    let dp = polar(&d, &zero)?;
    let root = |v: f64| v.powf(1.0 / nf);
    let left = 4.0 * root(k.volume()) * nf * root(kp.volume());
    let middle = root(d.volume()) * nf * root(dp.volume());
    let l_k = isotropic_constant(k)?;
    let c1 = middle * l_k;
    Ok(Prop31Report {
        body_id: String::new(),
        n,
        left,
        middle,
        l_k,
        c1,
        pass_inclusion: left >= middle * (1.0 - 1e-9),
        pass_c1: c1 >= C1_FLOOR,
    })
}

/// Row of the volume-product table.
#[derive(Debug, Clone, Serialize)]
pub struct SantaloRow {
    pub body_id: String,
    pub n: usize,
    pub s: f64,
    pub s_ratio: f64,
    pub n_s_root: f64,
    pub l: f64,
    pub c1_measured: f64,
    pub santalo_residual: f64,
}

impl Tabular for SantaloRow {
    fn columns() -> Vec<&'static str> {
        vec!["body_id", "n", "s", "s_ratio", "n_s_root", "L", "c1_measured", "santalo_residual"]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            self.body_id.clone().into(),
            self.n.into(),
            self.s.into(),
            self.s_ratio.into(),
            self.n_s_root.into(),
            self.l.into(),
            self.c1_measured.into(),
            self.santalo_residual.into(),
        ]
    }
}

pub fn santalo_row(k: &ConvexBody, body_id: &str) -> Result<SantaloRow> {
    let center = default_center(k);
    let vp = volume_product(k, center, VolumeMethod::Exact)?;
    let residual = match center {
        CenterChoice::Santalo => santalo_point(k)?.residual,
        _ => {
            let p = polar(k, &vp.center)?;
            p.barycenter().norm() / (2.0 * p.polytope_points().iter().map(|v| v.norm()).fold(0.0, f64::max))
        }
    };
    let p31 = prop_3_1_check(&translate(k, &-&vp.center)?)?;
    Ok(SantaloRow {
        body_id: body_id.to_string(),
        n: k.dim(),
        s: vp.s,
        s_ratio: vp.s_ratio,
        n_s_root: vp.n_s_root,
        l: p31.l_k,
        c1_measured: p31.c1,
        santalo_residual: residual,
    })
}

/// One body of the reverse Santaló scan.
#[derive(Debug, Clone, Serialize)]
pub struct Thm33Row {
    pub body_id: String,
    pub n: usize,
    pub symmetric: bool,
    pub s: f64,
    pub s_ratio: f64,
    pub n_s_root: f64,
    pub l_t: f64,
    /// `max ρ_T / ρ_{K+x}`; `(2/3) T ⊆ K + x` iff at most 3/2.
    pub sandwich_inner: f64,
    /// `max ρ_{K+x} / ρ_T`; `K + x ⊆ (3/2) T` iff at most 3/2.
    pub sandwich_outer: f64,
    /// `max_u (h_K(u) + h_K(-u)) / ((3/2)(h_T(u) + h_T(-u)))`; at most one iff `K-K ⊆ (3/2)(T-T)`.
    pub polar_comparison: f64,
    pub pass_sandwich: bool,
    pub pass_santalo: bool,
    pub pass_mahler: bool,
    pub pass: bool,
}

impl Tabular for Thm33Row {
    fn columns() -> Vec<&'static str> {
        vec![
            "body_id",
            "n",
            "symmetric",
            "s",
            "s_ratio",
            "n_s_root",
            "L_T",
            "sandwich_inner",
            "sandwich_outer",
            "polar_comparison",
            "pass_sandwich",
            "pass_santalo",
            "pass_mahler",
            "pass",
        ]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            self.body_id.clone().into(),
            self.n.into(),
            self.symmetric.into(),
            self.s.into(),
            self.s_ratio.into(),
            self.n_s_root.into(),
            self.l_t.into(),
            self.sandwich_inner.into(),
            self.sandwich_outer.into(),
            self.polar_comparison.into(),
            self.pass_sandwich.into(),
            self.pass_santalo.into(),
            self.pass_mahler.into(),
            self.pass.into(),
        ]
    }
}

/// Runs the tilt construction with `ε = 1/2` on `K`, checks `(2/3)T ⊆ K + x ⊆ (3/2)T`
/// and `K - K ⊆ (3/2)(T - T)` on 200 directions, and records `n s(K)^{1/n}`.
pub fn thm_3_3_body(k: &ConvexBody, body_id: &str, cfg: &KlartagConfig) -> Result<Thm33Row> {
    let n = k.dim();
    let symmetric = default_center(k) == CenterChoice::Origin;
    let vp = volume_product(k, default_center(k), VolumeMethod::Exact)?;
    let res = klartag_body(k, cfg)?;
    let kx = translate(k, &res.x)?;
    let mut inner: f64 = 0.0;
    let mut outer: f64 = 0.0;
    let mut cmp: f64 = 0.0;
    for u in sphere_directions(n, 200) {
        let rt = res.t.radial(&u)?;
        let rk = kx.radial(&u)?;
        inner = inner.max(rt / rk);
        outer = outer.max(rk / rt);
        let wk = k.support(&u) + k.support(&-&u);
        let wt = res.t.support(&u) + res.t.support(&-&u);
        cmp = cmp.max(wk / (1.5 * wt));
    }
    let pass_sandwich = inner <= 1.5 && outer <= 1.5 && cmp <= 1.0;
    let pass_santalo = vp.s_ratio <= 1.0 + 1e-9;
    let pass_mahler = !symmetric || vp.n_s_root >= MAHLER_FLOOR;
    Ok(Thm33Row {
        body_id: body_id.to_string(),
        n,
        symmetric,
        s: vp.s,
        s_ratio: vp.s_ratio,
        n_s_root: vp.n_s_root,
        l_t: res.l_t,
        sandwich_inner: inner,
        sandwich_outer: outer,
        polar_comparison: cmp,
        pass_sandwich,
        pass_santalo,
        pass_mahler,
        pass: pass_sandwich && pass_santalo && pass_mahler,
    })
}

pub fn thm_3_3_scan(bodies: &[(String, ConvexBody)], cfg: &KlartagConfig) -> Result<Vec<Thm33Row>> {
    let rows = crate::randgeom::map_chunks(bodies.len(), |i| thm_3_3_body(&bodies[i].1, &bodies[i].0, cfg));
    rows.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::{affine_image, AffineMap};

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
    fn square_volume_product_is_eight() {
        let r = volume_product(&cube(2), CenterChoice::Origin, VolumeMethod::Exact).unwrap();
        assert!((r.s - 8.0).abs() < 1e-12);
        assert!((r.s - r.mahler_value).abs() < 1e-12);
    }

    #[test]
    fn disc_volume_product() {
        let b = ConvexBody::ball(2, 1.0).unwrap();
        let r = volume_product(&b, CenterChoice::Origin, VolumeMethod::Exact).unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((r.s - pi2).abs() < 1e-12);
        let mc = volume_product(&b, CenterChoice::Origin, VolumeMethod::MonteCarlo { seed: 4, samples: 200_000 }).unwrap();
        assert!((mc.s / pi2 - 1.0).abs() < 0.02);
    }

    #[test]
    fn triangle_santalo_point_is_centroid() {
        let sp = santalo_point(&triangle()).unwrap();
        assert!((&sp.z - Vector::from_vec(vec![1.0 / 3.0, 1.0 / 3.0])).amax() < 1e-6);
        assert!(sp.local_min);
        assert!(sp.polar_volumes.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-14)));
        // grid oracle
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for i in 1..60 {
            for j in 1..60 - i {
                let p = Vector::from_vec(vec![i as f64 / 60.0, j as f64 / 60.0]);
                let v = polar(&triangle(), &p).unwrap().volume();
                if v < best.0 {
                    best = (v, p[0], p[1]);
                }
            }
        }
        assert!((best.1 - 1.0 / 3.0).abs() < 0.02 && (best.2 - 1.0 / 3.0).abs() < 0.02);
    }

    #[test]
    fn santalo_point_is_equivariant() {
        let k = ConvexBody::vpolytope(vec![
            Vector::from_vec(vec![0.0, 0.0]),
            Vector::from_vec(vec![2.0, 0.1]),
            Vector::from_vec(vec![1.5, 1.0]),
            Vector::from_vec(vec![-0.3, 0.8]),
        ])
        .unwrap();
        let t = AffineMap::new(Matrix::from_row_slice(2, 2, &[1.3, 0.4, -0.2, 0.9]), Vector::from_vec(vec![0.5, -2.0])).unwrap();
        let z = santalo_point(&k).unwrap().z;
        let z2 = santalo_point(&affine_image(&k, &t).unwrap()).unwrap().z;
        assert!((t.apply(&z) - z2).amax() < 1e-5);
    }

    #[test]
    fn square_lower_bound_constant() {
        let r = prop_3_1_check(&cube(2)).unwrap();
        assert!((r.middle - 2.0 * 8f64.sqrt()).abs() < 1e-9);
        assert!((r.c1 - 2.0 * 8f64.sqrt() / 12f64.sqrt()).abs() < 1e-9);
        assert!(r.pass_inclusion && r.pass_c1);
    }

    #[test]
    fn volume_product_is_linear_invariant() {
        let k = cube(3);
        let s0 = volume_product(&k, CenterChoice::Origin, VolumeMethod::Exact).unwrap().s;
        let t = AffineMap::linear_map(Matrix::from_row_slice(3, 3, &[1.0, 0.5, 0.0, 0.2, 2.0, 0.1, 0.0, -0.3, 0.7])).unwrap();
        let s1 = volume_product(&affine_image(&k, &t).unwrap(), CenterChoice::Origin, VolumeMethod::Exact).unwrap().s;
        assert!((s0 - s1).abs() < 1e-9 * s0);
    }
}
