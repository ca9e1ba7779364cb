//! M-ellipsoids built from the isotropic position of a tilted body, M-position
//! images, and the reverse Brunn-Minkowski and volume-product consequences.

use serde::Serialize;

use crate::bodies::{affine_image, minkowski_sum_bodies, polar0, AffineMap, ConvexBody, Ellipsoid};
use crate::covering::{covering_number, covering_symmetry_rows, sum_volume, CheckRow, CoveringConfig, NET_SLACK};
use crate::error::{GeomError, Result};
use crate::laplace::{klartag_body, KlartagConfig};
use crate::linalg::{unit_ball_volume, Matrix, Vector};
use crate::randgeom::isotropic_map;
use crate::report::{Cell, Tabular};
use crate::santalo::ball_volume_product;

/// Desk floor for the measured M-position constant.
pub const BETA_FLOOR: f64 = 2.5;
/// Desk floor for the reverse Brunn-Minkowski ratio.
pub const REVERSE_BM_FLOOR: f64 = 8.0;

#[derive(Debug, Clone, Default)]
pub struct MConfig {
    pub klartag: KlartagConfig,
    pub covering: CoveringConfig,
}

/// `N(K, E)`, `N(E, K)`, `N(K°, E°)`, `N(E°, K°)` from audited nets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FourCoverings {
    #[serde(rename = "K_in_E")]
    pub k_in_e: usize,
    #[serde(rename = "E_in_K")]
    pub e_in_k: usize,
    #[serde(rename = "Kpolar_in_Epolar")]
    pub kpolar_in_epolar: usize,
    #[serde(rename = "Epolar_in_Kpolar")]
    pub epolar_in_kpolar: usize,
}

impl FourCoverings {
    pub fn max(&self) -> usize {
        self.k_in_e.max(self.e_in_k).max(self.kpolar_in_epolar).max(self.epolar_in_kpolar)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MPositionCert {
    pub body_id: String,
    pub ellipsoid: Ellipsoid,
    pub beta_measured: f64,
    #[serde(skip)]
    pub position_map: AffineMap,
    pub volumes_equal: f64,
    /// Scale with `E = Q^{-1}(a √n B)` for the isotropic map `Q` of the tilted body.
    pub a: f64,
    /// `|Q(K)|^{1/n}`, the quantity that makes `a ≃ 1` up to `|√n B|^{1/n}`.
    pub q_volume_root: f64,
    pub covering: FourCoverings,
    /// `N(K, E)^{1/n} / (|K + E|^{1/n} / |E|^{1/n})`.
    pub entropy_ratio: f64,
}

impl MPositionCert {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&serde_json::json!({
            "body_id": self.body_id,
            "ellipsoid": self.ellipsoid,
            "beta_measured": self.beta_measured,
            "covering": self.covering,
        }))
        .expect("json")
    }
}

/// Measures the four covering numbers of `K` against a centred ellipsoid.
pub fn certify(k: &ConvexBody, e: &Ellipsoid, cfg: &CoveringConfig) -> Result<(FourCoverings, f64)> {
    let eb: ConvexBody = e.clone().into();
    let kp = polar0(k)?;
    let ep = polar0(&eb)?;
    let c = FourCoverings {
        k_in_e: covering_number(k, &eb, 1.0, cfg)?.upper,
        e_in_k: covering_number(&eb, k, 1.0, &cfg_tag(cfg, 1))?.upper,
        kpolar_in_epolar: covering_number(&kp, &ep, 1.0, &cfg_tag(cfg, 2))?.upper,
        epolar_in_kpolar: covering_number(&ep, &kp, 1.0, &cfg_tag(cfg, 3))?.upper,
    };
    let beta = (c.max() as f64).ln() / k.dim() as f64;
    Ok((c, beta))
}

fn cfg_tag(cfg: &CoveringConfig, tag: u64) -> CoveringConfig {
    let mut c = cfg.clone();
    c.seed = crate::randgeom::mix(cfg.seed, tag);
    c
}

fn require_centered(k: &ConvexBody) -> Result<()> {
    let b = k.barycenter();
    if b.amax() > 1e-8 * k.scale() {
        return Err(GeomError::InvalidBody(format!("body is not centered (|bar| = {:e})", b.norm())));
    }
    Ok(())
}

/// `E_K = Q^{-1}(a √n B)` with `Q` the isotropic map of the body `T` from the tilt
/// construction (linear part only, so `E_K` is centred) and `|E_K| = |K|`.
pub fn m_ellipsoid(k: &ConvexBody, body_id: &str, cfg: &MConfig) -> Result<MPositionCert> {
    require_centered(k)?;
    let n = k.dim();
    let nf = n as f64;
    let res = klartag_body(k, &cfg.klartag)?;
    let q = isotropic_map(&res.t)?;
    let lin = q.linear().clone();
    let det = lin.determinant().abs();
    let q_volume = k.volume() * det;
    let a = (q_volume / unit_ball_volume(n)).powf(1.0 / nf) / nf.sqrt();
    let r = a * nf.sqrt();
    // E = {x : |Q x| <= r}
    let shape = lin.transpose() * &lin / (r * r);
    let e = Ellipsoid::new(Vector::zeros(n), (&shape + shape.transpose()) * 0.5)?;
    let volumes_equal = (1.0 - e.volume() / k.volume()).abs();
    let (covering, beta) = certify(k, &e, &cfg.covering)?;
    let eb: ConvexBody = e.clone().into();
    let entropy = (covering.k_in_e as f64).powf(1.0 / nf) / (sum_volume(k, &eb)? / e.volume()).powf(1.0 / nf);
    Ok(MPositionCert {
        body_id: body_id.to_string(),
        position_map: position_map(&e)?,
        ellipsoid: e,
        beta_measured: beta,
        volumes_equal,
        a,
        q_volume_root: q_volume.powf(1.0 / nf),
        covering,
        entropy_ratio: entropy,
    })
}

/// Volume-preserving linear map sending `E = {x : x^T M x <= 1}` to a ball.
fn position_map(e: &Ellipsoid) -> Result<AffineMap> {
    let n = e.dim();
    let root = crate::linalg::sym_sqrt(e.shape()).ok_or_else(|| GeomError::DegenerateBody("ellipsoid shape".into()))?;
    let det = root.determinant();
    AffineMap::linear_map(root / det.powf(1.0 / n as f64))
}

/// The image of `K` under its position map together with a re-certificate against the round
/// ellipsoid `r_K B`.
pub fn m_position_image(k: &ConvexBody, body_id: &str, cfg: &MConfig) -> Result<(ConvexBody, AffineMap, MPositionCert)> {
    let cert = m_ellipsoid(k, body_id, cfg)?;
    m_position_from_cert(k, &cert, &cfg.covering)
}

pub fn m_position_from_cert(
    k: &ConvexBody,
    cert: &MPositionCert,
    cfg: &CoveringConfig,
) -> Result<(ConvexBody, AffineMap, MPositionCert)> {
    let map = cert.position_map.clone();
    let image = affine_image(k, &map)?;
    let n = k.dim();
    let nf = n as f64;
    let r = (k.volume() / unit_ball_volume(n)).powf(1.0 / nf);
    let ball = Ellipsoid::ball(Vector::zeros(n), r)?;
    let (covering, beta) = certify(&image, &ball, &cfg_tag(cfg, 17))?;
    let bb: ConvexBody = ball.clone().into();
    let entropy = (covering.k_in_e as f64).powf(1.0 / nf) / (sum_volume(&image, &bb)? / ball.volume()).powf(1.0 / nf);
    let recert = MPositionCert {
        body_id: cert.body_id.clone(),
        volumes_equal: (1.0 - ball.volume() / image.volume()).abs(),
        ellipsoid: ball,
        beta_measured: beta,
        position_map: map.clone(),
        a: cert.a,
        q_volume_root: cert.q_volume_root,
        covering,
        entropy_ratio: entropy,
    };
    Ok((image, map, recert))
}

/// `|A + B|^{1/n} / (|A|^{1/n} + |B|^{1/n})`.
pub fn bm_ratio(a: &ConvexBody, b: &ConvexBody) -> Result<f64> {
    let n = a.dim() as f64;
    let s = minkowski_sum_bodies(a, b)?.volume();
    Ok(s.powf(1.0 / n) / (a.volume().powf(1.0 / n) + b.volume().powf(1.0 / n)))
}

#[derive(Debug, Clone, Serialize)]
pub struct ReverseBmRow {
    pub pair: String,
    /// `primal/primal`, `polar/primal`, `primal/polar` or `polar/polar`.
    pub combo: String,
    pub ratio: f64,
    pub pass: bool,
}

impl Tabular for ReverseBmRow {
    fn columns() -> Vec<&'static str> {
        vec!["pair", "combo", "ratio", "pass"]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![self.pair.clone().into(), self.combo.clone().into(), self.ratio.into(), self.pass.into()]
    }
}

/// Reverse Brunn-Minkowski ratios for all four primal/polar combinations of two bodies
/// already in M-position; each must lie in `[1, 8]`.
pub fn reverse_bm_rows(k1: &ConvexBody, k2: &ConvexBody, pair: &str) -> Result<Vec<ReverseBmRow>> {
    let p1 = polar0(k1)?;
    let p2 = polar0(k2)?;
    let combos = [("primal/primal", k1, k2), ("polar/primal", &p1, k2), ("primal/polar", k1, &p2), ("polar/polar", &p1, &p2)];
    combos
        .iter()
        .map(|(name, a, b)| {
            let ratio = bm_ratio(a, b)?;
            Ok(ReverseBmRow {
                pair: pair.to_string(),
                combo: name.to_string(),
                ratio,
                pass: ratio >= 1.0 - 1e-6 && ratio <= REVERSE_BM_FLOOR,
            })
        })
        .collect()
}

/// Puts both bodies in M-position, then compares sum volumes.
pub fn reverse_bm_check(k1: &ConvexBody, k2: &ConvexBody, pair: &str, cfg: &MConfig) -> Result<Vec<ReverseBmRow>> {
    let (a, _, _) = m_position_image(k1, pair, cfg)?;
    let (b, _, _) = m_position_image(k2, pair, cfg)?;
    reverse_bm_rows(&a, &b, pair)
}

/// Ratio for the needle `[-e, e] x [-1, 1]` and its rotation, with no normalization.
pub fn needle_pancake_ratio(eccentricity: f64) -> Result<f64> {
    let rect = |w: f64, h: f64| {
        ConvexBody::hpolytope(
            Matrix::from_row_slice(4, 2, &[1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0]),
            Vector::from_vec(vec![w, w, h, h]),
        )
    };
    bm_ratio(&rect(eccentricity, 1.0)?, &rect(1.0, eccentricity)?)
}

/// M-position both bodies (equal volume), then `N(K,tL)^{1/n} / N(L,tK)^{1/n}` on the grid.
pub fn covering_symmetry_check(
    k: &ConvexBody,
    l: &ConvexBody,
    ts: &[f64],
    pair: &str,
    cfg: &MConfig,
) -> Result<Vec<CheckRow>> {
    let (a, _, _) = m_position_image(k, pair, cfg)?;
    let (b, _, _) = m_position_image(l, pair, cfg)?;
    let n = k.dim() as f64;
    let b = crate::bodies::scale(&b, (a.volume() / b.volume()).powf(1.0 / n))?;
    covering_symmetry_rows(&a, &b, ts, pair, &cfg.covering)
}

#[derive(Debug, Clone, Serialize)]
pub struct SantaloSandwich {
    pub body_id: String,
    pub s_direct: f64,
    /// `s(B) / (N(E,K) N(E°,K°))`.
    pub s_low: f64,
    /// `s(B) N(K,E) N(K°,E°)`.
    pub s_high: f64,
    /// `(s(K)/s(B))^{1/n}` against `e^{±2β}`.
    pub root_ratio: f64,
    pub beta: f64,
    pub pass: bool,
}

impl Tabular for SantaloSandwich {
    fn columns() -> Vec<&'static str> {
        vec!["body_id", "s_direct", "s_low", "s_high", "root_ratio", "beta", "pass"]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            self.body_id.clone().into(),
            self.s_direct.into(),
            self.s_low.into(),
            self.s_high.into(),
            self.root_ratio.into(),
            self.beta.into(),
            self.pass.into(),
        ]
    }
}

/// Volume product sandwich derived from the four covering counts alone, compared with
/// `|K||K°|` computed directly.
pub fn santalo_from_mposition(k: &ConvexBody, cert: &MPositionCert) -> Result<SantaloSandwich> {
    let n = k.dim();
    let c = &cert.covering;
    let s_ball = ball_volume_product(n);
    let s_direct = k.volume() * polar0(k)?.volume();
    let s_low = s_ball / (c.e_in_k as f64 * c.epolar_in_kpolar as f64);
    let s_high = s_ball * c.k_in_e as f64 * c.kpolar_in_epolar as f64;
    let root_ratio = (s_direct / s_ball).powf(1.0 / n as f64);
    let tol = 1e-9;
    Ok(SantaloSandwich {
        body_id: cert.body_id.clone(),
        s_direct,
        s_low,
        s_high,
        root_ratio,
        beta: cert.beta_measured,
        pass: s_low <= s_direct * (1.0 + tol) && s_direct <= s_high * (1.0 + tol),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CertRow {
    pub body_id: String,
    pub n: usize,
    pub beta: f64,
    pub volumes_equal: f64,
    pub a: f64,
    pub q_volume_root: f64,
    pub k_in_e: usize,
    pub e_in_k: usize,
    pub kpolar_in_epolar: usize,
    pub epolar_in_kpolar: usize,
    pub entropy_ratio: f64,
    pub pass: bool,
}

impl CertRow {
    pub fn from_cert(c: &MPositionCert, n: usize) -> Self {
        CertRow {
            body_id: c.body_id.clone(),
            n,
            beta: c.beta_measured,
            volumes_equal: c.volumes_equal,
            a: c.a,
            q_volume_root: c.q_volume_root,
            k_in_e: c.covering.k_in_e,
            e_in_k: c.covering.e_in_k,
            kpolar_in_epolar: c.covering.kpolar_in_epolar,
            epolar_in_kpolar: c.covering.epolar_in_kpolar,
            entropy_ratio: c.entropy_ratio,
            pass: c.volumes_equal <= 1e-4
                && c.beta_measured.is_finite()
                && c.beta_measured <= BETA_FLOOR
                && c.entropy_ratio <= 8.0 * NET_SLACK,
        }
    }
}

impl Tabular for CertRow {
    fn columns() -> Vec<&'static str> {
        vec![
            "body_id",
            "n",
            "beta",
            "volumes_equal",
            "a",
            "q_volume_root",
            "K_in_E",
            "E_in_K",
            "Kpolar_in_Epolar",
            "Epolar_in_Kpolar",
            "entropy_ratio",
            "pass",
        ]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            self.body_id.clone().into(),
            self.n.into(),
            self.beta.into(),
            self.volumes_equal.into(),
            self.a.into(),
            self.q_volume_root.into(),
            self.k_in_e.into(),
            self.e_in_k.into(),
            self.kpolar_in_epolar.into(),
            self.epolar_in_kpolar.into(),
            self.entropy_ratio.into(),
            self.pass.into(),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::{cross_polytope, cube};

    fn quick() -> MConfig {
        MConfig {
            klartag: KlartagConfig {
                grid: Some(400),
                ..Default::default()
            },
            covering: CoveringConfig {
                samples: 4000,
                audit: 2000,
                candidates: 1500,
                seed: 2,
            },
        }
    }

    #[test]
    fn ellipsoid_is_its_own_m_ellipsoid() {
        let k = ConvexBody::ellipsoid(Vector::zeros(2), Matrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 1.0])).unwrap();
        // T is a fine inscribed polytope of K, so E matches K up to that resolution
        let c = m_ellipsoid(&k, "ell", &quick()).unwrap();
        assert!((c.ellipsoid.shape() - k.as_ellipsoid().unwrap().shape()).amax() < 0.02 * 4.0);
        assert!(c.volumes_equal < 1e-12);
    }

    #[test]
    fn cube_certificate() {
        let c = m_ellipsoid(&cube(3), "cube_n3", &quick()).unwrap();
        assert!(c.volumes_equal < 1e-4);
        assert!(c.beta_measured <= BETA_FLOOR, "{}", c.beta_measured);
        let unit = 3f64.sqrt() * unit_ball_volume(3).powf(1.0 / 3.0);
        let scaled = c.a * unit;
        assert!((scaled - c.q_volume_root).abs() < 1e-9);
        assert!(c.q_volume_root > 0.5 && c.q_volume_root < 2.0);
        let j: serde_json::Value = serde_json::from_str(&c.to_json()).unwrap();
        assert!(j["covering"]["Kpolar_in_Epolar"].as_u64().unwrap() >= 1);
    }

    #[test]
    fn image_preserves_volume() {
        let k = crate::bodies::affine_image(
            &cube(2),
            &AffineMap::linear_map(Matrix::from_row_slice(2, 2, &[3.0, 0.5, 0.0, 0.4])).unwrap(),
        )
        .unwrap();
        let (img, _, cert) = m_position_image(&k, "sheared", &quick()).unwrap();
        assert!((img.volume() / k.volume() - 1.0).abs() < 1e-6);
        assert!(cert.volumes_equal < 1e-4);
        let round = m_position_image(&img, "again", &quick()).unwrap().1;
        assert!((round.linear() - Matrix::identity(2, 2)).amax() < 1e-6);
    }

    #[test]
    fn reverse_bm_cases() {
        let k = cube(3);
        for r in reverse_bm_rows(&k, &k, "self").unwrap() {
            if r.combo == "primal/primal" || r.combo == "polar/polar" {
                assert!((r.ratio - 1.0).abs() < 1e-9);
            }
        }
        let rows = reverse_bm_check(&cube(3), &cross_polytope(3), "cube_cross", &quick()).unwrap();
        assert!(rows[0].ratio <= 2.0, "{}", rows[0].ratio);
        assert!(rows.iter().all(|r| r.pass));
        assert!(needle_pancake_ratio(100.0).unwrap() > 5.0);
    }

    #[test]
    fn sandwich_contains_direct_value() {
        for n in [2, 3] {
            let k = cube(n);
            let c = m_ellipsoid(&k, "cube", &quick()).unwrap();
            let s = santalo_from_mposition(&k, &c).unwrap();
            assert!(s.pass, "{s:?}");
        }
    }
}
