//! Covering numbers `N(A, tB)` from audited nets, and the covering lemmas they feed.

use serde::Serialize;

use crate::bodies::{minkowski_sum_bodies, polar0, scale, BodyRep, ConvexBody, VPolytope};
use crate::error::{GeomError, Result};
use crate::linalg::{random_unit, unit_ball_volume, Vector};
use crate::randgeom::{iq_functional, isotropic_constant, map_chunks, sample_uniform, substream, SampleConfig};
use crate::report::{Cell, Tabular};

/// Allowance for nets being larger than optimal coverings.
pub const NET_SLACK: f64 = 1.3;
/// Allowance in the dual covering comparison.
pub const DUAL_SLACK: f64 = 1.25;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoveringConfig {
    pub seed: u64,
    /// Uniform points of `A` that the net must cover.
    pub samples: usize,
    /// Fresh points used to audit coverage.
    pub audit: usize,
    /// Candidate centres for the set-cover pass.
    pub candidates: usize,
}

impl Default for CoveringConfig {
    fn default() -> Self {
        CoveringConfig {
            seed: 0,
            samples: 20_000,
            audit: 10_000,
            candidates: 2_500,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CoveringEstimate {
    /// Certified lower bound on `N(A, tB)`.
    pub lower: f64,
    /// Size of the audited net: an upper bound on `N(A, tB)`.
    pub upper: usize,
    /// Size of the maximal `t`-separated subset found along the way.
    pub separated: usize,
    #[serde(skip)]
    pub net: Vec<Vector>,
    pub t: f64,
    /// Audit points not covered by the net before they were added to it.
    pub audit_misses: usize,
    pub pair: (String, String),
}

impl CoveringEstimate {
    pub fn with_pair(mut self, a: &str, b: &str) -> Self {
        self.pair = (a.to_string(), b.to_string());
        self
    }
}

/// Fast membership in `c + tB`.
struct Member {
    n: usize,
    kind: MemberKind,
}

enum MemberKind {
    Poly { normals: Vec<f64>, offsets: Vec<f64> },
    Ellipsoid { center: Vector, shape: Vec<f64> },
}

impl Member {
    fn new(b: &ConvexBody) -> Self {
        let n = b.dim();
        let kind = match b.rep() {
            BodyRep::Ellipsoid(e) => MemberKind::Ellipsoid {
                center: e.center().clone(),
                shape: e.shape().transpose().iter().copied().collect(),
            },
            _ => {
                let d = b.polytope_data().expect("polytope");
                MemberKind::Poly {
                    normals: d.normals.iter().flat_map(|a| a.iter().copied()).collect(),
                    offsets: d.offsets.clone(),
                }
            }
        };
        Member { n, kind }
    }

    /// `x ∈ c + tB`.
    fn covers(&self, c: &Vector, t: f64, x: &Vector) -> bool {
        let n = self.n;
        match &self.kind {
            MemberKind::Poly { normals, offsets } => {
                let tol = 1e-12 * t;
                offsets.iter().enumerate().all(|(i, b)| {
                    let row = &normals[i * n..(i + 1) * n];
                    let mut s = 0.0;
                    for j in 0..n {
                        s += row[j] * (x[j] - c[j]);
                    }
                    s <= t * b + tol
                })
            }
            MemberKind::Ellipsoid { center, shape } => {
                let mut q = 0.0;
                for i in 0..n {
                    let di = x[i] - c[i] - t * center[i];
                    let mut r = 0.0;
                    for j in 0..n {
                        r += shape[i * n + j] * (x[j] - c[j] - t * center[j]);
                    }
                    q += di * r;
                }
                q <= t * t * (1.0 + 1e-12)
            }
        }
    }
}

fn require_origin_interior(b: &ConvexBody) -> Result<()> {
    let m = b.margin(&Vector::zeros(b.dim()));
    if m <= 0.0 {
        return Err(GeomError::PointNotInterior { margin: m });
    }
    Ok(())
}

fn is_centrally_symmetric(b: &ConvexBody) -> bool {
    b.is_symmetric(1e-9) && b.barycenter().amax() <= 1e-9 * b.scale()
}

/// Volume of `K + L`; ellipsoids enter through inscribed point sets, so the value never
/// exceeds the true volume.
pub fn sum_volume(k: &ConvexBody, l: &ConvexBody) -> Result<f64> {
    Ok(minkowski_sum_bodies(k, l)?.volume())
}

/// `max(|A| / |tB|, 2^{-n} |A + tB| / |tB|)`, both valid lower bounds on `N(A, tB)`.
pub fn covering_lower_bound(a: &ConvexBody, b: &ConvexBody, t: f64, refine: bool) -> Result<f64> {
    let n = a.dim();
    let tb = b.volume() * t.powi(n as i32);
    let mut lower = a.volume() / tb;
    if refine {
        let s = sum_volume(a, &scale(b, t)?)?;
        lower = lower.max(s / (2f64.powi(n as i32) * tb));
    }
    Ok(lower.max(1.0))
}

/// Points of `A` to be covered: a uniform sample plus the extreme points.
fn target_points(a: &ConvexBody, count: usize, seed: u64) -> Result<Vec<Vector>> {
    let mut pts = a.polytope_points();
    pts.extend(sample_uniform(a, &SampleConfig::new(seed, count))?);
    Ok(pts)
}

/// Covering of `A` by translates of `tB` for any `B` with the origin in its interior.
pub fn covering_number(a: &ConvexBody, b: &ConvexBody, t: f64, cfg: &CoveringConfig) -> Result<CoveringEstimate> {
    estimate(a, b, t, cfg, false)
}

/// Maximal `t`-separated net in `||.||_B` over a dense sample of `K`, plus a set-cover
/// pass, audited on fresh points. `B` must be centrally symmetric.
pub fn greedy_net(k: &ConvexBody, b: &ConvexBody, t: f64, cfg: &CoveringConfig) -> Result<CoveringEstimate> {
    if !is_centrally_symmetric(b) {
        return Err(GeomError::NonSymmetricGauge);
    }
    estimate(k, b, t, cfg, true)
}

fn estimate(a: &ConvexBody, b: &ConvexBody, t: f64, cfg: &CoveringConfig, separated: bool) -> Result<CoveringEstimate> {
    if a.dim() != b.dim() {
        return Err(GeomError::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    if !(t > 0.0) {
        return Err(GeomError::InvalidBody(format!("scale t must be positive, got {t}")));
    }
    require_origin_interior(b)?;
    let member = Member::new(b);

    // single translate: is A inside c + tB for c = bar(A) - t bar(B) or c = 0?
    for c in [a.barycenter() - b.barycenter() * t, Vector::zeros(a.dim())] {
        if inside_translate(a, b, &member, &c, t) {
            return Ok(CoveringEstimate {
                lower: 1.0,
                upper: 1,
                separated: 1,
                net: vec![c],
                t,
                audit_misses: 0,
                pair: Default::default(),
            });
        }
    }

    let pts = target_points(a, cfg.samples, cfg.seed)?;
    let audit = sample_uniform(a, &SampleConfig::new(cfg.seed ^ 0xA0D1_7000_0000_0001, cfg.audit.max(1)))?;
    let mut best = set_cover(&member, &pts, t, cfg.candidates);
    extend_net(&member, &mut best, &pts, t);
    let before = best.len();
    extend_net(&member, &mut best, &audit, t);
    let mut misses = best.len() - before;
    let mut sep_size = best.len();
    if separated {
        let mut net: Vec<Vector> = Vec::new();
        extend_net(&member, &mut net, &pts, t);
        let before = net.len();
        extend_net(&member, &mut net, &audit, t);
        sep_size = net.len();
        if net.len() < best.len() {
            misses = net.len() - before;
            best = net;
        }
    }
    let lower = covering_lower_bound(a, b, t, false)?;
    Ok(CoveringEstimate {
        lower,
        upper: best.len(),
        separated: sep_size,
        net: best,
        t,
        audit_misses: misses,
        pair: Default::default(),
    })
}

/// Sufficient test for `A ⊆ c + tB`; exact unless both bodies are ellipsoids.
fn inside_translate(a: &ConvexBody, b: &ConvexBody, member: &Member, c: &Vector, t: f64) -> bool {
    match (a.as_ellipsoid(), b.rep()) {
        (Some(ea), BodyRep::Ellipsoid(eb)) => {
            // A = a + L u with |u| <= 1; need |R (a + L u - c - t e)| <= t with R^T R = M
            let Some(r) = crate::linalg::sym_sqrt(eb.shape()) else {
                return false;
            };
            let v = &r * (ea.center() - c - eb.center() * t);
            let w = &r * ea.half_axes();
            let norm = w.singular_values().max();
            v.norm() + norm <= t * (1.0 + 1e-12)
        }
        (Some(ea), _) => {
            let d = b.polytope_data().expect("polytope");
            d.normals
                .iter()
                .zip(&d.offsets)
                .all(|(n, o)| ea.support(n) - n.dot(c) <= t * o + 1e-12 * t)
        }
        (None, _) => a.polytope_points().iter().all(|p| member.covers(c, t, p)),
    }
}

/// Adds every point not yet covered as a new centre.
fn extend_net(member: &Member, net: &mut Vec<Vector>, pts: &[Vector], t: f64) {
    for p in pts {
        if !net.iter().any(|c| member.covers(c, t, p)) {
            net.push(p.clone());
        }
    }
}

/// Greedy set cover of the first `limit` points, using those points as candidate centres.
fn set_cover(member: &Member, pts: &[Vector], t: f64, limit: usize) -> Vec<Vector> {
    let u = &pts[..pts.len().min(limit)];
    let m = u.len();
    let words = m.div_ceil(64);
    let sets: Vec<Vec<u64>> = map_chunks(m, |c| {
        let mut bits = vec![0u64; words];
        for (i, p) in u.iter().enumerate() {
            if member.covers(&u[c], t, p) {
                bits[i / 64] |= 1 << (i % 64);
            }
        }
        bits
    });
    let mut uncovered = vec![u64::MAX; words];
    if m % 64 != 0 {
        uncovered[words - 1] = (1u64 << (m % 64)) - 1;
    }
    let mut left = m;
    let mut chosen = Vec::new();
    while left > 0 {
        let (best, gain) = sets
            .iter()
            .enumerate()
            .map(|(i, s)| (i, s.iter().zip(&uncovered).map(|(a, b)| (a & b).count_ones() as usize).sum::<usize>()))
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .expect("non-empty");
        if gain == 0 {
            break;
        }
        for (w, s) in uncovered.iter_mut().zip(&sets[best]) {
            *w &= !s;
        }
        left -= gain;
        chosen.push(u[best].clone());
    }
    chosen
}

/// One row of a covering check: `body_id, t, lower, upper, bound_rhs, pass`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub body_id: String,
    pub t: f64,
    pub lower: f64,
    pub upper: f64,
    pub bound_rhs: f64,
    pub pass: bool,
}

impl Tabular for CheckRow {
    fn columns() -> Vec<&'static str> {
        vec!["body_id", "t", "lower", "upper", "bound_rhs", "pass"]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            self.body_id.clone().into(),
            self.t.into(),
            self.lower.into(),
            self.upper.into(),
            self.bound_rhs.into(),
            self.pass.into(),
        ]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub rows: Vec<CheckRow>,
    /// Measured constants and audit quantities.
    pub measured: Vec<(String, f64)>,
}

impl CheckReport {
    fn new(check: &str) -> Self {
        CheckReport {
            check: check.to_string(),
            rows: Vec::new(),
            measured: Vec::new(),
        }
    }

    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn measured(&self, key: &str) -> Option<f64> {
        self.measured.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }
}

/// `log N(K, tB) <= 4(n+1) I_1(K, B)/t + log 2` on a grid, for `K` rescaled to volume one.
/// The net used is the maximal separated set, which is what the bound controls.
pub fn verify_lemma_2_1(
    k: &ConvexBody,
    b: &ConvexBody,
    ts: &[f64],
    body_id: &str,
    cfg: &CoveringConfig,
) -> Result<CheckReport> {
    if !is_centrally_symmetric(b) {
        return Err(GeomError::NonSymmetricGauge);
    }
    let n = k.dim();
    let k1 = scale(k, k.volume().powf(-1.0 / n as f64))?;
    let (i1, se) = iq_functional(&k1, b, 1.0, &SampleConfig::new(cfg.seed, cfg.samples))?;
    let mut rep = CheckReport::new("lemma_2_1");
    rep.measured.push(("I1".into(), i1));
    rep.measured.push(("I1_stderr".into(), se));
    let mut slope: f64 = 0.0;
    let euclid = b.as_ellipsoid().is_some_and(|e| (e.shape() - crate::linalg::Matrix::identity(n, n)).amax() < 1e-12);
    for (i, &t) in ts.iter().enumerate() {
        let est = greedy_net(&k1, b, t, &cfg_for(cfg, i))?;
        let upper = est.separated.max(est.upper) as f64;
        let rhs = 4.0 * (n as f64 + 1.0) * i1 / t + 2f64.ln();
        slope = slope.max(upper.ln() * t);
        rep.rows.push(CheckRow {
            body_id: body_id.to_string(),
            t,
            lower: est.lower,
            upper,
            bound_rhs: rhs.exp(),
            pass: upper.ln() <= rhs,
        });
    }
    if euclid {
        // log N <= c' n^{3/2} L_K / t for isotropic K: report c'
        let l = isotropic_constant(k)?;
        rep.measured.push(("c_prime".into(), slope / (n as f64).powf(1.5) / l));
    }
    Ok(rep)
}

fn cfg_for(cfg: &CoveringConfig, i: usize) -> CoveringConfig {
    let mut c = cfg.clone();
    c.seed = crate::randgeom::mix(cfg.seed, i as u64 + 1);
    c
}

/// `sup_t t log N(B, tK°) <= 16 sup_t t log N(K, tB)` on a grid, and the inclusion
/// `B ⊆ conv((t/2)K°, (2/t)K)` audited on random points of the ball.
pub fn dual_covering_check(k: &ConvexBody, ts: &[f64], body_id: &str, cfg: &CoveringConfig) -> Result<CheckReport> {
    require_origin_interior(k)?;
    let n = k.dim();
    let ball = ConvexBody::ball(n, 1.0)?;
    let kp = polar0(k)?;
    let mut rep = CheckReport::new("lemma_2_3");
    let mut sup_a: f64 = 0.0;
    let mut sup_b: f64 = 0.0;
    let mut audit_fail = 0usize;
    let mut rows = Vec::new();
    for (i, &t) in ts.iter().enumerate() {
        let c = cfg_for(cfg, i);
        let na = covering_number(k, &ball, t, &c)?;
        let nb = covering_number(&ball, &kp, t, &c)?;
        let a = t * (na.upper as f64).ln();
        let bb = t * (nb.upper as f64).ln();
        sup_a = sup_a.max(a);
        sup_b = sup_b.max(bb);
        rows.push((t, a, bb));
        audit_fail += decomposition_failures(k, &kp, t, 1000, c.seed)?;
    }
    let rhs = 16.0 * DUAL_SLACK * sup_a;
    for (t, a, bb) in rows {
        rep.rows.push(CheckRow {
            body_id: body_id.to_string(),
            t,
            lower: a,
            upper: bb,
            bound_rhs: rhs,
            pass: bb <= rhs,
        });
    }
    rep.measured.push(("sup_A".into(), sup_a));
    rep.measured.push(("sup_B".into(), sup_b));
    rep.measured.push(("ratio".into(), if sup_a > 0.0 { sup_b / sup_a } else if sup_b > 0.0 { f64::INFINITY } else { 1.0 }));
    rep.measured.push(("inclusion_failures".into(), audit_fail as f64));
    rep.rows.push(CheckRow {
        body_id: body_id.to_string(),
        t: f64::NAN,
        lower: 0.0,
        upper: audit_fail as f64,
        bound_rhs: 0.0,
        pass: audit_fail == 0,
    });
    Ok(rep)
}

/// Random points of the unit ball outside `conv((t/2) K°, (2/t) K)`.
fn decomposition_failures(k: &ConvexBody, kp: &ConvexBody, t: f64, count: usize, seed: u64) -> Result<usize> {
    let n = k.dim();
    let mut pts: Vec<Vector> = kp.polytope_points().into_iter().map(|p| p * (t / 2.0)).collect();
    pts.extend(k.polytope_points().into_iter().map(|p| p * (2.0 / t)));
    let hull: ConvexBody = VPolytope::new(pts)?.into();
    let mut rng = substream(seed, 7);
    let mut fails = 0;
    for _ in 0..count {
        let u = random_unit(&mut rng, n);
        let r: f64 = rand::Rng::random::<f64>(&mut rng).powf(1.0 / n as f64);
        if !hull.contains_tol(&(u * r), 1e-9) {
            fails += 1;
        }
    }
    Ok(fails)
}

/// `L ⊆ bK` checked exactly through vertices or facet supports.
pub fn inclusion_holds(l: &ConvexBody, k: &ConvexBody, b: f64) -> bool {
    let bk = match scale(k, b) {
        Ok(x) => x,
        Err(_) => return false,
    };
    match (l.rep(), bk.polytope_data()) {
        (BodyRep::Ellipsoid(e), Some(d)) => d
            .normals
            .iter()
            .zip(&d.offsets)
            .all(|(a, o)| e.support(a) <= o + 1e-9 * o.abs().max(1.0)),
        _ => l.polytope_points().iter().all(|p| bk.contains_tol(p, 1e-9)),
    }
}

/// `|conv(K ∪ L)| <= 3enb N(L, K) |K|` for symmetric `K` and `L ⊆ bK`.
pub fn hull_volume_check(k: &ConvexBody, l: &ConvexBody, b: f64, body_id: &str, cfg: &CoveringConfig) -> Result<CheckReport> {
    if !is_centrally_symmetric(k) {
        return Err(GeomError::NonSymmetricGauge);
    }
    if b < 1.0 || !inclusion_holds(l, k, b) {
        return Err(GeomError::InclusionViolated(format!("L is not inside {b} K")));
    }
    let n = k.dim() as f64;
    let hull = crate::bodies::convex_hull_union(k, l)?;
    let lhs = hull.volume();
    let nl = greedy_net(l, k, 1.0, cfg)?;
    let rhs = 3.0 * std::f64::consts::E * n * b * nl.upper as f64 * k.volume();
    let mut rep = CheckReport::new("lemma_2_5");
    rep.rows.push(CheckRow {
        body_id: body_id.to_string(),
        t: b,
        lower: lhs,
        upper: nl.upper as f64,
        bound_rhs: rhs,
        pass: lhs <= rhs,
    });
    Ok(rep)
}

/// `|K+L|/|L| <= 2^n N(K,L)` and, for symmetric `L`, `N(K,L) <= 2^n |K+L/2|/|L/2|`.
pub fn lemma_4_2_check(k: &ConvexBody, l: &ConvexBody, body_id: &str, cfg: &CoveringConfig) -> Result<CheckReport> {
    let n = k.dim() as i32;
    let two_n = 2f64.powi(n);
    let est = covering_number(k, l, 1.0, cfg)?;
    let upper = est.upper as f64;
    let lower = sum_volume(k, l)? / (two_n * l.volume());
    let sym = is_centrally_symmetric(l);
    let rhs = if sym {
        let half = scale(l, 0.5)?;
        two_n * sum_volume(k, &half)? / half.volume()
    } else {
        f64::INFINITY
    };
    let mut rep = CheckReport::new("lemma_4_2");
    rep.rows.push(CheckRow {
        body_id: body_id.to_string(),
        t: 1.0,
        lower,
        upper,
        bound_rhs: rhs,
        pass: lower <= upper && upper <= NET_SLACK * rhs,
    });
    Ok(rep)
}

/// `N(K, tL)^{1/n} / N(L, tK)^{1/n}` within `[1/C, C]`, `C = 8 · NET_SLACK`, for equal volumes.
pub fn covering_symmetry_rows(
    k: &ConvexBody,
    l: &ConvexBody,
    ts: &[f64],
    body_id: &str,
    cfg: &CoveringConfig,
) -> Result<Vec<CheckRow>> {
    let n = k.dim() as f64;
    let rel = (k.volume() / l.volume() - 1.0).abs();
    if rel > 1e-6 {
        return Err(GeomError::InvalidBody(format!("volumes differ by relative {rel:e}")));
    }
    let c = 8.0 * NET_SLACK;
    let mut rows = Vec::new();
    for (i, &t) in ts.iter().enumerate() {
        let cc = cfg_for(cfg, i);
        let a = covering_number(k, l, t, &cc)?.upper as f64;
        let b = covering_number(l, k, t, &cc)?.upper as f64;
        let ratio = (a / b).powf(1.0 / n);
        rows.push(CheckRow {
            body_id: body_id.to_string(),
            t,
            lower: 1.0 / c,
            upper: ratio,
            bound_rhs: c,
            pass: ratio <= c && ratio >= 1.0 / c,
        });
    }
    Ok(rows)
}

/// `N(A, C) <= NET_SLACK · N(A, B) N(B, C)`.
pub fn submultiplicativity_row(
    a: &ConvexBody,
    b: &ConvexBody,
    c: &ConvexBody,
    body_id: &str,
    cfg: &CoveringConfig,
) -> Result<CheckRow> {
    let ac = covering_number(a, c, 1.0, cfg)?.upper as f64;
    let ab = covering_number(a, b, 1.0, cfg)?.upper as f64;
    let bc = covering_number(b, c, 1.0, cfg)?.upper as f64;
    Ok(CheckRow {
        body_id: body_id.to_string(),
        t: 1.0,
        lower: ac,
        upper: ab * bc,
        bound_rhs: NET_SLACK * ab * bc,
        pass: ac <= NET_SLACK * ab * bc,
    })
}

/// `N(S - S, 2B) <= NET_SLACK · N(S, B)^2`.
pub fn difference_squaring_row(s: &ConvexBody, body_id: &str, cfg: &CoveringConfig) -> Result<CheckRow> {
    let n = s.dim();
    let ball = ConvexBody::ball(n, 1.0)?;
    let d = crate::bodies::difference_body(s)?;
    let lhs = greedy_net(&d, &ball, 2.0, cfg)?.upper as f64;
    let base = greedy_net(s, &ball, 1.0, cfg)?.upper as f64;
    Ok(CheckRow {
        body_id: body_id.to_string(),
        t: 2.0,
        lower: lhs,
        upper: base * base,
        bound_rhs: NET_SLACK * base * base,
        pass: lhs <= NET_SLACK * base * base,
    })
}

/// `(t, log N(K, tB))` with no assertion; used to look at the decay rate in `t`.
pub fn covering_profile(k: &ConvexBody, ts: &[f64], cfg: &CoveringConfig) -> Result<Vec<(f64, f64)>> {
    let ball = ConvexBody::ball(k.dim(), 1.0)?;
    ts.iter()
        .enumerate()
        .map(|(i, &t)| Ok((t, (greedy_net(k, &ball, t, &cfg_for(cfg, i))?.upper as f64).ln())))
        .collect()
}

/// Volume of the Euclidean ball of radius `t`.
pub fn ball_volume(n: usize, t: f64) -> f64 {
    unit_ball_volume(n) * t.powi(n as i32)
}

/// Entropy numbers of a body in isotropic position against balls of radius `t √n L_K`.
#[derive(Debug, Clone, Serialize)]
pub struct EntropyProfile {
    pub ts: Vec<f64>,
    pub log_upper: Vec<f64>,
    pub log_lower: Vec<f64>,
    /// Least-squares slope of `log log N` against `log(1/t)` over the points with `N >= 2`;
    /// NaN with fewer than two such points.
    pub slope: f64,
}

pub fn entropy_profile(k: &ConvexBody, ts: &[f64], cfg: &CoveringConfig) -> Result<EntropyProfile> {
    let (_, iso) = crate::randgeom::isotropic_transform(k)?;
    let n = k.dim();
    let r = isotropic_constant(k)? * (n as f64).sqrt();
    let ball = ConvexBody::ball(n, r)?;
    let mut log_upper = Vec::with_capacity(ts.len());
    let mut log_lower = Vec::with_capacity(ts.len());
    for (i, &t) in ts.iter().enumerate() {
        let c = CoveringConfig {
            seed: crate::randgeom::mix(cfg.seed, i as u64),
            ..cfg.clone()
        };
        let est = covering_number(&iso, &ball, t, &c)?;
        log_upper.push((est.upper as f64).ln());
        log_lower.push(est.lower.max(1.0).ln());
    }
    let pts: Vec<(f64, f64)> = ts
        .iter()
        .zip(&log_upper)
        .filter(|(_, &l)| l >= 2f64.ln())
        .map(|(&t, &l)| ((1.0 / t).ln(), l.ln()))
        .collect();
    Ok(EntropyProfile {
        ts: ts.to_vec(),
        log_upper,
        log_lower,
        slope: fit_slope(&pts),
    })
}

fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    if pts.len() < 2 {
        return f64::NAN;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        f64::NAN
    } else {
        sxy / sxx
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn cube(n: usize, r: f64) -> ConvexBody {
        let mut a = Matrix::zeros(2 * n, n);
        for i in 0..n {
            a[(2 * i, i)] = 1.0;
            a[(2 * i + 1, i)] = -1.0;
        }
        ConvexBody::hpolytope(a, Vector::from_element(2 * n, r)).unwrap()
    }

    fn small() -> CoveringConfig {
        CoveringConfig {
            samples: 4000,
            audit: 2000,
            candidates: 1500,
            seed: 3,
        }
    }

    #[test]
    fn square_by_unit_squares() {
        let est = greedy_net(&cube(2, 2.0), &cube(2, 1.0), 1.0, &small()).unwrap();
        assert!((est.lower - 4.0).abs() < 1e-12);
        assert!(est.upper >= 4);
        // four translates at (±1, ±1) do cover
        let m = Member::new(&cube(2, 1.0));
        let centres: Vec<Vector> = [[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]]
            .iter()
            .map(|c| Vector::from_row_slice(c))
            .collect();
        for p in target_points(&cube(2, 2.0), 2000, 1).unwrap() {
            assert!(centres.iter().any(|c| m.covers(c, 1.0, &p)));
        }
    }

    #[test]
    fn single_translate() {
        let est = greedy_net(&cube(2, 0.5), &ConvexBody::ball(2, 1.0).unwrap(), 1.0, &small()).unwrap();
        assert_eq!(est.upper, 1);
    }

    #[test]
    fn monotone_in_t() {
        let k = cube(2, 1.0);
        let b = ConvexBody::ball(2, 1.0).unwrap();
        let mut prev = usize::MAX;
        for i in 0..10 {
            let t = 0.2 + 0.2 * i as f64;
            let u = greedy_net(&k, &b, t, &small()).unwrap().upper;
            assert!(u <= prev, "t={t}: {u} > {prev}");
            prev = u;
        }
        assert_eq!(prev, 1);
    }

    #[test]
    fn asymmetric_gauge_rejected() {
        let tri = ConvexBody::vpolytope(vec![
            Vector::from_vec(vec![-1.0, -1.0]),
            Vector::from_vec(vec![2.0, -1.0]),
            Vector::from_vec(vec![-1.0, 2.0]),
        ])
        .unwrap();
        assert_eq!(
            greedy_net(&cube(2, 1.0), &tri, 1.0, &small()).unwrap_err(),
            GeomError::NonSymmetricGauge
        );
        assert!(covering_number(&cube(2, 1.0), &tri, 1.0, &small()).is_ok());
    }

    #[test]
    fn net_covers_fresh_points() {
        let k = cube(2, 1.0);
        let b = ConvexBody::ball(2, 1.0).unwrap();
        let est = greedy_net(&k, &b, 0.3, &small()).unwrap();
        let m = Member::new(&b);
        let fresh = sample_uniform(&k, &SampleConfig::new(99, 5000)).unwrap();
        let miss = fresh.iter().filter(|p| !est.net.iter().any(|c| m.covers(c, 0.3, p))).count();
        assert!(miss <= 5, "{miss} misses");
        assert!(est.lower <= est.upper as f64);
    }

    #[test]
    fn net_stays_below_entropy_bound_on_square() {
        let ts: Vec<f64> = (1..=20).map(|i| 0.1 * i as f64).collect();
        let rep = verify_lemma_2_1(&cube(2, 1.0), &ConvexBody::ball(2, 1.0).unwrap(), &ts, "cube2", &small()).unwrap();
        assert!(rep.pass(), "{:?}", rep.rows);
    }

    #[test]
    fn dual_covering_ball_is_self_dual() {
        let b = ConvexBody::ball(2, 1.0).unwrap();
        let rep = dual_covering_check(&b, &[0.5, 1.0, 2.0], "ball2", &small()).unwrap();
        assert!(rep.pass());
        let ratio = rep.measured("ratio").unwrap();
        assert!((ratio - 1.0).abs() < 0.35, "{ratio}");
    }

    #[test]
    fn hull_volume_segment() {
        let k = ConvexBody::ball(2, 1.0).unwrap();
        let l = ConvexBody::vpolytope(vec![
            Vector::from_vec(vec![-5.0, -0.1]),
            Vector::from_vec(vec![5.0, -0.1]),
            Vector::from_vec(vec![5.0, 0.1]),
            Vector::from_vec(vec![-5.0, 0.1]),
        ])
        .unwrap();
        assert!(matches!(
            hull_volume_check(&k, &l, 4.0, "seg", &small()),
            Err(GeomError::InclusionViolated(_))
        ));
        let rep = hull_volume_check(&k, &l, 5.1, "seg", &small()).unwrap();
        assert!(rep.pass());
        let same = hull_volume_check(&k, &k, 1.0, "self", &small()).unwrap();
        assert_eq!(same.rows[0].upper, 1.0);
    }

    #[test]
    fn square_and_ball_covering_chain() {
        let k = cube(2, 1.0);
        let b = ConvexBody::ball(2, 1.0).unwrap();
        assert!(lemma_4_2_check(&k, &b, "c", &small()).unwrap().pass());
        assert!(lemma_4_2_check(&b, &k, "c", &small()).unwrap().pass());
    }

    #[test]
    fn slope_of_exact_line() {
        let pts: Vec<(f64, f64)> = (0..4).map(|i| (i as f64, 2.0 * i as f64 + 1.0)).collect();
        assert!((fit_slope(&pts) - 2.0).abs() < 1e-12);
        assert!(fit_slope(&pts[..1]).is_nan());
    }

    #[test]
    fn entropy_profile_decreases_in_t() {
        let cfg = CoveringConfig { samples: 4000, audit: 2000, candidates: 800, seed: 3 };
        let p = entropy_profile(&crate::zoo::cube(2), &[0.3, 0.6, 1.2], &cfg).unwrap();
        assert!(p.log_upper.windows(2).all(|w| w[0] >= w[1]));
        assert!(p.log_lower.iter().zip(&p.log_upper).all(|(l, u)| l <= u));
        assert!(p.slope > 0.0);
    }
}
