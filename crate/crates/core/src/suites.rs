//! Experiment suites over a zoo: each produces an [`ExperimentReport`] whose rows carry
//! their own pass flags. Errors on a body become failed rows of the `errors` table.

use std::str::FromStr;
use std::time::Instant;

use rand::Rng;

use crate::ballbodies::{ball_body, ExpMeasure, SANDWICH_SLACK};
use crate::bodies::{affine_image, difference_body, polar0, AffineMap, ConvexBody};
use crate::covering::{
    covering_symmetry_rows, dual_covering_check, hull_volume_check, inclusion_holds, lemma_4_2_check,
    entropy_profile, verify_lemma_2_1, CheckRow, CoveringConfig, EntropyProfile,
};
use crate::error::Result;
use crate::laplace::{klartag_body, log_laplace, KlartagConfig};
use crate::linalg::{binomial, factorial, random_unit, sphere_directions, Matrix, Vector};
use crate::mposition::{
    m_ellipsoid, m_position_from_cert, needle_pancake_ratio, reverse_bm_rows, santalo_from_mposition, CertRow,
    MConfig, MPositionCert, ReverseBmRow, SantaloSandwich,
};
use crate::randgeom::{isotropic_constant, isotropic_map, map_chunks, mc_volume, mix, substream, SampleConfig};
use crate::report::{Cell, ExperimentReport, Table, Tabular};
use crate::santalo::{
    ball_volume_product, santalo_row, thm_3_3_body, volume_product, CenterChoice, SantaloRow, Thm33Row, VolumeMethod,
    C1_FLOOR, MAHLER_FLOOR,
};
use crate::zoo::{generate_zoo, Family, ZooBody, ZooSpec};

/// Largest L_T accepted from the tilt construction.
pub const L_T_FLOOR: f64 = 0.6;
/// Relative error allowed on finite-difference derivatives of the log-Laplace transform.
pub const FD_TOL: f64 = 1e-5;
/// Monte Carlo tolerance, in standard errors.
pub const MC_Z: f64 = 4.0;
/// Radii, in units of `√n L_K`, for the entropy profile of the isotropic position.
pub const ENTROPY_GRID: [f64; 5] = [0.25, 0.35, 0.5, 0.7, 1.0];
pub const COVERING_GRID: [f64; 3] = [0.5, 1.0, 2.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Volumes,
    Covering,
    Santalo,
    Klartag,
    MPosition,
    FullChain,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Volumes,
        Suite::Covering,
        Suite::Santalo,
        Suite::Klartag,
        Suite::MPosition,
        Suite::FullChain,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Volumes => "volumes",
            Suite::Covering => "covering",
            Suite::Santalo => "santalo",
            Suite::Klartag => "klartag",
            Suite::MPosition => "mposition",
            Suite::FullChain => "full-chain",
        }
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Suite::ALL
            .iter()
            .copied()
            .find(|x| x.name() == s || (s == "full_chain" && *x == Suite::FullChain))
            .ok_or_else(|| format!("unknown suite {s:?}"))
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Monte Carlo samples for volumes and covering nets.
    pub samples: usize,
    pub klartag: KlartagConfig,
    pub covering: CoveringConfig,
}

impl SuiteConfig {
    pub fn new(seed: u64) -> Self {
        let covering = CoveringConfig {
            seed,
            ..Default::default()
        };
        SuiteConfig {
            seed,
            samples: covering.samples,
            klartag: KlartagConfig {
                seed,
                ..Default::default()
            },
            covering,
        }
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self.covering.samples = samples;
        self.covering.audit = (samples / 2).max(1);
        self.covering.candidates = self.covering.candidates.min(samples);
        self
    }

    fn m(&self) -> MConfig {
        MConfig {
            klartag: self.klartag.clone(),
            covering: self.covering.clone(),
        }
    }
}

#[derive(Debug, Clone, Default)]
struct Errors(Vec<(String, String, String)>);

impl Errors {
    fn note<T>(&mut self, id: &str, stage: &str, r: Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.0.push((id.to_string(), stage.to_string(), e.to_string()));
                None
            }
        }
    }

    fn table(&self) -> Option<Table> {
        if self.0.is_empty() {
            return None;
        }
        let mut t = Table::new("errors", &["body_id", "stage", "message", "pass"]);
        for (id, stage, msg) in &self.0 {
            t.push(vec![id.as_str().into(), stage.as_str().into(), msg.as_str().into(), false.into()]);
        }
        Some(t)
    }
}

/// Runs `f` on every body in parallel, keeping zoo order.
fn per_body<T: Send>(zoo: &[ZooBody], f: impl Fn(&ZooBody) -> Result<T> + Sync) -> Vec<Result<T>> {
    map_chunks(zoo.len(), |i| f(&zoo[i]))
}

pub fn run_suite(suite: Suite, spec: &ZooSpec, cfg: &SuiteConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let zoo = generate_zoo(spec)?;
    let mut rep = ExperimentReport::new(suite.name(), cfg.seed, &spec.dims);
    let mut errs = Errors::default();
    match suite {
        Suite::Volumes => volumes_tables(&zoo, cfg, &mut rep, &mut errs),
        Suite::Covering => covering_tables(&zoo, cfg, &mut rep, &mut errs),
        Suite::Santalo => santalo_tables(&zoo, cfg, &mut rep, &mut errs),
        Suite::Klartag => klartag_tables(&zoo, cfg, &mut rep, &mut errs),
        Suite::MPosition => mposition_tables(&zoo, cfg, &mut rep, &mut errs),
        Suite::FullChain => {
            klartag_tables(&zoo, cfg, &mut rep, &mut errs);
            santalo_tables(&zoo, cfg, &mut rep, &mut errs);
            mposition_tables(&zoo, cfg, &mut rep, &mut errs);
        }
    }
    if let Some(t) = errs.table() {
        rep.tables.push(t);
    }
    rep.wall_time = start.elapsed();
    Ok(rep)
}

// ---------------------------------------------------------------- volumes

#[derive(Debug, Clone)]
pub struct VolumeRow {
    pub body_id: String,
    pub n: usize,
    pub exact: f64,
    pub mc: f64,
    pub mc_stderr: f64,
    pub z: f64,
    pub polar_roundtrip: f64,
    /// Closed form for the family's volume quantity, NaN when none is known.
    pub closed_form: f64,
    pub closed_form_err: f64,
    pub pass: bool,
}

impl Tabular for VolumeRow {
    fn columns() -> Vec<&'static str> {
        vec![
            "body_id",
            "n",
            "exact",
            "mc",
            "mc_stderr",
            "z",
            "polar_roundtrip",
            "closed_form",
            "closed_form_err",
            "pass",
        ]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            self.body_id.clone().into(),
            self.n.into(),
            self.exact.into(),
            self.mc.into(),
            self.mc_stderr.into(),
            self.z.into(),
            self.polar_roundtrip.into(),
            self.closed_form.into(),
            self.closed_form_err.into(),
            self.pass.into(),
        ]
    }
}

/// `max_u |h_{K°°}(u) - h_K(u)| / scale(K)` over a direction grid.
pub fn polar_roundtrip_error(k: &ConvexBody) -> Result<f64> {
    let kpp = polar0(&polar0(k)?)?;
    let n = k.dim();
    let scale = k.scale();
    Ok(sphere_directions(n, 200 * n)
        .iter()
        .map(|u| (kpp.support(u) - k.support(u)).abs() / scale)
        .fold(0.0, f64::max))
}

/// `|Δ - Δ| / |Δ|` for simplices, `|B_1^n|` for cross-polytopes, `2^n` for cubes.
fn closed_form(z: &ZooBody) -> Result<(f64, f64)> {
    let n = z.n;
    Ok(match z.family {
        Family::Cube => (2f64.powi(n as i32), z.body.volume()),
        Family::CrossPolytope => (2f64.powi(n as i32) / factorial(n), z.body.volume()),
        Family::Simplex => (binomial(2 * n, n), difference_body(&z.body)?.volume() / z.body.volume()),
        _ => (f64::NAN, f64::NAN),
    })
}

pub fn volume_row(z: &ZooBody, cfg: &SuiteConfig) -> Result<VolumeRow> {
    let exact = z.body.volume();
    let sc = SampleConfig::new(mix(cfg.seed, 0x766f6c), cfg.samples.max(1000));
    let (mc, se) = mc_volume(&z.body, &sc)?;
    let zscore = if se > 0.0 { (mc - exact) / se } else { 0.0 };
    let rt = polar_roundtrip_error(&z.body)?;
    let (cf, measured) = closed_form(z)?;
    let cf_err = if cf.is_nan() { f64::NAN } else { (measured - cf).abs() / cf };
    Ok(VolumeRow {
        body_id: z.id.clone(),
        n: z.n,
        exact,
        mc,
        mc_stderr: se,
        z: zscore,
        polar_roundtrip: rt,
        closed_form: cf,
        closed_form_err: cf_err,
        pass: zscore.abs() <= MC_Z && rt <= 1e-7 && !(cf_err > 1e-9),
    })
}

#[derive(Debug, Clone)]
pub struct IsotropicRow {
    pub body_id: String,
    pub n: usize,
    pub l: f64,
    pub l_closed_form: f64,
    /// Largest off-diagonal covariance entry of the whitened body over `L^2`.
    pub offdiag: f64,
    /// Largest `|L(TK) - L(K)|` over random affine maps.
    pub affine_spread: f64,
    pub pass: bool,
}

impl Tabular for IsotropicRow {
    fn columns() -> Vec<&'static str> {
        vec!["body_id", "n", "L", "L_closed_form", "offdiag", "affine_spread", "pass"]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            self.body_id.clone().into(),
            self.n.into(),
            self.l.into(),
            self.l_closed_form.into(),
            self.offdiag.into(),
            self.affine_spread.into(),
            self.pass.into(),
        ]
    }
}

/// Isotropic constants with a closed form: cube, cross-polytope and simplex.
pub fn known_isotropic_constant(family: Family, n: usize) -> Option<f64> {
    let nf = n as f64;
    match family {
        Family::Cube => Some(1.0 / 12f64.sqrt()),
        Family::CrossPolytope => {
            Some((2.0 / ((nf + 1.0) * (nf + 2.0)) * (factorial(n) / 2f64.powi(n as i32)).powf(2.0 / nf)).sqrt())
        }
        Family::Simplex => Some((factorial(n).powf(2.0 / nf) / ((nf + 1.0).powf(1.0 + 1.0 / nf) * (nf + 2.0))).sqrt()),
        _ => None,
    }
}

/// A random well-conditioned affine map: `A = D + 0.3 G` with `D` diagonal in `[0.5, 2]`.
pub fn random_affine<R: Rng>(rng: &mut R, n: usize) -> AffineMap {
    loop {
        let mut a = Matrix::from_fn(n, n, |_, _| 0.3 * (2.0 * rng.random::<f64>() - 1.0));
        for i in 0..n {
            a[(i, i)] += 0.5 + 1.5 * rng.random::<f64>();
        }
        let shift = Vector::from_fn(n, |_, _| 2.0 * rng.random::<f64>() - 1.0);
        if let Ok(m) = AffineMap::new(a, shift) {
            if m.det().abs() > 0.05 {
                return m;
            }
        }
    }
}

pub fn isotropic_row(z: &ZooBody, seed: u64, maps: usize) -> Result<IsotropicRow> {
    let k = &z.body;
    let l = isotropic_constant(k)?;
    let q = isotropic_map(k)?;
    let img = affine_image(k, &q)?;
    let cov = &img.exact_moments().covariance;
    let n = z.n;
    let mut off: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                off = off.max(cov[(i, j)].abs());
            }
        }
    }
    let off = off / (l * l);
    let mut rng = substream(seed, 0x69736f);
    let mut spread: f64 = 0.0;
    for _ in 0..maps {
        let t = random_affine(&mut rng, n);
        spread = spread.max((isotropic_constant(&affine_image(k, &t)?)? - l).abs());
    }
    let known = known_isotropic_constant(z.family, n).unwrap_or(f64::NAN);
    Ok(IsotropicRow {
        body_id: z.id.clone(),
        n,
        l,
        l_closed_form: known,
        offdiag: off,
        affine_spread: spread,
        pass: off <= 1e-5 && spread <= 1e-4 && !((l - known).abs() > 1e-3),
    })
}

fn volumes_tables(zoo: &[ZooBody], cfg: &SuiteConfig, rep: &mut ExperimentReport, errs: &mut Errors) {
    let vols = per_body(zoo, |z| volume_row(z, cfg));
    let iso = per_body(zoo, |z| isotropic_row(z, cfg.seed, 10));
    let mut vt = Vec::new();
    let mut it = Vec::new();
    for ((z, v), i) in zoo.iter().zip(vols).zip(iso) {
        vt.extend(errs.note(&z.id, "volume", v));
        it.extend(errs.note(&z.id, "isotropic", i));
    }
    rep.tables.push(Table::from_rows("volumes", &vt));
    rep.tables.push(Table::from_rows("isotropic", &it));
}

// ---------------------------------------------------------------- covering

fn covering_tables(zoo: &[ZooBody], cfg: &SuiteConfig, rep: &mut ExperimentReport, errs: &mut Errors) {
    let zoo: Vec<&ZooBody> = zoo.iter().filter(|z| z.n <= 4).collect();
    let results = map_chunks(zoo.len(), |i| covering_body(zoo[i], &zoo, cfg));
    let mut names = ["lemma_2_1", "lemma_2_3", "lemma_2_5", "lemma_4_2", "symmetry"].map(|_| Vec::new());
    let mut measured = Table::new("measured", &["body_id", "check", "key", "value"]);
    let mut profile = Table::new("entropy_profile", &["body_id", "n", "t", "log_N_upper", "log_N_lower", "slope"]);
    for (z, r) in zoo.iter().zip(results) {
        if let Some(out) = errs.note(&z.id, "covering", r) {
            let p = &out.profile;
            for i in 0..p.ts.len() {
                profile.push(vec![
                    z.id.as_str().into(),
                    z.n.into(),
                    p.ts[i].into(),
                    p.log_upper[i].into(),
                    p.log_lower[i].into(),
                    p.slope.into(),
                ]);
            }
            for (slot, rows) in names.iter_mut().zip(out.rows) {
                slot.extend(rows);
            }
            for (check, key, v) in out.measured {
                measured.push(vec![z.id.as_str().into(), check.into(), key.into(), v.into()]);
            }
        }
    }
    for (name, rows) in ["lemma_2_1", "lemma_2_3", "lemma_2_5", "lemma_4_2", "symmetry"].iter().zip(names) {
        rep.tables.push(Table::from_rows(name, &rows));
    }
    rep.tables.push(measured);
    rep.tables.push(profile);
}

struct CoveringOut {
    rows: [Vec<CheckRow>; 5],
    measured: Vec<(String, String, f64)>,
    profile: EntropyProfile,
}

fn covering_body(z: &ZooBody, zoo: &[&ZooBody], cfg: &SuiteConfig) -> Result<CoveringOut> {
    let k = &z.body;
    let n = z.n;
    let c = CoveringConfig {
        seed: mix(cfg.covering.seed, hash_id(&z.id)),
        ..cfg.covering.clone()
    };
    let ball = ConvexBody::ball(n, 1.0)?;
    let mut measured = Vec::new();
    let l21 = verify_lemma_2_1(k, &ball, &COVERING_GRID, &z.id, &c)?;
    for (key, v) in &l21.measured {
        measured.push(("lemma_2_1".to_string(), key.clone(), *v));
    }
    let l23 = dual_covering_check(k, &COVERING_GRID, &z.id, &c)?;
    for (key, v) in &l23.measured {
        measured.push(("lemma_2_3".to_string(), key.clone(), *v));
    }
    // hull volume check against the next body of the same dimension, scaled into 2K
    let mut l25 = Vec::new();
    if z.family.is_symmetric() {
        if let Some(other) = zoo.iter().find(|o| o.n == n && o.id != z.id) {
            let fit = other
                .body
                .polytope_points()
                .iter()
                .map(|v| k.gauge(v))
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            let b = 2.0;
            let l = crate::bodies::scale(&other.body, b / fit * (1.0 - 1e-9))?;
            if inclusion_holds(&l, k, b) {
                l25.extend(hull_volume_check(k, &l, b, &format!("{}|{}", z.id, other.id), &c)?.rows);
            }
        }
    }
    let r = (k.volume() / crate::linalg::unit_ball_volume(n)).powf(1.0 / n as f64);
    let eq_ball = ConvexBody::ball(n, r)?;
    let l42 = lemma_4_2_check(k, &eq_ball, &z.id, &c)?.rows;
    let sym = covering_symmetry_rows(k, &eq_ball, &COVERING_GRID, &z.id, &c)?;
    let profile = entropy_profile(k, &ENTROPY_GRID, &c)?;
    Ok(CoveringOut {
        rows: [l21.rows, l23.rows, l25, l42, sym],
        measured,
        profile,
    })
}

fn hash_id(s: &str) -> u64 {
    s.bytes().fold(0xcbf29ce484222325, |h, b| (h ^ b as u64).wrapping_mul(0x100000001b3))
}

// ---------------------------------------------------------------- santalo

#[derive(Debug, Clone)]
pub struct SantaloCheckRow {
    pub body_id: String,
    pub n: usize,
    pub symmetric: bool,
    pub s_ratio: f64,
    pub n_s_root: f64,
    pub c1_measured: f64,
    pub pass_santalo: bool,
    pub pass_mahler: bool,
    pub pass_c1: bool,
    pub pass: bool,
}

impl Tabular for SantaloCheckRow {
    fn columns() -> Vec<&'static str> {
        vec![
            "body_id",
            "n",
            "symmetric",
            "s_ratio",
            "n_s_root",
            "c1_measured",
            "pass_santalo",
            "pass_mahler",
            "pass_c1",
            "pass",
        ]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            self.body_id.clone().into(),
            self.n.into(),
            self.symmetric.into(),
            self.s_ratio.into(),
            self.n_s_root.into(),
            self.c1_measured.into(),
            self.pass_santalo.into(),
            self.pass_mahler.into(),
            self.pass_c1.into(),
            self.pass.into(),
        ]
    }
}

pub fn santalo_check(z: &ZooBody, row: &SantaloRow) -> SantaloCheckRow {
    let symmetric = z.family.is_symmetric();
    let pass_santalo = row.s_ratio <= 1.0 + 1e-9;
    let pass_mahler = !symmetric || row.n_s_root >= MAHLER_FLOOR;
    let pass_c1 = row.c1_measured >= C1_FLOOR;
    SantaloCheckRow {
        body_id: z.id.clone(),
        n: z.n,
        symmetric,
        s_ratio: row.s_ratio,
        n_s_root: row.n_s_root,
        c1_measured: row.c1_measured,
        pass_santalo,
        pass_mahler,
        pass_c1,
        pass: pass_santalo && pass_mahler && pass_c1,
    }
}

#[derive(Debug, Clone)]
pub struct DiscRow {
    pub method: String,
    pub s: f64,
    pub target: f64,
    pub rel_err: f64,
    pub pass: bool,
}

impl Tabular for DiscRow {
    fn columns() -> Vec<&'static str> {
        vec!["method", "s", "target", "rel_err", "pass"]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            self.method.clone().into(),
            self.s.into(),
            self.target.into(),
            self.rel_err.into(),
            self.pass.into(),
        ]
    }
}

/// `s(B_2^2) = π^2` by the exact path and by Monte Carlo.
pub fn disc_rows(seed: u64, samples: usize) -> Result<Vec<DiscRow>> {
    let disc = ConvexBody::ball(2, 1.0)?;
    let target = ball_volume_product(2);
    let exact = volume_product(&disc, CenterChoice::Origin, VolumeMethod::Exact)?;
    let mc = volume_product(
        &disc,
        CenterChoice::Origin,
        VolumeMethod::MonteCarlo {
            seed,
            samples: samples.max(20_000),
        },
    )?;
    let row = |m: &str, s: f64, tol: f64| DiscRow {
        method: m.to_string(),
        s,
        target,
        rel_err: (s / target - 1.0).abs(),
        pass: (s / target - 1.0).abs() <= tol,
    };
    Ok(vec![row("exact", exact.s, 1e-12), row("monte_carlo", mc.s, 0.02)])
}

fn santalo_tables(zoo: &[ZooBody], cfg: &SuiteConfig, rep: &mut ExperimentReport, errs: &mut Errors) {
    let rows = per_body(zoo, |z| santalo_row(&z.body, &z.id));
    let thm = per_body(zoo, |z| thm_3_3_body(&z.body, &z.id, &cfg.klartag));
    let mut srows = Vec::new();
    let mut checks = Vec::new();
    let mut trows: Vec<Thm33Row> = Vec::new();
    for ((z, r), t) in zoo.iter().zip(rows).zip(thm) {
        if let Some(r) = errs.note(&z.id, "santalo", r) {
            checks.push(santalo_check(z, &r));
            srows.push(r);
        }
        trows.extend(errs.note(&z.id, "reverse_santalo", t));
    }
    rep.tables.push(Table::from_rows("santalo", &srows));
    rep.tables.push(Table::from_rows("santalo_checks", &checks));
    rep.tables.push(Table::from_rows("reverse_santalo", &trows));
    if let Some(d) = errs.note("disc", "disc", disc_rows(cfg.seed, cfg.samples)) {
        rep.tables.push(Table::from_rows("disc", &d));
    }
}

// ---------------------------------------------------------------- klartag

#[derive(Debug, Clone)]
pub struct LaplaceRow {
    pub body_id: String,
    pub xi_norm: f64,
    pub value: f64,
    pub grad_err: f64,
    pub hess_err: f64,
    /// The tilted barycenter lies inside the body.
    pub grad_inside: bool,
    pub pass: bool,
}

impl Tabular for LaplaceRow {
    fn columns() -> Vec<&'static str> {
        vec!["body_id", "xi_norm", "value", "grad_err", "hess_err", "grad_inside", "pass"]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            self.body_id.clone().into(),
            self.xi_norm.into(),
            self.value.into(),
            self.grad_err.into(),
            self.hess_err.into(),
            self.grad_inside.into(),
            self.pass.into(),
        ]
    }
}

/// Relative errors of the analytic gradient and Hessian against central differences.
pub fn laplace_fd_errors(k: &ConvexBody, xi: &Vector) -> Result<(f64, f64)> {
    let n = k.dim();
    let ev = log_laplace(k, xi)?;
    let h = 1e-4 / k.scale().max(1e-12);
    let mut g = Vector::zeros(n);
    let mut hs = Matrix::zeros(n, n);
    for i in 0..n {
        let mut e = Vector::zeros(n);
        e[i] = h;
        let p = log_laplace(k, &(xi + &e))?;
        let m = log_laplace(k, &(xi - &e))?;
        g[i] = (p.value - m.value) / (2.0 * h);
        hs.set_column(i, &((&p.grad - &m.grad) / (2.0 * h)));
    }
    let scale = ev.hess.norm().sqrt();
    let ge = (&g - &ev.grad).norm() / ev.grad.norm().max(scale);
    let he = (&hs - &ev.hess).norm() / ev.hess.norm();
    Ok((ge, he))
}

pub fn laplace_rows(z: &ZooBody, seed: u64, count: usize) -> Result<Vec<LaplaceRow>> {
    let k = &z.body;
    let mut rng = substream(seed, hash_id(&z.id));
    let mut rows = Vec::new();
    for _ in 0..count {
        let r = 3.0 * rng.random::<f64>() / k.scale();
        let xi = random_unit(&mut rng, z.n) * r;
        let ev = log_laplace(k, &xi)?;
        let (ge, he) = laplace_fd_errors(k, &xi)?;
        let inside = k.margin(&ev.grad) > 0.0;
        rows.push(LaplaceRow {
            body_id: z.id.clone(),
            xi_norm: r,
            value: ev.value,
            grad_err: ge,
            hess_err: he,
            grad_inside: inside,
            pass: ge <= FD_TOL && he <= FD_TOL && inside,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct BallBodyRow {
    pub body_id: String,
    pub n: usize,
    /// `max |ρ_{K_p(1_K)} - ρ_K| / ρ_K` over 500 directions.
    pub indicator_err: f64,
    pub convexity_defect: f64,
    /// `|bar K_{n+1}(μ)| / scale` for the centred tilted measure.
    pub barycenter: f64,
    pub pass: bool,
}

impl Tabular for BallBodyRow {
    fn columns() -> Vec<&'static str> {
        vec!["body_id", "n", "indicator_err", "convexity_defect", "barycenter", "pass"]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            self.body_id.clone().into(),
            self.n.into(),
            self.indicator_err.into(),
            self.convexity_defect.into(),
            self.barycenter.into(),
            self.pass.into(),
        ]
    }
}

pub fn ball_body_row(z: &ZooBody, seed: u64) -> Result<BallBodyRow> {
    let k = &z.body;
    let n = z.n;
    let ind = ExpMeasure::indicator(k.clone());
    let mut rng = substream(seed, hash_id(&z.id) ^ 0xba11);
    let mut err: f64 = 0.0;
    for _ in 0..500 {
        let u = random_unit(&mut rng, n);
        let p = 1.0 + 4.0 * rng.random::<f64>();
        let rk = k.radial(&u)?;
        err = err.max((ind.ball_radius(&u, p)? - rk).abs() / rk);
    }
    let xi = random_unit(&mut rng, n) * (1.0 / k.scale());
    let mu = ExpMeasure::new(k.clone(), xi)?;
    let g = mu.shifted(&mu.barycenter()?)?;
    let rb = ball_body(&g, n as f64 + 1.0)?;
    let defect = rb.convexity_defect(2000, seed);
    let t = rb.to_polytope()?;
    let bar = t.barycenter().norm() / t.scale();
    Ok(BallBodyRow {
        body_id: z.id.clone(),
        n,
        indicator_err: err,
        convexity_defect: defect,
        barycenter: bar,
        pass: err <= 1e-6 && defect <= 1e-9 && bar <= 1e-3,
    })
}

#[derive(Debug, Clone)]
pub struct KlartagRow {
    pub body_id: String,
    pub n: usize,
    pub xi_norm: f64,
    pub det_cov: f64,
    pub target: f64,
    pub certified: bool,
    pub l_t: f64,
    pub sandwich_inner: f64,
    pub sandwich_outer: f64,
    pub evaluations: usize,
    pub pass: bool,
}

impl Tabular for KlartagRow {
    fn columns() -> Vec<&'static str> {
        vec![
            "body_id",
            "n",
            "xi_norm",
            "det_cov",
            "target",
            "certified",
            "L_T",
            "sandwich_inner",
            "sandwich_outer",
            "evaluations",
            "pass",
        ]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            self.body_id.clone().into(),
            self.n.into(),
            self.xi_norm.into(),
            self.det_cov.into(),
            self.target.into(),
            self.certified.into(),
            self.l_t.into(),
            self.sandwich_inner.into(),
            self.sandwich_outer.into(),
            self.evaluations.into(),
            self.pass.into(),
        ]
    }
}

pub fn klartag_row(z: &ZooBody, cfg: &KlartagConfig) -> Result<KlartagRow> {
    let r = klartag_body(&z.body, cfg)?;
    Ok(KlartagRow {
        body_id: z.id.clone(),
        n: z.n,
        xi_norm: r.xi_star.norm(),
        det_cov: r.detcov,
        target: r.target,
        certified: r.certified,
        l_t: r.l_t,
        sandwich_inner: r.sandwich.inner_ratio,
        sandwich_outer: r.sandwich.outer_ratio,
        evaluations: r.evaluations,
        pass: r.certified
            && r.sandwich.inner_ratio <= SANDWICH_SLACK
            && r.sandwich.outer_ratio <= SANDWICH_SLACK
            && r.l_t <= L_T_FLOOR,
    })
}

fn klartag_tables(zoo: &[ZooBody], cfg: &SuiteConfig, rep: &mut ExperimentReport, errs: &mut Errors) {
    let lap = per_body(zoo, |z| if z.n <= 4 { laplace_rows(z, cfg.seed, 2) } else { Ok(Vec::new()) });
    let bb = per_body(zoo, |z| if z.n <= 4 { ball_body_row(z, cfg.seed).map(Some) } else { Ok(None) });
    let kl = per_body(zoo, |z| klartag_row(z, &cfg.klartag));
    let mut lt = Vec::new();
    let mut bt = Vec::new();
    let mut kt = Vec::new();
    for (((z, l), b), k) in zoo.iter().zip(lap).zip(bb).zip(kl) {
        lt.extend(errs.note(&z.id, "laplace", l).unwrap_or_default());
        bt.extend(errs.note(&z.id, "ball_body", b).flatten());
        kt.extend(errs.note(&z.id, "klartag", k));
    }
    rep.tables.push(Table::from_rows("laplace", &lt));
    rep.tables.push(Table::from_rows("ball_bodies", &bt));
    rep.tables.push(Table::from_rows("klartag", &kt));
}

// ---------------------------------------------------------------- mposition

#[derive(Debug, Clone)]
pub struct ImageRow {
    pub body_id: String,
    pub n: usize,
    pub volume_err: f64,
    pub beta: f64,
    pub beta_image: f64,
    pub pass: bool,
}

impl Tabular for ImageRow {
    fn columns() -> Vec<&'static str> {
        vec!["body_id", "n", "volume_err", "beta", "beta_image", "pass"]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            self.body_id.clone().into(),
            self.n.into(),
            self.volume_err.into(),
            self.beta.into(),
            self.beta_image.into(),
            self.pass.into(),
        ]
    }
}

struct MOut {
    cert: MPositionCert,
    image: ConvexBody,
    image_row: ImageRow,
    sandwich: SantaloSandwich,
}

fn mposition_body(z: &ZooBody, cfg: &MConfig) -> Result<MOut> {
    let cert = m_ellipsoid(&z.body, &z.id, cfg)?;
    let (image, _, recert) = m_position_from_cert(&z.body, &cert, &cfg.covering)?;
    let volume_err = (image.volume() / z.body.volume() - 1.0).abs();
    let image_row = ImageRow {
        body_id: z.id.clone(),
        n: z.n,
        volume_err,
        beta: cert.beta_measured,
        beta_image: recert.beta_measured,
        pass: volume_err <= 1e-6 && recert.beta_measured <= cert.beta_measured + 0.3,
    };
    let sandwich = santalo_from_mposition(&z.body, &cert)?;
    Ok(MOut {
        cert,
        image,
        image_row,
        sandwich,
    })
}

#[derive(Debug, Clone)]
pub struct ControlRow {
    pub eccentricity: f64,
    pub ratio: f64,
    pub pass: bool,
}

impl Tabular for ControlRow {
    fn columns() -> Vec<&'static str> {
        vec!["eccentricity", "ratio", "pass"]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![self.eccentricity.into(), self.ratio.into(), self.pass.into()]
    }
}

fn mposition_tables(zoo: &[ZooBody], cfg: &SuiteConfig, rep: &mut ExperimentReport, errs: &mut Errors) {
    let mc = cfg.m();
    let outs = per_body(zoo, |z| {
        let mut c = mc.clone();
        c.covering.seed = mix(c.covering.seed, hash_id(&z.id));
        mposition_body(z, &c)
    });
    let mut certs = Vec::new();
    let mut images = Vec::new();
    let mut sandwiches = Vec::new();
    let mut done: Vec<(&ZooBody, MOut)> = Vec::new();
    for (z, o) in zoo.iter().zip(outs) {
        if let Some(o) = errs.note(&z.id, "m_ellipsoid", o) {
            certs.push(CertRow::from_cert(&o.cert, z.n));
            images.push(o.image_row.clone());
            sandwiches.push(o.sandwich.clone());
            done.push((z, o));
        }
    }
    let mut jobs = Vec::new();
    for i in 0..done.len() {
        for j in i + 1..done.len() {
            if done[i].0.n == done[j].0.n {
                jobs.push((i, j));
            }
        }
    }
    let bm = map_chunks(jobs.len(), |p| {
        let (i, j) = jobs[p];
        let pair = format!("{}|{}", done[i].0.id, done[j].0.id);
        (pair.clone(), reverse_bm_rows(&done[i].1.image, &done[j].1.image, &pair))
    });
    let mut bm_rows: Vec<ReverseBmRow> = Vec::new();
    for (pair, r) in bm {
        bm_rows.extend(errs.note(&pair, "reverse_bm", r).unwrap_or_default());
    }
    // images are already in M-position, so compare with the round ball of the same volume
    let mut sym_rows = Vec::new();
    for (z, o) in &done {
        if z.family == Family::Cube {
            let r = (o.image.volume() / crate::linalg::unit_ball_volume(z.n)).powf(1.0 / z.n as f64);
            let rows = ConvexBody::ball(z.n, r).and_then(|ball| {
                covering_symmetry_rows(&o.image, &ball, &COVERING_GRID, &format!("{}|ball", z.id), &mc.covering)
            });
            sym_rows.extend(errs.note(&z.id, "symmetry", rows).unwrap_or_default());
        }
    }
    let control: Vec<ControlRow> = errs
        .note("needle_pancake", "control", needle_pancake_ratio(100.0))
        .map(|r| ControlRow {
            eccentricity: 100.0,
            ratio: r,
            pass: r > 5.0,
        })
        .into_iter()
        .collect();
    rep.tables.push(Table::from_rows("certificates", &certs));
    rep.tables.push(Table::from_rows("images", &images));
    rep.tables.push(Table::from_rows("reverse_bm", &bm_rows));
    rep.tables.push(Table::from_rows("needle_pancake", &control));
    rep.tables.push(Table::from_rows("covering_symmetry", &sym_rows));
    rep.tables.push(Table::from_rows("santalo_sandwich", &sandwiches));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::GeomError;

    fn small() -> ZooSpec {
        ZooSpec {
            families: vec![Family::Cube, Family::Simplex],
            dims: vec![2],
            seed: 3,
            centered: true,
        }
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn volumes_suite_passes_on_small_zoo() {
        let cfg = SuiteConfig::new(1).with_samples(20_000);
        let rep = run_suite(Suite::Volumes, &small(), &cfg).unwrap();
        assert!(rep.pass(), "{}", rep.to_csv());
        assert_eq!(rep.tables[0].rows.len(), 2);
    }

    #[test]
    fn known_constants() {
        assert!((known_isotropic_constant(Family::Simplex, 2).unwrap().powi(2) - 1.0 / (6.0 * 3f64.sqrt())).abs() < 1e-12);
        assert!((known_isotropic_constant(Family::CrossPolytope, 2).unwrap() - 1.0 / 12f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn errors_become_failed_rows() {
        let mut e = Errors::default();
        let r: Result<()> = Err(GeomError::ZeroAtOrigin);
        assert!(e.note("x", "stage", r).is_none());
        let t = e.table().unwrap();
        assert!(!t.pass());
    }
}
