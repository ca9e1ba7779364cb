use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use convexlab_core::bodies::{body_from_json, body_to_json, polar0};
use convexlab_core::laplace::{klartag_body, KlartagConfig, SearchGoal};
use convexlab_core::mposition::{m_ellipsoid, CertRow, MConfig};
use convexlab_core::randgeom::{isotropic_constant, isotropic_transform, mc_volume, SampleConfig};
use convexlab_core::report::{Cell, ExperimentReport, Format, Table};
use convexlab_core::santalo::{santalo_point, volume_product, CenterChoice, VolumeMethod};
use convexlab_core::suites::{run_suite, santalo_check, Suite, SuiteConfig};
use convexlab_core::zoo::{generate_zoo, Family, ZooSpec};
use convexlab_core::ConvexBody;

#[derive(Parser)]
#[command(name = "convexlab", version, about = "Convex bodies, volume products and M-ellipsoids")]
struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Comma separated dimensions for zoo-based commands.
    #[arg(long, global = true, value_delimiter = ',', default_values_t = [2usize, 3, 4, 5])]
    dims: Vec<usize>,
    /// Monte Carlo sample count.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Output directory; reports go to stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Fmt::Csv)]
    format: Fmt,
    /// Comma separated families (cube, cross, simplex, symhull[:k], zonotope[:m], hpoly[:m]).
    #[arg(long, global = true, value_delimiter = ',')]
    families: Option<Vec<String>>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fmt {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Body zoo utilities.
    Zoo {
        #[command(subcommand)]
        cmd: ZooCmd,
    },
    /// Exact and Monte Carlo volume of a body and its polar.
    Vol { body: PathBuf },
    /// Isotropic constant and isotropic image.
    Isotropize { body: PathBuf },
    /// Santaló point and volume product.
    Santalo { body: PathBuf },
    /// Volume products across the zoo.
    MahlerScan,
    /// Exponential tilt and the Ball body T with its sandwich.
    Klartag {
        body: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        #[arg(long, default_value_t = 200)]
        budget: usize,
        /// Search until the budget is spent instead of stopping at the first certificate.
        #[arg(long)]
        minimize: bool,
    },
    /// M-ellipsoid certificate.
    Mellipsoid { body: PathBuf },
    /// Run an experiment suite: volumes, covering, santalo, klartag, mposition, full-chain.
    Verify { suite: String },
}

#[derive(Subcommand)]
enum ZooCmd {
    /// Write every zoo body as JSON.
    Gen,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

impl Cli {
    fn format(&self) -> Format {
        match self.format {
            Fmt::Csv => Format::Csv,
            Fmt::Json => Format::Json,
        }
    }

    fn spec(&self) -> Result<ZooSpec> {
        let mut spec = ZooSpec::default_families(&self.dims, self.seed);
        if let Some(f) = &self.families {
            spec.families = f
                .iter()
                .map(|s| Family::parse(s).with_context(|| format!("unknown family {s:?}")))
                .collect::<Result<_>>()?;
        }
        Ok(spec)
    }

    fn suite_config(&self) -> SuiteConfig {
        let cfg = SuiteConfig::new(self.seed);
        match self.samples {
            Some(s) => cfg.with_samples(s),
            None => cfg,
        }
    }
}

fn read_body(p: &Path) -> Result<ConvexBody> {
    let s = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
    Ok(body_from_json(&s).with_context(|| format!("parsing {}", p.display()))?)
}

fn body_id(p: &Path) -> String {
    p.file_stem().map_or_else(|| "body".into(), |s| s.to_string_lossy().into_owned())
}

fn emit(cli: &Cli, rep: &ExperimentReport) -> Result<()> {
    match &cli.out {
        Some(dir) => {
            for p in rep.write(dir, cli.format())? {
                eprintln!("wrote {}", p.display());
            }
        }
        None => match cli.format() {
            Format::Csv => print!("{}", rep.to_csv()),
            Format::Json => print!("{}", rep.to_json()),
        },
    }
    Ok(())
}

fn write_extra(cli: &Cli, name: &str, contents: &str) -> Result<()> {
    if let Some(dir) = &cli.out {
        let p = dir.join(name);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&p, contents)?;
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn single(cli: &Cli, name: &str, n: usize, table: Table) -> ExperimentReport {
    let mut rep = ExperimentReport::new(name, cli.seed, &[n]);
    rep.tables.push(table);
    rep
}

fn run(cli: &Cli) -> Result<bool> {
    let samples = cli.samples.unwrap_or(100_000);
    match &cli.cmd {
        Cmd::Zoo { cmd: ZooCmd::Gen } => {
            let zoo = generate_zoo(&cli.spec()?)?;
            let mut t = Table::new("zoo", &["body_id", "family", "n", "volume", "retries"]);
            let mut all = Vec::new();
            for z in &zoo {
                t.push(vec![
                    z.id.as_str().into(),
                    z.family.name().into(),
                    z.n.into(),
                    z.body.volume().into(),
                    z.retries.into(),
                ]);
                write_extra(cli, &format!("bodies/{}.json", z.id), &body_to_json(&z.body))?;
                all.push(serde_json::json!({ "id": z.id, "family": z.family, "n": z.n, "body": z.body }));
            }
            write_extra(cli, "zoo.json", &serde_json::to_string_pretty(&all)?)?;
            let mut rep = ExperimentReport::new("zoo", cli.seed, &cli.dims);
            rep.tables.push(t);
            emit(cli, &rep)?;
            Ok(true)
        }
        Cmd::Vol { body } => {
            let k = read_body(body)?;
            let p = polar0(&k).ok();
            let (mc, se) = mc_volume(&k, &SampleConfig::new(cli.seed, samples))?;
            let mut t = Table::new("vol", &["body_id", "n", "volume", "mc_volume", "mc_stderr", "polar_volume"]);
            t.push(vec![
                body_id(body).into(),
                k.dim().into(),
                k.volume().into(),
                mc.into(),
                se.into(),
                p.map_or(f64::NAN, |p| p.volume()).into(),
            ]);
            emit(cli, &single(cli, "vol", k.dim(), t))?;
            Ok(true)
        }
        Cmd::Isotropize { body } => {
            let k = read_body(body)?;
            let (map, img) = isotropic_transform(&k)?;
            let l = isotropic_constant(&k)?;
            let mut t = Table::new("isotropize", &["body_id", "n", "L", "det"]);
            t.push(vec![body_id(body).into(), k.dim().into(), l.into(), map.det().into()]);
            write_extra(cli, &format!("{}_isotropic.json", body_id(body)), &body_to_json(&img))?;
            write_extra(cli, &format!("{}_map.json", body_id(body)), &serde_json::to_string_pretty(&map)?)?;
            emit(cli, &single(cli, "isotropize", k.dim(), t))?;
            Ok(true)
        }
        Cmd::Santalo { body } => {
            let k = read_body(body)?;
            let sp = santalo_point(&k)?;
            let vp = volume_product(&k, CenterChoice::Santalo, VolumeMethod::Exact)?;
            let mut cols = vec!["body_id", "n", "residual", "iterations", "local_min", "s", "s_ratio", "n_s_root"];
            let mut row: Vec<Cell> = vec![
                body_id(body).into(),
                k.dim().into(),
                sp.residual.into(),
                sp.iterations.into(),
                sp.local_min.into(),
                vp.s.into(),
                vp.s_ratio.into(),
                vp.n_s_root.into(),
            ];
            for i in 0..k.dim() {
                row.push(sp.z[i].into());
            }
            let names: Vec<String> = (0..k.dim()).map(|i| format!("z{i}")).collect();
            cols.extend(names.iter().map(String::as_str));
            let mut t = Table::new("santalo", &cols);
            t.push(row);
            emit(cli, &single(cli, "santalo", k.dim(), t))?;
            Ok(true)
        }
        Cmd::MahlerScan => {
            let zoo = generate_zoo(&cli.spec()?)?;
            let mut rows = Vec::new();
            let mut checks = Vec::new();
            for z in &zoo {
                let r = convexlab_core::santalo::santalo_row(&z.body, &z.id)?;
                checks.push(santalo_check(z, &r));
                rows.push(r);
            }
            let mut rep = ExperimentReport::new("mahler-scan", cli.seed, &cli.dims);
            rep.tables.push(Table::from_rows("santalo", &rows));
            rep.tables.push(Table::from_rows("santalo_checks", &checks));
            emit(cli, &rep)?;
            Ok(rep.pass())
        }
        Cmd::Klartag {
            body,
            eps,
            budget,
            minimize,
        } => {
            let k = read_body(body)?;
            let cfg = KlartagConfig {
                eps: *eps,
                budget: *budget,
                seed: cli.seed,
                goal: if *minimize { SearchGoal::Minimize } else { SearchGoal::FirstCertified },
                grid: None,
            };
            let r = klartag_body(&k, &cfg)?;
            let mut t = Table::new(
                "klartag",
                &["body_id", "n", "xi_norm", "det_cov", "target", "certified", "L_T", "L_f", "sandwich_inner", "sandwich_outer", "pass"],
            );
            let pass = r.certified && r.sandwich.pass;
            t.push(vec![
                body_id(body).into(),
                k.dim().into(),
                r.xi_star.norm().into(),
                r.detcov.into(),
                r.target.into(),
                r.certified.into(),
                r.l_t.into(),
                r.l_f.into(),
                r.sandwich.inner_ratio.into(),
                r.sandwich.outer_ratio.into(),
                pass.into(),
            ]);
            write_extra(cli, &format!("{}_T.json", body_id(body)), &body_to_json(&r.t))?;
            write_extra(cli, &format!("{}_klartag.json", body_id(body)), &serde_json::to_string_pretty(&r)?)?;
            let rep = single(cli, "klartag", k.dim(), t);
            emit(cli, &rep)?;
            Ok(rep.pass())
        }
        Cmd::Mellipsoid { body } => {
            let k = read_body(body)?;
            let mut cfg = MConfig::default();
            cfg.klartag.seed = cli.seed;
            cfg.covering.seed = cli.seed;
            if let Some(s) = cli.samples {
                cfg.covering.samples = s;
                cfg.covering.audit = (s / 2).max(1);
            }
            let cert = m_ellipsoid(&k, &body_id(body), &cfg)?;
            write_extra(cli, &format!("{}_certificate.json", body_id(body)), &cert.to_json())?;
            let row = CertRow::from_cert(&cert, k.dim());
            let rep = single(cli, "mellipsoid", k.dim(), Table::from_rows("certificate", &[row]));
            emit(cli, &rep)?;
            Ok(rep.pass())
        }
        Cmd::Verify { suite } => {
            let suite: Suite = match suite.parse() {
                Ok(s) => s,
                Err(e) => bail!(e),
            };
            let rep = run_suite(suite, &cli.spec()?, &cli.suite_config())?;
            emit(cli, &rep)?;
            eprintln!(
                "{}: {} ({} failing rows, {:.1}s)",
                rep.suite,
                if rep.pass() { "pass" } else { "FAIL" },
                rep.failures(),
                rep.wall_time.as_secs_f64()
            );
            Ok(rep.pass())
        }
    }
}
