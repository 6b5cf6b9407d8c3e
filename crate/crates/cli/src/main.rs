//! `geoloop` — run verification suites and dump geodesic / Jacobi-field
//! trajectories for the manifold catalog.
//!
//! Exit codes: 0 when every report entry passes, 1 when any fails,
//! 2 on usage errors. Set `GEOLOOP_LOG=debug` (or `info`, …) for progress
//! logging on stderr.

use std::fs;
use std::io::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use geoloop::geo::{integrate_geodesic, GeoParams};
use geoloop::jacobi::{eq10_residual_profile, jacobi_solve};
use geoloop::manifold::{Point, TangentVector, CATALOG_NAMES};
use geoloop::report::ResidualReport;
use geoloop::verify::{run_suite, SuiteConfig, SUITE_NAMES};
use geoloop::GeoError;

#[derive(Parser)]
#[command(name = "geoloop", version, about = "Geodesic loops, odular operations and Jacobi fields on affinely connected manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites and write a residual report.
    Verify(VerifyArgs),
    /// Integrate a geodesic and write its dense samples as CSV.
    Geodesic(GeodesicArgs),
    /// Solve the deviation equation along a geodesic and write CSV.
    Jacobi(JacobiArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Catalog manifold name.
    #[arg(long, value_parser = parse_manifold)]
    manifold: String,

    /// Base point coordinates, comma-separated (catalog default if absent).
    #[arg(long)]
    point: Option<CoordList>,

    /// Integrator step.
    #[arg(long, default_value_t = 1e-3)]
    h: f64,

    /// Perturbation strength for poly-perturbed2.
    #[arg(long)]
    epsilon: Option<f64>,

    /// Output path (stdout if absent).
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Single suite to run (all suites if absent).
    #[arg(long, value_parser = SUITE_NAMES)]
    suite: Option<String>,

    /// Loop working radius (catalog default if absent).
    #[arg(long)]
    radius: Option<f64>,

    /// Finite-difference step for reconstruction stencils.
    #[arg(long, default_value_t = 1e-3)]
    fd_step: f64,

    /// s-step of variation grids.
    #[arg(long, default_value_t = 1e-3)]
    ds: f64,

    /// t-step of variation grids.
    #[arg(long, default_value_t = 1e-2)]
    dt: f64,

    /// Seed for point sampling.
    #[arg(long, default_value_t = 7)]
    seed: u64,

    /// Number of sampled points per identity.
    #[arg(long, default_value_t = 20)]
    samples: usize,

    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct GeodesicArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Initial velocity components, comma-separated.
    #[arg(long)]
    velocity: CoordList,

    /// Final canonical parameter.
    #[arg(long, default_value_t = 1.0)]
    t_end: f64,
}

#[derive(Args)]
struct JacobiArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Geodesic initial velocity, comma-separated.
    #[arg(long)]
    velocity: CoordList,

    /// Initial field value X(0), comma-separated.
    #[arg(long)]
    x0: CoordList,

    /// Initial covariant derivative DX/dt(0), comma-separated.
    #[arg(long)]
    v0: CoordList,

    /// Final canonical parameter.
    #[arg(long, default_value_t = 1.0)]
    t_end: f64,
}

#[derive(Copy, Clone, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Comma-separated coordinate list, e.g. `--point 0,1.5`.
#[derive(Clone, Debug)]
struct CoordList(Vec<f64>);

impl std::str::FromStr for CoordList {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',')
            .map(|tok| {
                tok.trim().parse::<f64>().map_err(|e| format!("bad coordinate `{tok}`: {e}"))
            })
            .collect::<Result<Vec<f64>, _>>()
            .map(CoordList)
    }
}

fn parse_manifold(s: &str) -> Result<String, String> {
    if CATALOG_NAMES.contains(&s) {
        Ok(s.to_string())
    } else {
        Err(format!("unknown manifold `{s}`; known: {}", CATALOG_NAMES.join(", ")))
    }
}

/// 17 significant digits, locale-independent.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_out(out: &Option<String>, content: &str) -> std::io::Result<()> {
    match out {
        Some(path) => fs::write(path, content),
        None => std::io::stdout().write_all(content.as_bytes()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("GEOLOOP_LOG")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(args) => cmd_verify(args),
        Command::Geodesic(args) => cmd_geodesic(args),
        Command::Jacobi(args) => cmd_jacobi(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let mut cfg = SuiteConfig::new(&args.common.manifold);
    cfg.base = args.common.point.clone().map(|c| c.0);
    cfg.radius = args.radius;
    cfg.seed = args.seed;
    cfg.samples = args.samples;
    cfg.params = GeoParams::default().with_h(args.common.h);
    cfg.params.fd_step = args.fd_step;
    cfg.ds = args.ds;
    cfg.dt = args.dt;
    cfg.epsilon = args.common.epsilon;

    // validate the config up front so bad flags are usage errors, not entries
    cfg.entry()?;
    if !(args.common.h > 0.0 && args.fd_step > 0.0 && args.ds > 0.0 && args.dt > 0.0) {
        return Err(GeoError::InvalidInput("steps must be positive".into()).into());
    }

    let mut report = match &args.suite {
        Some(name) => {
            log::info!("running suite {name} on {}", cfg.manifold);
            run_one(name, &cfg)
        }
        None => {
            let mut report = ResidualReport::new(format!("verify[{}]", cfg.manifold));
            for name in SUITE_NAMES {
                log::info!("running suite {name} on {}", cfg.manifold);
                let mut sub = run_one(name, &cfg);
                for e in &mut sub.entries {
                    e.id = format!("{name}/{}", e.id);
                }
                report.merge(sub);
            }
            report
        }
    };
    report.sort_entries();
    let pass = report.all_pass();
    log::info!(
        "{}: {} entries, max residual {:.3e}",
        report.suite,
        report.entries.len(),
        report.max_residual()
    );

    let content = match args.format {
        Format::Json => serde_json::to_string_pretty(&report)? + "\n",
        Format::Csv => report_csv(&report),
    };
    write_out(&args.common.out, &content)?;
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

/// A suite that fails numerically becomes a failing entry, not a crash.
fn run_one(name: &str, cfg: &SuiteConfig) -> ResidualReport {
    match run_suite(name, cfg) {
        Ok(r) => r,
        Err(e) => {
            log::warn!("suite {name} aborted: {e}");
            let mut r = ResidualReport::new(format!("{name}[{}]", cfg.manifold));
            r.push(
                "aborted",
                "suite completed without numerical failure",
                f64::MAX,
                0.0,
                serde_json::json!({ "error": e.to_string() }),
            );
            r
        }
    }
}

fn report_csv(report: &ResidualReport) -> String {
    let mut s = String::new();
    s.push_str(&format!("# suite: {}\n", report.suite));
    s.push_str(&format!("# elapsed_s: {}\n", num(report.elapsed_s)));
    s.push_str("id,anchor,residual,tol,pass\n");
    for e in &report.entries {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            e.id,
            e.anchor.replace(',', ";"),
            num(e.residual),
            num(e.tol),
            e.pass
        ));
    }
    s
}

fn cmd_geodesic(args: GeodesicArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let cfg = config_of(&args.common)?;
    let entry = cfg.entry()?;
    let base = match &args.common.point {
        Some(c) => Point::new(c.0.clone()),
        None => entry.default_base.clone(),
    };
    let n = entry.connection.dim;
    if args.velocity.0.len() != n || base.dim() != n {
        return Err(GeoError::InvalidInput(format!("expected {n} components")).into());
    }
    let init = TangentVector::new(base, args.velocity.0.clone());

    // on domain exit, keep the reachable part and report the exit time
    let mut t_end = args.t_end;
    let mut exit_note = None;
    let path = loop {
        match integrate_geodesic(&entry.connection, &init, t_end, args.common.h) {
            Ok(p) => break p,
            Err(GeoError::DomainExit { t }) => {
                exit_note = Some(t);
                let shrunk = t.abs() - 2.0 * args.common.h;
                if shrunk <= 0.0 {
                    return Err(GeoError::DomainExit { t }.into());
                }
                t_end = shrunk * t_end.signum();
            }
            Err(e) => return Err(e.into()),
        }
    };

    let mut s = String::new();
    let cols: Vec<String> = (1..=n)
        .map(|i| format!("x{i}"))
        .chain((1..=n).map(|i| format!("v{i}")))
        .collect();
    s.push_str(&format!("t,{}\n", cols.join(",")));
    for &t in path.sample_times() {
        let p = path.position(t)?;
        let v = path.velocity(t)?;
        let row: Vec<String> =
            p.coords.iter().chain(v.iter()).map(|&c| num(c)).collect();
        s.push_str(&format!("{},{}\n", num(t), row.join(",")));
    }
    if let Some(t) = exit_note {
        s.push_str(&format!("# domain exit at t = {}\n", num(t)));
    }
    write_out(&args.common.out, &s)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_jacobi(args: JacobiArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let cfg = config_of(&args.common)?;
    let entry = cfg.entry()?;
    let base = match &args.common.point {
        Some(c) => Point::new(c.0.clone()),
        None => entry.default_base.clone(),
    };
    let n = entry.connection.dim;
    for v in [&args.velocity, &args.x0, &args.v0] {
        if v.0.len() != n {
            return Err(GeoError::InvalidInput(format!("expected {n} components")).into());
        }
    }
    let init = TangentVector::new(base, args.velocity.0.clone());
    let path = integrate_geodesic(&entry.connection, &init, args.t_end, args.common.h)?;
    let field = jacobi_solve(&entry.connection, &path, &args.x0.0, &args.v0.0)?;
    let profile = eq10_residual_profile(&field)?;

    let mut s = String::new();
    let cols: Vec<String> = (1..=n)
        .map(|i| format!("X{i}"))
        .chain((1..=n).map(|i| format!("dX{i}")))
        .collect();
    s.push_str(&format!("t,{},eq10_residual\n", cols.join(",")));
    let mut prof_iter = profile.iter().peekable();
    for &t in path.sample_times() {
        let x = field.value(t)?;
        let w = field.derivative(t)?;
        let row: Vec<String> = x.iter().chain(w.iter()).map(|&c| num(c)).collect();
        let res = match prof_iter.peek() {
            Some(&&(tp, r)) if (tp - t).abs() < 1e-12 => {
                prof_iter.next();
                num(r)
            }
            _ => String::new(), // boundary nodes: stencil unavailable
        };
        s.push_str(&format!("{},{},{}\n", num(t), row.join(","), res));
    }
    write_out(&args.common.out, &s)?;
    Ok(ExitCode::SUCCESS)
}

fn config_of(common: &CommonArgs) -> Result<SuiteConfig, GeoError> {
    if !(common.h > 0.0) {
        return Err(GeoError::InvalidInput("h must be positive".into()));
    }
    let mut cfg = SuiteConfig::new(&common.manifold);
    cfg.base = common.point.clone().map(|c| c.0);
    cfg.params = GeoParams::default().with_h(common.h);
    cfg.epsilon = common.epsilon;
    Ok(cfg)
}
