//! `preserverlab` command line.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use super::report::{
    to_json, write_atomic, CanonicalPayload, Parameters, Payload, RunReport, TOOL_VERSION,
};
use super::spec::{tabulate, Family, MapSpec};
use super::suite::{identity_suite, Kernels};
use crate::canon::{
    area_canon_2d, area_canon_highd, comm_canon_2x2, comm_canon_general, extend_projection_map,
    query_plan, wigner_complex, wigner_real, CanonConfig, Target,
};
use crate::check::{
    check_area, check_comm_norm, check_commutativity_bidir, check_projection_orthogonality,
    CheckConfig, Direction,
};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::gauge::GaugeNorm;
use crate::maps::Space;

#[derive(Parser)]
#[command(
    name = "preserverlab",
    version,
    about = "Check preserver properties of maps and recover their canonical forms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Randomized check of a preserver property.
    Check(CheckArgs),
    /// Recover the canonical form of a conforming map.
    Canonicalize(CanonArgs),
    /// Run the identity suite.
    Suite(SuiteArgs),
    /// List the inputs a canonicalization will query.
    Plan(PlanArgs),
    /// Evaluate a map on a query plan and write the result as a table spec.
    Tabulate(TabulateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Property {
    Area,
    CommNorm,
    Commutativity,
    Orthogonality,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    Area,
    CommNorm,
    WignerReal,
    WignerComplex,
    ExtendProjection,
}

impl From<TargetArg> for Target {
    fn from(t: TargetArg) -> Self {
        match t {
            TargetArg::Area => Target::Area,
            TargetArg::CommNorm => Target::CommNorm,
            TargetArg::WignerReal => Target::WignerReal,
            TargetArg::WignerComplex => Target::WignerComplex,
            TargetArg::ExtendProjection => Target::ExtendProjection,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    Both,
    Forward,
}

#[derive(Args)]
struct ExecArgs {
    /// Evaluate samples on one thread.
    #[arg(long)]
    sequential: bool,
}

impl ExecArgs {
    fn exec(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, value_enum)]
    property: Property,
    /// Norm descriptor: operator, schatten:<p|inf> or kyfan:<k>.
    #[arg(long)]
    norm: Option<GaugeNorm>,
    #[arg(long)]
    samples: usize,
    #[arg(long)]
    tol: f64,
    #[arg(long)]
    seed: u64,
    /// Orthogonality in both directions or forward only.
    #[arg(long, value_enum, default_value = "both")]
    direction: DirectionArg,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    exec: ExecArgs,
}

#[derive(Args)]
struct CanonArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, value_enum)]
    target: TargetArg,
    #[arg(long)]
    norm: Option<GaugeNorm>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    exec: ExecArgs,
}

#[derive(Args)]
struct SuiteArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    exec: ExecArgs,
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long, value_enum)]
    target: TargetArg,
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    norm: Option<GaugeNorm>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TabulateArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, value_enum)]
    target: TargetArg,
    #[arg(long)]
    norm: Option<GaugeNorm>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Runs the tool on `args` (including the program name) and returns the exit
/// code: 0 on success, 1 when a property is violated or a map is rejected,
/// 2 on usage, spec and input errors.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("preserverlab: {e}");
            2
        }
    }
}

fn load_spec(path: &Path) -> Result<MapSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parameter(format!("cannot read {}: {e}", path.display())))?;
    MapSpec::from_json(&text)
}

fn emit(report: &RunReport, out: Option<&Path>) -> Result<()> {
    let json = report.to_json();
    match out {
        Some(path) => write_atomic(path, &json),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{json}").and_then(|_| stdout.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(Error::Parameter(format!("cannot write report: {e}")))
                }
                _ => Ok(()),
            }
        }
    }
}

/// Errors that mean "the map is not what was asked for" rather than a bad
/// invocation.
fn is_rejection(e: &Error) -> bool {
    matches!(
        e,
        Error::NotAPreserver(_) | Error::Precondition(_) | Error::Structure(_)
    )
}

fn execute(command: Command) -> Result<i32> {
    let start = Instant::now();
    match command {
        Command::Check(args) => {
            let spec = load_spec(&args.spec)?;
            let map = spec.make_map()?;
            let cfg =
                CheckConfig::new(args.samples, args.tol, args.seed).with_exec(args.exec.exec());
            let norm = args.norm.unwrap_or(GaugeNorm::Operator);
            let (name, result) = match args.property {
                Property::Area => ("area", check_area(map.as_vector()?, &cfg)),
                Property::CommNorm => ("comm-norm", check_comm_norm(map.as_matrix()?, &norm, &cfg)),
                Property::Commutativity => (
                    "commutativity",
                    check_commutativity_bidir(map.as_matrix()?, &cfg),
                ),
                Property::Orthogonality => {
                    let direction = match args.direction {
                        DirectionArg::Both => Direction::Both,
                        DirectionArg::Forward => Direction::Forward,
                    };
                    (
                        "orthogonality",
                        check_projection_orthogonality(map.as_matrix()?, direction, &cfg),
                    )
                }
            };
            let (payload, code) = match result {
                Ok(r) => {
                    eprintln!(
                        "{name}: {} (max relative error {:e})",
                        r.verdict(),
                        r.max_rel_err
                    );
                    let code = if r.pass { 0 } else { 1 };
                    (Payload::Check(r), code)
                }
                Err(e) if is_rejection(&e) => (
                    Payload::Rejection {
                        reason: e.to_string(),
                    },
                    1,
                ),
                Err(e) => return Err(e),
            };
            let report = RunReport {
                tool_version: TOOL_VERSION.into(),
                spec_digest: Some(spec.digest()),
                parameters: Parameters {
                    command: "check".into(),
                    property: Some(name.into()),
                    norm: matches!(args.property, Property::CommNorm).then(|| norm.to_string()),
                    samples: Some(args.samples),
                    tol: Some(args.tol),
                    seed: args.seed,
                    ..Parameters::default()
                },
                payload,
                wall_time_s: start.elapsed().as_secs_f64(),
            };
            emit(&report, args.out.as_deref())?;
            Ok(code)
        }
        Command::Canonicalize(args) => {
            let spec = load_spec(&args.spec)?;
            let map = spec.make_map()?;
            let cfg = CanonConfig::new(args.seed).with_exec(args.exec.exec());
            let norm = args.norm.unwrap_or(GaugeNorm::Operator);
            let target = Target::from(args.target);
            let result = canonicalize(&map, target, &norm, &cfg);
            let (payload, code) = match result {
                Ok(form) => (Payload::Canonical(form), 0),
                Err(e) if is_rejection(&e) => {
                    eprintln!("rejected: {e}");
                    (
                        Payload::Rejection {
                            reason: e.to_string(),
                        },
                        1,
                    )
                }
                Err(e) => return Err(e),
            };
            let report = RunReport {
                tool_version: TOOL_VERSION.into(),
                spec_digest: Some(spec.digest()),
                parameters: Parameters {
                    command: "canonicalize".into(),
                    target: Some(target_name(target).into()),
                    norm: matches!(target, Target::CommNorm | Target::ExtendProjection)
                        .then(|| norm.to_string()),
                    seed: args.seed,
                    ..Parameters::default()
                },
                payload,
                wall_time_s: start.elapsed().as_secs_f64(),
            };
            emit(&report, args.out.as_deref())?;
            Ok(code)
        }
        Command::Suite(args) => {
            let suite = identity_suite(args.seed, &Kernels::default(), args.exec.exec());
            for r in &suite.identities {
                eprintln!(
                    "{:<24} {} max residual {:e}",
                    r.name,
                    if r.pass { "pass" } else { "FAIL" },
                    r.max_residual
                );
            }
            let code = if suite.pass { 0 } else { 1 };
            let report = RunReport {
                tool_version: TOOL_VERSION.into(),
                spec_digest: None,
                parameters: Parameters {
                    command: "suite".into(),
                    seed: args.seed,
                    ..Parameters::default()
                },
                payload: Payload::Suite(suite),
                wall_time_s: start.elapsed().as_secs_f64(),
            };
            emit(&report, args.out.as_deref())?;
            Ok(code)
        }
        Command::Plan(args) => {
            let norm = args.norm.unwrap_or(GaugeNorm::Operator);
            let target = Target::from(args.target);
            let points = query_plan(target, args.dim, &norm, &CanonConfig::new(args.seed))?;
            let report = RunReport {
                tool_version: TOOL_VERSION.into(),
                spec_digest: None,
                parameters: Parameters {
                    command: "plan".into(),
                    target: Some(target_name(target).into()),
                    norm: matches!(target, Target::CommNorm | Target::ExtendProjection)
                        .then(|| norm.to_string()),
                    seed: args.seed,
                    ..Parameters::default()
                },
                payload: Payload::Plan { points },
                wall_time_s: start.elapsed().as_secs_f64(),
            };
            emit(&report, args.out.as_deref())?;
            Ok(0)
        }
        Command::Tabulate(args) => {
            let spec = load_spec(&args.spec)?;
            let map = spec.make_map()?;
            let norm = args.norm.unwrap_or(GaugeNorm::Operator);
            let points = query_plan(
                args.target.into(),
                spec.dim(),
                &norm,
                &CanonConfig::new(args.seed),
            )?;
            let table = MapSpec {
                space: spec.space,
                family: Family::Table {
                    entries: tabulate(&map, &points)?,
                },
            };
            let json = to_json(&table);
            match args.out {
                Some(path) => write_atomic(&path, &json)?,
                None => println!("{json}"),
            }
            Ok(0)
        }
    }
}

fn target_name(t: Target) -> &'static str {
    match t {
        Target::Area => "area",
        Target::CommNorm => "comm-norm",
        Target::WignerReal => "wigner-real",
        Target::WignerComplex => "wigner-complex",
        Target::ExtendProjection => "extend-projection",
    }
}

/// Dispatches a canonicalization target on a constructed map.
pub(crate) fn canonicalize(
    map: &crate::maps::BlackBoxMap,
    target: Target,
    norm: &GaugeNorm,
    cfg: &CanonConfig,
) -> Result<CanonicalPayload> {
    Ok(match target {
        Target::Area => {
            let m = map.as_vector()?;
            let form = if m.dim() == 2 {
                area_canon_2d(m, cfg)?
            } else {
                area_canon_highd(m, cfg)?
            };
            CanonicalPayload::Area(form)
        }
        Target::WignerReal => CanonicalPayload::Area(wigner_real(map.as_vector()?, cfg)?),
        Target::CommNorm => {
            CanonicalPayload::Comm(comm_canon_general(map.as_matrix()?, norm, cfg)?)
        }
        Target::WignerComplex => CanonicalPayload::Wigner(wigner_complex(map.as_matrix()?, cfg)?),
        Target::ExtendProjection => {
            if !matches!(map.space(), Space::Hermitian { dim: 2 }) {
                return Err(Error::Parameter(
                    "extend-projection needs a map on 2x2 matrices".into(),
                ));
            }
            let ext = extend_projection_map(map.as_matrix()?, cfg)?;
            CanonicalPayload::Comm(comm_canon_2x2(&ext, norm, cfg)?)
        }
    })
}
