//! Argument parsing and file output.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use slag_toric::lattice::QVec;
use slag_toric::slag::{Corruption, FibrationVariant};
use slag_toric::Execution;

use crate::commands::{self, cloud_csv, MirrorOptions, PotentialChoice, VerifyOptions};
use crate::documents::{parse_json, parse_parameters, rat, to_json, CurveDocument, FanDocument, PolygonDocument};
use crate::error::{CliError, CliResult};
use crate::reports::{Outputs, ReportDocument};
use crate::svg;

pub const THREADS_ENV: &str = "SLAG_TORIC_THREADS";

#[derive(Debug, Parser)]
#[command(name = "slag-toric", version, about = "Toric special Lagrangian fibrations: exact pipelines and numerical checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Directory for report.json and side artifacts; the report goes to stdout otherwise.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for sampling in `verify` (default 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Residual tolerance for `verify` (default 1e-6).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// SVG output path.
    #[arg(long, global = true)]
    pub svg: Option<PathBuf>,
    /// Format of the point cloud written by `mirror`.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Record wall time in the report.
    #[arg(long, global = true)]
    pub timing: bool,
    /// Disable data-parallel loops.
    #[arg(long, global = true)]
    pub sequential: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PotentialArg {
    Flat,
    Quadratic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Affine,
    Proper,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CorruptArg {
    None,
    DropPhi1,
    WrongPhase,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Gorenstein degree, cross-section, smoothness and crepancy of a cone and its resolution.
    Gorenstein { fan: PathBuf },
    /// Moment polytope and discriminant graph for an ample class.
    Discriminant {
        fan: PathBuf,
        /// Divisor class in kernel coordinates, comma separated rationals.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        class: Option<Vec<String>>,
    },
    /// Minkowski decompositions of a polygon and their smoothing discriminants.
    Smooth {
        polygon: PathBuf,
        /// Deformation parameter `RE,IM`, repeated once per summand.
        #[arg(long = "x", value_name = "RE,IM", allow_hyphen_values = true)]
        x: Vec<String>,
    },
    /// Tropical spine, amoeba sample and fattening check for a curve family.
    Mirror {
        curve: PathBuf,
        /// Curve parameter, overriding `t` in the document.
        #[arg(long)]
        t: Option<f64>,
        /// Half-width of the window in units of |log t|.
        #[arg(long, default_value_t = 3.0)]
        window: f64,
        /// Fattening radius in log coordinates.
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        /// Slices per axis.
        #[arg(long, default_value_t = 200)]
        resolution: usize,
        /// Argument samples per slice.
        #[arg(long, default_value_t = 64)]
        angles: usize,
        /// Fan document whose discriminant graph is compared with the spine.
        #[arg(long)]
        compare: Option<PathBuf>,
        /// Divisor class for the compared fan.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        class: Option<Vec<String>>,
        /// Integer 2x2 matrix `a,b,c,d` (rows) taking spine directions to graph directions.
        #[arg(long, value_delimiter = ',', num_args = 4, allow_hyphen_values = true, default_values_t = [-1, 0, 0, -1])]
        basis_change: Vec<i64>,
    },
    /// Numerical special Lagrangian certification of the fibration maps.
    Verify {
        #[arg(long, value_enum, default_value_t = PotentialArg::Flat)]
        potential: PotentialArg,
        /// Coefficient of the quadratic potential.
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        /// Complex dimension.
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, value_enum, default_value_t = VariantArg::Affine)]
        variant: VariantArg,
        /// Points per fiber.
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Number of fibers sampled.
        #[arg(long, default_value_t = 10)]
        fibers: usize,
        /// Replace the map by a deliberately wrong one.
        #[arg(long, value_enum, default_value_t = CorruptArg::None)]
        corrupt: CorruptArg,
    },
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn parse_class(class: &Option<Vec<String>>) -> CliResult<Option<QVec>> {
    class.as_ref().map(|c| c.iter().map(|s| rat(s)).collect()).transpose()
}

struct Emitted {
    report: ReportDocument,
    svg: Option<(String, String)>,
    extra: Vec<(String, String)>,
    failed: Option<String>,
}

fn execute(cli: &Cli) -> CliResult<Emitted> {
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    let mut svg_out = None;
    let mut extra = Vec::new();
    let mut failed = None;
    let report = match &cli.command {
        Command::Gorenstein { fan } => {
            let doc: FanDocument = parse_json(&read(fan)?)?;
            let out = commands::gorenstein(&doc)?;
            ReportDocument::new("gorenstein", json!({ "document": doc }), Outputs::Gorenstein(out))
        }
        Command::Discriminant { fan, class } => {
            let doc: FanDocument = parse_json(&read(fan)?)?;
            let run = commands::discriminant(&doc, parse_class(class)?)?;
            if cli.svg.is_some() || cli.out.is_some() {
                svg_out = Some(("discriminant.svg".to_string(), svg::discriminant_svg(&run.graph)?));
            }
            ReportDocument::new("discriminant", json!({ "document": doc, "class": class }), Outputs::Discriminant(run.output))
        }
        Command::Smooth { polygon, x } => {
            let doc: PolygonDocument = parse_json(&read(polygon)?)?;
            let pairs = x
                .iter()
                .map(|s| {
                    let (re, im) = s.split_once(',').ok_or_else(|| CliError::Parse(format!("--x expects RE,IM, got {s:?}")))?;
                    Ok([re.trim().to_string(), im.trim().to_string()])
                })
                .collect::<CliResult<Vec<[String; 2]>>>()?;
            let params = if pairs.is_empty() { None } else { Some(parse_parameters(&pairs)?) };
            let run = commands::smooth(&doc, params, exec)?;
            if cli.svg.is_some() || cli.out.is_some() {
                svg_out = Some(("smooth.svg".to_string(), svg::smooth_svg(&run)));
            }
            ReportDocument::new("smooth", json!({ "document": doc, "x": pairs }), Outputs::Smooth(run.output))
        }
        Command::Mirror { curve, t, window, eps, resolution, angles, compare, class, basis_change } => {
            let doc: CurveDocument = parse_json(&read(curve)?)?;
            let compare_doc = match compare {
                Some(p) => Some((parse_json::<FanDocument>(&read(p)?)?, parse_class(class)?)),
                None => None,
            };
            let bc = [[basis_change[0], basis_change[1]], [basis_change[2], basis_change[3]]];
            let opts = MirrorOptions {
                t: *t,
                window: *window,
                eps: *eps,
                resolution: *resolution,
                angles: *angles,
                compare: compare_doc.clone(),
                basis_change: bc,
                exec,
            };
            let run = commands::mirror(&doc, &opts)?;
            if cli.svg.is_some() || cli.out.is_some() {
                svg_out = Some(("mirror.svg".to_string(), svg::mirror_svg(&run)));
            }
            extra.push(("spine.json".to_string(), to_json(&run.output.spine)));
            extra.push(match cli.format {
                Format::Csv => ("cloud.csv".to_string(), cloud_csv(&run.cloud)),
                Format::Json => ("cloud.json".to_string(), to_json(&run.cloud.points)),
            });
            let inputs = json!({
                "document": doc,
                "t": t,
                "window": window,
                "eps": eps,
                "resolution": resolution,
                "angles": angles,
                "compare": compare_doc.as_ref().map(|(d, _)| d),
                "class": class,
                "basis_change": bc,
            });
            ReportDocument::new("mirror", inputs, Outputs::Mirror(run.output))
        }
        Command::Verify { potential, lambda, n, variant, samples, fibers, corrupt } => {
            let opts = VerifyOptions {
                potential: match potential {
                    PotentialArg::Flat => PotentialChoice::Flat,
                    PotentialArg::Quadratic => PotentialChoice::Quadratic { lambda: *lambda },
                },
                n: *n,
                variant: match variant {
                    VariantArg::Affine => FibrationVariant::Affine,
                    VariantArg::Proper => FibrationVariant::Proper,
                },
                corruption: match corrupt {
                    CorruptArg::None => Corruption::None,
                    CorruptArg::DropPhi1 => Corruption::DropPhi1,
                    CorruptArg::WrongPhase => Corruption::WrongPhase,
                },
                fibers: *fibers,
                samples: *samples,
                seed: cli.seed.unwrap_or(0),
                tol: cli.tol.unwrap_or(1e-6),
                exec,
            };
            let out = commands::verify(&opts)?;
            if !out.pass {
                failed = Some(format!(
                    "max |omega| = {:e}, max |Im Omega| = {:e}, hamiltonian = {:e}, tol = {:e}",
                    out.max_omega, out.max_im_omega, out.max_hamiltonian, out.tol
                ));
            }
            ReportDocument::new("verify", json!({ "options": out.clone() }), Outputs::Verify(out))
        }
    };
    Ok(Emitted { report, svg: svg_out, extra, failed })
}

fn configure_threads() {
    #[cfg(feature = "parallel")]
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&n| n > 0) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn emit(cli: &Cli, mut e: Emitted, elapsed_ms: f64) -> CliResult<()> {
    if cli.timing {
        e.report.timing_ms = Some(elapsed_ms);
    }
    let report = to_json(&e.report);
    match &cli.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            write(&dir.join("report.json"), &report)?;
            for (name, text) in &e.extra {
                write(&dir.join(name), text)?;
            }
        }
        None => {
            use std::io::Write;
            let _ = std::io::stdout().write_all(report.as_bytes());
        }
    }
    if let Some((name, text)) = &e.svg {
        let path = match (&cli.svg, &cli.out) {
            (Some(p), _) => p.clone(),
            (None, Some(dir)) => dir.join(name),
            (None, None) => unreachable!("svg is only rendered when a destination exists"),
        };
        write(&path, text)?;
    }
    match e.failed {
        Some(msg) => Err(CliError::Verify(msg)),
        None => Ok(()),
    }
}

/// Runs the tool and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    let start = Instant::now();
    let result = execute(&cli).and_then(|e| emit(&cli, e, start.elapsed().as_secs_f64() * 1e3));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
