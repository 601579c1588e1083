//! The `gridcascade` command line: simulate, identify, sweep and report.
//!
//! Every run writes its outputs plus a `manifest.json` into `--out`. The
//! manifest records the arguments, so a run can be replayed bit for bit.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::cascade::{simulate_cascade, CascadeConfig, CascadeTrace, Disturbance};
use crate::cia::{identify, sweep, CiaConfig};
use crate::error::{Error, Result};
use crate::grid::{load_case, BranchId, CaseFormat, NetworkCase};
use crate::ieee118;
use crate::jfnk::JfnkConfig;
use crate::kkt::Bounds;
use crate::manifest::{sha256_hex, unix_now, RunManifest};
use crate::prepared::PreparedCase;
use crate::report::compare;

#[derive(Debug, Parser)]
#[command(
    name = "gridcascade",
    version,
    about = "Cascading-failure simulation and worst-case contingency search for DC grids"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one cascade for a fixed disturbance.
    Simulate(SimulateArgs),
    /// Find the disturbance magnitude that minimizes the final-step cost.
    Identify(IdentifyArgs),
    /// Evaluate the final-step cost on a uniform grid of magnitudes.
    Sweep(SweepArgs),
    /// Compare cascade traces side by side.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Toggle {
    On,
    Off,
}

#[derive(Debug, Clone, Args, Serialize)]
struct CaseArgs {
    /// Case file (.json native, .m MATPOWER). Defaults to the bundled IEEE 118-bus case.
    #[arg(long)]
    case: Option<PathBuf>,
    /// Disturbed branch id.
    #[arg(long, default_value_t = ieee118::DISTURBED_BRANCH)]
    branch: BranchId,
    /// Output directory.
    #[arg(long, default_value = "gridcascade-out")]
    #[serde(skip)]
    out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
struct CascadeArgs {
    /// Relay preset time T in seconds.
    #[arg(long, default_value_t = 1.0)]
    timer: f64,
    /// TCSC integration step in seconds.
    #[arg(long, default_value_t = crate::facts::DEFAULT_DT)]
    dt: f64,
    #[arg(long, value_enum, default_value_t = Toggle::Off)]
    facts: Toggle,
    /// Maximum number of cascading steps.
    #[arg(long, default_value_t = 12)]
    max_steps: usize,
}

impl CascadeArgs {
    fn config(&self) -> Result<CascadeConfig> {
        let cfg = CascadeConfig {
            max_steps: self.max_steps,
            relay_period: self.timer,
            dt: self.dt,
            facts_enabled: self.facts == Toggle::On,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
struct BoundsArgs {
    /// Disturbance bounds.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true,
          default_values_t = [ieee118::DELTA_BOUNDS.0, ieee118::DELTA_BOUNDS.1])]
    bounds: Vec<f64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: u64,
}

impl BoundsArgs {
    fn bounds(&self) -> Result<Bounds> {
        Bounds::new(self.bounds[0], self.bounds[1])
    }
}

#[derive(Debug, Clone, Args, Serialize)]
struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    case: CaseArgs,
    /// Disturbance magnitude added to the branch susceptance.
    #[arg(long, default_value_t = ieee118::DELTA_BOUNDS.1, allow_negative_numbers = true)]
    delta: f64,
    #[command(flatten)]
    #[serde(flatten)]
    cascade: CascadeArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
struct IdentifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    case: CaseArgs,
    #[command(flatten)]
    #[serde(flatten)]
    bounds: BoundsArgs,
    #[command(flatten)]
    #[serde(flatten)]
    cascade: CascadeArgs,
    /// Number of JFNK restarts.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    lmax: u64,
    /// Seed for the restart starting points.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
struct SweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    case: CaseArgs,
    #[command(flatten)]
    #[serde(flatten)]
    bounds: BoundsArgs,
    #[command(flatten)]
    #[serde(flatten)]
    cascade: CascadeArgs,
    /// Number of grid points, endpoints included.
    #[arg(long, default_value_t = 150, value_parser = clap::value_parser!(u64).range(2..))]
    grid: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
struct ReportArgs {
    /// Trace files written by `simulate`; the first is the reference.
    #[arg(required = true)]
    traces: Vec<PathBuf>,
    /// Scenario labels, one per trace. Defaults to the file names.
    #[arg(long)]
    label: Vec<String>,
    #[arg(long, default_value = "gridcascade-out")]
    #[serde(skip)]
    out: PathBuf,
}

/// Parse `args` (program name first), run the command and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let recorded: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(cli.command, recorded) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

struct LoadedCase {
    case: NetworkCase,
    label: String,
    sha256: String,
}

fn load(path: Option<&Path>) -> Result<LoadedCase> {
    match path {
        None => Ok(LoadedCase {
            case: NetworkCase::from_json_str(ieee118::IEEE118_JSON)?,
            label: "bundled:ieee118".into(),
            sha256: sha256_hex(ieee118::IEEE118_JSON.as_bytes()),
        }),
        Some(p) => {
            let bytes = fs::read(p).map_err(|e| Error::parse(p, e.to_string()))?;
            Ok(LoadedCase {
                case: load_case(p, CaseFormat::from_path(p))?,
                label: p.display().to_string(),
                sha256: sha256_hex(&bytes),
            })
        }
    }
}

fn write_text(dir: &Path, name: &str, text: &str, outputs: &mut Vec<String>) -> Result<()> {
    fs::write(dir.join(name), text)?;
    outputs.push(name.to_string());
    Ok(())
}

fn write_with<F>(dir: &Path, name: &str, outputs: &mut Vec<String>, f: F) -> Result<()>
where
    F: FnOnce(BufWriter<File>) -> Result<()>,
{
    f(BufWriter::new(File::create(dir.join(name))?))?;
    outputs.push(name.to_string());
    Ok(())
}

struct Run {
    command: &'static str,
    args: Vec<String>,
    config: serde_json::Value,
    case: String,
    case_sha256: String,
    seed: Option<u64>,
    started_at: f64,
}

impl Run {
    fn new(command: &'static str, args: Vec<String>, config: &impl Serialize) -> Result<Self> {
        Ok(Self {
            command,
            args,
            config: serde_json::to_value(config)?,
            case: String::new(),
            case_sha256: String::new(),
            seed: None,
            started_at: unix_now(),
        })
    }

    fn finish(self, dir: &Path, mut outputs: Vec<String>) -> Result<()> {
        outputs.push("manifest.json".into());
        RunManifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: self.command.into(),
            args: self.args,
            config: self.config,
            case: self.case,
            case_sha256: self.case_sha256,
            seed: self.seed,
            outputs,
            started_at: self.started_at,
            finished_at: unix_now(),
        }
        .write(dir.join("manifest.json"))
    }
}

fn prepare(args: &CaseArgs, run: &mut Run) -> Result<PreparedCase> {
    let loaded = load(args.case.as_deref())?;
    run.case = loaded.label;
    run.case_sha256 = loaded.sha256;
    let prepared = PreparedCase::new(&loaded.case)?;
    prepared.branch_row(args.branch)?;
    fs::create_dir_all(&args.out)?;
    Ok(prepared)
}

fn execute(command: Command, recorded: Vec<String>) -> Result<()> {
    match command {
        Command::Simulate(a) => {
            let cascade = a.cascade.config()?;
            let mut run = Run::new("simulate", recorded, &a)?;
            let case = prepare(&a.case, &mut run)?;
            let trace = simulate_cascade(
                &case,
                &Disturbance {
                    branch: a.case.branch,
                    delta: a.delta,
                },
                &cascade,
            )?;
            let dir = &a.case.out;
            let mut outputs = Vec::new();
            write_text(dir, "trace.json", &(trace.to_json_string()? + "\n"), &mut outputs)?;
            write_with(dir, "timeline.csv", &mut outputs, |w| trace.write_timeline_csv(w))?;
            println!(
                "branch {} delta {}: {} outages, {} islands, J = {:.6} ({:?})",
                a.case.branch,
                a.delta,
                trace.outage_count(),
                trace.island_count(),
                trace.final_cost,
                trace.terminated_reason
            );
            run.finish(dir, outputs)
        }
        Command::Identify(a) => {
            let cfg = CiaConfig {
                l_max: a.lmax as usize,
                seed: a.seed,
                jobs: a.bounds.jobs as usize,
                jfnk: JfnkConfig::default(),
                cascade: a.cascade.config()?,
            };
            let bounds = a.bounds.bounds()?;
            let mut run = Run::new("identify", recorded, &cfg)?;
            run.seed = Some(a.seed);
            let case = prepare(&a.case, &mut run)?;
            let result = identify(&case, a.case.branch, bounds, &cfg)?;
            let dir = &a.case.out;
            let mut outputs = Vec::new();
            write_text(
                dir,
                "identification.json",
                &(result.to_json_string()? + "\n"),
                &mut outputs,
            )?;
            println!(
                "branch {}: best delta {:.6}, J = {:.6} (baseline {:.6})",
                result.branch, result.best_delta, result.best_cost, result.baseline_cost
            );
            run.finish(dir, outputs)
        }
        Command::Sweep(a) => {
            let cascade = a.cascade.config()?;
            let bounds = a.bounds.bounds()?;
            let mut run = Run::new("sweep", recorded, &a)?;
            let case = prepare(&a.case, &mut run)?;
            let result = sweep(
                &case,
                a.case.branch,
                bounds,
                a.grid as usize,
                &cascade,
                a.bounds.jobs as usize,
            )?;
            let dir = &a.case.out;
            let mut outputs = Vec::new();
            write_with(dir, "sweep.csv", &mut outputs, |w| result.write_csv(w))?;
            write_text(dir, "sweep.json", &(result.to_json_string()? + "\n"), &mut outputs)?;
            match &result.argmin {
                Some(p) => println!("argmin delta {:.6}, J = {:.6}", p.delta, p.cost.unwrap_or(f64::NAN)),
                None => println!("no grid point simulated successfully"),
            }
            run.finish(dir, outputs)
        }
        Command::Report(a) => {
            if !a.label.is_empty() && a.label.len() != a.traces.len() {
                return Err(Error::Config(format!(
                    "{} labels given for {} traces",
                    a.label.len(),
                    a.traces.len()
                )));
            }
            let mut run = Run::new("report", recorded, &a)?;
            let mut trace_bytes = Vec::new();
            let mut traces = Vec::with_capacity(a.traces.len());
            for (i, path) in a.traces.iter().enumerate() {
                let text = fs::read_to_string(path).map_err(|e| Error::parse(path, e.to_string()))?;
                trace_bytes.extend_from_slice(text.as_bytes());
                let trace = CascadeTrace::from_json_str(&text).map_err(|e| Error::parse(path, e.to_string()))?;
                let label = a.label.get(i).cloned().unwrap_or_else(|| {
                    path.file_stem()
                        .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
                });
                traces.push((label, trace));
            }
            run.case = a
                .traces
                .iter()
                .map(|p| p.display().to_string())
                .collect::<Vec<_>>()
                .join(",");
            run.case_sha256 = sha256_hex(&trace_bytes);
            let report = compare(&traces)?;
            fs::create_dir_all(&a.out)?;
            let mut outputs = Vec::new();
            write_with(&a.out, "report.csv", &mut outputs, |w| report.write_csv(w))?;
            write_text(&a.out, "report.json", &(report.to_json_string()? + "\n"), &mut outputs)?;
            write_text(&a.out, "report.txt", &report.to_table(), &mut outputs)?;
            print!("{}", report.to_table());
            run.finish(&a.out, outputs)
        }
    }
}
