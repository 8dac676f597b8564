//! Command-line driver. Every subcommand except `serve` is a thin wrapper
//! over one function in [`crate::ops`].

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::model::PlatformSpec;
use crate::ops::{self, ErrorKind, OpError};
use crate::sim::{trace_csv, CostModel, FitParam, SimResult, Target, TraceEvent};
use crate::validate::{EXIT_OK, EXIT_OTHER};

#[derive(Debug, Parser)]
#[command(name = "ea4rca", version, about = "Check, generate and simulate EA4RCA accelerator designs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a design against the structural rules and the platform budget
    Validate {
        /// Design document (.ea4rca.json)
        file: PathBuf,
        /// Platform description overriding the built-in board
        #[arg(long)]
        platform: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Lower a design to a dataflow graph and write its text and manifest
    Generate {
        file: PathBuf,
        /// Output directory; files go under <out>/graph/
        #[arg(long, default_value = "build")]
        out: PathBuf,
        #[arg(long)]
        platform: Option<PathBuf>,
    },
    /// Predict the throughput of a design on a workload
    Simulate {
        file: PathBuf,
        /// Application of the workload (MM, Filter2D, FFT, MM-T); defaults to the design's metadata.app
        #[arg(long)]
        workload: Option<String>,
        /// Problem size: MxKxN for MM, WxH[:k] for Filter2D, samples for FFT, tasks for MM-T
        #[arg(long)]
        size: Option<String>,
        /// Keep only the first N PUs in service order
        #[arg(long)]
        pus: Option<u32>,
        /// Cost model JSON
        #[arg(long)]
        cost_model: Option<PathBuf>,
        #[arg(long)]
        platform: Option<PathBuf>,
        /// Write the result here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the event trace as CSV
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Fit cost-model parameters to observed durations
    Calibrate {
        /// Targets JSON: a list of {scenario, observed_sec}
        targets: PathBuf,
        /// Parameters to fit, comma separated; chosen automatically when omitted
        #[arg(long, value_delimiter = ',')]
        params: Vec<String>,
        /// Starting cost model
        #[arg(long)]
        cost_model: Option<PathBuf>,
        #[arg(long)]
        platform: Option<PathBuf>,
        /// Write the fitted cost model here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate simulation results side by side
    Report {
        /// Simulation result JSON files
        #[arg(required = true)]
        results: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Render a simulation trace as an SVG timeline
    Plot {
        /// Trace CSV, or a simulation result JSON that carries a trace
        input: PathBuf,
        /// Write the SVG here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        title: Option<String>,
    },
    /// Print the design document of a reference application
    Template {
        /// MM, Filter2D, FFT or MM-T
        app: String,
        /// Keep only the first N PUs
        #[arg(long)]
        pus: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the HTTP API
    Serve {
        #[arg(long, env = "EA4RCA_PORT", default_value_t = 8080)]
        port: u16,
        /// Kernel and graph repository root
        #[arg(long, env = "EA4RCA_REPO", default_value = ".ea4rca-repo")]
        repo: PathBuf,
        /// Origin allowed to call the API from a browser
        #[arg(long, env = "EA4RCA_CORS_ORIGIN")]
        cors_origin: Option<String>,
        #[arg(long, default_value = "127.0.0.1")]
        bind: String,
    },
}

/// Parses arguments from the process and runs.
pub fn main() -> i32 {
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr().lock();
    run(std::env::args_os(), &mut out, &mut err)
}

pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_OTHER } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            for d in e.diagnostics.iter().filter(|d| d.location != e.location || d.message != e.message) {
                let _ = writeln!(err, "  {d}");
            }
            if let Some(r) = &e.report {
                for v in &r.resource.violations {
                    let _ = writeln!(err, "  error {} at {}: {}", v.code, v.location, v.message);
                }
            }
            e.exit_code()
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> OpError {
    OpError::new(ErrorKind::Internal, "IO", path.display().to_string(), e.to_string())
}

fn read(path: &Path) -> Result<String, OpError> {
    std::fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn read_json(path: &Path) -> Result<serde_json::Value, OpError> {
    ops::parse_json(&read(path)?).map_err(|mut e| {
        e.location = format!("{}: {}", path.display(), e.location);
        e
    })
}

fn read_typed<T: for<'de> serde::Deserialize<'de>>(path: &Path) -> Result<T, OpError> {
    ops::from_json(read_json(path)?, &path.display().to_string())
}

fn platform(path: &Option<PathBuf>) -> Result<PlatformSpec, OpError> {
    path.as_deref().map_or(Ok(PlatformSpec::default()), read_typed)
}

fn write_file(path: &Path, text: &str) -> Result<(), OpError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

fn emit(out: &mut dyn Write, dest: &Option<PathBuf>, text: &str) -> Result<(), OpError> {
    match dest {
        Some(p) => write_file(p, text),
        None => out.write_all(text.as_bytes()).map_err(|e| io_err(Path::new("<stdout>"), e)),
    }
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn execute(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, OpError> {
    match cmd {
        Command::Validate { file, platform: p, format } => {
            let report = ops::validate(&read_json(&file)?, &platform(&p)?)?;
            let text = match format {
                Format::Text => ops::render_report(&report),
                Format::Json => pretty(&report),
            };
            emit(out, &None, &text)?;
            Ok(report.exit_code())
        }
        Command::Generate { file, out: dir, platform: p } => {
            let g = ops::generate(&read_json(&file)?, &platform(&p)?)?;
            for (rel, text) in &g.files {
                write_file(&dir.join(rel), text)?;
                let _ = writeln!(out, "wrote {}", dir.join(rel).display());
            }
            Ok(EXIT_OK)
        }
        Command::Simulate { file, workload, size, pus, cost_model, platform: p, out: dest, trace } => {
            let mut req = ops::SimulateRequest {
                design: read_json(&file)?,
                workload: None,
                size,
                pus,
                platform: Some(platform(&p)?),
                cost_model: cost_model.as_deref().map(read_typed::<CostModel>).transpose()?,
                trace: trace.is_some(),
            };
            if let Some(app) = workload {
                let app: crate::workloads::App = app.parse().map_err(|e: crate::workloads::UnknownApp| {
                    OpError::new(ErrorKind::BadRequest, "INVALID_VALUE", "--workload", e.to_string())
                })?;
                let size = req.size.clone().unwrap_or_else(|| ops::default_size(app).to_string());
                req.workload = Some(
                    crate::workloads::WorkloadSpec::from_size(app, &size)
                        .map_err(|m| OpError::new(ErrorKind::BadRequest, "INVALID_VALUE", "--size", m))?,
                );
            }
            let mut result = ops::simulate(&req)?;
            if let (Some(path), Some(events)) = (&trace, result.trace.take()) {
                write_file(path, &trace_csv(&events))?;
            }
            emit(out, &dest, &pretty(&result))?;
            Ok(EXIT_OK)
        }
        Command::Calibrate { targets, params, cost_model, platform: p, out: dest } => {
            let v = read_json(&targets)?;
            let mut req: ops::CalibrateRequest = if v.is_array() {
                let targets: Vec<Target> = ops::from_json(v, "targets")?;
                ops::CalibrateRequest { targets, params: None, cost_model: None, platform: None }
            } else {
                ops::from_json(v, "targets")?
            };
            if !params.is_empty() {
                let parsed: Result<Vec<FitParam>, String> = params.iter().map(|s| s.parse()).collect();
                req.params = Some(parsed.map_err(|m| OpError::new(ErrorKind::BadRequest, "INVALID_VALUE", "--params", m))?);
            }
            if let Some(c) = cost_model {
                req.cost_model = Some(read_typed(&c)?);
            }
            if p.is_some() {
                req.platform = Some(platform(&p)?);
            }
            let fit = ops::calibrate_request(&req)?;
            for r in &fit.residuals {
                let _ = writeln!(
                    err,
                    "{:<48} observed {:.6e} s  predicted {:.6e} s  residual {:+.4}%",
                    serde_json::to_string(&r.scenario).unwrap_or_default(),
                    r.observed_sec,
                    r.predicted_sec,
                    r.relative * 100.0
                );
            }
            emit(out, &dest, &pretty(&fit.model))?;
            Ok(EXIT_OK)
        }
        Command::Report { results, format } => {
            let mut req = ops::ReportRequest { results: Vec::new() };
            for path in &results {
                let result: SimResult = read_typed(path)?;
                let name = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
                req.results.push(ops::NamedResult { name, result });
            }
            let rep = ops::report(&req);
            let text = match format {
                Format::Text => rep.text,
                Format::Json => pretty(&rep.rows),
            };
            emit(out, &None, &text)?;
            Ok(EXIT_OK)
        }
        Command::Plot { input, out: dest, title } => {
            let text = read(&input)?;
            let trace = if text.starts_with("timestamp_ps") {
                parse_trace_csv(&text).map_err(|m| OpError::new(ErrorKind::BadRequest, "SYNTAX", input.display().to_string(), m))?
            } else {
                let r: SimResult = ops::from_json(ops::parse_json(&text)?, &input.display().to_string())?;
                r.trace.ok_or_else(|| {
                    OpError::new(ErrorKind::BadRequest, "MISSING_FIELD", "trace", "the result carries no trace; simulate with --trace")
                })?
            };
            emit(out, &dest, &ops::plot_svg(&ops::PlotRequest { trace, title }))?;
            Ok(EXIT_OK)
        }
        Command::Template { app, pus, out: dest } => {
            let doc = ops::template(&app, pus)?;
            emit(out, &dest, &crate::config::serialize_design(&doc))?;
            Ok(EXIT_OK)
        }
        Command::Serve { port, repo, cors_origin, bind } => {
            let config = crate::service::ServiceConfig { port, bind, repo_root: repo, cors_origin, ..Default::default() };
            let rt = tokio::runtime::Runtime::new().map_err(|e| OpError::new(ErrorKind::Internal, "IO", "", e.to_string()))?;
            rt.block_on(crate::service::serve(config)).map_err(|e| OpError::new(ErrorKind::Internal, "SERVE", "", e.to_string()))?;
            Ok(EXIT_OK)
        }
    }
}

/// Reads the CSV written by `simulate --trace`.
pub fn parse_trace_csv(text: &str) -> Result<Vec<TraceEvent>, String> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header != "timestamp_ps,end_ps,resource,phase,pair_id,iteration" {
        return Err(format!("unexpected trace header '{header}'"));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            let f: Vec<&str> = l.split(',').collect();
            let bad = || format!("line {}: malformed trace row", i + 2);
            if f.len() != 6 {
                return Err(bad());
            }
            Ok(TraceEvent {
                timestamp_ps: f[0].parse().map_err(|_| bad())?,
                end_ps: f[1].parse().map_err(|_| bad())?,
                resource: f[2].to_string(),
                phase: f[3].to_string(),
                pair_id: f[4].parse().map_err(|_| bad())?,
                iteration: f[5].parse().map_err(|_| bad())?,
            })
        })
        .collect()
}
