//! Request-level operations shared by the command line and the HTTP service.
//! Each CLI subcommand maps onto one function here and one endpoint.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{decode_document, ConfigDocument};
use crate::diag::{Code, Diagnostic};
use crate::graph::{build_ir, emit_graph_source, Census, GraphError, KernelCatalog};
use crate::model::PlatformSpec;
use crate::sim::{
    auto_params, calibrate, simulate_with, CalibrationError, CalibrationResult, CostModel, FitParam, SimError,
    SimOptions, SimResult, Target, TraceEvent,
};
use crate::validate::{validate_resources, ValidationReport, EXIT_INFEASIBLE, EXIT_OTHER, EXIT_STRUCTURAL};
use crate::workloads::{template_document, App, TemplateParams, WorkloadSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Unreadable input: syntax or schema-level problems.
    BadRequest,
    /// Readable input that breaks design rules or budgets.
    Invalid,
    /// The workload cannot be mapped onto the design.
    Infeasible,
    /// Well-formed request the operation cannot satisfy.
    Unprocessable,
    NotFound,
    Conflict,
    Internal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpError {
    pub kind: ErrorKind,
    pub code: String,
    pub message: String,
    pub location: String,
    pub diagnostics: Vec<Diagnostic>,
    pub report: Option<Box<ValidationReport>>,
}

/// Error body returned by the service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub code: String,
    pub message: String,
    pub location: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<Diagnostic>,
}

impl OpError {
    pub fn new(kind: ErrorKind, code: impl Into<String>, location: impl Into<String>, message: impl Into<String>) -> Self {
        OpError {
            kind,
            code: code.into(),
            message: message.into(),
            location: location.into(),
            diagnostics: Vec::new(),
            report: None,
        }
    }

    fn from_report(report: ValidationReport) -> Self {
        let (code, location, message) = match report.errors().next() {
            Some(d) => (d.code.as_str().to_string(), d.location.clone(), d.message.clone()),
            None => match report.resource.violations.first() {
                Some(v) => (v.code.as_str().to_string(), v.location.clone(), v.message.clone()),
                None => ("INVALID_VALUE".into(), String::new(), "design is not deployable".into()),
            },
        };
        OpError {
            kind: ErrorKind::Invalid,
            code,
            message,
            location,
            diagnostics: report.diagnostics.clone(),
            report: Some(Box::new(report)),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::BadRequest => EXIT_STRUCTURAL,
            ErrorKind::Invalid => self.report.as_ref().map_or(EXIT_STRUCTURAL, |r| r.exit_code()),
            ErrorKind::Infeasible => EXIT_INFEASIBLE,
            _ => EXIT_OTHER,
        }
    }

    pub fn http_status(&self) -> u16 {
        match self.kind {
            ErrorKind::BadRequest => 400,
            ErrorKind::Invalid | ErrorKind::Infeasible | ErrorKind::Unprocessable => 422,
            ErrorKind::NotFound => 404,
            ErrorKind::Conflict => 409,
            ErrorKind::Internal => 500,
        }
    }

    pub fn problem(&self) -> Problem {
        Problem {
            code: self.code.clone(),
            message: self.message.clone(),
            location: self.location.clone(),
            diagnostics: self.diagnostics.clone(),
        }
    }
}

impl std::fmt::Display for OpError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.location.is_empty() {
            write!(f, "{}: {}", self.code, self.message)
        } else {
            write!(f, "{} at {}: {}", self.code, self.location, self.message)
        }
    }
}

impl std::error::Error for OpError {}

impl From<GraphError> for OpError {
    fn from(e: GraphError) -> Self {
        let msg = e.to_string();
        match e {
            GraphError::NotDeployable(r) => OpError::from_report(*r),
            GraphError::NotFound(n) => OpError::new(ErrorKind::NotFound, "NOT_FOUND", n, msg),
            GraphError::NameCollision { name, .. } => OpError::new(ErrorKind::Conflict, "NAME_COLLISION", name, msg),
            GraphError::IdCollision(id) => OpError::new(ErrorKind::Conflict, "ID_COLLISION", id, msg),
            GraphError::CombinedOverBudget(_) => OpError::new(ErrorKind::Unprocessable, "COMBINED_OVER_BUDGET", "", msg),
            GraphError::UnresolvedKernel(k) => OpError::new(ErrorKind::Unprocessable, "UNRESOLVED_KERNEL", k, msg),
            GraphError::InternalContractViolation(_) => OpError::new(ErrorKind::Internal, "INTERNAL_CONTRACT_VIOLATION", "", msg),
            GraphError::Io(_) | GraphError::Corrupt(_) => OpError::new(ErrorKind::Internal, "REPOSITORY", "", msg),
        }
    }
}

impl From<SimError> for OpError {
    fn from(e: SimError) -> Self {
        let msg = e.to_string();
        match e {
            SimError::NotDeployable(r) => OpError::from_report(*r),
            SimError::InfeasibleMapping { .. } => OpError::new(ErrorKind::Infeasible, "INFEASIBLE_MAPPING", "", msg),
            SimError::Mapping(crate::workloads::MappingError::Workload(_)) => {
                OpError::new(ErrorKind::BadRequest, "INVALID_VALUE", "workload", msg)
            }
            SimError::Mapping(_) => OpError::new(ErrorKind::Infeasible, "INFEASIBLE_MAPPING", "workload", msg),
            SimError::InvalidCostModel(_) => OpError::new(ErrorKind::BadRequest, "INVALID_VALUE", "cost_model", msg),
            SimError::Ssc(_) => OpError::new(ErrorKind::Unprocessable, "SSC_SCHEDULE", "", msg),
        }
    }
}

impl From<CalibrationError> for OpError {
    fn from(e: CalibrationError) -> Self {
        let msg = e.to_string();
        match e {
            CalibrationError::Underdetermined { .. } => OpError::new(ErrorKind::Unprocessable, "UNDERDETERMINED", "targets", msg),
            CalibrationError::Insensitive(p) => OpError::new(ErrorKind::Unprocessable, "UNDERDETERMINED", p.as_str(), msg),
            CalibrationError::InvalidTarget(_) => OpError::new(ErrorKind::BadRequest, "INVALID_VALUE", "targets", msg),
            CalibrationError::Sim(s) => s.into(),
        }
    }
}

/// Parses JSON text, reporting a SYNTAX problem on failure.
pub fn parse_json(text: &str) -> Result<Value, OpError> {
    serde_json::from_str(text).map_err(|e| {
        OpError::new(ErrorKind::BadRequest, Code::Syntax.as_str(), "$", format!("line {} column {}: {e}", e.line(), e.column()))
    })
}

/// Decodes a value of any serde type, reporting TYPE_MISMATCH on failure.
pub fn from_json<T: for<'de> Deserialize<'de>>(v: Value, location: &str) -> Result<T, OpError> {
    serde_json::from_value(v).map_err(|e| OpError::new(ErrorKind::BadRequest, Code::TypeMismatch.as_str(), location, e.to_string()))
}

fn schema_rejection(diags: Vec<Diagnostic>) -> OpError {
    let first = diags.iter().find(|d| d.is_error()).cloned().unwrap_or_else(|| {
        Diagnostic::error(Code::Syntax, "$", "document could not be decoded")
    });
    let mut e = OpError::new(ErrorKind::BadRequest, first.code.as_str(), first.location, first.message);
    e.diagnostics = diags;
    e
}

/// Full report for a document: decode diagnostics, structural and
/// platform rules and the resource budget.
pub fn validate(doc: &Value, platform: &PlatformSpec) -> Result<ValidationReport, OpError> {
    let (parsed, decode_diags) = decode_document(doc);
    let schema_error = decode_diags.iter().any(|d| d.is_error() && d.code.is_schema_level());
    let Some(parsed) = parsed.filter(|_| !schema_error) else {
        return Err(schema_rejection(decode_diags));
    };
    let mut report = validate_resources(&parsed.design, platform);
    let mut diags = decode_diags;
    diags.append(&mut report.diagnostics);
    report.is_deployable = report.is_deployable && !diags.iter().any(Diagnostic::is_error);
    report.diagnostics = diags;
    Ok(report)
}

/// A document that passes every rule, or the reason it does not.
pub fn load_document(doc: &Value, platform: &PlatformSpec) -> Result<ConfigDocument, OpError> {
    let report = validate(doc, platform)?;
    if report.diagnostics.iter().any(Diagnostic::is_error) {
        return Err(OpError::from_report(report));
    }
    ConfigDocument::from_value(doc).map_err(schema_rejection)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generated {
    pub graph: String,
    pub census: Census,
    /// Relative path to file contents.
    pub files: BTreeMap<String, String>,
}

pub fn generate(doc: &Value, platform: &PlatformSpec) -> Result<Generated, OpError> {
    let doc = load_document(doc, platform)?;
    let ir = build_ir(&doc.design, platform)?;
    let files = emit_graph_source(&ir, &KernelCatalog::from_design(&doc.design))?;
    Ok(Generated { graph: ir.name.clone(), census: ir.census(), files })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateRequest {
    pub design: Value,
    /// Explicit workload; otherwise derived from `size` and the design's app tag.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workload: Option<WorkloadSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pus: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub platform: Option<PlatformSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_model: Option<CostModel>,
    #[serde(default)]
    pub trace: bool,
}

/// Problem size a template is built for, used when none is given.
pub fn default_size(app: App) -> &'static str {
    match app {
        App::Mm => "6144x6144x6144",
        App::Filter2d => "3840x2160:5",
        App::Fft => "8192",
        App::MmT => "400000",
    }
}

/// Resolves the design and workload a simulate request describes.
pub fn simulation_inputs(req: &SimulateRequest) -> Result<(ConfigDocument, WorkloadSpec, PlatformSpec), OpError> {
    let platform = req.platform.clone().unwrap_or_default();
    let mut doc = load_document(&req.design, &platform)?;
    let workload = match &req.workload {
        Some(w) => w.clone(),
        None => {
            let app: App = match doc.app() {
                Some(a) => a.parse().map_err(|e: crate::workloads::UnknownApp| {
                    OpError::new(ErrorKind::BadRequest, "INVALID_VALUE", "$.metadata.app", e.to_string())
                })?,
                None => {
                    return Err(OpError::new(
                        ErrorKind::BadRequest,
                        "MISSING_FIELD",
                        "workload",
                        "no workload given and the design has no metadata.app tag",
                    ))
                }
            };
            let size = req.size.as_deref().unwrap_or(default_size(app));
            WorkloadSpec::from_size(app, size).map_err(|m| OpError::new(ErrorKind::BadRequest, "INVALID_VALUE", "size", m))?
        }
    };
    if let Some(n) = req.pus {
        doc.design = doc
            .design
            .restrict_pus(n as usize)
            .map_err(|e| OpError::new(ErrorKind::BadRequest, "INVALID_VALUE", "pus", e.to_string()))?;
    }
    Ok((doc, workload, platform))
}

pub fn simulate(req: &SimulateRequest) -> Result<SimResult, OpError> {
    let (doc, workload, platform) = simulation_inputs(req)?;
    let cost = req.cost_model.clone().unwrap_or_default();
    Ok(simulate_with(&doc.design, &workload, &platform, &cost, &SimOptions { trace: req.trace })?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrateRequest {
    pub targets: Vec<Target>,
    /// Parameters to fit; picked automatically when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Vec<FitParam>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_model: Option<CostModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub platform: Option<PlatformSpec>,
}

pub fn calibrate_request(req: &CalibrateRequest) -> Result<CalibrationResult, OpError> {
    let platform = req.platform.clone().unwrap_or_default();
    let start = req.cost_model.clone().unwrap_or_default();
    start.check().map_err(|m| OpError::new(ErrorKind::BadRequest, "INVALID_VALUE", "cost_model", m))?;
    let params = match &req.params {
        Some(p) => p.clone(),
        None => auto_params(&req.targets, &start, &platform)?,
    };
    Ok(calibrate(&req.targets, &params, &start, &platform)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedResult {
    pub name: String,
    pub result: SimResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRequest {
    pub results: Vec<NamedResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub name: String,
    pub pus: usize,
    pub busy_pus: usize,
    pub total_ms: f64,
    pub tasks_per_sec: f64,
    pub gops: Option<f64>,
    pub compute_ms: f64,
    pub comm_ms: f64,
    pub prefetch_exposed_ms: f64,
    pub aie_busy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub rows: Vec<ReportRow>,
    pub text: String,
}

pub fn report(req: &ReportRequest) -> Report {
    let rows: Vec<ReportRow> = req
        .results
        .iter()
        .map(|n| {
            let r = &n.result;
            ReportRow {
                name: n.name.clone(),
                pus: r.pu_count,
                busy_pus: r.busy_pus,
                total_ms: r.total_time_sec * 1e3,
                tasks_per_sec: r.tasks_per_sec,
                gops: r.ops_per_sec.map(|o| o / 1e9),
                compute_ms: r.breakdown.compute_sec * 1e3,
                comm_ms: r.breakdown.comm_sec * 1e3,
                prefetch_exposed_ms: r.breakdown.prefetch_exposed_sec * 1e3,
                aie_busy: r.utilization.aie,
            }
        })
        .collect();
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0).max(4);
    let mut text = String::new();
    let _ = writeln!(
        text,
        "{:<width$}  {:>4}  {:>4}  {:>12}  {:>12}  {:>10}  {:>12}  {:>12}  {:>12}  {:>6}",
        "name", "pus", "busy", "total_ms", "tasks/s", "GOPS", "compute_ms", "comm_ms", "stall_ms", "aie%"
    );
    for r in &rows {
        let gops = r.gops.map_or("-".to_string(), |g| format!("{g:.2}"));
        let _ = writeln!(
            text,
            "{:<width$}  {:>4}  {:>4}  {:>12.4}  {:>12.2}  {:>10}  {:>12.4}  {:>12.4}  {:>12.4}  {:>6.1}",
            r.name,
            r.pus,
            r.busy_pus,
            r.total_ms,
            r.tasks_per_sec,
            gops,
            r.compute_ms,
            r.comm_ms,
            r.prefetch_exposed_ms,
            r.aie_busy * 100.0
        );
    }
    Report { rows, text }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotRequest {
    pub trace: Vec<TraceEvent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
}

fn phase_color(phase: &str) -> &'static str {
    match phase {
        "compute" => "#4c78a8",
        "comm" => "#f58518",
        "drain" => "#e45756",
        "prefetch" => "#54a24b",
        _ => "#9d9d9d",
    }
}

/// Gantt-style SVG timeline, one lane per pair and resource.
pub fn plot_svg(req: &PlotRequest) -> String {
    const LEFT: f64 = 120.0;
    const WIDTH: f64 = 960.0;
    const LANE: f64 = 18.0;
    let mut lanes: Vec<(u32, String)> = req.trace.iter().map(|e| (e.pair_id, e.resource.clone())).collect();
    lanes.sort();
    lanes.dedup();
    let end = req.trace.iter().map(|e| e.end_ps).max().unwrap_or(0).max(1) as f64;
    let height = 40.0 + LANE * lanes.len() as f64 + 20.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{height:.0}" font-family="monospace" font-size="11">"#,
        LEFT + WIDTH + 20.0
    );
    let title = req.title.as_deref().unwrap_or("timeline");
    let _ = writeln!(s, r#"<text x="4" y="16">{} ({:.3} us)</text>"#, xml_escape(title), end / 1e6);
    for (i, (pair, res)) in lanes.iter().enumerate() {
        let y = 30.0 + LANE * i as f64;
        let _ = writeln!(s, r#"<text x="4" y="{:.1}">pair{pair} {res}</text>"#, y + 12.0);
        for e in req.trace.iter().filter(|e| e.pair_id == *pair && &e.resource == res) {
            let x = LEFT + WIDTH * e.timestamp_ps as f64 / end;
            let w = (WIDTH * (e.end_ps - e.timestamp_ps) as f64 / end).max(0.5);
            let _ = writeln!(
                s,
                r#"<rect x="{x:.2}" y="{y:.1}" width="{w:.2}" height="{:.1}" fill="{}"><title>{} {} {}-{} ps</title></rect>"#,
                LANE - 4.0,
                phase_color(&e.phase),
                e.phase,
                e.iteration,
                e.timestamp_ps,
                e.end_ps
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

fn xml_escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Template document for an application, optionally cut down to `pus` PUs.
pub fn template(app: &str, pus: Option<u32>) -> Result<ConfigDocument, OpError> {
    let app: App = app.parse().map_err(|e: crate::workloads::UnknownApp| {
        OpError::new(ErrorKind::NotFound, "UNKNOWN_TEMPLATE", "app", e.to_string())
    })?;
    let mut doc = template_document(app, &TemplateParams::for_app(app))
        .map_err(|e| OpError::new(ErrorKind::Internal, "TEMPLATE", "", e.to_string()))?;
    if let Some(n) = pus {
        doc.design = doc
            .design
            .restrict_pus(n as usize)
            .map_err(|e| OpError::new(ErrorKind::BadRequest, "INVALID_VALUE", "pus", e.to_string()))?;
    }
    Ok(doc)
}

/// Human-readable summary of a validation report.
pub fn render_report(r: &ValidationReport) -> String {
    let res = &r.resource;
    let mut s = String::new();
    let head = if r.is_deployable { "deployable" } else { "not deployable" };
    let _ = writeln!(s, "{head}: {}/{} cores", res.aie_cores_used, res.aie_cores_total);
    let _ = writeln!(
        s,
        "  PLIO {} in, {} out of {} per direction; URAM {:.1}% ({} bytes)",
        res.plio_in_used,
        res.plio_out_used,
        res.plio_total,
        res.uram_fraction * 100.0,
        res.uram_bytes_used
    );
    for d in &r.diagnostics {
        let _ = writeln!(s, "  {d}");
    }
    for v in &res.violations {
        let _ = writeln!(s, "  error {} at {}: {}", v.code, v.location, v.message);
    }
    s
}
