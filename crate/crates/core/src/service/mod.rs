//! HTTP facade over [`crate::ops`] and the kernel/graph repository.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use tower_http::cors::CorsLayer;

use crate::graph::{build_ir, fuse, revision_of, Census, GraphError, GraphIr, Provenance, Repository};
use crate::model::{KernelSpec, PlatformSpec};
use crate::ops::{self, ErrorKind, OpError};
use crate::workloads::bind_workload;

/// OpenAPI description of every route.
pub const OPENAPI: &str = include_str!("../../../../docs/openapi.json");

/// `(method, path)` of every route the router serves.
pub const ROUTES: &[(&str, &str)] = &[
    ("GET", "/v1/openapi.json"),
    ("POST", "/v1/validate"),
    ("POST", "/v1/generate"),
    ("POST", "/v1/simulate"),
    ("GET", "/v1/simulate/{token}"),
    ("POST", "/v1/calibrate"),
    ("POST", "/v1/report"),
    ("POST", "/v1/plot"),
    ("GET", "/v1/templates/{app}"),
    ("POST", "/v1/templates/{app}"),
    ("GET", "/v1/kernels"),
    ("POST", "/v1/kernels"),
    ("GET", "/v1/graphs"),
    ("POST", "/v1/graphs"),
    ("GET", "/v1/graphs/{name}"),
    ("POST", "/v1/graphs/{name}/fuse"),
];

/// CLI subcommand to the endpoint offering the same capability.
pub const CLI_PARITY: &[(&str, &str, &str)] = &[
    ("validate", "POST", "/v1/validate"),
    ("generate", "POST", "/v1/generate"),
    ("simulate", "POST", "/v1/simulate"),
    ("calibrate", "POST", "/v1/calibrate"),
    ("report", "POST", "/v1/report"),
    ("plot", "POST", "/v1/plot"),
    ("template", "GET", "/v1/templates/{app}"),
];

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub port: u16,
    pub bind: String,
    pub repo_root: PathBuf,
    pub cors_origin: Option<String>,
    /// Simulations estimated to take longer than this run in the background.
    pub async_threshold_sec: f64,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            port: 8080,
            bind: "127.0.0.1".into(),
            repo_root: PathBuf::from(".ea4rca-repo"),
            cors_origin: None,
            async_threshold_sec: 2.0,
        }
    }
}

#[derive(Debug, Clone)]
enum Job {
    Running,
    Done(u16, Vec<u8>),
}

#[derive(Clone)]
pub struct AppState {
    repo: Arc<Repository>,
    jobs: Arc<Mutex<BTreeMap<String, Job>>>,
    async_threshold_sec: f64,
}

/// Builds the router with a repository opened at `config.repo_root`.
pub fn app(config: &ServiceConfig) -> Result<Router, GraphError> {
    let state = AppState {
        repo: Arc::new(Repository::open(&config.repo_root)?),
        jobs: Arc::new(Mutex::new(BTreeMap::new())),
        async_threshold_sec: config.async_threshold_sec,
    };
    let mut router = Router::new()
        .route("/v1/openapi.json", get(openapi))
        .route("/v1/validate", post(validate))
        .route("/v1/generate", post(generate))
        .route("/v1/simulate", post(simulate))
        .route("/v1/simulate/{token}", get(simulate_poll))
        .route("/v1/calibrate", post(calibrate))
        .route("/v1/report", post(report))
        .route("/v1/plot", post(plot))
        .route("/v1/templates/{app}", get(template).post(template))
        .route("/v1/kernels", get(list_kernels).post(register_kernel))
        .route("/v1/graphs", get(list_graphs).post(save_graph))
        .route("/v1/graphs/{name}", get(load_graph))
        .route("/v1/graphs/{name}/fuse", post(fuse_graph))
        .with_state(state);
    if let Some(origin) = &config.cors_origin {
        if let Ok(o) = HeaderValue::from_str(origin) {
            router = router.layer(
                CorsLayer::new()
                    .allow_origin(o)
                    .allow_methods([Method::GET, Method::POST])
                    .allow_headers([header::CONTENT_TYPE]),
            );
        }
    }
    Ok(router)
}

pub async fn serve(config: ServiceConfig) -> std::io::Result<()> {
    let router = app(&config).map_err(std::io::Error::other)?;
    let addr: SocketAddr = format!("{}:{}", config.bind, config.port)
        .parse()
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e))?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router).await
}

fn json_response<T: Serialize>(status: u16, body: &T) -> Response {
    let bytes = serde_json::to_vec(body).expect("serializable");
    raw_response(status, bytes)
}

fn raw_response(status: u16, bytes: Vec<u8>) -> Response {
    let status = StatusCode::from_u16(status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    (status, [(header::CONTENT_TYPE, "application/json")], bytes).into_response()
}

fn error_response(e: OpError) -> Response {
    match (&e.kind, &e.report) {
        (ErrorKind::Invalid, Some(report)) => json_response(e.http_status(), report),
        _ => json_response(e.http_status(), &e.problem()),
    }
}

fn respond<T: Serialize>(r: Result<T, OpError>) -> Response {
    match r {
        Ok(v) => json_response(200, &v),
        Err(e) => error_response(e),
    }
}

fn body_json(body: &Bytes) -> Result<Value, OpError> {
    let text = std::str::from_utf8(body)
        .map_err(|e| OpError::new(ErrorKind::BadRequest, "SYNTAX", "$", format!("body is not UTF-8: {e}")))?;
    ops::parse_json(text)
}

fn body<T: for<'de> Deserialize<'de>>(b: &Bytes) -> Result<T, OpError> {
    ops::from_json(body_json(b)?, "$")
}

async fn openapi() -> Response {
    raw_response(200, OPENAPI.as_bytes().to_vec())
}

async fn validate(b: Bytes) -> Response {
    let r = body_json(&b).and_then(|v| ops::validate(&v, &PlatformSpec::default()));
    match r {
        Ok(report) => json_response(if report.is_deployable { 200 } else { 422 }, &report),
        Err(e) => error_response(e),
    }
}

async fn generate(b: Bytes) -> Response {
    respond(body_json(&b).and_then(|v| ops::generate(&v, &PlatformSpec::default())))
}

#[derive(Serialize)]
struct Pending {
    token: String,
    poll: String,
}

/// Rough wall time of a simulation, from the number of PU iterations.
fn estimate_sec(req: &ops::SimulateRequest) -> f64 {
    let Ok((doc, workload, _)) = ops::simulation_inputs(req) else { return 0.0 };
    bind_workload(&doc.design, &workload).map_or(0.0, |m| m.subtasks as f64 * 2e-6)
}

async fn simulate(State(st): State<AppState>, b: Bytes) -> Response {
    let req: ops::SimulateRequest = match body(&b) {
        Ok(r) => r,
        Err(e) => return error_response(e),
    };
    if estimate_sec(&req) <= st.async_threshold_sec {
        return respond(tokio::task::spawn_blocking(move || ops::simulate(&req)).await.unwrap_or_else(|e| {
            Err(OpError::new(ErrorKind::Internal, "INTERNAL", "", e.to_string()))
        }));
    }
    let token = hex::encode(Sha256::digest(serde_json::to_vec(&req).expect("serializable")));
    let started = {
        let mut jobs = st.jobs.lock().unwrap_or_else(|p| p.into_inner());
        match jobs.get(&token) {
            Some(_) => false,
            None => {
                jobs.insert(token.clone(), Job::Running);
                true
            }
        }
    };
    if started {
        let jobs = st.jobs.clone();
        let t = token.clone();
        tokio::task::spawn_blocking(move || {
            let (status, bytes) = match ops::simulate(&req) {
                Ok(r) => (200, serde_json::to_vec(&r).expect("serializable")),
                Err(e) => {
                    let status = e.http_status();
                    let bytes = match (&e.kind, &e.report) {
                        (ErrorKind::Invalid, Some(rep)) => serde_json::to_vec(rep),
                        _ => serde_json::to_vec(&e.problem()),
                    };
                    (status, bytes.expect("serializable"))
                }
            };
            jobs.lock().unwrap_or_else(|p| p.into_inner()).insert(t, Job::Done(status, bytes));
        });
    }
    json_response(202, &Pending { poll: format!("/v1/simulate/{token}"), token })
}

async fn simulate_poll(State(st): State<AppState>, Path(token): Path<String>) -> Response {
    let job = st.jobs.lock().unwrap_or_else(|p| p.into_inner()).get(&token).cloned();
    match job {
        Some(Job::Done(status, bytes)) => raw_response(status, bytes),
        Some(Job::Running) => json_response(202, &Pending { poll: format!("/v1/simulate/{token}"), token }),
        None => error_response(OpError::new(ErrorKind::NotFound, "NOT_FOUND", token, "no simulation with this token")),
    }
}

async fn calibrate(b: Bytes) -> Response {
    let req: Result<ops::CalibrateRequest, _> = body(&b);
    respond(match req {
        Ok(r) => tokio::task::spawn_blocking(move || ops::calibrate_request(&r))
            .await
            .unwrap_or_else(|e| Err(OpError::new(ErrorKind::Internal, "INTERNAL", "", e.to_string()))),
        Err(e) => Err(e),
    })
}

async fn report(b: Bytes) -> Response {
    respond(body::<ops::ReportRequest>(&b).map(|r| ops::report(&r)))
}

async fn plot(b: Bytes) -> Response {
    match body::<ops::PlotRequest>(&b) {
        Ok(r) => (StatusCode::OK, [(header::CONTENT_TYPE, "image/svg+xml")], ops::plot_svg(&r)).into_response(),
        Err(e) => error_response(e),
    }
}

#[derive(Deserialize)]
struct TemplateQuery {
    pus: Option<u32>,
}

async fn template(Path(app): Path<String>, Query(q): Query<TemplateQuery>) -> Response {
    respond(ops::template(&app, q.pus).map(|d| d.to_value()))
}

#[derive(Serialize)]
struct Listed {
    name: String,
    revision: String,
}

fn listed(v: Vec<(String, String)>) -> Vec<Listed> {
    v.into_iter().map(|(name, revision)| Listed { name, revision }).collect()
}

async fn list_kernels(State(st): State<AppState>) -> Response {
    respond(st.repo.list_kernels().map(listed).map_err(OpError::from))
}

#[derive(Deserialize)]
struct KernelUpload {
    spec: KernelSpec,
    #[serde(default)]
    source: String,
}

async fn register_kernel(State(st): State<AppState>, b: Bytes) -> Response {
    respond(body::<KernelUpload>(&b).and_then(|k| st.repo.register_kernel(k.spec, k.source).map_err(OpError::from)))
}

async fn list_graphs(State(st): State<AppState>) -> Response {
    respond(st.repo.list_graphs().map(listed).map_err(OpError::from))
}

#[derive(Deserialize)]
struct GraphUpload {
    name: String,
    #[serde(default)]
    ir: Option<GraphIr>,
    #[serde(default)]
    design: Option<Value>,
    #[serde(default)]
    provenance: Option<Provenance>,
}

#[derive(Serialize)]
struct Saved {
    name: String,
    revision: String,
    census: Census,
}

fn save(st: &AppState, up: GraphUpload) -> Result<Saved, OpError> {
    let platform = PlatformSpec::default();
    let (ir, provenance) = match (up.ir, up.design) {
        (Some(ir), None) => (ir, up.provenance.unwrap_or_default()),
        (None, Some(d)) => {
            let doc = ops::load_document(&d, &platform)?;
            let ir = build_ir(&doc.design, &platform)?;
            let prov = up.provenance.unwrap_or(Provenance {
                design: Some(doc.design.name.clone()),
                design_revision: Some(revision_of(&d)),
                note: String::new(),
            });
            (ir, prov)
        }
        _ => return Err(OpError::new(ErrorKind::BadRequest, "INVALID_VALUE", "$", "give exactly one of 'ir' or 'design'")),
    };
    let problems = crate::graph::check_ir(&ir, &platform);
    if let Some(d) = problems.first() {
        let mut e = OpError::new(ErrorKind::Invalid, d.code.as_str(), d.location.clone(), d.message.clone());
        e.diagnostics = problems;
        return Err(e);
    }
    let stored = st.repo.save_graph(&up.name, &ir, provenance)?;
    Ok(Saved { name: stored.name, revision: stored.revision, census: stored.ir.census() })
}

async fn save_graph(State(st): State<AppState>, b: Bytes) -> Response {
    respond(body::<GraphUpload>(&b).and_then(|up| save(&st, up)))
}

async fn load_graph(State(st): State<AppState>, Path(name): Path<String>) -> Response {
    respond(st.repo.load_graph(&name).map_err(OpError::from))
}

#[derive(Deserialize)]
struct FuseRequest {
    prefix: String,
    #[serde(default)]
    base: Option<GraphIr>,
    /// Stored graph to use as the base instead of `base`.
    #[serde(default)]
    base_graph: Option<String>,
    #[serde(default)]
    save_as: Option<String>,
}

#[derive(Serialize)]
struct Fused {
    ir: GraphIr,
    census: Census,
    #[serde(skip_serializing_if = "Option::is_none")]
    revision: Option<String>,
}

fn fuse_op(st: &AppState, name: &str, req: FuseRequest) -> Result<Fused, OpError> {
    let platform = PlatformSpec::default();
    let addition = st.repo.load_graph(name)?;
    let base = match (req.base, req.base_graph) {
        (Some(b), None) => b,
        (None, Some(n)) => st.repo.load_graph(&n)?.ir,
        (None, None) => GraphIr::empty("fused"),
        _ => return Err(OpError::new(ErrorKind::BadRequest, "INVALID_VALUE", "$", "give at most one of 'base' or 'base_graph'")),
    };
    let ir = fuse(&base, &addition, &req.prefix, &platform)?;
    let revision = match req.save_as {
        Some(n) => {
            let prov = Provenance { design: None, design_revision: None, note: format!("fused {} as {}", addition.name, req.prefix) };
            Some(st.repo.save_graph(&n, &ir, prov)?.revision)
        }
        None => None,
    };
    Ok(Fused { census: ir.census(), ir, revision })
}

async fn fuse_graph(State(st): State<AppState>, Path(name): Path<String>, b: Bytes) -> Response {
    respond(body::<FuseRequest>(&b).and_then(|r| fuse_op(&st, &name, r)))
}
