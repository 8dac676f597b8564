//! Dataflow graph IR: lowering, checks, fusion, text emission and a
//! content-addressed repository for kernels and graphs.

mod check;
mod emit;
mod fuse;
mod ir;
mod lower;
mod repo;

pub use check::check_ir;
pub use emit::{emit_graph_source, KernelCatalog, KernelEntry, KernelSource, GRAPH_FORMAT_HEADER};
pub use fuse::fuse;
pub use ir::*;
pub use lower::build_ir;
pub use repo::{revision_of, Provenance, Repository, StoredGraph};

use thiserror::Error;

use crate::validate::ValidationReport;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("design is not deployable: {}", first_problem(.0))]
    NotDeployable(Box<ValidationReport>),
    #[error("internal contract violation: {0}")]
    InternalContractViolation(String),
    #[error("node id '{0}' already exists in the base graph")]
    IdCollision(String),
    #[error("fused graph exceeds the platform: {0}")]
    CombinedOverBudget(String),
    #[error("kernel '{0}' does not resolve in the kernel repository")]
    UnresolvedKernel(String),
    #[error("'{0}' not found in the repository")]
    NotFound(String),
    #[error("name '{name}' is already bound to revision {existing}")]
    NameCollision { name: String, existing: String },
    #[error("repository I/O error: {0}")]
    Io(String),
    #[error("repository object is corrupt: {0}")]
    Corrupt(String),
}

fn first_problem(r: &ValidationReport) -> String {
    if let Some(d) = r.errors().next() {
        return d.to_string();
    }
    r.resource.violations.first().map(|v| format!("{} {}: {}", v.code, v.location, v.message)).unwrap_or_default()
}

impl From<std::io::Error> for GraphError {
    fn from(e: std::io::Error) -> Self {
        GraphError::Io(e.to_string())
    }
}
