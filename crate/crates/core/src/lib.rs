//! Toolkit for communication-avoiding accelerator designs on AI Engine arrays.
//!
//! A design is a set of processing units (PUs) built from connector and
//! compute components, paired with data units (DUs) that feed them from DDR.
//! The crate parses and validates designs, lowers them to a dataflow graph,
//! emits graph source text and predicts throughput with a discrete-event model.

pub mod cli;
pub mod config;
pub mod diag;
pub mod graph;
pub mod model;
pub mod ops;
pub mod service;
pub mod sim;
pub mod validate;
pub mod workloads;

pub use config::{parse_design, serialize_design, ConfigDocument};
pub use diag::{Code, Diagnostic, Severity};
pub use model::{DesignSpec, PlatformSpec};

/// Version stamped on simulation results and validation reports.
pub const OUTPUT_SCHEMA_VERSION: u32 = 1;

pub(crate) fn output_schema_version() -> u32 {
    OUTPUT_SCHEMA_VERSION
}
