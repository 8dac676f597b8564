//! Performance model: cost parameters, AMC and SSC behaviour, per-phase
//! timing and an event-driven simulator, plus fitting of the cost model.

mod amc;
mod calibrate;
mod comm;
mod cost;
mod engine;
mod phase;
mod ssc;

pub use amc::{amc_trace, AmcError, AmcRequest, AmcTrace};
pub use calibrate::{auto_params, calibrate, CalibrationError, CalibrationResult, FitParam, Residual, Scenario, Target};
pub use comm::{compare_comm_methods, CommMethod, MethodTime, AGGREGATED_CHUNK_ELEMENTS, COMM_TASK_SIDE, CROSSOVER_CHUNK_ELEMENTS};
pub use cost::{CostModel, COST_MODEL_SCHEMA_VERSION, DEFAULT_EFFICIENCY};
pub use engine::{simulate, simulate_with, trace_csv, PairSummary, PhaseBreakdown, SimOptions, SimResult, TraceEvent, Utilization};
pub use phase::{amc_mode_seconds, phase_times, pu_timing, PhaseTimes, Prefetch, PuTiming};
pub use ssc::{makespan, ssc_schedule, Channel, SscError, SscMode, Transfer, Window};

use thiserror::Error;

use crate::validate::ValidationReport;
use crate::workloads::MappingError;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid cost model: {0}")]
    InvalidCostModel(String),
    #[error(transparent)]
    Mapping(#[from] MappingError),
    #[error("infeasible mapping: {}", .reasons.join("; "))]
    InfeasibleMapping { reasons: Vec<String> },
    #[error("design is not deployable ({} errors)", .0.errors().count())]
    NotDeployable(Box<ValidationReport>),
    #[error(transparent)]
    Ssc(#[from] SscError),
}
