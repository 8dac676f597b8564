//! Domain types for designs and the target platform.

pub mod design;
pub mod du;
pub mod kernel;
pub mod platform;
pub mod pu;
pub mod resources;
pub mod topology;

pub use design::{DesignError, DesignSpec, Pair};
pub use du::{AmcMode, AmcSpec, DuSpec, ReceiverMode, SenderMode, SscSpec, TpcMode, TpcSpec};
pub use kernel::{KernelSpec, PortCounts};
pub use platform::{PlatformOverride, PlatformSpec};
pub use pu::{CoreRange, CoreSelector, DacMode, DacSpec, DccMode, DccSpec, PstSpec, PuSpec};
pub use resources::{plio_count, pu_cores, resource_report, BudgetViolation, PlioCount, ResourceReport};
pub use topology::{CcLayout, CcTopology, Shape};
