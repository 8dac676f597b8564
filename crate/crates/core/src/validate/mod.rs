//! Structural and budget validation of designs.

mod structure;

use serde::{Deserialize, Serialize};

pub use structure::validate_structure;

use crate::diag::{has_errors, Code, Diagnostic};
use crate::model::pu::chunk_sizes;
use crate::model::{resource_report, DacMode, DccMode, DesignSpec, PlatformSpec, ResourceReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    #[serde(default = "crate::output_schema_version")]
    pub schema_version: u32,
    pub diagnostics: Vec<Diagnostic>,
    pub resource: ResourceReport,
    pub is_deployable: bool,
}

/// Process exit status conventions shared by the CLI and the FFI layer.
pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_STRUCTURAL: i32 = 2;
pub const EXIT_OVER_BUDGET: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;

impl ValidationReport {
    pub fn exit_code(&self) -> i32 {
        if has_errors(&self.diagnostics) {
            EXIT_STRUCTURAL
        } else if !self.resource.violations.is_empty() {
            EXIT_OVER_BUDGET
        } else {
            EXIT_OK
        }
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.is_error())
    }
}

/// Platform-dependent rules plus the resource report. Structural errors are
/// merged in, so callers may pass designs that failed structure checks.
pub fn validate_resources(design: &DesignSpec, platform: &PlatformSpec) -> ValidationReport {
    let platform = design.effective_platform(platform);
    let mut diags = validate_structure(design);
    for (field, msg) in platform.check() {
        diags.push(Diagnostic::error(Code::InvalidValue, format!("platform.{field}"), msg));
    }
    packet_fanout(design, &platform, &mut diags);
    let resource = resource_report(design, &platform);
    let is_deployable = !has_errors(&diags) && resource.violations.is_empty();
    ValidationReport { schema_version: crate::OUTPUT_SCHEMA_VERSION, diagnostics: diags, resource, is_deployable }
}

fn packet_fanout(design: &DesignSpec, platform: &PlatformSpec, diags: &mut Vec<Diagnostic>) {
    let max = platform.packet_switch_fanout_max as usize;
    for (i, pu) in design.pus.iter().enumerate() {
        for (j, pst) in pu.psts.iter().enumerate() {
            let cores = pst.cc.core_count() as u32;
            for (k, dac) in pst.dacs.iter().enumerate() {
                let Ok(served) = dac.served.resolve(cores) else { continue };
                if dac.plio_ports == 0 {
                    continue;
                }
                let chunk = chunk_sizes(served.len(), dac.plio_ports as usize).into_iter().max().unwrap_or(0);
                let tags = match dac.mode {
                    DacMode::Swh => chunk,
                    DacMode::SwhBdc if dac.reuse_factor > 0 => chunk / dac.reuse_factor as usize,
                    _ => continue,
                };
                if tags > max {
                    diags.push(Diagnostic::error(
                        Code::PacketFanout,
                        format!("pus[{i}].psts[{j}].dacs[{k}]"),
                        format!("{tags} packet tags share one channel; the switch supports {max}"),
                    ));
                }
            }
            for (k, dcc) in pst.dccs.iter().enumerate() {
                if dcc.mode != DccMode::Swh || dcc.plio_ports == 0 {
                    continue;
                }
                let Ok(served) = dcc.served.resolve(cores) else { continue };
                let chunk = chunk_sizes(served.len(), dcc.plio_ports as usize).into_iter().max().unwrap_or(0);
                if chunk > max {
                    diags.push(Diagnostic::error(
                        Code::PacketFanout,
                        format!("pus[{i}].psts[{j}].dccs[{k}]"),
                        format!("{chunk} packet tags share one channel; the switch supports {max}"),
                    ));
                }
            }
        }
    }
}
