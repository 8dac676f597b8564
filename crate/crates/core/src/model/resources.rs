//! Resource accounting against platform budgets.

use std::collections::BTreeSet;
use std::ops::Add;

use serde::{Deserialize, Serialize};

use super::design::DesignSpec;
use super::platform::PlatformSpec;
use super::pu::PuSpec;
use crate::diag::Code;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlioCount {
    pub input: u64,
    pub output: u64,
}

impl PlioCount {
    pub fn total(&self) -> u64 {
        self.input + self.output
    }
}

/// PLIO channels a PU uses at its boundary: the first PST's DAC ports in,
/// the last PST's DCC ports out. Inner PSTs are chained on chip.
pub fn plio_count(pu: &PuSpec) -> PlioCount {
    PlioCount {
        input: pu.psts.first().map_or(0, |p| p.fan_in() as u64),
        output: pu.psts.last().map_or(0, |p| p.fan_out() as u64),
    }
}

/// AIE cores a PU occupies: CC cores plus one per DCA connector.
pub fn pu_cores(pu: &PuSpec) -> u64 {
    pu.psts.iter().map(|p| p.cc.core_count() + p.dca_count()).sum()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PuUsage {
    pub name: String,
    pub cores: u64,
    pub dca_cores: u64,
    pub plio_in: u64,
    pub plio_out: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DuUsage {
    pub name: String,
    pub buffer_bytes: u64,
    pub tb_bytes_in: u64,
    pub tb_bytes_out: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetViolation {
    pub code: Code,
    pub location: String,
    pub used: u64,
    pub limit: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub aie_cores_used: u64,
    pub aie_cores_total: u64,
    pub aie_cores_fraction: f64,
    pub plio_in_used: u64,
    pub plio_out_used: u64,
    pub plio_total: u64,
    pub uram_bytes_used: u64,
    pub uram_bytes_total: u64,
    pub uram_fraction: f64,
    pub tb_in_fraction: f64,
    pub tb_out_fraction: f64,
    pub per_pu: Vec<PuUsage>,
    pub per_du: Vec<DuUsage>,
    pub violations: Vec<BudgetViolation>,
}

impl ResourceReport {
    pub fn plio_used(&self) -> u64 {
        self.plio_in_used + self.plio_out_used
    }

    pub fn within_budget(&self) -> bool {
        self.violations.is_empty()
    }
}

fn frac(used: u64, total: u64) -> f64 {
    if total == 0 {
        0.0
    } else {
        used as f64 / total as f64
    }
}

pub fn resource_report(design: &DesignSpec, platform: &PlatformSpec) -> ResourceReport {
    let per_pu: Vec<PuUsage> = design
        .pus
        .iter()
        .map(|pu| {
            let plio = plio_count(pu);
            PuUsage {
                name: pu.name.clone(),
                cores: pu_cores(pu),
                dca_cores: pu.psts.iter().map(|p| p.dca_count()).sum(),
                plio_in: plio.input,
                plio_out: plio.output,
            }
        })
        .collect();
    let per_du: Vec<DuUsage> = design
        .dus
        .iter()
        .map(|du| DuUsage {
            name: du.name.clone(),
            buffer_bytes: du.onchip_buffer_bytes,
            tb_bytes_in: du.tpc.tb_bytes_in,
            tb_bytes_out: du.tpc.tb_bytes_out,
        })
        .collect();

    let cores: u64 = per_pu.iter().map(|p| p.cores).sum();
    let plio_in: u64 = per_pu.iter().map(|p| p.plio_in).sum();
    let plio_out: u64 = per_pu.iter().map(|p| p.plio_out).sum();
    let uram: u64 = per_du.iter().map(|d| d.buffer_bytes).sum();
    let tb_in: u64 = per_du.iter().map(|d| d.tb_bytes_in).sum();
    let tb_out: u64 = per_du.iter().map(|d| d.tb_bytes_out).sum();

    let mut violations = Vec::new();
    let mut check = |code: Code, location: &str, used: u64, limit: u64, what: &str| {
        if used > limit {
            violations.push(BudgetViolation {
                code,
                location: location.to_string(),
                used,
                limit,
                message: format!("{what}: {used} used, {limit} available"),
            });
        }
    };
    check(Code::AieCores, "pus", cores, platform.aie_core_count as u64, "AIE cores");
    check(Code::PlioIn, "pus", plio_in, platform.plio_count as u64, "input PLIO channels");
    check(Code::PlioOut, "pus", plio_out, platform.plio_count as u64, "output PLIO channels");
    check(Code::UramBytes, "dus", uram, platform.uram_total_bytes, "DU on-chip buffer bytes");

    let used: BTreeSet<&str> = design
        .pus
        .iter()
        .flat_map(|pu| pu.psts.iter())
        .flat_map(|pst| {
            let mut names = pst.cc.kernels();
            names.extend(pst.dacs.iter().filter_map(|d| d.dca_kernel.as_deref()));
            names.extend(pst.dccs.iter().filter_map(|d| d.dca_kernel.as_deref()));
            names
        })
        .collect();
    for name in used {
        if let Some(k) = design.kernels.get(name) {
            check(
                Code::KernelMemExceeded,
                &format!("kernels.{name}"),
                k.local_mem_bytes,
                platform.core_local_mem_bytes,
                &format!("kernel '{name}' local memory"),
            );
        }
    }

    ResourceReport {
        aie_cores_used: cores,
        aie_cores_total: platform.aie_core_count as u64,
        aie_cores_fraction: frac(cores, platform.aie_core_count as u64),
        plio_in_used: plio_in,
        plio_out_used: plio_out,
        plio_total: platform.plio_count as u64,
        uram_bytes_used: uram,
        uram_bytes_total: platform.uram_total_bytes,
        uram_fraction: frac(uram, platform.uram_total_bytes),
        tb_in_fraction: frac(tb_in, platform.uram_total_bytes),
        tb_out_fraction: frac(tb_out, platform.uram_total_bytes),
        per_pu,
        per_du,
        violations,
    }
}

/// Usage totals add across disjoint designs; budget flags are not additive
/// and are left empty.
impl Add for &ResourceReport {
    type Output = ResourceReport;

    fn add(self, rhs: &ResourceReport) -> ResourceReport {
        let cores = self.aie_cores_used + rhs.aie_cores_used;
        let uram = self.uram_bytes_used + rhs.uram_bytes_used;
        ResourceReport {
            aie_cores_used: cores,
            aie_cores_total: self.aie_cores_total,
            aie_cores_fraction: frac(cores, self.aie_cores_total),
            plio_in_used: self.plio_in_used + rhs.plio_in_used,
            plio_out_used: self.plio_out_used + rhs.plio_out_used,
            plio_total: self.plio_total,
            uram_bytes_used: uram,
            uram_bytes_total: self.uram_bytes_total,
            uram_fraction: frac(uram, self.uram_bytes_total),
            tb_in_fraction: self.tb_in_fraction + rhs.tb_in_fraction,
            tb_out_fraction: self.tb_out_fraction + rhs.tb_out_fraction,
            per_pu: self.per_pu.iter().chain(&rhs.per_pu).cloned().collect(),
            per_du: self.per_du.iter().chain(&rhs.per_du).cloned().collect(),
            violations: Vec::new(),
        }
    }
}
