use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{AmcMode, PlatformSpec};
use crate::workloads::Dtype;

pub const COST_MODEL_SCHEMA_VERSION: u32 = 1;

/// Sustained float throughput of one core: 6181.56 GOPS over 400 cores
/// against a 21.28 GFLOPS peak.
pub const DEFAULT_EFFICIENCY: f64 = 6181.56 / 400.0 / 21.28;

/// Tunable timing parameters of the simulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostModel {
    pub schema_version: u32,
    pub flops_per_cycle: BTreeMap<Dtype, f64>,
    /// Sustained fraction of peak kernel throughput.
    pub efficiency: f64,
    /// Cycles lost per chunk when a stream transfer interrupts compute.
    pub stream_interrupt_overhead_cycles: u32,
    /// Achieved fraction of the per-core stream bandwidth.
    pub stream_efficiency: f64,
    pub dma_setup_cycles: u32,
    pub jub_efficiency: f64,
    pub unod_latency_cycles: u32,
    /// Cycles to prime a cascade stage, charged per link once per compute run.
    pub cascade_fill_cycles: u32,
    /// DU on-chip buffer fill rate in PL cycles.
    pub onchip_buffer_bytes_per_cycle: u32,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            schema_version: COST_MODEL_SCHEMA_VERSION,
            flops_per_cycle: [(Dtype::Float, 16.0), (Dtype::Int32, 16.0), (Dtype::Cint16, 32.0)].into_iter().collect(),
            efficiency: DEFAULT_EFFICIENCY,
            stream_interrupt_overhead_cycles: 128,
            stream_efficiency: 1.0,
            dma_setup_cycles: 16,
            jub_efficiency: 0.85,
            unod_latency_cycles: 24,
            cascade_fill_cycles: 128,
            onchip_buffer_bytes_per_cycle: 1024,
        }
    }
}

impl CostModel {
    pub fn check(&self) -> Result<(), String> {
        if self.schema_version != COST_MODEL_SCHEMA_VERSION {
            return Err(format!("unsupported cost model schema_version {}", self.schema_version));
        }
        for (name, v) in [
            ("efficiency", self.efficiency),
            ("stream_efficiency", self.stream_efficiency),
            ("jub_efficiency", self.jub_efficiency),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(format!("{name} must be in (0, 1], got {v}"));
            }
        }
        for (d, v) in &self.flops_per_cycle {
            if !(v.is_finite() && *v > 0.0) {
                return Err(format!("flops_per_cycle.{} must be positive", d.as_str()));
            }
        }
        if self.onchip_buffer_bytes_per_cycle == 0 {
            return Err("onchip_buffer_bytes_per_cycle must be positive".into());
        }
        Ok(())
    }

    pub fn flops_per_cycle(&self, dtype: Dtype) -> f64 {
        self.flops_per_cycle.get(&dtype).copied().unwrap_or(16.0)
    }

    /// Sustained ops per second of one core.
    pub fn core_ops_per_sec(&self, dtype: Dtype, platform: &PlatformSpec) -> f64 {
        self.flops_per_cycle(dtype) * self.efficiency * platform.aie_freq_hz
    }

    /// PL cycles to move `elements` through one DDR port in `mode`.
    pub fn amc_cycles(&self, mode: AmcMode, elements: u64, element_bytes: u64, platform: &PlatformSpec) -> f64 {
        let burst = ((elements * element_bytes) as f64 / platform.ddr_port_bytes_per_cycle()).ceil();
        match mode {
            AmcMode::Csb => burst,
            AmcMode::Jub => burst / self.jub_efficiency,
            AmcMode::Unod => (elements * self.unod_latency_cycles as u64) as f64,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = CostModel::default();
        c.check().unwrap();
        assert!((c.efficiency - 0.726_217).abs() < 1e-6);
        let p = PlatformSpec::default();
        assert!((c.core_ops_per_sec(Dtype::Float, &p) * 400.0 - 6181.56e9).abs() < 1e3);
    }

    #[test]
    fn json_defaults_fill_in() {
        let c: CostModel = serde_json::from_str(r#"{"efficiency": 0.5}"#).unwrap();
        assert_eq!(c.efficiency, 0.5);
        assert_eq!(c.dma_setup_cycles, 16);
    }
}
