//! The three ways a core can receive a 32x32x32 float MM task: small
//! interleaved stream chunks, one aggregated stream, or one DMA transfer.

use serde::{Deserialize, Serialize};

use super::CostModel;
use crate::model::PlatformSpec;

pub const COMM_TASK_SIDE: u64 = 32;
/// Elements per chunk when transfers interleave with compute.
pub const CROSSOVER_CHUNK_ELEMENTS: u64 = 16;
/// Elements per chunk for the aggregated methods (one 32x32 matrix).
pub const AGGREGATED_CHUNK_ELEMENTS: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CommMethod {
    #[serde(rename = "crossover-stream")]
    CrossoverStream,
    #[serde(rename = "aggregated-stream")]
    AggregatedStream,
    #[serde(rename = "aggregated-dma")]
    AggregatedDma,
}

impl CommMethod {
    pub const ALL: [CommMethod; 3] = [CommMethod::CrossoverStream, CommMethod::AggregatedStream, CommMethod::AggregatedDma];

    /// 1-based method number.
    pub fn number(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_number(n: u8) -> Option<Self> {
        Self::ALL.get(usize::from(n).wrapping_sub(1)).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CommMethod::CrossoverStream => "crossover-stream",
            CommMethod::AggregatedStream => "aggregated-stream",
            CommMethod::AggregatedDma => "aggregated-dma",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodTime {
    pub method: CommMethod,
    pub transfer_sec: f64,
    pub overhead_sec: f64,
    pub compute_sec: f64,
    pub total_sec: f64,
}

/// Parameters the comparison depends on, with cycle counts kept real so a
/// fit can move through them smoothly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct CommKnobs {
    pub efficiency: f64,
    pub stream_efficiency: f64,
    pub interrupt_cycles: f64,
    pub setup_cycles: f64,
    pub flops_per_cycle: f64,
}

impl CommKnobs {
    pub fn from_model(cost: &CostModel) -> Self {
        CommKnobs {
            efficiency: cost.efficiency,
            stream_efficiency: cost.stream_efficiency,
            interrupt_cycles: cost.stream_interrupt_overhead_cycles as f64,
            setup_cycles: cost.dma_setup_cycles as f64,
            flops_per_cycle: cost.flops_per_cycle(crate::workloads::Dtype::Float),
        }
    }
}

pub(crate) fn method_time(method: CommMethod, k: &CommKnobs, platform: &PlatformSpec) -> MethodTime {
    let f = platform.aie_freq_hz;
    let elements = 3 * COMM_TASK_SIDE * COMM_TASK_SIDE;
    let bytes = (elements * 4) as f64;
    let flops = (2 * COMM_TASK_SIDE.pow(3)) as f64;
    let compute_sec = flops / (k.flops_per_cycle * k.efficiency * f);
    let stream = platform.stream_bytes_per_sec_per_core() * k.stream_efficiency;
    let dma = platform.dma_bytes_per_sec_per_core();
    let (transfer_sec, overhead_sec) = match method {
        CommMethod::CrossoverStream => {
            let chunks = elements.div_ceil(CROSSOVER_CHUNK_ELEMENTS) as f64;
            (bytes / stream, chunks * (k.interrupt_cycles + k.setup_cycles) / f)
        }
        CommMethod::AggregatedStream => {
            let chunks = elements.div_ceil(AGGREGATED_CHUNK_ELEMENTS) as f64;
            (bytes / stream, chunks * k.setup_cycles / f)
        }
        CommMethod::AggregatedDma => {
            let chunks = elements.div_ceil(AGGREGATED_CHUNK_ELEMENTS) as f64;
            (bytes / dma, chunks * k.setup_cycles / f)
        }
    };
    MethodTime { method, transfer_sec, overhead_sec, compute_sec, total_sec: transfer_sec + overhead_sec + compute_sec }
}

/// Durations of the three methods, in method order.
pub fn compare_comm_methods(cost: &CostModel, platform: &PlatformSpec) -> [MethodTime; 3] {
    let k = CommKnobs::from_model(cost);
    CommMethod::ALL.map(|m| method_time(m, &k, platform))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_ordering() {
        let t = compare_comm_methods(&CostModel::default(), &PlatformSpec::default());
        assert!(t[0].total_sec > t[1].total_sec && t[1].total_sec > t[2].total_sec);
        assert_eq!(t[0].compute_sec, t[2].compute_sec);
    }

    #[test]
    fn degenerate_converges() {
        let c = CostModel { stream_interrupt_overhead_cycles: 0, dma_setup_cycles: 0, ..CostModel::default() };
        let t = compare_comm_methods(&c, &PlatformSpec::default());
        assert!((t[0].total_sec - t[1].total_sec).abs() < 1e-18);
    }

    #[test]
    fn dma_rate_halves_transfer() {
        let p = PlatformSpec::default();
        let p2 = PlatformSpec { aie_dma_agg_bytes_per_sec: 2.0 * p.aie_dma_agg_bytes_per_sec, ..p.clone() };
        let c = CostModel::default();
        let a = compare_comm_methods(&c, &p)[2];
        let b = compare_comm_methods(&c, &p2)[2];
        assert!((a.transfer_sec / b.transfer_sec - 2.0).abs() < 1e-12);
        assert_eq!(a.compute_sec, b.compute_sec);
    }
}
