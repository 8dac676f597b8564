use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PortCounts {
    pub stream: u32,
    pub cascade: u32,
    pub dma_buffer: u32,
}

impl PortCounts {
    /// Ports that can be reached from outside the CC (streams and buffers).
    pub fn external(&self) -> u32 {
        self.stream + self.dma_buffer
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub name: String,
    pub source_ref: String,
    /// Fixed cost of one invocation; 0 means derive it from the op count.
    pub cycles_per_invocation: u64,
    pub local_mem_bytes: u64,
    pub in_ports: PortCounts,
    pub out_ports: PortCounts,
}

impl KernelSpec {
    pub fn new(name: &str, source_ref: &str) -> Self {
        KernelSpec {
            name: name.to_string(),
            source_ref: source_ref.to_string(),
            cycles_per_invocation: 0,
            local_mem_bytes: 0,
            in_ports: PortCounts { stream: 1, ..Default::default() },
            out_ports: PortCounts { stream: 1, ..Default::default() },
        }
    }
}
