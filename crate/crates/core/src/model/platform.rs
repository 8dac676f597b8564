use serde::{Deserialize, Serialize};

/// Target board parameters. Defaults describe a VCK5000-class card.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlatformSpec {
    pub aie_core_count: u32,
    /// PLIO channels available per direction.
    pub plio_count: u32,
    pub aie_freq_hz: f64,
    pub pl_freq_hz: f64,
    pub plio_bits_per_cycle: u32,
    pub ddr_port_bits_per_cycle: u32,
    pub ddr_peak_bytes_per_sec: f64,
    pub aie_stream_agg_bytes_per_sec: f64,
    pub aie_dma_agg_bytes_per_sec: f64,
    pub core_local_mem_bytes: u64,
    pub uram_total_bytes: u64,
    pub packet_switch_fanout_max: u32,
}

impl Default for PlatformSpec {
    fn default() -> Self {
        PlatformSpec {
            aie_core_count: 400,
            plio_count: 78,
            aie_freq_hz: 1.33e9,
            pl_freq_hz: 300e6,
            plio_bits_per_cycle: 128,
            ddr_port_bits_per_cycle: 512,
            ddr_peak_bytes_per_sec: 102.4e9,
            aie_stream_agg_bytes_per_sec: 1.95e12,
            aie_dma_agg_bytes_per_sec: 15.6e12,
            core_local_mem_bytes: 32 * 1024,
            // 3096 KiB of URAM reachable by DU buffers
            uram_total_bytes: 3_170_304,
            packet_switch_fanout_max: 8,
        }
    }
}

impl PlatformSpec {
    pub fn plio_bytes_per_sec(&self) -> f64 {
        self.plio_bits_per_cycle as f64 / 8.0 * self.pl_freq_hz
    }

    pub fn ddr_port_bytes_per_cycle(&self) -> f64 {
        self.ddr_port_bits_per_cycle as f64 / 8.0
    }

    pub fn ddr_port_bytes_per_sec(&self) -> f64 {
        self.ddr_port_bytes_per_cycle() * self.pl_freq_hz
    }

    pub fn stream_bytes_per_sec_per_core(&self) -> f64 {
        self.aie_stream_agg_bytes_per_sec / self.aie_core_count as f64
    }

    pub fn dma_bytes_per_sec_per_core(&self) -> f64 {
        self.aie_dma_agg_bytes_per_sec / self.aie_core_count as f64
    }

    /// Invariant violations as `(field, message)` pairs.
    pub fn check(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        if self.aie_core_count == 0 {
            out.push(("aie_core_count", "must be positive".to_string()));
        }
        if self.plio_count == 0 {
            out.push(("plio_count", "must be positive".to_string()));
        }
        for (name, v) in [
            ("aie_freq_hz", self.aie_freq_hz),
            ("pl_freq_hz", self.pl_freq_hz),
            ("ddr_peak_bytes_per_sec", self.ddr_peak_bytes_per_sec),
            ("aie_stream_agg_bytes_per_sec", self.aie_stream_agg_bytes_per_sec),
            ("aie_dma_agg_bytes_per_sec", self.aie_dma_agg_bytes_per_sec),
        ] {
            if !(v.is_finite() && v > 0.0) {
                out.push((name, format!("must be a positive number, got {v}")));
            }
        }
        if self.plio_bits_per_cycle == 0 || self.plio_bits_per_cycle > self.ddr_port_bits_per_cycle {
            out.push((
                "plio_bits_per_cycle",
                format!(
                    "must be in 1..={} (the DDR port width)",
                    self.ddr_port_bits_per_cycle
                ),
            ));
        }
        if self.packet_switch_fanout_max == 0 {
            out.push(("packet_switch_fanout_max", "must be positive".to_string()));
        }
        out
    }

    pub fn with_override(&self, o: &PlatformOverride) -> PlatformSpec {
        let mut p = self.clone();
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = o.$f { p.$f = v; } )* };
        }
        take!(
            aie_core_count,
            plio_count,
            aie_freq_hz,
            pl_freq_hz,
            plio_bits_per_cycle,
            ddr_port_bits_per_cycle,
            ddr_peak_bytes_per_sec,
            aie_stream_agg_bytes_per_sec,
            aie_dma_agg_bytes_per_sec,
            core_local_mem_bytes,
            uram_total_bytes,
            packet_switch_fanout_max
        );
        p
    }
}

/// Per-design platform adjustments; unset fields keep the base value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlatformOverride {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aie_core_count: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plio_count: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aie_freq_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pl_freq_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plio_bits_per_cycle: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ddr_port_bits_per_cycle: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ddr_peak_bytes_per_sec: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aie_stream_agg_bytes_per_sec: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aie_dma_agg_bytes_per_sec: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub core_local_mem_bytes: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uram_total_bytes: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub packet_switch_fanout_max: Option<u32>,
}

impl PlatformOverride {
    pub fn is_empty(&self) -> bool {
        *self == PlatformOverride::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_rates() {
        let p = PlatformSpec::default();
        assert_eq!(p.plio_bytes_per_sec(), 4.8e9);
        assert_eq!(p.ddr_port_bytes_per_sec(), 19.2e9);
        assert!(p.check().is_empty());
    }

    #[test]
    fn override_replaces_only_set_fields() {
        let o = PlatformOverride {
            plio_count: Some(96),
            ..Default::default()
        };
        let p = PlatformSpec::default().with_override(&o);
        assert_eq!(p.plio_count, 96);
        assert_eq!(p.aie_core_count, 400);
    }

    #[test]
    fn plio_wider_than_ddr_port_is_rejected() {
        let p = PlatformSpec {
            plio_bits_per_cycle: 1024,
            ..Default::default()
        };
        assert_eq!(p.check()[0].0, "plio_bits_per_cycle");
    }
}
