//! Data units: AMC (DDR access), TPC (task partitioning) and SSC (service).

use std::str::FromStr;

use serde::{Deserialize, Serialize};

macro_rules! named_enum {
    ($name:ident { $($var:ident => $s:literal),* $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum $name { $( #[serde(rename = $s)] $var ),* }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$var),*];
            pub fn as_str(self) -> &'static str {
                match self { $($name::$var => $s),* }
            }
        }

        impl FromStr for $name {
            type Err = ();
            fn from_str(s: &str) -> Result<Self, ()> {
                $name::ALL.iter().copied().find(|m| m.as_str() == s).ok_or(())
            }
        }
    };
}

named_enum!(AmcMode { Csb => "CSB", Jub => "JUB", Unod => "UNOD" });
named_enum!(TpcMode { Cup => "CUP", Chl => "CHL", Thr => "THR" });
named_enum!(SenderMode { Psd => "PSD", Shd => "SHD", Phd => "PHD", Thr => "THR" });
named_enum!(ReceiverMode { Shd => "SHD", Phd => "PHD", Thr => "THR" });

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmcSpec {
    pub mode: AmcMode,
    /// Elements per burst (JUB only).
    pub burst_size: u32,
    pub element_bytes: u32,
    /// DDR ports driven in parallel.
    pub ports: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TpcSpec {
    pub mode: TpcMode,
    pub tb_bytes_in: u64,
    pub tb_bytes_out: u64,
    pub tev_per_pu_iteration: u32,
    pub chl_repeat_count: u32,
    /// PU iterations served by one TB refresh.
    pub iterations_per_tb: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SscSpec {
    pub sender_mode: SenderMode,
    pub receiver_mode: ReceiverMode,
    pub buffer_bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DuSpec {
    pub name: String,
    pub amc: Option<AmcSpec>,
    pub tpc: TpcSpec,
    pub ssc: SscSpec,
    pub onchip_buffer_bytes: u64,
}

impl DuSpec {
    /// Scales every byte budget by `num/den` (used when dropping PUs).
    pub fn scaled(&self, num: u64, den: u64) -> DuSpec {
        let s = |v: u64| if den == 0 { v } else { v * num / den };
        let mut d = self.clone();
        d.tpc.tb_bytes_in = s(d.tpc.tb_bytes_in);
        d.tpc.tb_bytes_out = s(d.tpc.tb_bytes_out);
        d.ssc.buffer_bytes = s(d.ssc.buffer_bytes);
        d.onchip_buffer_bytes = s(d.onchip_buffer_bytes);
        d
    }
}
