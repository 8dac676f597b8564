//! Service timing of the SSC: how one DU spreads a phase's bytes over its PUs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SscMode {
    #[serde(rename = "PSD")]
    Psd,
    #[serde(rename = "SHD")]
    Shd,
    #[serde(rename = "PHD")]
    Phd,
    #[serde(rename = "THR")]
    Thr,
}

impl From<crate::model::SenderMode> for SscMode {
    fn from(m: crate::model::SenderMode) -> Self {
        use crate::model::SenderMode as S;
        match m {
            S::Psd => SscMode::Psd,
            S::Shd => SscMode::Shd,
            S::Phd => SscMode::Phd,
            S::Thr => SscMode::Thr,
        }
    }
}

impl From<crate::model::ReceiverMode> for SscMode {
    fn from(m: crate::model::ReceiverMode) -> Self {
        use crate::model::ReceiverMode as R;
        match m {
            R::Shd => SscMode::Shd,
            R::Phd => SscMode::Phd,
            R::Thr => SscMode::Thr,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transfer {
    pub bytes: u64,
    /// Earliest time the PU can take part, in seconds.
    #[serde(default)]
    pub ready: f64,
    /// Per-PU channel rate in bytes/s; the channel rate when absent.
    #[serde(default)]
    pub rate: Option<f64>,
}

impl Transfer {
    pub fn new(bytes: u64) -> Self {
        Transfer { bytes, ready: 0.0, rate: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    /// Bytes per second.
    pub rate: f64,
    /// PUs PHD serves at once; 0 means all of them.
    #[serde(default)]
    pub fan_out: usize,
    /// PHD buffer already holds the data, so no fill prefix is paid.
    #[serde(default)]
    pub prefilled: bool,
}

impl Channel {
    pub fn new(rate: f64) -> Self {
        Channel { rate, fan_out: 0, prefilled: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SscError {
    #[error("no transfers to schedule")]
    Empty,
    #[error("THR service passes data through to a single PU, got {0}")]
    ThrMultiplePus(usize),
    #[error("PSD broadcasts one payload, but PU byte counts differ")]
    PsdUnequalSizes,
}

pub fn makespan(windows: &[Window]) -> f64 {
    windows.iter().map(|w| w.end).fold(0.0, f64::max)
}

/// Per-PU service windows, in the order the transfers are given.
pub fn ssc_schedule(mode: SscMode, transfers: &[Transfer], channel: &Channel) -> Result<Vec<Window>, SscError> {
    if transfers.is_empty() {
        return Err(SscError::Empty);
    }
    let dur = |t: &Transfer| t.bytes as f64 / t.rate.unwrap_or(channel.rate);
    match mode {
        SscMode::Psd => {
            if transfers.iter().any(|t| t.bytes != transfers[0].bytes) {
                return Err(SscError::PsdUnequalSizes);
            }
            let start = transfers.iter().map(|t| t.ready).fold(0.0, f64::max);
            Ok(transfers.iter().map(|t| Window { start, end: start + dur(t) }).collect())
        }
        SscMode::Shd => {
            let mut at = 0.0f64;
            Ok(transfers
                .iter()
                .map(|t| {
                    let start = at.max(t.ready);
                    at = start + dur(t);
                    Window { start, end: at }
                })
                .collect())
        }
        SscMode::Phd => {
            let fill = if channel.prefilled {
                0.0
            } else {
                transfers.iter().map(|t| t.bytes as f64).sum::<f64>() / channel.rate
            };
            let lanes = if channel.fan_out == 0 { transfers.len() } else { channel.fan_out.min(transfers.len()) };
            // Serve PUs as they become ready, so a late PU only holds its own lane.
            let mut order: Vec<usize> = (0..transfers.len()).collect();
            order.sort_by(|&a, &b| transfers[a].ready.total_cmp(&transfers[b].ready).then(a.cmp(&b)));
            let mut lane_free = vec![fill; lanes];
            let mut out = vec![Window { start: 0.0, end: 0.0 }; transfers.len()];
            for i in order {
                let (l, free) = lane_free
                    .iter()
                    .copied()
                    .enumerate()
                    .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
                    .expect("at least one lane");
                let start = free.max(transfers[i].ready);
                let end = start + dur(&transfers[i]);
                lane_free[l] = end;
                out[i] = Window { start, end };
            }
            Ok(out)
        }
        SscMode::Thr => {
            if transfers.len() != 1 {
                return Err(SscError::ThrMultiplePus(transfers.len()));
            }
            let t = &transfers[0];
            Ok(vec![Window { start: t.ready, end: t.ready + dur(t) }])
        }
    }
}
