//! Contention-free timing of one DU-PU pair iteration.

use serde::Serialize;

use super::ssc::{makespan, ssc_schedule, Channel, SscError, SscMode, Transfer};
use super::CostModel;
use crate::model::{plio_count, AmcMode, CcTopology, DesignSpec, DuSpec, Pair, PlatformSpec, TpcMode};
use crate::workloads::Dtype;

/// One iteration of one PU.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PuTiming {
    pub compute_sec: f64,
    /// Cascade pipeline fill, paid at the start of a compute run.
    pub fill_sec: f64,
    pub send_bytes: u64,
    pub recv_bytes: u64,
    pub send_rate: f64,
    pub recv_rate: f64,
    pub plio_in: u64,
    pub plio_out: u64,
}

pub fn pu_timing(design: &DesignSpec, pu: usize, dtype: Dtype, cost: &CostModel, platform: &PlatformSpec) -> PuTiming {
    let spec = &design.pus[pu];
    let cc_cores: u64 = spec.psts.iter().map(|p| p.cc.core_count()).sum::<u64>().max(1);
    let core_ops = spec.per_iteration_ops as f64 / cc_cores as f64;
    let mut compute = 0.0;
    let mut fill = 0.0;
    for pst in &spec.psts {
        let cycles = pst
            .cc
            .kernels()
            .iter()
            .filter_map(|k| design.kernels.get(*k).map(|k| k.cycles_per_invocation).filter(|&c| c > 0))
            .max();
        let core_sec = match cycles {
            Some(c) => c as f64 / platform.aie_freq_hz,
            None => core_ops / cost.core_ops_per_sec(dtype, platform),
        };
        let layout = pst.cc.layout(&design.kernels).ok();
        let stages = match &pst.cc {
            CcTopology::Butterfly { .. } => {
                layout.as_ref().map_or(1, |l| l.butterfly_stages.iter().map(|b| b.stages).max().unwrap_or(1))
            }
            _ => 1,
        };
        compute += core_sec * stages as f64;
        let depth = layout.as_ref().map_or(1, |l| l.cascade_depth().max(1));
        fill += (depth - 1) as f64 * cost.cascade_fill_cycles as f64 / platform.aie_freq_hz;
    }
    let plio = plio_count(spec);
    let rate = platform.plio_bytes_per_sec();
    PuTiming {
        compute_sec: compute,
        fill_sec: fill,
        send_bytes: spec.per_iteration_bytes_in,
        recv_bytes: spec.per_iteration_bytes_out,
        send_rate: plio.input.max(1) as f64 * rate,
        recv_rate: plio.output.max(1) as f64 * rate,
        plio_in: plio.input,
        plio_out: plio.output,
    }
}

/// A DDR request issued by a DU's AMC.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Prefetch {
    /// Time the AMC itself needs, including the PHD buffer fill.
    pub local_sec: f64,
    pub ddr_bytes: u64,
}

impl Prefetch {
    /// Duration with the DDR to itself.
    pub fn alone(&self, platform: &PlatformSpec) -> f64 {
        self.local_sec.max(self.ddr_bytes as f64 / platform.ddr_peak_bytes_per_sec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseTimes {
    pub t_send: f64,
    pub t_receive: f64,
    pub t_comm: f64,
    pub t_compute: f64,
    pub t_fill: f64,
    /// Steady-state prefetch of the next iteration's data.
    pub t_prefetch: f64,
    pub first: Prefetch,
    pub steady: Prefetch,
}

fn amc_sec(du: &DuSpec, bytes: u64, cost: &CostModel, platform: &PlatformSpec) -> f64 {
    match &du.amc {
        Some(a) if bytes > 0 => {
            let eb = a.element_bytes.max(1) as u64;
            cost.amc_cycles(a.mode, bytes.div_ceil(eb), eb, platform) / a.ports.max(1) as f64 / platform.pl_freq_hz
        }
        _ => 0.0,
    }
}

fn stream_service(mode: SscMode, bytes_rates: &[(u64, f64)]) -> Result<f64, SscError> {
    if bytes_rates.iter().all(|(b, _)| *b == 0) {
        return Ok(0.0);
    }
    let transfers: Vec<Transfer> =
        bytes_rates.iter().map(|&(bytes, rate)| Transfer { bytes, ready: 0.0, rate: Some(rate) }).collect();
    let ch = Channel { rate: bytes_rates[0].1, fan_out: 0, prefilled: true };
    Ok(makespan(&ssc_schedule(mode, &transfers, &ch)?))
}

/// Timing of an iteration in which the first `busy` PUs of `pair` work.
pub fn phase_times(
    design: &DesignSpec,
    pair: &Pair,
    busy: usize,
    dtype: Dtype,
    cost: &CostModel,
    platform: &PlatformSpec,
) -> Result<PhaseTimes, SscError> {
    let du = &design.dus[pair.du];
    let pus: Vec<PuTiming> =
        pair.pus.iter().take(busy.max(1)).map(|&p| pu_timing(design, p, dtype, cost, platform)).collect();
    let sends: Vec<(u64, f64)> = pus.iter().map(|t| (t.send_bytes, t.send_rate)).collect();
    let recvs: Vec<(u64, f64)> = pus.iter().map(|t| (t.recv_bytes, t.recv_rate)).collect();
    let mut t_send = stream_service(du.ssc.sender_mode.into(), &sends)?;
    let mut t_receive = stream_service(du.ssc.receiver_mode.into(), &recvs)?;
    if du.tpc.mode == TpcMode::Thr {
        // Pass-through: DDR is read and written inside the communication phase.
        let bin: u64 = sends.iter().map(|s| s.0).sum();
        let bout: u64 = recvs.iter().map(|s| s.0).sum();
        t_send = t_send.max(amc_sec(du, bin, cost, platform));
        t_receive = t_receive.max(amc_sec(du, bout, cost, platform));
    }
    let t_compute = pus.iter().map(|t| t.compute_sec).fold(0.0, f64::max);
    let t_fill = pus.iter().map(|t| t.fill_sec).fold(0.0, f64::max);

    let paired = pair.pus.len().max(1) as f64;
    let share = pus.len() as f64 / paired;
    let fill_rate = cost.onchip_buffer_bytes_per_cycle as f64 * platform.pl_freq_hz;
    let bytes_in: u64 = sends.iter().map(|s| s.0).sum();
    let phd_fill = if du.ssc.sender_mode == crate::model::SenderMode::Phd { bytes_in as f64 / fill_rate } else { 0.0 };
    let tpc = &du.tpc;
    let (first, steady) = match tpc.mode {
        TpcMode::Thr => (Prefetch::default(), Prefetch::default()),
        TpcMode::Chl | TpcMode::Cup => {
            let full = (tpc.tb_bytes_in as f64 * share).round() as u64;
            let first = Prefetch { local_sec: amc_sec(du, full, cost, platform).max(phd_fill), ddr_bytes: full };
            let steady = if tpc.mode == TpcMode::Chl {
                Prefetch::default()
            } else {
                let per = |tb: u64| {
                    (tb as f64 * tpc.tev_per_pu_iteration as f64 / tpc.iterations_per_tb.max(1) as f64 * share).round()
                        as u64
                };
                let (rd, wr) = (per(tpc.tb_bytes_in), per(tpc.tb_bytes_out));
                let amc = amc_sec(du, rd, cost, platform) + amc_sec(du, wr, cost, platform);
                Prefetch { local_sec: amc.max(phd_fill), ddr_bytes: rd + wr }
            };
            (first, steady)
        }
    };
    Ok(PhaseTimes {
        t_send,
        t_receive,
        t_comm: t_send.max(t_receive),
        t_compute,
        t_fill,
        t_prefetch: steady.alone(platform),
        first,
        steady,
    })
}

/// AMC cost of moving `bytes` in `mode`, for mode comparisons.
pub fn amc_mode_seconds(mode: AmcMode, bytes: u64, element_bytes: u64, cost: &CostModel, platform: &PlatformSpec) -> f64 {
    cost.amc_cycles(mode, bytes.div_ceil(element_bytes.max(1)), element_bytes, platform) / platform.pl_freq_hz
}
