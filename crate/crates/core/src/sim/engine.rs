//! Event-driven execution of all DU-PU pairs over a workload.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::phase::{phase_times, pu_timing, PhaseTimes, Prefetch};
use super::{CostModel, SimError};
use crate::diag::Code;
use crate::model::{pu_cores, DesignSpec, PlatformSpec};
use crate::validate::validate_resources;
use crate::workloads::{bind_workload, WorkloadSpec};

const PS: f64 = 1e12;

fn ps(sec: f64) -> u64 {
    (sec * PS).round() as u64
}

fn sec(ps: u64) -> f64 {
    ps as f64 / PS
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimOptions {
    /// Record the event trace.
    pub trace: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub timestamp_ps: u64,
    pub end_ps: u64,
    /// `aie`, `plio` or `ddr`.
    pub resource: String,
    /// `prefetch`, `comm`, `compute` or `drain`.
    pub phase: String,
    pub pair_id: u32,
    pub iteration: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseBreakdown {
    pub compute_sec: f64,
    pub comm_sec: f64,
    /// Prefetch time the pair waited on.
    pub prefetch_exposed_sec: f64,
    /// Prefetch time hidden behind compute.
    pub prefetch_overlapped_sec: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Utilization {
    pub aie: f64,
    pub plio: f64,
    pub ddr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSummary {
    pub du: String,
    pub pus: Vec<String>,
    pub iterations: u64,
    pub finish_sec: f64,
    pub breakdown: PhaseBreakdown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    #[serde(default = "crate::output_schema_version")]
    pub schema_version: u32,
    pub total_time_sec: f64,
    pub tasks: u64,
    pub tasks_per_sec: f64,
    pub ops: Option<u64>,
    pub ops_per_sec: Option<f64>,
    /// PU iterations executed over all PUs.
    pub subtasks: u64,
    /// Iterations of the longest-running pair.
    pub iterations: u64,
    pub pu_count: usize,
    pub busy_pus: usize,
    /// Breakdown of the pair that finishes last.
    pub breakdown: PhaseBreakdown,
    pub utilization: Utilization,
    pub pairs: Vec<PairSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceEvent>>,
}

pub fn trace_csv(events: &[TraceEvent]) -> String {
    let mut s = String::from("timestamp_ps,end_ps,resource,phase,pair_id,iteration\n");
    for e in events {
        let _ = writeln!(s, "{},{},{},{},{},{}", e.timestamp_ps, e.end_ps, e.resource, e.phase, e.pair_id, e.iteration);
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Ev {
    PrefetchDone(u64),
    CommDone(u64),
    ComputeDone(u64),
    DrainDone,
}

struct PairState {
    iterations: u64,
    /// Subtasks per PU, in pairing order.
    counts: Vec<u64>,
    phases: BTreeMap<usize, PhaseTimes>,
    prefetched: Option<u64>,
    computed: Option<u64>,
    compute_end_ps: u64,
    finish_ps: u64,
    comm_ps: u64,
    compute_ps: u64,
    prefetch_ps: u64,
    exposed_ps: u64,
}

impl PairState {
    fn busy(&self, i: u64) -> usize {
        self.counts.iter().filter(|&&c| c > i).count()
    }
}

struct Ddr {
    free_ps: u64,
    busy_ps: u64,
    peak: f64,
}

impl Ddr {
    /// FIFO fluid share: the request completes when both the AMC and its
    /// DDR window are done.
    fn request(&mut self, now: u64, p: &Prefetch) -> u64 {
        let window = ps(p.ddr_bytes as f64 / self.peak);
        let start = self.free_ps.max(now);
        self.free_ps = start + window;
        self.busy_ps += window;
        (now + ps(p.local_sec)).max(self.free_ps)
    }
}

pub fn simulate(design: &DesignSpec, workload: &WorkloadSpec, platform: &PlatformSpec, cost: &CostModel) -> Result<SimResult, SimError> {
    simulate_with(design, workload, platform, cost, &SimOptions::default())
}

pub fn simulate_with(
    design: &DesignSpec,
    workload: &WorkloadSpec,
    platform: &PlatformSpec,
    cost: &CostModel,
    opts: &SimOptions,
) -> Result<SimResult, SimError> {
    cost.check().map_err(SimError::InvalidCostModel)?;
    let mapping = bind_workload(design, workload)?;
    let design = &mapping.design;
    let report = validate_resources(design, platform);
    if !report.is_deployable {
        if report.errors().next().is_none() || report.errors().all(|d| is_budget(d.code)) {
            let mut reasons: Vec<String> =
                report.resource.violations.iter().map(|v| format!("{} at {}: {}", v.code, v.location, v.message)).collect();
            reasons.extend(report.errors().map(|d| d.to_string()));
            reasons.dedup();
            return Err(SimError::InfeasibleMapping { reasons });
        }
        return Err(SimError::NotDeployable(Box::new(report)));
    }
    let platform = design.effective_platform(platform);
    let dtype = workload.dtype();

    // Round-robin subtasks over PUs in service order.
    let order = design.service_order();
    let n = order.len() as u64;
    let mut per_pu = vec![0u64; design.pus.len()];
    for (j, &p) in order.iter().enumerate() {
        per_pu[p] = mapping.subtasks / n + u64::from((j as u64) < mapping.subtasks % n);
    }
    let pairs = design.pairs();
    let mut states = Vec::with_capacity(pairs.len());
    for pair in &pairs {
        let counts: Vec<u64> = pair.pus.iter().map(|&p| per_pu[p]).collect();
        let iterations = counts.iter().copied().max().unwrap_or(0);
        let mut st = PairState {
            iterations,
            counts,
            phases: BTreeMap::new(),
            prefetched: None,
            computed: None,
            compute_end_ps: 0,
            finish_ps: 0,
            comm_ps: 0,
            compute_ps: 0,
            prefetch_ps: 0,
            exposed_ps: 0,
        };
        for i in [0, iterations.saturating_sub(1)] {
            let b = st.busy(i);
            if b > 0 && !st.phases.contains_key(&b) {
                st.phases.insert(b, phase_times(design, pair, b, dtype, cost, &platform)?);
            }
        }
        states.push(st);
    }

    let mut ddr = Ddr { free_ps: 0, busy_ps: 0, peak: platform.ddr_peak_bytes_per_sec };
    let mut heap: BinaryHeap<Reverse<(u64, u64, usize, Ev)>> = BinaryHeap::new();
    let mut seq = 0u64;
    let mut push = |heap: &mut BinaryHeap<_>, t: u64, p: usize, ev: Ev| {
        heap.push(Reverse((t, seq, p, ev)));
        seq += 1;
    };
    let mut trace: Vec<TraceEvent> = Vec::new();
    let mut record = |on: bool, start: u64, end: u64, resource: &str, phase: &str, pair: usize, it: u64| {
        if on && end > start {
            trace.push(TraceEvent {
                timestamp_ps: start,
                end_ps: end,
                resource: resource.into(),
                phase: phase.into(),
                pair_id: pair as u32,
                iteration: it,
            });
        }
    };

    for (p, st) in states.iter_mut().enumerate() {
        if st.iterations == 0 {
            continue;
        }
        let ph = st.phases[&st.busy(0)];
        let done = ddr.request(0, &ph.first);
        st.prefetch_ps += done;
        st.exposed_ps += done;
        record(opts.trace, 0, done, "ddr", "prefetch", p, 0);
        push(&mut heap, done, p, Ev::PrefetchDone(0));
    }

    while let Some(Reverse((now, _, p, ev))) = heap.pop() {
        let st = &mut states[p];
        let start_comm = match ev {
            Ev::PrefetchDone(i) => {
                st.prefetched = Some(i);
                let ready = i == 0 || st.computed == Some(i - 1);
                if ready && i > 0 {
                    st.exposed_ps += now - st.compute_end_ps;
                }
                ready.then_some(i)
            }
            Ev::ComputeDone(i) => {
                st.computed = Some(i);
                st.compute_end_ps = now;
                if i + 1 == st.iterations {
                    let ph = st.phases[&st.busy(i)];
                    let end = now + ps(ph.t_receive);
                    st.comm_ps += end - now;
                    record(opts.trace, now, end, "plio", "drain", p, i);
                    push(&mut heap, end, p, Ev::DrainDone);
                    None
                } else if st.prefetched == Some(i + 1) {
                    Some(i + 1)
                } else {
                    None
                }
            }
            Ev::CommDone(i) => {
                let ph = st.phases[&st.busy(i)];
                let fill = if i == 0 || ph.t_comm > 0.0 { ph.t_fill } else { 0.0 };
                let end = now + ps(ph.t_compute + fill);
                st.compute_ps += end - now;
                record(opts.trace, now, end, "aie", "compute", p, i);
                push(&mut heap, end, p, Ev::ComputeDone(i));
                if i + 1 < st.iterations {
                    let next = st.phases[&st.busy(i + 1)];
                    let done = ddr.request(now, &next.steady);
                    st.prefetch_ps += done - now;
                    record(opts.trace, now, done, "ddr", "prefetch", p, i + 1);
                    push(&mut heap, done, p, Ev::PrefetchDone(i + 1));
                }
                None
            }
            Ev::DrainDone => {
                st.finish_ps = now;
                None
            }
        };
        if let Some(i) = start_comm {
            let st = &mut states[p];
            let ph = st.phases[&st.busy(i)];
            // The first phase has no previous results to collect.
            let t = if i == 0 { ph.t_send } else { ph.t_comm };
            let end = now + ps(t);
            st.comm_ps += end - now;
            record(opts.trace, now, end, "plio", "comm", p, i);
            push(&mut heap, end, p, Ev::CommDone(i));
        }
    }

    let total_ps = states.iter().map(|s| s.finish_ps).max().unwrap_or(0);
    if total_ps == 0 {
        return Err(SimError::InfeasibleMapping { reasons: vec!["workload needs no PU iterations".into()] });
    }
    let total = sec(total_ps);

    // Busy fractions from per-PU work.
    let mut aie_core_sec = 0.0;
    let mut plio_sec = 0.0;
    for (pair, st) in pairs.iter().zip(&states) {
        for (&pu, &count) in pair.pus.iter().zip(&st.counts) {
            let t = pu_timing(design, pu, dtype, cost, &platform);
            aie_core_sec += count as f64 * t.compute_sec * pu_cores(&design.pus[pu]) as f64;
            plio_sec += count as f64
                * (t.send_bytes as f64 / t.send_rate * t.plio_in as f64
                    + t.recv_bytes as f64 / t.recv_rate * t.plio_out as f64);
        }
    }
    let utilization = Utilization {
        aie: (aie_core_sec / (platform.aie_core_count as f64 * total)).min(1.0),
        plio: (plio_sec / (2.0 * platform.plio_count as f64 * total)).min(1.0),
        ddr: (sec(ddr.busy_ps) / total).min(1.0),
    };

    let summaries: Vec<PairSummary> = pairs
        .iter()
        .zip(&states)
        .map(|(pair, st)| PairSummary {
            du: design.dus[pair.du].name.clone(),
            pus: pair.pus.iter().map(|&i| design.pus[i].name.clone()).collect(),
            iterations: st.iterations,
            finish_sec: sec(st.finish_ps),
            breakdown: PhaseBreakdown {
                compute_sec: sec(st.compute_ps),
                comm_sec: sec(st.comm_ps),
                prefetch_exposed_sec: sec(st.exposed_ps),
                prefetch_overlapped_sec: sec(st.prefetch_ps.saturating_sub(st.exposed_ps)),
            },
        })
        .collect();
    let critical = states.iter().enumerate().max_by_key(|(i, s)| (s.finish_ps, Reverse(*i))).map_or(0, |(i, _)| i);

    let tasks = mapping.tasks;
    Ok(SimResult {
        schema_version: crate::OUTPUT_SCHEMA_VERSION,
        total_time_sec: total,
        tasks,
        tasks_per_sec: tasks as f64 / total,
        ops: mapping.ops,
        ops_per_sec: mapping.ops.map(|o| o as f64 / total),
        subtasks: mapping.subtasks,
        iterations: states.iter().map(|s| s.iterations).max().unwrap_or(0),
        pu_count: design.pus.len(),
        busy_pus: per_pu.iter().filter(|&&c| c > 0).count(),
        breakdown: summaries[critical].breakdown.clone(),
        utilization,
        pairs: summaries,
        trace: opts.trace.then_some(trace),
    })
}

fn is_budget(code: Code) -> bool {
    matches!(code, Code::AieCores | Code::PlioIn | Code::PlioOut | Code::UramBytes | Code::KernelMemExceeded)
}
