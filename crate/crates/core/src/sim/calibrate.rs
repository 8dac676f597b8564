//! Least-squares fit of cost-model parameters to observed durations.
//!
//! Coordinate descent with a golden-section line search per bounded
//! parameter, swept in a fixed order. Cycle counts are searched as reals,
//! rounded, and the remaining real parameters refit.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::comm::{method_time, CommKnobs, CommMethod};
use super::{simulate, CostModel, SimError};
use crate::model::{DesignSpec, PlatformSpec};
use crate::workloads::{template_design, App, TemplateParams, WorkloadSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scenario {
    /// One of the three transfer methods, numbered 1 to 3.
    CommMethod { method: u8 },
    /// Total time of a template design running a workload.
    Simulate {
        template: App,
        workload: WorkloadSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pus: Option<u32>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub scenario: Scenario,
    pub observed_sec: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitParam {
    Efficiency,
    StreamEfficiency,
    StreamInterruptOverhead,
    DmaSetup,
    JubEfficiency,
}

impl FitParam {
    /// Preference order when parameters are picked automatically.
    pub const ALL: [FitParam; 5] = [
        FitParam::Efficiency,
        FitParam::StreamEfficiency,
        FitParam::StreamInterruptOverhead,
        FitParam::DmaSetup,
        FitParam::JubEfficiency,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FitParam::Efficiency => "efficiency",
            FitParam::StreamEfficiency => "stream_efficiency",
            FitParam::StreamInterruptOverhead => "stream_interrupt_overhead_cycles",
            FitParam::DmaSetup => "dma_setup_cycles",
            FitParam::JubEfficiency => "jub_efficiency",
        }
    }

    fn bounds(self) -> (f64, f64) {
        match self {
            FitParam::Efficiency | FitParam::StreamEfficiency | FitParam::JubEfficiency => (1e-3, 1.0),
            FitParam::StreamInterruptOverhead | FitParam::DmaSetup => (0.0, 100_000.0),
        }
    }

    fn is_integer(self) -> bool {
        matches!(self, FitParam::StreamInterruptOverhead | FitParam::DmaSetup)
    }

    fn get(self, m: &CostModel) -> f64 {
        match self {
            FitParam::Efficiency => m.efficiency,
            FitParam::StreamEfficiency => m.stream_efficiency,
            FitParam::StreamInterruptOverhead => m.stream_interrupt_overhead_cycles as f64,
            FitParam::DmaSetup => m.dma_setup_cycles as f64,
            FitParam::JubEfficiency => m.jub_efficiency,
        }
    }

    fn set(self, m: &mut CostModel, v: f64) {
        match self {
            FitParam::Efficiency => m.efficiency = v,
            FitParam::StreamEfficiency => m.stream_efficiency = v,
            FitParam::StreamInterruptOverhead => m.stream_interrupt_overhead_cycles = v.round() as u32,
            FitParam::DmaSetup => m.dma_setup_cycles = v.round() as u32,
            FitParam::JubEfficiency => m.jub_efficiency = v,
        }
    }
}

impl std::str::FromStr for FitParam {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        FitParam::ALL
            .iter()
            .copied()
            .find(|p| p.as_str() == s || p.as_str().trim_end_matches("_cycles") == s)
            .ok_or_else(|| format!("unknown fit parameter '{s}'"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub scenario: Scenario,
    pub observed_sec: f64,
    pub predicted_sec: f64,
    /// `(predicted - observed) / observed`.
    pub relative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub model: CostModel,
    pub params: Vec<FitParam>,
    pub residuals: Vec<Residual>,
    /// Sum of squared relative residuals.
    pub objective: f64,
    pub sweeps: u32,
}

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error("{targets} independent targets cannot determine {params} parameters")]
    Underdetermined { targets: usize, params: usize },
    #[error("no target depends on {}", .0.as_str())]
    Insensitive(FitParam),
    #[error("invalid target: {0}")]
    InvalidTarget(String),
    #[error("scenario failed: {0}")]
    Sim(#[from] SimError),
}

enum Prepared {
    Comm(CommMethod),
    Sim(Box<DesignSpec>, WorkloadSpec),
}

struct Problem<'a> {
    targets: &'a [Target],
    prepared: Vec<Prepared>,
    platform: &'a PlatformSpec,
    base: CostModel,
    params: Vec<FitParam>,
}

impl Problem<'_> {
    fn model(&self, x: &[f64]) -> CostModel {
        let mut m = self.base.clone();
        for (p, v) in self.params.iter().zip(x) {
            p.set(&mut m, *v);
        }
        m
    }

    fn predict(&self, x: &[f64]) -> Result<Vec<f64>, SimError> {
        let model = self.model(x);
        let mut knobs = CommKnobs::from_model(&model);
        for (p, v) in self.params.iter().zip(x) {
            match p {
                FitParam::StreamInterruptOverhead => knobs.interrupt_cycles = *v,
                FitParam::DmaSetup => knobs.setup_cycles = *v,
                _ => {}
            }
        }
        self.prepared
            .iter()
            .map(|pr| match pr {
                Prepared::Comm(m) => Ok(method_time(*m, &knobs, self.platform).total_sec),
                Prepared::Sim(d, w) => Ok(simulate(d, w, self.platform, &model)?.total_time_sec),
            })
            .collect()
    }

    fn objective(&self, x: &[f64]) -> Result<f64, SimError> {
        let pred = self.predict(x)?;
        Ok(pred.iter().zip(self.targets).map(|(p, t)| ((p - t.observed_sec) / t.observed_sec).powi(2)).sum())
    }

    /// Golden-section search of coordinate `i` over its bounds.
    fn line_search(&self, x: &mut [f64], i: usize, fixed_int: bool) -> Result<f64, SimError> {
        let (mut a, mut b) = self.params[i].bounds();
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let eval = |x: &mut [f64], v: f64| {
            x[i] = if fixed_int { v.round() } else { v };
            self.objective(x)
        };
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let mut fc = eval(x, c)?;
        let mut fd = eval(x, d)?;
        let tol = 1e-13 * (b - a).abs().max(1.0);
        while (b - a).abs() > tol {
            if fc <= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = eval(x, c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = eval(x, d)?;
            }
        }
        let best = if fc <= fd { c } else { d };
        eval(x, best)
    }

    fn descend(&self, x: &mut [f64], skip: &[bool], sweeps: &mut u32) -> Result<f64, SimError> {
        let mut f = self.objective(x)?;
        for _ in 0..400 {
            *sweeps += 1;
            let before = f;
            let mut any = false;
            for i in 0..x.len() {
                if skip[i] {
                    continue;
                }
                any = true;
                let keep = x[i];
                let nf = self.line_search(x, i, false)?;
                if nf <= f {
                    f = nf;
                } else {
                    x[i] = keep;
                }
            }
            if !any || before - f <= 1e-16 * before.max(1e-300) || f < 1e-30 {
                break;
            }
        }
        Ok(f)
    }
}

/// Parameters every target set can support, in preference order, capped at
/// the number of independent targets.
pub fn auto_params(targets: &[Target], base: &CostModel, platform: &PlatformSpec) -> Result<Vec<FitParam>, CalibrationError> {
    let n = independent(targets);
    let mut out = Vec::new();
    for p in FitParam::ALL {
        if out.len() == n {
            break;
        }
        if sensitive(targets, base, platform, p)? {
            out.push(p);
        }
    }
    Ok(out)
}

fn independent(targets: &[Target]) -> usize {
    let mut seen: Vec<&Scenario> = Vec::new();
    for t in targets {
        if !seen.contains(&&t.scenario) {
            seen.push(&t.scenario);
        }
    }
    seen.len()
}

fn prepare(targets: &[Target]) -> Result<Vec<Prepared>, CalibrationError> {
    targets
        .iter()
        .map(|t| {
            if !(t.observed_sec.is_finite() && t.observed_sec > 0.0) {
                return Err(CalibrationError::InvalidTarget(format!("observed time {} is not positive", t.observed_sec)));
            }
            match &t.scenario {
                Scenario::CommMethod { method } => CommMethod::from_number(*method)
                    .map(Prepared::Comm)
                    .ok_or_else(|| CalibrationError::InvalidTarget(format!("method {method} is not 1, 2 or 3"))),
                Scenario::Simulate { template, workload, pus } => {
                    let d = template_design(*template, &TemplateParams::for_app(*template))
                        .map_err(|e| CalibrationError::InvalidTarget(e.to_string()))?;
                    let d = match pus {
                        Some(n) => d.restrict_pus(*n as usize).map_err(|e| CalibrationError::InvalidTarget(e.to_string()))?,
                        None => d,
                    };
                    Ok(Prepared::Sim(Box::new(d), workload.clone()))
                }
            }
        })
        .collect()
}

fn sensitive(targets: &[Target], base: &CostModel, platform: &PlatformSpec, p: FitParam) -> Result<bool, CalibrationError> {
    let prob = Problem { targets, prepared: prepare(targets)?, platform, base: base.clone(), params: vec![p] };
    let v = p.get(base);
    let (lo, hi) = p.bounds();
    let w = if v * 1.25 <= hi && v > 0.0 { v * 1.25 } else if v > lo { (v + lo) / 2.0 } else { v + 1.0 };
    let a = prob.predict(&[v])?;
    let b = prob.predict(&[w])?;
    Ok(a.iter().zip(&b).any(|(x, y)| ((x - y) / x).abs() > 1e-12))
}

pub fn calibrate(
    targets: &[Target],
    params: &[FitParam],
    start: &CostModel,
    platform: &PlatformSpec,
) -> Result<CalibrationResult, CalibrationError> {
    let n = independent(targets);
    if params.is_empty() || n < params.len() {
        return Err(CalibrationError::Underdetermined { targets: n, params: params.len() });
    }
    for &p in params {
        if !sensitive(targets, start, platform, p)? {
            return Err(CalibrationError::Insensitive(p));
        }
    }
    let prob = Problem { targets, prepared: prepare(targets)?, platform, base: start.clone(), params: params.to_vec() };
    let mut x: Vec<f64> = params.iter().map(|p| p.get(start)).collect();
    let mut sweeps = 0;
    let none = vec![false; x.len()];
    prob.descend(&mut x, &none, &mut sweeps)?;
    // Snap cycle counts to integers, then refit what is left.
    let ints: Vec<bool> = params.iter().map(|p| p.is_integer()).collect();
    if ints.iter().any(|&b| b) {
        for (v, &is_int) in x.iter_mut().zip(&ints) {
            if is_int {
                *v = v.round();
            }
        }
        prob.descend(&mut x, &ints, &mut sweeps)?;
    }
    let model = prob.model(&x);
    let pred = Problem { params: Vec::new(), base: model.clone(), ..prob }.predict(&[])?;
    let residuals: Vec<Residual> = targets
        .iter()
        .zip(&pred)
        .map(|(t, p)| Residual {
            scenario: t.scenario.clone(),
            observed_sec: t.observed_sec,
            predicted_sec: *p,
            relative: (p - t.observed_sec) / t.observed_sec,
        })
        .collect();
    let objective = residuals.iter().map(|r| r.relative * r.relative).sum();
    Ok(CalibrationResult { model, params: params.to_vec(), residuals, objective, sweeps })
}
