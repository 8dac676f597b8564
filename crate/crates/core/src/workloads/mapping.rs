//! Binding a workload to a design: checks that the design's per-iteration
//! shapes fit the workload and rebinds size-dependent fields.

use std::collections::BTreeSet;

use thiserror::Error;

use super::formulas::{iter_kernel, op_count, MMT_TASK_SIDE};
use super::WorkloadSpec;
use crate::model::{DesignSpec, SenderMode};

/// Stack and runtime reserve kept free in every FFT core's local memory.
pub const FFT_STACK_RESERVE_BYTES: u64 = 1024;
/// Ping-pong buffering of FFT sample blocks.
pub const FFT_BUFFER_MULTIPLIER: u64 = 2;

/// Local memory one FFT core needs when `pu_count` PUs split the samples.
pub fn fft_core_bytes(samples: u64, element_bytes: u64, buffer_multiplier: u64, pu_count: u64) -> u64 {
    samples * element_bytes * buffer_multiplier / pu_count.max(1) + FFT_STACK_RESERVE_BYTES
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MappingError {
    #[error("invalid workload: {0}")]
    Workload(String),
    #[error("the design has no PUs")]
    NoPus,
    #[error("PU '{pu}' does not fit the workload: {detail}")]
    ShapeMismatch { pu: String, detail: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mapping {
    /// Design with workload-dependent sizes filled in.
    pub design: DesignSpec,
    /// PU iterations needed in total.
    pub subtasks: u64,
    pub tasks: u64,
    pub ops: Option<u64>,
}

fn icbrt(v: u64) -> Option<u64> {
    let r = (v as f64).cbrt().round() as u64;
    (r.saturating_sub(1)..=r + 1).find(|c| c.checked_pow(3) == Some(v))
}

fn isqrt_exact(v: u64) -> Option<u64> {
    let r = (v as f64).sqrt().round() as u64;
    (r.saturating_sub(1)..=r + 1).find(|c| c.checked_mul(*c) == Some(v))
}

/// One shape parameter shared by every PU, derived from its op count.
fn uniform<F: Fn(u64) -> Result<u64, String>>(design: &DesignSpec, f: F) -> Result<u64, MappingError> {
    let mut seen = BTreeSet::new();
    for pu in &design.pus {
        let v = f(pu.per_iteration_ops).map_err(|detail| MappingError::ShapeMismatch { pu: pu.name.clone(), detail })?;
        seen.insert(v);
    }
    match seen.len() {
        0 => Err(MappingError::NoPus),
        1 => Ok(*seen.iter().next().unwrap()),
        _ => Err(MappingError::ShapeMismatch {
            pu: design.pus[0].name.clone(),
            detail: "PUs disagree on the subtask shape".into(),
        }),
    }
}

pub fn bind_workload(design: &DesignSpec, workload: &WorkloadSpec) -> Result<Mapping, MappingError> {
    workload.check().map_err(MappingError::Workload)?;
    if design.pus.is_empty() {
        return Err(MappingError::NoPus);
    }
    let ops = op_count(workload).ok();
    let tasks = workload.tasks();
    let mut bound = design.clone();
    let subtasks = match workload {
        WorkloadSpec::Mm { m, k, n, .. } => {
            let tile = uniform(design, |ops| {
                if ops % 2 != 0 {
                    return Err(format!("{ops} ops per iteration is not a 2*t^3 tile product"));
                }
                icbrt(ops / 2).ok_or_else(|| format!("{ops} ops per iteration is not a 2*t^3 tile product"))
            })?;
            iter_kernel(*m, *k, *n, tile)
        }
        WorkloadSpec::Filter2d { width, height, kernel_size, .. } => {
            let kk = 2 * kernel_size * kernel_size;
            let side = uniform(design, |ops| {
                if ops % kk != 0 {
                    return Err(format!("{ops} ops per iteration does not match a {kernel_size}x{kernel_size} filter"));
                }
                isqrt_exact(ops / kk).ok_or_else(|| format!("{ops} ops per iteration is not a square block for a {kernel_size}x{kernel_size} filter"))
            })?;
            width.div_ceil(side) * height.div_ceil(side)
        }
        WorkloadSpec::Fft { samples, dtype, transforms } => {
            let eb = dtype.element_bytes();
            let bytes = samples * eb;
            let per_core = fft_core_bytes(*samples, eb, FFT_BUFFER_MULTIPLIER, bound.pus.len() as u64);
            let ops = 5 * samples * samples.trailing_zeros() as u64;
            let mut kernels = BTreeSet::new();
            for pu in &mut bound.pus {
                pu.per_iteration_bytes_in = bytes;
                pu.per_iteration_bytes_out = bytes;
                pu.per_iteration_ops = ops;
                for pst in &pu.psts {
                    kernels.extend(pst.cc.kernels().into_iter().map(str::to_string));
                }
            }
            for name in kernels {
                if let Some(k) = bound.kernels.get_mut(&name) {
                    k.local_mem_bytes = per_core;
                }
            }
            for pair in design.pairs() {
                let n = pair.pus.len() as u64;
                let du = &mut bound.dus[pair.du];
                du.tpc.tb_bytes_in = n * bytes;
                du.tpc.tb_bytes_out = n * bytes;
                if du.ssc.sender_mode == SenderMode::Phd || du.ssc.receiver_mode == crate::model::ReceiverMode::Phd {
                    du.ssc.buffer_bytes = n * bytes;
                }
                du.onchip_buffer_bytes = du.tpc.tb_bytes_in + du.tpc.tb_bytes_out;
            }
            *transforms
        }
        WorkloadSpec::MmT { tasks, .. } => {
            let unit = 2 * MMT_TASK_SIDE.pow(3);
            let per_iter = uniform(design, |ops| {
                if ops == 0 || ops % unit != 0 {
                    Err(format!("{ops} ops per iteration is not a whole number of {MMT_TASK_SIDE}^3 products"))
                } else {
                    Ok(ops / unit)
                }
            })?;
            tasks.div_ceil(per_iter)
        }
    };
    Ok(Mapping { design: bound, subtasks, tasks, ops })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workloads::{template_design, App, TemplateParams};

    #[test]
    fn fft_memory_rule() {
        assert_eq!(fft_core_bytes(8192, 4, 2, 2), 33_792);
        assert_eq!(fft_core_bytes(8192, 4, 2, 4), 17_408);
        assert_eq!(fft_core_bytes(4096, 4, 2, 2), 17_408);
    }

    #[test]
    fn mm_tile_is_inferred() {
        let d = template_design(App::Mm, &TemplateParams::for_app(App::Mm)).unwrap();
        let m = bind_workload(&d, &WorkloadSpec::mm(768, 768, 768)).unwrap();
        assert_eq!(m.subtasks, 216);
        assert_eq!(m.ops, Some(2 * 768u64.pow(3)));
    }

    #[test]
    fn wrong_app_is_a_shape_mismatch() {
        let d = template_design(App::Mm, &TemplateParams::for_app(App::Mm)).unwrap();
        assert!(matches!(
            bind_workload(&d, &WorkloadSpec::filter2d(128, 128)),
            Err(MappingError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn filter2d_blocks() {
        let d = template_design(App::Filter2d, &TemplateParams::for_app(App::Filter2d)).unwrap();
        let m = bind_workload(&d, &WorkloadSpec::filter2d(3840, 2160)).unwrap();
        assert_eq!(m.subtasks, 120 * 68);
    }
}
