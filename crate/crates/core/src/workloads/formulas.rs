use thiserror::Error;

use super::{TemplateParams, WorkloadSpec};

/// Side of the independent matrix products in the MM-T workload.
pub const MMT_TASK_SIDE: u64 = 32;

/// Kernel invocations to cover an `M x K x N` product with `tile`-sided tiles.
pub fn iter_kernel(m: u64, k: u64, n: u64, tile: u64) -> u64 {
    m.div_ceil(tile) * k.div_ceil(tile) * n.div_ceil(tile)
}

/// Engine iterations when `n_pu` PUs share the `pu_tile` grid.
pub fn iter_engine(m: u64, k: u64, n: u64, pu_tile: u64, n_pu: u64) -> u64 {
    iter_kernel(m, k, n, pu_tile).div_ceil(n_pu)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("op count is not reported for {0} workloads")]
pub struct UnsupportedMetric(pub &'static str);

pub fn op_count(w: &WorkloadSpec) -> Result<u64, UnsupportedMetric> {
    match w {
        WorkloadSpec::Mm { m, k, n, .. } => Ok(2 * m * k * n),
        WorkloadSpec::Filter2d { width, height, kernel_size, .. } => Ok(2 * width * height * kernel_size * kernel_size),
        WorkloadSpec::MmT { tasks, .. } => Ok(2 * MMT_TASK_SIDE.pow(3) * tasks),
        WorkloadSpec::Fft { .. } => Err(UnsupportedMetric("FFT")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subtasks {
    Finite(u64),
    /// Streaming workloads with no natural end.
    Unbounded,
}

pub fn subtask_count(w: &WorkloadSpec, params: &TemplateParams) -> Subtasks {
    match w {
        WorkloadSpec::Mm { m, k, n, .. } => Subtasks::Finite(iter_kernel(*m, *k, *n, params.pu_tile)),
        WorkloadSpec::Filter2d { width, height, .. } => {
            Subtasks::Finite(width.div_ceil(params.block_side) * height.div_ceil(params.block_side))
        }
        WorkloadSpec::Fft { .. } | WorkloadSpec::MmT { .. } => Subtasks::Unbounded,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workloads::App;

    #[test]
    fn mm_iterations() {
        assert_eq!(iter_kernel(768, 768, 768, 32), 13824);
        assert_eq!(iter_engine(768, 768, 768, 128, 6), 36);
        assert_eq!(iter_kernel(33, 1, 1, 32), 2);
    }

    #[test]
    fn op_counts() {
        assert_eq!(op_count(&WorkloadSpec::mm(768, 768, 768)), Ok(905_969_664));
        assert_eq!(op_count(&WorkloadSpec::filter2d(128, 128)), Ok(819_200));
        assert!(op_count(&WorkloadSpec::fft(1024)).is_err());
    }

    #[test]
    fn subtasks() {
        let p = TemplateParams::for_app(App::Filter2d);
        assert_eq!(subtask_count(&WorkloadSpec::filter2d(128, 128), &p), Subtasks::Finite(16));
        let p = TemplateParams::for_app(App::Mm);
        assert_eq!(subtask_count(&WorkloadSpec::mm(768, 768, 768), &p), Subtasks::Finite(216));
        assert_eq!(subtask_count(&WorkloadSpec::fft(512), &p), Subtasks::Unbounded);
    }
}
