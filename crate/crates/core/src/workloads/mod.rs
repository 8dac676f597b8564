//! Reference applications: workload descriptions, iteration and op-count
//! formulas, design templates and workload binding.

mod formulas;
mod mapping;
mod templates;

pub use formulas::{iter_engine, iter_kernel, op_count, subtask_count, Subtasks, UnsupportedMetric, MMT_TASK_SIDE};
pub use mapping::{bind_workload, fft_core_bytes, Mapping, MappingError, FFT_STACK_RESERVE_BYTES};
pub use templates::{template_design, template_document, App, TemplateParams, UnknownApp, WorkloadError};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    Float,
    Int32,
    Cint16,
}

impl Dtype {
    pub fn element_bytes(self) -> u64 {
        4
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Dtype::Float => "float",
            Dtype::Int32 => "int32",
            Dtype::Cint16 => "cint16",
        }
    }
}

impl std::str::FromStr for Dtype {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "float" | "fp32" => Ok(Dtype::Float),
            "int32" => Ok(Dtype::Int32),
            "cint16" => Ok(Dtype::Cint16),
            other => Err(format!("unknown dtype '{other}'")),
        }
    }
}

fn default_transforms() -> u64 {
    4096
}

fn default_mmt_tasks() -> u64 {
    400_000
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "app")]
pub enum WorkloadSpec {
    #[serde(rename = "MM")]
    Mm { m: u64, k: u64, n: u64, dtype: Dtype },
    #[serde(rename = "Filter2D")]
    Filter2d { width: u64, height: u64, kernel_size: u64, dtype: Dtype },
    #[serde(rename = "FFT")]
    Fft {
        samples: u64,
        dtype: Dtype,
        #[serde(default = "default_transforms")]
        transforms: u64,
    },
    #[serde(rename = "MM-T")]
    MmT {
        #[serde(default = "default_mmt_tasks")]
        tasks: u64,
        dtype: Dtype,
    },
}

impl WorkloadSpec {
    pub fn app(&self) -> App {
        match self {
            WorkloadSpec::Mm { .. } => App::Mm,
            WorkloadSpec::Filter2d { .. } => App::Filter2d,
            WorkloadSpec::Fft { .. } => App::Fft,
            WorkloadSpec::MmT { .. } => App::MmT,
        }
    }

    pub fn dtype(&self) -> Dtype {
        match self {
            WorkloadSpec::Mm { dtype, .. }
            | WorkloadSpec::Filter2d { dtype, .. }
            | WorkloadSpec::Fft { dtype, .. }
            | WorkloadSpec::MmT { dtype, .. } => *dtype,
        }
    }

    /// Independent problem instances the workload represents.
    pub fn tasks(&self) -> u64 {
        match self {
            WorkloadSpec::Mm { .. } | WorkloadSpec::Filter2d { .. } => 1,
            WorkloadSpec::Fft { transforms, .. } => *transforms,
            WorkloadSpec::MmT { tasks, .. } => *tasks,
        }
    }

    pub fn mm(m: u64, k: u64, n: u64) -> Self {
        WorkloadSpec::Mm { m, k, n, dtype: Dtype::Float }
    }

    pub fn filter2d(width: u64, height: u64) -> Self {
        WorkloadSpec::Filter2d { width, height, kernel_size: 5, dtype: Dtype::Int32 }
    }

    pub fn fft(samples: u64) -> Self {
        WorkloadSpec::Fft { samples, dtype: Dtype::Cint16, transforms: default_transforms() }
    }

    pub fn mmt(tasks: u64) -> Self {
        WorkloadSpec::MmT { tasks, dtype: Dtype::Float }
    }

    /// Parses the CLI size shorthand for an application: `M[xKxN]` for MM,
    /// `WxH[:k]` for Filter2D, a sample count for FFT and a task count for MM-T.
    pub fn from_size(app: App, size: &str) -> Result<Self, String> {
        let (size, ksize) = match size.split_once(':') {
            Some((s, k)) if app == App::Filter2d => {
                (s, Some(k.trim().parse::<u64>().map_err(|_| format!("cannot parse filter size '{k}'"))?))
            }
            _ => (size, None),
        };
        let nums: Result<Vec<u64>, _> = size.split(['x', 'X']).map(|p| p.trim().parse::<u64>()).collect();
        let nums = nums.map_err(|_| format!("cannot parse size '{size}'"))?;
        let w = match (app, nums.as_slice()) {
            (App::Mm, [s]) => WorkloadSpec::mm(*s, *s, *s),
            (App::Mm, [m, k, n]) => WorkloadSpec::mm(*m, *k, *n),
            (App::Filter2d, [s]) => WorkloadSpec::filter2d(*s, *s),
            (App::Filter2d, [w, h]) => WorkloadSpec::filter2d(*w, *h),
            (App::Fft, [s]) => WorkloadSpec::fft(*s),
            (App::MmT, [t]) => WorkloadSpec::mmt(*t),
            _ => return Err(format!("size '{size}' does not fit a {} workload", app.as_str())),
        };
        Ok(match (w, ksize) {
            (WorkloadSpec::Filter2d { width, height, dtype, .. }, Some(kernel_size)) => {
                WorkloadSpec::Filter2d { width, height, kernel_size, dtype }
            }
            (w, _) => w,
        })
    }

    pub fn check(&self) -> Result<(), String> {
        let positive = |name: &str, v: u64| if v == 0 { Err(format!("{name} must be positive")) } else { Ok(()) };
        match self {
            WorkloadSpec::Mm { m, k, n, .. } => {
                positive("m", *m)?;
                positive("k", *k)?;
                positive("n", *n)
            }
            WorkloadSpec::Filter2d { width, height, kernel_size, .. } => {
                positive("width", *width)?;
                positive("height", *height)?;
                positive("kernel_size", *kernel_size)
            }
            WorkloadSpec::Fft { samples, transforms, .. } => {
                if !samples.is_power_of_two() || *samples < 2 {
                    return Err(format!("FFT size {samples} is not a power of two"));
                }
                positive("transforms", *transforms)
            }
            WorkloadSpec::MmT { tasks, .. } => positive("tasks", *tasks),
        }
    }
}
