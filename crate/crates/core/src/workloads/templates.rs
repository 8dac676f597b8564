use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use super::mapping::fft_core_bytes;
use crate::config::ConfigDocument;
use crate::model::pu::chunk_sizes;
use crate::model::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum App {
    #[serde(rename = "MM")]
    Mm,
    #[serde(rename = "Filter2D")]
    Filter2d,
    #[serde(rename = "FFT")]
    Fft,
    #[serde(rename = "MM-T")]
    MmT,
}

impl App {
    pub const ALL: [App; 4] = [App::Mm, App::Filter2d, App::Fft, App::MmT];

    pub fn as_str(self) -> &'static str {
        match self {
            App::Mm => "MM",
            App::Filter2d => "Filter2D",
            App::Fft => "FFT",
            App::MmT => "MM-T",
        }
    }

    /// File-name friendly identifier.
    pub fn slug(self) -> &'static str {
        match self {
            App::Mm => "mm",
            App::Filter2d => "filter2d",
            App::Fft => "fft",
            App::MmT => "mmt",
        }
    }
}

impl fmt::Display for App {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown application '{0}'; expected MM, Filter2D, FFT or MM-T")]
pub struct UnknownApp(pub String);

impl FromStr for App {
    type Err = UnknownApp;
    fn from_str(s: &str) -> Result<Self, UnknownApp> {
        let norm: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        match norm.as_str() {
            "mm" => Ok(App::Mm),
            "filter2d" => Ok(App::Filter2d),
            "fft" => Ok(App::Fft),
            "mmt" => Ok(App::MmT),
            _ => Err(UnknownApp(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorkloadError {
    #[error(transparent)]
    UnknownApp(#[from] UnknownApp),
    #[error("invalid template parameter: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TemplateParams {
    pub pu_count: u32,
    pub du_count: u32,
    pub kernel_tile: u64,
    pub pu_tile: u64,
    pub block_side: u64,
    pub filter_kernel: u64,
    pub butterfly_cores: u32,
    pub buffer_multiplier: u64,
    pub fft_samples: u64,
}

impl Default for TemplateParams {
    fn default() -> Self {
        TemplateParams::for_app(App::Mm)
    }
}

impl TemplateParams {
    pub fn for_app(app: App) -> Self {
        let base = TemplateParams {
            pu_count: 6,
            du_count: 1,
            kernel_tile: 32,
            pu_tile: 128,
            block_side: 32,
            filter_kernel: 5,
            butterfly_cores: 4,
            buffer_multiplier: 2,
            fft_samples: 8192,
        };
        match app {
            App::Mm => base,
            App::Filter2d => TemplateParams { pu_count: 44, du_count: 11, ..base },
            App::Fft => TemplateParams { pu_count: 8, du_count: 8, ..base },
            App::MmT => TemplateParams { pu_count: 50, du_count: 50, ..base },
        }
    }

    fn check(&self, app: App) -> Result<(), WorkloadError> {
        let bad = |m: String| Err(WorkloadError::InvalidParams(m));
        if self.pu_count == 0 || self.du_count == 0 {
            return bad("pu_count and du_count must be positive".into());
        }
        if self.du_count > self.pu_count {
            return bad(format!("{} DUs cannot each serve one of {} PUs", self.du_count, self.pu_count));
        }
        match app {
            App::Mm => {
                if self.kernel_tile == 0 || self.pu_tile == 0 || self.pu_tile % self.kernel_tile != 0 || self.pu_tile / self.kernel_tile < 2 {
                    return bad("pu_tile must be a multiple (at least 2x) of kernel_tile".into());
                }
            }
            App::Filter2d => {
                if self.block_side == 0 || self.filter_kernel == 0 || self.block_side % 8 != 0 {
                    return bad("block_side must be a positive multiple of 8 and filter_kernel positive".into());
                }
            }
            App::Fft => {
                if self.butterfly_cores < 4 || !self.butterfly_cores.is_power_of_two() {
                    return bad("butterfly_cores must be a power of two of at least 4".into());
                }
                if !self.fft_samples.is_power_of_two() || self.fft_samples < 2 {
                    return bad(format!("fft_samples {} is not a power of two", self.fft_samples));
                }
            }
            App::MmT => {
                if self.du_count != self.pu_count {
                    return bad("MM-T pairs every PU with its own DU".into());
                }
            }
        }
        Ok(())
    }
}

fn kernel(name: &str, source: &str, mem: u64, inp: PortCounts, out: PortCounts) -> (String, KernelSpec) {
    (
        name.to_string(),
        KernelSpec {
            name: name.to_string(),
            source_ref: source.to_string(),
            cycles_per_invocation: 0,
            local_mem_bytes: mem,
            in_ports: inp,
            out_ports: out,
        },
    )
}

fn ports(stream: u32, cascade: u32) -> PortCounts {
    PortCounts { stream, cascade, dma_buffer: 0 }
}

fn du(name: String, amc: Option<AmcSpec>, tpc: TpcSpec, ssc: SscSpec) -> DuSpec {
    let onchip = tpc.tb_bytes_in + tpc.tb_bytes_out;
    DuSpec { name, amc, tpc, ssc, onchip_buffer_bytes: onchip }
}

fn cup(tb_in: u64, tb_out: u64, iterations_per_tb: u32) -> TpcSpec {
    TpcSpec {
        mode: TpcMode::Cup,
        tb_bytes_in: tb_in,
        tb_bytes_out: tb_out,
        tev_per_pu_iteration: 1,
        chl_repeat_count: 1,
        iterations_per_tb,
    }
}

fn phd(buffer: u64) -> SscSpec {
    SscSpec { sender_mode: SenderMode::Phd, receiver_mode: ReceiverMode::Phd, buffer_bytes: buffer }
}

/// Builds `p.pu_count` copies of `pu` split over `p.du_count` DUs; `make_du`
/// receives the DU index and how many PUs it serves.
fn assemble(
    name: &str,
    kernels: Vec<(String, KernelSpec)>,
    p: &TemplateParams,
    pu: impl Fn(usize) -> PuSpec,
    make_du: impl Fn(usize, u64) -> DuSpec,
) -> DesignSpec {
    let pus: Vec<PuSpec> = (0..p.pu_count as usize).map(pu).collect();
    let mut dus = Vec::new();
    let mut pairings = BTreeMap::new();
    let mut next = 0;
    for (d, n) in chunk_sizes(pus.len(), p.du_count as usize).into_iter().enumerate() {
        let d_spec = make_du(d, n as u64);
        pairings.insert(d_spec.name.clone(), pus[next..next + n].iter().map(|p| p.name.clone()).collect());
        dus.push(d_spec);
        next += n;
    }
    DesignSpec {
        name: name.to_string(),
        kernels: kernels.into_iter().collect(),
        pus,
        dus,
        pairings,
        platform_override: None,
    }
}

fn mm(p: &TemplateParams) -> DesignSpec {
    let r = (p.pu_tile / p.kernel_tile) as u32;
    let elem = 4u64;
    let kt = p.kernel_tile;
    let tile_bytes = p.pu_tile * p.pu_tile * elem;
    let kernels = vec![kernel(
        "mm_float",
        &format!("kernels/mm/mm_float_{kt}x{kt}x{kt}.cc"),
        3 * kt * kt * elem * 2,
        ports(2, 1),
        ports(1, 1),
    )];
    let cores = r * r * r;
    let pu = |i: usize| {
        let mut a = DacSpec::new(DacMode::SwhBdc, r, CoreSelector::All);
        a.reuse_factor = r;
        let mut b = a.clone();
        b.input_port = 1;
        PuSpec {
            name: format!("pu{i}"),
            psts: vec![PstSpec {
                dacs: vec![a, b],
                cc: CcTopology::Parallel {
                    groups: r * r,
                    inner: Box::new(CcTopology::Cascade { stages: r, kernel: "mm_float".into() }),
                },
                dccs: vec![DccSpec::new(DccMode::Swh, r, CoreSelector::range(r - 1, cores, r))],
            }],
            per_iteration_bytes_in: 2 * tile_bytes,
            per_iteration_bytes_out: tile_bytes,
            per_iteration_ops: 2 * p.pu_tile.pow(3),
        }
    };
    let make_du = |d: usize, n: u64| {
        du(
            format!("du{d}"),
            Some(AmcSpec { mode: AmcMode::Jub, burst_size: p.pu_tile as u32, element_bytes: elem as u32, ports: 4 }),
            cup(n * 9 * tile_bytes / 2, n * tile_bytes, 9),
            phd(n * 2 * tile_bytes),
        )
    };
    assemble("mm", kernels, p, pu, make_du)
}

fn filter2d(p: &TemplateParams) -> DesignSpec {
    let elem = 4u64;
    let b = p.block_side;
    let halo = b + p.filter_kernel - 1;
    let rows = b / 8;
    let mem = (halo * (rows + p.filter_kernel - 1) * elem + b * rows * elem) * 2;
    let kernels = vec![kernel("filter2d_i32", &format!("kernels/filter2d/filter2d_{}x{}.cc", p.filter_kernel, p.filter_kernel), mem, ports(1, 0), ports(1, 0))];
    let bytes_in = halo * halo * elem;
    let bytes_out = b * b * elem;
    let pu = |i: usize| PuSpec {
        name: format!("pu{i}"),
        psts: vec![PstSpec {
            dacs: vec![DacSpec::new(DacMode::Swh, 1, CoreSelector::All)],
            cc: CcTopology::Parallel { groups: 8, inner: Box::new(CcTopology::Single { kernel: "filter2d_i32".into() }) },
            dccs: vec![DccSpec::new(DccMode::Swh, 1, CoreSelector::All)],
        }],
        per_iteration_bytes_in: bytes_in,
        per_iteration_bytes_out: bytes_out,
        per_iteration_ops: 2 * b * b * p.filter_kernel * p.filter_kernel,
    };
    let make_du = |d: usize, n: u64| {
        du(
            format!("du{d}"),
            Some(AmcSpec { mode: AmcMode::Jub, burst_size: halo as u32, element_bytes: elem as u32, ports: 1 }),
            cup(n * bytes_in, n * bytes_out, 1),
            phd(n * bytes_in),
        )
    };
    assemble("filter2d", kernels, p, pu, make_du)
}

fn fft(p: &TemplateParams) -> DesignSpec {
    let elem = 4u64;
    let n = p.fft_samples;
    let mem = fft_core_bytes(n, elem, p.buffer_multiplier, p.pu_count as u64);
    let bc = p.butterfly_cores;
    let w = bc / 2;
    let kernels = vec![
        kernel("fft_bfly0", "kernels/fft/fft_butterfly_stage0.cc", mem, ports(1, 0), ports(1, 0)),
        kernel("fft_bfly1", "kernels/fft/fft_butterfly_stage1.cc", mem, ports(2, 0), ports(1, 0)),
        kernel("fft_stage", "kernels/fft/fft_radix2_stage.cc", mem, ports(0, 1), ports(0, 1)),
    ];
    let ops = 5 * n * n.trailing_zeros() as u64;
    let pu = |i: usize| {
        let mut bdc = DacSpec::new(DacMode::Bdc, 1, CoreSelector::range(0, w, 1));
        bdc.reuse_factor = w;
        PuSpec {
            name: format!("pu{i}"),
            psts: vec![
                PstSpec {
                    dacs: vec![bdc],
                    cc: CcTopology::Butterfly { cores: bc, stage_kernels: vec!["fft_bfly0".into(), "fft_bfly1".into()] },
                    dccs: (0..w).map(|j| DccSpec::new(DccMode::Dir, 1, CoreSelector::single(w + j))).collect(),
                },
                PstSpec {
                    dacs: (0..w).map(|j| DacSpec::new(DacMode::Dir, 1, CoreSelector::single(3 * j))).collect(),
                    cc: CcTopology::Parallel { groups: w, inner: Box::new(CcTopology::Cascade { stages: 3, kernel: "fft_stage".into() }) },
                    dccs: (0..w).map(|j| DccSpec::new(DccMode::Dir, 1, CoreSelector::single(3 * j + 2))).collect(),
                },
            ],
            per_iteration_bytes_in: n * elem,
            per_iteration_bytes_out: n * elem,
            per_iteration_ops: ops,
        }
    };
    let make_du = |d: usize, count: u64| {
        du(
            format!("du{d}"),
            Some(AmcSpec { mode: AmcMode::Csb, burst_size: 1, element_bytes: elem as u32, ports: 1 }),
            cup(count * n * elem, count * n * elem, 1),
            phd(count * n * elem),
        )
    };
    assemble("fft", kernels, p, pu, make_du)
}

fn mmt(p: &TemplateParams) -> DesignSpec {
    let side = super::MMT_TASK_SIDE;
    let elem = 4u64;
    let kernels = vec![kernel("mmt_float", "kernels/mm/mm_float_32x32x32_cascade.cc", 3 * side * side * elem * 2, ports(0, 1), ports(0, 1))];
    let stages = 8u32;
    let pu = |i: usize| PuSpec {
        name: format!("pu{i}"),
        psts: vec![PstSpec {
            dacs: vec![DacSpec::new(DacMode::Dir, 1, CoreSelector::single(0))],
            cc: CcTopology::Cascade { stages, kernel: "mmt_float".into() },
            dccs: vec![DccSpec::new(DccMode::Dir, 1, CoreSelector::single(stages - 1))],
        }],
        per_iteration_bytes_in: 0,
        per_iteration_bytes_out: 0,
        per_iteration_ops: stages as u64 * 2 * side.pow(3),
    };
    let make_du = |d: usize, n: u64| {
        du(
            format!("du{d}"),
            None,
            TpcSpec {
                mode: TpcMode::Chl,
                tb_bytes_in: n * 2 * side * side * elem,
                tb_bytes_out: n * side * side * elem,
                tev_per_pu_iteration: 1,
                chl_repeat_count: 1,
                iterations_per_tb: 1,
            },
            SscSpec { sender_mode: SenderMode::Thr, receiver_mode: ReceiverMode::Thr, buffer_bytes: 0 },
        )
    };
    assemble("mmt", kernels, p, pu, make_du)
}

/// Reference design for an application.
pub fn template_design(app: App, params: &TemplateParams) -> Result<DesignSpec, WorkloadError> {
    params.check(app)?;
    Ok(match app {
        App::Mm => mm(params),
        App::Filter2d => filter2d(params),
        App::Fft => fft(params),
        App::MmT => mmt(params),
    })
}

/// Reference design wrapped in a document tagged with its application.
pub fn template_document(app: App, params: &TemplateParams) -> Result<ConfigDocument, WorkloadError> {
    let mut doc = ConfigDocument::new(template_design(app, params)?);
    doc.metadata.insert("app".into(), Value::String(app.as_str().into()));
    Ok(doc)
}
