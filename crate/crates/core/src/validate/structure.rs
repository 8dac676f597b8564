use std::collections::{BTreeMap, BTreeSet};

use crate::diag::{Code, Diagnostic};
use crate::model::pu::{chunk_sizes, SelectorError};
use crate::model::topology::{LayoutError, MAX_PARALLEL_DEPTH};
use crate::model::*;

struct Rules<'a> {
    design: &'a DesignSpec,
    diags: Vec<Diagnostic>,
}

impl Rules<'_> {
    fn err(&mut self, code: Code, loc: impl Into<String>, msg: impl Into<String>) {
        self.diags.push(Diagnostic::error(code, loc, msg));
    }

    fn names(&mut self) {
        let mut seen = BTreeSet::new();
        for (i, pu) in self.design.pus.iter().enumerate() {
            if !seen.insert(pu.name.as_str()) {
                self.err(Code::DuplicateName, format!("pus[{i}].name"), format!("PU name '{}' is used twice", pu.name));
            }
        }
        let mut seen = BTreeSet::new();
        for (i, du) in self.design.dus.iter().enumerate() {
            if !seen.insert(du.name.as_str()) {
                self.err(Code::DuplicateName, format!("dus[{i}].name"), format!("DU name '{}' is used twice", du.name));
            }
        }
    }

    fn kernels(&mut self) {
        for (name, k) in &self.design.kernels {
            if k.in_ports.cascade > 1 || k.out_ports.cascade > 1 {
                self.err(
                    Code::KernelCascadePorts,
                    format!("kernels.{name}"),
                    "a kernel has at most one cascade input and one cascade output",
                );
            }
        }
        let used: BTreeSet<&str> = self
            .design
            .pus
            .iter()
            .flat_map(|p| &p.psts)
            .flat_map(|pst| {
                let mut v = pst.cc.kernels();
                v.extend(pst.dacs.iter().filter_map(|d| d.dca_kernel.as_deref()));
                v.extend(pst.dccs.iter().filter_map(|d| d.dca_kernel.as_deref()));
                v
            })
            .collect();
        for name in self.design.kernels.keys() {
            if !used.contains(name.as_str()) {
                self.diags.push(Diagnostic::warning(
                    Code::UnusedKernel,
                    format!("kernels.{name}"),
                    format!("kernel '{name}' is not used by any PU"),
                ));
            }
        }
    }

    fn cascade_kernels(&mut self, cc: &CcTopology, loc: &str) {
        match cc {
            CcTopology::Cascade { kernel, .. } => {
                if let Some(k) = self.design.kernels.get(kernel) {
                    if k.in_ports.cascade == 0 || k.out_ports.cascade == 0 {
                        self.err(
                            Code::CascadeNotLinear,
                            loc,
                            format!("kernel '{kernel}' needs one cascade input and one cascade output to form a chain"),
                        );
                    }
                }
            }
            CcTopology::Parallel { inner, .. } => self.cascade_kernels(inner, loc),
            _ => {}
        }
    }

    fn selector(&mut self, sel: &CoreSelector, cores: u32, loc: &str) -> Option<Vec<u32>> {
        match sel.resolve(cores) {
            Ok(v) => Some(v),
            Err(e) => {
                let code = match e {
                    SelectorError::OutOfRange { .. } => Code::SelectorOutOfRange,
                    SelectorError::Empty => Code::SelectorEmpty,
                    SelectorError::Duplicate(_) => Code::SelectorDuplicate,
                    SelectorError::Syntax(_) => Code::InvalidValue,
                };
                self.err(code, format!("{loc}.serves"), e.to_string());
                None
            }
        }
    }

    fn dca_kernel(&mut self, is_dca: bool, kernel: &Option<String>, loc: &str) {
        match (is_dca, kernel) {
            (true, None) => self.err(Code::DcaKernelMissing, loc, "DCA requires 'dca_kernel'"),
            (true, Some(k)) if !self.design.kernels.contains_key(k) => {
                self.err(Code::UnknownKernel, format!("{loc}.dca_kernel"), format!("kernel '{k}' is not declared"))
            }
            (false, Some(_)) => self.err(Code::DcaKernelUnexpected, format!("{loc}.dca_kernel"), "only DCA connectors take a kernel"),
            _ => {}
        }
    }

    /// Checks the port split shared by BDC, SWH and SWH+BDC.
    fn split(&mut self, n: usize, ports: u32, loc: &str, even: bool) -> Option<usize> {
        let p = ports as usize;
        if p > n {
            self.err(Code::PlioSplitUneven, loc, format!("{p} PLIO ports for {n} cores leaves ports idle"));
            return None;
        }
        if even && n % p != 0 {
            self.err(Code::PlioSplitUneven, loc, format!("{n} cores do not split evenly over {p} PLIO ports"));
            return None;
        }
        chunk_sizes(n, p).into_iter().max()
    }

    fn pst(&mut self, i: usize, j: usize, pst: &PstSpec) {
        let loc = format!("pus[{i}].psts[{j}]");
        let cc_loc = format!("{loc}.cc");
        let mut missing = false;
        for k in pst.cc.kernels() {
            if !self.design.kernels.contains_key(k) {
                self.err(Code::UnknownKernel, &cc_loc, format!("kernel '{k}' is not declared"));
                missing = true;
            }
        }
        if pst.cc.parallel_depth() > MAX_PARALLEL_DEPTH {
            self.err(
                Code::ParallelDepth,
                &cc_loc,
                format!("Parallel nesting depth {} exceeds {MAX_PARALLEL_DEPTH}", pst.cc.parallel_depth()),
            );
        }
        self.cascade_kernels(&pst.cc, &cc_loc);
        let layout = if missing {
            None
        } else {
            match pst.cc.layout(&self.design.kernels) {
                Ok(l) => Some(l),
                Err(LayoutError::Arity(m)) => {
                    self.err(Code::TopologyArity, &cc_loc, m);
                    None
                }
                Err(LayoutError::UnknownKernel(k)) => {
                    self.err(Code::UnknownKernel, &cc_loc, format!("kernel '{k}' is not declared"));
                    None
                }
            }
        };
        let cores = pst.cc.core_count().min(u32::MAX as u64) as u32;

        let mut in_cover: BTreeMap<(u32, u32), u32> = BTreeMap::new();
        for (k, dac) in pst.dacs.iter().enumerate() {
            let dloc = format!("{loc}.dacs[{k}]");
            self.dca_kernel(dac.mode == DacMode::Dca, &dac.dca_kernel, &dloc);
            if dac.plio_ports == 0 {
                self.err(Code::InvalidValue, format!("{dloc}.plio_ports"), "a connector needs at least one PLIO port");
                continue;
            }
            let Some(served) = self.selector(&dac.served, cores, &dloc) else { continue };
            let n = served.len();
            match dac.mode {
                DacMode::Dir => {
                    if n != 1 || dac.plio_ports != 1 {
                        self.err(Code::DirMultiCore, &dloc, format!("DIR links one port to one core; it serves {n} cores over {} ports", dac.plio_ports));
                    }
                }
                DacMode::Bdc => {
                    if let Some(chunk) = self.split(n, dac.plio_ports, &dloc, true) {
                        if dac.reuse_factor as usize != chunk {
                            self.err(
                                Code::ReuseFactorMismatch,
                                format!("{dloc}.reuse_factor"),
                                format!("BDC sends each port to {chunk} cores, so reuse_factor must be {chunk}"),
                            );
                        }
                    }
                }
                DacMode::Swh => {
                    self.split(n, dac.plio_ports, &dloc, false);
                    if dac.reuse_factor != 1 {
                        self.err(Code::ReuseFactorMismatch, format!("{dloc}.reuse_factor"), "SWH delivers each packet to one core; reuse_factor must be 1");
                    }
                }
                DacMode::SwhBdc => {
                    if let Some(chunk) = self.split(n, dac.plio_ports, &dloc, true) {
                        if dac.reuse_factor == 0 || chunk % dac.reuse_factor as usize != 0 {
                            self.err(
                                Code::ReuseFactorMismatch,
                                format!("{dloc}.reuse_factor"),
                                format!("reuse_factor must divide the {chunk} cores behind each port"),
                            );
                        }
                    }
                }
                DacMode::Dca => {}
            }
            if !matches!(dac.mode, DacMode::Bdc | DacMode::SwhBdc | DacMode::Swh) && dac.reuse_factor != 1 {
                self.err(Code::ReuseFactorMismatch, format!("{dloc}.reuse_factor"), format!("{} does not reuse data; reuse_factor must be 1", dac.mode.as_str()));
            }
            if let Some(layout) = &layout {
                for &c in &served {
                    let slot = &layout.cores[c as usize];
                    if dac.input_port >= slot.ext_in {
                        self.err(
                            Code::SelectorNoPort,
                            &dloc,
                            format!("core {c} has {} external inputs; input_port {} does not exist", slot.ext_in, dac.input_port),
                        );
                    } else {
                        *in_cover.entry((c, dac.input_port)).or_default() += 1;
                    }
                }
            }
        }

        let mut out_cover: BTreeMap<(u32, u32), u32> = BTreeMap::new();
        for (k, dcc) in pst.dccs.iter().enumerate() {
            let dloc = format!("{loc}.dccs[{k}]");
            self.dca_kernel(dcc.mode == DccMode::Dca, &dcc.dca_kernel, &dloc);
            if dcc.plio_ports == 0 {
                self.err(Code::InvalidValue, format!("{dloc}.plio_ports"), "a connector needs at least one PLIO port");
                continue;
            }
            let Some(served) = self.selector(&dcc.served, cores, &dloc) else { continue };
            let n = served.len();
            match dcc.mode {
                DccMode::Dir => {
                    if n != 1 || dcc.plio_ports != 1 {
                        self.err(Code::DirMultiCore, &dloc, format!("DIR links one core to one port; it serves {n} cores over {} ports", dcc.plio_ports));
                    }
                }
                DccMode::Swh => {
                    self.split(n, dcc.plio_ports, &dloc, false);
                }
                DccMode::Dca => {}
            }
            if let Some(layout) = &layout {
                for &c in &served {
                    let slot = &layout.cores[c as usize];
                    if dcc.output_port >= slot.ext_out {
                        self.err(
                            Code::SelectorNoPort,
                            &dloc,
                            format!("core {c} has {} external outputs; output_port {} does not exist", slot.ext_out, dcc.output_port),
                        );
                    } else {
                        *out_cover.entry((c, dcc.output_port)).or_default() += 1;
                    }
                }
            }
        }

        if let Some(layout) = &layout {
            for slot in &layout.cores {
                for p in 0..slot.ext_in {
                    match in_cover.get(&(slot.index, p)).copied().unwrap_or(0) {
                        0 => self.err(Code::PortUncovered, &loc, format!("input {p} of core {} is not fed by any DAC", slot.index)),
                        1 => {}
                        n => self.err(Code::PortMultiCovered, &loc, format!("input {p} of core {} is fed by {n} DACs", slot.index)),
                    }
                }
                for p in 0..slot.ext_out {
                    match out_cover.get(&(slot.index, p)).copied().unwrap_or(0) {
                        0 => self.err(Code::PortUncovered, &loc, format!("output {p} of core {} is not collected by any DCC", slot.index)),
                        1 => {}
                        n => self.err(Code::PortMultiCovered, &loc, format!("output {p} of core {} is collected by {n} DCCs", slot.index)),
                    }
                }
            }
        }
    }

    fn pus(&mut self) {
        for (i, pu) in self.design.pus.iter().enumerate() {
            if pu.psts.is_empty() {
                self.err(Code::EmptyPu, format!("pus[{i}].psts"), "a PU needs at least one PST");
                continue;
            }
            for (j, pst) in pu.psts.iter().enumerate() {
                self.pst(i, j, pst);
                if j > 0 {
                    let prev = pu.psts[j - 1].fan_out();
                    let next = pst.fan_in();
                    if prev != next {
                        self.err(
                            Code::PstChainArity,
                            format!("pus[{i}].psts[{j}]"),
                            format!("previous PST emits {prev} channels but this PST's DACs take {next}"),
                        );
                    }
                }
            }
        }
    }

    fn dus(&mut self) {
        for (d, du) in self.design.dus.iter().enumerate() {
            let loc = format!("dus[{d}]");
            let served: Vec<&PuSpec> = self
                .design
                .pairings
                .get(&du.name)
                .map(|names| names.iter().filter_map(|n| self.design.pus.iter().find(|p| &p.name == n)).collect())
                .unwrap_or_default();
            match &du.amc {
                None if matches!(du.tpc.mode, TpcMode::Cup | TpcMode::Thr) => self.err(
                    Code::AmcRequired,
                    format!("{loc}.amc"),
                    format!("TPC mode {} reads DDR and needs an AMC", du.tpc.mode.as_str()),
                ),
                Some(a) => {
                    for (field, v) in [("burst_size", a.burst_size), ("element_bytes", a.element_bytes), ("ports", a.ports)] {
                        if v == 0 {
                            self.err(Code::InvalidValue, format!("{loc}.amc.{field}"), format!("{field} must be positive"));
                        }
                    }
                }
                None => {}
            }
            for (field, v) in [("tev_per_pu_iteration", du.tpc.tev_per_pu_iteration), ("iterations_per_tb", du.tpc.iterations_per_tb)] {
                if v == 0 {
                    self.err(Code::InvalidValue, format!("{loc}.tpc.{field}"), format!("{field} must be positive"));
                }
            }
            if du.tpc.mode == TpcMode::Thr && (du.tpc.tb_bytes_in != 0 || du.tpc.tb_bytes_out != 0 || du.ssc.buffer_bytes != 0) {
                self.err(Code::TpcThrBuffer, format!("{loc}.tpc"), "THR streams through without buffering; TB and SSC buffer sizes must be 0");
            }
            let tb = du.tpc.tb_bytes_in + du.tpc.tb_bytes_out;
            if du.onchip_buffer_bytes < tb {
                self.err(
                    Code::DuBuffer,
                    format!("{loc}.onchip_buffer_bytes"),
                    format!("{} bytes cannot hold the {tb}-byte task blocks", du.onchip_buffer_bytes),
                );
            }
            let phd_send = du.ssc.sender_mode == SenderMode::Phd;
            let phd_recv = du.ssc.receiver_mode == ReceiverMode::Phd;
            if phd_send || phd_recv {
                let need_in: u64 = if phd_send { served.iter().map(|p| p.per_iteration_bytes_in).sum() } else { 0 };
                let need_out: u64 = if phd_recv { served.iter().map(|p| p.per_iteration_bytes_out).sum() } else { 0 };
                let need = need_in.max(need_out).max(1);
                if du.ssc.buffer_bytes < need {
                    self.err(
                        Code::PhdBuffer,
                        format!("{loc}.ssc.buffer_bytes"),
                        format!("PHD stages one iteration for every PU and needs {need} bytes, has {}", du.ssc.buffer_bytes),
                    );
                }
                if du.ssc.buffer_bytes > du.onchip_buffer_bytes {
                    self.err(
                        Code::DuBuffer,
                        format!("{loc}.ssc.buffer_bytes"),
                        format!("SSC buffer of {} bytes exceeds the {}-byte DU buffer", du.ssc.buffer_bytes, du.onchip_buffer_bytes),
                    );
                }
            }
            let thr = du.ssc.sender_mode == SenderMode::Thr || du.ssc.receiver_mode == ReceiverMode::Thr;
            if thr && served.len() > 1 {
                self.err(Code::ThrFanout, format!("{loc}.ssc"), format!("THR links one PU; this DU serves {}", served.len()));
            }
            if du.ssc.sender_mode == SenderMode::Psd {
                let sizes: BTreeSet<u64> = served.iter().map(|p| p.per_iteration_bytes_in).collect();
                if sizes.len() > 1 {
                    self.err(Code::InvalidValue, format!("{loc}.ssc.sender_mode"), "PSD broadcasts one block; served PUs must take equal input sizes");
                }
            }
        }
    }

    fn pairings(&mut self) {
        let design = self.design;
        let mut owner: BTreeMap<&str, &str> = BTreeMap::new();
        for (du, pus) in &design.pairings {
            if design.du_index(du).is_none() {
                self.err(Code::PairingUnresolved, format!("pairings.{du}"), format!("DU '{du}' is not declared"));
            }
            for (k, pu) in pus.iter().enumerate() {
                if design.pu_index(pu).is_none() {
                    self.err(Code::PairingUnresolved, format!("pairings.{du}[{k}]"), format!("PU '{pu}' is not declared"));
                    continue;
                }
                if let Some(prev) = owner.insert(pu.as_str(), du.as_str()) {
                    self.err(
                        Code::PuMultiPaired,
                        format!("pairings.{du}[{k}]"),
                        format!("PU '{pu}' is already served by DU '{prev}'"),
                    );
                }
            }
        }
        for (i, pu) in design.pus.iter().enumerate() {
            if !owner.contains_key(pu.name.as_str()) {
                self.err(Code::PuUnpaired, format!("pus[{i}]"), format!("PU '{}' is not paired with a DU", pu.name));
            }
        }
        for (d, du) in design.dus.iter().enumerate() {
            if design.pairings.get(&du.name).is_none_or(|v| v.is_empty()) {
                self.err(Code::DuUnpaired, format!("dus[{d}]"), format!("DU '{}' serves no PU", du.name));
            }
        }
    }
}

/// Platform-independent rules. Output order is stable for a given design.
pub fn validate_structure(design: &DesignSpec) -> Vec<Diagnostic> {
    let mut r = Rules { design, diags: Vec::new() };
    r.names();
    r.kernels();
    r.pus();
    r.dus();
    r.pairings();
    r.diags
}
