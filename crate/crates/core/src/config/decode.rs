use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use serde_json::{Map, Value};

use super::{ConfigDocument, SUPPORTED_MAJOR};
use crate::diag::{Code, Diagnostic};
use crate::model::*;

fn join(path: &str, key: &str) -> String {
    if path.is_empty() || path == "$" {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

struct Obj<'v> {
    map: &'v Map<String, Value>,
    path: String,
    used: BTreeSet<&'static str>,
}

#[derive(Default)]
struct Dec {
    diags: Vec<Diagnostic>,
    unknown: BTreeMap<String, Map<String, Value>>,
}

impl Dec {
    fn err(&mut self, code: Code, path: &str, msg: impl Into<String>) {
        self.diags.push(Diagnostic::error(code, path, msg));
    }

    fn mismatch(&mut self, path: &str, want: &str, got: &Value) {
        self.err(Code::TypeMismatch, path, format!("expected {want}, found {}", type_name(got)));
    }

    fn obj<'v>(&mut self, v: &'v Value, path: &str) -> Option<Obj<'v>> {
        match v {
            Value::Object(map) => Some(Obj { map, path: path.to_string(), used: BTreeSet::new() }),
            other => {
                self.mismatch(path, "object", other);
                None
            }
        }
    }

    fn done(&mut self, o: Obj<'_>) {
        let extra: Map<String, Value> = o
            .map
            .iter()
            .filter(|(k, _)| !o.used.contains(k.as_str()))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        if !extra.is_empty() {
            self.unknown.insert(o.path, extra);
        }
    }

    fn opt<'v>(&mut self, o: &mut Obj<'v>, key: &'static str) -> Option<&'v Value> {
        o.used.insert(key);
        o.map.get(key).filter(|v| !v.is_null())
    }

    fn req<'v>(&mut self, o: &mut Obj<'v>, key: &'static str) -> Option<&'v Value> {
        let v = self.opt(o, key);
        if v.is_none() {
            let path = o.path.clone();
            self.err(Code::MissingField, &join(&path, key), format!("required field '{key}' is missing"));
        }
        v
    }

    fn as_u64(&mut self, v: &Value, path: &str) -> Option<u64> {
        match v {
            Value::Number(n) => match n.as_u64() {
                Some(x) => Some(x),
                None => {
                    self.err(Code::InvalidValue, path, format!("expected a non-negative integer, found {n}"));
                    None
                }
            },
            other => {
                self.mismatch(path, "integer", other);
                None
            }
        }
    }

    fn as_u32(&mut self, v: &Value, path: &str) -> Option<u32> {
        let x = self.as_u64(v, path)?;
        match u32::try_from(x) {
            Ok(x) => Some(x),
            Err(_) => {
                self.err(Code::InvalidValue, path, format!("{x} does not fit in 32 bits"));
                None
            }
        }
    }

    fn as_f64(&mut self, v: &Value, path: &str) -> Option<f64> {
        match v {
            Value::Number(n) => n.as_f64(),
            other => {
                self.mismatch(path, "number", other);
                None
            }
        }
    }

    fn as_str<'v>(&mut self, v: &'v Value, path: &str) -> Option<&'v str> {
        match v {
            Value::String(s) => Some(s),
            other => {
                self.mismatch(path, "string", other);
                None
            }
        }
    }

    fn as_array<'v>(&mut self, v: &'v Value, path: &str) -> Option<&'v [Value]> {
        match v {
            Value::Array(a) => Some(a),
            other => {
                self.mismatch(path, "array", other);
                None
            }
        }
    }

    fn req_str(&mut self, o: &mut Obj<'_>, key: &'static str) -> Option<String> {
        let p = join(&o.path, key);
        let v = self.req(o, key)?;
        self.as_str(v, &p).map(str::to_string)
    }

    fn opt_str(&mut self, o: &mut Obj<'_>, key: &'static str) -> Option<String> {
        let p = join(&o.path, key);
        let v = self.opt(o, key)?;
        self.as_str(v, &p).map(str::to_string)
    }

    fn opt_u64(&mut self, o: &mut Obj<'_>, key: &'static str, default: u64) -> u64 {
        let p = join(&o.path, key);
        match self.opt(o, key) {
            Some(v) => self.as_u64(v, &p).unwrap_or(default),
            None => default,
        }
    }

    fn opt_u32(&mut self, o: &mut Obj<'_>, key: &'static str, default: u32) -> u32 {
        let p = join(&o.path, key);
        match self.opt(o, key) {
            Some(v) => self.as_u32(v, &p).unwrap_or(default),
            None => default,
        }
    }

    fn mode<T: FromStr + Copy>(
        &mut self,
        o: &mut Obj<'_>,
        key: &'static str,
        what: &str,
        all: &[&str],
    ) -> Option<T> {
        let p = join(&o.path, key);
        let s = self.req_str(o, key)?;
        match s.parse::<T>() {
            Ok(m) => Some(m),
            Err(_) => {
                self.err(
                    Code::UnknownMode,
                    &p,
                    format!("unknown {what} '{s}'; expected one of {}", all.join(", ")),
                );
                None
            }
        }
    }

    fn ports(&mut self, o: &mut Obj<'_>, key: &'static str) -> PortCounts {
        let p = join(&o.path, key);
        let Some(v) = self.opt(o, key) else {
            return PortCounts { stream: 1, ..Default::default() };
        };
        let Some(mut po) = self.obj(v, &p) else {
            return PortCounts::default();
        };
        let pc = PortCounts {
            stream: self.opt_u32(&mut po, "stream", 0),
            cascade: self.opt_u32(&mut po, "cascade", 0),
            dma_buffer: self.opt_u32(&mut po, "dma_buffer", 0),
        };
        self.done(po);
        pc
    }

    fn selector(&mut self, o: &mut Obj<'_>) -> Option<CoreSelector> {
        let p = join(&o.path, "serves");
        let s = self.req_str(o, "serves")?;
        match s.parse::<CoreSelector>() {
            Ok(sel) => Some(sel),
            Err(e) => {
                self.err(Code::InvalidValue, &p, e.to_string());
                None
            }
        }
    }

    fn kernel(&mut self, name: &str, v: &Value, path: &str) -> Option<KernelSpec> {
        let mut o = self.obj(v, path)?;
        let source_ref = self.req_str(&mut o, "source_ref");
        let k = KernelSpec {
            name: name.to_string(),
            source_ref: source_ref.unwrap_or_default(),
            cycles_per_invocation: self.opt_u64(&mut o, "cycles_per_invocation", 0),
            local_mem_bytes: self.opt_u64(&mut o, "local_mem_bytes", 0),
            in_ports: self.ports(&mut o, "in_ports"),
            out_ports: self.ports(&mut o, "out_ports"),
        };
        self.done(o);
        Some(k)
    }

    fn cc(&mut self, v: &Value, path: &str) -> Option<CcTopology> {
        let mut o = self.obj(v, path)?;
        let topo_path = join(path, "topology");
        let expr = self.req_str(&mut o, "topology");
        let kernel = self.opt_str(&mut o, "kernel");
        let sk_path = join(path, "stage_kernels");
        let stage_kernels: Vec<String> = match self.opt(&mut o, "stage_kernels") {
            Some(v) => match self.as_array(v, &sk_path) {
                Some(items) => items
                    .iter()
                    .enumerate()
                    .filter_map(|(i, it)| self.as_str(it, &format!("{sk_path}[{i}]")).map(str::to_string))
                    .collect(),
                None => Vec::new(),
            },
            None => Vec::new(),
        };
        self.done(o);
        let expr = expr?;
        let shape = match Shape::parse(&expr) {
            Ok(s) => s,
            Err(e) => {
                self.err(Code::TopologySyntax, &topo_path, format!("'{expr}': {e}"));
                return None;
            }
        };
        let butterfly = matches!(shape, Shape::Butterfly(_));
        if butterfly {
            if kernel.is_some() {
                self.err(Code::InvalidValue, &join(path, "kernel"), "Butterfly takes 'stage_kernels', not 'kernel'");
            }
            if stage_kernels.is_empty() {
                self.err(Code::MissingField, &sk_path, "Butterfly requires 'stage_kernels'");
                return None;
            }
        } else {
            if !stage_kernels.is_empty() {
                self.err(Code::InvalidValue, &sk_path, "'stage_kernels' only applies to Butterfly");
            }
            if kernel.is_none() {
                self.err(Code::MissingField, &join(path, "kernel"), "required field 'kernel' is missing");
                return None;
            }
        }
        Some(CcTopology::from_shape(&shape, kernel.as_deref(), &stage_kernels))
    }

    fn dac(&mut self, v: &Value, path: &str) -> Option<DacSpec> {
        let mut o = self.obj(v, path)?;
        let names: Vec<&str> = DacMode::ALL.iter().map(|m| m.as_str()).collect();
        let mode = self.mode::<DacMode>(&mut o, "mode", "DAC mode", &names);
        let served = self.selector(&mut o);
        let d = DacSpec {
            mode: mode?,
            plio_ports: self.opt_u32(&mut o, "plio_ports", 1),
            served: served?,
            reuse_factor: self.opt_u32(&mut o, "reuse_factor", 1),
            input_port: self.opt_u32(&mut o, "input_port", 0),
            dca_kernel: self.opt_str(&mut o, "dca_kernel"),
        };
        self.done(o);
        Some(d)
    }

    fn dcc(&mut self, v: &Value, path: &str) -> Option<DccSpec> {
        let mut o = self.obj(v, path)?;
        let mode_path = join(path, "mode");
        let mode = match self.req_str(&mut o, "mode") {
            Some(s) if s == "BDC" => {
                self.err(Code::BdcOnDcc, &mode_path, "broadcast (BDC) is only available on DACs");
                None
            }
            Some(s) => match s.parse::<DccMode>() {
                Ok(m) => Some(m),
                Err(_) => {
                    self.err(Code::UnknownMode, &mode_path, format!("unknown DCC mode '{s}'; expected one of DIR, SWH, DCA"));
                    None
                }
            },
            None => None,
        };
        let served = self.selector(&mut o);
        let d = DccSpec {
            mode: mode?,
            plio_ports: self.opt_u32(&mut o, "plio_ports", 1),
            served: served?,
            output_port: self.opt_u32(&mut o, "output_port", 0),
            dca_kernel: self.opt_str(&mut o, "dca_kernel"),
        };
        self.done(o);
        Some(d)
    }

    fn list<T>(&mut self, o: &mut Obj<'_>, key: &'static str, required: bool, mut item: impl FnMut(&mut Self, &Value, &str) -> Option<T>) -> Option<Vec<T>> {
        let p = join(&o.path, key);
        let v = if required { self.req(o, key)? } else { self.opt(o, key)? };
        let items = self.as_array(v, &p)?;
        let mut out = Vec::with_capacity(items.len());
        let mut ok = true;
        for (i, it) in items.iter().enumerate() {
            match item(self, it, &format!("{p}[{i}]")) {
                Some(x) => out.push(x),
                None => ok = false,
            }
        }
        ok.then_some(out)
    }

    fn pst(&mut self, v: &Value, path: &str) -> Option<PstSpec> {
        let mut o = self.obj(v, path)?;
        let dacs = self.list(&mut o, "dacs", true, |d, v, p| d.dac(v, p));
        let cc_path = join(path, "cc");
        let cc = self.req(&mut o, "cc").and_then(|v| self.cc(v, &cc_path));
        let dccs = self.list(&mut o, "dccs", true, |d, v, p| d.dcc(v, p));
        self.done(o);
        Some(PstSpec { dacs: dacs?, cc: cc?, dccs: dccs? })
    }

    fn pu(&mut self, v: &Value, path: &str) -> Option<PuSpec> {
        let mut o = self.obj(v, path)?;
        let name = self.req_str(&mut o, "name");
        let psts = self.list(&mut o, "psts", true, |d, v, p| d.pst(v, p));
        let pu = PuSpec {
            name: name?,
            psts: psts?,
            per_iteration_bytes_in: self.opt_u64(&mut o, "per_iteration_bytes_in", 0),
            per_iteration_bytes_out: self.opt_u64(&mut o, "per_iteration_bytes_out", 0),
            per_iteration_ops: self.opt_u64(&mut o, "per_iteration_ops", 0),
        };
        self.done(o);
        Some(pu)
    }

    fn du(&mut self, v: &Value, path: &str) -> Option<DuSpec> {
        let mut o = self.obj(v, path)?;
        let name = self.req_str(&mut o, "name");

        let amc_path = join(path, "amc");
        let mut amc_ok = true;
        let amc = match self.opt(&mut o, "amc") {
            None => None,
            Some(v) => match self.obj(v, &amc_path) {
                Some(mut a) => {
                    let names: Vec<&str> = AmcMode::ALL.iter().map(|m| m.as_str()).collect();
                    let mode = self.mode::<AmcMode>(&mut a, "mode", "AMC mode", &names);
                    let spec = AmcSpec {
                        mode: mode.unwrap_or(AmcMode::Csb),
                        burst_size: self.opt_u32(&mut a, "burst_size", 1),
                        element_bytes: self.opt_u32(&mut a, "element_bytes", 4),
                        ports: self.opt_u32(&mut a, "ports", 1),
                    };
                    amc_ok = mode.is_some();
                    self.done(a);
                    Some(spec)
                }
                None => {
                    amc_ok = false;
                    None
                }
            },
        };

        let tpc_path = join(path, "tpc");
        let tpc = match self.req(&mut o, "tpc") {
            Some(v) => self.obj(v, &tpc_path).and_then(|mut t| {
                let names: Vec<&str> = TpcMode::ALL.iter().map(|m| m.as_str()).collect();
                let mode = self.mode::<TpcMode>(&mut t, "mode", "TPC mode", &names);
                let spec = TpcSpec {
                    mode: mode.unwrap_or(TpcMode::Cup),
                    tb_bytes_in: self.opt_u64(&mut t, "tb_bytes_in", 0),
                    tb_bytes_out: self.opt_u64(&mut t, "tb_bytes_out", 0),
                    tev_per_pu_iteration: self.opt_u32(&mut t, "tev_per_pu_iteration", 1),
                    chl_repeat_count: self.opt_u32(&mut t, "chl_repeat_count", 1),
                    iterations_per_tb: self.opt_u32(&mut t, "iterations_per_tb", 1),
                };
                self.done(t);
                mode.map(|_| spec)
            }),
            None => None,
        };

        let ssc_path = join(path, "ssc");
        let ssc = match self.req(&mut o, "ssc") {
            Some(v) => self.obj(v, &ssc_path).and_then(|mut s| {
                let names: Vec<&str> = SenderMode::ALL.iter().map(|m| m.as_str()).collect();
                let sender = self.mode::<SenderMode>(&mut s, "sender_mode", "SSC sender mode", &names);
                let rpath = join(&ssc_path, "receiver_mode");
                let receiver = match self.req_str(&mut s, "receiver_mode") {
                    Some(r) if r == "PSD" => {
                        self.err(
                            Code::SscPsdReceiver,
                            &rpath,
                            "PSD broadcasts identical data and cannot collect results; use SHD, PHD or THR",
                        );
                        None
                    }
                    Some(r) => match r.parse::<ReceiverMode>() {
                        Ok(m) => Some(m),
                        Err(_) => {
                            self.err(Code::UnknownMode, &rpath, format!("unknown SSC receiver mode '{r}'; expected one of SHD, PHD, THR"));
                            None
                        }
                    },
                    None => None,
                };
                let buffer_bytes = self.opt_u64(&mut s, "buffer_bytes", 0);
                self.done(s);
                Some(SscSpec { sender_mode: sender?, receiver_mode: receiver?, buffer_bytes })
            }),
            None => None,
        };
        let onchip = self.opt_u64(&mut o, "onchip_buffer_bytes", 0);
        self.done(o);
        if !amc_ok {
            return None;
        }
        Some(DuSpec { name: name?, amc, tpc: tpc?, ssc: ssc?, onchip_buffer_bytes: onchip })
    }

    fn platform_override(&mut self, v: &Value, path: &str) -> Option<PlatformOverride> {
        let mut o = self.obj(v, path)?;
        let mut po = PlatformOverride::default();
        macro_rules! int_fields {
            ($($f:ident : $t:ident),*) => {$(
                let p = join(path, stringify!($f));
                if let Some(v) = self.opt(&mut o, stringify!($f)) {
                    po.$f = self.$t(v, &p).map(Into::into);
                }
            )*};
        }
        int_fields!(
            aie_core_count: as_u32,
            plio_count: as_u32,
            plio_bits_per_cycle: as_u32,
            ddr_port_bits_per_cycle: as_u32,
            packet_switch_fanout_max: as_u32,
            core_local_mem_bytes: as_u64,
            uram_total_bytes: as_u64,
            aie_freq_hz: as_f64,
            pl_freq_hz: as_f64,
            ddr_peak_bytes_per_sec: as_f64,
            aie_stream_agg_bytes_per_sec: as_f64,
            aie_dma_agg_bytes_per_sec: as_f64
        );
        self.done(o);
        Some(po)
    }

    fn design(&mut self, v: &Value) -> Option<DesignSpec> {
        let mut o = self.obj(v, "design")?;
        o.path = String::new();
        let name = self.req_str(&mut o, "name");

        let mut kernels = BTreeMap::new();
        let mut kernels_ok = true;
        if let Some(kv) = self.req(&mut o, "kernels") {
            match kv {
                Value::Object(map) => {
                    for (kname, kval) in map {
                        match self.kernel(kname, kval, &format!("kernels.{kname}")) {
                            Some(k) => {
                                kernels.insert(kname.clone(), k);
                            }
                            None => kernels_ok = false,
                        }
                    }
                }
                other => {
                    self.mismatch("kernels", "object", other);
                    kernels_ok = false;
                }
            }
        } else {
            kernels_ok = false;
        }

        let pus = self.list(&mut o, "pus", true, |d, v, p| d.pu(v, p));
        let dus = self.list(&mut o, "dus", true, |d, v, p| d.du(v, p));

        let mut pairings = BTreeMap::new();
        let mut pairings_ok = true;
        if let Some(pv) = self.req(&mut o, "pairings") {
            match pv {
                Value::Object(map) => {
                    for (du, list) in map {
                        let p = format!("pairings.{du}");
                        match self.as_array(list, &p) {
                            Some(items) => {
                                let mut names = Vec::new();
                                for (i, it) in items.iter().enumerate() {
                                    match self.as_str(it, &format!("{p}[{i}]")) {
                                        Some(s) => names.push(s.to_string()),
                                        None => pairings_ok = false,
                                    }
                                }
                                pairings.insert(du.clone(), names);
                            }
                            None => pairings_ok = false,
                        }
                    }
                }
                other => {
                    self.mismatch("pairings", "object", other);
                    pairings_ok = false;
                }
            }
        } else {
            pairings_ok = false;
        }

        let platform_override = match self.opt(&mut o, "platform_override") {
            Some(v) => Some(self.platform_override(v, "platform_override")?),
            None => None,
        };
        self.done(o);
        if !(kernels_ok && pairings_ok) {
            return None;
        }
        Some(DesignSpec { name: name?, kernels, pus: pus?, dus: dus?, pairings, platform_override })
    }
}

fn check_version(dec: &mut Dec, v: &str) {
    let parts: Vec<&str> = v.split('.').collect();
    let numeric = parts.len() == 3 && parts.iter().all(|p| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit()));
    if !numeric {
        dec.err(Code::InvalidValue, "format_version", format!("'{v}' is not a MAJOR.MINOR.PATCH version"));
        return;
    }
    let major: u64 = parts[0].parse().unwrap_or(u64::MAX);
    if major != SUPPORTED_MAJOR {
        dec.err(
            Code::UnsupportedVersion,
            "format_version",
            format!("format version {v} is not supported; this reader handles {SUPPORTED_MAJOR}.x"),
        );
    }
}

pub(super) fn document(v: &Value) -> (Option<ConfigDocument>, Vec<Diagnostic>) {
    let mut dec = Dec::default();
    let Some(mut root) = dec.obj(v, "$") else {
        return (None, dec.diags);
    };
    let version = dec.req_str(&mut root, "format_version");
    if let Some(ver) = &version {
        check_version(&mut dec, ver);
    }
    let metadata: BTreeMap<String, Value> = match dec.opt(&mut root, "metadata") {
        Some(Value::Object(m)) => m.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
        Some(other) => {
            dec.mismatch("metadata", "object", other);
            BTreeMap::new()
        }
        None => BTreeMap::new(),
    };
    let design = dec.req(&mut root, "design").and_then(|d| dec.design(d));
    dec.done(root);
    let doc = match (version, design) {
        (Some(format_version), Some(design)) => Some(ConfigDocument {
            format_version,
            metadata,
            design,
            unknown: std::mem::take(&mut dec.unknown),
        }),
        _ => None,
    };
    (doc, dec.diags)
}
