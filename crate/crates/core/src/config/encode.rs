use serde_json::{json, Map, Value};

use super::ConfigDocument;
use crate::model::*;

struct Enc<'a> {
    doc: &'a ConfigDocument,
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() || path == "$" {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

impl Enc<'_> {
    fn finish(&self, path: &str, mut map: Map<String, Value>) -> Value {
        if let Some(extra) = self.doc.unknown.get(path) {
            for (k, v) in extra {
                map.entry(k.clone()).or_insert_with(|| v.clone());
            }
        }
        Value::Object(map)
    }

    fn obj(&self, path: &str, v: Value) -> Value {
        match v {
            Value::Object(m) => self.finish(path, m),
            other => other,
        }
    }

    fn ports(&self, path: &str, p: &PortCounts) -> Value {
        self.obj(path, json!({"stream": p.stream, "cascade": p.cascade, "dma_buffer": p.dma_buffer}))
    }

    fn kernel(&self, path: &str, k: &KernelSpec) -> Value {
        self.obj(
            path,
            json!({
                "source_ref": k.source_ref,
                "cycles_per_invocation": k.cycles_per_invocation,
                "local_mem_bytes": k.local_mem_bytes,
                "in_ports": self.ports(&join(path, "in_ports"), &k.in_ports),
                "out_ports": self.ports(&join(path, "out_ports"), &k.out_ports),
            }),
        )
    }

    fn cc(&self, path: &str, cc: &CcTopology) -> Value {
        let mut m = Map::new();
        m.insert("topology".into(), Value::String(cc.expression()));
        match cc {
            CcTopology::Butterfly { stage_kernels, .. } => {
                m.insert("stage_kernels".into(), json!(stage_kernels));
            }
            other => {
                m.insert("kernel".into(), json!(other.leaf_kernel().unwrap_or_default()));
            }
        }
        self.finish(path, m)
    }

    fn dac(&self, path: &str, d: &DacSpec) -> Value {
        let mut m = Map::new();
        m.insert("mode".into(), json!(d.mode.as_str()));
        m.insert("plio_ports".into(), json!(d.plio_ports));
        m.insert("serves".into(), json!(d.served.to_string()));
        m.insert("reuse_factor".into(), json!(d.reuse_factor));
        m.insert("input_port".into(), json!(d.input_port));
        if let Some(k) = &d.dca_kernel {
            m.insert("dca_kernel".into(), json!(k));
        }
        self.finish(path, m)
    }

    fn dcc(&self, path: &str, d: &DccSpec) -> Value {
        let mut m = Map::new();
        m.insert("mode".into(), json!(d.mode.as_str()));
        m.insert("plio_ports".into(), json!(d.plio_ports));
        m.insert("serves".into(), json!(d.served.to_string()));
        m.insert("output_port".into(), json!(d.output_port));
        if let Some(k) = &d.dca_kernel {
            m.insert("dca_kernel".into(), json!(k));
        }
        self.finish(path, m)
    }

    fn pst(&self, path: &str, p: &PstSpec) -> Value {
        let dacs: Vec<Value> = p.dacs.iter().enumerate().map(|(i, d)| self.dac(&format!("{path}.dacs[{i}]"), d)).collect();
        let dccs: Vec<Value> = p.dccs.iter().enumerate().map(|(i, d)| self.dcc(&format!("{path}.dccs[{i}]"), d)).collect();
        self.obj(
            path,
            json!({"dacs": dacs, "cc": self.cc(&join(path, "cc"), &p.cc), "dccs": dccs}),
        )
    }

    fn pu(&self, path: &str, pu: &PuSpec) -> Value {
        let psts: Vec<Value> = pu.psts.iter().enumerate().map(|(i, p)| self.pst(&format!("{path}.psts[{i}]"), p)).collect();
        self.obj(
            path,
            json!({
                "name": pu.name,
                "psts": psts,
                "per_iteration_bytes_in": pu.per_iteration_bytes_in,
                "per_iteration_bytes_out": pu.per_iteration_bytes_out,
                "per_iteration_ops": pu.per_iteration_ops,
            }),
        )
    }

    fn du(&self, path: &str, du: &DuSpec) -> Value {
        let mut m = Map::new();
        m.insert("name".into(), json!(du.name));
        if let Some(a) = &du.amc {
            let p = join(path, "amc");
            m.insert(
                "amc".into(),
                self.obj(
                    &p,
                    json!({"mode": a.mode.as_str(), "burst_size": a.burst_size, "element_bytes": a.element_bytes, "ports": a.ports}),
                ),
            );
        }
        let t = &du.tpc;
        m.insert(
            "tpc".into(),
            self.obj(
                &join(path, "tpc"),
                json!({
                    "mode": t.mode.as_str(),
                    "tb_bytes_in": t.tb_bytes_in,
                    "tb_bytes_out": t.tb_bytes_out,
                    "tev_per_pu_iteration": t.tev_per_pu_iteration,
                    "chl_repeat_count": t.chl_repeat_count,
                    "iterations_per_tb": t.iterations_per_tb,
                }),
            ),
        );
        let s = &du.ssc;
        m.insert(
            "ssc".into(),
            self.obj(
                &join(path, "ssc"),
                json!({"sender_mode": s.sender_mode.as_str(), "receiver_mode": s.receiver_mode.as_str(), "buffer_bytes": s.buffer_bytes}),
            ),
        );
        m.insert("onchip_buffer_bytes".into(), json!(du.onchip_buffer_bytes));
        self.finish(path, m)
    }

    fn design(&self, d: &DesignSpec) -> Value {
        let mut m = Map::new();
        m.insert("name".into(), json!(d.name));
        let kernels: Map<String, Value> =
            d.kernels.iter().map(|(n, k)| (n.clone(), self.kernel(&format!("kernels.{n}"), k))).collect();
        m.insert("kernels".into(), Value::Object(kernels));
        m.insert(
            "pus".into(),
            Value::Array(d.pus.iter().enumerate().map(|(i, p)| self.pu(&format!("pus[{i}]"), p)).collect()),
        );
        m.insert(
            "dus".into(),
            Value::Array(d.dus.iter().enumerate().map(|(i, u)| self.du(&format!("dus[{i}]"), u)).collect()),
        );
        m.insert("pairings".into(), json!(d.pairings));
        if let Some(po) = &d.platform_override {
            let v = serde_json::to_value(po).expect("override serializes");
            m.insert("platform_override".into(), self.obj("platform_override", v));
        }
        self.finish("", m)
    }
}

pub(super) fn document(doc: &ConfigDocument) -> Value {
    let enc = Enc { doc };
    let mut m = Map::new();
    m.insert("format_version".into(), json!(doc.format_version));
    if !doc.metadata.is_empty() {
        m.insert("metadata".into(), json!(doc.metadata));
    }
    m.insert("design".into(), enc.design(&doc.design));
    enc.finish("$", m)
}
