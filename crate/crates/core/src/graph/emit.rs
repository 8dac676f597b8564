//! Text emission of graph IR. The dialect is described in docs/graph-format.md.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;

use super::ir::*;
use super::repo::kernel_revision;
use super::GraphError;
use crate::model::{DesignSpec, KernelSpec};

pub const GRAPH_FORMAT_HEADER: &str = "# ea4rca graph v1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct KernelEntry {
    pub name: String,
    pub spec: KernelSpec,
    /// Kernel source text, or the source reference when only that is known.
    pub source: String,
    pub revision: String,
}

pub trait KernelSource {
    fn resolve_kernel(&self, name: &str) -> Option<KernelEntry>;
}

/// In-memory catalogue, typically built from a design's own kernel table.
#[derive(Debug, Clone, Default)]
pub struct KernelCatalog {
    entries: BTreeMap<String, KernelEntry>,
}

impl KernelCatalog {
    pub fn from_design(design: &DesignSpec) -> Self {
        let mut c = KernelCatalog::default();
        for k in design.kernels.values() {
            c.insert(k.clone(), k.source_ref.clone());
        }
        c
    }

    pub fn insert(&mut self, spec: KernelSpec, source: String) -> String {
        let revision = kernel_revision(&spec, &source);
        self.entries.insert(
            spec.name.clone(),
            KernelEntry { name: spec.name.clone(), spec, source, revision: revision.clone() },
        );
        revision
    }
}

impl KernelSource for KernelCatalog {
    fn resolve_kernel(&self, name: &str) -> Option<KernelEntry> {
        self.entries.get(name).cloned()
    }
}

#[derive(Serialize)]
struct ManifestKernel {
    name: String,
    source_ref: String,
    revision: String,
}

#[derive(Serialize)]
struct ManifestPlio {
    name: String,
    node: String,
    section: String,
    direction: Direction,
    bytes_per_iteration: u64,
}

#[derive(Serialize)]
struct Manifest {
    format: &'static str,
    schema_version: &'static str,
    graph: String,
    census: Census,
    kernels: Vec<ManifestKernel>,
    plio: Vec<ManifestPlio>,
}

fn edge_section<'a>(e: &Edge, index: &BTreeMap<&str, &'a Node>) -> &'a str {
    let id = match e {
        Edge::Cascade { src, .. } => src.as_str(),
        other => {
            let (s, d) = other.endpoints();
            s.into_iter().chain(d).next().map_or("", |p| p.node.as_str())
        }
    };
    index.get(id).map_or("", |n| n.section.as_str())
}

fn port_list(ports: &[PortRef], tags: &[u32]) -> String {
    let items: Vec<String> = ports
        .iter()
        .enumerate()
        .map(|(i, p)| match tags.get(i) {
            Some(t) => format!("{p} #{t}"),
            None => p.to_string(),
        })
        .collect();
    format!("[{}]", items.join(", "))
}

fn members(ms: &[PacketMember]) -> String {
    let items: Vec<String> = ms.iter().map(|m| format!("#{} {}", m.tag, m.port)).collect();
    format!("[{}]", items.join(", "))
}

fn node_line(n: &Node) -> String {
    match &n.kind {
        NodeKind::Kernel { kernel, pst, core, role, inputs, outputs, cascade_in, cascade_out, .. } => {
            let casc = match (cascade_in, cascade_out) {
                (false, false) => "none",
                (true, false) => "in",
                (false, true) => "out",
                (true, true) => "in,out",
            };
            format!(
                "kernel {} : {kernel} [pst={pst} core={core} role={} in={inputs} out={outputs} cascade={casc}]",
                n.id,
                role.as_str()
            )
        }
        NodeKind::Plio { direction, name, bytes_per_iteration } => {
            let dir = match direction {
                Direction::In => "in",
                Direction::Out => "out",
            };
            format!("plio {dir} {} \"{name}\" bytes={bytes_per_iteration}", n.id)
        }
        NodeKind::Junction => format!("junction {}", n.id),
    }
}

fn edge_line(e: &Edge) -> String {
    match e {
        Edge::Stream { src, dst } => format!("connect stream {src} -> {dst}"),
        Edge::Cascade { src, dst } => format!("connect cascade {src} -> {dst}"),
        Edge::Broadcast { src, dsts, tags } => format!("connect broadcast {src} -> {}", port_list(dsts, tags)),
        Edge::Packet { direction: PacketDirection::Split, channel, members: ms } => {
            format!("connect packet split {channel} -> {}", members(ms))
        }
        Edge::Packet { direction: PacketDirection::Merge, channel, members: ms } => {
            format!("connect packet merge {} -> {channel}", members(ms))
        }
    }
}

/// Emits the graph text and a JSON manifest of PLIO names and transfer
/// sizes. Output depends only on the IR and the resolved kernel revisions.
pub fn emit_graph_source(ir: &GraphIr, repo: &dyn KernelSource) -> Result<BTreeMap<String, String>, GraphError> {
    let mut kernels: BTreeMap<String, KernelEntry> = BTreeMap::new();
    for n in &ir.nodes {
        if let NodeKind::Kernel { kernel, .. } = &n.kind {
            if !kernels.contains_key(kernel) {
                let entry = repo.resolve_kernel(kernel).ok_or_else(|| GraphError::UnresolvedKernel(kernel.clone()))?;
                kernels.insert(kernel.clone(), entry);
            }
        }
    }

    let index = ir.index();
    let mut text = String::new();
    let _ = writeln!(text, "{GRAPH_FORMAT_HEADER}");
    let _ = writeln!(text, "graph {}", ir.name);
    let _ = writeln!(text);
    for (name, k) in &kernels {
        let _ = writeln!(text, "source {name} \"{}\" rev {}", k.spec.source_ref, &k.revision[..16]);
    }
    for section in ir.sections() {
        let _ = writeln!(text);
        let _ = writeln!(text, "section {section} {{");
        for n in ir.nodes.iter().filter(|n| n.section == section) {
            let _ = writeln!(text, "  {}", node_line(n));
        }
        for e in ir.edges.iter().filter(|e| edge_section(e, &index) == section) {
            let _ = writeln!(text, "  {}", edge_line(e));
        }
        for s in ir.sinks.iter().filter(|p| index.get(p.node.as_str()).is_some_and(|n| n.section == section)) {
            let _ = writeln!(text, "  sink {s}");
        }
        let _ = writeln!(text, "}}");
    }

    let manifest = Manifest {
        format: "ea4rca-graph-manifest",
        schema_version: "1",
        graph: ir.name.clone(),
        census: ir.census(),
        kernels: kernels
            .values()
            .map(|k| ManifestKernel { name: k.name.clone(), source_ref: k.spec.source_ref.clone(), revision: k.revision.clone() })
            .collect(),
        plio: ir
            .nodes
            .iter()
            .filter_map(|n| match &n.kind {
                NodeKind::Plio { direction, name, bytes_per_iteration } => Some(ManifestPlio {
                    name: name.clone(),
                    node: n.id.clone(),
                    section: n.section.clone(),
                    direction: *direction,
                    bytes_per_iteration: *bytes_per_iteration,
                }),
                _ => None,
            })
            .collect(),
    };
    let mut mjson = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    mjson.push('\n');

    let mut files = BTreeMap::new();
    files.insert(format!("graph/{}.graph.txt", ir.name), text);
    files.insert(format!("graph/{}.manifest.json", ir.name), mjson);
    Ok(files)
}
