use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    In,
    Out,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelRole {
    /// Core of a computing component.
    Cc,
    /// Data-organisation core in front of a CC.
    DacDca,
    /// Data-organisation core behind a CC.
    DccDca,
}

impl KernelRole {
    pub fn as_str(self) -> &'static str {
        match self {
            KernelRole::Cc => "cc",
            KernelRole::DacDca => "dac-dca",
            KernelRole::DccDca => "dcc-dca",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum NodeKind {
    Kernel {
        kernel: String,
        source_ref: String,
        pst: u32,
        core: u32,
        role: KernelRole,
        inputs: u32,
        outputs: u32,
        cascade_in: bool,
        cascade_out: bool,
    },
    Plio {
        direction: Direction,
        name: String,
        bytes_per_iteration: u64,
    },
    /// On-chip hand-off between PSTs where a merged packet stream is re-split.
    Junction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    /// Grouping for emission, normally the owning PU.
    pub section: String,
    pub kind: NodeKind,
}

impl Node {
    pub fn inputs(&self) -> u32 {
        match &self.kind {
            NodeKind::Kernel { inputs, .. } => *inputs,
            NodeKind::Plio { direction: Direction::In, .. } => 0,
            NodeKind::Plio { direction: Direction::Out, .. } => 1,
            NodeKind::Junction => 1,
        }
    }

    pub fn outputs(&self) -> u32 {
        match &self.kind {
            NodeKind::Kernel { outputs, .. } => *outputs,
            NodeKind::Plio { direction: Direction::In, .. } => 1,
            NodeKind::Plio { direction: Direction::Out, .. } => 0,
            NodeKind::Junction => 1,
        }
    }

    pub fn is_kernel(&self) -> bool {
        matches!(self.kind, NodeKind::Kernel { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PortRef {
    pub node: String,
    pub port: u32,
}

impl PortRef {
    pub fn new(node: impl Into<String>, port: u32) -> Self {
        PortRef { node: node.into(), port }
    }
}

impl fmt::Display for PortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.node, self.port)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PacketMember {
    pub tag: u32,
    pub port: PortRef,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PacketDirection {
    /// One channel fanned out to tagged input ports.
    Split,
    /// Tagged output ports merged onto one channel.
    Merge,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Edge {
    Stream { src: PortRef, dst: PortRef },
    Cascade { src: String, dst: String },
    /// `tags` is empty for a plain broadcast, else one tag per destination.
    Broadcast { src: PortRef, dsts: Vec<PortRef>, tags: Vec<u32> },
    Packet { direction: PacketDirection, channel: PortRef, members: Vec<PacketMember> },
}

impl Edge {
    pub fn keyword(&self) -> &'static str {
        match self {
            Edge::Stream { .. } => "stream",
            Edge::Cascade { .. } => "cascade",
            Edge::Broadcast { .. } => "broadcast",
            Edge::Packet { .. } => "packet",
        }
    }

    /// `(source output ports, destination input ports)` touched by the edge.
    pub fn endpoints(&self) -> (Vec<&PortRef>, Vec<&PortRef>) {
        match self {
            Edge::Stream { src, dst } => (vec![src], vec![dst]),
            Edge::Cascade { .. } => (vec![], vec![]),
            Edge::Broadcast { src, dsts, .. } => (vec![src], dsts.iter().collect()),
            Edge::Packet { direction: PacketDirection::Split, channel, members } => {
                (vec![channel], members.iter().map(|m| &m.port).collect())
            }
            Edge::Packet { direction: PacketDirection::Merge, channel, members } => {
                (members.iter().map(|m| &m.port).collect(), vec![channel])
            }
        }
    }

    pub(crate) fn rename(&mut self, f: &dyn Fn(&str) -> String) {
        let fix = |p: &mut PortRef| p.node = f(&p.node);
        match self {
            Edge::Stream { src, dst } => {
                fix(src);
                fix(dst);
            }
            Edge::Cascade { src, dst } => {
                *src = f(src);
                *dst = f(dst);
            }
            Edge::Broadcast { src, dsts, .. } => {
                fix(src);
                dsts.iter_mut().for_each(fix);
            }
            Edge::Packet { channel, members, .. } => {
                fix(channel);
                members.iter_mut().for_each(|m| fix(&mut m.port));
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphIr {
    pub name: String,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    /// Output ports deliberately left unconsumed.
    #[serde(default)]
    pub sinks: Vec<PortRef>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Census {
    pub kernel_nodes: u64,
    pub plio_in: u64,
    pub plio_out: u64,
    pub junctions: u64,
    pub stream: u64,
    pub cascade: u64,
    pub broadcast: u64,
    pub packet: u64,
}

impl GraphIr {
    pub fn empty(name: &str) -> Self {
        GraphIr { name: name.to_string(), nodes: Vec::new(), edges: Vec::new(), sinks: Vec::new() }
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn index(&self) -> BTreeMap<&str, &Node> {
        self.nodes.iter().map(|n| (n.id.as_str(), n)).collect()
    }

    pub fn census(&self) -> Census {
        let mut c = Census::default();
        for n in &self.nodes {
            match &n.kind {
                NodeKind::Kernel { .. } => c.kernel_nodes += 1,
                NodeKind::Plio { direction: Direction::In, .. } => c.plio_in += 1,
                NodeKind::Plio { direction: Direction::Out, .. } => c.plio_out += 1,
                NodeKind::Junction => c.junctions += 1,
            }
        }
        for e in &self.edges {
            match e {
                Edge::Stream { .. } => c.stream += 1,
                Edge::Cascade { .. } => c.cascade += 1,
                Edge::Broadcast { .. } => c.broadcast += 1,
                Edge::Packet { .. } => c.packet += 1,
            }
        }
        c
    }

    /// Census restricted to one section.
    pub fn section_census(&self, section: &str) -> Census {
        let ids: std::collections::BTreeSet<&str> =
            self.nodes.iter().filter(|n| n.section == section).map(|n| n.id.as_str()).collect();
        let sub = GraphIr {
            name: self.name.clone(),
            nodes: self.nodes.iter().filter(|n| n.section == section).cloned().collect(),
            edges: self
                .edges
                .iter()
                .filter(|e| {
                    let (s, d) = e.endpoints();
                    match e {
                        Edge::Cascade { src, .. } => ids.contains(src.as_str()),
                        _ => s.iter().chain(d.iter()).next().is_some_and(|p| ids.contains(p.node.as_str())),
                    }
                })
                .cloned()
                .collect(),
            sinks: Vec::new(),
        };
        sub.census()
    }

    /// Sections in first-appearance order.
    pub fn sections(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for n in &self.nodes {
            if !out.contains(&n.section.as_str()) {
                out.push(&n.section);
            }
        }
        out
    }
}
