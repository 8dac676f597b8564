//! Structural checks on graph IR.

use std::collections::{BTreeMap, BTreeSet};

use super::ir::*;
use crate::diag::{Code, Diagnostic};
use crate::model::PlatformSpec;

pub fn check_ir(ir: &GraphIr, platform: &PlatformSpec) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut err = |code: Code, loc: String, msg: String| diags.push(Diagnostic::error(code, loc, msg));
    let fanout = platform.packet_switch_fanout_max as usize;

    let mut nodes: BTreeMap<&str, &Node> = BTreeMap::new();
    for (i, n) in ir.nodes.iter().enumerate() {
        if nodes.insert(&n.id, n).is_some() {
            err(Code::DuplicateNode, format!("nodes[{i}]"), format!("node id '{}' is used twice", n.id));
        }
    }

    let mut driven: BTreeMap<(&str, u32), u32> = BTreeMap::new();
    let mut consumed: BTreeSet<(&str, u32)> = BTreeSet::new();
    let mut casc_in: BTreeMap<&str, u32> = BTreeMap::new();
    let mut casc_out: BTreeMap<&str, &str> = BTreeMap::new();

    for (j, e) in ir.edges.iter().enumerate() {
        let loc = format!("edges[{j}]");
        if let Edge::Cascade { src, dst } = e {
            for (id, want_out) in [(src, true), (dst, false)] {
                match nodes.get(id.as_str()).map(|n| &n.kind) {
                    None => err(Code::UnknownNode, loc.clone(), format!("cascade references unknown node '{id}'")),
                    Some(NodeKind::Kernel { cascade_in, cascade_out, .. }) => {
                        let ok = if want_out { *cascade_out } else { *cascade_in };
                        if !ok {
                            err(Code::CascadeNotLinear, loc.clone(), format!("node '{id}' has no cascade {} port", if want_out { "output" } else { "input" }));
                        }
                    }
                    Some(_) => err(Code::CascadeNotLinear, loc.clone(), format!("cascade endpoint '{id}' is not a kernel")),
                }
            }
            *casc_in.entry(dst.as_str()).or_default() += 1;
            if casc_out.insert(src.as_str(), dst.as_str()).is_some() {
                err(Code::CascadeNotLinear, loc.clone(), format!("node '{src}' drives two cascade links"));
            }
            continue;
        }
        let (srcs, dsts) = e.endpoints();
        if dsts.is_empty() || srcs.is_empty() {
            err(Code::EmptyEdge, loc.clone(), format!("{} edge has no endpoints on one side", e.keyword()));
        }
        for p in &srcs {
            match nodes.get(p.node.as_str()) {
                None => err(Code::UnknownNode, loc.clone(), format!("edge references unknown node '{}'", p.node)),
                Some(n) if p.port >= n.outputs() => {
                    err(Code::PortOutOfRange, loc.clone(), format!("'{}' has {} outputs, port {} does not exist", p.node, n.outputs(), p.port))
                }
                Some(_) => {
                    consumed.insert((p.node.as_str(), p.port));
                }
            }
        }
        for p in &dsts {
            match nodes.get(p.node.as_str()) {
                None => err(Code::UnknownNode, loc.clone(), format!("edge references unknown node '{}'", p.node)),
                Some(n) if p.port >= n.inputs() => {
                    err(Code::PortOutOfRange, loc.clone(), format!("'{}' has {} inputs, port {} does not exist", p.node, n.inputs(), p.port))
                }
                Some(_) => *driven.entry((p.node.as_str(), p.port)).or_default() += 1,
            }
        }
        match e {
            Edge::Broadcast { dsts, tags, .. } if !tags.is_empty() => {
                if tags.len() != dsts.len() {
                    err(Code::TagMismatch, loc.clone(), format!("{} tags for {} destinations", tags.len(), dsts.len()));
                }
                let distinct: BTreeSet<u32> = tags.iter().copied().collect();
                if distinct.len() > fanout {
                    err(Code::PacketFanout, loc.clone(), format!("{} packet tags exceed the switch fan-out of {fanout}", distinct.len()));
                }
            }
            Edge::Packet { members, .. } => {
                let distinct: BTreeSet<u32> = members.iter().map(|m| m.tag).collect();
                if distinct.len() != members.len() {
                    err(Code::TagMismatch, loc.clone(), "packet members reuse a tag".to_string());
                }
                if members.len() > fanout {
                    err(Code::PacketFanout, loc.clone(), format!("{} packet members exceed the switch fan-out of {fanout}", members.len()));
                }
            }
            _ => {}
        }
    }

    let sinks: BTreeSet<(&str, u32)> = ir.sinks.iter().map(|p| (p.node.as_str(), p.port)).collect();
    for (i, n) in ir.nodes.iter().enumerate() {
        let loc = format!("nodes[{i}]");
        for port in 0..n.inputs() {
            match driven.get(&(n.id.as_str(), port)).copied().unwrap_or(0) {
                0 => err(Code::UndrivenPort, loc.clone(), format!("input {port} of '{}' is not driven", n.id)),
                1 => {}
                k => err(Code::MultiDrivenPort, loc.clone(), format!("input {port} of '{}' is driven {k} times", n.id)),
            }
        }
        for port in 0..n.outputs() {
            let key = (n.id.as_str(), port);
            if !consumed.contains(&key) && !sinks.contains(&key) {
                err(Code::UnconsumedPort, loc.clone(), format!("output {port} of '{}' has no consumer", n.id));
            }
        }
        if let NodeKind::Kernel { cascade_in, cascade_out, .. } = &n.kind {
            let ins = casc_in.get(n.id.as_str()).copied().unwrap_or(0);
            if *cascade_in && ins != 1 || !*cascade_in && ins != 0 || ins > 1 {
                err(Code::CascadeNotLinear, loc.clone(), format!("'{}' expects {} cascade inputs, has {ins}", n.id, u32::from(*cascade_in)));
            }
            if *cascade_out && !casc_out.contains_key(n.id.as_str()) {
                err(Code::CascadeNotLinear, loc.clone(), format!("cascade output of '{}' is not connected", n.id));
            }
        }
    }

    // Walking every chain from its head must end; otherwise it is a cycle.
    for &start in casc_out.keys() {
        let mut seen = BTreeSet::new();
        let mut cur = start;
        while let Some(&next) = casc_out.get(cur) {
            if !seen.insert(cur) {
                err(Code::CascadeNotLinear, "edges".to_string(), format!("cascade chain through '{start}' forms a cycle"));
                break;
            }
            cur = next;
        }
    }
    diags
}
