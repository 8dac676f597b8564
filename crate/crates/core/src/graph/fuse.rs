use std::collections::BTreeSet;

use super::ir::*;
use super::repo::StoredGraph;
use super::{check_ir, GraphError};
use crate::model::PlatformSpec;

/// Merges `addition` into `base`, prefixing every node id, section and PLIO
/// name of the addition with `prefix`.
pub fn fuse(base: &GraphIr, addition: &StoredGraph, prefix: &str, platform: &PlatformSpec) -> Result<GraphIr, GraphError> {
    let rename = |id: &str| format!("{prefix}.{id}");
    let taken: BTreeSet<&str> = base.nodes.iter().map(|n| n.id.as_str()).collect();
    let taken_plio: BTreeSet<&str> = base
        .nodes
        .iter()
        .filter_map(|n| match &n.kind {
            NodeKind::Plio { name, .. } => Some(name.as_str()),
            _ => None,
        })
        .collect();
    let mut out = base.clone();
    for n in &addition.ir.nodes {
        let id = rename(&n.id);
        if taken.contains(id.as_str()) {
            return Err(GraphError::IdCollision(id));
        }
        let mut kind = n.kind.clone();
        if let NodeKind::Plio { name, .. } = &mut kind {
            *name = format!("{prefix}_{name}");
            if taken_plio.contains(name.as_str()) {
                return Err(GraphError::IdCollision(name.clone()));
            }
        }
        out.nodes.push(Node { id, section: rename(&n.section), kind });
    }
    for e in &addition.ir.edges {
        let mut e = e.clone();
        e.rename(&rename);
        out.edges.push(e);
    }
    out.sinks.extend(addition.ir.sinks.iter().map(|p| PortRef::new(rename(&p.node), p.port)));

    let c = out.census();
    let mut over = Vec::new();
    if c.kernel_nodes > platform.aie_core_count as u64 {
        over.push(format!("{} kernels for {} AIE cores", c.kernel_nodes, platform.aie_core_count));
    }
    if c.plio_in > platform.plio_count as u64 {
        over.push(format!("{} input PLIO for {}", c.plio_in, platform.plio_count));
    }
    if c.plio_out > platform.plio_count as u64 {
        over.push(format!("{} output PLIO for {}", c.plio_out, platform.plio_count));
    }
    if !over.is_empty() {
        return Err(GraphError::CombinedOverBudget(over.join(", ")));
    }
    if let Some(d) = check_ir(&out, platform).first() {
        return Err(GraphError::InternalContractViolation(format!("fused graph fails its check: {d}")));
    }
    Ok(out)
}
