//! Lowering a validated design to the graph IR.

use super::ir::*;
use super::{check_ir, GraphError};
use crate::model::pu::chunk_sizes;
use crate::model::*;
use crate::validate::validate_resources;

struct Lower<'a> {
    design: &'a DesignSpec,
    ir: GraphIr,
}

fn internal(msg: impl Into<String>) -> GraphError {
    GraphError::InternalContractViolation(msg.into())
}

impl Lower<'_> {
    fn kernel_spec(&self, name: &str) -> Result<&KernelSpec, GraphError> {
        self.design.kernels.get(name).ok_or_else(|| internal(format!("kernel '{name}' vanished during lowering")))
    }

    fn add(&mut self, id: String, section: &str, kind: NodeKind) -> String {
        self.ir.nodes.push(Node { id: id.clone(), section: section.to_string(), kind });
        id
    }

    fn plio(&mut self, id: String, section: &str, direction: Direction) -> String {
        let name = id.replace('.', "_");
        self.add(id, section, NodeKind::Plio { direction, name, bytes_per_iteration: 0 })
    }

    fn dca(&mut self, id: String, section: &str, kernel: &Option<String>, pst: u32, role: KernelRole, inputs: u32, outputs: u32) -> Result<String, GraphError> {
        let kname = kernel.as_deref().ok_or_else(|| internal("DCA connector without a kernel"))?;
        let source_ref = self.kernel_spec(kname)?.source_ref.clone();
        Ok(self.add(
            id,
            section,
            NodeKind::Kernel {
                kernel: kname.to_string(),
                source_ref,
                pst,
                core: 0,
                role,
                inputs,
                outputs,
                cascade_in: false,
                cascade_out: false,
            },
        ))
    }

    fn pu(&mut self, pu: &PuSpec) -> Result<(), GraphError> {
        let p = pu.name.as_str();
        let mut channels: Vec<PortRef> = Vec::new();
        let first_node = self.ir.nodes.len();
        let n_psts = pu.psts.len();
        for (s, pst) in pu.psts.iter().enumerate() {
            let si = s as u32;
            let layout = pst.cc.layout(&self.design.kernels).map_err(|e| internal(e.to_string()))?;
            let cores = layout.cores.len() as u32;
            let kid = |c: u32| format!("{p}.s{s}.k{c}");
            for slot in &layout.cores {
                let source_ref = self.kernel_spec(&slot.kernel)?.source_ref.clone();
                self.add(
                    kid(slot.index),
                    p,
                    NodeKind::Kernel {
                        kernel: slot.kernel.clone(),
                        source_ref,
                        pst: si,
                        core: slot.index,
                        role: KernelRole::Cc,
                        inputs: slot.inputs(),
                        outputs: slot.outputs(),
                        cascade_in: slot.cascade_in,
                        cascade_out: slot.cascade_out,
                    },
                );
            }
            for &(a, b) in &layout.cascade {
                self.ir.edges.push(Edge::Cascade { src: kid(a), dst: kid(b) });
            }
            for link in &layout.internal {
                let src_slot = &layout.cores[link.src as usize];
                let src = PortRef::new(kid(link.src), src_slot.ext_out);
                let dsts: Vec<PortRef> = link
                    .dsts
                    .iter()
                    .map(|&(c, k)| PortRef::new(kid(c), layout.cores[c as usize].ext_in + k))
                    .collect();
                if dsts.len() == 1 {
                    self.ir.edges.push(Edge::Stream { src, dst: dsts.into_iter().next().unwrap() });
                } else {
                    self.ir.edges.push(Edge::Broadcast { src, dsts, tags: Vec::new() });
                }
            }

            let mut offset = 0usize;
            for (d, dac) in pst.dacs.iter().enumerate() {
                let ports = dac.plio_ports as usize;
                let sources: Vec<PortRef> = if s == 0 {
                    (0..ports).map(|j| PortRef::new(self.plio(format!("{p}.s{s}.dac{d}.p{j}"), p, Direction::In), 0)).collect()
                } else {
                    let slice = channels.get(offset..offset + ports).ok_or_else(|| internal("PST chain arity"))?;
                    slice.to_vec()
                };
                offset += ports;
                let served = dac.served.resolve(cores).map_err(|e| internal(e.to_string()))?;
                let port = dac.input_port;
                let dst = |c: u32| PortRef::new(kid(c), port);
                match dac.mode {
                    DacMode::Dir => self.ir.edges.push(Edge::Stream { src: sources[0].clone(), dst: dst(served[0]) }),
                    DacMode::Bdc | DacMode::SwhBdc | DacMode::Swh => {
                        let mut at = 0;
                        for (j, size) in chunk_sizes(served.len(), ports).into_iter().enumerate() {
                            let chunk = &served[at..at + size];
                            at += size;
                            let src = sources[j].clone();
                            let edge = match dac.mode {
                                DacMode::Bdc => Edge::Broadcast { src, dsts: chunk.iter().map(|&c| dst(c)).collect(), tags: Vec::new() },
                                DacMode::SwhBdc => {
                                    let t = (size / dac.reuse_factor.max(1) as usize).max(1) as u32;
                                    Edge::Broadcast {
                                        src,
                                        dsts: chunk.iter().map(|&c| dst(c)).collect(),
                                        tags: (0..size as u32).map(|i| i % t).collect(),
                                    }
                                }
                                _ => Edge::Packet {
                                    direction: PacketDirection::Split,
                                    channel: src,
                                    members: chunk.iter().enumerate().map(|(i, &c)| PacketMember { tag: i as u32, port: dst(c) }).collect(),
                                },
                            };
                            self.ir.edges.push(edge);
                        }
                    }
                    DacMode::Dca => {
                        let node = self.dca(format!("{p}.s{s}.dac{d}.dca"), p, &dac.dca_kernel, si, KernelRole::DacDca, ports as u32, served.len() as u32)?;
                        for (j, src) in sources.into_iter().enumerate() {
                            self.ir.edges.push(Edge::Stream { src, dst: PortRef::new(&node, j as u32) });
                        }
                        for (i, &c) in served.iter().enumerate() {
                            self.ir.edges.push(Edge::Stream { src: PortRef::new(&node, i as u32), dst: dst(c) });
                        }
                    }
                }
            }

            let last = s + 1 == n_psts;
            let mut next = Vec::new();
            for (c, dcc) in pst.dccs.iter().enumerate() {
                let ports = dcc.plio_ports as usize;
                let served = dcc.served.resolve(cores).map_err(|e| internal(e.to_string()))?;
                let port = dcc.output_port;
                let src = |k: u32| PortRef::new(kid(k), port);
                match dcc.mode {
                    DccMode::Dir => {
                        let from = src(served[0]);
                        if last {
                            let out = self.plio(format!("{p}.s{s}.dcc{c}.p0"), p, Direction::Out);
                            self.ir.edges.push(Edge::Stream { src: from, dst: PortRef::new(out, 0) });
                        } else {
                            next.push(from);
                        }
                    }
                    DccMode::Swh => {
                        let mut at = 0;
                        for (j, size) in chunk_sizes(served.len(), ports).into_iter().enumerate() {
                            let chunk = &served[at..at + size];
                            at += size;
                            let sink = if last {
                                self.plio(format!("{p}.s{s}.dcc{c}.p{j}"), p, Direction::Out)
                            } else {
                                self.add(format!("{p}.s{s}.dcc{c}.j{j}"), p, NodeKind::Junction)
                            };
                            self.ir.edges.push(Edge::Packet {
                                direction: PacketDirection::Merge,
                                channel: PortRef::new(&sink, 0),
                                members: chunk.iter().enumerate().map(|(i, &k)| PacketMember { tag: i as u32, port: src(k) }).collect(),
                            });
                            if !last {
                                next.push(PortRef::new(sink, 0));
                            }
                        }
                    }
                    DccMode::Dca => {
                        let node = self.dca(format!("{p}.s{s}.dcc{c}.dca"), p, &dcc.dca_kernel, si, KernelRole::DccDca, served.len() as u32, ports as u32)?;
                        for (i, &k) in served.iter().enumerate() {
                            self.ir.edges.push(Edge::Stream { src: src(k), dst: PortRef::new(&node, i as u32) });
                        }
                        for j in 0..ports {
                            let from = PortRef::new(&node, j as u32);
                            if last {
                                let out = self.plio(format!("{p}.s{s}.dcc{c}.p{j}"), p, Direction::Out);
                                self.ir.edges.push(Edge::Stream { src: from, dst: PortRef::new(out, 0) });
                            } else {
                                next.push(from);
                            }
                        }
                    }
                }
            }
            channels = next;
        }
        self.assign_bytes(first_node, Direction::In, pu.per_iteration_bytes_in);
        self.assign_bytes(first_node, Direction::Out, pu.per_iteration_bytes_out);
        Ok(())
    }

    /// Splits a PU's per-iteration bytes over its PLIO channels; the first
    /// channels take the remainder.
    fn assign_bytes(&mut self, from: usize, dir: Direction, bytes: u64) {
        let idx: Vec<usize> = (from..self.ir.nodes.len())
            .filter(|&i| matches!(&self.ir.nodes[i].kind, NodeKind::Plio { direction, .. } if *direction == dir))
            .collect();
        for (k, size) in chunk_sizes(bytes as usize, idx.len()).into_iter().enumerate() {
            if let NodeKind::Plio { bytes_per_iteration, .. } = &mut self.ir.nodes[idx[k]].kind {
                *bytes_per_iteration = size as u64;
            }
        }
    }
}

/// Lowers a deployable design to the graph IR. PUs become sections, CC
/// cores become kernel nodes in canonical core order, and each connector
/// becomes PLIO endpoints plus the edges of its mode.
pub fn build_ir(design: &DesignSpec, platform: &PlatformSpec) -> Result<GraphIr, GraphError> {
    let report = validate_resources(design, platform);
    if !report.is_deployable {
        return Err(GraphError::NotDeployable(Box::new(report)));
    }
    let mut l = Lower { design, ir: GraphIr::empty(&design.name) };
    for pu in &design.pus {
        l.pu(pu)?;
    }
    let problems = check_ir(&l.ir, &design.effective_platform(platform));
    if let Some(first) = problems.first() {
        return Err(internal(format!("lowered graph fails its own check: {first}")));
    }
    Ok(l.ir)
}
