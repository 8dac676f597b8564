//! Computing-component topologies and their core layout.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::kernel::KernelSpec;

/// Maximum nesting of `Parallel` groups.
pub const MAX_PARALLEL_DEPTH: u32 = 2;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CcTopology {
    Single { kernel: String },
    Cascade { stages: u32, kernel: String },
    Parallel { groups: u32, inner: Box<CcTopology> },
    Butterfly { cores: u32, stage_kernels: Vec<String> },
}

/// Kernel-free shape of a topology, as written in the expression grammar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Shape {
    Single,
    Cascade(u32),
    Parallel(u32, Box<Shape>),
    Butterfly(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} (at offset {offset})")]
pub struct TopologySyntaxError {
    pub offset: usize,
    pub message: String,
}

impl Shape {
    /// Parses `topo := atom | "Parallel<" int ">" [ "*" topo ]` where
    /// `atom := "Single" | "Cascade<" int ">" | "Butterfly<" int ">"`.
    /// A bare `Parallel<k>` replicates a single core.
    pub fn parse(text: &str) -> Result<Shape, TopologySyntaxError> {
        let mut p = ShapeParser { s: text.as_bytes(), pos: 0 };
        p.skip_ws();
        let shape = p.topo()?;
        p.skip_ws();
        if p.pos != p.s.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(shape)
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Single => f.write_str("Single"),
            Shape::Cascade(n) => write!(f, "Cascade<{n}>"),
            Shape::Butterfly(n) => write!(f, "Butterfly<{n}>"),
            Shape::Parallel(k, inner) if **inner == Shape::Single => write!(f, "Parallel<{k}>"),
            Shape::Parallel(k, inner) => write!(f, "Parallel<{k}>*{inner}"),
        }
    }
}

struct ShapeParser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl ShapeParser<'_> {
    fn err(&self, message: &str) -> TopologySyntaxError {
        TopologySyntaxError { offset: self.pos, message: message.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, lit: &str) -> bool {
        if self.s[self.pos..].starts_with(lit.as_bytes()) {
            self.pos += lit.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, lit: &str) -> Result<(), TopologySyntaxError> {
        self.skip_ws();
        if self.eat(lit) {
            Ok(())
        } else {
            Err(self.err(&format!("expected '{lit}'")))
        }
    }

    fn int_arg(&mut self) -> Result<u32, TopologySyntaxError> {
        self.expect("<")?;
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected an integer"));
        }
        let digits = std::str::from_utf8(&self.s[start..self.pos]).unwrap_or("");
        let v: u32 = digits.parse().map_err(|_| TopologySyntaxError {
            offset: start,
            message: "integer out of range".to_string(),
        })?;
        self.expect(">")?;
        Ok(v)
    }

    fn topo(&mut self) -> Result<Shape, TopologySyntaxError> {
        self.skip_ws();
        if self.eat("Parallel") {
            let k = self.int_arg()?;
            self.skip_ws();
            if self.eat("*") {
                let inner = self.topo()?;
                Ok(Shape::Parallel(k, Box::new(inner)))
            } else {
                Ok(Shape::Parallel(k, Box::new(Shape::Single)))
            }
        } else if self.eat("Single") {
            Ok(Shape::Single)
        } else if self.eat("Cascade") {
            Ok(Shape::Cascade(self.int_arg()?))
        } else if self.eat("Butterfly") {
            Ok(Shape::Butterfly(self.int_arg()?))
        } else {
            Err(self.err("expected Single, Cascade<n>, Butterfly<n> or Parallel<k>"))
        }
    }
}

impl CcTopology {
    pub fn shape(&self) -> Shape {
        match self {
            CcTopology::Single { .. } => Shape::Single,
            CcTopology::Cascade { stages, .. } => Shape::Cascade(*stages),
            CcTopology::Parallel { groups, inner } => Shape::Parallel(*groups, Box::new(inner.shape())),
            CcTopology::Butterfly { cores, .. } => Shape::Butterfly(*cores),
        }
    }

    /// Attaches kernels to a parsed shape. Single and Cascade leaves use
    /// `kernel`; Butterfly uses `stage_kernels`.
    pub fn from_shape(shape: &Shape, kernel: Option<&str>, stage_kernels: &[String]) -> CcTopology {
        let k = || kernel.unwrap_or_default().to_string();
        match shape {
            Shape::Single => CcTopology::Single { kernel: k() },
            Shape::Cascade(n) => CcTopology::Cascade { stages: *n, kernel: k() },
            Shape::Parallel(g, inner) => CcTopology::Parallel {
                groups: *g,
                inner: Box::new(CcTopology::from_shape(inner, kernel, stage_kernels)),
            },
            Shape::Butterfly(n) => CcTopology::Butterfly { cores: *n, stage_kernels: stage_kernels.to_vec() },
        }
    }

    pub fn expression(&self) -> String {
        self.shape().to_string()
    }

    pub fn core_count(&self) -> u64 {
        match self {
            CcTopology::Single { .. } => 1,
            CcTopology::Cascade { stages, .. } => *stages as u64,
            CcTopology::Parallel { groups, inner } => *groups as u64 * inner.core_count(),
            CcTopology::Butterfly { cores, .. } => *cores as u64,
        }
    }

    pub fn parallel_depth(&self) -> u32 {
        match self {
            CcTopology::Parallel { inner, .. } => 1 + inner.parallel_depth(),
            _ => 0,
        }
    }

    /// The leaf kernel for Single/Cascade leaves, if any.
    pub fn leaf_kernel(&self) -> Option<&str> {
        match self {
            CcTopology::Single { kernel } | CcTopology::Cascade { kernel, .. } => Some(kernel),
            CcTopology::Parallel { inner, .. } => inner.leaf_kernel(),
            CcTopology::Butterfly { .. } => None,
        }
    }

    /// Every kernel name referenced by the topology.
    pub fn kernels(&self) -> Vec<&str> {
        match self {
            CcTopology::Butterfly { stage_kernels, .. } => stage_kernels.iter().map(String::as_str).collect(),
            other => other.leaf_kernel().into_iter().collect(),
        }
    }

    /// Lays the topology out as canonically indexed cores.
    pub fn layout(&self, kernels: &BTreeMap<String, KernelSpec>) -> Result<CcLayout, LayoutError> {
        let mut out = CcLayout::default();
        self.layout_into(kernels, &mut out)?;
        Ok(out)
    }

    fn layout_into(&self, kernels: &BTreeMap<String, KernelSpec>, out: &mut CcLayout) -> Result<(), LayoutError> {
        let lookup = |name: &str| kernels.get(name).ok_or_else(|| LayoutError::UnknownKernel(name.to_string()));
        match self {
            CcTopology::Single { kernel } => {
                let k = lookup(kernel)?;
                out.push(CoreSlot {
                    kernel: kernel.clone(),
                    ext_in: k.in_ports.external().max(1),
                    ext_out: k.out_ports.external().max(1),
                    ..CoreSlot::default()
                });
            }
            CcTopology::Cascade { stages, kernel } => {
                if *stages < 2 {
                    return Err(LayoutError::Arity(format!("Cascade needs at least 2 stages, got {stages}")));
                }
                let k = lookup(kernel)?;
                let first = out.cores.len() as u32;
                for s in 0..*stages {
                    let head = s == 0;
                    let tail = s == stages - 1;
                    out.push(CoreSlot {
                        kernel: kernel.clone(),
                        ext_in: if head { k.in_ports.external().max(1) } else { k.in_ports.external() },
                        ext_out: if tail { k.out_ports.external().max(1) } else { 0 },
                        cascade_in: !head,
                        cascade_out: !tail,
                        ..CoreSlot::default()
                    });
                    if !head {
                        out.cascade.push((first + s - 1, first + s));
                    }
                }
            }
            CcTopology::Parallel { groups, inner } => {
                if *groups < 2 {
                    return Err(LayoutError::Arity(format!("Parallel needs at least 2 groups, got {groups}")));
                }
                for _ in 0..*groups {
                    inner.layout_into(kernels, out)?;
                }
            }
            CcTopology::Butterfly { cores, stage_kernels } => {
                let stages = stage_kernels.len() as u32;
                if stages == 0 || *cores == 0 || cores % stages != 0 {
                    return Err(LayoutError::Arity(format!(
                        "Butterfly<{cores}> cannot be split into {stages} equal stages"
                    )));
                }
                let width = cores / stages;
                if width > 1 && !width.is_power_of_two() {
                    return Err(LayoutError::Arity(format!("Butterfly stage width {width} is not a power of two")));
                }
                let bits = width.trailing_zeros().max(1);
                for name in stage_kernels {
                    lookup(name)?;
                }
                let base = out.cores.len() as u32;
                for (s, kname) in stage_kernels.iter().enumerate() {
                    let s = s as u32;
                    let first = s == 0;
                    let last = s == stages - 1;
                    for _ in 0..width {
                        out.push(CoreSlot {
                            kernel: kname.clone(),
                            ext_in: if first { 1 } else { 0 },
                            ext_out: if last { 1 } else { 0 },
                            int_in: if first { 0 } else if width == 1 { 1 } else { 2 },
                            int_out: if last { 0 } else { 1 },
                            stage: s,
                            ..CoreSlot::default()
                        });
                    }
                    if !first {
                        let bit = 1u32 << ((s - 1) % bits);
                        for j in 0..width {
                            let src = base + (s - 1) * width + j;
                            let mut dsts = vec![(base + s * width + j, 0)];
                            if width > 1 {
                                dsts.push((base + s * width + (j ^ bit), 1));
                            }
                            out.internal.push(InternalLink { src, dsts });
                        }
                    }
                }
                out.butterfly_stages.push(ButterflyBlock { first_core: base, width, stages });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LayoutError {
    #[error("kernel '{0}' is not declared")]
    UnknownKernel(String),
    #[error("{0}")]
    Arity(String),
}

/// One core of a laid-out CC. External ports come first, internal after.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CoreSlot {
    pub index: u32,
    pub kernel: String,
    pub ext_in: u32,
    pub ext_out: u32,
    pub int_in: u32,
    pub int_out: u32,
    pub cascade_in: bool,
    pub cascade_out: bool,
    pub stage: u32,
}

impl CoreSlot {
    pub fn inputs(&self) -> u32 {
        self.ext_in + self.int_in
    }
    pub fn outputs(&self) -> u32 {
        self.ext_out + self.int_out
    }
}

/// Output port 0 of `src`'s internal outputs drives each `(core, internal input)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InternalLink {
    pub src: u32,
    pub dsts: Vec<(u32, u32)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ButterflyBlock {
    pub first_core: u32,
    pub width: u32,
    pub stages: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CcLayout {
    pub cores: Vec<CoreSlot>,
    pub cascade: Vec<(u32, u32)>,
    pub internal: Vec<InternalLink>,
    pub butterfly_stages: Vec<ButterflyBlock>,
}

impl CcLayout {
    fn push(&mut self, mut slot: CoreSlot) {
        slot.index = self.cores.len() as u32;
        self.cores.push(slot);
    }

    /// Longest cascade chain length (1 when there is no cascade).
    pub fn cascade_depth(&self) -> u32 {
        let mut depth = vec![1u32; self.cores.len()];
        for &(a, b) in &self.cascade {
            depth[b as usize] = depth[a as usize] + 1;
        }
        depth.into_iter().max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::kernel::PortCounts;

    fn kernels() -> BTreeMap<String, KernelSpec> {
        let mut m = BTreeMap::new();
        let mut k = KernelSpec::new("k", "k.cc");
        k.in_ports = PortCounts { stream: 2, cascade: 1, dma_buffer: 0 };
        k.out_ports = PortCounts { stream: 1, cascade: 1, dma_buffer: 0 };
        m.insert("k".into(), k);
        m.insert("b".into(), KernelSpec::new("b", "b.cc"));
        m
    }

    #[test]
    fn parse_and_print() {
        for s in ["Single", "Cascade<4>", "Parallel<16>*Cascade<4>", "Parallel<8>", "Butterfly<4>", "Parallel<2>*Parallel<3>*Single"] {
            let shape = Shape::parse(s).unwrap();
            let again = Shape::parse(&shape.to_string()).unwrap();
            assert_eq!(shape, again, "{s}");
        }
        assert_eq!(Shape::parse("Parallel<8>*Single").unwrap().to_string(), "Parallel<8>");
        assert_eq!(Shape::parse(" Parallel< 2 > * Cascade<3> ").unwrap().to_string(), "Parallel<2>*Cascade<3>");
    }

    #[test]
    fn parse_errors() {
        assert!(Shape::parse("Cascade").is_err());
        assert!(Shape::parse("Parallel<2>*").is_err());
        assert!(Shape::parse("Cascade<4>x").is_err());
        assert!(Shape::parse("Mesh<2>").is_err());
        let e = Shape::parse("Cascade<>").unwrap_err();
        assert_eq!(e.offset, 8);
    }

    #[test]
    fn parallel_cascade_layout() {
        let t = CcTopology::Parallel {
            groups: 16,
            inner: Box::new(CcTopology::Cascade { stages: 4, kernel: "k".into() }),
        };
        let l = t.layout(&kernels()).unwrap();
        assert_eq!(l.cores.len(), 64);
        assert_eq!(l.cascade.len(), 48);
        assert_eq!(l.cascade_depth(), 4);
        let with_out: Vec<u32> = l.cores.iter().filter(|c| c.ext_out > 0).map(|c| c.index).collect();
        assert_eq!(with_out, (3..64).step_by(4).collect::<Vec<_>>());
        assert!(l.cores.iter().all(|c| c.ext_in == 2));
    }

    #[test]
    fn butterfly_internal_links_drive_each_port_once() {
        let t = CcTopology::Butterfly { cores: 8, stage_kernels: vec!["b".into(); 2] };
        let l = t.layout(&kernels()).unwrap();
        let mut driven = std::collections::BTreeSet::new();
        for link in &l.internal {
            for d in &link.dsts {
                assert!(driven.insert(*d));
            }
        }
        assert_eq!(driven.len(), 8);
        let ins: u32 = l.cores.iter().map(|c| c.ext_in).sum();
        let outs: u32 = l.cores.iter().map(|c| c.ext_out).sum();
        assert_eq!((ins, outs), (4, 4));
    }

    #[test]
    fn butterfly_uneven_split_fails() {
        let t = CcTopology::Butterfly { cores: 6, stage_kernels: vec!["b".into(); 4] };
        assert!(matches!(t.layout(&kernels()), Err(LayoutError::Arity(_))));
    }
}
