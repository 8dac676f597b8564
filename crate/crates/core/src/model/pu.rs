//! Processing units: PSTs made of data-access connectors, a computing
//! component and data-collection connectors.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::topology::CcTopology;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DacMode {
    #[serde(rename = "DIR")]
    Dir,
    #[serde(rename = "BDC")]
    Bdc,
    #[serde(rename = "SWH")]
    Swh,
    /// Packet switching whose tags are shared by `reuse_factor` cores each.
    #[serde(rename = "SWH+BDC")]
    SwhBdc,
    #[serde(rename = "DCA")]
    Dca,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DccMode {
    #[serde(rename = "DIR")]
    Dir,
    #[serde(rename = "SWH")]
    Swh,
    #[serde(rename = "DCA")]
    Dca,
}

impl DacMode {
    pub const ALL: [DacMode; 5] = [DacMode::Dir, DacMode::Bdc, DacMode::Swh, DacMode::SwhBdc, DacMode::Dca];

    pub fn as_str(self) -> &'static str {
        match self {
            DacMode::Dir => "DIR",
            DacMode::Bdc => "BDC",
            DacMode::Swh => "SWH",
            DacMode::SwhBdc => "SWH+BDC",
            DacMode::Dca => "DCA",
        }
    }
}

impl DccMode {
    pub const ALL: [DccMode; 3] = [DccMode::Dir, DccMode::Swh, DccMode::Dca];

    pub fn as_str(self) -> &'static str {
        match self {
            DccMode::Dir => "DIR",
            DccMode::Swh => "SWH",
            DccMode::Dca => "DCA",
        }
    }
}

impl FromStr for DacMode {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        DacMode::ALL.into_iter().find(|m| m.as_str() == s).ok_or(())
    }
}

impl FromStr for DccMode {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        DccMode::ALL.into_iter().find(|m| m.as_str() == s).ok_or(())
    }
}

/// Half-open range `start..end` taken every `step` cores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreRange {
    pub start: u32,
    pub end: u32,
    pub step: u32,
}

/// Which CC cores a connector serves. Written as `all` or a comma list of
/// `n`, `a..b` and `a..b:s` items.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoreSelector {
    All,
    Ranges(Vec<CoreRange>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SelectorError {
    #[error("cannot parse selector item '{0}'")]
    Syntax(String),
    #[error("selector is empty")]
    Empty,
    #[error("core {core} is out of range for a CC of {cores} cores")]
    OutOfRange { core: u32, cores: u32 },
    #[error("core {0} is selected more than once")]
    Duplicate(u32),
}

impl CoreSelector {
    pub fn single(core: u32) -> Self {
        CoreSelector::Ranges(vec![CoreRange { start: core, end: core + 1, step: 1 }])
    }

    pub fn range(start: u32, end: u32, step: u32) -> Self {
        CoreSelector::Ranges(vec![CoreRange { start, end, step }])
    }

    pub fn list(cores: &[u32]) -> Self {
        CoreSelector::Ranges(cores.iter().map(|&c| CoreRange { start: c, end: c + 1, step: 1 }).collect())
    }

    /// Selected cores in ascending canonical order.
    pub fn resolve(&self, cores: u32) -> Result<Vec<u32>, SelectorError> {
        let ranges = match self {
            CoreSelector::All => return if cores == 0 { Err(SelectorError::Empty) } else { Ok((0..cores).collect()) },
            CoreSelector::Ranges(r) => r,
        };
        let mut out = Vec::new();
        for r in ranges {
            let mut c = r.start;
            while c < r.end {
                if c >= cores {
                    return Err(SelectorError::OutOfRange { core: c, cores });
                }
                out.push(c);
                c = c.saturating_add(r.step.max(1));
            }
        }
        if out.is_empty() {
            return Err(SelectorError::Empty);
        }
        out.sort_unstable();
        for w in out.windows(2) {
            if w[0] == w[1] {
                return Err(SelectorError::Duplicate(w[0]));
            }
        }
        Ok(out)
    }
}

impl fmt::Display for CoreSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreSelector::All => f.write_str("all"),
            CoreSelector::Ranges(rs) => {
                for (i, r) in rs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    if r.step == 1 && r.end == r.start + 1 {
                        write!(f, "{}", r.start)?;
                    } else if r.step == 1 {
                        write!(f, "{}..{}", r.start, r.end)?;
                    } else {
                        write!(f, "{}..{}:{}", r.start, r.end, r.step)?;
                    }
                }
                Ok(())
            }
        }
    }
}

impl FromStr for CoreSelector {
    type Err = SelectorError;
    fn from_str(s: &str) -> Result<Self, SelectorError> {
        let s = s.trim();
        if s == "all" {
            return Ok(CoreSelector::All);
        }
        let mut ranges = Vec::new();
        for item in s.split(',') {
            let item = item.trim();
            let bad = || SelectorError::Syntax(item.to_string());
            let num = |t: &str| t.trim().parse::<u32>().map_err(|_| bad());
            let r = match item.split_once("..") {
                None => {
                    let c = num(item)?;
                    CoreRange { start: c, end: c.checked_add(1).ok_or_else(bad)?, step: 1 }
                }
                Some((a, rest)) => {
                    let (b, step) = match rest.split_once(':') {
                        Some((b, st)) => (num(b)?, num(st)?),
                        None => (num(rest)?, 1),
                    };
                    if step == 0 {
                        return Err(bad());
                    }
                    CoreRange { start: num(a)?, end: b, step }
                }
            };
            ranges.push(r);
        }
        Ok(CoreSelector::Ranges(ranges))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DacSpec {
    pub mode: DacMode,
    pub plio_ports: u32,
    pub served: CoreSelector,
    pub reuse_factor: u32,
    /// External input port index fed on each served core.
    pub input_port: u32,
    pub dca_kernel: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DccSpec {
    pub mode: DccMode,
    pub plio_ports: u32,
    pub served: CoreSelector,
    /// External output port index collected from each served core.
    pub output_port: u32,
    pub dca_kernel: Option<String>,
}

impl DacSpec {
    pub fn new(mode: DacMode, plio_ports: u32, served: CoreSelector) -> Self {
        DacSpec { mode, plio_ports, served, reuse_factor: 1, input_port: 0, dca_kernel: None }
    }
}

impl DccSpec {
    pub fn new(mode: DccMode, plio_ports: u32, served: CoreSelector) -> Self {
        DccSpec { mode, plio_ports, served, output_port: 0, dca_kernel: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PstSpec {
    pub dacs: Vec<DacSpec>,
    pub cc: CcTopology,
    pub dccs: Vec<DccSpec>,
}

impl PstSpec {
    pub fn fan_in(&self) -> u32 {
        self.dacs.iter().map(|d| d.plio_ports).sum()
    }

    pub fn fan_out(&self) -> u32 {
        self.dccs.iter().map(|d| d.plio_ports).sum()
    }

    pub fn dca_count(&self) -> u64 {
        let dac = self.dacs.iter().filter(|d| d.mode == DacMode::Dca).count();
        let dcc = self.dccs.iter().filter(|d| d.mode == DccMode::Dca).count();
        (dac + dcc) as u64
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PuSpec {
    pub name: String,
    pub psts: Vec<PstSpec>,
    pub per_iteration_bytes_in: u64,
    pub per_iteration_bytes_out: u64,
    pub per_iteration_ops: u64,
}

/// Contiguous split of `n` items into `parts` chunks whose sizes differ by at
/// most one; earlier chunks take the remainder.
pub fn chunk_sizes(n: usize, parts: usize) -> Vec<usize> {
    if parts == 0 {
        return Vec::new();
    }
    let base = n / parts;
    let extra = n % parts;
    (0..parts).map(|i| base + usize::from(i < extra)).collect()
}
