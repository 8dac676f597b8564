//! DDR reader behaviour of the AMC in its three access modes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::CostModel;
use crate::model::{AmcMode, PlatformSpec};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmcRequest {
    pub mode: AmcMode,
    /// Elements held by the memory block.
    pub memory_size: u64,
    #[serde(default)]
    pub addr_seq: Vec<u64>,
    #[serde(default)]
    pub burst_size: u64,
    /// Number of bursts (JUB) or single reads (UNOD).
    #[serde(default)]
    pub exec_count: u64,
    pub element_bytes: u64,
}

impl AmcRequest {
    pub fn csb(memory_size: u64, element_bytes: u64) -> Self {
        AmcRequest { mode: AmcMode::Csb, memory_size, addr_seq: Vec::new(), burst_size: 0, exec_count: 0, element_bytes }
    }

    pub fn jub(memory_size: u64, addr_seq: Vec<u64>, burst_size: u64, element_bytes: u64) -> Self {
        let exec_count = addr_seq.len() as u64;
        AmcRequest { mode: AmcMode::Jub, memory_size, addr_seq, burst_size, exec_count, element_bytes }
    }

    pub fn unod(memory_size: u64, addr_seq: Vec<u64>, element_bytes: u64) -> Self {
        let exec_count = addr_seq.len() as u64;
        AmcRequest { mode: AmcMode::Unod, memory_size, addr_seq, burst_size: 1, exec_count, element_bytes }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AmcError {
    #[error("read {index} touches element {addr}, outside a memory of {memory_size} elements")]
    OutOfBounds { index: usize, addr: u64, memory_size: u64 },
    #[error("address sequence has {have} entries for {need} executions")]
    ShortAddrSeq { have: usize, need: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmcTrace {
    /// Element indices in the order they enter the output stream.
    pub indices: Vec<u64>,
    /// PL cycles on one DDR port.
    pub cycles: f64,
}

pub fn amc_trace(req: &AmcRequest, cost: &CostModel, platform: &PlatformSpec) -> Result<AmcTrace, AmcError> {
    let n = req.exec_count;
    if req.mode != AmcMode::Csb && (req.addr_seq.len() as u64) < n {
        return Err(AmcError::ShortAddrSeq { have: req.addr_seq.len(), need: n });
    }
    let addrs = &req.addr_seq[..if req.mode == AmcMode::Csb { 0 } else { n as usize }];
    let oob = |index: usize, addr: u64| AmcError::OutOfBounds { index, addr, memory_size: req.memory_size };
    let indices: Vec<u64> = match req.mode {
        AmcMode::Csb => (0..req.memory_size).collect(),
        AmcMode::Jub => {
            let mut out = Vec::with_capacity((n * req.burst_size) as usize);
            for (i, &a) in addrs.iter().enumerate() {
                let end = a.checked_add(req.burst_size).ok_or_else(|| oob(i, a))?;
                if end > req.memory_size {
                    return Err(oob(i, end - 1));
                }
                out.extend(a..end);
            }
            out
        }
        AmcMode::Unod => {
            if let Some((i, &a)) = addrs.iter().enumerate().find(|(_, &a)| a >= req.memory_size) {
                return Err(oob(i, a));
            }
            addrs.to_vec()
        }
    };
    let cycles = cost.amc_cycles(req.mode, indices.len() as u64, req.element_bytes, platform);
    Ok(AmcTrace { indices, cycles })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(r: &AmcRequest) -> Result<AmcTrace, AmcError> {
        amc_trace(r, &CostModel::default(), &PlatformSpec::default())
    }

    #[test]
    fn branches() {
        assert_eq!(run(&AmcRequest::csb(8, 4)).unwrap().indices, (0..8).collect::<Vec<_>>());
        assert_eq!(run(&AmcRequest::jub(64, vec![0, 16], 4, 4)).unwrap().indices, vec![0, 1, 2, 3, 16, 17, 18, 19]);
        assert_eq!(run(&AmcRequest::unod(10, vec![5, 2, 9], 4)).unwrap().indices, vec![5, 2, 9]);
    }

    #[test]
    fn bounds() {
        assert!(matches!(run(&AmcRequest::jub(18, vec![0, 16], 4, 4)), Err(AmcError::OutOfBounds { index: 1, .. })));
        assert!(matches!(run(&AmcRequest::unod(9, vec![9], 4)), Err(AmcError::OutOfBounds { .. })));
        let mut r = AmcRequest::jub(64, vec![0], 4, 4);
        r.exec_count = 2;
        assert!(matches!(run(&r), Err(AmcError::ShortAddrSeq { .. })));
    }

    #[test]
    fn costs() {
        let t = run(&AmcRequest::csb(32, 4)).unwrap();
        assert_eq!(t.cycles, 2.0);
        let u = run(&AmcRequest::unod(10, vec![1, 2, 3], 4)).unwrap();
        assert_eq!(u.cycles, 72.0);
    }
}
