use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::du::DuSpec;
use super::kernel::KernelSpec;
use super::platform::{PlatformOverride, PlatformSpec};
use super::pu::PuSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSpec {
    pub name: String,
    pub kernels: BTreeMap<String, KernelSpec>,
    pub pus: Vec<PuSpec>,
    pub dus: Vec<DuSpec>,
    /// DU name to the ordered PUs it serves.
    pub pairings: BTreeMap<String, Vec<String>>,
    pub platform_override: Option<PlatformOverride>,
}

/// A resolved DU with the indices of the PUs it serves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pair {
    pub du: usize,
    pub pus: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DesignError {
    #[error("cannot keep {requested} PUs, the design has {available}")]
    PuCount { requested: usize, available: usize },
    #[error("name '{0}' is used by both designs")]
    NameClash(String),
}

impl DesignSpec {
    pub fn empty(name: &str) -> Self {
        DesignSpec {
            name: name.to_string(),
            kernels: BTreeMap::new(),
            pus: Vec::new(),
            dus: Vec::new(),
            pairings: BTreeMap::new(),
            platform_override: None,
        }
    }

    pub fn effective_platform(&self, base: &PlatformSpec) -> PlatformSpec {
        match &self.platform_override {
            Some(o) => base.with_override(o),
            None => base.clone(),
        }
    }

    pub fn pu_index(&self, name: &str) -> Option<usize> {
        self.pus.iter().position(|p| p.name == name)
    }

    pub fn du_index(&self, name: &str) -> Option<usize> {
        self.dus.iter().position(|d| d.name == name)
    }

    /// Pairs in DU declaration order; unresolvable names are skipped.
    pub fn pairs(&self) -> Vec<Pair> {
        self.dus
            .iter()
            .enumerate()
            .map(|(i, du)| Pair {
                du: i,
                pus: self
                    .pairings
                    .get(&du.name)
                    .map(|names| names.iter().filter_map(|n| self.pu_index(n)).collect())
                    .unwrap_or_default(),
            })
            .collect()
    }

    /// PU indices in service order (DU order, then pairing order).
    pub fn service_order(&self) -> Vec<usize> {
        self.pairs().into_iter().flat_map(|p| p.pus).collect()
    }

    /// Keeps the first `n` PUs in service order, drops DUs left without PUs
    /// and scales the remaining DUs' byte budgets to the PUs they keep.
    pub fn restrict_pus(&self, n: usize) -> Result<DesignSpec, DesignError> {
        let order = self.service_order();
        if n == 0 || n > order.len() {
            return Err(DesignError::PuCount { requested: n, available: order.len() });
        }
        let keep: BTreeSet<usize> = order[..n].iter().copied().collect();
        let mut d = self.clone();
        d.pus = self.pus.iter().enumerate().filter(|(i, _)| keep.contains(i)).map(|(_, p)| p.clone()).collect();
        d.dus.clear();
        d.pairings.clear();
        for pair in self.pairs() {
            let kept: Vec<String> = pair
                .pus
                .iter()
                .filter(|i| keep.contains(i))
                .map(|&i| self.pus[i].name.clone())
                .collect();
            if kept.is_empty() {
                continue;
            }
            let du = &self.dus[pair.du];
            d.dus.push(du.scaled(kept.len() as u64, pair.pus.len() as u64));
            d.pairings.insert(du.name.clone(), kept);
        }
        Ok(d)
    }

    /// Disjoint union of two designs. Shared kernels must be identical.
    pub fn union(&self, other: &DesignSpec) -> Result<DesignSpec, DesignError> {
        let mut d = self.clone();
        for (name, k) in &other.kernels {
            match d.kernels.get(name) {
                Some(existing) if existing != k => return Err(DesignError::NameClash(name.clone())),
                _ => {
                    d.kernels.insert(name.clone(), k.clone());
                }
            }
        }
        for pu in &other.pus {
            if d.pu_index(&pu.name).is_some() {
                return Err(DesignError::NameClash(pu.name.clone()));
            }
            d.pus.push(pu.clone());
        }
        for du in &other.dus {
            if d.du_index(&du.name).is_some() {
                return Err(DesignError::NameClash(du.name.clone()));
            }
            d.dus.push(du.clone());
        }
        for (k, v) in &other.pairings {
            d.pairings.insert(k.clone(), v.clone());
        }
        Ok(d)
    }
}
