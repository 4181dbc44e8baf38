//! Integral packings: bins of item weights, audited against an instance.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::pattern::{DumpEntry, PatternKind};
use crate::rational;

/// Placed versus demanded copies of one item type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverageAudit {
    pub weight: u64,
    pub placed: u64,
    pub demand: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PackingResult {
    pub capacity: u64,
    /// Item weights per bin, largest first.
    pub bins: Vec<Vec<u64>>,
    /// Bins opened by the final greedy fill of waste or small items.
    pub waste_bins: usize,
    pub audit: Vec<CoverageAudit>,
}

impl PackingResult {
    /// Audits `bins` against `inst` and fails unless every bin fits and every
    /// item type is placed at least as often as demanded.
    pub fn new(inst: &Instance, mut bins: Vec<Vec<u64>>, waste_bins: usize) -> Result<Self> {
        for b in bins.iter_mut() {
            b.sort_unstable_by(|a, b| b.cmp(a));
        }
        bins.retain(|b| !b.is_empty());
        let audit = audit_bins(inst, &bins)?;
        Ok(PackingResult { capacity: inst.capacity(), bins, waste_bins, audit })
    }

    pub fn cost(&self) -> usize {
        self.bins.len()
    }

    /// One regular entry per distinct bin content, weighted by its count.
    pub fn to_dump(&self, inst: &Instance) -> Result<Vec<DumpEntry>> {
        let mut grouped: BTreeMap<BTreeMap<usize, u32>, u64> = BTreeMap::new();
        for bin in &self.bins {
            let mut counts = BTreeMap::new();
            for &w in bin {
                let i = inst.index_of(w).ok_or_else(|| Error::Precondition(format!("weight {w} is not an instance type")))?;
                *counts.entry(i).or_insert(0) += 1;
            }
            *grouped.entry(counts).or_insert(0) += 1;
        }
        Ok(grouped
            .into_iter()
            .map(|(counts, k)| DumpEntry { counts, kind: PatternKind::Regular, weight: rational::to_pair(&rational::qu(k)) })
            .collect())
    }
}

fn audit_bins(inst: &Instance, bins: &[Vec<u64>]) -> Result<Vec<CoverageAudit>> {
    let fail = |detail: String| Error::Audit { stage: "packing".into(), detail };
    let mut placed: BTreeMap<u64, u64> = BTreeMap::new();
    for (k, bin) in bins.iter().enumerate() {
        let load: u128 = bin.iter().map(|&w| w as u128).sum();
        if load > inst.capacity() as u128 {
            return Err(fail(format!("bin {k} has load {load} over capacity {}", inst.capacity())));
        }
        for &w in bin {
            *placed.entry(w).or_insert(0) += 1;
        }
    }
    let mut audit = Vec::with_capacity(inst.n_types());
    for (&w, b) in inst.weights().iter().zip(inst.multiplicities()) {
        let demand = rational::to_u64_exact(&rational::ceil(b)).unwrap_or(u64::MAX);
        let got = placed.remove(&w).unwrap_or(0);
        if got < demand {
            return Err(fail(format!("item {w} placed {got} times, demand {demand}")));
        }
        audit.push(CoverageAudit { weight: w, placed: got, demand });
    }
    if let Some((w, _)) = placed.into_iter().next() {
        return Err(fail(format!("bins contain weight {w}, which is not an instance type")));
    }
    Ok(audit)
}

/// First Fit of `items`, in the given order, into `bins` (loads tracked
/// alongside); opens new bins as needed and returns how many were opened.
pub fn first_fit_into(bins: &mut Vec<Vec<u64>>, loads: &mut Vec<u64>, items: &[u64], capacity: u64) -> usize {
    let before = bins.len();
    for &w in items {
        match loads.iter().position(|&l| l + w <= capacity) {
            Some(k) => {
                loads[k] += w;
                bins[k].push(w);
            }
            None => {
                loads.push(w);
                bins.push(vec![w]);
            }
        }
    }
    bins.len() - before
}

pub fn loads_of(bins: &[Vec<u64>]) -> Vec<u64> {
    bins.iter().map(|b| b.iter().sum()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn audit_rejects_overfull_and_missing() {
        let inst = Instance::from_weights(&[6, 4, 4], 10).unwrap();
        assert!(PackingResult::new(&inst, vec![vec![6, 4], vec![4]], 0).is_ok());
        assert!(PackingResult::new(&inst, vec![vec![6, 4, 4]], 0).is_err());
        assert!(PackingResult::new(&inst, vec![vec![6, 4]], 0).is_err());
        assert!(PackingResult::new(&inst, vec![vec![6, 4], vec![4, 3]], 0).is_err());
    }

    #[test]
    fn dump_groups_identical_bins() {
        let inst = Instance::from_weights(&[5, 5, 5, 5], 10).unwrap();
        let p = PackingResult::new(&inst, vec![vec![5, 5], vec![5, 5]], 0).unwrap();
        let d = p.to_dump(&inst).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].weight, ["2".to_string(), "1".to_string()]);
    }

    #[test]
    fn first_fit_opens_bins() {
        let mut bins = vec![vec![5]];
        let mut loads = vec![5];
        let opened = first_fit_into(&mut bins, &mut loads, &[5, 5, 3], 10);
        assert_eq!(opened, 1);
        assert_eq!(bins, vec![vec![5, 5], vec![5, 3]]);
    }
}
