//! Placing items into the slots of an integral solution.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::packing::PackingResult;
use crate::pattern::FractionalSolution;
use crate::rational;

/// Demands and supplies per item weight; item `i` may use a slot of item `j`
/// whenever `j` is at least as large.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransportProblem {
    pub demand: BTreeMap<u64, u64>,
    pub supply: BTreeMap<u64, u64>,
}

/// Copies of item `item` placed into slots of item `slot`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Flow {
    pub item: u64,
    pub slot: u64,
    pub count: u64,
}

impl TransportProblem {
    pub fn new(demand: BTreeMap<u64, u64>, supply: BTreeMap<u64, u64>) -> Self {
        TransportProblem { demand, supply }
    }

    /// First weight (largest first) at which the prefix supply falls short
    /// of the prefix demand.
    pub fn hall_violation(&self) -> Option<u64> {
        let mut keys: Vec<u64> = self.demand.keys().chain(self.supply.keys()).copied().collect();
        keys.sort_unstable_by(|a, b| b.cmp(a));
        keys.dedup();
        let (mut d, mut s) = (0u128, 0u128);
        for w in keys {
            d += *self.demand.get(&w).unwrap_or(&0) as u128;
            s += *self.supply.get(&w).unwrap_or(&0) as u128;
            if s < d {
                return Some(w);
            }
        }
        None
    }

    /// Largest demand first, each unit into the smallest slot that still fits it.
    pub fn solve(&self) -> Option<Vec<Flow>> {
        let mut left = self.supply.clone();
        let mut flows = Vec::new();
        for (&item, &d) in self.demand.iter().rev() {
            let mut need = d;
            while need > 0 {
                let (&slot, avail) = left.range_mut(item..).find(|(_, a)| **a > 0)?;
                let k = need.min(*avail);
                *avail -= k;
                need -= k;
                flows.push(Flow { item, slot, count: k });
            }
        }
        Some(flows)
    }
}

/// Turns the integral, waste-free `y` into bins holding the items of
/// `demand`, each in a slot of equal or larger weight. Unused slots stay empty.
pub fn assign_slots(y: &FractionalSolution, demand: &BTreeMap<u64, u64>) -> Result<Vec<Vec<u64>>> {
    if !y.is_integral() || !y.waste().is_empty() {
        return Err(Error::Precondition("assignment needs an integral solution without waste".into()));
    }
    let mut bins: Vec<Vec<u64>> = Vec::new();
    let mut slots: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (p, x) in y.regular() {
        let copies = rational::to_u64_exact(x).expect("integral weight");
        for _ in 0..copies {
            let k = bins.len();
            bins.push(Vec::new());
            for w in p.slots() {
                slots.entry(w).or_default().push(k);
            }
        }
    }
    let supply = slots.iter().map(|(&w, v)| (w, v.len() as u64)).collect();
    let tp = TransportProblem::new(demand.clone(), supply);
    if let Some(w) = tp.hall_violation() {
        return Err(Error::Audit { stage: "assign".into(), detail: format!("supply of items >= {w} falls short of demand") });
    }
    let flows = tp.solve().ok_or_else(|| Error::Audit { stage: "assign".into(), detail: "greedy sweep failed".into() })?;
    for f in flows {
        let free = slots.get_mut(&f.slot).expect("slot weight in supply");
        for _ in 0..f.count {
            let k = free.pop().expect("flow within supply");
            bins[k].push(f.item);
        }
    }
    Ok(bins)
}

/// Places the items of `inst` (integral multiplicities) into the slots of
/// `y`, which must dominate the demand.
pub fn assign_items(y: &FractionalSolution, inst: &Instance) -> Result<PackingResult> {
    let demand = integral_demand(inst)?;
    let bins = assign_slots(y, &demand)?;
    PackingResult::new(inst, bins, 0)
}

pub(crate) fn integral_demand(inst: &Instance) -> Result<BTreeMap<u64, u64>> {
    if !inst.has_integral_multiplicities() {
        return Err(Error::Precondition("packing needs integral multiplicities".into()));
    }
    Ok(inst
        .weights()
        .iter()
        .zip(inst.multiplicities())
        .map(|(&w, b)| (w, rational::to_u64_exact(b).expect("integral multiplicity")))
        .filter(|&(_, b)| b > 0)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::Pattern;
    use crate::rational::qi;

    #[test]
    fn exact_cover_is_identity() {
        let inst = Instance::from_weights(&[6, 4, 3, 3], 10).unwrap();
        let mut y = FractionalSolution::new(10);
        y.add(Pattern::new([(6, 1), (4, 1)]), qi(1));
        y.add(Pattern::single(3, 2), qi(1));
        let r = assign_items(&y, &inst).unwrap();
        assert_eq!(r.cost(), 2);
        assert!(r.bins.contains(&vec![6, 4]));
    }

    #[test]
    fn smaller_items_use_larger_slots() {
        let inst = Instance::from_weights(&[4, 4], 10).unwrap();
        let mut y = FractionalSolution::new(10);
        y.add(Pattern::single(5, 2), qi(1));
        let r = assign_items(&y, &inst).unwrap();
        assert_eq!(r.bins, vec![vec![4, 4]]);
    }

    #[test]
    fn hall_violation_detected() {
        let tp = TransportProblem::new([(5, 2)].into(), [(4, 2), (6, 1)].into());
        assert_eq!(tp.hall_violation(), Some(5));
        assert!(tp.solve().is_none());
        let tp = TransportProblem::new([(5, 2), (3, 1)].into(), [(6, 2), (4, 1)].into());
        assert_eq!(tp.hall_violation(), None);
        let flows = tp.solve().unwrap();
        assert_eq!(flows.iter().map(|f| f.count).sum::<u64>(), 3);
    }
}
