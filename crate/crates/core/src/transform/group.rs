//! Grouping: within each size class, under-covered items are bundled into
//! groups of weight `[2 beta, 4 beta]` and replaced by the smallest item of
//! their group; the last, light group is dropped and waste restores dominance.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};
use serde::Serialize;

use super::WasteMode;
use crate::instance::{first_violation, size_class_of, Coverage};
use crate::pattern::{FractionalSolution, Pattern};
use crate::rational::{self, Q};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupReport {
    #[serde(with = "rational::serde_q")]
    pub objective_delta: Q,
    /// Total size of waste added.
    #[serde(with = "rational::serde_q")]
    pub waste_added: Q,
    pub classes: usize,
    /// Objective increase exceeded `16 beta` per touched class.
    pub alarm: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Holder<'a> {
    Regular(&'a Pattern),
    Waste,
}

/// Groups the items of `set` (weights) so each ends with coverage zero or
/// size-mass at least `beta`. The result dominates `x`, keeps every regular
/// weight and never enlarges the regular support.
pub fn group(x: &FractionalSolution, set: &BTreeSet<u64>, beta: &Q, mode: WasteMode) -> (FractionalSolution, GroupReport) {
    let cap = x.capacity();
    let cov = x.covered();
    let capq = rational::qu(cap);
    let size = |w: u64| rational::qu(w) / &capq;
    let two_beta = beta * rational::qi(2);

    let mut classes: BTreeMap<u32, Vec<u64>> = BTreeMap::new();
    for &w in set.iter().rev() {
        let c = cov.get(&w).cloned().unwrap_or_else(Q::zero);
        if c.is_positive() && size(w) * &c < *beta {
            classes.entry(size_class_of(w, cap)).or_default().push(w);
        }
    }

    // (holder, item) -> replacement item, None = removed
    let mut target: BTreeMap<(Holder, u64), Option<u64>> = BTreeMap::new();
    let mut proof_waste: Vec<(u64, Q)> = Vec::new();
    for (&ell, members) in &classes {
        let mut pairs: Vec<(Holder, u64, Q)> = Vec::new();
        for &w in members {
            for (p, xp) in x.regular() {
                let c = p.count(w);
                if c > 0 {
                    pairs.push((Holder::Regular(p), w, size(w) * xp * rational::qu(c as u64)));
                }
            }
            if let Some(xw) = x.waste().get(&w) {
                pairs.push((Holder::Waste, w, size(w) * xw));
            }
        }
        let mut current: Vec<(Holder, u64)> = Vec::new();
        let mut acc = Q::zero();
        for (h, w, wt) in pairs {
            current.push((h, w));
            acc += wt;
            if acc >= two_beta {
                let receiver = current.last().map(|&(_, w)| w).expect("non-empty group");
                for key in current.drain(..) {
                    target.insert(key, Some(receiver));
                }
                acc = Q::zero();
            }
        }
        for key in current.drain(..) {
            target.insert(key, None);
        }
        if mode == WasteMode::Proof {
            // alpha = 2^-(ell+1), the lower end of the class
            let copies = beta * rational::qi(4) * Q::from_integer(num_bigint::BigInt::from(1) << (ell + 1));
            proof_waste.push((members[0], copies));
        }
    }

    let mut out = FractionalSolution::new(cap);
    for (p, xp) in x.regular() {
        let mut items: Vec<(u64, u32)> = Vec::with_capacity(p.items().len());
        for &(w, c) in p.items() {
            match target.get(&(Holder::Regular(p), w)) {
                None => items.push((w, c)),
                Some(Some(r)) => items.push((*r, c)),
                Some(None) => {}
            }
        }
        let np = Pattern::new(items);
        if !np.is_empty() {
            out.add(np, xp.clone());
        }
    }
    for (&w, xw) in x.waste() {
        match target.get(&(Holder::Waste, w)) {
            None => out.add_waste(w, xw.clone()),
            Some(Some(r)) => out.add_waste(*r, xw.clone()),
            Some(None) => {}
        }
    }

    let waste_before = out.waste_size();
    match mode {
        WasteMode::Proof => {
            for (w, c) in proof_waste {
                out.add_waste(w, c);
            }
        }
        WasteMode::Audited => repair_dominance(&mut out, &cov, beta, set),
    }
    let waste_added = out.waste_size() - waste_before;
    let objective_delta = out.objective() - x.objective();
    let alarm = objective_delta > beta * rational::qi(16) * rational::qu(classes.len().max(1) as u64);
    let report = GroupReport { objective_delta, waste_added, classes: classes.len(), alarm };
    (out, report)
}

/// Adds the least waste that makes `x` dominate `target`, putting each unit
/// on the smallest item that still repairs the violated prefix. Items of
/// `guarded` receiving waste from zero coverage get at least `beta / s`.
pub(crate) fn repair_dominance(x: &mut FractionalSolution, target: &Coverage, beta: &Q, guarded: &BTreeSet<u64>) {
    let cap = x.capacity();
    let cov = x.covered();
    let mut keys: Vec<u64> = cov.keys().chain(target.keys()).copied().collect();
    keys.sort_unstable_by(|a, b| b.cmp(a));
    keys.dedup();
    let mut px = Q::zero();
    let mut pt = Q::zero();
    let mut added = Q::zero();
    let mut placed: BTreeSet<u64> = BTreeSet::new();
    for (pos, &w) in keys.iter().enumerate() {
        px += cov.get(&w).cloned().unwrap_or_else(Q::zero);
        pt += target.get(&w).cloned().unwrap_or_else(Q::zero);
        let need = &pt - &px - &added;
        if !need.is_positive() {
            continue;
        }
        let covered = |k: &u64| cov.get(k).is_some_and(|c| c.is_positive()) || placed.contains(k);
        // on the item itself, padded up to mass beta if it would start from zero
        let own = if covered(&w) || !guarded.contains(&w) {
            need.clone()
        } else {
            rational::max_q(need.clone(), beta * rational::qu(cap) / rational::qu(w))
        };
        let mut choice = (w, own);
        // or on the nearest larger item that is already covered
        if let Some(h) = keys[..pos].iter().rev().copied().find(|k| covered(k)) {
            if rational::qu(h) * &need < rational::qu(w) * &choice.1 {
                choice = (h, need);
            }
        }
        let (host, amount) = choice;
        placed.insert(host);
        added += &amount;
        x.add_waste(host, amount);
    }
    debug_assert!(first_violation(&x.covered(), target).is_none());
}
