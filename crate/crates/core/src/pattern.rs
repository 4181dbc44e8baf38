//! Bin configurations (columns of the pattern matrix) and fractional
//! solutions over them, with waste entries kept in a separate ledger.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::InstanceError;
use crate::instance::{Coverage, Instance, PrefixProfile};
use crate::rational::{self, Q};

/// A multiset of item weights fitting one bin. Stored canonically as
/// `(weight, count)` pairs with strictly decreasing weights and positive counts.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize)]
#[serde(transparent)]
pub struct Pattern {
    items: Vec<(u64, u32)>,
}

impl Pattern {
    pub fn new(items: impl IntoIterator<Item = (u64, u32)>) -> Self {
        let mut m: BTreeMap<u64, u32> = BTreeMap::new();
        for (w, c) in items {
            if c > 0 {
                *m.entry(w).or_insert(0) += c;
            }
        }
        Pattern { items: m.into_iter().rev().collect() }
    }

    pub fn single(w: u64, c: u32) -> Self {
        Self::new([(w, c)])
    }

    pub fn items(&self) -> &[(u64, u32)] {
        &self.items
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn count(&self, w: u64) -> u32 {
        self.items.iter().find(|(x, _)| *x == w).map_or(0, |(_, c)| *c)
    }

    /// Total weight `sum p_i w_i` (size times capacity).
    pub fn load(&self) -> u128 {
        self.items.iter().map(|&(w, c)| w as u128 * c as u128).sum()
    }

    pub fn n_items(&self) -> u64 {
        self.items.iter().map(|&(_, c)| c as u64).sum()
    }

    pub fn fits(&self, capacity: u64) -> bool {
        self.load() <= capacity as u128
    }

    /// Same pattern with the count of `w` set to `c`.
    pub fn with_count(&self, w: u64, c: u32) -> Self {
        let mut m: BTreeMap<u64, u32> = self.items.iter().copied().collect();
        if c == 0 {
            m.remove(&w);
        } else {
            m.insert(w, c);
        }
        Pattern { items: m.into_iter().rev().collect() }
    }

    /// Removes `take` copies of `from` and adds `put` copies of `to`.
    pub fn exchange(&self, from: u64, take: u32, to: u64, put: u32) -> Self {
        let have = self.count(from);
        assert!(have >= take, "pattern lacks {take} copies of weight {from}");
        let p = self.with_count(from, have - take);
        let now = p.count(to);
        p.with_count(to, now + put)
    }

    /// Weights, one entry per copy, largest first.
    pub fn slots(&self) -> Vec<u64> {
        self.items.iter().flat_map(|&(w, c)| std::iter::repeat(w).take(c as usize)).collect()
    }
}

impl fmt::Debug for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, (w, c)) in self.items.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{w}x{c}")?;
        }
        write!(f, "}}")
    }
}

/// `p^T s <= 1`, checked exactly over the instance capacity.
pub fn is_valid(p: &Pattern, inst: &Instance) -> bool {
    p.fits(inst.capacity())
}

/// Non-negative weights over regular patterns plus waste entries `{i}`
/// bought at cost `2 s_i` per unit.
#[derive(Clone, PartialEq, Debug)]
pub struct FractionalSolution {
    capacity: u64,
    regular: BTreeMap<Pattern, Q>,
    waste: BTreeMap<u64, Q>,
}

impl FractionalSolution {
    pub fn new(capacity: u64) -> Self {
        FractionalSolution { capacity, regular: BTreeMap::new(), waste: BTreeMap::new() }
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn regular(&self) -> &BTreeMap<Pattern, Q> {
        &self.regular
    }

    pub fn waste(&self) -> &BTreeMap<u64, Q> {
        &self.waste
    }

    /// Adds weight `x` to pattern `p`, merging duplicate columns. Panics on an
    /// invalid pattern or a resulting negative weight; both are logic errors.
    pub fn add(&mut self, p: Pattern, x: Q) {
        assert!(p.fits(self.capacity), "pattern {p:?} exceeds capacity {}", self.capacity);
        if p.is_empty() || x.is_zero() {
            return;
        }
        let e = self.regular.entry(p.clone()).or_insert_with(Q::zero);
        *e += x;
        assert!(!e.is_negative(), "negative pattern weight");
        if e.is_zero() {
            self.regular.remove(&p);
        }
    }

    pub fn set(&mut self, p: Pattern, x: Q) {
        assert!(p.fits(self.capacity), "pattern {p:?} exceeds capacity {}", self.capacity);
        assert!(!x.is_negative(), "negative pattern weight");
        if x.is_zero() || p.is_empty() {
            self.regular.remove(&p);
        } else {
            self.regular.insert(p, x);
        }
    }

    pub fn remove(&mut self, p: &Pattern) -> Option<Q> {
        self.regular.remove(p)
    }

    pub fn weight(&self, p: &Pattern) -> Q {
        self.regular.get(p).cloned().unwrap_or_else(Q::zero)
    }

    pub fn add_waste(&mut self, w: u64, x: Q) {
        if x.is_zero() {
            return;
        }
        let e = self.waste.entry(w).or_insert_with(Q::zero);
        *e += x;
        assert!(!e.is_negative(), "negative waste weight");
        if e.is_zero() {
            self.waste.remove(&w);
        }
    }

    pub fn take_waste(&mut self) -> BTreeMap<u64, Q> {
        std::mem::take(&mut self.waste)
    }

    pub fn clear_waste(&mut self) {
        self.waste.clear();
    }

    /// Number of distinct regular columns in the support.
    pub fn support(&self) -> usize {
        self.regular.len()
    }

    pub fn fractional_support(&self) -> usize {
        self.regular.values().filter(|x| !x.is_integer()).count()
    }

    pub fn is_integral(&self) -> bool {
        self.regular.values().all(|x| x.is_integer()) && self.waste.values().all(|x| x.is_integer())
    }

    /// Per-type coverage `A x`, including waste entries.
    pub fn covered(&self) -> Coverage {
        let mut cov = self.regular_covered();
        for (&w, x) in &self.waste {
            *cov.entry(w).or_insert_with(Q::zero) += x;
        }
        cov
    }

    pub fn regular_covered(&self) -> Coverage {
        let mut cov = Coverage::new();
        for (p, x) in &self.regular {
            for &(w, c) in p.items() {
                *cov.entry(w).or_insert_with(Q::zero) += x * rational::qu(c as u64);
            }
        }
        cov
    }

    pub fn prefix_profile(&self) -> PrefixProfile {
        PrefixProfile::of(&self.covered())
    }

    /// `1^T x` over regular patterns only.
    pub fn regular_total(&self) -> Q {
        self.regular.values().sum()
    }

    /// `sum 2 s_i x_i` over waste entries.
    pub fn waste_cost(&self) -> Q {
        let num: Q = self.waste.iter().map(|(&w, x)| rational::qu(w) * x).sum();
        num * Q::new(BigInt::from(2), BigInt::from(self.capacity))
    }

    /// Total waste size `sum s_i x_i`.
    pub fn waste_size(&self) -> Q {
        let num: Q = self.waste.iter().map(|(&w, x)| rational::qu(w) * x).sum();
        num / rational::qu(self.capacity)
    }

    /// The objective `(1, 2s)^T x`.
    pub fn objective(&self) -> Q {
        self.regular_total() + self.waste_cost()
    }

    /// Componentwise sum with another solution over the same capacity.
    pub fn merge(&mut self, other: &FractionalSolution) {
        assert_eq!(self.capacity, other.capacity);
        for (p, x) in &other.regular {
            self.add(p.clone(), x.clone());
        }
        for (&w, x) in &other.waste {
            self.add_waste(w, x.clone());
        }
    }

    /// Splits into the integral parts `floor(x)` and the fractional remainder.
    pub fn split_integral(&self) -> (FractionalSolution, FractionalSolution) {
        let mut int = FractionalSolution::new(self.capacity);
        let mut frac = FractionalSolution::new(self.capacity);
        for (p, x) in &self.regular {
            let f = x.floor();
            int.add(p.clone(), f.clone());
            frac.add(p.clone(), x - f);
        }
        for (&w, x) in &self.waste {
            let f = x.floor();
            int.add_waste(w, f.clone());
            frac.add_waste(w, x - f);
        }
        (int, frac)
    }

    /// Serializes using type indices of `inst`; fails on weights unknown to it.
    pub fn to_dump(&self, inst: &Instance) -> Result<Vec<DumpEntry>, InstanceError> {
        let idx = |w: u64| inst.index_of(w).ok_or(InstanceError::Mismatch);
        let mut out = Vec::new();
        for (p, x) in &self.regular {
            let mut counts = BTreeMap::new();
            for &(w, c) in p.items() {
                counts.insert(idx(w)?, c);
            }
            out.push(DumpEntry { counts, kind: PatternKind::Regular, weight: rational::to_pair(x) });
        }
        for (&w, x) in &self.waste {
            let mut counts = BTreeMap::new();
            counts.insert(idx(w)?, 1);
            out.push(DumpEntry { counts, kind: PatternKind::Waste, weight: rational::to_pair(x) });
        }
        Ok(out)
    }

    pub fn from_dump(entries: &[DumpEntry], inst: &Instance) -> Result<Self, InstanceError> {
        let mut sol = FractionalSolution::new(inst.capacity());
        for e in entries {
            let x = rational::from_pair(&e.weight).ok_or_else(|| InstanceError::Parse("bad weight".into()))?;
            if x.is_negative() {
                return Err(InstanceError::Parse("negative weight".into()));
            }
            let mut items = Vec::new();
            for (&i, &c) in &e.counts {
                let w = *inst.weights().get(i).ok_or_else(|| InstanceError::Parse(format!("index {i} out of range")))?;
                items.push((w, c));
            }
            match e.kind {
                PatternKind::Regular => {
                    let p = Pattern::new(items);
                    if !p.fits(inst.capacity()) {
                        return Err(InstanceError::Parse(format!("pattern {p:?} exceeds capacity")));
                    }
                    sol.add(p, x);
                }
                PatternKind::Waste => {
                    if items.len() != 1 || items[0].1 != 1 {
                        return Err(InstanceError::Parse("waste entry must be a singleton".into()));
                    }
                    sol.add_waste(items[0].0, x);
                }
            }
        }
        Ok(sol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternKind {
    Regular,
    Waste,
}

/// One line of the solution dump format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpEntry {
    pub counts: BTreeMap<usize, u32>,
    pub kind: PatternKind,
    pub weight: [String; 2],
}

/// Exact objective of a solution; shorthand for [`FractionalSolution::objective`].
pub fn objective(x: &FractionalSolution) -> Q {
    x.objective()
}

pub fn covered(x: &FractionalSolution) -> (Coverage, PrefixProfile) {
    let c = x.covered();
    let p = PrefixProfile::of(&c);
    (c, p)
}

/// Largest `k` with `k` copies of weight `w` fitting in the free space of `p`.
pub fn free_copies(p: &Pattern, w: u64, capacity: u64) -> u64 {
    let free = capacity as u128 - p.load().min(capacity as u128);
    (free / w as u128) as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn inst(sizes: &[Q]) -> Instance {
        Instance::normalize(sizes, &qi(1)).unwrap()
    }

    #[test]
    fn validity_is_exact() {
        let halves = Instance::from_pairs(2, [(1, qi(2))]).unwrap();
        assert!(is_valid(&Pattern::single(1, 2), &halves));
        assert!(!is_valid(&Pattern::single(1, 3), &halves));
        let thirds = inst(&[q(1, 3)]);
        assert!(is_valid(&Pattern::single(1, 3), &thirds));
        assert!(!is_valid(&Pattern::single(1, 4), &thirds));
    }

    #[test]
    fn canonical_form_merges() {
        let a = Pattern::new([(3, 1), (5, 2), (3, 2), (1, 0)]);
        assert_eq!(a.items(), &[(5, 2), (3, 3)]);
        assert_eq!(a, Pattern::new([(5, 1), (3, 3), (5, 1)]));
        assert_eq!(a.exchange(3, 2, 6, 1).items(), &[(6, 1), (5, 2), (3, 1)]);
    }

    #[test]
    fn coverage_and_objective() {
        let mut x = FractionalSolution::new(4);
        assert!(x.covered().is_empty());
        x.add(Pattern::single(2, 2), qi(1));
        assert_eq!(x.covered().get(&2), Some(&qi(2)));
        assert_eq!(x.objective(), qi(1));

        let mut w = FractionalSolution::new(4);
        w.add_waste(1, qi(2));
        assert_eq!(w.objective(), qi(1));

        let mut m = FractionalSolution::new(2);
        m.add(Pattern::single(1, 1), q(1, 2));
        m.add_waste(1, qi(1));
        assert_eq!(m.objective(), q(3, 2));

        let mut h = FractionalSolution::new(2);
        h.add(Pattern::single(1, 1), q(1, 2));
        h.add_waste(1, q(1, 2));
        assert_eq!(h.covered().get(&1), Some(&qi(1)));
    }

    #[test]
    fn duplicate_columns_merge() {
        let mut x = FractionalSolution::new(10);
        x.add(Pattern::new([(3, 1), (2, 2)]), q(1, 3));
        x.add(Pattern::new([(2, 2), (3, 1)]), q(1, 6));
        assert_eq!(x.support(), 1);
        assert_eq!(x.regular_total(), q(1, 2));
        x.add(Pattern::new([(2, 2), (3, 1)]), q(-1, 2));
        assert_eq!(x.support(), 0);
    }

    #[test]
    fn dump_round_trip() {
        let inst = inst(&[q(1, 2), q(1, 3), q(1, 6)]);
        let mut x = FractionalSolution::new(inst.capacity());
        x.add(Pattern::new([(3, 1), (2, 1), (1, 1)]), q(2, 3));
        x.add_waste(2, q(1, 5));
        let d = x.to_dump(&inst).unwrap();
        let json = serde_json::to_string(&d).unwrap();
        let back: Vec<DumpEntry> = serde_json::from_str(&json).unwrap();
        assert_eq!(FractionalSolution::from_dump(&back, &inst).unwrap(), x);
    }
}
