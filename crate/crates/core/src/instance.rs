//! Item sizes, multiplicities, size classes and the prefix dominance order.
//!
//! Sizes are stored as integer weights over a common denominator (the
//! capacity `D`), so a size is `weight / D`. All item types ever created
//! (including glued ones) are integer multiples of `1/D`, which lets every
//! coverage vector be keyed by weight.

use std::collections::BTreeMap;
use std::ops::Range;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::InstanceError;
use crate::pattern::FractionalSolution;
use crate::rational::{self, Q};

/// Coverage per item type, keyed by weight. Larger weights come first in
/// the sorted (prefix) order, so prefixes are taken over `iter().rev()`.
pub type Coverage = BTreeMap<u64, Q>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    capacity: u64,
    weights: Vec<u64>,
    #[serde(with = "rational::serde_q_vec")]
    multiplicities: Vec<Q>,
}

/// A dyadic size band `(2^-(l+1), 2^-l]` and the contiguous type indices inside it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SizeClass {
    pub exponent: u32,
    pub members: Range<usize>,
}

/// Cumulative coverage over types in non-increasing size order.
#[derive(Debug, Clone, PartialEq)]
pub struct PrefixProfile {
    pub entries: Vec<(u64, Q)>,
}

impl Instance {
    /// Builds an instance from `(weight, multiplicity)` pairs over capacity `capacity`.
    /// Equal weights are merged; zero multiplicities are kept (they carry a type).
    pub fn from_pairs(capacity: u64, pairs: impl IntoIterator<Item = (u64, Q)>) -> Result<Self, InstanceError> {
        if capacity == 0 {
            return Err(InstanceError::InvalidCapacity);
        }
        let mut merged: BTreeMap<u64, Q> = BTreeMap::new();
        for (idx, (w, b)) in pairs.into_iter().enumerate() {
            if w == 0 {
                return Err(InstanceError::NonPositive { index: idx });
            }
            if w > capacity {
                return Err(InstanceError::Oversized { index: idx });
            }
            if b.is_negative() {
                return Err(InstanceError::NegativeMultiplicity { index: idx });
            }
            *merged.entry(w).or_insert_with(Q::zero) += b;
        }
        let (weights, multiplicities) = merged.into_iter().rev().unzip();
        Ok(Instance { capacity, weights, multiplicities })
    }

    /// Integer benchmark weights with an integer capacity, one copy each.
    pub fn from_weights(weights: &[u64], capacity: u64) -> Result<Self, InstanceError> {
        Self::from_pairs(capacity, weights.iter().map(|&w| (w, Q::one())))
    }

    /// Divides rational sizes by `capacity` and puts them over a common denominator.
    pub fn normalize(raw_sizes: &[Q], capacity: &Q) -> Result<Self, InstanceError> {
        let ones = vec![Q::one(); raw_sizes.len()];
        Self::normalize_with_multiplicities(raw_sizes, &ones, capacity)
    }

    pub fn normalize_with_multiplicities(raw_sizes: &[Q], mult: &[Q], capacity: &Q) -> Result<Self, InstanceError> {
        if !capacity.is_positive() {
            return Err(InstanceError::InvalidCapacity);
        }
        if raw_sizes.len() != mult.len() {
            return Err(InstanceError::Parse("sizes and multiplicities differ in length".into()));
        }
        let mut sizes = Vec::with_capacity(raw_sizes.len());
        let mut denom: u64 = 1;
        for (idx, w) in raw_sizes.iter().enumerate() {
            if !w.is_positive() {
                return Err(InstanceError::NonPositive { index: idx });
            }
            let s = w / capacity;
            if s > Q::one() {
                return Err(InstanceError::Oversized { index: idx });
            }
            let d = s.denom().to_u64().ok_or(InstanceError::DenominatorTooLarge)?;
            denom = rational::lcm_u64(denom, d).ok_or(InstanceError::DenominatorTooLarge)?;
            sizes.push(s);
        }
        let dq = rational::qu(denom);
        let pairs: Vec<(u64, Q)> = sizes
            .iter()
            .zip(mult)
            .map(|(s, b)| ((s * &dq).to_integer().to_u64().unwrap_or(0), b.clone()))
            .collect();
        Self::from_pairs(denom, pairs)
    }

    /// Parses the BPPLIB/Falkenauer text format: count, capacity, then one weight per line.
    pub fn parse_bpp(text: &str) -> Result<Self, InstanceError> {
        let mut tokens = text.split_whitespace();
        let mut next = |what: &str| -> Result<u64, InstanceError> {
            let t = tokens.next().ok_or_else(|| InstanceError::Parse(format!("missing {what}")))?;
            t.parse::<u64>().map_err(|_| InstanceError::Parse(format!("bad {what}: {t:?}")))
        };
        let n = next("item count")? as usize;
        let capacity = next("capacity")?;
        if n == 0 {
            return Err(InstanceError::Empty);
        }
        let mut weights = Vec::with_capacity(n);
        for i in 0..n {
            weights.push(next(&format!("weight {}", i + 1))?);
        }
        if tokens.next().is_some() {
            return Err(InstanceError::Parse("trailing tokens after the last weight".into()));
        }
        Self::from_weights(&weights, capacity)
    }

    /// Inverse of [`Instance::parse_bpp`]. Needs integral multiplicities.
    pub fn to_bpp(&self) -> Result<String, InstanceError> {
        let items = self.item_weights()?;
        let mut out = format!("{}\n{}\n", items.len(), self.capacity);
        for w in items {
            out.push_str(&w.to_string());
            out.push('\n');
        }
        Ok(out)
    }

    /// Benchmark-record view: capacity and the expanded weights, largest first.
    pub fn denormalize(&self) -> Result<(u64, Vec<u64>), InstanceError> {
        Ok((self.capacity, self.item_weights()?))
    }

    pub fn parse_json(text: &str) -> Result<Self, InstanceError> {
        let raw: NativeJson = serde_json::from_str(text).map_err(|e| InstanceError::Parse(e.to_string()))?;
        let sizes = raw
            .sizes
            .iter()
            .map(|p| rational::from_pair(p).ok_or_else(|| InstanceError::Parse("bad size".into())))
            .collect::<Result<Vec<_>, _>>()?;
        let mult = match &raw.multiplicities {
            Some(ms) => ms
                .iter()
                .map(|p| rational::from_pair(p).ok_or_else(|| InstanceError::Parse("bad multiplicity".into())))
                .collect::<Result<Vec<_>, _>>()?,
            None => vec![Q::one(); sizes.len()],
        };
        if sizes.is_empty() {
            return Err(InstanceError::Empty);
        }
        Self::normalize_with_multiplicities(&sizes, &mult, &Q::one())
    }

    pub fn to_json(&self) -> String {
        let raw = NativeJson {
            sizes: self.sizes().iter().map(rational::to_pair).collect(),
            multiplicities: Some(self.multiplicities.iter().map(rational::to_pair).collect()),
        };
        serde_json::to_string(&raw).expect("plain data serializes")
    }

    /// Reads either format, sniffing on the first non-blank character.
    pub fn parse_any(text: &str) -> Result<Self, InstanceError> {
        if text.trim_start().starts_with('{') {
            Self::parse_json(text)
        } else {
            Self::parse_bpp(text)
        }
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn multiplicities(&self) -> &[Q] {
        &self.multiplicities
    }

    pub fn n_types(&self) -> usize {
        self.weights.len()
    }

    pub fn size(&self, i: usize) -> Q {
        Q::new(BigInt::from(self.weights[i]), BigInt::from(self.capacity))
    }

    pub fn sizes(&self) -> Vec<Q> {
        (0..self.n_types()).map(|i| self.size(i)).collect()
    }

    pub fn size_of_weight(&self, w: u64) -> Q {
        Q::new(BigInt::from(w), BigInt::from(self.capacity))
    }

    pub fn index_of(&self, w: u64) -> Option<usize> {
        self.weights.binary_search_by(|x| w.cmp(x)).ok()
    }

    /// Total item count, rounding fractional multiplicities up.
    pub fn n_items(&self) -> u64 {
        self.multiplicities.iter().map(|b| b.ceil().to_integer().to_u64().unwrap_or(0)).sum()
    }

    /// Total size `sum s_i b_i`.
    pub fn total_size(&self) -> Q {
        let num: Q = self.weights.iter().zip(&self.multiplicities).map(|(&w, b)| rational::qu(w) * b).sum();
        num / rational::qu(self.capacity)
    }

    pub fn has_integral_multiplicities(&self) -> bool {
        self.multiplicities.iter().all(|b| b.is_integer())
    }

    /// Every physical item as a weight, largest first.
    pub fn item_weights(&self) -> Result<Vec<u64>, InstanceError> {
        let mut out = Vec::new();
        for (&w, b) in self.weights.iter().zip(&self.multiplicities) {
            let c = rational::to_u64_exact(b).ok_or(InstanceError::FractionalMultiplicity)?;
            out.extend(std::iter::repeat(w).take(c as usize));
        }
        Ok(out)
    }

    /// The demand vector `b` as a coverage map.
    pub fn demand(&self) -> Coverage {
        self.weights
            .iter()
            .zip(&self.multiplicities)
            .filter(|(_, b)| !b.is_zero())
            .map(|(&w, b)| (w, b.clone()))
            .collect()
    }

    pub fn with_multiplicities(&self, mult: Vec<Q>) -> Result<Self, InstanceError> {
        Self::from_pairs(self.capacity, self.weights.iter().copied().zip(mult))
    }

    /// Instance whose types are the keys of `cov` (zero entries dropped).
    pub fn from_coverage(capacity: u64, cov: &Coverage) -> Result<Self, InstanceError> {
        Self::from_pairs(capacity, cov.iter().filter(|(_, b)| b.is_positive()).map(|(&w, b)| (w, b.clone())))
    }

    pub fn size_classes(&self) -> Vec<SizeClass> {
        let mut out: Vec<SizeClass> = Vec::new();
        for (i, &w) in self.weights.iter().enumerate() {
            let l = size_class_of(w, self.capacity);
            match out.last_mut() {
                Some(c) if c.exponent == l => c.members.end = i + 1,
                _ => out.push(SizeClass { exponent: l, members: i..i + 1 }),
            }
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct NativeJson {
    sizes: Vec<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    multiplicities: Option<Vec<[String; 2]>>,
}

/// Exponent `l` with `D/2^(l+1) < w <= D/2^l` (classes are closed above).
pub fn size_class_of(weight: u64, capacity: u64) -> u32 {
    debug_assert!(weight > 0);
    let (w, d) = (weight as u128, capacity as u128);
    let mut l = 0u32;
    while l < 120 && (w << (l + 1)) <= d {
        l += 1;
    }
    l
}

impl PrefixProfile {
    pub fn of(cov: &Coverage) -> Self {
        let mut acc = Q::zero();
        let entries = cov
            .iter()
            .rev()
            .map(|(&w, c)| {
                acc += c;
                (w, acc.clone())
            })
            .collect();
        PrefixProfile { entries }
    }

    /// Cumulative coverage of all types with weight `>= w`.
    pub fn at(&self, w: u64) -> Q {
        // entries are in decreasing weight order
        let pos = self.entries.partition_point(|(x, _)| *x >= w);
        if pos == 0 {
            Q::zero()
        } else {
            self.entries[pos - 1].1.clone()
        }
    }
}

/// Prefix dominance on coverage vectors: every prefix of `y` is at least that of `x`.
pub fn coverage_dominates(y: &Coverage, x: &Coverage) -> bool {
    first_violation(y, x).is_none()
}

/// First weight (in size order) at which the prefix of `y` falls short of `x`,
/// with the shortfall.
pub fn first_violation(y: &Coverage, x: &Coverage) -> Option<(u64, Q)> {
    let mut keys: Vec<u64> = y.keys().chain(x.keys()).copied().collect();
    keys.sort_unstable_by(|a, b| b.cmp(a));
    keys.dedup();
    let mut py = Q::zero();
    let mut px = Q::zero();
    for w in keys {
        if let Some(c) = y.get(&w) {
            py += c;
        }
        if let Some(c) = x.get(&w) {
            px += c;
        }
        if py < px {
            return Some((w, &px - &py));
        }
    }
    None
}

/// Per-type prefix shortfall `max(0, prefix_x - prefix_y)` in size order.
pub fn prefix_deficits(y: &Coverage, x: &Coverage) -> Vec<(u64, Q)> {
    let mut keys: Vec<u64> = y.keys().chain(x.keys()).copied().collect();
    keys.sort_unstable_by(|a, b| b.cmp(a));
    keys.dedup();
    let mut py = Q::zero();
    let mut px = Q::zero();
    let mut out = Vec::with_capacity(keys.len());
    for w in keys {
        if let Some(c) = y.get(&w) {
            py += c;
        }
        if let Some(c) = x.get(&w) {
            px += c;
        }
        let d = &px - &py;
        out.push((w, if d.is_positive() { d } else { Q::zero() }));
    }
    out
}

/// `y ⪰ x` for two fractional solutions over the same capacity.
pub fn dominates(y: &FractionalSolution, x: &FractionalSolution, inst: &Instance) -> Result<bool, InstanceError> {
    if y.capacity() != inst.capacity() || x.capacity() != inst.capacity() {
        return Err(InstanceError::Mismatch);
    }
    Ok(coverage_dominates(&y.covered(), &x.covered()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn qs(v: &[i64]) -> Vec<Q> {
        v.iter().map(|&x| qi(x)).collect()
    }

    #[test]
    fn normalize_benchmark_record() {
        let inst = Instance::normalize(&qs(&[50, 40, 40, 30, 20, 20]), &qi(100)).unwrap();
        assert_eq!(inst.sizes(), vec![q(1, 2), q(2, 5), q(3, 10), q(1, 5)]);
        assert_eq!(inst.multiplicities(), &[qi(1), qi(2), qi(1), qi(2)]);
        let inst = Instance::normalize(&qs(&[100]), &qi(100)).unwrap();
        assert_eq!(inst.sizes(), vec![qi(1)]);
        let inst = Instance::normalize(&qs(&[30, 30, 30]), &qi(100)).unwrap();
        assert_eq!(inst.sizes(), vec![q(3, 10)]);
        assert_eq!(inst.multiplicities(), &[qi(3)]);
    }

    #[test]
    fn normalize_rejects_bad_weights() {
        assert!(matches!(Instance::normalize(&qs(&[101]), &qi(100)), Err(InstanceError::Oversized { .. })));
        assert!(matches!(Instance::normalize(&qs(&[0]), &qi(100)), Err(InstanceError::NonPositive { .. })));
        assert!(matches!(Instance::normalize(&qs(&[-3]), &qi(100)), Err(InstanceError::NonPositive { .. })));
        assert!(matches!(Instance::normalize(&qs(&[3]), &qi(0)), Err(InstanceError::InvalidCapacity)));
    }

    #[test]
    fn bpp_round_trip() {
        let text = "6\n100\n50\n40\n40\n30\n20\n20\n";
        let inst = Instance::parse_bpp(text).unwrap();
        assert_eq!(inst.capacity(), 100);
        assert_eq!(inst.to_bpp().unwrap(), text);
        assert!(Instance::parse_bpp("2\n100\n50\n").is_err());
        assert!(Instance::parse_bpp("1\n100\n150\n").is_err());
        assert!(Instance::parse_bpp("0\n100\n").is_err());
    }

    #[test]
    fn json_round_trip() {
        let inst = Instance::normalize(&[q(1, 3), q(1, 4), q(1, 3)], &qi(1)).unwrap();
        let back = Instance::parse_json(&inst.to_json()).unwrap();
        assert_eq!(inst, back);
        assert_eq!(back.capacity(), 12);
        let parsed = Instance::parse_json(r#"{"sizes": [["1","2"],["3","4"]], "multiplicities": [["1","2"],["2","1"]]}"#).unwrap();
        assert_eq!(parsed.sizes(), vec![q(3, 4), q(1, 2)]);
        assert_eq!(parsed.multiplicities(), &[qi(2), q(1, 2)]);
    }

    #[test]
    fn size_classes_closed_above() {
        let inst = Instance::normalize(&[q(6, 10), q(3, 10), q(3, 10)], &qi(1)).unwrap();
        let cl = inst.size_classes();
        assert_eq!(cl, vec![SizeClass { exponent: 0, members: 0..1 }, SizeClass { exponent: 1, members: 1..2 }]);
        // one half sits at the top of the band (1/4, 1/2]
        let inst = Instance::normalize(&[q(1, 2), q(1, 2)], &qi(1)).unwrap();
        assert_eq!(inst.size_classes(), vec![SizeClass { exponent: 1, members: 0..1 }]);
        let inst = Instance::normalize(&[qi(1)], &qi(1)).unwrap();
        assert_eq!(inst.size_classes(), vec![SizeClass { exponent: 0, members: 0..1 }]);
        assert_eq!(size_class_of(1, 4), 2);
        assert_eq!(size_class_of(2, 5), 1);
    }

    #[test]
    fn prefix_dominance_basics() {
        let mut x = Coverage::new();
        x.insert(2, qi(1));
        let mut y = Coverage::new();
        y.insert(3, qi(1));
        assert!(coverage_dominates(&x, &x));
        assert!(coverage_dominates(&y, &x));
        assert!(!coverage_dominates(&x, &y));
        assert_eq!(first_violation(&x, &y), Some((3, qi(1))));
        let p = PrefixProfile::of(&y);
        assert_eq!(p.at(3), qi(1));
        assert_eq!(p.at(4), qi(0));
        assert_eq!(p.at(1), qi(1));
    }
}
