//! Integral rounding of fractional waste patterns.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::rational::{self, Q};

/// Buys an integral number of singletons per item so that, with items taken
/// largest first, the bought count of every prefix is the ceiling of the
/// fractional count. The result dominates `waste` and its total size exceeds
/// that of `waste` by less than the largest item.
pub fn finalize_waste(waste: &BTreeMap<u64, Q>) -> BTreeMap<u64, u64> {
    let mut out = BTreeMap::new();
    let mut prefix = Q::zero();
    let mut bought = 0u64;
    for (&w, x) in waste.iter().rev() {
        prefix += x;
        let target = rational::to_u64_exact(&rational::ceil(&prefix)).expect("waste count fits in u64");
        if target > bought {
            out.insert(w, target - bought);
            bought = target;
        }
    }
    out
}

/// The bought singletons as a list of weights, largest first.
pub fn waste_items(counts: &BTreeMap<u64, u64>) -> Vec<u64> {
    counts.iter().rev().flat_map(|(&w, &c)| std::iter::repeat_n(w, c as usize)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::coverage_dominates;
    use crate::rational::{q, qi, qu};

    fn as_cov(c: &BTreeMap<u64, u64>) -> BTreeMap<u64, Q> {
        c.iter().map(|(&w, &k)| (w, qu(k))).collect()
    }

    #[test]
    fn empty_waste_buys_nothing() {
        assert!(finalize_waste(&BTreeMap::new()).is_empty());
    }

    #[test]
    fn equal_fractions_buy_one_copy() {
        // four singletons of weight 1/4 each
        let waste: BTreeMap<u64, Q> = [(7, q(1, 4)), (6, q(1, 4)), (5, q(1, 4)), (4, q(1, 4))].into();
        let y = finalize_waste(&waste);
        assert_eq!(y, [(7, 1)].into());
        assert!(coverage_dominates(&as_cov(&y), &waste));
    }

    #[test]
    fn half_size_weight_two() {
        let waste: BTreeMap<u64, Q> = [(5, qi(2))].into();
        let y = finalize_waste(&waste);
        assert_eq!(y, [(5, 2)].into());
        assert_eq!(waste_items(&y), vec![5, 5]);
    }
}
