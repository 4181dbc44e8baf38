//! Unbounded knapsack over the integer capacity grid, the pricing oracle of
//! column generation.

use std::ops::Add;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::instance::Instance;
use crate::pattern::Pattern;
use crate::rational::Q;

/// Maximizes `sum v_i p_i` subject to `sum w_i p_i <= cap`. Items with
/// non-positive value are never used. Returns the optimum and the counts.
pub fn knapsack<T>(values: &[T], weights: &[u64], cap: u64) -> (T, Vec<u32>)
where
    T: Clone + PartialOrd + Add<Output = T> + Zero,
{
    let n = values.len();
    let useful: Vec<usize> = (0..n).filter(|&i| values[i] > T::zero() && weights[i] <= cap).collect();
    let mut counts = vec![0u32; n];
    if useful.is_empty() {
        return (T::zero(), counts);
    }
    let g = useful.iter().fold(0u64, |g, &i| g.gcd(&weights[i]));
    let c = (cap / g) as usize;
    let ws: Vec<usize> = useful.iter().map(|&i| (weights[i] / g) as usize).collect();
    let mut best: Vec<T> = vec![T::zero(); c + 1];
    // choice[t] = index into `useful` + 1 of the last item, or 0 if best[t] = best[t-1]
    let mut choice = vec![0u32; c + 1];
    for t in 1..=c {
        let mut b = best[t - 1].clone();
        let mut ch = 0u32;
        for (k, &w) in ws.iter().enumerate() {
            if w <= t {
                let cand = best[t - w].clone() + values[useful[k]].clone();
                if cand > b {
                    b = cand;
                    ch = k as u32 + 1;
                }
            }
        }
        best[t] = b;
        choice[t] = ch;
    }
    let mut t = c;
    while t > 0 {
        match choice[t] {
            0 => t -= 1,
            k => {
                let k = k as usize - 1;
                counts[useful[k]] += 1;
                t -= ws[k];
            }
        }
    }
    (best[c].clone(), counts)
}

/// Exact optimum of the pricing knapsack for non-negative rational duals,
/// one per type of `inst`. Negative duals are treated as zero.
pub fn exact_max(duals: &[Q], inst: &Instance) -> (Q, Pattern) {
    let weights = inst.weights();
    let mut denom = BigInt::from(1);
    for d in duals {
        if d > &Q::zero() {
            denom = denom.lcm(d.denom());
        }
    }
    let scaled: Vec<BigInt> = duals
        .iter()
        .map(|d| if d > &Q::zero() { d.numer() * (&denom / d.denom()) } else { BigInt::zero() })
        .collect();
    let max_copies = inst.capacity() / weights.iter().copied().min().unwrap_or(1).max(1) + 1;
    let bound = scaled.iter().max().cloned().unwrap_or_default() * BigInt::from(max_copies);
    let (value, counts) = if bound.bits() < 120 {
        let vals: Vec<i128> = scaled.iter().map(|v| v.to_i128().unwrap_or(0)).collect();
        let (v, c) = knapsack(&vals, weights, inst.capacity());
        (BigInt::from(v), c)
    } else {
        knapsack(&scaled, weights, inst.capacity())
    };
    let pattern = Pattern::new(weights.iter().copied().zip(counts));
    (Q::new(value, denom), pattern)
}

/// The improving column for `duals`, if its dual value exceeds one.
pub fn price_column(duals: &[Q], inst: &Instance) -> Option<(Pattern, Q)> {
    let (v, p) = exact_max(duals, inst);
    if v > Q::from_integer(BigInt::from(1)) {
        Some((p, v))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    #[test]
    fn zero_duals_price_nothing() {
        let inst = Instance::normalize(&[q(1, 2), q(1, 3)], &qi(1)).unwrap();
        assert!(price_column(&[qi(0), qi(0)], &inst).is_none());
    }

    #[test]
    fn single_half_gives_two_copies() {
        let inst = Instance::normalize(&[q(1, 2)], &qi(1)).unwrap();
        let (p, v) = price_column(&[qi(1)], &inst).unwrap();
        assert_eq!(v, qi(2));
        assert_eq!(p, Pattern::single(1, 2));
    }

    #[test]
    fn mixed_pair() {
        let inst = Instance::normalize(&[q(6, 10), q(4, 10)], &qi(1)).unwrap();
        let (p, v) = price_column(&[q(7, 10), q(1, 2)], &inst).unwrap();
        assert_eq!(v, q(6, 5));
        assert_eq!(p, Pattern::new([(3, 1), (2, 1)]));
    }

    #[test]
    fn float_and_integer_agree() {
        let w = [7u64, 5, 3];
        let (vf, cf) = knapsack(&[1.0f64, 0.8, 0.45], &w, 20);
        let (vi, ci) = knapsack(&[100i64, 80, 45], &w, 20);
        assert_eq!(cf, ci);
        assert!((vf * 100.0 - vi as f64).abs() < 1e-9);
    }
}
