//! Splitting off small items, geometric grouping of the large ones, and the
//! greedy fill that brings the set-aside items back at the end.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{size_class_of, Instance};
use crate::rational::{self, Q};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Preprocessed {
    /// Total size of the instance.
    #[serde(with = "rational::serde_q")]
    pub sigma: Q,
    /// Large items after rounding up within their groups.
    pub large: Instance,
    /// The original large items that `large` stands for.
    pub kept: BTreeMap<u64, u64>,
    /// Large items set aside by grouping, largest first.
    pub discarded: Vec<u64>,
    /// Items smaller than `1/sigma`, largest first.
    pub small: Vec<u64>,
    #[serde(with = "rational::serde_q")]
    pub discarded_size: Q,
    /// `sigma < 2`: no split, the caller should pack directly.
    pub tiny: bool,
}

/// Splits `inst` at size `1/sigma` and, if `group` is set, rounds the large
/// items up so that every remaining size carries total size above one.
///
/// Within size class `l` the items (largest first) are cut into runs of
/// `2^(l+1)`; the first full run plus any remainder is set aside and every
/// later run is rounded up to its largest member. Each run is dominated
/// item by item by the one before it, so the rounded instance needs no more
/// fractional bins than the original.
pub fn preprocess(inst: &Instance, group: bool) -> Result<Preprocessed> {
    let items = inst.item_weights()?;
    let cap = inst.capacity();
    let sigma = inst.total_size();
    let tiny = sigma < rational::qi(2);
    let total: u128 = items.iter().map(|&w| w as u128).sum();
    // s >= 1/sigma  <=>  w * total >= cap^2
    let is_large = |w: u64| tiny || (w as u128) * total >= (cap as u128) * (cap as u128);
    let (large_items, small): (Vec<u64>, Vec<u64>) = items.iter().partition(|&&w| is_large(w));

    let mut kept: BTreeMap<u64, u64> = BTreeMap::new();
    let mut rounded: BTreeMap<u64, u64> = BTreeMap::new();
    let mut discarded = Vec::new();
    if group && !tiny {
        let mut classes: BTreeMap<u32, Vec<u64>> = BTreeMap::new();
        for &w in &large_items {
            classes.entry(size_class_of(w, cap)).or_default().push(w);
        }
        for (ell, ws) in classes {
            let g = 1usize << (ell + 1).min(40);
            let runs = ws.len() / g;
            let cut = if runs >= 2 { ws.len() - (runs - 1) * g } else { ws.len() };
            discarded.extend_from_slice(&ws[..cut]);
            for run in ws[cut..].chunks(g) {
                *rounded.entry(run[0]).or_insert(0) += run.len() as u64;
                for &w in run {
                    *kept.entry(w).or_insert(0) += 1;
                }
            }
        }
    } else {
        for &w in &large_items {
            *kept.entry(w).or_insert(0) += 1;
            *rounded.entry(w).or_insert(0) += 1;
        }
    }
    discarded.sort_unstable_by(|a, b| b.cmp(a));
    let discarded_size = rational::qu(discarded.iter().sum()) / rational::qu(cap);
    let large = Instance::from_pairs(cap, rounded.into_iter().map(|(w, c)| (w, rational::qu(c))))?;
    Ok(Preprocessed { sigma, large, kept, discarded, small, discarded_size, tiny })
}

/// First Fit of `items` (largest first) into `bins`, opening bins as needed.
/// Returns the number of bins opened. When `sigma` is given and bins were
/// opened, every bin but the last must be at least `1 - 1/sigma` full.
pub fn greedy_fill(bins: &mut Vec<Vec<u64>>, items: &[u64], capacity: u64, sigma: Option<&Q>) -> Result<usize> {
    let mut sorted = items.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let mut loads = crate::packing::loads_of(bins);
    let opened = crate::packing::first_fit_into(bins, &mut loads, &sorted, capacity);
    if let Some(sigma) = sigma {
        if opened > 0 && !sigma.is_zero() {
            let slack = rational::qu(capacity) * (Q::one() / sigma);
            let last = loads.len() - 1;
            if let Some(k) = (0..last).find(|&k| rational::qu(capacity - loads[k]) > slack) {
                return Err(Error::Audit {
                    stage: "greedy-fill".into(),
                    detail: format!("bin {k} has load {} although a new bin was opened", loads[k]),
                });
            }
        }
    }
    Ok(opened)
}
