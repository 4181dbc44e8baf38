//! Alternating grouping and gluing until no support pattern holds more than
//! a `delta` fraction of any small item's coverage.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::{glue, group, SpreadParams, TraceStep, WasteMode};
use crate::error::TransformError;
use crate::instance::coverage_dominates;
use crate::pattern::FractionalSolution;
use crate::rational::{self, Q};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpreadReport {
    pub rounds: usize,
    pub glue_steps: usize,
    pub moved_to_waste: usize,
    #[serde(with = "rational::serde_q")]
    pub objective_delta: Q,
    /// Total size of under-covered small items at the start of each round.
    pub potentials: Vec<f64>,
}

/// Makes `x` well spread for items smaller than `params.epsilon`.
///
/// Grouping inside the loop runs with `2 beta` and gluing fires once
/// `s_i p_i >= delta beta`, which makes the exact post-condition
/// `p_i <= delta A_i x` hold for every item whose mass stays at least `beta`.
pub fn make_well_spread(
    x: &FractionalSolution,
    params: &SpreadParams,
    q: u64,
    n_items: u64,
    mode: WasteMode,
) -> Result<(FractionalSolution, Vec<TraceStep>, SpreadReport), TransformError> {
    params.validate()?;
    if q == 0 {
        return Err(TransformError::Precondition("q must be positive".into()));
    }
    let qq = rational::qu(q);
    if let Some((p, _)) = x.regular().iter().find(|(_, v)| !(*v * &qq).is_integer()) {
        return Err(TransformError::Precondition(format!("weight of {p:?} is not a multiple of 1/{q}")));
    }
    let cap = x.capacity();
    let capq = rational::qu(cap);
    let size = |w: u64| rational::qu(w) / &capq;
    let is_small = |w: u64| size(w) < params.epsilon;
    let start_objective = x.objective();
    let mut x = x.clone();
    let mut trace = Vec::new();

    // patterns of weight at most 1/n go to waste
    let tiny = Q::new(BigInt::from(1), BigInt::from(n_items.max(1)));
    let doomed: Vec<_> = x.regular().iter().filter(|(_, v)| **v <= tiny).map(|(p, v)| (p.clone(), v.clone())).collect();
    if !doomed.is_empty() {
        let before = x.objective();
        for (p, v) in &doomed {
            x.remove(p);
            for &(w, c) in p.items() {
                x.add_waste(w, v * rational::qu(c as u64));
            }
        }
        trace.push(TraceStep::dominance("spread-tiny", x.objective() - before));
    }

    let beta2 = &params.beta * rational::qi(2);
    let glue_at = &params.delta * &params.beta;
    let cap_rounds = 4 * (n_items.max(2) as f64).log2().ceil() as usize + 8;
    let mut set: BTreeSet<u64> = x.covered().iter().filter(|(w, c)| is_small(**w) && c.is_positive()).map(|(w, _)| *w).collect();
    let mut potentials = Vec::new();
    let mut glue_steps = 0;
    let mut rounds = 0;
    while !set.is_empty() || !predicate_holds(&x, params) {
        if rounds >= cap_rounds {
            return Err(TransformError::NotConverged { iterations: rounds, potentials });
        }
        rounds += 1;
        let cov = x.covered();
        potentials.push(set.iter().map(|w| rational::to_f64(&(size(*w) * cov.get(w).cloned().unwrap_or_default()))).sum());

        let (gx, rep) = group(&x, &set, &beta2, mode);
        if !coverage_dominates(&gx.covered(), &x.covered()) {
            return Err(TransformError::Invariant("grouping lost dominance".into()));
        }
        x = gx;
        trace.push(TraceStep::dominance("spread-group", rep.objective_delta));

        let patterns: Vec<_> = x.regular().keys().cloned().collect();
        for p in patterns {
            let mut cur = p.clone();
            for &(w, _) in p.items() {
                let c = cur.count(w) as u64;
                if !is_small(w) || size(w) * rational::qu(c) < glue_at {
                    continue;
                }
                let width = (c / q).min(u32::MAX as u64) as u32;
                if width < 2 {
                    continue;
                }
                if x.weight(&cur).is_zero() {
                    break;
                }
                let (gx, step) = glue(&x, &cur, w, width, q)?;
                if let Some(step) = step {
                    cur = cur.exchange(w, (width as u64 * q) as u32, w * width as u64, q as u32);
                    x = gx;
                    trace.push(step);
                    glue_steps += 1;
                }
            }
        }

        let cov = x.covered();
        set = cov.iter().filter(|(w, c)| is_small(**w) && c.is_positive() && size(**w) * *c < params.beta).map(|(w, _)| *w).collect();
    }
    let report = SpreadReport {
        rounds,
        glue_steps,
        moved_to_waste: doomed.len(),
        objective_delta: x.objective() - start_objective,
        potentials,
    };
    Ok((x, trace, report))
}

/// `p_i <= delta A_i x` for every small item `i` and regular support pattern `p`.
pub fn predicate_holds(x: &FractionalSolution, params: &SpreadParams) -> bool {
    violations(x, params).is_empty()
}

pub(crate) fn violations(x: &FractionalSolution, params: &SpreadParams) -> Vec<(u64, u32)> {
    let capq = rational::qu(x.capacity());
    let cov = x.covered();
    let mut out = Vec::new();
    for p in x.regular().keys() {
        for &(w, c) in p.items() {
            if rational::qu(w) / &capq >= params.epsilon {
                continue;
            }
            let a = cov.get(&w).cloned().unwrap_or_default();
            if rational::qu(c as u64) > &params.delta * a {
                out.push((w, c));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::Pattern;
    use crate::rational::{q, qi};

    #[test]
    fn large_items_only_is_identity() {
        let mut x = FractionalSolution::new(100);
        x.add(Pattern::new([(60, 1), (40, 1)]), q(1, 2));
        x.add(Pattern::single(40, 2), q(1, 2));
        let params = SpreadParams::uniform(2);
        let (y, _, rep) = make_well_spread(&x, &params, 2, 10, WasteMode::Audited).unwrap();
        assert_eq!(y, x);
        assert_eq!(rep.rounds, 0);
    }

    #[test]
    fn concentrated_small_item_gets_glued() {
        // capacity 1000, item weight 1 (size 1/1000), 900 copies in one pattern at weight 1
        let mut x = FractionalSolution::new(1000);
        x.add(Pattern::new([(1, 900), (100, 1)]), qi(1));
        let params = SpreadParams::uniform(4);
        let (y, trace, _) = make_well_spread(&x, &params, 1, 1000, WasteMode::Audited).unwrap();
        assert!(predicate_holds(&y, &params));
        assert!(trace.iter().any(|t| matches!(t, TraceStep::Glue { .. })));
        assert!(y.regular().keys().any(|p| p.items().iter().any(|&(w, _)| w == 900)));
    }

    #[test]
    fn tiny_pattern_moves_to_waste() {
        let mut x = FractionalSolution::new(100);
        x.add(Pattern::new([(60, 1), (40, 1)]), q(1, 20));
        x.add(Pattern::single(40, 2), qi(1));
        let params = SpreadParams::uniform(2);
        let (y, _, rep) = make_well_spread(&x, &params, 20, 10, WasteMode::Audited).unwrap();
        assert_eq!(rep.moved_to_waste, 1);
        assert_eq!(y.support(), 1);
        assert!(coverage_dominates(&y.covered(), &x.covered()));
    }
}
