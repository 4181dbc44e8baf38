use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};

use crate::error::Result;
use crate::instance::{Coverage, Instance};
use crate::lp::{default_gap, solve_lp};
use crate::packing::PackingResult;
use crate::pattern::FractionalSolution;
use crate::pipeline::{assign_slots, finalize_waste};
use crate::rational::{self, Q};
use crate::transform::{group, repair_dominance, WasteMode};

/// Iterative LP rounding: solve the LP of the residual demand, buy the
/// integral parts, group the fractional remainder so that every surviving
/// type carries size-mass at least one, and repeat on the grouped demand.
/// What is still open when the type count stops shrinking goes to waste;
/// all waste is rounded up and packed First Fit at the end.
pub fn karmarkar_karp(inst: &Instance) -> Result<PackingResult> {
    let cap = inst.capacity();
    let demand = crate::pipeline::integral_demand(inst)?;
    let mut bought = FractionalSolution::new(cap);
    let mut waste: BTreeMap<u64, Q> = BTreeMap::new();
    let mut residual: Coverage = inst.demand();
    let rounds = 2 * (inst.n_items().max(2) as f64).log2().ceil() as usize + 10;
    let beta = rational::qi(1);
    for _ in 0..rounds {
        residual.retain(|_, v| v.is_positive());
        if residual.is_empty() {
            break;
        }
        let r_inst = Instance::from_coverage(cap, &residual)?;
        let lp = solve_lp(&r_inst, &default_gap(&r_inst))?;
        let (int, frac) = lp.solution.split_integral();
        bought.merge(&int);
        if frac.regular().is_empty() {
            residual.clear();
            break;
        }
        let set: BTreeSet<u64> = frac.regular_covered().keys().copied().collect();
        let (grouped, _) = group(&frac, &set, &beta, WasteMode::Audited);
        // plain dominance repair, no padding of emptied items
        let mut lean = FractionalSolution::new(cap);
        for (p, v) in grouped.regular() {
            lean.add(p.clone(), v.clone());
        }
        repair_dominance(&mut lean, &frac.covered(), &Q::zero(), &BTreeSet::new());
        for (&w, v) in lean.waste() {
            *waste.entry(w).or_insert_with(Q::zero) += v;
        }
        let next = lean.regular_covered();
        let stalled = next.len() >= residual.len() && int.regular().is_empty();
        residual = next;
        if stalled {
            break;
        }
    }
    for (w, v) in residual {
        *waste.entry(w).or_insert_with(Q::zero) += v;
    }
    let counts = finalize_waste(&waste);
    let (bins, opened) = crate::pipeline::slots_with_waste(&bought, &counts)?;
    let slots = crate::pipeline::bins_to_solution(&bins, cap);
    let placed = assign_slots(&slots, &demand)?;
    PackingResult::new(inst, placed, opened)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_lp_instance_is_lp_cost() {
        // pairs 60 + 40 fill bins exactly
        let inst = Instance::from_weights(&[60, 60, 60, 40, 40, 40], 100).unwrap();
        assert_eq!(karmarkar_karp(&inst).unwrap().cost(), 3);
    }

    #[test]
    fn leftover_waste_stays_on_its_own_items() {
        // grouping empties every type here, all of it becomes waste
        let ws = [416, 352, 208, 80, 64, 44, 40, 36, 32, 26, 24, 22, 18, 15, 10, 9];
        let inst = Instance::from_weights(&ws, 1024).unwrap();
        assert_eq!(karmarkar_karp(&inst).unwrap().cost(), 2);
    }

    #[test]
    fn random_instance_is_feasible() {
        let inst = crate::generate::generate(crate::generate::Family::Uniform, 120, 4).unwrap();
        let p = karmarkar_karp(&inst).unwrap();
        let lp = solve_lp(&inst, &default_gap(&inst)).unwrap();
        assert!(p.cost() as u64 >= crate::lp::ceil_value(&lp.lower_bound));
    }
}
