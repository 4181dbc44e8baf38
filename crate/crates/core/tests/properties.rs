use std::collections::BTreeMap;

use entropy_binpack::baselines::{ffd, karmarkar_karp};
use entropy_binpack::instance::{coverage_dominates, Coverage};
use entropy_binpack::lp::{default_gap, solve_lp, to_basic};
use entropy_binpack::pipeline::{finalize_waste, solve_entropy, solve_lp_round, PipelineConfig, Profile, TransportProblem};
use entropy_binpack::rational::{q, qu};
use entropy_binpack::{FractionalSolution, Instance, PackingResult, Pattern, Q};
use num_traits::Zero;
use proptest::prelude::*;

const CAP: u64 = 60;

fn coverage_strategy() -> impl Strategy<Value = Coverage> {
    prop::collection::btree_map(1u64..=CAP, (0i64..40, 1i64..8).prop_map(|(n, d)| q(n, d)), 0..8)
}

fn pattern_strategy() -> impl Strategy<Value = Pattern> {
    prop::collection::vec((5u64..=30, 1u32..=3), 1..4)
        .prop_map(|items| {
            let mut load = 0;
            let mut kept = Vec::new();
            for (w, c) in items {
                if load + w * c as u64 <= CAP {
                    load += w * c as u64;
                    kept.push((w, c));
                }
            }
            kept
        })
        .prop_filter("non-empty", |items| !items.is_empty())
        .prop_map(Pattern::new)
}

fn solution_strategy() -> impl Strategy<Value = FractionalSolution> {
    prop::collection::vec((pattern_strategy(), (1i64..12, 1i64..6)), 1..7).prop_map(|cols| {
        let mut x = FractionalSolution::new(CAP);
        for (p, (n, d)) in cols {
            x.add(p, q(n, d));
        }
        x
    })
}

/// Prefix sums over the union of keys, largest weight first.
fn prefix_ok(y: &Coverage, x: &Coverage) -> bool {
    let mut keys: Vec<u64> = y.keys().chain(x.keys()).copied().collect();
    keys.sort_unstable_by(|a, b| b.cmp(a));
    keys.dedup();
    let (mut sy, mut sx) = (Q::zero(), Q::zero());
    for k in keys {
        sy += y.get(&k).cloned().unwrap_or_default();
        sx += x.get(&k).cloned().unwrap_or_default();
        if sy < sx {
            return false;
        }
    }
    true
}

fn add_cov(a: &Coverage, b: &Coverage) -> Coverage {
    let mut out = a.clone();
    for (&w, v) in b {
        *out.entry(w).or_insert_with(Q::zero) += v;
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// Max-flow value of the bipartite slot network: item `i` may use a slot of
/// weight at least `i`. Augmenting paths on a small unit graph.
fn max_flow(demand: &BTreeMap<u64, u64>, supply: &BTreeMap<u64, u64>) -> u64 {
    let items: Vec<(u64, u64)> = demand.iter().map(|(&w, &c)| (w, c)).collect();
    let slots: Vec<(u64, u64)> = supply.iter().map(|(&w, &c)| (w, c)).collect();
    let (ni, ns) = (items.len(), slots.len());
    let n = ni + ns + 2;
    let (src, dst) = (n - 2, n - 1);
    let mut cap = vec![vec![0u64; n]; n];
    for (i, &(_, c)) in items.iter().enumerate() {
        cap[src][i] = c;
    }
    for (j, &(_, c)) in slots.iter().enumerate() {
        cap[ni + j][dst] = c;
    }
    for (i, &(wi, _)) in items.iter().enumerate() {
        for (j, &(wj, _)) in slots.iter().enumerate() {
            if wj >= wi {
                cap[i][ni + j] = u64::MAX / 4;
            }
        }
    }
    let mut flow = 0;
    loop {
        let mut prev = vec![usize::MAX; n];
        prev[src] = src;
        let mut queue = std::collections::VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if prev[v] == usize::MAX && cap[u][v] > 0 {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if prev[dst] == usize::MAX {
            return flow;
        }
        let mut push = u64::MAX;
        let mut v = dst;
        while v != src {
            push = push.min(cap[prev[v]][v]);
            v = prev[v];
        }
        let mut v = dst;
        while v != src {
            let u = prev[v];
            cap[u][v] -= push;
            cap[v][u] += push;
            v = u;
        }
        flow += push;
    }
}

/// Loads within capacity and the packed multiset equals the instance items.
fn packing_ok(inst: &Instance, p: &PackingResult) -> bool {
    let cap = inst.capacity();
    if p.bins.iter().any(|b| b.iter().sum::<u64>() > cap) {
        return false;
    }
    let mut packed: Vec<u64> = p.bins.iter().flatten().copied().collect();
    packed.sort_unstable();
    let mut items = inst.item_weights().unwrap();
    items.sort_unstable();
    packed == items
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dominance_is_a_preorder(a in coverage_strategy(), b in coverage_strategy(), c in coverage_strategy()) {
        prop_assert!(coverage_dominates(&a, &a));
        if coverage_dominates(&a, &b) && coverage_dominates(&b, &c) {
            prop_assert!(coverage_dominates(&a, &c));
        }
        prop_assert_eq!(coverage_dominates(&a, &b), prefix_ok(&a, &b));
        // adding coverage never hurts
        prop_assert!(coverage_dominates(&add_cov(&a, &b), &a));
    }

    #[test]
    fn covered_is_additive(x in solution_strategy(), y in solution_strategy()) {
        let mut z = x.clone();
        z.merge(&y);
        prop_assert_eq!(z.covered(), add_cov(&x.covered(), &y.covered()));
        prop_assert_eq!(z.objective(), x.objective() + y.objective());
    }

    #[test]
    fn to_basic_keeps_coverage(x in solution_strategy()) {
        let b = to_basic(&x);
        prop_assert_eq!(b.covered(), x.covered());
        prop_assert!(b.regular_total() <= x.regular_total());
        prop_assert!(b.support() <= x.covered().len());
        prop_assert!(b.regular().values().all(|v| *v > Q::zero()));
    }

    #[test]
    fn finalize_waste_contract(waste in coverage_strategy()) {
        let counts = finalize_waste(&waste);
        let bought: Coverage = counts.iter().map(|(&w, &c)| (w, qu(c))).collect();
        prop_assert!(prefix_ok(&bought, &waste));
        let size = |c: &Coverage| c.iter().map(|(&w, v)| qu(w) * v).sum::<Q>() / qu(CAP);
        prop_assert!(size(&bought) <= size(&waste) + Q::from_integer(1.into()));
    }

    #[test]
    fn hall_condition_matches_max_flow(
        demand in prop::collection::btree_map(1u64..20, 1u64..5, 0..6),
        supply in prop::collection::btree_map(1u64..20, 1u64..5, 0..6),
    ) {
        let t = TransportProblem::new(demand.clone(), supply.clone());
        let total: u64 = demand.values().sum();
        let feasible = max_flow(&demand, &supply) == total;
        prop_assert_eq!(t.hall_violation().is_none(), feasible);
        prop_assert_eq!(t.solve().is_some(), feasible);
        if let Some(flows) = t.solve() {
            let mut used: BTreeMap<u64, u64> = BTreeMap::new();
            for f in &flows {
                prop_assert!(f.slot >= f.item);
                *used.entry(f.slot).or_default() += f.count;
            }
            for (s, u) in used {
                prop_assert!(u <= supply[&s]);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lp_certificate_is_sound(ws in prop::collection::vec(5u64..=55, 1..18)) {
        let inst = Instance::from_weights(&ws, CAP).unwrap();
        let lp = solve_lp(&inst, &default_gap(&inst)).unwrap();
        prop_assert!(lp.lower_bound <= lp.value);
        prop_assert!(&lp.value - &lp.lower_bound <= default_gap(&inst));
        prop_assert!(coverage_dominates(&lp.solution.covered(), &inst.demand()));
        let total: u64 = ws.iter().sum();
        prop_assert!(lp.value >= q(total as i64, CAP as i64));
    }

    #[test]
    fn every_solver_packs_every_item(ws in prop::collection::vec(1u64..=60, 1..40), seed in 0u64..1000) {
        let inst = Instance::from_weights(&ws, CAP).unwrap();
        let cfg = PipelineConfig::new(Profile::Desk, inst.n_items());
        let ent = solve_entropy(&inst, &cfg, seed).unwrap();
        prop_assert!(ent.certificate.passed());
        prop_assert!(packing_ok(&inst, &ent.packing));
        prop_assert!(packing_ok(&inst, &solve_lp_round(&inst, &cfg, seed).unwrap().packing));
        prop_assert!(packing_ok(&inst, &karmarkar_karp(&inst).unwrap()));
        prop_assert!(packing_ok(&inst, &ffd(&inst).unwrap()));
    }
}
