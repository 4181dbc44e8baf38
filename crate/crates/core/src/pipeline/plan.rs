//! Coloring constraints built from the incidence matrix of the fractional
//! support: groups of consecutive items, nested subgroups for small items,
//! and the all-ones objective row.

use std::collections::BTreeMap;
use std::ops::Range;

use serde::Serialize;

use crate::coloring::{self, Constraint, EntropyCheck};
use crate::error::{ColoringError, Error, Result};
use crate::instance::size_class_of;
use crate::pattern::Pattern;

/// Rows of the incidence matrix restricted to a list of columns.
#[derive(Debug, Clone)]
pub struct Incidence {
    /// Item weights, largest first.
    pub weights: Vec<u64>,
    /// `rows[i][j]` copies of item `weights[i]` in column `j`.
    pub rows: Vec<Vec<u32>>,
    pub capacity: u64,
}

impl Incidence {
    pub fn new(columns: &[&Pattern], capacity: u64) -> Self {
        let mut index: BTreeMap<u64, Vec<u32>> = BTreeMap::new();
        for (j, p) in columns.iter().enumerate() {
            for &(w, c) in p.items() {
                index.entry(w).or_insert_with(|| vec![0; columns.len()])[j] = c;
            }
        }
        let (weights, rows) = index.into_iter().rev().unzip();
        Incidence { weights, rows, capacity }
    }

    pub fn m(&self) -> usize {
        self.rows.first().map_or(0, |r| r.len())
    }

    fn size(&self, i: usize) -> f64 {
        self.weights[i] as f64 / self.capacity as f64
    }

    fn class(&self, i: usize) -> u32 {
        size_class_of(self.weights[i], self.capacity)
    }

    /// `||A_i||_1 s_i`.
    fn mass(&self, i: usize) -> f64 {
        self.rows[i].iter().map(|&c| c as f64).sum::<f64>() * self.size(i)
    }

    fn sum_rows(&self, rows: Range<usize>) -> Vec<f64> {
        let mut v = vec![0.0; self.m()];
        for r in &self.rows[rows] {
            for (a, &c) in v.iter_mut().zip(r) {
                *a += c as f64;
            }
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Group {
    /// Row indices of the incidence matrix.
    pub rows: Range<usize>,
    pub class: u32,
    pub small: bool,
    /// Number of proper subgroups (nested prefixes short of the whole group).
    pub subgroups: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupingPlan {
    pub groups: Vec<Group>,
    /// Mass bound per group.
    pub c: f64,
    pub entropy: EntropyCheck,
    #[serde(skip)]
    pub constraints: Vec<Constraint>,
}

/// Splits rows into maximal runs of one size class with mass at most `c`.
/// With `by_class` false, class boundaries are ignored.
fn partition(inc: &Incidence, c: f64, by_class: bool) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut acc = 0.0;
    for i in 0..inc.weights.len() {
        let mass = inc.mass(i);
        let new_class = by_class && i > start && inc.class(i) != inc.class(start);
        if i > start && (new_class || acc + mass > c) {
            out.push(start..i);
            start = i;
            acc = 0.0;
        }
        acc += mass;
    }
    if start < inc.weights.len() {
        out.push(start..inc.weights.len());
    }
    out
}

/// Groups with `lambda = 0`, subgroups of small-item groups with
/// `lambda = 4 sqrt(ln(2/delta))`, and the all-ones row with `lambda = 0`.
///
/// Fails when `m < 100 log2(2 / s_min)` or when the entropy condition does
/// not hold even at mass bound `c_max` (the bound doubles from `c`).
pub fn build_grouping_plan(inc: &Incidence, delta: f64, epsilon: f64, c: f64, c_max: f64) -> Result<GroupingPlan> {
    let m = inc.m();
    let s_min = (0..inc.weights.len()).map(|i| inc.size(i)).fold(1.0, f64::min);
    let need = 100.0 * (2.0 / s_min).log2();
    if (m as f64) < need {
        return Err(Error::Precondition(format!("support {m} below 100 log(2/s_min) = {need:.1}")));
    }
    let lambda_sub = 4.0 * (2.0 / delta).ln().sqrt();
    let mut c = c;
    loop {
        let plan = plan_at(inc, delta, epsilon, c, lambda_sub);
        if plan.entropy.pass {
            return Ok(plan);
        }
        if c * 2.0 > c_max {
            return Err(ColoringError::Entropy { sum: plan.entropy.sum, bound: plan.entropy.bound }.into());
        }
        c *= 2.0;
    }
}

fn plan_at(inc: &Incidence, delta: f64, epsilon: f64, c: f64, lambda_sub: f64) -> GroupingPlan {
    let m = inc.m();
    let mut groups = Vec::new();
    let mut constraints = Vec::new();
    for rows in partition(inc, c, true) {
        let first = rows.start;
        let small = inc.size(first) < epsilon;
        let class = inc.class(first);
        constraints.push(Constraint::new(inc.sum_rows(rows.clone()), 0.0));
        let mut subgroups = 0;
        if small {
            // sizes in (1/k, 2/k] with k = 2^(class+1)
            let k = 2f64.powi(class as i32 + 1);
            let step = c * delta.sqrt() * k;
            let mut prefix = vec![0.0; m];
            let mut inc_mass = 0.0;
            let last_entry = rows.clone().flat_map(|i| (0..m).map(move |j| (i, j))).filter(|&(i, j)| inc.rows[i][j] > 0).last();
            for i in rows.clone() {
                for j in 0..m {
                    let a = inc.rows[i][j];
                    if a == 0 {
                        continue;
                    }
                    prefix[j] += a as f64;
                    inc_mass += a as f64;
                    if inc_mass >= step && Some((i, j)) != last_entry {
                        constraints.push(Constraint::new(prefix.clone(), lambda_sub));
                        subgroups += 1;
                        inc_mass = 0.0;
                    }
                }
            }
        }
        groups.push(Group { rows, class, small, subgroups });
    }
    constraints.push(Constraint::new(vec![1.0; m], 0.0));
    let entropy = coloring::check_entropy(&constraints, m);
    GroupingPlan { groups, c, entropy, constraints }
}

/// At most `limit` rows with `lambda = 0`: groups as fine as the limit
/// allows, then the all-ones row. Returned as integer vectors.
pub fn lambda_zero_rows(inc: &Incidence, limit: usize) -> Vec<Vec<i64>> {
    let m = inc.m();
    let ones = vec![1i64; m];
    if limit == 0 {
        return Vec::new();
    }
    let to_int = |rows: Range<usize>| -> Vec<i64> {
        let mut v = vec![0i64; m];
        for r in &inc.rows[rows] {
            for (a, &c) in v.iter_mut().zip(r) {
                *a += c as i64;
            }
        }
        v
    };
    let n_rows = inc.weights.len();
    let total: f64 = (0..n_rows).map(|i| inc.mass(i)).sum();
    let mut parts: Vec<Range<usize>> = (0..n_rows).map(|i| i..i + 1).collect();
    if parts.len() + 1 > limit {
        let mut c = total / (4 * limit).max(1) as f64;
        loop {
            parts = partition(inc, c, true);
            if parts.len() < limit || c > total {
                break;
            }
            c *= 2.0;
        }
        if parts.len() >= limit {
            parts = partition(inc, f64::INFINITY, false);
        }
    }
    let mut out: Vec<Vec<i64>> = if parts.len() < limit { parts.into_iter().map(to_int).collect() } else { Vec::new() };
    out.push(ones);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn columns(ps: &[Pattern]) -> Vec<&Pattern> {
        ps.iter().collect()
    }

    #[test]
    fn incidence_rows_desc() {
        let ps = [Pattern::new([(5, 1), (3, 2)]), Pattern::single(3, 1)];
        let inc = Incidence::new(&columns(&ps), 10);
        assert_eq!(inc.weights, vec![5, 3]);
        assert_eq!(inc.rows, vec![vec![1, 0], vec![2, 1]]);
    }

    #[test]
    fn small_support_is_rejected() {
        let ps = [Pattern::single(5, 2), Pattern::single(3, 3)];
        let inc = Incidence::new(&columns(&ps), 10);
        assert!(matches!(build_grouping_plan(&inc, 0.25, 0.01, 64.0, 1024.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn large_items_only_get_no_subgroups() {
        // 400 columns over sizes in (1/4, 1/2], each pattern holds two items
        let ps: Vec<Pattern> = (0..400).map(|j| Pattern::new([(300 + (j % 50), 1), (260 + (j % 37), 1)])).collect();
        let inc = Incidence::new(&columns(&ps), 1000);
        let plan = build_grouping_plan(&inc, 0.25, 0.01, 64.0, 1024.0).unwrap();
        assert!(plan.groups.iter().all(|g| g.subgroups == 0 && !g.small));
        assert!(plan.entropy.pass);
        assert!(plan.constraints.iter().all(|c| c.lambda == 0.0));
        // groups partition the rows and stay inside one size class
        let mut next = 0;
        for g in &plan.groups {
            assert_eq!(g.rows.start, next);
            next = g.rows.end;
        }
        assert_eq!(next, inc.weights.len());
    }

    #[test]
    fn small_items_get_subgroups() {
        // 800 columns, each with 40 copies of an item of size about 1/100
        let ps: Vec<Pattern> = (0..800).map(|j| Pattern::new([(10 + (j % 4), 40), (500, 1)])).collect();
        let inc = Incidence::new(&columns(&ps), 1000);
        let plan = build_grouping_plan(&inc, 0.25, 0.05, 4.0, 1024.0).unwrap();
        assert!(plan.groups.iter().any(|g| g.small && g.subgroups > 0));
        assert!(plan.entropy.pass);
    }

    #[test]
    fn lambda_zero_rows_respect_limit() {
        let ps: Vec<Pattern> = (0..20).map(|j| Pattern::new([(30 + j, 1), (10 + (j % 7), 2)])).collect();
        let inc = Incidence::new(&columns(&ps), 100);
        for limit in [1, 2, 3, 5, 10, 40] {
            let rows = lambda_zero_rows(&inc, limit);
            assert!(rows.len() <= limit);
            assert_eq!(rows.last().unwrap(), &vec![1; 20]);
        }
        assert_eq!(lambda_zero_rows(&inc, 40).len(), inc.weights.len() + 1);
    }
}
