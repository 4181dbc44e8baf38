//! Support reduction: moves along exact null-space directions of the support
//! columns until they are linearly independent.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::pattern::{FractionalSolution, Pattern};
use crate::rational::Q;

/// A null-space vector of the columns, or `None` if they are independent.
fn null_vector(cols: &[&Pattern], rows: &BTreeMap<u64, usize>) -> Option<Vec<Q>> {
    let n = rows.len();
    let k = cols.len();
    if k == 0 {
        return None;
    }
    let mut a = vec![vec![Q::zero(); k]; n];
    for (j, p) in cols.iter().enumerate() {
        for &(w, c) in p.items() {
            a[rows[&w]][j] = Q::from_integer(c.into());
        }
    }
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..k {
        if r == n {
            // every further column is dependent
            return Some(null_from_rref(&a, &pivot_cols, c));
        }
        let Some(pr) = (r..n).find(|&i| !a[i][c].is_zero()) else {
            return Some(null_from_rref(&a, &pivot_cols, c));
        };
        a.swap(r, pr);
        let d = a[r][c].clone();
        for v in a[r].iter_mut() {
            *v /= &d;
        }
        for i in 0..n {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in c..k {
                    let t = &a[r][j] * &f;
                    a[i][j] -= t;
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    None
}

fn null_from_rref(a: &[Vec<Q>], pivot_cols: &[usize], free: usize) -> Vec<Q> {
    let k = a.first().map_or(0, |r| r.len());
    let mut z = vec![Q::zero(); k];
    z[free] = Q::from_integer(1.into());
    for (r, &pc) in pivot_cols.iter().enumerate() {
        z[pc] = -a[r][free].clone();
    }
    z
}

/// Reduces the regular support to linearly independent columns while keeping
/// `A x` fixed. The regular total never increases. Waste entries are untouched.
pub fn to_basic(x: &FractionalSolution) -> FractionalSolution {
    let mut weights: Vec<(Pattern, Q)> = x.regular().iter().map(|(p, v)| (p.clone(), v.clone())).collect();
    let rows: BTreeMap<u64, usize> = {
        let mut ws: Vec<u64> = weights.iter().flat_map(|(p, _)| p.items().iter().map(|&(w, _)| w)).collect();
        ws.sort_unstable();
        ws.dedup();
        ws.into_iter().enumerate().map(|(i, w)| (w, i)).collect()
    };
    loop {
        let cols: Vec<&Pattern> = weights.iter().map(|(p, _)| p).collect();
        let Some(z) = null_vector(&cols, &rows) else { break };
        let sum: Q = z.iter().sum();
        let flip = if sum.is_zero() { !z.iter().any(|v| v.is_negative()) } else { sum.is_positive() };
        let d: Vec<Q> = if flip { z.into_iter().map(|v| -v).collect() } else { z };
        let mut t: Option<Q> = None;
        for (j, dj) in d.iter().enumerate() {
            if dj.is_negative() {
                let r = &weights[j].1 / -dj;
                if t.as_ref().map_or(true, |t| &r < t) {
                    t = Some(r);
                }
            }
        }
        let t = t.expect("null vector has a negative entry");
        for (j, dj) in d.iter().enumerate() {
            if !dj.is_zero() {
                weights[j].1 += &t * dj;
            }
        }
        weights.retain(|(_, v)| v.is_positive());
    }
    let mut out = FractionalSolution::new(x.capacity());
    for (p, v) in weights {
        out.add(p, v);
    }
    for (&w, v) in x.waste() {
        out.add_waste(w, v.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    #[test]
    fn independent_support_is_kept() {
        let mut x = FractionalSolution::new(10);
        x.add(Pattern::single(5, 2), q(1, 2));
        x.add(Pattern::new([(5, 1), (3, 1)]), q(1, 3));
        assert_eq!(to_basic(&x), x);
    }

    #[test]
    fn dependent_columns_collapse() {
        // two types, four columns
        let mut x = FractionalSolution::new(12);
        x.add(Pattern::single(6, 2), q(1, 2));
        x.add(Pattern::single(4, 3), q(1, 3));
        x.add(Pattern::new([(6, 1), (4, 1)]), q(1, 4));
        x.add(Pattern::new([(4, 1)]), q(1, 5));
        let y = to_basic(&x);
        assert!(y.support() <= 2);
        assert_eq!(y.covered(), x.covered());
        assert!(y.regular_total() <= x.regular_total());
        assert!(y.regular().values().all(|v| v > &qi(0)));
    }
}
