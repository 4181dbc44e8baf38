//! Exact rounding to a basic point of `{y in [0,1]^m : V y = V x}`, the
//! special case of partial coloring where every `lambda_i` is zero.

use num_traits::{One, Signed, Zero};

use crate::error::ColoringError;
use crate::rational::Q;

#[derive(Debug, Clone, PartialEq)]
pub struct ExactColoring {
    pub point: Vec<Q>,
    /// Coordinates that are exactly 0 or 1.
    pub frozen: Vec<usize>,
}

/// Reduced row echelon form of the constraint rows restricted to the free
/// coordinates, maintained while coordinates leave the free set.
struct Echelon {
    rows: Vec<Vec<Q>>,
    pivot_col: Vec<usize>,
    pivot_row: Vec<Option<usize>>,
}

impl Echelon {
    fn new(constraints: &[Vec<Q>], free: &[bool]) -> Self {
        let m = free.len();
        let mut rows: Vec<Vec<Q>> = constraints
            .iter()
            .map(|v| (0..m).map(|j| if free[j] { v[j].clone() } else { Q::zero() }).collect())
            .collect();
        let mut pivot_col = Vec::new();
        let mut pivot_row = vec![None; m];
        let mut r = 0;
        for c in 0..m {
            if r == rows.len() {
                break;
            }
            let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
            rows.swap(r, p);
            Self::eliminate(&mut rows, r, c);
            pivot_col.push(c);
            pivot_row[c] = Some(r);
            r += 1;
        }
        rows.truncate(r);
        Echelon { rows, pivot_col, pivot_row }
    }

    fn eliminate(rows: &mut [Vec<Q>], r: usize, c: usize) {
        let d = rows[r][c].clone();
        for v in rows[r].iter_mut() {
            if !v.is_zero() {
                *v /= &d;
            }
        }
        let pivot = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, p) in row.iter_mut().zip(&pivot) {
                    if !p.is_zero() {
                        *x -= p * &f;
                    }
                }
            }
        }
    }

    /// Drops column `j` from the system, re-pivoting its row if needed.
    fn remove_column(&mut self, j: usize, free: &[bool]) {
        if let Some(r) = self.pivot_row[j] {
            self.pivot_row[j] = None;
            let repl = (0..free.len()).find(|&c| c != j && free[c] && self.pivot_row[c].is_none() && !self.rows[r][c].is_zero());
            match repl {
                Some(c) => {
                    Self::eliminate(&mut self.rows, r, c);
                    self.pivot_col[r] = c;
                    self.pivot_row[c] = Some(r);
                }
                None => {
                    // the row pins coordinate j alone; it carries no further information
                    self.rows.remove(r);
                    self.pivot_col.remove(r);
                    for pr in self.pivot_row.iter_mut().flatten() {
                        if *pr > r {
                            *pr -= 1;
                        }
                    }
                }
            }
        }
        for row in self.rows.iter_mut() {
            row[j] = Q::zero();
        }
    }
}

/// Moves `start` to a point with `V y = V x` exactly in which every
/// coordinate outside a set of at most `rank(V)` is 0 or 1.
pub fn basic_solution_color(start: &[Q], constraints: &[Vec<Q>]) -> Result<ExactColoring, ColoringError> {
    let m = start.len();
    if start.iter().any(|v| v.is_negative() || v > &Q::one()) {
        return Err(ColoringError::Invalid("start point outside the unit cube".into()));
    }
    if constraints.iter().any(|v| v.len() != m) {
        return Err(ColoringError::Invalid("constraint of the wrong dimension".into()));
    }
    let mut y = start.to_vec();
    let mut free: Vec<bool> = y.iter().map(|v| v.is_positive() && v < &Q::one()).collect();
    let mut ech = Echelon::new(constraints, &free);
    loop {
        let Some(f) = (0..m).find(|&j| free[j] && ech.pivot_row[j].is_none()) else { break };
        let mut z: Vec<(usize, Q)> = vec![(f, Q::one())];
        for (r, &pc) in ech.pivot_col.iter().enumerate() {
            let c = &ech.rows[r][f];
            if !c.is_zero() {
                z.push((pc, -c.clone()));
            }
        }
        let reach = |sign: bool| -> Q {
            z.iter()
                .map(|(j, d)| {
                    let pos = d.is_positive() == sign;
                    if pos {
                        (Q::one() - &y[*j]) / d.abs()
                    } else {
                        &y[*j] / d.abs()
                    }
                })
                .min()
                .expect("direction is non-empty")
        };
        let (tp, tn) = (reach(true), reach(false));
        let t = if tp <= tn { tp } else { -tn };
        for (j, d) in &z {
            y[*j] += &t * d;
        }
        for (j, _) in &z {
            if free[*j] && (y[*j].is_zero() || y[*j] == Q::one()) {
                free[*j] = false;
                ech.remove_column(*j, &free);
            }
        }
    }
    let frozen: Vec<usize> = (0..m).filter(|&j| !free[j]).collect();
    let need = m.div_ceil(2);
    if frozen.len() < need {
        return Err(ColoringError::TooFewFrozen { frozen: frozen.len(), needed: need });
    }
    Ok(ExactColoring { point: y, frozen })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn dot(a: &[Q], b: &[Q]) -> Q {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn one_constraint_half_point() {
        let x = vec![q(1, 2); 4];
        let v = vec![qi(1); 4];
        let r = basic_solution_color(&x, &[v.clone()]).unwrap();
        assert!(r.frozen.len() >= 3);
        assert_eq!(dot(&v, &r.point), qi(2));
    }

    #[test]
    fn no_constraints_gives_vertex() {
        let x = vec![q(1, 3), q(2, 3), q(1, 2)];
        let r = basic_solution_color(&x, &[]).unwrap();
        assert_eq!(r.frozen.len(), 3);
        assert!(r.point.iter().all(|v| v.is_zero() || v == &qi(1)));
    }

    #[test]
    fn full_rank_constraints_flagged() {
        let x = vec![q(1, 2), q(1, 2)];
        let cons = vec![vec![qi(1), qi(0)], vec![qi(0), qi(1)]];
        assert!(matches!(basic_solution_color(&x, &cons), Err(ColoringError::TooFewFrozen { .. })));
    }

    #[test]
    fn disjoint_constraints_preserved() {
        let x: Vec<Q> = (1..=8).map(|i| q(i, 9)).collect();
        let a: Vec<Q> = (0..8).map(|j| if j < 4 { qi(1) } else { qi(0) }).collect();
        let b: Vec<Q> = (0..8).map(|j| if j >= 4 { qi(if j % 2 == 0 { 1 } else { -1 }) } else { qi(0) }).collect();
        let r = basic_solution_color(&x, &[a.clone(), b.clone()]).unwrap();
        assert_eq!(dot(&a, &r.point), dot(&a, &x));
        assert_eq!(dot(&b, &r.point), dot(&b, &x));
        assert!(r.frozen.len() >= 6);
    }
}
