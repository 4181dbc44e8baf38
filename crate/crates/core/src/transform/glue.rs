//! Gluing copies of an item inside one pattern into a larger item, and the
//! reverse substitution on integral solutions.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

use super::TraceStep;
use crate::error::TransformError;
use crate::pattern::{FractionalSolution, Pattern};
use crate::rational::{self, Q};

/// Replaces `w * q` copies of `item` in `p` by `q` copies of an item of
/// weight `w * item`. Requires `x_p = r/q` with integral `r >= 1`.
pub fn glue(x: &FractionalSolution, p: &Pattern, item: u64, w: u32, q: u64) -> Result<(FractionalSolution, Option<TraceStep>), TransformError> {
    let pre = |m: String| Err(TransformError::Precondition(m));
    if w == 0 || q == 0 {
        return pre("width and q must be positive".into());
    }
    let xp = x.weight(p);
    if !xp.is_positive() {
        return pre(format!("pattern {p:?} is not in the support"));
    }
    let rq = &xp * rational::qu(q);
    if !rq.is_integer() {
        return pre(format!("x_p = {xp} is not a multiple of 1/{q}"));
    }
    let r = rq.to_integer().to_u64().ok_or_else(|| TransformError::Precondition("r overflows".into()))?;
    let have = p.count(item) as u64;
    let take = w as u64 * q;
    if have < take {
        return pre(format!("pattern holds {have} copies of {item}, gluing needs {take}"));
    }
    if w == 1 {
        return Ok((x.clone(), None));
    }
    let new_item = item * w as u64;
    let np = p.exchange(item, take as u32, new_item, q as u32);
    if np.load() != p.load() || !np.fits(x.capacity()) {
        return Err(TransformError::Invariant("gluing changed the pattern load".into()));
    }
    let mut out = x.clone();
    out.remove(p);
    out.add(np, xp);
    let step = TraceStep::Glue { pattern: p.clone(), item, width: w, q, r, new_item };
    Ok((out, Some(step)))
}

/// Undoes the glue steps of `trace` on an integral, waste-free solution `y`
/// that dominates the final transformed solution. Each glue step turns `r`
/// slots of size at least the glued item, smallest first, into `width` copies
/// of the original item. Bin count and bin validity are preserved.
pub fn resubstitute(y: &FractionalSolution, trace: &[TraceStep]) -> Result<FractionalSolution, TransformError> {
    if !y.is_integral() || !y.waste().is_empty() {
        return Err(TransformError::Precondition("resubstitution needs an integral solution without waste".into()));
    }
    let mut y = y.clone();
    for step in trace.iter().rev() {
        let TraceStep::Glue { item, width, r, new_item, .. } = step else { continue };
        for _ in 0..*r {
            let slot = y
                .regular()
                .keys()
                .flat_map(|p| p.items().iter().map(move |&(w, _)| (w, p)))
                .filter(|(w, _)| w >= new_item)
                .min_by_key(|(w, _)| *w)
                .map(|(w, p)| (w, p.clone()));
            let Some((w, p)) = slot else {
                return Err(TransformError::Invariant(format!("no slot of size >= {new_item} left for a glued item")));
            };
            let np = p.exchange(w, 1, *item, *width);
            y.add(p, rational::qi(-1));
            y.add(np, Q::from_integer(BigInt::from(1)));
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::coverage_dominates;
    use crate::rational::{q, qi};

    #[test]
    fn glue_preserves_size_and_total() {
        // s_i = 1/10 (weight 1 over 10), p_i = 6, x_p = 1/2, w = 3
        let mut x = FractionalSolution::new(10);
        let p = Pattern::new([(1, 6), (4, 1)]);
        x.add(p.clone(), q(1, 2));
        let (y, step) = glue(&x, &p, 1, 3, 2).unwrap();
        let np = Pattern::new([(4, 1), (3, 2)]);
        assert_eq!(y.weight(&np), q(1, 2));
        assert_eq!(y.regular_total(), x.regular_total());
        assert!(matches!(step, Some(TraceStep::Glue { r: 1, new_item: 3, .. })));
    }

    #[test]
    fn unit_width_is_identity() {
        let mut x = FractionalSolution::new(10);
        let p = Pattern::single(1, 4);
        x.add(p.clone(), q(1, 2));
        let (y, step) = glue(&x, &p, 1, 1, 2).unwrap();
        assert_eq!(y, x);
        assert!(step.is_none());
    }

    #[test]
    fn glue_rejects_short_pattern() {
        let mut x = FractionalSolution::new(10);
        let p = Pattern::single(1, 5);
        x.add(p.clone(), q(1, 3));
        assert!(glue(&x, &p, 1, 2, 3).is_err());
        assert!(glue(&x, &p, 1, 1, 2).is_err());
    }

    #[test]
    fn resubstitution_round_trip() {
        let mut x = FractionalSolution::new(10);
        let p = Pattern::new([(1, 6), (4, 1)]);
        x.add(p.clone(), q(1, 2));
        let (xg, step) = glue(&x, &p, 1, 3, 2).unwrap();
        // integral y dominating the glued solution: one bin {4, 3, 3}
        let mut y = FractionalSolution::new(10);
        y.add(Pattern::new([(4, 1), (3, 2)]), qi(1));
        assert!(coverage_dominates(&y.covered(), &xg.covered()));
        let back = resubstitute(&y, &[step.unwrap()]).unwrap();
        assert_eq!(back.regular_total(), qi(1));
        assert_eq!(back.regular().keys().next().unwrap(), &Pattern::new([(4, 1), (3, 1), (1, 3)]));
        assert!(coverage_dominates(&back.covered(), &x.covered()));
        assert!(resubstitute(&y, &[]).unwrap() == y);
    }
}
