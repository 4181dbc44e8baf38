//! Rounding steps driven by partial coloring: halving the fractional
//! support, rounding weights to multiples of `gamma`, and the waste top-ups
//! that restore dominance afterwards.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::plan::{build_grouping_plan, lambda_zero_rows, Incidence};
use crate::coloring::{self, basic_solution_color, partial_color, ColoringProblem, Constraint, WalkConfig};
use crate::error::{ColoringError, Error, Result, TransformError};
use crate::instance::{coverage_dominates, size_class_of, Coverage};
use crate::pattern::{FractionalSolution, Pattern};
use crate::rational::{self, Q};
use crate::transform::repair_dominance;

const GRID_BITS: u32 = 30;

#[derive(Debug, Clone)]
pub struct ColoringSettings {
    /// Well-spread parameter of the small-item rows.
    pub delta: f64,
    /// Items below this size are small.
    pub epsilon: f64,
    pub c: f64,
    pub c_max: f64,
    /// Band `[0, d] u [1 - d, 1]` treated as integral after the walk.
    pub delta_color: f64,
    pub walk: WalkConfig,
    /// Supports up to this size use the exact basic-solution coloring when
    /// only `lambda = 0` rows are used.
    pub exact_limit: usize,
    /// Supports up to this size are rounded up (halving) or dropped (gamma rounding).
    pub stop_support: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColoringPath {
    /// Nothing fractional.
    None,
    /// Random walk with groups, subgroups and the objective row.
    Walk,
    /// Random walk with `lambda = 0` rows only.
    ZeroWalk,
    /// Exact basic solution with `lambda = 0` rows.
    Exact,
    RoundUp,
    Drop,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HalveReport {
    pub path: ColoringPath,
    pub fractional_before: usize,
    pub fractional_after: usize,
    pub constraints: usize,
    /// Group mass bound of the plan, on the walk path.
    pub c: Option<f64>,
    pub entropy_sum: Option<f64>,
    pub walk_steps: usize,
    pub moved_to_waste: usize,
}

fn snap_grid(v: f64) -> Q {
    let scale = (1u64 << GRID_BITS) as f64;
    let k = (v * scale).round().clamp(1.0, scale - 1.0) as u64;
    Q::new(BigInt::from(k), BigInt::from(1u64) << GRID_BITS)
}

fn fractional_columns(x: &FractionalSolution) -> Vec<(Pattern, Q)> {
    x.regular().iter().filter(|(_, v)| !v.is_integer()).map(|(p, v)| (p.clone(), v.clone())).collect()
}

/// Runs the walk and checks its contract; returns the end point.
fn walk(start: Vec<f64>, constraints: Vec<Constraint>, s: &ColoringSettings, seed: u64) -> Result<(Vec<f64>, usize)> {
    let problem = ColoringProblem { start, constraints, delta: s.delta_color, seed };
    let res = partial_color(&problem, &s.walk)?;
    coloring::verify(&problem, &res)?;
    Ok((res.point, res.stats.steps))
}

/// Colors `f` keeping only `lambda = 0` rows: exactly for small supports,
/// by the walk otherwise. Frozen coordinates come back as exact 0 or 1.
fn color_lambda_zero(f: &[Q], inc: &Incidence, s: &ColoringSettings, seed: u64) -> Result<(Vec<Q>, ColoringPath, usize, usize)> {
    let m = f.len();
    if m <= s.exact_limit {
        let rows = lambda_zero_rows(inc, m / 2);
        let qrows: Vec<Vec<Q>> = rows.iter().map(|r| r.iter().map(|&a| rational::qi(a)).collect()).collect();
        let res = basic_solution_color(f, &qrows)?;
        return Ok((res.point, ColoringPath::Exact, rows.len(), 0));
    }
    let rows = lambda_zero_rows(inc, m / 16);
    let k = rows.len();
    let constraints = rows.into_iter().map(|r| Constraint::new(r.into_iter().map(|a| a as f64).collect(), 0.0)).collect();
    let (y, steps) = walk(f.iter().map(rational::to_f64).collect(), constraints, s, seed)?;
    let band = s.delta_color;
    let point = y
        .into_iter()
        .map(|v| if v <= band { Q::zero() } else if v >= 1.0 - band { Q::one() } else { snap_grid(v) })
        .collect();
    Ok((point, ColoringPath::ZeroWalk, k, steps))
}

/// Makes at least half of the fractional regular entries of `x` integral.
///
/// The integral parts stay; the fractional parts are colored with the group
/// and subgroup plan when it applies and with `lambda = 0` rows otherwise.
/// After the walk, entries within `delta_color` of 0 move to waste and those
/// within `delta_color` of 1 are rounded up.
pub fn halve_support(x: &FractionalSolution, s: &ColoringSettings, seed: u64) -> Result<(FractionalSolution, HalveReport)> {
    let cols = fractional_columns(x);
    let m = cols.len();
    let mut report = HalveReport {
        path: ColoringPath::None,
        fractional_before: m,
        fractional_after: m,
        constraints: 0,
        c: None,
        entropy_sum: None,
        walk_steps: 0,
        moved_to_waste: 0,
    };
    if m == 0 {
        return Ok((x.clone(), report));
    }
    let mut out = x.clone();
    if m <= s.stop_support {
        for (p, v) in cols {
            out.set(p, rational::ceil(&v));
        }
        report.path = ColoringPath::RoundUp;
        report.fractional_after = 0;
        return Ok((out, report));
    }
    let f: Vec<Q> = cols.iter().map(|(_, v)| rational::frac(v)).collect();
    let refs: Vec<&Pattern> = cols.iter().map(|(p, _)| p).collect();
    let inc = Incidence::new(&refs, x.capacity());

    let point: Vec<Q> = match build_grouping_plan(&inc, s.delta, s.epsilon, s.c, s.c_max) {
        Ok(plan) => {
            report.path = ColoringPath::Walk;
            report.constraints = plan.constraints.len();
            report.c = Some(plan.c);
            report.entropy_sum = Some(plan.entropy.sum);
            let (y, steps) = walk(f.iter().map(rational::to_f64).collect(), plan.constraints, s, seed)?;
            report.walk_steps = steps;
            let band = s.delta_color;
            y.into_iter()
                .zip(&cols)
                .map(|(v, (p, _))| {
                    if v <= 0.0 {
                        Q::zero()
                    } else if v <= band {
                        let amount = snap_grid(v);
                        for &(w, c) in p.items() {
                            out.add_waste(w, &amount * rational::qu(c as u64));
                        }
                        report.moved_to_waste += 1;
                        Q::zero()
                    } else if v >= 1.0 - band {
                        Q::one()
                    } else {
                        snap_grid(v)
                    }
                })
                .collect()
        }
        Err(Error::Precondition(_)) | Err(Error::Coloring(ColoringError::Entropy { .. })) => {
            let (point, path, k, steps) = color_lambda_zero(&f, &inc, s, seed)?;
            report.path = path;
            report.constraints = k;
            report.walk_steps = steps;
            point
        }
        Err(e) => return Err(e),
    };
    for ((p, v), y) in cols.into_iter().zip(point) {
        out.set(p, rational::floor(&v) + y);
    }
    report.fractional_after = out.fractional_support();
    if 2 * report.fractional_after > m {
        return Err(Error::Audit { stage: "halve".into(), detail: format!("fractional support {m} -> {}", report.fractional_after) });
    }
    Ok((out, report))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundReport {
    pub rounds: usize,
    pub paths: Vec<ColoringPath>,
    pub dropped: usize,
    #[serde(with = "rational::serde_q")]
    pub objective_delta: Q,
}

/// Rewrites `x` so every regular weight is a multiple of `gamma` and the
/// result dominates `x`: with `x = gamma (z + f)`, `z` integral and `f` in
/// `[0, 1)`, the vector `f` is colored to an integral point round by round
/// and waste from `top_up` restores dominance.
pub fn round_to_gamma(x: &FractionalSolution, gamma: &Q, s: &ColoringSettings, top_up: &TopUp, seed: u64) -> Result<(FractionalSolution, RoundReport)> {
    if !gamma.is_positive() || gamma > &Q::one() {
        return Err(TransformError::Precondition("gamma must lie in (0, 1]".into()).into());
    }
    let target = x.covered();
    let entries: Vec<(Pattern, Q)> = x.regular().iter().map(|(p, v)| (p.clone(), v / gamma)).collect();
    let mut f: Vec<Q> = entries.iter().map(|(_, t)| rational::frac(t)).collect();
    let m0 = f.iter().filter(|v| !v.is_zero()).count();
    let cap_rounds = (m0.max(2) as f64).log2().ceil() as usize + 10;
    let mut report = RoundReport { rounds: 0, paths: Vec::new(), dropped: 0, objective_delta: Q::zero() };
    loop {
        let active: Vec<usize> = (0..f.len()).filter(|&j| !f[j].is_integer()).collect();
        if active.is_empty() {
            break;
        }
        if active.len() <= s.stop_support {
            for &j in &active {
                f[j] = Q::zero();
            }
            report.dropped = active.len();
            report.paths.push(ColoringPath::Drop);
            break;
        }
        if report.rounds >= cap_rounds {
            return Err(TransformError::NotConverged { iterations: report.rounds, potentials: vec![active.len() as f64] }.into());
        }
        let refs: Vec<&Pattern> = active.iter().map(|&j| &entries[j].0).collect();
        let inc = Incidence::new(&refs, x.capacity());
        let fa: Vec<Q> = active.iter().map(|&j| f[j].clone()).collect();
        let (point, path, _, _) = color_lambda_zero(&fa, &inc, s, seed.wrapping_add(report.rounds as u64))?;
        for (&j, y) in active.iter().zip(point) {
            f[j] = y;
        }
        report.rounds += 1;
        report.paths.push(path);
    }
    let mut out = FractionalSolution::new(x.capacity());
    for ((p, t), fj) in entries.into_iter().zip(f) {
        out.add(p, (rational::floor(&t) + fj) * gamma);
    }
    for (&w, v) in x.waste() {
        out.add_waste(w, v.clone());
    }
    top_up.apply(&mut out, &target, gamma)?;
    report.objective_delta = out.objective() - x.objective();
    Ok((out, report))
}

/// Waste bought per size class after a coloring step.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum TopUp {
    /// Only the least waste that restores dominance.
    Audited,
    /// `large * scale * 2^l` copies of the largest item of class `l`
    /// (`small * sqrt(delta ln(2/delta))` in place of `large` for items below
    /// `epsilon`), followed by the audited repair of whatever remains.
    Constant { large: f64, small: f64, delta: f64, epsilon: f64 },
}

impl TopUp {
    /// Adds waste to `x` until it dominates `target`. Fails if the result
    /// still does not dominate.
    pub fn apply(&self, x: &mut FractionalSolution, target: &Coverage, scale: &Q) -> Result<()> {
        let cap = x.capacity();
        if let TopUp::Constant { large, small, delta, epsilon } = self {
            let mut largest: BTreeMap<u32, u64> = BTreeMap::new();
            for &w in target.keys() {
                let e = largest.entry(size_class_of(w, cap)).or_insert(w);
                *e = (*e).max(w);
            }
            for (ell, w) in largest {
                let size = w as f64 / cap as f64;
                let factor = if size < *epsilon { small * (delta * (2.0 / delta).ln()).sqrt() } else { *large };
                let copies = rational::from_f64(factor * 2f64.powi(ell as i32)) * scale;
                if copies.is_positive() {
                    x.add_waste(w, copies);
                }
            }
        }
        repair_dominance(x, target, &Q::zero(), &BTreeSet::new());
        if !coverage_dominates(&x.covered(), target) {
            return Err(Error::Audit { stage: "top-up".into(), detail: "waste top-up did not restore dominance".into() });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn settings() -> ColoringSettings {
        ColoringSettings {
            delta: 0.25,
            epsilon: 0.01,
            c: 64.0,
            c_max: 1024.0,
            delta_color: 0.01,
            walk: WalkConfig::default(),
            exact_limit: 96,
            stop_support: 1,
        }
    }

    fn random_solution(m: usize, seed: u64) -> FractionalSolution {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut x = FractionalSolution::new(100);
        for _ in 0..m {
            let a = rng.gen_range(30..60);
            let b = rng.gen_range(10..=(100 - a) / 2);
            x.add(Pattern::new([(a, 1), (b, 2)]), q(rng.gen_range(1..16), 16));
        }
        x
    }

    #[test]
    fn integral_input_is_identity() {
        let mut x = FractionalSolution::new(10);
        x.add(Pattern::single(5, 2), qi(3));
        let (y, r) = halve_support(&x, &settings(), 1).unwrap();
        assert_eq!(y, x);
        assert_eq!(r.path, ColoringPath::None);
    }

    #[test]
    fn halving_on_exact_path_preserves_total() {
        let x = random_solution(30, 3);
        let before = x.fractional_support();
        let (y, r) = halve_support(&x, &settings(), 5).unwrap();
        assert_eq!(r.path, ColoringPath::Exact);
        assert!(2 * y.fractional_support() <= before);
        assert_eq!(y.regular_total(), x.regular_total());
    }

    #[test]
    fn round_to_one_is_integral_and_dominates() {
        let x = random_solution(40, 8);
        let (y, _) = round_to_gamma(&x, &qi(1), &settings(), &TopUp::Audited, 2).unwrap();
        assert!(y.regular().values().all(|v| v.is_integer()));
        assert!(coverage_dominates(&y.covered(), &x.covered()));
    }

    #[test]
    fn round_to_quarter_gives_multiples() {
        let x = random_solution(40, 9);
        let g = q(1, 4);
        let (y, _) = round_to_gamma(&x, &g, &settings(), &TopUp::Audited, 2).unwrap();
        assert!(y.regular().values().all(|v| (v / &g).is_integer()));
        assert!(coverage_dominates(&y.covered(), &x.covered()));
    }

    #[test]
    fn multiples_of_gamma_unchanged() {
        let mut x = FractionalSolution::new(10);
        x.add(Pattern::single(5, 2), q(3, 4));
        let (y, _) = round_to_gamma(&x, &q(1, 4), &settings(), &TopUp::Audited, 0).unwrap();
        assert_eq!(y, x);
    }

    #[test]
    fn constant_top_up_adds_per_class() {
        let mut x = FractionalSolution::new(100);
        let target: Coverage = [(40, qi(1)), (10, qi(1))].into();
        let t = TopUp::Constant { large: 1.0, small: 1.0, delta: 0.25, epsilon: 0.0 };
        t.apply(&mut x, &target, &qi(1)).unwrap();
        // classes 1 (40) and 3 (10): 2 and 8 copies, plus nothing to repair
        assert_eq!(x.waste().get(&40), Some(&qi(2)));
        assert_eq!(x.waste().get(&10), Some(&qi(8)));
    }
}
