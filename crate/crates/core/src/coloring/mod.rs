//! Constructive partial coloring: move a point of the unit cube so that half
//! of its coordinates become integral while every constraint `v_i` moves by
//! at most `lambda_i ||v_i||_2`.

mod exact;
mod walk;

use serde::Serialize;

use crate::error::ColoringError;

pub use exact::{basic_solution_color, ExactColoring};
pub use walk::partial_color;

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub v: Vec<f64>,
    pub lambda: f64,
}

impl Constraint {
    pub fn new(v: Vec<f64>, lambda: f64) -> Self {
        Constraint { v, lambda }
    }

    pub fn norm(&self) -> f64 {
        self.v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn dot(&self, y: &[f64]) -> f64 {
        self.v.iter().zip(y).map(|(a, b)| a * b).sum()
    }
}

#[derive(Debug, Clone)]
pub struct ColoringProblem {
    pub start: Vec<f64>,
    pub constraints: Vec<Constraint>,
    /// Width of the band `[0, delta] u [1 - delta, 1]` counted as frozen.
    pub delta: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct WalkConfig {
    /// Gaussian step length.
    pub step: f64,
    /// Step budget per attempt; `None` means `ceil(64 m / step^2)`.
    pub max_steps: Option<usize>,
    pub retries: u32,
    /// Record one trace line per this many steps (0 disables tracing).
    pub trace_every: usize,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig { step: 0.05, max_steps: None, retries: 10, trace_every: 0 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct WalkStats {
    pub steps: usize,
    pub hyperplanes_hit: usize,
    pub attempts: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceLine {
    pub step: usize,
    pub active: usize,
    pub frozen: usize,
}

#[derive(Debug, Clone)]
pub struct ColoringResult {
    pub point: Vec<f64>,
    pub frozen: Vec<usize>,
    pub stats: WalkStats,
    pub trace: Vec<TraceLine>,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EntropyCheck {
    pub sum: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Evaluates `sum_i exp(-lambda_i^2 / 16) <= m / 16`.
pub fn check_entropy(constraints: &[Constraint], m: usize) -> EntropyCheck {
    entropy_of(constraints.iter().map(|c| c.lambda), m)
}

pub fn entropy_of(lambdas: impl IntoIterator<Item = f64>, m: usize) -> EntropyCheck {
    let sum: f64 = lambdas.into_iter().map(|l| (-l * l / 16.0).exp()).sum();
    let bound = m as f64 / 16.0;
    // tolerate rounding in the boundary case sum == m/16
    EntropyCheck { sum, bound, pass: sum <= bound * (1.0 + 1e-12) }
}

/// Frozen coordinates of `y` for band width `delta`.
pub fn frozen_set(y: &[f64], delta: f64) -> Vec<usize> {
    (0..y.len()).filter(|&j| y[j] <= delta || y[j] >= 1.0 - delta).collect()
}

/// Independent post-hoc check of the coloring contract.
pub fn verify(problem: &ColoringProblem, result: &ColoringResult) -> Result<(), ColoringError> {
    let m = problem.start.len();
    if result.point.len() != m {
        return Err(ColoringError::Verification("point has the wrong dimension".into()));
    }
    if result.point.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
        return Err(ColoringError::Verification("point leaves the unit cube".into()));
    }
    let frozen = frozen_set(&result.point, problem.delta);
    if 2 * frozen.len() < m {
        return Err(ColoringError::Verification(format!("{} of {m} coordinates frozen", frozen.len())));
    }
    let diff: Vec<f64> = result.point.iter().zip(&problem.start).map(|(a, b)| a - b).collect();
    for (i, c) in problem.constraints.iter().enumerate() {
        let norm = c.norm();
        let dev = c.dot(&diff).abs();
        if dev > c.lambda * norm + 1e-6 * norm {
            return Err(ColoringError::Verification(format!(
                "constraint {i} moved by {dev}, allowed {}",
                c.lambda * norm
            )));
        }
    }
    Ok(())
}

fn validate(problem: &ColoringProblem) -> Result<(), ColoringError> {
    let m = problem.start.len();
    if m < 2 {
        return Err(ColoringError::Invalid("need at least two coordinates".into()));
    }
    if problem.start.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
        return Err(ColoringError::Invalid("start point outside the unit cube".into()));
    }
    if !(problem.delta > 0.0 && problem.delta < 0.5) {
        return Err(ColoringError::Invalid("delta must lie in (0, 1/2)".into()));
    }
    for (i, c) in problem.constraints.iter().enumerate() {
        if c.v.len() != m {
            return Err(ColoringError::Invalid(format!("constraint {i} has the wrong dimension")));
        }
        if c.norm() == 0.0 {
            return Err(ColoringError::Invalid(format!("constraint {i} is the zero vector")));
        }
        if c.lambda < 0.0 || !c.lambda.is_finite() {
            return Err(ColoringError::Invalid(format!("constraint {i} has an invalid lambda")));
        }
    }
    let e = check_entropy(&problem.constraints, m);
    if !e.pass {
        return Err(ColoringError::Entropy { sum: e.sum, bound: e.bound });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_examples() {
        let zero = |t: usize| vec![Constraint::new(vec![1.0], 0.0); t];
        let e = check_entropy(&zero(3), 48);
        assert_eq!(e.sum, 3.0);
        assert!(e.pass);
        let l = 4.0 * 2f64.ln().sqrt();
        let e = check_entropy(&[Constraint::new(vec![1.0], l)], 16);
        assert!((e.sum - 0.5).abs() < 1e-12);
        assert!(e.pass);
        assert!(!check_entropy(&zero(2), 16).pass);
    }
}
