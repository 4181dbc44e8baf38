//! Gaussian random walk inside the cube, restricted to the subspace
//! orthogonal to frozen coordinates and tight constraints.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{validate, verify, ColoringProblem, ColoringResult, TraceLine, WalkConfig, WalkStats};
use crate::error::ColoringError;

const RANK_TOL: f64 = 1e-9;

/// Seed of retry number `attempt`.
pub(crate) fn sub_seed(seed: u64, attempt: u32) -> u64 {
    seed.wrapping_add((attempt as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

pub fn partial_color(problem: &ColoringProblem, config: &WalkConfig) -> Result<ColoringResult, ColoringError> {
    validate(problem)?;
    let attempts = config.retries.max(1);
    for attempt in 0..attempts {
        if let Some(mut res) = walk(problem, config, sub_seed(problem.seed, attempt)) {
            res.stats.attempts = attempt + 1;
            match verify(problem, &res) {
                Ok(()) => return Ok(res),
                Err(e) => log::warn!("discarding walk attempt {attempt}: {e}"),
            }
        }
    }
    Err(ColoringError::Failed { attempts })
}

/// Orthonormal basis of the active subspace, grown one vector at a time.
struct Active {
    basis: Vec<Vec<f64>>,
}

impl Active {
    fn add(&mut self, v: &[f64]) {
        let norm0 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut u = v.to_vec();
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for b in &self.basis {
                let c: f64 = b.iter().zip(&u).map(|(p, q)| p * q).sum();
                if c != 0.0 {
                    for (x, y) in u.iter_mut().zip(b) {
                        *x -= c * y;
                    }
                }
            }
        }
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > RANK_TOL * norm0.max(1.0) {
            for x in u.iter_mut() {
                *x /= norm;
            }
            self.basis.push(u);
        }
    }

    fn project(&self, g: &mut [f64]) {
        for _ in 0..2 {
            for b in &self.basis {
                let c: f64 = b.iter().zip(g.iter()).map(|(p, q)| p * q).sum();
                if c != 0.0 {
                    for (x, y) in g.iter_mut().zip(b) {
                        *x -= c * y;
                    }
                }
            }
        }
    }
}

fn walk(problem: &ColoringProblem, config: &WalkConfig, seed: u64) -> Option<ColoringResult> {
    let m = problem.start.len();
    let need = m.div_ceil(2);
    let delta = problem.delta;
    let step = config.step;
    let budget = config.max_steps.unwrap_or_else(|| (64.0 * m as f64 / (step * step)).ceil() as usize);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let cons = &problem.constraints;
    let norms: Vec<f64> = cons.iter().map(|c| c.norm()).collect();
    let bounds: Vec<f64> = cons.iter().zip(&norms).map(|(c, n)| c.lambda * n).collect();
    let mut vals = vec![0.0; cons.len()];
    let mut tight = vec![false; cons.len()];
    let mut frozen = vec![false; m];
    let mut n_frozen = 0usize;
    let mut y = problem.start.clone();
    let mut active = Active { basis: Vec::new() };
    let mut stats = WalkStats::default();
    let mut trace = Vec::new();

    let unit = |j: usize| {
        let mut e = vec![0.0; m];
        e[j] = 1.0;
        e
    };
    for j in 0..m {
        if y[j] <= delta || y[j] >= 1.0 - delta {
            frozen[j] = true;
            n_frozen += 1;
            active.add(&unit(j));
        }
    }
    for (i, c) in cons.iter().enumerate() {
        if bounds[i] <= RANK_TOL * norms[i] {
            tight[i] = true;
            active.add(&c.v);
        }
    }

    let mut d = vec![0.0; m];
    while n_frozen < need {
        if stats.steps >= budget {
            return None;
        }
        stats.steps += 1;
        for x in d.iter_mut() {
            *x = StandardNormal.sample(&mut rng);
        }
        active.project(&mut d);
        for j in 0..m {
            if frozen[j] {
                d[j] = 0.0;
            }
        }
        let dn = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        if dn < 1e-12 {
            return None;
        }

        let mut t = step;
        for j in 0..m {
            if !frozen[j] && d[j] != 0.0 {
                let tj = if d[j] > 0.0 { (1.0 - y[j]) / d[j] } else { -y[j] / d[j] };
                t = t.min(tj.max(0.0));
            }
        }
        let rates: Vec<f64> = cons.iter().map(|c| c.dot(&d)).collect();
        for i in 0..cons.len() {
            if !tight[i] && rates[i] != 0.0 {
                let ti = if rates[i] > 0.0 { (bounds[i] - vals[i]) / rates[i] } else { (-bounds[i] - vals[i]) / rates[i] };
                t = t.min(ti.max(0.0));
            }
        }
        let hit = t * (1.0 + 1e-12);

        for j in 0..m {
            if frozen[j] || d[j] == 0.0 {
                continue;
            }
            let tj = if d[j] > 0.0 { (1.0 - y[j]) / d[j] } else { -y[j] / d[j] };
            if tj <= hit {
                y[j] = if d[j] > 0.0 { 1.0 } else { 0.0 };
            } else {
                y[j] = (y[j] + t * d[j]).clamp(0.0, 1.0);
            }
        }
        for i in 0..cons.len() {
            vals[i] += t * rates[i];
            if !tight[i] && (vals[i].abs() >= bounds[i] - RANK_TOL * norms[i]) {
                tight[i] = true;
                stats.hyperplanes_hit += 1;
                active.add(&cons[i].v);
            }
        }
        for j in 0..m {
            if !frozen[j] && (y[j] <= delta || y[j] >= 1.0 - delta) {
                frozen[j] = true;
                n_frozen += 1;
                active.add(&unit(j));
            }
        }
        if config.trace_every > 0 && stats.steps % config.trace_every == 0 {
            trace.push(TraceLine { step: stats.steps, active: active.basis.len(), frozen: n_frozen });
        }
    }
    let frozen_idx = (0..m).filter(|&j| frozen[j]).collect();
    Some(ColoringResult { point: y, frozen: frozen_idx, stats, trace })
}
