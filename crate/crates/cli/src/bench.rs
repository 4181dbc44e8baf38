use std::fmt;
use std::time::Instant;

use entropy_binpack::generate::{generate, Family};
use entropy_binpack::lp::{ceil_value, default_gap, solve_lp};
use entropy_binpack::pipeline::Profile;
use entropy_binpack::{rational, Error};
use rayon::prelude::*;

use crate::args::Algo;
use crate::solver::run_algo;

pub const CSV_HEADER: &str = "algo,n,seed,profile,cost,lp_value,ceil_lp,gap,stages,runtime_ms";

/// Environment variable holding the number of bench workers.
pub const WORKERS_ENV: &str = "BINPACK_WORKERS";

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub algo: Algo,
    pub n: u64,
    pub seed: u64,
    pub profile: Option<Profile>,
    /// `None` when the solver failed; the error is kept alongside.
    pub cost: Option<u64>,
    pub lp_value: f64,
    pub ceil_lp: u64,
    pub stages: usize,
    pub runtime_ms: u128,
    pub error: Option<BenchError>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BenchError {
    Audit(String),
    Solver(String),
}

impl Row {
    pub fn gap(&self) -> Option<i64> {
        self.cost.map(|c| c as i64 - self.ceil_lp as i64)
    }
}

impl fmt::Display for Row {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<i64>| v.map(|x| x.to_string()).unwrap_or_default();
        write!(
            f,
            "{},{},{},{},{},{:.6},{},{},{},{}",
            self.algo.name(),
            self.n,
            self.seed,
            self.profile.map_or("none", |p| p.name()),
            opt(self.cost.map(|c| c as i64)),
            self.lp_value,
            self.ceil_lp,
            opt(self.gap()),
            self.stages,
            self.runtime_ms
        )
    }
}

#[derive(Debug, Clone)]
pub struct BenchPlan {
    pub algos: Vec<Algo>,
    pub family: Family,
    pub sizes: Vec<usize>,
    pub seeds: std::ops::Range<u64>,
    pub profile: Profile,
    pub timing: bool,
}

pub fn workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn classify(e: &Error) -> BenchError {
    match e {
        Error::Audit { .. } => BenchError::Audit(e.to_string()),
        _ => BenchError::Solver(e.to_string()),
    }
}

/// All algorithms on one generated instance. The LP bound is shared.
fn run_instance(plan: &BenchPlan, n: usize, seed: u64) -> Vec<Row> {
    let failed = |algo: Algo, err: BenchError| Row {
        algo,
        n: n as u64,
        seed,
        profile: algo.uses_profile().then_some(plan.profile),
        cost: None,
        lp_value: 0.0,
        ceil_lp: 0,
        stages: 0,
        runtime_ms: 0,
        error: Some(err),
    };
    let inst = match generate(plan.family, n, seed) {
        Ok(i) => i,
        Err(e) => return plan.algos.iter().map(|&a| failed(a, BenchError::Solver(e.to_string()))).collect(),
    };
    let lb = match solve_lp(&inst, &default_gap(&inst)) {
        Ok(lp) => lp.lower_bound,
        Err(e) => return plan.algos.iter().map(|&a| failed(a, BenchError::Solver(e.to_string()))).collect(),
    };
    let (lp_value, ceil_lp) = (rational::to_f64(&lb), ceil_value(&lb));
    plan.algos
        .iter()
        .map(|&algo| {
            let start = Instant::now();
            let res = run_algo(algo, &inst, plan.profile, seed);
            let runtime_ms = if plan.timing { start.elapsed().as_millis() } else { 0 };
            let mut row = failed(algo, BenchError::Solver(String::new()));
            row.n = inst.n_items();
            row.lp_value = lp_value;
            row.ceil_lp = ceil_lp;
            row.runtime_ms = runtime_ms;
            match res {
                Ok(run) if run.certificate.stages.iter().all(|s| s.passed) => {
                    row.cost = Some(run.packing.cost() as u64);
                    row.stages = run.certificate.stages.len();
                    row.error = None;
                }
                Ok(_) => row.error = Some(BenchError::Audit("a certificate stage failed".into())),
                Err(e) => row.error = Some(classify(&e)),
            }
            row
        })
        .collect()
}

/// Rows in plan order (size, seed, algorithm), independent of scheduling.
pub fn run_bench(plan: &BenchPlan, workers: usize) -> Vec<Row> {
    let jobs: Vec<(usize, u64)> = plan.sizes.iter().flat_map(|&n| plan.seeds.clone().map(move |s| (n, s))).collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build().expect("thread pool");
    let per_job: Vec<Vec<Row>> = pool.install(|| jobs.par_iter().map(|&(n, s)| run_instance(plan, n, s)).collect());
    per_job.into_iter().flatten().collect()
}

pub fn to_csv(rows: &[Row]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_string());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(timing: bool) -> BenchPlan {
        BenchPlan {
            algos: vec![Algo::Ffd, Algo::Kk, Algo::Entropy],
            family: Family::Uniform,
            sizes: vec![16, 24],
            seeds: 0..2,
            profile: Profile::Desk,
            timing,
        }
    }

    #[test]
    fn rows_follow_plan_order() {
        let rows = run_bench(&plan(false), 2);
        assert_eq!(rows.len(), 12);
        assert_eq!(rows[0].algo, Algo::Ffd);
        assert_eq!(rows[2].algo, Algo::Entropy);
        assert!(rows.iter().all(|r| r.error.is_none() && r.gap().unwrap() >= 0));
    }

    #[test]
    fn report_is_reproducible() {
        let a = to_csv(&run_bench(&plan(false), 1));
        let b = to_csv(&run_bench(&plan(false), 3));
        assert_eq!(a, b);
        assert!(a.starts_with(CSV_HEADER));
    }

    #[test]
    fn failed_rows_leave_cost_empty() {
        let r = Row {
            algo: Algo::Brute,
            n: 40,
            seed: 1,
            profile: None,
            cost: None,
            lp_value: 3.5,
            ceil_lp: 4,
            stages: 0,
            runtime_ms: 0,
            error: Some(BenchError::Solver("too many items".into())),
        };
        assert_eq!(r.to_string(), "brute,40,1,none,,3.500000,4,,0,0");
    }
}
