//! End-to-end solvers: preprocessing, the LP, the iterated
//! round / spread / halve / top-up loop, and the final integral packing.

mod assign;
mod halve;
mod plan;
mod preprocess;
mod waste;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::coloring::WalkConfig;
use crate::error::{Error, Result, TransformError};
use crate::instance::{coverage_dominates, Coverage, Instance};
use crate::lp::{self, solve_lp};
use crate::packing::{first_fit_into, loads_of, PackingResult};
use crate::pattern::{FractionalSolution, Pattern};
use crate::rational::{self, Q};
use crate::transform::{make_well_spread, resubstitute, SpreadParams, TraceStep, WasteMode};

pub use assign::{assign_items, assign_slots, Flow, TransportProblem};
pub(crate) use assign::integral_demand;
pub use halve::{halve_support, round_to_gamma, ColoringPath, ColoringSettings, HalveReport, RoundReport, TopUp};
pub use plan::{build_grouping_plan, lambda_zero_rows, Group, GroupingPlan, Incidence};
pub use preprocess::{greedy_fill, preprocess, Preprocessed};
pub use waste::{finalize_waste, waste_items};

/// Parameter schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// `delta = beta = gamma = 1/ceil(log^4 n)`, `epsilon = 1/(4 log^12 n)`,
    /// constant top-ups, and rounding up once the support is below `100 log n`.
    #[serde(rename = "paper-asymptotic")]
    Asymptotic,
    /// `delta = beta = gamma = 1/max(2, ceil(log log n))`, `epsilon = gamma beta delta / 2`,
    /// audited top-ups only, coloring down to a single fractional entry.
    Desk,
}

impl Profile {
    pub fn name(self) -> &'static str {
        match self {
            Profile::Asymptotic => "paper-asymptotic",
            Profile::Desk => "desk",
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "paper-asymptotic" | "asymptotic" => Ok(Profile::Asymptotic),
            "desk" => Ok(Profile::Desk),
            _ => Err(format!("unknown profile '{s}' (expected desk or paper-asymptotic)")),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineConfig {
    pub profile: Profile,
    /// Item count the schedule was derived from.
    pub n: u64,
    pub params: SpreadParams,
    pub waste_mode: WasteMode,
    /// Waste bought after each halving step.
    pub top_up: TopUp,
    /// Waste bought after each rounding to multiples of gamma (scaled by gamma).
    pub gamma_top_up: TopUp,
    pub group_c: f64,
    pub group_c_max: f64,
    pub stop_support: usize,
    pub exact_limit: usize,
    /// Round the large items in groups before solving the LP.
    pub group_large: bool,
    #[serde(skip)]
    pub walk: WalkConfig,
}

fn log2(n: u64) -> f64 {
    (n.max(2) as f64).log2()
}

impl PipelineConfig {
    pub fn new(profile: Profile, n: u64) -> Self {
        let l = log2(n);
        let (params, top_up, gamma_top_up, stop_support) = match profile {
            Profile::Desk => {
                let k = (l.log2().ceil() as u64).max(2);
                (SpreadParams::uniform(k), TopUp::Audited, TopUp::Audited, 1)
            }
            Profile::Asymptotic => {
                let k = (l.powi(4).ceil() as u64).max(2);
                let mut params = SpreadParams::uniform(k);
                let denom = (4.0 * l.powi(12)).ceil().to_u64().unwrap_or(u64::MAX);
                let eps = Q::new(BigInt::from(1), BigInt::from(denom));
                if eps < params.epsilon {
                    params.epsilon = eps;
                }
                let delta = 1.0 / k as f64;
                let epsilon = rational::to_f64(&params.epsilon);
                let top_up = TopUp::Constant { large: 16.0, small: 16.0, delta, epsilon };
                let gamma_top_up = TopUp::Constant { large: 16.0 * l.ceil(), small: 16.0 * l.ceil(), delta: 1.0, epsilon: 0.0 };
                (params, top_up, gamma_top_up, (100.0 * l).ceil() as usize)
            }
        };
        PipelineConfig {
            profile,
            n,
            params,
            waste_mode: WasteMode::Audited,
            top_up,
            gamma_top_up,
            group_c: 64.0,
            group_c_max: 1024.0,
            stop_support,
            exact_limit: 96,
            group_large: true,
            walk: WalkConfig::default(),
        }
    }

    pub fn coloring(&self) -> ColoringSettings {
        ColoringSettings {
            delta: rational::to_f64(&self.params.delta),
            epsilon: rational::to_f64(&self.params.epsilon),
            c: self.group_c,
            c_max: self.group_c_max,
            delta_color: (1.0 / self.n.max(4) as f64).min(0.25),
            walk: self.walk.clone(),
            exact_limit: self.exact_limit,
            stop_support: self.stop_support,
        }
    }
}

/// Snapshot of the maintained solution after one stage, with its audit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageRecord {
    pub iteration: usize,
    pub stage: String,
    pub objective: f64,
    pub objective_exact: [String; 2],
    pub regular_support: usize,
    pub fractional_support: usize,
    /// The relation checked against the previous stage.
    pub audit: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub round: RoundReport,
    pub spread_rounds: usize,
    pub glue_steps: usize,
    pub halve: HalveReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunCertificate {
    pub algo: String,
    pub profile: Option<Profile>,
    pub seed: u64,
    pub n_items: u64,
    pub sigma: f64,
    pub discarded_size: f64,
    /// `entropy`, `lp-round`, or `ffd` when the instance was too small to split.
    pub path: String,
    pub lp_value: Option<[String; 2]>,
    pub lp_lower_bound: Option<[String; 2]>,
    pub stages: Vec<StageRecord>,
    pub iterations: Vec<IterationRecord>,
    pub glue_steps: usize,
    /// Bins before and after undoing the glue steps.
    pub bins_transformed: usize,
    pub bins_resubstituted: usize,
    pub waste_bins: usize,
    pub cost: usize,
}

impl RunCertificate {
    pub fn new(algo: &str, profile: Option<Profile>, seed: u64, inst: &Instance) -> Self {
        RunCertificate {
            algo: algo.into(),
            profile,
            seed,
            n_items: inst.n_items(),
            sigma: rational::to_f64(&inst.total_size()),
            discarded_size: 0.0,
            path: String::new(),
            lp_value: None,
            lp_lower_bound: None,
            stages: Vec::new(),
            iterations: Vec::new(),
            glue_steps: 0,
            bins_transformed: 0,
            bins_resubstituted: 0,
            waste_bins: 0,
            cost: 0,
        }
    }

    fn stage(&mut self, iteration: usize, stage: &str, x: &FractionalSolution, audit: &str, passed: bool) {
        let obj = x.objective();
        self.stages.push(StageRecord {
            iteration,
            stage: stage.into(),
            objective: rational::to_f64(&obj),
            objective_exact: rational::to_pair(&obj),
            regular_support: x.support(),
            fractional_support: x.fractional_support(),
            audit: audit.into(),
            passed,
        });
    }

    /// All stage audits passed.
    pub fn passed(&self) -> bool {
        self.stages.iter().all(|s| s.passed)
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub packing: PackingResult,
    pub certificate: RunCertificate,
    pub trace: Vec<TraceStep>,
    /// The integral solution over glued and grouped items, before
    /// resubstitution; `None` when the instance was packed directly.
    pub transformed: Option<FractionalSolution>,
    /// The rounded-up large items the LP was solved for.
    pub large: Option<Instance>,
}

fn audit(cert: &mut RunCertificate, iteration: usize, stage: &str, x: &FractionalSolution, target: &Coverage) -> Result<()> {
    let ok = coverage_dominates(&x.covered(), target);
    cert.stage(iteration, stage, x, "dominance", ok);
    if ok {
        Ok(())
    } else {
        Err(Error::Audit { stage: stage.into(), detail: format!("iteration {iteration}: dominance lost") })
    }
}

fn sub_seed(seed: u64, iteration: usize, stage: u64) -> u64 {
    seed ^ (iteration as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ stage.wrapping_mul(0xC2B2_AE3D_27D4_EB4F)
}

/// Packs a tiny instance (or one without large items) greedily.
fn pack_directly(inst: &Instance, cert: &mut RunCertificate) -> Result<PackingResult> {
    let mut bins = Vec::new();
    let opened = greedy_fill(&mut bins, &inst.item_weights()?, inst.capacity(), None)?;
    cert.path = "ffd".into();
    cert.waste_bins = opened;
    let packing = PackingResult::new(inst, bins, opened)?;
    cert.cost = packing.cost();
    Ok(packing)
}

/// The entropy-rounding solver.
pub fn solve_entropy(inst: &Instance, cfg: &PipelineConfig, seed: u64) -> Result<SolveOutput> {
    let mut cert = RunCertificate::new("entropy", Some(cfg.profile), seed, inst);
    let pre = preprocess(inst, cfg.group_large)?;
    cert.discarded_size = rational::to_f64(&pre.discarded_size);
    if pre.tiny || pre.large.n_items() == 0 {
        let packing = pack_directly(inst, &mut cert)?;
        return Ok(SolveOutput { packing, certificate: cert, trace: Vec::new(), transformed: None, large: None });
    }
    cert.path = "entropy".into();
    let (fixed, mut x) = solve_relaxation(&pre, &mut cert)?;

    let s = cfg.coloring();
    let gamma = cfg.params.gamma.clone();
    let q = (Q::one() / &gamma).to_integer().to_u64().ok_or_else(|| Error::Precondition("1/gamma must be an integer".into()))?;
    if !(Q::one() / &gamma).is_integer() {
        return Err(Error::Precondition("1/gamma must be an integer".into()));
    }
    let max_iter = log2(x.fractional_support() as u64).ceil() as usize + 10;
    let mut trace = Vec::new();
    let mut t = 0;
    while x.fractional_support() > 0 {
        t += 1;
        if t > max_iter {
            return Err(TransformError::NotConverged { iterations: t - 1, potentials: vec![x.fractional_support() as f64] }.into());
        }
        let before = x.covered();
        let (x2, round) = round_to_gamma(&x, &gamma, &s, &cfg.gamma_top_up, sub_seed(seed, t, 1))?;
        audit(&mut cert, t, "round-to-gamma", &x2, &before)?;

        let (x3, steps, spread) = make_well_spread(&x2, &cfg.params, q, cfg.n, cfg.waste_mode)?;
        let glue = steps.iter().filter(|s| matches!(s, TraceStep::Glue { .. })).count();
        // grouping rounds re-check dominance and glue steps their loads inside
        cert.stage(t, "well-spread", &x3, "dominance-or-glue", true);
        trace.extend(steps);

        let target = x3.covered();
        let (mut x4, halve) = halve_support(&x3, &s, sub_seed(seed, t, 2))?;
        cert.stage(t, "halve", &x4, "support-halved", 2 * halve.fractional_after <= halve.fractional_before);

        cfg.top_up.apply(&mut x4, &target, &Q::one())?;
        audit(&mut cert, t, "top-up", &x4, &target)?;
        cert.glue_steps += glue;
        cert.iterations.push(IterationRecord { iteration: t, round, spread_rounds: spread.rounds, glue_steps: glue, halve });
        x = x4;
    }
    x.merge(&fixed);
    let (packing, transformed) = finish(inst, &pre, x, &trace, &mut cert)?;
    Ok(SolveOutput { packing, certificate: cert, trace, transformed: Some(transformed), large: Some(pre.large.clone()) })
}

/// Rounds the LP solution to multiples of one (no spreading, no halving
/// plan) and packs the result: the `O(log^2 n)` baseline.
pub fn solve_lp_round(inst: &Instance, cfg: &PipelineConfig, seed: u64) -> Result<SolveOutput> {
    let mut cert = RunCertificate::new("lp-round", Some(cfg.profile), seed, inst);
    let pre = preprocess(inst, cfg.group_large)?;
    cert.discarded_size = rational::to_f64(&pre.discarded_size);
    if pre.tiny || pre.large.n_items() == 0 {
        let packing = pack_directly(inst, &mut cert)?;
        return Ok(SolveOutput { packing, certificate: cert, trace: Vec::new(), transformed: None, large: None });
    }
    cert.path = "lp-round".into();
    let (fixed, x) = solve_relaxation(&pre, &mut cert)?;
    let s = cfg.coloring();
    let before = x.covered();
    let (mut y, round) = round_to_gamma(&x, &Q::one(), &s, &cfg.gamma_top_up, sub_seed(seed, 1, 1))?;
    audit(&mut cert, 1, "round-to-gamma", &y, &before)?;
    let halve = HalveReport {
        path: ColoringPath::None,
        fractional_before: 0,
        fractional_after: 0,
        constraints: 0,
        c: None,
        entropy_sum: None,
        walk_steps: 0,
        moved_to_waste: 0,
    };
    cert.iterations.push(IterationRecord { iteration: 1, round, spread_rounds: 0, glue_steps: 0, halve });
    y.merge(&fixed);
    let (packing, transformed) = finish(inst, &pre, y, &[], &mut cert)?;
    Ok(SolveOutput { packing, certificate: cert, trace: Vec::new(), transformed: Some(transformed), large: Some(pre.large.clone()) })
}

/// LP of the large part, split into its integral part and the remainder.
fn solve_relaxation(pre: &Preprocessed, cert: &mut RunCertificate) -> Result<(FractionalSolution, FractionalSolution)> {
    let lp = solve_lp(&pre.large, &lp::default_gap(&pre.large))?;
    cert.lp_value = Some(rational::to_pair(&lp.value));
    cert.lp_lower_bound = Some(rational::to_pair(&lp.lower_bound));
    let target = pre.large.demand();
    let ok = coverage_dominates(&lp.solution.covered(), &target);
    cert.stage(0, "lp", &lp.solution, "covers-demand", ok);
    if !ok {
        return Err(Error::Audit { stage: "lp".into(), detail: "LP solution does not cover the demand".into() });
    }
    Ok(lp.solution.split_integral())
}

/// Integral regular part plus fractional waste -> audited packing of `inst`.
fn finish(inst: &Instance, pre: &Preprocessed, mut y: FractionalSolution, trace: &[TraceStep], cert: &mut RunCertificate) -> Result<(PackingResult, FractionalSolution)> {
    let cap = inst.capacity();
    let waste = y.take_waste();
    let counts = finalize_waste(&waste);
    let bought: Coverage = counts.iter().map(|(&w, &c)| (w, rational::qu(c))).collect();
    let size = |c: &Coverage| c.iter().map(|(&w, v)| rational::qu(w) * v).sum::<Q>() / rational::qu(cap);
    let ok = coverage_dominates(&bought, &waste) && size(&bought) <= size(&waste) + Q::one();
    let mut waste_view = FractionalSolution::new(cap);
    for (&w, &c) in &counts {
        waste_view.add_waste(w, rational::qu(c));
    }
    cert.stage(0, "finalize-waste", &waste_view, "integral-dominating", ok);
    if !ok {
        return Err(Error::Audit { stage: "finalize-waste".into(), detail: "waste rounding broke its contract".into() });
    }

    let (bins, opened_waste) = slots_with_waste(&y, &counts)?;
    cert.bins_transformed = bins.len();
    let transformed = bins_to_solution(&bins, cap);
    let original = resubstitute(&transformed, trace)?;
    let resub = original.regular_total();
    cert.bins_resubstituted = resub.to_integer().to_usize().unwrap_or(usize::MAX);
    let same = resub == transformed.regular_total();
    cert.stage(0, "resubstitute", &original, "same-bin-count", same);
    if !same {
        return Err(Error::Audit { stage: "resubstitute".into(), detail: "bin count changed".into() });
    }

    let mut bins = assign_slots(&original, &pre.kept)?;
    let opened_discarded = greedy_fill(&mut bins, &pre.discarded, cap, None)?;
    bins.retain(|b| !b.is_empty());
    let opened_small = greedy_fill(&mut bins, &pre.small, cap, Some(&pre.sigma))?;
    let waste_bins = opened_waste + opened_discarded + opened_small;
    let packing = PackingResult::new(inst, bins, waste_bins)?;
    cert.waste_bins = waste_bins;
    cert.cost = packing.cost();
    Ok((packing, transformed))
}

/// One bin per copy of each integral regular pattern, holding its slots,
/// then the bought waste singletons placed First Fit, largest first.
pub(crate) fn slots_with_waste(y: &FractionalSolution, counts: &BTreeMap<u64, u64>) -> Result<(Vec<Vec<u64>>, usize)> {
    let mut bins: Vec<Vec<u64>> = Vec::new();
    for (p, v) in y.regular() {
        let k = rational::to_u64_exact(v).ok_or_else(|| Error::Audit { stage: "finish".into(), detail: "regular part is not integral".into() })?;
        for _ in 0..k {
            bins.push(p.slots());
        }
    }
    let mut loads = loads_of(&bins);
    let opened = first_fit_into(&mut bins, &mut loads, &waste_items(counts), y.capacity());
    Ok((bins, opened))
}

/// Each bin as a pattern of weight one.
pub(crate) fn bins_to_solution(bins: &[Vec<u64>], capacity: u64) -> FractionalSolution {
    let mut out = FractionalSolution::new(capacity);
    for b in bins {
        out.add(Pattern::new(b.iter().map(|&w| (w, 1))), Q::one());
    }
    out
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig::new(Profile::Desk, 2)
    }
}
