use entropy_binpack::baselines::{brute_force, ffd, karmarkar_karp};
use entropy_binpack::pipeline::{solve_entropy, solve_lp_round, PipelineConfig, Profile, RunCertificate};
use entropy_binpack::{Instance, PackingResult, Result};

use crate::args::Algo;

pub struct Run {
    pub packing: PackingResult,
    pub certificate: RunCertificate,
}

/// Runs one solver. Baselines get a certificate holding only the cost.
pub fn run_algo(algo: Algo, inst: &Instance, profile: Profile, seed: u64) -> Result<Run> {
    let cfg = PipelineConfig::new(profile, inst.n_items());
    let baseline = |packing: PackingResult| {
        let mut certificate = RunCertificate::new(algo.name(), None, seed, inst);
        certificate.path = algo.name().into();
        certificate.cost = packing.cost();
        certificate.waste_bins = packing.waste_bins;
        Run { packing, certificate }
    };
    Ok(match algo {
        Algo::Entropy => {
            let out = solve_entropy(inst, &cfg, seed)?;
            Run { packing: out.packing, certificate: out.certificate }
        }
        Algo::LpRound => {
            let out = solve_lp_round(inst, &cfg, seed)?;
            Run { packing: out.packing, certificate: out.certificate }
        }
        Algo::Kk => baseline(karmarkar_karp(inst)?),
        Algo::Ffd => baseline(ffd(inst)?),
        Algo::Brute => baseline(brute_force(inst)?),
    })
}
