//! Rewriting fractional solutions: grouping, gluing, the well-spread loop,
//! and the trace that lets glued items be resubstituted at the end.

mod glue;
mod group;
mod spread;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::Serialize;

use crate::error::TransformError;
use crate::pattern::Pattern;
use crate::rational::{self, Q};

pub use glue::{glue, resubstitute};
pub use group::{group, GroupReport};
pub(crate) use group::repair_dominance;
pub use spread::{make_well_spread, predicate_holds, SpreadReport};

/// How grouping pays for the items it moves down.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WasteMode {
    /// `4 beta / alpha` copies of the largest grouped item per size class.
    Proof,
    /// The least waste that restores prefix dominance, placed on the
    /// smallest admissible item.
    #[default]
    Audited,
}

/// One step of the transformation sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TraceStep {
    /// The new solution dominates the previous one.
    Dominance {
        stage: String,
        #[serde(with = "rational::serde_q")]
        objective_delta: Q,
    },
    /// `width * q` copies of `item` in `pattern` (weight `r/q`) became `q`
    /// copies of `new_item = width * item`.
    Glue { pattern: Pattern, item: u64, width: u32, q: u64, r: u64, new_item: u64 },
}

impl TraceStep {
    pub fn dominance(stage: impl Into<String>, objective_delta: Q) -> Self {
        TraceStep::Dominance { stage: stage.into(), objective_delta }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpreadParams {
    #[serde(with = "rational::serde_q")]
    pub delta: Q,
    #[serde(with = "rational::serde_q")]
    pub beta: Q,
    #[serde(with = "rational::serde_q")]
    pub gamma: Q,
    /// Items below this size are small.
    #[serde(with = "rational::serde_q")]
    pub epsilon: Q,
}

impl SpreadParams {
    /// `delta = beta = gamma = 1/k` and `epsilon = gamma beta delta / 2`.
    pub fn uniform(k: u64) -> Self {
        let t = Q::new(BigInt::from(1), BigInt::from(k.max(1)));
        let epsilon = &t * &t * &t / rational::qi(2);
        SpreadParams { delta: t.clone(), beta: t.clone(), gamma: t, epsilon }
    }

    pub fn validate(&self) -> Result<(), TransformError> {
        for (name, v) in [("delta", &self.delta), ("beta", &self.beta), ("gamma", &self.gamma), ("epsilon", &self.epsilon)] {
            if !v.is_positive() || v > &Q::one() {
                return Err(TransformError::Precondition(format!("{name} must lie in (0, 1]")));
            }
        }
        let cap = &self.gamma * &self.beta * &self.delta / rational::qi(2);
        if self.epsilon > cap {
            return Err(TransformError::Precondition("epsilon exceeds gamma*beta*delta/2".into()));
        }
        Ok(())
    }
}
