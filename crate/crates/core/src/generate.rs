//! Seeded random instance families.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::InstanceError;
use crate::instance::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// Weights uniform in `[10, 100]` over capacity 200, sizes in `[0.05, 0.5]`.
    Uniform,
    /// Falkenauer-style triplets: every consecutive three items fill a bin exactly.
    Triplet,
    /// Sizes strictly between 1/4 and 1/2.
    ThreePartition,
    /// Sizes `2^-l (1 - j/16)` for random classes `l` and offsets `j`.
    PowerClasses,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Uniform, Family::Triplet, Family::ThreePartition, Family::PowerClasses];

    pub fn name(self) -> &'static str {
        match self {
            Family::Uniform => "uniform",
            Family::Triplet => "triplet",
            Family::ThreePartition => "three-partition",
            Family::PowerClasses => "power-classes",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown family {s:?}; expected one of uniform, triplet, three-partition, power-classes"))
    }
}

/// Raw benchmark record: capacity and weights in generation order.
pub fn weights(family: Family, n: usize, seed: u64) -> Result<(u64, Vec<u64>), InstanceError> {
    if n == 0 {
        return Err(InstanceError::Empty);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(match family {
        Family::Uniform => (200, (0..n).map(|_| rng.gen_range(10..=100)).collect()),
        Family::Triplet => {
            if n % 3 != 0 {
                return Err(InstanceError::Parse(format!("triplet instances need n divisible by 3, got {n}")));
            }
            let cap = 1000;
            let mut out = Vec::with_capacity(n);
            for _ in 0..n / 3 {
                let first = rng.gen_range(380..=490);
                let second = rng.gen_range(250..=(cap - first) / 2);
                out.extend([first, second, cap - first - second]);
            }
            (cap, out)
        }
        Family::ThreePartition => (1000, (0..n).map(|_| rng.gen_range(251..=499)).collect()),
        Family::PowerClasses => {
            let top = 6u32;
            let cap = 16u64 << top;
            let out = (0..n)
                .map(|_| {
                    let l = rng.gen_range(1..=top);
                    let j = rng.gen_range(0..8u64);
                    (16 - j) << (top - l)
                })
                .collect();
            (cap, out)
        }
    })
}

pub fn generate(family: Family, n: usize, seed: u64) -> Result<Instance, InstanceError> {
    let (cap, w) = weights(family, n, seed)?;
    Instance::from_weights(&w, cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, Q};

    #[test]
    fn three_partition_range() {
        let inst = generate(Family::ThreePartition, 30, 1).unwrap();
        assert_eq!(inst.n_items(), 30);
        assert!(inst.sizes().iter().all(|s| s > &q(1, 4) && s < &q(1, 2)));
    }

    #[test]
    fn empty_rejected() {
        assert!(generate(Family::Uniform, 0, 1).is_err());
    }

    #[test]
    fn triplets_fill_bins() {
        let (cap, w) = weights(Family::Triplet, 9, 4).unwrap();
        for t in w.chunks(3) {
            assert_eq!(t.iter().sum::<u64>(), cap);
        }
        let total: Q = generate(Family::Triplet, 9, 4).unwrap().total_size();
        assert_eq!(total, q(3, 1));
    }

    #[test]
    fn deterministic() {
        assert_eq!(weights(Family::PowerClasses, 50, 9).unwrap(), weights(Family::PowerClasses, 50, 9).unwrap());
        assert_ne!(weights(Family::Uniform, 50, 1).unwrap(), weights(Family::Uniform, 50, 2).unwrap());
    }
}
