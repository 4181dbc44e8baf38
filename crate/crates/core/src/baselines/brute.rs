use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::packing::PackingResult;

/// Largest number of physical items [`brute_force`] accepts.
pub const BRUTE_FORCE_LIMIT: usize = 12;

struct Search<'a> {
    items: &'a [u64],
    capacity: u64,
    lower: usize,
    best: Vec<Vec<u64>>,
    bins: Vec<Vec<u64>>,
    loads: Vec<u64>,
}

impl Search<'_> {
    fn go(&mut self, k: usize) {
        if self.best.len() <= self.lower {
            return;
        }
        if k == self.items.len() {
            if self.bins.len() < self.best.len() {
                self.best = self.bins.clone();
            }
            return;
        }
        let w = self.items[k];
        for b in 0..self.bins.len() {
            // bins with equal load are interchangeable
            if self.loads[b] + w > self.capacity || self.loads[..b].contains(&self.loads[b]) {
                continue;
            }
            self.loads[b] += w;
            self.bins[b].push(w);
            self.go(k + 1);
            self.bins[b].pop();
            self.loads[b] -= w;
        }
        if self.bins.len() + 1 < self.best.len() {
            self.bins.push(vec![w]);
            self.loads.push(w);
            self.go(k + 1);
            self.bins.pop();
            self.loads.pop();
        }
    }
}

/// Optimal packing by exhaustive search over set partitions, for instances
/// with at most [`BRUTE_FORCE_LIMIT`] items.
pub fn brute_force(inst: &Instance) -> Result<PackingResult> {
    let items = inst.item_weights()?;
    if items.len() > BRUTE_FORCE_LIMIT {
        return Err(Error::Precondition(format!("brute force takes at most {BRUTE_FORCE_LIMIT} items, got {}", items.len())));
    }
    let cap = inst.capacity();
    let total: u64 = items.iter().sum();
    let mut s = Search {
        items: &items,
        capacity: cap,
        lower: total.div_ceil(cap) as usize,
        best: items.iter().map(|&w| vec![w]).collect(),
        bins: Vec::new(),
        loads: Vec::new(),
    };
    s.go(0);
    PackingResult::new(inst, s.best, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        let opt = |ws: &[u64], c| brute_force(&Instance::from_weights(ws, c).unwrap()).unwrap().cost();
        assert_eq!(opt(&[5, 5], 10), 1);
        assert_eq!(opt(&[6, 6, 6], 10), 3);
        assert_eq!(opt(&[50, 40, 40, 30, 20, 20], 100), 2);
    }

    #[test]
    fn rejects_large_instances() {
        let inst = Instance::from_weights(&[1; 13], 10).unwrap();
        assert!(brute_force(&inst).is_err());
    }
}
