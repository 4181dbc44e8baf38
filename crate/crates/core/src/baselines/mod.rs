//! Reference solvers: First Fit, First Fit Decreasing, Karmarkar-Karp style
//! iterative LP rounding, and exhaustive search for tiny instances.

mod brute;
mod kk;

pub use brute::{brute_force, BRUTE_FORCE_LIMIT};
pub use kk::karmarkar_karp;

use crate::error::Result;
use crate::instance::Instance;
use crate::packing::{first_fit_into, PackingResult};

/// First Fit over `items` in the given order.
pub fn first_fit(items: &[u64], capacity: u64) -> Result<PackingResult> {
    let inst = Instance::from_weights(items, capacity)?;
    let mut bins = Vec::new();
    let mut loads = Vec::new();
    let opened = first_fit_into(&mut bins, &mut loads, items, capacity);
    PackingResult::new(&inst, bins, opened)
}

/// First Fit with items sorted largest first.
pub fn ffd(inst: &Instance) -> Result<PackingResult> {
    let items = inst.item_weights()?;
    let mut bins = Vec::new();
    let mut loads = Vec::new();
    let opened = first_fit_into(&mut bins, &mut loads, &items, inst.capacity());
    PackingResult::new(inst, bins, opened)
}
