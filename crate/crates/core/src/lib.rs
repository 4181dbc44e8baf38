//! Bin packing via LP rounding: Gilmore-Gomory column generation, grouping
//! and gluing transforms, constructive partial coloring, and the baselines
//! it is measured against.

pub mod baselines;
pub mod coloring;
pub mod error;
pub mod generate;
pub mod instance;
pub mod lp;
pub mod packing;
pub mod pattern;
pub mod pipeline;
pub mod rational;
pub mod transform;

pub use error::{Error, Result};
pub use instance::Instance;
pub use packing::PackingResult;
pub use pattern::{FractionalSolution, Pattern};
pub use rational::Q;
