//! Generic chaining toolkit: γ-functionals over admissible sequences,
//! ψ_α Orlicz norms, explicit moment/tail conversions, supremum tail
//! bounds for several process classes, and simulators that check those
//! bounds on small instances.

pub mod error;
pub mod linalg;
pub mod metric;
pub mod orlicz;
pub mod procsim;
pub mod ripkit;
pub mod stats;
pub mod tailcalc;

pub use error::{Error, Result};
