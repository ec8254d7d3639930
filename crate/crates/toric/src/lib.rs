//! Certified solving of sparse polynomial systems written as exponential sums,
//! by renormalized homotopy continuation on toric varieties.

pub mod condition;
pub mod error;
pub mod expsum;
pub mod intmat;
pub mod io;
pub mod lattice;
pub mod montecarlo;
pub mod oracle;
pub mod polytope;
pub mod solver;
pub mod tracker;

pub use error::{Error, Result};
pub use expsum::{ExpSumSystem, SupportTuple, C64};
