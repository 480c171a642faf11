//! Bottom clauses, forced simulation and exact identification of
//! determinate function-free clauses from equivalence queries.

pub mod bottom;
pub mod embed;
pub mod error;
pub mod fixtures;
pub mod forcesim;
pub mod ingest;
pub mod learner;
pub mod lp;
pub mod protocol;
pub mod teacher;

pub use error::{Error, Result};
