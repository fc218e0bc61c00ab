//! Command-line experiments over lattice codebooks: configuration files,
//! result documents and the dispatch onto the core suites.

pub mod config;
pub mod envelope;
pub mod run;
