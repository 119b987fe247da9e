//! Library side of the `dirac-jost` command: the seeded profile generator,
//! the invariant suite and the subcommand implementations.

pub mod app;
pub mod randgen;
pub mod suite;
