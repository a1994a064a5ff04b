//! Separation chains: small compilation chains that satisfy one criterion
//! but not a stronger one, with scripted demos that exhibit both halves.

pub mod demo;
pub mod fuel;
pub mod introspect;
pub mod khs;
pub mod rtep;
pub mod tini;

pub use demo::{run_demo, DemoCheck, DemoError, DemoOptions, DemoReport, DEMOS};
pub use khs::{falsifying_set, solve_khs_system, KhsSolution, Missing};
