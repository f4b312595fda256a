//! Monte-Carlo experiment harness for the `pwclra` estimator family:
//! scenario files, deterministic seeded sweeps, CSV emission, and the
//! overhead/complexity calculators exposed on the command line.

pub mod error;
pub mod output;
pub mod presets;
pub mod runner;
pub mod scenario;

pub use error::{CliError, CliResult};
