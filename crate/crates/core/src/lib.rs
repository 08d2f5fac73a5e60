//! Random geometric graphs on the unit torus.
//!
//! The crate samples point sets on `[0,1)²` with wraparound, builds the
//! graph joining points at torus distance at most `r`, classifies its
//! components, computes the connectivity and isolation hitting radii, and
//! runs seeded Monte Carlo campaigns that check the behaviour of these
//! quantities near the connectivity threshold `r = sqrt(log n / (π n))`.
//!
//! Module map:
//!
//! * [`geometry`]: torus metric, circular projections, cell grid, disk-union area.
//! * [`rgg`]: sampling, graph construction, component labelling.
//! * [`census`]: embeddable / solitary classification and component counters.
//! * [`analytic`]: closed-form expectations, area bounds, the `I(β)` integral.
//! * [`process`]: hitting radii `r_i`, `r_c` and the close-isolated-pair count.
//! * [`harness`]: seeded parallel campaigns, estimators and sweeps.
//! * [`verify`]: the desk-scale acceptance criteria, shared by tests and the CLI.

pub mod analytic;
pub mod census;
pub mod dsu;
pub mod geometry;
pub mod harness;
pub mod oracle;
pub mod output;
pub mod process;
pub mod quad;
pub mod rgg;
pub mod stats;
pub mod verify;

mod error;

pub use error::{Error, Result};
pub use geometry::{PointSet, TorusPoint};
pub use rgg::RandomSeed;
