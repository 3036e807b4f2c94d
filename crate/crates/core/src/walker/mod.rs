//! Continuous-time walks on `E_0^k` and path utilities.

mod modulus;
mod path;
mod rng;
mod sim;
mod start;
mod stats;

pub use modulus::{modulus_w_rho, w_rho_exceeds};
pub use path::{time_reverse, Absorption, Path};
pub use rng::RngStream;
pub use sim::{map_reduce, resurrect_inw, simulate, simulate_killed, simulate_reflected, step, WalkMode, CHUNK};
pub use start::StartDistribution;
pub use stats::{occupation_and_marginals, Marginal, OccupationAccumulator, OccupationStats};
