//! Pollard rho for discrete logarithms, and the spectral and mixing
//! properties of the directed graph it walks on.
//!
//! * [`modular`]: arithmetic in `Z/nZ` and deterministic primality.
//! * [`rho_walk`]: the rho iteration, collision detection and dlog recovery.
//! * [`spectral`]: the rho graph's adjacency operator and its norm on the
//!   complement of the constants.
//! * [`qform`]: the doubling quadratic form and its weight certificate.
//! * [`mixing`]: exact path counts, total-variation mixing times and the
//!   spaced-sample collision experiment.
//! * [`suite`]: the acceptance battery shared by the test suite and the CLI.

pub mod error;
pub mod mixing;
pub mod modular;
pub mod qform;
pub mod report;
pub mod rho_walk;
pub mod seeding;
pub mod spectral;
pub mod stats;
pub mod suite;

pub use error::{Error, Result};
pub use modular::{Modulus, Residue};
