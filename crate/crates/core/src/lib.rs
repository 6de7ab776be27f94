//! Averaging (gossip) dynamics on the discrete torus: simulation, exact
//! second-moment kernels, renewal equations, continuum limits and the dual
//! binomial splitting process.

pub mod bounds;
pub mod continuum;
pub mod diff_kernel;
pub mod error;
pub mod experiments;
pub mod heat;
pub mod markov;
pub mod mc;
pub mod sampled;
pub mod sim;
pub mod splitting;
pub mod torus;

pub use error::{Error, Result};
pub use torus::{MassProfile, TorusSpec, VertexIndex};
