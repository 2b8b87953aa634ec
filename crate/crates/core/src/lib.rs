//! Constrained concept refinement: projected gradient refinement of concept
//! dictionaries under per-column ball constraints, with the sparse generative
//! model it is analysed under, IP-OMP selection, an adversarial lower-bound
//! construction, and a hard-thresholded concept-bottleneck classifier.

pub mod classifier;
pub mod cli;
pub mod error;
pub mod estimator;
pub mod generative;
pub mod io;
pub mod linalg;
pub mod optimizer;
pub mod plot;
pub mod rng;
pub mod selection;
pub mod synthetic;

pub use error::{Error, Result};
pub use linalg::{Dictionary, Matrix, Vector};
pub use rng::Seed;
pub use selection::SupportSet;
