//! Continuous-time quantum walks on graphs under decoherence.
//!
//! The walker's density matrix evolves with the graph Laplacian as
//! Hamiltonian under one of four models ([`dynamics::EvolutionModel`]):
//! noiseless, intrinsic (Milburn) dephasing, Haken–Strobl position dephasing
//! and the quantum stochastic walk. [`metrics`] turns trajectories into
//! stability quantifiers, [`fit`] fits coherence decay to a stretched
//! exponential and [`experiment`] runs seeded, reproducible sweeps.

pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod fit;
pub mod graph;
pub mod metrics;
pub mod state;

pub use dynamics::{EvolutionModel, TimeGrid, Trajectory};
pub use error::{Error, Result};
pub use fit::{FitOptions, FitResult};
pub use graph::{Graph, NodePolicy};
pub use metrics::{DqcMode, EntropyBase, MetricRecord};
pub use state::{DensityMatrix, PureState};
