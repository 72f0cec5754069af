//! Sampling laboratory for diffusion networks.
//!
//! Builds underlying networks (stochastic Kronecker, Forest Fire, or edge
//! lists from disk), spreads independent cascades over them to form a
//! diffusion network, samples that network with structure-based (SBS) and
//! diffusion-based (DBS) approaches using BFS or random-walk crawls, and
//! scores how well each sample preserves the seed, link-attendance and depth
//! characteristics of the diffusion.
//!
//! Averages and accuracies are generic over [`Scalar`]; the aliases below
//! fix the common choices.

pub mod characteristics;
pub mod diffusion;
pub mod error;
pub mod generators;
pub mod graph;
pub mod harness;
pub mod sampling;
pub mod scalar;

pub use characteristics::{
    accuracy, average_measure, depth_measure, evaluate, link_attendance_measure, seed_measure,
    AttendanceIndex, Characteristic, CharacteristicResult, SeedLabeling,
};
pub use diffusion::{
    build_diffusion_network, coverage, simulate_cascade, Cascade, DiffusionConfig,
    DiffusionNetwork,
};
pub use error::{Error, Result};
pub use generators::{forest_fire_generate, kronecker_generate, ForestFireParams, KroneckerParams, Preset};
pub use graph::{densification_exponent, load_edge_list, write_edge_list, Edge, Graph, GraphStats, NodeId};
pub use sampling::{
    bfs_explore, rw_explore, sample_dbs, sample_sbs, Approach, SampleSpec, SampledNetwork,
    Technique,
};
pub use scalar::Scalar;

/// Random number generator used for every stochastic step.
pub type SimRng = rand_chacha::ChaCha8Rng;

/// Exact rational scalar.
pub type Exact = num_rational::Ratio<i64>;

pub type CharacteristicResultF64 = CharacteristicResult<f64>;
pub type CharacteristicResultF32 = CharacteristicResult<f32>;
pub type CharacteristicResultExact = CharacteristicResult<Exact>;
pub type GraphStatsF64 = GraphStats<f64>;
