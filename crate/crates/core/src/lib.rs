//! Quasi-Bayesian spike-and-slab variable selection for high-dimensional
//! linear regression with endogenous regressors and instrumental variables.

pub mod error;
pub mod harness;
pub mod io;
pub mod model;
pub mod rng;
pub mod sampler;
pub mod simgen;

pub use error::{Error, Result};
pub use model::{DesignData, EigenDiagnostics, HyperParams, InstrumentMap, SparsityPattern};
pub use sampler::{run_chain, ChainConfig, ChainResult, Sampler, SamplerState};
pub use harness::{ball_fractions, run_replications, AggregateReport, HyperPolicy, LambdaScale, Metrics};
pub use simgen::{GroundTruth, Setup, SimScenario};
