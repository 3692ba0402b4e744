//! Simulation of renewal processes conditioned on hitting exactly `n` events in a
//! fixed horizon `[0, T]`, together with the machinery needed to study them at
//! scale: fluid and diffusion scalings of the counting paths, Brownian-bridge
//! limit objects, the Skorokhod reflection map and the transitory-queue workload
//! it produces, and a seeded Monte Carlo engine that turns each limit statement
//! into a reproducible pass/fail experiment.
//!
//! Everything is deterministic given a [`RandomStream`]: identical `(seed,
//! stream_index)` pairs reproduce identical draws bit for bit, and distinct
//! stream indices give statistically independent streams, so replications can
//! run in any order (or in parallel) without changing a single output byte.

pub mod distributions;
pub mod experiments;
pub mod gaussian;
pub mod path;
pub mod quadrature;
pub mod reflection;
pub mod report;
pub mod samplers;
pub mod scaling;
pub mod special;
pub mod stats;
pub mod stream;

pub use distributions::{Functional, InterarrivalModel, PiecewiseConstantRate, TimeHorizon};
pub use experiments::{ExperimentConfig, ExperimentId, ExperimentReport};
pub use gaussian::{GaussianKind, GaussianPathSpec};
pub use path::{GridPath, StepPath};
pub use reflection::{HeavyTrafficSpec, Reflect, ServiceModel};
pub use samplers::{ConditionedPoissonSample, ConditionedRow};
pub use stream::RandomStream;

/// Library-wide error type.
#[derive(Debug, Clone, PartialEq)]
pub enum SimError {
    /// An argument lies outside the domain of the requested evaluation.
    Domain(String),
    /// The model parameters do not define a usable distribution for this call.
    InvalidModel(String),
    /// The rejection sampler exhausted its attempt budget without an accept.
    AcceptanceTooLow { attempts: u64, estimate: f64 },
    /// Too few observations to run the requested statistic.
    InsufficientData(String),
    /// Array lengths do not line up.
    Shape(String),
    /// Non-finite or otherwise unusable data fed to a statistic.
    Data(String),
    /// An experiment configuration violates its invariants.
    Config(String),
}

impl std::fmt::Display for SimError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SimError::Domain(msg) => write!(f, "domain error: {msg}"),
            SimError::InvalidModel(msg) => write!(f, "invalid model: {msg}"),
            SimError::AcceptanceTooLow { attempts, estimate } => write!(
                f,
                "rejection sampler made {attempts} attempts without an accept \
                 (empirical acceptance estimate {estimate:.3e}); raise max_attempts \
                 or pick model parameters with E[A(T)] closer to n"
            ),
            SimError::InsufficientData(msg) => write!(f, "insufficient data: {msg}"),
            SimError::Shape(msg) => write!(f, "shape error: {msg}"),
            SimError::Data(msg) => write!(f, "data error: {msg}"),
            SimError::Config(msg) => write!(f, "config error: {msg}"),
        }
    }
}

impl std::error::Error for SimError {}

pub type Result<T> = std::result::Result<T, SimError>;
