//! Pentagram (KCBS) contextuality toolkit.
//!
//! The library models five spin-1 measurement directions arranged so that
//! cyclically adjacent directions are orthogonal (a pentagram of contexts),
//! enumerates every noncontextual 0/1 value assignment over the five
//! directions, and compares classical hidden-variable mixtures against
//! quantum predictions for single qutrits and for a maximally entangled
//! qutrit pair. A seeded Monte Carlo driver simulates the two-particle
//! experiment and checks the tallies against the analytic targets.
//!
//! Modules build on each other in order: [`geometry`] fixes the directions,
//! [`charts`] enumerates the classical assignments, [`lhv`] handles mixtures,
//! bounds, and measurement bias, [`quantum`] computes Born probabilities, and
//! [`experiment`] runs and evaluates simulations.

pub mod charts;
pub mod experiment;
pub mod geometry;
pub mod lhv;
pub mod quantum;

pub use charts::{enumerate_charts, Chart, ChartClass, CHART_COUNT};
pub use experiment::{ExperimentStats, ModelSpec, PairingScheme, Predictions};
pub use geometry::{build_pentagram, EdgeKind, PentagramFrame, UnitVector3, Vector3, VertexId};
pub use lhv::{BiasSpec, MixtureWeights, PentagonEdge};
pub use quantum::{make_entangled_state, EntangledState, QutritState};

/// Tolerance used for exact algebraic identities (orthogonality, norms,
/// closed-form probabilities). Statistical checks use standard errors instead.
pub const DEFAULT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("vector norm {0} is not 1 within tolerance")]
    NotUnit(f64),
    #[error("vector has a non-finite component")]
    NonFinite,
    #[error("cross product of near-parallel vectors is numerically degenerate")]
    DegenerateCross,
    #[error("vertex label {0} is outside 1..=5")]
    VertexOutOfRange(u8),
    #[error("chart value {0} is not 0 or 1")]
    ChartValueOutOfRange(u8),
    #[error("chart assigns 1 to both ends of the orthogonal pair ({0},{1})")]
    AdjacentOnes(u8, u8),
    #[error("chart index {index} is outside 0..{}", CHART_COUNT)]
    ChartIndexOutOfRange { index: usize },
    #[error("mixture weight {value} at index {index} is negative")]
    NegativeWeight { index: usize, value: f64 },
    #[error("mixture weights sum to {0}, expected 1")]
    WeightSumNotOne(f64),
    #[error("group probability {0} leaves a negative remainder for the other charts")]
    BiasOutOfRange(f64),
    #[error("basis is not orthonormal, largest Gram residual {0}")]
    NonOrthonormalBasis(f64),
    #[error("trial count must be positive")]
    ZeroTrials,
    #[error("no trials landed in the {0} subsample")]
    EmptySubsample(String),
    #[error("tolerance {0} must be positive and finite")]
    BadTolerance(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
