//! Continuous-time Bayesian networks.
//!
//! Nodes are finite-state Markov jump processes whose rates depend on the
//! current states of their parents. The crate covers model construction and
//! amalgamation, forward sampling, maximum-likelihood learning from complete
//! trajectories, and posterior inference from continuous evidence (exact on
//! small joint spaces, auxiliary Gibbs sampling otherwise).
//!
//! All numerics are generic over [`Scalar`]; the aliases below fix `f64`
//! (and `f32` where single precision is useful).

pub mod inference;
pub mod io;
pub mod learning;
pub mod linalg;
pub mod model;
mod scalar;
pub mod trajectory;

pub use scalar::Scalar;

pub type Cim = model::ConditionalIntensityMatrix<f64>;
pub type Cim32 = model::ConditionalIntensityMatrix<f32>;
pub type Model = model::CtbnModel<f64>;
pub type Model32 = model::CtbnModel<f32>;
pub type JointMatrix = model::JointIntensityMatrix<f64>;
pub type Initial = model::InitialDistribution<f64>;
pub type Traj = trajectory::Trajectory<f64>;
pub type Evidence = trajectory::Evidence<f64>;
pub type Stats = learning::SufficientStats<f64>;
pub type Track = inference::PosteriorTrack<f64>;
