//! Sufficient statistics and maximum-likelihood fitting from complete trajectories.

mod stats;

use std::collections::BTreeMap;

use thiserror::Error;

pub use stats::{collect_stats, NodeStats, SufficientStats};

use crate::model::{ConditionalIntensityMatrix, CtbnModel, CtbnStructure, InitialDistribution, ModelError};
use crate::trajectory::Trajectory;
use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LearnError {
    #[error("trajectory {trajectory} has no track for variable `{variable}`")]
    IncompleteData { trajectory: usize, variable: String },
    #[error("trajectory {trajectory} is malformed: {reason}")]
    MalformedTrajectory { trajectory: usize, reason: String },
    #[error("no training trajectories")]
    EmptyData,
    #[error("statistics do not match the structure: {0}")]
    ShapeMismatch(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Smoothing added to every (state, parent instantiation) context.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pseudocounts<T> {
    /// Imaginary dwell time in seconds.
    pub dwell: T,
    /// Imaginary transition count, spread evenly over destinations.
    pub count: T,
}

impl<T: Scalar> Pseudocounts<T> {
    pub fn none() -> Self {
        Self { dwell: T::zero(), count: T::zero() }
    }
}

impl<T: Scalar> Default for Pseudocounts<T> {
    fn default() -> Self {
        Self { dwell: T::of(0.01), count: T::of(0.01) }
    }
}

/// A context that was never visited in the training data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroDwell {
    pub node: usize,
    pub instantiation: usize,
    pub state: usize,
    /// No pseudo dwell was available, so the state was fitted as absorbing.
    pub absorbing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MleFit<T> {
    pub cims: Vec<Vec<ConditionalIntensityMatrix<T>>>,
    pub warnings: Vec<ZeroDwell>,
}

/// Fit every CIM from sufficient statistics.
///
/// `q̂_i = (N_i + a) / (T_i + τ)` and `q̂_ij = q̂_i (N_ij + a/(M−1)) / (N_i + a)`;
/// with zero pseudocounts this is the plain `N/T` and `N_ij/N_i` estimate.
pub fn mle<T: Scalar>(stats: &SufficientStats<T>, pseudo: Pseudocounts<T>) -> MleFit<T> {
    let mut warnings = Vec::new();
    let cims = stats
        .nodes()
        .iter()
        .enumerate()
        .map(|(node, ns)| {
            let m = ns.cardinality();
            (0..ns.n_instantiations())
                .map(|v| {
                    let mut rows = vec![vec![T::zero(); m]; m];
                    for (i, row) in rows.iter_mut().enumerate() {
                        let dwell = ns.dwell(v, i);
                        let exits = T::of(ns.exits(v, i) as f64);
                        if dwell == T::zero() {
                            warnings.push(ZeroDwell { node, instantiation: v, state: i, absorbing: pseudo.dwell == T::zero() });
                        }
                        let denom_t = dwell + pseudo.dwell;
                        let denom_n = exits + pseudo.count;
                        if m < 2 || denom_t == T::zero() || denom_n == T::zero() {
                            continue;
                        }
                        let q = denom_n / denom_t;
                        let spread = pseudo.count / T::of((m - 1) as f64);
                        for (j, r) in row.iter_mut().enumerate() {
                            if j != i {
                                *r = q * (T::of(ns.count(v, i, j) as f64) + spread) / denom_n;
                            }
                        }
                    }
                    ConditionalIntensityMatrix::from_off_diagonal(&rows).expect("fitted rates are non-negative and finite")
                })
                .collect()
        })
        .collect();
    MleFit { cims, warnings }
}

/// Complete-data log-likelihood of the CIM parameters.
///
/// `Σ N_i ln q_i − q_i T_i + Σ N_ij ln θ_ij`; `-inf` when an observed
/// transition has zero rate.
pub fn log_likelihood<T: Scalar>(model: &CtbnModel<T>, data: &[Trajectory<T>]) -> Result<T, LearnError> {
    let stats = collect_stats(model.structure(), data)?;
    log_likelihood_from_stats(model, &stats)
}

pub fn log_likelihood_from_stats<T: Scalar>(model: &CtbnModel<T>, stats: &SufficientStats<T>) -> Result<T, LearnError> {
    stats.check_shape(model.structure())?;
    let mut ll = T::zero();
    for (node, ns) in stats.nodes().iter().enumerate() {
        let m = ns.cardinality();
        for v in 0..ns.n_instantiations() {
            let cim = model.cim(node, v);
            for i in 0..m {
                let q = cim.exit_rate(i);
                let exits = ns.exits(v, i);
                ll = ll - q * ns.dwell(v, i);
                if exits == 0 {
                    continue;
                }
                if q == T::zero() {
                    return Ok(T::neg_infinity());
                }
                ll = ll + T::of(exits as f64) * q.ln();
                for j in 0..m {
                    let n_ij = ns.count(v, i, j);
                    if j == i || n_ij == 0 {
                        continue;
                    }
                    let theta = cim.rate(i, j) / q;
                    if theta == T::zero() {
                        return Ok(T::neg_infinity());
                    }
                    ll = ll + T::of(n_ij as f64) * theta.ln();
                }
            }
        }
    }
    Ok(ll)
}

/// Empirical distribution of time-zero joint states, add-one smoothed over
/// the states that were observed at time zero.
pub fn learn_initial_distribution<T: Scalar>(
    structure: &CtbnStructure,
    data: &[Trajectory<T>],
) -> Result<InitialDistribution<T>, LearnError> {
    if data.is_empty() {
        return Err(LearnError::EmptyData);
    }
    let mut counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for (k, traj) in data.iter().enumerate() {
        let mut state = Vec::with_capacity(structure.len());
        for node in structure.nodes() {
            let track = traj
                .track(node.name())
                .ok_or_else(|| LearnError::IncompleteData { trajectory: k, variable: node.name().to_string() })?;
            let s = track.initial_state().ok_or_else(|| LearnError::MalformedTrajectory {
                trajectory: k,
                reason: "empty horizon".into(),
            })?;
            state.push(s);
        }
        *counts.entry(state).or_default() += 1;
    }
    let denom = T::of((data.len() + counts.len()) as f64);
    let dist = counts.into_iter().map(|(s, c)| (s, T::of((c + 1) as f64) / denom)).collect();
    let initial = InitialDistribution::Joint(dist);
    initial.validate(structure)?;
    Ok(initial)
}

/// Statistics, CIM fit and initial distribution in one step.
pub fn fit_model<T: Scalar>(
    structure: &CtbnStructure,
    data: &[Trajectory<T>],
    pseudo: Pseudocounts<T>,
) -> Result<(CtbnModel<T>, Vec<ZeroDwell>), LearnError> {
    if data.is_empty() {
        return Err(LearnError::EmptyData);
    }
    let stats = collect_stats(structure, data)?;
    let fit = mle(&stats, pseudo);
    let initial = learn_initial_distribution(structure, data)?;
    let model = CtbnModel::new(structure.clone(), fit.cims, initial)?;
    Ok((model, fit.warnings))
}
