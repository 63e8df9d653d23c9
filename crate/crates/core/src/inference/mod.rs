//! Posterior marginals of hidden nodes given continuous evidence.

mod exact;
mod gibbs;

use thiserror::Error;

pub use exact::{exact_posterior, restricted_generator};
pub use gibbs::{gibbs_posterior, GibbsConfig};

use crate::model::{CtbnModel, ModelError, NodeSpec};
use crate::trajectory::{frame_midpoints, Evidence, TrajectoryError, VariableTrack};
use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InferenceError {
    #[error("hidden joint state space of {states} exceeds the exact-inference cap of {cap}")]
    StateSpaceTooLarge { states: usize, cap: usize },
    #[error("evidence does not cover the horizon: {0}")]
    EvidenceGap(String),
    #[error("evidence has zero likelihood under the model{0}")]
    ZeroLikelihoodEvidence(String),
    #[error("evidence names unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("invalid evidence: {0}")]
    InvalidEvidence(String),
    #[error("invalid query times: {0}")]
    InvalidQuery(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("node `{0}` carries no product-state codec")]
    NoCodec(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
}

/// Non-fatal diagnostics attached to a posterior.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InferenceWarning {
    /// A hidden node has a context with an absorbing state; the sampler may not mix.
    NonErgodic { node: String },
    /// Trajectory resampling of a node found no feasible path and kept the old one.
    StuckResample { node: String, count: usize },
}

/// Marginal distributions of every node at a set of query times.
///
/// Observed nodes appear as point masses on their evidence values.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorTrack<T> {
    pub query_times: Vec<T>,
    pub nodes: Vec<NodeSpec>,
    pub observed: Vec<bool>,
    /// `marginals[node][time][state]`
    pub marginals: Vec<Vec<Vec<T>>>,
    /// Hidden-joint posterior `[time][hidden joint index]`, exact inference only.
    pub hidden_joint: Option<Vec<Vec<T>>>,
    /// `ln p(evidence | its value at time 0)`, exact inference only.
    pub log_evidence: Option<T>,
    pub warnings: Vec<InferenceWarning>,
}

impl<T: Scalar> PosteriorTrack<T> {
    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.name() == name)
    }

    /// Marginal of `node` at every query time.
    pub fn node_marginals(&self, name: &str) -> Option<&[Vec<T>]> {
        self.node_index(name).map(|i| self.marginals[i].as_slice())
    }

    pub fn hidden_nodes(&self) -> impl Iterator<Item = &NodeSpec> {
        self.nodes.iter().zip(&self.observed).filter(|(_, o)| !**o).map(|(n, _)| n)
    }
}

/// Probability that binary component `component` of a product-coded node is on,
/// at every query time. Component 0 is the most significant bit.
pub fn marginalize<T: Scalar>(track: &PosteriorTrack<T>, node: &str, component: usize) -> Result<Vec<T>, InferenceError> {
    let idx = track.node_index(node).ok_or_else(|| InferenceError::UnknownVariable(node.to_string()))?;
    let spec = &track.nodes[idx];
    let comps = spec.components().ok_or_else(|| InferenceError::NoCodec(node.to_string()))?;
    if component >= comps.len() {
        return Err(ModelError::OutOfRange { index: component, bound: comps.len() }.into());
    }
    let bit = comps.len() - 1 - component;
    Ok(track.marginals[idx]
        .iter()
        .map(|dist| dist.iter().enumerate().filter(|(s, _)| (s >> bit) & 1 == 1).map(|(_, &p)| p).sum())
        .collect())
}

/// Threshold rule: 1 where `p ≥ threshold`, ties to positive.
///
/// A threshold of 1 or more never fires, so `1.0` yields an all-zero track.
pub fn map_decision<T: Scalar>(probs: &[T], threshold: T) -> Vec<u8> {
    if threshold >= T::one() {
        return vec![0; probs.len()];
    }
    probs.iter().map(|&p| u8::from(p >= threshold)).collect()
}

/// Evidence change points plus the midpoint of every frame, sorted and de-duplicated.
pub fn default_query_times<T: Scalar>(evidence: &Evidence<T>, frame_rate: T) -> Result<Vec<T>, InferenceError> {
    let mut times = vec![T::zero()];
    times.extend(evidence.change_times());
    times.extend(frame_midpoints(evidence.horizon(), frame_rate)?);
    times.retain(|t| *t < evidence.horizon());
    times.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    times.dedup();
    Ok(times)
}

/// Evidence matched against the model's nodes.
pub(crate) struct BoundEvidence<'a, T> {
    pub horizon: T,
    pub observed: Vec<bool>,
    pub hidden: Vec<usize>,
    pub tracks: Vec<Option<&'a VariableTrack<T>>>,
}

impl<'a, T: Scalar> BoundEvidence<'a, T> {
    pub fn bind(model: &CtbnModel<T>, evidence: &'a Evidence<T>, query_times: &[T]) -> Result<Self, InferenceError> {
        let structure = model.structure();
        let horizon = evidence.horizon();
        if !(horizon > T::zero()) {
            return Err(InferenceError::EvidenceGap("evidence horizon is empty".into()));
        }
        let mut tracks = vec![None; structure.len()];
        for track in evidence.tracks() {
            let i = structure
                .node_index(track.name())
                .ok_or_else(|| InferenceError::UnknownVariable(track.name().to_string()))?;
            if let Some(s) = track.segments().iter().find(|s| s.state >= structure.cardinality(i)) {
                return Err(InferenceError::InvalidEvidence(format!(
                    "`{}` takes state {} but has {} states",
                    track.name(),
                    s.state,
                    structure.cardinality(i)
                )));
            }
            tracks[i] = Some(track);
        }
        for w in query_times.windows(2) {
            if !(w[0] <= w[1]) {
                return Err(InferenceError::InvalidQuery("query times must be non-decreasing".into()));
            }
        }
        if let Some(t) = query_times.iter().find(|t| !(**t >= T::zero() && **t < horizon)) {
            return Err(InferenceError::InvalidQuery(format!("{t} lies outside [0, {horizon})")));
        }
        let observed: Vec<bool> = tracks.iter().map(Option::is_some).collect();
        let hidden = (0..structure.len()).filter(|&i| !observed[i]).collect();
        Ok(Self { horizon, observed, hidden, tracks })
    }

    /// Point-mass marginals of observed nodes at the query times.
    pub fn observed_marginals(&self, node: usize, cardinality: usize, query_times: &[T]) -> Vec<Vec<T>> {
        let track = self.tracks[node].expect("observed node");
        query_times
            .iter()
            .map(|&t| {
                let mut d = vec![T::zero(); cardinality];
                d[track.state_at(t).expect("non-empty evidence")] = T::one();
                d
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn au_track(dist: Vec<f64>) -> PosteriorTrack<f64> {
        let comps: Vec<String> = ["AU18", "AU20", "AU22", "AU24", "AU25", "AU26", "AU27"].iter().map(|s| s.to_string()).collect();
        let node = NodeSpec::with_cardinality("AU", 128).unwrap().with_components(comps).unwrap();
        PosteriorTrack {
            query_times: vec![0.0],
            nodes: vec![node, NodeSpec::with_cardinality("Phone", 3).unwrap()],
            observed: vec![false, true],
            marginals: vec![vec![dist], vec![vec![1.0, 0.0, 0.0]]],
            hidden_joint: None,
            log_evidence: None,
            warnings: vec![],
        }
    }

    #[test]
    fn uniform_product_gives_half() {
        let t = au_track(vec![1.0 / 128.0; 128]);
        for c in 0..7 {
            assert!((marginalize(&t, "AU", c).unwrap()[0] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn point_mass_on_ten_is_au24_and_au26() {
        let mut d = vec![0.0; 128];
        d[10] = 1.0;
        let t = au_track(d);
        let got: Vec<f64> = (0..7).map(|c| marginalize(&t, "AU", c).unwrap()[0]).collect();
        assert_eq!(got, vec![0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        let mut d0 = vec![0.0; 128];
        d0[0] = 1.0;
        let t0 = au_track(d0);
        assert!((0..7).all(|c| marginalize(&t0, "AU", c).unwrap()[0] == 0.0));
    }

    #[test]
    fn marginalize_needs_codec() {
        let t = au_track(vec![1.0 / 128.0; 128]);
        assert!(matches!(marginalize(&t, "Phone", 0), Err(InferenceError::NoCodec(_))));
    }

    #[test]
    fn decision_rule() {
        assert_eq!(map_decision(&[0.5, 0.49, 1.0], 0.5), vec![1, 0, 1]);
        assert_eq!(map_decision(&[0.0, 0.0], 0.5), vec![0, 0]);
        assert_eq!(map_decision(&[1.0, 0.7], 1.0), vec![0, 0]);
    }
}
