use std::collections::BTreeMap;

use rand::Rng;

use crate::model::{CtbnStructure, ModelError};
use crate::Scalar;

/// Distribution over the joint state at time zero.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialDistribution<T> {
    /// Independent per-node marginals.
    Factored(Vec<Vec<T>>),
    /// Explicit joint categorical with sparse support, keyed by per-node states.
    Joint(BTreeMap<Vec<usize>, T>),
}

impl<T: Scalar> InitialDistribution<T> {
    pub fn uniform(structure: &CtbnStructure) -> Self {
        InitialDistribution::Factored(
            structure
                .nodes()
                .iter()
                .map(|n| vec![T::one() / T::of(n.cardinality() as f64); n.cardinality()])
                .collect(),
        )
    }

    pub fn validate(&self, structure: &CtbnStructure) -> Result<(), ModelError> {
        let tol = T::row_tolerance();
        let bad = |msg: String| Err(ModelError::InitialDistribution(msg));
        match self {
            InitialDistribution::Factored(marginals) => {
                if marginals.len() != structure.len() {
                    return bad(format!("{} marginals for {} nodes", marginals.len(), structure.len()));
                }
                for (i, m) in marginals.iter().enumerate() {
                    if m.len() != structure.cardinality(i) {
                        return bad(format!("marginal {i} has {} entries", m.len()));
                    }
                    if m.iter().any(|p| !(*p >= T::zero()) || !p.is_finite()) {
                        return bad(format!("marginal {i} has a negative or non-finite entry"));
                    }
                    let s: T = m.iter().copied().sum();
                    if (s - T::one()).abs() > tol {
                        return bad(format!("marginal {i} sums to {s}"));
                    }
                }
            }
            InitialDistribution::Joint(support) => {
                for (states, p) in support {
                    if states.len() != structure.len()
                        || states.iter().enumerate().any(|(i, &s)| s >= structure.cardinality(i))
                    {
                        return bad(format!("support state {states:?} is out of range"));
                    }
                    if !(*p >= T::zero()) || !p.is_finite() {
                        return bad(format!("probability of {states:?} is invalid"));
                    }
                }
                let s: T = support.values().copied().sum();
                if (s - T::one()).abs() > tol {
                    return bad(format!("joint distribution sums to {s}"));
                }
            }
        }
        Ok(())
    }

    /// Probability of a full joint state.
    pub fn prob(&self, states: &[usize]) -> T {
        match self {
            InitialDistribution::Factored(m) => {
                states.iter().zip(m).map(|(&s, p)| p.get(s).copied().unwrap_or(T::zero())).fold(T::one(), |a, b| a * b)
            }
            InitialDistribution::Joint(support) => support.get(states).copied().unwrap_or(T::zero()),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        match self {
            InitialDistribution::Factored(m) => m.iter().map(|p| sample_categorical(p.iter().copied(), rng)).collect(),
            InitialDistribution::Joint(support) => {
                let k = sample_categorical(support.values().copied(), rng);
                support.keys().nth(k).cloned().unwrap_or_default()
            }
        }
    }
}

/// Draw an index from unnormalised non-negative weights.
pub(crate) fn sample_categorical<T: Scalar, R: Rng + ?Sized>(
    weights: impl Iterator<Item = T> + Clone,
    rng: &mut R,
) -> usize {
    let total: T = weights.clone().sum();
    let u = T::of(rng.random::<f64>()) * total;
    let mut acc = T::zero();
    let mut last = 0;
    for (i, w) in weights.enumerate() {
        if w > T::zero() {
            last = i;
            acc = acc + w;
            if u < acc {
                return i;
            }
        }
    }
    last
}
