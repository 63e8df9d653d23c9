//! Network structure, conditional intensity matrices and their amalgamation.

mod amalgamate;
mod cim;
mod codec;
mod initial;

use std::collections::HashSet;

use thiserror::Error;

pub use amalgamate::{amalgamate, amalgamate_with_cap, JointIntensityMatrix, DEFAULT_JOINT_CAP, DENSE_CAP};
pub use cim::ConditionalIntensityMatrix;
pub use codec::StateCodec;
pub use initial::InitialDistribution;
pub(crate) use initial::sample_categorical;

use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("matrix is not square ({rows} rows, {cols} columns)")]
    NonSquare { rows: usize, cols: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("negative off-diagonal rate {value} at ({row}, {col})")]
    NegativeOffDiagonal { row: usize, col: usize, value: f64 },
    #[error("row {row} sums to {sum}, not 0")]
    RowSumViolation { row: usize, sum: f64 },
    #[error("negative time {0}")]
    NegativeTime(f64),
    #[error("index {index} out of range (bound {bound})")]
    OutOfRange { index: usize, bound: usize },
    #[error("state {0} is absorbing")]
    AbsorbingState(usize),
    #[error("joint state space of {states} exceeds the cap of {cap}")]
    StateSpaceTooLarge { states: usize, cap: usize },
    #[error("invalid structure: {0}")]
    InvalidStructure(String),
    #[error("invalid CIM table: {0}")]
    InvalidCimTable(String),
    #[error("invalid initial distribution: {0}")]
    InitialDistribution(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
}

/// One discrete variable of the network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSpec {
    name: String,
    states: Vec<String>,
    /// Names of binary components when the node's states are a product code
    /// (state bits, first component most significant).
    components: Option<Vec<String>>,
}

impl NodeSpec {
    pub fn new(name: impl Into<String>, states: Vec<String>) -> Result<Self, ModelError> {
        let name = name.into();
        if name.is_empty() {
            return Err(ModelError::InvalidStructure("empty node name".into()));
        }
        if states.is_empty() {
            return Err(ModelError::InvalidStructure(format!("node `{name}` has no states")));
        }
        let mut seen = HashSet::new();
        for s in &states {
            if !seen.insert(s.as_str()) {
                return Err(ModelError::InvalidStructure(format!("node `{name}` repeats state label `{s}`")));
            }
        }
        Ok(Self { name, states, components: None })
    }

    /// Node whose labels are `0..cardinality`.
    pub fn with_cardinality(name: impl Into<String>, cardinality: usize) -> Result<Self, ModelError> {
        Self::new(name, (0..cardinality).map(|i| i.to_string()).collect())
    }

    /// Attach a binary product code; the cardinality must be `2^components`.
    pub fn with_components(mut self, components: Vec<String>) -> Result<Self, ModelError> {
        if components.len() >= usize::BITS as usize || 1usize << components.len() != self.states.len() {
            return Err(ModelError::InvalidStructure(format!(
                "node `{}` has {} states, which is not 2^{}",
                self.name,
                self.states.len(),
                components.len()
            )));
        }
        self.components = Some(components);
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn cardinality(&self) -> usize {
        self.states.len()
    }

    pub fn state_labels(&self) -> &[String] {
        &self.states
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }

    pub fn components(&self) -> Option<&[String]> {
        self.components.as_deref()
    }
}

/// Nodes plus parent sets. Cycles are allowed; self-parenting is not.
///
/// Parent lists are kept sorted by node index, and parent instantiations are
/// mixed-radix over that list with the lowest-index parent most significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CtbnStructure {
    nodes: Vec<NodeSpec>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    parent_codecs: Vec<StateCodec>,
}

impl CtbnStructure {
    pub fn new(nodes: Vec<NodeSpec>, parents: Vec<Vec<usize>>) -> Result<Self, ModelError> {
        if nodes.len() != parents.len() {
            return Err(ModelError::InvalidStructure(format!(
                "{} nodes but {} parent lists",
                nodes.len(),
                parents.len()
            )));
        }
        let mut names = HashSet::new();
        for n in &nodes {
            if !names.insert(n.name()) {
                return Err(ModelError::InvalidStructure(format!("duplicate node name `{}`", n.name())));
            }
        }
        let mut sorted = Vec::with_capacity(parents.len());
        for (i, ps) in parents.into_iter().enumerate() {
            let mut ps = ps;
            ps.sort_unstable();
            for w in ps.windows(2) {
                if w[0] == w[1] {
                    return Err(ModelError::InvalidStructure(format!("node {i} lists parent {} twice", w[0])));
                }
            }
            for &p in &ps {
                if p == i {
                    return Err(ModelError::InvalidStructure(format!("node `{}` is its own parent", nodes[i].name())));
                }
                if p >= nodes.len() {
                    return Err(ModelError::OutOfRange { index: p, bound: nodes.len() });
                }
            }
            sorted.push(ps);
        }
        let mut children = vec![Vec::new(); nodes.len()];
        for (i, ps) in sorted.iter().enumerate() {
            for &p in ps {
                children[p].push(i);
            }
        }
        let parent_codecs = sorted
            .iter()
            .map(|ps| StateCodec::new(ps.iter().map(|&p| nodes[p].cardinality()).collect()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { nodes, parents: sorted, children, parent_codecs })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[NodeSpec] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &NodeSpec {
        &self.nodes[i]
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.name() == name)
    }

    pub fn cardinality(&self, i: usize) -> usize {
        self.nodes[i].cardinality()
    }

    pub fn parents(&self, i: usize) -> &[usize] {
        &self.parents[i]
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    pub fn n_parent_instantiations(&self, i: usize) -> usize {
        self.parent_codecs[i].size()
    }

    pub fn parent_codec(&self, i: usize) -> &StateCodec {
        &self.parent_codecs[i]
    }

    /// Index of node `i`'s parent instantiation within a full per-node state vector.
    #[inline]
    pub fn parent_instantiation(&self, i: usize, states: &[usize]) -> usize {
        let codec = &self.parent_codecs[i];
        self.parents[i].iter().enumerate().map(|(pos, &p)| states[p] * codec.stride(pos)).sum()
    }

    /// Codec over all nodes in index order.
    pub fn joint_codec(&self) -> Result<StateCodec, ModelError> {
        StateCodec::new(self.nodes.iter().map(NodeSpec::cardinality).collect())
    }

    /// Product of cardinalities, `None` on overflow.
    pub fn joint_size(&self) -> Option<usize> {
        self.nodes.iter().try_fold(1usize, |acc, n| acc.checked_mul(n.cardinality()))
    }
}

/// A fully parameterised network.
#[derive(Debug, Clone, PartialEq)]
pub struct CtbnModel<T> {
    structure: CtbnStructure,
    cims: Vec<Vec<ConditionalIntensityMatrix<T>>>,
    initial: InitialDistribution<T>,
}

impl<T: Scalar> CtbnModel<T> {
    pub fn new(
        structure: CtbnStructure,
        cims: Vec<Vec<ConditionalIntensityMatrix<T>>>,
        initial: InitialDistribution<T>,
    ) -> Result<Self, ModelError> {
        if cims.len() != structure.len() {
            return Err(ModelError::InvalidCimTable(format!("{} tables for {} nodes", cims.len(), structure.len())));
        }
        for (i, table) in cims.iter().enumerate() {
            let want = structure.n_parent_instantiations(i);
            if table.len() != want {
                return Err(ModelError::InvalidCimTable(format!(
                    "node `{}` has {} CIMs, expected one per parent instantiation ({want})",
                    structure.node(i).name(),
                    table.len()
                )));
            }
            if let Some(bad) = table.iter().position(|c| c.size() != structure.cardinality(i)) {
                return Err(ModelError::InvalidCimTable(format!(
                    "CIM {bad} of node `{}` is {}x{}, expected {}",
                    structure.node(i).name(),
                    table[bad].size(),
                    table[bad].size(),
                    structure.cardinality(i)
                )));
            }
        }
        initial.validate(&structure)?;
        Ok(Self { structure, cims, initial })
    }

    /// Model with a uniform factored initial distribution.
    pub fn with_uniform_initial(
        structure: CtbnStructure,
        cims: Vec<Vec<ConditionalIntensityMatrix<T>>>,
    ) -> Result<Self, ModelError> {
        let initial = InitialDistribution::uniform(&structure);
        Self::new(structure, cims, initial)
    }

    pub fn structure(&self) -> &CtbnStructure {
        &self.structure
    }

    pub fn cims(&self, node: usize) -> &[ConditionalIntensityMatrix<T>] {
        &self.cims[node]
    }

    pub fn cim(&self, node: usize, instantiation: usize) -> &ConditionalIntensityMatrix<T> {
        &self.cims[node][instantiation]
    }

    /// CIM of `node` under the parent values read out of a full state vector.
    #[inline]
    pub fn active_cim(&self, node: usize, states: &[usize]) -> &ConditionalIntensityMatrix<T> {
        &self.cims[node][self.structure.parent_instantiation(node, states)]
    }

    pub fn initial(&self) -> &InitialDistribution<T> {
        &self.initial
    }

    pub fn with_initial(mut self, initial: InitialDistribution<T>) -> Result<Self, ModelError> {
        initial.validate(&self.structure)?;
        self.initial = initial;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.structure.len()
    }

    pub fn is_empty(&self) -> bool {
        self.structure.is_empty()
    }

    /// Largest exit rate over every CIM of `node`.
    pub fn max_exit_rate(&self, node: usize) -> T {
        self.cims[node].iter().map(ConditionalIntensityMatrix::max_exit_rate).fold(T::zero(), T::max)
    }
}
