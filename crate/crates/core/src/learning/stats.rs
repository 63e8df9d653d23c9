use rayon::prelude::*;

use crate::learning::LearnError;
use crate::model::CtbnStructure;
use crate::trajectory::Trajectory;
use crate::Scalar;

/// Dwell times and transition counts of one node, per parent instantiation.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeStats<T> {
    cardinality: usize,
    dwell: Vec<Vec<T>>,
    counts: Vec<Vec<u64>>,
}

impl<T: Scalar> NodeStats<T> {
    pub fn zeros(cardinality: usize, instantiations: usize) -> Self {
        Self {
            cardinality,
            dwell: vec![vec![T::zero(); cardinality]; instantiations],
            counts: vec![vec![0; cardinality * cardinality]; instantiations],
        }
    }

    /// Build from explicit tables; `counts[v]` is row-major `M × M`.
    pub fn from_parts(cardinality: usize, dwell: Vec<Vec<T>>, counts: Vec<Vec<u64>>) -> Result<Self, LearnError> {
        let ok = dwell.len() == counts.len()
            && dwell.iter().all(|d| d.len() == cardinality && d.iter().all(|x| *x >= T::zero()))
            && counts.iter().all(|c| c.len() == cardinality * cardinality);
        if !ok {
            return Err(LearnError::ShapeMismatch("inconsistent node statistics tables".into()));
        }
        Ok(Self { cardinality, dwell, counts })
    }

    pub fn cardinality(&self) -> usize {
        self.cardinality
    }

    pub fn n_instantiations(&self) -> usize {
        self.dwell.len()
    }

    /// `T[x_i | v]`
    pub fn dwell(&self, v: usize, i: usize) -> T {
        self.dwell[v][i]
    }

    /// `N[x_i, x_j | v]`
    pub fn count(&self, v: usize, i: usize, j: usize) -> u64 {
        self.counts[v][i * self.cardinality + j]
    }

    /// `N[x_i | v]`
    pub fn exits(&self, v: usize, i: usize) -> u64 {
        let row = &self.counts[v][i * self.cardinality..(i + 1) * self.cardinality];
        row.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, c)| c).sum()
    }

    pub fn dwell_table(&self) -> &[Vec<T>] {
        &self.dwell
    }

    pub fn count_table(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn total_dwell(&self) -> T {
        self.dwell.iter().flatten().copied().sum()
    }

    fn merge(&mut self, other: &Self) {
        for (a, b) in self.dwell.iter_mut().zip(&other.dwell) {
            for (x, y) in a.iter_mut().zip(b) {
                *x = *x + *y;
            }
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += *y;
            }
        }
    }
}

/// Sufficient statistics of every node.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientStats<T> {
    nodes: Vec<NodeStats<T>>,
}

impl<T: Scalar> SufficientStats<T> {
    pub fn zeros(structure: &CtbnStructure) -> Self {
        Self {
            nodes: (0..structure.len())
                .map(|i| NodeStats::zeros(structure.cardinality(i), structure.n_parent_instantiations(i)))
                .collect(),
        }
    }

    pub fn from_nodes(nodes: Vec<NodeStats<T>>) -> Self {
        Self { nodes }
    }

    pub fn nodes(&self) -> &[NodeStats<T>] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &NodeStats<T> {
        &self.nodes[i]
    }

    /// Element-wise sum; both sides must come from the same structure.
    pub fn merge(&mut self, other: &Self) {
        assert_eq!(self.nodes.len(), other.nodes.len(), "merging statistics of different structures");
        for (a, b) in self.nodes.iter_mut().zip(&other.nodes) {
            a.merge(b);
        }
    }

    pub(crate) fn check_shape(&self, structure: &CtbnStructure) -> Result<(), LearnError> {
        let ok = self.nodes.len() == structure.len()
            && self.nodes.iter().enumerate().all(|(i, n)| {
                n.cardinality == structure.cardinality(i) && n.n_instantiations() == structure.n_parent_instantiations(i)
            });
        if ok {
            Ok(())
        } else {
            Err(LearnError::ShapeMismatch("node count, cardinality or parent instantiations differ".into()))
        }
    }
}

/// Accumulate statistics over complete trajectories.
///
/// Dwell time is split at every parent transition. A transition is charged to
/// the parent instantiation in force just before its instant, so simultaneous
/// parent and child changes in data use the left limit. Per-trajectory work runs
/// in parallel; the merge is sequential in input order so the result does not
/// depend on the thread count.
pub fn collect_stats<T: Scalar>(structure: &CtbnStructure, data: &[Trajectory<T>]) -> Result<SufficientStats<T>, LearnError> {
    let parts: Vec<Result<SufficientStats<T>, LearnError>> =
        data.par_iter().enumerate().map(|(k, t)| trajectory_stats(structure, k, t)).collect();
    let mut total = SufficientStats::zeros(structure);
    for part in parts {
        total.merge(&part?);
    }
    Ok(total)
}

fn trajectory_stats<T: Scalar>(structure: &CtbnStructure, k: usize, traj: &Trajectory<T>) -> Result<SufficientStats<T>, LearnError> {
    let n = structure.len();
    let mut stats = SufficientStats::zeros(structure);
    if traj.horizon() == T::zero() {
        return Ok(stats);
    }
    let malformed = |reason: String| LearnError::MalformedTrajectory { trajectory: k, reason };
    let mut tracks = Vec::with_capacity(n);
    for node in structure.nodes() {
        let t = traj
            .track(node.name())
            .ok_or_else(|| LearnError::IncompleteData { trajectory: k, variable: node.name().to_string() })?;
        if let Some(s) = t.segments().iter().find(|s| s.state >= node.cardinality()) {
            return Err(malformed(format!("`{}` has state {} of {}", node.name(), s.state, node.cardinality())));
        }
        tracks.push(t);
    }
    // (time, node, destination)
    let mut events: Vec<(T, usize, usize)> = tracks
        .iter()
        .enumerate()
        .flat_map(|(i, t)| t.transitions().map(move |(time, _, to)| (time, i, to)))
        .collect();
    events.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite").then(a.1.cmp(&b.1)));

    let mut states: Vec<usize> = tracks.iter().map(|t| t.segments()[0].state).collect();
    let mut insts: Vec<usize> = (0..n).map(|i| structure.parent_instantiation(i, &states)).collect();
    let mut now = T::zero();
    let mut e = 0;
    while e < events.len() {
        let t = events[e].0;
        let dt = t - now;
        for i in 0..n {
            let d = &mut stats.nodes[i].dwell[insts[i]][states[i]];
            *d = *d + dt;
        }
        let group_end = events[e..].iter().position(|ev| ev.0 != t).map_or(events.len(), |p| e + p);
        for &(_, node, to) in &events[e..group_end] {
            let m = structure.cardinality(node);
            stats.nodes[node].counts[insts[node]][states[node] * m + to] += 1;
        }
        for &(_, node, to) in &events[e..group_end] {
            states[node] = to;
        }
        for (i, inst) in insts.iter_mut().enumerate() {
            *inst = structure.parent_instantiation(i, &states);
        }
        now = t;
        e = group_end;
    }
    let dt = traj.horizon() - now;
    for i in 0..n {
        let d = &mut stats.nodes[i].dwell[insts[i]][states[i]];
        *d = *d + dt;
    }
    Ok(stats)
}
