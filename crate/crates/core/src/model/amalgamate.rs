use crate::linalg::{expm_dense, DenseMatrix, SparseGenerator};
use crate::model::{CtbnModel, ModelError, StateCodec};
use crate::Scalar;

/// Default bound on the number of joint states `amalgamate` will build.
pub const DEFAULT_JOINT_CAP: usize = 1 << 20;

/// Largest joint matrix that may be materialised densely.
pub const DENSE_CAP: usize = 4096;

/// Rate matrix of the whole network over the product state space.
#[derive(Debug, Clone, PartialEq)]
pub struct JointIntensityMatrix<T> {
    codec: StateCodec,
    generator: SparseGenerator<T>,
}

impl<T: Scalar> JointIntensityMatrix<T> {
    pub fn codec(&self) -> &StateCodec {
        &self.codec
    }

    pub fn generator(&self) -> &SparseGenerator<T> {
        &self.generator
    }

    pub fn n_states(&self) -> usize {
        self.codec.size()
    }

    pub fn rate(&self, from: usize, to: usize) -> T {
        self.generator.get(from, to)
    }

    pub fn to_dense(&self) -> Result<DenseMatrix<T>, ModelError> {
        if self.n_states() > DENSE_CAP {
            return Err(ModelError::StateSpaceTooLarge { states: self.n_states(), cap: DENSE_CAP });
        }
        Ok(self.generator.to_dense())
    }

    /// `exp(Q t)`, dense; only available under [`DENSE_CAP`].
    pub fn transition_matrix(&self, t: T) -> Result<DenseMatrix<T>, ModelError> {
        Ok(expm_dense(&self.to_dense()?.scale(t)))
    }
}

pub fn amalgamate<T: Scalar>(model: &CtbnModel<T>) -> Result<JointIntensityMatrix<T>, ModelError> {
    amalgamate_with_cap(model, DEFAULT_JOINT_CAP)
}

/// Flatten all CIMs into one joint rate matrix.
///
/// Only single-variable changes get a rate; the diagonal closes each row.
pub fn amalgamate_with_cap<T: Scalar>(model: &CtbnModel<T>, cap: usize) -> Result<JointIntensityMatrix<T>, ModelError> {
    let structure = model.structure();
    let size = structure
        .joint_size()
        .ok_or(ModelError::StateSpaceTooLarge { states: usize::MAX, cap })?;
    if size > cap {
        return Err(ModelError::StateSpaceTooLarge { states: size, cap });
    }
    let codec = structure.joint_codec()?;
    let mut states = vec![0; structure.len()];
    let mut rows = Vec::with_capacity(size);
    for s in 0..size {
        codec.decode_into(s, &mut states)?;
        let mut row = Vec::new();
        for node in 0..structure.len() {
            let cim = model.active_cim(node, &states);
            let from = states[node];
            for (to, &rate) in cim.row(from).iter().enumerate() {
                if to != from && rate > T::zero() {
                    row.push((codec.with_digit(s, node, to), rate));
                }
            }
        }
        rows.push(row);
    }
    Ok(JointIntensityMatrix { codec, generator: SparseGenerator::closed_from_rows(rows) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ConditionalIntensityMatrix, CtbnStructure, NodeSpec};

    type Cim = ConditionalIntensityMatrix<f64>;

    fn binary(name: &str) -> NodeSpec {
        NodeSpec::with_cardinality(name, 2).unwrap()
    }

    #[test]
    fn single_node_is_its_cim() {
        let c = Cim::new(&[vec![-1.0, 0.4, 0.6], vec![2.0, -2.0, 0.0], vec![0.0, 0.0, 0.0]]).unwrap();
        let s = CtbnStructure::new(vec![NodeSpec::with_cardinality("A", 3).unwrap()], vec![vec![]]).unwrap();
        let m = CtbnModel::with_uniform_initial(s, vec![vec![c.clone()]]).unwrap();
        let j = amalgamate(&m).unwrap();
        let d = j.to_dense().unwrap();
        for i in 0..3 {
            assert_eq!(d.row(i), c.row(i));
        }
    }

    #[test]
    fn rejects_oversized_space() {
        let s = CtbnStructure::new(vec![binary("A"), binary("B"), binary("C")], vec![vec![], vec![], vec![]]).unwrap();
        let z = vec![Cim::zeros(2)];
        let m = CtbnModel::with_uniform_initial(s, vec![z.clone(), z.clone(), z]).unwrap();
        assert!(matches!(amalgamate_with_cap(&m, 4), Err(ModelError::StateSpaceTooLarge { states: 8, cap: 4 })));
    }

    #[test]
    fn coupled_pair_reads_parent_from_joint_state() {
        // B's rates depend on A
        let s = CtbnStructure::new(vec![binary("A"), binary("B")], vec![vec![], vec![0]]).unwrap();
        let a = Cim::new(&[vec![-1.0, 1.0], vec![2.0, -2.0]]).unwrap();
        let b0 = Cim::new(&[vec![-3.0, 3.0], vec![4.0, -4.0]]).unwrap();
        let b1 = Cim::new(&[vec![-5.0, 5.0], vec![6.0, -6.0]]).unwrap();
        let m = CtbnModel::with_uniform_initial(s, vec![vec![a], vec![b0, b1]]).unwrap();
        let j = amalgamate(&m).unwrap();
        // joint index = 2*A + B
        assert_eq!(j.rate(0, 1), 3.0);
        assert_eq!(j.rate(2, 3), 5.0);
        assert_eq!(j.rate(3, 2), 6.0);
        assert_eq!(j.rate(0, 2), 1.0);
        assert_eq!(j.rate(0, 3), 0.0);
        // (A=0, B=1): B leaves at 4, A leaves at 1
        assert_eq!(j.rate(1, 1), -5.0);
    }
}
