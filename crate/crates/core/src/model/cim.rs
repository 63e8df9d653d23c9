use crate::model::ModelError;
use crate::Scalar;

/// Rate matrix governing one node's jumps under a single parent instantiation.
///
/// Entries are in 1/seconds. Off-diagonals are non-negative and the diagonal
/// is always stored as the exact negated off-diagonal row sum, so downstream
/// code may rely on perfect row closure.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalIntensityMatrix<T> {
    size: usize,
    entries: Vec<T>,
}

impl<T: Scalar> ConditionalIntensityMatrix<T> {
    /// Validate a square matrix given as rows.
    pub fn new(rows: &[Vec<T>]) -> Result<Self, ModelError> {
        let size = rows.len();
        if rows.iter().any(|r| r.len() != size) {
            return Err(ModelError::NonSquare {
                rows: size,
                cols: rows.iter().map(Vec::len).max().unwrap_or(0),
            });
        }
        let flat: Vec<T> = rows.iter().flatten().copied().collect();
        Self::from_row_major(size, flat)
    }

    /// Validate a row-major `size × size` buffer.
    pub fn from_row_major(size: usize, entries: Vec<T>) -> Result<Self, ModelError> {
        if entries.len() != size * size {
            return Err(ModelError::NonSquare {
                rows: size,
                cols: if size == 0 { 0 } else { entries.len() / size },
            });
        }
        if let Some(pos) = entries.iter().position(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite {
                row: pos / size.max(1),
                col: pos % size.max(1),
            });
        }
        let mut entries = entries;
        for i in 0..size {
            let row = &mut entries[i * size..(i + 1) * size];
            let mut off = T::zero();
            for (j, &v) in row.iter().enumerate() {
                if j == i {
                    continue;
                }
                if v < T::zero() {
                    return Err(ModelError::NegativeOffDiagonal { row: i, col: j, value: v.to_f64_lossy() });
                }
                off = off + v;
            }
            let diag = row[i];
            let scale = T::one().max(diag.abs());
            if (diag + off).abs() > T::row_tolerance() * scale {
                return Err(ModelError::RowSumViolation {
                    row: i,
                    sum: (diag + off).to_f64_lossy(),
                });
            }
            row[i] = -off;
        }
        Ok(Self { size, entries })
    }

    /// Build from off-diagonal rates only; the diagonal argument entries are ignored
    /// and recomputed.
    pub fn from_off_diagonal(rows: &[Vec<T>]) -> Result<Self, ModelError> {
        let mut fixed: Vec<Vec<T>> = rows.to_vec();
        for (i, row) in fixed.iter_mut().enumerate() {
            if i < row.len() {
                row[i] = T::zero();
                let off: T = row.iter().copied().sum();
                row[i] = -off;
            }
        }
        Self::new(&fixed)
    }

    /// All-zero matrix: every state absorbing.
    pub fn zeros(size: usize) -> Self {
        Self { size, entries: vec![T::zero(); size * size] }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn rate(&self, from: usize, to: usize) -> T {
        self.entries[from * self.size + to]
    }

    pub fn row(&self, state: usize) -> &[T] {
        &self.entries[state * self.size..(state + 1) * self.size]
    }

    pub fn as_row_major(&self) -> &[T] {
        &self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.entries.chunks(self.size.max(1)).map(<[T]>::to_vec).take(self.size).collect()
    }

    /// Total departure rate `q_i` (the negated diagonal).
    #[inline]
    pub fn exit_rate(&self, state: usize) -> T {
        -self.entries[state * self.size + state]
    }

    pub fn max_exit_rate(&self) -> T {
        (0..self.size).map(|i| self.exit_rate(i)).fold(T::zero(), T::max)
    }

    pub fn is_absorbing(&self, state: usize) -> bool {
        self.exit_rate(state) == T::zero()
    }

    /// Density of the sojourn time in `state`: `q e^{-q t}`; identically zero
    /// for absorbing states.
    pub fn sojourn_density(&self, state: usize, t: T) -> Result<T, ModelError> {
        self.check_state(state)?;
        if !(t >= T::zero()) {
            return Err(ModelError::NegativeTime(t.to_f64_lossy()));
        }
        let q = self.exit_rate(state);
        if q == T::zero() {
            return Ok(T::zero());
        }
        Ok(q * (-q * t).exp())
    }

    /// Mean time before leaving `state`; infinite when absorbing.
    pub fn expected_sojourn(&self, state: usize) -> Result<T, ModelError> {
        self.check_state(state)?;
        let q = self.exit_rate(state);
        if q == T::zero() {
            Ok(T::infinity())
        } else {
            Ok(T::one() / q)
        }
    }

    /// Categorical distribution of the destination of the next jump out of `state`.
    pub fn transition_distribution(&self, state: usize) -> Result<Vec<T>, ModelError> {
        self.check_state(state)?;
        let q = self.exit_rate(state);
        if q == T::zero() {
            return Err(ModelError::AbsorbingState(state));
        }
        Ok((0..self.size)
            .map(|j| if j == state { T::zero() } else { self.rate(state, j) / q })
            .collect())
    }

    fn check_state(&self, state: usize) -> Result<(), ModelError> {
        if state < self.size {
            Ok(())
        } else {
            Err(ModelError::OutOfRange { index: state, bound: self.size })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type Cim = ConditionalIntensityMatrix<f64>;

    #[test]
    fn accepts_minimal_binary() {
        let c = Cim::new(&[vec![-1.0, 1.0], vec![2.0, -2.0]]).unwrap();
        assert_eq!(c.exit_rate(0), 1.0);
        assert_eq!(c.exit_rate(1), 2.0);
    }

    #[test]
    fn accepts_all_zero() {
        let c = Cim::new(&[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert!(c.is_absorbing(0) && c.is_absorbing(1));
    }

    #[test]
    fn rejects_bad_row_sum() {
        let e = Cim::new(&[vec![-1.0, 0.5], vec![1.0, -1.0]]).unwrap_err();
        assert!(matches!(e, ModelError::RowSumViolation { row: 0, .. }));
    }

    #[test]
    fn rejects_negative_off_diagonal() {
        let e = Cim::new(&[vec![1.0, -1.0], vec![1.0, -1.0]]).unwrap_err();
        assert!(matches!(e, ModelError::NegativeOffDiagonal { row: 0, col: 1, .. }));
    }

    #[test]
    fn rejects_non_square() {
        let e = Cim::new(&[vec![-1.0, 1.0, 0.0], vec![1.0, -1.0, 0.0]]).unwrap_err();
        assert!(matches!(e, ModelError::NonSquare { .. }));
    }

    #[test]
    fn diagonal_is_recomputed_within_tolerance() {
        let c = Cim::new(&[vec![-1.0 - 1e-12, 1.0], vec![0.3, -0.3]]).unwrap();
        assert_eq!(c.rate(0, 0), -1.0);
    }

    #[test]
    fn sojourn_density_at_zero_is_rate() {
        let c = Cim::new(&[vec![-1.0, 1.0], vec![2.0, -2.0]]).unwrap();
        assert_eq!(c.sojourn_density(0, 0.0).unwrap(), 1.0);
        assert_eq!(Cim::zeros(2).sojourn_density(1, 3.0).unwrap(), 0.0);
        assert!(c.sojourn_density(0, -1.0).is_err());
    }

    #[test]
    fn sojourn_density_integrates_to_one() {
        // composite Simpson on [0, 40] with q = 2; the tail beyond is e^-80
        let c = Cim::new(&[vec![-2.0, 2.0], vec![1.0, -1.0]]).unwrap();
        let (a, b, n) = (0.0_f64, 40.0_f64, 200_000usize);
        let h = (b - a) / n as f64;
        let mut acc = 0.0;
        for k in 0..=n {
            let w = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * c.sojourn_density(0, a + k as f64 * h).unwrap();
        }
        assert!((acc * h / 3.0 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn expected_sojourn_and_absorbing() {
        let c = Cim::from_off_diagonal(&[vec![0.0, 40.47], vec![0.0, 0.0]]).unwrap();
        assert_eq!(c.expected_sojourn(0).unwrap(), 1.0 / 40.47);
        assert!(c.expected_sojourn(1).unwrap().is_infinite());
        assert!(matches!(c.transition_distribution(1), Err(ModelError::AbsorbingState(1))));
    }

    #[test]
    fn competing_destinations_split_by_rate() {
        // 128 AU states; state 10 leaves at 16.72 in total
        let mut rows = vec![vec![0.0; 128]; 128];
        rows[10][2] = 6.59;
        rows[10][6] = 9.12;
        rows[10][8] = 1.01;
        let c = Cim::from_off_diagonal(&rows).unwrap();
        assert_eq!(c.expected_sojourn(10).unwrap(), 1.0 / 16.72);
        let theta = c.transition_distribution(10).unwrap();
        assert_eq!((theta[6], theta[2]), (9.12 / 16.72, 6.59 / 16.72));
    }

    #[test]
    fn single_destination() {
        let c = Cim::new(&[vec![-3.0, 3.0], vec![1.0, -1.0]]).unwrap();
        assert_eq!(c.transition_distribution(0).unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn works_in_single_precision() {
        let c = ConditionalIntensityMatrix::<f32>::new(&[vec![-0.1, 0.1], vec![0.7, -0.7]]).unwrap();
        let p = c.transition_distribution(1).unwrap();
        assert_eq!(p, vec![1.0f32, 0.0]);
    }
}
