use crate::model::ModelError;

/// Mixed-radix codec between per-variable states and a flat index.
///
/// The first position is the most significant digit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateCodec {
    radices: Vec<usize>,
    strides: Vec<usize>,
    size: usize,
}

impl StateCodec {
    pub fn new(radices: Vec<usize>) -> Result<Self, ModelError> {
        let mut strides = vec![0; radices.len()];
        let mut size: usize = 1;
        for (pos, &r) in radices.iter().enumerate().rev() {
            if r == 0 {
                return Err(ModelError::InvalidStructure(format!("radix at position {pos} is zero")));
            }
            strides[pos] = size;
            size = size
                .checked_mul(r)
                .ok_or(ModelError::StateSpaceTooLarge { states: usize::MAX, cap: usize::MAX })?;
        }
        Ok(Self { radices, strides, size })
    }

    /// Number of distinct flat indices.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn radices(&self) -> &[usize] {
        &self.radices
    }

    pub fn len(&self) -> usize {
        self.radices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radices.is_empty()
    }

    pub fn encode(&self, states: &[usize]) -> Result<usize, ModelError> {
        if states.len() != self.radices.len() {
            return Err(ModelError::OutOfRange { index: states.len(), bound: self.radices.len() });
        }
        let mut idx = 0;
        for ((&s, &r), &stride) in states.iter().zip(&self.radices).zip(&self.strides) {
            if s >= r {
                return Err(ModelError::OutOfRange { index: s, bound: r });
            }
            idx += s * stride;
        }
        Ok(idx)
    }

    pub fn decode(&self, index: usize) -> Result<Vec<usize>, ModelError> {
        let mut out = vec![0; self.radices.len()];
        self.decode_into(index, &mut out)?;
        Ok(out)
    }

    pub fn decode_into(&self, index: usize, out: &mut [usize]) -> Result<(), ModelError> {
        if index >= self.size {
            return Err(ModelError::OutOfRange { index, bound: self.size });
        }
        for ((o, &r), &stride) in out.iter_mut().zip(&self.radices).zip(&self.strides) {
            *o = (index / stride) % r;
        }
        Ok(())
    }

    #[inline]
    pub fn digit(&self, index: usize, pos: usize) -> usize {
        (index / self.strides[pos]) % self.radices[pos]
    }

    /// `index` with the digit at `pos` replaced by `value`.
    #[inline]
    pub fn with_digit(&self, index: usize, pos: usize, value: usize) -> usize {
        let old = self.digit(index, pos);
        index - old * self.strides[pos] + value * self.strides[pos]
    }

    #[inline]
    pub fn stride(&self, pos: usize) -> usize {
        self.strides[pos]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_state_is_zero() {
        let c = StateCodec::new(vec![3, 2, 4]).unwrap();
        assert_eq!(c.encode(&[0, 0, 0]).unwrap(), 0);
        assert_eq!(c.size(), 24);
    }

    #[test]
    fn single_node_is_identity() {
        let c = StateCodec::new(vec![5]).unwrap();
        for s in 0..5 {
            assert_eq!(c.encode(&[s]).unwrap(), s);
        }
    }

    #[test]
    fn exhaustive_round_trip() {
        let c = StateCodec::new(vec![3, 2, 4]).unwrap();
        let mut seen = vec![false; c.size()];
        for a in 0..3 {
            for b in 0..2 {
                for d in 0..4 {
                    let idx = c.encode(&[a, b, d]).unwrap();
                    assert!(!seen[idx]);
                    seen[idx] = true;
                    assert_eq!(c.decode(idx).unwrap(), vec![a, b, d]);
                }
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn out_of_range() {
        let c = StateCodec::new(vec![2, 2]).unwrap();
        assert!(c.encode(&[2, 0]).is_err());
        assert!(c.decode(4).is_err());
        assert!(c.encode(&[0]).is_err());
    }

    #[test]
    fn empty_codec_has_one_state() {
        let c = StateCodec::new(vec![]).unwrap();
        assert_eq!(c.size(), 1);
        assert_eq!(c.encode(&[]).unwrap(), 0);
    }

    proptest! {
        #[test]
        fn digit_replacement_matches_reencode(radices in prop::collection::vec(1usize..6, 1..5), seed in any::<u64>()) {
            let c = StateCodec::new(radices.clone()).unwrap();
            let idx = (seed as usize) % c.size();
            let mut states = c.decode(idx).unwrap();
            let pos = (seed as usize >> 8) % radices.len();
            let v = (seed as usize >> 16) % radices[pos];
            states[pos] = v;
            prop_assert_eq!(c.with_digit(idx, pos, v), c.encode(&states).unwrap());
            prop_assert_eq!(c.digit(idx, pos), c.decode(idx).unwrap()[pos]);
        }
    }
}
