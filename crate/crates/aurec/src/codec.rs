use std::collections::BTreeSet;

use crate::AurecError;

/// The seven speech-related action units, most significant bit first.
pub const DEFAULT_AUS: [u32; 7] = [18, 20, 22, 24, 25, 26, 27];

/// A set of active action units, by AU number.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash)]
pub struct AuSet(BTreeSet<u32>);

impl AuSet {
    pub fn new(aus: impl IntoIterator<Item = u32>) -> Self {
        Self(aus.into_iter().collect())
    }

    pub fn contains(&self, au: u32) -> bool {
        self.0.contains(&au)
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Binary encoding of AU combinations into one state index.
///
/// The first AU in the list is the most significant bit, so with the default
/// list AU27 has weight 1 and AU18 weight 64.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuCodec {
    aus: Vec<u32>,
}

impl Default for AuCodec {
    fn default() -> Self {
        Self { aus: DEFAULT_AUS.to_vec() }
    }
}

impl AuCodec {
    pub fn new(aus: Vec<u32>) -> Result<Self, AurecError> {
        if aus.is_empty() || aus.len() > 16 {
            return Err(AurecError::InvalidCodec(format!("{} AUs; between 1 and 16 supported", aus.len())));
        }
        let unique: BTreeSet<u32> = aus.iter().copied().collect();
        if unique.len() != aus.len() {
            return Err(AurecError::InvalidCodec("repeated AU".into()));
        }
        Ok(Self { aus })
    }

    pub fn aus(&self) -> &[u32] {
        &self.aus
    }

    pub fn len(&self) -> usize {
        self.aus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.aus.is_empty()
    }

    pub fn n_states(&self) -> usize {
        1 << self.aus.len()
    }

    /// `AU<number>` names in codec order.
    pub fn names(&self) -> Vec<String> {
        self.aus.iter().map(|a| format!("AU{a}")).collect()
    }

    /// Position of the AU called `name` (`AU25` or `25`).
    pub fn position(&self, name: &str) -> Result<usize, AurecError> {
        let number = name.trim().trim_start_matches("AU").parse::<u32>().ok();
        number
            .and_then(|n| self.aus.iter().position(|&a| a == n))
            .ok_or_else(|| AurecError::UnknownAuName(name.to_string()))
    }

    pub fn encode(&self, set: &AuSet) -> Result<usize, AurecError> {
        let mut index = 0;
        for au in set.iter() {
            let pos = self.aus.iter().position(|&a| a == au).ok_or_else(|| AurecError::UnknownAuName(format!("AU{au}")))?;
            index |= 1 << (self.aus.len() - 1 - pos);
        }
        Ok(index)
    }

    pub fn decode(&self, index: usize) -> Result<AuSet, AurecError> {
        if index >= self.n_states() {
            return Err(AurecError::OutOfRange { index, bound: self.n_states() });
        }
        Ok(AuSet::new(self.aus.iter().enumerate().filter(|(p, _)| self.bit(index, *p)).map(|(_, &a)| a)))
    }

    /// Flags in codec order to a state index.
    pub fn encode_flags(&self, flags: &[u8]) -> usize {
        flags.iter().fold(0, |acc, &f| (acc << 1) | usize::from(f != 0))
    }

    /// Whether the AU at codec position `pos` is on in `index`.
    pub fn bit(&self, index: usize, pos: usize) -> bool {
        (index >> (self.aus.len() - 1 - pos)) & 1 == 1
    }
}
