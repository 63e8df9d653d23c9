use std::collections::HashMap;

use crate::AurecError;

pub const SILENCE: &str = "SIL";

/// Phonemes occurring in the recording scripts, in the order they first appear.
pub const DATASET_PHONEMES: [&str; 28] = [
    "B", "EY", "ZH", "CH", "AE", "P", "S", "K", "AW", "OY", "Y", "UH", "R", "AH", "N", "G", "UW", "IY", "HH", "JH", "D",
    "M", "AO", "W", "T", "ER", "Z", "SH",
];

/// The 39 CMU pronouncing dictionary phonemes.
pub const CMUDICT_PHONEMES: [&str; 39] = [
    "AA", "AE", "AH", "AO", "AW", "AY", "B", "CH", "D", "DH", "EH", "ER", "EY", "F", "G", "HH", "IH", "IY", "JH", "K", "L",
    "M", "N", "NG", "OW", "OY", "P", "R", "S", "SH", "T", "TH", "UH", "UW", "V", "W", "Y", "Z", "ZH",
];

/// Ordered phoneme labels with one distinguished silence label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhonemeAlphabet {
    labels: Vec<String>,
    silence: usize,
    index: HashMap<String, usize>,
}

impl PhonemeAlphabet {
    /// `labels` must contain `silence` exactly once; labels are matched case-insensitively.
    pub fn new(labels: Vec<String>, silence: &str) -> Result<Self, AurecError> {
        let labels: Vec<String> = labels.into_iter().map(|l| l.trim().to_uppercase()).collect();
        let silence = silence.trim().to_uppercase();
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if l.is_empty() || l.contains(',') || l.chars().any(char::is_whitespace) {
                return Err(AurecError::InvalidAlphabet(format!("bad label `{l}`")));
            }
            if index.insert(l.clone(), i).is_some() {
                return Err(AurecError::InvalidAlphabet(format!("label `{l}` repeated")));
            }
        }
        let silence = *index
            .get(&silence)
            .ok_or_else(|| AurecError::InvalidAlphabet(format!("silence label `{silence}` missing")))?;
        Ok(Self { labels, silence, index })
    }

    /// Silence followed by the given phonemes.
    pub fn with_silence(phonemes: &[&str]) -> Result<Self, AurecError> {
        let mut labels = vec![SILENCE.to_string()];
        labels.extend(phonemes.iter().map(|p| p.to_string()));
        Self::new(labels, SILENCE)
    }

    /// The 28 dataset phonemes plus silence: 29 states.
    pub fn dataset() -> Self {
        Self::with_silence(&DATASET_PHONEMES).expect("valid built-in alphabet")
    }

    /// The 39 CMUdict phonemes plus silence: 40 states.
    pub fn cmudict() -> Self {
        Self::with_silence(&CMUDICT_PHONEMES).expect("valid built-in alphabet")
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn silence(&self) -> usize {
        self.silence
    }

    pub fn index(&self, label: &str) -> Option<usize> {
        self.index.get(&label.trim().to_uppercase()).copied()
    }
}

impl Default for PhonemeAlphabet {
    fn default() -> Self {
        Self::dataset()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn built_in_sizes() {
        assert_eq!(PhonemeAlphabet::dataset().len(), 29);
        assert_eq!(PhonemeAlphabet::cmudict().len(), 40);
        assert_eq!(PhonemeAlphabet::dataset().silence(), 0);
        assert!(PhonemeAlphabet::dataset().index("CH").is_some());
        assert!(PhonemeAlphabet::dataset().index("TH").is_none());
        assert!(PhonemeAlphabet::cmudict().index("th").is_some());
    }

    #[test]
    fn rejects_duplicates_and_missing_silence() {
        assert!(PhonemeAlphabet::new(vec!["SIL".into(), "B".into(), "b".into()], "SIL").is_err());
        assert!(PhonemeAlphabet::new(vec!["B".into()], "SIL").is_err());
    }
}
