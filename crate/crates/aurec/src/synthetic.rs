//! A small hand-specified ground-truth model and corpus generator.
//!
//! Four phonemes (SIL, B, AA, M) and three AUs (24, 25, 26). Before a B the
//! lips press with the jaw dropped (AU24+AU26, state 5); B is released into an
//! open mouth (AU25+AU26, state 3) held through AA; M closes the lips again
//! (AU24, state 4); silence relaxes to no AU (state 0). O_p follows Phone with
//! a short lag and occasional brief misdetections.

use std::collections::BTreeMap;

use ctbn::model::{ConditionalIntensityMatrix, CtbnModel, InitialDistribution};
use ctbn::trajectory::{frame_midpoints, sample_trajectory, Trajectory, VariableTrack};
use rayon::prelude::*;

use crate::labels::{AuLabels, AuProbabilities};
use crate::segments::{PhoneSegment, SegmentFile};
use crate::{build_joint_model, AuCodec, AurecError, PhonemeAlphabet, AU_NODE, OBSERVATION_NODE, PHONE_NODE};

const SIL: usize = 0;
const B: usize = 1;
const AA: usize = 2;
const M: usize = 3;

/// Rate of the fast reactions coupling AU changes to phoneme boundaries.
const FAST: f64 = 80.0;

/// AU24+AU26: lips pressed, jaw dropped.
pub const CLOSURE: usize = 5;
/// AU25+AU26: lips parted, jaw dropped.
pub const OPEN: usize = 3;
/// AU24 alone.
pub const PRESSED: usize = 4;

pub fn alphabet() -> PhonemeAlphabet {
    PhonemeAlphabet::with_silence(&["B", "AA", "M"]).expect("valid alphabet")
}

pub fn codec() -> AuCodec {
    AuCodec::new(vec![24, 25, 26]).expect("valid codec")
}

/// Noise of the phoneme measurement channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationNoise {
    /// Rate at which a wrong measurement snaps back to the true phoneme; sets the lag.
    pub catch_up: f64,
    /// Rate of jumping to each wrong phoneme while correct.
    pub misdetection: f64,
}

impl Default for ObservationNoise {
    fn default() -> Self {
        Self { catch_up: 60.0, misdetection: 0.1 }
    }
}

fn cim(n: usize, floor: f64, rates: &[(usize, usize, f64)]) -> ConditionalIntensityMatrix<f64> {
    let mut rows = vec![vec![floor; n]; n];
    for &(i, j, r) in rates {
        rows[i][j] = r;
    }
    ConditionalIntensityMatrix::from_off_diagonal(&rows).expect("non-negative rates")
}

/// The ground-truth joint model; every utterance starts in silence with no AU.
pub fn model(noise: ObservationNoise) -> CtbnModel<f64> {
    let structure = build_joint_model(&alphabet(), &codec()).expect("valid structure");
    let n_au = codec().n_states();
    // Phone | AU: a phoneme change waits for the AU configuration it needs.
    let phone = (0..n_au)
        .map(|a| {
            cim(
                4,
                0.005,
                &[
                    (SIL, B, if a == CLOSURE { FAST } else { 0.005 }),
                    (B, AA, if a == OPEN { FAST } else { 0.005 }),
                    (AA, M, if a == OPEN { 4.0 } else { 0.5 }),
                    (M, SIL, if a == PRESSED { 4.0 } else { 0.5 }),
                ],
            )
        })
        .collect();
    // AU | Phone: the face follows a new phoneme quickly, except for the
    // closure before B and its release.
    let au = vec![
        cim(n_au, 0.002, &[(0, CLOSURE, 1.2), (PRESSED, 0, FAST), (OPEN, 0, FAST), (CLOSURE, 0, 0.2)]),
        cim(n_au, 0.002, &[(CLOSURE, OPEN, 6.0), (0, CLOSURE, FAST), (PRESSED, CLOSURE, FAST)]),
        cim(n_au, 0.002, &[(CLOSURE, OPEN, FAST), (PRESSED, OPEN, FAST), (0, OPEN, FAST)]),
        cim(n_au, 0.002, &[(OPEN, PRESSED, FAST), (0, PRESSED, FAST), (CLOSURE, PRESSED, FAST)]),
    ];
    // O_p | Phone
    let obs = (0..4)
        .map(|p| {
            let mut rates: Vec<(usize, usize, f64)> = Vec::new();
            for o in 0..4 {
                for d in 0..4 {
                    if d == o {
                        continue;
                    }
                    let r = if o == p {
                        noise.misdetection
                    } else if d == p {
                        noise.catch_up
                    } else {
                        0.0
                    };
                    rates.push((o, d, r));
                }
            }
            cim(4, 0.0, &rates)
        })
        .collect();
    let initial = InitialDistribution::Joint(BTreeMap::from([(vec![SIL, 0, SIL], 1.0)]));
    CtbnModel::new(structure, vec![phone, au, obs], initial).expect("valid model")
}

/// One generated utterance in the pipeline's file formats, plus the sampled truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticUtterance {
    pub phonemes: SegmentFile,
    /// O_p as a recognizer would report it.
    pub recognized: SegmentFile,
    pub labels: AuLabels,
    pub truth: Trajectory<f64>,
}

fn segment_file(track: &VariableTrack<f64>, alphabet: &PhonemeAlphabet, utterance: &str, horizon: f64) -> SegmentFile {
    let segments = track
        .segments()
        .iter()
        .filter(|s| s.state != alphabet.silence())
        .map(|s| PhoneSegment { label: alphabet.labels()[s.state].clone(), start: s.start, end: s.end, line: 0 })
        .collect();
    SegmentFile::new(utterance, horizon, segments).expect("sampled segments tile the horizon")
}

/// Samples `count` utterances from `model` (built over [`alphabet`] and
/// [`codec`]); utterance `k` uses seed `seed + k` and id `utt0000`, `utt0001`, ...
pub fn generate_corpus(
    model: &CtbnModel<f64>,
    count: usize,
    horizon: f64,
    frame_rate: f64,
    seed: u64,
) -> Result<Vec<SyntheticUtterance>, AurecError> {
    let alphabet = alphabet();
    let codec = codec();
    let mids = frame_midpoints(horizon, frame_rate)?;
    (0..count)
        .into_par_iter()
        .map(|k| {
            let id = format!("utt{k:04}");
            let truth = sample_trajectory(model, horizon, seed.wrapping_add(k as u64));
            let track = |name: &str| {
                truth.track(name).ok_or_else(|| AurecError::ModelShape(format!("model has no `{name}` node")))
            };
            let au = track(AU_NODE)?;
            let frames = mids
                .iter()
                .map(|&t| {
                    let s = au.state_at(t).expect("sampled track covers the horizon");
                    (0..codec.len()).map(|p| u8::from(codec.bit(s, p))).collect()
                })
                .collect();
            Ok(SyntheticUtterance {
                phonemes: segment_file(track(PHONE_NODE)?, &alphabet, &id, horizon),
                recognized: segment_file(track(OBSERVATION_NODE)?, &alphabet, &id, horizon),
                labels: AuLabels { utterance: id, frame_rate, frames },
                truth,
            })
        })
        .collect()
}

/// Whether the release of the first B in `phonemes` shows up in recognized
/// probabilities as in the generator: AU24 dominates AU25 at the onset frame;
/// AU25 then overtakes AU24 before the phoneme following the B is over; AU24
/// peaks between the onset and that crossing above its lowest value since the
/// previous phoneme ended (or over the `tolerance` frames before the onset when
/// there is no gap); and it has fallen below that peak `tolerance` frames after
/// the crossing.
///
/// Only the order of the AU24 to AU25 argmax change is checked, not
/// probability magnitudes. A B whose next phoneme runs into the end of the
/// utterance needs no crossing. `None` when the utterance has no B.
pub fn release_ordering(
    probs: &AuProbabilities,
    phonemes: &SegmentFile,
    codec: &AuCodec,
    tolerance: usize,
) -> Result<Option<bool>, AurecError> {
    let track = |name: &str| -> Result<&[f64], AurecError> {
        codec.position(name)?;
        let pos = probs
            .names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| AurecError::UnknownAuName(name.to_string()))?;
        Ok(&probs.probs[pos])
    };
    let (p24, p25) = (track("AU24")?, track("AU25")?);
    let n = p24.len();
    let segs = &phonemes.segments;
    let Some(i) = segs.iter().position(|s| s.label.eq_ignore_ascii_case("B")) else {
        return Ok(None);
    };
    if n == 0 {
        return Ok(None);
    }
    let frame = |t: f64| ((t * probs.frame_rate).floor() as usize).min(n - 1);
    let kb = frame(segs[i].start);
    let gap = if i == 0 { 0 } else { frame(segs[i - 1].end) };
    let from = if gap < kb { gap } else { kb.saturating_sub(tolerance.max(1)) };
    // last frame of the phoneme after the B
    let ke = frame(segs.get(i + 1).map_or(phonemes.horizon, |next| next.end));
    if !(p24[kb] > p25[kb]) {
        return Ok(Some(false));
    }
    let low = p24[from..=kb].iter().copied().fold(f64::INFINITY, f64::min);
    let ok = match (kb + 1..n).find(|&k| p25[k] > p24[k]) {
        Some(c) => {
            let peak = p24[kb..=c].iter().copied().fold(0.0, f64::max);
            c <= ke && low < peak && p24[(c + tolerance).min(n - 1)] < peak
        }
        None => ke + 1 >= n && low < p24[kb..].iter().copied().fold(0.0, f64::max),
    };
    Ok(Some(ok))
}
