//! Complete training trajectories from phoneme segments and frame-level AU labels.

use rayon::prelude::*;

use ctbn::trajectory::{frame_count, Segment, Trajectory, VariableTrack};

use crate::labels::AuLabels;
use crate::segments::{load_segments, SegmentFile};
use crate::{AuCodec, AurecError, ModelForm, PhonemeAlphabet, AU_NODE, OBSERVATION_NODE, PHONE_NODE};

/// Where the O_p training track comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ObservationSource {
    /// Recognizer output when an utterance has it, groundtruth otherwise.
    #[default]
    PreferRecognized,
    Groundtruth,
}

#[derive(Debug, Clone)]
pub struct TrainingUtterance {
    pub phonemes: SegmentFile,
    pub recognized: Option<SegmentFile>,
    pub labels: AuLabels,
}

#[derive(Debug, Clone)]
pub struct TrainingSet {
    pub trajectories: Vec<Trajectory<f64>>,
    /// Frame boundaries where several AUs flip at once (staggered in factorized form).
    pub simultaneous_flips: usize,
    pub gaps_filled: usize,
}

/// Run-length encode per-frame values; frame `k` covers `[k/rate, (k+1)/rate)`, clipped to the horizon.
pub fn run_length(values: &[usize], frame_rate: f64, horizon: f64) -> Vec<Segment<f64>> {
    let mut out: Vec<Segment<f64>> = Vec::new();
    for (k, &v) in values.iter().enumerate() {
        let start = k as f64 / frame_rate;
        if start >= horizon {
            break;
        }
        let end = ((k + 1) as f64 / frame_rate).min(horizon);
        match out.last_mut() {
            Some(last) if last.state == v => last.end = end,
            _ => out.push(Segment::new(v, start, end)),
        }
    }
    if let Some(last) = out.last_mut() {
        last.end = horizon;
    }
    out
}

/// One node over AU combinations.
pub fn fused_track(labels: &AuLabels, codec: &AuCodec, horizon: f64) -> VariableTrack<f64> {
    let codes: Vec<usize> = labels.frames.iter().map(|f| codec.encode_flags(f)).collect();
    VariableTrack::new(AU_NODE, run_length(&codes, labels.frame_rate, horizon))
}

/// Split a fused AU track into one binary track per AU.
///
/// A jump that flips several AUs at once is staggered by `epsilon`, lowest AU
/// number first; the number of such jumps is returned alongside. `epsilon`
/// times the number of AUs must be shorter than every segment.
pub fn split_fused_track(
    track: &VariableTrack<f64>,
    codec: &AuCodec,
    horizon: f64,
    epsilon: f64,
) -> (Vec<VariableTrack<f64>>, usize) {
    let n = codec.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&p| codec.aus()[p]);
    let Some(first) = track.initial_state() else {
        return (codec.names().into_iter().map(|name| VariableTrack::new(name, vec![])).collect(), 0);
    };
    let mut flips: Vec<Vec<f64>> = vec![Vec::new(); n];
    let mut simultaneous = 0;
    for (t, from, to) in track.transitions() {
        let changed: Vec<usize> = order.iter().copied().filter(|&p| codec.bit(from, p) != codec.bit(to, p)).collect();
        if changed.len() > 1 {
            simultaneous += 1;
        }
        for (i, p) in changed.into_iter().enumerate() {
            let at = t + i as f64 * epsilon;
            if at < horizon {
                flips[p].push(at);
            }
        }
    }
    let tracks = codec
        .names()
        .into_iter()
        .enumerate()
        .map(|(p, name)| {
            let mut state = usize::from(codec.bit(first, p));
            let mut start = 0.0;
            let mut segs = Vec::with_capacity(flips[p].len() + 1);
            for &t in &flips[p] {
                segs.push(Segment::new(state, start, t));
                start = t;
                state = 1 - state;
            }
            segs.push(Segment::new(state, start, horizon));
            VariableTrack::new(name, segs)
        })
        .collect();
    (tracks, simultaneous)
}

/// Combine binary AU tracks (codec order) into one fused track.
pub fn fuse_binary_tracks(tracks: &[VariableTrack<f64>], codec: &AuCodec, horizon: f64) -> Result<VariableTrack<f64>, AurecError> {
    if tracks.len() != codec.len() {
        return Err(AurecError::LengthMismatch(format!("{} binary tracks for {} AUs", tracks.len(), codec.len())));
    }
    let mut times: Vec<f64> = vec![0.0];
    times.extend(tracks.iter().flat_map(|t| t.transitions().map(|(time, _, _)| time)));
    times.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    times.dedup();
    let code_at = |t: f64| -> Result<usize, AurecError> {
        let flags: Option<Vec<u8>> = tracks.iter().map(|tr| tr.state_at(t).map(|s| s as u8)).collect();
        flags.map(|f| codec.encode_flags(&f)).ok_or_else(|| AurecError::LengthMismatch("binary track is empty".into()))
    };
    let mut segs = Vec::with_capacity(times.len());
    for (i, &t) in times.iter().enumerate() {
        let end = times.get(i + 1).copied().unwrap_or(horizon);
        segs.push(Segment::new(code_at(t)?, t, end));
    }
    Ok(VariableTrack::merged(AU_NODE, segs))
}

fn one(
    u: &TrainingUtterance,
    alphabet: &PhonemeAlphabet,
    codec: &AuCodec,
    form: ModelForm,
    source: ObservationSource,
    frame_rate: f64,
) -> Result<(Trajectory<f64>, usize, usize), AurecError> {
    let id = &u.phonemes.utterance;
    let horizon = u.phonemes.horizon;
    if (u.labels.frame_rate - frame_rate).abs() > 1e-9 * frame_rate {
        return Err(AurecError::LengthMismatch(format!(
            "{id}: labels at {} fps, expected {frame_rate}",
            u.labels.frame_rate
        )));
    }
    if u.labels.frames.iter().any(|f| f.len() != codec.len()) {
        return Err(AurecError::LengthMismatch(format!("{id}: label width differs from {} AUs", codec.len())));
    }
    let want = frame_count(horizon, frame_rate)?;
    if u.labels.n_frames() != want {
        return Err(AurecError::LengthMismatch(format!(
            "{id}: {} AU frames for a {horizon} s utterance at {frame_rate} fps ({want} expected)",
            u.labels.n_frames()
        )));
    }
    let phone = load_segments(&u.phonemes, alphabet, PHONE_NODE)?;
    let obs_file = match (source, &u.recognized) {
        (ObservationSource::PreferRecognized, Some(r)) => r,
        _ => &u.phonemes,
    };
    if (obs_file.horizon - horizon).abs() > 1e-9 * horizon.max(1.0) {
        return Err(AurecError::LengthMismatch(format!(
            "{id}: recognized horizon {} differs from {horizon}",
            obs_file.horizon
        )));
    }
    let obs = load_segments(obs_file, alphabet, OBSERVATION_NODE)?;
    let mut tracks = vec![phone.trajectory.tracks()[0].clone()];
    let fused = fused_track(&u.labels, codec, horizon);
    let mut simultaneous = 0;
    match form {
        ModelForm::Joint => tracks.push(fused),
        ModelForm::Factorized => {
            let eps = 1.0 / frame_rate / 1000.0;
            let (binary, n) = split_fused_track(&fused, codec, horizon, eps);
            simultaneous = n;
            tracks.extend(binary);
        }
    }
    tracks.push(obs.trajectory.tracks()[0].clone());
    Ok((Trajectory::new(horizon, tracks)?, simultaneous, phone.gaps_filled + obs.gaps_filled))
}

/// One complete trajectory per utterance: Phone from groundtruth segments,
/// AUs from the frame labels, O_p from `source`.
pub fn build_training_trajectories(
    utterances: &[TrainingUtterance],
    alphabet: &PhonemeAlphabet,
    codec: &AuCodec,
    form: ModelForm,
    source: ObservationSource,
    frame_rate: f64,
) -> Result<TrainingSet, AurecError> {
    let built: Vec<_> = utterances
        .par_iter()
        .map(|u| one(u, alphabet, codec, form, source, frame_rate))
        .collect::<Result<_, _>>()?;
    let mut set = TrainingSet { trajectories: Vec::with_capacity(built.len()), simultaneous_flips: 0, gaps_filled: 0 };
    for (t, s, g) in built {
        set.trajectories.push(t);
        set.simultaneous_flips += s;
        set.gaps_filled += g;
    }
    Ok(set)
}
