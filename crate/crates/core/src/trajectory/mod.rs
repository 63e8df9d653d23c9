//! Piecewise-constant state histories over continuous time.

mod sample;

use std::collections::HashSet;

use thiserror::Error;

pub use sample::{rng_from_seed, sample_trajectory, sample_trajectory_from, sample_trajectory_with, SeededRng};

use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrajectoryError {
    #[error("malformed trajectory: {0}")]
    Malformed(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("frame rate must be positive and finite, got {0}")]
    InvalidFrameRate(f64),
}

/// Constant-state interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment<T> {
    pub state: usize,
    pub start: T,
    pub end: T,
}

impl<T: Scalar> Segment<T> {
    pub fn new(state: usize, start: T, end: T) -> Self {
        Self { state, start, end }
    }

    pub fn duration(&self) -> T {
        self.end - self.start
    }
}

/// History of one variable.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableTrack<T> {
    name: String,
    segments: Vec<Segment<T>>,
}

impl<T: Scalar> VariableTrack<T> {
    /// Segments are taken as given; [`Trajectory::new`] checks the invariants.
    pub fn new(name: impl Into<String>, segments: Vec<Segment<T>>) -> Self {
        Self { name: name.into(), segments }
    }

    /// Merge adjacent segments that share a state and drop empty ones.
    pub fn merged(name: impl Into<String>, segments: impl IntoIterator<Item = Segment<T>>) -> Self {
        let mut out: Vec<Segment<T>> = Vec::new();
        for seg in segments {
            if !(seg.end > seg.start) {
                continue;
            }
            match out.last_mut() {
                Some(last) if last.state == seg.state && last.end == seg.start => last.end = seg.end,
                _ => out.push(seg),
            }
        }
        Self { name: name.into(), segments: out }
    }

    /// Constant state over `[0, horizon)`.
    pub fn constant(name: impl Into<String>, state: usize, horizon: T) -> Self {
        let segs = if horizon > T::zero() { vec![Segment::new(state, T::zero(), horizon)] } else { vec![] };
        Self { name: name.into(), segments: segs }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn segments(&self) -> &[Segment<T>] {
        &self.segments
    }

    /// Index of the segment containing `t`; times at or past the end map to the last segment.
    pub fn segment_index_at(&self, t: T) -> Option<usize> {
        if self.segments.is_empty() {
            return None;
        }
        let idx = self.segments.partition_point(|s| s.end <= t);
        Some(idx.min(self.segments.len() - 1))
    }

    pub fn state_at(&self, t: T) -> Option<usize> {
        self.segment_index_at(t).map(|i| self.segments[i].state)
    }

    pub fn initial_state(&self) -> Option<usize> {
        self.segments.first().map(|s| s.state)
    }

    /// `(time, from, to)` for every transition.
    pub fn transitions(&self) -> impl Iterator<Item = (T, usize, usize)> + '_ {
        self.segments.windows(2).map(|w| (w[1].start, w[0].state, w[1].state))
    }
}

/// Joint history of a set of variables over `[0, horizon)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    horizon: T,
    tracks: Vec<VariableTrack<T>>,
}

/// A trajectory over the observed subset of a model's nodes.
pub type Evidence<T> = Trajectory<T>;

impl<T: Scalar> Trajectory<T> {
    pub fn new(horizon: T, tracks: Vec<VariableTrack<T>>) -> Result<Self, TrajectoryError> {
        let bad = |m: String| Err(TrajectoryError::Malformed(m));
        if !(horizon >= T::zero()) || !horizon.is_finite() {
            return bad(format!("horizon {horizon} is not a finite non-negative time"));
        }
        let mut names = HashSet::new();
        for track in &tracks {
            let name = track.name();
            if !names.insert(name.to_string()) {
                return bad(format!("variable `{name}` appears twice"));
            }
            let segs = track.segments();
            if horizon == T::zero() {
                if !segs.is_empty() {
                    return bad(format!("`{name}` has segments on an empty horizon"));
                }
                continue;
            }
            let (Some(first), Some(last)) = (segs.first(), segs.last()) else {
                return bad(format!("`{name}` has no segments"));
            };
            if first.start != T::zero() {
                return bad(format!("`{name}` starts at {} instead of 0", first.start));
            }
            if last.end != horizon {
                return bad(format!("`{name}` ends at {} instead of the horizon {horizon}", last.end));
            }
            for s in segs {
                if !(s.start < s.end) {
                    return bad(format!("`{name}` has an empty or reversed segment [{}, {})", s.start, s.end));
                }
            }
            for w in segs.windows(2) {
                if w[0].end != w[1].start {
                    return bad(format!("`{name}` has a gap or overlap at {}", w[0].end));
                }
                if w[0].state == w[1].state {
                    return bad(format!("`{name}` repeats state {} across {}", w[0].state, w[0].end));
                }
            }
        }
        Ok(Self { horizon, tracks })
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn tracks(&self) -> &[VariableTrack<T>] {
        &self.tracks
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.tracks.iter().map(VariableTrack::name)
    }

    pub fn track(&self, name: &str) -> Option<&VariableTrack<T>> {
        self.tracks.iter().find(|t| t.name() == name)
    }

    pub fn is_empty(&self) -> bool {
        self.tracks.is_empty()
    }

    /// Projection onto a subset of variables; track order is preserved.
    pub fn restrict<S: AsRef<str>>(&self, variables: &[S]) -> Result<Evidence<T>, TrajectoryError> {
        for v in variables {
            if self.track(v.as_ref()).is_none() {
                return Err(TrajectoryError::UnknownVariable(v.as_ref().to_string()));
            }
        }
        let keep: HashSet<&str> = variables.iter().map(AsRef::as_ref).collect();
        Ok(Self {
            horizon: self.horizon,
            tracks: self.tracks.iter().filter(|t| keep.contains(t.name())).cloned().collect(),
        })
    }

    /// Sorted, de-duplicated transition instants across all tracks.
    pub fn change_times(&self) -> Vec<T> {
        let mut times: Vec<T> = self.tracks.iter().flat_map(|t| t.segments().iter().skip(1).map(|s| s.start)).collect();
        times.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
        times.dedup();
        times
    }

    /// Frame-wise states of one variable, one frame per `1/frame_rate` seconds,
    /// each frame taking the state at its midpoint.
    pub fn discretize(&self, variable: &str, frame_rate: T) -> Result<FrameSequence<T>, TrajectoryError> {
        let track = self.track(variable).ok_or_else(|| TrajectoryError::UnknownVariable(variable.to_string()))?;
        let times = frame_midpoints(self.horizon, frame_rate)?;
        let mut states = Vec::with_capacity(times.len());
        let mut idx = 0;
        let segs = track.segments();
        for t in times {
            while idx + 1 < segs.len() && segs[idx].end <= t {
                idx += 1;
            }
            states.push(segs[idx].state);
        }
        Ok(FrameSequence { frame_rate, states })
    }
}

/// Per-frame states of one variable.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence<T> {
    pub frame_rate: T,
    pub states: Vec<usize>,
}

/// `ceil(horizon · rate)`, tolerant of representation error in the product.
pub fn frame_count<T: Scalar>(horizon: T, frame_rate: T) -> Result<usize, TrajectoryError> {
    if !(frame_rate > T::zero()) || !frame_rate.is_finite() {
        return Err(TrajectoryError::InvalidFrameRate(frame_rate.to_f64_lossy()));
    }
    let x = (horizon * frame_rate).to_f64_lossy();
    Ok((x - 1e-9 * x.max(1.0)).ceil().max(0.0) as usize)
}

/// Midpoint time of every frame. A final partial frame uses the midpoint of
/// its part inside the horizon, so every time lies in `[0, horizon)`.
pub fn frame_midpoints<T: Scalar>(horizon: T, frame_rate: T) -> Result<Vec<T>, TrajectoryError> {
    let n = frame_count(horizon, frame_rate)?;
    Ok((0..n)
        .map(|k| {
            let start = T::of(k as f64) / frame_rate;
            let end = (T::of(k as f64 + 1.0) / frame_rate).min(horizon);
            if end < horizon {
                (T::of(k as f64) + T::of(0.5)) / frame_rate
            } else {
                (start + end) / T::of(2.0)
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(state: usize, a: f64, b: f64) -> Segment<f64> {
        Segment::new(state, a, b)
    }

    #[test]
    fn validates_cover_and_contiguity() {
        let ok = Trajectory::new(1.0, vec![VariableTrack::new("X", vec![seg(0, 0.0, 0.4), seg(1, 0.4, 1.0)])]);
        assert!(ok.is_ok());
        let gap = Trajectory::new(1.0, vec![VariableTrack::new("X", vec![seg(0, 0.0, 0.4), seg(1, 0.5, 1.0)])]);
        assert!(gap.is_err());
        let repeat = Trajectory::new(1.0, vec![VariableTrack::new("X", vec![seg(0, 0.0, 0.4), seg(0, 0.4, 1.0)])]);
        assert!(repeat.is_err());
        let short = Trajectory::new(1.0, vec![VariableTrack::new("X", vec![seg(0, 0.0, 0.9)])]);
        assert!(short.is_err());
    }

    #[test]
    fn discretize_constant() {
        let t = Trajectory::new(1.0, vec![VariableTrack::constant("X", 3, 1.0)]).unwrap();
        assert_eq!(t.discretize("X", 10.0).unwrap().states, vec![3; 10]);
    }

    #[test]
    fn discretize_midpoint_rule() {
        let t = Trajectory::new(1.0, vec![VariableTrack::new("X", vec![seg(0, 0.0, 0.35), seg(1, 0.35, 1.0)])]).unwrap();
        let f = t.discretize("X", 10.0).unwrap();
        assert_eq!(f.states, vec![0, 0, 0, 1, 1, 1, 1, 1, 1, 1]);
    }

    #[test]
    fn discretize_empty_and_unknown() {
        let t = Trajectory::<f64>::new(0.0, vec![VariableTrack::new("X", vec![])]).unwrap();
        assert!(t.discretize("X", 10.0).unwrap().states.is_empty());
        assert!(matches!(t.discretize("Y", 10.0), Err(TrajectoryError::UnknownVariable(_))));
        assert!(t.discretize("X", 0.0).is_err());
    }

    #[test]
    fn frame_count_is_ceiling() {
        assert_eq!(frame_count(0.6, 10.0).unwrap(), 6);
        assert_eq!(frame_count(0.61, 10.0).unwrap(), 7);
        assert_eq!(frame_count(1.0, 59.94).unwrap(), 60);
    }

    #[test]
    fn partial_last_frame_stays_inside() {
        let m: Vec<f64> = frame_midpoints(0.62, 10.0).unwrap();
        assert_eq!(m.len(), 7);
        assert_eq!(m[5], 0.55);
        assert!((m[6] - 0.61).abs() < 1e-12);
        assert!(frame_midpoints(1.0, 59.94).unwrap().iter().all(|&t| t < 1.0));
    }

    #[test]
    fn restrict_laws() {
        let t = Trajectory::new(
            1.0,
            vec![VariableTrack::constant("A", 0, 1.0), VariableTrack::constant("B", 1, 1.0), VariableTrack::constant("C", 0, 1.0)],
        )
        .unwrap();
        assert_eq!(t.restrict(&["A", "B", "C"]).unwrap(), t);
        assert!(t.restrict::<&str>(&[]).unwrap().is_empty());
        let once = t.restrict(&["C", "A"]).unwrap();
        assert_eq!(once.restrict(&["A"]).unwrap(), t.restrict(&["A"]).unwrap());
        assert_eq!(once.variables().collect::<Vec<_>>(), vec!["A", "C"]);
        assert!(matches!(t.restrict(&["Z"]), Err(TrajectoryError::UnknownVariable(_))));
    }

    #[test]
    fn merged_builder_coalesces() {
        let t = VariableTrack::merged("X", vec![seg(0, 0.0, 0.1), seg(0, 0.1, 0.2), seg(1, 0.2, 0.2), seg(1, 0.2, 0.5)]);
        assert_eq!(t.segments(), &[seg(0, 0.0, 0.2), seg(1, 0.2, 0.5)]);
        assert_eq!(t.state_at(0.2), Some(1));
        assert_eq!(t.state_at(0.19), Some(0));
    }
}
