use std::collections::BTreeMap;

use crate::inference::PosteriorTrack;
use crate::io::{fmt_sig9, IoError};
use crate::model::CtbnStructure;
use crate::trajectory::{Segment, Trajectory, VariableTrack};
use crate::Scalar;

/// Renders a trajectory as
///
/// ```text
/// horizon,<T>
/// <variable>,<state label>,<start>,<end>
/// ```
///
/// with records sorted by variable name, then start time.
pub fn write_trajectory<T: Scalar>(traj: &Trajectory<T>, structure: &CtbnStructure) -> Result<String, IoError> {
    let mut out = format!("horizon,{}\n", fmt_sig9(traj.horizon().to_f64_lossy()));
    let mut tracks: Vec<&VariableTrack<T>> = traj.tracks().iter().collect();
    tracks.sort_by(|a, b| a.name().cmp(b.name()));
    for track in tracks {
        let node = structure
            .node_index(track.name())
            .map(|i| structure.node(i))
            .ok_or_else(|| IoError::Invalid(format!("variable `{}` is not in the structure", track.name())))?;
        for s in track.segments() {
            let label = node
                .state_labels()
                .get(s.state)
                .ok_or_else(|| IoError::Invalid(format!("state {} out of range for `{}`", s.state, track.name())))?;
            out.push_str(&format!(
                "{},{},{},{}\n",
                track.name(),
                label,
                fmt_sig9(s.start.to_f64_lossy()),
                fmt_sig9(s.end.to_f64_lossy())
            ));
        }
    }
    Ok(out)
}

fn parse_time<T: Scalar>(field: &str, line: usize) -> Result<T, IoError> {
    let x: f64 = field
        .trim()
        .parse()
        .map_err(|_| IoError::Parse { line, message: format!("`{field}` is not a number") })?;
    if !x.is_finite() || x < 0.0 {
        return Err(IoError::Parse { line, message: format!("time `{field}` must be finite and non-negative") });
    }
    Ok(T::of(x))
}

/// Parses the format written by [`write_trajectory`]. Blank lines and lines
/// starting with `#` are skipped. Segments of one variable must tile `[0, horizon)`.
pub fn read_trajectory<T: Scalar>(text: &str, structure: &CtbnStructure) -> Result<Trajectory<T>, IoError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or(IoError::Parse { line: 1, message: "empty trajectory file".into() })?;
    let horizon: T = match header.split_once(',') {
        Some(("horizon", h)) => parse_time(h, hline)?,
        _ => return Err(IoError::Parse { line: hline, message: "expected `horizon,<seconds>` header".into() }),
    };
    let mut per_var: BTreeMap<String, Vec<(usize, Segment<T>)>> = BTreeMap::new();
    for (line, l) in lines {
        let fields: Vec<&str> = l.split(',').map(str::trim).collect();
        let [var, label, start, end] = fields[..] else {
            return Err(IoError::Parse { line, message: format!("expected 4 fields, found {}", fields.len()) });
        };
        let node = structure
            .node_index(var)
            .map(|i| structure.node(i))
            .ok_or_else(|| IoError::Parse { line, message: format!("unknown variable `{var}`") })?;
        let state = node
            .state_index(label)
            .ok_or_else(|| IoError::Parse { line, message: format!("`{var}` has no state `{label}`") })?;
        let (start, end): (T, T) = (parse_time(start, line)?, parse_time(end, line)?);
        if end <= start {
            return Err(IoError::Parse { line, message: "segment end must exceed its start".into() });
        }
        per_var.entry(var.to_string()).or_default().push((line, Segment::new(state, start, end)));
    }
    let mut tracks = Vec::with_capacity(per_var.len());
    for (var, mut segs) in per_var {
        segs.sort_by(|a, b| a.1.start.partial_cmp(&b.1.start).expect("finite"));
        let mut expect = T::zero();
        for (line, s) in &segs {
            if s.start < expect {
                return Err(IoError::Parse { line: *line, message: format!("segment of `{var}` overlaps the previous one") });
            }
            if s.start > expect {
                return Err(IoError::Parse { line: *line, message: format!("gap in `{var}` before {}", s.start) });
            }
            expect = s.end;
        }
        if expect != horizon {
            let line = segs.last().map_or(hline, |s| s.0);
            return Err(IoError::Parse { line, message: format!("`{var}` ends at {expect}, not at the horizon {horizon}") });
        }
        tracks.push(VariableTrack::new(var, segs.into_iter().map(|(_, s)| s).collect()));
    }
    Ok(Trajectory::new(horizon, tracks)?)
}

/// Columnar text: `time` then one `node=label` column per hidden node state.
pub fn track_to_text<T: Scalar>(track: &PosteriorTrack<T>) -> String {
    let hidden: Vec<usize> = (0..track.nodes.len()).filter(|&i| !track.observed[i]).collect();
    let mut out = String::from("time");
    for &i in &hidden {
        for label in track.nodes[i].state_labels() {
            out.push_str(&format!(",{}={}", track.nodes[i].name(), label));
        }
    }
    out.push('\n');
    for (k, t) in track.query_times.iter().enumerate() {
        out.push_str(&fmt_sig9(t.to_f64_lossy()));
        for &i in &hidden {
            for p in &track.marginals[i][k] {
                out.push(',');
                out.push_str(&fmt_sig9(p.to_f64_lossy()));
            }
        }
        out.push('\n');
    }
    out
}
