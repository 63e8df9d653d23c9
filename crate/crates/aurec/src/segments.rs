//! Phoneme segment files and their conversion to evidence.
//!
//! ```text
//! utterance,<id>,<horizon seconds>
//! <phoneme>,<start>,<end>
//! ```

use ctbn::io::fmt_sig9;
use ctbn::trajectory::{Segment, Trajectory, VariableTrack};

use crate::{AurecError, PhonemeAlphabet};

#[derive(Debug, Clone, PartialEq)]
pub struct PhoneSegment {
    pub label: String,
    pub start: f64,
    pub end: f64,
    /// Source line, for diagnostics; 0 when built in memory.
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentFile {
    pub utterance: String,
    pub horizon: f64,
    pub segments: Vec<PhoneSegment>,
}

fn number(field: &str, line: usize) -> Result<f64, AurecError> {
    let x: f64 = field
        .trim()
        .parse()
        .map_err(|_| AurecError::Parse { line, message: format!("`{field}` is not a number") })?;
    if !x.is_finite() {
        return Err(AurecError::Parse { line, message: format!("`{field}` is not finite") });
    }
    Ok(x)
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

impl SegmentFile {
    /// Checks ordering and durations; labels are checked against an alphabet by [`load_segments`].
    pub fn new(utterance: impl Into<String>, horizon: f64, segments: Vec<PhoneSegment>) -> Result<Self, AurecError> {
        let utterance = utterance.into();
        if utterance.is_empty() || utterance.contains(',') {
            return Err(AurecError::Parse { line: 1, message: format!("bad utterance id `{utterance}`") });
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(AurecError::Parse { line: 1, message: format!("horizon {horizon} must be positive") });
        }
        let mut prev_end = 0.0;
        for s in &segments {
            if s.start < 0.0 || s.end <= s.start {
                return Err(AurecError::NegativeDuration { line: s.line });
            }
            if s.start < prev_end {
                return Err(AurecError::OverlappingSegments { line: s.line });
            }
            if s.end > horizon {
                return Err(AurecError::Parse { line: s.line, message: format!("segment ends after the horizon {horizon}") });
            }
            prev_end = s.end;
        }
        Ok(Self { utterance, horizon, segments })
    }

    pub fn parse(text: &str) -> Result<Self, AurecError> {
        let mut lines = content_lines(text);
        let (hline, header) = lines.next().ok_or(AurecError::Parse { line: 1, message: "empty segment file".into() })?;
        let fields: Vec<&str> = header.split(',').map(str::trim).collect();
        let ["utterance", id, horizon] = fields[..] else {
            return Err(AurecError::Parse { line: hline, message: "expected `utterance,<id>,<horizon>` header".into() });
        };
        let horizon = number(horizon, hline)?;
        let mut segments = Vec::new();
        for (line, l) in lines {
            let fields: Vec<&str> = l.split(',').map(str::trim).collect();
            let [label, start, end] = fields[..] else {
                return Err(AurecError::Parse { line, message: format!("expected 3 fields, found {}", fields.len()) });
            };
            segments.push(PhoneSegment { label: label.to_string(), start: number(start, line)?, end: number(end, line)?, line });
        }
        Self::new(id, horizon, segments)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("utterance,{},{}\n", self.utterance, fmt_sig9(self.horizon));
        for s in &self.segments {
            out.push_str(&format!("{},{},{}\n", s.label, fmt_sig9(s.start), fmt_sig9(s.end)));
        }
        out
    }
}

/// Evidence built from a segment file.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedSegments {
    pub trajectory: Trajectory<f64>,
    /// Uncovered stretches that were filled with silence.
    pub gaps_filled: usize,
}

/// Single-variable trajectory named `variable` covering `[0, horizon)`.
///
/// Gaps and leading or trailing uncovered time become silence; adjacent
/// segments with the same label are merged.
pub fn load_segments(file: &SegmentFile, alphabet: &PhonemeAlphabet, variable: &str) -> Result<LoadedSegments, AurecError> {
    let sil = alphabet.silence();
    let mut segs = Vec::with_capacity(file.segments.len() * 2 + 1);
    let mut cursor = 0.0;
    let mut gaps_filled = 0;
    for s in &file.segments {
        let state = alphabet
            .index(&s.label)
            .ok_or_else(|| AurecError::UnknownPhoneme { line: s.line, label: s.label.clone() })?;
        if s.start > cursor {
            segs.push(Segment::new(sil, cursor, s.start));
            gaps_filled += 1;
        }
        segs.push(Segment::new(state, s.start, s.end));
        cursor = s.end;
    }
    if cursor < file.horizon {
        segs.push(Segment::new(sil, cursor, file.horizon));
        gaps_filled += 1;
    }
    let track = VariableTrack::merged(variable, segs);
    Ok(LoadedSegments { trajectory: Trajectory::new(file.horizon, vec![track])?, gaps_filled })
}

/// Praat TextGrid (long text format) interval tier to a segment file.
///
/// Stress digits are stripped and labels upper-cased; empty, `sp` and `sil`
/// intervals are dropped and will be filled with silence on load.
pub fn textgrid_to_segments(text: &str, tier: &str, utterance: &str) -> Result<SegmentFile, AurecError> {
    struct Interval {
        xmin: Option<f64>,
        xmax: Option<f64>,
        text: Option<(String, usize)>,
    }
    let mut in_tier = false;
    let mut tier_is_target = false;
    let mut found = false;
    let mut tier_xmax = None;
    let mut intervals: Vec<Interval> = Vec::new();
    let mut current: Option<Interval> = None;
    for (line, l) in text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())) {
        if l.starts_with("item [") && !l.starts_with("item []") {
            if tier_is_target {
                break;
            }
            in_tier = true;
            continue;
        }
        if !in_tier {
            continue;
        }
        let Some((key, value)) = l.split_once('=') else {
            if l.starts_with("intervals [") {
                if tier_is_target {
                    if let Some(iv) = current.take() {
                        intervals.push(iv);
                    }
                    current = Some(Interval { xmin: None, xmax: None, text: None });
                }
            }
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        match key {
            "name" => {
                tier_is_target = unquote(value) == tier;
                found |= tier_is_target;
            }
            "xmin" | "xmax" | "text" if tier_is_target => match current.as_mut() {
                Some(iv) => match key {
                    "xmin" => iv.xmin = Some(number(value, line)?),
                    "xmax" => iv.xmax = Some(number(value, line)?),
                    _ => iv.text = Some((unquote(value), line)),
                },
                None if key == "xmax" => tier_xmax = Some(number(value, line)?),
                None => {}
            },
            _ => {}
        }
    }
    if let Some(iv) = current.take() {
        intervals.push(iv);
    }
    if !found {
        return Err(AurecError::Parse { line: 1, message: format!("no interval tier named `{tier}`") });
    }
    let horizon = tier_xmax.ok_or(AurecError::Parse { line: 1, message: format!("tier `{tier}` has no xmax") })?;
    let mut segments = Vec::new();
    for iv in intervals {
        let (Some(xmin), Some(xmax), Some((label, line))) = (iv.xmin, iv.xmax, iv.text) else {
            return Err(AurecError::Parse { line: 1, message: "incomplete interval".into() });
        };
        let label = label.trim().trim_end_matches(|c: char| c.is_ascii_digit()).to_uppercase();
        if label.is_empty() || label == "SP" || label == "SIL" || xmax <= xmin {
            continue;
        }
        segments.push(PhoneSegment { label, start: xmin, end: xmax, line });
    }
    SegmentFile::new(utterance, horizon, segments)
}

fn unquote(v: &str) -> String {
    let v = v.trim();
    let inner = v.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(v);
    inner.replace("\"\"", "\"")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(label: &str, start: f64, end: f64) -> PhoneSegment {
        PhoneSegment { label: label.into(), start, end, line: 0 }
    }

    #[test]
    fn gaps_become_silence() {
        let f = SegmentFile::new("u1", 0.6, vec![seg("B", 0.1, 0.2), seg("EY", 0.2, 0.5)]).unwrap();
        let a = PhonemeAlphabet::dataset();
        let l = load_segments(&f, &a, "O_p").unwrap();
        let segs = l.trajectory.tracks()[0].segments();
        let got: Vec<(usize, f64, f64)> = segs.iter().map(|s| (s.state, s.start, s.end)).collect();
        let (b, ey) = (a.index("B").unwrap(), a.index("EY").unwrap());
        assert_eq!(got, vec![(0, 0.0, 0.1), (b, 0.1, 0.2), (ey, 0.2, 0.5), (0, 0.5, 0.6)]);
        assert_eq!(l.gaps_filled, 2);
    }

    #[test]
    fn explicit_silence_merges_with_gaps() {
        let f = SegmentFile::new("u", 1.0, vec![seg("SIL", 0.2, 0.4), seg("B", 0.6, 0.7)]).unwrap();
        let l = load_segments(&f, &PhonemeAlphabet::dataset(), "O_p").unwrap();
        let segs = l.trajectory.tracks()[0].segments();
        assert_eq!(segs.len(), 3);
        assert_eq!((segs[0].start, segs[0].end), (0.0, 0.6));
    }

    #[test]
    fn alphabet_decides_labels() {
        let text = "utterance,u,1\nCH,0.1,0.3\nTH,0.3,0.5\n";
        let f = SegmentFile::parse(text).unwrap();
        assert!(load_segments(&f, &PhonemeAlphabet::cmudict(), "O_p").is_ok());
        match load_segments(&f, &PhonemeAlphabet::dataset(), "O_p") {
            Err(AurecError::UnknownPhoneme { line, label }) => assert_eq!((line, label.as_str()), (3, "TH")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_files() {
        assert!(matches!(
            SegmentFile::parse("utterance,u,1\nB,0.5,0.4\n"),
            Err(AurecError::NegativeDuration { line: 2 })
        ));
        assert!(matches!(
            SegmentFile::parse("utterance,u,1\nB,0.1,0.4\nM,0.3,0.5\n"),
            Err(AurecError::OverlappingSegments { line: 3 })
        ));
        assert!(matches!(SegmentFile::parse("B,0.1,0.4\n"), Err(AurecError::Parse { line: 1, .. })));
    }

    #[test]
    fn text_round_trip() {
        let text = "utterance,u7,1.25\nB,0.1,0.2\nEY,0.2,0.512345678\n";
        let f = SegmentFile::parse(text).unwrap();
        assert_eq!(f.to_text(), text);
    }

    #[test]
    fn textgrid_import() {
        let tg = r#"File type = "ooTextFile"
Object class = "TextGrid"

xmin = 0
xmax = 1.5
tiers? <exists>
size = 2
item []:
    item [1]:
        class = "IntervalTier"
        name = "phone"
        xmin = 0
        xmax = 1.5
        intervals: size = 4
        intervals [1]:
            xmin = 0
            xmax = 0.3
            text = "sil"
        intervals [2]:
            xmin = 0.3
            xmax = 0.5
            text = "B"
        intervals [3]:
            xmin = 0.5
            xmax = 0.9
            text = "EY1"
        intervals [4]:
            xmin = 0.9
            xmax = 1.5
            text = ""
    item [2]:
        class = "IntervalTier"
        name = "word"
        xmin = 0
        xmax = 1.5
        intervals: size = 1
        intervals [1]:
            xmin = 0
            xmax = 1.5
            text = "BAY"
"#;
        let f = textgrid_to_segments(tg, "phone", "u1").unwrap();
        assert_eq!(f.horizon, 1.5);
        let got: Vec<(&str, f64, f64)> = f.segments.iter().map(|s| (s.label.as_str(), s.start, s.end)).collect();
        assert_eq!(got, vec![("B", 0.3, 0.5), ("EY", 0.5, 0.9)]);
        let w = textgrid_to_segments(tg, "word", "u1").unwrap();
        assert_eq!(w.segments[0].label, "BAY");
        assert!(textgrid_to_segments(tg, "nope", "u1").is_err());
    }
}
