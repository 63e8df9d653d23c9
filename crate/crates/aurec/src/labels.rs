//! Frame-indexed AU files.
//!
//! Binary labels:
//!
//! ```text
//! au_labels,<id>,<frame rate>,<n frames>
//! 0001010        one digit per AU in codec order, one line per frame
//! ```
//!
//! Probability tracks:
//!
//! ```text
//! au_probs,<id>,<frame rate>,<n frames>
//! time,AU18,...,AU27
//! <midpoint>,<p>,...
//! ```

use ctbn::io::fmt_sig9;

use crate::AurecError;

#[derive(Debug, Clone, PartialEq)]
pub struct AuLabels {
    pub utterance: String,
    pub frame_rate: f64,
    /// `frames[k][au]` in codec order.
    pub frames: Vec<Vec<u8>>,
}

fn header<'a>(text: &'a str, tag: &str) -> Result<(String, f64, usize, std::iter::Skip<std::str::Lines<'a>>), AurecError> {
    let first = text.lines().next().unwrap_or("").trim();
    let fields: Vec<&str> = first.split(',').map(str::trim).collect();
    let bad = || AurecError::Parse { line: 1, message: format!("expected `{tag},<id>,<frame rate>,<n frames>` header") };
    if fields.len() != 4 || fields[0] != tag || fields[1].is_empty() {
        return Err(bad());
    }
    let rate: f64 = fields[2].parse().map_err(|_| bad())?;
    let n: usize = fields[3].parse().map_err(|_| bad())?;
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(AurecError::Parse { line: 1, message: "frame rate must be positive".into() });
    }
    Ok((fields[1].to_string(), rate, n, text.lines().skip(1)))
}

impl AuLabels {
    pub fn n_frames(&self) -> usize {
        self.frames.len()
    }

    /// Frames of the AU at codec position `pos`.
    pub fn track(&self, pos: usize) -> Vec<u8> {
        self.frames.iter().map(|f| f[pos]).collect()
    }

    /// Frames from per-AU tracks of equal length.
    pub fn from_tracks(utterance: impl Into<String>, frame_rate: f64, tracks: &[Vec<u8>]) -> Result<Self, AurecError> {
        let n = tracks.first().map_or(0, Vec::len);
        if tracks.iter().any(|t| t.len() != n) {
            return Err(AurecError::LengthMismatch("AU tracks differ in length".into()));
        }
        let frames = (0..n).map(|k| tracks.iter().map(|t| t[k]).collect()).collect();
        Ok(Self { utterance: utterance.into(), frame_rate, frames })
    }

    /// `width` is the number of AUs per line.
    pub fn parse(text: &str, width: usize) -> Result<Self, AurecError> {
        let (utterance, frame_rate, n, rest) = header(text, "au_labels")?;
        let mut frames = Vec::with_capacity(n);
        for (i, l) in rest.enumerate() {
            let line = i + 2;
            let l = l.trim();
            if l.is_empty() {
                continue;
            }
            if l.len() != width || !l.bytes().all(|b| b == b'0' || b == b'1') {
                return Err(AurecError::Parse { line, message: format!("expected {width} binary digits") });
            }
            frames.push(l.bytes().map(|b| b - b'0').collect());
        }
        if frames.len() != n {
            return Err(AurecError::LengthMismatch(format!("header declares {n} frames, file has {}", frames.len())));
        }
        Ok(Self { utterance, frame_rate, frames })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("au_labels,{},{},{}\n", self.utterance, fmt_sig9(self.frame_rate), self.frames.len());
        for f in &self.frames {
            out.extend(f.iter().map(|&b| if b != 0 { '1' } else { '0' }));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuProbabilities {
    pub utterance: String,
    pub frame_rate: f64,
    pub names: Vec<String>,
    pub times: Vec<f64>,
    /// `probs[au][frame]`
    pub probs: Vec<Vec<f64>>,
}

impl AuProbabilities {
    pub fn parse(text: &str) -> Result<Self, AurecError> {
        let (utterance, frame_rate, n, mut rest) = header(text, "au_probs")?;
        let cols = rest.next().unwrap_or("").trim().to_string();
        let mut names: Vec<String> = cols.split(',').map(|s| s.trim().to_string()).collect();
        if names.first().map(String::as_str) != Some("time") || names.len() < 2 {
            return Err(AurecError::Parse { line: 2, message: "expected `time,<AU>,...` column header".into() });
        }
        names.remove(0);
        let mut times = Vec::with_capacity(n);
        let mut probs = vec![Vec::with_capacity(n); names.len()];
        for (i, l) in rest.enumerate() {
            let line = i + 3;
            let l = l.trim();
            if l.is_empty() {
                continue;
            }
            let vals: Result<Vec<f64>, _> = l.split(',').map(|v| v.trim().parse::<f64>()).collect();
            let vals = vals.map_err(|_| AurecError::Parse { line, message: "non-numeric field".into() })?;
            if vals.len() != names.len() + 1 {
                return Err(AurecError::Parse { line, message: format!("expected {} fields", names.len() + 1) });
            }
            times.push(vals[0]);
            for (p, v) in probs.iter_mut().zip(&vals[1..]) {
                p.push(*v);
            }
        }
        if times.len() != n {
            return Err(AurecError::LengthMismatch(format!("header declares {n} frames, file has {}", times.len())));
        }
        Ok(Self { utterance, frame_rate, names, times, probs })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("au_probs,{},{},{}\n", self.utterance, fmt_sig9(self.frame_rate), self.times.len());
        out.push_str("time");
        for n in &self.names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for (k, t) in self.times.iter().enumerate() {
            out.push_str(&fmt_sig9(*t));
            for p in &self.probs {
                out.push(',');
                out.push_str(&fmt_sig9(p[k]));
            }
            out.push('\n');
        }
        out
    }
}
