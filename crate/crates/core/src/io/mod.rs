//! Text formats: model and statistics documents, trajectory files, posterior tracks.
//!
//! Model and statistics documents are JSON. Their floating-point values are
//! written in shortest round-trip form, so a read/write cycle is bit-exact.
//! Line-oriented payloads (trajectories, tracks) use [`fmt_sig9`].

mod document;
mod text;

use thiserror::Error;

pub use document::{
    model_from_json, model_to_json, stats_from_json, stats_to_json, structure_from_json, structure_to_json,
};
pub use text::{read_trajectory, track_to_text, write_trajectory};

use crate::model::ModelError;
use crate::trajectory::TrajectoryError;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid document: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
}

impl From<serde_json::Error> for IoError {
    fn from(e: serde_json::Error) -> Self {
        IoError::Json { line: e.line(), column: e.column(), message: e.to_string() }
    }
}

/// `%.9g`-style rendering: nine significant digits, trailing zeros trimmed,
/// scientific notation outside `[1e-4, 1e9)`.
pub fn fmt_sig9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        return format!("{}e{}{:02}", trim_zeros(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs());
    }
    let decimals = (8 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig9_matches_printf_g() {
        assert_eq!(fmt_sig9(0.5), "0.5");
        assert_eq!(fmt_sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(fmt_sig9(2.0 / 3.0), "0.666666667");
        assert_eq!(fmt_sig9(123456789.0), "123456789");
        assert_eq!(fmt_sig9(1234567890.0), "1.23456789e+09");
        assert_eq!(fmt_sig9(0.0001), "0.0001");
        assert_eq!(fmt_sig9(0.00001234), "1.234e-05");
        assert_eq!(fmt_sig9(-2.5), "-2.5");
        assert_eq!(fmt_sig9(-0.0), "0");
        assert_eq!(fmt_sig9(100.0), "100");
        assert_eq!(fmt_sig9(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn sig9_is_a_fixed_point_after_one_parse() {
        let mut x = 0.123_456_789_012_345_f64;
        for _ in 0..200 {
            let s = fmt_sig9(x);
            let y: f64 = s.parse().unwrap();
            assert_eq!(fmt_sig9(y), s);
            x = x * 7.3 + 0.011;
            if x > 1e12 {
                x /= 1e15;
            }
        }
    }
}
