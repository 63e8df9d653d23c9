//! Writes the synthetic B-stop corpus to a directory:
//!
//! ```text
//! cargo run -p aurec --example synthetic_corpus -- <out dir> [count] [seed]
//! ```
//!
//! Produces `truth.json` (the generating model) and `phonemes/`, `recognized/`
//! and `labels/` with one `<utterance>.seg` / `.au` file each.

use std::path::Path;

use aurec::synthetic::{generate_corpus, model, ObservationNoise};
use aurec::DEFAULT_FRAME_RATE;
use ctbn::io::model_to_json;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let out = args.next().ok_or("usage: synthetic_corpus <out dir> [count] [seed]")?;
    let count: usize = args.next().map_or(Ok(20), |s| s.parse())?;
    let seed: u64 = args.next().map_or(Ok(1), |s| s.parse())?;
    let out = Path::new(&out);
    let truth = model(ObservationNoise::default());
    let corpus = generate_corpus(&truth, count, 3.0, DEFAULT_FRAME_RATE, seed)?;
    for dir in ["phonemes", "recognized", "labels"] {
        std::fs::create_dir_all(out.join(dir))?;
    }
    std::fs::write(out.join("truth.json"), model_to_json(&truth))?;
    for u in &corpus {
        let id = &u.labels.utterance;
        std::fs::write(out.join("phonemes").join(format!("{id}.seg")), u.phonemes.to_text())?;
        std::fs::write(out.join("recognized").join(format!("{id}.seg")), u.recognized.to_text())?;
        std::fs::write(out.join("labels").join(format!("{id}.au")), u.labels.to_text())?;
    }
    println!("wrote {} utterances to {}", corpus.len(), out.display());
    Ok(())
}
