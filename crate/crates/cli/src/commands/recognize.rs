use std::collections::BTreeSet;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use aurec::alphabet::SILENCE;
use aurec::recognize::recognize;
use aurec::segments::{load_segments, SegmentFile};
use aurec::{describe_model, OBSERVATION_NODE};

use crate::config::{recognize_config, InferenceArgs, RunConfig};
use crate::files::{collect, read, write_atomic};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Learned model document [default: config `model`]
    #[arg(long)]
    model: Option<PathBuf>,
    /// Recognizer segment files, or directories of `*.seg`
    #[arg(long, num_args = 1.., required = true)]
    segments: Vec<PathBuf>,
    #[command(flatten)]
    inference: InferenceArgs,
    /// Output frame rate [default: 59.94]
    #[arg(long)]
    frame_rate: Option<f64>,
    /// Decision threshold on the posterior; 1 never fires [default: 0.5]
    #[arg(long)]
    threshold: Option<f64>,
    /// Silence label of the model's alphabet [default: SIL]
    #[arg(long)]
    silence: Option<String>,
    /// Output directory [default: config `output_dir`, else $CTBN_OUT_DIR, else .]
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

pub fn run(args: Args, config: &RunConfig) -> Result<()> {
    let model_path = config.model(args.model)?;
    let model = super::load_model(&model_path)?;
    let silence = args.silence.or_else(|| config.silence.clone()).unwrap_or_else(|| SILENCE.to_string());
    let shape = describe_model(model.structure(), &silence).with_context(|| format!("{}", model_path.display()))?;
    let rc = recognize_config(&args.inference, args.frame_rate, args.threshold, config)?;
    let files = collect(&args.segments, "seg")?;
    if files.is_empty() {
        bail!(crate::Usage("no segment files given".into()));
    }
    let out = config.out_dir(args.out_dir);
    let mut seen = BTreeSet::new();
    for path in files {
        let ctx = || format!("{}", path.display());
        let file = SegmentFile::parse(&read(&path)?).with_context(ctx)?;
        if !seen.insert(file.utterance.clone()) {
            bail!(crate::Usage(format!("utterance `{}` appears twice (again in {})", file.utterance, path.display())));
        }
        let loaded = load_segments(&file, &shape.alphabet, OBSERVATION_NODE).with_context(ctx)?;
        if loaded.gaps_filled > 0 {
            super::note(format!("{}: filled {} uncovered stretches with silence", file.utterance, loaded.gaps_filled));
        }
        let rec = recognize(&model, &shape.codec, &loaded.trajectory, &file.utterance, &rc).with_context(ctx)?;
        for w in &rec.warnings {
            super::note(format!("{}: {w:?}", file.utterance));
        }
        write_atomic(&out.join(format!("{}.prob", file.utterance)), &rec.probabilities.to_text())?;
        write_atomic(&out.join(format!("{}.au", file.utterance)), &rec.decisions.to_text())?;
    }
    Ok(())
}
