use std::path::PathBuf;

use anyhow::{Context, Result};
use aurec::segments::textgrid_to_segments;

use crate::config::RunConfig;
use crate::files::{read, stem, write_atomic};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Praat TextGrid in long text format
    #[arg(long)]
    textgrid: PathBuf,
    /// Interval tier holding the phonemes
    #[arg(long, default_value = "phone")]
    tier: String,
    /// Utterance id [default: the TextGrid file stem]
    #[arg(long)]
    utterance: Option<String>,
    /// Output directory [default: config `output_dir`, else $CTBN_OUT_DIR, else .]
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

pub fn run(args: Args, config: &RunConfig) -> Result<()> {
    let text = read(&args.textgrid)?;
    let id = args.utterance.unwrap_or_else(|| stem(&args.textgrid));
    let file = textgrid_to_segments(&text, &args.tier, &id).with_context(|| format!("{}", args.textgrid.display()))?;
    write_atomic(&config.out_dir(args.out_dir).join(format!("{id}.seg")), &file.to_text())
}
