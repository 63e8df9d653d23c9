use std::path::PathBuf;

use anyhow::{Context, Result};
use aurec::recognize::Backend;
use ctbn::inference::{default_query_times, exact_posterior, gibbs_posterior};
use ctbn::io::{fmt_sig9, read_trajectory, track_to_text};

use crate::config::{frame_rate, InferenceArgs, RunConfig};
use crate::files::{read, stem, write_atomic};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Model document [default: config `model`]
    #[arg(long)]
    model: Option<PathBuf>,
    /// Trajectory file holding the observed nodes; nodes it omits are hidden
    #[arg(long)]
    evidence: PathBuf,
    #[command(flatten)]
    inference: InferenceArgs,
    /// Query grid: evidence change points plus the midpoint of every frame [default: 59.94]
    #[arg(long)]
    frame_rate: Option<f64>,
    /// Output directory [default: config `output_dir`, else $CTBN_OUT_DIR, else .]
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

pub fn run(args: Args, config: &RunConfig) -> Result<()> {
    let model = super::load_model(&config.model(args.model)?)?;
    let evidence = read_trajectory(&read(&args.evidence)?, model.structure())
        .with_context(|| format!("{}", args.evidence.display()))?;
    let times = default_query_times(&evidence, frame_rate(args.frame_rate, config)?)?;
    let post = match args.inference.backend(config)? {
        Backend::Exact => exact_posterior(&model, &evidence, &times)?,
        Backend::Gibbs(g) => gibbs_posterior(&model, &evidence, &g, &times)?,
    };
    for w in &post.warnings {
        super::note(format!("{w:?}"));
    }
    let out = config.out_dir(args.out_dir).join(format!("{}.post", stem(&args.evidence)));
    write_atomic(&out, &track_to_text(&post))?;
    if let Some(ll) = post.log_evidence {
        println!("log_evidence={}", fmt_sig9(ll));
    }
    Ok(())
}
