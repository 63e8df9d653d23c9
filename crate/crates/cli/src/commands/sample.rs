use std::path::PathBuf;

use anyhow::{bail, Result};
use ctbn::io::write_trajectory;
use ctbn::trajectory::sample_trajectory;

use crate::config::RunConfig;
use crate::files::write_atomic;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Model document (JSON)
    #[arg(long)]
    model: Option<PathBuf>,
    /// Length of each trajectory in seconds
    #[arg(long)]
    horizon: f64,
    /// Number of trajectories
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Trajectory k is drawn with seed + k [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// File name prefix
    #[arg(long, default_value = "traj")]
    prefix: String,
    /// Output directory [default: config `output_dir`, else $CTBN_OUT_DIR, else .]
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

pub fn run(args: Args, config: &RunConfig) -> Result<()> {
    let model = super::load_model(&config.model(args.model)?)?;
    if !(args.horizon > 0.0) || !args.horizon.is_finite() {
        bail!(crate::Usage(format!("horizon must be positive, got {}", args.horizon)));
    }
    let seed = args.seed.or(config.seed).unwrap_or(0);
    let out = config.out_dir(args.out_dir);
    for k in 0..args.count {
        let traj = sample_trajectory(&model, args.horizon, seed.wrapping_add(k as u64));
        let text = write_trajectory(&traj, model.structure())?;
        write_atomic(&out.join(format!("{}_{k:04}.traj", args.prefix)), &text)?;
    }
    Ok(())
}
