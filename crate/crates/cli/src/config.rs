//! Run configuration: command-line flags override a TOML config file, which
//! overrides built-in defaults. `CTBN_OUT_DIR` only supplies the default
//! output directory.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use aurec::recognize::{Backend, RecognizeConfig};
use clap::{Args, ValueEnum};
use ctbn::inference::GibbsConfig;
use serde::Deserialize;

pub const OUT_DIR_ENV: &str = "CTBN_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Exact,
    Gibbs,
}

/// Keys accepted in the `--config` file.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub backend: Option<BackendKind>,
    pub samples: Option<usize>,
    pub burn_in: Option<usize>,
    pub thinning: Option<usize>,
    pub chains: Option<usize>,
    pub uniformization_factor: Option<f64>,
    pub frame_rate: Option<f64>,
    pub threshold: Option<f64>,
    pub pseudo_dwell: Option<f64>,
    pub pseudo_count: Option<f64>,
    pub silence: Option<String>,
    pub roc_thresholds: Option<usize>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("{}", path.display()))
    }

    /// Flag, else config entry, else `CTBN_OUT_DIR`, else the working directory.
    pub fn out_dir(&self, flag: Option<PathBuf>) -> PathBuf {
        flag.or_else(|| self.output_dir.clone())
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn model(&self, flag: Option<PathBuf>) -> Result<PathBuf> {
        match flag.or_else(|| self.model.clone()) {
            Some(p) => Ok(p),
            None => bail!(crate::Usage("no model given; pass --model or set `model` in the config".into())),
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct InferenceArgs {
    /// Posterior backend [default: exact]
    #[arg(long, value_enum)]
    pub backend: Option<BackendKind>,
    /// Gibbs samples kept per chain [default: 2000]
    #[arg(long)]
    pub samples: Option<usize>,
    /// Gibbs sweeps discarded first [default: samples / 10]
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Keep every n-th Gibbs sweep [default: 1]
    #[arg(long)]
    pub thinning: Option<usize>,
    /// Independent Gibbs chains [default: 1]
    #[arg(long)]
    pub chains: Option<usize>,
    /// Uniformization rate over the largest exit rate [default: 2]
    #[arg(long)]
    pub uniformization_factor: Option<f64>,
    /// Random seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
}

impl InferenceArgs {
    pub fn backend(&self, config: &RunConfig) -> Result<Backend> {
        let kind = self.backend.or(config.backend).unwrap_or(BackendKind::Exact);
        if kind == BackendKind::Exact {
            return Ok(Backend::Exact);
        }
        let samples = self.samples.or(config.samples).unwrap_or(2000);
        let mut g = GibbsConfig::new(samples, self.seed.or(config.seed).unwrap_or(0));
        if let Some(b) = self.burn_in.or(config.burn_in) {
            g.burn_in = b;
        }
        if let Some(t) = self.thinning.or(config.thinning) {
            g.thinning = t;
        }
        if let Some(c) = self.chains.or(config.chains) {
            g.chains = c;
        }
        if let Some(f) = self.uniformization_factor.or(config.uniformization_factor) {
            g.uniformization_factor = f;
        }
        g.validate()?;
        Ok(Backend::Gibbs(g))
    }
}

pub fn frame_rate(flag: Option<f64>, config: &RunConfig) -> Result<f64> {
    let rate = flag.or(config.frame_rate).unwrap_or(aurec::DEFAULT_FRAME_RATE);
    if !(rate > 0.0) || !rate.is_finite() {
        bail!(crate::Usage(format!("frame rate must be positive, got {rate}")));
    }
    Ok(rate)
}

pub fn recognize_config(
    inference: &InferenceArgs,
    frame_rate_flag: Option<f64>,
    threshold: Option<f64>,
    config: &RunConfig,
) -> Result<RecognizeConfig> {
    Ok(RecognizeConfig {
        backend: inference.backend(config)?,
        frame_rate: frame_rate(frame_rate_flag, config)?,
        threshold: threshold.or(config.threshold).unwrap_or(0.5),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_config_beat_defaults() {
        let config: RunConfig = toml::from_str("backend = \"gibbs\"\nsamples = 50\nseed = 4\nchains = 2\n").unwrap();
        let args = InferenceArgs { samples: Some(80), ..InferenceArgs::default() };
        let Backend::Gibbs(g) = args.backend(&config).unwrap() else { panic!("config selects gibbs") };
        assert_eq!((g.n_samples, g.rng_seed, g.chains, g.burn_in, g.thinning), (80, 4, 2, 8, 1));
        let exact = InferenceArgs { backend: Some(BackendKind::Exact), ..InferenceArgs::default() };
        assert_eq!(exact.backend(&config).unwrap(), Backend::Exact);
        assert_eq!(InferenceArgs::default().backend(&RunConfig::default()).unwrap(), Backend::Exact);
        assert_eq!(frame_rate(None, &config).unwrap(), aurec::DEFAULT_FRAME_RATE);
    }

    #[test]
    fn config_rejects_unknown_keys() {
        assert!(toml::from_str::<RunConfig>("smaples = 3\n").is_err());
    }

    #[test]
    fn explicit_out_dir_wins() {
        let config = RunConfig { output_dir: Some("from-config".into()), ..RunConfig::default() };
        assert_eq!(config.out_dir(Some("flag".into())), PathBuf::from("flag"));
        assert_eq!(config.out_dir(None), PathBuf::from("from-config"));
    }
}
