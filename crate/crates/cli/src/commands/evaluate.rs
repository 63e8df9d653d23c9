use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use aurec::codec::DEFAULT_AUS;
use aurec::eval::{evaluate_run, roc_curve};
use aurec::labels::{AuLabels, AuProbabilities};
use aurec::AurecError;
use ctbn::io::fmt_sig9;

use crate::config::RunConfig;
use crate::files::{by_stem, read, write_atomic};

const DEFAULT_ROC_THRESHOLDS: usize = 200;

#[derive(Debug, clap::Args)]
pub struct EvalArgs {
    /// Directory of predicted `*.au` files (and optionally `*.prob`)
    #[arg(long)]
    pred: PathBuf,
    /// Directory of groundtruth `*.au` files
    #[arg(long)]
    truth: PathBuf,
    /// AU numbers in label column order [default: from the `*.prob` files, else 18,20,22,24,25,26,27]
    #[arg(long, value_delimiter = ',')]
    aus: Vec<u32>,
    /// Most operating points per ROC curve [default: 200]
    #[arg(long)]
    roc_thresholds: Option<usize>,
    /// Output directory [default: config `output_dir`, else $CTBN_OUT_DIR, else .]
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct RocArgs {
    /// Directory of `*.prob` files
    #[arg(long)]
    probs: PathBuf,
    /// Directory of groundtruth `*.au` files
    #[arg(long)]
    truth: PathBuf,
    /// Most operating points per curve [default: 200]
    #[arg(long)]
    roc_thresholds: Option<usize>,
    /// Output directory [default: config `output_dir`, else $CTBN_OUT_DIR, else .]
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

/// Same utterance ids on both sides, or an error naming the difference.
fn matched(what: &str, pred: &BTreeMap<String, PathBuf>, truth: &BTreeMap<String, PathBuf>) -> Result<()> {
    let only_pred: Vec<&str> = pred.keys().filter(|k| !truth.contains_key(*k)).map(String::as_str).collect();
    let only_truth: Vec<&str> = truth.keys().filter(|k| !pred.contains_key(*k)).map(String::as_str).collect();
    if !only_pred.is_empty() || !only_truth.is_empty() {
        bail!(crate::Usage(format!(
            "utterance sets differ: only in {what} [{}], only in truth [{}]",
            only_pred.join(" "),
            only_truth.join(" ")
        )));
    }
    if truth.is_empty() {
        bail!(crate::Usage("no utterances to evaluate".into()));
    }
    Ok(())
}

fn labels(path: &Path, width: usize) -> Result<AuLabels> {
    AuLabels::parse(&read(path)?, width).with_context(|| format!("{}", path.display()))
}

fn probs(path: &Path) -> Result<AuProbabilities> {
    AuProbabilities::parse(&read(path)?).with_context(|| format!("{}", path.display()))
}

fn frames_agree(id: &str, pred: usize, truth: usize) -> Result<()> {
    if pred != truth {
        bail!(AurecError::LengthMismatch(format!("{id}: {pred} predicted frames against {truth} groundtruth frames")));
    }
    Ok(())
}

/// Pooled per-AU frame tracks over all utterances.
fn pooled(n_aus: usize) -> Vec<Vec<u8>> {
    vec![Vec::new(); n_aus]
}

fn write_roc(
    prob_files: &BTreeMap<String, PathBuf>,
    truth_files: &BTreeMap<String, PathBuf>,
    thresholds: usize,
    out: &Path,
) -> Result<()> {
    let mut names: Option<Vec<String>> = None;
    let (mut p_all, mut t_all): (Vec<Vec<f64>>, Vec<Vec<u8>>) = (Vec::new(), Vec::new());
    for (id, path) in prob_files {
        let p = probs(path)?;
        match &names {
            None => {
                p_all = vec![Vec::new(); p.names.len()];
                t_all = pooled(p.names.len());
                names = Some(p.names.clone());
            }
            Some(n) if *n != p.names => {
                bail!(AurecError::LengthMismatch(format!("{id}: AU columns differ from the other probability files")));
            }
            _ => {}
        }
        let t = labels(&truth_files[id], p.names.len())?;
        frames_agree(id, p.times.len(), t.n_frames())?;
        for (a, col) in p.probs.iter().enumerate() {
            p_all[a].extend(col);
            t_all[a].extend(t.track(a));
        }
    }
    let names = names.unwrap_or_default();
    let mut auc = String::from("au,auc\n");
    for (a, name) in names.iter().enumerate() {
        let roc = roc_curve(&p_all[a], &t_all[a], thresholds)?;
        write_atomic(&out.join(format!("roc_{name}.txt")), &roc.to_text())?;
        auc.push_str(&format!("{name},{}\n", fmt_sig9(roc.auc)));
    }
    write_atomic(&out.join("auc.txt"), &auc)
}

pub fn run_eval(args: EvalArgs, config: &RunConfig) -> Result<()> {
    let pred = by_stem(&args.pred, "au")?;
    let truth = by_stem(&args.truth, "au")?;
    matched("predictions", &pred, &truth)?;
    let prob_files = by_stem(&args.pred, "prob")?;
    let have_probs = !prob_files.is_empty() && truth.keys().all(|k| prob_files.contains_key(k));
    let names: Vec<String> = if !args.aus.is_empty() {
        args.aus.iter().map(|a| format!("AU{a}")).collect()
    } else if have_probs {
        probs(prob_files.values().next().expect("non-empty"))?.names
    } else {
        DEFAULT_AUS.iter().map(|a| format!("AU{a}")).collect()
    };
    let (mut p_all, mut t_all) = (pooled(names.len()), pooled(names.len()));
    for (id, path) in &pred {
        let p = labels(path, names.len())?;
        let t = labels(&truth[id], names.len())?;
        frames_agree(id, p.n_frames(), t.n_frames())?;
        for a in 0..names.len() {
            p_all[a].extend(p.track(a));
            t_all[a].extend(t.track(a));
        }
    }
    let table = evaluate_run(&names, &p_all, &t_all)?;
    let out = config.out_dir(args.out_dir);
    write_atomic(&out.join("metrics.txt"), &table.to_text())?;
    if have_probs {
        let thresholds = args.roc_thresholds.or(config.roc_thresholds).unwrap_or(DEFAULT_ROC_THRESHOLDS);
        let probs: BTreeMap<String, PathBuf> =
            prob_files.into_iter().filter(|(k, _)| truth.contains_key(k)).collect();
        write_roc(&probs, &truth, thresholds, &out)?;
    }
    Ok(())
}

pub fn run_roc(args: RocArgs, config: &RunConfig) -> Result<()> {
    let prob_files = by_stem(&args.probs, "prob")?;
    let truth = by_stem(&args.truth, "au")?;
    matched("probabilities", &prob_files, &truth)?;
    let thresholds = args.roc_thresholds.or(config.roc_thresholds).unwrap_or(DEFAULT_ROC_THRESHOLDS);
    write_roc(&prob_files, &truth, thresholds, &config.out_dir(args.out_dir))
}
