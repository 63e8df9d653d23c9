use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use aurec::alphabet::SILENCE;
use aurec::labels::AuLabels;
use aurec::segments::SegmentFile;
use aurec::training::{build_training_trajectories, ObservationSource, TrainingUtterance};
use aurec::{build_factorized_model, build_joint_model, describe_model, AuCodec, ModelForm, PhonemeAlphabet};
use ctbn::io::{model_to_json, read_trajectory, stats_to_json, structure_from_json};
use ctbn::learning::{collect_stats, learn_initial_distribution, mle, Pseudocounts, ZeroDwell};
use ctbn::model::{CtbnModel, CtbnStructure};
use ctbn::trajectory::Trajectory;

use crate::config::{frame_rate, RunConfig};
use crate::files::{by_stem, collect, read, write_atomic};

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum FormArg {
    Joint,
    Factorized,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Structure or model document; required with --data, otherwise built from
    /// --alphabet, --aus, --form and --au-link
    #[arg(long)]
    structure: Option<PathBuf>,
    /// Complete trajectory files, or directories of `*.traj`
    #[arg(long, num_args = 1.., conflicts_with_all = ["phonemes", "labels"])]
    data: Vec<PathBuf>,
    /// Directory of groundtruth phoneme `*.seg` files
    #[arg(long, requires = "labels")]
    phonemes: Option<PathBuf>,
    /// Directory of frame-labeled `*.au` files, one per phoneme file
    #[arg(long, requires = "phonemes")]
    labels: Option<PathBuf>,
    /// Directory of recognizer output `*.seg` files to train O_p on
    #[arg(long)]
    recognized: Option<PathBuf>,
    /// Train O_p on the groundtruth phonemes even where recognizer output exists
    #[arg(long)]
    groundtruth_observations: bool,
    /// `dataset`, `cmudict`, or comma-separated phonemes (silence is added first)
    #[arg(long, default_value = "dataset")]
    alphabet: String,
    /// AU numbers in codec order, most significant first
    #[arg(long, value_delimiter = ',', default_values_t = aurec::codec::DEFAULT_AUS)]
    aus: Vec<u32>,
    #[arg(long, value_enum, default_value = "joint")]
    form: FormArg,
    /// Directed AU link of the factorized form, as FROM:TO (e.g. AU24:AU25)
    #[arg(long = "au-link")]
    au_links: Vec<String>,
    /// Pseudo dwell time per context in seconds [default: 0.01]
    #[arg(long)]
    pseudo_dwell: Option<f64>,
    /// Pseudo transition count per context [default: 0.01]
    #[arg(long)]
    pseudo_count: Option<f64>,
    /// Frame rate of the AU labels [default: 59.94]
    #[arg(long)]
    frame_rate: Option<f64>,
    /// Silence label of the alphabet [default: SIL]
    #[arg(long)]
    silence: Option<String>,
    /// Output directory [default: config `output_dir`, else $CTBN_OUT_DIR, else .]
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn read_structure(path: &Path) -> Result<CtbnStructure> {
    structure_from_json(&read(path)?).with_context(|| format!("{}", path.display()))
}

fn alphabet(spec: &str, silence: &str) -> Result<PhonemeAlphabet> {
    Ok(match spec {
        "dataset" => PhonemeAlphabet::dataset(),
        "cmudict" => PhonemeAlphabet::cmudict(),
        list => {
            let mut labels = vec![silence.to_string()];
            labels.extend(list.split(',').map(|l| l.trim().to_string()).filter(|l| !l.is_empty()));
            PhonemeAlphabet::new(labels, silence)?
        }
    })
}

fn au_structure(args: &Args, silence: &str) -> Result<(CtbnStructure, ModelForm, AuCodec, PhonemeAlphabet)> {
    if let Some(path) = &args.structure {
        let structure = read_structure(path)?;
        let shape = describe_model(&structure, silence).with_context(|| format!("{}", path.display()))?;
        return Ok((structure, shape.form, shape.codec, shape.alphabet));
    }
    let alphabet = alphabet(&args.alphabet, silence)?;
    let codec = AuCodec::new(args.aus.clone())?;
    let (structure, form) = match args.form {
        FormArg::Joint => {
            if !args.au_links.is_empty() {
                bail!(crate::Usage("--au-link needs --form factorized".into()));
            }
            (build_joint_model(&alphabet, &codec)?, ModelForm::Joint)
        }
        FormArg::Factorized => {
            let links = args
                .au_links
                .iter()
                .map(|l| {
                    l.split_once(':')
                        .map(|(a, b)| (a.trim().to_string(), b.trim().to_string()))
                        .ok_or_else(|| crate::Usage(format!("AU link `{l}` is not FROM:TO")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            (build_factorized_model(&alphabet, &codec, &links)?, ModelForm::Factorized)
        }
    };
    Ok((structure, form, codec, alphabet))
}

fn differing_ids(what: &str, a: &BTreeMap<String, PathBuf>, b: &BTreeMap<String, PathBuf>) -> Result<()> {
    let only_a: Vec<&str> = a.keys().filter(|k| !b.contains_key(*k)).map(String::as_str).collect();
    let only_b: Vec<&str> = b.keys().filter(|k| !a.contains_key(*k)).map(String::as_str).collect();
    if !only_a.is_empty() || !only_b.is_empty() {
        bail!(crate::Usage(format!(
            "{what}: only phonemes for [{}], only labels for [{}]",
            only_a.join(" "),
            only_b.join(" ")
        )));
    }
    Ok(())
}

fn segment_file(path: &Path) -> Result<SegmentFile> {
    SegmentFile::parse(&read(path)?).with_context(|| format!("{}", path.display()))
}

fn describe_context(structure: &CtbnStructure, node: usize, instantiation: usize) -> String {
    let parents = structure.parents(node);
    if parents.is_empty() {
        return "-".into();
    }
    let states = structure.parent_codec(node).decode(instantiation).unwrap_or_default();
    parents
        .iter()
        .zip(states)
        .map(|(&p, s)| format!("{}={}", structure.node(p).name(), structure.node(p).state_labels()[s]))
        .collect::<Vec<_>>()
        .join(";")
}

fn report(structure: &CtbnStructure, n: usize, warnings: &[ZeroDwell], extra: &[(&str, usize)]) -> String {
    let mut out = format!("trajectories,{n}\n");
    for (k, v) in extra {
        out.push_str(&format!("{k},{v}\n"));
    }
    out.push_str(&format!("zero_dwell_contexts,{}\nnode,context,state,absorbing\n", warnings.len()));
    for w in warnings {
        out.push_str(&format!(
            "{},{},{},{}\n",
            structure.node(w.node).name(),
            describe_context(structure, w.node, w.instantiation),
            structure.node(w.node).state_labels()[w.state],
            w.absorbing
        ));
    }
    out
}

pub fn run(args: Args, config: &RunConfig) -> Result<()> {
    let silence = args.silence.clone().or_else(|| config.silence.clone()).unwrap_or_else(|| SILENCE.to_string());
    let pseudo = Pseudocounts {
        dwell: args.pseudo_dwell.or(config.pseudo_dwell).unwrap_or(Pseudocounts::<f64>::default().dwell),
        count: args.pseudo_count.or(config.pseudo_count).unwrap_or(Pseudocounts::<f64>::default().count),
    };
    let mut extra = Vec::new();
    let (structure, data): (CtbnStructure, Vec<Trajectory<f64>>) = match (&args.phonemes, &args.labels) {
        (Some(phonemes), Some(labels)) => {
            let (structure, form, codec, alphabet) = au_structure(&args, &silence)?;
            let phone_files = by_stem(phonemes, "seg")?;
            let label_files = by_stem(labels, "au")?;
            differing_ids("utterance sets differ", &phone_files, &label_files)?;
            let recognized = match &args.recognized {
                Some(dir) => by_stem(dir, "seg")?,
                None => BTreeMap::new(),
            };
            let mut utts = Vec::with_capacity(phone_files.len());
            for (id, path) in &phone_files {
                let label_path = &label_files[id];
                utts.push(TrainingUtterance {
                    phonemes: segment_file(path)?,
                    recognized: recognized.get(id).map(|p| segment_file(p)).transpose()?,
                    labels: AuLabels::parse(&read(label_path)?, codec.len())
                        .with_context(|| format!("{}", label_path.display()))?,
                });
            }
            let source = if args.groundtruth_observations {
                ObservationSource::Groundtruth
            } else {
                ObservationSource::PreferRecognized
            };
            let set = build_training_trajectories(&utts, &alphabet, &codec, form, source, frame_rate(args.frame_rate, config)?)?;
            if set.gaps_filled > 0 {
                super::note(format!("filled {} phoneme gaps with silence", set.gaps_filled));
            }
            if set.simultaneous_flips > 0 {
                super::note(format!("staggered {} simultaneous AU flips", set.simultaneous_flips));
            }
            extra.push(("simultaneous_flips", set.simultaneous_flips));
            extra.push(("gaps_filled", set.gaps_filled));
            (structure, set.trajectories)
        }
        _ => {
            let path = args
                .structure
                .as_ref()
                .ok_or_else(|| crate::Usage("--data needs --structure".into()))?;
            let structure = read_structure(path)?;
            let mut data = Vec::new();
            for file in collect(&args.data, "traj")? {
                let traj = read_trajectory(&read(&file)?, &structure).with_context(|| format!("{}", file.display()))?;
                data.push(traj);
            }
            (structure, data)
        }
    };
    if data.is_empty() {
        bail!(ctbn::learning::LearnError::EmptyData);
    }
    let stats = collect_stats(&structure, &data)?;
    let fit = mle(&stats, pseudo);
    let initial = learn_initial_distribution(&structure, &data)?;
    let model = CtbnModel::new(structure.clone(), fit.cims, initial)?;
    if !fit.warnings.is_empty() {
        super::note(format!("{} contexts were never visited; see learn_report.txt", fit.warnings.len()));
    }
    let out = config.out_dir(args.out_dir);
    write_atomic(&out.join("model.json"), &model_to_json(&model))?;
    write_atomic(&out.join("stats.json"), &stats_to_json(&structure, &stats))?;
    write_atomic(&out.join("learn_report.txt"), &report(&structure, data.len(), &fit.warnings, &extra))?;
    Ok(())
}
