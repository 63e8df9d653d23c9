//! Per-AU posterior tracks from phoneme evidence.

use ctbn::inference::{
    exact_posterior, gibbs_posterior, map_decision, marginalize, GibbsConfig, InferenceWarning, PosteriorTrack,
};
use ctbn::model::CtbnModel;
use ctbn::trajectory::{frame_midpoints, Trajectory};

use crate::labels::{AuLabels, AuProbabilities};
use crate::{AuCodec, AurecError, ModelForm, AU_NODE, OBSERVATION_NODE};

#[derive(Debug, Clone, PartialEq)]
pub enum Backend {
    Exact,
    Gibbs(GibbsConfig<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecognizeConfig {
    pub backend: Backend,
    pub frame_rate: f64,
    pub threshold: f64,
}

impl Default for RecognizeConfig {
    fn default() -> Self {
        Self { backend: Backend::Exact, frame_rate: crate::DEFAULT_FRAME_RATE, threshold: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recognition {
    pub probabilities: AuProbabilities,
    pub decisions: AuLabels,
    pub warnings: Vec<InferenceWarning>,
}

/// Posterior probability of every AU at each frame midpoint, and its thresholded decision.
///
/// `evidence` must hold exactly the O_p track.
pub fn recognize(
    model: &CtbnModel<f64>,
    codec: &AuCodec,
    evidence: &Trajectory<f64>,
    utterance: &str,
    config: &RecognizeConfig,
) -> Result<Recognition, AurecError> {
    let form = ModelForm::of(model.structure(), codec)?;
    if evidence.tracks().len() != 1 || evidence.track(OBSERVATION_NODE).is_none() {
        return Err(AurecError::ModelShape(format!("evidence must be a single `{OBSERVATION_NODE}` track")));
    }
    let times = frame_midpoints(evidence.horizon(), config.frame_rate)?;
    let post: PosteriorTrack<f64> = match &config.backend {
        Backend::Exact => exact_posterior(model, evidence, &times)?,
        Backend::Gibbs(g) => gibbs_posterior(model, evidence, g, &times)?,
    };
    let probs: Vec<Vec<f64>> = match form {
        ModelForm::Joint => (0..codec.len()).map(|p| marginalize(&post, AU_NODE, p)).collect::<Result<_, _>>()?,
        ModelForm::Factorized => codec
            .names()
            .iter()
            .map(|name| {
                let m = post.node_marginals(name).expect("node checked by ModelForm::of");
                m.iter().map(|d| d[1]).collect()
            })
            .collect(),
    };
    let decisions: Vec<Vec<u8>> = probs.iter().map(|p| map_decision(p, config.threshold)).collect();
    Ok(Recognition {
        decisions: AuLabels::from_tracks(utterance, config.frame_rate, &decisions)?,
        probabilities: AuProbabilities {
            utterance: utterance.to_string(),
            frame_rate: config.frame_rate,
            names: codec.names(),
            times,
            probs,
        },
        warnings: post.warnings,
    })
}
