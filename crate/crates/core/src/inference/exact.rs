use std::collections::HashMap;

use crate::inference::{BoundEvidence, InferenceError, PosteriorTrack};
use crate::linalg::{expm_action_scaled, rescale, Side, SparseGenerator};
use crate::model::{CtbnModel, StateCodec, DENSE_CAP};
use crate::trajectory::Evidence;
use crate::Scalar;

/// Exact forward–backward smoothing over the hidden joint space.
///
/// Between evidence changes the hidden joint process evolves under the
/// amalgamated generator restricted to evidence-consistent states, with the
/// rate of leaving the evidence configuration kept on the diagonal as a loss.
/// At each observed jump the forward message is multiplied by that jump's
/// rate. Messages are max-normalised and the log normaliser accumulated, which
/// yields `ln p(evidence | observed values at time 0)`.
pub fn exact_posterior<T: Scalar>(
    model: &CtbnModel<T>,
    evidence: &Evidence<T>,
    query_times: &[T],
) -> Result<PosteriorTrack<T>, InferenceError> {
    let bound = BoundEvidence::bind(model, evidence, query_times)?;
    let structure = model.structure();
    let codec = StateCodec::new(bound.hidden.iter().map(|&i| structure.cardinality(i)).collect())?;
    if codec.size() > DENSE_CAP {
        return Err(InferenceError::StateSpaceTooLarge { states: codec.size(), cap: DENSE_CAP });
    }
    let horizon = bound.horizon;

    // elementary intervals of constant evidence
    let mut bounds = vec![T::zero()];
    bounds.extend(evidence.change_times().into_iter().filter(|t| *t > T::zero() && *t < horizon));
    bounds.push(horizon);
    let n_int = bounds.len() - 1;
    let configs: Vec<Vec<Option<usize>>> = bounds[..n_int]
        .iter()
        .map(|&t| bound.tracks.iter().map(|tr| tr.map(|tr| tr.state_at(t).expect("non-empty"))).collect())
        .collect();

    let mut cache: HashMap<Vec<Option<usize>>, SparseGenerator<T>> = HashMap::new();
    for cfg in &configs {
        if !cache.contains_key(cfg) {
            let (_, g) = restricted_generator(model, cfg)?;
            cache.insert(cfg.clone(), g);
        }
    }
    let jumps: Vec<Option<Vec<T>>> = (0..n_int)
        .map(|k| if k == 0 { Ok(None) } else { jump_vector(model, &codec, &bound.hidden, &configs[k - 1], &configs[k], bounds[k]).map(Some) })
        .collect::<Result<_, _>>()?;

    // queries per interval
    let mut per_interval: Vec<Vec<usize>> = vec![Vec::new(); n_int];
    for (qi, &t) in query_times.iter().enumerate() {
        let k = bounds[1..n_int].partition_point(|b| *b <= t);
        per_interval[k].push(qi);
    }

    let mut full = vec![0usize; structure.len()];
    let mut alpha: Vec<T> = (0..codec.size())
        .map(|h| {
            fill_full(&codec, &bound.hidden, &configs[0], h, &mut full);
            model.initial().prob(&full)
        })
        .collect();
    if rescale(&mut alpha) == T::neg_infinity() {
        return Err(InferenceError::ZeroLikelihoodEvidence(": initial evidence has zero prior probability".into()));
    }
    let total: T = alpha.iter().copied().sum();
    alpha.iter_mut().for_each(|a| *a = *a / total);

    let zero_lik = |t: T| InferenceError::ZeroLikelihoodEvidence(format!(" (support vanishes by t = {t})"));
    let mut log_z = T::zero();
    let mut fwd: Vec<Vec<T>> = vec![Vec::new(); query_times.len()];
    for k in 0..n_int {
        let g = &cache[&configs[k]];
        if let Some(jv) = &jumps[k] {
            alpha.iter_mut().zip(jv).for_each(|(a, &r)| *a = *a * r);
            let s = rescale(&mut alpha);
            if !s.is_finite() {
                return Err(zero_lik(bounds[k]));
            }
            log_z = log_z + s;
        }
        let mut now = bounds[k];
        for &qi in &per_interval[k] {
            let (a, s) = expm_action_scaled(g, &alpha, query_times[qi] - now, Side::Left);
            if !s.is_finite() {
                return Err(zero_lik(query_times[qi]));
            }
            alpha = a;
            log_z = log_z + s;
            now = query_times[qi];
            fwd[qi] = alpha.clone();
        }
        let (a, s) = expm_action_scaled(g, &alpha, bounds[k + 1] - now, Side::Left);
        if !s.is_finite() {
            return Err(zero_lik(bounds[k + 1]));
        }
        alpha = a;
        log_z = log_z + s;
    }
    let log_evidence = log_z + alpha.iter().copied().sum::<T>().ln();

    let mut beta = vec![T::one(); codec.size()];
    let mut joint: Vec<Vec<T>> = vec![Vec::new(); query_times.len()];
    for k in (0..n_int).rev() {
        let g = &cache[&configs[k]];
        let mut now = bounds[k + 1];
        for &qi in per_interval[k].iter().rev() {
            let (b, s) = expm_action_scaled(g, &beta, now - query_times[qi], Side::Right);
            if !s.is_finite() {
                return Err(zero_lik(query_times[qi]));
            }
            beta = b;
            now = query_times[qi];
            let mut m: Vec<T> = fwd[qi].iter().zip(&beta).map(|(&a, &b)| a * b).collect();
            let z: T = m.iter().copied().sum();
            if !(z > T::zero()) {
                return Err(zero_lik(now));
            }
            m.iter_mut().for_each(|x| *x = *x / z);
            joint[qi] = m;
        }
        let (b, s) = expm_action_scaled(g, &beta, now - bounds[k], Side::Right);
        if !s.is_finite() {
            return Err(zero_lik(bounds[k]));
        }
        beta = b;
        if let Some(jv) = &jumps[k] {
            beta.iter_mut().zip(jv).for_each(|(b, &r)| *b = *b * r);
            if !rescale(&mut beta).is_finite() {
                return Err(zero_lik(bounds[k]));
            }
        }
    }

    let mut marginals = Vec::with_capacity(structure.len());
    for node in 0..structure.len() {
        let m = structure.cardinality(node);
        if bound.observed[node] {
            marginals.push(bound.observed_marginals(node, m, query_times));
            continue;
        }
        let pos = bound.hidden.iter().position(|&h| h == node).expect("hidden node");
        marginals.push(
            joint
                .iter()
                .map(|dist| {
                    let mut out = vec![T::zero(); m];
                    for (h, &p) in dist.iter().enumerate() {
                        let d = codec.digit(h, pos);
                        out[d] = out[d] + p;
                    }
                    out
                })
                .collect(),
        );
    }

    Ok(PosteriorTrack {
        query_times: query_times.to_vec(),
        nodes: structure.nodes().to_vec(),
        observed: bound.observed,
        marginals,
        hidden_joint: Some(joint),
        log_evidence: Some(log_evidence),
        warnings: Vec::new(),
    })
}

/// Generator over the hidden joint space with observed nodes clamped to `observed`
/// (`None` marks hidden nodes). Off-diagonals keep only hidden moves; the
/// diagonal carries every exit rate, including departures of observed nodes.
///
/// Returns the hidden codec (hidden nodes in index order) and the generator.
pub fn restricted_generator<T: Scalar>(
    model: &CtbnModel<T>,
    observed: &[Option<usize>],
) -> Result<(StateCodec, SparseGenerator<T>), InferenceError> {
    let structure = model.structure();
    let hidden: Vec<usize> = (0..structure.len()).filter(|&i| observed[i].is_none()).collect();
    let codec = StateCodec::new(hidden.iter().map(|&i| structure.cardinality(i)).collect())?;
    let mut full = vec![0usize; structure.len()];
    let mut rows = Vec::with_capacity(codec.size());
    let mut diag = Vec::with_capacity(codec.size());
    for h in 0..codec.size() {
        fill_full(&codec, &hidden, observed, h, &mut full);
        let mut row = Vec::new();
        let mut exit = T::zero();
        for node in 0..structure.len() {
            let cim = model.active_cim(node, &full);
            let from = full[node];
            exit = exit + cim.exit_rate(from);
            if observed[node].is_some() {
                continue;
            }
            let pos = hidden.iter().position(|&x| x == node).expect("hidden");
            for (to, &r) in cim.row(from).iter().enumerate() {
                if to != from && r > T::zero() {
                    row.push((codec.with_digit(h, pos, to), r));
                }
            }
        }
        rows.push(row);
        diag.push(-exit);
    }
    Ok((codec, SparseGenerator::from_rows(rows, diag)))
}

fn fill_full(codec: &StateCodec, hidden: &[usize], observed: &[Option<usize>], h: usize, full: &mut [usize]) {
    for (i, o) in observed.iter().enumerate() {
        if let Some(s) = o {
            full[i] = *s;
        }
    }
    for (pos, &node) in hidden.iter().enumerate() {
        full[node] = codec.digit(h, pos);
    }
}

/// Rate of the single observed jump between two consecutive evidence configurations,
/// as a function of the hidden joint state.
fn jump_vector<T: Scalar>(
    model: &CtbnModel<T>,
    codec: &StateCodec,
    hidden: &[usize],
    before: &[Option<usize>],
    after: &[Option<usize>],
    at: T,
) -> Result<Vec<T>, InferenceError> {
    let changed: Vec<usize> = (0..before.len()).filter(|&i| before[i] != after[i]).collect();
    let [node] = changed[..] else {
        return Err(InferenceError::ZeroLikelihoodEvidence(format!(
            ": {} observed variables change simultaneously at t = {at}",
            changed.len()
        )));
    };
    let (from, to) = (before[node].expect("observed"), after[node].expect("observed"));
    let mut full = vec![0usize; before.len()];
    Ok((0..codec.size())
        .map(|h| {
            fill_full(codec, hidden, before, h, &mut full);
            model.active_cim(node, &full).rate(from, to)
        })
        .collect())
}
