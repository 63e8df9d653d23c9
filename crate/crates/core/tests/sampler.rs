mod common;

use common::*;
use ctbn::model::{amalgamate, ConditionalIntensityMatrix, CtbnModel, CtbnStructure};
use ctbn::trajectory::{rng_from_seed, sample_trajectory};
use rand::Rng;

fn single(rows: &[&[f64]]) -> CtbnModel<f64> {
    let s = CtbnStructure::new(vec![node("X", rows.len())], vec![vec![]]).unwrap();
    CtbnModel::with_uniform_initial(s, vec![vec![cim(rows)]]).unwrap()
}

/// Completed sojourns in `state`; the last, censored segment of each trajectory is skipped.
fn sojourns(model: &CtbnModel<f64>, state: usize, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut seed = 0;
    while out.len() < n {
        let t = sample_trajectory(model, 50.0, seed);
        seed += 1;
        let segs = t.tracks()[0].segments();
        for s in &segs[..segs.len() - 1] {
            if s.state == state && out.len() < n {
                out.push(s.end - s.start);
            }
        }
    }
    out
}

#[test]
fn sojourn_times_pass_ks_against_exponential() {
    let model = single(&[&[0.0, 2.0], &[3.0, 0.0]]);
    let mut x = sojourns(&model, 0, 10_000);
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    assert!((mean - 0.5).abs() <= 0.02, "mean sojourn {mean}");
    x.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let d = x
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let f = 1.0 - (-2.0 * t).exp();
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    // asymptotic Kolmogorov critical value at alpha = 0.01
    let critical = 1.628 / n.sqrt();
    assert!(d < critical, "KS statistic {d} >= {critical}");
}

#[test]
fn transition_frequencies_match_theta() {
    let model = single(&[&[0.0, 1.0, 3.0], &[0.5, 0.0, 0.5], &[2.0, 2.0, 0.0]]);
    let theta = model.cim(0, 0).transition_distribution(0).unwrap();
    let mut counts = [0usize; 3];
    let mut total = 0;
    let mut seed = 1000;
    while total < 50_000 {
        let t = sample_trajectory(&model, 200.0, seed);
        seed += 1;
        for (_, from, to) in t.tracks()[0].transitions() {
            if from == 0 && total < 50_000 {
                counts[to] += 1;
                total += 1;
            }
        }
    }
    let tv: f64 = 0.5 * counts.iter().zip(&theta).map(|(&c, &p)| (c as f64 / total as f64 - p).abs()).sum::<f64>();
    assert!(tv < 0.02, "total variation {tv}");
}

/// Gillespie simulation of the joint chain; returns the state at `t`.
fn joint_state_at(q: &[Vec<f64>], start: usize, t: f64, rng: &mut impl Rng) -> usize {
    let (mut s, mut now) = (start, 0.0);
    loop {
        let rate = -q[s][s];
        if rate <= 0.0 {
            return s;
        }
        let u: f64 = rng.random();
        now += -(1.0 - u).ln() / rate;
        if now >= t {
            return s;
        }
        let mut pick = rng.random::<f64>() * rate;
        for (j, &r) in q[s].iter().enumerate() {
            if j == s {
                continue;
            }
            if pick < r {
                s = j;
                break;
            }
            pick -= r;
        }
    }
}

#[test]
fn factored_sampler_matches_amalgamated_chain() {
    for model in [chain2(), cycle()] {
        let joint = amalgamate(&model).unwrap();
        let codec = joint.codec().clone();
        let dense = joint.to_dense().unwrap();
        let q: Vec<Vec<f64>> = (0..joint.n_states()).map(|i| dense.row(i).to_vec()).collect();
        let (n, t) = (50_000, 1.3);
        let mut ours = vec![0usize; joint.n_states()];
        let mut theirs = vec![0usize; joint.n_states()];
        let mut rng = rng_from_seed(99);
        for k in 0..n {
            let traj = sample_trajectory(&model, t, k as u64);
            let state: Vec<usize> = model
                .structure()
                .nodes()
                .iter()
                .map(|nd| traj.track(nd.name()).unwrap().segments().last().unwrap().state)
                .collect();
            ours[codec.encode(&state).unwrap()] += 1;
            let start = model.initial().sample(&mut rng);
            theirs[joint_state_at(&q, codec.encode(&start).unwrap(), t, &mut rng)] += 1;
        }
        let tv: f64 = 0.5 * ours.iter().zip(&theirs).map(|(&a, &b)| (a as f64 - b as f64).abs()).sum::<f64>() / n as f64;
        assert!(tv < 0.02, "total variation {tv}");
    }
}

#[test]
fn absorbing_model_holds_every_variable() {
    let s = CtbnStructure::new(vec![node("A", 3), node("B", 2)], vec![vec![1], vec![0]]).unwrap();
    let cims = vec![vec![ConditionalIntensityMatrix::zeros(3); 2], vec![ConditionalIntensityMatrix::zeros(2); 3]];
    let model = CtbnModel::with_uniform_initial(s, cims).unwrap();
    let t = sample_trajectory(&model, 4.0, 3);
    for track in t.tracks() {
        assert_eq!(track.segments().len(), 1);
        assert_eq!(track.segments()[0].end, 4.0);
    }
}

#[test]
fn same_seed_same_trajectory() {
    let model = ring64();
    assert_eq!(sample_trajectory(&model, 10.0, 5), sample_trajectory(&model, 10.0, 5));
    assert_ne!(sample_trajectory(&model, 10.0, 5), sample_trajectory(&model, 10.0, 6));
}
