mod common;

use common::*;
use ctbn::learning::{collect_stats, fit_model, log_likelihood_from_stats, mle, Pseudocounts, SufficientStats};
use ctbn::model::{ConditionalIntensityMatrix, CtbnModel, CtbnStructure};
use ctbn::trajectory::{rng_from_seed, sample_trajectory, Segment, Trajectory, VariableTrack};
use proptest::prelude::*;
use rand::Rng;

/// X -> Y, both binary.
pub fn truth2() -> CtbnModel<f64> {
    let s = CtbnStructure::new(vec![node("X", 2), node("Y", 2)], vec![vec![], vec![0]]).unwrap();
    CtbnModel::with_uniform_initial(
        s,
        vec![
            vec![cim(&[&[0.0, 0.6], &[0.9, 0.0]])],
            vec![cim(&[&[0.0, 0.4], &[1.6, 0.0]]), cim(&[&[0.0, 2.2], &[0.7, 0.0]])],
        ],
    )
    .unwrap()
}

fn relative_errors(fit: &CtbnModel<f64>, truth: &CtbnModel<f64>) -> Vec<f64> {
    let mut out = Vec::new();
    for node in 0..truth.len() {
        for (a, b) in fit.cims(node).iter().zip(truth.cims(node)) {
            for i in 0..b.size() {
                for j in 0..b.size() {
                    if i != j {
                        out.push((a.rate(i, j) - b.rate(i, j)).abs() / b.rate(i, j));
                    }
                }
            }
        }
    }
    out
}

fn sample_set(model: &CtbnModel<f64>, n: usize, horizon: f64, seed: u64) -> Vec<Trajectory<f64>> {
    (0..n as u64).map(|k| sample_trajectory(model, horizon, seed.wrapping_mul(1_000_003).wrapping_add(k))).collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Equal up to a few units in the last place.
fn close(a: f64, b: f64) {
    assert!((a - b).abs() <= 4.0 * f64::EPSILON * b.abs(), "{a} vs {b}");
}

#[test]
fn hand_trajectories_reproduce_closed_form_estimates() {
    // X flips 0->1 at 0.7, 1->0 at 1.9, 0->1 at 3.2; Y flips at 1.0 and 2.5
    let s = CtbnStructure::new(vec![node("X", 2), node("Y", 2)], vec![vec![], vec![0]]).unwrap();
    let x = VariableTrack::new(
        "X",
        vec![Segment::new(0, 0.0, 0.7), Segment::new(1, 0.7, 1.9), Segment::new(0, 1.9, 3.2), Segment::new(1, 3.2, 4.0)],
    );
    let y = VariableTrack::new("Y", vec![Segment::new(0, 0.0, 1.0), Segment::new(1, 1.0, 2.5), Segment::new(0, 2.5, 4.0)]);
    let traj = Trajectory::new(4.0, vec![x, y]).unwrap();
    let stats = collect_stats(&s, &[traj]).unwrap();
    let fit = mle(&stats, Pseudocounts::none());

    // X: T[0] = 0.7 + 1.3, T[1] = 1.2 + 0.8; N[0,1] = 2, N[1,0] = 1
    let x = &fit.cims[0][0];
    close(x.rate(0, 1), 2.0 / 2.0);
    close(x.rate(1, 0), 1.0 / 2.0);
    // Y given X=1: Y=0 on [0.7,1.0) and [3.2,4.0), jumps once; Y=1 on [1.0,1.9)
    let y1 = &fit.cims[1][1];
    close(stats.node(1).dwell(1, 0), 1.1);
    close(stats.node(1).dwell(1, 1), 0.9);
    close(y1.rate(0, 1), 1.0 / 1.1);
    assert_eq!(y1.rate(1, 0), 0.0);
    // Y given X=0: Y=0 on [0,0.7) and [2.5,3.2), never jumps; Y=1 on [1.9,2.5), jumps once
    let y0 = &fit.cims[1][0];
    assert_eq!(y0.rate(0, 1), 0.0);
    close(y0.rate(1, 0), 1.0 / 0.6);
    close(stats.node(1).dwell(0, 0), 1.4);
}

#[test]
fn gradient_vanishes_at_the_estimate() {
    let mut rng = rng_from_seed(2024);
    for case in 0..20 {
        let structure = match case % 3 {
            0 => CtbnStructure::new(vec![node("A", 2), node("B", 3)], vec![vec![1], vec![0]]).unwrap(),
            1 => CtbnStructure::new(vec![node("A", 3)], vec![vec![]]).unwrap(),
            _ => CtbnStructure::new(vec![node("A", 2), node("B", 2), node("C", 2)], vec![vec![], vec![0], vec![0, 1]])
                .unwrap(),
        };
        let truth = random_model(structure.clone(), 0.5, 2.0, &mut rng);
        let data = sample_set(&truth, 40, 10.0, rng.random());
        let stats = collect_stats(&structure, &data).unwrap();
        let fit = mle(&stats, Pseudocounts::none());
        let ll = |cims: &Vec<Vec<ConditionalIntensityMatrix<f64>>>| {
            let m = CtbnModel::with_uniform_initial(structure.clone(), cims.clone()).unwrap();
            log_likelihood_from_stats(&m, &stats).unwrap()
        };
        let mut worst = 0.0f64;
        for node in 0..structure.len() {
            for v in 0..structure.n_parent_instantiations(node) {
                let k = structure.cardinality(node);
                for i in 0..k {
                    for j in 0..k {
                        let q = fit.cims[node][v].rate(i, j);
                        if i == j || q == 0.0 {
                            continue;
                        }
                        let h = 1e-6 * q;
                        let bump = |d: f64| {
                            let mut cims = fit.cims.clone();
                            let mut rows = cims[node][v].to_rows();
                            rows[i][j] += d;
                            cims[node][v] = ConditionalIntensityMatrix::from_off_diagonal(&rows).unwrap();
                            ll(&cims)
                        };
                        let g = (bump(h) - bump(-h)) / (2.0 * h);
                        worst = worst.max(g.abs());
                    }
                }
            }
        }
        assert!(worst < 1e-4, "case {case}: gradient {worst}");
    }
}

#[test]
fn mle_beats_random_perturbations() {
    let truth = truth2();
    let data = sample_set(&truth, 30, 10.0, 5);
    let stats = collect_stats(truth.structure(), &data).unwrap();
    let fit = mle(&stats, Pseudocounts::none());
    let fitted = CtbnModel::with_uniform_initial(truth.structure().clone(), fit.cims.clone()).unwrap();
    let best = log_likelihood_from_stats(&fitted, &stats).unwrap();
    let mut rng = rng_from_seed(6);
    for _ in 0..100 {
        let cims = fit
            .cims
            .iter()
            .map(|t| {
                t.iter()
                    .map(|c| {
                        let mut rows = c.to_rows();
                        for (i, row) in rows.iter_mut().enumerate() {
                            for (j, r) in row.iter_mut().enumerate() {
                                if i != j {
                                    *r *= rng.random_range(0.8..1.25);
                                }
                            }
                        }
                        ConditionalIntensityMatrix::from_off_diagonal(&rows).unwrap()
                    })
                    .collect()
            })
            .collect();
        let m = CtbnModel::with_uniform_initial(truth.structure().clone(), cims).unwrap();
        assert!(log_likelihood_from_stats(&m, &stats).unwrap() <= best);
    }
}

#[test]
fn recovery_within_five_percent() {
    let truth = truth2();
    let data = sample_set(&truth, 500, 10.0, 1);
    let (fit, _) = fit_model(truth.structure(), &data, Pseudocounts::none()).unwrap();
    let errs = relative_errors(&fit, &truth);
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    assert!(worst < 0.05, "worst relative error {worst}");
}

#[test]
fn error_shrinks_like_inverse_root_n() {
    let truth = truth2();
    let reps = 2000;
    let med = |n: usize| {
        // pooled over every rate of every replicate
        let errors: Vec<f64> = (0..reps)
            .map(|r| {
                let data = sample_set(&truth, n, 10.0, 100 + r as u64 * 7919 + n as u64);
                let stats = collect_stats(truth.structure(), &data).unwrap();
                let fit = mle(&stats, Pseudocounts::none());
                let m = CtbnModel::with_uniform_initial(truth.structure().clone(), fit.cims).unwrap();
                relative_errors(&m, &truth)
            })
            .collect::<Vec<_>>()
            .concat();
        median(errors)
    };
    let (e50, e200, e800) = (med(50), med(200), med(800));
    println!("median relative error: n=50 {e50:.4}, n=200 {e200:.4}, n=800 {e800:.4}");
    assert!(e200 <= 0.5 * e50, "50 -> 200: {e50} -> {e200}");
    assert!(e800 <= 0.5 * e200, "200 -> 800: {e200} -> {e800}");
}

#[test]
fn total_dwell_equals_total_horizon() {
    let truth = truth2();
    let data = sample_set(&truth, 25, 7.5, 9);
    let stats = collect_stats(truth.structure(), &data).unwrap();
    for ns in stats.nodes() {
        assert!((ns.total_dwell() - 25.0 * 7.5).abs() < 1e-6 * 25.0 * 7.5);
    }
}

fn dyadic_trajectory(flips: &[u8], ys: &[u8]) -> Trajectory<f64> {
    // change points at multiples of 1/8 keep every sum exact
    let track = |name: &str, marks: &[u8]| {
        let mut times: Vec<f64> = marks.iter().map(|&m| (m % 64) as f64 / 8.0 + 0.125).collect();
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        times.dedup();
        let mut segs = Vec::new();
        let (mut start, mut state) = (0.0, 0);
        for t in times {
            segs.push(Segment::new(state, start, t));
            start = t;
            state = 1 - state;
        }
        segs.push(Segment::new(state, start, 8.25));
        VariableTrack::new(name, segs)
    };
    Trajectory::new(8.25, vec![track("X", flips), track("Y", ys)]).unwrap()
}

proptest! {
    #[test]
    fn stats_merge_is_exact_over_batches(
        batch in proptest::collection::vec((proptest::collection::vec(any::<u8>(), 0..6), proptest::collection::vec(any::<u8>(), 0..6)), 1..8),
        split in 0usize..8,
    ) {
        let s = truth2().structure().clone();
        let data: Vec<_> = batch.iter().map(|(a, b)| dyadic_trajectory(a, b)).collect();
        let k = split.min(data.len());
        let whole = collect_stats(&s, &data).unwrap();
        let mut left: SufficientStats<f64> = collect_stats(&s, &data[..k]).unwrap();
        let right = collect_stats(&s, &data[k..]).unwrap();
        let mut swapped = right.clone();
        left.merge(&right);
        prop_assert_eq!(&left, &whole);
        swapped.merge(&collect_stats(&s, &data[..k]).unwrap());
        prop_assert_eq!(&swapped, &whole);
    }
}
