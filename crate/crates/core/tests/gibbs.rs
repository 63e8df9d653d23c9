mod common;

use common::*;
use ctbn::inference::{exact_posterior, gibbs_posterior, GibbsConfig, PosteriorTrack};

/// (mean, max) absolute difference over hidden marginals.
fn abs_errors(a: &PosteriorTrack<f64>, b: &PosteriorTrack<f64>) -> (f64, f64) {
    let mut total = 0.0;
    let mut max = 0.0f64;
    let mut n = 0;
    for node in 0..a.nodes.len() {
        if a.observed[node] {
            continue;
        }
        for (pa, pb) in a.marginals[node].iter().zip(&b.marginals[node]) {
            for (x, y) in pa.iter().zip(pb) {
                total += (x - y).abs();
                max = max.max((x - y).abs());
                n += 1;
            }
        }
    }
    (total / n as f64, max)
}

fn check(model: &ctbn::Model, observed: &[&str], seed: u64) -> (f64, f64) {
    let horizon = 3.0;
    let ev = sampled_evidence(model, horizon, seed, observed);
    let q = grid(horizon, 30);
    let exact = exact_posterior(model, &ev, &q).unwrap();
    let cfg = GibbsConfig::new(20_000, 11);
    let g1 = gibbs_posterior(model, &ev, &cfg, &q).unwrap();
    let g2 = gibbs_posterior(model, &ev, &GibbsConfig { rng_seed: 12345, ..cfg }, &q).unwrap();
    (abs_errors(&exact, &g1).0, abs_errors(&g1, &g2).0)
}

#[test]
fn gibbs_agrees_with_exact_on_small_models() {
    let cases: Vec<(&str, ctbn::Model, Vec<&str>)> = vec![
        ("chain2", chain2(), vec!["Y"]),
        ("fork3", fork3(), vec!["O"]),
        ("cycle", cycle(), vec!["O"]),
        ("ring64", ring64(), vec!["O"]),
    ];
    for (name, model, obs) in cases {
        let (err, seeds) = check(&model, &obs, 3);
        println!("{name}: gibbs-exact {err:.4}, seed-seed {seeds:.4}");
        assert!(err <= 0.02, "{name}: mean abs error {err}");
        assert!(seeds <= 0.03, "{name}: seed disagreement {seeds}");
    }
}
