#![allow(dead_code)]

use ctbn::model::{ConditionalIntensityMatrix, CtbnModel, CtbnStructure, NodeSpec};
use ctbn::trajectory::{rng_from_seed, sample_trajectory, Evidence};
use rand::Rng;

pub fn cim(rows: &[&[f64]]) -> ConditionalIntensityMatrix<f64> {
    ConditionalIntensityMatrix::from_off_diagonal(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

pub fn node(name: &str, k: usize) -> NodeSpec {
    NodeSpec::with_cardinality(name, k).unwrap()
}

/// X (hidden, binary) drives Y (observed, binary).
pub fn chain2() -> CtbnModel<f64> {
    let s = CtbnStructure::new(vec![node("X", 2), node("Y", 2)], vec![vec![], vec![0]]).unwrap();
    CtbnModel::with_uniform_initial(
        s,
        vec![
            vec![cim(&[&[0.0, 1.0], &[2.0, 0.0]])],
            vec![cim(&[&[0.0, 0.5], &[3.0, 0.0]]), cim(&[&[0.0, 4.0], &[0.5, 0.0]])],
        ],
    )
    .unwrap()
}

/// A (3 states) -> B (binary); both drive O (3 states, observed).
pub fn fork3() -> CtbnModel<f64> {
    let s = CtbnStructure::new(vec![node("A", 3), node("B", 2), node("O", 3)], vec![vec![], vec![0], vec![0, 1]])
        .unwrap();
    let a = vec![cim(&[&[0.0, 0.8, 0.2], &[0.5, 0.0, 0.7], &[0.3, 0.9, 0.0]])];
    let b = vec![
        cim(&[&[0.0, 0.3], &[2.0, 0.0]]),
        cim(&[&[0.0, 1.5], &[0.6, 0.0]]),
        cim(&[&[0.0, 3.0], &[0.4, 0.0]]),
    ];
    let mut o = Vec::new();
    for a in 0..3 {
        for b in 0..2 {
            // O is pulled towards state a, faster when B is on
            let speed = if b == 1 { 4.0 } else { 1.5 };
            let mut rows = vec![vec![0.0; 3]; 3];
            for (i, row) in rows.iter_mut().enumerate() {
                for (j, r) in row.iter_mut().enumerate() {
                    if i != j {
                        *r = if j == a { speed } else { 0.2 };
                    }
                }
            }
            o.push(ConditionalIntensityMatrix::from_off_diagonal(&rows).unwrap());
        }
    }
    CtbnModel::with_uniform_initial(s, vec![a, b, o]).unwrap()
}

/// X1 <-> X2 cycle of hidden binaries, observed O (3 states) reads their sum.
pub fn cycle() -> CtbnModel<f64> {
    let s = CtbnStructure::new(vec![node("X1", 2), node("X2", 2), node("O", 3)], vec![vec![1], vec![0], vec![0, 1]])
        .unwrap();
    let x1 = vec![cim(&[&[0.0, 0.4], &[1.2, 0.0]]), cim(&[&[0.0, 2.0], &[0.3, 0.0]])];
    let x2 = vec![cim(&[&[0.0, 0.7], &[0.7, 0.0]]), cim(&[&[0.0, 0.2], &[1.8, 0.0]])];
    let mut o = Vec::new();
    for v in 0..4 {
        let target = (v >> 1) + (v & 1);
        let mut rows = vec![vec![0.0; 3]; 3];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, r) in row.iter_mut().enumerate() {
                if i != j {
                    *r = if j == target { 3.0 } else { 0.15 };
                }
            }
        }
        o.push(ConditionalIntensityMatrix::from_off_diagonal(&rows).unwrap());
    }
    CtbnModel::with_uniform_initial(s, vec![x1, x2, o]).unwrap()
}

/// Three hidden 4-state nodes in a ring (hidden joint of 64) with one binary observed child.
pub fn ring64() -> CtbnModel<f64> {
    let s = CtbnStructure::new(
        vec![node("H0", 4), node("H1", 4), node("H2", 4), node("O", 2)],
        vec![vec![2], vec![0], vec![1], vec![0, 1]],
    )
    .unwrap();
    let mut rng = rng_from_seed(77);
    let hidden: Vec<Vec<ConditionalIntensityMatrix<f64>>> =
        (0..3).map(|_| (0..4).map(|_| random_cim(4, 0.2, 1.5, &mut rng)).collect()).collect();
    let mut o = Vec::new();
    for v in 0..16 {
        let (a, b) = (v / 4, v % 4);
        let on = if (a + b) % 2 == 0 { 2.5 } else { 0.3 };
        o.push(cim(&[&[0.0, on], &[2.8 - on, 0.0]]));
    }
    let mut cims = hidden;
    cims.push(o);
    CtbnModel::with_uniform_initial(s, cims).unwrap()
}

pub fn random_cim<R: Rng>(k: usize, lo: f64, hi: f64, rng: &mut R) -> ConditionalIntensityMatrix<f64> {
    let rows: Vec<Vec<f64>> =
        (0..k).map(|i| (0..k).map(|j| if i == j { 0.0 } else { rng.random_range(lo..hi) }).collect()).collect();
    ConditionalIntensityMatrix::from_off_diagonal(&rows).unwrap()
}

/// Random model over the given structure with off-diagonal rates in `[lo, hi)`.
pub fn random_model<R: Rng>(structure: CtbnStructure, lo: f64, hi: f64, rng: &mut R) -> CtbnModel<f64> {
    let cims = (0..structure.len())
        .map(|i| {
            (0..structure.n_parent_instantiations(i))
                .map(|_| random_cim(structure.cardinality(i), lo, hi, rng))
                .collect()
        })
        .collect();
    CtbnModel::with_uniform_initial(structure, cims).unwrap()
}

/// Evidence on `observed`, taken from a forward sample of the model.
pub fn sampled_evidence(model: &CtbnModel<f64>, horizon: f64, seed: u64, observed: &[&str]) -> Evidence<f64> {
    sample_trajectory(model, horizon, seed).restrict(observed).unwrap()
}

pub fn grid(horizon: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| horizon * (k as f64 + 0.5) / n as f64).collect()
}
