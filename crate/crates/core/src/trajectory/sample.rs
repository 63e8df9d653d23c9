use rand::{Rng, SeedableRng};

use crate::model::{sample_categorical, CtbnModel};
use crate::trajectory::{Segment, Trajectory, VariableTrack};
use crate::Scalar;

/// Reproducible generator used for every seeded routine in the crate.
pub type SeededRng = rand_chacha::ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    SeededRng::seed_from_u64(seed)
}

/// Forward-sample a full trajectory of every node.
pub fn sample_trajectory<T: Scalar>(model: &CtbnModel<T>, horizon: T, seed: u64) -> Trajectory<T> {
    sample_trajectory_with(model, horizon, &mut rng_from_seed(seed))
}

pub fn sample_trajectory_with<T: Scalar, R: Rng + ?Sized>(model: &CtbnModel<T>, horizon: T, rng: &mut R) -> Trajectory<T> {
    let initial = model.initial().sample(rng);
    sample_trajectory_from(model, &initial, horizon, rng)
}

/// Exponential-race sampler from a given initial joint state.
///
/// Each node holds a candidate jump time; the earliest fires (ties go to the
/// lowest node index) and every node whose parent set just changed redraws
/// its candidate from the current instant.
pub fn sample_trajectory_from<T: Scalar, R: Rng + ?Sized>(
    model: &CtbnModel<T>,
    initial: &[usize],
    horizon: T,
    rng: &mut R,
) -> Trajectory<T> {
    let structure = model.structure();
    let n = structure.len();
    let mut states = initial.to_vec();
    let mut starts = vec![T::zero(); n];
    let mut segments: Vec<Vec<Segment<T>>> = vec![Vec::new(); n];
    let mut next: Vec<T> = (0..n).map(|i| candidate(model, i, &states, T::zero(), rng)).collect();
    loop {
        let mut fire = None;
        let mut best = horizon;
        for (i, &t) in next.iter().enumerate() {
            if t < best {
                best = t;
                fire = Some(i);
            }
        }
        let Some(node) = fire else { break };
        let now = best;
        let cim = model.active_cim(node, &states);
        let from = states[node];
        let to = sample_categorical(
            cim.row(from).iter().enumerate().map(|(j, &r)| if j == from { T::zero() } else { r }),
            rng,
        );
        segments[node].push(Segment::new(from, starts[node], now));
        starts[node] = now;
        states[node] = to;
        next[node] = candidate(model, node, &states, now, rng);
        for &child in structure.children(node) {
            next[child] = candidate(model, child, &states, now, rng);
        }
    }
    let tracks = (0..n)
        .map(|i| {
            if horizon > T::zero() {
                segments[i].push(Segment::new(states[i], starts[i], horizon));
            }
            VariableTrack::new(structure.node(i).name(), std::mem::take(&mut segments[i]))
        })
        .collect();
    Trajectory::new(horizon, tracks).expect("sampler emits well-formed trajectories")
}

fn candidate<T: Scalar, R: Rng + ?Sized>(model: &CtbnModel<T>, node: usize, states: &[usize], now: T, rng: &mut R) -> T {
    let q = model.active_cim(node, states).exit_rate(states[node]);
    if q <= T::zero() {
        return T::infinity();
    }
    let u: f64 = rng.random();
    now + T::of(-(1.0 - u).ln()) / q
}
