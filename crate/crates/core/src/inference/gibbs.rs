use rand::Rng;
use rayon::prelude::*;

use crate::inference::{BoundEvidence, InferenceError, InferenceWarning, PosteriorTrack};
use crate::model::{sample_categorical, CtbnModel, InitialDistribution};
use crate::trajectory::{rng_from_seed, Evidence, Segment};
use crate::Scalar;

/// Settings of the auxiliary Gibbs sampler.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsConfig<T> {
    /// Recorded sweeps per chain, after burn-in and thinning.
    pub n_samples: usize,
    pub burn_in: usize,
    pub thinning: usize,
    pub rng_seed: u64,
    /// Ratio of the auxiliary grid rate to a node's largest exit rate; must exceed 1.
    pub uniformization_factor: T,
    /// Independent chains; chain `c` is seeded with `rng_seed + c`.
    pub chains: usize,
}

impl<T: Scalar> GibbsConfig<T> {
    /// Defaults: burn-in 10% of `n_samples`, no thinning, factor 2, one chain.
    pub fn new(n_samples: usize, rng_seed: u64) -> Self {
        Self { n_samples, burn_in: n_samples / 10, thinning: 1, rng_seed, uniformization_factor: T::of(2.0), chains: 1 }
    }

    pub fn validate(&self) -> Result<(), InferenceError> {
        let bad = |m: &str| Err(InferenceError::InvalidConfig(m.to_string()));
        if self.n_samples == 0 {
            return bad("n_samples must be positive");
        }
        if self.thinning == 0 {
            return bad("thinning must be positive");
        }
        if self.chains == 0 {
            return bad("chains must be positive");
        }
        if !(self.uniformization_factor > T::one()) || !self.uniformization_factor.is_finite() {
            return bad("uniformization_factor must be a finite number greater than 1");
        }
        Ok(())
    }
}

/// Posterior marginals by auxiliary Gibbs sampling over hidden trajectories.
///
/// Each sweep redraws every hidden node's whole path given all other paths:
/// virtual jump times are added at rate `Ω − q(t)` to the current path, and the
/// state sequence on the resulting grid is drawn by forward filtering and
/// backward sampling, where the likelihood of the node's children enters as a
/// per-interval weight. Marginals are empirical frequencies at the query times.
pub fn gibbs_posterior<T: Scalar>(
    model: &CtbnModel<T>,
    evidence: &Evidence<T>,
    config: &GibbsConfig<T>,
    query_times: &[T],
) -> Result<PosteriorTrack<T>, InferenceError> {
    config.validate()?;
    let bound = BoundEvidence::bind(model, evidence, query_times)?;
    let structure = model.structure();
    let mut warnings = Vec::new();
    for &h in &bound.hidden {
        let absorbing = model.cims(h).iter().any(|c| (0..c.size()).any(|s| c.is_absorbing(s)));
        if absorbing {
            warnings.push(InferenceWarning::NonErgodic { node: structure.node(h).name().to_string() });
        }
    }

    let runs: Vec<Result<ChainResult<T>, InferenceError>> = (0..config.chains)
        .into_par_iter()
        .map(|c| run_chain(model, &bound, config, config.rng_seed.wrapping_add(c as u64), query_times))
        .collect();
    let mut counts: Vec<Vec<Vec<u64>>> = Vec::new();
    let mut stuck = vec![0usize; structure.len()];
    for run in runs {
        let run = run?;
        if counts.is_empty() {
            counts = run.counts;
        } else {
            for (a, b) in counts.iter_mut().flatten().zip(run.counts.iter().flatten()) {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += *y);
            }
        }
        stuck.iter_mut().zip(&run.stuck).for_each(|(a, b)| *a += *b);
    }
    for (node, &count) in stuck.iter().enumerate() {
        if count > 0 {
            warnings.push(InferenceWarning::StuckResample { node: structure.node(node).name().to_string(), count });
        }
    }

    let total = T::of((config.n_samples * config.chains) as f64);
    let mut marginals = Vec::with_capacity(structure.len());
    let mut hidden_pos = 0;
    for node in 0..structure.len() {
        let m = structure.cardinality(node);
        if bound.observed[node] {
            marginals.push(bound.observed_marginals(node, m, query_times));
        } else {
            marginals.push(
                counts
                    .iter()
                    .map(|per_node| per_node[hidden_pos].iter().map(|&c| T::of(c as f64) / total).collect())
                    .collect(),
            );
            hidden_pos += 1;
        }
    }
    Ok(PosteriorTrack {
        query_times: query_times.to_vec(),
        nodes: structure.nodes().to_vec(),
        observed: bound.observed,
        marginals,
        hidden_joint: None,
        log_evidence: None,
        warnings,
    })
}

struct ChainResult<T> {
    /// `counts[time][hidden position][state]`
    counts: Vec<Vec<Vec<u64>>>,
    stuck: Vec<usize>,
    _marker: std::marker::PhantomData<T>,
}

fn run_chain<T: Scalar>(
    model: &CtbnModel<T>,
    bound: &BoundEvidence<'_, T>,
    config: &GibbsConfig<T>,
    seed: u64,
    query_times: &[T],
) -> Result<ChainResult<T>, InferenceError> {
    let structure = model.structure();
    let mut rng = rng_from_seed(seed);
    let mut chain = Chain::initialise(model, bound, config.uniformization_factor, &mut rng)?;
    let mut counts: Vec<Vec<Vec<u64>>> = query_times
        .iter()
        .map(|_| bound.hidden.iter().map(|&h| vec![0u64; structure.cardinality(h)]).collect())
        .collect();
    if !bound.hidden.is_empty() {
        let sweeps = config.burn_in + config.n_samples * config.thinning;
        for sweep in 0..sweeps {
            for &h in &bound.hidden {
                chain.resample(h, &mut rng);
            }
            if sweep >= config.burn_in && (sweep - config.burn_in + 1) % config.thinning == 0 {
                for (qi, &t) in query_times.iter().enumerate() {
                    for (pos, &h) in bound.hidden.iter().enumerate() {
                        counts[qi][pos][state_at(&chain.paths[h], t)] += 1;
                    }
                }
            }
        }
    }
    Ok(ChainResult { counts, stuck: chain.stuck, _marker: std::marker::PhantomData })
}

#[inline]
fn state_at<T: Scalar>(segs: &[Segment<T>], t: T) -> usize {
    let i = segs.partition_point(|s| s.end <= t);
    segs[i.min(segs.len() - 1)].state
}

fn exp_draw<T: Scalar, R: Rng + ?Sized>(rate: T, rng: &mut R) -> T {
    let u: f64 = rng.random();
    T::of(-(1.0 - u).ln()) / rate
}

struct Piece<T> {
    start: T,
    end: T,
    /// parent instantiation of the resampled node
    inst: usize,
    /// total exit rate of its children, per candidate state
    loss: Vec<T>,
}

struct Chain<'m, T> {
    model: &'m CtbnModel<T>,
    horizon: T,
    paths: Vec<Vec<Segment<T>>>,
    /// parents, children and co-parents of each node
    blanket: Vec<Vec<usize>>,
    omega: Vec<T>,
    stuck: Vec<usize>,
}

impl<'m, T: Scalar> Chain<'m, T> {
    fn initialise<R: Rng + ?Sized>(
        model: &'m CtbnModel<T>,
        bound: &BoundEvidence<'_, T>,
        factor: T,
        rng: &mut R,
    ) -> Result<Self, InferenceError> {
        let structure = model.structure();
        let n = structure.len();
        let horizon = bound.horizon;
        let mut blanket = Vec::with_capacity(n);
        for x in 0..n {
            let mut b: Vec<usize> = structure.parents(x).to_vec();
            for &c in structure.children(x) {
                b.push(c);
                b.extend(structure.parents(c).iter().copied().filter(|&p| p != x));
            }
            b.sort_unstable();
            b.dedup();
            blanket.push(b);
        }
        let omega = (0..n).map(|x| model.max_exit_rate(x) * factor).collect();

        // hidden initial states conditioned on the observed values at time zero
        let mut states: Vec<usize> = (0..n).map(|i| bound.tracks[i].map_or(0, |t| t.segments()[0].state)).collect();
        match model.initial() {
            InitialDistribution::Factored(m) => {
                for &h in &bound.hidden {
                    states[h] = sample_categorical(m[h].iter().copied(), rng);
                }
            }
            InitialDistribution::Joint(support) => {
                let matching: Vec<(&Vec<usize>, T)> = support
                    .iter()
                    .filter(|(s, _)| (0..n).all(|i| !bound.observed[i] || s[i] == states[i]))
                    .map(|(s, p)| (s, *p))
                    .collect();
                if matching.iter().all(|(_, p)| *p == T::zero()) {
                    return Err(InferenceError::ZeroLikelihoodEvidence(": initial evidence has zero prior probability".into()));
                }
                let k = sample_categorical(matching.iter().map(|(_, p)| *p), rng);
                for &h in &bound.hidden {
                    states[h] = matching[k].0[h];
                }
            }
        }

        // forward-sample hidden nodes with observed nodes clamped to the evidence
        let mut obs_events: Vec<(T, usize, usize)> = (0..n)
            .filter_map(|i| bound.tracks[i].map(|t| (i, t)))
            .flat_map(|(i, t)| t.transitions().map(move |(time, _, to)| (time, i, to)))
            .collect();
        obs_events.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite").then(a.1.cmp(&b.1)));
        let mut paths: Vec<Vec<Segment<T>>> = vec![Vec::new(); n];
        for i in 0..n {
            if let Some(t) = bound.tracks[i] {
                paths[i] = t.segments().to_vec();
            }
        }
        let mut starts = vec![T::zero(); n];
        let draw = |x: usize, states: &[usize], now: T, rng: &mut R| -> T {
            let q = model.active_cim(x, states).exit_rate(states[x]);
            if q > T::zero() { now + exp_draw(q, rng) } else { T::infinity() }
        };
        let mut next: Vec<T> = (0..n).map(|i| if bound.observed[i] { T::infinity() } else { draw(i, &states, T::zero(), rng) }).collect();
        let mut oe = 0;
        loop {
            let mut fire = None;
            let mut best = horizon;
            for &h in &bound.hidden {
                if next[h] < best {
                    best = next[h];
                    fire = Some(h);
                }
            }
            let obs_time = obs_events.get(oe).map_or(T::infinity(), |e| e.0);
            if obs_time <= best && obs_time < horizon {
                let (t, node, to) = obs_events[oe];
                oe += 1;
                states[node] = to;
                for &c in structure.children(node) {
                    if !bound.observed[c] {
                        next[c] = draw(c, &states, t, rng);
                    }
                }
                continue;
            }
            let Some(x) = fire else { break };
            let cim = model.active_cim(x, &states);
            let from = states[x];
            let to = sample_categorical(cim.row(from).iter().enumerate().map(|(j, &r)| if j == from { T::zero() } else { r }), rng);
            paths[x].push(Segment::new(from, starts[x], best));
            starts[x] = best;
            states[x] = to;
            next[x] = draw(x, &states, best, rng);
            for &c in structure.children(x) {
                if !bound.observed[c] {
                    next[c] = draw(c, &states, best, rng);
                }
            }
        }
        for &h in &bound.hidden {
            paths[h].push(Segment::new(states[h], starts[h], horizon));
        }
        Ok(Self { model, horizon, paths, blanket, omega, stuck: vec![0; n] })
    }

    /// Redraw the full path of node `x`; on an infeasible configuration the old path is kept.
    fn resample<R: Rng + ?Sized>(&mut self, x: usize, rng: &mut R) {
        match self.draw_path(x, rng) {
            Some(p) => self.paths[x] = p,
            None => self.stuck[x] += 1,
        }
    }

    fn draw_path<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> Option<Vec<Segment<T>>> {
        let model = self.model;
        let structure = model.structure();
        let m = structure.cardinality(x);
        let children = structure.children(x);
        let horizon = self.horizon;

        // environment: blanket nodes are constant on each piece
        let mut events: Vec<(T, usize, usize, usize)> = self.blanket[x]
            .iter()
            .flat_map(|&b| self.paths[b].windows(2).map(move |w| (w[1].start, b, w[0].state, w[1].state)))
            .collect();
        events.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite").then(a.1.cmp(&b.1)));
        let mut cur: Vec<usize> = self.paths.iter().map(|p| p[0].state).collect();
        let mut pieces: Vec<Piece<T>> = Vec::with_capacity(events.len() + 1);
        let mut child_jumps: Vec<(T, Vec<T>)> = Vec::new();
        let mut start = T::zero();
        let mut e = 0;
        loop {
            let end = events.get(e).map_or(horizon, |ev| ev.0);
            if end > start {
                pieces.push(self.piece(x, &mut cur, start, end));
            }
            if e >= events.len() {
                break;
            }
            let group_end = events[e..].iter().position(|ev| ev.0 != end).map_or(events.len(), |p| e + p);
            for &(_, node, from, to) in &events[e..group_end] {
                if children.contains(&node) {
                    let f = (0..m)
                        .map(|xv| {
                            cur[x] = xv;
                            model.active_cim(node, &cur).rate(from, to)
                        })
                        .collect();
                    child_jumps.push((end, f));
                }
            }
            for &(_, node, _, to) in &events[e..group_end] {
                cur[node] = to;
            }
            start = end;
            e = group_end;
        }

        // auxiliary grid: current jump times plus virtual events at rate Ω − q
        let omega = self.omega[x];
        let path = &self.paths[x];
        let mut grid: Vec<T> = path.iter().skip(1).map(|s| s.start).collect();
        let mut pi = 0;
        for seg in path {
            let mut a = seg.start;
            while a < seg.end {
                while pieces[pi].end <= a {
                    pi += 1;
                }
                let b = seg.end.min(pieces[pi].end);
                let rate = omega - model.cim(x, pieces[pi].inst).exit_rate(seg.state);
                if rate > T::zero() {
                    let mut t = a + exp_draw(rate, rng);
                    while t < b {
                        grid.push(t);
                        t = t + exp_draw(rate, rng);
                    }
                }
                a = b;
            }
        }
        grid.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        grid.dedup();
        let k_int = grid.len() + 1;
        let hi = |k: usize| if k < grid.len() { grid[k] } else { horizon };

        // log-weights of each grid interval from the children's paths
        let mut logw = vec![vec![T::zero(); m]; k_int];
        let mut k = 0;
        for p in &pieces {
            let mut a = p.start;
            while a < p.end {
                while hi(k) <= a {
                    k += 1;
                }
                let b = p.end.min(hi(k));
                let dt = b - a;
                for (w, &l) in logw[k].iter_mut().zip(&p.loss) {
                    *w = *w - l * dt;
                }
                a = b;
            }
        }
        for (tau, f) in &child_jumps {
            let k = grid.partition_point(|g| g < tau);
            for (w, &r) in logw[k].iter_mut().zip(f) {
                *w = *w + r.ln();
            }
        }
        let grid_inst: Vec<usize> = grid
            .iter()
            .map(|&g| pieces[pieces.partition_point(|p| p.end <= g).min(pieces.len() - 1)].inst)
            .collect();

        // forward filtering
        let mut init = self.paths.iter().map(|p| p[0].state).collect::<Vec<_>>();
        let mut alpha: Vec<Vec<T>> = Vec::with_capacity(k_int);
        let a0: Vec<T> = (0..m)
            .map(|xv| {
                init[x] = xv;
                model.initial().prob(&init)
            })
            .collect();
        alpha.push(weigh(a0, &logw[0])?);
        for j in 1..k_int {
            let cim = model.cim(x, grid_inst[j - 1]);
            let prev = &alpha[j - 1];
            let mut next = vec![T::zero(); m];
            for (xf, &a) in prev.iter().enumerate() {
                if a == T::zero() {
                    continue;
                }
                let row = cim.row(xf);
                for (xt, n) in next.iter_mut().enumerate() {
                    let b = if xt == xf { T::one() + row[xf] / omega } else { row[xt] / omega };
                    *n = *n + a * b;
                }
            }
            alpha.push(weigh(next, &logw[j])?);
        }

        // backward sampling
        let mut seq = vec![0usize; k_int];
        seq[k_int - 1] = sample_categorical(alpha[k_int - 1].iter().copied(), rng);
        for j in (1..k_int).rev() {
            let cim = model.cim(x, grid_inst[j - 1]);
            let to = seq[j];
            let w = alpha[j - 1].iter().enumerate().map(|(xf, &a)| {
                let b = if xf == to { T::one() + cim.rate(xf, xf) / omega } else { cim.rate(xf, to) / omega };
                a * b
            });
            if w.clone().sum::<T>() <= T::zero() {
                return None;
            }
            seq[j - 1] = sample_categorical(w, rng);
        }
        let mut out: Vec<Segment<T>> = Vec::new();
        for (j, &s) in seq.iter().enumerate() {
            let (a, b) = (if j == 0 { T::zero() } else { grid[j - 1] }, hi(j));
            match out.last_mut() {
                Some(last) if last.state == s => last.end = b,
                _ => out.push(Segment::new(s, a, b)),
            }
        }
        Some(out)
    }

    fn piece(&self, x: usize, cur: &mut [usize], start: T, end: T) -> Piece<T> {
        let model = self.model;
        let structure = model.structure();
        let m = structure.cardinality(x);
        let inst = structure.parent_instantiation(x, cur);
        let loss = (0..m)
            .map(|xv| {
                cur[x] = xv;
                structure.children(x).iter().map(|&c| model.active_cim(c, cur).exit_rate(cur[c])).sum()
            })
            .collect();
        Piece { start, end, inst, loss }
    }
}

/// Multiply by `exp(logw − max)` and normalise; `None` when nothing survives.
fn weigh<T: Scalar>(mut v: Vec<T>, logw: &[T]) -> Option<Vec<T>> {
    let top = logw
        .iter()
        .zip(&v)
        .filter(|(_, a)| **a > T::zero())
        .map(|(w, _)| *w)
        .fold(T::neg_infinity(), T::max);
    if !top.is_finite() {
        return None;
    }
    for (a, &w) in v.iter_mut().zip(logw) {
        *a = *a * (w - top).exp();
    }
    let z: T = v.iter().copied().sum();
    if !(z > T::zero()) {
        return None;
    }
    v.iter_mut().for_each(|a| *a = *a / z);
    Some(v)
}
