//! Test-only oracles and generators, independent of the inference code.
#![allow(dead_code)]

use hbral::grammar::{HbralHierarchy, Minute, RoomType, Scenario, TimedEvent};
use hbral::Hmm;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Plain-probability parameters, kept alongside the model so the oracle
/// never reads the model's cached log tables.
pub struct RawModel {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub pi: Vec<f64>,
}

impl RawModel {
    pub fn n(&self) -> usize {
        self.pi.len()
    }

    pub fn m(&self) -> usize {
        self.b[0].len()
    }

    pub fn to_model(&self) -> Hmm {
        Hmm::unlabeled(self.a.clone(), self.b.clone(), self.pi.clone()).expect("valid random model")
    }
}

fn random_row(rng: &mut ChaCha8Rng, len: usize, zero_prob: f64) -> Vec<f64> {
    loop {
        let row: Vec<f64> = (0..len)
            .map(|_| if rng.random::<f64>() < zero_prob { 0.0 } else { rng.random_range(0.05..1.0) })
            .collect();
        let s: f64 = row.iter().sum();
        if s > 0.0 {
            return row.iter().map(|x| x / s).collect();
        }
    }
}

/// Random valid model with `n` states and `m` symbols; entries are zero with
/// probability `zero_prob`.
pub fn random_model(rng: &mut ChaCha8Rng, n: usize, m: usize, zero_prob: f64) -> RawModel {
    RawModel {
        a: (0..n).map(|_| random_row(rng, n, zero_prob)).collect(),
        b: (0..n).map(|_| random_row(rng, m, zero_prob)).collect(),
        pi: random_row(rng, n, zero_prob),
    }
}

pub fn random_observations(rng: &mut ChaCha8Rng, m: usize, t: usize) -> Vec<usize> {
    (0..t).map(|_| rng.random_range(0..m)).collect()
}

/// Visits every state path of length `t` in lexicographic order.
pub fn for_each_path(n: usize, t: usize, mut f: impl FnMut(&[usize])) {
    let mut path = vec![0usize; t];
    loop {
        f(&path);
        let mut k = t;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            path[k] += 1;
            if path[k] < n {
                break;
            }
            path[k] = 0;
        }
    }
}

/// Linear-space joint probability `Π_{q0} B_{q0,o0} Π_t A B`.
pub fn path_probability(raw: &RawModel, path: &[usize], obs: &[usize]) -> f64 {
    let mut p = raw.pi[path[0]] * raw.b[path[0]][obs[0]];
    for t in 1..path.len() {
        p *= raw.a[path[t - 1]][path[t]] * raw.b[path[t]][obs[t]];
    }
    p
}

pub struct BruteForce {
    pub total: f64,
    pub best: Vec<usize>,
    pub best_prob: f64,
    /// `P(Q_t = i, O)` summed over paths.
    pub marginals: Vec<Vec<f64>>,
}

/// Enumerates all `N^T` paths. Among paths within relative 1e-12 of the
/// maximum, the winner is the smallest comparing from the last step
/// backwards (the lowest-index-per-backtrack-step rule).
pub fn brute_force(raw: &RawModel, obs: &[usize]) -> BruteForce {
    let n = raw.n();
    let t = obs.len();
    let mut out = BruteForce { total: 0.0, best: vec![0; t], best_prob: -1.0, marginals: vec![vec![0.0; n]; t] };
    let mut scored = Vec::new();
    for_each_path(n, t, |path| {
        let p = path_probability(raw, path, obs);
        out.total += p;
        out.best_prob = out.best_prob.max(p);
        for (step, &q) in path.iter().enumerate() {
            out.marginals[step][q] += p;
        }
        scored.push((path.to_vec(), p));
    });
    let floor = out.best_prob * (1.0 - 1e-12);
    out.best = scored
        .into_iter()
        .filter(|(_, p)| *p >= floor)
        .map(|(path, _)| path)
        .min_by(|a, b| a.iter().rev().cmp(b.iter().rev()))
        .expect("at least one path");
    out
}

/// Stationary distribution by power iteration on the row-stochastic matrix.
pub fn stationary(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut v = vec![1.0 / n as f64; n];
    for _ in 0..10_000 {
        let next: Vec<f64> = (0..n).map(|j| (0..n).map(|i| v[i] * a[i][j]).sum()).collect();
        let diff: f64 = next.iter().zip(&v).map(|(x, y)| (x - y).abs()).sum();
        v = next;
        if diff < 1e-15 {
            break;
        }
    }
    v
}

/// Random scenario over a valid hierarchy: 0..=12 events at non-decreasing
/// minutes inside `[start, end]`.
pub fn random_scenario(rng: &mut ChaCha8Rng, h: &HbralHierarchy) -> Scenario {
    let start: Minute = rng.random_range(0..600);
    let end: Minute = start + rng.random_range(0..600);
    let count = rng.random_range(0..=12usize);
    let mut times: Vec<Minute> = (0..count).map(|_| rng.random_range(start..=end)).collect();
    times.sort_unstable();
    let rooms: Vec<&RoomType> = h.activities.keys().collect();
    let events = times
        .into_iter()
        .map(|t| {
            let room = rooms[rng.random_range(0..rooms.len())];
            let acts = h.activities_in(room);
            let act = &acts[rng.random_range(0..acts.len())];
            let objs = h.objects_of(act);
            let k = rng.random_range(1..=objs.len());
            TimedEvent::new(t, room.clone(), act, objs[..k].iter().cloned())
        })
        .collect();
    Scenario::new(events, start, end).expect("sorted times within window")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
