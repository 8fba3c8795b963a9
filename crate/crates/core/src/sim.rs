//! Monte Carlo simulation of the discrete-time SIR process and of the
//! equivalent bond percolation model.
//!
//! Both simulators draw their randomness through the [`Coins`] trait, keyed
//! by edge id. With [`EdgeCoins`] every edge gets one fixed uniform per
//! trial, which couples the two simulators (they then return identical
//! outcomes) and couples runs at different `beta` (`Y` is monotone in
//! `beta`).

use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, SeedSet};
use crate::rng::{stream_rng, unit_f64, StreamRng};

/// Rejects anything outside the open interval `(0, 1)`, including NaN.
pub fn check_beta(beta: f64) -> Result<f64> {
    if beta > 0.0 && beta < 1.0 {
        Ok(beta)
    } else {
        Err(Error::InvalidParameter(format!(
            "beta must lie in the open interval (0, 1), got {beta}"
        )))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EpidemicParams {
    pub beta: f64,
    pub master_seed: u64,
    pub trials: usize,
}

impl EpidemicParams {
    pub fn new(beta: f64, master_seed: u64, trials: usize) -> Result<Self> {
        check_beta(beta)?;
        if trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        Ok(EpidemicParams {
            beta,
            master_seed,
            trials,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpidemicOutcome {
    /// Total number of vertices ever infected, seeds included.
    pub ever_infected: usize,
    /// Number of time steps during which some vertex was infected.
    pub extinction_time: usize,
    /// Infected set at each step, when recording was requested.
    pub history: Option<Vec<Vec<usize>>>,
}

/// Source of Bernoulli(beta) edge states.
pub trait Coins {
    /// Whether an infection attempt across `edge` succeeds.
    fn open(&mut self, edge: usize) -> bool;
}

/// One fresh uniform per call, edge id ignored.
pub struct StreamCoins<R> {
    rng: R,
    beta: f64,
}

impl<R: RngCore> StreamCoins<R> {
    pub fn new(rng: R, beta: f64) -> Self {
        StreamCoins { rng, beta }
    }
}

impl<R: RngCore> Coins for StreamCoins<R> {
    #[inline]
    fn open(&mut self, _edge: usize) -> bool {
        unit_f64(&mut self.rng) < self.beta
    }
}

/// Uniform for edge `e` is the 64-bit word at position `2e` of the trial's
/// ChaCha stream, so the same edge always sees the same uniform.
pub struct EdgeCoins {
    rng: StreamRng,
    beta: f64,
}

impl EdgeCoins {
    pub fn new(master_seed: u64, trial_id: u64, beta: f64) -> Self {
        EdgeCoins {
            rng: stream_rng(master_seed, trial_id),
            beta,
        }
    }

    pub fn uniform(&mut self, edge: usize) -> f64 {
        self.rng.set_word_pos(2 * edge as u128);
        unit_f64(&mut self.rng)
    }
}

impl Coins for EdgeCoins {
    #[inline]
    fn open(&mut self, edge: usize) -> bool {
        self.uniform(edge) < self.beta
    }
}

impl<F: FnMut(usize) -> bool> Coins for F {
    fn open(&mut self, edge: usize) -> bool {
        self(edge)
    }
}

/// Reusable per-thread buffers; stamps avoid clearing `O(n)` state between
/// trials.
#[derive(Default)]
pub struct Scratch {
    infected: Vec<u64>,
    pending: Vec<u64>,
    stamp: u64,
    current: Vec<usize>,
    next: Vec<usize>,
}

impl Scratch {
    fn reset(&mut self, n: usize) -> u64 {
        if self.infected.len() < n {
            self.infected.resize(n, 0);
            self.pending.resize(n, 0);
        }
        self.current.clear();
        self.next.clear();
        self.stamp += 1;
        self.stamp
    }

    fn next_stamp(&mut self) -> u64 {
        self.stamp += 1;
        self.stamp
    }
}

/// Synchronous SIR dynamics with unit infectious period. At each step every
/// infected vertex tries each currently susceptible neighbor once with an
/// independent coin; then all infected vertices are removed.
pub fn simulate_process_with<C: Coins>(
    g: &Graph,
    seeds: &SeedSet,
    coins: &mut C,
    scratch: &mut Scratch,
    record: bool,
) -> EpidemicOutcome {
    let epoch = scratch.reset(g.n());
    let mut history = record.then(Vec::new);
    let mut current = std::mem::take(&mut scratch.current);
    let mut next = std::mem::take(&mut scratch.next);
    for s in seeds.iter() {
        scratch.infected[s] = epoch;
        current.push(s);
    }
    let mut ever = current.len();
    let mut steps = 0;
    while !current.is_empty() {
        steps += 1;
        if let Some(h) = history.as_mut() {
            h.push(current.clone());
        }
        let step = scratch.next_stamp();
        for &u in &current {
            for (v, e) in g.incident(u) {
                // Susceptible at the start of this step; a vertex infected
                // during the step still receives every remaining attempt.
                if scratch.infected[v] == epoch {
                    continue;
                }
                if coins.open(e) && scratch.pending[v] != step {
                    scratch.pending[v] = step;
                    next.push(v);
                }
            }
        }
        for &v in &next {
            scratch.infected[v] = epoch;
        }
        ever += next.len();
        std::mem::swap(&mut current, &mut next);
        next.clear();
    }
    scratch.current = current;
    scratch.next = next;
    EpidemicOutcome {
        ever_infected: ever,
        extinction_time: steps,
        history,
    }
}

/// Union of the open clusters containing the seeds, explored layer by layer
/// so `extinction_time` is one more than the largest open distance. Edge
/// states are drawn lazily: an edge is only looked at when it leads to an
/// undiscovered vertex, and every such edge is looked at exactly once.
pub fn simulate_percolation_with<C: Coins>(
    g: &Graph,
    seeds: &SeedSet,
    coins: &mut C,
    scratch: &mut Scratch,
    record: bool,
) -> EpidemicOutcome {
    let epoch = scratch.reset(g.n());
    let mut history = record.then(Vec::new);
    let mut current = std::mem::take(&mut scratch.current);
    let mut next = std::mem::take(&mut scratch.next);
    for s in seeds.iter() {
        scratch.infected[s] = epoch;
        current.push(s);
    }
    let mut ever = current.len();
    let mut layers = 0;
    while !current.is_empty() {
        layers += 1;
        if let Some(h) = history.as_mut() {
            h.push(current.clone());
        }
        for &u in &current {
            for (v, e) in g.incident(u) {
                if scratch.infected[v] != epoch && coins.open(e) {
                    scratch.infected[v] = epoch;
                    next.push(v);
                }
            }
        }
        ever += next.len();
        std::mem::swap(&mut current, &mut next);
        next.clear();
    }
    scratch.current = current;
    scratch.next = next;
    EpidemicOutcome {
        ever_infected: ever,
        extinction_time: layers,
        history,
    }
}

/// One process trial on stream `trial_id`.
pub fn simulate_process(
    g: &Graph,
    seeds: &SeedSet,
    params: &EpidemicParams,
    trial_id: u64,
) -> EpidemicOutcome {
    let mut coins = StreamCoins::new(stream_rng(params.master_seed, trial_id), params.beta);
    simulate_process_with(g, seeds, &mut coins, &mut Scratch::default(), false)
}

/// One percolation trial on stream `trial_id`.
pub fn simulate_percolation(
    g: &Graph,
    seeds: &SeedSet,
    params: &EpidemicParams,
    trial_id: u64,
) -> EpidemicOutcome {
    let mut coins = EdgeCoins::new(params.master_seed, trial_id, params.beta);
    simulate_percolation_with(g, seeds, &mut coins, &mut Scratch::default(), false)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Process,
    #[default]
    Percolation,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Process => "process",
            Method::Percolation => "percolation",
        })
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "process" => Ok(Method::Process),
            "percolation" => Ok(Method::Percolation),
            other => Err(Error::InvalidParameter(format!(
                "unknown method {other:?}, expected process or percolation"
            ))),
        }
    }
}

/// Exact running sums of `Y` over trials; integer arithmetic makes the
/// result independent of the order in which trials are folded in.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Tally {
    pub count: u64,
    pub sum: u128,
    pub sum_sq: u128,
}

impl Tally {
    pub fn push(&mut self, y: usize) {
        let y = y as u128;
        self.count += 1;
        self.sum += y;
        self.sum_sq += y * y;
    }

    pub fn merge(mut self, other: Tally) -> Tally {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self
    }

    pub fn mean(&self) -> f64 {
        self.sum as f64 / self.count as f64
    }

    /// Unbiased sample variance; `None` with fewer than two samples.
    pub fn variance(&self) -> Option<f64> {
        if self.count < 2 {
            return None;
        }
        let n = self.count as u128;
        // n * sum_sq - sum^2 is exact in integers.
        let centered = n * self.sum_sq - self.sum * self.sum;
        Some(centered as f64 / (n as f64 * (n - 1) as f64))
    }

    /// Standard error of the mean; `None` with fewer than two samples.
    pub fn std_error(&self) -> Option<f64> {
        self.variance().map(|v| (v / self.count as f64).sqrt())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    /// Reported as 0 when undefined (a single trial).
    pub std_error: f64,
    pub std_error_defined: bool,
    pub trials: usize,
    pub beta: f64,
    pub seed: u64,
    pub method: Method,
}

/// Tally of `Y` over trial ids `first..first + count` of `params`.
pub fn run_trials(
    g: &Graph,
    seeds: &SeedSet,
    params: &EpidemicParams,
    method: Method,
    first: u64,
    count: u64,
    jobs: usize,
) -> Tally {
    const CHUNK: u64 = 1024;
    let run_chunk = |scratch: &mut Scratch, c: u64| {
        let mut t = Tally::default();
        let lo = first + c * CHUNK;
        let hi = (lo + CHUNK).min(first + count);
        for trial in lo..hi {
            let y = match method {
                Method::Process => {
                    let mut coins =
                        StreamCoins::new(stream_rng(params.master_seed, trial), params.beta);
                    simulate_process_with(g, seeds, &mut coins, scratch, false).ever_infected
                }
                Method::Percolation => {
                    let mut coins = EdgeCoins::new(params.master_seed, trial, params.beta);
                    simulate_percolation_with(g, seeds, &mut coins, scratch, false).ever_infected
                }
            };
            t.push(y);
        }
        t
    };
    let chunks = count.div_ceil(CHUNK);
    if jobs <= 1 {
        let mut scratch = Scratch::default();
        return (0..chunks)
            .map(|c| run_chunk(&mut scratch, c))
            .fold(Tally::default(), Tally::merge);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool");
    pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .map_init(Scratch::default, |scratch, c| run_chunk(scratch, c))
            .reduce(Tally::default, Tally::merge)
    })
}

/// Sample mean of `Y` over `params.trials` runs; trial `t` uses stream `t`.
/// The result does not depend on `jobs`.
pub fn estimate_mean(
    g: &Graph,
    seeds: &SeedSet,
    params: &EpidemicParams,
    method: Method,
    jobs: usize,
) -> Estimate {
    let tally = run_trials(g, seeds, params, method, 0, params.trials as u64, jobs);
    let se = tally.std_error();
    Estimate {
        mean: tally.mean(),
        std_error: se.unwrap_or(0.0),
        std_error_defined: se.is_some(),
        trials: params.trials,
        beta: params.beta,
        seed: params.master_seed,
        method,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_complete, gen_cycle, gen_hypercube, gen_path};

    fn seeds(ids: &[usize], n: usize) -> SeedSet {
        SeedSet::new(ids.to_vec(), n).unwrap()
    }

    #[test]
    fn beta_domain() {
        assert!(check_beta(0.0).is_err());
        assert!(check_beta(1.0).is_err());
        assert!(check_beta(f64::NAN).is_err());
        assert!(check_beta(0.3).is_ok());
        assert!(EpidemicParams::new(0.5, 1, 0).is_err());
    }

    #[test]
    fn edgeless_graph_stops_after_one_step() {
        let g = Graph::empty(4);
        let p = EpidemicParams::new(0.7, 1, 1).unwrap();
        let s = seeds(&[1, 3], 4);
        for out in [
            simulate_process(&g, &s, &p, 0),
            simulate_percolation(&g, &s, &p, 0),
        ] {
            assert_eq!(out.ever_infected, 2);
            assert_eq!(out.extinction_time, 1);
        }
    }

    #[test]
    fn single_edge_is_one_coin() {
        let g = gen_path(2);
        let s = seeds(&[0], 2);
        let mut yes = |_: usize| true;
        let mut no = |_: usize| false;
        let mut scratch = Scratch::default();
        assert_eq!(
            simulate_process_with(&g, &s, &mut yes, &mut scratch, false).ever_infected,
            2
        );
        assert_eq!(
            simulate_process_with(&g, &s, &mut no, &mut scratch, false).ever_infected,
            1
        );
    }

    #[test]
    fn forced_coins_infect_whole_component() {
        let g = gen_hypercube(4).unwrap();
        let s = seeds(&[0], 16);
        let mut scratch = Scratch::default();
        let mut yes = |_: usize| true;
        let out = simulate_process_with(&g, &s, &mut yes, &mut scratch, true);
        assert_eq!(out.ever_infected, 16);
        assert_eq!(out.extinction_time, 5);
        let h = out.history.unwrap();
        assert_eq!(
            h.iter().map(Vec::len).collect::<Vec<_>>(),
            vec![1, 4, 6, 4, 1]
        );
        let out = simulate_percolation_with(&g, &s, &mut yes, &mut scratch, false);
        assert_eq!((out.ever_infected, out.extinction_time), (16, 5));
    }

    #[test]
    fn simultaneous_infectors_flip_independent_coins() {
        // 0 and 2 are seeds; 1 is attacked by both in step one.
        let g = gen_path(3);
        let s = seeds(&[0, 2], 3);
        let mut calls = Vec::new();
        let mut record = |e: usize| {
            calls.push(e);
            false
        };
        simulate_process_with(&g, &s, &mut record, &mut Scratch::default(), false);
        assert_eq!(calls, vec![0, 1]);
    }

    #[test]
    fn edge_coins_couple_process_and_percolation() {
        let g = gen_cycle(15).unwrap();
        let s = seeds(&[0, 5], 15);
        let mut scratch = Scratch::default();
        for trial in 0..200 {
            let a = simulate_process_with(
                &g,
                &s,
                &mut EdgeCoins::new(4, trial, 0.6),
                &mut scratch,
                false,
            );
            let b = simulate_percolation_with(
                &g,
                &s,
                &mut EdgeCoins::new(4, trial, 0.6),
                &mut scratch,
                false,
            );
            assert_eq!(a, b);
        }
    }

    #[test]
    fn coupled_runs_are_monotone_in_beta() {
        let g = gen_complete(8);
        let s = seeds(&[0], 8);
        let mut scratch = Scratch::default();
        for trial in 0..300 {
            for &beta in &[0.1, 0.3, 0.5, 0.8] {
                let lo = simulate_process_with(
                    &g,
                    &s,
                    &mut EdgeCoins::new(2, trial, beta),
                    &mut scratch,
                    false,
                );
                let hi = simulate_process_with(
                    &g,
                    &s,
                    &mut EdgeCoins::new(2, trial, beta + 0.1),
                    &mut scratch,
                    false,
                );
                assert!(lo.ever_infected <= hi.ever_infected);
            }
        }
    }

    #[test]
    fn tally_statistics() {
        let mut t = Tally::default();
        t.push(3);
        assert_eq!(t.mean(), 3.0);
        assert_eq!(t.std_error(), None);
        for y in [1, 2, 4] {
            t.push(y);
        }
        assert_eq!(t.mean(), 2.5);
        // Sample variance of {3,1,2,4} is 5/3.
        assert!((t.variance().unwrap() - 5.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn single_trial_estimate_flags_std_error() {
        let g = gen_path(2);
        let p = EpidemicParams::new(0.5, 3, 1).unwrap();
        let e = estimate_mean(&g, &seeds(&[0], 2), &p, Method::Percolation, 1);
        assert!(e.mean == 1.0 || e.mean == 2.0);
        assert_eq!(e.std_error, 0.0);
        assert!(!e.std_error_defined);
    }

    #[test]
    fn estimates_are_reproducible_and_job_independent() {
        let g = gen_cycle(31).unwrap();
        let s = seeds(&[0], 31);
        let p = EpidemicParams::new(0.7, 99, 5000).unwrap();
        for method in [Method::Process, Method::Percolation] {
            let a = estimate_mean(&g, &s, &p, method, 1);
            let b = estimate_mean(&g, &s, &p, method, 4);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn method_parsing() {
        assert_eq!("process".parse::<Method>().unwrap(), Method::Process);
        assert_eq!(Method::Percolation.to_string(), "percolation");
        assert!("sis".parse::<Method>().is_err());
    }
}
