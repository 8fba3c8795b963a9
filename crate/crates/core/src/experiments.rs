//! Desk-scale experiments: convergence of the lower bound and of Monte
//! Carlo means to the large-`n` limits of locally tree-like families, the
//! finite-`n` sandwich around the lower bound, and the relative gap on
//! complete graphs.
//!
//! Randomness layout for a cell `(n, beta)` with master seed `s`:
//! graph `g` uses `sub_seed(s, [n, g])`, seed draw `d` on that graph uses
//! `sub_seed(s, [n, g, d, 1])`, and its Monte Carlo trials use master seed
//! `sub_seed(s, [n, g, d, 2])`. None of these depend on `beta`, so every
//! `beta` in the grid sees the same graphs, seed sets and edge uniforms.

use std::collections::BTreeMap;
use std::str::FromStr;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::bounds::{cf_kn_lower, degree_upper_bound, distance_power_sum, gap_bound};
use crate::error::{Error, Result};
use crate::generators::{
    gen_complete, gen_cycle, gen_generalized_cycle, gen_hypercube, gen_random_regular,
    RegularSampling,
};
use crate::graph::{bfs_distances, tree_like_radius, tree_like_radius_around, Graph, SeedSet};
use crate::oracle::{exact_mean_bruteforce, MEAN_EDGE_CAP};
use crate::rng::{stream_rng, sub_seed};
use crate::sim::{check_beta, run_trials, EpidemicParams, Method, Tally};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Cycle,
    GeneralizedCycle {
        chords: usize,
    },
    RandomRegular {
        r: usize,
    },
    /// Grid values are the dimension `d`, not the vertex count.
    Hypercube,
    Complete,
    Edgeless,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Cycle => "cycle",
            Family::GeneralizedCycle { .. } => "generalized_cycle",
            Family::RandomRegular { .. } => "random_regular",
            Family::Hypercube => "hypercube",
            Family::Complete => "complete",
            Family::Edgeless => "edgeless",
        }
    }

    fn is_random(&self) -> bool {
        matches!(
            self,
            Family::GeneralizedCycle { .. } | Family::RandomRegular { .. }
        )
    }

    fn sample(&self, n: usize, seed: u64) -> Result<Graph> {
        let mut rng = stream_rng(seed, 0);
        match *self {
            Family::Cycle => gen_cycle(n),
            Family::GeneralizedCycle { chords } => gen_generalized_cycle(n, chords, &mut rng),
            Family::RandomRegular { r } => {
                gen_random_regular(n, r, &mut rng, RegularSampling::Exact)
            }
            Family::Hypercube => gen_hypercube(n),
            Family::Complete => Ok(gen_complete(n)),
            Family::Edgeless => Ok(Graph::empty(n)),
        }
    }

    /// Large-`n` limit of `E[Y]` with `k` well-separated seeds, where the
    /// family has one.
    pub fn limit(&self, k: usize, beta: f64) -> Option<f64> {
        let per_seed = match *self {
            Family::Cycle | Family::GeneralizedCycle { .. } => (1.0 + beta) / (1.0 - beta),
            Family::RandomRegular { r } => {
                let x = r.saturating_sub(1) as f64 * beta;
                if x >= 1.0 {
                    return None;
                }
                (1.0 + beta) / (1.0 - x)
            }
            Family::Edgeless => 1.0,
            Family::Hypercube | Family::Complete => return None,
        };
        Some(k as f64 * per_seed)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Convergence,
    Sandwich,
    KnGap,
}

fn default_k() -> usize {
    1
}
fn default_trials() -> usize {
    10_000
}
fn default_one() -> usize {
    1
}
fn default_radius_cap() -> usize {
    64
}
fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub mode: Mode,
    #[serde(flatten)]
    pub family: Family,
    pub n: Vec<usize>,
    pub beta: Vec<f64>,
    #[serde(default = "default_k")]
    pub k: usize,
    /// Monte Carlo runs per cell, split evenly over graphs and seed draws.
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Graph samples per cell; forced to 1 for deterministic families.
    #[serde(default)]
    pub graphs: Option<usize>,
    /// Seed sets drawn per graph.
    #[serde(default = "default_one")]
    pub seed_draws: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub method: Method,
    /// Sandwich radius; defaults to `n / 3` on cycles and to the certified
    /// tree-like radius otherwise.
    #[serde(default)]
    pub alpha: Option<usize>,
    #[serde(default = "default_radius_cap")]
    pub radius_cap: usize,
    /// Drop seed draws whose seeds are within twice the tree-like radius.
    #[serde(default = "default_true")]
    pub exclude_close_seeds: bool,
    #[serde(default = "default_one")]
    pub jobs: usize,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            msg: e.to_string(),
        })?;
        Self::from_value(value)
    }

    fn from_value(value: serde_json::Value) -> Result<Self> {
        // `deny_unknown_fields` does not combine with the flattened family.
        if let Some(map) = value.as_object() {
            if let Some(bad) = map.keys().find(|k| !SPEC_KEYS.contains(&k.as_str())) {
                return Err(Error::Parse {
                    line: 0,
                    msg: format!("unknown key {bad:?}"),
                });
            }
        }
        serde_json::from_value(value).map_err(|e| Error::Parse {
            line: 0,
            msg: e.to_string(),
        })
    }

    /// `key = value` lines; `n` and `beta` take comma-separated lists.
    pub fn from_key_values(text: &str) -> Result<Self> {
        let mut map = serde_json::Map::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(Error::Parse {
                line: i + 1,
                msg: format!("expected `key = value`, got {line:?}"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let json = if key == "n" || key == "beta" {
                serde_json::Value::Array(value.split(',').map(|v| scalar(v.trim())).collect())
            } else {
                scalar(value)
            };
            map.insert(key.to_string(), json);
        }
        Self::from_value(serde_json::Value::Object(map))
    }

    /// JSON if the text starts with `{`, key-value lines otherwise.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Self::from_json(text)
        } else {
            Self::from_key_values(text)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n.is_empty() || self.beta.is_empty() {
            return Err(Error::InvalidParameter(
                "n and beta grids must be nonempty".into(),
            ));
        }
        for &b in &self.beta {
            check_beta(b)?;
        }
        if self.k == 0 || self.trials == 0 || self.seed_draws == 0 || self.graphs == Some(0) {
            return Err(Error::InvalidParameter(
                "k, trials, graphs and seed_draws must be at least 1".into(),
            ));
        }
        for &n in &self.n {
            let vertices = self.vertex_count(n)?;
            if self.k > vertices {
                return Err(Error::InvalidParameter(format!(
                    "k = {} seeds do not fit in {vertices} vertices",
                    self.k
                )));
            }
            if let Family::RandomRegular { r } = self.family {
                if (n * r) % 2 != 0 {
                    return Err(Error::Domain(format!("n*r must be even, got n={n}, r={r}")));
                }
            }
        }
        match self.mode {
            Mode::Sandwich
                if !matches!(
                    self.family,
                    Family::Cycle | Family::GeneralizedCycle { .. } | Family::Edgeless
                ) =>
            {
                Err(Error::Domain(format!(
                    "sandwich runs need a family with a certified tree radius, got {}",
                    self.family.name()
                )))
            }
            Mode::KnGap if self.family != Family::Complete => {
                Err(Error::Domain("kn_gap runs use the complete family".into()))
            }
            _ => Ok(()),
        }
    }

    fn vertex_count(&self, n: usize) -> Result<usize> {
        match self.family {
            Family::Hypercube => {
                if n == 0 || n > crate::generators::MAX_HYPERCUBE_DIM {
                    return Err(Error::InvalidParameter(format!(
                        "bad hypercube dimension {n}"
                    )));
                }
                Ok(1 << n)
            }
            _ => Ok(n),
        }
    }

    fn graph_count(&self) -> usize {
        if self.family.is_random() {
            self.graphs.unwrap_or(5)
        } else {
            1
        }
    }
}

const SPEC_KEYS: &[&str] = &[
    "mode",
    "family",
    "r",
    "chords",
    "n",
    "beta",
    "k",
    "trials",
    "graphs",
    "seed_draws",
    "seed",
    "method",
    "alpha",
    "radius_cap",
    "exclude_close_seeds",
    "jobs",
];

fn scalar(text: &str) -> serde_json::Value {
    if let Ok(v) = u64::from_str(text) {
        v.into()
    } else if let Ok(v) = f64::from_str(text) {
        v.into()
    } else if let Ok(v) = bool::from_str(text) {
        v.into()
    } else {
        text.into()
    }
}

/// One `(n, beta)` cell. Column order is the CSV column order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub family: &'static str,
    pub n: usize,
    pub vertices: usize,
    pub beta: f64,
    pub k: usize,
    pub graphs: usize,
    pub draws_used: usize,
    pub flagged_draws: usize,
    pub trials: u64,
    /// Lower bound averaged over the seed draws used.
    pub lb: f64,
    pub mc_mean: f64,
    pub mc_se: f64,
    /// Brute-force `E[Y]` averaged over draws, for graphs within the cap.
    pub exact: Option<f64>,
    pub limit: Option<f64>,
    pub gap: f64,
    pub ub_degree: Option<f64>,
    /// Bound on `E[Y] - LB` from the smallest certified tree radius.
    pub gap_bound: Option<f64>,
    pub alpha: Option<usize>,
    pub sandwich_rhs: Option<f64>,
    pub sandwich_holds: Option<bool>,
    pub relative_gap: Option<f64>,
    pub kn_lower: Option<f64>,
    /// Smallest single-seed tree-like radius over seeds and draws.
    pub tree_radius_min: usize,
    pub tree_radius_mean: f64,
    pub min_seed_distance: Option<usize>,
    /// Every draw had close seeds, so none could be excluded.
    pub close_seeds: bool,
}

struct Draw {
    lb: f64,
    exact: Option<f64>,
    radius: usize,
    alpha: Option<usize>,
    sandwich_rhs: Option<f64>,
    min_seed_distance: Option<usize>,
    flagged: bool,
    tally: Tally,
    max_degree: usize,
}

fn min_pairwise_distance(g: &Graph, seeds: &SeedSet) -> Option<usize> {
    let ids = seeds.as_slice();
    let mut best: Option<usize> = None;
    for (i, &s) in ids.iter().enumerate().take(ids.len().saturating_sub(1)) {
        let dist = bfs_distances(g, &SeedSet::single(s, g.n()).expect("seed in range"));
        for &t in &ids[i + 1..] {
            if let Some(d) = dist.get(t) {
                best = Some(best.map_or(d, |b| b.min(d)));
            }
        }
    }
    best
}

fn run_cell(spec: &ExperimentSpec, n: usize, beta: f64, graphs: &[Graph]) -> Result<ExperimentRow> {
    let draws_per_graph = spec.seed_draws;
    let total_draws = graphs.len() * draws_per_graph;
    let trials_per_draw = spec.trials.div_ceil(total_draws) as u64;
    let mut draws = Vec::with_capacity(total_draws);
    for (gi, g) in graphs.iter().enumerate() {
        for d in 0..draws_per_graph {
            let labels = [n as u64, gi as u64, d as u64];
            let mut rng = stream_rng(
                sub_seed(spec.seed, &[labels[0], labels[1], labels[2], 1]),
                0,
            );
            let ids = index::sample(&mut rng, g.n(), spec.k).into_vec();
            let seeds = SeedSet::new(ids, g.n())?;
            let dist = bfs_distances(g, &seeds);
            let lb = distance_power_sum(&dist, beta);
            let radius = seeds
                .iter()
                .map(|s| tree_like_radius(g, s, spec.radius_cap))
                .min()
                .unwrap();
            let min_seed_distance = min_pairwise_distance(g, &seeds);
            let flagged = min_seed_distance.is_some_and(|m| m <= 2 * radius);
            let (alpha, sandwich_rhs) = if spec.mode == Mode::Sandwich {
                let wanted = spec.alpha.unwrap_or(match spec.family {
                    Family::Cycle => n / 3,
                    _ => spec.radius_cap,
                });
                let certified = tree_like_radius_around(g, seeds.as_slice(), wanted);
                let rhs = lb * (1.0 + beta.powi(certified as i32) * g.n() as f64);
                (Some(certified), Some(rhs))
            } else {
                (None, None)
            };
            let exact = if g.m() <= MEAN_EDGE_CAP {
                Some(exact_mean_bruteforce(g, &seeds, beta)?)
            } else {
                None
            };
            let params = EpidemicParams::new(
                beta,
                sub_seed(spec.seed, &[labels[0], labels[1], labels[2], 2]),
                trials_per_draw as usize,
            )?;
            let tally = run_trials(
                g,
                &seeds,
                &params,
                spec.method,
                0,
                trials_per_draw,
                spec.jobs,
            );
            draws.push(Draw {
                lb,
                exact,
                radius,
                alpha,
                sandwich_rhs,
                min_seed_distance,
                flagged,
                tally,
                max_degree: g.max_degree(),
            });
        }
    }
    let flagged_draws = draws.iter().filter(|d| d.flagged).count();
    let close_seeds = flagged_draws == draws.len() && spec.exclude_close_seeds;
    let used: Vec<&Draw> = if spec.exclude_close_seeds && !close_seeds {
        draws.iter().filter(|d| !d.flagged).collect()
    } else {
        draws.iter().collect()
    };
    let count = used.len() as f64;
    let mean_of = |f: &dyn Fn(&Draw) -> f64| used.iter().map(|d| f(d)).sum::<f64>() / count;
    let tally = used.iter().fold(Tally::default(), |t, d| t.merge(d.tally));
    let lb = mean_of(&|d| d.lb);
    let mc_mean = tally.mean();
    let mc_se = tally.std_error().unwrap_or(0.0);
    let max_degree = used.iter().map(|d| d.max_degree).max().unwrap_or(0);
    let tree_radius_min = used.iter().map(|d| d.radius).min().unwrap_or(0);
    let exact = used
        .iter()
        .all(|d| d.exact.is_some())
        .then(|| mean_of(&|d| d.exact.unwrap()));
    let sandwich_rhs = (spec.mode == Mode::Sandwich).then(|| mean_of(&|d| d.sandwich_rhs.unwrap()));
    let sandwich_holds = sandwich_rhs.map(|rhs| {
        let statistical = lb <= mc_mean + 3.0 * mc_se && mc_mean <= rhs + 3.0 * mc_se;
        let exact_ok = used.iter().all(|d| match d.exact {
            Some(e) => d.lb <= e + 1e-9 && e <= d.sandwich_rhs.unwrap() + 1e-9,
            None => true,
        });
        statistical && exact_ok
    });
    let is_kn = spec.mode == Mode::KnGap;
    Ok(ExperimentRow {
        family: spec.family.name(),
        n,
        vertices: graphs[0].n(),
        beta,
        k: spec.k,
        graphs: graphs.len(),
        draws_used: used.len(),
        flagged_draws,
        trials: tally.count,
        lb,
        mc_mean,
        mc_se,
        exact,
        limit: spec.family.limit(spec.k, beta),
        gap: mc_mean - lb,
        ub_degree: degree_upper_bound(max_degree, spec.k, beta),
        gap_bound: (tree_radius_min >= 1)
            .then(|| gap_bound(beta, max_degree, tree_radius_min, 0.0).ok())
            .flatten()
            .map(|b| b * spec.k as f64),
        alpha: used.iter().filter_map(|d| d.alpha).min(),
        sandwich_rhs,
        sandwich_holds,
        relative_gap: is_kn.then(|| (mc_mean - lb) / lb),
        kn_lower: if is_kn {
            Some(cf_kn_lower(graphs[0].n(), beta)?)
        } else {
            None
        },
        tree_radius_min,
        tree_radius_mean: mean_of(&|d| d.radius as f64),
        min_seed_distance: used.iter().filter_map(|d| d.min_seed_distance).min(),
        close_seeds,
    })
}

/// Runs every `(n, beta)` cell, ordered by `n` then `beta` as listed.
pub fn run(spec: &ExperimentSpec) -> Result<Vec<ExperimentRow>> {
    spec.validate()?;
    let mut rows = Vec::with_capacity(spec.n.len() * spec.beta.len());
    for &n in &spec.n {
        let graphs = (0..spec.graph_count())
            .map(|gi| {
                spec.family
                    .sample(n, sub_seed(spec.seed, &[n as u64, gi as u64]))
            })
            .collect::<Result<Vec<_>>>()?;
        for &beta in &spec.beta {
            rows.push(run_cell(spec, n, beta, &graphs)?);
        }
    }
    Ok(rows)
}

/// Convergence rows: bound, estimate and limit per cell.
pub fn run_convergence(spec: &ExperimentSpec) -> Result<Vec<ExperimentRow>> {
    run(&ExperimentSpec {
        mode: Mode::Convergence,
        ..spec.clone()
    })
}

/// Sandwich rows on cycles and generalized cycles:
/// `LB <= E[Y] <= LB (1 + beta^alpha n)` with `alpha` a certified tree radius.
pub fn run_sandwich(spec: &ExperimentSpec) -> Result<Vec<ExperimentRow>> {
    run(&ExperimentSpec {
        mode: Mode::Sandwich,
        ..spec.clone()
    })
}

/// Relative gap `(E[Y] - LB) / LB` on `K_n` from one seed.
pub fn run_kn_gap(ns: &[usize], beta: f64, trials: usize, seed: u64) -> Result<Vec<ExperimentRow>> {
    run(&ExperimentSpec {
        mode: Mode::KnGap,
        family: Family::Complete,
        n: ns.to_vec(),
        beta: vec![beta],
        k: 1,
        trials,
        graphs: None,
        seed_draws: 1,
        seed,
        method: Method::Percolation,
        alpha: None,
        radius_cap: 4,
        exclude_close_seeds: false,
        jobs: 1,
    })
}

pub fn rows_to_csv(rows: &[ExperimentRow]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        return Ok(String::new());
    }
    for row in rows {
        writer
            .serialize(row)
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Aggregate checks over a finished run.
#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub mode: Mode,
    pub family: &'static str,
    pub cells: usize,
    /// Cells with `lb > mc_mean + 3 se`.
    pub lb_violations: usize,
    /// Cells with `mc_mean > ub_degree + 3 se`.
    pub ub_violations: usize,
    pub sandwich_failures: usize,
    /// `|mc_mean - limit|` at the largest `n`, keyed by `beta`.
    pub error_to_limit_at_largest_n: BTreeMap<String, f64>,
}

pub fn summarize(spec: &ExperimentSpec, rows: &[ExperimentRow]) -> Summary {
    let largest = rows.iter().map(|r| r.n).max();
    Summary {
        mode: spec.mode,
        family: spec.family.name(),
        cells: rows.len(),
        lb_violations: rows
            .iter()
            .filter(|r| r.lb > r.mc_mean + 3.0 * r.mc_se)
            .count(),
        ub_violations: rows
            .iter()
            .filter(|r| r.ub_degree.is_some_and(|ub| r.mc_mean > ub + 3.0 * r.mc_se))
            .count(),
        sandwich_failures: rows
            .iter()
            .filter(|r| r.sandwich_holds == Some(false))
            .count(),
        error_to_limit_at_largest_n: rows
            .iter()
            .filter(|r| Some(r.n) == largest)
            .filter_map(|r| r.limit.map(|l| (r.beta.to_string(), (r.mc_mean - l).abs())))
            .collect(),
    }
}
