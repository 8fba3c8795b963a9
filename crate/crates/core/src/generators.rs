//! Constructors for the graph families used throughout the crate.

use std::collections::HashSet;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::unit_f64;

/// Largest hypercube dimension accepted (2^24 vertices).
pub const MAX_HYPERCUBE_DIM: usize = 24;

/// Attempt budget for rejection samplers before declaring the parameters
/// infeasible.
pub const DEFAULT_MAX_ATTEMPTS: usize = 100_000;

pub fn gen_cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "cycle needs n >= 3, got {n}"
        )));
    }
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Graph::from_edges(n, &edges)
}

pub fn gen_path(n: usize) -> Graph {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    Graph::from_edges(n, &edges).expect("path edges are valid")
}

pub fn gen_complete(n: usize) -> Graph {
    let edges: Vec<_> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect();
    Graph::from_edges(n, &edges).expect("complete graph edges are valid")
}

/// `Q_d`: vertex ids are bitmasks, edges join masks at Hamming distance 1.
pub fn gen_hypercube(d: usize) -> Result<Graph> {
    if d == 0 || d > MAX_HYPERCUBE_DIM {
        return Err(Error::InvalidParameter(format!(
            "hypercube dimension must be in 1..={MAX_HYPERCUBE_DIM}, got {d}"
        )));
    }
    let n = 1usize << d;
    let edges: Vec<_> = (0..n)
        .flat_map(|u| (0..d).map(move |b| (u, u ^ (1 << b))))
        .filter(|&(u, v)| u < v)
        .collect();
    Graph::from_edges(n, &edges)
}

/// Rooted tree of height `height` in which the root and every internal
/// vertex have `r - 1` children, so internal non-root vertices have degree
/// `r`. The root is vertex 0 and ids follow BFS order.
pub fn gen_rary_tree(r: usize, height: usize) -> Result<Graph> {
    if r < 2 {
        return Err(Error::InvalidParameter(format!(
            "r-ary tree needs r >= 2, got {r}"
        )));
    }
    let branching = r - 1;
    let mut total: usize = 1;
    let mut level: usize = 1;
    for _ in 0..height {
        level = level
            .checked_mul(branching)
            .ok_or_else(|| Error::InvalidParameter("tree too large".into()))?;
        total = total
            .checked_add(level)
            .ok_or_else(|| Error::InvalidParameter("tree too large".into()))?;
    }
    let mut edges = Vec::with_capacity(total - 1);
    let internal = total - level;
    for parent in 0..internal {
        for c in 0..branching {
            edges.push((parent, 1 + parent * branching + c));
        }
    }
    Graph::from_edges(total, &edges)
}

/// Cycle `C_n` plus `chords` extra edges forming a uniform random perfect
/// matching on `2 * chords` distinct vertices sampled without replacement.
/// A matching that reuses a cycle edge is discarded and resampled.
pub fn gen_generalized_cycle<R: Rng + ?Sized>(
    n: usize,
    chords: usize,
    rng: &mut R,
) -> Result<Graph> {
    if n < 3 || 2 * chords > n {
        return Err(Error::InvalidParameter(format!(
            "generalized cycle needs n >= 3 and 2*chords <= n, got n={n}, chords={chords}"
        )));
    }
    let cycle_edge = |u: usize, v: usize| {
        let diff = u.abs_diff(v);
        diff == 1 || diff == n - 1
    };
    for _ in 0..DEFAULT_MAX_ATTEMPTS {
        // `index::sample` returns the subset in random order, so pairing
        // consecutive entries gives a uniform matching on that subset.
        let picked = index::sample(rng, n, 2 * chords).into_vec();
        let matching: Vec<_> = picked.chunks_exact(2).map(|p| (p[0], p[1])).collect();
        if matching.iter().any(|&(u, v)| cycle_edge(u, v)) {
            continue;
        }
        let mut edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        edges.extend(matching);
        return Graph::from_edges(n, &edges);
    }
    Err(Error::Domain(format!(
        "no chord matching avoiding cycle edges found for n={n}, chords={chords}"
    )))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegularSampling {
    /// Configuration model with whole-graph rejection; exactly uniform.
    #[default]
    Exact,
    /// One pairing, loops and repeated edges deleted. Not regular in
    /// general and not uniform; only for parameters where rejection is
    /// hopeless.
    EraseCollisions,
}

/// Random `r`-regular graph on `n` vertices via the pairing model.
pub fn gen_random_regular<R: Rng + ?Sized>(
    n: usize,
    r: usize,
    rng: &mut R,
    sampling: RegularSampling,
) -> Result<Graph> {
    if !(n * r).is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "n*r must be even for an r-regular graph, got n={n}, r={r} (n*r={})",
            n * r
        )));
    }
    if r > 0 && r >= n {
        return Err(Error::Domain(format!(
            "r-regular graph needs r < n, got n={n}, r={r}"
        )));
    }
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, r)).collect();
    match sampling {
        RegularSampling::Exact => {
            let mut seen = HashSet::with_capacity(n * r / 2);
            'attempt: for _ in 0..DEFAULT_MAX_ATTEMPTS {
                stubs.shuffle(rng);
                seen.clear();
                for p in stubs.chunks_exact(2) {
                    let (u, v) = (p[0].min(p[1]), p[0].max(p[1]));
                    if u == v || !seen.insert((u, v)) {
                        continue 'attempt;
                    }
                }
                let edges: Vec<_> = seen.iter().copied().collect();
                return Graph::from_edges(n, &edges);
            }
            Err(Error::Domain(format!(
                "rejection sampling found no simple {r}-regular graph on {n} vertices \
                 in {DEFAULT_MAX_ATTEMPTS} attempts"
            )))
        }
        RegularSampling::EraseCollisions => {
            stubs.shuffle(rng);
            let edges: Vec<_> = stubs
                .chunks_exact(2)
                .filter(|p| p[0] != p[1])
                .map(|p| (p[0], p[1]))
                .collect();
            Graph::from_edges(n, &edges)
        }
    }
}

/// Offspring law and truncation caps for Galton–Watson trees.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GwConfig {
    /// `offspring_pmf[j]` is the probability of `j` children.
    pub offspring_pmf: Vec<f64>,
    pub depth_cap: usize,
    pub size_cap: usize,
}

impl GwConfig {
    pub const DEFAULT_DEPTH_CAP: usize = 60;
    pub const DEFAULT_SIZE_CAP: usize = 1_000_000;

    pub fn new(offspring_pmf: Vec<f64>, depth_cap: usize, size_cap: usize) -> Result<Self> {
        if offspring_pmf.is_empty() || offspring_pmf.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::InvalidParameter(
                "offspring pmf entries must lie in [0, 1]".into(),
            ));
        }
        let total: f64 = offspring_pmf.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "offspring pmf sums to {total}, expected 1"
            )));
        }
        if depth_cap == 0 || size_cap == 0 {
            return Err(Error::InvalidParameter(
                "depth and size caps must be at least 1".into(),
            ));
        }
        Ok(GwConfig {
            offspring_pmf,
            depth_cap,
            size_cap,
        })
    }

    pub fn with_default_caps(offspring_pmf: Vec<f64>) -> Result<Self> {
        Self::new(
            offspring_pmf,
            Self::DEFAULT_DEPTH_CAP,
            Self::DEFAULT_SIZE_CAP,
        )
    }

    /// Mean offspring count `c`.
    pub fn mean(&self) -> f64 {
        self.offspring_pmf
            .iter()
            .enumerate()
            .map(|(j, p)| j as f64 * p)
            .sum()
    }

    fn sample_offspring<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = unit_f64(rng);
        let mut acc = 0.0;
        for (j, &p) in self.offspring_pmf.iter().enumerate() {
            acc += p;
            if u < acc {
                return j;
            }
        }
        // Rounding left a sliver above the cumulative sum.
        self.offspring_pmf
            .iter()
            .rposition(|&p| p > 0.0)
            .unwrap_or(0)
    }
}

#[derive(Clone, Debug)]
pub struct GwTree {
    pub graph: Graph,
    pub root: usize,
    /// True if some vertex would have had children beyond the depth or
    /// size cap.
    pub truncated: bool,
}

/// Samples a Galton–Watson family tree generation by generation. Vertices at
/// depth `depth_cap` are kept but not expanded.
pub fn gen_gw_tree<R: Rng + ?Sized>(cfg: &GwConfig, rng: &mut R) -> GwTree {
    let mut edges = Vec::new();
    let mut frontier = vec![0usize];
    let mut count = 1usize;
    let mut truncated = false;
    'grow: for depth in 0..=cfg.depth_cap {
        let mut next = Vec::new();
        for &parent in &frontier {
            let children = cfg.sample_offspring(rng);
            if children == 0 {
                continue;
            }
            if depth == cfg.depth_cap {
                truncated = true;
                break 'grow;
            }
            for _ in 0..children {
                if count == cfg.size_cap {
                    truncated = true;
                    break 'grow;
                }
                edges.push((parent, count));
                next.push(count);
                count += 1;
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    GwTree {
        graph: Graph::from_edges(count, &edges).expect("tree edges are valid"),
        root: 0,
        truncated,
    }
}
