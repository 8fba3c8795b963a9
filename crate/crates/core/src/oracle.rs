//! Exact expected outbreak sizes for small graphs and for trees.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::{bfs_distances, Graph, SeedSet};
use crate::sim::check_beta;

/// Edge cap for [`exact_mean_bruteforce`].
pub const MEAN_EDGE_CAP: usize = 24;
/// Edge cap for the distribution oracles.
pub const PMF_EDGE_CAP: usize = 20;
/// Vertex cap for [`exact_process_distribution`], which uses 64-bit masks.
pub const PROCESS_VERTEX_CAP: usize = 64;

/// Union-find without path compression so unions can be undone.
struct RollbackSets {
    parent: Vec<usize>,
    size: Vec<usize>,
    seeded: Vec<bool>,
    /// Total size of components that contain a seed.
    seeded_total: usize,
    log: Vec<(usize, usize, usize, bool)>,
}

impl RollbackSets {
    fn new(n: usize, seeds: &SeedSet) -> Self {
        let mut seeded = vec![false; n];
        for s in seeds.iter() {
            seeded[s] = true;
        }
        RollbackSets {
            parent: (0..n).collect(),
            size: vec![1; n],
            seeded,
            seeded_total: seeds.len(),
            log: Vec::new(),
        }
    }

    fn find(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    /// `a` and `b` must be distinct roots.
    fn union_roots(&mut self, mut a: usize, mut b: usize) {
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.log.push((a, b, self.seeded_total, self.seeded[a]));
        match (self.seeded[a], self.seeded[b]) {
            (true, false) => self.seeded_total += self.size[b],
            (false, true) => self.seeded_total += self.size[a],
            _ => {}
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        self.seeded[a] |= self.seeded[b];
    }

    fn undo(&mut self) {
        let (a, b, total, a_seeded) = self.log.pop().expect("nothing to undo");
        self.parent[b] = b;
        self.size[a] -= self.size[b];
        self.seeded[a] = a_seeded;
        self.seeded_total = total;
    }
}

/// Edges of the seed components in BFS discovery order; edges elsewhere
/// cannot change the seed clusters.
fn relevant_edges(g: &Graph, seeds: &SeedSet) -> Vec<(usize, usize)> {
    let dist = bfs_distances(g, seeds);
    let mut order: Vec<usize> = (0..g.n()).filter(|&v| dist.get(v).is_some()).collect();
    order.sort_by_key(|&v| dist.get(v));
    let mut taken = vec![false; g.m()];
    let mut edges = Vec::new();
    for u in order {
        for (v, e) in g.incident(u) {
            if !std::mem::replace(&mut taken[e], true) {
                edges.push((u, v));
            }
        }
    }
    edges
}

fn check_cap(m: usize, cap: usize) -> Result<()> {
    if m > cap {
        return Err(Error::CapExceeded {
            what: "edge count",
            actual: m,
            cap,
        });
    }
    Ok(())
}

/// `E[Y]` by summing over all `2^m` open-edge subsets.
///
/// The sum is evaluated as the binary recursion
/// `E = beta * E[edge open] + (1 - beta) * E[edge closed]`, which adds the
/// subset terms along a balanced tree. An edge whose endpoints are already
/// joined takes the same value on both branches and is not split.
pub fn exact_mean_bruteforce(g: &Graph, seeds: &SeedSet, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    check_cap(g.m(), MEAN_EDGE_CAP)?;
    let edges = relevant_edges(g, seeds);
    let mut sets = RollbackSets::new(g.n(), seeds);

    fn recurse(i: usize, edges: &[(usize, usize)], sets: &mut RollbackSets, beta: f64) -> f64 {
        let Some(&(u, v)) = edges.get(i) else {
            return sets.seeded_total as f64;
        };
        let (ru, rv) = (sets.find(u), sets.find(v));
        if ru == rv {
            return recurse(i + 1, edges, sets, beta);
        }
        let closed = recurse(i + 1, edges, sets, beta);
        sets.union_roots(ru, rv);
        let open = recurse(i + 1, edges, sets, beta);
        sets.undo();
        beta * open + (1.0 - beta) * closed
    }

    Ok(recurse(0, &edges, &mut sets, beta))
}

/// Distribution of `Y` under bond percolation; entry `y` is `P(Y = y)` for
/// `y in 0..=n`.
pub fn exact_distribution_bruteforce(g: &Graph, seeds: &SeedSet, beta: f64) -> Result<Vec<f64>> {
    check_beta(beta)?;
    check_cap(g.m(), PMF_EDGE_CAP)?;
    let edges = relevant_edges(g, seeds);
    let mut sets = RollbackSets::new(g.n(), seeds);
    let mut pmf = vec![0.0; g.n() + 1];

    fn recurse(
        i: usize,
        weight: f64,
        edges: &[(usize, usize)],
        sets: &mut RollbackSets,
        beta: f64,
        pmf: &mut [f64],
    ) {
        let Some(&(u, v)) = edges.get(i) else {
            pmf[sets.seeded_total] += weight;
            return;
        };
        let (ru, rv) = (sets.find(u), sets.find(v));
        if ru == rv {
            return recurse(i + 1, weight, edges, sets, beta, pmf);
        }
        recurse(i + 1, weight * (1.0 - beta), edges, sets, beta, pmf);
        sets.union_roots(ru, rv);
        recurse(i + 1, weight * beta, edges, sets, beta, pmf);
        sets.undo();
    }

    recurse(0, 1.0, &edges, &mut sets, beta, &mut pmf);
    Ok(pmf)
}

/// Distribution of `Y` for the time-stepped process, by enumerating every
/// outcome of every infection attempt at every step.
pub fn exact_process_distribution(g: &Graph, seeds: &SeedSet, beta: f64) -> Result<Vec<f64>> {
    check_beta(beta)?;
    check_cap(g.m(), PMF_EDGE_CAP)?;
    if g.n() > PROCESS_VERTEX_CAP {
        return Err(Error::CapExceeded {
            what: "vertex count",
            actual: g.n(),
            cap: PROCESS_VERTEX_CAP,
        });
    }
    let seed_mask = seeds.iter().fold(0u64, |m, s| m | 1 << s);
    let mut pmf = vec![0.0; g.n() + 1];
    // (ever infected, currently infected) -> probability
    let mut layer: HashMap<(u64, u64), f64> = HashMap::from([((seed_mask, seed_mask), 1.0)]);
    while !layer.is_empty() {
        let mut next_layer: HashMap<(u64, u64), f64> = HashMap::new();
        let mut states: Vec<_> = layer.into_iter().collect();
        states.sort_unstable_by_key(|&(k, _)| k);
        for ((ever, infected), p) in states {
            if infected == 0 {
                pmf[ever.count_ones() as usize] += p;
                continue;
            }
            let targets: Vec<usize> = (0..g.n())
                .filter(|&u| infected >> u & 1 == 1)
                .flat_map(|u| g.neighbors(u).iter().copied())
                .filter(|&v| ever >> v & 1 == 0)
                .collect();
            let a = targets.len();
            for outcome in 0u64..1 << a {
                let successes = outcome.count_ones() as i32;
                let weight = beta.powi(successes) * (1.0 - beta).powi(a as i32 - successes);
                let newly = targets
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| outcome >> i & 1 == 1)
                    .fold(0u64, |m, (_, &v)| m | 1 << v);
                *next_layer.entry((ever | newly, newly)).or_insert(0.0) += p * weight;
            }
        }
        layer = next_layer;
    }
    Ok(pmf)
}

/// `E[Y]` on a forest with one seed per tree: `sum_v beta^dist(v)`.
pub fn exact_mean_tree(t: &Graph, seeds: &SeedSet, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let comp = t.components();
    let components = comp.iter().max().map_or(0, |c| c + 1);
    let mut vertices = vec![0usize; components];
    let mut edges = vec![0usize; components];
    for &c in &comp {
        vertices[c] += 1;
    }
    for &(u, _) in t.edges() {
        edges[comp[u]] += 1;
    }
    let mut owner = vec![None; components];
    for s in seeds.iter() {
        let c = comp[s];
        if let Some(other) = owner[c].replace(s) {
            return Err(Error::Domain(format!(
                "seeds {other} and {s} share a component; the distance sum is not exact there"
            )));
        }
        if edges[c] + 1 != vertices[c] {
            return Err(Error::Domain(format!(
                "component of seed {s} is not a tree ({} vertices, {} edges)",
                vertices[c], edges[c]
            )));
        }
    }
    Ok(crate::bounds::distance_power_sum(
        &bfs_distances(t, seeds),
        beta,
    ))
}

pub fn pmf_mean(pmf: &[f64]) -> f64 {
    pmf.iter().enumerate().map(|(y, p)| y as f64 * p).sum()
}
