//! Immutable simple undirected graphs, multi-source BFS, neighborhood balls
//! and the structural checks used to certify local tree-likeness.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};

/// Simple undirected graph on vertices `0..n` stored in CSR form.
///
/// Neighbor lists are strictly increasing. Every undirected edge has a dense
/// id in `0..m`; ids follow the lexicographic order of `(min, max)` pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    edge_ids: Vec<usize>,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Builds the canonical graph from an edge list. Duplicate edges (in
    /// either orientation) collapse; self-loops are rejected.
    pub fn from_edges(n: usize, edge_list: &[(usize, usize)]) -> Result<Self> {
        let mut edges = Vec::with_capacity(edge_list.len());
        for &(u, v) in edge_list {
            for w in [u, v] {
                if w >= n {
                    return Err(Error::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            edges.push((u.min(v), u.max(v)));
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(Self::from_canonical_edges(n, edges))
    }

    /// `edges` must be sorted, deduplicated and have `u < v < n`.
    fn from_canonical_edges(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut degree = vec![0usize; n];
        for &(u, v) in &edges {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets[..n].to_vec();
        let mut targets = vec![0usize; 2 * edges.len()];
        let mut edge_ids = vec![0usize; 2 * edges.len()];
        // Iterating edges in lexicographic order fills every neighbor list in
        // increasing order: for fixed w, neighbors u < w arrive sorted by u
        // (as first components) before neighbors v > w (sorted as second
        // components of the (w, v) block).
        for (id, &(u, v)) in edges.iter().enumerate() {
            targets[cursor[u]] = v;
            edge_ids[cursor[u]] = id;
            cursor[u] += 1;
            targets[cursor[v]] = u;
            edge_ids[cursor[v]] = id;
            cursor[v] += 1;
        }
        let g = Graph {
            offsets,
            targets,
            edge_ids,
            edges,
        };
        debug_assert!((0..n).all(|v| g.neighbors(v).windows(2).all(|w| w[0] < w[1])));
        g
    }

    pub fn empty(n: usize) -> Self {
        Self::from_canonical_edges(n, Vec::new())
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    /// `(neighbor, edge id)` pairs around `v`, neighbors ascending.
    #[inline]
    pub fn incident(&self, v: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let range = self.offsets[v]..self.offsets[v + 1];
        self.targets[range.clone()]
            .iter()
            .copied()
            .zip(self.edge_ids[range].iter().copied())
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Canonical `(u, v)` pairs with `u < v`, indexed by edge id.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n()).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// The graph with vertex `v` renamed to `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n();
        if perm.len() != n {
            return Err(Error::InvalidParameter(format!(
                "permutation has length {}, graph has {} vertices",
                perm.len(),
                n
            )));
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidParameter("not a permutation".into()));
            }
        }
        let edges: Vec<_> = self
            .edges
            .iter()
            .map(|&(u, v)| (perm[u], perm[v]))
            .collect();
        Self::from_edges(n, &edges)
    }

    /// A copy of the graph with edge `edge_id` deleted.
    pub fn without_edge(&self, edge_id: usize) -> Self {
        let edges = self
            .edges
            .iter()
            .enumerate()
            .filter(|&(id, _)| id != edge_id)
            .map(|(_, &e)| e)
            .collect();
        Self::from_canonical_edges(self.n(), edges)
    }

    /// The augmented graph with an extra vertex (id `n`) joined to every
    /// seed. Returns the graph and the id of the added vertex.
    pub fn with_virtual_root(&self, seeds: &SeedSet) -> (Self, usize) {
        let root = self.n();
        let mut edges = self.edges.clone();
        edges.extend(seeds.iter().map(|s| (s, root)));
        edges.sort_unstable();
        (Self::from_canonical_edges(root + 1, edges), root)
    }

    /// Component label per vertex, labels numbered in order of first vertex.
    pub fn components(&self) -> Vec<usize> {
        let n = self.n();
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        let mut queue = VecDeque::new();
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                for &v in self.neighbors(u) {
                    if label[v] == usize::MAX {
                        label[v] = next;
                        queue.push_back(v);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn is_connected(&self) -> bool {
        self.n() <= 1 || self.components().iter().all(|&c| c == 0)
    }
}

/// Nonempty, strictly increasing set of initially infected vertices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct SeedSet(Vec<usize>);

impl SeedSet {
    /// Sorts and deduplicates `ids`, then validates them against `n`.
    pub fn new(mut ids: Vec<usize>, n: usize) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::EmptySeedSet);
        }
        ids.sort_unstable();
        ids.dedup();
        if let Some(&bad) = ids.iter().find(|&&v| v >= n) {
            return Err(Error::VertexOutOfRange { vertex: bad, n });
        }
        Ok(SeedSet(ids))
    }

    pub fn single(v: usize, n: usize) -> Result<Self> {
        Self::new(vec![v], n)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }
}

/// Minimum graph distance from the seed set; `None` marks unreachable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceMap {
    dist: Vec<Option<usize>>,
}

impl DistanceMap {
    pub fn get(&self, v: usize) -> Option<usize> {
        self.dist[v]
    }

    pub fn as_slice(&self) -> &[Option<usize>] {
        &self.dist
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    pub fn reachable_count(&self) -> usize {
        self.dist.iter().flatten().count()
    }

    pub fn eccentricity(&self) -> usize {
        self.dist.iter().flatten().copied().max().unwrap_or(0)
    }

    /// Number of reachable vertices at each distance `0..=eccentricity`.
    pub fn level_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.eccentricity() + 1];
        for d in self.dist.iter().flatten() {
            counts[*d] += 1;
        }
        counts
    }
}

struct BfsTree {
    dist: Vec<Option<usize>>,
    parent_edge: Vec<Option<usize>>,
}

fn bfs(g: &Graph, sources: &[usize], max_depth: Option<usize>) -> BfsTree {
    let n = g.n();
    let mut dist = vec![None; n];
    let mut parent_edge = vec![None; n];
    let mut queue = VecDeque::with_capacity(sources.len());
    for &s in sources {
        dist[s] = Some(0);
        queue.push_back(s);
    }
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap();
        if max_depth.is_some_and(|cap| du >= cap) {
            continue;
        }
        for (v, e) in g.incident(u) {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                parent_edge[v] = Some(e);
                queue.push_back(v);
            }
        }
    }
    BfsTree { dist, parent_edge }
}

/// Multi-source BFS: the distance from every vertex to its nearest seed.
/// Equivalent to BFS from a virtual vertex joined to all seeds, with every
/// level shifted down by one.
pub fn bfs_distances(g: &Graph, seeds: &SeedSet) -> DistanceMap {
    DistanceMap {
        dist: bfs(g, seeds.as_slice(), None).dist,
    }
}

/// Induced subgraph on all vertices within distance `radius` of the centers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ball {
    pub radius: usize,
    pub centers: Vec<usize>,
    /// Original vertex ids, ascending.
    pub vertices: Vec<usize>,
    /// Induced edges in original ids, canonical order.
    pub edges: Vec<(usize, usize)>,
}

impl Ball {
    /// The ball as a standalone graph, vertices renumbered by rank in
    /// `self.vertices`.
    pub fn to_graph(&self) -> Graph {
        let local = |v: usize| self.vertices.binary_search(&v).unwrap();
        let edges = self
            .edges
            .iter()
            .map(|&(u, v)| (local(u), local(v)))
            .collect();
        Graph::from_canonical_edges(self.vertices.len(), edges)
    }
}

pub fn extract_ball(g: &Graph, center: usize, radius: usize) -> Ball {
    extract_ball_around(g, &[center], radius)
}

pub fn extract_ball_around(g: &Graph, centers: &[usize], radius: usize) -> Ball {
    let tree = bfs(g, centers, Some(radius));
    let inside = |v: usize| tree.dist[v].is_some();
    let vertices: Vec<usize> = (0..g.n()).filter(|&v| inside(v)).collect();
    let edges = g
        .edges()
        .iter()
        .copied()
        .filter(|&(u, v)| inside(u) && inside(v))
        .collect();
    let mut centers = centers.to_vec();
    centers.sort_unstable();
    centers.dedup();
    Ball {
        radius,
        centers,
        vertices,
        edges,
    }
}

/// Anything that can be viewed as a vertex count plus an edge list.
pub trait EdgeSet {
    fn vertex_count(&self) -> usize;
    fn edge_pairs(&self) -> Vec<(usize, usize)>;
}

impl EdgeSet for Graph {
    fn vertex_count(&self) -> usize {
        self.n()
    }
    fn edge_pairs(&self) -> Vec<(usize, usize)> {
        self.edges.clone()
    }
}

impl EdgeSet for Ball {
    fn vertex_count(&self) -> usize {
        self.vertices.len()
    }
    fn edge_pairs(&self) -> Vec<(usize, usize)> {
        self.to_graph().edges
    }
}

/// Connected with exactly `vertex_count - 1` edges. The empty graph is not
/// a tree.
pub fn is_tree<G: EdgeSet>(g: &G) -> bool {
    let n = g.vertex_count();
    let edges = g.edge_pairs();
    if n == 0 || edges.len() != n - 1 {
        return false;
    }
    let mut dsu = DisjointSets::new(n);
    edges.iter().all(|&(u, v)| dsu.union(u, v))
}

/// Largest `d <= d_max` whose ball around `center` is a tree.
///
/// A ball of radius `d` contains a cycle iff some non-BFS-tree edge has both
/// endpoints within distance `d`, so the answer is one less than the
/// smallest such far endpoint distance.
pub fn tree_like_radius(g: &Graph, center: usize, d_max: usize) -> usize {
    tree_like_radius_around(g, &[center], d_max)
}

/// Same as [`tree_like_radius`] for the union of balls around several
/// centers; the union must be a forest with one tree per center, so two
/// centers whose balls touch also bound the radius.
pub fn tree_like_radius_around(g: &Graph, centers: &[usize], d_max: usize) -> usize {
    let tree = bfs(g, centers, Some(d_max + 1));
    let mut radius = d_max;
    for (id, &(u, v)) in g.edges().iter().enumerate() {
        let (Some(du), Some(dv)) = (tree.dist[u], tree.dist[v]) else {
            continue;
        };
        if tree.parent_edge[u] == Some(id) || tree.parent_edge[v] == Some(id) {
            continue;
        }
        let far = du.max(dv);
        // Two adjacent centers give far = 0; radius 0 is still a forest.
        radius = radius.min(far.saturating_sub(1));
    }
    radius
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DegreeStats {
    pub min: usize,
    pub max: usize,
    pub mean: f64,
}

pub fn degree_stats(g: &Graph) -> Result<DegreeStats> {
    let n = g.n();
    if n == 0 {
        return Err(Error::InvalidParameter(
            "degree statistics need at least one vertex".into(),
        ));
    }
    let degrees = (0..n).map(|v| g.degree(v));
    Ok(DegreeStats {
        min: degrees.clone().min().unwrap(),
        max: degrees.max().unwrap(),
        mean: 2.0 * g.m() as f64 / n as f64,
    })
}

/// Union-find with union by size and path halving.
#[derive(Clone, Debug)]
pub(crate) struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    pub fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        true
    }
}
