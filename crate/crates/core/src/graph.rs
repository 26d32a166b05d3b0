//! Undirected, unweighted graphs: the six generator families, the Laplacian
//! Hamiltonian, closeness centrality and initial-node policies.
//!
//! Every [`Graph`] is connected, simple and stores its edges in canonical
//! order (`i < j`, sorted lexicographically). Node order is generation order;
//! the hub of a star is node 0.

use std::collections::{BTreeSet, VecDeque};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Resampling budget for random families that must come out connected.
pub const MAX_CONNECT_ATTEMPTS: u64 = 1000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from an arbitrary edge list. Edges are canonicalized;
    /// self-loops, out-of-range endpoints and disconnected results are rejected.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let g = Self::from_edges_unchecked(n, edges)?;
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    fn from_edges_unchecked(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("graph must have at least one node".into()));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidParameter(format!("self-loop at node {a}")));
            }
            for v in [a, b] {
                if v >= n {
                    return Err(Error::IndexOutOfRange { index: v, n });
                }
            }
            set.insert((a.min(b), a.max(b)));
        }
        let edges: Vec<_> = set.into_iter().collect();
        let mut neighbors = vec![Vec::new(); n];
        for &(i, j) in &edges {
            neighbors[i].push(j);
            neighbors[j].push(i);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Ok(Self { n, edges, neighbors })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Canonical edge list: `i < j`, sorted lexicographically.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.neighbors.iter().map(Vec::len).collect()
    }

    pub fn mean_degree(&self) -> f64 {
        2.0 * self.edges.len() as f64 / self.n as f64
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors
            .get(i)
            .is_some_and(|list| list.binary_search(&j).is_ok())
    }

    /// Symmetric 0/1 adjacency matrix with zero diagonal.
    pub fn adjacency(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for &(i, j) in &self.edges {
            a[(i, j)] = 1.0;
            a[(j, i)] = 1.0;
        }
        a
    }

    pub fn is_connected(&self) -> bool {
        bfs_distances(&self.neighbors, 0).iter().all(Option::is_some)
    }

    /// Breadth-first hop distances from `source`; `None` for unreachable nodes.
    pub fn distances_from(&self, source: usize) -> Vec<Option<usize>> {
        bfs_distances(&self.neighbors, source)
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            n: self.n,
            edges: self.edges.iter().map(|&(i, j)| [i, j]).collect(),
        }
    }

    /// Canonical JSON text (compact), the input to [`Graph::canonical_hash`].
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("graph json serializes")
    }

    /// SHA-256 of the canonical JSON, hex encoded. Independent of the order
    /// edges were supplied in.
    pub fn canonical_hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}

/// Wire form: `{"n": <int>, "edges": [[i, j], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

impl TryFrom<GraphJson> for Graph {
    type Error = Error;

    fn try_from(value: GraphJson) -> Result<Self> {
        Graph::from_edges(value.n, value.edges.into_iter().map(|[i, j]| (i, j)))
    }
}

fn bfs_distances(neighbors: &[Vec<usize>], source: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; neighbors.len()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].expect("queued nodes have a distance");
        for &v in &neighbors[u] {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn build_cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::InvalidSize { family: "cycle", n, min: 3 });
    }
    Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
}

pub fn build_complete(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidSize { family: "complete", n, min: 2 });
    }
    Graph::from_edges(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
}

/// Star with hub 0 and leaves `1..n`.
pub fn build_star(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::InvalidSize { family: "star", n, min: 3 });
    }
    Graph::from_edges(n, (1..n).map(|i| (0, i)))
}

/// G(n, p) with `p = avg_degree / (n - 1)`, resampled on a fresh RNG stream
/// until connected.
pub fn build_erdos_renyi(n: usize, avg_degree: f64, seed: u64) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidSize { family: "erdos-renyi", n, min: 2 });
    }
    if !(avg_degree > 0.0 && avg_degree <= (n - 1) as f64) {
        return Err(Error::InvalidParameter(format!(
            "average degree {avg_degree} must lie in (0, {}]",
            n - 1
        )));
    }
    let p = avg_degree / (n - 1) as f64;
    for attempt in 0..MAX_CONNECT_ATTEMPTS {
        let mut rng = rng_for(seed, attempt);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random::<f64>() < p {
                    edges.push((i, j));
                }
            }
        }
        let g = Graph::from_edges_unchecked(n, edges)?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::GenerationFailed {
        attempts: MAX_CONNECT_ATTEMPTS as usize,
        reason: format!("no connected G({n}, {p}) sample"),
    })
}

/// Ring lattice of `k` nearest neighbours with each lattice edge `(u, u + s)`
/// rewired to `(u, w)` with probability `p_rewire`. A rewire that has no
/// admissible target (saturated node) is skipped. Disconnected outcomes are
/// resampled on a fresh RNG stream.
pub fn build_watts_strogatz(n: usize, k: usize, p_rewire: f64, seed: u64) -> Result<Graph> {
    if k == 0 || k % 2 != 0 || k >= n {
        return Err(Error::InvalidParameter(format!(
            "watts-strogatz needs an even k with 0 < k < n (k = {k}, n = {n})"
        )));
    }
    if !(0.0..=1.0).contains(&p_rewire) {
        return Err(Error::InvalidParameter(format!(
            "rewiring probability {p_rewire} outside [0, 1]"
        )));
    }
    for attempt in 0..MAX_CONNECT_ATTEMPTS {
        let mut rng = rng_for(seed, attempt);
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for u in 0..n {
            for s in 1..=k / 2 {
                let v = (u + s) % n;
                adj[u].insert(v);
                adj[v].insert(u);
            }
        }
        for s in 1..=k / 2 {
            for u in 0..n {
                let v = (u + s) % n;
                if rng.random::<f64>() >= p_rewire {
                    continue;
                }
                if !adj[u].contains(&v) || adj[u].len() >= n - 1 {
                    continue;
                }
                let w = loop {
                    let w = rng.random_range(0..n);
                    if w != u && !adj[u].contains(&w) {
                        break w;
                    }
                };
                adj[u].remove(&v);
                adj[v].remove(&u);
                adj[u].insert(w);
                adj[w].insert(u);
            }
        }
        let edges = adj
            .iter()
            .enumerate()
            .flat_map(|(u, set)| set.iter().filter(move |&&w| u < w).map(move |&w| (u, w)));
        let g = Graph::from_edges_unchecked(n, edges)?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::GenerationFailed {
        attempts: MAX_CONNECT_ATTEMPTS as usize,
        reason: format!("no connected watts-strogatz sample (n = {n}, k = {k}, p = {p_rewire})"),
    })
}

/// Preferential attachment grown from an `m`-node clique; every later node
/// attaches `m` edges to distinct existing nodes chosen proportionally to degree.
pub fn build_barabasi_albert(n: usize, m: usize, seed: u64) -> Result<Graph> {
    if m == 0 || m >= n {
        return Err(Error::InvalidParameter(format!(
            "barabasi-albert needs 1 <= m < n (m = {m}, n = {n})"
        )));
    }
    let mut rng = rng_for(seed, 0);
    let mut edges: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
        .collect();
    // one entry per edge endpoint, so uniform picks are degree-weighted
    let mut endpoints: Vec<usize> = edges.iter().flat_map(|&(i, j)| [i, j]).collect();
    for new in m..n {
        let mut targets = BTreeSet::new();
        while targets.len() < m {
            let t = if endpoints.is_empty() {
                rng.random_range(0..new)
            } else {
                endpoints[rng.random_range(0..endpoints.len())]
            };
            targets.insert(t);
        }
        for t in targets {
            edges.push((t, new));
            endpoints.push(t);
            endpoints.push(new);
        }
    }
    Graph::from_edges(n, edges)
}

/// Graph Laplacian `L = D - A`.
pub fn laplacian(g: &Graph) -> DMatrix<f64> {
    let n = g.n();
    let mut l = DMatrix::zeros(n, n);
    for i in 0..n {
        l[(i, i)] = g.degree(i) as f64;
    }
    for &(i, j) in g.edges() {
        l[(i, j)] = -1.0;
        l[(j, i)] = -1.0;
    }
    l
}

/// Normalized closeness `(n - 1) / sum_j d(i, j)` from BFS hop distances.
pub fn closeness_centrality(g: &Graph) -> Result<Vec<f64>> {
    let n = g.n();
    if n == 1 {
        return Ok(vec![1.0]);
    }
    (0..n)
        .map(|i| {
            let total = g
                .distances_from(i)
                .into_iter()
                .try_fold(0usize, |acc, d| d.map(|d| acc + d))
                .ok_or(Error::Disconnected)?;
            Ok((n - 1) as f64 / total as f64)
        })
        .collect()
}

/// How the walker's initial node is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case", deny_unknown_fields)]
pub enum NodePolicy {
    Random {
        #[serde(default)]
        seed: u64,
    },
    HighestDegree,
    LowestDegree,
    HighestCloseness,
    Explicit { index: usize },
}

/// Resolves a policy to a node. Ties go to the smallest index.
pub fn select_node(g: &Graph, policy: NodePolicy) -> Result<usize> {
    let n = g.n();
    match policy {
        NodePolicy::Random { seed } => Ok(rng_for(seed, 0).random_range(0..n)),
        NodePolicy::HighestDegree => Ok(argbest(&g.degrees(), |a, b| a > b)),
        NodePolicy::LowestDegree => Ok(argbest(&g.degrees(), |a, b| a < b)),
        NodePolicy::HighestCloseness => {
            let c = closeness_centrality(g)?;
            Ok(argbest(&c, |a, b| a > b))
        }
        NodePolicy::Explicit { index } if index < n => Ok(index),
        NodePolicy::Explicit { index } => Err(Error::IndexOutOfRange { index, n }),
    }
}

fn argbest<T: Copy>(values: &[T], better: impl Fn(T, T) -> bool) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if better(v, values[best]) {
            best = i;
        }
    }
    best
}
