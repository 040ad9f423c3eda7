//! Quickshift++ mode seeking.
//!
//! A k-NN density estimate ranks elements; cluster cores are the mutual-kNN
//! components that appear around each density mode once every element within
//! a `(1 - β)` density tolerance of the mode is admitted; remaining elements
//! hill-climb to their nearest denser neighbor until they land in a core.
//!
//! Distances are Euclidean on unit-normalized rows, so neighbor order agrees
//! with cosine similarity. Everything is exact and deterministic.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::distance;
use crate::set::FeatureSet;

/// Floor applied to kNN radii before taking logs.
pub const RADIUS_FLOOR: f64 = 1e-12;

/// Disjoint grouping of a set's elements.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupPartition {
    assignments: Vec<usize>,
    cardinalities: Vec<usize>,
}

impl GroupPartition {
    /// Groups must be numbered `0..n_q` with every group nonempty.
    pub fn new(assignments: Vec<usize>) -> Result<Self> {
        if assignments.is_empty() {
            return Err(Error::Data("partition covers no elements".into()));
        }
        let n_q = assignments.iter().max().map_or(0, |m| m + 1);
        let mut cardinalities = vec![0usize; n_q];
        for &g in &assignments {
            cardinalities[g] += 1;
        }
        if let Some(g) = cardinalities.iter().position(|&c| c == 0) {
            return Err(Error::Data(format!("partition group {g} is empty")));
        }
        Ok(GroupPartition {
            assignments,
            cardinalities,
        })
    }

    /// Every element in one group.
    pub fn single(n: usize) -> Self {
        GroupPartition {
            assignments: vec![0; n],
            cardinalities: vec![n],
        }
    }

    pub fn n(&self) -> usize {
        self.assignments.len()
    }

    pub fn n_groups(&self) -> usize {
        self.cardinalities.len()
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn cardinalities(&self) -> &[usize] {
        &self.cardinalities
    }

    pub fn group_of(&self, i: usize) -> usize {
        self.assignments[i]
    }

    /// Members of each group, ascending.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = self
            .cardinalities
            .iter()
            .map(|&c| Vec::with_capacity(c))
            .collect();
        for (i, &g) in self.assignments.iter().enumerate() {
            out[g].push(i);
        }
        out
    }
}

/// Exact k-nearest-neighbor lists.
///
/// Besides the `k` nearest neighbors, each element keeps its radius ball: every
/// element within its k-th neighbor distance, which is larger than `k` only
/// when distances tie at the radius.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnGraph {
    n: usize,
    k: usize,
    neighbors: Vec<usize>,
    distances: Vec<f64>,
    ball_start: Vec<usize>,
    ball: Vec<usize>,
}

impl KnnGraph {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Neighbors of `i`, nearest first.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i * self.k..(i + 1) * self.k]
    }

    /// Distances matching [`neighbors`](Self::neighbors), nondecreasing.
    pub fn neighbor_distances(&self, i: usize) -> &[f64] {
        &self.distances[i * self.k..(i + 1) * self.k]
    }

    /// Distance from `i` to its k-th neighbor (zero when `k = 0`).
    pub fn radius(&self, i: usize) -> f64 {
        if self.k == 0 {
            0.0
        } else {
            self.distances[i * self.k + self.k - 1]
        }
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.radius(i)).collect()
    }

    /// Elements within the radius of `i` (ties at the radius included).
    pub fn ball(&self, i: usize) -> &[usize] {
        &self.ball[self.ball_start[i]..self.ball_start[i + 1]]
    }

    /// Mutual-kNN edge: each lies within the other's radius.
    pub fn is_mutual(&self, i: usize, j: usize) -> bool {
        self.ball(i).contains(&j) && self.ball(j).contains(&i)
    }
}

/// Brute-force kNN over the rows of `set`, ties broken by lower index.
pub fn build_knn(set: &FeatureSet, k: usize) -> Result<KnnGraph> {
    let n = set.n();
    if k == 0 || k >= n {
        return Err(Error::Parameter {
            name: "k",
            reason: format!("need 1 <= k < n, got k = {k} with n = {n}"),
        });
    }
    Ok(knn_unchecked(set, k))
}

fn knn_unchecked(set: &FeatureSet, k: usize) -> KnnGraph {
    let n = set.n();
    let mut neighbors = Vec::with_capacity(n * k);
    let mut distances = Vec::with_capacity(n * k);
    let mut ball_start = Vec::with_capacity(n + 1);
    let mut ball = Vec::with_capacity(n * k);
    let mut scratch: Vec<(f64, usize)> = Vec::with_capacity(n);
    ball_start.push(0);
    for i in 0..n {
        scratch.clear();
        let fi = set.row(i);
        scratch.extend(
            (0..n)
                .filter(|&j| j != i)
                .map(|j| (distance(fi, set.row(j)), j)),
        );
        scratch.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(dist, j) in &scratch[..k] {
            neighbors.push(j);
            distances.push(dist);
        }
        if k > 0 {
            let radius = scratch[k - 1].0;
            ball.extend(
                scratch
                    .iter()
                    .take_while(|(d, _)| *d <= radius)
                    .map(|&(_, j)| j),
            );
        }
        ball_start.push(ball.len());
    }
    KnnGraph {
        n,
        k,
        neighbors,
        distances,
        ball_start,
        ball,
    }
}

/// Log of the kNN density up to an additive constant: `-d · ln(max(r_k, ε))`.
pub fn knn_log_density(graph: &KnnGraph, d: usize) -> Vec<f64> {
    let d = d as f64;
    graph
        .radii()
        .into_iter()
        .map(|r| -d * libm::log(r.max(RADIUS_FLOOR)))
        .collect()
}

struct DisjointSets {
    parent: Vec<usize>,
    has_core: Vec<bool>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
            has_core: vec![false; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        let (keep, drop) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[drop] = keep;
        self.has_core[keep] |= self.has_core[drop];
    }
}

/// Elements ordered by decreasing density, ties by index.
fn density_order(log_density: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..log_density.len()).collect();
    order.sort_by(|&a, &b| log_density[b].total_cmp(&log_density[a]).then(a.cmp(&b)));
    order
}

/// Extracts disjoint cluster cores, each sorted ascending, in order of
/// discovery (densest mode first).
///
/// A core is seeded only at an element none of whose k nearest neighbors is
/// denser; other elements can join a core but never start one.
pub fn cluster_cores(graph: &KnnGraph, log_density: &[f64], beta: f64) -> Result<Vec<Vec<usize>>> {
    let n = graph.n();
    if log_density.len() != n {
        return Err(Error::Contract(format!(
            "cluster_cores: {} densities for {n} elements",
            log_density.len()
        )));
    }
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::Parameter {
            name: "beta",
            reason: format!("must lie in [0, 1), got {beta}"),
        });
    }
    let log_tol = libm::log(1.0 - beta);
    let order = density_order(log_density);
    let mut sets = DisjointSets::new(n);
    let mut admitted = vec![false; n];
    let mut next = 0;
    let mut cores = Vec::new();

    for &mode in &order {
        let threshold = log_density[mode] + log_tol;
        while next < n && log_density[order[next]] >= threshold {
            let x = order[next];
            admitted[x] = true;
            for &y in graph.ball(x) {
                if admitted[y] && graph.is_mutual(x, y) {
                    sets.union(x, y);
                }
            }
            next += 1;
        }
        if !is_local_mode(graph, log_density, mode) {
            continue;
        }
        let root = sets.find(mode);
        if sets.has_core[root] {
            continue;
        }
        let members: Vec<usize> = (0..n)
            .filter(|&x| admitted[x] && sets.find(x) == root)
            .collect();
        sets.has_core[root] = true;
        cores.push(members);
    }
    Ok(cores)
}

/// No kNN neighbor is strictly denser.
fn is_local_mode(graph: &KnnGraph, log_density: &[f64], x: usize) -> bool {
    graph
        .neighbors(x)
        .iter()
        .all(|&y| log_density[y] <= log_density[x])
}

/// Completes a partition from cluster cores: every other element follows its
/// nearest strictly denser element (ties by index) until it reaches a core.
/// Elements with no denser element attach to the nearest core member.
pub fn quickshift_assign(
    set: &FeatureSet,
    log_density: &[f64],
    cores: &[Vec<usize>],
) -> Result<GroupPartition> {
    let n = set.n();
    if log_density.len() != n {
        return Err(Error::Contract(format!(
            "quickshift_assign: {} densities for {n} elements",
            log_density.len()
        )));
    }
    if cores.is_empty() {
        return Err(Error::Contract(
            "quickshift_assign: no cluster cores".into(),
        ));
    }
    const UNSET: usize = usize::MAX;
    let mut label = vec![UNSET; n];
    for (g, core) in cores.iter().enumerate() {
        if core.is_empty() {
            return Err(Error::Contract(format!("cluster core {g} is empty")));
        }
        for &x in core {
            if x >= n {
                return Err(Error::Contract(format!("core member {x} out of range")));
            }
            if label[x] != UNSET {
                return Err(Error::Internal(format!("element {x} lies in two cores")));
            }
            label[x] = g;
        }
    }

    let nearest = |x: usize, candidates: &mut dyn Iterator<Item = usize>| -> Option<usize> {
        let fx = set.row(x);
        candidates
            .map(|j| (distance(fx, set.row(j)), j))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .map(|(_, j)| j)
    };

    let mut parent = vec![UNSET; n];
    for x in (0..n).filter(|&x| label[x] == UNSET) {
        let denser = nearest(x, &mut (0..n).filter(|&j| log_density[j] > log_density[x]));
        parent[x] = match denser {
            Some(j) => j,
            None => nearest(x, &mut cores.iter().flatten().copied())
                .ok_or_else(|| Error::Internal("no core member to attach to".into()))?,
        };
    }

    let mut chain = Vec::new();
    for x in 0..n {
        let mut cur = x;
        chain.clear();
        while label[cur] == UNSET {
            if chain.len() > n {
                return Err(Error::Internal(format!(
                    "hill-climbing cycle detected from element {x}"
                )));
            }
            chain.push(cur);
            cur = parent[cur];
        }
        let g = label[cur];
        for &c in &chain {
            label[c] = g;
        }
    }
    GroupPartition::new(label)
}

/// Full Quickshift++ over a set. Rows are normalized first, so the result does
/// not depend on row scale.
pub fn quickshiftpp(set: &FeatureSet, k: usize, beta: f64) -> Result<GroupPartition> {
    let set = set.normalize()?;
    if set.n() == 1 {
        if !(0.0..1.0).contains(&beta) {
            return Err(Error::Parameter {
                name: "beta",
                reason: format!("must lie in [0, 1), got {beta}"),
            });
        }
        let graph = knn_unchecked(&set, 0);
        let density = knn_log_density(&graph, set.d());
        let cores = cluster_cores(&graph, &density, beta)?;
        return quickshift_assign(&set, &density, &cores);
    }
    let graph = build_knn(&set, k)?;
    let density = knn_log_density(&graph, set.d());
    let cores = cluster_cores(&graph, &density, beta)?;
    quickshift_assign(&set, &density, &cores)
}
