//! Exact nearest-neighbor and range search with a vantage-point tree.
//!
//! Each node holds a vantage item and a split radius, the median distance
//! from the vantage to the other items of its subtree. Items at distance
//! `<= radius` go inside, the rest outside. A query skips a subtree only when
//! the triangle inequality proves no item there can beat the current bound.
//!
//! Under [`GreParams`] all distances between distinct items fall in
//! `(2L, 4L]`, a range spanning only a factor of two, so pruning is modest.
//! [`SearchStats`] reports how many nodes a query touched.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};
use std::fmt::Debug;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gre::{breakdown_unchecked, GreParams};
use crate::prob::{validate_pair, ProbVector};

pub const DEFAULT_SEED: u64 = 42;
pub const SNAPSHOT_VERSION: u32 = 1;

/// Added to every pruning bound so floating-point round-off in the triangle
/// inequality can never drop a true result.
const PRUNE_SLACK: f64 = 1e-9;

/// A distance over probability vectors. Inputs always share a dimension.
pub trait Metric {
    fn distance(&self, a: &ProbVector, b: &ProbVector) -> f64;
}

impl Metric for GreParams {
    fn distance(&self, a: &ProbVector, b: &ProbVector) -> f64 {
        breakdown_unchecked(a, b, self).total
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Node {
    item: usize,
    radius: f64,
    inside: Option<usize>,
    outside: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Entry<I> {
    id: I,
    vector: ProbVector,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeighborResult<I> {
    pub id: I,
    pub distance: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub visited_nodes: usize,
    pub distance_evaluations: usize,
}

/// An immutable vantage-point tree. `M` defaults to the generalized relative
/// entropy; the search is exact for any `M` satisfying the triangle inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricIndex<I, M = GreParams> {
    items: Vec<Entry<I>>,
    metric: M,
    seed: u64,
    dim: usize,
    nodes: Vec<Node>,
}

impl<I, M> MetricIndex<I, M>
where
    I: Ord + Clone + Debug,
    M: Metric,
{
    pub fn build(items: Vec<(I, ProbVector)>, metric: M) -> Result<Self> {
        Self::build_seeded(items, metric, DEFAULT_SEED)
    }

    pub fn build_seeded(items: Vec<(I, ProbVector)>, metric: M, seed: u64) -> Result<Self> {
        let first = items.first().ok_or(Error::EmptyIndex)?;
        let dim = first.1.dim();
        let mut ids = BTreeSet::new();
        for (id, vector) in &items {
            if vector.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: vector.dim(),
                });
            }
            if !ids.insert(id) {
                return Err(Error::DuplicateId(format!("{id:?}")));
            }
        }
        let items: Vec<Entry<I>> = items
            .into_iter()
            .map(|(id, vector)| Entry { id, vector })
            .collect();
        let nodes = build_tree(&items, &metric, seed);
        Ok(Self {
            items,
            metric,
            seed,
            dim,
            nodes,
        })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn metric(&self) -> &M {
        &self.metric
    }

    pub fn items(&self) -> impl Iterator<Item = (&I, &ProbVector)> {
        self.items.iter().map(|e| (&e.id, &e.vector))
    }

    /// Split radii of all nodes that have at least one child.
    pub fn split_radii(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes
            .iter()
            .filter(|n| n.inside.is_some() || n.outside.is_some())
            .map(|n| n.radius)
    }

    /// Height of the tree; a single node has depth 1.
    pub fn depth(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(0usize, 1usize)];
        while let Some((node, depth)) = stack.pop() {
            best = best.max(depth);
            let n = &self.nodes[node];
            stack.extend(n.inside.iter().chain(&n.outside).map(|&c| (c, depth + 1)));
        }
        best
    }

    fn check_query(&self, query: &ProbVector) -> Result<()> {
        validate_pair(&self.items[0].vector, query)
    }

    /// The `n` items closest to `query`, ascending by distance, ties by id.
    pub fn knn(&self, query: &ProbVector, n: usize) -> Result<Vec<NeighborResult<I>>> {
        self.knn_with_stats(query, n).map(|(r, _)| r)
    }

    pub fn knn_with_stats(
        &self,
        query: &ProbVector,
        n: usize,
    ) -> Result<(Vec<NeighborResult<I>>, SearchStats)> {
        self.check_query(query)?;
        if n == 0 || n > self.items.len() {
            return Err(Error::NeighborCount {
                n,
                len: self.items.len(),
            });
        }
        let mut stats = SearchStats::default();
        let mut heap: BinaryHeap<Candidate<'_, I>> = BinaryHeap::with_capacity(n + 1);
        let mut stack = vec![(0usize, 0.0f64)];
        while let Some((node, lower)) = stack.pop() {
            let tau = if heap.len() < n {
                f64::INFINITY
            } else {
                heap.peek().map_or(f64::INFINITY, |c| c.distance)
            };
            if lower > tau + PRUNE_SLACK {
                continue;
            }
            stats.visited_nodes += 1;
            stats.distance_evaluations += 1;
            let Node { item, radius, inside, outside } = self.nodes[node];
            let entry = &self.items[item];
            let d = self.metric.distance(query, &entry.vector);
            let cand = Candidate { distance: d, id: &entry.id, item };
            if heap.len() < n {
                heap.push(cand);
            } else if cand < *heap.peek().expect("heap is full") {
                heap.pop();
                heap.push(cand);
            }
            let inside_lb = (d - radius).max(0.0);
            let outside_lb = (radius - d).max(0.0);
            // Visit the side the query falls on first: push it last.
            let (near, far) = if d <= radius {
                ((inside, inside_lb), (outside, outside_lb))
            } else {
                ((outside, outside_lb), (inside, inside_lb))
            };
            for (child, lb) in [far, near] {
                if let Some(child) = child {
                    stack.push((child, lb.max(lower)));
                }
            }
        }
        let mut found = heap.into_vec();
        found.sort();
        let results = found
            .into_iter()
            .map(|c| NeighborResult {
                id: self.items[c.item].id.clone(),
                distance: c.distance,
            })
            .collect();
        Ok((results, stats))
    }

    /// Every item within `radius` of `query`, ascending by distance, ties by id.
    pub fn range_query(&self, query: &ProbVector, radius: f64) -> Result<Vec<NeighborResult<I>>> {
        self.range_query_with_stats(query, radius).map(|(r, _)| r)
    }

    pub fn range_query_with_stats(
        &self,
        query: &ProbVector,
        radius: f64,
    ) -> Result<(Vec<NeighborResult<I>>, SearchStats)> {
        self.check_query(query)?;
        if radius.is_nan() || radius < 0.0 {
            return Err(Error::InvalidParameter {
                name: "radius",
                value: radius,
                reason: "must be >= 0",
            });
        }
        let mut stats = SearchStats::default();
        let mut hits = Vec::new();
        let mut stack = vec![0usize];
        while let Some(node) = stack.pop() {
            stats.visited_nodes += 1;
            stats.distance_evaluations += 1;
            let Node { item, radius: split, inside, outside } = self.nodes[node];
            let entry = &self.items[item];
            let d = self.metric.distance(query, &entry.vector);
            if d <= radius {
                hits.push(Candidate { distance: d, id: &entry.id, item });
            }
            if let Some(child) = inside {
                if d - split <= radius + PRUNE_SLACK {
                    stack.push(child);
                }
            }
            if let Some(child) = outside {
                if split - d <= radius + PRUNE_SLACK {
                    stack.push(child);
                }
            }
        }
        hits.sort();
        let results = hits
            .into_iter()
            .map(|c| NeighborResult {
                id: self.items[c.item].id.clone(),
                distance: c.distance,
            })
            .collect();
        Ok((results, stats))
    }
}

struct Candidate<'a, I> {
    distance: f64,
    id: &'a I,
    item: usize,
}

impl<I: Ord> Ord for Candidate<'_, I> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.distance
            .total_cmp(&other.distance)
            .then_with(|| self.id.cmp(other.id))
    }
}

impl<I: Ord> PartialOrd for Candidate<'_, I> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<I: Ord> PartialEq for Candidate<'_, I> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<I: Ord> Eq for Candidate<'_, I> {}

fn build_tree<I, M: Metric>(items: &[Entry<I>], metric: &M, seed: u64) -> Vec<Node> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes = Vec::with_capacity(items.len());
    // (slot to fill, members of the subtree)
    let mut work: Vec<(usize, Vec<usize>)> = Vec::new();
    nodes.push(Node { item: usize::MAX, radius: 0.0, inside: None, outside: None });
    work.push((0, (0..items.len()).collect()));

    while let Some((slot, mut members)) = work.pop() {
        let vantage = members.swap_remove(rng.random_range(0..members.len()));
        let mut scored: Vec<(f64, usize)> = members
            .into_iter()
            .map(|m| (metric.distance(&items[vantage].vector, &items[m].vector), m))
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let radius = scored.get(scored.len().saturating_sub(1) / 2).map_or(0.0, |s| s.0);
        let split = scored.partition_point(|s| s.0 <= radius);
        let outside_members: Vec<usize> = scored[split..].iter().map(|s| s.1).collect();
        let inside_members: Vec<usize> = scored[..split].iter().map(|s| s.1).collect();

        let mut child = |members: Vec<usize>| {
            if members.is_empty() {
                return None;
            }
            let id = nodes.len();
            nodes.push(Node { item: usize::MAX, radius: 0.0, inside: None, outside: None });
            work.push((id, members));
            Some(id)
        };
        let inside = child(inside_members);
        let outside = child(outside_members);
        nodes[slot] = Node { item: vantage, radius, inside, outside };
    }
    nodes
}

#[derive(Serialize, Deserialize)]
struct Snapshot<I, M> {
    format_version: u32,
    params: M,
    seed: u64,
    dim: usize,
    items: Vec<Entry<I>>,
    nodes: Vec<Node>,
}

impl<I, M> MetricIndex<I, M>
where
    I: Ord + Clone + Debug + Serialize + DeserializeOwned,
    M: Metric + Clone + Serialize + DeserializeOwned,
{
    /// JSON snapshot of parameters, seed, items and tree topology.
    pub fn to_json(&self) -> Result<String> {
        let snap = Snapshot {
            format_version: SNAPSHOT_VERSION,
            params: self.metric.clone(),
            seed: self.seed,
            dim: self.dim,
            items: self.items.clone(),
            nodes: self.nodes.clone(),
        };
        serde_json::to_string(&snap).map_err(|e| Error::Snapshot(e.to_string()))
    }

    pub fn from_json(json: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Version {
            format_version: u32,
        }
        let version: Version =
            serde_json::from_str(json).map_err(|e| Error::Snapshot(e.to_string()))?;
        if version.format_version != SNAPSHOT_VERSION {
            return Err(Error::SnapshotVersion(version.format_version));
        }
        let snap: Snapshot<I, M> =
            serde_json::from_str(json).map_err(|e| Error::Snapshot(e.to_string()))?;
        let index = Self {
            items: snap.items,
            metric: snap.params,
            seed: snap.seed,
            dim: snap.dim,
            nodes: snap.nodes,
        };
        index.check_topology()?;
        Ok(index)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::Io {
            path: path.to_owned(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let json = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
        Self::from_json(&json)
    }

    fn check_topology(&self) -> Result<()> {
        let corrupt = |msg: &str| Error::Snapshot(msg.to_owned());
        if self.items.is_empty() {
            return Err(Error::EmptyIndex);
        }
        if self.nodes.len() != self.items.len() {
            return Err(corrupt("node count differs from item count"));
        }
        let mut ids = BTreeSet::new();
        for e in &self.items {
            if e.vector.dim() != self.dim {
                return Err(Error::DimensionMismatch { left: self.dim, right: e.vector.dim() });
            }
            if !ids.insert(&e.id) {
                return Err(Error::DuplicateId(format!("{:?}", e.id)));
            }
        }
        let mut seen_item = vec![false; self.items.len()];
        let mut seen_node = vec![false; self.nodes.len()];
        let mut stack = vec![0usize];
        while let Some(node) = stack.pop() {
            let n = self.nodes.get(node).ok_or_else(|| corrupt("child index out of range"))?;
            if std::mem::replace(&mut seen_node[node], true) {
                return Err(corrupt("node reachable twice"));
            }
            let slot = seen_item
                .get_mut(n.item)
                .ok_or_else(|| corrupt("item index out of range"))?;
            if std::mem::replace(slot, true) {
                return Err(corrupt("item stored twice"));
            }
            if n.radius.is_nan() || n.radius < 0.0 {
                return Err(corrupt("negative split radius"));
            }
            stack.extend(n.inside.iter().chain(&n.outside));
        }
        if seen_item.iter().any(|s| !s) {
            return Err(corrupt("item missing from tree"));
        }
        Ok(())
    }
}
