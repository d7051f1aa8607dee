//! Clusters of branch points: maximal index sets whose pairwise intersection
//! multiplicities are all at least a given depth.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intersection::IntersectionMatrix;

/// A cluster `I = {start, ..., start + len - 1}` (1-based, `len >= 2`) at
/// depth `depth >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cluster {
    pub start: usize,
    pub len: usize,
    pub depth: u32,
}

impl Cluster {
    pub fn new(start: usize, len: usize, depth: u32) -> Self {
        Cluster { start, len, depth }
    }

    /// Last member, 1-based.
    pub fn end(&self) -> usize {
        self.start + self.len - 1
    }

    pub fn contains_index(&self, i: usize) -> bool {
        (self.start..=self.end()).contains(&i)
    }

    pub fn interval_contains(&self, other: &Cluster) -> bool {
        self.start <= other.start && other.end() <= self.end()
    }

    pub fn members(&self) -> impl Iterator<Item = usize> {
        self.start..=self.end()
    }
}

impl fmt::Display for Cluster {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let members: Vec<String> = self.members().map(|i| i.to_string()).collect();
        write!(f, "{{{}}} depth {}", members.join(","), self.depth)
    }
}

impl Serialize for Cluster {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            interval: [usize; 2],
            depth: u32,
        }
        Repr { interval: [self.start, self.len], depth: self.depth }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Cluster {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            interval: [usize; 2],
            depth: u32,
        }
        let r = Repr::deserialize(d)?;
        Ok(Cluster { start: r.interval[0], len: r.interval[1], depth: r.depth })
    }
}

/// All clusters of an interval-ordered matrix, sorted by depth then start.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterForest {
    pub d: usize,
    pub clusters: Vec<Cluster>,
}

impl ClusterForest {
    pub fn empty(d: usize) -> Self {
        ClusterForest { d, clusters: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    /// Clusters containing index `i` (1-based), outermost first.
    pub fn containing(&self, i: usize) -> impl Iterator<Item = &Cluster> {
        self.clusters.iter().filter(move |c| c.contains_index(i))
    }
}

/// Computes the clusters of `m`, which must already be in interval order.
pub fn compute_clusters(m: &IntersectionMatrix) -> Result<ClusterForest> {
    let d = m.dim();
    let mut clusters = Vec::new();
    for depth in 1..=m.max_entry() {
        // the relation e >= depth is an equivalence on indices
        let mut seen = vec![false; d];
        for i in 0..d {
            if seen[i] {
                continue;
            }
            let block: Vec<usize> = (0..d).filter(|&j| j == i || m.get(i, j) >= depth).collect();
            for &j in &block {
                seen[j] = true;
            }
            if block.len() < 2 {
                continue;
            }
            let contiguous = block.windows(2).all(|w| w[1] == w[0] + 1);
            if !contiguous {
                return Err(Error::NotCanonicallyOrdered {
                    members: block.iter().map(|j| j + 1).collect(),
                    depth,
                });
            }
            clusters.push(Cluster::new(block[0] + 1, block.len(), depth));
        }
    }
    clusters.sort_by_key(|c| (c.depth, c.start));
    Ok(ClusterForest { d, clusters })
}

/// Serialized form of a forest together with the canonical order
/// (`order[k]` is the 1-based input index placed at position `k + 1`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestDoc {
    pub schema_version: u32,
    pub d: usize,
    pub order: Vec<usize>,
    pub clusters: Vec<Cluster>,
}

impl ForestDoc {
    pub fn new(f: &ClusterForest, order: &[usize]) -> Self {
        ForestDoc { schema_version: crate::SCHEMA_VERSION, d: f.d, order: order.to_vec(), clusters: f.clusters.clone() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("forest serializes") + "\n"
    }

    pub fn forest(&self) -> ClusterForest {
        ClusterForest { d: self.d, clusters: self.clusters.clone() }
    }
}

/// Containment tree of a forest. Node indices refer to `forest.clusters`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NestingTree {
    pub nodes: Vec<Cluster>,
    pub parent: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
    pub roots: Vec<usize>,
}

/// Parent of `(I, n)` is the cluster at depth `n - 1` containing `I`, which
/// is the smallest cluster properly above it.
pub fn nesting_tree(f: &ClusterForest) -> NestingTree {
    let nodes = f.clusters.clone();
    let parent: Vec<Option<usize>> = nodes
        .iter()
        .map(|c| {
            nodes
                .iter()
                .position(|q| q.depth + 1 == c.depth && q.interval_contains(c))
        })
        .collect();
    let mut children = vec![Vec::new(); nodes.len()];
    let mut roots = Vec::new();
    for (i, p) in parent.iter().enumerate() {
        match p {
            Some(p) => children[*p].push(i),
            None => roots.push(i),
        }
    }
    NestingTree { nodes, parent, children, roots }
}

impl NestingTree {
    /// Indented text rendering, one cluster per line.
    pub fn render(&self) -> String {
        fn walk(t: &NestingTree, i: usize, indent: usize, out: &mut String) {
            out.push_str(&"  ".repeat(indent));
            out.push_str(&t.nodes[i].to_string());
            out.push('\n');
            for &c in &t.children[i] {
                walk(t, c, indent + 1, out);
            }
        }
        let mut out = String::new();
        for &r in &self.roots {
            walk(self, r, 0, &mut out);
        }
        out
    }
}
