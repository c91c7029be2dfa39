//! The combinatorial dynamical system `F(σ) = cl σ ∪ [σ]` and the digraph it
//! induces on multivectors.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::cmf::Cmf;
use crate::grid::SimplexId;

/// Image of a simplex under the multivalued map: its closure plus the rest
/// of its multivector.
pub fn f_map(cmf: &Cmf, sigma: SimplexId) -> BTreeSet<SimplexId> {
    let mut out: BTreeSet<SimplexId> = cmf.complex().closure_of(sigma).into_iter().collect();
    out.extend(&cmf.multivector(cmf.owner(sigma)).simplices);
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn byte(self) -> u8 {
        match self {
            Direction::Forward => b'+',
            Direction::Backward => b'-',
        }
    }
}

/// Directed graph on multivector ids, without self-loops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CmfGraph {
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
}

impl CmfGraph {
    /// Builds the graph from adjacency lists; lists are sorted, deduplicated
    /// and stripped of self-loops.
    pub fn from_out_adjacency(mut out_adj: Vec<Vec<usize>>) -> Self {
        let n = out_adj.len();
        let mut in_adj = vec![Vec::new(); n];
        for (u, list) in out_adj.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            list.retain(|&v| v != u);
            for &v in list.iter() {
                in_adj[v].push(u);
            }
        }
        CmfGraph { out_adj, in_adj }
    }

    pub fn len(&self) -> usize {
        self.out_adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.out_adj.is_empty()
    }

    pub fn out_neighbors(&self, v: usize) -> &[usize] {
        &self.out_adj[v]
    }

    pub fn in_neighbors(&self, v: usize) -> &[usize] {
        &self.in_adj[v]
    }

    pub fn neighbors(&self, v: usize, dir: Direction) -> &[usize] {
        match dir {
            Direction::Forward => &self.out_adj[v],
            Direction::Backward => &self.in_adj[v],
        }
    }

    pub fn transpose(&self) -> CmfGraph {
        CmfGraph { out_adj: self.in_adj.clone(), in_adj: self.out_adj.clone() }
    }

    pub fn edge_count(&self) -> usize {
        self.out_adj.iter().map(Vec::len).sum()
    }

    /// Edges `(u, v)` in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.out_adj.iter().enumerate().flat_map(|(u, l)| l.iter().map(move |&v| (u, v))).collect()
    }

    /// Vertices at distance `1..=radius` from `v`, following `dir`.
    pub fn neighborhood(&self, v: usize, radius: usize, dir: Direction) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([v]);
        let mut queue = VecDeque::from([(v, 0usize)]);
        while let Some((u, d)) = queue.pop_front() {
            if d == radius {
                continue;
            }
            for &w in self.neighbors(u, dir) {
                if seen.insert(w) {
                    queue.push_back((w, d + 1));
                }
            }
        }
        seen.remove(&v);
        seen
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson { n: self.len(), edges: self.edges().into_iter().map(|(u, v)| [u, v]).collect() }
    }
}

/// `{"n": count, "edges": [[u, v], ...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

/// Edge `[u] -> [v]` whenever `v ∈ F(u)` and the multivectors differ.
pub fn build_graph(cmf: &Cmf) -> CmfGraph {
    let complex = cmf.complex();
    let mut out_adj = vec![Vec::new(); cmf.len()];
    for s in complex.simplices() {
        let from = cmf.owner(s.id());
        // The rest of [u] maps into [u] itself, so only faces can leave it.
        for face in complex.closure_of(s.id()) {
            let to = cmf.owner(face);
            if to != from {
                out_adj[from].push(to);
            }
        }
    }
    CmfGraph::from_out_adjacency(out_adj)
}
