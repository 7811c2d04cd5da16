//! Vertex pairs, preserved graphs and a bitset adjacency view.

use serde::{Deserialize, Serialize};
use std::fmt;

/// An unordered vertex pair, stored with `u < v` (0-indexed).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub u: u32,
    pub v: u32,
}

impl Edge {
    /// Normalizes the pair. Panics on a self-loop.
    pub fn new(a: u32, b: u32) -> Self {
        assert_ne!(a, b, "self-loop edge {a}");
        if a < b {
            Edge { u: a, v: b }
        } else {
            Edge { u: b, v: a }
        }
    }

    pub fn contains(&self, x: u32) -> bool {
        self.u == x || self.v == x
    }

    pub fn other(&self, x: u32) -> u32 {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.u, self.v)
    }
}

/// The preserved graph `G_k` on the full vertex set.
///
/// Edges are kept sorted and deduplicated so that every derived quantity
/// (frequency tables, edge files, reports) has one canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    k: usize,
    edges: Vec<Edge>,
}

impl Graph {
    pub fn new(n: usize, k: usize, mut edges: Vec<Edge>) -> Self {
        edges.sort_unstable();
        edges.dedup();
        debug_assert!(edges.iter().all(|e| (e.v as usize) < n));
        Graph { n, k, edges }
    }

    /// `K_n` at cycle 0.
    pub fn complete(n: usize) -> Self {
        let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for u in 0..n as u32 {
            for v in u + 1..n as u32 {
                edges.push(Edge { u, v });
            }
        }
        Graph { n, k: 0, edges }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Cycle index at which this graph was produced.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.edges.binary_search(&e).is_ok()
    }

    /// Position of `e` in [`Graph::edges`].
    pub fn index_of(&self, e: Edge) -> Option<usize> {
        self.edges.binary_search(&e).ok()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for e in &self.edges {
            deg[e.u as usize] += 1;
            deg[e.v as usize] += 1;
        }
        deg
    }

    pub fn adjacency(&self) -> Adjacency {
        Adjacency::from_edges(self.n, &self.edges)
    }

    pub(crate) fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }
}

/// Dense bitset adjacency, one row of `ceil(n / 64)` words per vertex.
#[derive(Clone, Debug)]
pub struct Adjacency {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl Adjacency {
    pub fn from_edges(n: usize, edges: &[Edge]) -> Self {
        let words = n.div_ceil(64).max(1);
        let mut bits = vec![0u64; n * words];
        for e in edges {
            let (u, v) = (e.u as usize, e.v as usize);
            bits[u * words + v / 64] |= 1 << (v % 64);
            bits[v * words + u / 64] |= 1 << (u % 64);
        }
        Adjacency { n, words, bits }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn has(&self, a: usize, b: usize) -> bool {
        self.bits[a * self.words + b / 64] >> (b % 64) & 1 == 1
    }

    #[inline]
    pub fn row(&self, a: usize) -> &[u64] {
        &self.bits[a * self.words..(a + 1) * self.words]
    }

    pub fn words(&self) -> usize {
        self.words
    }

    pub fn neighbors(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        BitIter::new(self.row(a))
    }
}

/// Iterates the set bit positions of a word slice in ascending order.
pub(crate) struct BitIter<'a> {
    words: &'a [u64],
    idx: usize,
    cur: u64,
}

impl<'a> BitIter<'a> {
    pub(crate) fn new(words: &'a [u64]) -> Self {
        BitIter {
            words,
            idx: 0,
            cur: words.first().copied().unwrap_or(0),
        }
    }
}

impl Iterator for BitIter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.cur != 0 {
                let tz = self.cur.trailing_zeros() as usize;
                self.cur &= self.cur - 1;
                return Some(self.idx * 64 + tz);
            }
            self.idx += 1;
            if self.idx >= self.words.len() {
                return None;
            }
            self.cur = self.words[self.idx];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_is_normalized() {
        assert_eq!(Edge::new(5, 2), Edge { u: 2, v: 5 });
        assert_eq!(Edge::new(5, 2).other(2), 5);
    }

    #[test]
    #[should_panic]
    fn self_loop_panics() {
        Edge::new(3, 3);
    }

    #[test]
    fn complete_graph_counts() {
        let g = Graph::complete(7);
        assert_eq!(g.edge_count(), 21);
        assert!(g.degrees().iter().all(|&d| d == 6));
        assert_eq!(g.index_of(Edge::new(0, 1)), Some(0));
        assert_eq!(g.index_of(Edge::new(5, 6)), Some(20));
    }

    #[test]
    fn adjacency_matches_edges() {
        let edges = vec![Edge::new(0, 65), Edge::new(3, 4), Edge::new(64, 65)];
        let g = Graph::new(70, 0, edges);
        let adj = g.adjacency();
        assert!(adj.has(65, 0) && adj.has(0, 65) && adj.has(4, 3));
        assert!(!adj.has(0, 64));
        assert_eq!(adj.neighbors(65).collect::<Vec<_>>(), vec![0, 64]);
    }

    #[test]
    fn graph_dedups_and_sorts() {
        let g = Graph::new(4, 2, vec![Edge::new(2, 3), Edge::new(0, 1), Edge::new(3, 2)]);
        assert_eq!(g.edges(), &[Edge::new(0, 1), Edge::new(2, 3)]);
        assert_eq!(g.k(), 2);
    }
}
