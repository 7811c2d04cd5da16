//! Frequency quadrilaterals.
//!
//! A quadrilateral on vertices `A < B < C < D` has six vertex pairs, indexed
//! locally as `0:AB 1:AC 2:AD 3:BC 4:BD 5:CD`. For each pair of endpoints
//! there are two Hamiltonian paths through the other two vertices; the
//! shorter one (with present edges only) is that pair's optimal 4-vertex path
//! (OP4). An edge's frequency in the quadrilateral is the number of selected
//! OP4s that use it.
//!
//! [`accumulate`] sums these frequencies over all quadrilaterals of a graph
//! (or a seeded per-edge sample of them) into a [`FrequencyTable`].

use crate::error::{Error, Result};
use crate::graph::{Adjacency, Edge, Graph};
use crate::weights::Weights;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

/// Local vertex pairs in edge-index order.
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Human-readable labels for the local edge indices.
pub const LABELS: [&str; 6] = ["AB", "AC", "AD", "BC", "BD", "CD"];

/// The vertex-disjoint partner of each local edge.
pub const OPPOSITE: [usize; 6] = [5, 4, 3, 2, 1, 0];

/// All six edges present.
pub const COMPLETE: u8 = 0b11_1111;

const fn pair_index(i: usize, j: usize) -> usize {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    match (i, j) {
        (0, 1) => 0,
        (0, 2) => 1,
        (0, 3) => 2,
        (1, 2) => 3,
        (1, 3) => 4,
        _ => 5,
    }
}

/// For each endpoint pair `(x, y)` with interior `p < q`: the edges of
/// `x-p-q-y` followed by those of `x-q-p-y`.
const PATHS: [[[usize; 3]; 2]; 6] = {
    let mut out = [[[0; 3]; 2]; 6];
    let mut ep = 0;
    while ep < 6 {
        let (x, y) = PAIRS[ep];
        let (mut p, mut q) = (usize::MAX, usize::MAX);
        let mut v = 0;
        while v < 4 {
            if v != x && v != y {
                if p == usize::MAX {
                    p = v;
                } else {
                    q = v;
                }
            }
            v += 1;
        }
        out[ep][0] = [pair_index(x, p), pair_index(p, q), pair_index(q, y)];
        out[ep][1] = [pair_index(x, q), pair_index(q, p), pair_index(p, y)];
        ep += 1;
    }
    out
};

/// Interior vertex order for the two paths of each endpoint pair.
const INTERIORS: [[[usize; 2]; 2]; 6] = {
    let mut out = [[[0; 2]; 2]; 6];
    let mut ep = 0;
    while ep < 6 {
        let (x, y) = PAIRS[ep];
        let (mut p, mut q) = (usize::MAX, usize::MAX);
        let mut v = 0;
        while v < 4 {
            if v != x && v != y {
                if p == usize::MAX {
                    p = v;
                } else {
                    q = v;
                }
            }
            v += 1;
        }
        out[ep][0] = [p, q];
        out[ep][1] = [q, p];
        ep += 1;
    }
    out
};

#[inline]
fn has_all(mask: u8, edges: &[usize; 3]) -> bool {
    edges.iter().all(|&e| mask >> e & 1 == 1)
}

#[inline]
fn path_len(d: &[u64; 6], edges: &[usize; 3]) -> u64 {
    d[edges[0]] + d[edges[1]] + d[edges[2]]
}

/// Which of the two candidate paths is the OP4 for endpoint pair `ep`.
/// On equal length the first path wins: its interior `p, q` is
/// lexicographically smaller than `q, p`.
#[inline]
fn choose(mask: u8, d: &[u64; 6], ep: usize) -> Option<usize> {
    let [p1, p2] = &PATHS[ep];
    match (has_all(mask, p1), has_all(mask, p2)) {
        (true, true) => Some(if path_len(d, p2) < path_len(d, p1) { 1 } else { 0 }),
        (true, false) => Some(0),
        (false, true) => Some(1),
        (false, false) => None,
    }
}

/// Frequencies for a present-mask and local distance array.
#[inline]
pub(crate) fn frequencies_raw(mask: u8, d: &[u64; 6]) -> ([u8; 6], u8) {
    let mut freq = [0u8; 6];
    let mut ops = 0u8;
    for (ep, paths) in PATHS.iter().enumerate() {
        if let Some(which) = choose(mask, d, ep) {
            ops += 1;
            for &e in &paths[which] {
                freq[e] += 1;
            }
        }
    }
    (freq, ops)
}

/// Present-edge pattern of a quadrilateral.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadKind {
    Complete,
    /// Five edges: one pair absent.
    MissingOne,
    /// Four edges forming a 4-cycle (both diagonals absent).
    FourCycle,
    /// Four edges forming a triangle with a pendant edge.
    Paw,
    /// Three or fewer edges; never scored.
    Sparse,
}

impl QuadKind {
    pub fn of_mask(mask: u8) -> Self {
        match (mask & COMPLETE).count_ones() {
            6 => QuadKind::Complete,
            5 => QuadKind::MissingOne,
            4 => {
                // A 4-cycle misses an opposite pair; a paw misses two adjacent pairs.
                let missing = !mask & COMPLETE;
                let a = missing.trailing_zeros() as usize;
                if missing == (1 << a) | (1 << OPPOSITE[a]) {
                    QuadKind::FourCycle
                } else {
                    QuadKind::Paw
                }
            }
            _ => QuadKind::Sparse,
        }
    }
}

/// Four distinct vertices, the pairs among them present in the current graph,
/// and their exact working distances.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Quad {
    vertices: [u32; 4],
    present: u8,
    d: [u64; 6],
}

impl Quad {
    /// `vertices` must be strictly increasing; `d6` is indexed by [`PAIRS`]
    /// and ignored for absent pairs.
    pub fn new(vertices: [u32; 4], present: u8, d6: [u64; 6]) -> Result<Self> {
        if !vertices.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::contract(format!(
                "quad vertices {vertices:?} must be distinct and ascending"
            )));
        }
        if present & !COMPLETE != 0 {
            return Err(Error::contract(format!("present mask {present:#b} has more than six pairs")));
        }
        if present.count_ones() < 4 {
            return Err(Error::contract(format!(
                "quad with {} present edges cannot be scored",
                present.count_ones()
            )));
        }
        let mut d = [0u64; 6];
        for e in 0..6 {
            if present >> e & 1 == 1 {
                d[e] = d6[e];
            }
        }
        Ok(Quad {
            vertices,
            present,
            d,
        })
    }

    /// A complete quad on local vertices `0..4`.
    pub fn complete(d6: [u64; 6]) -> Self {
        Quad::new([0, 1, 2, 3], COMPLETE, d6).expect("complete quad is valid")
    }

    /// Builds a quad from any four distinct vertices; `dist` returns `None`
    /// for pairs absent from the graph.
    pub fn from_fn(mut vertices: [u32; 4], mut dist: impl FnMut(u32, u32) -> Option<u64>) -> Result<Self> {
        vertices.sort_unstable();
        let mut present = 0u8;
        let mut d = [0u64; 6];
        for (e, &(i, j)) in PAIRS.iter().enumerate() {
            if vertices[i] == vertices[j] {
                continue;
            }
            if let Some(w) = dist(vertices[i], vertices[j]) {
                present |= 1 << e;
                d[e] = w;
            }
        }
        Quad::new(vertices, present, d)
    }

    pub fn vertices(&self) -> [u32; 4] {
        self.vertices
    }

    pub fn present(&self) -> u8 {
        self.present
    }

    pub fn has(&self, local_edge: usize) -> bool {
        self.present >> local_edge & 1 == 1
    }

    pub fn distance(&self, local_edge: usize) -> Option<u64> {
        self.has(local_edge).then_some(self.d[local_edge])
    }

    pub fn kind(&self) -> QuadKind {
        QuadKind::of_mask(self.present)
    }

    /// Global edge for a local index.
    pub fn edge(&self, local_edge: usize) -> Edge {
        let (i, j) = PAIRS[local_edge];
        Edge::new(self.vertices[i], self.vertices[j])
    }

    /// Local index of a global edge, if both endpoints belong to the quad.
    pub fn local_edge(&self, e: Edge) -> Option<usize> {
        let i = self.local_vertex(e.u)?;
        let j = self.local_vertex(e.v)?;
        Some(pair_index(i, j))
    }

    fn local_vertex(&self, v: u32) -> Option<usize> {
        self.vertices.iter().position(|&x| x == v)
    }
}

/// A selected optimal 4-vertex path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Op4 {
    /// Vertices along the path, starting at the smaller endpoint.
    pub path: [u32; 4],
    /// Local indices of its three edges.
    pub edges: [usize; 3],
    pub length: u64,
}

/// The OP4 between two vertices of `quad`, or `None` when neither candidate
/// path has all three edges present.
pub fn op4(quad: &Quad, a: u32, b: u32) -> Result<Option<Op4>> {
    let (Some(x), Some(y)) = (quad.local_vertex(a), quad.local_vertex(b)) else {
        return Err(Error::contract(format!(
            "endpoints ({a}, {b}) are not both in quad {:?}",
            quad.vertices
        )));
    };
    if x == y {
        return Err(Error::contract("OP4 endpoints must differ"));
    }
    let ep = pair_index(x, y);
    let (x, y) = PAIRS[ep];
    Ok(choose(quad.present, &quad.d, ep).map(|which| {
        let [p, q] = INTERIORS[ep][which];
        let edges = PATHS[ep][which];
        Op4 {
            path: [quad.vertices[x], quad.vertices[p], quad.vertices[q], quad.vertices[y]],
            edges,
            length: path_len(&quad.d, &edges),
        }
    }))
}

/// Per-edge frequencies within one quadrilateral.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QuadFrequencies {
    /// Indexed by local edge; zero for absent pairs.
    pub freq: [u8; 6],
    pub present: u8,
    pub op_count: u8,
}

impl QuadFrequencies {
    pub fn total(&self) -> u32 {
        self.freq.iter().map(|&f| f as u32).sum()
    }

    /// Frequencies of the present edges, sorted descending.
    pub fn multiset(&self) -> Vec<u8> {
        let mut v: Vec<u8> = (0..6).filter(|&e| self.present >> e & 1 == 1).map(|e| self.freq[e]).collect();
        v.sort_unstable_by(|a, b| b.cmp(a));
        v
    }
}

/// Generic OP4 scoring for any quad (complete or not).
pub fn quad_frequencies(quad: &Quad) -> QuadFrequencies {
    let (freq, op_count) = frequencies_raw(quad.present, &quad.d);
    QuadFrequencies {
        freq,
        present: quad.present,
        op_count,
    }
}

/// Frequencies of a quad with all six edges present.
pub fn complete_quad_frequencies(quad: &Quad) -> Result<QuadFrequencies> {
    if quad.present != COMPLETE {
        return Err(Error::contract("complete_quad_frequencies needs all six edges"));
    }
    Ok(quad_frequencies(quad))
}

/// Frequencies of a quad with four or five edges present.
pub fn incomplete_quad_frequencies(quad: &Quad) -> Result<QuadFrequencies> {
    match quad.present.count_ones() {
        4 | 5 => Ok(quad_frequencies(quad)),
        k => Err(Error::contract(format!("incomplete quad needs 4 or 5 edges, found {k}"))),
    }
}

/// Result of ordering the three opposite-pair distance sums.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SumOrder {
    /// Opposite pairs as `(edge, opposite edge)` local indices, ascending by sum.
    Strict([(usize, usize); 3]),
    Tied,
}

impl SumOrder {
    /// The 5/3/1 assignment implied by a strict order.
    pub fn implied_frequencies(&self) -> Option<[u8; 6]> {
        let SumOrder::Strict(order) = self else {
            return None;
        };
        let mut f = [0u8; 6];
        for (&(a, b), value) in order.iter().zip([5u8, 3, 1]) {
            f[a] = value;
            f[b] = value;
        }
        Some(f)
    }
}

/// Orders the sums `AB+CD`, `AC+BD`, `AD+BC` of a complete quad.
pub fn classify_by_sums(quad: &Quad) -> Result<SumOrder> {
    if quad.present != COMPLETE {
        return Err(Error::contract("classify_by_sums needs all six edges"));
    }
    let d = &quad.d;
    let mut pairs = [(0usize, 5usize), (1, 4), (2, 3)];
    let sum = |p: &(usize, usize)| d[p.0] + d[p.1];
    if sum(&pairs[0]) == sum(&pairs[1]) || sum(&pairs[0]) == sum(&pairs[2]) || sum(&pairs[1]) == sum(&pairs[2]) {
        return Ok(SumOrder::Tied);
    }
    pairs.sort_by_key(sum);
    Ok(SumOrder::Strict(pairs))
}

/// An exact average frequency `total / count`, zero when `count == 0`.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct AvgFrequency {
    pub total: u64,
    pub count: u64,
}

impl AvgFrequency {
    pub fn new(total: u64, count: u64) -> Self {
        AvgFrequency { total, count }
    }

    pub fn to_f64(self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.total as f64 / self.count as f64
        }
    }

    /// `(numerator, denominator)` with zero mapped to `0/1`.
    fn ratio(self) -> (u128, u128) {
        if self.count == 0 {
            (0, 1)
        } else {
            (self.total as u128, self.count as u128)
        }
    }

    /// `self < value` exactly.
    pub fn is_below(self, value: u64) -> bool {
        let (num, den) = self.ratio();
        num < value as u128 * den
    }
}

impl PartialEq for AvgFrequency {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for AvgFrequency {}

impl PartialOrd for AvgFrequency {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for AvgFrequency {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = self.ratio();
        let (c, d) = other.ratio();
        (a * d).cmp(&(c * b))
    }
}

impl fmt::Display for AvgFrequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6}", self.to_f64())
    }
}

/// Per-edge frequency totals and quadrilateral counts for one graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrequencyTable {
    edges: Vec<Edge>,
    total: Vec<u64>,
    count: Vec<u64>,
}

impl FrequencyTable {
    pub fn new(edges: Vec<Edge>, total: Vec<u64>, count: Vec<u64>) -> Result<Self> {
        if total.len() != edges.len() || count.len() != edges.len() {
            return Err(Error::DimensionMismatch {
                expected: edges.len(),
                found: total.len().min(count.len()),
            });
        }
        if !edges.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::contract("frequency table edges must be sorted and unique"));
        }
        Ok(FrequencyTable { edges, total, count })
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// `F(e)` for the `i`-th edge.
    pub fn total(&self, i: usize) -> u64 {
        self.total[i]
    }

    /// `N(e)` for the `i`-th edge.
    pub fn count(&self, i: usize) -> u64 {
        self.count[i]
    }

    pub fn fbar(&self, i: usize) -> AvgFrequency {
        AvgFrequency::new(self.total[i], self.count[i])
    }

    pub fn get(&self, e: Edge) -> Option<AvgFrequency> {
        self.edges.binary_search(&e).ok().map(|i| self.fbar(i))
    }

    /// Number of edges with average frequency strictly below `value`.
    pub fn count_below(&self, value: u64) -> usize {
        (0..self.len()).filter(|&i| self.fbar(i).is_below(value)).count()
    }

    pub fn is_all_zero(&self) -> bool {
        self.total.iter().all(|&f| f == 0)
    }

    /// `sum F / sum N` over all edges.
    pub fn pooled(&self) -> AvgFrequency {
        AvgFrequency::new(self.total.iter().sum(), self.count.iter().sum())
    }

    /// Checks the table covers exactly the edges of `g`.
    pub fn covers(&self, g: &Graph) -> bool {
        self.edges == g.edges()
    }
}

/// How quadrilaterals are chosen for accumulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mode {
    /// Every 4-vertex subset, once.
    Exhaustive,
    /// `per_edge` quadrilaterals drawn uniformly with replacement for each
    /// edge; only that edge's frequency is counted.
    Sampled { per_edge: u32, seed: u64 },
}

/// Which present-edge patterns are scored.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadPatterns {
    /// Complete quadrilaterals only.
    #[default]
    CompleteOnly,
    /// Also quadrilaterals missing one edge, and 4-cycles.
    MissingOneOrCycle,
    /// Every pattern with at least four edges, including the triangle with
    /// a pendant edge.
    AnyFourEdges,
}

impl QuadPatterns {
    pub fn as_str(&self) -> &'static str {
        match self {
            QuadPatterns::CompleteOnly => "complete_only",
            QuadPatterns::MissingOneOrCycle => "missing_one_or_cycle",
            QuadPatterns::AnyFourEdges => "any_four_edges",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [QuadPatterns::CompleteOnly, QuadPatterns::MissingOneOrCycle, QuadPatterns::AnyFourEdges]
            .into_iter()
            .find(|p| p.as_str() == s)
    }

    pub fn includes_incomplete(&self) -> bool {
        *self != QuadPatterns::CompleteOnly
    }
}

/// Whether a present-mask is scored under `patterns`.
#[inline]
pub fn is_scoreable(mask: u8, patterns: QuadPatterns) -> bool {
    let k = mask.count_ones();
    match patterns {
        QuadPatterns::CompleteOnly => k == 6,
        QuadPatterns::MissingOneOrCycle => k >= 5 || (k == 4 && QuadKind::of_mask(mask) == QuadKind::FourCycle),
        QuadPatterns::AnyFourEdges => k >= 4,
    }
}

/// Scores `graph` under `weights`.
///
/// Only quadrilaterals whose present-edge pattern is admitted by `patterns`
/// contribute; those with fewer than four edges never do.
pub fn accumulate(graph: &Graph, weights: &Weights, mode: Mode, patterns: QuadPatterns) -> Result<FrequencyTable> {
    let n = graph.n();
    if n < 4 {
        return Err(Error::TooFewVertices(n));
    }
    if weights.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: weights.n(),
        });
    }
    let (total, count) = match mode {
        Mode::Exhaustive => exhaustive(graph, weights, patterns),
        Mode::Sampled { per_edge, seed } => {
            if per_edge == 0 {
                return Err(Error::contract("sampled mode needs at least one quad per edge"));
            }
            sampled(graph, weights, per_edge, seed, patterns)
        }
    };
    FrequencyTable::new(graph.edges().to_vec(), total, count)
}

struct Dense {
    f: Vec<u32>,
    c: Vec<u32>,
}

impl Dense {
    fn new(n: usize) -> Self {
        Dense {
            f: vec![0; n * n],
            c: vec![0; n * n],
        }
    }

    fn merge(mut self, other: Dense) -> Dense {
        for (a, b) in self.f.iter_mut().zip(&other.f) {
            *a += b;
        }
        for (a, b) in self.c.iter_mut().zip(&other.c) {
            *a += b;
        }
        self
    }
}

fn exhaustive(graph: &Graph, weights: &Weights, patterns: QuadPatterns) -> (Vec<u64>, Vec<u64>) {
    let n = graph.n();
    let adj = graph.adjacency();
    let dense = (0..n)
        .into_par_iter()
        .fold(
            || Dense::new(n),
            |mut acc, a| {
                scan_from(a, &adj, weights, patterns, &mut acc);
                acc
            },
        )
        .reduce(|| Dense::new(n), Dense::merge);
    graph
        .edges()
        .iter()
        .map(|e| {
            let i = e.u as usize * n + e.v as usize;
            (dense.f[i] as u64, dense.c[i] as u64)
        })
        .unzip()
}

/// All scoreable quads whose smallest vertex is `a`.
fn scan_from(a: usize, adj: &Adjacency, w: &Weights, patterns: QuadPatterns, acc: &mut Dense) {
    let n = adj.n();
    let words = adj.words();
    let ra = adj.row(a);
    let mut cand = vec![0u64; words];
    let allow_incomplete = patterns.includes_incomplete();
    for b in a + 1..n {
        let ab = adj.has(a, b);
        if !allow_incomplete && !ab {
            continue;
        }
        let rb = adj.row(b);
        for c in b + 1..n {
            let m3 = ab as u8 + adj.has(a, c) as u8 + adj.has(b, c) as u8;
            if m3 == 0 || (!allow_incomplete && m3 < 3) {
                continue;
            }
            let rc = adj.row(c);
            // Fourth vertices giving at least four present edges in total
            // (all six when incomplete quads are off).
            for (wi, slot) in cand.iter_mut().enumerate() {
                let (x, y, z) = (ra[wi], rb[wi], rc[wi]);
                *slot = match (m3, allow_incomplete) {
                    (3, true) => x | y | z,
                    (2, true) => (x & y) | (x & z) | (y & z),
                    _ => x & y & z,
                };
            }
            // Only d > c.
            let first = (c + 1) / 64;
            for slot in cand.iter_mut().take(first) {
                *slot = 0;
            }
            if first < words {
                cand[first] &= !0u64 << ((c + 1) % 64);
            }
            let m_ab = ab as u8;
            let m_ac = adj.has(a, c) as u8;
            let m_bc = adj.has(b, c) as u8;
            let (wab, wac, wbc) = (w.working(a, b), w.working(a, c), w.working(b, c));
            for d in crate::graph::BitIter::new(&cand) {
                let mask = m_ab
                    | m_ac << 1
                    | (adj.has(a, d) as u8) << 2
                    | m_bc << 3
                    | (adj.has(b, d) as u8) << 4
                    | (adj.has(c, d) as u8) << 5;
                let dist = [wab, wac, w.working(a, d), wbc, w.working(b, d), w.working(c, d)];
                if !is_scoreable(mask, patterns) {
                    continue;
                }
                let (freq, _) = frequencies_raw(mask, &dist);
                let verts = [a, b, c, d];
                for (e, &(i, j)) in PAIRS.iter().enumerate() {
                    if mask >> e & 1 == 1 {
                        let idx = verts[i] * n + verts[j];
                        acc.f[idx] += freq[e] as u32;
                        acc.c[idx] += 1;
                    }
                }
            }
        }
    }
}

/// Random stream for one edge in one cycle; independent of scheduling.
pub(crate) fn edge_rng(seed: u64, cycle: usize, e: Edge, n: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((cycle as u64) << 48) ^ (e.u as u64 * n as u64 + e.v as u64));
    rng
}

/// Frequency of `e` in the quad `{e.u, e.v, c, d}`, if that quad is scoreable.
fn edge_score(adj: &Adjacency, w: &Weights, e: Edge, c: usize, d: usize, patterns: QuadPatterns) -> Option<u8> {
    let mut v = [e.u as usize, e.v as usize, c, d];
    v.sort_unstable();
    let mut mask = 0u8;
    let mut dist = [0u64; 6];
    for (k, &(i, j)) in PAIRS.iter().enumerate() {
        if adj.has(v[i], v[j]) {
            mask |= 1 << k;
            dist[k] = w.working(v[i], v[j]);
        }
    }
    if !is_scoreable(mask, patterns) {
        return None;
    }
    let (freq, ops) = frequencies_raw(mask, &dist);
    if ops == 0 {
        return None;
    }
    let li = v.iter().position(|&x| x == e.u as usize).unwrap();
    let lj = v.iter().position(|&x| x == e.v as usize).unwrap();
    Some(freq[pair_index(li, lj)])
}

/// Draws per-edge frequency samples; shared by sampled accumulation and the
/// diagnostics. Returns one frequency per accepted quad (empty when `e` lies
/// in no scoreable quad).
pub(crate) fn sample_edge(
    adj: &Adjacency,
    w: &Weights,
    e: Edge,
    per_edge: u32,
    rng: &mut ChaCha8Rng,
    patterns: QuadPatterns,
) -> Vec<u8> {
    let n = adj.n();
    let m = n - 2;
    let (u, v) = (e.u as usize, e.v as usize);
    let others = |x: usize| -> usize {
        let mut x = x;
        if x >= u {
            x += 1;
        }
        if x >= v {
            x += 1;
        }
        x
    };
    let want = per_edge as usize;
    let mut out = Vec::with_capacity(want);
    let cap = 64 * want;
    let mut attempts = 0;
    while out.len() < want && attempts < cap {
        attempts += 1;
        let x = rng.gen_range(0..m);
        let mut y = rng.gen_range(0..m - 1);
        if y >= x {
            y += 1;
        }
        if let Some(f) = edge_score(adj, w, e, others(x), others(y), patterns) {
            out.push(f);
        }
    }
    if out.len() < want {
        // Scoreable quads are rare around this edge: list them and draw
        // the remaining samples from the list.
        let mut pool = Vec::new();
        for x in 0..m {
            for y in x + 1..m {
                if let Some(f) = edge_score(adj, w, e, others(x), others(y), patterns) {
                    pool.push(f);
                }
            }
        }
        if pool.is_empty() {
            return out;
        }
        while out.len() < want {
            out.push(pool[rng.gen_range(0..pool.len())]);
        }
    }
    out
}

fn sampled(graph: &Graph, weights: &Weights, per_edge: u32, seed: u64, patterns: QuadPatterns) -> (Vec<u64>, Vec<u64>) {
    let n = graph.n();
    let adj = graph.adjacency();
    graph
        .edges()
        .par_iter()
        .map(|&e| {
            let mut rng = edge_rng(seed, graph.k(), e, n);
            let s = sample_edge(&adj, weights, e, per_edge, &mut rng, patterns);
            (s.iter().map(|&f| f as u64).sum::<u64>(), s.len() as u64)
        })
        .unzip()
}
