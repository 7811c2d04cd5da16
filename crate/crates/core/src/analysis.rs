//! Verification against known optimal tours, summary metrics, and Monte-Carlo
//! diagnostics of the per-quadrilateral frequency distribution.

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph};
use crate::quad::{self, accumulate, is_scoreable, quad_frequencies, Mode, Quad, QuadPatterns};
use crate::tsplib::{Instance, Tour};
use crate::weights::{Weights, TICKS_PER_UNIT};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Largest instance [`brute_force_ohc`] will enumerate.
pub const BRUTE_FORCE_MAX_N: usize = 12;

/// Number of tour edges missing from `g`.
pub fn lost_ohc_edges(g: &Graph, tour: &Tour) -> usize {
    tour.edges().iter().filter(|&&e| !g.contains(e)).count()
}

/// Edge count and below-3 count of the graph at the stop cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopContext {
    pub edge_count: usize,
    pub n_below_3: usize,
}

/// Summary numbers for one preserved graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub n: usize,
    pub edge_count: usize,
    /// `|E| / n`.
    pub c: f64,
    /// `2|E| / n` rounded to the nearest integer (halves up).
    pub d: usize,
    /// `ceil(2|E| / n)`, reported alongside `d`.
    pub d_ceil: usize,
    /// `(|E_s|/3 - N_below) / (|E_s|/3)` at the stop cycle.
    pub rho: Option<f64>,
    pub l_ohc: Option<usize>,
}

pub fn metrics(g: &Graph, stop: Option<StopContext>, tour: Option<&Tour>) -> Result<Metrics> {
    if g.is_empty() {
        return Err(Error::contract("metrics of an empty graph"));
    }
    let n = g.n();
    let m = g.edge_count();
    if let Some(t) = tour {
        if t.n() != n {
            return Err(Error::DimensionMismatch { expected: n, found: t.n() });
        }
    }
    Ok(Metrics {
        n,
        edge_count: m,
        c: m as f64 / n as f64,
        d: (4 * m + n) / (2 * n),
        d_ceil: (2 * m).div_ceil(n),
        rho: stop.map(|s| rho(s.edge_count, s.n_below_3)),
        l_ohc: tour.map(|t| lost_ohc_edges(g, t)),
    })
}

pub fn rho(edge_count: usize, n_below_3: usize) -> f64 {
    let third = edge_count as f64 / 3.0;
    (third - n_below_3 as f64) / third
}

/// Exact optimal tour of a small instance by depth-first enumeration with
/// vertex 1 fixed first. Among optimal tours the lexicographically smallest
/// vertex sequence is returned, which fixes the orientation.
pub fn brute_force_ohc(inst: &Instance) -> Result<Tour> {
    guard_brute_force(inst.n)?;
    let d: Vec<u64> = inst.distance_matrix().iter().map(|&x| x as u64).collect();
    Tour::from_order(shortest_cycle(inst.n, &d), inst.n)
}

/// [`brute_force_ohc`] on working (possibly perturbed) distances.
pub fn brute_force_ohc_weights(w: &Weights) -> Result<Tour> {
    guard_brute_force(w.n())?;
    Tour::from_order(shortest_cycle(w.n(), w.working_matrix()), w.n())
}

fn guard_brute_force(n: usize) -> Result<()> {
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::contract(format!(
            "exhaustive optimal tour refused for n = {n} > {BRUTE_FORCE_MAX_N}; supply a tour instead"
        )));
    }
    if n < 4 {
        return Err(Error::TooFewVertices(n));
    }
    Ok(())
}

fn shortest_cycle(n: usize, d: &[u64]) -> Vec<u32> {
    struct Search<'a> {
        n: usize,
        d: &'a [u64],
        path: Vec<u32>,
        best: u64,
        best_path: Vec<u32>,
    }
    impl Search<'_> {
        fn go(&mut self, visited: u32, len: u64) {
            let last = *self.path.last().unwrap() as usize;
            if self.path.len() == self.n {
                let total = len + self.d[last * self.n];
                if total < self.best {
                    self.best = total;
                    self.best_path.clone_from(&self.path);
                }
                return;
            }
            for v in 1..self.n {
                if visited >> v & 1 == 1 {
                    continue;
                }
                let next = len + self.d[last * self.n + v];
                if next >= self.best {
                    continue;
                }
                self.path.push(v as u32);
                self.go(visited | 1 << v, next);
                self.path.pop();
            }
        }
    }
    let mut s = Search {
        n,
        d,
        path: vec![0],
        best: u64::MAX,
        best_path: Vec::new(),
    };
    s.go(1, 0);
    s.best_path
}

/// Counts, over every scoreable quad containing `e` in `g`, how often `e`
/// scores each frequency `0..=5`. Walks the quads of `e` directly rather
/// than through [`accumulate`].
pub fn edge_frequency_histogram(g: &Graph, w: &Weights, e: Edge, patterns: QuadPatterns) -> Result<[u64; 6]> {
    if !g.contains(e) {
        return Err(Error::contract(format!("edge {e} is not in the graph")));
    }
    let n = g.n();
    let mut hist = [0u64; 6];
    for c in 0..n as u32 {
        if e.contains(c) {
            continue;
        }
        for d in c + 1..n as u32 {
            if e.contains(d) {
                continue;
            }
            let verts = [e.u, e.v, c, d];
            let present = |a: u32, b: u32| g.contains(Edge::new(a, b));
            let mut count = 0;
            for i in 0..4 {
                for j in i + 1..4 {
                    count += present(verts[i], verts[j]) as u32;
                }
            }
            if count < 4 {
                continue;
            }
            let q = Quad::from_fn(verts, |a, b| present(a, b).then(|| w.working(a as usize, b as usize)))?;
            if !is_scoreable(q.present(), patterns) {
                continue;
            }
            let f = quad_frequencies(&q);
            let local = q.local_edge(e).expect("edge belongs to its quad");
            hist[f.freq[local] as usize] += 1;
        }
    }
    Ok(hist)
}

/// Random instance families for the diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Points uniform in `[0, 10^6)^2`, `EUC_2D` distances.
    Euclidean,
    /// I.i.d. uniform distances on `K_n`.
    Uniform,
}

/// Working distances for trial `trial` of a seeded family.
pub fn trial_weights(family: Family, n: usize, seed: u64, trial: u64) -> Result<Weights> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    match family {
        Family::Euclidean => {
            let coords = (0..n).map(|_| (rng.gen_range(0.0..1e6), rng.gen_range(0.0..1e6))).collect();
            Weights::from_instance(&Instance::euclidean(format!("rand{n}-{seed}-{trial}"), coords)?)
        }
        Family::Uniform => {
            let mut t = vec![0u64; n * n];
            for u in 0..n {
                for v in u + 1..n {
                    let x = rng.gen_range(1..=1u64 << 20) * TICKS_PER_UNIT;
                    t[u * n + v] = x;
                    t[v * n + u] = x;
                }
            }
            Weights::from_ticks(n, t)
        }
    }
}

/// Frequency counts `0..=5` over sampled (edge, quad) incidences.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub counts: [u64; 6],
}

impl Histogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn add(&mut self, f: u8) {
        self.counts[f as usize] += 1;
    }

    pub fn merge(&mut self, other: &Histogram) {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
    }

    /// Empirical probability of frequency `f`.
    pub fn p(&self, f: usize) -> f64 {
        let t = self.total();
        if t == 0 {
            0.0
        } else {
            self.counts[f] as f64 / t as f64
        }
    }

    /// Standard error of [`Histogram::p`] under independent draws with
    /// true probability `p0`.
    pub fn standard_error(&self, p0: f64) -> f64 {
        (p0 * (1.0 - p0) / self.total().max(1) as f64).sqrt()
    }

    pub fn p_at_least(&self, f: usize) -> f64 {
        (f..6).map(|x| self.p(x)).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsConfig {
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub samples_per_edge: u32,
    pub family: Family,
}

/// Aggregated diagnostics over all trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub config: DiagnosticsConfig,
    /// Sampled frequencies of every edge.
    pub all_edges: Histogram,
    /// Sampled frequencies of optimal-tour edges.
    pub ohc_edges: Histogram,
    /// Per trial: mean exact average frequency of the optimal-tour edges.
    pub ohc_mean_fbar: Vec<f64>,
    pub ohc_mean_fbar_grand: f64,
    /// `3 + 2/(n-2)`.
    pub model_ohc_mean: f64,
    /// `1/3 + 1/(3(n-2))`.
    pub model_ohc_p5: f64,
    /// Sampled `p(f >= 3)` of optimal-tour edges.
    pub ohc_p_at_least_3: f64,
    /// Informational lower bound `7/3 + 4/(3(n-3))` on optimal-tour edge
    /// average frequency.
    pub lower_bound: f64,
    /// Optimal-tour edges (over all trials) averaging below `lower_bound`.
    pub ohc_edges_below_lower_bound: usize,
    /// Trials whose sampled per-edge quads were all drawn.
    pub trials_run: u64,
}

struct TrialResult {
    all: Histogram,
    ohc: Histogram,
    ohc_mean: f64,
    below_bound: usize,
}

/// Runs seeded trials of random complete instances and compares the
/// observed frequency distribution with the uniform 5/3/1 model.
pub fn frequency_diagnostics(cfg: &DiagnosticsConfig) -> Result<DiagnosticsReport> {
    guard_brute_force(cfg.n)?;
    if cfg.samples_per_edge == 0 {
        return Err(Error::contract("samples_per_edge must be positive"));
    }
    let n = cfg.n;
    let lower_bound = 7.0 / 3.0 + 4.0 / (3.0 * (n as f64 - 3.0));
    let results: Vec<TrialResult> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| -> Result<TrialResult> {
            let w = trial_weights(cfg.family, n, cfg.seed, trial)?;
            let tour = brute_force_ohc_weights(&w)?;
            let g = Graph::complete(n);
            let table = accumulate(&g, &w, Mode::Exhaustive, QuadPatterns::CompleteOnly)?;
            let adj = g.adjacency();
            let mut all = Histogram::default();
            let mut ohc = Histogram::default();
            let trial_seed = cfg.seed ^ trial.wrapping_mul(0x9E37_79B9_7F4A_7C15);
            for &e in g.edges() {
                let mut rng = quad::edge_rng(trial_seed, 0, e, n);
                let s = quad::sample_edge(&adj, &w, e, cfg.samples_per_edge, &mut rng, QuadPatterns::CompleteOnly);
                let on_tour = tour.contains(e);
                for f in s {
                    all.add(f);
                    if on_tour {
                        ohc.add(f);
                    }
                }
            }
            let fbars: Vec<f64> = tour.edges().iter().map(|&e| table.get(e).unwrap().to_f64()).collect();
            Ok(TrialResult {
                all,
                ohc,
                ohc_mean: fbars.iter().sum::<f64>() / n as f64,
                below_bound: fbars.iter().filter(|&&f| f < lower_bound).count(),
            })
        })
        .collect::<Result<_>>()?;

    let mut all = Histogram::default();
    let mut ohc = Histogram::default();
    for r in &results {
        all.merge(&r.all);
        ohc.merge(&r.ohc);
    }
    let means: Vec<f64> = results.iter().map(|r| r.ohc_mean).collect();
    let grand = if means.is_empty() { 0.0 } else { means.iter().sum::<f64>() / means.len() as f64 };
    Ok(DiagnosticsReport {
        config: cfg.clone(),
        all_edges: all,
        ohc_edges: ohc,
        ohc_mean_fbar_grand: grand,
        ohc_mean_fbar: means,
        model_ohc_mean: 3.0 + 2.0 / (n as f64 - 2.0),
        model_ohc_p5: 1.0 / 3.0 + 1.0 / (3.0 * (n as f64 - 2.0)),
        ohc_p_at_least_3: ohc.p_at_least(3),
        lower_bound,
        ohc_edges_below_lower_bound: results.iter().map(|r| r.below_bound).sum(),
        trials_run: results.len() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lost_edges_count_missing_tour_edges() {
        let tour = Tour::from_order(vec![0, 1, 2, 3, 4], 5).unwrap();
        let full = Graph::complete(5);
        assert_eq!(lost_ohc_edges(&full, &tour), 0);
        let minus_one = Graph::new(5, 1, tour.edges()[1..].to_vec());
        assert_eq!(lost_ohc_edges(&minus_one, &tour), 1);
    }

    #[test]
    fn metric_arithmetic() {
        let edges: Vec<Edge> = Graph::complete(17).edges()[..43].to_vec();
        let g = Graph::new(17, 3, edges);
        let m = metrics(&g, Some(StopContext { edge_count: 300, n_below_3: 40 }), None).unwrap();
        assert!((m.c - 2.529).abs() < 1e-3);
        assert_eq!(m.d, 5);
        assert_eq!(m.d_ceil, 6);
        assert!((m.rho.unwrap() - 0.6).abs() < 1e-12);
        assert_eq!(m.l_ohc, None);
    }

    #[test]
    fn collinear_points_give_the_line_tour() {
        let inst = Instance::euclidean("line", vec![(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0)]).unwrap();
        assert_eq!(brute_force_ohc(&inst).unwrap().order(), &[0, 1, 2, 3]);
    }

    #[test]
    fn brute_force_refuses_large_instances() {
        let coords = (0..13).map(|i| (i as f64, (i * i) as f64)).collect();
        let inst = Instance::euclidean("big", coords).unwrap();
        assert!(brute_force_ohc(&inst).unwrap_err().is_contract_violation());
    }

    #[test]
    fn histogram_probabilities() {
        let mut h = Histogram::default();
        for f in [5, 5, 3, 1] {
            h.add(f);
        }
        assert_eq!(h.p(5), 0.5);
        assert_eq!(h.p_at_least(3), 0.75);
    }
}
