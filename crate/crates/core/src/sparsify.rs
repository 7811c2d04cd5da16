//! Iterative sparsification: score, check stop rules, keep the top two
//! thirds, repair isolated vertices, repeat.

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph};
use crate::quad::{accumulate, AvgFrequency, FrequencyTable, Mode, QuadPatterns};
use crate::tsplib::{Instance, Tour};
use crate::weights::{Perturb, Weights};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Stop rules checked before each prune, in this order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// At most a third of the edges average below 3.
    NBelowRule,
    /// The next prune would leave fewer than `c * n` edges.
    EdgeTarget,
    /// The cycle index reached [`k_max`].
    KMaxCap,
}

impl StopRule {
    pub const ALL: [StopRule; 3] = [StopRule::NBelowRule, StopRule::EdgeTarget, StopRule::KMaxCap];

    pub fn as_str(&self) -> &'static str {
        match self {
            StopRule::NBelowRule => "n_below_rule",
            StopRule::EdgeTarget => "edge_target",
            StopRule::KMaxCap => "k_max_cap",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        StopRule::ALL.into_iter().find(|r| r.as_str() == s)
    }
}

/// Why a run halted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    NBelowRule,
    EdgeTarget,
    KMaxCap,
    /// Every edge scored zero.
    NoScoreableQuadrilaterals,
}

impl From<StopRule> for StopReason {
    fn from(r: StopRule) -> Self {
        match r {
            StopRule::NBelowRule => StopReason::NBelowRule,
            StopRule::EdgeTarget => StopReason::EdgeTarget,
            StopRule::KMaxCap => StopReason::KMaxCap,
        }
    }
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::NBelowRule => "n_below_rule",
            StopReason::EdgeTarget => "edge_target",
            StopReason::KMaxCap => "k_max_cap",
            StopReason::NoScoreableQuadrilaterals => "no scoreable quadrilaterals",
        })
    }
}

/// Configuration of one sparsification run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparsifyConfig {
    /// Target sparsity: stop before fewer than `c * n` edges remain.
    pub c: f64,
    /// Fraction kept per cycle, as `(numerator, denominator)`.
    pub retention: (u32, u32),
    pub mode: Mode,
    pub perturb: Perturb,
    /// First computation cycle that scores incomplete quadrilaterals.
    /// Computation cycles are numbered from 1 and cycle `j` scores `G_{j-1}`.
    pub incomplete_activation_cycle: usize,
    /// Incomplete patterns scored from that cycle on.
    pub incomplete_patterns: QuadPatterns,
    pub stop_rules: Vec<StopRule>,
    /// Prunes performed after the n_below rule fires.
    pub max_extra_cycles: usize,
}

impl SparsifyConfig {
    /// Defaults for an instance: `c = ceil(log2 n)`, exhaustive scoring,
    /// perturbation on for `EXPLICIT` instances only, all stop rules.
    pub fn for_instance(inst: &Instance) -> Self {
        let n = inst.n;
        SparsifyConfig {
            c: (n as f64).log2().ceil().max(1.0),
            retention: (2, 3),
            mode: Mode::Exhaustive,
            perturb: if inst.kind == crate::tsplib::EdgeWeightKind::Explicit {
                Perturb::on(0)
            } else {
                Perturb::Off
            },
            incomplete_activation_cycle: default_activation_cycle(n),
            incomplete_patterns: QuadPatterns::MissingOneOrCycle,
            stop_rules: StopRule::ALL.to_vec(),
            max_extra_cycles: 0,
        }
    }

    /// Patterns scored on `G_k`, i.e. in computation cycle `k + 1`.
    pub fn patterns_at(&self, k: usize) -> QuadPatterns {
        if k + 1 >= self.incomplete_activation_cycle {
            self.incomplete_patterns
        } else {
            QuadPatterns::CompleteOnly
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c >= 1.0) {
            return Err(Error::contract(format!("c = {} must be at least 1", self.c)));
        }
        let (num, den) = self.retention;
        if num == 0 || num >= den {
            return Err(Error::contract(format!("retention {num}/{den} must lie strictly between 0 and 1")));
        }
        if let Perturb::On { amplitude, .. } = self.perturb {
            if !(amplitude.is_finite() && amplitude > 0.0) {
                return Err(Error::contract(format!("perturbation amplitude {amplitude} must be positive")));
            }
        }
        Ok(())
    }

    fn has_rule(&self, r: StopRule) -> bool {
        self.stop_rules.contains(&r)
    }

    /// Number of edges kept out of `m`: `ceil(m * num / den)`.
    pub fn retained(&self, m: usize) -> usize {
        let (num, den) = self.retention;
        (m * num as usize).div_ceil(den as usize)
    }
}

/// `ceil((2/3) * log_{2/3}(2 / (n - 1)))`, at least 0.
pub fn default_activation_cycle(n: usize) -> usize {
    if n <= 3 {
        return 0;
    }
    let x = (2.0 / 3.0) * (2.0 / (n as f64 - 1.0)).ln() / (2.0f64 / 3.0).ln();
    (x - 1e-9).ceil().max(0.0) as usize
}

/// Smallest `k >= 0` with `(2/3)^k <= 2c / (n - 1)`: the cycle at which about
/// `c * n` edges remain. Zero when `2c >= n - 1`.
pub fn k_max(n: usize, c: f64) -> usize {
    let target = 2.0 * c / (n as f64 - 1.0);
    if target >= 1.0 {
        return 0;
    }
    let x = target.ln() / (2.0f64 / 3.0).ln();
    let k = x.ceil();
    // Guard against log rounding pushing an exact power over the boundary.
    if k > 0.0 && (k - x) > 1.0 - 1e-9 {
        (k - 1.0) as usize
    } else {
        k as usize
    }
}

/// Probability that a given OHC edge is gone after `k` cycles:
/// `(1/3) * n / ((2/3)^(k-1) * e0)`, clamped to `[0, 1]`.
pub fn loss_probability(n: usize, k: usize, e0: usize) -> f64 {
    if e0 == 0 {
        return 1.0;
    }
    let k = k.max(1) as i32;
    let p = (1.0 / 3.0) * n as f64 / ((2.0f64 / 3.0).powi(k - 1) * e0 as f64);
    p.clamp(0.0, 1.0)
}

/// Cycles that can run while fewer than `m` OHC edges are expected lost on
/// `K_n`: `2 + ceil(log_{2/3}(n / ((n - 1) m)))`.
pub fn safe_cycles(n: usize, m: usize) -> usize {
    let m = m.max(1) as f64;
    let x = (n as f64 / ((n as f64 - 1.0) * m)).ln() / (2.0f64 / 3.0).ln();
    2 + (x - 1e-9).ceil().max(0.0) as usize
}

/// Statistics for one cycle `k`, describing the graph `G_k` it scored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleReport {
    pub k: usize,
    pub edge_count: usize,
    /// Edges with average frequency strictly below 3.
    pub n_below_3: usize,
    /// Whether four- and five-edge quadrilaterals were scored.
    pub incomplete_active: bool,
    /// Edges kept by the prune applied at this cycle (before repair).
    pub retained: Option<usize>,
    /// Average frequency of the last kept edge.
    pub kept_cut_value: Option<f64>,
    /// Vertices (0-indexed) that were isolated after the prune and repaired.
    pub repaired_vertices: Vec<u32>,
    /// Edges re-added by repair.
    pub repaired_edges: usize,
    /// Repaired vertices that had fewer than two incident edges to restore.
    pub repair_shortfall: Vec<u32>,
    /// Vertices of degree 1 after repair (not repaired, reported only).
    pub degree_one_vertices: usize,
    pub stop_triggered: Option<StopReason>,
    /// Set for cycles run after the n_below rule fired.
    pub extra: bool,
    pub lost_ohc: Option<usize>,
}

impl CycleReport {
    fn new(k: usize, edge_count: usize, n_below_3: usize, incomplete_active: bool) -> Self {
        CycleReport {
            k,
            edge_count,
            n_below_3,
            incomplete_active,
            retained: None,
            kept_cut_value: None,
            repaired_vertices: Vec::new(),
            repaired_edges: 0,
            repair_shortfall: Vec::new(),
            degree_one_vertices: 0,
            stop_triggered: None,
            extra: false,
            lost_ohc: None,
        }
    }
}

/// Sorts edge indices by average frequency descending, then edge ascending.
fn ranking(ft: &FrequencyTable) -> Vec<usize> {
    let mut order: Vec<usize> = (0..ft.len()).collect();
    order.sort_by(|&a, &b| ft.fbar(b).cmp(&ft.fbar(a)).then(ft.edges()[a].cmp(&ft.edges()[b])));
    order
}

/// Keeps the top `retained(|E|)` edges of `g` by average frequency.
/// Returns the pruned graph (at cycle `g.k() + 1`) and the cut value.
pub fn prune_once(g: &Graph, ft: &FrequencyTable, cfg: &SparsifyConfig) -> Result<(Graph, AvgFrequency)> {
    if g.is_empty() {
        return Err(Error::contract("cannot prune an empty graph"));
    }
    if !ft.covers(g) {
        return Err(Error::contract("frequency table does not cover the graph"));
    }
    let keep = cfg.retained(g.edge_count());
    let order = ranking(ft);
    let cut = ft.fbar(order[keep - 1]);
    let kept: Vec<Edge> = order[..keep].iter().map(|&i| ft.edges()[i]).collect();
    Ok((Graph::new(g.n(), g.k() + 1, kept), cut))
}

/// Outcome of [`repair_isolated`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Repair {
    pub graph: Graph,
    pub vertices: Vec<u32>,
    pub added: usize,
    pub shortfall: Vec<u32>,
}

/// Gives every vertex isolated in `pruned` back its two best incident edges
/// from `previous`, ranked by `prev_ft` (ties by edge order).
pub fn repair_isolated(pruned: &Graph, previous: &Graph, prev_ft: &FrequencyTable) -> Result<Repair> {
    if !prev_ft.covers(previous) {
        return Err(Error::contract("frequency table does not cover the previous graph"));
    }
    if pruned.n() != previous.n() {
        return Err(Error::DimensionMismatch {
            expected: previous.n(),
            found: pruned.n(),
        });
    }
    let deg = pruned.degrees();
    let isolated: Vec<u32> = (0..pruned.n() as u32).filter(|&v| deg[v as usize] == 0).collect();
    if isolated.is_empty() {
        return Ok(Repair {
            graph: pruned.clone(),
            vertices: Vec::new(),
            added: 0,
            shortfall: Vec::new(),
        });
    }
    let mut edges = pruned.edges().to_vec();
    let mut shortfall = Vec::new();
    for &v in &isolated {
        let mut incident: Vec<usize> = (0..prev_ft.len()).filter(|&i| prev_ft.edges()[i].contains(v)).collect();
        incident.sort_by(|&a, &b| prev_ft.fbar(b).cmp(&prev_ft.fbar(a)).then(prev_ft.edges()[a].cmp(&prev_ft.edges()[b])));
        if incident.len() < 2 {
            shortfall.push(v);
        }
        edges.extend(incident.iter().take(2).map(|&i| prev_ft.edges()[i]));
    }
    let graph = Graph::new(pruned.n(), pruned.k(), edges);
    let added = graph.edge_count() - pruned.edge_count();
    Ok(Repair {
        graph,
        vertices: isolated,
        added,
        shortfall,
    })
}

/// First enabled stop rule that fires for a cycle with `edge_count` edges of
/// which `n_below_3` average below 3.
pub fn stop_check(report: &CycleReport, cfg: &SparsifyConfig, n: usize) -> Option<StopRule> {
    if cfg.has_rule(StopRule::NBelowRule) && 3 * report.n_below_3 <= report.edge_count {
        return Some(StopRule::NBelowRule);
    }
    if cfg.has_rule(StopRule::EdgeTarget) && (cfg.retained(report.edge_count) as f64) < cfg.c * n as f64 {
        return Some(StopRule::EdgeTarget);
    }
    if cfg.has_rule(StopRule::KMaxCap) && report.k >= k_max(n, cfg.c) {
        return Some(StopRule::KMaxCap);
    }
    None
}

/// One retained cycle of a run.
#[derive(Clone, Debug)]
pub struct Cycle {
    pub graph: Graph,
    pub table: FrequencyTable,
    pub report: CycleReport,
}

/// All cycles of a run plus how it ended.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub weights: Weights,
    pub cycles: Vec<Cycle>,
    pub stop: StopReason,
    /// Cycle at which the n_below rule first fired.
    pub k_s: Option<usize>,
}

impl RunOutcome {
    /// The graph handed to downstream solvers (the last cycle's graph).
    pub fn output(&self) -> &Cycle {
        self.cycles.last().expect("a run has at least one cycle")
    }

    pub fn cycle(&self, k: usize) -> Option<&Cycle> {
        self.cycles.get(k)
    }
}

/// Runs the algorithm from `K_n` until a stop rule fires.
pub fn run(inst: &Instance, cfg: &SparsifyConfig, tour: Option<&Tour>) -> Result<RunOutcome> {
    cfg.validate()?;
    let weights = Weights::with_perturbation(inst, cfg.perturb)?;
    run_with_weights(weights, cfg, tour)
}

/// [`run`] on precomputed working distances.
pub fn run_with_weights(weights: Weights, cfg: &SparsifyConfig, tour: Option<&Tour>) -> Result<RunOutcome> {
    cfg.validate()?;
    let n = weights.n();
    if n < 4 {
        return Err(Error::TooFewVertices(n));
    }
    if let Some(t) = tour {
        if t.n() != n {
            return Err(Error::DimensionMismatch { expected: n, found: t.n() });
        }
    }
    let mut g = Graph::complete(n);
    let mut cycles = Vec::new();
    let mut k_s = None;
    // Remaining prunes after the n_below rule fired.
    let mut extra_left: Option<usize> = None;
    let stop = loop {
        let k = g.k();
        let patterns = cfg.patterns_at(k);
        let table = accumulate(&g, &weights, cfg.mode, patterns)?;
        let mut report = CycleReport::new(k, g.edge_count(), table.count_below(3), patterns.includes_incomplete());
        report.extra = extra_left.is_some();
        report.lost_ohc = tour.map(|t| crate::analysis::lost_ohc_edges(&g, t));

        let mut halt = None;
        match stop_check(&report, cfg, n) {
            Some(StopRule::NBelowRule) if extra_left.is_none() => {
                report.stop_triggered = Some(StopReason::NBelowRule);
                k_s = Some(k);
                extra_left = Some(cfg.max_extra_cycles);
            }
            Some(StopRule::NBelowRule) | None => {}
            Some(hard) => halt = Some(StopReason::from(hard)),
        }
        if halt.is_none() && table.is_all_zero() {
            halt = Some(StopReason::NoScoreableQuadrilaterals);
        }
        if halt.is_none() && extra_left == Some(0) {
            halt = Some(StopReason::NBelowRule);
        }
        if let Some(reason) = halt {
            if report.stop_triggered.is_none() {
                report.stop_triggered = Some(reason);
            }
            cycles.push(Cycle { graph: g, table, report });
            break reason;
        }

        let (pruned, cut) = prune_once(&g, &table, cfg)?;
        report.retained = Some(pruned.edge_count());
        report.kept_cut_value = Some(cut.to_f64());
        let repair = repair_isolated(&pruned, &g, &table)?;
        report.repaired_vertices = repair.vertices;
        report.repaired_edges = repair.added;
        report.repair_shortfall = repair.shortfall;
        let next = repair.graph.with_k(k + 1);
        report.degree_one_vertices = next.degrees().iter().filter(|&&d| d == 1).count();
        if let Some(left) = extra_left.as_mut() {
            *left -= 1;
        }
        cycles.push(Cycle { graph: g, table, report });
        g = next;
    };
    Ok(RunOutcome {
        weights,
        cycles,
        stop,
        k_s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::PAIRS;
    use crate::weights::TICKS_PER_UNIT;

    fn cfg(n: usize) -> SparsifyConfig {
        SparsifyConfig {
            c: 1.0,
            retention: (2, 3),
            mode: Mode::Exhaustive,
            perturb: Perturb::Off,
            incomplete_activation_cycle: default_activation_cycle(n),
            incomplete_patterns: QuadPatterns::MissingOneOrCycle,
            stop_rules: StopRule::ALL.to_vec(),
            max_extra_cycles: 0,
        }
    }

    fn table(g: &Graph, fbar: &[(u64, u64)]) -> FrequencyTable {
        FrequencyTable::new(
            g.edges().to_vec(),
            fbar.iter().map(|x| x.0).collect(),
            fbar.iter().map(|x| x.1).collect(),
        )
        .unwrap()
    }

    #[test]
    fn formula_values() {
        assert_eq!(k_max(100, 1.0), 10);
        assert_eq!(k_max(17, 1.0), 6);
        assert_eq!(k_max(100, 100f64.log2()), 5);
        assert_eq!(k_max(5, 2.0), 0);
        assert!((loss_probability(100, 1, 4950) - 0.006734).abs() < 1e-6);
        let ratio = loss_probability(100, 10, 4950) / loss_probability(100, 1, 4950);
        assert!((ratio - 1.5f64.powi(9)).abs() < 1e-9);
        assert_eq!(loss_probability(100, 40, 4950), 1.0);
        assert_eq!(safe_cycles(1000, 1), 2);
        assert_eq!(safe_cycles(100, 3), 5);
        assert_eq!(default_activation_cycle(17), 4);
        assert_eq!(default_activation_cycle(10), 3);
        assert_eq!(default_activation_cycle(4), 1);
    }

    #[test]
    fn retention_is_ceiling() {
        let c = cfg(10);
        assert_eq!(c.retained(9), 6);
        assert_eq!(c.retained(10), 7);
        assert_eq!(c.retained(136), 91);
    }

    #[test]
    fn prune_keeps_top_two_thirds() {
        let g = Graph::complete(4);
        // Ranking: AD, BC (5) then AC, BD (3) then AB, CD (1).
        let ft = table(&g, &[(1, 1), (3, 1), (5, 1), (5, 1), (3, 1), (1, 1)]);
        let (p, cut) = prune_once(&g, &ft, &cfg(4)).unwrap();
        assert_eq!(p.edges(), &[Edge::new(0, 2), Edge::new(0, 3), Edge::new(1, 2), Edge::new(1, 3)]);
        assert_eq!(cut, AvgFrequency::new(3, 1));
        assert_eq!(p.k(), 1);
    }

    #[test]
    fn prune_ties_are_lexicographic() {
        let g = Graph::complete(5);
        let ft = table(&g, &[(3, 1); 10]);
        let (p, _) = prune_once(&g, &ft, &cfg(5)).unwrap();
        assert_eq!(p.edges(), &g.edges()[..7]);
    }

    #[test]
    fn prune_rejects_empty_graph() {
        let g = Graph::new(4, 0, vec![]);
        let ft = table(&g, &[]);
        assert!(prune_once(&g, &ft, &cfg(4)).unwrap_err().is_contract_violation());
    }

    #[test]
    fn repair_restores_two_best_edges() {
        let prev = Graph::new(
            5,
            0,
            vec![Edge::new(0, 1), Edge::new(0, 2), Edge::new(0, 3), Edge::new(1, 2), Edge::new(2, 3), Edge::new(3, 4), Edge::new(1, 4)],
        );
        // fbar: 01 4.2, 02 3.1, 03 2.0, others high.
        let ft = table(&prev, &[(42, 10), (31, 10), (20, 10), (5, 1), (5, 1), (5, 1), (5, 1)]);
        let pruned = Graph::new(5, 1, vec![Edge::new(1, 2), Edge::new(2, 3), Edge::new(3, 4), Edge::new(1, 4)]);
        let r = repair_isolated(&pruned, &prev, &ft).unwrap();
        assert_eq!(r.vertices, vec![0]);
        assert!(r.graph.contains(Edge::new(0, 1)) && r.graph.contains(Edge::new(0, 2)));
        assert!(!r.graph.contains(Edge::new(0, 3)));
        assert_eq!(r.added, 2);
        assert!(r.shortfall.is_empty());
    }

    #[test]
    fn repair_flags_shortfall() {
        let prev = Graph::new(4, 0, vec![Edge::new(0, 1), Edge::new(1, 2), Edge::new(2, 3)]);
        let ft = table(&prev, &[(1, 1), (1, 1), (1, 1)]);
        let pruned = Graph::new(4, 1, vec![Edge::new(1, 2), Edge::new(2, 3)]);
        let r = repair_isolated(&pruned, &prev, &ft).unwrap();
        assert_eq!(r.vertices, vec![0]);
        assert_eq!(r.shortfall, vec![0]);
        assert_eq!(r.graph.edge_count(), 3);
    }

    #[test]
    fn repair_without_isolated_vertices_is_identity() {
        let prev = Graph::complete(4);
        let ft = table(&prev, &[(1, 1); 6]);
        let pruned = Graph::new(4, 1, prev.edges()[..5].to_vec());
        assert_eq!(repair_isolated(&pruned, &prev, &ft).unwrap().graph, pruned);
    }

    #[test]
    fn stop_rule_arithmetic() {
        let c = cfg(1000);
        let mut r = CycleReport::new(0, 300, 90, false);
        assert_eq!(stop_check(&r, &c, 1000), Some(StopRule::NBelowRule));
        r.n_below_3 = 150;
        assert_eq!(stop_check(&r, &c, 1000), Some(StopRule::EdgeTarget));
        let c = SparsifyConfig { stop_rules: vec![StopRule::NBelowRule], ..cfg(100) };
        assert_eq!(stop_check(&r, &c, 100), None);
    }

    #[test]
    fn k4_square_run_keeps_the_ohc() {
        let square = [60u64, 40, 20, 20, 45, 58];
        let mut t = vec![0u64; 16];
        for (e, &(i, j)) in PAIRS.iter().enumerate() {
            t[i * 4 + j] = square[e] * TICKS_PER_UNIT;
            t[j * 4 + i] = square[e] * TICKS_PER_UNIT;
        }
        let w = Weights::from_ticks(4, t).unwrap();
        let c = SparsifyConfig { stop_rules: vec![StopRule::EdgeTarget], ..cfg(4) };
        let out = run_with_weights(w, &c, None).unwrap();
        assert_eq!(out.stop, StopReason::EdgeTarget);
        assert_eq!(out.cycles.len(), 2);
        let g = &out.output().graph;
        assert_eq!(g.edges(), &[Edge::new(0, 2), Edge::new(0, 3), Edge::new(1, 2), Edge::new(1, 3)]);
        assert!(out.cycles.iter().all(|c| c.report.lost_ohc.is_none()));
    }

    #[test]
    fn invalid_config_is_rejected() {
        let mut c = cfg(10);
        c.c = 0.5;
        assert!(c.validate().is_err());
        c.c = 1.0;
        c.retention = (3, 3);
        assert!(c.validate().is_err());
    }
}
