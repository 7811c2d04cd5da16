//! The `report.json` written by `sparsify`.

use crate::expect::Comparison;
use quadfreq::analysis::Metrics;
use quadfreq::quad::Mode;
use quadfreq::sparsify::{CycleReport, SparsifyConfig, StopReason};
use quadfreq::EdgeWeightKind;
use serde::{Deserialize, Serialize};

pub const TOOL: &str = "quadfreq";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    /// Instance path as given on the command line.
    pub instance: String,
    pub instance_name: String,
    pub n: usize,
    pub edge_weight_type: EdgeWeightKind,
    pub tour: Option<String>,
    pub config: SparsifyConfig,
    pub seeds: Seeds,
    pub k_max: usize,
    pub cycles: Vec<CycleRecord>,
    pub stop: StopReason,
    /// Cycle at which the n_below rule fired, if it did.
    pub k_s: Option<usize>,
    /// Cycle whose graph is the output.
    pub output_cycle: usize,
    pub metrics: Metrics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Comparison>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub perturbation: Option<u64>,
    pub sampling: Option<u64>,
}

impl Seeds {
    pub fn of(cfg: &SparsifyConfig) -> Self {
        Seeds {
            perturbation: cfg.perturb.seed(),
            sampling: match cfg.mode {
                Mode::Exhaustive => None,
                Mode::Sampled { seed, .. } => Some(seed),
            },
        }
    }
}

/// A [`CycleReport`] with vertices numbered from 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub k: usize,
    pub edge_count: usize,
    pub n_below_3: usize,
    pub incomplete_active: bool,
    pub retained: Option<usize>,
    pub kept_cut_value: Option<f64>,
    pub repaired_vertices: Vec<u32>,
    pub repaired_edges: usize,
    pub repair_shortfall: Vec<u32>,
    pub degree_one_vertices: usize,
    pub stop_triggered: Option<StopReason>,
    pub extra: bool,
    pub lost_ohc: Option<usize>,
}

impl From<&CycleReport> for CycleRecord {
    fn from(r: &CycleReport) -> Self {
        let one_based = |v: &[u32]| v.iter().map(|x| x + 1).collect();
        CycleRecord {
            k: r.k,
            edge_count: r.edge_count,
            n_below_3: r.n_below_3,
            incomplete_active: r.incomplete_active,
            retained: r.retained,
            kept_cut_value: r.kept_cut_value,
            repaired_vertices: one_based(&r.repaired_vertices),
            repaired_edges: r.repaired_edges,
            repair_shortfall: one_based(&r.repair_shortfall),
            degree_one_vertices: r.degree_one_vertices,
            stop_triggered: r.stop_triggered,
            extra: r.extra,
            lost_ohc: r.lost_ohc,
        }
    }
}
