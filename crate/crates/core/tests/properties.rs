use proptest::prelude::*;
use quadfreq::analysis::metrics;
use quadfreq::quad::{
    accumulate, classify_by_sums, op4, quad_frequencies, Mode, Quad, QuadKind, QuadPatterns, SumOrder, COMPLETE, OPPOSITE,
};
use quadfreq::sparsify::{run_with_weights, SparsifyConfig, StopRule};
use quadfreq::weights::{Perturb, Weights, TICKS_PER_UNIT};
use quadfreq::{Graph, Instance};

fn dist6() -> impl Strategy<Value = [u64; 6]> {
    prop::array::uniform6(1u64..1_000_000)
}

fn coords(n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.0..1000.0f64, 0.0..1000.0f64), n)
}

fn config(inst: &Instance, seed: u64) -> SparsifyConfig {
    let mut cfg = SparsifyConfig::for_instance(inst);
    cfg.c = 1.0;
    cfg.perturb = Perturb::on(seed);
    cfg
}

proptest! {
    #[test]
    fn complete_quads_conserve_eighteen(d in dist6()) {
        let f = quad_frequencies(&Quad::complete(d));
        prop_assert_eq!(f.total(), 18);
        prop_assert_eq!(f.op_count, 6);
        for (e, &o) in OPPOSITE.iter().enumerate() {
            prop_assert_eq!(f.freq[e], f.freq[o]);
        }
        if let SumOrder::Strict(_) = classify_by_sums(&Quad::complete(d)).unwrap() {
            prop_assert_eq!(f.multiset(), vec![5, 5, 3, 3, 1, 1]);
        }
    }

    #[test]
    fn strict_sum_order_predicts_frequencies(d in dist6()) {
        let q = Quad::complete(d);
        if let Some(implied) = classify_by_sums(&q).unwrap().implied_frequencies() {
            prop_assert_eq!(quad_frequencies(&q).freq, implied);
        }
    }

    #[test]
    fn op4_is_the_shorter_valid_path(d in dist6(), missing in 0usize..7) {
        let present = if missing == 6 { COMPLETE } else { COMPLETE & !(1 << missing) };
        let q = Quad::new([0, 1, 2, 3], present, d).unwrap();
        for a in 0..4u32 {
            for b in a + 1..4 {
                let p = op4(&q, a, b).unwrap();
                let others: Vec<u32> = (0..4).filter(|&v| v != a && v != b).collect();
                for (x, y) in [(others[0], others[1]), (others[1], others[0])] {
                    let path = [a, x, y, b];
                    let lens: Option<u64> = path.windows(2).map(|w| {
                        let e = q.local_edge(quadfreq::Edge::new(w[0], w[1])).unwrap();
                        q.distance(e)
                    }).sum();
                    match (lens, p) {
                        (Some(len), Some(p)) => prop_assert!(p.length <= len),
                        (Some(_), None) => prop_assert!(false, "a valid path exists for ({}, {})", a, b),
                        (None, _) => {}
                    }
                }
            }
        }
    }

    #[test]
    fn one_missing_edge_totals_fifteen(d in dist6(), missing in 0usize..6) {
        let q = Quad::new([0, 1, 2, 3], COMPLETE & !(1 << missing), d).unwrap();
        prop_assert_eq!(q.kind(), QuadKind::MissingOne);
        let f = quad_frequencies(&q);
        prop_assert_eq!(f.total(), 15);
        prop_assert_eq!(f.multiset().iter().filter(|&&x| x == 1).count(), 1);
        prop_assert_eq!(f.multiset().iter().filter(|&&x| x >= 3).count(), 4);
    }

    #[test]
    fn four_cycles_score_three_everywhere(d in dist6(), diagonal in 0usize..3) {
        // Removing an opposite pair leaves a 4-cycle.
        let (a, b) = [(0, 5), (1, 4), (2, 3)][diagonal];
        let q = Quad::new([0, 1, 2, 3], COMPLETE & !(1 << a) & !(1 << b), d).unwrap();
        prop_assert_eq!(q.kind(), QuadKind::FourCycle);
        let f = quad_frequencies(&q);
        prop_assert_eq!(f.total(), 12);
        prop_assert_eq!(f.multiset(), vec![3, 3, 3, 3]);
    }

    #[test]
    fn scaling_and_shifting_keep_frequencies(d in dist6(), scale in 1u64..1000, shift in 0u64..1000) {
        let base = quad_frequencies(&Quad::complete(d)).freq;
        let scaled = quad_frequencies(&Quad::complete(d.map(|x| x * scale))).freq;
        let shifted = quad_frequencies(&Quad::complete(d.map(|x| x + shift))).freq;
        prop_assert_eq!(base, scaled);
        prop_assert_eq!(base, shifted);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn complete_graph_count_law(pts in coords(4..14), seed in any::<u64>()) {
        let inst = Instance::euclidean("p", pts).unwrap();
        let n = inst.n as u64;
        let w = Weights::with_perturbation(&inst, Perturb::on(seed)).unwrap();
        let t = accumulate(&Graph::complete(inst.n), &w, Mode::Exhaustive, QuadPatterns::CompleteOnly).unwrap();
        let per_edge = (n - 2) * (n - 3) / 2;
        prop_assert!((0..t.len()).all(|i| t.count(i) == per_edge));
        let sum: u64 = (0..t.len()).map(|i| t.total(i)).sum();
        prop_assert_eq!(sum, 18 * n * (n - 1) * (n - 2) * (n - 3) / 24);
        prop_assert_eq!(t.pooled().to_f64(), 3.0);
    }

    #[test]
    fn sampled_mode_is_deterministic(pts in coords(6..16), seed in any::<u64>()) {
        let inst = Instance::euclidean("p", pts).unwrap();
        let w = Weights::from_instance(&inst).unwrap();
        let g = Graph::complete(inst.n);
        let mode = Mode::Sampled { per_edge: 7, seed };
        let a = accumulate(&g, &w, mode, QuadPatterns::CompleteOnly).unwrap();
        let b = accumulate(&g, &w, mode, QuadPatterns::CompleteOnly).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn runs_nest_and_follow_the_retention_law(pts in coords(8..30), seed in any::<u64>()) {
        let inst = Instance::euclidean("p", pts).unwrap();
        let cfg = config(&inst, seed);
        let w = Weights::with_perturbation(&inst, cfg.perturb).unwrap();
        let out = run_with_weights(w.clone(), &cfg, None).unwrap();
        let again = run_with_weights(w, &cfg, None).unwrap();
        prop_assert_eq!(out.cycles.len(), again.cycles.len());
        for (a, b) in out.cycles.iter().zip(&again.cycles) {
            prop_assert_eq!(&a.graph, &b.graph);
            prop_assert_eq!(&a.report, &b.report);
        }
        for pair in out.cycles.windows(2) {
            let (prev, next) = (&pair[0], &pair[1]);
            prop_assert_eq!(next.graph.k(), prev.graph.k() + 1);
            prop_assert!(next.graph.edges().iter().all(|&e| prev.graph.contains(e)));
            let kept = prev.report.retained.unwrap();
            prop_assert_eq!(kept, (2 * prev.graph.edge_count()).div_ceil(3));
            prop_assert_eq!(next.graph.edge_count(), kept + prev.report.repaired_edges);
            prop_assert!(next.graph.degrees().iter().all(|&d| d > 0));
        }
        let last = out.output();
        prop_assert!(last.report.stop_triggered.is_some());
        let m = metrics(&last.graph, None, None).unwrap();
        prop_assert!((m.c * inst.n as f64 - last.graph.edge_count() as f64).abs() < 1e-9);
    }

    #[test]
    fn edge_target_alone_stops_before_dropping_below_cn(pts in coords(8..30), c in 1.0f64..4.0) {
        let inst = Instance::euclidean("p", pts).unwrap();
        let mut cfg = config(&inst, 3);
        cfg.c = c;
        cfg.stop_rules = vec![StopRule::EdgeTarget];
        let out = run_with_weights(Weights::with_perturbation(&inst, cfg.perturb).unwrap(), &cfg, None).unwrap();
        let n = inst.n as f64;
        for cy in &out.cycles[..out.cycles.len() - 1] {
            prop_assert!(cy.report.retained.unwrap() as f64 >= c * n);
        }
    }
}

#[test]
fn ticks_are_whole_units_without_perturbation() {
    let inst = Instance::euclidean("sq", vec![(0.0, 0.0), (3.0, 0.0), (3.0, 4.0), (0.0, 4.0)]).unwrap();
    let w = Weights::from_instance(&inst).unwrap();
    assert_eq!(w.working(0, 2), 5 * TICKS_PER_UNIT);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn optimal_tour_ignores_relabeling_and_offsets(pts in coords(5..9), shift in 1u64..1000, rot in 0usize..8) {
        use quadfreq::analysis::brute_force_ohc_weights;
        let inst = Instance::euclidean("p", pts).unwrap();
        let n = inst.n;
        let w = Weights::with_perturbation(&inst, Perturb::on(5)).unwrap();
        let base = brute_force_ohc_weights(&w).unwrap();
        let len = |t: &quadfreq::Tour, w: &Weights| -> u64 { t.edges().iter().map(|e| w.working(e.u as usize, e.v as usize)).sum() };

        let shifted: Vec<u64> = w.working_matrix().iter().enumerate()
            .map(|(i, &x)| if i / n == i % n { x } else { x + shift * TICKS_PER_UNIT }).collect();
        let ws = Weights::from_ticks(n, shifted).unwrap();
        let moved = brute_force_ohc_weights(&ws).unwrap();
        prop_assert_eq!(moved.edges(), base.edges());

        let perm: Vec<usize> = (0..n).map(|i| (i + rot) % n).collect();
        let mut relabeled = vec![0u64; n * n];
        for u in 0..n {
            for v in 0..n {
                relabeled[perm[u] * n + perm[v]] = w.working(u, v);
            }
        }
        let wr = Weights::from_ticks(n, relabeled).unwrap();
        prop_assert_eq!(len(&brute_force_ohc_weights(&wr).unwrap(), &wr), len(&base, &w));
    }
}
