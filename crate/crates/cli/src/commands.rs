use crate::expect::{compare, Comparison, ExpectedTables, Observed};
use crate::manifest::{CycleRecord, RunManifest, Seeds, TOOL};
use crate::{DiagnoseArgs, Failure, SparsifyArgs, VerifyArgs};
use quadfreq::analysis::{frequency_diagnostics, metrics, DiagnosticsConfig, DiagnosticsReport, StopContext, BRUTE_FORCE_MAX_N};
use quadfreq::sparsify::{k_max, run, RunOutcome, SparsifyConfig};
use quadfreq::tsplib::{parse_edge_list, write_edge_list, EdgeListEntry};
use quadfreq::{parse_instance, parse_tour, parse_tour_unsized, Error, Graph, Instance, Tour};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

type Result<T> = std::result::Result<T, Failure>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<Instance> {
    parse_instance(&read(path)?).map_err(|e| Failure::from_core(path.display(), e))
}

fn load_tour(path: &Path, n: usize) -> Result<Tour> {
    parse_tour(&read(path)?, n).map_err(|e| Failure::from_core(path.display(), e))
}

struct Plan {
    instance: PathBuf,
    tour: Option<PathBuf>,
    cfg: Option<SparsifyConfig>,
}

fn plan(a: &SparsifyArgs) -> Result<Plan> {
    if let Some(path) = &a.from_report {
        let m: RunManifest =
            serde_json::from_str(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        return Ok(Plan {
            instance: m.instance.into(),
            tour: m.tour.map(Into::into),
            cfg: Some(m.config),
        });
    }
    Ok(Plan {
        instance: a.instance.clone().expect("clap requires --instance"),
        tour: a.tour.clone(),
        cfg: None,
    })
}

fn configure(a: &SparsifyArgs, inst: &Instance) -> SparsifyConfig {
    let mut cfg = SparsifyConfig::for_instance(inst);
    if let Some(c) = a.c {
        cfg.c = c;
    }
    if let Some(m) = a.mode {
        cfg.mode = m;
    }
    if let Some(p) = a.perturb {
        cfg.perturb = p;
    }
    if let Some(x) = a.extra_cycles {
        cfg.max_extra_cycles = x;
    }
    if let Some(r) = &a.stop_rules {
        let mut r = r.clone();
        r.sort();
        r.dedup();
        cfg.stop_rules = r;
    }
    if let Some(k) = a.activation_cycle {
        cfg.incomplete_activation_cycle = k;
    }
    if let Some(p) = a.incomplete_patterns {
        cfg.incomplete_patterns = p;
    }
    cfg
}

/// Runs one configuration and builds its manifest. Shared with the
/// acceptance suite through [`crate::sparsify_to_manifest`].
pub(crate) fn execute(
    instance_path: &str,
    inst: &Instance,
    tour_path: Option<&str>,
    tour: Option<&Tour>,
    cfg: &SparsifyConfig,
    expected: Option<&ExpectedTables>,
) -> std::result::Result<(RunManifest, RunOutcome), Error> {
    let out = run(inst, cfg, tour)?;
    let stop_cycle = out.k_s.unwrap_or(out.output().report.k);
    let sc = &out.cycles[stop_cycle].report;
    let ctx = StopContext {
        edge_count: sc.edge_count,
        n_below_3: sc.n_below_3,
    };
    let m = metrics(&out.output().graph, Some(ctx), tour)?;
    let comparison = expected.and_then(|t| t.instances.get(&inst.name)).map(|exp| {
        let observed: Vec<Observed> = out
            .cycles
            .iter()
            .map(|c| Observed {
                k: c.report.k,
                edges: c.report.edge_count,
                lost: c.report.lost_ohc,
            })
            .collect();
        let stop = out
            .k_s
            .map(|k| (k, out.cycles[k].report.edge_count as f64 / inst.n as f64));
        compare(&inst.name, exp, &observed, stop)
    });
    let manifest = RunManifest {
        tool: TOOL.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        instance: instance_path.to_string(),
        instance_name: inst.name.clone(),
        n: inst.n,
        edge_weight_type: inst.kind,
        tour: tour_path.map(str::to_string),
        config: cfg.clone(),
        seeds: Seeds::of(cfg),
        k_max: k_max(inst.n, cfg.c),
        cycles: out.cycles.iter().map(|c| CycleRecord::from(&c.report)).collect(),
        stop: out.stop,
        k_s: out.k_s,
        output_cycle: out.output().report.k,
        metrics: m,
        expect: comparison,
    };
    Ok((manifest, out))
}

pub(crate) fn sparsify(a: &SparsifyArgs) -> Result<()> {
    let p = plan(a)?;
    let inst = load_instance(&p.instance)?;
    let tour = p.tour.as_deref().map(|t| load_tour(t, inst.n)).transpose()?;
    let cfg = p.cfg.unwrap_or_else(|| configure(a, &inst));
    let expected = a
        .expect
        .as_deref()
        .map(|path| -> Result<ExpectedTables> {
            serde_json::from_str(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
        })
        .transpose()?;
    if let Some(t) = &expected {
        if !t.instances.contains_key(&inst.name) {
            eprintln!("note: no reference rows for {}; skipping comparison", inst.name);
        }
    }
    let instance_str = p.instance.display().to_string();
    let tour_str = p.tour.as_ref().map(|t| t.display().to_string());
    let (manifest, out) = execute(&instance_str, &inst, tour_str.as_deref(), tour.as_ref(), &cfg, expected.as_ref())
        .map_err(|e| Failure::from_core(&instance_str, e))?;

    fs::create_dir_all(&a.out).map_err(|e| Failure::Input(format!("{}: {e}", a.out.display())))?;
    let cycles = if a.final_only { std::slice::from_ref(out.output()) } else { &out.cycles[..] };
    for c in cycles {
        let entries: Vec<EdgeListEntry> = c
            .graph
            .edges()
            .iter()
            .map(|&e| EdgeListEntry {
                edge: e,
                distance: out.weights.original(e.u as usize, e.v as usize),
                fbar: c.table.get(e).map_or(0.0, |f| f.to_f64()),
            })
            .collect();
        write(&a.out.join(format!("graph_k{}.edges", c.report.k)), &write_edge_list(&entries))?;
    }
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write(&a.out.join("report.json"), &(json + "\n"))?;
    print!("{}", summary(&manifest));
    Ok(())
}

/// Human-readable per-cycle table and final metrics.
pub fn summary(m: &RunManifest) -> String {
    let mut s = String::new();
    let cfg = &m.config;
    let _ = writeln!(
        s,
        "{} (n = {}, {})  c = {}  k_max = {}  activation k = {}",
        m.instance_name,
        m.n,
        m.edge_weight_type.as_str(),
        cfg.c,
        m.k_max,
        cfg.incomplete_activation_cycle
    );
    let _ = writeln!(s, "{:>4} {:>8} {:>6} {:>8} {:>8} {:>6}  event", "k", "|E_k|", "lost", "N_<3", "|E_k|/3", "incmp");
    for c in &m.cycles {
        let lost = c.lost_ohc.map_or("-".to_string(), |l| l.to_string());
        let mut event = String::new();
        if let Some(r) = c.stop_triggered {
            event.push_str(&r.to_string());
        }
        if c.repaired_edges > 0 {
            let _ = write!(event, "{}repaired {} edges", if event.is_empty() { "" } else { "; " }, c.repaired_edges);
        }
        if c.extra {
            event.push_str(if event.is_empty() { "extra" } else { "; extra" });
        }
        let _ = writeln!(
            s,
            "{:>4} {:>8} {:>6} {:>8} {:>8.1} {:>6}  {}",
            c.k,
            c.edge_count,
            lost,
            c.n_below_3,
            c.edge_count as f64 / 3.0,
            if c.incomplete_active { "yes" } else { "no" },
            event
        );
    }
    let mt = &m.metrics;
    let k_s = m.k_s.map_or("-".to_string(), |k| k.to_string());
    let _ = writeln!(s, "stop: {} at k = {}  (k_s = {})", m.stop, m.output_cycle, k_s);
    let _ = write!(s, "output: |E| = {}  c = {:.3}  d = {} (ceil {})", mt.edge_count, mt.c, mt.d, mt.d_ceil);
    if let Some(r) = mt.rho {
        let _ = write!(s, "  rho = {r:.3}");
    }
    if let Some(l) = mt.l_ohc {
        let _ = write!(s, "  l_ohc = {l}");
    }
    s.push('\n');
    if let Some(cmp) = &m.expect {
        s.push_str(&comparison_text(cmp));
    }
    s
}

fn comparison_text(c: &Comparison) -> String {
    let mut s = String::from("reference comparison:\n");
    for r in &c.cycles {
        let ours = r.edges.map_or("-".into(), |e| e.to_string());
        let rel = r.relative_difference.map_or("-".into(), |x| format!("{:+.1}%", 100.0 * x));
        let lost = r.lost.map_or("-".into(), |l| l.to_string());
        let _ = writeln!(s, "  k = {:>2}  edges {:>6} vs {:>6} ({rel})  lost {lost} vs {}", r.k, ours, r.expected_edges, r.expected_lost);
    }
    if let Some(f) = &c.first_loss {
        let show = |x: Option<usize>| x.map_or("none".to_string(), |k| k.to_string());
        let _ = writeln!(s, "  first loss k = {} vs {}", show(f.observed), show(f.expected));
    }
    if let Some(st) = &c.stop {
        let k = st.k_s.map_or("-".into(), |k| k.to_string());
        let cc = st.c.map_or("-".into(), |c| format!("{c:.3}"));
        let _ = writeln!(s, "  k_s = {k} vs {}  c = {cc} vs {:.3}", st.expected_k_s, st.expected_c);
    }
    s
}

pub(crate) fn verify(a: &VerifyArgs) -> Result<()> {
    let tour_text = read(&a.tour)?;
    let tour = match &a.instance {
        Some(path) => load_tour(&a.tour, load_instance(path)?.n)?,
        None => parse_tour_unsized(&tour_text).map_err(|e| Failure::from_core(a.tour.display(), e))?,
    };
    let n = tour.n();
    let entries = parse_edge_list(&read(&a.graph)?).map_err(|e| Failure::from_core(a.graph.display(), e))?;
    let mut edges = Vec::with_capacity(entries.len());
    for e in &entries {
        if e.edge.v as usize >= n {
            return Err(Failure::from_core(
                a.graph.display(),
                Error::VertexOutOfRange {
                    vertex: e.edge.v as usize + 1,
                    n,
                },
            ));
        }
        edges.push(e.edge);
    }
    let g = Graph::new(n, 0, edges);
    if g.is_empty() {
        return Err(Failure::Contract(format!("{}: graph has no edges", a.graph.display())));
    }
    let m = metrics(&g, None, Some(&tour)).map_err(|e| Failure::from_core(a.graph.display(), e))?;
    println!("lost_ohc: {}", m.l_ohc.unwrap_or(0));
    println!("edges: {}", m.edge_count);
    println!("n: {}", m.n);
    println!("c: {:.3}", m.c);
    println!("d: {} (ceil {})", m.d, m.d_ceil);
    Ok(())
}

pub(crate) fn diagnose(a: &DiagnoseArgs) -> Result<()> {
    if a.n > BRUTE_FORCE_MAX_N || a.n < 4 {
        return Err(Failure::Contract(format!(
            "--n {} is outside 4..={BRUTE_FORCE_MAX_N}: diagnostics need the exact optimal tour of every \
             random instance, found by enumeration; choose a smaller --n",
            a.n
        )));
    }
    let cfg = DiagnosticsConfig {
        n: a.n,
        trials: a.trials,
        seed: a.seed,
        samples_per_edge: a.samples_per_edge,
        family: a.family,
    };
    let r = frequency_diagnostics(&cfg).map_err(|e| Failure::from_core("diagnose", e))?;
    print!("{}", diagnostics_text(&r));
    println!("{}", serde_json::to_string_pretty(&r).expect("report serializes"));
    Ok(())
}

pub fn diagnostics_text(r: &DiagnosticsReport) -> String {
    let mut s = String::new();
    let c = &r.config;
    let _ = writeln!(
        s,
        "{:?} instances: n = {}, trials = {}, seed = {}, {} sampled quads per edge",
        c.family, c.n, r.trials_run, c.seed, c.samples_per_edge
    );
    let third = 1.0 / 3.0;
    for (label, h) in [("all edges", &r.all_edges), ("tour edges", &r.ohc_edges)] {
        let _ = writeln!(
            s,
            "  {label:<10} p(f=5) = {:.4}  p(f=3) = {:.4}  p(f=1) = {:.4}  (se at 1/3: {:.4}, samples {})",
            h.p(5),
            h.p(3),
            h.p(1),
            h.standard_error(third),
            h.total()
        );
    }
    let min = r.ohc_mean_fbar.iter().copied().fold(f64::INFINITY, f64::min);
    let _ = writeln!(
        s,
        "  tour-edge mean fbar: {:.4} over trials (model {:.4}), lowest trial {:.4}",
        r.ohc_mean_fbar_grand, r.model_ohc_mean, min
    );
    let _ = writeln!(s, "  tour-edge p(f >= 3): {:.4} (model at least 0.6667)", r.ohc_p_at_least_3);
    let _ = writeln!(
        s,
        "  lower bound 7/3 + 4/(3(n-3)) = {:.4}; tour edges below it: {}",
        r.lower_bound, r.ohc_edges_below_lower_bound
    );
    s
}
