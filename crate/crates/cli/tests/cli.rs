use quadfreq_cli::manifest::RunManifest;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_quadfreq"))
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/tsplib").join(name)
}

fn sparsify(extra: &[&str], out: &Path) -> Output {
    bin()
        .arg("sparsify")
        .arg("--instance")
        .arg(data("gr17.tsp"))
        .arg("--tour")
        .arg(data("gr17.opt.tour"))
        .args(extra)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn manifest(out: &Path) -> RunManifest {
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

#[test]
fn gr17_stops_at_cycle_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = sparsify(&["--c", "1", "--perturb", "on:42"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(dir.path());
    assert_eq!(m.k_s, Some(3));
    let c = m.cycles[3].edge_count as f64 / 17.0;
    assert!((c - 2.53).abs() / 2.53 <= 0.10, "c = {c}");
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("stop: n_below_rule"), "{stdout}");
}

#[test]
fn edge_files_match_reported_counts() {
    let dir = tempfile::tempdir().unwrap();
    assert!(sparsify(&["--c", "1"], dir.path()).status.success());
    let m = manifest(dir.path());
    for c in &m.cycles {
        let text = std::fs::read_to_string(dir.path().join(format!("graph_k{}.edges", c.k))).unwrap();
        assert_eq!(text.lines().count(), c.edge_count, "k = {}", c.k);
    }
}

#[test]
fn final_only_writes_one_edge_file() {
    let dir = tempfile::tempdir().unwrap();
    assert!(sparsify(&["--final-only"], dir.path()).status.success());
    let m = manifest(dir.path());
    let edges: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|f| f.ends_with(".edges"))
        .collect();
    assert_eq!(edges, vec![format!("graph_k{}.edges", m.output_cycle)]);
}

#[test]
fn sampled_runs_repeat_exactly() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert!(sparsify(&["--mode", "sampled:100:7"], d.path()).status.success());
    }
    let ra = std::fs::read(a.path().join("report.json")).unwrap();
    assert_eq!(ra, std::fs::read(b.path().join("report.json")).unwrap());
}

#[test]
fn replaying_a_report_reproduces_it() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let flags = ["--c", "1.5", "--perturb", "on:9", "--stop-rules", "edge_target,k_max_cap", "--activation-cycle", "2"];
    assert!(sparsify(&flags, a.path()).status.success());
    let o = bin()
        .arg("sparsify")
        .arg("--from-report")
        .arg(a.path().join("report.json"))
        .arg("--out")
        .arg(b.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in std::fs::read_dir(a.path()).unwrap() {
        let name = f.unwrap().file_name();
        assert_eq!(
            std::fs::read(a.path().join(&name)).unwrap(),
            std::fs::read(b.path().join(&name)).unwrap(),
            "{name:?}"
        );
    }
}

#[test]
fn expect_adds_a_comparison_block() {
    let dir = tempfile::tempdir().unwrap();
    let tables = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/published/tables.json");
    let o = sparsify(&["--c", "1", "--expect", tables.to_str().unwrap()], dir.path());
    assert!(o.status.success());
    let cmp = manifest(dir.path()).expect.expect("comparison present");
    assert_eq!(cmp.instance, "gr17");
    assert_eq!(cmp.cycles.len(), 3);
}

#[test]
fn missing_instance_exits_one_and_names_the_path() {
    let o = bin().args(["sparsify", "--instance", "no/such/file.tsp"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no/such/file.tsp"));
}

#[test]
fn malformed_instance_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.tsp");
    std::fs::write(&path, "NAME: bad\nTYPE: TSP\nDIMENSION: 5\nEDGE_WEIGHT_TYPE: EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 1\n").unwrap();
    let o = bin().arg("sparsify").arg("--instance").arg(&path).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn tour_of_another_instance_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .arg("sparsify")
        .arg("--instance")
        .arg(data("gr17.tsp"))
        .arg("--tour")
        .arg(data("gr24.opt.tour"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

fn tour_text(order: &[u32]) -> String {
    let mut s = format!("NAME: t\nTYPE: TOUR\nDIMENSION: {}\nTOUR_SECTION\n", order.len());
    for v in order {
        s.push_str(&format!("{v}\n"));
    }
    s.push_str("-1\nEOF\n");
    s
}

fn verify(graph: &str, tour: &str) -> Output {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("g.edges"), graph).unwrap();
    std::fs::write(dir.path().join("t.tour"), tour).unwrap();
    bin()
        .arg("verify")
        .arg("--graph")
        .arg(dir.path().join("g.edges"))
        .arg("--tour")
        .arg(dir.path().join("t.tour"))
        .output()
        .unwrap()
}

#[test]
fn verify_counts_missing_tour_edges() {
    let tour = tour_text(&[1, 2, 3, 4, 5]);
    let full = "1 2\n2 3\n3 4\n4 5\n1 5\n1 3\n";
    let o = verify(full, &tour);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("lost_ohc: 0"));
    let o = verify("1 2\n2 3\n3 4\n4 5\n1 3\n", &tour);
    assert!(String::from_utf8_lossy(&o.stdout).contains("lost_ohc: 1"));
}

#[test]
fn verify_rejects_out_of_range_vertices() {
    let o = verify("1 2\n2 9\n", &tour_text(&[1, 2, 3, 4, 5]));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn diagnose_refuses_large_n() {
    let o = bin().args(["diagnose", "--n", "13"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("smaller --n"));
}

#[test]
fn diagnose_prints_text_and_json() {
    let o = bin().args(["diagnose", "--n", "8", "--trials", "5", "--seed", "3"]).output().unwrap();
    assert!(o.status.success());
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.contains("tour-edge mean fbar"));
    let json = &out[out.find('{').unwrap()..];
    let v: serde_json::Value = serde_json::from_str(json).unwrap();
    assert_eq!(v["trials_run"], 5);
}
