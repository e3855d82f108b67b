use std::path::Path;
use std::process::{Command, Output};

use glam::Vec3;
use multilayout_core::io::load_graph;
use multilayout_core::scene::LayoutFrame;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multilayout"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn frame(out: &Output) -> LayoutFrame {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("frame JSON")
}

fn generated(dir: &Path, preset: &str) -> String {
    let path = dir.join(format!("{preset}.json"));
    let out = run(&["generate", preset, "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    path.to_str().unwrap().to_owned()
}

#[test]
fn overview_fits_the_miniature() {
    let dir = tempfile::tempdir().unwrap();
    let f = frame(&run(&["layout", &generated(dir.path(), "easy"), "--mode", "overview"]));
    assert_eq!(f.nodes.len(), 115);
    let center = Vec3::new(0.0, 1.4, 1.0);
    for n in &f.nodes {
        assert!(n.position.distance(center) <= 0.35 + 1e-5, "{:?}", n.position);
    }
}

#[test]
fn spherical_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (g, _) = load_graph(Path::new(&generated(dir.path(), "easy")), None).unwrap();
    let list: String = g.edges.iter().map(|e| format!("{} {}\n", e.u.0, e.v.0)).collect();
    let txt = dir.path().join("easy.txt");
    std::fs::write(&txt, list).unwrap();
    let outs: Vec<_> = ["a.json", "b.json"].iter().map(|f| dir.path().join(f)).collect();
    for out in &outs {
        let o = run(&[
            "layout",
            txt.to_str().unwrap(),
            "--mode",
            "spherical",
            "--seed",
            "7",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(std::fs::read(&outs[0]).unwrap(), std::fs::read(&outs[1]).unwrap());
    let a = run(&["layout", txt.to_str().unwrap(), "--mode", "spherical", "--seed", "7"]);
    let f = frame(&a);
    assert!(f.validate(115, 613, usize::MAX).is_empty());
}

#[test]
fn projected_layout_lies_on_the_floor() {
    let f = frame(&run(&["layout", "easy", "--mode", "projected:1"]));
    let flat = f.nodes.iter().filter(|n| (n.position.y - 0.02).abs() < 1e-6).count();
    assert!(flat > 0);
}

#[test]
fn unknown_community_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.json");
    std::fs::write(
        &g,
        r#"{"nodes":[{"id":0},{"id":1},{"id":2}],"edges":[{"u":0,"v":1},{"u":1,"v":2},{"u":2,"v":0}]}"#,
    )
    .unwrap();
    let out = run(&["layout", g.to_str().unwrap(), "--mode", "projected:4"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("community 4"));
    let out = run(&["layout", "easy", "--mode", "sideways"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_settings_fail() {
    let out = run(&["layout", "easy", "--set", "force.kRepulsion=-1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bench_reports_every_stage() {
    let dir = tempfile::tempdir().unwrap();
    let tri = dir.path().join("tri.txt");
    std::fs::write(&tri, "0 1\n1 2\n2 0\n").unwrap();
    let out = run(&["bench", tri.to_str().unwrap(), "--iterations", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["nodes"], 3);
    assert_eq!(v["iterations"], 2);
    for stage in [
        "louvain",
        "overviewLayout",
        "sphericalLayout",
        "bundling",
        "pipeline",
        "frame",
        "expandFrame",
    ] {
        let t = &v[stage];
        assert!(t["minMs"].as_f64().unwrap() <= t["meanMs"].as_f64().unwrap(), "{stage}");
        assert!(t["meanMs"].as_f64().unwrap() <= t["maxMs"].as_f64().unwrap(), "{stage}");
    }
}

#[test]
fn bench_on_large_graphs() {
    for (name, nodes) in [("hard", 1133), ("stress", 2646)] {
        let out = run(&["bench", name, "--iterations", "1"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(v["nodes"], nodes);
        assert_eq!(v["samples"], 24);
        assert!(v["bundling"]["meanMs"].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn generated_graph_loads_back() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("medium.json");
    let out = run(&["generate", "medium", "--seed", "1", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let (g, _) = load_graph(Path::new(&path), None).unwrap();
    assert_eq!((g.node_count(), g.edge_count()), (297, 2148));
    let again = run(&["generate", "medium", "--seed", "1"]);
    assert_eq!(
        String::from_utf8(again.stdout).unwrap().trim_end(),
        std::fs::read_to_string(&path).unwrap()
    );
}

#[test]
fn config_overrides_apply() {
    let out = run(&[
        "config",
        "--set",
        "force.kRepulsion=4",
        "--set",
        "bundling.expandedIntraStyle=spline",
        "--seed",
        "9",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["force"]["kRepulsion"], 4.0);
    assert_eq!(v["bundling"]["expandedIntraStyle"], "spline");
    assert_eq!(
        (v["louvain"]["seed"].as_u64(), v["force"]["seed"].as_u64()),
        (Some(9), Some(9))
    );
}
