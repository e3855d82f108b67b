//! Acceptance checks for the layout engine and its service interfaces.
//! Prints one PASS or FAIL line per criterion and exits nonzero if any fail.

mod enumerate;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use glam::{DVec3, Vec3};
use multilayout_core::bundling::{
    anchors, bundle_scene, max_chord_deviation, mean_chord_deviation, sample_spline, straighten, BundleContext,
    BundleSpec, LineStyle,
};
use multilayout_core::community::{improving_move, louvain, louvain_detailed, modularity, LouvainConfig, Partition};
use multilayout_core::config::EngineConfig;
use multilayout_core::force::{layout_converged, ForceConfig, ForceGraph, InitialLayout};
use multilayout_core::graph::{GraphBuilder, IngestOptions};
use multilayout_core::io::load_graph;
use multilayout_core::scene::{
    Command, CommunityMode, EdgePolyline, LayoutFrame, NetworkMode, NodeInstance, Ring, RingKind, Scene, SceneAssets,
};
use multilayout_core::spherical::{angles_of, spherical_layout, unit_of};
use multilayout_core::synth::{celegans_surrogate, preset, Preset};
use multilayout_core::{CommunityId, EdgeId, Graph, HierarchicalGraph, NodeId, Rgba};
use multilayout_server::protocol::FrameFormat;
use multilayout_server::registry::GraphRegistry;
use multilayout_server::{decode_binary, encode_binary, Condition, ServerMessage, Session, CSV_HEADER};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn graph_from_pairs(n: usize, pairs: &[(usize, usize)]) -> Graph {
    let mut b = GraphBuilder::new();
    for i in 0..n {
        b.add_node(i.to_string(), None, BTreeMap::new());
    }
    for &(u, v) in pairs {
        b.add_edge(u.to_string(), v.to_string(), 1.0, false);
    }
    b.build(IngestOptions::default()).expect("valid pairs").0
}

fn medium() -> Arc<SceneAssets> {
    Arc::new(SceneAssets::from_graph(preset(Preset::Medium, 0).graph, EngineConfig::default()).expect("medium assets"))
}

fn community_count() -> Outcome {
    let file = std::env::var_os("MULTILAYOUT_CELEGANS").map(PathBuf::from).or_else(|| {
        let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/celegansneural.gml");
        p.is_file().then_some(p)
    });
    let (graph, source) = match file {
        Some(p) => (
            load_graph(&p, None).map_err(|e| e.to_string())?.0,
            p.display().to_string(),
        ),
        None => (celegans_surrogate().graph, "synthetic stand-in".to_owned()),
    };
    ensure(graph.node_count() == 297, || format!("{} nodes", graph.node_count()))?;
    let mut counts = Vec::new();
    let mut slowest = 0.0f64;
    for seed in 0..10 {
        let cfg = LouvainConfig {
            seed,
            ..Default::default()
        };
        let t = Instant::now();
        let out = louvain_detailed(&graph, &cfg).map_err(|e| e.to_string())?;
        slowest = slowest.max(t.elapsed().as_secs_f64());
        let k = out.top_level().community_count;
        let q = modularity(&graph, out.top_level(), 1.0).map_err(|e| e.to_string())?;
        ensure((11..=16).contains(&k), || format!("seed {seed}: {k} communities"))?;
        ensure(q >= 0.35, || format!("seed {seed}: modularity {q:.4}"))?;
        ensure(slowest < 5.0, || format!("seed {seed}: {slowest:.2} s"))?;
        counts.push(k);
    }
    ensure(counts.contains(&13), || format!("counts {counts:?}"))?;
    Ok(format!(
        "{source}: communities {counts:?}, slowest run {:.1} ms",
        slowest * 1e3
    ))
}

fn modularity_oracle(g: &Graph, assign: &[usize]) -> f64 {
    let n = g.node_count();
    let mut a = vec![vec![0.0; n]; n];
    for e in &g.edges {
        a[e.u.index()][e.v.index()] += e.weight;
        a[e.v.index()][e.u.index()] += e.weight;
    }
    let k: Vec<f64> = a.iter().map(|row| row.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if assign[i] == assign[j] {
                q += a[i][j] - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

fn modularity_oracle_check() -> Outcome {
    const EXPECTED: [usize; 8] = [1, 1, 2, 6, 21, 112, 853, 11117];
    let levels = enumerate::connected_graphs(8);
    let counts: Vec<usize> = levels.iter().map(Vec::len).collect();
    ensure(counts == EXPECTED, || format!("enumerated {counts:?}"))?;
    let mut checked = 0;
    for level in &levels[1..] {
        for adj in level {
            let g = graph_from_pairs(adj.len(), &enumerate::edges(adj));
            let tree = louvain(&g, &LouvainConfig::default()).map_err(|e| e.to_string())?;
            let p = Partition::top_level_of(&tree);
            if let Some((node, to, gain)) = improving_move(&g, &p, 1.0, 1e-10) {
                return Err(format!("{adj:?}: moving {node} to {to} gains {gain:e}"));
            }
            let q = modularity(&g, &p, 1.0).map_err(|e| e.to_string())?;
            let oracle = modularity_oracle(&g, &p.assign);
            ensure((q - oracle).abs() < 1e-9, || format!("{adj:?}: {q} vs oracle {oracle}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} graphs on 2 to 8 nodes"))
}

fn spherical_invariants() -> Outcome {
    let cfg = EngineConfig::default();
    let s = &cfg.spherical;
    let half_h = s.fov_horizontal.to_radians() / 2.0;
    let half_v = s.fov_vertical.to_radians() / 2.0;
    let mut total = 0;
    for p in [Preset::Easy, Preset::Medium, Preset::Hard] {
        let graph = preset(p, 0).graph;
        let tree = louvain(&graph, &cfg.louvain).map_err(|e| e.to_string())?;
        let h = HierarchicalGraph::new(graph, tree);
        let layout = spherical_layout(&h, s, &cfg.force).map_err(|e| e.to_string())?;
        let tree = &h.tree;
        for (i, &pos) in layout.positions.pos.iter().enumerate() {
            let r = pos.distance(s.eye);
            ensure((r - s.sphere_radius).abs() <= 1e-6 * s.sphere_radius, || {
                format!("{p} node {i}: radius {r}")
            })?;
            let (az, el) = angles_of(pos, s);
            ensure(az.abs() <= half_h + 1e-9 && el.abs() <= half_v + 1e-9, || {
                format!("{p} node {i}: angles {:.3}, {:.3}", az.to_degrees(), el.to_degrees())
            })?;
            let u = unit_of(pos, s);
            let leaf = tree.parent_of[i];
            let cell = layout.cells[&leaf].inset(s.cell_margin);
            ensure(cell.contains(u.x, u.y, 1e-9), || {
                format!("{p} node {i} outside the cell of {leaf}")
            })?;
            let top = layout.cells[&tree.top_level_of(NodeId(i as u32))].inset(s.cell_margin);
            ensure(top.contains(u.x, u.y, 1e-9), || {
                format!("{p} node {i} outside its top-level cell")
            })?;
        }
        for (&c, rect) in &layout.cells {
            let parent = tree.parent[c.index()].expect("non-root");
            let outer = if parent == tree.root {
                1.0
            } else {
                layout.cells[&parent].inset(s.cell_margin).area()
            };
            let want = outer * tree.leaf_count(c) as f64 / tree.leaf_count(parent) as f64;
            ensure((rect.area() - want).abs() <= 1e-6 * want, || {
                format!("{p} community {c}: area {} vs {want}", rect.area())
            })?;
        }
        total += h.graph.node_count();
    }
    Ok(format!("{total} nodes on the sphere, in the cap and in their cells"))
}

fn bundling_schedule() -> Outcome {
    let assets = medium();
    let policy = &assets.config.bundling;
    ensure(
        (policy.overview_beta, policy.spherical_beta, policy.projected_main_beta) == (0.0, 0.7, 0.9),
        || "default strengths differ".into(),
    )?;
    let h = &assets.h;
    let mut scene = Scene::new(Arc::clone(&assets));
    let main_edges = |scene: &Scene| -> Vec<EdgeId> {
        let s = scene.state();
        (0..h.graph.edge_count() as u32)
            .map(EdgeId)
            .filter(|&e| {
                let edge = &h.graph.edges[e.index()];
                [edge.u, edge.v]
                    .iter()
                    .all(|&n| s.mode_of(h.tree.top_level_of(n)) == CommunityMode::OnSphere)
            })
            .collect()
    };
    let betas = |scene: &Scene, edges: &[EdgeId]| -> Vec<f64> {
        edges
            .iter()
            .filter_map(|&e| scene.rendered_edge(e))
            .map(|(b, _)| b)
            .collect()
    };
    scene.render_frame(0.0);
    let all: Vec<EdgeId> = (0..h.graph.edge_count() as u32).map(EdgeId).collect();
    ensure(betas(&scene, &all).iter().all(|&b| b == policy.overview_beta), || {
        "overview strength".into()
    })?;
    let frame = scene.render_frame(0.0);
    let straight = frame.edges.iter().map(|e| f32_chord(&e.points)).fold(0.0, f64::max);
    ensure(straight < 1e-9, || {
        format!("overview edge off its chord by {straight:e}")
    })?;

    scene.apply_command(Command::ExpandNetwork).map_err(|e| e.to_string())?;
    scene.settle(300);
    ensure(betas(&scene, &all).iter().all(|&b| b == policy.spherical_beta), || {
        "spherical strength".into()
    })?;

    let c = h.tree.top_level()[0];
    for cmd in [
        Command::ExpandCommunity { community: c },
        Command::ProjectCommunity { community: c },
    ] {
        scene.apply_command(cmd).map_err(|e| e.to_string())?;
    }
    scene.settle(300);
    let main = main_edges(&scene);
    let b = betas(&scene, &main);
    ensure(
        !b.is_empty() && b.iter().all(|&x| x == policy.projected_main_beta),
        || "projected strength".into(),
    )?;

    // zero strength keeps any bundled path on its chord
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let k = rng.random_range(2..9);
        let pts: Vec<DVec3> = (0..k)
            .map(|_| {
                DVec3::new(
                    rng.random_range(-5.0..5.0),
                    rng.random_range(-5.0..5.0),
                    rng.random_range(-5.0..5.0),
                )
            })
            .collect();
        worst = worst.max(max_chord_deviation(&sample_spline(
            &straighten(&pts, 0.0),
            policy.samples,
        )));
    }
    ensure(worst < 1e-9, || format!("zero-strength deviation {worst:e}"))?;

    // deviation grows with strength on 1000 scene edges
    let tree = &h.tree;
    let pos = &assets.spherical.positions.pos;
    let on_sphere: Vec<bool> = (0..tree.community_count()).map(|c| c != tree.root.index()).collect();
    let anchor = anchors(h, pos, Some((&assets.config.spherical, policy.radial_dip, &on_sphere)));
    let expanded = vec![false; tree.community_count()];
    let ctx = BundleContext {
        overview: false,
        expanded: &expanded,
        projected_active: false,
    };
    let specs: Vec<BundleSpec> = bundle_scene(h, pos, &anchor, &ctx, policy);
    let mut picked = 0;
    for _ in 0..1000 {
        let spec = &specs[rng.random_range(0..specs.len())];
        if spec.style != LineStyle::Spline {
            continue;
        }
        picked += 1;
        let mut last = -1.0;
        for step in 0..=10 {
            let beta = step as f64 / 10.0;
            let d = mean_chord_deviation(&sample_spline(&straighten(&spec.control_points, beta), policy.samples));
            ensure(d >= last - 1e-12, || {
                format!("edge {}: deviation falls at strength {beta}", spec.edge)
            })?;
            last = d;
        }
    }
    Ok(format!(
        "strengths 0 / 0.7 / 0.9 rendered, {} main edges while projecting, {picked} edges monotone",
        main.len()
    ))
}

fn f32_chord(points: &[Vec3]) -> f64 {
    let pts: Vec<DVec3> = points.iter().map(|p| p.as_dvec3()).collect();
    max_chord_deviation(&pts)
}

fn random_command(rng: &mut ChaCha8Rng, n: u32, c: u32) -> Command {
    let community = CommunityId(rng.random_range(0..c + 2));
    match rng.random_range(0..10) {
        0 => Command::ExpandNetwork,
        1 => Command::ShowOverview,
        2 | 3 => Command::ExpandCommunity { community },
        4 => Command::ProjectCommunity { community },
        5 => Command::ResetCommunity { community },
        6 => Command::HighlightNode {
            node: NodeId(rng.random_range(0..n + 3)),
        },
        7 => Command::HighlightCommunity { community },
        8 => Command::ClearHighlight,
        _ => Command::ExpandCommunity {
            community: CommunityId(rng.random_range(1..c)),
        },
    }
}

fn state_machine() -> Outcome {
    let assets = medium();
    let h = &assets.h;
    let (n, c) = (h.graph.node_count() as u32, h.tree.community_count() as u32);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut accepted, mut refused) = (0usize, 0usize);
    for seq in 0..10_000 {
        let mut scene = Scene::new(Arc::clone(&assets));
        let len = rng.random_range(1..=50);
        for step in 0..len {
            let cmd = random_command(&mut rng, n, c);
            let before = scene.state().clone();
            let shown = scene.positions().to_vec();
            match scene.apply_command(cmd) {
                Ok(()) => accepted += 1,
                Err(_) => {
                    refused += 1;
                    ensure(
                        *scene.state() == before && scene.positions() == shown.as_slice(),
                        || format!("sequence {seq} step {step}: refused {cmd:?} changed the scene"),
                    )?;
                }
            }
            let problems = scene.state().check(&h.tree);
            ensure(problems.is_empty(), || {
                format!("sequence {seq} step {step} after {cmd:?}: {problems:?}")
            })?;
            if rng.random_bool(0.1) {
                let dt = [0.0, 1.0 / 30.0, 0.25][rng.random_range(0..3)];
                let frame = scene.render_frame(dt);
                let problems = frame.validate(n as usize, h.graph.edge_count(), c as usize);
                ensure(problems.is_empty(), || {
                    format!("sequence {seq} step {step}: {problems:?}")
                })?;
            }
        }
    }

    let mut scene = Scene::new(Arc::clone(&assets));
    scene.apply_command(Command::ExpandNetwork).map_err(|e| e.to_string())?;
    scene.settle(1000);
    let mut worst = 0.0f64;
    for &community in h.tree.top_level().iter().take(4) {
        scene
            .apply_command(Command::ExpandCommunity { community })
            .map_err(|e| e.to_string())?;
        scene.settle(1000);
        scene
            .apply_command(Command::ResetCommunity { community })
            .map_err(|e| e.to_string())?;
        scene.settle(1000);
        ensure(scene.state().active_transitions.is_empty(), || {
            "transitions still running".into()
        })?;
        for (a, b) in scene.positions().iter().zip(&assets.spherical.positions.pos) {
            worst = worst.max(a.distance(*b));
        }
    }
    ensure(worst <= 1e-6, || format!("round trip off by {worst:e}"))?;
    ensure(scene.state().network_mode == NetworkMode::Expanded, || {
        "left the spherical layout".into()
    })?;
    Ok(format!(
        "10000 sequences, {accepted} accepted and {refused} refused commands, round trip within {worst:.1e}"
    ))
}

fn force_layout() -> Outcome {
    let no_gravity = |dims| ForceConfig {
        k_gravity: 0.0,
        dims,
        max_iterations: 5000,
        ..Default::default()
    };
    let k4 = ForceGraph::new(
        &graph_from_pairs(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]),
        true,
    );
    let p = layout_converged(&k4, InitialLayout::Seeded, &no_gravity(3))
        .map_err(|e| e.to_string())?
        .pos;
    let d: Vec<f64> = (0..4)
        .flat_map(|i| (i + 1..4).map(move |j| (i, j)))
        .map(|(i, j)| p[i].distance(p[j]))
        .collect();
    let (lo, hi) = d.iter().fold((f64::MAX, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    let spread = (hi - lo) / lo;
    ensure(spread < 0.05, || format!("tetrahedron spread {spread:.4}"))?;

    let cfg = no_gravity(3);
    let k2 = ForceGraph::new(&graph_from_pairs(2, &[(0, 1)]), true);
    let p = layout_converged(&k2, InitialLayout::Seeded, &cfg)
        .map_err(|e| e.to_string())?
        .pos;
    let want = 2.0 * cfg.k_repulsion.sqrt();
    let err = (p[0].distance(p[1]) - want).abs() / want;
    ensure(err < 0.01, || format!("K2 distance off by {:.3}%", err * 100.0))?;

    let g = ForceGraph::new(&preset(Preset::Easy, 0).graph, true);
    let flat = ForceConfig {
        dims: 2,
        ..Default::default()
    };
    let p = layout_converged(&g, InitialLayout::Seeded, &flat)
        .map_err(|e| e.to_string())?
        .pos;
    ensure(p.iter().all(|v| v.z == 0.0), || "2D layout left the plane".into())?;
    Ok(format!(
        "tetrahedron spread {:.2}%, K2 error {:.3}%, {} planar nodes",
        spread * 100.0,
        err * 100.0,
        p.len()
    ))
}

fn performance() -> Outcome {
    let cfg = EngineConfig::default();
    let graph = preset(Preset::Stress, 0).graph;
    ensure((graph.node_count(), graph.edge_count()) == (2646, 10455), || {
        "stress graph size".into()
    })?;
    let t = Instant::now();
    let tree = louvain(&graph, &cfg.louvain).map_err(|e| e.to_string())?;
    let h = HierarchicalGraph::new(graph, tree);
    let layout = spherical_layout(&h, &cfg.spherical, &cfg.force).map_err(|e| e.to_string())?;
    let tree = &h.tree;
    let on_sphere: Vec<bool> = (0..tree.community_count()).map(|c| c != tree.root.index()).collect();
    let pos = &layout.positions.pos;
    let anchor = anchors(&h, pos, Some((&cfg.spherical, cfg.bundling.radial_dip, &on_sphere)));
    let expanded = vec![false; tree.community_count()];
    let ctx = BundleContext {
        overview: false,
        expanded: &expanded,
        projected_active: false,
    };
    ensure(cfg.bundling.samples == 24, || "sample count".into())?;
    let points: usize = bundle_scene(&h, pos, &anchor, &ctx, &cfg.bundling)
        .iter()
        .map(|s| s.polyline().len())
        .sum();
    let pipeline = t.elapsed().as_secs_f64();
    ensure(pipeline < 10.0, || format!("pipeline took {pipeline:.2} s"))?;

    let assets = Arc::new(SceneAssets::new(h, cfg).map_err(|e| e.to_string())?);
    let mut slowest = 0.0f64;
    for &community in assets.h.tree.top_level().iter().take(5) {
        let mut scene = Scene::new(Arc::clone(&assets));
        scene.apply_command(Command::ExpandNetwork).map_err(|e| e.to_string())?;
        scene.settle(1000);
        let t = Instant::now();
        scene
            .apply_command(Command::ExpandCommunity { community })
            .map_err(|e| e.to_string())?;
        scene.render_frame(1.0 / 30.0);
        slowest = slowest.max(t.elapsed().as_secs_f64());
    }
    ensure(slowest < 0.033, || format!("expand frame took {:.1} ms", slowest * 1e3))?;
    Ok(format!(
        "pipeline {:.0} ms ({points} polyline points), slowest expand frame {:.1} ms",
        pipeline * 1e3,
        slowest * 1e3
    ))
}

fn telemetry() -> Outcome {
    let registry = Arc::new(GraphRegistry::new(None));
    let mut s = Session::new(
        1,
        registry,
        EngineConfig::default(),
        Condition::Multi,
        FrameFormat::Binary,
        1000.0,
    );
    let mut send = |text: String, now: f64| -> Result<Vec<ServerMessage>, String> {
        let out = s.handle_text(&text, now);
        match out.replies.first() {
            Some(ServerMessage::Error { message, .. }) => Err(format!("{text}: {message}")),
            _ => Ok(out.replies),
        }
    };
    send(r#"{"type":"loadGraph","graph":"medium"}"#.into(), 1000.0)?;
    let top: Vec<u32> = medium().h.tree.top_level().iter().map(|c| c.0).collect();
    let script = [
        r#"{"type":"beginTask","taskId":"T3"}"#.to_owned(),
        r#"{"type":"expandNetwork"}"#.to_owned(),
        format!(r#"{{"type":"expandCommunity","community":{}}}"#, top[0]),
        format!(r#"{{"type":"expandCommunity","community":{}}}"#, top[1]),
        format!(r#"{{"type":"expandCommunity","community":{}}}"#, top[2]),
        format!(r#"{{"type":"projectCommunity","community":{}}}"#, top[1]),
        r#"{"type":"showOverview"}"#.to_owned(),
        r#"{"type":"expandNetwork"}"#.to_owned(),
        r#"{"type":"showOverview"}"#.to_owned(),
        r#"{"type":"endTask","correct":true,"accuracy":0.75}"#.to_owned(),
    ];
    for (i, line) in script.into_iter().enumerate() {
        send(line, 1001.0 + i as f64)?;
    }
    let replies = send(r#"{"type":"exportTelemetry"}"#.into(), 1020.0)?;
    let Some(ServerMessage::Telemetry { csv, .. }) = replies.first() else {
        return Err(format!("no telemetry reply: {replies:?}"));
    };
    let lines: Vec<&str> = csv.lines().collect();
    let header = "condition,graphID,taskID,startTime,endTime,duration,correctAnswerProvided,numberOfInteractions,\
                  numberOfExpansions,numberOfProjections,numberOfOverviews,numberOfSphericalViews,accuracy";
    ensure(lines.first() == Some(&header) && CSV_HEADER.join(",") == header, || {
        format!("header {:?}", lines.first())
    })?;
    ensure(lines.len() == 2, || format!("{} rows", lines.len() - 1))?;
    let want = "MULTI,medium,T3,1001.0,1010.0,9.0,true,8,3,1,2,2,0.75";
    ensure(lines[1] == want, || format!("row {:?}", lines[1]))?;
    Ok(want.to_owned())
}

fn random_frame(rng: &mut ChaCha8Rng) -> LayoutFrame {
    let f = |rng: &mut ChaCha8Rng| f32::from_bits(rng.random());
    let v = |rng: &mut ChaCha8Rng| Vec3::new(f(rng), f(rng), f(rng));
    let rgba = |rng: &mut ChaCha8Rng| Rgba(rng.random());
    LayoutFrame {
        frame_id: rng.random(),
        nodes: (0..rng.random_range(0..60))
            .map(|_| NodeInstance {
                id: NodeId(rng.random()),
                position: v(rng),
                radius: f(rng),
                color: rgba(rng),
            })
            .collect(),
        edges: (0..rng.random_range(0..40))
            .map(|_| EdgePolyline {
                id: EdgeId(rng.random()),
                points: (0..rng.random_range(0..30)).map(|_| v(rng)).collect(),
                color: rgba(rng),
                width: f(rng),
            })
            .collect(),
        rings: (0..rng.random_range(0..6))
            .map(|_| Ring {
                kind: if rng.random() {
                    RingKind::Community
                } else {
                    RingKind::NodeHalo
                },
                id: rng.random(),
                center: v(rng),
                radius: f(rng),
                color: rgba(rng),
            })
            .collect(),
    }
}

fn bits(f: &LayoutFrame) -> Vec<u32> {
    let mut out = vec![(f.frame_id >> 32) as u32, f.frame_id as u32];
    let vec3 = |out: &mut Vec<u32>, p: Vec3| out.extend([p.x.to_bits(), p.y.to_bits(), p.z.to_bits()]);
    for n in &f.nodes {
        out.push(n.id.0);
        vec3(&mut out, n.position);
        out.extend([n.radius.to_bits(), u32::from_le_bytes(n.color.0)]);
    }
    for e in &f.edges {
        out.extend([
            e.id.0,
            e.points.len() as u32,
            u32::from_le_bytes(e.color.0),
            e.width.to_bits(),
        ]);
        for &p in &e.points {
            vec3(&mut out, p);
        }
    }
    for r in &f.rings {
        out.extend([r.kind as u32, r.id]);
        vec3(&mut out, r.center);
        out.extend([r.radius.to_bits(), u32::from_le_bytes(r.color.0)]);
    }
    out
}

fn protocol() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut bytes_total = 0;
    for i in 0..1000 {
        let frame = random_frame(&mut rng);
        let bytes = encode_binary(&frame);
        let back = decode_binary(&bytes).map_err(|e| format!("frame {i}: {e}"))?;
        ensure(bits(&back) == bits(&frame), || format!("frame {i} changed"))?;
        ensure(encode_binary(&back) == bytes, || {
            format!("frame {i} re-encodes differently")
        })?;
        bytes_total += bytes.len();
    }
    Ok(format!("1000 frames, {bytes_total} bytes"))
}

fn main() {
    let checks: [Check; 9] = [
        ("community count", community_count),
        ("modularity oracle", modularity_oracle_check),
        ("spherical invariants", spherical_invariants),
        ("bundling schedule", bundling_schedule),
        ("state machine", state_machine),
        ("force layout", force_layout),
        ("performance", performance),
        ("telemetry", telemetry),
        ("protocol", protocol),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} [{secs:.1} s]"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why} [{secs:.1} s]");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
