//! The subcommands, as plain functions returning their output.

use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use anyhow::bail;
use multilayout_core::bundling::{anchors, bundle_scene, BundleContext};
use multilayout_core::community::louvain;
use multilayout_core::config::EngineConfig;
use multilayout_core::overview::overview_layout;
use multilayout_core::scene::{Command, LayoutFrame, Scene, SceneAssets};
use multilayout_core::spherical::spherical_layout;
use multilayout_core::{CommunityId, Graph, HierarchicalGraph};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Overview,
    Spherical,
    Floating(CommunityId),
    Projected(CommunityId),
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let community = |id: &str| {
            id.parse::<u32>()
                .map(CommunityId)
                .map_err(|_| format!("bad community id {id:?}"))
        };
        match s.split_once(':') {
            None if s == "overview" => Ok(Mode::Overview),
            None if s == "spherical" => Ok(Mode::Spherical),
            Some(("floating", id)) => community(id).map(Mode::Floating),
            Some(("projected", id)) => community(id).map(Mode::Projected),
            _ => Err(format!(
                "unknown mode {s:?} (overview, spherical, floating:<id>, projected:<id>)"
            )),
        }
    }
}

/// The frame for `mode`; expanded modes are run until transitions end and
/// the community's layout has settled.
pub fn layout(graph: Graph, cfg: EngineConfig, mode: Mode) -> anyhow::Result<LayoutFrame> {
    let budget = cfg.force.max_iterations * 4 + (cfg.scene.transition_duration * 30.0).ceil() as usize;
    let assets = Arc::new(SceneAssets::from_graph(graph, cfg)?);
    let mut scene = Scene::new(assets);
    let commands: Vec<Command> = match mode {
        Mode::Overview => vec![],
        Mode::Spherical => vec![Command::ExpandNetwork],
        Mode::Floating(c) => vec![Command::ExpandNetwork, Command::ExpandCommunity { community: c }],
        Mode::Projected(c) => vec![
            Command::ExpandNetwork,
            Command::ExpandCommunity { community: c },
            Command::ProjectCommunity { community: c },
        ],
    };
    for cmd in commands {
        scene.apply_command(cmd)?;
    }
    let mut frame = scene.settle(budget);
    frame.frame_id = 0;
    Ok(frame)
}

#[derive(Clone, Debug, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StageTiming {
    pub mean_ms: f64,
    pub min_ms: f64,
    pub max_ms: f64,
}

impl StageTiming {
    fn of(samples: &[f64]) -> Self {
        StageTiming {
            mean_ms: samples.iter().sum::<f64>() / samples.len() as f64,
            min_ms: samples.iter().copied().fold(f64::INFINITY, f64::min),
            max_ms: samples.iter().copied().fold(0.0, f64::max),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchReport {
    pub graph: String,
    pub nodes: usize,
    pub edges: usize,
    pub top_level_communities: usize,
    pub depth: usize,
    pub iterations: usize,
    pub samples: usize,
    pub louvain: StageTiming,
    pub overview_layout: StageTiming,
    pub spherical_layout: StageTiming,
    /// Bundle specs plus sampled polylines for every edge.
    pub bundling: StageTiming,
    /// Louvain, spherical layout and bundling back to back.
    pub pipeline: StageTiming,
    /// One frame of an unchanged spherical scene.
    pub frame: StageTiming,
    /// Expanding a community and rendering the first frame after it.
    pub expand_frame: StageTiming,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed().as_secs_f64() * 1000.0)
}

pub fn bench(name: &str, graph: Graph, cfg: EngineConfig, iterations: usize) -> anyhow::Result<BenchReport> {
    if iterations == 0 {
        bail!("--iterations must be at least 1");
    }
    let mut t: [Vec<f64>; 7] = Default::default();
    let mut last = None;
    for _ in 0..iterations {
        let (tree, ms) = timed(|| louvain(&graph, &cfg.louvain));
        t[0].push(ms);
        let h = HierarchicalGraph::new(graph.clone(), tree?);
        let (overview, ms) = timed(|| overview_layout(&h, &cfg.overview));
        overview?;
        t[1].push(ms);
        let (sph, ms) = timed(|| spherical_layout(&h, &cfg.spherical, &cfg.force));
        let sph = sph?;
        t[2].push(ms);
        let (lines, ms) = timed(|| {
            let tree = &h.tree;
            let on_sphere: Vec<bool> = (0..tree.community_count()).map(|c| c != tree.root.index()).collect();
            let anchor = anchors(
                &h,
                &sph.positions.pos,
                Some((&cfg.spherical, cfg.bundling.radial_dip, &on_sphere)),
            );
            let expanded = vec![false; tree.community_count()];
            let ctx = BundleContext {
                overview: false,
                expanded: &expanded,
                projected_active: false,
            };
            bundle_scene(&h, &sph.positions.pos, &anchor, &ctx, &cfg.bundling)
                .iter()
                .map(|s| s.polyline().len())
                .sum::<usize>()
        });
        std::hint::black_box(lines);
        t[3].push(ms);
        t[4].push(t[0].last().unwrap() + t[2].last().unwrap() + ms);

        let assets = Arc::new(SceneAssets::new(h, cfg.clone())?);
        let mut scene = Scene::new(assets.clone());
        scene.apply_command(Command::ExpandNetwork)?;
        scene.settle(1000);
        let (_, ms) = timed(|| scene.render_frame(1.0 / 30.0));
        t[5].push(ms);
        let c = assets.h.tree.top_level()[0];
        let (frame, ms) = timed(|| -> anyhow::Result<LayoutFrame> {
            scene.apply_command(Command::ExpandCommunity { community: c })?;
            Ok(scene.render_frame(1.0 / 30.0))
        });
        frame?;
        t[6].push(ms);
        last = Some(assets);
    }
    let assets = last.expect("at least one iteration");
    let h = &assets.h;
    Ok(BenchReport {
        graph: name.to_owned(),
        nodes: h.graph.node_count(),
        edges: h.graph.edge_count(),
        top_level_communities: h.tree.top_level().len(),
        depth: h.tree.depth,
        iterations,
        samples: cfg.bundling.samples,
        louvain: StageTiming::of(&t[0]),
        overview_layout: StageTiming::of(&t[1]),
        spherical_layout: StageTiming::of(&t[2]),
        bundling: StageTiming::of(&t[3]),
        pipeline: StageTiming::of(&t[4]),
        frame: StageTiming::of(&t[5]),
        expand_frame: StageTiming::of(&t[6]),
    })
}
