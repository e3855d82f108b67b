//! The per-session scene driver: applies commands, keeps the live force
//! layouts of expanded communities, animates transitions and produces frames.

use std::collections::BTreeMap;
use std::sync::Arc;

use glam::{DVec3, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::frame::{EdgePolyline, LayoutFrame, NodeInstance, Ring, RingKind};
use super::placement::{placement, Placement};
use super::state::{Command, CommunityMode, NetworkMode, SceneState, Transition};
use super::style::{bundle_context, edge_style_with, expanded_mask, node_style};
use crate::bundling::{anchors, community_path, BundleSpec, LineStyle};
use crate::color::Rgba;
use crate::community::louvain;
use crate::config::EngineConfig;
use crate::error::Result;
use crate::force::{initial_positions, separate_coincident, tick_in_place, ForceConfig, ForceGraph, LayoutPositions};
use crate::graph::{CommunityId, EdgeId, Graph, NodeId};
use crate::overview::{overview_layout, OverviewLayout};
use crate::spherical::{spherical_layout, SphericalLayout};
use crate::tree::HierarchicalGraph;

/// Everything about a graph that does not depend on the scene state.
/// Shared read-only between sessions.
#[derive(Debug)]
pub struct SceneAssets {
    pub h: HierarchicalGraph,
    pub config: EngineConfig,
    pub overview: OverviewLayout,
    pub spherical: SphericalLayout,
    /// Community walk of every edge, indexed by edge id.
    paths: Vec<Vec<CommunityId>>,
    /// Top-level ancestor of every community; the root maps to itself.
    top_of: Vec<CommunityId>,
}

impl SceneAssets {
    pub fn new(h: HierarchicalGraph, config: EngineConfig) -> Result<Self> {
        config.validate()?;
        let overview = overview_layout(&h, &config.overview)?;
        let spherical = spherical_layout(&h, &config.spherical, &config.force)?;
        let paths = h.graph.edges.iter().map(|e| community_path(&h, e.u, e.v)).collect();
        let tree = &h.tree;
        let top_of = (0..tree.community_count())
            .map(|c| {
                let c = CommunityId(c as u32);
                if c == tree.root {
                    c
                } else {
                    *tree.ancestors(c).iter().rev().nth(1).unwrap_or(&c)
                }
            })
            .collect();
        Ok(SceneAssets {
            h,
            config,
            overview,
            spherical,
            paths,
            top_of,
        })
    }

    /// Detects communities with Louvain, then computes the static layouts.
    pub fn from_graph(graph: Graph, config: EngineConfig) -> Result<Self> {
        let tree = louvain(&graph, &config.louvain)?;
        Self::new(HierarchicalGraph::new(graph, tree), config)
    }
}

#[derive(Clone, Debug)]
struct LiveLayout {
    /// Global id of every local node.
    members: Vec<NodeId>,
    graph: ForceGraph,
    cfg: ForceConfig,
    state: LayoutPositions,
}

impl LiveLayout {
    fn tick(&mut self) {
        if tick_in_place(&self.graph, &mut self.state, &self.cfg).is_err() {
            // restart from a fresh seeded spread rather than emit NaNs
            self.state = LayoutPositions::new(initial_positions(self.members.len(), &self.cfg));
        }
    }

    /// Local positions centered on their centroid, with the largest distance
    /// from it.
    fn normalized(&self) -> (Vec<DVec3>, f64) {
        let c = self.state.centroid();
        let local: Vec<DVec3> = self.state.pos.iter().map(|&p| p - c).collect();
        let extent = local.iter().map(|p| p.length()).fold(0.0, f64::max);
        (local, extent)
    }
}

#[derive(Clone, Debug)]
struct CachedEdge {
    control: Vec<DVec3>,
    beta: f64,
    line: LineStyle,
    points: Vec<Vec3>,
}

fn smoothstep(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * (3.0 - 2.0 * s)
}

#[derive(Clone, Debug)]
pub struct Scene {
    assets: Arc<SceneAssets>,
    state: SceneState,
    live: BTreeMap<CommunityId, LiveLayout>,
    /// Displayed positions of the last frame.
    positions: Vec<DVec3>,
    cache: Vec<Option<CachedEdge>>,
    frame_id: u64,
    resampled: usize,
}

impl Scene {
    pub fn new(assets: Arc<SceneAssets>) -> Self {
        let positions = assets.overview.positions.pos.clone();
        let edges = assets.h.graph.edge_count();
        Scene {
            assets,
            state: SceneState::default(),
            live: BTreeMap::new(),
            positions,
            cache: vec![None; edges],
            frame_id: 0,
            resampled: 0,
        }
    }

    pub fn assets(&self) -> &Arc<SceneAssets> {
        &self.assets
    }

    pub fn state(&self) -> &SceneState {
        &self.state
    }

    /// Node positions as shown by the last frame.
    pub fn positions(&self) -> &[DVec3] {
        &self.positions
    }

    /// Edges whose polyline was recomputed for the last frame.
    pub fn resampled_last_frame(&self) -> usize {
        self.resampled
    }

    /// Bundling strength and line style the last frame drew an edge with.
    /// `None` before the first frame and for self-loops.
    pub fn rendered_edge(&self, e: EdgeId) -> Option<(f64, LineStyle)> {
        self.cache.get(e.index())?.as_ref().map(|c| (c.beta, c.line))
    }

    /// Mean displacement of the last tick of a community's live layout.
    pub fn live_displacement(&self, c: CommunityId) -> Option<f64> {
        self.live.get(&c).map(|l| l.state.last_displacement)
    }

    /// Applies a command. On error the scene is unchanged.
    pub fn apply_command(&mut self, cmd: Command) -> Result<()> {
        let assets = Arc::clone(&self.assets);
        let tree = &assets.h.tree;
        let next = self.state.apply(cmd, tree)?;
        let mut moving: Vec<NodeId> = Vec::new();
        let floating_members =
            |s: &SceneState| -> Vec<NodeId> { s.floating().into_iter().flat_map(|c| tree.leaf_members(c)).collect() };
        match cmd {
            Command::ExpandNetwork | Command::ShowOverview => {
                self.live.clear();
                moving = (0..self.positions.len() as u32).map(NodeId).collect();
            }
            Command::ExpandCommunity { community } => {
                let layout = self.floating_layout(community, None);
                self.live.insert(community, layout);
                moving.extend(floating_members(&next));
            }
            Command::ProjectCommunity { community } => {
                if let Some(old) = self.state.projected() {
                    let previous = self.live.remove(&old).map(|l| l.state.pos);
                    let layout = self.floating_layout(old, previous);
                    self.live.insert(old, layout);
                }
                let layout = self.projected_layout(community);
                self.live.insert(community, layout);
                moving.extend(floating_members(&next));
                moving.extend(tree.leaf_members(community));
            }
            Command::ResetCommunity { community } => {
                self.live.remove(&community);
                moving.extend(tree.leaf_members(community));
                moving.extend(floating_members(&next));
            }
            Command::HighlightNode { .. } | Command::HighlightCommunity { .. } | Command::ClearHighlight => {}
        }
        self.state = next;
        if !moving.is_empty() {
            self.start_transition(moving);
        }
        Ok(())
    }

    fn layout_config(&self, c: CommunityId, dims: usize) -> ForceConfig {
        let base = &self.assets.config.force;
        ForceConfig {
            dims,
            bounds: None,
            center: DVec3::ZERO,
            seed: base.seed ^ (c.0 as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15),
            ..base.clone()
        }
    }

    /// 3D layout of `c`. Starts from `previous` local positions when given
    /// (a community leaving the floor), otherwise from its displayed shape.
    fn floating_layout(&self, c: CommunityId, previous: Option<Vec<DVec3>>) -> LiveLayout {
        let h = &self.assets.h;
        let (induced, members) = h.graph.induced(&h.tree.leaf_members(c));
        let cfg = self.layout_config(c, 3);
        let n = members.len();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let scale = (n as f64).sqrt();
        let mut pos: Vec<DVec3> = match previous {
            Some(p) => p,
            None => {
                let shown: Vec<DVec3> = members.iter().map(|m| self.positions[m.index()]).collect();
                let c0 = shown.iter().copied().sum::<DVec3>() / n.max(1) as f64;
                let extent = shown.iter().map(|p| (*p - c0).length()).fold(0.0, f64::max);
                let k = if extent > 0.0 { scale / extent } else { 0.0 };
                shown.iter().map(|&p| (p - c0) * k).collect()
            }
        };
        // the source shape is (nearly) flat; jitter gives it depth
        for p in &mut pos {
            *p += DVec3::new(
                rng.random::<f64>() - 0.5,
                rng.random::<f64>() - 0.5,
                rng.random::<f64>() - 0.5,
            ) * (0.1 * scale);
        }
        separate_coincident(&mut pos, 3, cfg.seed);
        LiveLayout {
            members,
            graph: ForceGraph::new(&induced, cfg.use_weights),
            cfg,
            state: LayoutPositions::new(pos),
        }
    }

    /// 2D layout of `c` flattened from its floating layout.
    fn projected_layout(&mut self, c: CommunityId) -> LiveLayout {
        let mut layout = match self.live.remove(&c) {
            Some(l) => l,
            None => self.floating_layout(c, None),
        };
        layout.cfg = self.layout_config(c, 2);
        let mut pos = layout.state.pos.clone();
        for p in &mut pos {
            p.z = 0.0;
        }
        separate_coincident(&mut pos, 2, layout.cfg.seed);
        layout.state = LayoutPositions::new(pos);
        layout
    }

    fn start_transition(&mut self, mut nodes: Vec<NodeId>) {
        nodes.sort_unstable();
        nodes.dedup();
        let mut taken = vec![false; self.positions.len()];
        for n in &nodes {
            taken[n.index()] = true;
        }
        for t in &mut self.state.active_transitions {
            let keep: Vec<usize> = (0..t.nodes.len()).filter(|&i| !taken[t.nodes[i].index()]).collect();
            t.nodes = keep.iter().map(|&i| t.nodes[i]).collect();
            t.from = keep.iter().map(|&i| t.from[i]).collect();
            t.to = keep.iter().map(|&i| t.to[i]).collect();
        }
        self.state.active_transitions.retain(|t| !t.nodes.is_empty());
        let from: Vec<DVec3> = nodes.iter().map(|n| self.positions[n.index()]).collect();
        self.state.active_transitions.push(Transition {
            to: from.clone(),
            nodes,
            from,
            t0: self.state.clock,
            duration: self.assets.config.scene.transition_duration,
        });
    }

    /// Where every node goes once transitions finish, given the current
    /// live layouts.
    pub fn resting_positions(&self) -> Vec<DVec3> {
        let a = &*self.assets;
        if self.state.network_mode == NetworkMode::Overview {
            return a.overview.positions.pos.clone();
        }
        let mut rest = a.spherical.positions.pos.clone();
        for (&c, layout) in &self.live {
            let place = placement(
                &self.state,
                c,
                &a.h.tree,
                &a.spherical.cells,
                &a.config.spherical,
                &a.config.scene,
            )
            .expect("live layouts belong to top-level communities");
            let (local, extent) = layout.normalized();
            let k = |radius: f64| if extent > 0.0 { radius / extent } else { 0.0 };
            for (i, &m) in layout.members.iter().enumerate() {
                rest[m.index()] = match place {
                    Placement::Floating { center, radius } => center + local[i] * k(radius),
                    Placement::Projected { center, radius } => {
                        center + DVec3::new(local[i].x, 0.0, local[i].y) * k(radius)
                    }
                    Placement::OnSphere { .. } => rest[m.index()],
                };
            }
        }
        rest
    }

    /// Advances the clock by `dt` seconds and produces the next frame. Live
    /// layouts tick once per frame while time moves.
    pub fn render_frame(&mut self, dt: f64) -> LayoutFrame {
        let dt = if dt.is_finite() { dt.max(0.0) } else { 0.0 };
        if dt > 0.0 {
            self.state.clock += dt;
            for layout in self.live.values_mut() {
                layout.tick();
            }
        }
        let rest = self.resting_positions();
        let mut positions = rest.clone();
        let clock = self.state.clock;
        for t in &mut self.state.active_transitions {
            let s = smoothstep((clock - t.t0) / t.duration);
            for (i, n) in t.nodes.iter().enumerate() {
                let target = rest[n.index()];
                t.to[i] = target;
                if clock - t.t0 < t.duration {
                    positions[n.index()] = t.from[i] + (target - t.from[i]) * s;
                }
            }
        }
        self.state.active_transitions.retain(|t| clock - t.t0 < t.duration);
        self.positions = positions;
        self.build_frame()
    }

    /// Renders at 30 Hz until transitions are done and every live layout
    /// moves less than the convergence tolerance per tick, or `max_frames`
    /// have passed. Returns the last frame.
    pub fn settle(&mut self, max_frames: usize) -> LayoutFrame {
        let tol = self.assets.config.force.convergence_tol;
        let mut frame = self.render_frame(0.0);
        for _ in 0..max_frames {
            let calm = self.live.values().all(|l| l.state.last_displacement < tol);
            if self.state.active_transitions.is_empty() && calm {
                break;
            }
            frame = self.render_frame(1.0 / 30.0);
        }
        frame
    }

    fn build_frame(&mut self) -> LayoutFrame {
        let a = Arc::clone(&self.assets);
        let h = &a.h;
        let tree = &h.tree;
        let s = &self.state;
        let cfg = &a.config;
        let expanded = s.network_mode == NetworkMode::Expanded;

        let mask = expanded_mask(h, s);
        let ctx = bundle_context(s, &mask);
        let on_sphere: Vec<bool> = a
            .top_of
            .iter()
            .map(|&top| expanded && top != tree.root && s.mode_of(top) == CommunityMode::OnSphere)
            .collect();
        let anchor = anchors(
            h,
            &self.positions,
            expanded.then_some((&cfg.spherical, cfg.bundling.radial_dip, on_sphere.as_slice())),
        );

        self.resampled = 0;
        let mut edges = Vec::with_capacity(h.graph.edge_count());
        for (i, e) in h.graph.edges.iter().enumerate() {
            if e.is_self_loop() {
                continue;
            }
            let style = edge_style_with(h, s, &cfg.bundling, &cfg.scene, e, &ctx);
            let (pu, pv) = (self.positions[e.u.index()], self.positions[e.v.index()]);
            let control: Vec<DVec3> = match style.line {
                LineStyle::Straight => vec![pu, pv],
                LineStyle::Spline => std::iter::once(pu)
                    .chain(a.paths[i].iter().map(|c| anchor[c.index()]))
                    .chain(std::iter::once(pv))
                    .collect(),
            };
            let fresh = match &self.cache[i] {
                Some(c) => c.control != control || c.beta != style.beta || c.line != style.line,
                None => true,
            };
            if fresh {
                let spec = BundleSpec {
                    edge: EdgeId(i as u32),
                    control_points: control.clone(),
                    beta: style.beta,
                    samples: cfg.bundling.samples,
                    style: style.line,
                };
                let points = spec.polyline().iter().map(|p| p.as_vec3()).collect();
                self.cache[i] = Some(CachedEdge {
                    control,
                    beta: style.beta,
                    line: style.line,
                    points,
                });
                self.resampled += 1;
            }
            edges.push(EdgePolyline {
                id: EdgeId(i as u32),
                points: self.cache[i].as_ref().expect("filled above").points.clone(),
                color: style.color,
                width: style.width as f32,
            });
        }

        let nodes: Vec<NodeInstance> = (0..self.positions.len())
            .map(|n| {
                let st = node_style(h, s, &cfg.scene, NodeId(n as u32));
                NodeInstance {
                    id: NodeId(n as u32),
                    position: self.positions[n].as_vec3(),
                    radius: st.radius as f32,
                    color: st.color,
                }
            })
            .collect();

        let mut rings = Vec::new();
        for &c in &s.highlight_communities {
            let members = tree.leaf_members(c);
            if members.is_empty() {
                continue;
            }
            let pts: Vec<DVec3> = members.iter().map(|m| self.positions[m.index()]).collect();
            let center = pts.iter().copied().sum::<DVec3>() / pts.len() as f64;
            let spread = pts.iter().map(|p| p.distance(center)).fold(0.0, f64::max);
            let margin = nodes[members[0].index()].radius as f64 * 2.0;
            rings.push(Ring {
                kind: RingKind::Community,
                id: c.0,
                center: center.as_vec3(),
                radius: (spread + margin).max(0.05) as f32,
                color: Rgba::RED,
            });
        }
        for &n in &s.highlight_nodes {
            rings.push(Ring {
                kind: RingKind::NodeHalo,
                id: n.0,
                center: nodes[n.index()].position,
                radius: nodes[n.index()].radius * 1.8,
                color: Rgba::RED,
            });
        }

        let frame = LayoutFrame {
            frame_id: self.frame_id,
            nodes,
            edges,
            rings,
        };
        self.frame_id += 1;
        frame
    }
}
