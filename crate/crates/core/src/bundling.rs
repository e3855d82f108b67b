//! Hierarchical edge bundling.
//!
//! An edge's control path runs from `u` through the anchors of the community
//! tree walk `u → LCA → v` to `v`; the root anchor is left out. Edges inside a
//! single leaf community only pass through that community's anchor, so they
//! bundle locally. The path is pulled towards the straight chord by the
//! bundling strength `β` and then sampled as a clamped cubic B-spline.

use glam::DVec3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CommunityId, Edge, EdgeId, NodeId};
use crate::spherical::SphericalConfig;
use crate::tree::HierarchicalGraph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum LineStyle {
    Spline,
    Straight,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BundleSpec {
    pub edge: EdgeId,
    pub control_points: Vec<DVec3>,
    pub beta: f64,
    pub samples: usize,
    pub style: LineStyle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase")]
pub struct BundlePolicy {
    pub overview_beta: f64,
    pub spherical_beta: f64,
    pub projected_main_beta: f64,
    pub expanded_intra_style: LineStyle,
    /// Radial dip of shallow anchors in the spherical layout.
    pub radial_dip: f64,
    pub samples: usize,
}

impl Default for BundlePolicy {
    fn default() -> Self {
        BundlePolicy {
            overview_beta: 0.0,
            spherical_beta: 0.7,
            projected_main_beta: 0.9,
            expanded_intra_style: LineStyle::Straight,
            radial_dip: 0.3,
            samples: 24,
        }
    }
}

impl BundlePolicy {
    pub fn validate(&self) -> Result<()> {
        let unit = |b: f64| (0.0..=1.0).contains(&b);
        if !unit(self.overview_beta) || !unit(self.spherical_beta) || !unit(self.projected_main_beta) {
            return Err(Error::InvalidConfig("bundling strengths must lie in [0, 1]".into()));
        }
        if self.samples < 2 || self.samples > u16::MAX as usize - 1 {
            return Err(Error::InvalidConfig("samples must be at least 2".into()));
        }
        Ok(())
    }
}

/// `P'_i = β P_i + (1 - β) (P_0 + i/(N-1) (P_{N-1} - P_0))`.
pub fn straighten(points: &[DVec3], beta: f64) -> Vec<DVec3> {
    let n = points.len();
    assert!(n >= 2, "a control path needs two points");
    let (a, b) = (points[0], points[n - 1]);
    points
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            if i == 0 || i == n - 1 {
                return p;
            }
            let chord = a + (b - a) * (i as f64 / (n - 1) as f64);
            p * beta + chord * (1.0 - beta)
        })
        .collect()
}

/// Uniform cubic B-spline through `points` with both endpoints repeated three
/// times, evaluated at `samples + 1` evenly spaced parameters.
pub fn sample_spline(points: &[DVec3], samples: usize) -> Vec<DVec3> {
    assert!(points.len() >= 2 && samples >= 2);
    let n = points.len();
    let mut ctrl = Vec::with_capacity(n + 4);
    ctrl.extend([points[0]; 2]);
    ctrl.extend_from_slice(points);
    ctrl.extend([points[n - 1]; 2]);
    let segments = ctrl.len() - 3;
    let mut out = Vec::with_capacity(samples + 1);
    for k in 0..=samples {
        let t = k as f64 * segments as f64 / samples as f64;
        let seg = (t.floor() as usize).min(segments - 1);
        let u = t - seg as f64;
        let (u2, u3) = (u * u, u * u * u);
        let w = [
            (1.0 - u).powi(3) / 6.0,
            (3.0 * u3 - 6.0 * u2 + 4.0) / 6.0,
            (-3.0 * u3 + 3.0 * u2 + 3.0 * u + 1.0) / 6.0,
            u3 / 6.0,
        ];
        let p = ctrl[seg] * w[0] + ctrl[seg + 1] * w[1] + ctrl[seg + 2] * w[2] + ctrl[seg + 3] * w[3];
        out.push(p);
    }
    out[0] = points[0];
    out[samples] = points[n - 1];
    out
}

/// Anchor placed along `direction` (from the eye) at radius
/// `R (1 - λ (1 - d/D))`; no dip when `D <= 1`.
pub fn spherical_adapt(direction: DVec3, depth: usize, max_depth: usize, cfg: &SphericalConfig, lambda: f64) -> DVec3 {
    let scale = if max_depth <= 1 {
        1.0
    } else {
        1.0 - lambda * (1.0 - depth as f64 / max_depth as f64)
    };
    cfg.eye + direction.normalize_or_zero() * (cfg.sphere_radius * scale)
}

/// Centroid of the leaf positions under every community, indexed by id.
pub fn community_centroids(h: &HierarchicalGraph, positions: &[DVec3]) -> Vec<DVec3> {
    let tree = &h.tree;
    let n = tree.community_count();
    let mut sum = vec![DVec3::ZERO; n];
    let mut count = vec![0usize; n];
    for (node, &c) in tree.parent_of.iter().enumerate() {
        let p = positions[node];
        let mut cur = Some(c);
        while let Some(k) = cur {
            sum[k.index()] += p;
            count[k.index()] += 1;
            cur = tree.parent[k.index()];
        }
    }
    sum.iter()
        .zip(&count)
        .map(|(&s, &k)| if k > 0 { s / k as f64 } else { DVec3::ZERO })
        .collect()
}

/// Bundle anchors: member centroids, with communities flagged in
/// `on_sphere` moved radially by [`spherical_adapt`].
pub fn anchors(
    h: &HierarchicalGraph,
    positions: &[DVec3],
    spherical: Option<(&SphericalConfig, f64, &[bool])>,
) -> Vec<DVec3> {
    let mut out = community_centroids(h, positions);
    if let Some((cfg, lambda, on_sphere)) = spherical {
        let tree = &h.tree;
        for (c, anchor) in out.iter_mut().enumerate() {
            if on_sphere[c] && c != tree.root.index() {
                let level = tree.level(CommunityId(c as u32));
                *anchor = spherical_adapt(*anchor - cfg.eye, level, tree.depth, cfg, lambda);
            }
        }
    }
    out
}

/// Community chain of the walk `u → LCA → v` with the root removed. A single
/// leaf community yields just that community.
pub fn community_path(h: &HierarchicalGraph, u: NodeId, v: NodeId) -> Vec<CommunityId> {
    let tree = &h.tree;
    let (cu, cv) = (tree.parent_of[u.index()], tree.parent_of[v.index()]);
    if cu == cv {
        return vec![cu];
    }
    let lca = tree.lowest_common_ancestor(cu, cv);
    let up: Vec<CommunityId> = tree.ancestors(cu).into_iter().take_while(|&c| c != lca).collect();
    let mut down: Vec<CommunityId> = tree.ancestors(cv).into_iter().take_while(|&c| c != lca).collect();
    down.reverse();
    let mut path = up;
    if lca != tree.root {
        path.push(lca);
    }
    path.extend(down);
    path
}

pub fn control_path(
    h: &HierarchicalGraph,
    positions: &[DVec3],
    anchors: &[DVec3],
    u: NodeId,
    v: NodeId,
) -> Result<Vec<DVec3>> {
    if h.graph.find_edge(u, v).is_none() {
        return Err(Error::UnknownEdge(u.0, v.0));
    }
    let mut out = vec![positions[u.index()]];
    out.extend(community_path(h, u, v).into_iter().map(|c| anchors[c.index()]));
    out.push(positions[v.index()]);
    Ok(out)
}

/// What the scene tells bundling about the current view.
#[derive(Clone, Copy, Debug)]
pub struct BundleContext<'a> {
    pub overview: bool,
    /// Per community id: whether that top-level community is floating or
    /// projected. Entries for other communities are ignored.
    pub expanded: &'a [bool],
    pub projected_active: bool,
}

/// Bundling strength and line style of one edge in the given view.
pub fn edge_mode(h: &HierarchicalGraph, e: &Edge, ctx: &BundleContext, policy: &BundlePolicy) -> (f64, LineStyle) {
    if ctx.overview {
        return (policy.overview_beta, LineStyle::Straight);
    }
    let tu = h.tree.top_level_of(e.u);
    let tv = h.tree.top_level_of(e.v);
    if ctx.expanded[tu.index()] && ctx.expanded[tv.index()] {
        // inside one expanded community, or between two expanded ones
        return match policy.expanded_intra_style {
            LineStyle::Straight => (0.0, LineStyle::Straight),
            LineStyle::Spline => (policy.spherical_beta, LineStyle::Spline),
        };
    }
    if ctx.projected_active {
        (policy.projected_main_beta, LineStyle::Spline)
    } else {
        (policy.spherical_beta, LineStyle::Spline)
    }
}

pub fn bundle_edge(
    h: &HierarchicalGraph,
    positions: &[DVec3],
    anchors: &[DVec3],
    id: EdgeId,
    ctx: &BundleContext,
    policy: &BundlePolicy,
) -> BundleSpec {
    let e = &h.graph.edges[id.index()];
    let (beta, style) = edge_mode(h, e, ctx, policy);
    let control_points = match style {
        LineStyle::Straight => vec![positions[e.u.index()], positions[e.v.index()]],
        LineStyle::Spline => {
            let mut path = vec![positions[e.u.index()]];
            path.extend(community_path(h, e.u, e.v).into_iter().map(|c| anchors[c.index()]));
            path.push(positions[e.v.index()]);
            path
        }
    };
    BundleSpec {
        edge: id,
        control_points,
        beta,
        samples: policy.samples,
        style,
    }
}

/// Bundle specs for every edge except self-loops.
pub fn bundle_scene(
    h: &HierarchicalGraph,
    positions: &[DVec3],
    anchors: &[DVec3],
    ctx: &BundleContext,
    policy: &BundlePolicy,
) -> Vec<BundleSpec> {
    h.graph
        .edges
        .iter()
        .enumerate()
        .filter(|(_, e)| !e.is_self_loop())
        .map(|(i, _)| bundle_edge(h, positions, anchors, EdgeId(i as u32), ctx, policy))
        .collect()
}

impl BundleSpec {
    /// Rendered polyline: straight edges are their two endpoints, bundled
    /// edges the sampled spline of the straightened control path.
    pub fn polyline(&self) -> Vec<DVec3> {
        match self.style {
            LineStyle::Straight => {
                let n = self.control_points.len();
                vec![self.control_points[0], self.control_points[n - 1]]
            }
            LineStyle::Spline => sample_spline(&straighten(&self.control_points, self.beta), self.samples),
        }
    }
}

/// Largest distance of any polyline point from the line through its ends.
pub fn max_chord_deviation(polyline: &[DVec3]) -> f64 {
    chord_distances(polyline).fold(0.0, f64::max)
}

/// Mean distance of the polyline points from the line through its ends.
pub fn mean_chord_deviation(polyline: &[DVec3]) -> f64 {
    chord_distances(polyline).sum::<f64>() / polyline.len() as f64
}

fn chord_distances(polyline: &[DVec3]) -> impl Iterator<Item = f64> + '_ {
    let a = polyline[0];
    let axis = (polyline[polyline.len() - 1] - a).normalize_or_zero();
    polyline.iter().map(move |&p| {
        let d = p - a;
        (d - axis * d.dot(axis)).length()
    })
}
