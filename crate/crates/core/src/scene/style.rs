//! Styling as a pure function of the scene state.
//!
//! Edge tiers, strongest first: highlight (an endpoint is a highlighted node),
//! expanded-intra (both endpoints in one expanded community), emphasized (the
//! edge touches an expanded community), normal (nothing expanded) and
//! subdued (something else is expanded). Edges leaving a projected community
//! are subdued as well, so the floor layout stands alone.

use serde::{Deserialize, Serialize};

use super::state::{CommunityMode, NetworkMode, SceneState};
use super::SceneConfig;
use crate::bundling::{edge_mode, BundleContext, BundlePolicy, LineStyle};
use crate::color::Rgba;
use crate::graph::{Edge, NodeId};
use crate::tree::HierarchicalGraph;

pub const SUBDUED_OPACITY: f64 = 0.05;
pub const NORMAL_OPACITY: f64 = 0.3;
pub const EMPHASIZED_OPACITY: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum EdgeTier {
    Highlight,
    ExpandedIntra,
    Emphasized,
    Normal,
    Subdued,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EdgeStyle {
    pub tier: EdgeTier,
    /// Alpha channel carries the opacity.
    pub color: Rgba,
    pub opacity: f64,
    pub line: LineStyle,
    pub beta: f64,
    pub width: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NodeStyle {
    pub color: Rgba,
    pub radius: f64,
    pub halo: bool,
}

/// Per top-level community id: is it floating or projected.
pub(crate) fn expanded_mask(h: &HierarchicalGraph, s: &SceneState) -> Vec<bool> {
    let mut mask = vec![false; h.tree.community_count()];
    for &c in s.community_mode.keys() {
        mask[c.index()] = true;
    }
    mask
}

pub(crate) fn bundle_context<'a>(s: &SceneState, mask: &'a [bool]) -> BundleContext<'a> {
    BundleContext {
        overview: s.network_mode == NetworkMode::Overview,
        expanded: mask,
        projected_active: s.projected().is_some(),
    }
}

pub fn edge_style(
    h: &HierarchicalGraph,
    s: &SceneState,
    policy: &BundlePolicy,
    cfg: &SceneConfig,
    e: &Edge,
) -> EdgeStyle {
    let mask = expanded_mask(h, s);
    edge_style_with(h, s, policy, cfg, e, &bundle_context(s, &mask))
}

pub(crate) fn edge_style_with(
    h: &HierarchicalGraph,
    s: &SceneState,
    policy: &BundlePolicy,
    cfg: &SceneConfig,
    e: &Edge,
    ctx: &BundleContext,
) -> EdgeStyle {
    let (beta, line) = edge_mode(h, e, ctx, policy);
    let tu = h.tree.top_level_of(e.u);
    let tv = h.tree.top_level_of(e.v);
    let (mu, mv) = (s.mode_of(tu), s.mode_of(tv));
    let expanded_u = mu != CommunityMode::OnSphere;
    let expanded_v = mv != CommunityMode::OnSphere;
    let base = h.node_color(e.u).mix(h.node_color(e.v));

    let (tier, color, opacity) = if s.highlight_nodes.contains(&e.u) || s.highlight_nodes.contains(&e.v) {
        (EdgeTier::Highlight, Rgba::RED, 1.0)
    } else if tu == tv && expanded_u {
        (EdgeTier::ExpandedIntra, Rgba::WHITE, 1.0)
    } else if (expanded_u || expanded_v) && mu != CommunityMode::Projected && mv != CommunityMode::Projected {
        let color = match (expanded_u, expanded_v) {
            (true, true) => h.color_of(tu).mix(h.color_of(tv)),
            (true, false) => h.color_of(tu),
            _ => h.color_of(tv),
        };
        (EdgeTier::Emphasized, color, EMPHASIZED_OPACITY)
    } else if s.any_expanded() {
        (EdgeTier::Subdued, base, SUBDUED_OPACITY)
    } else {
        (EdgeTier::Normal, base, NORMAL_OPACITY)
    };
    let width = match tier {
        EdgeTier::Highlight | EdgeTier::ExpandedIntra | EdgeTier::Emphasized => cfg.emphasized_edge_width,
        _ => cfg.edge_width,
    };
    EdgeStyle {
        tier,
        color: color.with_opacity(opacity),
        opacity,
        line,
        beta,
        width,
    }
}

pub fn node_style(h: &HierarchicalGraph, s: &SceneState, cfg: &SceneConfig, n: NodeId) -> NodeStyle {
    let radius = if s.network_mode == NetworkMode::Overview {
        cfg.node_radius_overview
    } else {
        match s.mode_of(h.tree.top_level_of(n)) {
            CommunityMode::OnSphere => cfg.node_radius_sphere,
            CommunityMode::Floating => cfg.node_radius_floating,
            CommunityMode::Projected => cfg.node_radius_projected,
        }
    };
    let halo = s.highlight_nodes.contains(&n);
    NodeStyle {
        color: if halo { Rgba::RED } else { h.node_color(n) },
        radius,
        halo,
    }
}
