//! Spherical layout: communities tiled by a treemap in the unit square, each
//! refined by a flat force layout, then wrapped onto a sphere around the eye.
//!
//! The unit square maps equirectangularly: `x` to azimuth and `y` to
//! elevation, both centered on the forward direction.

use std::collections::BTreeMap;

use glam::{DQuat, DVec2, DVec3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::force::{layout_converged, ForceConfig, ForceGraph, InitialLayout, LayoutPositions};
use crate::graph::{CommunityId, NodeId};
use crate::tree::HierarchicalGraph;
use crate::treemap::{treemap_in, Rect};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase")]
pub struct SphericalConfig {
    pub sphere_radius: f64,
    /// Degrees.
    pub fov_horizontal: f64,
    /// Degrees.
    pub fov_vertical: f64,
    pub cell_margin: f64,
    pub forward: DVec3,
    pub eye: DVec3,
}

impl Default for SphericalConfig {
    fn default() -> Self {
        SphericalConfig {
            sphere_radius: 10.0,
            fov_horizontal: 178.0,
            fov_vertical: 178.0,
            cell_margin: 0.05,
            forward: DVec3::Z,
            eye: DVec3::new(0.0, 1.6, 0.0),
        }
    }
}

impl SphericalConfig {
    pub fn validate(&self) -> Result<()> {
        let fov_ok = |f: f64| f > 0.0 && f < 180.0;
        if !fov_ok(self.fov_horizontal) || !fov_ok(self.fov_vertical) {
            return Err(Error::InvalidConfig("field of view must be in (0, 180) degrees".into()));
        }
        if !(self.sphere_radius > 0.0) || !(0.0..0.5).contains(&self.cell_margin) {
            return Err(Error::InvalidConfig(
                "sphereRadius must be positive and cellMargin in [0, 0.5)".into(),
            ));
        }
        if !(self.forward.length() > 0.0) {
            return Err(Error::InvalidConfig("forward must be nonzero".into()));
        }
        Ok(())
    }

    fn orientation(&self) -> DQuat {
        DQuat::from_rotation_arc(DVec3::Z, self.forward.normalize())
    }
}

/// Direction from the eye for a point of the unit square.
pub fn sphere_direction(p: DVec2, cfg: &SphericalConfig) -> DVec3 {
    let az = (p.x - 0.5) * cfg.fov_horizontal.to_radians();
    let el = (p.y - 0.5) * cfg.fov_vertical.to_radians();
    let local = DVec3::new(el.cos() * az.sin(), el.sin(), el.cos() * az.cos());
    (cfg.orientation() * local).normalize()
}

pub fn sphere_map(p: DVec2, cfg: &SphericalConfig) -> DVec3 {
    cfg.eye + sphere_direction(p, cfg) * cfg.sphere_radius
}

/// Azimuth and elevation (radians) of a world position relative to the eye
/// and the configured forward direction.
pub fn angles_of(pos: DVec3, cfg: &SphericalConfig) -> (f64, f64) {
    let local = cfg.orientation().inverse() * (pos - cfg.eye).normalize();
    (local.x.atan2(local.z), local.y.clamp(-1.0, 1.0).asin())
}

/// Inverse of [`sphere_map`] for positions inside the cap.
pub fn unit_of(pos: DVec3, cfg: &SphericalConfig) -> DVec2 {
    let (az, el) = angles_of(pos, cfg);
    DVec2::new(
        az / cfg.fov_horizontal.to_radians() + 0.5,
        el / cfg.fov_vertical.to_radians() + 0.5,
    )
}

#[derive(Clone, Debug)]
pub struct SphericalLayout {
    pub positions: LayoutPositions,
    /// Unit-square coordinates of every node before wrapping.
    pub unit: Vec<DVec2>,
    /// Treemap cell of every non-root community (before margins).
    pub cells: BTreeMap<CommunityId, Rect>,
}

/// Flat layout of `members` fitted uniformly into `cell`, centered.
fn refine_cell(
    h: &HierarchicalGraph,
    members: &[NodeId],
    cell: Rect,
    fcfg: &ForceConfig,
    salt: u64,
    unit: &mut [DVec2],
) -> Result<()> {
    let (induced, map) = h.graph.induced(members);
    let cfg = ForceConfig {
        dims: 2,
        bounds: None,
        center: DVec3::ZERO,
        seed: fcfg.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15),
        ..fcfg.clone()
    };
    let fg = ForceGraph::new(&induced, cfg.use_weights);
    let laid = layout_converged(&fg, InitialLayout::Seeded, &cfg)?;
    let (lo, hi) = laid.pos.iter().fold(
        (DVec2::splat(f64::INFINITY), DVec2::splat(f64::NEG_INFINITY)),
        |(lo, hi), p| (lo.min(p.truncate()), hi.max(p.truncate())),
    );
    let span = hi - lo;
    let mut s = f64::INFINITY;
    if span.x > 0.0 {
        s = s.min(cell.w / span.x);
    }
    if span.y > 0.0 {
        s = s.min(cell.h / span.y);
    }
    if !s.is_finite() {
        s = 0.0;
    }
    let mid = (lo + hi) * 0.5;
    let (cx, cy) = cell.center();
    let c = DVec2::new(cx, cy);
    for (local, &node) in map.iter().enumerate() {
        let p = c + (laid.pos[local].truncate() - mid) * s;
        unit[node.index()] = p.clamp(DVec2::new(cell.x, cell.y), DVec2::new(cell.x + cell.w, cell.y + cell.h));
    }
    Ok(())
}

pub fn spherical_layout(h: &HierarchicalGraph, cfg: &SphericalConfig, fcfg: &ForceConfig) -> Result<SphericalLayout> {
    cfg.validate()?;
    fcfg.validate()?;
    let tree = &h.tree;
    if tree.top_level().is_empty() {
        return Err(Error::NoCommunities);
    }
    let mut cells = BTreeMap::new();
    let mut unit = vec![DVec2::splat(0.5); h.graph.node_count()];

    // nested treemaps: children tile their parent's cell after the margin
    let mut pending = vec![(tree.root, Rect::UNIT)];
    let mut leaves = Vec::new();
    while let Some((c, area)) = pending.pop() {
        let kids = &tree.children[c.index()];
        if kids.is_empty() {
            leaves.push((c, area));
            continue;
        }
        let weights: Vec<(CommunityId, f64)> = kids.iter().map(|&k| (k, tree.leaf_count(k) as f64)).collect();
        for (k, r) in treemap_in(&weights, area)? {
            cells.insert(k, r);
            pending.push((k, r.inset(cfg.cell_margin)));
        }
    }
    leaves.sort_by_key(|l| l.0);

    // leaf communities are independent; refine them on a few worker threads
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(leaves.len())
        .max(1);
    let chunk = leaves.len().div_ceil(workers);
    let results: Vec<Result<Vec<(NodeId, DVec2)>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = leaves
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    let mut local = vec![DVec2::ZERO; h.graph.node_count()];
                    let mut placed = Vec::new();
                    for &(c, area) in part {
                        let members = &tree.members[c.index()];
                        refine_cell(h, members, area, fcfg, c.0 as u64, &mut local)?;
                        placed.extend(members.iter().map(|&n| (n, local[n.index()])));
                    }
                    Ok(placed)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|t| t.join().expect("layout worker panicked"))
            .collect()
    });
    for r in results {
        for (n, p) in r? {
            unit[n.index()] = p;
        }
    }

    let pos = unit.iter().map(|&p| sphere_map(p, cfg)).collect();
    Ok(SphericalLayout {
        positions: LayoutPositions::new(pos),
        unit,
        cells,
    })
}
