//! H3-style overview of the community hierarchy.
//!
//! Every tree node (community or leaf) gets a sphere. Radii accumulate bottom
//! up, `r = k · sqrt(Σ r_child²)`, and children are packed greedily along a
//! spiral on the hemisphere of their parent that faces away from the
//! grandparent. The root uses its whole sphere. Distances are Euclidean; the
//! hyperbolic metric of the original method is not modelled.
//!
//! Each sibling group is scaled by a common factor so that every child sphere
//! stays inside the parent sphere inflated by the packing constant, which
//! means a child radius of at most `(k - 1)` times the parent radius.

use glam::{DQuat, DVec3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::force::LayoutPositions;
use crate::graph::{CommunityId, NodeId};
use crate::tree::{CommunityTree, HierarchicalGraph};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase")]
pub struct OverviewConfig {
    pub miniature_radius: f64,
    pub center: DVec3,
    pub leaf_radius: f64,
    pub packing_constant: f64,
}

impl Default for OverviewConfig {
    fn default() -> Self {
        OverviewConfig {
            miniature_radius: 0.35,
            center: DVec3::new(0.0, 1.4, 1.0),
            leaf_radius: 1.0,
            packing_constant: 1.15,
        }
    }
}

impl OverviewConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.miniature_radius > 0.0) || !(self.leaf_radius > 0.0) || !(self.packing_constant > 1.0) {
            return Err(Error::InvalidConfig(
                "overview needs miniatureRadius > 0, leafRadius > 0 and packingConstant > 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Placed {
    pub center: DVec3,
    pub sphere_radius: f64,
    /// Unit vector from this sphere's center towards its parent's center.
    /// The root points down (-Y).
    pub orientation: DVec3,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HemispherePlacement {
    /// Indexed by community id.
    pub communities: Vec<Placed>,
    /// Indexed by node id.
    pub nodes: Vec<Placed>,
}

#[derive(Clone, Debug)]
pub struct OverviewLayout {
    pub positions: LayoutPositions,
    pub placement: HemispherePlacement,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Item {
    Community(CommunityId),
    Node(NodeId),
}

fn items_of(tree: &CommunityTree, c: CommunityId) -> Vec<Item> {
    let mut items: Vec<Item> = tree.children[c.index()].iter().map(|&k| Item::Community(k)).collect();
    items.extend(tree.members[c.index()].iter().map(|&n| Item::Node(n)));
    items
}

struct Sizes {
    community: Vec<f64>,
    leaves: Vec<usize>,
}

impl Sizes {
    fn radius(&self, item: Item, leaf_radius: f64) -> f64 {
        match item {
            Item::Community(c) => self.community[c.index()],
            Item::Node(_) => leaf_radius,
        }
    }

    fn leaves(&self, item: Item) -> usize {
        match item {
            Item::Community(c) => self.leaves[c.index()],
            Item::Node(_) => 1,
        }
    }
}

/// Siblings sorted by descending subtree size, ties by id.
fn packing_order(items: &mut [Item], sizes: &Sizes) {
    items.sort_by(|&a, &b| sizes.leaves(b).cmp(&sizes.leaves(a)).then(a.cmp(&b)));
}

/// Bottom-up natural radii. Within a sibling group radii are made monotone in
/// subtree size (a running maximum in ascending size order), so a larger
/// subtree never gets a smaller sphere than a smaller sibling.
fn natural_sizes(tree: &CommunityTree, cfg: &OverviewConfig) -> Sizes {
    let n = tree.community_count();
    let mut sizes = Sizes {
        community: vec![0.0; n],
        leaves: vec![0; n],
    };
    // breadth-first ids: children always have larger ids than their parent
    for c in (0..n).rev() {
        let id = CommunityId(c as u32);
        let mut items = items_of(tree, id);
        sizes.leaves[c] = items.iter().map(|&i| sizes.leaves(i)).sum();
        packing_order(&mut items, &sizes);
        let mut running = 0.0f64;
        for &item in items.iter().rev() {
            running = running.max(sizes.radius(item, cfg.leaf_radius));
            if let Item::Community(k) = item {
                sizes.community[k.index()] = running;
            }
        }
        let sum_sq: f64 = items.iter().map(|&i| sizes.radius(i, cfg.leaf_radius).powi(2)).sum();
        sizes.community[c] = if items.is_empty() {
            cfg.leaf_radius
        } else {
            cfg.packing_constant * sum_sq.sqrt()
        };
    }
    sizes
}

/// Spiral packing of spheres with radii `radii` (already scaled) centered on
/// a sphere of radius `big`, in a frame whose pole is +Z, restricted to polar
/// angles up to `max_polar`. Returns unit directions, or `None` if they do
/// not all fit.
fn spiral_pack(radii: &[f64], big: f64, max_polar: f64) -> Option<Vec<DVec3>> {
    const MAX_CANDIDATES: usize = 400_000;
    let min_r = radii.iter().copied().fold(f64::INFINITY, f64::min);
    let alpha = 2.0 * (min_r / (2.0 * big)).min(1.0).asin();
    if !(alpha > 0.0) {
        return None;
    }
    // turns spaced one small diameter apart, steps of half a small radius
    let b = alpha / std::f64::consts::TAU;
    let mut candidates = vec![DVec3::Z];
    let mut phi = 0.0f64;
    loop {
        let theta = b * phi;
        let step = 0.5 * alpha / theta.sin().max(alpha);
        phi += step;
        let theta = b * phi;
        if theta > max_polar || candidates.len() >= MAX_CANDIDATES {
            break;
        }
        let (st, ct) = theta.sin_cos();
        candidates.push(DVec3::new(st * phi.cos(), st * phi.sin(), ct));
    }

    let mut placed: Vec<(DVec3, f64)> = Vec::with_capacity(radii.len());
    let mut blocked = vec![false; candidates.len()];
    let mut first_free = 0;
    for &r in radii {
        let mut found = None;
        for (k, &cand) in candidates.iter().enumerate().skip(first_free) {
            if blocked[k] {
                continue;
            }
            let p = cand * big;
            let clash = placed.iter().any(|&(q, rq)| p.distance(q) < r + rq);
            if !clash {
                found = Some(k);
                break;
            }
        }
        let k = found?;
        let p = candidates[k] * big;
        placed.push((p, r));
        for (j, &cand) in candidates.iter().enumerate().skip(first_free) {
            if !blocked[j] && (cand * big).distance(p) < r {
                blocked[j] = true;
            }
        }
        while first_free < blocked.len() && blocked[first_free] {
            first_free += 1;
        }
    }
    Some(placed.into_iter().map(|(p, _)| p / big).collect())
}

/// Rotation that carries the centroid of `dirs` onto +Z, or identity when the
/// centroid is (numerically) at the origin.
fn recenter(dirs: &[DVec3]) -> DQuat {
    let c = dirs.iter().copied().sum::<DVec3>();
    if c.length() < 1e-9 * dirs.len() as f64 {
        return DQuat::IDENTITY;
    }
    DQuat::from_rotation_arc(c.normalize(), DVec3::Z)
}

pub fn overview_layout(h: &HierarchicalGraph, cfg: &OverviewConfig) -> Result<OverviewLayout> {
    cfg.validate()?;
    let tree = &h.tree;
    if tree.parent_of.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let sizes = natural_sizes(tree, cfg);
    let root_radius = sizes.community[tree.root.index()];
    let unset = Placed {
        center: DVec3::ZERO,
        sphere_radius: 0.0,
        orientation: DVec3::ZERO,
    };
    let mut communities = vec![unset; tree.community_count()];
    let mut nodes = vec![unset; tree.parent_of.len()];
    communities[tree.root.index()] = Placed {
        center: DVec3::ZERO,
        sphere_radius: root_radius,
        orientation: DVec3::NEG_Y,
    };

    let mut stack = vec![(tree.root, DVec3::Y, std::f64::consts::PI)];
    while let Some((c, pole, max_polar)) = stack.pop() {
        let parent = communities[c.index()];
        let mut items = items_of(tree, c);
        if items.is_empty() {
            continue;
        }
        packing_order(&mut items, &sizes);
        let natural: Vec<f64> = items.iter().map(|&i| sizes.radius(i, cfg.leaf_radius)).collect();
        let big = parent.sphere_radius;
        let own_natural = sizes.community[c.index()];
        let max_natural = natural.iter().copied().fold(0.0, f64::max);
        let mut scale = (big / own_natural).min((cfg.packing_constant - 1.0) * big / max_natural);
        let dirs = loop {
            let radii: Vec<f64> = natural.iter().map(|r| r * scale).collect();
            if let Some(d) = spiral_pack(&radii, big, max_polar) {
                break d;
            }
            scale *= 0.85;
        };
        let to_world = DQuat::from_rotation_arc(DVec3::Z, pole) * recenter(&dirs);
        for ((&item, &dir), &r) in items.iter().zip(&dirs).zip(&natural) {
            let dir = (to_world * dir).normalize();
            let placed = Placed {
                center: parent.center + dir * big,
                sphere_radius: r * scale,
                orientation: -dir,
            };
            match item {
                Item::Community(k) => {
                    communities[k.index()] = placed;
                    stack.push((k, dir, std::f64::consts::FRAC_PI_2));
                }
                Item::Node(n) => nodes[n.index()] = placed,
            }
        }
    }

    // leaf centroid to cfg.center, farthest leaf at miniatureRadius
    let centroid = nodes.iter().map(|p| p.center).sum::<DVec3>() / nodes.len() as f64;
    let spread = nodes.iter().map(|p| p.center.distance(centroid)).fold(0.0, f64::max);
    let s = if spread > 0.0 {
        cfg.miniature_radius / spread
    } else {
        1.0
    };
    let fit = |p: &mut Placed| {
        p.center = cfg.center + (p.center - centroid) * s;
        p.sphere_radius *= s;
    };
    communities.iter_mut().for_each(fit);
    nodes.iter_mut().for_each(fit);

    let pos = nodes.iter().map(|p| p.center).collect();
    Ok(OverviewLayout {
        positions: LayoutPositions::new(pos),
        placement: HemispherePlacement { communities, nodes },
    })
}

/// Number of overlapping sibling pairs (spheres closer than the sum of their
/// radii, minus `eps`).
pub fn sibling_overlaps(tree: &CommunityTree, placement: &HemispherePlacement, eps: f64) -> usize {
    let mut count = 0;
    for c in 0..tree.community_count() {
        let spheres: Vec<Placed> = items_of(tree, CommunityId(c as u32))
            .into_iter()
            .map(|i| match i {
                Item::Community(k) => placement.communities[k.index()],
                Item::Node(n) => placement.nodes[n.index()],
            })
            .collect();
        for i in 0..spheres.len() {
            for j in i + 1..spheres.len() {
                let d = spheres[i].center.distance(spheres[j].center);
                if d + eps < spheres[i].sphere_radius + spheres[j].sphere_radius {
                    count += 1;
                }
            }
        }
    }
    count
}
