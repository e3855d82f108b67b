use std::collections::BTreeMap;

use glam::{DQuat, DVec3};
use serde::{Deserialize, Serialize};

use super::state::{CommunityMode, SceneState};
use super::SceneConfig;
use crate::error::{Error, Result};
use crate::graph::CommunityId;
use crate::spherical::SphericalConfig;
use crate::tree::CommunityTree;
use crate::treemap::Rect;

/// Where a top-level community lives in the current scene.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Placement {
    /// Its treemap cell, wrapped onto the sphere.
    OnSphere { cell: Rect },
    /// A sphere in front of the viewer.
    Floating { center: DVec3, radius: f64 },
    /// A horizontal disc on the floor.
    Projected { center: DVec3, radius: f64 },
}

fn horizontal_forward(sphere: &SphericalConfig) -> DVec3 {
    let f = DVec3::new(sphere.forward.x, 0.0, sphere.forward.z);
    if f.length() > 1e-9 {
        f.normalize()
    } else {
        DVec3::Z
    }
}

/// Anchor spheres for `count` floating communities: an arc at eye height,
/// evenly spread over `±floatingArcDegrees`, radii shrunk when neighbours
/// would otherwise touch.
pub fn floating_slots(count: usize, sphere: &SphericalConfig, scene: &SceneConfig) -> Vec<(DVec3, f64)> {
    if count == 0 {
        return Vec::new();
    }
    let forward = horizontal_forward(sphere);
    let arc = scene.floating_arc_degrees.to_radians();
    let d = scene.floating_distance;
    let (angles, radius) = if count == 1 {
        (vec![0.0], scene.floating_radius)
    } else {
        let step = 2.0 * arc / (count - 1) as f64;
        let half_chord = d * (0.5 * step).sin();
        let angles = (0..count).map(|i| -arc + step * i as f64).collect();
        (angles, scene.floating_radius.min(0.95 * half_chord))
    };
    angles
        .into_iter()
        .map(|a: f64| (sphere.eye + DQuat::from_rotation_y(a) * forward * d, radius))
        .collect()
}

/// Disc on the floor beneath the eye.
pub fn projected_disc(sphere: &SphericalConfig, scene: &SceneConfig) -> (DVec3, f64) {
    (
        DVec3::new(sphere.eye.x, scene.floor_height + scene.floor_offset, sphere.eye.z),
        scene.projected_radius,
    )
}

pub fn placement(
    state: &SceneState,
    c: CommunityId,
    tree: &CommunityTree,
    cells: &BTreeMap<CommunityId, Rect>,
    sphere: &SphericalConfig,
    scene: &SceneConfig,
) -> Result<Placement> {
    if !tree.contains(c) || !tree.is_top_level(c) {
        return Err(Error::UnknownId(format!("top-level community {c}")));
    }
    Ok(match state.mode_of(c) {
        CommunityMode::OnSphere => Placement::OnSphere { cell: cells[&c] },
        CommunityMode::Floating => {
            let floating = state.floating();
            let slot = floating
                .iter()
                .position(|&f| f == c)
                .expect("floating community listed");
            let (center, radius) = floating_slots(floating.len(), sphere, scene)[slot];
            Placement::Floating { center, radius }
        }
        CommunityMode::Projected => {
            let (center, radius) = projected_disc(sphere, scene);
            Placement::Projected { center, radius }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_slot_straight_ahead() {
        let sphere = SphericalConfig::default();
        let slots = floating_slots(1, &sphere, &SceneConfig::default());
        assert!((slots[0].0 - DVec3::new(0.0, 1.6, 1.6)).length() < 1e-12);
        assert_eq!(slots[0].1, 0.8);
    }

    #[test]
    fn two_slots_eighty_degrees_apart_without_touching() {
        let sphere = SphericalConfig::default();
        let slots = floating_slots(2, &sphere, &SceneConfig::default());
        let a = (slots[0].0 - sphere.eye).normalize();
        let b = (slots[1].0 - sphere.eye).normalize();
        assert!((a.angle_between(b).to_degrees() - 80.0).abs() < 1e-9);
        assert!(slots[0].0.distance(slots[1].0) > slots[0].1 + slots[1].1);
        assert!(slots.iter().all(|s| (s.0.y - 1.6).abs() < 1e-12));
    }

    #[test]
    fn crowded_arc_shrinks_spheres() {
        let sphere = SphericalConfig::default();
        let slots = floating_slots(9, &sphere, &SceneConfig::default());
        for w in slots.windows(2) {
            assert!(w[0].0.distance(w[1].0) > w[0].1 + w[1].1);
        }
    }

    #[test]
    fn disc_on_the_floor() {
        let (c, r) = projected_disc(&SphericalConfig::default(), &SceneConfig::default());
        assert_eq!(c, DVec3::new(0.0, 0.02, 0.0));
        assert_eq!(r, 3.0);
    }
}
