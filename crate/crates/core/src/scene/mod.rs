//! The multi-layout scene: which view every community is in, where it sits,
//! how entities are styled, and the frames that result.

mod engine;
mod frame;
mod placement;
mod state;
mod style;

pub use engine::{Scene, SceneAssets};
pub use frame::{EdgePolyline, LayoutFrame, NodeInstance, Ring, RingKind};
pub use placement::{floating_slots, placement, projected_disc, Placement};
pub use state::{Command, CommunityMode, NetworkMode, SceneState, Transition};
pub use style::{edge_style, node_style, EdgeStyle, EdgeTier, NodeStyle};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase")]
pub struct SceneConfig {
    /// Seconds.
    pub transition_duration: f64,
    /// Distance of floating communities from the eye.
    pub floating_distance: f64,
    /// Largest radius of a floating community's sphere.
    pub floating_radius: f64,
    /// Floating communities spread over `±floatingArcDegrees` around forward.
    pub floating_arc_degrees: f64,
    pub projected_radius: f64,
    pub floor_height: f64,
    /// Height of projected nodes above the floor.
    pub floor_offset: f64,
    pub node_radius_overview: f64,
    pub node_radius_sphere: f64,
    pub node_radius_floating: f64,
    pub node_radius_projected: f64,
    pub edge_width: f64,
    pub emphasized_edge_width: f64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig {
            transition_duration: 1.5,
            floating_distance: 1.6,
            floating_radius: 0.8,
            floating_arc_degrees: 40.0,
            projected_radius: 3.0,
            floor_height: 0.0,
            floor_offset: 0.02,
            node_radius_overview: 0.004,
            node_radius_sphere: 0.06,
            node_radius_floating: 0.02,
            node_radius_projected: 0.035,
            edge_width: 0.01,
            emphasized_edge_width: 0.02,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.transition_duration,
            self.floating_distance,
            self.floating_radius,
            self.projected_radius,
            self.node_radius_overview,
            self.node_radius_sphere,
            self.node_radius_floating,
            self.node_radius_projected,
            self.edge_width,
            self.emphasized_edge_width,
        ];
        if positive.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::InvalidConfig(
                "scene sizes and durations must be positive".into(),
            ));
        }
        if !(0.0..90.0).contains(&self.floating_arc_degrees) {
            return Err(Error::InvalidConfig("floatingArcDegrees must be in [0, 90)".into()));
        }
        Ok(())
    }
}
