//! One renderable snapshot of the scene, in single precision.

use glam::Vec3;
use serde::{Deserialize, Serialize};

use crate::color::Rgba;
use crate::graph::{EdgeId, NodeId};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NodeInstance {
    pub id: NodeId,
    pub position: Vec3,
    pub radius: f32,
    pub color: Rgba,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EdgePolyline {
    pub id: EdgeId,
    pub points: Vec<Vec3>,
    pub color: Rgba,
    pub width: f32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
#[repr(u8)]
pub enum RingKind {
    /// Circle around a highlighted community; `id` is a community id.
    Community = 0,
    /// Halo around a highlighted node; `id` is a node id.
    NodeHalo = 1,
}

impl RingKind {
    pub fn from_u8(b: u8) -> Option<RingKind> {
        match b {
            0 => Some(RingKind::Community),
            1 => Some(RingKind::NodeHalo),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Ring {
    pub kind: RingKind,
    pub id: u32,
    pub center: Vec3,
    pub radius: f32,
    pub color: Rgba,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LayoutFrame {
    pub frame_id: u64,
    pub nodes: Vec<NodeInstance>,
    pub edges: Vec<EdgePolyline>,
    pub rings: Vec<Ring>,
}

impl LayoutFrame {
    /// Same geometry and styles, ignoring the frame id.
    pub fn same_content(&self, other: &LayoutFrame) -> bool {
        self.nodes == other.nodes && self.edges == other.edges && self.rings == other.rings
    }

    /// Canonical JSON export: fields in declaration order, no whitespace.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("frames always serialize")
    }

    /// Id-resolution and finiteness violations against a graph with the
    /// given sizes. Empty when the frame is valid.
    pub fn validate(&self, node_count: usize, edge_count: usize, community_count: usize) -> Vec<String> {
        let mut out = Vec::new();
        for n in &self.nodes {
            if n.id.index() >= node_count {
                out.push(format!("node {} does not exist", n.id));
            }
            if !n.position.is_finite() || !n.radius.is_finite() || n.radius < 0.0 {
                out.push(format!("node {} has a non-finite position or radius", n.id));
            }
        }
        for e in &self.edges {
            if e.id.index() >= edge_count {
                out.push(format!("edge {} does not exist", e.id));
            }
            if e.points.len() < 2 {
                out.push(format!("edge {} has fewer than two points", e.id));
            }
            if e.points.len() > u16::MAX as usize {
                out.push(format!("edge {} has too many points", e.id));
            }
            if e.points.iter().any(|p| !p.is_finite()) || !e.width.is_finite() {
                out.push(format!("edge {} has a non-finite point or width", e.id));
            }
        }
        for r in &self.rings {
            let limit = match r.kind {
                RingKind::Community => community_count,
                RingKind::NodeHalo => node_count,
            };
            if r.id as usize >= limit {
                out.push(format!("{:?} ring {} does not resolve", r.kind, r.id));
            }
            if !r.center.is_finite() || !r.radius.is_finite() {
                out.push(format!("{:?} ring {} is not finite", r.kind, r.id));
            }
        }
        out
    }
}
