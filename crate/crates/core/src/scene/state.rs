use std::collections::{BTreeMap, BTreeSet};

use glam::DVec3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CommunityId, NodeId};
use crate::tree::CommunityTree;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum NetworkMode {
    Overview,
    Expanded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum CommunityMode {
    OnSphere,
    Floating,
    Projected,
}

/// User interactions that change the scene.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum Command {
    ExpandNetwork,
    /// Back from the spherical layout to the miniature.
    ShowOverview,
    ExpandCommunity {
        community: CommunityId,
    },
    ProjectCommunity {
        community: CommunityId,
    },
    ResetCommunity {
        community: CommunityId,
    },
    HighlightNode {
        node: NodeId,
    },
    HighlightCommunity {
        community: CommunityId,
    },
    ClearHighlight,
}

/// Blend of a set of nodes from snapshot positions towards their current
/// resting positions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Transition {
    pub nodes: Vec<NodeId>,
    pub from: Vec<DVec3>,
    /// Resting positions at the last frame, for inspection.
    pub to: Vec<DVec3>,
    pub t0: f64,
    pub duration: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SceneState {
    pub network_mode: NetworkMode,
    /// Top-level communities that are not on the sphere. Absent means
    /// `OnSphere`.
    pub community_mode: BTreeMap<CommunityId, CommunityMode>,
    pub highlight_nodes: BTreeSet<NodeId>,
    pub highlight_communities: BTreeSet<CommunityId>,
    /// Seconds.
    pub clock: f64,
    pub active_transitions: Vec<Transition>,
}

impl Default for SceneState {
    fn default() -> Self {
        SceneState {
            network_mode: NetworkMode::Overview,
            community_mode: BTreeMap::new(),
            highlight_nodes: BTreeSet::new(),
            highlight_communities: BTreeSet::new(),
            clock: 0.0,
            active_transitions: Vec::new(),
        }
    }
}

impl SceneState {
    pub fn mode_of(&self, c: CommunityId) -> CommunityMode {
        self.community_mode.get(&c).copied().unwrap_or(CommunityMode::OnSphere)
    }

    pub fn projected(&self) -> Option<CommunityId> {
        self.community_mode
            .iter()
            .find(|(_, &m)| m == CommunityMode::Projected)
            .map(|(&c, _)| c)
    }

    /// Floating communities in id order.
    pub fn floating(&self) -> Vec<CommunityId> {
        self.community_mode
            .iter()
            .filter(|(_, &m)| m == CommunityMode::Floating)
            .map(|(&c, _)| c)
            .collect()
    }

    pub fn any_expanded(&self) -> bool {
        !self.community_mode.is_empty()
    }

    fn top_level(tree: &CommunityTree, c: CommunityId) -> Result<()> {
        if !tree.contains(c) {
            return Err(Error::UnknownId(format!("community {c}")));
        }
        if !tree.is_top_level(c) {
            return Err(Error::InvalidState(format!(
                "community {c} is not a top-level community"
            )));
        }
        Ok(())
    }

    fn require_expanded(&self, what: &str) -> Result<()> {
        if self.network_mode != NetworkMode::Expanded {
            return Err(Error::InvalidState(format!("{what} needs the expanded network")));
        }
        Ok(())
    }

    /// Mode and highlight changes of `cmd`. Pure: on error `self` is the
    /// unchanged state; transitions are left to the caller.
    pub fn apply(&self, cmd: Command, tree: &CommunityTree) -> Result<SceneState> {
        let mut s = self.clone();
        match cmd {
            Command::ExpandNetwork => {
                if s.network_mode == NetworkMode::Expanded {
                    return Err(Error::InvalidState("network is already expanded".into()));
                }
                s.network_mode = NetworkMode::Expanded;
                s.community_mode.clear();
            }
            Command::ShowOverview => {
                s.require_expanded("returning to the overview")?;
                s.network_mode = NetworkMode::Overview;
                s.community_mode.clear();
            }
            Command::ExpandCommunity { community: c } => {
                Self::top_level(tree, c)?;
                s.require_expanded("expanding a community")?;
                if s.mode_of(c) != CommunityMode::OnSphere {
                    return Err(Error::InvalidState(format!("community {c} is already expanded")));
                }
                s.community_mode.insert(c, CommunityMode::Floating);
            }
            Command::ProjectCommunity { community: c } => {
                Self::top_level(tree, c)?;
                s.require_expanded("projecting a community")?;
                if s.mode_of(c) != CommunityMode::Floating {
                    return Err(Error::InvalidState(format!("community {c} is not floating")));
                }
                if let Some(old) = s.projected() {
                    s.community_mode.insert(old, CommunityMode::Floating);
                }
                s.community_mode.insert(c, CommunityMode::Projected);
            }
            Command::ResetCommunity { community: c } => {
                Self::top_level(tree, c)?;
                s.require_expanded("resetting a community")?;
                if s.mode_of(c) == CommunityMode::OnSphere {
                    return Err(Error::InvalidState(format!("community {c} is already on the sphere")));
                }
                s.community_mode.remove(&c);
            }
            Command::HighlightNode { node } => {
                if node.index() >= tree.parent_of.len() {
                    return Err(Error::UnknownId(format!("node {node}")));
                }
                s.highlight_nodes.insert(node);
            }
            Command::HighlightCommunity { community: c } => {
                if !tree.contains(c) || c == tree.root {
                    return Err(Error::UnknownId(format!("community {c}")));
                }
                s.highlight_communities.insert(c);
            }
            Command::ClearHighlight => {
                s.highlight_nodes.clear();
                s.highlight_communities.clear();
            }
        }
        Ok(s)
    }

    /// Invariant violations, empty when the state is consistent.
    pub fn check(&self, tree: &CommunityTree) -> Vec<String> {
        let mut out = Vec::new();
        if self.network_mode == NetworkMode::Overview && self.any_expanded() {
            out.push("community expanded while the network is in overview".to_owned());
        }
        for (&c, &m) in &self.community_mode {
            if !tree.contains(c) || !tree.is_top_level(c) {
                out.push(format!("mode set for non-top-level community {c}"));
            }
            if m == CommunityMode::OnSphere {
                out.push(format!("explicit OnSphere entry for {c}"));
            }
        }
        let projected = self
            .community_mode
            .values()
            .filter(|&&m| m == CommunityMode::Projected)
            .count();
        if projected > 1 {
            out.push(format!("{projected} communities projected"));
        }
        for n in &self.highlight_nodes {
            if n.index() >= tree.parent_of.len() {
                out.push(format!("highlighted node {n} does not exist"));
            }
        }
        for &c in &self.highlight_communities {
            if !tree.contains(c) || c == tree.root {
                out.push(format!("highlighted community {c} does not exist"));
            }
        }
        for t in &self.active_transitions {
            if t.nodes.len() != t.from.len() || !(t.duration > 0.0) {
                out.push("malformed transition".to_owned());
            }
        }
        if !self.clock.is_finite() || self.clock < 0.0 {
            out.push("clock is not a finite nonnegative time".to_owned());
        }
        out
    }
}
