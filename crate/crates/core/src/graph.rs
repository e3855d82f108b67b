//! Graph data model.
//!
//! A [`Graph`] is an undirected, weighted simple graph (self-loops allowed)
//! with dense node ids. Inputs are normalised through [`GraphBuilder`]:
//! node keys are densified, parallel and antiparallel edges are merged by
//! summing their weights, and every edge is stored with `u <= v`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

id_type!(
    /// Leaf node of the network.
    NodeId
);
id_type!(
    /// Node of the community tree. Namespaced separately from [`NodeId`].
    CommunityId
);
id_type!(
    /// Index into [`Graph::edges`].
    EdgeId
);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub label: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub attributes: BTreeMap<String, String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub weight: f64,
    /// Set when at least one of the merged input edges was directed.
    /// Layout and community detection ignore direction.
    pub directed: bool,
}

impl Edge {
    pub fn is_self_loop(&self) -> bool {
        self.u == self.v
    }

    pub fn other(&self, n: NodeId) -> NodeId {
        if self.u == n {
            self.v
        } else {
            self.u
        }
    }
}

/// Weighted graph. Fields are public so that callers (and [`crate::tree::validate`])
/// can inspect or construct arbitrary instances; graphs produced by the
/// builder always satisfy the model invariants.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

/// What ingestion had to do to the raw input.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub input_edges: usize,
    pub merged_parallel: usize,
    pub self_loops: usize,
    pub dropped_self_loops: usize,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct IngestOptions {
    pub drop_self_loops: bool,
}

/// Incident edge seen from one endpoint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Incidence {
    pub neighbor: NodeId,
    pub edge: EdgeId,
    pub weight: f64,
}

impl Graph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, n: NodeId) -> bool {
        n.index() < self.nodes.len()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    pub fn self_loop_count(&self) -> usize {
        self.edges.iter().filter(|e| e.is_self_loop()).count()
    }

    /// Sum of incident edge weights. A self-loop contributes twice its weight
    /// so that the degrees sum to twice the total weight.
    pub fn degree(&self, n: NodeId) -> Result<f64> {
        if !self.contains(n) {
            return Err(Error::UnknownId(format!("node {n}")));
        }
        Ok(self
            .edges
            .iter()
            .map(|e| match (e.u == n, e.v == n) {
                (true, true) => 2.0 * e.weight,
                (true, false) | (false, true) => e.weight,
                _ => 0.0,
            })
            .sum())
    }

    /// All weighted degrees in one pass.
    pub fn degrees(&self) -> Vec<f64> {
        let mut deg = vec![0.0; self.nodes.len()];
        for e in &self.edges {
            deg[e.u.index()] += e.weight;
            deg[e.v.index()] += e.weight;
        }
        deg
    }

    /// Per-node incidence lists. Self-loops appear once, in their node's list.
    pub fn adjacency(&self) -> Vec<Vec<Incidence>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for (i, e) in self.edges.iter().enumerate() {
            let edge = EdgeId(i as u32);
            adj[e.u.index()].push(Incidence {
                neighbor: e.v,
                edge,
                weight: e.weight,
            });
            if !e.is_self_loop() {
                adj[e.v.index()].push(Incidence {
                    neighbor: e.u,
                    edge,
                    weight: e.weight,
                });
            }
        }
        adj
    }

    pub fn find_edge(&self, a: NodeId, b: NodeId) -> Option<EdgeId> {
        let (u, v) = if a <= b { (a, b) } else { (b, a) };
        self.edges
            .binary_search_by(|e| (e.u, e.v).cmp(&(u, v)))
            .ok()
            .map(|i| EdgeId(i as u32))
    }

    /// Induced subgraph on `members`, renumbered `0..members.len()` in the
    /// given order. Returns the subgraph and the local→global map.
    pub fn induced(&self, members: &[NodeId]) -> (Graph, Vec<NodeId>) {
        let mut local = HashMap::with_capacity(members.len());
        let mut nodes = Vec::with_capacity(members.len());
        for (i, &m) in members.iter().enumerate() {
            local.insert(m, NodeId(i as u32));
            let mut node = self.nodes[m.index()].clone();
            node.id = NodeId(i as u32);
            nodes.push(node);
        }
        let mut edges: Vec<Edge> = self
            .edges
            .iter()
            .filter_map(|e| {
                let (u, v) = (*local.get(&e.u)?, *local.get(&e.v)?);
                let (u, v) = if u <= v { (u, v) } else { (v, u) };
                Some(Edge { u, v, ..*e })
            })
            .collect();
        edges.sort_by_key(|a| (a.u, a.v));
        (Graph { nodes, edges }, members.to_vec())
    }

    /// Canonical JSON: `{"nodes":[{"id","label"}...],"edges":[{"u","v","w"}...]}`.
    pub fn to_canonical_json(&self) -> String {
        let doc = CanonicalGraph {
            nodes: self
                .nodes
                .iter()
                .map(|n| CanonicalNode {
                    id: n.id.0 as u64,
                    label: Some(n.label.clone()),
                    attrs: n.attributes.clone(),
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| CanonicalEdge {
                    u: e.u.0 as u64,
                    v: e.v.0 as u64,
                    w: Some(e.weight),
                    directed: e.directed,
                })
                .collect(),
        };
        serde_json::to_string(&doc).expect("graph serialization cannot fail")
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct CanonicalGraph {
    pub nodes: Vec<CanonicalNode>,
    pub edges: Vec<CanonicalEdge>,
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct CanonicalNode {
    pub id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub attrs: BTreeMap<String, String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct CanonicalEdge {
    pub u: u64,
    pub v: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub directed: bool,
}

/// Collects nodes and edges keyed by arbitrary strings, then densifies.
///
/// Keys that all parse as non-negative integers are numbered in ascending
/// numeric order; otherwise keys are numbered in order of first appearance.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    order: Vec<String>,
    nodes: HashMap<String, (Option<String>, BTreeMap<String, String>)>,
    edges: Vec<(String, String, f64, bool)>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, key: impl Into<String>, label: Option<String>, attributes: BTreeMap<String, String>) {
        let key = key.into();
        match self.nodes.get_mut(&key) {
            Some(entry) => {
                if label.is_some() {
                    entry.0 = label;
                }
                entry.1.extend(attributes);
            }
            None => {
                self.order.push(key.clone());
                self.nodes.insert(key, (label, attributes));
            }
        }
    }

    fn touch(&mut self, key: &str) {
        if !self.nodes.contains_key(key) {
            self.order.push(key.to_owned());
            self.nodes.insert(key.to_owned(), (None, BTreeMap::new()));
        }
    }

    pub fn add_edge(&mut self, u: impl Into<String>, v: impl Into<String>, weight: f64, directed: bool) {
        let (u, v) = (u.into(), v.into());
        self.touch(&u);
        self.touch(&v);
        self.edges.push((u, v, weight, directed));
    }

    pub fn build(self, opts: IngestOptions) -> Result<(Graph, IngestReport)> {
        if self.order.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let numeric: Option<Vec<u64>> = self.order.iter().map(|k| k.parse::<u64>().ok()).collect();
        let mut keys = self.order;
        if let Some(nums) = numeric {
            let mut paired: Vec<(u64, String)> = nums.into_iter().zip(keys).collect();
            paired.sort();
            keys = paired.into_iter().map(|(_, k)| k).collect();
        }
        let index: HashMap<&str, NodeId> = keys
            .iter()
            .enumerate()
            .map(|(i, k)| (k.as_str(), NodeId(i as u32)))
            .collect();

        let mut report = IngestReport {
            input_edges: self.edges.len(),
            ..Default::default()
        };
        let mut merged: BTreeMap<(NodeId, NodeId), (f64, bool)> = BTreeMap::new();
        for (u, v, w, directed) in &self.edges {
            let (a, b) = (index[u.as_str()], index[v.as_str()]);
            if a == b {
                report.self_loops += 1;
                if opts.drop_self_loops {
                    report.dropped_self_loops += 1;
                    continue;
                }
            }
            let key = if a <= b { (a, b) } else { (b, a) };
            match merged.get_mut(&key) {
                Some(slot) => {
                    slot.0 += w;
                    slot.1 |= directed;
                    report.merged_parallel += 1;
                }
                None => {
                    merged.insert(key, (*w, *directed));
                }
            }
        }

        let mut nodes_in = self.nodes;
        let nodes = keys
            .iter()
            .enumerate()
            .map(|(i, k)| {
                let (label, attributes) = nodes_in.remove(k).unwrap_or_default();
                Node {
                    id: NodeId(i as u32),
                    label: label.unwrap_or_else(|| k.clone()),
                    attributes,
                }
            })
            .collect();
        let edges = merged
            .into_iter()
            .map(|((u, v), (weight, directed))| Edge { u, v, weight, directed })
            .collect();
        Ok((Graph { nodes, edges }, report))
    }
}
