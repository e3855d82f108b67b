//! Community hierarchy over the leaf nodes of a [`Graph`].
//!
//! Community ids are assigned breadth-first from the root (`CommunityId(0)`),
//! so the children of the root, the top-level communities, come first.

use std::collections::{BTreeMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::color::{community_palette, Rgba};
use crate::error::{Error, Result};
use crate::graph::{CommunityId, Graph, NodeId};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommunityTree {
    pub root: CommunityId,
    /// Indexed by community id.
    pub children: Vec<Vec<CommunityId>>,
    /// Direct leaf members, indexed by community id. Only leaf communities
    /// have members.
    pub members: Vec<Vec<NodeId>>,
    pub parent: Vec<Option<CommunityId>>,
    /// Leaf community of every node.
    pub parent_of: Vec<CommunityId>,
    /// Number of community levels below the root.
    pub depth: usize,
}

impl CommunityTree {
    /// Builds a tree from a stack of partitions. `levels[0]` maps every node
    /// to a finest-level community index; `levels[j]` maps level-`j`
    /// community indices to level-`j+1` indices. Indices must be dense.
    pub fn from_levels(node_count: usize, levels: &[Vec<usize>]) -> Self {
        assert!(!levels.is_empty(), "at least one level required");
        assert_eq!(levels[0].len(), node_count);
        let depth = levels.len();
        let counts: Vec<usize> = levels
            .iter()
            .map(|l| l.iter().copied().max().map_or(0, |m| m + 1))
            .collect();

        let mut children = vec![Vec::new()];
        let mut parent = vec![None];
        let mut members = vec![Vec::new()];
        let root = CommunityId(0);

        // ids for the coarsest level, then walk down
        let mut ids_prev: Vec<CommunityId> = (0..counts[depth - 1]).map(|i| CommunityId(1 + i as u32)).collect();
        for &id in &ids_prev {
            children[0].push(id);
            children.push(Vec::new());
            parent.push(Some(root));
            members.push(Vec::new());
        }
        for level in (0..depth - 1).rev() {
            // communities at `level` have parents at `level + 1`
            let up = &levels[level + 1];
            let mut order: Vec<usize> = (0..counts[level]).collect();
            order.sort_by_key(|&i| (ids_prev[up[i]], i));
            let mut ids = vec![CommunityId(0); counts[level]];
            for i in order {
                let id = CommunityId(children.len() as u32);
                let p = ids_prev[up[i]];
                children[p.index()].push(id);
                children.push(Vec::new());
                parent.push(Some(p));
                members.push(Vec::new());
                ids[i] = id;
            }
            ids_prev = ids;
        }
        let mut parent_of = Vec::with_capacity(node_count);
        for (n, &c) in levels[0].iter().enumerate() {
            let id = ids_prev[c];
            members[id.index()].push(NodeId(n as u32));
            parent_of.push(id);
        }
        CommunityTree {
            root,
            children,
            members,
            parent,
            parent_of,
            depth,
        }
    }

    /// Single-level tree from a flat partition.
    pub fn flat(assign: &[usize]) -> Self {
        Self::from_levels(assign.len(), &[assign.to_vec()])
    }

    pub fn community_count(&self) -> usize {
        self.children.len()
    }

    pub fn contains(&self, c: CommunityId) -> bool {
        c.index() < self.children.len()
    }

    pub fn top_level(&self) -> &[CommunityId] {
        &self.children[self.root.index()]
    }

    pub fn is_top_level(&self, c: CommunityId) -> bool {
        self.parent.get(c.index()).copied().flatten() == Some(self.root)
    }

    pub fn is_leaf_community(&self, c: CommunityId) -> bool {
        self.children[c.index()].is_empty()
    }

    /// Distance from the root; the root is level 0.
    pub fn level(&self, c: CommunityId) -> usize {
        let mut level = 0;
        let mut cur = c;
        while let Some(p) = self.parent[cur.index()] {
            level += 1;
            cur = p;
        }
        level
    }

    pub fn communities_at_level(&self, level: usize) -> Vec<CommunityId> {
        let mut frontier = vec![self.root];
        for _ in 0..level {
            frontier = frontier
                .iter()
                .flat_map(|c| self.children[c.index()].iter().copied())
                .collect();
        }
        frontier
    }

    /// `c` and its ancestors, leaf first, root last.
    pub fn ancestors(&self, c: CommunityId) -> Vec<CommunityId> {
        let mut out = vec![c];
        let mut cur = c;
        while let Some(p) = self.parent[cur.index()] {
            out.push(p);
            cur = p;
        }
        out
    }

    pub fn top_level_of(&self, n: NodeId) -> CommunityId {
        let mut cur = self.parent_of[n.index()];
        while let Some(p) = self.parent[cur.index()] {
            if p == self.root {
                return cur;
            }
            cur = p;
        }
        cur
    }

    /// Top-level community of every node.
    pub fn top_level_assignment(&self) -> Vec<CommunityId> {
        (0..self.parent_of.len())
            .map(|n| self.top_level_of(NodeId(n as u32)))
            .collect()
    }

    /// All leaf nodes below `c`, in ascending id order.
    pub fn leaf_members(&self, c: CommunityId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![c];
        while let Some(cur) = stack.pop() {
            out.extend_from_slice(&self.members[cur.index()]);
            stack.extend(self.children[cur.index()].iter().copied());
        }
        out.sort_unstable();
        out
    }

    pub fn leaf_count(&self, c: CommunityId) -> usize {
        let mut count = 0;
        let mut stack = vec![c];
        while let Some(cur) = stack.pop() {
            count += self.members[cur.index()].len();
            stack.extend(self.children[cur.index()].iter().copied());
        }
        count
    }

    pub fn lowest_common_ancestor(&self, a: CommunityId, b: CommunityId) -> CommunityId {
        let up_a = self.ancestors(a);
        let set: HashSet<CommunityId> = up_a.iter().copied().collect();
        self.ancestors(b)
            .into_iter()
            .find(|c| set.contains(c))
            .unwrap_or(self.root)
    }

    /// Nested `{"id","children":[…],"members":[…]}` form.
    pub fn to_json(&self) -> serde_json::Value {
        fn walk(t: &CommunityTree, c: CommunityId) -> serde_json::Value {
            serde_json::json!({
                "id": c.0,
                "children": t.children[c.index()].iter().map(|&k| walk(t, k)).collect::<Vec<_>>(),
                "members": t.members[c.index()].iter().map(|n| n.0).collect::<Vec<_>>(),
            })
        }
        walk(self, self.root)
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        #[derive(Deserialize)]
        struct Nested {
            id: u32,
            #[serde(default)]
            children: Vec<Nested>,
            #[serde(default)]
            members: Vec<u32>,
        }
        let nested: Nested =
            serde_json::from_value(value.clone()).map_err(|e| Error::parse("community tree", e.to_string()))?;
        // parent, children, members
        type Entry = (Option<u32>, Vec<u32>, Vec<u32>);
        let mut flat: BTreeMap<u32, Entry> = BTreeMap::new();
        let mut stack = vec![(&nested, None)];
        while let Some((node, parent)) = stack.pop() {
            let kids = node.children.iter().map(|k| k.id).collect();
            if flat.insert(node.id, (parent, kids, node.members.clone())).is_some() {
                return Err(Error::parse("community tree", format!("duplicate id {}", node.id)));
            }
            stack.extend(node.children.iter().map(|k| (k, Some(node.id))));
        }
        let count = flat.len();
        if flat.keys().copied().ne(0..count as u32) {
            return Err(Error::parse("community tree", "ids must be dense from 0"));
        }
        let node_count = flat.values().map(|v| v.2.len()).sum();
        let mut parent_of = vec![CommunityId(u32::MAX); node_count];
        let mut tree = CommunityTree {
            root: CommunityId(nested.id),
            children: Vec::with_capacity(count),
            members: Vec::with_capacity(count),
            parent: Vec::with_capacity(count),
            parent_of: Vec::new(),
            depth: 0,
        };
        for (id, (p, kids, mems)) in flat {
            for &m in &mems {
                let slot = parent_of
                    .get_mut(m as usize)
                    .ok_or_else(|| Error::parse("community tree", format!("member {m} out of range")))?;
                *slot = CommunityId(id);
            }
            tree.parent.push(p.map(CommunityId));
            tree.children.push(kids.into_iter().map(CommunityId).collect());
            tree.members.push(mems.into_iter().map(NodeId).collect());
        }
        tree.parent_of = parent_of;
        tree.depth = tree.max_leaf_level();
        Ok(tree)
    }

    fn max_leaf_level(&self) -> usize {
        (0..self.children.len())
            .filter(|&c| !self.members[c].is_empty())
            .map(|c| self.level(CommunityId(c as u32)))
            .max()
            .unwrap_or(0)
    }
}

/// A graph together with its community hierarchy and community colors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HierarchicalGraph {
    pub graph: Graph,
    pub tree: CommunityTree,
    /// Indexed by community id.
    pub colors: Vec<Rgba>,
}

impl HierarchicalGraph {
    pub fn new(graph: Graph, tree: CommunityTree) -> Self {
        let colors = community_palette(&tree);
        HierarchicalGraph { graph, tree, colors }
    }

    pub fn color_of(&self, c: CommunityId) -> Rgba {
        self.colors[c.index()]
    }

    pub fn node_color(&self, n: NodeId) -> Rgba {
        self.colors[self.tree.parent_of[n.index()].index()]
    }

    /// Number of edges with exactly one endpoint inside the subtree of `c`.
    pub fn community_degree(&self, c: CommunityId) -> Result<usize> {
        if !self.tree.contains(c) {
            return Err(Error::UnknownId(format!("community {c}")));
        }
        let mut inside = vec![false; self.graph.node_count()];
        for n in self.tree.leaf_members(c) {
            inside[n.index()] = true;
        }
        Ok(self
            .graph
            .edges
            .iter()
            .filter(|e| inside[e.u.index()] != inside[e.v.index()])
            .count())
    }
}

/// Checks every model invariant. Returns one message per violation; an
/// empty list means the hierarchy is well formed.
pub fn validate(h: &HierarchicalGraph) -> Vec<String> {
    let mut out = Vec::new();
    let g = &h.graph;
    let t = &h.tree;
    let n = g.node_count();

    if n == 0 {
        out.push("empty graph".to_owned());
    }
    for (i, node) in g.nodes.iter().enumerate() {
        if node.id.index() != i {
            out.push(format!("node id {} at index {i}", node.id));
        }
    }
    let mut seen_pairs = HashSet::new();
    for e in &g.edges {
        if e.u.index() >= n || e.v.index() >= n {
            out.push(format!("edge references missing node ({},{})", e.u, e.v));
        }
        if !(e.weight > 0.0) || !e.weight.is_finite() {
            out.push(format!("nonpositive weight ({},{})", e.u, e.v));
        }
        let key = if e.u <= e.v { (e.u, e.v) } else { (e.v, e.u) };
        if !seen_pairs.insert(key) {
            out.push(format!("duplicate edge ({},{})", key.0, key.1));
        }
    }

    let cc = t.children.len();
    if t.members.len() != cc || t.parent.len() != cc {
        out.push("community tables have inconsistent lengths".to_owned());
        return out;
    }
    if t.root.index() >= cc {
        out.push(format!("root {} out of range", t.root));
        return out;
    }
    if t.parent[t.root.index()].is_some() {
        out.push(format!("root {} has a parent", t.root));
    }

    // connectivity and acyclicity from the root
    let mut visited = vec![false; cc];
    let mut queue = VecDeque::from([(t.root, 0usize)]);
    let mut max_level = 0;
    visited[t.root.index()] = true;
    while let Some((c, level)) = queue.pop_front() {
        if !t.members[c.index()].is_empty() {
            max_level = max_level.max(level);
        }
        for &k in &t.children[c.index()] {
            if k.index() >= cc {
                out.push(format!("community {c} has missing child {k}"));
                continue;
            }
            if visited[k.index()] {
                out.push(format!("cycle or shared child at community {k}"));
                continue;
            }
            if t.parent[k.index()] != Some(c) {
                out.push(format!("parent mismatch for community {k}"));
            }
            visited[k.index()] = true;
            queue.push_back((k, level + 1));
        }
    }
    for (c, v) in visited.iter().enumerate() {
        if !v {
            out.push(format!("unreachable community {c}"));
        }
    }

    let mut owner: Vec<Vec<CommunityId>> = vec![Vec::new(); n];
    for (c, mems) in t.members.iter().enumerate() {
        if !mems.is_empty() && !t.children[c].is_empty() {
            out.push(format!("internal community {c} has direct members"));
        }
        for m in mems {
            match owner.get_mut(m.index()) {
                Some(o) => o.push(CommunityId(c as u32)),
                None => out.push(format!("community {c} references missing node {m}")),
            }
        }
    }
    for (node, o) in owner.iter().enumerate() {
        match o.as_slice() {
            [] => out.push(format!("uncovered node {node}")),
            [c] => {
                if t.parent_of.get(node) != Some(c) {
                    out.push(format!("parentOf mismatch for node {node}"));
                }
            }
            _ => out.push(format!("node {node} in multiple communities")),
        }
    }
    if t.parent_of.len() != n {
        out.push(format!("parentOf covers {} nodes, graph has {n}", t.parent_of.len()));
    }

    if t.depth < 1 {
        out.push("depth below 1".to_owned());
    } else if out.is_empty() && t.depth != max_level {
        out.push(format!(
            "depth {} but deepest leaf community at level {max_level}",
            t.depth
        ));
    }

    if h.colors.len() != cc {
        out.push(format!("{} colors for {cc} communities", h.colors.len()));
    } else {
        let top = &t.children[t.root.index()];
        for (i, a) in top.iter().enumerate() {
            for b in &top[i + 1..] {
                if a.index() < cc && b.index() < cc && h.colors[a.index()] == h.colors[b.index()] {
                    out.push(format!("duplicate color for communities {a} and {b}"));
                }
            }
        }
    }
    out
}
