//! Louvain community detection and modularity.
//!
//! Modularity uses `Q = Σ_c [e_c/m − γ (d_c / 2m)²]` where `e_c` is the total
//! weight of edges with both endpoints in `c` (a self-loop counts once),
//! `d_c` the summed weighted degree of `c` (a self-loop counts twice) and `m`
//! the total edge weight.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::tree::CommunityTree;

/// Gains at or below this are treated as no improvement.
const GAIN_EPS: f64 = 1e-12;
const MAX_SWEEPS: usize = 1000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub assign: Vec<usize>,
    pub community_count: usize,
}

impl Partition {
    /// Renumbers arbitrary labels densely in order of first appearance.
    pub fn from_labels<T: Eq + std::hash::Hash + Copy>(labels: &[T]) -> Self {
        let mut map = HashMap::new();
        let assign = labels
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Partition {
            assign,
            community_count: map.len(),
        }
    }

    pub fn singletons(n: usize) -> Self {
        Partition {
            assign: (0..n).collect(),
            community_count: n,
        }
    }

    pub fn single(n: usize) -> Self {
        Partition {
            assign: vec![0; n],
            community_count: usize::from(n > 0),
        }
    }

    /// Partition of the leaf nodes induced by the top level of `tree`.
    pub fn top_level_of(tree: &CommunityTree) -> Self {
        let labels: Vec<u32> = tree.top_level_assignment().iter().map(|c| c.0).collect();
        Partition::from_labels(&labels)
    }

    pub fn members(&self) -> Vec<Vec<NodeId>> {
        let mut out = vec![Vec::new(); self.community_count];
        for (n, &c) in self.assign.iter().enumerate() {
            out[c].push(NodeId(n as u32));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase")]
pub struct LouvainConfig {
    pub resolution: f64,
    pub seed: u64,
    pub max_levels: usize,
    pub min_modularity_gain: f64,
}

impl Default for LouvainConfig {
    fn default() -> Self {
        LouvainConfig {
            resolution: 1.0,
            seed: 0,
            max_levels: 10,
            min_modularity_gain: 1e-7,
        }
    }
}

impl LouvainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.resolution > 0.0) {
            return Err(Error::InvalidConfig("resolution must be positive".into()));
        }
        if self.max_levels < 1 {
            return Err(Error::InvalidConfig("maxLevels must be at least 1".into()));
        }
        Ok(())
    }
}

pub fn modularity(g: &Graph, p: &Partition, resolution: f64) -> Result<f64> {
    if p.assign.len() != g.node_count() {
        return Err(Error::InvalidConfig(format!(
            "partition covers {} nodes, graph has {}",
            p.assign.len(),
            g.node_count()
        )));
    }
    let m = g.total_weight();
    if g.node_count() == 0 || m <= 0.0 {
        return Err(Error::EmptyGraph);
    }
    let mut internal = vec![0.0; p.community_count];
    let mut total = vec![0.0; p.community_count];
    for e in &g.edges {
        let (cu, cv) = (p.assign[e.u.index()], p.assign[e.v.index()]);
        if cu == cv {
            internal[cu] += e.weight;
        }
        total[cu] += e.weight;
        total[cv] += e.weight;
    }
    Ok(internal
        .iter()
        .zip(&total)
        .map(|(e, d)| e / m - resolution * (d / (2.0 * m)).powi(2))
        .sum())
}

/// Compact weighted graph used while aggregating levels.
struct WorkGraph {
    adj: Vec<Vec<(usize, f64)>>,
    self_weight: Vec<f64>,
    degree: Vec<f64>,
    m: f64,
}

impl WorkGraph {
    fn from_graph(g: &Graph) -> Self {
        let n = g.node_count();
        let mut adj = vec![Vec::new(); n];
        let mut self_weight = vec![0.0; n];
        let mut degree = vec![0.0; n];
        for e in &g.edges {
            let (u, v) = (e.u.index(), e.v.index());
            if u == v {
                self_weight[u] += e.weight;
            } else {
                adj[u].push((v, e.weight));
                adj[v].push((u, e.weight));
            }
            degree[u] += e.weight;
            degree[v] += e.weight;
        }
        WorkGraph {
            adj,
            self_weight,
            degree,
            m: g.total_weight(),
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    fn aggregate(&self, p: &Partition) -> WorkGraph {
        let k = p.community_count;
        let mut links: Vec<HashMap<usize, f64>> = vec![HashMap::new(); k];
        let mut self_weight = vec![0.0; k];
        let mut degree = vec![0.0; k];
        for u in 0..self.len() {
            let cu = p.assign[u];
            self_weight[cu] += self.self_weight[u];
            degree[cu] += self.degree[u];
            for &(v, w) in &self.adj[u] {
                let cv = p.assign[v];
                if cu == cv {
                    // each internal edge is seen from both ends
                    self_weight[cu] += w / 2.0;
                } else {
                    *links[cu].entry(cv).or_insert(0.0) += w;
                }
            }
        }
        let adj = links
            .into_iter()
            .map(|l| {
                let mut v: Vec<(usize, f64)> = l.into_iter().collect();
                v.sort_by_key(|&(c, _)| c);
                v
            })
            .collect();
        WorkGraph {
            adj,
            self_weight,
            degree,
            m: self.m,
        }
    }

    /// Local-move phase starting from `start`. Staying put wins ties; among
    /// equally good moves the lowest community index wins.
    fn local_moves(&self, start: &[usize], order: &[usize], resolution: f64) -> Vec<usize> {
        let m = self.m;
        let mut comm = start.to_vec();
        let slots = comm.iter().copied().max().map_or(0, |c| c + 1).max(self.len());
        let mut tot = vec![0.0; slots];
        for (i, &c) in comm.iter().enumerate() {
            tot[c] += self.degree[i];
        }
        let mut w_to = vec![0.0; slots];
        let mut touched: Vec<usize> = Vec::new();
        for _ in 0..MAX_SWEEPS {
            let mut moved = false;
            for &i in order {
                let old = comm[i];
                let k_i = self.degree[i];
                for &(j, w) in &self.adj[i] {
                    let c = comm[j];
                    if w_to[c] == 0.0 {
                        touched.push(c);
                    }
                    w_to[c] += w;
                }
                tot[old] -= k_i;
                let gain = |c: usize, w: f64| w / m - resolution * tot[c] * k_i / (2.0 * m * m);
                let mut best = old;
                let mut best_gain = gain(old, w_to[old]);
                touched.sort_unstable();
                for &c in &touched {
                    if c == old {
                        continue;
                    }
                    let g = gain(c, w_to[c]);
                    if g > best_gain + GAIN_EPS {
                        best = c;
                        best_gain = g;
                    }
                }
                tot[best] += k_i;
                comm[i] = best;
                moved |= best != old;
                for &c in &touched {
                    w_to[c] = 0.0;
                }
                touched.clear();
            }
            if !moved {
                break;
            }
        }
        comm
    }
}

/// Full Louvain output: the tree plus each level's partition of the leaf
/// nodes (finest first) and its modularity.
#[derive(Clone, Debug)]
pub struct LouvainOutcome {
    pub tree: CommunityTree,
    pub levels: Vec<Partition>,
    pub modularity: Vec<f64>,
}

impl LouvainOutcome {
    pub fn top_level(&self) -> &Partition {
        self.levels.last().expect("at least one level")
    }
}

pub fn louvain(g: &Graph, cfg: &LouvainConfig) -> Result<CommunityTree> {
    Ok(louvain_detailed(g, cfg)?.tree)
}

pub fn louvain_detailed(g: &Graph, cfg: &LouvainConfig) -> Result<LouvainOutcome> {
    cfg.validate()?;
    let n = g.node_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if g.total_weight() <= 0.0 {
        let levels = vec![Partition::singletons(n)];
        let tree = CommunityTree::from_levels(n, &[levels[0].assign.clone()]);
        return Ok(LouvainOutcome {
            tree,
            levels,
            modularity: vec![f64::NAN],
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let base = WorkGraph::from_graph(g);
    let mut current = WorkGraph::from_graph(g);
    // level maps: level 0 is node -> community; later ones community -> community
    let mut maps: Vec<Vec<usize>> = Vec::new();
    let mut node_assign: Vec<usize> = (0..n).collect();
    let mut prev_q = modularity(g, &Partition::singletons(n), cfg.resolution)?;

    for _ in 0..cfg.max_levels {
        let mut order: Vec<usize> = (0..current.len()).collect();
        order.shuffle(&mut rng);
        let start: Vec<usize> = (0..current.len()).collect();
        let moved = current.local_moves(&start, &order, cfg.resolution);
        let part = Partition::from_labels(&moved);
        if part.community_count == current.len() {
            break;
        }
        let candidate: Vec<usize> = node_assign.iter().map(|&c| part.assign[c]).collect();
        let q = modularity(g, &Partition::from_labels(&candidate), cfg.resolution)?;
        if q - prev_q < cfg.min_modularity_gain {
            break;
        }
        prev_q = q;
        node_assign = candidate;
        current = current.aggregate(&part);
        maps.push(part.assign);
    }
    if maps.is_empty() {
        maps.push((0..n).collect());
    }

    // Node-level refinement of the top partition: aggregation can leave
    // single nodes that would gain by moving.
    let top: Vec<usize> = compose(&maps, maps.len());
    let order: Vec<usize> = (0..n).collect();
    let refined = Partition::from_labels(&base.local_moves(&top, &order, cfg.resolution));

    let levels = restrict_levels(&maps, &refined);
    let partitions: Vec<Partition> = (1..=levels.len())
        .map(|k| Partition::from_labels(&compose(&levels, k)))
        .collect();
    let modularity = partitions
        .iter()
        .map(|p| modularity(g, p, cfg.resolution))
        .collect::<Result<Vec<_>>>()?;
    let tree = CommunityTree::from_levels(n, &levels);
    Ok(LouvainOutcome {
        tree,
        levels: partitions,
        modularity,
    })
}

/// Node assignment after applying the first `k` level maps.
fn compose(maps: &[Vec<usize>], k: usize) -> Vec<usize> {
    let mut assign = maps[0].clone();
    for map in &maps[1..k] {
        for a in assign.iter_mut() {
            *a = map[*a];
        }
    }
    assign
}

/// Rebuilds the level maps so that every level nests inside the refined top
/// partition: a lower-level community is split wherever the refinement moved
/// some of its nodes to another top-level community.
fn restrict_levels(maps: &[Vec<usize>], top: &Partition) -> Vec<Vec<usize>> {
    let depth = maps.len();
    let per_node: Vec<Partition> = (1..depth)
        .map(|k| {
            let lk = compose(maps, k);
            let keys: Vec<(usize, usize)> = lk.iter().zip(&top.assign).map(|(&a, &b)| (a, b)).collect();
            Partition::from_labels(&keys)
        })
        .chain(std::iter::once(top.clone()))
        .collect();
    let mut levels = vec![per_node[0].assign.clone()];
    for k in 1..depth {
        let mut up = vec![0; per_node[k - 1].community_count];
        for (node, &c) in per_node[k - 1].assign.iter().enumerate() {
            up[c] = per_node[k].assign[node];
        }
        levels.push(up);
    }
    levels
}

/// Returns an improving single-node move `(node, target community, gain)`
/// if one exists, considering only communities adjacent to the node.
/// `None` certifies that `p` is a local optimum for single-node moves.
pub fn improving_move(g: &Graph, p: &Partition, resolution: f64, tolerance: f64) -> Option<(NodeId, usize, f64)> {
    let base = modularity(g, p, resolution).ok()?;
    let adj = g.adjacency();
    for (i, inc) in adj.iter().enumerate() {
        let mut targets: Vec<usize> = inc
            .iter()
            .map(|x| p.assign[x.neighbor.index()])
            .filter(|&c| c != p.assign[i])
            .collect();
        targets.sort_unstable();
        targets.dedup();
        for c in targets {
            let mut moved = p.assign.clone();
            moved[i] = c;
            let q = modularity(g, &Partition::from_labels(&moved), resolution).ok()?;
            if q > base + tolerance {
                return Some((NodeId(i as u32), c, q - base));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{graph_from_pairs, karate, two_triangles};

    /// Independent route: Q = 1/2m Σ_ij [A_ij − γ k_i k_j / 2m] δ(c_i, c_j)
    /// with A_ii = 2w for a self-loop.
    fn modularity_oracle(g: &Graph, assign: &[usize], gamma: f64) -> f64 {
        let n = g.node_count();
        let mut a = vec![vec![0.0; n]; n];
        for e in &g.edges {
            let (u, v) = (e.u.index(), e.v.index());
            if u == v {
                a[u][u] += 2.0 * e.weight;
            } else {
                a[u][v] += e.weight;
                a[v][u] += e.weight;
            }
        }
        let k: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
        let two_m: f64 = k.iter().sum();
        let mut q = 0.0;
        for i in 0..n {
            for j in 0..n {
                if assign[i] == assign[j] {
                    q += a[i][j] - gamma * k[i] * k[j] / two_m;
                }
            }
        }
        q / two_m
    }

    fn set_partitions(n: usize) -> Vec<Vec<usize>> {
        fn rec(i: usize, n: usize, cur: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<usize>>) {
            if i == n {
                out.push(cur.clone());
                return;
            }
            for c in 0..=max {
                cur.push(c);
                rec(i + 1, n, cur, max.max(c + 1), out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(0, n, &mut Vec::new(), 0, &mut out);
        out
    }

    #[test]
    fn single_community_has_zero_modularity() {
        let g = two_triangles();
        let q = modularity(&g, &Partition::single(6), 1.0).unwrap();
        assert!(q.abs() < 1e-15);
    }

    #[test]
    fn singleton_partition_formula() {
        let g = two_triangles();
        let m = g.total_weight();
        let expected: f64 = -g.degrees().iter().map(|k| (k / (2.0 * m)).powi(2)).sum::<f64>();
        let q = modularity(&g, &Partition::singletons(6), 1.0).unwrap();
        assert!((q - expected).abs() < 1e-15);
    }

    #[test]
    fn modularity_of_edgeless_graph_is_an_error() {
        let g = graph_from_pairs(3, &[]);
        assert!(matches!(
            modularity(&g, &Partition::single(3), 1.0),
            Err(Error::EmptyGraph)
        ));
    }

    #[test]
    fn karate_four_communities_modularity() {
        // The widely reported 4-community Louvain split of Zachary's club.
        let groups: [&[u32]; 4] = [
            &[0, 1, 2, 3, 7, 11, 12, 13, 17, 19, 21],
            &[4, 5, 6, 10, 16],
            &[8, 9, 14, 15, 18, 20, 22, 26, 29, 30, 32, 33],
            &[23, 24, 25, 27, 28, 31],
        ];
        let mut assign = vec![0; 34];
        for (c, members) in groups.iter().enumerate() {
            for &m in *members {
                assign[m as usize] = c;
            }
        }
        let g = karate();
        let oracle = modularity_oracle(&g, &assign, 1.0);
        let q = modularity(
            &g,
            &Partition {
                assign,
                community_count: 4,
            },
            1.0,
        )
        .unwrap();
        assert!((q - oracle).abs() < 1e-12);
        assert!((0.41..=0.42).contains(&q), "q = {q}");
    }

    #[test]
    fn karate_louvain_is_certified_and_good() {
        let g = karate();
        for seed in 0..5 {
            let out = louvain_detailed(
                &g,
                &LouvainConfig {
                    seed,
                    ..Default::default()
                },
            )
            .unwrap();
            let top = out.top_level();
            assert!(improving_move(&g, top, 1.0, 1e-10).is_none());
            // Louvain is greedy; 0.3981 is a known local optimum on this graph
            assert!(*out.modularity.last().unwrap() > 0.39);
        }
    }

    #[test]
    fn two_triangles_split_matches_brute_force() {
        let g = two_triangles();
        let best = set_partitions(6)
            .into_iter()
            .max_by(|a, b| {
                modularity_oracle(&g, a, 1.0)
                    .partial_cmp(&modularity_oracle(&g, b, 1.0))
                    .unwrap()
            })
            .unwrap();
        assert_eq!(Partition::from_labels(&best).assign, vec![0, 0, 0, 1, 1, 1]);

        let tree = louvain(&g, &LouvainConfig::default()).unwrap();
        assert_eq!(tree.top_level().len(), 2);
        let top = Partition::top_level_of(&tree);
        assert_eq!(top.assign, vec![0, 0, 0, 1, 1, 1]);
    }

    #[test]
    fn single_node_tree() {
        let g = graph_from_pairs(1, &[]);
        let tree = louvain(&g, &LouvainConfig::default()).unwrap();
        assert_eq!(tree.top_level().len(), 1);
        assert_eq!(tree.depth, 1);
        assert_eq!(tree.leaf_members(tree.top_level()[0]), vec![NodeId(0)]);
    }

    #[test]
    fn empty_graph_rejected() {
        assert!(matches!(
            louvain(&Graph::default(), &LouvainConfig::default()),
            Err(Error::EmptyGraph)
        ));
        assert!(LouvainConfig {
            resolution: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(LouvainConfig {
            max_levels: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn deterministic_for_seed() {
        let g = karate();
        let cfg = LouvainConfig {
            seed: 42,
            ..Default::default()
        };
        let a = louvain(&g, &cfg).unwrap();
        let b = louvain(&g, &cfg).unwrap();
        assert_eq!(a.to_json().to_string(), b.to_json().to_string());
    }

    #[test]
    fn levels_increase_modularity() {
        let g = karate();
        for seed in 0..10 {
            let out = louvain_detailed(
                &g,
                &LouvainConfig {
                    seed,
                    ..Default::default()
                },
            )
            .unwrap();
            let singleton = modularity(&g, &Partition::singletons(34), 1.0).unwrap();
            assert!(out.modularity[0] >= singleton);
            for w in out.modularity.windows(2) {
                assert!(w[1] >= w[0] - 1e-12, "{:?}", out.modularity);
            }
        }
    }

    #[test]
    fn small_graphs_certified_and_near_optimal() {
        // every graph on 5 labelled nodes that is connected
        let pairs: Vec<(u32, u32)> = (0..5).flat_map(|a| (a + 1..5).map(move |b| (a, b))).collect();
        let partitions = set_partitions(5);
        for mask in 1u32..(1 << pairs.len()) {
            let chosen: Vec<(u32, u32)> = (0..pairs.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| pairs[i])
                .collect();
            let g = graph_from_pairs(5, &chosen);
            let adj = g.adjacency();
            let mut seen = [false; 5];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(u) = stack.pop() {
                for x in &adj[u] {
                    if !seen[x.neighbor.index()] {
                        seen[x.neighbor.index()] = true;
                        stack.push(x.neighbor.index());
                    }
                }
            }
            if seen.iter().any(|s| !s) {
                continue;
            }
            let out = louvain_detailed(&g, &LouvainConfig::default()).unwrap();
            let top = out.top_level();
            let q = modularity(&g, top, 1.0).unwrap();
            assert!((q - modularity_oracle(&g, &top.assign, 1.0)).abs() < 1e-9);
            let best = partitions
                .iter()
                .map(|p| modularity_oracle(&g, p, 1.0))
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(q <= best + 1e-9);
            assert!(
                (best - q).abs() < 1e-9 || improving_move(&g, top, 1.0, 1e-10).is_none(),
                "mask {mask}: q {q} best {best}"
            );
        }
    }
}
