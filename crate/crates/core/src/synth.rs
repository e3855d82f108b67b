//! Seeded two-level planted-partition graphs with exact node and edge counts.
//!
//! Nodes are split into groups and every group into subgroups. Each group is
//! first made connected by a random spanning tree, the groups are chained by
//! single bridges, and the remaining edges are drawn by class: inside a
//! subgroup, between subgroups of one group, or between groups.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphBuilder, IngestOptions};
use crate::tree::CommunityTree;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PlantedSpec {
    pub nodes: usize,
    pub edges: usize,
    pub groups: usize,
    pub subgroups: usize,
    /// Share of edges inside a subgroup.
    pub subgroup_fraction: f64,
    /// Share of edges between subgroups of the same group.
    pub group_fraction: f64,
    pub seed: u64,
}

/// The graph sizes used for fixtures and benchmarks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Preset {
    Easy,
    Medium,
    Hard,
    Stress,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Easy, Preset::Medium, Preset::Hard, Preset::Stress];

    pub fn spec(self, seed: u64) -> PlantedSpec {
        let (nodes, edges, groups, subgroups) = match self {
            Preset::Easy => (115, 613, 12, 2),
            Preset::Medium => (297, 2148, 13, 3),
            Preset::Hard => (1133, 5451, 25, 4),
            Preset::Stress => (2646, 10455, 30, 4),
        };
        PlantedSpec {
            nodes,
            edges,
            groups,
            subgroups,
            subgroup_fraction: 0.5,
            group_fraction: 0.3,
            seed,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Easy => "easy",
            Preset::Medium => "medium",
            Preset::Hard => "hard",
            Preset::Stress => "stress",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidConfig(format!("unknown preset {s:?} (easy, medium, hard, stress)")))
    }
}

#[derive(Clone, Debug)]
pub struct Planted {
    pub graph: Graph,
    /// Planted group of every node.
    pub group: Vec<usize>,
    /// Global subgroup index of every node.
    pub subgroup: Vec<usize>,
    /// The planted hierarchy: subgroups under groups under the root.
    pub tree: CommunityTree,
}

/// Sizes summing to `total`, each at least `min`, drawn around `total / k`.
fn split(total: usize, k: usize, min: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.6..1.4)).collect();
    let spare = total - k * min;
    let sum: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| w / sum * spare as f64).collect();
    let mut sizes: Vec<usize> = exact.iter().map(|x| min + x.floor() as usize).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        (exact[b] - exact[b].floor())
            .total_cmp(&(exact[a] - exact[a].floor()))
            .then(a.cmp(&b))
    });
    let short = total - sizes.iter().sum::<usize>();
    for &i in order.iter().take(short) {
        sizes[i] += 1;
    }
    sizes
}

fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

pub fn planted_partition(spec: &PlantedSpec) -> Result<Planted> {
    let PlantedSpec {
        nodes: n,
        edges: m,
        groups: k,
        ..
    } = *spec;
    let fractions_ok = (0.0..=1.0).contains(&spec.subgroup_fraction)
        && (0.0..=1.0).contains(&spec.group_fraction)
        && spec.subgroup_fraction + spec.group_fraction <= 1.0;
    if k == 0 || spec.subgroups == 0 || n < 2 * k || !fractions_ok {
        return Err(Error::InvalidConfig(
            "planted partition needs ≥ 2 nodes per group and valid fractions".into(),
        ));
    }
    if m < n - 1 || m > n * (n - 1) / 2 {
        return Err(Error::InvalidConfig(format!(
            "{m} edges cannot make a simple connected graph on {n} nodes"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    // blocks of consecutive node ids
    let group_sizes = split(n, k, 2, &mut rng);
    let mut group = Vec::with_capacity(n);
    let mut subgroup = Vec::with_capacity(n);
    let mut sub_to_group = Vec::new();
    let mut subs: Vec<Vec<usize>> = Vec::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (g, &size) in group_sizes.iter().enumerate() {
        let parts = spec.subgroups.min(size / 2).max(1);
        let mut members = Vec::new();
        for s in split(size, parts, 1, &mut rng) {
            let start = group.len();
            subs.push((start..start + s).collect());
            sub_to_group.push(g);
            for _ in 0..s {
                group.push(g);
                subgroup.push(subs.len() - 1);
            }
            members.extend(start..start + s);
        }
        groups.push(members);
    }

    let mut edges: HashSet<(usize, usize)> = HashSet::with_capacity(m);
    // connectivity first
    for members in &groups {
        let mut order = members.clone();
        order.shuffle(&mut rng);
        for i in 1..order.len() {
            let j = rng.random_range(0..i);
            edges.insert(key(order[i], order[j]));
        }
    }
    for g in 1..k {
        let a = groups[g - 1][rng.random_range(0..groups[g - 1].len())];
        let b = groups[g][rng.random_range(0..groups[g].len())];
        edges.insert(key(a, b));
    }

    let pairs = |s: usize| (s * s.saturating_sub(1) / 2) as f64;
    let count = |edges: &HashSet<(usize, usize)>| {
        let mut c = [0usize; 3];
        for &(a, b) in edges {
            c[if subgroup[a] == subgroup[b] {
                0
            } else if group[a] == group[b] {
                1
            } else {
                2
            }] += 1;
        }
        c
    };
    let have = count(&edges);
    let capacity = [
        subs.iter().map(|s| pairs(s.len())).sum::<f64>() as usize,
        groups.iter().map(|g| pairs(g.len())).sum::<f64>() as usize
            - subs.iter().map(|s| pairs(s.len())).sum::<f64>() as usize,
        n * (n - 1) / 2 - groups.iter().map(|g| pairs(g.len())).sum::<f64>() as usize,
    ];
    let want_sub = (spec.subgroup_fraction * m as f64).round() as usize;
    let want_group = (spec.group_fraction * m as f64).round() as usize;
    let mut target = [want_sub, want_group, m.saturating_sub(want_sub + want_group)];
    // saturated classes hand their excess to the next one
    for c in 0..3 {
        target[c] = target[c].max(have[c]);
        if target[c] > capacity[c] {
            let extra = target[c] - capacity[c];
            target[c] = capacity[c];
            target[(c + 1) % 3] += extra;
        }
    }
    let mut surplus = target.iter().sum::<usize>() as isize - m as isize;
    for c in (0..3).rev() {
        let cut = (surplus.max(0) as usize).min(target[c] - have[c]);
        target[c] -= cut;
        surplus -= cut as isize;
    }

    let sub_pick = WeightedIndex::new(subs.iter().map(|s| pairs(s.len()))).ok();
    let group_pick = WeightedIndex::new(groups.iter().enumerate().map(|(g, members)| {
        pairs(members.len())
            - subs
                .iter()
                .zip(&sub_to_group)
                .filter(|(_, &sg)| sg == g)
                .map(|(s, _)| pairs(s.len()))
                .sum::<f64>()
    }))
    .ok();
    let mut got = have;
    for class in 0..3 {
        while got[class] < target[class] {
            let (a, b) = match class {
                0 => {
                    let s = &subs[sub_pick.as_ref().expect("capacity checked").sample(&mut rng)];
                    (s[rng.random_range(0..s.len())], s[rng.random_range(0..s.len())])
                }
                1 => {
                    let g = &groups[group_pick.as_ref().expect("capacity checked").sample(&mut rng)];
                    (g[rng.random_range(0..g.len())], g[rng.random_range(0..g.len())])
                }
                _ => (rng.random_range(0..n), rng.random_range(0..n)),
            };
            let right_class = match class {
                0 => subgroup[a] == subgroup[b],
                1 => group[a] == group[b] && subgroup[a] != subgroup[b],
                _ => group[a] != group[b],
            };
            if a != b && right_class && edges.insert(key(a, b)) {
                got[class] += 1;
            }
        }
    }

    let mut sorted: Vec<(usize, usize)> = edges.into_iter().collect();
    sorted.sort_unstable();
    let mut b = GraphBuilder::new();
    for (i, g) in group.iter().enumerate() {
        b.add_node(
            i.to_string(),
            None,
            BTreeMap::from([("group".to_owned(), g.to_string())]),
        );
    }
    for (u, v) in sorted {
        b.add_edge(u.to_string(), v.to_string(), 1.0, false);
    }
    let (graph, _) = b.build(IngestOptions::default())?;
    let tree = CommunityTree::from_levels(n, &[subgroup.clone(), sub_to_group]);
    Ok(Planted {
        graph,
        group,
        subgroup,
        tree,
    })
}

/// Stand-in for the C. elegans neural network: the Medium preset on a graph
/// seed whose 13 planted groups Louvain recovers on every seed.
pub fn celegans_surrogate() -> Planted {
    preset(Preset::Medium, 1)
}

pub fn preset(p: Preset, seed: u64) -> Planted {
    planted_partition(&p.spec(seed)).expect("presets are feasible")
}
