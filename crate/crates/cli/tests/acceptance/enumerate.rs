//! Connected simple graphs up to isomorphism, by vertex augmentation with a
//! canonical form from partition refinement and individualization.

use std::collections::HashSet;

/// Adjacency bitmasks, one per vertex.
pub type Adj = Vec<u8>;

fn neighbors_in(adj: &Adj, v: usize, cell: &[usize]) -> u32 {
    cell.iter().filter(|&&u| adj[v] >> u & 1 == 1).count() as u32
}

/// Splits cells by neighbour counts into every cell until nothing changes.
fn refine(adj: &Adj, mut cells: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    loop {
        let mut next = Vec::with_capacity(cells.len());
        for cell in &cells {
            if cell.len() == 1 {
                next.push(cell.clone());
                continue;
            }
            let mut keyed: Vec<(Vec<u32>, usize)> = cell
                .iter()
                .map(|&v| (cells.iter().map(|c| neighbors_in(adj, v, c)).collect(), v))
                .collect();
            keyed.sort();
            let mut start = 0;
            for i in 1..=keyed.len() {
                if i == keyed.len() || keyed[i].0 != keyed[start].0 {
                    next.push(keyed[start..i].iter().map(|k| k.1).collect());
                    start = i;
                }
            }
        }
        if next.len() == cells.len() {
            return next;
        }
        cells = next;
    }
}

fn code(adj: &Adj, order: &[usize]) -> u64 {
    let mut bits = 0u64;
    for i in 0..order.len() {
        for j in i + 1..order.len() {
            bits = bits << 1 | (adj[order[i]] >> order[j] & 1) as u64;
        }
    }
    bits
}

fn search(adj: &Adj, cells: Vec<Vec<usize>>, best: &mut (u64, Vec<usize>)) {
    let cells = refine(adj, cells);
    let Some(at) = cells.iter().position(|c| c.len() > 1) else {
        let order: Vec<usize> = cells.into_iter().flatten().collect();
        let c = code(adj, &order);
        if best.1.is_empty() || c > best.0 {
            *best = (c, order);
        }
        return;
    };
    for &v in &cells[at] {
        let mut split = cells[..at].to_vec();
        split.push(vec![v]);
        split.push(cells[at].iter().copied().filter(|&u| u != v).collect());
        split.extend_from_slice(&cells[at + 1..]);
        search(adj, split, best);
    }
}

/// Canonical code and the relabelled adjacency it belongs to.
pub fn canonical(adj: &Adj) -> (u64, Adj) {
    let mut best = (0, Vec::new());
    search(adj, vec![(0..adj.len()).collect()], &mut best);
    let order = best.1;
    let mut pos = vec![0; adj.len()];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let relabelled = order
        .iter()
        .map(|&v| {
            (0..adj.len())
                .filter(|&u| adj[v] >> u & 1 == 1)
                .fold(0u8, |m, u| m | 1 << pos[u])
        })
        .collect();
    (best.0, relabelled)
}

/// Every connected graph on 1..=max_n vertices, grouped by size. Each
/// connected graph has a vertex whose removal keeps it connected, so adding
/// a vertex joined to a nonempty subset of a smaller connected graph
/// reaches all of them.
pub fn connected_graphs(max_n: usize) -> Vec<Vec<Adj>> {
    assert!((1..=8).contains(&max_n));
    let mut levels = vec![vec![vec![0u8]]];
    for n in 2..=max_n {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for g in &levels[n - 2] {
            for mask in 1u16..(1 << (n - 1)) {
                let mut adj = g.clone();
                adj.push(mask as u8);
                for (u, a) in adj.iter_mut().enumerate().take(n - 1) {
                    if mask >> u & 1 == 1 {
                        *a |= 1 << (n - 1);
                    }
                }
                let (c, canon) = canonical(&adj);
                if seen.insert(c) {
                    out.push(canon);
                }
            }
        }
        levels.push(out);
    }
    levels
}

pub fn edges(adj: &Adj) -> Vec<(usize, usize)> {
    (0..adj.len())
        .flat_map(|u| {
            (u + 1..adj.len())
                .filter(move |&v| adj[u] >> v & 1 == 1)
                .map(move |v| (u, v))
        })
        .collect()
}
