//! ForceAtlas2-style force-directed layout in two or three dimensions.
//!
//! Forces, with `m(n) = deg(n) + 1`:
//! - attraction along every edge: `d · w`
//! - repulsion between every pair: `k_r · m(u) m(v) / d` (exact, O(n²))
//! - gravity towards the region center: `k_g · m(n)`
//!
//! Step length follows the adaptive global speed of ForceAtlas2 (swinging
//! versus effective traction, with a speed-efficiency factor), and each node
//! is slowed down in proportion to its own swinging.

use glam::DVec3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: DVec3,
    pub max: DVec3,
}

impl Aabb {
    pub fn center(&self) -> DVec3 {
        (self.min + self.max) * 0.5
    }

    pub fn extent(&self) -> DVec3 {
        self.max - self.min
    }

    /// Box shrunk by `fraction` of its extent on every side.
    pub fn inset(&self, fraction: f64) -> Aabb {
        let pad = self.extent() * fraction;
        Aabb {
            min: self.min + pad,
            max: self.max - pad,
        }
    }

    pub fn contains(&self, p: DVec3, eps: f64) -> bool {
        p.cmpge(self.min - DVec3::splat(eps)).all() && p.cmple(self.max + DVec3::splat(eps)).all()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase")]
pub struct ForceConfig {
    pub k_repulsion: f64,
    pub k_gravity: f64,
    pub dims: usize,
    pub max_iterations: usize,
    /// Mean displacement per node per tick below which a run has converged.
    pub convergence_tol: f64,
    pub seed: u64,
    pub use_weights: bool,
    /// Positions are clamped into this box, inset by 5% of its extent.
    pub bounds: Option<Aabb>,
    /// Gravity target when no bounds are set.
    pub center: DVec3,
    pub jitter_tolerance: f64,
}

impl Default for ForceConfig {
    fn default() -> Self {
        ForceConfig {
            k_repulsion: 10.0,
            k_gravity: 1.0,
            dims: 3,
            max_iterations: 500,
            convergence_tol: 1e-3,
            seed: 0,
            use_weights: true,
            bounds: None,
            center: DVec3::ZERO,
            jitter_tolerance: 1.0,
        }
    }
}

impl ForceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dims != 2 && self.dims != 3 {
            return Err(Error::InvalidConfig(format!("dims must be 2 or 3, got {}", self.dims)));
        }
        if self.max_iterations < 1 {
            return Err(Error::InvalidConfig("maxIterations must be at least 1".into()));
        }
        if !(self.k_repulsion > 0.0) || !(self.k_gravity >= 0.0) || !(self.convergence_tol > 0.0) {
            return Err(Error::InvalidConfig("force constants out of range".into()));
        }
        Ok(())
    }

    fn region_center(&self) -> DVec3 {
        let c = self.bounds.map_or(self.center, |b| b.center());
        if self.dims == 2 {
            c.with_z(0.0)
        } else {
            c
        }
    }
}

/// Force-model view of a graph: self-loops dropped, masses precomputed.
#[derive(Clone, Debug)]
pub struct ForceGraph {
    pub edges: Vec<(usize, usize, f64)>,
    pub mass: Vec<f64>,
}

impl ForceGraph {
    pub fn new(g: &Graph, use_weights: bool) -> Self {
        let mut mass = vec![1.0; g.node_count()];
        let edges = g
            .edges
            .iter()
            .filter(|e| !e.is_self_loop())
            .map(|e| {
                mass[e.u.index()] += 1.0;
                mass[e.v.index()] += 1.0;
                (e.u.index(), e.v.index(), if use_weights { e.weight } else { 1.0 })
            })
            .collect();
        ForceGraph { edges, mass }
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Dynamics {
    prev_force: Vec<DVec3>,
    speed: f64,
    speed_efficiency: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayoutPositions {
    pub pos: Vec<DVec3>,
    /// Number of ticks applied so far.
    pub frame: u64,
    /// Mean displacement of the last tick.
    pub last_displacement: f64,
    dynamics: Option<Dynamics>,
}

impl LayoutPositions {
    pub fn new(pos: Vec<DVec3>) -> Self {
        LayoutPositions {
            pos,
            frame: 0,
            last_displacement: f64::INFINITY,
            dynamics: None,
        }
    }

    pub fn len(&self) -> usize {
        self.pos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pos.is_empty()
    }

    pub fn centroid(&self) -> DVec3 {
        if self.pos.is_empty() {
            return DVec3::ZERO;
        }
        self.pos.iter().copied().sum::<DVec3>() / self.pos.len() as f64
    }
}

/// Seeded uniform jitter in a unit region around the config's center.
pub fn initial_positions(n: usize, cfg: &ForceConfig) -> Vec<DVec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let center = cfg.region_center();
    let mut pos: Vec<DVec3> = (0..n)
        .map(|_| {
            let x = rng.random::<f64>() - 0.5;
            let y = rng.random::<f64>() - 0.5;
            let z = if cfg.dims == 3 { rng.random::<f64>() - 0.5 } else { 0.0 };
            center + DVec3::new(x, y, z)
        })
        .collect();
    separate_coincident(&mut pos, cfg.dims, cfg.seed);
    pos
}

const COINCIDENT_EPS: f64 = 1e-6;

/// Nudges exactly coincident points apart along seeded random directions.
pub fn separate_coincident(pos: &mut [DVec3], dims: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut order: Vec<usize> = (0..pos.len()).collect();
    order.sort_by(|&a, &b| {
        let (p, q) = (pos[a], pos[b]);
        (p.x, p.y, p.z, a).partial_cmp(&(q.x, q.y, q.z, b)).unwrap()
    });
    let original: Vec<DVec3> = pos.to_vec();
    for w in order.windows(2) {
        if original[w[0]] == original[w[1]] {
            let mut dir = DVec3::new(
                rng.random::<f64>() - 0.5,
                rng.random::<f64>() - 0.5,
                if dims == 3 { rng.random::<f64>() - 0.5 } else { 0.0 },
            );
            if dir == DVec3::ZERO {
                dir = DVec3::X;
            }
            pos[w[1]] += dir.normalize() * COINCIDENT_EPS;
        }
    }
}

/// Net force on every node at the given positions.
pub fn compute_forces(g: &ForceGraph, pos: &[DVec3], cfg: &ForceConfig) -> Vec<DVec3> {
    let n = pos.len();
    let mut force = vec![DVec3::ZERO; n];
    for i in 0..n {
        for j in i + 1..n {
            let delta = pos[i] - pos[j];
            let d2 = delta.length_squared();
            if d2 == 0.0 {
                continue;
            }
            let f = delta * (cfg.k_repulsion * g.mass[i] * g.mass[j] / d2);
            force[i] += f;
            force[j] -= f;
        }
    }
    for &(u, v, w) in &g.edges {
        let f = (pos[u] - pos[v]) * w;
        force[u] -= f;
        force[v] += f;
    }
    if cfg.k_gravity > 0.0 {
        let c = cfg.region_center();
        for i in 0..n {
            let to_center = c - pos[i];
            let d = to_center.length();
            if d > 0.0 {
                force[i] += to_center * (cfg.k_gravity * g.mass[i] / d);
            }
        }
    }
    if cfg.dims == 2 {
        for f in &mut force {
            f.z = 0.0;
        }
    }
    force
}

/// One layout step. Pure: returns the advanced state.
pub fn force_tick(g: &ForceGraph, state: &LayoutPositions, cfg: &ForceConfig) -> Result<LayoutPositions> {
    let mut next = state.clone();
    tick_in_place(g, &mut next, cfg)?;
    Ok(next)
}

pub(crate) fn tick_in_place(g: &ForceGraph, state: &mut LayoutPositions, cfg: &ForceConfig) -> Result<()> {
    let n = state.pos.len();
    assert_eq!(n, g.len(), "positions and graph disagree on node count");
    let force = compute_forces(g, &state.pos, cfg);
    let dyn_state = state.dynamics.get_or_insert_with(|| Dynamics {
        prev_force: vec![DVec3::ZERO; n],
        speed: 1.0,
        speed_efficiency: 1.0,
    });

    let mut total_swinging = 0.0;
    let mut total_traction = 0.0;
    for i in 0..n {
        let (f, p) = (force[i], dyn_state.prev_force[i]);
        total_swinging += g.mass[i] * (p - f).length();
        total_traction += g.mass[i] * (p + f).length() * 0.5;
    }
    adjust_speed(dyn_state, n, total_swinging, total_traction, cfg.jitter_tolerance);

    let clamp_box = cfg.bounds.map(|b| b.inset(0.05));
    let mut moved = 0.0;
    for i in 0..n {
        let f = force[i];
        let swinging = g.mass[i] * (dyn_state.prev_force[i] - f).length();
        let factor = dyn_state.speed / (1.0 + (dyn_state.speed * swinging).sqrt());
        let old = state.pos[i];
        let mut p = old + f * factor;
        if let Some(b) = clamp_box {
            p = p.clamp(b.min, b.max);
        }
        if cfg.dims == 2 {
            p.z = 0.0;
        }
        if !p.is_finite() {
            return Err(Error::NumericalDivergence {
                tick: state.frame,
                node: i as u32,
            });
        }
        moved += (p - old).length();
        state.pos[i] = p;
    }
    dyn_state.prev_force = force;
    state.frame += 1;
    state.last_displacement = if n == 0 { 0.0 } else { moved / n as f64 };
    Ok(())
}

fn adjust_speed(d: &mut Dynamics, n: usize, swinging: f64, traction: f64, jitter_tolerance: f64) {
    const MIN_SPEED_EFFICIENCY: f64 = 0.05;
    const MAX_RISE: f64 = 0.5;
    let nf = n.max(1) as f64;
    let estimated = 0.05 * nf.sqrt();
    let min_jt = estimated.sqrt();
    let max_jt: f64 = 10.0;
    let mut jt = jitter_tolerance * min_jt.max(max_jt.min(estimated * traction / (nf * nf)));

    if traction > 0.0 && swinging / traction > 2.0 {
        if d.speed_efficiency > MIN_SPEED_EFFICIENCY {
            d.speed_efficiency *= 0.5;
        }
        jt = jt.max(jitter_tolerance);
    }
    let target = if swinging > 0.0 {
        jt * d.speed_efficiency * traction / swinging
    } else {
        d.speed * (1.0 + MAX_RISE)
    };
    if swinging > jt * traction {
        if d.speed_efficiency > MIN_SPEED_EFFICIENCY {
            d.speed_efficiency *= 0.7;
        }
    } else if d.speed < 1000.0 {
        d.speed_efficiency *= 1.3;
    }
    d.speed += (target - d.speed).min(MAX_RISE * d.speed);
}

#[derive(Clone, Debug)]
pub enum InitialLayout {
    Seeded,
    Given(Vec<DVec3>),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvergenceReport {
    pub iterations: usize,
    pub converged: bool,
    /// Mean displacement of every tick, in order.
    pub displacements: Vec<f64>,
}

pub fn layout_converged(g: &ForceGraph, init: InitialLayout, cfg: &ForceConfig) -> Result<LayoutPositions> {
    layout_converged_traced(g, init, cfg).map(|(p, _)| p)
}

/// Runs ticks until the mean displacement over the trailing tenth of the run
/// drops below `convergence_tol` while not growing, or `max_iterations` is
/// reached. The growth check keeps a run from stopping while it drifts off an
/// unstable equilibrium.
pub fn layout_converged_traced(
    g: &ForceGraph,
    init: InitialLayout,
    cfg: &ForceConfig,
) -> Result<(LayoutPositions, ConvergenceReport)> {
    cfg.validate()?;
    if g.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let mut pos = match init {
        InitialLayout::Seeded => initial_positions(g.len(), cfg),
        InitialLayout::Given(p) => {
            if p.len() != g.len() {
                return Err(Error::InvalidConfig(format!(
                    "{} initial positions for {} nodes",
                    p.len(),
                    g.len()
                )));
            }
            p
        }
    };
    if cfg.dims == 2 {
        for p in &mut pos {
            p.z = 0.0;
        }
    }
    separate_coincident(&mut pos, cfg.dims, cfg.seed);
    let mut state = LayoutPositions::new(pos);
    let mut report = ConvergenceReport::default();

    let degenerate = g.len() == 1 || g.edges.is_empty();
    let budget = if degenerate { 1 } else { cfg.max_iterations };
    for _ in 0..budget {
        tick_in_place(g, &mut state, cfg)?;
        report.displacements.push(state.last_displacement);
        let ticks = report.displacements.len();
        let window = ticks.div_ceil(10);
        let recent = &report.displacements[ticks - window..];
        let settling = recent[window - 1] <= recent[0];
        if settling && recent.iter().sum::<f64>() / (window as f64) < cfg.convergence_tol {
            report.converged = true;
            break;
        }
    }
    report.iterations = report.displacements.len();
    report.converged |= degenerate;
    Ok((state, report))
}
