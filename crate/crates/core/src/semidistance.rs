//! The level-`a` graph of the network, negative cycles, and the
//! semidistance `S_a(y, x)` with path certificates.
//!
//! Every arc piece between consecutive nodes contributes two directed edges.
//! Traversing a piece `[t0, t1]` of the listed orientation forward costs
//! `∫ σ⁺`, traversing it backward costs `−∫ σ⁻`; both integrals are taken in
//! the listed parameter so that the two orientations share quadrature nodes.

use serde::Serialize;
use thiserror::Error;

use crate::config::SolverConfig;
use crate::hamiltonian::{FieldError, HamiltonianField};
use crate::network::{ArcId, DirectedArc, Network, NetworkError, NetworkPoint, Orientation, SplitNetwork};
use crate::quadrature::Quadrature;
use crate::shortest::{self, Edge};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistanceError {
    #[error("negative cycle of cost {cost:e} reachable between the endpoints")]
    NegativeCycleDetected { cost: f64, witness: Vec<Leg> },
    #[error("no admissible path: every connecting path crosses an arc where σ is undefined")]
    NoAdmissiblePath,
    #[error("brute-force enumeration exceeded {0} paths")]
    ExplosionGuard(usize),
    #[error("σ undefined on arc `{arc}` at s = {s}")]
    UndefinedSigma { arc: String, s: f64 },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Cost of the directed piece `[t0, t1]` (listed parameter, `t0 ≤ t1`) of
/// `arc`, traversed in `orientation`. `None` when σ is undefined at some
/// quadrature node.
pub fn piece_cost(field: &HamiltonianField, quad: &Quadrature, arc: ArcId, orientation: Orientation, a: f64, t0: f64, t1: f64) -> Result<Option<f64>, FieldError> {
    let fwd = DirectedArc::forward(arc);
    match orientation {
        Orientation::Forward => quad.integrate(|r| field.sigma_plus(fwd, a, r), t0, t1),
        Orientation::Reverse => Ok(quad.integrate(|r| field.sigma_minus(fwd, a, r), t0, t1)?.map(|v| -v)),
    }
}

/// `∫_{s1}^{s2} σ⁺_{d,a}` with `s1 ≤ s2` in the parameter of `d`.
pub fn arc_cost(field: &HamiltonianField, quad: &Quadrature, d: DirectedArc, a: f64, s1: f64, s2: f64) -> Result<Option<f64>, DistanceError> {
    if !(0.0..=1.0).contains(&s1) || !(0.0..=1.0).contains(&s2) {
        return Err(NetworkError::ParameterOutOfRange(if (0.0..=1.0).contains(&s1) { s2 } else { s1 }).into());
    }
    assert!(s1 <= s2, "arc_cost needs s1 <= s2");
    Ok(quad.integrate(|r| field.sigma_plus(d, a, r), s1, s2)?)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelEdge {
    pub from: usize,
    pub to: usize,
    pub arc: ArcId,
    pub orientation: Orientation,
    /// Piece in the listed parameter, `t0 < t1`.
    pub t0: f64,
    pub t1: f64,
    pub weight: Option<f64>,
}

impl LevelEdge {
    /// Endpoints in travel order, listed parameter.
    pub fn travel(&self) -> [f64; 2] {
        match self.orientation {
            Orientation::Forward => [self.t0, self.t1],
            Orientation::Reverse => [self.t1, self.t0],
        }
    }
}

#[derive(Clone, Debug)]
pub struct LevelGraph {
    pub level: f64,
    pub split: SplitNetwork,
    pub edges: Vec<LevelEdge>,
    pub tol: f64,
}

/// A leg of a certificate; `s` is in the listed parameter in travel order,
/// so backward legs run from the larger to the smaller value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Leg {
    #[serde(skip)]
    pub arc_id: ArcId,
    pub arc: String,
    pub dir: &'static str,
    pub s: [f64; 2],
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathCertificate {
    pub cost: f64,
    pub legs: Vec<Leg>,
    #[serde(skip)]
    pub from: Option<NetworkPoint>,
    #[serde(skip)]
    pub to: Option<NetworkPoint>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NegativeCycle {
    pub cost: f64,
    pub edges: Vec<usize>,
}

impl LevelGraph {
    pub fn build(network: &Network, field: &HamiltonianField, config: &SolverConfig, a: f64, extras: &[NetworkPoint]) -> Result<LevelGraph, FieldError> {
        let quad = config.quadrature();
        let split = network.split(extras);
        let mut edges = Vec::with_capacity(2 * split.pieces.len());
        for piece in &split.pieces {
            for orientation in [Orientation::Forward, Orientation::Reverse] {
                let weight = piece_cost(field, &quad, piece.arc, orientation, a, piece.s0, piece.s1)?;
                let (from, to) = match orientation {
                    Orientation::Forward => (piece.from, piece.to),
                    Orientation::Reverse => (piece.to, piece.from),
                };
                edges.push(LevelEdge { from, to, arc: piece.arc, orientation, t0: piece.s0, t1: piece.s1, weight });
            }
        }
        let tol = config.cycle_tolerance(a, network.arcs().len());
        Ok(LevelGraph { level: a, split, edges, tol })
    }

    pub fn node_count(&self) -> usize {
        self.split.nodes.len()
    }

    pub fn undefined_edges(&self) -> usize {
        self.edges.iter().filter(|e| e.weight.is_none()).count()
    }

    /// Defined edges in the form the shortest-path engine expects, with the
    /// index of the originating level edge kept alongside.
    pub fn defined_edges(&self) -> (Vec<Edge>, Vec<usize>) {
        let mut out = Vec::with_capacity(self.edges.len());
        let mut index = Vec::with_capacity(self.edges.len());
        for (i, e) in self.edges.iter().enumerate() {
            if let Some(w) = e.weight {
                out.push(Edge { from: e.from, to: e.to, weight: w, tag: e.arc.0 });
                index.push(i);
            }
        }
        (out, index)
    }

    /// A cycle of cost below `−tol`, if one exists among defined edges.
    pub fn negative_cycle(&self, tol: f64) -> Option<NegativeCycle> {
        let (edges, index) = self.defined_edges();
        shortest::find_negative_cycle(self.node_count(), &edges, tol).map(|cyc| NegativeCycle {
            cost: shortest::cycle_cost(&edges, &cyc),
            edges: cyc.into_iter().map(|i| index[i]).collect(),
        })
    }

    pub fn has_negative_cycle(&self) -> Option<NegativeCycle> {
        self.negative_cycle(self.tol)
    }

    /// Certificate legs for a sequence of level-edge indices, merging
    /// consecutive pieces of one arc traversed in one direction.
    pub fn legs(&self, network: &Network, path: &[usize]) -> Vec<Leg> {
        let mut legs: Vec<Leg> = Vec::new();
        for &i in path {
            let e = &self.edges[i];
            let s = e.travel();
            let cost = e.weight.unwrap_or(f64::NAN);
            if let Some(last) = legs.last_mut() {
                if last.arc_id == e.arc && last.dir == e.orientation.tag() && last.s[1] == s[0] {
                    last.s[1] = s[1];
                    last.cost += cost;
                    continue;
                }
            }
            legs.push(Leg { arc_id: e.arc, arc: network.arc(e.arc).name.clone(), dir: e.orientation.tag(), s, cost });
        }
        legs
    }

    /// Shortest paths from `sources` among defined edges.
    pub fn sweep(&self, sources: &[(usize, f64)]) -> (shortest::ShortestPaths, Vec<Edge>, Vec<usize>) {
        let (edges, index) = self.defined_edges();
        let paths = shortest::bellman_ford(self.node_count(), &edges, sources, self.tol / self.node_count().max(1) as f64);
        (paths, edges, index)
    }
}

fn reachable(n: usize, edges: &[Edge], start: usize, forward: bool) -> Vec<bool> {
    let mut seen = vec![false; n];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(u) = stack.pop() {
        for e in edges {
            let (a, b) = if forward { (e.from, e.to) } else { (e.to, e.from) };
            if a == u && !seen[b] {
                seen[b] = true;
                stack.push(b);
            }
        }
    }
    seen
}

/// `S_a(y, x)` with an optimal certificate.
pub fn semidistance(network: &Network, field: &HamiltonianField, config: &SolverConfig, a: f64, y: NetworkPoint, x: NetworkPoint) -> Result<(f64, PathCertificate), DistanceError> {
    if y == x {
        return Ok((0.0, PathCertificate { cost: 0.0, legs: Vec::new(), from: Some(y), to: Some(x) }));
    }
    let graph = LevelGraph::build(network, field, config, a, &[y, x])?;
    semidistance_on(network, &graph, y, x)
}

/// Semidistance on a prebuilt graph whose split contains `y` and `x`.
pub fn semidistance_on(network: &Network, graph: &LevelGraph, y: NetworkPoint, x: NetworkPoint) -> Result<(f64, PathCertificate), DistanceError> {
    let src = graph.split.node_of(y).ok_or(NetworkError::UnknownArc(format!("{y}")))?;
    let dst = graph.split.node_of(x).ok_or(NetworkError::UnknownArc(format!("{x}")))?;
    if src == dst {
        return Ok((0.0, PathCertificate { cost: 0.0, legs: Vec::new(), from: Some(y), to: Some(x) }));
    }
    let (edges, index) = graph.defined_edges();
    let n = graph.node_count();
    let ahead = reachable(n, &edges, src, true);
    if !ahead[dst] {
        return Err(DistanceError::NoAdmissiblePath);
    }
    let behind = reachable(n, &edges, dst, false);
    let (window, window_index): (Vec<Edge>, Vec<usize>) = edges
        .iter()
        .zip(&index)
        .filter(|(e, _)| ahead[e.from] && behind[e.from] && ahead[e.to] && behind[e.to])
        .map(|(e, &i)| (*e, i))
        .unzip();
    let cycle_error = |cyc: Vec<usize>| {
        let cost = shortest::cycle_cost(&window, &cyc);
        let level_edges: Vec<usize> = cyc.iter().map(|&i| window_index[i]).collect();
        DistanceError::NegativeCycleDetected { cost, witness: graph.legs(network, &level_edges) }
    };
    if let Some(cyc) = shortest::find_negative_cycle(n, &window, graph.tol) {
        return Err(cycle_error(cyc));
    }
    let paths = shortest::bellman_ford(n, &window, &[(src, 0.0)], graph.tol);
    let Some(path) = paths.path_to(&window, dst) else {
        // Only cycles within the tolerance remain; report the culprit.
        let cyc = shortest::find_negative_cycle(n, &window, 0.0).unwrap_or_default();
        return Err(cycle_error(cyc));
    };
    let level_path: Vec<usize> = path.iter().map(|&i| window_index[i]).collect();
    let legs = graph.legs(network, &level_path);
    let value = paths.dist[dst];
    Ok((value, PathCertificate { cost: value, legs, from: Some(y), to: Some(x) }))
}

/// Upper bound on the number of paths explored by the brute-force oracle.
pub const BRUTE_FORCE_CAP: usize = 1_000_000;

/// Minimum over all simple sub-arc concatenations from `y` to `x` with at
/// most `max_legs` pieces, every leg integrated afresh in the parameter of
/// its own orientation.
pub fn brute_force_semidistance(network: &Network, field: &HamiltonianField, config: &SolverConfig, a: f64, y: NetworkPoint, x: NetworkPoint, max_legs: usize) -> Result<f64, DistanceError> {
    if y == x {
        return Ok(0.0);
    }
    let quad = config.quadrature();
    let split = network.split(&[y, x]);
    let n = split.nodes.len();
    // adjacency: (to, cost), cost recomputed per directed piece
    let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for piece in &split.pieces {
        let fwd = DirectedArc::forward(piece.arc);
        if let Some(c) = arc_cost(field, &quad, fwd, a, piece.s0, piece.s1)? {
            adjacency[piece.from].push((piece.to, c));
        }
        let (r0, r1) = (1.0 - piece.s1, 1.0 - piece.s0);
        if let Some(c) = arc_cost(field, &quad, fwd.reversed(), a, r0, r1)? {
            adjacency[piece.to].push((piece.from, c));
        }
    }
    let src = split.node_of(y).expect("split contains y");
    let dst = split.node_of(x).expect("split contains x");
    let mut best = f64::INFINITY;
    let mut count = 0usize;
    let mut on_path = vec![false; n];
    on_path[src] = true;
    let mut stack: Vec<(usize, usize, f64)> = vec![(src, 0, 0.0)];
    // iterative DFS: (node, next adjacency index, cost so far)
    loop {
        let depth = stack.len();
        let Some(&mut (u, ref mut k, cost)) = stack.last_mut() else { break };
        if *k >= adjacency[u].len() || depth > max_legs {
            on_path[u] = false;
            stack.pop();
            continue;
        }
        let (v, w) = adjacency[u][*k];
        *k += 1;
        if on_path[v] {
            continue;
        }
        if v == dst {
            count += 1;
            if count > BRUTE_FORCE_CAP {
                return Err(DistanceError::ExplosionGuard(BRUTE_FORCE_CAP));
            }
            best = best.min(cost + w);
            continue;
        }
        on_path[v] = true;
        stack.push((v, 0, cost + w));
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(DistanceError::NoAdmissiblePath)
    }
}

/// `ℓ_a = max |σ±_{γ,a}(s)| / |γ̇(s)|` over arcs: grid scan refined by
/// golden-section search around each grid maximum.
pub fn lipschitz_bound(network: &Network, field: &HamiltonianField, config: &SolverConfig, a: f64) -> Result<f64, DistanceError> {
    let grid = config.grid;
    let h = 1.0 / (grid - 1) as f64;
    let mut bound: f64 = 0.0;
    for arc in network.arc_ids() {
        let geometry = &network.arc(arc).geometry;
        let ratio = |s: f64| -> Result<f64, DistanceError> {
            match field.support_forward(arc, a, s)? {
                Some((lo, hi)) => Ok(lo.abs().max(hi.abs()) / geometry.speed(s)),
                None => Err(DistanceError::UndefinedSigma { arc: network.arc(arc).name.clone(), s }),
            }
        };
        let values = (0..grid).map(|i| ratio(i as f64 * h)).collect::<Result<Vec<_>, _>>()?;
        let mut k = 0;
        for (i, v) in values.iter().enumerate() {
            if *v > values[k] {
                k = i;
            }
        }
        bound = bound.max(values[k]);
        let lo = k.saturating_sub(1) as f64 * h;
        let hi = (k + 1).min(grid - 1) as f64 * h;
        let (_, v) = crate::scalar::golden_section_max(ratio, lo, hi, 1e-12)?;
        bound = bound.max(v);
    }
    Ok(bound)
}
