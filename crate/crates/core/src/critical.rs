//! Critical value by bisection on the negative-cycle predicate, the Aubry
//! set (zero-cost cycle supports plus degenerate points), and its partition
//! into static classes.

use serde::Serialize;
use thiserror::Error;

use crate::hamiltonian::FieldError;
use crate::network::{ArcId, DirectedArc, NetworkPoint, VertexId};
use crate::scalar;
use crate::semidistance::{LevelGraph, Leg, NegativeCycle};
use crate::Instance;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CriticalError {
    #[error("no level without negative cycles found up to a_0 + {0:e}")]
    BracketFailure(f64),
    #[error("internal consistency failure: the Aubry set came out empty")]
    EmptyAubry,
    #[error("negative cycle of cost {cost:e} at level {level}")]
    NegativeCycle { level: f64, cost: f64 },
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ArcLevel {
    pub arc: String,
    pub a_gamma: f64,
    /// Parameter attaining `a_γ`.
    pub s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BracketStep {
    pub level: f64,
    pub negative_cycle: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CriticalWitness {
    /// A cycle of cost within the tolerance of zero at `c`.
    ZeroCycle { cost: f64, legs: Vec<Leg> },
    /// A point where `m(s) = a_0 = c`.
    Degenerate { arc: String, s: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalData {
    pub c: f64,
    pub a0: f64,
    pub arcs: Vec<ArcLevel>,
    pub history: Vec<BracketStep>,
    pub witness: CriticalWitness,
}

/// Relative tolerance of the bisection predicate; tighter than the cycle
/// tolerance so that no cycle at `c` is negative beyond roundoff.
const PREDICATE_TOL: f64 = 1e-14;

fn negative_at(inst: &Instance, a: f64) -> Result<bool, CriticalError> {
    let graph = LevelGraph::build(&inst.network, &inst.field, &inst.config, a, &[])?;
    let tol = PREDICATE_TOL * (1.0 + a.abs()) * inst.network.arcs().len() as f64;
    Ok(graph.negative_cycle(tol).is_some())
}

pub fn critical_value(inst: &Instance) -> Result<CriticalData, CriticalError> {
    let cfg = &inst.config;
    let mut arcs = Vec::with_capacity(inst.network.arcs().len());
    let mut a0 = f64::NEG_INFINITY;
    let mut top = (ArcId(0), 0.0);
    for arc in inst.network.arc_ids() {
        let (value, s) = inst.field.a_gamma(arc, cfg.grid)?;
        // normalizes −0
        let value = value + 0.0;
        if value > a0 {
            a0 = value;
            top = (arc, s);
        }
        arcs.push(ArcLevel { arc: inst.network.arc(arc).name.clone(), a_gamma: value, s });
    }
    let mut history = Vec::new();
    let mut probe = |a: f64| -> Result<bool, CriticalError> {
        let neg = negative_at(inst, a)?;
        history.push(BracketStep { level: a, negative_cycle: neg });
        Ok(neg)
    };
    if !probe(a0)? {
        return Ok(CriticalData {
            c: a0,
            a0,
            arcs,
            history,
            witness: CriticalWitness::Degenerate { arc: inst.network.arc(top.0).name.clone(), s: top.1 },
        });
    }
    let mut lo = a0;
    let mut step = 1.0;
    let mut hi = a0 + step;
    let mut doublings = 0;
    while probe(hi)? {
        lo = hi;
        step *= 2.0;
        hi = a0 + step;
        doublings += 1;
        if doublings > cfg.max_doublings {
            return Err(CriticalError::BracketFailure(step));
        }
    }
    let near_zero = |a: f64| -> Result<Option<NegativeCycle>, CriticalError> {
        let graph = LevelGraph::build(&inst.network, &inst.field, cfg, a, &[])?;
        Ok(graph.negative_cycle(-cfg.cycle_tolerance(a, inst.network.arcs().len())))
    };
    // past the width tolerance, keep halving while a steep cycle cost leaves
    // no near-zero cycle at `hi`
    let mut cycle = None;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if hi - lo <= cfg.bisection_tol * (1.0 + hi.abs()) {
            cycle = near_zero(hi)?;
            if cycle.is_some() {
                break;
            }
        }
        if probe(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = hi;
    let graph = LevelGraph::build(&inst.network, &inst.field, cfg, c, &[])?;
    let cycle = match cycle.or(near_zero(c)?) {
        Some(cycle) => cycle,
        None => {
            let below = LevelGraph::build(&inst.network, &inst.field, cfg, lo, &[])?;
            let tol = PREDICATE_TOL * (1.0 + lo.abs()) * inst.network.arcs().len() as f64;
            let edges = below.negative_cycle(tol).ok_or(CriticalError::EmptyAubry)?.edges;
            let cost = edges.iter().map(|&i| graph.edges[i].weight.unwrap_or(f64::NAN)).sum();
            NegativeCycle { cost, edges }
        }
    };
    Ok(CriticalData {
        c,
        a0,
        arcs,
        history,
        witness: CriticalWitness::ZeroCycle { cost: cycle.cost, legs: graph.legs(&inst.network, &cycle.edges) },
    })
}

/// Maximal closed intervals of `arc` where `m(s) ≥ level − tol_energy`.
pub fn degenerate_set(inst: &Instance, arc: ArcId, level: f64) -> Result<Vec<[f64; 2]>, FieldError> {
    let grid = inst.config.grid;
    let h = 1.0 / (grid - 1) as f64;
    let floor = level - inst.config.energy_tolerance(level);
    let node = |i: usize| i as f64 * h;
    let m = |s: f64| inst.field.m(arc, s);
    let values = (0..grid).map(|i| m(node(i))).collect::<Result<Vec<_>, _>>()?;
    let qualifies: Vec<bool> = values.iter().map(|&v| v >= floor).collect();

    // qualifying grid nodes, plus refined local maxima for peaks that fall
    // between grid nodes
    let mut points: Vec<(f64, Option<usize>)> = (0..grid).filter(|&i| qualifies[i]).map(|i| (node(i), Some(i))).collect();
    for i in 0..grid {
        let left = i == 0 || values[i] >= values[i - 1];
        let right = i + 1 == grid || values[i] >= values[i + 1];
        if !(left && right) || qualifies[i] && (i == 0 || qualifies[i - 1]) && (i + 1 == grid || qualifies[i + 1]) {
            continue;
        }
        let (lo, hi) = (node(i.saturating_sub(1)), node((i + 1).min(grid - 1)));
        let (s, v) = scalar::golden_section_max(m, lo, hi, 1e-12)?;
        if v >= floor && !qualifies[i] {
            points.push((s, None));
        }
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut clusters: Vec<(f64, f64)> = Vec::new();
    let mut last_index: Option<usize> = None;
    for &(s, idx) in &points {
        let joins = match (last_index, idx) {
            (Some(j), Some(i)) => i == j + 1,
            _ => false,
        };
        if joins {
            clusters.last_mut().expect("cluster open").1 = s;
        } else {
            clusters.push((s, s));
        }
        last_index = idx;
    }

    // m − floor is negative at `outside` and nonnegative at `inside`
    let crossing = |inside: f64, outside: f64| -> Result<f64, FieldError> {
        let at = |t: f64| outside + t * (inside - outside);
        scalar::bisect_increasing(|t| Ok(m(at(t))? - floor), 0.0, 1.0, 1e-14).map(at)
    };
    let mut out = Vec::with_capacity(clusters.len());
    for (l, r) in clusters {
        let left_out = (l / h).ceil() as isize - 1;
        let s1 = if l <= 0.0 || left_out < 0 {
            0.0
        } else {
            let o = node(left_out as usize).min(l);
            if m(o)? >= floor { o } else { crossing(l, o)? }
        };
        let right_out = (r / h).floor() as usize + 1;
        let s2 = if r >= 1.0 || right_out >= grid {
            1.0
        } else {
            let o = node(right_out).max(r);
            if m(o)? >= floor { o } else { crossing(r, o)? }
        };
        out.push([s1, s2]);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum AubryItem {
    Vertex {
        vertex: String,
        #[serde(skip)]
        id: VertexId,
    },
    Interval {
        arc: String,
        interval: [f64; 2],
        #[serde(skip)]
        id: ArcId,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassOrigin {
    Cycle,
    Degenerate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AubryClass {
    pub id: usize,
    pub items: Vec<AubryItem>,
    pub origin: ClassOrigin,
    #[serde(skip)]
    pub representative: NetworkPoint,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AubryStructure {
    pub c: f64,
    pub a0: f64,
    pub classes: Vec<AubryClass>,
}

impl AubryStructure {
    pub fn items(&self) -> impl Iterator<Item = &AubryItem> {
        self.classes.iter().flat_map(|c| c.items.iter())
    }

    /// Whether `p` lies on one of the items.
    pub fn contains(&self, inst: &Instance, p: NetworkPoint) -> bool {
        self.items().any(|item| match (item, p) {
            (AubryItem::Vertex { id, .. }, NetworkPoint::Vertex(v)) => *id == v,
            (AubryItem::Interval { id, interval, .. }, NetworkPoint::Interior { arc, s }) => *id == arc && interval[0] <= s && s <= interval[1],
            (AubryItem::Interval { id, interval, .. }, NetworkPoint::Vertex(v)) => {
                let a = inst.network.arc(*id);
                (a.tail == v && interval[0] == 0.0) || (a.head == v && interval[1] == 1.0)
            }
            _ => false,
        })
    }
}

/// All-pairs semidistances on a graph by one sweep per node.
fn all_pairs(graph: &LevelGraph) -> Vec<Vec<f64>> {
    (0..graph.node_count()).map(|u| graph.sweep(&[(u, 0.0)]).0.dist).collect()
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Representative of a degenerate interval (the grid node nearest its
/// midpoint, or the midpoint itself) and the part of the interval whose
/// direct round trip `∫ σ⁺ − σ⁻` to it stays within `tol`.
fn trim_degenerate(inst: &Instance, arc: ArcId, level: f64, [s1, s2]: [f64; 2], tol: f64) -> Result<([f64; 2], f64), FieldError> {
    let quad = inst.config.quadrature();
    let h = 1.0 / (inst.config.grid - 1) as f64;
    let mid = 0.5 * (s1 + s2);
    let node = (mid / h).round() * h;
    let rep = if (s1..=s2).contains(&node) { node } else { mid };
    let fwd = DirectedArc::forward(arc);
    let width = |r: f64| -> Result<Option<f64>, FieldError> {
        let plus = inst.field.sigma_plus(fwd, level, r)?;
        let minus = inst.field.sigma_minus(fwd, level, r)?;
        Ok(Some(match (plus, minus) {
            (Some(p), Some(m)) => (p - m).max(0.0),
            _ => 0.0,
        }))
    };
    let trip = |a: f64, b: f64| -> Result<f64, FieldError> { Ok(quad.integrate(width, a.min(b), a.max(b))?.unwrap_or(0.0)) };
    let reach = |end: f64| -> Result<f64, FieldError> {
        if trip(rep, end)? <= tol {
            return Ok(end);
        }
        let at = |t: f64| rep + t * (end - rep);
        scalar::bisect_increasing(|t| Ok(trip(rep, at(t))? - tol), 0.0, 1.0, 1e-12).map(at)
    };
    Ok(([reach(s1)?, reach(s2)?], rep))
}

/// Zero-cost cycle arcs and degenerate intervals at `level`, grouped into
/// classes by `S(x, y) + S(y, x) ≤ tol` on representatives. At the critical
/// level this is the Aubry set; at other admissible levels it is the set
/// that would have to carry uniqueness.
pub fn uniqueness_set_at_level(inst: &Instance, level: f64, a0: f64) -> Result<AubryStructure, CriticalError> {
    let net = &inst.network;
    let graph = LevelGraph::build(net, &inst.field, &inst.config, level, &[])?;
    if let Some(cyc) = graph.has_negative_cycle() {
        return Err(CriticalError::NegativeCycle { level, cost: cyc.cost });
    }
    let dist = all_pairs(&graph);
    let mut on_cycle = vec![false; net.arcs().len()];
    for e in &graph.edges {
        let Some(w) = e.weight else { continue };
        let back = if e.from == e.to { 0.0 } else { dist[e.to][e.from] };
        if back.is_finite() && w + back <= graph.tol {
            on_cycle[e.arc.0] = true;
        }
    }

    let class_tol = inst.config.pair_tol * (1.0 + level.abs());
    // (item, representative, origin)
    let mut items: Vec<(AubryItem, NetworkPoint, ClassOrigin)> = Vec::new();
    for arc in net.arc_ids() {
        let name = net.arc(arc).name.clone();
        if on_cycle[arc.0] {
            items.push((AubryItem::Interval { arc: name, interval: [0.0, 1.0], id: arc }, NetworkPoint::Vertex(net.arc(arc).tail), ClassOrigin::Cycle));
            continue;
        }
        for interval in degenerate_set(inst, arc, level)? {
            let ([s1, s2], r) = trim_degenerate(inst, arc, level, interval, 0.5 * class_tol)?;
            let rep = net.point_on(arc, r);
            let item = match rep {
                NetworkPoint::Vertex(v) if s1 == s2 => AubryItem::Vertex { vertex: net.vertex(v).name.clone(), id: v },
                _ => AubryItem::Interval { arc: name.clone(), interval: [s1, s2], id: arc },
            };
            items.push((item, rep, ClassOrigin::Degenerate));
        }
    }
    if items.is_empty() {
        return Ok(AubryStructure { c: level, a0, classes: Vec::new() });
    }

    let reps: Vec<NetworkPoint> = items.iter().map(|it| it.1).collect();
    let rep_graph = LevelGraph::build(net, &inst.field, &inst.config, level, &reps)?;
    let nodes: Vec<usize> = reps.iter().map(|&p| rep_graph.split.node_of(p).expect("representative is a node")).collect();
    let rep_dist: Vec<Vec<f64>> = nodes.iter().map(|&u| rep_graph.sweep(&[(u, 0.0)]).0.dist).collect();
    let mut parent: Vec<usize> = (0..items.len()).collect();
    for i in 0..items.len() {
        for j in i + 1..items.len() {
            let round = rep_dist[i][nodes[j]] + rep_dist[j][nodes[i]];
            if round <= class_tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut classes: Vec<AubryClass> = Vec::new();
    let mut class_of = vec![usize::MAX; items.len()];
    for (i, item) in items.iter().enumerate() {
        let root = find(&mut parent, i);
        if class_of[root] == usize::MAX {
            class_of[root] = classes.len();
            classes.push(AubryClass { id: classes.len(), items: Vec::new(), origin: ClassOrigin::Degenerate, representative: item.1 });
        }
        let class = &mut classes[class_of[root]];
        class.items.push(item.0.clone());
        if item.2 == ClassOrigin::Cycle {
            class.origin = ClassOrigin::Cycle;
        }
    }
    Ok(AubryStructure { c: level, a0, classes })
}

pub fn aubry_set(inst: &Instance, critical: &CriticalData) -> Result<AubryStructure, CriticalError> {
    let aubry = uniqueness_set_at_level(inst, critical.c, critical.a0)?;
    if aubry.classes.is_empty() {
        return Err(CriticalError::EmptyAubry);
    }
    Ok(aubry)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionDArc {
    pub arc: String,
    pub spread: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionDReport {
    pub holds: bool,
    /// Arcs with `a_γ = c = a_0`; empty when `c > a_0`.
    pub arcs: Vec<ConditionDArc>,
}

/// Whether `m_γ` is constant on every arc with `a_γ = c = a_0`.
pub fn condition_d_holds(inst: &Instance, critical: &CriticalData) -> Result<ConditionDReport, FieldError> {
    let tol = inst.config.energy_tolerance(critical.c);
    let grid = inst.config.grid;
    let mut arcs = Vec::new();
    if (critical.c - critical.a0).abs() <= tol {
        for (arc, level) in inst.network.arc_ids().zip(&critical.arcs) {
            if (level.a_gamma - critical.c).abs() > tol {
                continue;
            }
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for i in 0..grid {
                let v = inst.field.m(arc, i as f64 / (grid - 1) as f64)?;
                lo = lo.min(v);
                hi = hi.max(v);
            }
            arcs.push(ConditionDArc { arc: level.arc.clone(), spread: hi - lo, holds: hi - lo <= tol });
        }
    }
    Ok(ConditionDReport { holds: arcs.iter().all(|a| a.holds), arcs })
}

/// Minimum cost over simple cycles of the level graph, by exhaustive
/// enumeration. Exponential; meant for cross-checking on small networks.
pub fn brute_force_min_cycle(graph: &LevelGraph) -> Option<f64> {
    let (edges, _) = graph.defined_edges();
    let n = graph.node_count();
    let mut best: Option<f64> = None;
    let mut keep = |c: f64| best = Some(best.map_or(c, |b: f64| b.min(c)));
    for e in edges.iter().filter(|e| e.from == e.to) {
        keep(e.weight);
    }
    // cycles whose smallest node is `start`
    for start in 0..n {
        let mut on_path = vec![false; n];
        on_path[start] = true;
        let mut stack: Vec<(usize, usize, f64)> = vec![(start, 0, 0.0)];
        while let Some(&mut (u, ref mut k, cost)) = stack.last_mut() {
            let Some(e) = edges.get(*k) else {
                on_path[u] = false;
                stack.pop();
                continue;
            };
            *k += 1;
            if e.from != u || e.to == u || e.to < start {
                continue;
            }
            if e.to == start {
                keep(cost + e.weight);
            } else if !on_path[e.to] {
                on_path[e.to] = true;
                stack.push((e.to, 0, cost + e.weight));
            }
        }
    }
    best
}

/// Directed arcs traversed by a witness, for display.
pub fn witness_arcs(legs: &[Leg]) -> Vec<DirectedArc> {
    legs.iter()
        .map(|l| if l.dir == "fwd" { DirectedArc::forward(l.arc_id) } else { DirectedArc::reverse(l.arc_id) })
        .collect()
}
