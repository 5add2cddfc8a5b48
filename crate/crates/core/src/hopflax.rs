//! Traces, Hopf–Lax solutions `u(x) = min_y g(y) + S_c(y, x)`, and the
//! numerical checks built on them: admissibility, the subsolution
//! criterion, the solution fixed point, and the comparison harness.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::critical::{self, AubryItem, AubryStructure, CriticalError};
use crate::document::{ArcFieldDocument, FieldDocument, PointDocument, TraceDocument};
use crate::hamiltonian::FieldError;
use crate::network::{ArcId, DirectedArc, NetworkError, NetworkPoint, VertexId};
use crate::quadrature::Quadrature;
use crate::semidistance::{self, LevelGraph};
use crate::Instance;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("trace is empty")]
    EmptyTrace,
    #[error("trace is not admissible: g({to}) − g({from}) exceeds S({from}, {to}) by {violation:e}")]
    InadmissibleTrace { violation: f64, from: String, to: String },
    #[error("negative cycle of cost {cost:e} at level {level}")]
    NegativeCycle { level: f64, cost: f64 },
    #[error("{0} cannot be reached from the trace")]
    Unreachable(String),
    #[error("field does not match the network: {0}")]
    InconsistentField(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Critical(#[from] CriticalError),
}

/// A piece of a closed set `Γ′`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DomainItem {
    Point(NetworkPoint),
    /// Closed interval of the listed parameter.
    Interval { arc: ArcId, s: [f64; 2] },
}

impl DomainItem {
    pub fn from_aubry(aubry: &AubryStructure) -> Vec<DomainItem> {
        aubry
            .items()
            .map(|item| match item {
                AubryItem::Vertex { id, .. } => DomainItem::Point(NetworkPoint::Vertex(*id)),
                AubryItem::Interval { id, interval, .. } => DomainItem::Interval { arc: *id, s: *interval },
            })
            .collect()
    }
}

/// Boundary data `g` on a closed set `Γ′`, reduced to point constraints.
#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub constraints: Vec<(NetworkPoint, f64)>,
    pub domain: Vec<DomainItem>,
}

fn grid_node(grid: usize, i: usize) -> f64 {
    i as f64 / (grid - 1) as f64
}

/// Indices of grid nodes inside `[s1, s2]`.
fn nodes_within(grid: usize, s1: f64, s2: f64) -> impl Iterator<Item = usize> {
    let lo = (s1 * (grid - 1) as f64).floor().max(0.0) as usize;
    let hi = ((s2 * (grid - 1) as f64).ceil() as usize).min(grid - 1);
    (lo..=hi).filter(move |&i| {
        let t = grid_node(grid, i);
        s1 <= t && t <= s2
    })
}

fn on_grid(grid: usize, p: NetworkPoint) -> bool {
    match p {
        NetworkPoint::Vertex(_) => true,
        NetworkPoint::Interior { s, .. } => {
            let x = s * (grid - 1) as f64;
            x == x.round()
        }
    }
}

fn off_grid_value(inst: &Instance, u: &FieldOnNetwork, level: f64, p: NetworkPoint) -> Result<f64, SolveError> {
    if on_grid(u.grid, p) || u.grid != inst.config.grid {
        return Ok(u.value_at(p));
    }
    let from_p = hopf_lax(inst, level, &[(p, 0.0)])?;
    let best = u.zip_with(&from_p, |a, b| a - b).values().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    Ok(if best.is_finite() { best } else { u.value_at(p) })
}

fn push_unique(list: &mut Vec<(NetworkPoint, f64)>, p: NetworkPoint, v: f64) {
    if let Some(entry) = list.iter_mut().find(|(q, _)| *q == p) {
        entry.1 = entry.1.min(v);
    } else {
        list.push((p, v));
    }
}

impl Trace {
    pub fn from_document(inst: &Instance, doc: &TraceDocument) -> Result<Trace, SolveError> {
        let net = &inst.network;
        let grid = inst.config.grid;
        let mut constraints = Vec::new();
        let mut domain = Vec::new();
        for point in &doc.points {
            let p = match &point.at {
                PointDocument::Vertex { vertex } => NetworkPoint::Vertex(inst.vertex_named(&vertex.0)?),
                PointDocument::Interior { arc, s } => net.canonical_point(DirectedArc::forward(inst.arc_named(&arc.0)?), *s)?,
            };
            push_unique(&mut constraints, p, point.value);
            domain.push(DomainItem::Point(p));
        }
        for interval in &doc.intervals {
            let arc = inst.arc_named(&interval.arc.0)?;
            let [s1, s2] = interval.s;
            for s in [s1, s2] {
                if !(0.0..=1.0).contains(&s) {
                    return Err(NetworkError::ParameterOutOfRange(s).into());
                }
            }
            let v = &interval.values;
            if s1 > s2 || v.is_empty() || (s1 < s2 && v.len() < 2) {
                return Err(SolveError::InconsistentField(format!("interval on `{}` needs s1 ≤ s2 and enough samples", interval.arc)));
            }
            let sample = |s: f64| -> f64 {
                if v.len() == 1 || s2 == s1 {
                    return v[0];
                }
                let x = ((s - s1) / (s2 - s1)).clamp(0.0, 1.0) * (v.len() - 1) as f64;
                let k = (x.floor() as usize).min(v.len() - 2);
                v[k] + (x - k as f64) * (v[k + 1] - v[k])
            };
            let mut params: Vec<f64> = vec![s1, s2];
            params.extend(nodes_within(grid, s1, s2).map(|i| grid_node(grid, i)));
            for s in params {
                push_unique(&mut constraints, net.point_on(arc, s), sample(s));
            }
            domain.push(DomainItem::Interval { arc, s: [s1, s2] });
        }
        Ok(Trace { constraints, domain })
    }

    /// Restriction of a sampled field to `domain`, using grid nodes only
    /// (an interval holding no grid node contributes its midpoint). Off-grid
    /// points take the linearly interpolated value.
    pub fn restrict(inst: &Instance, u: &FieldOnNetwork, domain: &[DomainItem]) -> Trace {
        Self::restrict_with(inst, u, domain, |p| Ok::<_, SolveError>(u.value_at(p))).expect("interpolation cannot fail")
    }

    /// Like [`Trace::restrict`], but an off-grid point `x` takes the value
    /// `max_y u(y) − S_level(x, y)` over the grid samples `y`. For a solution
    /// whose value at `x` is attained from `x` this is exact, and the
    /// constraint never lowers `u` at a sample.
    pub fn restrict_at_level(inst: &Instance, u: &FieldOnNetwork, level: f64, domain: &[DomainItem]) -> Result<Trace, SolveError> {
        Self::restrict_with(inst, u, domain, |p| off_grid_value(inst, u, level, p))
    }

    fn restrict_with<E>(inst: &Instance, u: &FieldOnNetwork, domain: &[DomainItem], mut off_grid: impl FnMut(NetworkPoint) -> Result<f64, E>) -> Result<Trace, E> {
        let net = &inst.network;
        let mut constraints = Vec::new();
        for item in domain {
            match *item {
                DomainItem::Point(p) => push_unique(&mut constraints, p, off_grid(p)?),
                DomainItem::Interval { arc, s: [s1, s2] } => {
                    let mut any = false;
                    for i in nodes_within(u.grid, s1, s2) {
                        any = true;
                        let p = net.point_on(arc, grid_node(u.grid, i));
                        push_unique(&mut constraints, p, u.arcs[arc.0][i]);
                    }
                    if !any {
                        let p = net.point_on(arc, 0.5 * (s1 + s2));
                        push_unique(&mut constraints, p, off_grid(p)?);
                    }
                }
            }
        }
        Ok(Trace { constraints, domain: domain.to_vec() })
    }

    pub fn sup_norm(&self) -> f64 {
        self.constraints.iter().fold(0.0, |m, (_, v)| m.max(v.abs()))
    }

    /// Constraints lying on `aubry`.
    pub fn on_aubry(&self, inst: &Instance, aubry: &AubryStructure) -> Trace {
        Trace {
            constraints: self.constraints.iter().copied().filter(|&(p, _)| aubry.contains(inst, p)).collect(),
            domain: DomainItem::from_aubry(aubry),
        }
    }
}

/// A continuous function sampled on a uniform per-arc grid, with vertex
/// values; arc endpoint samples equal the incident vertex values.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldOnNetwork {
    pub grid: usize,
    pub arcs: Vec<Vec<f64>>,
    pub vertices: Vec<f64>,
}

impl FieldOnNetwork {
    pub fn from_fn(inst: &Instance, grid: usize, mut f: impl FnMut(NetworkPoint) -> f64) -> FieldOnNetwork {
        let net = &inst.network;
        let vertices: Vec<f64> = net.vertex_ids().map(|v| f(NetworkPoint::Vertex(v))).collect();
        let arcs = net
            .arc_ids()
            .map(|a| {
                let arc = net.arc(a);
                (0..grid)
                    .map(|i| match i {
                        0 => vertices[arc.tail.0],
                        _ if i == grid - 1 => vertices[arc.head.0],
                        _ => f(NetworkPoint::Interior { arc: a, s: grid_node(grid, i) }),
                    })
                    .collect()
            })
            .collect();
        FieldOnNetwork { grid, arcs, vertices }
    }

    pub fn constant(inst: &Instance, grid: usize, value: f64) -> FieldOnNetwork {
        FieldOnNetwork::from_fn(inst, grid, |_| value)
    }

    pub fn value_at(&self, p: NetworkPoint) -> f64 {
        match p {
            NetworkPoint::Vertex(v) => self.vertices[v.0],
            NetworkPoint::Interior { arc, s } => {
                let row = &self.arcs[arc.0];
                let x = s * (self.grid - 1) as f64;
                let k = (x.floor() as usize).min(self.grid - 2);
                let t = x - k as f64;
                if t == 0.0 {
                    row[k]
                } else {
                    row[k] + t * (row[k + 1] - row[k])
                }
            }
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.arcs.iter().flatten().copied().chain(self.vertices.iter().copied())
    }

    /// `max |self − other|` over all samples, with the sample attaining it.
    pub fn max_deviation(&self, other: &FieldOnNetwork) -> (f64, Option<(usize, usize)>) {
        let mut worst = (0.0, None);
        for (a, (x, y)) in self.arcs.iter().zip(&other.arcs).enumerate() {
            for (i, (p, q)) in x.iter().zip(y).enumerate() {
                let d = (p - q).abs();
                if d > worst.0 || d.is_nan() {
                    worst = (d, Some((a, i)));
                }
            }
        }
        worst
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> FieldOnNetwork {
        FieldOnNetwork {
            grid: self.grid,
            arcs: self.arcs.iter().map(|r| r.iter().map(|&v| f(v)).collect()).collect(),
            vertices: self.vertices.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &FieldOnNetwork, mut f: impl FnMut(f64, f64) -> f64) -> FieldOnNetwork {
        FieldOnNetwork {
            grid: self.grid,
            arcs: self.arcs.iter().zip(&other.arcs).map(|(r, q)| r.iter().zip(q).map(|(&a, &b)| f(a, b)).collect()).collect(),
            vertices: self.vertices.iter().zip(&other.vertices).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn to_document(&self, inst: &Instance, config: Option<serde_json::Value>) -> FieldDocument {
        let net = &inst.network;
        let s_grid: Vec<f64> = (0..self.grid).map(|i| grid_node(self.grid, i)).collect();
        FieldDocument {
            arcs: net
                .arc_ids()
                .map(|a| ArcFieldDocument { arc: net.arc(a).name.as_str().into(), s_grid: s_grid.clone(), values: self.arcs[a.0].clone() })
                .collect(),
            vertices: net.vertex_ids().map(|v| (net.vertex(v).name.clone(), self.vertices[v.0])).collect::<BTreeMap<_, _>>(),
            config,
        }
    }

    /// Reads a field document; every arc must be sampled on the same uniform
    /// grid and its endpoint samples must match the vertex values.
    pub fn from_document(inst: &Instance, doc: &FieldDocument) -> Result<FieldOnNetwork, SolveError> {
        let net = &inst.network;
        let bad = |m: String| SolveError::InconsistentField(m);
        let mut vertices = vec![f64::NAN; net.vertices().len()];
        for (name, &value) in &doc.vertices {
            vertices[inst.vertex_named(name)?.0] = value;
        }
        if let Some(v) = net.vertex_ids().find(|v| vertices[v.0].is_nan()) {
            return Err(bad(format!("missing value for vertex `{}`", net.vertex(v).name)));
        }
        let grid = doc.arcs.first().map(|a| a.s_grid.len()).ok_or_else(|| bad("no arcs".into()))?;
        if grid < 2 {
            return Err(bad("arc grids need at least two samples".into()));
        }
        let mut arcs: Vec<Option<Vec<f64>>> = vec![None; net.arcs().len()];
        for entry in &doc.arcs {
            let id = inst.arc_named(&entry.arc.0)?;
            if entry.s_grid.len() != grid || entry.values.len() != grid {
                return Err(bad(format!("arc `{}` must carry {grid} samples", entry.arc)));
            }
            if entry.s_grid.iter().enumerate().any(|(i, &s)| (s - grid_node(grid, i)).abs() > 1e-12) {
                return Err(bad(format!("arc `{}` is not sampled on the uniform grid", entry.arc)));
            }
            let arc = net.arc(id);
            let scale = 1.0 + entry.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (i, v) in [(0, arc.tail), (grid - 1, arc.head)] {
                if (entry.values[i] - vertices[v.0]).abs() > 1e-9 * scale {
                    return Err(bad(format!("arc `{}` disagrees with vertex `{}`", entry.arc, net.vertex(v).name)));
                }
            }
            let mut values = entry.values.clone();
            values[0] = vertices[arc.tail.0];
            values[grid - 1] = vertices[arc.head.0];
            arcs[id.0] = Some(values);
        }
        let arcs = arcs
            .into_iter()
            .enumerate()
            .map(|(i, a)| a.ok_or_else(|| bad(format!("missing samples for arc `{}`", net.arc(ArcId(i)).name))))
            .collect::<Result<_, _>>()?;
        Ok(FieldOnNetwork { grid, arcs, vertices })
    }

    /// `(arc, s, value)` rows for plotting.
    pub fn to_csv(&self, inst: &Instance) -> String {
        let mut out = String::from("arc,s,value\n");
        for a in inst.network.arc_ids() {
            for (i, v) in self.arcs[a.0].iter().enumerate() {
                out.push_str(&format!("{},{},{}\n", inst.network.arc(a).name, grid_node(self.grid, i), v));
            }
        }
        out
    }
}

/// `min_y g(y) + S_a(y, ·)` over the constraint points at any level `a`
/// without negative cycles. No admissibility check.
pub fn hopf_lax(inst: &Instance, level: f64, constraints: &[(NetworkPoint, f64)]) -> Result<FieldOnNetwork, SolveError> {
    Ok(hopf_lax_with_nodes(inst, level, constraints)?.0)
}

type NodeValues = Vec<(f64, Option<usize>)>;

/// Hopf–Lax field together with the values at the constraint nodes and the
/// index of the constraint each value comes from.
fn hopf_lax_with_nodes(inst: &Instance, level: f64, constraints: &[(NetworkPoint, f64)]) -> Result<(FieldOnNetwork, NodeValues), SolveError> {
    if constraints.is_empty() {
        return Err(SolveError::EmptyTrace);
    }
    let net = &inst.network;
    let cfg = &inst.config;
    let grid = cfg.grid;
    let points: Vec<NetworkPoint> = constraints.iter().map(|c| c.0).collect();
    let graph = LevelGraph::build(net, &inst.field, cfg, level, &points)?;
    if let Some(cyc) = graph.has_negative_cycle() {
        return Err(SolveError::NegativeCycle { level, cost: cyc.cost });
    }
    let sources: Vec<(usize, f64)> = constraints.iter().map(|&(p, v)| (graph.split.node_of(p).expect("constraint is a node"), v)).collect();
    let (paths, _, _) = graph.sweep(&sources);
    if let Some(v) = (0..graph.node_count()).find(|&v| !paths.dist[v].is_finite()) {
        return Err(SolveError::Unreachable(net.describe(graph.split.nodes[v])));
    }

    let quad = Quadrature::new(cfg.panels, grid);
    let fwd_arc = DirectedArc::forward;
    let mut arcs: Vec<Vec<f64>> = vec![vec![f64::INFINITY; grid]; net.arcs().len()];
    for piece in &graph.split.pieces {
        let arc = piece.arc;
        let (t0, t1) = (piece.s0, piece.s1);
        let (u0, u1) = (paths.dist[piece.from], paths.dist[piece.to]);
        let ahead = quad.cumulative(|r| inst.field.sigma_plus(fwd_arc(arc), level, r), t0, t1)?;
        let back = quad.cumulative_from_right(|r| inst.field.sigma_minus(fwd_arc(arc), level, r), t0, t1)?;
        let row = &mut arcs[arc.0];
        for ((t, a), (_, b)) in ahead.iter().zip(&back) {
            let x = t * (grid - 1) as f64;
            let i = x.round() as usize;
            if grid_node(grid, i) != *t {
                continue;
            }
            let mut best = row[i];
            if let Some(a) = a {
                best = best.min(u0 + a);
            }
            if let Some(b) = b {
                best = best.min(u1 - b);
            }
            if *t == t0 {
                best = best.min(u0);
            }
            if *t == t1 {
                best = best.min(u1);
            }
            row[i] = best;
        }
    }
    let vertices: Vec<f64> = net.vertex_ids().map(|v| paths.dist[v.0]).collect();
    for a in net.arc_ids() {
        let arc = net.arc(a);
        arcs[a.0][0] = vertices[arc.tail.0];
        arcs[a.0][grid - 1] = vertices[arc.head.0];
        if let Some(i) = arcs[a.0].iter().position(|v| !v.is_finite()) {
            return Err(SolveError::Unreachable(net.describe(net.point_on(a, grid_node(grid, i)))));
        }
    }
    let nodes = sources.iter().map(|&(n, _)| (paths.dist[n], paths.origin[n])).collect();
    Ok((FieldOnNetwork { grid, arcs, vertices }, nodes))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    pub max_violation: f64,
    pub tol: f64,
    /// `(y, x)` with the largest `g(x) − g(y) − S(y, x)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst: Option<(String, String)>,
}

/// `g(x) − g(y) ≤ S_a(y, x)` over all ordered pairs, evaluated by one
/// multi-source sweep: the largest violation at `x` is `g(x) − u(x)`.
pub fn check_admissible(inst: &Instance, level: f64, trace: &Trace) -> Result<AdmissibilityReport, SolveError> {
    let (_, nodes) = hopf_lax_with_nodes(inst, level, &trace.constraints)?;
    let tol = inst.config.pair_tol * (1.0 + trace.sup_norm());
    let mut report = AdmissibilityReport { admissible: true, max_violation: 0.0, tol, worst: None };
    for (k, (&(x, g), &(u, origin))) in trace.constraints.iter().zip(&nodes).enumerate() {
        let violation = g - u;
        if violation > report.max_violation {
            let y = origin.unwrap_or(k);
            report.max_violation = violation;
            report.worst = Some((inst.network.describe(trace.constraints[y].0), inst.network.describe(x)));
        }
    }
    report.admissible = report.max_violation <= tol;
    Ok(report)
}

/// Pairwise evaluation of admissibility through individual semidistance
/// queries; quadratic in the number of constraints.
pub fn check_admissible_pairwise(inst: &Instance, level: f64, trace: &Trace) -> Result<f64, semidistance::DistanceError> {
    let mut worst: f64 = 0.0;
    for &(y, gy) in &trace.constraints {
        for &(x, gx) in &trace.constraints {
            let (s, _) = semidistance::semidistance(&inst.network, &inst.field, &inst.config, level, y, x)?;
            worst = worst.max(gx - gy - s);
        }
    }
    Ok(worst)
}

/// Maximal subsolution agreeing with an admissible trace at level `c`.
pub fn solve(inst: &Instance, c: f64, trace: &Trace) -> Result<FieldOnNetwork, SolveError> {
    let report = check_admissible(inst, c, trace)?;
    if !report.admissible {
        let (from, to) = report.worst.unwrap_or_default();
        return Err(SolveError::InadmissibleTrace { violation: report.max_violation, from, to });
    }
    hopf_lax(inst, c, &trace.constraints)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubsolutionReport {
    pub passed: bool,
    pub level: f64,
    pub max_violation: f64,
    pub tol: f64,
    pub pairs_checked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst: Option<String>,
}

impl SubsolutionReport {
    fn record(&mut self, violation: f64, what: impl FnOnce() -> String) {
        self.pairs_checked += 1;
        if violation > self.max_violation || (violation.is_nan() && !self.max_violation.is_nan()) {
            self.max_violation = violation;
            self.worst = Some(what());
        }
    }
}

/// Number of random points used for the long-range pairs.
const LONG_RANGE_SAMPLES: usize = 12;

/// Discrete subsolution test at level `a`: every adjacent grid pair in both
/// directions against the cell cost, plus all pairs among a fixed random
/// sample of grid points (and the vertices) against `S_a`.
pub fn check_subsolution(inst: &Instance, w: &FieldOnNetwork, level: f64) -> Result<SubsolutionReport, SolveError> {
    use rand::SeedableRng;
    let net = &inst.network;
    let grid = w.grid;
    let tol = inst.config.pair_tol * (1.0 + w.sup_norm());
    let mut report = SubsolutionReport { passed: true, level, max_violation: f64::NEG_INFINITY, tol, pairs_checked: 0, worst: None };
    let quad = Quadrature::new(inst.config.panels, grid);
    for a in net.arc_ids() {
        let row = &w.arcs[a.0];
        let name = &net.arc(a).name;
        let fwd = DirectedArc::forward(a);
        for i in 0..grid - 1 {
            let (s1, s2) = (grid_node(grid, i), grid_node(grid, i + 1));
            let ahead = quad.integrate(|r| inst.field.sigma_plus(fwd, level, r), s1, s2)?;
            let back = quad.integrate(|r| inst.field.sigma_minus(fwd, level, r), s1, s2)?.map(|v| -v);
            let up = match ahead {
                Some(cost) => row[i + 1] - row[i] - cost,
                None => f64::INFINITY,
            };
            report.record(up, || format!("{name}: {s1} → {s2}"));
            let down = match back {
                Some(cost) => row[i] - row[i + 1] - cost,
                None => f64::INFINITY,
            };
            report.record(down, || format!("{name}: {s2} → {s1}"));
        }
    }

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5u64 << 32 | grid as u64);
    let mut samples: Vec<NetworkPoint> = net.vertex_ids().map(NetworkPoint::Vertex).collect();
    for _ in 0..LONG_RANGE_SAMPLES {
        let a = ArcId(rng.gen_range(0..net.arcs().len()));
        let i = rng.gen_range(1..grid - 1);
        let p = net.point_on(a, grid_node(grid, i));
        if !samples.contains(&p) {
            samples.push(p);
        }
    }
    let graph = LevelGraph::build(net, &inst.field, &inst.config, level, &samples)?;
    if let Some(cyc) = graph.has_negative_cycle() {
        report.record(-cyc.cost, || format!("negative cycle of cost {:e} at level {level}", cyc.cost));
    } else {
        for &y in &samples {
            let ny = graph.split.node_of(y).expect("sample is a node");
            let (paths, _, _) = graph.sweep(&[(ny, 0.0)]);
            for &x in &samples {
                let s = paths.dist[graph.split.node_of(x).expect("sample is a node")];
                let violation = if s.is_finite() { w.value_at(x) - w.value_at(y) - s } else { f64::INFINITY };
                report.record(violation, || format!("{} → {}", net.describe(y), net.describe(x)));
            }
        }
    }
    report.passed = report.max_violation <= tol;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixedPointReport {
    pub passed: bool,
    pub level: f64,
    pub max_deviation: f64,
    pub tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub subsolution: SubsolutionReport,
}

/// `u` solves the critical equation iff it equals the Hopf–Lax re-solve of
/// its own restriction to the Aubry set.
pub fn check_solution_fixed_point(inst: &Instance, u: &FieldOnNetwork, c: f64, aubry: &AubryStructure) -> Result<FixedPointReport, SolveError> {
    let subsolution = check_subsolution(inst, u, c)?;
    let domain = DomainItem::from_aubry(aubry);
    let trace = Trace::restrict_at_level(inst, u, c, &domain)?;
    let admissible = check_admissible(inst, c, &trace)?;
    if !admissible.admissible {
        let (from, to) = admissible.worst.unwrap_or_default();
        return Err(SolveError::InadmissibleTrace { violation: admissible.max_violation, from, to });
    }
    compare_with_resolve(inst, u, c, &trace, subsolution)
}

fn compare_with_resolve(inst: &Instance, u: &FieldOnNetwork, level: f64, trace: &Trace, subsolution: SubsolutionReport) -> Result<FixedPointReport, SolveError> {
    let tol = inst.config.solution_tol * (1.0 + u.sup_norm());
    let resolved = hopf_lax(inst, level, &trace.constraints)?;
    let (max_deviation, at) = u.max_deviation(&resolved);
    let worst = at.map(|(a, i)| inst.network.describe(inst.network.point_on(ArcId(a), grid_node(u.grid, i))));
    let passed = max_deviation <= tol && subsolution.passed;
    let reason = if !subsolution.passed {
        Some("not a subsolution".to_owned())
    } else if max_deviation > tol {
        Some("differs from the re-solve of its Aubry restriction".to_owned())
    } else {
        None
    };
    Ok(FixedPointReport { passed, level, max_deviation, tol, worst, reason, subsolution })
}

/// Fixed-point check at an arbitrary level `a`: fails when the level has
/// negative cycles, when no uniqueness set exists there, or when `u` is not
/// reproduced by re-solving from that set.
pub fn check_fixed_point_at_level(inst: &Instance, u: &FieldOnNetwork, level: f64, a0: f64) -> Result<FixedPointReport, SolveError> {
    let subsolution = check_subsolution(inst, u, level)?;
    let failed = |reason: &str, subsolution: SubsolutionReport| FixedPointReport {
        passed: false,
        level,
        max_deviation: f64::INFINITY,
        tol: inst.config.solution_tol * (1.0 + u.sup_norm()),
        worst: None,
        reason: Some(reason.to_owned()),
        subsolution,
    };
    let set = match critical::uniqueness_set_at_level(inst, level, a0) {
        Ok(set) => set,
        Err(CriticalError::NegativeCycle { .. }) => return Ok(failed("negative cycle: no subsolutions at this level", subsolution)),
        Err(e) => return Err(e.into()),
    };
    if set.classes.is_empty() {
        return Ok(failed("no zero-cost cycles or degenerate points at this level", subsolution));
    }
    let trace = Trace::restrict_at_level(inst, u, level, &DomainItem::from_aubry(&set))?;
    if !check_admissible(inst, level, &trace)?.admissible {
        return Ok(failed("restriction is not an admissible trace", subsolution));
    }
    compare_with_resolve(inst, u, level, &trace, subsolution)
}

/// Random subsolution at `level`: Hopf–Lax field of `k` random grid points
/// carrying random values in `[−scale, scale]`.
pub fn random_subsolution<R: Rng>(inst: &Instance, level: f64, rng: &mut R, k: usize, scale: f64) -> Result<FieldOnNetwork, SolveError> {
    let net = &inst.network;
    let grid = inst.config.grid;
    let mut sources = Vec::with_capacity(k);
    for _ in 0..k.max(1) {
        let p = if rng.gen_bool(0.3) {
            NetworkPoint::Vertex(VertexId(rng.gen_range(0..net.vertices().len())))
        } else {
            net.point_on(ArcId(rng.gen_range(0..net.arcs().len())), grid_node(grid, rng.gen_range(1..grid - 1)))
        };
        push_unique(&mut sources, p, rng.gen_range(-scale..=scale));
    }
    hopf_lax(inst, level, &sources)
}

/// Random admissible trace on `domain`: the restriction of a random
/// subsolution.
pub fn random_admissible_trace<R: Rng>(inst: &Instance, level: f64, domain: &[DomainItem], rng: &mut R) -> Result<Trace, SolveError> {
    let k = rng.gen_range(1..=4);
    let z = random_subsolution(inst, level, rng, k, 1.0)?;
    Trace::restrict_at_level(inst, &z, level, domain)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HarnessReport {
    pub level: f64,
    pub trials: usize,
    pub violations: usize,
    /// Smallest `v − w` seen over all samples and trials.
    pub min_gap: f64,
    pub tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst: Option<String>,
}

impl HarnessReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// How the subsolution `w` of each comparison trial is produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubsolutionSource {
    /// Solve from a random admissible trace on `Γ′`.
    TraceOnDomain,
    /// Hopf–Lax field of random sources anywhere on the network.
    Random,
}

/// Comparison trials: `w` a subsolution, `v` the pointwise minimum of two
/// solutions from random admissible traces on `Γ′`, shifted so that
/// `v ≥ w` on `Γ′`; each trial checks `v ≥ w − tol` on every sample.
pub fn comparison_harness<R: Rng>(inst: &Instance, level: f64, domain: &[DomainItem], trials: usize, source: SubsolutionSource, rng: &mut R) -> Result<HarnessReport, SolveError> {
    let tol = inst.config.solution_tol;
    let mut report = HarnessReport { level, trials, violations: 0, min_gap: f64::INFINITY, tol, worst: None };
    let probe = FieldOnNetwork::constant(inst, inst.config.grid, 0.0);
    let on_domain: Vec<NetworkPoint> = Trace::restrict(inst, &probe, domain).constraints.into_iter().map(|c| c.0).collect();
    for trial in 0..trials {
        let w = match source {
            SubsolutionSource::TraceOnDomain => hopf_lax(inst, level, &random_admissible_trace(inst, level, domain, rng)?.constraints)?,
            SubsolutionSource::Random => {
                let k = rng.gen_range(1..=4);
                random_subsolution(inst, level, rng, k, 1.0)?
            }
        };
        let v1 = hopf_lax(inst, level, &random_admissible_trace(inst, level, domain, rng)?.constraints)?;
        let v2 = hopf_lax(inst, level, &random_admissible_trace(inst, level, domain, rng)?.constraints)?;
        let v = v1.zip_with(&v2, f64::min);
        let shift = on_domain.iter().map(|&p| w.value_at(p) - v.value_at(p)).fold(f64::NEG_INFINITY, f64::max);
        let v = v.map(|x| x + shift);
        let gap = v.zip_with(&w, |a, b| a - b);
        let (mut lowest, mut at) = (f64::INFINITY, None);
        for (a, row) in gap.arcs.iter().enumerate() {
            for (i, &g) in row.iter().enumerate() {
                if g < lowest {
                    lowest = g;
                    at = Some((a, i));
                }
            }
        }
        if lowest < report.min_gap {
            report.min_gap = lowest;
            report.worst = at.map(|(a, i)| format!("trial {trial}: {}", inst.network.describe(inst.network.point_on(ArcId(a), grid_node(w.grid, i)))));
        }
        if lowest < -tol {
            report.violations += 1;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::critical::{aubry_set, critical_value};
    use crate::testutil::*;
    use rand::SeedableRng;

    fn well_solution() -> (Instance, FieldOnNetwork) {
        let well = well_instance();
        let trace = Trace { constraints: vec![(NetworkPoint::Interior { arc: ArcId(0), s: 0.5 }, 0.0)], domain: vec![] };
        let u = solve(&well, 0.0, &trace).unwrap();
        (well, u)
    }

    #[test]
    fn well_solution_matches_hand_integral() {
        let (_, u) = well_solution();
        let err = u.arcs[0].iter().enumerate().map(|(i, v)| (v - (grid_node(u.grid, i) - 0.5).powi(2) / 2.0).abs()).fold(0.0, f64::max);
        assert!(err < 1e-6, "sup error {err}");
        assert!((u.vertices[0] - 0.125).abs() < 1e-9 && (u.vertices[1] - 0.125).abs() < 1e-9);
    }

    #[test]
    fn loop_constant_is_reproduced() {
        let lp = loop_instance();
        let crit = critical_value(&lp).unwrap();
        let aubry = aubry_set(&lp, &crit).unwrap();
        let five = FieldOnNetwork::constant(&lp, lp.config.grid, 5.0);
        let trace = Trace::restrict(&lp, &five, &DomainItem::from_aubry(&aubry));
        let u = solve(&lp, crit.c, &trace).unwrap();
        assert!(u.max_deviation(&five).0 < 1e-9);
    }

    #[test]
    fn off_grid_aubry_point_keeps_its_value() {
        // V = (s - 0.3)^2 peaks between grid nodes
        let inst = segment_instance(r#"{"family":"power","p":2,"V":{"kind":"poly","coeffs":[0.09,-0.6,1]}}"#);
        let crit = critical_value(&inst).unwrap();
        let aubry = aubry_set(&inst, &crit).unwrap();
        let domain = DomainItem::from_aubry(&aubry);
        let x = inst.network.point_on(ArcId(0), 0.3);
        let u = solve(&inst, crit.c, &Trace { constraints: vec![(x, 0.7)], domain: vec![] }).unwrap();
        let exact = Trace::restrict_at_level(&inst, &u, crit.c, &domain).unwrap();
        let interpolated = Trace::restrict(&inst, &u, &domain);
        assert_eq!(exact.constraints.len(), 1);
        assert!((exact.constraints[0].1 - 0.7).abs() < 1e-9);
        assert!((interpolated.constraints[0].1 - 0.7).abs() > 1e-7);
        assert!(check_solution_fixed_point(&inst, &u, crit.c, &aubry).unwrap().passed);
    }

    #[test]
    fn full_domain_returns_the_subsolution() {
        let tri = triangle_instance(r#"{"family":"power","p":2,"b":{"kind":"poly","coeffs":[0.2]}}"#);
        let crit = critical_value(&tri).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let g = random_subsolution(&tri, crit.c, &mut rng, 3, 1.0).unwrap();
        let all: Vec<DomainItem> = tri.network.arc_ids().map(|arc| DomainItem::Interval { arc, s: [0.0, 1.0] }).collect();
        let u = solve(&tri, crit.c, &Trace::restrict(&tri, &g, &all)).unwrap();
        assert!(u.max_deviation(&g).0 < 1e-9);
    }

    #[test]
    fn admissibility_examples() {
        let lp = loop_instance();
        let v = NetworkPoint::Vertex(VertexId(0));
        let half = NetworkPoint::Interior { arc: ArcId(0), s: 0.5 };
        let bad = Trace { constraints: vec![(v, 0.0), (half, 3.0)], domain: vec![] };
        let report = check_admissible(&lp, 2.0, &bad).unwrap();
        assert!(!report.admissible);
        assert!((report.max_violation - 3.0).abs() < 1e-9);
        assert!((check_admissible_pairwise(&lp, 2.0, &bad).unwrap() - report.max_violation).abs() < 1e-9);
        assert!(matches!(solve(&lp, 2.0, &bad), Err(SolveError::InadmissibleTrace { .. })));

        let constant = Trace { constraints: vec![(v, 1.0), (half, 1.0)], domain: vec![] };
        assert!(check_admissible(&lp, 2.0, &constant).unwrap().admissible);
        let single = Trace { constraints: vec![(half, 7.0)], domain: vec![] };
        assert!(check_admissible(&lp, 2.0, &single).unwrap().admissible);
        assert_eq!(solve(&lp, 2.0, &Trace { constraints: vec![], domain: vec![] }), Err(SolveError::EmptyTrace));
    }

    #[test]
    fn subsolution_examples() {
        let (well, u) = well_solution();
        assert!(check_subsolution(&well, &u, 0.0).unwrap().passed);
        let doubled = u.map(|v| 2.0 * v);
        let report = check_subsolution(&well, &doubled, 0.0).unwrap();
        assert!(!report.passed);
        let tri = triangle_instance(WELL_HAM);
        let flat = FieldOnNetwork::constant(&tri, tri.config.grid, 0.3);
        assert!(check_subsolution(&tri, &flat, 0.0).unwrap().passed);
    }

    #[test]
    fn fixed_point_examples() {
        let (well, u) = well_solution();
        let crit = critical_value(&well).unwrap();
        let aubry = aubry_set(&well, &crit).unwrap();
        assert!(check_solution_fixed_point(&well, &u, crit.c, &aubry).unwrap().passed);
        let flattened = u.map(|v| v.min(0.1));
        let report = check_solution_fixed_point(&well, &flattened, crit.c, &aubry).unwrap();
        assert!(report.subsolution.passed && !report.passed);

        let tri = triangle_instance(POWER_ABS);
        let crit = critical_value(&tri).unwrap();
        let aubry = aubry_set(&tri, &crit).unwrap();
        let flat = FieldOnNetwork::constant(&tri, tri.config.grid, -2.0);
        assert!(check_solution_fixed_point(&tri, &flat, crit.c, &aubry).unwrap().passed);
    }

    #[test]
    fn fixed_point_fails_off_critical_level() {
        let (well, u) = well_solution();
        let above = check_fixed_point_at_level(&well, &u, 0.1, 0.0).unwrap();
        assert!(!above.passed);
        let lp = loop_instance();
        let five = FieldOnNetwork::constant(&lp, lp.config.grid, 5.0);
        assert!(!check_fixed_point_at_level(&lp, &five, 1.9, 0.0).unwrap().passed);
        assert!(!check_fixed_point_at_level(&lp, &five, 2.1, 0.0).unwrap().passed);
        assert!(check_fixed_point_at_level(&lp, &five, 2.0, 0.0).unwrap().passed);
    }

    #[test]
    fn harness_on_the_well() {
        let well = well_instance();
        let crit = critical_value(&well).unwrap();
        let aubry = aubry_set(&well, &crit).unwrap();
        let domain = DomainItem::from_aubry(&aubry);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let report = comparison_harness(&well, crit.c, &domain, 10, SubsolutionSource::TraceOnDomain, &mut rng).unwrap();
        assert!(report.passed(), "{report:?}");
        // translates of one profile: v − w is the constant shift
        assert!(report.min_gap.abs() < 1e-9);
    }

    #[test]
    fn field_document_round_trip() {
        let (well, u) = well_solution();
        let doc = u.to_document(&well, None);
        let back = FieldOnNetwork::from_document(&well, &doc).unwrap();
        assert_eq!(back, u);
        let mut broken = doc.clone();
        broken.vertices.insert("a".into(), 9.0);
        assert!(matches!(FieldOnNetwork::from_document(&well, &broken), Err(SolveError::InconsistentField(_))));
        assert!(u.to_csv(&well).starts_with("arc,s,value\ng,0,"));
    }

    #[test]
    fn trace_documents_sample_intervals() {
        let well = well_instance();
        let doc: TraceDocument = serde_json::from_str(r#"{"points":[{"at":{"vertex":"a"},"value":1}],"intervals":[{"arc":"g","s":[0.5,0.75],"values":[0,1]}]}"#).unwrap();
        let trace = Trace::from_document(&well, &doc).unwrap();
        // the vertex, both interval ends and the 63 interior grid nodes
        assert_eq!(trace.constraints.len(), 1 + 65);
        let at = |s: f64| trace.constraints.iter().find(|(p, _)| *p == NetworkPoint::Interior { arc: ArcId(0), s }).unwrap().1;
        assert!((at(0.625) - 0.5).abs() < 1e-15);
    }
}
