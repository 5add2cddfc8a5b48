//! Embedded networks: vertices, oriented arcs, canonical points, the
//! geodesic metric, and splitting of arcs at interior points.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::document::{GeometryDocument, Ident, NetworkDocument};
use crate::geometry::{self, Geometry};
use crate::shortest;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct VertexId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ArcId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Orientation {
    Forward,
    Reverse,
}

impl Orientation {
    pub fn flip(self) -> Self {
        match self {
            Orientation::Forward => Orientation::Reverse,
            Orientation::Reverse => Orientation::Forward,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Orientation::Forward => "fwd",
            Orientation::Reverse => "rev",
        }
    }
}

/// An arc together with the orientation it is traversed in; `Reverse` is
/// the inverse arc `s ↦ γ(1 − s)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DirectedArc {
    pub arc: ArcId,
    pub orientation: Orientation,
}

impl DirectedArc {
    pub fn forward(arc: ArcId) -> Self {
        DirectedArc { arc, orientation: Orientation::Forward }
    }

    pub fn reverse(arc: ArcId) -> Self {
        DirectedArc { arc, orientation: Orientation::Reverse }
    }

    pub fn reversed(self) -> Self {
        DirectedArc { arc: self.arc, orientation: self.orientation.flip() }
    }

    /// Parameter on the listed orientation corresponding to `s` on this one.
    pub fn to_preferred(self, s: f64) -> f64 {
        match self.orientation {
            Orientation::Forward => s,
            Orientation::Reverse => 1.0 - s,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Vertex {
    pub name: String,
    pub coords: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Arc {
    pub name: String,
    pub tail: VertexId,
    pub head: VertexId,
    pub geometry: Geometry,
}

impl Arc {
    pub fn is_loop(&self) -> bool {
        self.tail == self.head
    }
}

/// A point of the network. Interior points always refer to the listed
/// orientation of their arc, so equal points compare equal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NetworkPoint {
    Vertex(VertexId),
    Interior { arc: ArcId, s: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("network has no arcs")]
    Empty,
    #[error("duplicate identifier `{0}`")]
    DuplicateId(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown arc `{0}`")]
    UnknownArc(String),
    #[error("parameter {0} outside [0, 1]")]
    ParameterOutOfRange(f64),
    #[error("coordinate dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid geometry on arc `{arc}`: {reason}")]
    InvalidGeometry { arc: String, reason: String },
    #[error("arc `{arc}` is not regular: {reason}")]
    NonRegularArc { arc: String, reason: String },
    #[error("arc `{0}` intersects itself")]
    SelfIntersection(String),
    #[error("arcs `{first}` and `{second}` meet away from a shared vertex near {at:?}")]
    OverlapViolation { first: String, second: String, at: Vec<f64> },
    #[error("arc `{arc}` does not end at vertex `{vertex}` (gap {gap:e})")]
    EndpointMismatch { arc: String, vertex: String, gap: f64 },
    #[error("vertex `{0}` is not an endpoint of any arc")]
    IsolatedVertex(String),
    #[error("network is disconnected")]
    Disconnected,
}

/// Immutable embedded network.
#[derive(Clone, Debug)]
pub struct Network {
    vertices: Vec<Vertex>,
    arcs: Vec<Arc>,
    /// `Γ_x`: directed arcs whose terminal point is `x`.
    incidence: Vec<Vec<DirectedArc>>,
    vertex_index: HashMap<String, VertexId>,
    arc_index: HashMap<String, ArcId>,
    diameter: f64,
}

/// Minimum number of sample points for sampled geometries.
pub const MIN_SAMPLES: usize = 33;

impl Network {
    pub fn build(doc: &NetworkDocument) -> Result<Network, NetworkError> {
        if doc.arcs.is_empty() {
            return Err(NetworkError::Empty);
        }
        let dim = doc.vertices.first().map(|v| v.coords.len()).unwrap_or(0);
        if dim == 0 {
            return Err(NetworkError::Dimension("vertices need at least one coordinate".into()));
        }
        let mut vertex_index = HashMap::new();
        let mut vertices = Vec::with_capacity(doc.vertices.len());
        for v in &doc.vertices {
            if v.coords.len() != dim {
                return Err(NetworkError::Dimension(format!("vertex `{}` has {} coordinates, expected {dim}", v.id, v.coords.len())));
            }
            if vertex_index.insert(v.id.0.clone(), VertexId(vertices.len())).is_some() {
                return Err(NetworkError::DuplicateId(v.id.0.clone()));
            }
            vertices.push(Vertex { name: v.id.0.clone(), coords: v.coords.clone() });
        }
        let lookup = |id: &Ident| vertex_index.get(&id.0).copied().ok_or_else(|| NetworkError::UnknownVertex(id.0.clone()));

        let mut arc_index = HashMap::new();
        let mut arcs = Vec::with_capacity(doc.arcs.len());
        for a in &doc.arcs {
            let tail = lookup(&a.from)?;
            let head = lookup(&a.to)?;
            if arc_index.insert(a.id.0.clone(), ArcId(arcs.len())).is_some() {
                return Err(NetworkError::DuplicateId(a.id.0.clone()));
            }
            let geometry = build_geometry(&a.id.0, &a.geometry, &vertices[tail.0].coords, &vertices[head.0].coords, dim)?;
            arcs.push(Arc { name: a.id.0.clone(), tail, head, geometry });
        }

        let diameter = bounding_diameter(vertices.iter().map(|v| v.coords.as_slice()).chain(arcs.iter().flat_map(|a| match &a.geometry {
            Geometry::Samples { points } => points.iter().map(|p| p.as_slice()).collect::<Vec<_>>(),
            _ => Vec::new(),
        })));
        let coord_tol = 1e-9 * (1.0 + diameter);

        for arc in &arcs {
            check_regular(arc)?;
            for (s, v) in [(0.0, arc.tail), (1.0, arc.head)] {
                let gap = geometry::dist(&arc.geometry.position(s), &vertices[v.0].coords);
                if gap > coord_tol {
                    return Err(NetworkError::EndpointMismatch { arc: arc.name.clone(), vertex: vertices[v.0].name.clone(), gap });
                }
            }
        }

        let mut incidence = vec![Vec::new(); vertices.len()];
        for (i, arc) in arcs.iter().enumerate() {
            incidence[arc.head.0].push(DirectedArc::forward(ArcId(i)));
            incidence[arc.tail.0].push(DirectedArc::reverse(ArcId(i)));
        }
        if let Some(v) = incidence.iter().position(|inc| inc.is_empty()) {
            return Err(NetworkError::IsolatedVertex(vertices[v].name.clone()));
        }

        let network = Network { vertices, arcs, incidence, vertex_index, arc_index, diameter };
        network.check_connected()?;
        network.check_overlaps(1e-9 * diameter.max(f64::MIN_POSITIVE))?;
        Ok(network)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn vertex(&self, id: VertexId) -> &Vertex {
        &self.vertices[id.0]
    }

    pub fn arc(&self, id: ArcId) -> &Arc {
        &self.arcs[id.0]
    }

    pub fn arc_ids(&self) -> impl Iterator<Item = ArcId> {
        (0..self.arcs.len()).map(ArcId)
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> {
        (0..self.vertices.len()).map(VertexId)
    }

    pub fn arc_by_name(&self, name: &str) -> Option<ArcId> {
        self.arc_index.get(name).copied()
    }

    pub fn vertex_by_name(&self, name: &str) -> Option<VertexId> {
        self.vertex_index.get(name).copied()
    }

    /// `Γ_x`: directed arcs ending at `x`, reversed orientations included.
    pub fn incoming(&self, x: VertexId) -> &[DirectedArc] {
        &self.incidence[x.0]
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn tail(&self, d: DirectedArc) -> VertexId {
        let arc = self.arc(d.arc);
        match d.orientation {
            Orientation::Forward => arc.tail,
            Orientation::Reverse => arc.head,
        }
    }

    pub fn head(&self, d: DirectedArc) -> VertexId {
        self.tail(d.reversed())
    }

    /// Canonical form of the point at parameter `s` of a directed arc.
    pub fn canonical_point(&self, d: DirectedArc, s: f64) -> Result<NetworkPoint, NetworkError> {
        if d.arc.0 >= self.arcs.len() {
            return Err(NetworkError::UnknownArc(format!("#{}", d.arc.0)));
        }
        if !(0.0..=1.0).contains(&s) {
            return Err(NetworkError::ParameterOutOfRange(s));
        }
        let t = d.to_preferred(s);
        let arc = self.arc(d.arc);
        Ok(if t == 0.0 {
            NetworkPoint::Vertex(arc.tail)
        } else if t == 1.0 {
            NetworkPoint::Vertex(arc.head)
        } else {
            NetworkPoint::Interior { arc: d.arc, s: t }
        })
    }

    pub fn point_on(&self, arc: ArcId, s: f64) -> NetworkPoint {
        self.canonical_point(DirectedArc::forward(arc), s.clamp(0.0, 1.0)).expect("valid arc")
    }

    pub fn position(&self, p: NetworkPoint) -> Vec<f64> {
        match p {
            NetworkPoint::Vertex(v) => self.vertex(v).coords.clone(),
            NetworkPoint::Interior { arc, s } => self.arc(arc).geometry.position(s),
        }
    }

    pub fn describe(&self, p: NetworkPoint) -> String {
        match p {
            NetworkPoint::Vertex(v) => format!("vertex {}", self.vertex(v).name),
            NetworkPoint::Interior { arc, s } => format!("{}({s})", self.arc(arc).name),
        }
    }

    /// Splits every arc at the interior points among `extras`.
    pub fn split(&self, extras: &[NetworkPoint]) -> SplitNetwork {
        let mut nodes: Vec<NetworkPoint> = self.vertex_ids().map(NetworkPoint::Vertex).collect();
        let mut cuts: Vec<Vec<(f64, usize)>> = vec![Vec::new(); self.arcs.len()];
        for &p in extras {
            if let NetworkPoint::Interior { arc, s } = p {
                if cuts[arc.0].iter().any(|&(t, _)| t == s) {
                    continue;
                }
                cuts[arc.0].push((s, nodes.len()));
                nodes.push(p);
            }
        }
        let mut pieces = Vec::new();
        for (i, arc) in self.arcs.iter().enumerate() {
            let list = &mut cuts[i];
            list.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut prev = (0.0, arc.tail.0);
            for &(s, node) in list.iter() {
                pieces.push(Piece { arc: ArcId(i), s0: prev.0, s1: s, from: prev.1, to: node });
                prev = (s, node);
            }
            pieces.push(Piece { arc: ArcId(i), s0: prev.0, s1: 1.0, from: prev.1, to: arc.head.0 });
        }
        SplitNetwork { nodes, pieces }
    }

    /// Geodesic distance: shortest path over arc lengths, arcs split at
    /// interior endpoints.
    pub fn geodesic_distance(&self, x: NetworkPoint, y: NetworkPoint) -> f64 {
        if x == y {
            return 0.0;
        }
        let split = self.split(&[x, y]);
        let mut edges = Vec::with_capacity(2 * split.pieces.len());
        for piece in &split.pieces {
            let len = self.arc(piece.arc).geometry.length_between(piece.s0, piece.s1);
            edges.push(shortest::Edge { from: piece.from, to: piece.to, weight: len, tag: piece.arc.0 });
            edges.push(shortest::Edge { from: piece.to, to: piece.from, weight: len, tag: piece.arc.0 });
        }
        let src = split.node_of(x).expect("split contains x");
        let dst = split.node_of(y).expect("split contains y");
        let paths = shortest::bellman_ford(split.nodes.len(), &edges, &[(src, 0.0)], 0.0);
        paths.dist[dst]
    }

    fn check_connected(&self) -> Result<(), NetworkError> {
        let mut parent: Vec<usize> = (0..self.vertices.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for arc in &self.arcs {
            let (a, b) = (find(&mut parent, arc.tail.0), find(&mut parent, arc.head.0));
            parent[a] = b;
        }
        let root = find(&mut parent, 0);
        if (0..self.vertices.len()).all(|v| find(&mut parent, v) == root) {
            Ok(())
        } else {
            Err(NetworkError::Disconnected)
        }
    }

    /// Interiors of distinct arcs must avoid every other arc; contacts are
    /// allowed only at vertices shared by both arcs.
    fn check_overlaps(&self, tol: f64) -> Result<(), NetworkError> {
        let polylines: Vec<Vec<Vec<f64>>> = self.arcs.iter().map(|a| a.geometry.polyline()).collect();
        for (i, arc) in self.arcs.iter().enumerate() {
            if arc.geometry.is_analytic_simple() == Some(false) {
                return Err(NetworkError::SelfIntersection(arc.name.clone()));
            }
            if arc.geometry.is_analytic_simple().is_none() {
                self.check_simple(i, &polylines[i], tol)?;
            }
        }
        for i in 0..self.arcs.len() {
            for j in i + 1..self.arcs.len() {
                let (a, b) = (&self.arcs[i], &self.arcs[j]);
                let shared: Vec<&[f64]> = [a.tail, a.head]
                    .into_iter()
                    .filter(|v| *v == b.tail || *v == b.head)
                    .map(|v| self.vertices[v.0].coords.as_slice())
                    .collect();
                for sa in polylines[i].windows(2) {
                    for sb in polylines[j].windows(2) {
                        for (p, d) in geometry::contact_candidates(&sa[0], &sa[1], &sb[0], &sb[1]) {
                            if d <= tol && !shared.iter().any(|v| geometry::dist(v, &p) <= 1e3 * tol) {
                                return Err(NetworkError::OverlapViolation { first: a.name.clone(), second: b.name.clone(), at: p });
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn check_simple(&self, i: usize, poly: &[Vec<f64>], tol: f64) -> Result<(), NetworkError> {
        let segs = poly.len() - 1;
        let closed = self.arcs[i].is_loop();
        for k in 0..segs {
            for l in k + 2..segs {
                if closed && k == 0 && l == segs - 1 {
                    continue;
                }
                let (p, q) = geometry::closest_points(&poly[k], &poly[k + 1], &poly[l], &poly[l + 1]);
                if geometry::dist(&p, &q) <= tol {
                    return Err(NetworkError::SelfIntersection(self.arcs[i].name.clone()));
                }
            }
        }
        Ok(())
    }
}

fn bounding_diameter<'a>(points: impl Iterator<Item = &'a [f64]>) -> f64 {
    let mut lo: Vec<f64> = Vec::new();
    let mut hi: Vec<f64> = Vec::new();
    for p in points {
        if lo.is_empty() {
            lo = p.to_vec();
            hi = p.to_vec();
        }
        for (k, &x) in p.iter().enumerate().take(lo.len()) {
            lo[k] = lo[k].min(x);
            hi[k] = hi[k].max(x);
        }
    }
    geometry::dist(&lo, &hi)
}

fn build_geometry(name: &str, doc: &GeometryDocument, tail: &[f64], head: &[f64], dim: usize) -> Result<Geometry, NetworkError> {
    let invalid = |reason: String| NetworkError::InvalidGeometry { arc: name.to_owned(), reason };
    Ok(match doc {
        GeometryDocument::Segment => Geometry::Segment { start: tail.to_vec(), end: head.to_vec() },
        GeometryDocument::Samples { points } => {
            if points.len() < MIN_SAMPLES {
                return Err(invalid(format!("{} samples given, at least {MIN_SAMPLES} required", points.len())));
            }
            if points.iter().any(|p| p.len() != dim) {
                return Err(NetworkError::Dimension(format!("samples of arc `{name}` must have {dim} coordinates")));
            }
            Geometry::Samples { points: points.clone() }
        }
        GeometryDocument::CircularArc { center, radius, start_angle, sweep } => {
            if dim < 2 {
                return Err(invalid("circular arcs need at least two coordinates".into()));
            }
            if center.len() != dim {
                return Err(NetworkError::Dimension(format!("center of arc `{name}` must have {dim} coordinates")));
            }
            Geometry::CircularArc { center: center.clone(), radius: *radius, start_angle: *start_angle, sweep: *sweep }
        }
    })
}

fn check_regular(arc: &Arc) -> Result<(), NetworkError> {
    let speed = arc.geometry.min_speed();
    if speed.is_nan() || speed <= 0.0 || !speed.is_finite() {
        return Err(NetworkError::NonRegularArc { arc: arc.name.clone(), reason: format!("vanishing derivative (|γ̇| = {speed})") });
    }
    Ok(())
}

/// A maximal piece of an arc between consecutive split nodes, in the listed
/// orientation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Piece {
    pub arc: ArcId,
    pub s0: f64,
    pub s1: f64,
    pub from: usize,
    pub to: usize,
}

/// Vertices plus interior split points, and the arc pieces between them.
/// Node `i < vertex count` is vertex `i`.
#[derive(Clone, Debug)]
pub struct SplitNetwork {
    pub nodes: Vec<NetworkPoint>,
    pub pieces: Vec<Piece>,
}

impl SplitNetwork {
    pub fn node_of(&self, p: NetworkPoint) -> Option<usize> {
        match p {
            NetworkPoint::Vertex(v) => Some(v.0),
            _ => self.nodes.iter().position(|q| *q == p),
        }
    }

    /// Pieces of `arc` sorted by parameter.
    pub fn pieces_of(&self, arc: ArcId) -> impl Iterator<Item = &Piece> {
        self.pieces.iter().filter(move |p| p.arc == arc)
    }
}

impl fmt::Display for NetworkPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetworkPoint::Vertex(v) => write!(f, "v#{}", v.0),
            NetworkPoint::Interior { arc, s } => write!(f, "a#{}({s})", arc.0),
        }
    }
}
