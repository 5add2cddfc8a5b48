//! Random instances and bundled examples shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use hjnet::document::{ArcDocument, CoefficientDocument, GeometryDocument, HamiltonianDocument, NetworkDocument, VertexDocument};
use hjnet::{Instance, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn instances_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("instances")
}

pub fn bundled(name: &str) -> Instance {
    let text = std::fs::read_to_string(instances_dir().join(name)).expect("bundled instance exists");
    Instance::from_json(&text, SolverConfig::default()).expect("bundled instance builds")
}

fn unit(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn random_direction(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let n2: f64 = v.iter().map(|x| x * x).sum();
        if (0.01..=1.0).contains(&n2) {
            return unit(v);
        }
    }
}

const SAMPLES: usize = 33;

/// Polyline from `u` to `v` bowed sideways by `amp · |v − u|`.
fn bent(rng: &mut ChaCha8Rng, u: &[f64], v: &[f64]) -> Vec<Vec<f64>> {
    let d = [v[0] - u[0], v[1] - u[1], v[2] - u[2]];
    let len = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    let side = unit(cross(unit(d), random_direction(rng)));
    let amp = rng.gen_range(0.1..0.4) * len;
    (0..SAMPLES)
        .map(|k| {
            let t = k as f64 / (SAMPLES - 1) as f64;
            let bow = amp * (std::f64::consts::PI * t).sin();
            (0..3).map(|i| u[i] + t * d[i] + bow * side[i]).collect()
        })
        .collect()
}

/// Closed circle polyline through `u` in a random plane.
fn circle(rng: &mut ChaCha8Rng, u: &[f64]) -> Vec<Vec<f64>> {
    let e1 = random_direction(rng);
    let e2 = unit(cross(e1, random_direction(rng)));
    let r = rng.gen_range(0.1..0.3);
    (0..SAMPLES)
        .map(|k| {
            if k == 0 || k == SAMPLES - 1 {
                return u.to_vec();
            }
            let th = std::f64::consts::TAU * k as f64 / (SAMPLES - 1) as f64;
            (0..3).map(|i| u[i] + r * (1.0 - th.cos()) * e1[i] + r * th.sin() * e2[i]).collect()
        })
        .collect()
}

fn poly(rng: &mut ChaCha8Rng) -> CoefficientDocument {
    let degree = rng.gen_range(0..=2);
    CoefficientDocument::Poly { coeffs: (0..=degree).map(|_| rng.gen_range(-1.0..=1.0)).collect() }
}

pub fn random_hamiltonian(rng: &mut ChaCha8Rng) -> HamiltonianDocument {
    let p = [1.0, 1.5, 2.0, 3.0][rng.gen_range(0..4)];
    HamiltonianDocument::Power { p, b: Some(poly(rng)), v: Some(poly(rng)) }
}

/// Network with at most 6 vertices and 9 arcs in generic position in `R³`:
/// a random spanning tree plus extra arcs, where repeated vertex pairs
/// become bowed polylines and self-pairs become loops.
pub fn random_document(seed: u64) -> NetworkDocument {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=6);
    let coords: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| rng.gen_range(0.0..1.0)).collect()).collect();
    let mut pairs: Vec<(usize, usize)> = (1..n).map(|i| (rng.gen_range(0..i), i)).collect();
    let total = rng.gen_range(pairs.len().max(1)..=9);
    while pairs.len() < total {
        pairs.push((rng.gen_range(0..n), rng.gen_range(0..n)));
    }
    let mut arcs = Vec::new();
    let mut seen = Vec::new();
    for (k, (u, v)) in pairs.into_iter().enumerate() {
        let (u, v) = if rng.gen_bool(0.5) { (u, v) } else { (v, u) };
        let key = (u.min(v), u.max(v));
        let geometry = if u == v {
            GeometryDocument::Samples { points: circle(&mut rng, &coords[u]) }
        } else if seen.contains(&key) {
            GeometryDocument::Samples { points: bent(&mut rng, &coords[u], &coords[v]) }
        } else {
            GeometryDocument::Segment
        };
        seen.push(key);
        arcs.push(ArcDocument {
            id: format!("e{k}").as_str().into(),
            from: format!("v{u}").as_str().into(),
            to: format!("v{v}").as_str().into(),
            geometry,
            hamiltonian: random_hamiltonian(&mut rng),
        });
    }
    let vertices = coords.into_iter().enumerate().map(|(i, c)| VertexDocument { id: format!("v{i}").as_str().into(), coords: c }).collect();
    NetworkDocument { vertices, arcs }
}

/// Random instance number `index`; a rejected draw moves on to the next seed.
pub fn random_instance(index: u64) -> Instance {
    random_instance_with(index, SolverConfig::default())
}

pub fn random_instance_with(index: u64, config: SolverConfig) -> Instance {
    let mut seed = index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    loop {
        if let Ok(inst) = Instance::from_document(&random_document(seed), config.clone()) {
            return inst;
        }
        seed = seed.wrapping_add(1);
    }
}

/// Random point: a vertex or an interior grid node.
pub fn random_point(inst: &Instance, rng: &mut ChaCha8Rng) -> hjnet::NetworkPoint {
    let net = &inst.network;
    if rng.gen_bool(0.3) {
        hjnet::NetworkPoint::Vertex(hjnet::VertexId(rng.gen_range(0..net.vertices().len())))
    } else {
        let g = inst.config.grid;
        net.point_on(hjnet::ArcId(rng.gen_range(0..net.arcs().len())), rng.gen_range(1..g - 1) as f64 / (g - 1) as f64)
    }
}
