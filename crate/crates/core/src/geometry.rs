//! Parametrized arc geometry on `[0, 1]` and a few polyline primitives.

use std::f64::consts::TAU;

/// Shape of an arc, parametrized on `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub enum Geometry {
    /// Straight segment `start + s (end - start)`.
    Segment { start: Vec<f64>, end: Vec<f64> },
    /// Circular arc in the plane of the first two coordinates; the remaining
    /// coordinates are those of `center`.
    CircularArc {
        center: Vec<f64>,
        radius: f64,
        start_angle: f64,
        sweep: f64,
    },
    /// Polyline through `points`, sample `i` sitting at `s = i / (n - 1)`.
    Samples { points: Vec<Vec<f64>> },
}

/// Number of points used to approximate analytic arcs by polylines.
pub const ANALYTIC_POLYLINE_POINTS: usize = 65;

impl Geometry {
    pub fn dim(&self) -> usize {
        match self {
            Geometry::Segment { start, .. } => start.len(),
            Geometry::CircularArc { center, .. } => center.len(),
            Geometry::Samples { points } => points[0].len(),
        }
    }

    pub fn position(&self, s: f64) -> Vec<f64> {
        match self {
            Geometry::Segment { start, end } => {
                start.iter().zip(end).map(|(a, b)| a + s * (b - a)).collect()
            }
            Geometry::CircularArc {
                center,
                radius,
                start_angle,
                sweep,
            } => {
                let theta = start_angle + sweep * s;
                let mut p = center.clone();
                p[0] += radius * theta.cos();
                p[1] += radius * theta.sin();
                p
            }
            Geometry::Samples { points } => {
                let (k, t) = sample_segment(points.len(), s);
                points[k]
                    .iter()
                    .zip(&points[k + 1])
                    .map(|(a, b)| a + t * (b - a))
                    .collect()
            }
        }
    }

    /// Velocity `γ̇(s)`. Sampled polylines use the finite difference of the
    /// segment containing `s` (the right one at interior sample nodes).
    pub fn derivative(&self, s: f64) -> Vec<f64> {
        match self {
            Geometry::Segment { start, end } => start.iter().zip(end).map(|(a, b)| b - a).collect(),
            Geometry::CircularArc {
                center,
                radius,
                start_angle,
                sweep,
            } => {
                let theta = start_angle + sweep * s;
                let mut d = vec![0.0; center.len()];
                d[0] = -radius * sweep * theta.sin();
                d[1] = radius * sweep * theta.cos();
                d
            }
            Geometry::Samples { points } => {
                let n = points.len();
                let (k, _) = sample_segment(n, s);
                let scale = (n - 1) as f64;
                points[k]
                    .iter()
                    .zip(&points[k + 1])
                    .map(|(a, b)| scale * (b - a))
                    .collect()
            }
        }
    }

    pub fn speed(&self, s: f64) -> f64 {
        norm(&self.derivative(s))
    }

    /// Length of the sub-arc between parameters `s1 <= s2`.
    pub fn length_between(&self, s1: f64, s2: f64) -> f64 {
        debug_assert!(s1 <= s2);
        match self {
            Geometry::Segment { start, end } => (s2 - s1) * dist(start, end),
            Geometry::CircularArc { radius, sweep, .. } => (s2 - s1) * radius * sweep.abs(),
            Geometry::Samples { points } => {
                let n = points.len();
                let (k1, t1) = sample_segment(n, s1);
                let (k2, t2) = sample_segment(n, s2);
                let seg = |k: usize| dist(&points[k], &points[k + 1]);
                if k1 == k2 {
                    return (t2 - t1) * seg(k1);
                }
                let mut total = (1.0 - t1) * seg(k1);
                for k in k1 + 1..k2 {
                    total += seg(k);
                }
                total + t2 * seg(k2)
            }
        }
    }

    pub fn length(&self) -> f64 {
        self.length_between(0.0, 1.0)
    }

    /// Polyline approximation used by the overlap and simplicity checks.
    pub fn polyline(&self) -> Vec<Vec<f64>> {
        match self {
            Geometry::Segment { start, end } => vec![start.clone(), end.clone()],
            Geometry::CircularArc { .. } => (0..ANALYTIC_POLYLINE_POINTS)
                .map(|i| self.position(i as f64 / (ANALYTIC_POLYLINE_POINTS - 1) as f64))
                .collect(),
            Geometry::Samples { points } => points.clone(),
        }
    }

    /// Smallest speed over the points where the derivative is sampled.
    pub fn min_speed(&self) -> f64 {
        match self {
            Geometry::Segment { .. } | Geometry::CircularArc { .. } => self.speed(0.0),
            Geometry::Samples { points } => {
                let scale = (points.len() - 1) as f64;
                points
                    .windows(2)
                    .map(|w| scale * dist(&w[0], &w[1]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Analytic families are simple by construction, except for circular
    /// arcs sweeping more than a full turn.
    pub fn is_analytic_simple(&self) -> Option<bool> {
        match self {
            Geometry::Segment { .. } => Some(true),
            Geometry::CircularArc { sweep, .. } => Some(sweep.abs() <= TAU * (1.0 + 1e-12)),
            Geometry::Samples { .. } => None,
        }
    }
}

/// Segment index and local parameter for a uniform polyline with `n` points.
fn sample_segment(n: usize, s: f64) -> (usize, f64) {
    let x = s.clamp(0.0, 1.0) * (n - 1) as f64;
    let k = (x.floor() as usize).min(n - 2);
    (k, x - k as f64)
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

/// Closest point to `p` on segment `[a, b]`.
pub fn project_on_segment(p: &[f64], a: &[f64], b: &[f64]) -> Vec<f64> {
    let ab = sub(b, a);
    let len2 = dot(&ab, &ab);
    if len2 == 0.0 {
        return a.to_vec();
    }
    let t = (dot(&sub(p, a), &ab) / len2).clamp(0.0, 1.0);
    lerp(a, b, t)
}

/// Closest pair of points between segments `[p1, q1]` and `[p2, q2]` in any
/// dimension.
pub fn closest_points(p1: &[f64], q1: &[f64], p2: &[f64], q2: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let d1 = sub(q1, p1);
    let d2 = sub(q2, p2);
    let r = sub(p1, p2);
    let a = dot(&d1, &d1);
    let e = dot(&d2, &d2);
    let f = dot(&d2, &r);
    let (s, t);
    if a <= f64::MIN_POSITIVE && e <= f64::MIN_POSITIVE {
        return (p1.to_vec(), p2.to_vec());
    }
    if a <= f64::MIN_POSITIVE {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = dot(&d1, &r);
        if e <= f64::MIN_POSITIVE {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = dot(&d1, &d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > 0.0 { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
            let mut t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t0 = 0.0;
                s0 = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t0 = 1.0;
                s0 = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s0;
            t = t0;
        }
    }
    (lerp(p1, q1, s), lerp(p2, q2, t))
}

/// Candidate contact points between two segments: the closest pair plus the
/// projections of all four endpoints. Collinear overlaps always surface one
/// endpoint lying on the other segment.
pub fn contact_candidates(p1: &[f64], q1: &[f64], p2: &[f64], q2: &[f64]) -> Vec<(Vec<f64>, f64)> {
    let mut out = Vec::with_capacity(5);
    let (a, b) = closest_points(p1, q1, p2, q2);
    out.push((a.clone(), dist(&a, &b)));
    for p in [p1, q1] {
        let proj = project_on_segment(p, p2, q2);
        out.push((p.to_vec(), dist(p, &proj)));
    }
    for p in [p2, q2] {
        let proj = project_on_segment(p, p1, q1);
        out.push((proj.clone(), dist(p, &proj)));
    }
    out
}
