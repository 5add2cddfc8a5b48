//! Per-arc Hamiltonians `H_γ(s, μ)`, structural validation, and the support
//! functions `σ±` together with the energy floors `a_γ` and `a_0`.
//!
//! Only the listed orientation of each arc stores a Hamiltonian. The
//! reversed orientation is evaluated as `H_γ̃(s, μ) = H_γ(1 − s, −μ)`, and
//! its support functions as `σ⁺_γ̃(s) = −σ⁻_γ(1 − s)`.

use serde::Serialize;
use thiserror::Error;

use crate::document::{CoefficientDocument, HamiltonianDocument, NetworkDocument};
use crate::network::{ArcId, DirectedArc, Orientation};
use crate::scalar::{self, MAX_RADIUS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("unknown arc #{0}")]
    UnknownArc(usize),
    #[error("parameter {0} outside [0, 1]")]
    ParameterOutOfRange(f64),
    #[error("arc `{arc}`: momentum {mu} outside the tabulated window")]
    TableOutOfRange { arc: String, mu: f64 },
    #[error("arc `{arc}`: no bracket found at s = {s} (Hamiltonian not coercive?)")]
    BracketFailure { arc: String, s: f64 },
    #[error("arc `{arc}`: {reason}")]
    InvalidHamiltonian { arc: String, reason: String },
}

/// Coefficient function on `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub enum Coefficient {
    /// `Σ c_k s^k`.
    Poly(Vec<f64>),
    /// Uniform samples with linear interpolation.
    Samples(Vec<f64>),
}

impl Coefficient {
    pub fn zero() -> Self {
        Coefficient::Poly(Vec::new())
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Coefficient::Poly(c) => c.iter().rev().fold(0.0, |acc, &k| acc * s + k),
            Coefficient::Samples(v) => {
                let x = s.clamp(0.0, 1.0) * (v.len() - 1) as f64;
                let k = (x.floor() as usize).min(v.len() - 2);
                let t = x - k as f64;
                v[k] + t * (v[k + 1] - v[k])
            }
        }
    }

    fn from_document(doc: Option<&CoefficientDocument>) -> Result<Self, String> {
        Ok(match doc {
            None => Coefficient::zero(),
            Some(CoefficientDocument::Poly { coeffs }) => {
                if coeffs.iter().any(|c| !c.is_finite()) {
                    return Err("non-finite polynomial coefficient".into());
                }
                Coefficient::Poly(coeffs.clone())
            }
            Some(CoefficientDocument::Samples { values }) => {
                if values.len() < 2 || values.iter().any(|c| !c.is_finite()) {
                    return Err("coefficient samples need at least two finite values".into());
                }
                Coefficient::Samples(values.clone())
            }
        })
    }
}

/// `H(s, μ) = |μ − b(s)|^p − V(s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerHamiltonian {
    pub p: f64,
    pub b: Coefficient,
    pub v: Coefficient,
}

/// Bilinear interpolation of `values[i][j] = H(s_grid[i], mu_grid[j])`.
#[derive(Clone, Debug, PartialEq)]
pub struct TableHamiltonian {
    pub s_grid: Vec<f64>,
    pub mu_grid: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl TableHamiltonian {
    /// The μ-slice at `s`: piecewise linear in μ with nodes `mu_grid`.
    fn slice(&self, s: f64) -> Vec<f64> {
        let g = &self.s_grid;
        let i = match g.iter().position(|&x| x > s) {
            Some(0) => 0,
            Some(k) => k - 1,
            None => g.len() - 2,
        }
        .min(g.len() - 2);
        let t = ((s - g[i]) / (g[i + 1] - g[i])).clamp(0.0, 1.0);
        self.values[i].iter().zip(&self.values[i + 1]).map(|(a, b)| a + t * (b - a)).collect()
    }

    fn eval_slice(&self, slice: &[f64], mu: f64) -> Option<f64> {
        let g = &self.mu_grid;
        if mu < g[0] || mu > g[g.len() - 1] {
            return None;
        }
        let j = g.partition_point(|&x| x <= mu).clamp(1, g.len() - 1) - 1;
        let t = (mu - g[j]) / (g[j + 1] - g[j]);
        Some(slice[j] + t * (slice[j + 1] - slice[j]))
    }

    /// Leftmost minimizing node of the slice.
    fn slice_min(&self, slice: &[f64]) -> (f64, f64) {
        let mut k = 0;
        for (j, &v) in slice.iter().enumerate() {
            if v < slice[k] {
                k = j;
            }
        }
        (self.mu_grid[k], slice[k])
    }

    /// Largest root of `slice = a` at or right of the minimum, assuming
    /// `a > min`. `None` when the root lies beyond the window.
    fn slice_max_root(&self, slice: &[f64], a: f64) -> Option<f64> {
        let g = &self.mu_grid;
        let n = g.len();
        if slice[n - 1] < a {
            return None;
        }
        let mut j = n - 1;
        while j > 0 && slice[j - 1] >= a {
            j -= 1;
        }
        if j == 0 {
            return Some(g[0]);
        }
        let (lo, hi) = (slice[j - 1], slice[j]);
        let t = if hi > lo { (a - lo) / (hi - lo) } else { 1.0 };
        Some(g[j - 1] + t * (g[j] - g[j - 1]))
    }

    fn slice_min_root(&self, slice: &[f64], a: f64) -> Option<f64> {
        let g = &self.mu_grid;
        let n = g.len();
        if slice[0] < a {
            return None;
        }
        let mut j = 0;
        while j < n - 1 && slice[j + 1] >= a {
            j += 1;
        }
        if j == n - 1 {
            return Some(g[n - 1]);
        }
        let (hi, lo) = (slice[j], slice[j + 1]);
        let t = if hi > lo { (hi - a) / (hi - lo) } else { 1.0 };
        Some(g[j] + t * (g[j + 1] - g[j]))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ArcHamiltonian {
    Power(PowerHamiltonian),
    Table(TableHamiltonian),
}

impl ArcHamiltonian {
    pub fn from_document(arc: &str, doc: &HamiltonianDocument) -> Result<Self, FieldError> {
        let invalid = |reason: String| FieldError::InvalidHamiltonian { arc: arc.to_owned(), reason };
        match doc {
            HamiltonianDocument::Power { p, b, v } => {
                if !(p.is_finite() && *p >= 1.0) {
                    return Err(invalid(format!("power exponent p = {p} must be at least 1")));
                }
                Ok(ArcHamiltonian::Power(PowerHamiltonian {
                    p: *p,
                    b: Coefficient::from_document(b.as_ref()).map_err(invalid)?,
                    v: Coefficient::from_document(v.as_ref()).map_err(invalid)?,
                }))
            }
            HamiltonianDocument::Table { s_grid, mu_grid, values } => {
                let increasing = |g: &[f64]| g.len() >= 2 && g.windows(2).all(|w| w[0] < w[1]) && g.iter().all(|x| x.is_finite());
                if !increasing(s_grid) || !increasing(mu_grid) {
                    return Err(invalid("table grids must be finite, strictly increasing, with at least two nodes".into()));
                }
                if s_grid[0] > 0.0 || s_grid[s_grid.len() - 1] < 1.0 {
                    return Err(invalid("table s_grid must cover [0, 1]".into()));
                }
                if values.len() != s_grid.len() || values.iter().any(|row| row.len() != mu_grid.len()) {
                    return Err(invalid("table values must be s_grid.len() rows of mu_grid.len() entries".into()));
                }
                Ok(ArcHamiltonian::Table(TableHamiltonian { s_grid: s_grid.clone(), mu_grid: mu_grid.clone(), values: values.clone() }))
            }
        }
    }
}

/// Collection of Hamiltonians indexed by [`ArcId`].
#[derive(Clone, Debug)]
pub struct HamiltonianField {
    names: Vec<String>,
    arcs: Vec<ArcHamiltonian>,
    root_tol: f64,
}

/// Support data of one directed arc at one level, sampled on a grid.
/// Undefined values serialize as `null`.
#[derive(Clone, Debug, Serialize)]
pub struct SupportSample {
    pub arc: String,
    pub dir: &'static str,
    pub level: f64,
    pub s: Vec<f64>,
    pub sigma_plus: Vec<Option<f64>>,
    pub sigma_minus: Vec<Option<f64>>,
    pub mu_star: Vec<f64>,
    pub m: Vec<f64>,
}

impl HamiltonianField {
    pub fn build(doc: &NetworkDocument, root_tol: f64) -> Result<Self, FieldError> {
        let arcs = doc.arcs.iter().map(|a| ArcHamiltonian::from_document(&a.id.0, &a.hamiltonian)).collect::<Result<_, _>>()?;
        Ok(HamiltonianField { names: doc.arcs.iter().map(|a| a.id.0.clone()).collect(), arcs, root_tol })
    }

    pub fn from_parts(names: Vec<String>, arcs: Vec<ArcHamiltonian>, root_tol: f64) -> Self {
        assert_eq!(names.len(), arcs.len());
        HamiltonianField { names, arcs, root_tol }
    }

    pub fn with_root_tol(mut self, root_tol: f64) -> Self {
        self.root_tol = root_tol;
        self
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn hamiltonian(&self, arc: ArcId) -> Result<&ArcHamiltonian, FieldError> {
        self.arcs.get(arc.0).ok_or(FieldError::UnknownArc(arc.0))
    }

    fn name(&self, arc: ArcId) -> &str {
        &self.names[arc.0]
    }

    /// Threshold below which a level counts as touching the minimum.
    pub fn level_tol(&self, a: f64) -> f64 {
        self.root_tol * (1.0 + a.abs())
    }

    fn check_s(s: f64) -> Result<(), FieldError> {
        if (0.0..=1.0).contains(&s) {
            Ok(())
        } else {
            Err(FieldError::ParameterOutOfRange(s))
        }
    }

    fn eval_forward(&self, arc: ArcId, s: f64, mu: f64) -> Result<f64, FieldError> {
        match self.hamiltonian(arc)? {
            ArcHamiltonian::Power(h) => Ok((mu - h.b.eval(s)).abs().powf(h.p) - h.v.eval(s)),
            ArcHamiltonian::Table(t) => t
                .eval_slice(&t.slice(s), mu)
                .ok_or_else(|| FieldError::TableOutOfRange { arc: self.name(arc).to_owned(), mu }),
        }
    }

    pub fn eval(&self, d: DirectedArc, s: f64, mu: f64) -> Result<f64, FieldError> {
        Self::check_s(s)?;
        match d.orientation {
            Orientation::Forward => self.eval_forward(d.arc, s, mu),
            Orientation::Reverse => self.eval_forward(d.arc, 1.0 - s, -mu),
        }
    }

    fn min_forward(&self, arc: ArcId, s: f64) -> Result<(f64, f64), FieldError> {
        match self.hamiltonian(arc)? {
            ArcHamiltonian::Power(h) => Ok((h.b.eval(s), -h.v.eval(s))),
            ArcHamiltonian::Table(t) => Ok(t.slice_min(&t.slice(s))),
        }
    }

    /// `(μ*, m)` with `m = min_μ H(s, μ) = H(s, μ*)`.
    pub fn min_over_mu(&self, d: DirectedArc, s: f64) -> Result<(f64, f64), FieldError> {
        Self::check_s(s)?;
        match d.orientation {
            Orientation::Forward => self.min_forward(d.arc, s),
            Orientation::Reverse => self.min_forward(d.arc, 1.0 - s).map(|(mu, m)| (-mu, m)),
        }
    }

    /// `m_γ(s)` on the listed orientation.
    pub fn m(&self, arc: ArcId, s: f64) -> Result<f64, FieldError> {
        self.min_forward(arc, s).map(|(_, m)| m)
    }

    /// `(σ⁻, σ⁺)` on the listed orientation, `None` below the minimum.
    pub fn support_forward(&self, arc: ArcId, a: f64, s: f64) -> Result<Option<(f64, f64)>, FieldError> {
        Self::check_s(s)?;
        let tol = self.level_tol(a);
        match self.hamiltonian(arc)? {
            ArcHamiltonian::Power(h) => {
                let b = h.b.eval(s);
                let lift = a + h.v.eval(s);
                if lift < -tol {
                    Ok(None)
                } else if lift <= 0.0 {
                    Ok(Some((b, b)))
                } else {
                    let r = lift.powf(1.0 / h.p);
                    Ok(Some((b - r, b + r)))
                }
            }
            ArcHamiltonian::Table(t) => {
                let slice = t.slice(s);
                let (mu_star, m) = t.slice_min(&slice);
                if a < m - tol {
                    return Ok(None);
                }
                if a <= m {
                    return Ok(Some((mu_star, mu_star)));
                }
                let out = |mu| FieldError::TableOutOfRange { arc: self.name(arc).to_owned(), mu };
                let hi = t.slice_max_root(&slice, a).ok_or_else(|| out(t.mu_grid[t.mu_grid.len() - 1]))?;
                let lo = t.slice_min_root(&slice, a).ok_or_else(|| out(t.mu_grid[0]))?;
                Ok(Some((lo, hi)))
            }
        }
    }

    pub fn sigma_plus(&self, d: DirectedArc, a: f64, s: f64) -> Result<Option<f64>, FieldError> {
        Self::check_s(s)?;
        Ok(match d.orientation {
            Orientation::Forward => self.support_forward(d.arc, a, s)?.map(|(_, hi)| hi),
            Orientation::Reverse => self.support_forward(d.arc, a, 1.0 - s)?.map(|(lo, _)| -lo),
        })
    }

    pub fn sigma_minus(&self, d: DirectedArc, a: f64, s: f64) -> Result<Option<f64>, FieldError> {
        Self::check_s(s)?;
        Ok(match d.orientation {
            Orientation::Forward => self.support_forward(d.arc, a, s)?.map(|(lo, _)| lo),
            Orientation::Reverse => self.support_forward(d.arc, a, 1.0 - s)?.map(|(_, hi)| -hi),
        })
    }

    pub fn support_sample(&self, d: DirectedArc, a: f64, grid: usize) -> Result<SupportSample, FieldError> {
        let mut sample = SupportSample {
            arc: self.name(d.arc).to_owned(),
            dir: d.orientation.tag(),
            level: a,
            s: Vec::with_capacity(grid),
            sigma_plus: Vec::with_capacity(grid),
            sigma_minus: Vec::with_capacity(grid),
            mu_star: Vec::with_capacity(grid),
            m: Vec::with_capacity(grid),
        };
        for i in 0..grid {
            let s = i as f64 / (grid - 1) as f64;
            let (mu, m) = self.min_over_mu(d, s)?;
            sample.s.push(s);
            sample.sigma_plus.push(self.sigma_plus(d, a, s)?);
            sample.sigma_minus.push(self.sigma_minus(d, a, s)?);
            sample.mu_star.push(mu);
            sample.m.push(m);
        }
        Ok(sample)
    }

    /// `a_γ = max_s m_γ(s)` and a maximizer: grid scan, then golden-section
    /// refinement around each of the largest local grid maxima.
    pub fn a_gamma(&self, arc: ArcId, grid: usize) -> Result<(f64, f64), FieldError> {
        let h = 1.0 / (grid - 1) as f64;
        let values = (0..grid).map(|i| self.m(arc, i as f64 * h)).collect::<Result<Vec<_>, _>>()?;
        let mut peaks: Vec<usize> = (0..grid)
            .filter(|&i| (i == 0 || values[i] >= values[i - 1]) && (i + 1 == grid || values[i] >= values[i + 1]))
            .collect();
        peaks.sort_by(|&x, &y| values[y].total_cmp(&values[x]));
        peaks.truncate(8);
        let mut best = (values[peaks[0]], peaks[0] as f64 * h);
        for &i in &peaks {
            let lo = i.saturating_sub(1) as f64 * h;
            let hi = ((i + 1).min(grid - 1)) as f64 * h;
            let (s, v) = scalar::golden_section_max(|t| self.m(arc, t), lo, hi, 1e-12)?;
            if v > best.0 {
                best = (v, s);
            }
        }
        Ok(best)
    }

    pub fn a_zero(&self, grid: usize) -> Result<f64, FieldError> {
        let mut a0 = f64::NEG_INFINITY;
        for i in 0..self.arcs.len() {
            a0 = a0.max(self.a_gamma(ArcId(i), grid)?.0);
        }
        Ok(a0)
    }

    /// Structural checks on the sampled `(s, μ)` grid. Failures become report
    /// entries; only evaluation errors that prevent sampling are recorded as
    /// failed checks too.
    pub fn validate(&self, grid: usize) -> ValidationReport {
        let arcs = (0..self.arcs.len()).map(|i| self.validate_arc(ArcId(i), grid)).collect();
        ValidationReport { arcs }
    }

    fn momentum_samples(&self, arc: ArcId, mu_star: f64, radius: f64) -> Vec<f64> {
        match &self.arcs[arc.0] {
            ArcHamiltonian::Table(t) => {
                let mut pts = Vec::with_capacity(2 * t.mu_grid.len());
                for w in t.mu_grid.windows(2) {
                    pts.push(w[0]);
                    pts.push(0.5 * (w[0] + w[1]));
                }
                pts.push(t.mu_grid[t.mu_grid.len() - 1]);
                pts
            }
            ArcHamiltonian::Power(_) => (0..=64).map(|k| mu_star - radius + 2.0 * radius * k as f64 / 64.0).collect(),
        }
    }

    fn validation_radius(&self, arc: ArcId, grid: usize) -> f64 {
        let mut r: f64 = 0.0;
        for i in 0..grid {
            if let Ok((mu, _)) = self.min_forward(arc, i as f64 / (grid - 1) as f64) {
                r = r.max(mu.abs());
            }
        }
        1.0 + 2.0 * r
    }

    fn validate_arc(&self, arc: ArcId, grid: usize) -> ArcReport {
        let name = self.name(arc).to_owned();
        let mut continuity = Check::pass("H1 continuity");
        let mut coercivity = Check::pass("H2 coercivity");
        let mut quasiconvexity = Check::pass("H3 strict quasiconvexity");
        let mut compatibility = Check::pass("compatibility");
        let radius = self.validation_radius(arc, grid);
        let fwd = DirectedArc::forward(arc);
        let rev = DirectedArc::reverse(arc);
        for i in 0..grid {
            let s = i as f64 / (grid - 1) as f64;
            let (mu_star, m) = match self.min_forward(arc, s) {
                Ok(v) => v,
                Err(e) => {
                    continuity.fail(format!("s = {s}: {e}"));
                    continue;
                }
            };
            let mus = self.momentum_samples(arc, mu_star, radius);
            let mut values = Vec::with_capacity(mus.len());
            for &mu in &mus {
                match self.eval(fwd, s, mu) {
                    Ok(v) if v.is_finite() => values.push(v),
                    Ok(v) => {
                        continuity.fail(format!("H({s}, {mu}) = {v}"));
                        values.push(f64::NAN);
                    }
                    Err(e) => {
                        continuity.fail(format!("s = {s}: {e}"));
                        values.push(f64::NAN);
                    }
                }
            }
            if values.iter().any(|v| v.is_nan()) || !m.is_finite() {
                continue;
            }

            let margin = 1e-8 * (1.0 + m.abs());
            let edge = values[0].min(values[values.len() - 1]);
            if edge.is_nan() || edge <= m + margin {
                coercivity.fail(format!("s = {s}: window edges reach {edge}, minimum {m}"));
            }

            let tol = 1e-12 * (1.0 + values.iter().fold(0.0f64, |acc, v| acc.max(v.abs())));
            let violation = quasiconvexity_violation(&values);
            if violation > tol {
                quasiconvexity.fail(format!("s = {s}: interior sample exceeds both sides by {violation:e}"));
            } else if violation >= -tol {
                quasiconvexity.warn(format!("s = {s}: flat or tied μ-slice"));
            }

            for &mu in mus.iter().step_by(8) {
                let lhs = self.eval(rev, 1.0 - s, -mu);
                let rhs = self.eval(fwd, s, mu);
                if let (Ok(l), Ok(r)) = (lhs, rhs) {
                    if (l - r).abs() > 1e-12 * (1.0 + r.abs()) {
                        compatibility.fail(format!("H̃(1 − s, −μ) = {l} ≠ H(s, μ) = {r} at s = {s}"));
                    }
                }
            }
            let level = m + 1.0;
            if let (Ok(Some(p)), Ok(Some(q))) = (self.sigma_plus(rev, level, 1.0 - s), self.sigma_minus(fwd, level, s)) {
                if (p + q).abs() > 1e-12 * (1.0 + q.abs()) {
                    compatibility.fail(format!("σ⁺ of the reverse arc is not −σ⁻ at s = {s}"));
                }
            }
        }
        ArcReport { arc: name, checks: vec![continuity, coercivity, quasiconvexity, compatibility] }
    }
}

/// Largest excess `v_j − max(min_{i<j} v_i, min_{k>j} v_k)` over interior
/// samples; negative means strictly quasiconvex on the samples.
pub fn quasiconvexity_violation(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 3 {
        return f64::NEG_INFINITY;
    }
    let mut suffix = vec![f64::INFINITY; n + 1];
    for j in (0..n).rev() {
        suffix[j] = suffix[j + 1].min(values[j]);
    }
    let mut prefix = values[0];
    let mut worst = f64::NEG_INFINITY;
    for j in 1..n - 1 {
        worst = worst.max(values[j] - prefix.max(suffix[j + 1]));
        prefix = prefix.min(values[j]);
    }
    worst
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Warn,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    fn pass(name: &'static str) -> Self {
        Check { name, status: Status::Pass, detail: None }
    }

    fn fail(&mut self, detail: String) {
        if self.status != Status::Fail {
            self.status = Status::Fail;
            self.detail = Some(detail);
        }
    }

    fn warn(&mut self, detail: String) {
        if self.status == Status::Pass {
            self.status = Status::Warn;
            self.detail = Some(detail);
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ArcReport {
    pub arc: String,
    pub checks: Vec<Check>,
}

impl ArcReport {
    pub fn status(&self) -> Status {
        self.checks.iter().map(|c| c.status).max().unwrap_or(Status::Pass)
    }

    pub fn check(&self, name_prefix: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name.starts_with(name_prefix))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub arcs: Vec<ArcReport>,
}

impl ValidationReport {
    pub fn status(&self) -> Status {
        self.arcs.iter().map(ArcReport::status).max().unwrap_or(Status::Pass)
    }

    pub fn passed(&self) -> bool {
        self.status() != Status::Fail
    }
}

/// Generic bracketed minimization of a quasiconvex coercive `f`: scan nine
/// points on `[−r, r]`, doubling `r` from 1 until the best sample is
/// interior, then golden-section reduction to width `1e-10 (1 + |μ*|)`.
pub fn bracketed_argmin<E>(mut f: impl FnMut(f64) -> Result<f64, E>, on_failure: impl Fn() -> E) -> Result<(f64, f64), E> {
    let mut r = 1.0;
    while r <= MAX_RADIUS {
        let xs: Vec<f64> = (0..9).map(|k| -r + r * k as f64 / 4.0).collect();
        let mut best = 0;
        let mut vals = Vec::with_capacity(9);
        for (k, &x) in xs.iter().enumerate() {
            vals.push(f(x)?);
            if vals[k] < vals[best] {
                best = k;
            }
        }
        if best > 0 && best < 8 {
            let (lo, hi) = (xs[best - 1], xs[best + 1]);
            let width = 1e-10 * (1.0 + xs[best].abs());
            return scalar::golden_section_min(f, lo, hi, width);
        }
        r *= 2.0;
    }
    Err(on_failure())
}

/// Largest root of `f = a` right of `mu_star` by bracket doubling and
/// bisection; `None` when `a` lies below `f(mu_star) − tol`.
pub fn bracketed_max_root<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    mu_star: f64,
    tol: f64,
    on_failure: impl Fn() -> E,
) -> Result<Option<f64>, E> {
    let m = f(mu_star)?;
    if a < m - tol {
        return Ok(None);
    }
    if a <= m {
        return Ok(Some(mu_star));
    }
    let mut r = 1.0;
    while f(mu_star + r)? < a {
        r *= 2.0;
        if r > MAX_RADIUS {
            return Err(on_failure());
        }
    }
    scalar::bisect_increasing(|x| f(x).map(|v| v - a), mu_star, mu_star + r, 0.0).map(Some)
}
