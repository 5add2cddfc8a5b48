//! Composite Simpson quadrature on `[0, 1]` with panels aligned to the
//! uniform panel partition and the field sampling grid.
//!
//! An interval `[s1, s2]` is cut at every panel boundary `k / panels` and
//! every grid node `i / (grid - 1)` strictly inside it, and each resulting
//! cell is integrated with the three-point Simpson rule. Cutting the same
//! way everywhere makes integrals additive across grid nodes, so piecewise
//! sums in the solver agree with the edge weights of the level graph.

/// Quadrature layout shared by every integral in a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Quadrature {
    pub panels: usize,
    pub grid: usize,
}

impl Quadrature {
    pub fn new(panels: usize, grid: usize) -> Self {
        assert!(panels >= 1 && grid >= 2);
        Quadrature { panels, grid }
    }

    pub fn grid_node(&self, i: usize) -> f64 {
        i as f64 / (self.grid - 1) as f64
    }

    /// Cell boundaries of `[s1, s2]`, endpoints included.
    pub fn breakpoints(&self, s1: f64, s2: f64) -> Vec<f64> {
        debug_assert!(s1 <= s2);
        let mut pts = vec![s1];
        let mut inner = Vec::new();
        for div in [self.panels, self.grid - 1] {
            let d = div as f64;
            let k0 = (s1 * d).floor() as usize;
            let k1 = (s2 * d).ceil() as usize;
            for k in k0..=k1.min(div) {
                let t = k as f64 / d;
                if t > s1 && t < s2 {
                    inner.push(t);
                }
            }
        }
        inner.sort_by(f64::total_cmp);
        inner.dedup();
        pts.extend(inner);
        if s2 > s1 {
            pts.push(s2);
        }
        pts
    }

    /// Simpson integral of `f` over `[s1, s2]`; `None` as soon as `f` is
    /// undefined at one node.
    pub fn integrate<E>(&self, mut f: impl FnMut(f64) -> Result<Option<f64>, E>, s1: f64, s2: f64) -> Result<Option<f64>, E> {
        let bp = self.breakpoints(s1, s2);
        let Some(mut left) = f(bp[0])? else { return Ok(None) };
        let mut total = 0.0;
        for w in bp.windows(2) {
            let (l, r) = (w[0], w[1]);
            let Some(mid) = f(0.5 * (l + r))? else { return Ok(None) };
            let Some(right) = f(r)? else { return Ok(None) };
            total += (r - l) / 6.0 * (left + 4.0 * mid + right);
            left = right;
        }
        Ok(Some(total))
    }

    /// Running integrals from `s1` to each breakpoint of `[s1, s2]`. Entries
    /// after the first undefined node are `None`.
    pub fn cumulative<E>(&self, mut f: impl FnMut(f64) -> Result<Option<f64>, E>, s1: f64, s2: f64) -> Result<Vec<(f64, Option<f64>)>, E> {
        let bp = self.breakpoints(s1, s2);
        let mut out = Vec::with_capacity(bp.len());
        let mut left = f(bp[0])?;
        let mut acc = left.map(|_| 0.0);
        out.push((bp[0], acc));
        for w in bp.windows(2) {
            let (l, r) = (w[0], w[1]);
            if let (Some(a), Some(fl)) = (acc, left) {
                let mid = f(0.5 * (l + r))?;
                let right = f(r)?;
                acc = match (mid, right) {
                    (Some(m), Some(fr)) => Some(a + (r - l) / 6.0 * (fl + 4.0 * m + fr)),
                    _ => None,
                };
                left = right;
            }
            out.push((r, acc));
        }
        Ok(out)
    }

    /// Running integrals from each breakpoint of `[s1, s2]` to `s2`,
    /// accumulated right to left.
    pub fn cumulative_from_right<E>(&self, mut f: impl FnMut(f64) -> Result<Option<f64>, E>, s1: f64, s2: f64) -> Result<Vec<(f64, Option<f64>)>, E> {
        let bp = self.breakpoints(s1, s2);
        let n = bp.len();
        let mut out = vec![(0.0, None); n];
        let mut right = f(bp[n - 1])?;
        let mut acc = right.map(|_| 0.0);
        out[n - 1] = (bp[n - 1], acc);
        for j in (0..n - 1).rev() {
            let (l, r) = (bp[j], bp[j + 1]);
            if let (Some(a), Some(fr)) = (acc, right) {
                let mid = f(0.5 * (l + r))?;
                let left = f(l)?;
                acc = match (mid, left) {
                    (Some(m), Some(fl)) => Some(a + (r - l) / 6.0 * (fl + 4.0 * m + fr)),
                    _ => None,
                };
                right = left;
            }
            out[j] = (l, acc);
        }
        Ok(out)
    }
}
