//! Bracketed scalar routines: golden-section minimization and bisection.
//!
//! Everything here works on closures returning `Result`, so table-backed
//! Hamiltonians can report an out-of-window evaluation instead of
//! extrapolating.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Largest bracket radius tried before giving up on an expansion.
pub const MAX_RADIUS: f64 = 1e12;

/// Minimizes a unimodal `f` on `[lo, hi]` by golden-section reduction until
/// the bracket is no wider than `tol`. Returns `(argmin, min)`.
pub fn golden_section_min<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<(f64, f64), E> {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let mut iters = 0;
    while hi - lo > tol && iters < 300 {
        iters += 1;
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        }
    }
    let mid = 0.5 * (lo + hi);
    let fm = f(mid)?;
    // Return the best point seen in the final bracket.
    let mut best = (mid, fm);
    if f1 < best.1 {
        best = (x1, f1);
    }
    if f2 < best.1 {
        best = (x2, f2);
    }
    Ok(best)
}

/// Maximizes `f` on `[lo, hi]`; thin wrapper over [`golden_section_min`].
pub fn golden_section_max<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<(f64, f64), E> {
    let (x, v) = golden_section_min(|t| f(t).map(|y| -y), lo, hi, tol)?;
    Ok((x, -v))
}

/// Finds a sign change of `g` on `[lo, hi]` by bisection, assuming
/// `g(lo) <= 0 <= g(hi)`. Runs until the bracket stops shrinking, `g`
/// vanishes exactly, or the width falls below `width_tol`.
pub fn bisect_increasing<E>(
    mut g: impl FnMut(f64) -> Result<f64, E>,
    mut lo: f64,
    mut hi: f64,
    width_tol: f64,
) -> Result<f64, E> {
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= width_tol {
            break;
        }
        let v = g(mid)?;
        if v == 0.0 {
            return Ok(mid);
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
