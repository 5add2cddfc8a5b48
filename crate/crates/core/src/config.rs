//! Numerical parameters shared by every operation of a run.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::Quadrature;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Sampling grid points per arc (odd, at least 33).
    pub grid: usize,
    /// Simpson panels per full arc.
    pub panels: usize,
    /// Relative tolerance for roots and minima in μ.
    pub root_tol: f64,
    /// Relative bracket width at which the critical-value bisection stops.
    pub bisection_tol: f64,
    /// Relative tolerance for degeneracy `m(s) ≥ c − tol`.
    pub energy_tol: f64,
    /// Relative tolerance for pairwise inequalities between values.
    pub pair_tol: f64,
    /// Relative sup-norm tolerance for comparing solutions.
    pub solution_tol: f64,
    /// Per-arc coefficient of the negative-cycle tolerance.
    pub cycle_tol: f64,
    /// Maximum number of doublings of the upper critical bracket.
    pub max_doublings: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            grid: 257,
            panels: 256,
            root_tol: 1e-10,
            bisection_tol: 1e-12,
            energy_tol: 1e-7,
            pair_tol: 1e-7,
            solution_tol: 1e-6,
            cycle_tol: 1e-9,
            max_doublings: 60,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("grid size {0} must be odd and at least 33")]
    Grid(usize),
    #[error("panel count must be positive")]
    Panels,
    #[error("tolerance `{0}` must be positive and finite")]
    Tolerance(&'static str),
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.grid < 33 || self.grid.is_multiple_of(2) {
            return Err(ConfigError::Grid(self.grid));
        }
        if self.panels == 0 {
            return Err(ConfigError::Panels);
        }
        for (name, v) in [
            ("root_tol", self.root_tol),
            ("bisection_tol", self.bisection_tol),
            ("energy_tol", self.energy_tol),
            ("pair_tol", self.pair_tol),
            ("solution_tol", self.solution_tol),
            ("cycle_tol", self.cycle_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::Tolerance(name));
            }
        }
        Ok(())
    }

    pub fn quadrature(&self) -> Quadrature {
        Quadrature::new(self.panels, self.grid)
    }

    /// Negative-cycle tolerance at level `a` on a network with `arcs` arcs.
    pub fn cycle_tolerance(&self, a: f64, arcs: usize) -> f64 {
        self.cycle_tol * (1.0 + a.abs()) * arcs as f64
    }

    pub fn energy_tolerance(&self, c: f64) -> f64 {
        self.energy_tol * (1.0 + c.abs())
    }

    /// Grid and panels doubled, as used by convergence checks.
    pub fn refined(&self) -> SolverConfig {
        SolverConfig { grid: 2 * self.grid - 1, panels: 2 * self.panels, ..self.clone() }
    }
}
