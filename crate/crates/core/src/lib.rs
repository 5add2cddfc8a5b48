//! Eikonal Hamilton–Jacobi equations on embedded networks.
//!
//! A network is a finite union of regular simple arcs in `R^N` meeting only
//! at vertices, each arc carrying a Hamiltonian `H_γ(s, μ)` that is
//! continuous, coercive and strictly quasiconvex in `μ`. The crate computes
//! the support functions `σ±`, the critical value `c`, the Aubry set with
//! its static classes, the semidistance `S_a`, and Hopf–Lax solutions from
//! admissible traces, and it ships numerical checks for the subsolution
//! criterion, the comparison principle and uniqueness.
//!
//! ```
//! use hjnet::{Instance, SolverConfig};
//!
//! let doc = r#"{
//!   "vertices": [{"id": "a", "coords": [0, 0]}, {"id": "b", "coords": [1, 0]}],
//!   "arcs": [{"id": "e", "from": "a", "to": "b", "geometry": {"kind": "segment"},
//!             "hamiltonian": {"family": "power", "p": 2, "V": {"kind": "poly", "coeffs": [0.25, -1, 1]}}}]
//! }"#;
//! let inst = Instance::from_json(doc, SolverConfig::default()).unwrap();
//! let crit = hjnet::critical_value(&inst).unwrap();
//! assert!(crit.c.abs() < 1e-8);
//! ```

pub mod config;
pub mod critical;
pub mod document;
pub mod geometry;
pub mod hamiltonian;
pub mod hopflax;
pub mod network;
pub mod quadrature;
pub mod scalar;
pub mod semidistance;
pub mod shortest;

#[cfg(test)]
pub(crate) mod testutil;

use thiserror::Error;

pub use config::{ConfigError, SolverConfig};
pub use critical::{aubry_set, condition_d_holds, critical_value, degenerate_set, AubryClass, AubryItem, AubryStructure, ClassOrigin, CriticalData, CriticalError};
pub use document::{FieldDocument, NetworkDocument, TraceDocument};
pub use hamiltonian::{FieldError, HamiltonianField, Status, SupportSample, ValidationReport};
pub use hopflax::{FieldOnNetwork, SolveError, Trace};
pub use network::{ArcId, DirectedArc, Network, NetworkError, NetworkPoint, Orientation, VertexId};
pub use semidistance::{brute_force_semidistance, lipschitz_bound, semidistance, DistanceError, LevelGraph, PathCertificate};

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// A validated network with its Hamiltonians and numerical configuration.
#[derive(Clone, Debug)]
pub struct Instance {
    pub network: Network,
    pub field: HamiltonianField,
    pub config: SolverConfig,
}

impl Instance {
    pub fn from_document(doc: &NetworkDocument, config: SolverConfig) -> Result<Instance, Error> {
        config.validate()?;
        let network = Network::build(doc)?;
        let field = HamiltonianField::build(doc, config.root_tol)?;
        Ok(Instance { network, field, config })
    }

    pub fn from_json(text: &str, config: SolverConfig) -> Result<Instance, Error> {
        let doc: NetworkDocument = serde_json::from_str(text)?;
        Instance::from_document(&doc, config)
    }

    /// Same network and field with another configuration.
    pub fn with_config(&self, config: SolverConfig) -> Result<Instance, Error> {
        config.validate()?;
        let mut inst = self.clone();
        inst.field = inst.field.with_root_tol(config.root_tol);
        inst.config = config;
        Ok(inst)
    }

    pub fn arc_named(&self, name: &str) -> Result<ArcId, NetworkError> {
        self.network.arc_by_name(name).ok_or_else(|| NetworkError::UnknownArc(name.to_owned()))
    }

    pub fn vertex_named(&self, name: &str) -> Result<VertexId, NetworkError> {
        self.network.vertex_by_name(name).ok_or_else(|| NetworkError::UnknownVertex(name.to_owned()))
    }
}
