//! JSON document schemas: network description, trace, sampled field.
//!
//! These are plain serde mirrors of the on-disk formats; validation happens
//! when they are turned into [`crate::Network`], [`crate::HamiltonianField`]
//! and friends.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Identifier accepted either as a JSON string or an integer.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ident(pub String);

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Ident {
    fn from(s: &str) -> Self {
        Ident(s.to_owned())
    }
}

impl Serialize for Ident {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Ident {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Str(String),
            Int(i64),
        }
        Ok(match Raw::deserialize(deserializer)? {
            Raw::Str(s) => Ident(s),
            Raw::Int(i) => Ident(i.to_string()),
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NetworkDocument {
    pub vertices: Vec<VertexDocument>,
    pub arcs: Vec<ArcDocument>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VertexDocument {
    pub id: Ident,
    pub coords: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ArcDocument {
    pub id: Ident,
    pub from: Ident,
    pub to: Ident,
    pub geometry: GeometryDocument,
    pub hamiltonian: HamiltonianDocument,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GeometryDocument {
    Segment,
    Samples {
        points: Vec<Vec<f64>>,
    },
    CircularArc {
        center: Vec<f64>,
        radius: f64,
        start_angle: f64,
        sweep: f64,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum HamiltonianDocument {
    Power {
        p: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<CoefficientDocument>,
        #[serde(default, rename = "V", skip_serializing_if = "Option::is_none")]
        v: Option<CoefficientDocument>,
    },
    Table {
        s_grid: Vec<f64>,
        mu_grid: Vec<f64>,
        values: Vec<Vec<f64>>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CoefficientDocument {
    Poly { coeffs: Vec<f64> },
    Samples { values: Vec<f64> },
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct TraceDocument {
    #[serde(default)]
    pub points: Vec<TracePointDocument>,
    #[serde(default)]
    pub intervals: Vec<TraceIntervalDocument>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TracePointDocument {
    pub at: PointDocument,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointDocument {
    Vertex { vertex: Ident },
    Interior { arc: Ident, s: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceIntervalDocument {
    pub arc: Ident,
    pub s: [f64; 2],
    /// Uniform samples over `[s[0], s[1]]`.
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FieldDocument {
    pub arcs: Vec<ArcFieldDocument>,
    pub vertices: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ArcFieldDocument {
    pub arc: Ident,
    pub s_grid: Vec<f64>,
    pub values: Vec<f64>,
}
