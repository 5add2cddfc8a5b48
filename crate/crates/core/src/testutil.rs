//! Small instances shared by the unit tests.

use crate::document::NetworkDocument;
use crate::{Instance, SolverConfig};

/// `H = |μ|`.
pub const POWER_ABS: &str = r#"{"family":"power","p":1}"#;
/// `H = μ² − (s − 1/2)²`.
pub const WELL_HAM: &str = r#"{"family":"power","p":2,"V":{"kind":"poly","coeffs":[0.25,-1,1]}}"#;
/// `H = |μ − 2|`.
pub const LOOP_HAM: &str = r#"{"family":"power","p":1,"b":{"kind":"poly","coeffs":[2]}}"#;

pub fn parse_doc(text: &str) -> NetworkDocument {
    serde_json::from_str(text).expect("test document parses")
}

pub fn single_segment_doc_between(from: [f64; 2], to: [f64; 2], ham: &str) -> NetworkDocument {
    parse_doc(&format!(
        r#"{{"vertices":[{{"id":"a","coords":[{},{}]}},{{"id":"b","coords":[{},{}]}}],
            "arcs":[{{"id":"g","from":"a","to":"b","geometry":{{"kind":"segment"}},"hamiltonian":{ham}}}]}}"#,
        from[0], from[1], to[0], to[1]
    ))
}

pub fn single_segment_doc(ham: &str) -> NetworkDocument {
    single_segment_doc_between([0.0, 0.0], [1.0, 0.0], ham)
}

pub fn triangle_doc(points: &[(f64, f64); 3], ham: &str) -> NetworkDocument {
    let [p, q, r] = points;
    parse_doc(&format!(
        r#"{{"vertices":[{{"id":"a","coords":[{},{}]}},{{"id":"b","coords":[{},{}]}},{{"id":"c","coords":[{},{}]}}],
            "arcs":[{{"id":"ab","from":"a","to":"b","geometry":{{"kind":"segment"}},"hamiltonian":{ham}}},
                    {{"id":"bc","from":"b","to":"c","geometry":{{"kind":"segment"}},"hamiltonian":{ham}}},
                    {{"id":"ca","from":"c","to":"a","geometry":{{"kind":"segment"}},"hamiltonian":{ham}}}]}}"#,
        p.0, p.1, q.0, q.1, r.0, r.1
    ))
}

/// Unit-speed circle through a single vertex.
pub fn loop_doc(ham: &str) -> NetworkDocument {
    let r = 1.0 / std::f64::consts::TAU;
    parse_doc(&format!(
        r#"{{"vertices":[{{"id":"v","coords":[{r},0]}}],
            "arcs":[{{"id":"loop","from":"v","to":"v","geometry":{{"kind":"circular-arc","center":[0,0],"radius":{r},"start_angle":0,"sweep":{}}},"hamiltonian":{ham}}}]}}"#,
        std::f64::consts::TAU
    ))
}

pub fn instance(doc: &NetworkDocument) -> Instance {
    Instance::from_document(doc, SolverConfig::default()).expect("test instance builds")
}

pub fn segment_instance(ham: &str) -> Instance {
    instance(&single_segment_doc(ham))
}

pub fn triangle_instance(ham: &str) -> Instance {
    instance(&triangle_doc(&[(0.0, 0.0), (1.0, 0.0), (0.5, 3f64.sqrt() / 2.0)], ham))
}

pub fn loop_instance() -> Instance {
    instance(&loop_doc(LOOP_HAM))
}

pub fn well_instance() -> Instance {
    segment_instance(WELL_HAM)
}
