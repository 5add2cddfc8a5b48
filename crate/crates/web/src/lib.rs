//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every entry point takes a network document as JSON text and returns JSON
//! text; failures come back as a string message.

use hjnet::hopflax::{self, Trace};
use hjnet::{aubry_set, condition_d_holds, critical_value, DirectedArc, Instance, NetworkPoint, SolverConfig};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn instance(network: &str, grid: usize) -> Result<Instance, String> {
    let config = SolverConfig { grid, panels: grid.saturating_sub(1).max(1), ..SolverConfig::default() };
    Instance::from_json(network, config).map_err(|e| e.to_string())
}

fn samples(grid: usize) -> impl Iterator<Item = f64> {
    (0..grid).map(move |i| i as f64 / (grid - 1) as f64)
}

/// Planar polyline of every arc on the sampling grid.
fn shapes(inst: &Instance) -> Vec<Value> {
    let net = &inst.network;
    net.arc_ids()
        .map(|a| {
            let xy: Vec<[f64; 2]> = samples(inst.config.grid)
                .map(|s| {
                    let p = net.position(net.point_on(a, s));
                    [p[0], p.get(1).copied().unwrap_or(0.0)]
                })
                .collect();
            json!({"arc": net.arc(a).name, "xy": xy})
        })
        .collect()
}

/// Critical value, Aubry set and arc shapes.
pub fn analyze_json(network: &str, grid: usize) -> Result<String, String> {
    let inst = instance(network, grid)?;
    let crit = critical_value(&inst).map_err(|e| e.to_string())?;
    let aubry = aubry_set(&inst, &crit).map_err(|e| e.to_string())?;
    let d = condition_d_holds(&inst, &crit).map_err(|e| e.to_string())?;
    Ok(json!({"critical": crit, "aubry": aubry, "condition_d": d, "shapes": shapes(&inst)}).to_string())
}

/// `σ⁻`, `σ⁺` and `m` along every arc at level `a`; `null` where the level
/// lies below `m`.
pub fn support_curves_json(network: &str, level: f64, grid: usize) -> Result<String, String> {
    let inst = instance(network, grid)?;
    let field = &inst.field;
    let arcs: Vec<Value> = inst
        .network
        .arc_ids()
        .map(|a| -> Result<Value, String> {
            let mut s_grid = Vec::new();
            let (mut lo, mut hi, mut m) = (Vec::new(), Vec::new(), Vec::new());
            for s in samples(inst.config.grid) {
                let d = DirectedArc::forward(a);
                s_grid.push(s);
                lo.push(field.sigma_minus(d, level, s).map_err(|e| e.to_string())?);
                hi.push(field.sigma_plus(d, level, s).map_err(|e| e.to_string())?);
                m.push(field.m(a, s).map_err(|e| e.to_string())?);
            }
            Ok(json!({"arc": inst.network.arc(a).name, "s_grid": s_grid, "sigma_minus": lo, "sigma_plus": hi, "m": m}))
        })
        .collect::<Result<_, _>>()?;
    Ok(json!({"level": level, "arcs": arcs}).to_string())
}

/// Hopf–Lax solution at the critical value from a single point `γ(s)` of
/// arc `arc` carrying `value`.
pub fn solve_json(network: &str, arc: &str, s: f64, value: f64, grid: usize) -> Result<String, String> {
    let inst = instance(network, grid)?;
    let id = inst.arc_named(arc).map_err(|e| e.to_string())?;
    let point: NetworkPoint = inst.network.canonical_point(DirectedArc::forward(id), s).map_err(|e| e.to_string())?;
    let crit = critical_value(&inst).map_err(|e| e.to_string())?;
    let trace = Trace { constraints: vec![(point, value)], domain: vec![] };
    let u = hopflax::solve(&inst, crit.c, &trace).map_err(|e| e.to_string())?;
    let doc = u.to_document(&inst, None);
    Ok(json!({"c": crit.c, "field": doc, "shapes": shapes(&inst)}).to_string())
}

#[wasm_bindgen]
pub fn analyze(network: &str, grid: usize) -> Result<String, JsValue> {
    analyze_json(network, grid).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn support_curves(network: &str, level: f64, grid: usize) -> Result<String, JsValue> {
    support_curves_json(network, level, grid).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn solve(network: &str, arc: &str, s: f64, value: f64, grid: usize) -> Result<String, JsValue> {
    solve_json(network, arc, s, value, grid).map_err(|e| JsValue::from_str(&e))
}
