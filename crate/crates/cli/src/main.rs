//! `hjnet`: critical values, Aubry sets, semidistances and Hopf–Lax
//! solutions for eikonal equations on networks.
//!
//! Exit status: 0 on success, 1 when a check fails, 2 on input errors.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use hjnet::critical::brute_force_min_cycle;
use hjnet::hopflax::{self, comparison_harness, DomainItem, SubsolutionSource, Trace};
use hjnet::{
    aubry_set, brute_force_semidistance, condition_d_holds, critical_value, AubryStructure, CriticalData, DirectedArc, FieldDocument, FieldOnNetwork, Instance, LevelGraph, NetworkDocument,
    NetworkPoint, SolveError, SolverConfig, TraceDocument, VertexId,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use output::{Format, Sink};

#[derive(Parser, Debug)]
#[command(name = "hjnet", version, about = "Eikonal Hamilton–Jacobi equations on embedded networks")]
struct Cli {
    /// Network document (JSON).
    #[arg(long, global = true)]
    network: Option<PathBuf>,
    /// Solver configuration (JSON); the flags below override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Samples per arc (odd, at least 33).
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Simpson panels per arc.
    #[arg(long, global = true)]
    panels: Option<usize>,
    /// Relative tolerance of the pairwise and fixed-point checks.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Write the result to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Seed of the random trials.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the network and the Hamiltonian assumptions.
    Validate,
    /// Critical value with its witness.
    Critical,
    /// Aubry set and static classes at the critical value.
    Aubry,
    /// Semidistance between two points, with an optimal path.
    Distance {
        /// `VERTEX` or `ARC:S`.
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        /// Level `a`; the critical value when omitted.
        #[arg(long, allow_hyphen_values = true)]
        level: Option<f64>,
    },
    /// Maximal subsolution agreeing with a trace.
    Solve {
        #[arg(long)]
        trace: PathBuf,
        /// Constraint set: the whole trace or its part on the Aubry set.
        #[arg(long, value_enum, default_value_t = On::TraceDomain)]
        on: On,
    },
    /// Subsolution and fixed-point checks for a sampled field.
    Verify {
        #[arg(long)]
        field: PathBuf,
        /// Level to check at; the critical value when omitted.
        #[arg(long, allow_hyphen_values = true)]
        level: Option<f64>,
    },
    /// Comparison-principle trials.
    Harness {
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Graph semidistance and critical cycles against brute-force enumeration.
    Oracle {
        #[arg(long, default_value_t = 20)]
        pairs: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum On {
    Aubry,
    TraceDomain,
}

/// Result of a subcommand that ran to completion.
enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    fn from(passed: bool) -> Verdict {
        if passed {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("malformed JSON in {}", path.display()))
}

fn load(cli: &Cli) -> Result<Instance> {
    let mut config = match &cli.config {
        Some(path) => read_json::<SolverConfig>(path)?,
        None => SolverConfig::default(),
    };
    if let Some(grid) = cli.grid {
        config.grid = grid;
    }
    if let Some(panels) = cli.panels {
        config.panels = panels;
    }
    if let Some(tol) = cli.tol {
        config.pair_tol = tol;
        config.solution_tol = tol;
    }
    let path = cli.network.as_deref().ok_or_else(|| anyhow!("--network is required"))?;
    let doc: NetworkDocument = read_json(path)?;
    Instance::from_document(&doc, config).with_context(|| format!("invalid instance {}", path.display()))
}

fn parse_point(inst: &Instance, text: &str) -> Result<NetworkPoint> {
    if let Ok(v) = inst.vertex_named(text) {
        return Ok(NetworkPoint::Vertex(v));
    }
    let (arc, s) = text.rsplit_once(':').ok_or_else(|| anyhow!("`{text}` is neither a vertex nor ARC:S"))?;
    let s: f64 = s.parse().with_context(|| format!("bad parameter in `{text}`"))?;
    Ok(inst.network.canonical_point(DirectedArc::forward(inst.arc_named(arc)?), s)?)
}

fn critical_and_aubry(inst: &Instance) -> Result<(CriticalData, AubryStructure)> {
    let crit = critical_value(inst)?;
    let aubry = aubry_set(inst, &crit)?;
    Ok((crit, aubry))
}

fn run(cli: &Cli) -> Result<Verdict> {
    let inst = load(cli)?;
    let sink = Sink::new(&inst, cli.output.clone(), cli.format);
    match &cli.command {
        Command::Validate => {
            let report = inst.field.validate(inst.config.grid);
            let net = &inst.network;
            sink.json(json!({
                "network": {"vertices": net.vertices().len(), "arcs": net.arcs().len(), "diameter": net.diameter()},
                "field": report,
                "passed": report.passed(),
            }))?;
            Ok(Verdict::from(report.passed()))
        }
        Command::Critical => {
            let crit = critical_value(&inst)?;
            sink.critical(&crit)?;
            Ok(Verdict::Pass)
        }
        Command::Aubry => {
            let (crit, aubry) = critical_and_aubry(&inst)?;
            let d = condition_d_holds(&inst, &crit)?;
            sink.aubry(&aubry, &d)?;
            Ok(Verdict::Pass)
        }
        Command::Distance { from, to, level } => {
            let y = parse_point(&inst, from)?;
            let x = parse_point(&inst, to)?;
            let level = match level {
                Some(a) => *a,
                None => critical_value(&inst)?.c,
            };
            let (value, certificate) = hjnet::semidistance(&inst.network, &inst.field, &inst.config, level, y, x)?;
            sink.distance(level, value, &certificate, &inst.network.describe(y), &inst.network.describe(x))?;
            Ok(Verdict::Pass)
        }
        Command::Solve { trace, on } => {
            let doc: TraceDocument = read_json(trace)?;
            let mut trace = Trace::from_document(&inst, &doc)?;
            let (crit, aubry) = critical_and_aubry(&inst)?;
            if *on == On::Aubry {
                trace = trace.on_aubry(&inst, &aubry);
                if trace.constraints.is_empty() {
                    bail!("no trace point lies on the Aubry set");
                }
            }
            let u = hopflax::solve(&inst, crit.c, &trace)?;
            sink.field(&u)?;
            Ok(Verdict::Pass)
        }
        Command::Verify { field, level } => {
            let doc: FieldDocument = read_json(field)?;
            let u = FieldOnNetwork::from_document(&inst, &doc)?;
            let crit = critical_value(&inst)?;
            let fixed_point = match level {
                None => {
                    let aubry = aubry_set(&inst, &crit)?;
                    hopflax::check_solution_fixed_point(&inst, &u, crit.c, &aubry)
                }
                Some(a) => hopflax::check_fixed_point_at_level(&inst, &u, *a, crit.a0),
            };
            let level = level.unwrap_or(crit.c);
            let (fixed_point, passed) = match fixed_point {
                Ok(report) => {
                    let passed = report.passed;
                    (serde_json::to_value(report)?, passed)
                }
                Err(SolveError::InadmissibleTrace { violation, from, to }) => (
                    json!({"passed": false, "level": level, "reason": "restriction to the Aubry set is not an admissible trace", "violation": violation, "pair": [from, to]}),
                    false,
                ),
                Err(e) => return Err(e.into()),
            };
            let subsolution = hopflax::check_subsolution(&inst, &u, level)?;
            let passed = passed && subsolution.passed;
            sink.json(json!({"level": level, "passed": passed, "subsolution": subsolution, "fixed_point": fixed_point}))?;
            Ok(Verdict::from(passed))
        }
        Command::Harness { trials } => {
            let (crit, aubry) = critical_and_aubry(&inst)?;
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let domain = DomainItem::from_aubry(&aubry);
            let vertex = VertexId(rng.gen_range(0..inst.network.vertices().len()));
            let mut extended = domain.clone();
            extended.push(DomainItem::Point(NetworkPoint::Vertex(vertex)));
            let single = [DomainItem::Point(NetworkPoint::Vertex(vertex))];
            let on_aubry = comparison_harness(&inst, crit.c, &domain, *trials, SubsolutionSource::TraceOnDomain, &mut rng)?;
            let on_extended = comparison_harness(&inst, crit.c, &extended, *trials, SubsolutionSource::TraceOnDomain, &mut rng)?;
            let supercritical = comparison_harness(&inst, crit.c + 1.0, &single, *trials, SubsolutionSource::Random, &mut rng)?;
            let passed = on_aubry.passed() && on_extended.passed() && supercritical.passed();
            let vertex_name = &inst.network.vertex(vertex).name;
            sink.json(json!({
                "seed": cli.seed,
                "passed": passed,
                "aubry": on_aubry,
                "aubry_and_vertex": {"vertex": vertex_name, "report": on_extended},
                "supercritical": {"vertex": vertex_name, "report": supercritical},
            }))?;
            Ok(Verdict::from(passed))
        }
        Command::Oracle { pairs } => oracle(&inst, &sink, *pairs, cli.seed),
    }
}

/// Fixed leg budget of the brute-force path enumeration.
const ORACLE_MAX_LEGS: usize = 64;

fn oracle(inst: &Instance, sink: &Sink, pairs: usize, seed: u64) -> Result<Verdict> {
    let crit = critical_value(inst)?;
    let net = &inst.network;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = inst.config.grid;
    let point = |rng: &mut ChaCha8Rng| {
        if rng.gen_bool(0.3) {
            NetworkPoint::Vertex(VertexId(rng.gen_range(0..net.vertices().len())))
        } else {
            net.point_on(hjnet::ArcId(rng.gen_range(0..net.arcs().len())), rng.gen_range(1..grid - 1) as f64 / (grid - 1) as f64)
        }
    };
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    let mut mismatches = 0;
    for level in [crit.c, crit.c + 1.0] {
        for _ in 0..pairs {
            let (y, x) = (point(&mut rng), point(&mut rng));
            let (fast, _) = hjnet::semidistance(net, &inst.field, &inst.config, level, y, x)?;
            let slow = brute_force_semidistance(net, &inst.field, &inst.config, level, y, x, ORACLE_MAX_LEGS)?;
            let diff = (fast - slow).abs();
            worst = worst.max(diff);
            if diff > 1e-9 {
                mismatches += 1;
            }
            rows.push(json!({"level": level, "from": net.describe(y), "to": net.describe(x), "graph": fast, "brute_force": slow}));
        }
    }
    let graph = LevelGraph::build(net, &inst.field, &inst.config, crit.c, &[])?;
    let min_cycle = brute_force_min_cycle(&graph);
    let cycles_ok = min_cycle.is_none_or(|cost| cost >= -graph.tol);
    let passed = mismatches == 0 && cycles_ok;
    sink.json(json!({
        "passed": passed,
        "c": crit.c,
        "max_difference": worst,
        "mismatches": mismatches,
        "min_cycle_cost_at_c": min_cycle,
        "pairs": rows,
    }))?;
    Ok(Verdict::from(passed))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn well() -> Instance {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/instances/well.json");
        let doc: NetworkDocument = read_json(&path).unwrap();
        Instance::from_document(&doc, SolverConfig::default()).unwrap()
    }

    #[test]
    fn points_parse_as_vertices_or_arc_parameters() {
        let inst = well();
        assert_eq!(parse_point(&inst, "left").unwrap(), NetworkPoint::Vertex(VertexId(0)));
        assert_eq!(parse_point(&inst, "well:1").unwrap(), NetworkPoint::Vertex(VertexId(1)));
        assert!(matches!(parse_point(&inst, "well:0.25").unwrap(), NetworkPoint::Interior { s, .. } if s == 0.25));
        assert!(parse_point(&inst, "nowhere").is_err());
        assert!(parse_point(&inst, "well:2").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
