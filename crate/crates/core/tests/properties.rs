mod common;

use hjnet::critical::{uniqueness_set_at_level, AubryItem, CriticalWitness};
use hjnet::hopflax::{self, DomainItem, Trace};
use hjnet::{aubry_set, critical_value, ArcId, DirectedArc, FieldOnNetwork, Instance, LevelGraph, NetworkPoint, SolverConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{random_instance, random_point};

fn config() -> ProptestConfig {
    ProptestConfig { cases: 32, ..ProptestConfig::default() }
}

fn semidist(inst: &Instance, level: f64, y: NetworkPoint, x: NetworkPoint) -> f64 {
    hjnet::semidistance(&inst.network, &inst.field, &inst.config, level, y, x).unwrap().0
}

/// Grid nodes of an Aubry item (its midpoint when it holds none).
fn item_points(inst: &Instance, item: &AubryItem) -> Vec<NetworkPoint> {
    let probe = FieldOnNetwork::constant(inst, inst.config.grid, 0.0);
    let domain = match item {
        AubryItem::Vertex { id, .. } => DomainItem::Point(NetworkPoint::Vertex(*id)),
        AubryItem::Interval { id, interval, .. } => DomainItem::Interval { arc: *id, s: *interval },
    };
    Trace::restrict(inst, &probe, &[domain]).constraints.into_iter().map(|c| c.0).collect()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn geodesic_distance_is_a_metric_above_euclidean(idx in 0u64..10_000, seed in any::<u64>()) {
        let inst = random_instance(idx);
        let net = &inst.network;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y, z) = (random_point(&inst, &mut rng), random_point(&inst, &mut rng), random_point(&inst, &mut rng));
        let d = |p, q| net.geodesic_distance(p, q);
        prop_assert!((d(x, y) - d(y, x)).abs() <= 1e-12);
        prop_assert!(d(x, y) <= d(x, z) + d(z, y) + 1e-12);
        prop_assert_eq!(d(x, x), 0.0);
        let (px, py) = (net.position(x), net.position(y));
        let euclid = px.iter().zip(&py).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        prop_assert!(d(x, y) >= euclid - 1e-9);
        if x != y {
            prop_assert!(d(x, y) > 0.0);
        }
    }

    #[test]
    fn reversal_names_the_same_point(idx in 0u64..10_000, k in 0usize..257) {
        let inst = random_instance(idx);
        let s = k as f64 / 256.0;
        for arc in inst.network.arc_ids() {
            let fwd = inst.network.canonical_point(DirectedArc::forward(arc), s).unwrap();
            let rev = inst.network.canonical_point(DirectedArc::reverse(arc), 1.0 - s).unwrap();
            prop_assert_eq!(fwd, rev);
        }
    }

    #[test]
    fn critical_data_invariants(idx in 0u64..10_000) {
        let inst = random_instance(idx);
        let crit = critical_value(&inst).unwrap();
        prop_assert!(crit.c >= crit.a0);
        let graph = LevelGraph::build(&inst.network, &inst.field, &inst.config, crit.c, &[]).unwrap();
        prop_assert!(graph.negative_cycle(graph.tol).is_none());
        match &crit.witness {
            CriticalWitness::ZeroCycle { cost, .. } => prop_assert!(cost.abs() <= graph.tol),
            CriticalWitness::Degenerate { .. } => prop_assert!((crit.c - crit.a0).abs() <= 1e-8 * (1.0 + crit.c.abs())),
        }
        if crit.c > crit.a0 + 1e-6 {
            let below = LevelGraph::build(&inst.network, &inst.field, &inst.config, crit.c - 1e-6, &[]).unwrap();
            prop_assert!(below.has_negative_cycle().is_some());
        }
    }

    #[test]
    fn static_classes_are_zero_round_trip_and_disjoint(idx in 0u64..10_000) {
        let inst = random_instance(idx);
        let crit = critical_value(&inst).unwrap();
        let aubry = aubry_set(&inst, &crit).unwrap();
        prop_assert!(!aubry.classes.is_empty());
        let tol = inst.config.pair_tol * (1.0 + crit.c.abs());
        let reps: Vec<NetworkPoint> = aubry.classes.iter().map(|c| c.representative).collect();
        for (i, a) in reps.iter().enumerate() {
            for (j, b) in reps.iter().enumerate().skip(i + 1) {
                let trip = semidist(&inst, crit.c, *a, *b) + semidist(&inst, crit.c, *b, *a);
                prop_assert!(trip > tol, "classes {} and {} have round trip {}", i, j, trip);
            }
        }
        for class in &aubry.classes {
            for item in &class.items {
                for p in item_points(&inst, item).into_iter().take(3) {
                    let trip = semidist(&inst, crit.c, class.representative, p) + semidist(&inst, crit.c, p, class.representative);
                    prop_assert!(trip <= tol + 1e-9, "round trip {} inside a class", trip);
                }
            }
        }
    }

    #[test]
    fn subsolutions_are_rigid_on_static_classes(idx in 0u64..10_000, seed in any::<u64>()) {
        let inst = random_instance(idx);
        let crit = critical_value(&inst).unwrap();
        let aubry = aubry_set(&inst, &crit).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = hopflax::random_subsolution(&inst, crit.c, &mut rng, 3, 1.0).unwrap();
        let tol = inst.config.pair_tol * (1.0 + w.sup_norm()) + 1e-8;
        for class in &aubry.classes {
            let y = class.representative;
            for item in &class.items {
                for x in item_points(&inst, item).into_iter().take(3) {
                    let gap = w.value_at(x) - w.value_at(y) - semidist(&inst, crit.c, y, x);
                    prop_assert!(gap.abs() <= tol, "rigidity gap {}", gap);
                }
            }
        }
    }

    #[test]
    fn solve_agrees_with_trace_and_is_maximal(idx in 0u64..10_000, seed in any::<u64>()) {
        let inst = random_instance(idx);
        let crit = critical_value(&inst).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = hopflax::random_subsolution(&inst, crit.c, &mut rng, 3, 1.0).unwrap();
        let v = rand::Rng::gen_range(&mut rng, 0..inst.network.vertices().len());
        let domain = vec![DomainItem::Point(NetworkPoint::Vertex(hjnet::VertexId(v))), DomainItem::Interval { arc: ArcId(0), s: [0.25, 0.5] }];
        let trace = Trace::restrict_at_level(&inst, &z, crit.c, &domain).unwrap();
        let u = hopflax::solve(&inst, crit.c, &trace).unwrap();
        let tol = inst.config.pair_tol * (1.0 + trace.sup_norm());
        for &(p, g) in &trace.constraints {
            prop_assert!((u.value_at(p) - g).abs() <= tol);
        }
        // z is a subsolution equal to g on Γ′, so it lies below the maximal one
        let below = z.zip_with(&u, |a, b| a - b).values().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(below <= tol, "z exceeds solve output by {}", below);
        prop_assert!(hopflax::check_subsolution(&inst, &u, crit.c).unwrap().passed);
    }

    #[test]
    fn aubry_traces_determine_the_solution(idx in 0u64..10_000, seed in any::<u64>()) {
        let inst = random_instance(idx);
        let crit = critical_value(&inst).unwrap();
        let aubry = aubry_set(&inst, &crit).unwrap();
        let domain = DomainItem::from_aubry(&aubry);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let trace = hopflax::random_admissible_trace(&inst, crit.c, &domain, &mut rng).unwrap();
        let u1 = hopflax::solve(&inst, crit.c, &trace).unwrap();
        let u2 = hopflax::solve(&inst, crit.c, &Trace::restrict_at_level(&inst, &u1, crit.c, &domain).unwrap()).unwrap();
        prop_assert!(u1.max_deviation(&u2).0 <= inst.config.solution_tol * (1.0 + u1.sup_norm()));
        let level_set = uniqueness_set_at_level(&inst, crit.c, crit.a0).unwrap();
        prop_assert_eq!(level_set.classes.len(), aubry.classes.len());
    }

    #[test]
    fn admissibility_sweep_matches_pairwise_queries(idx in 0u64..10_000, seed in any::<u64>()) {
        let inst = random_instance(idx);
        let crit = critical_value(&inst).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let constraints: Vec<(NetworkPoint, f64)> = (0..4).map(|_| (random_point(&inst, &mut rng), rand::Rng::gen_range(&mut rng, -1.0..1.0))).collect();
        let mut unique: Vec<(NetworkPoint, f64)> = Vec::new();
        for c in constraints {
            if !unique.iter().any(|u| u.0 == c.0) {
                unique.push(c);
            }
        }
        let trace = Trace { constraints: unique, domain: vec![] };
        let sweep = hopflax::check_admissible(&inst, crit.c, &trace).unwrap();
        let pairwise = hopflax::check_admissible_pairwise(&inst, crit.c, &trace).unwrap();
        prop_assert!((sweep.max_violation - pairwise.max(0.0)).abs() <= 1e-9);
    }
}

/// `V` vanishing on `[0.25, 0.75]` and positive outside, `b(s) = s − 1/2`:
/// the middle of the arc is degenerate at `c = a0 = 0` with `σ± = b`.
fn plateau_instance(config: SolverConfig) -> Instance {
    let values: Vec<String> = (0..=64)
        .map(|k| {
            let s = k as f64 / 64.0;
            let d = (0.25 - s).max(s - 0.75).max(0.0);
            format!("{}", d * d)
        })
        .collect();
    let doc = format!(
        r#"{{"vertices":[{{"id":"a","coords":[0,0]}},{{"id":"b","coords":[1,0]}}],
            "arcs":[{{"id":"g","from":"a","to":"b","geometry":{{"kind":"segment"}},
                      "hamiltonian":{{"family":"power","p":2,"b":{{"kind":"poly","coeffs":[-0.5,1]}},"V":{{"kind":"samples","values":[{}]}}}}}}]}}"#,
        values.join(",")
    );
    Instance::from_json(&doc, config).unwrap()
}

#[test]
fn subsolution_slopes_follow_sigma_on_degenerate_intervals() {
    let mut deviations = Vec::new();
    for config in [SolverConfig::default(), SolverConfig::default().refined()] {
        let inst = plateau_instance(config);
        let crit = critical_value(&inst).unwrap();
        assert!(crit.c.abs() < 1e-8, "c = {}", crit.c);
        let aubry = aubry_set(&inst, &crit).unwrap();
        let [s1, s2] = match aubry.items().next() {
            Some(AubryItem::Interval { interval, .. }) => *interval,
            other => panic!("unexpected Aubry item {other:?}"),
        };
        assert!((s1 - 0.25).abs() < 0.01 && (s2 - 0.75).abs() < 0.01);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut worst: f64 = 0.0;
        for _ in 0..5 {
            let w = hopflax::random_subsolution(&inst, crit.c, &mut rng, 3, 1.0).unwrap();
            let g = w.grid;
            let h = 1.0 / (g - 1) as f64;
            for i in 0..g - 1 {
                let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
                if a >= s1 && b <= s2 {
                    let slope = (w.arcs[0][i + 1] - w.arcs[0][i]) / h;
                    let sigma = inst.field.sigma_plus(DirectedArc::forward(ArcId(0)), crit.c, 0.5 * (a + b)).unwrap().unwrap();
                    worst = worst.max((slope - sigma).abs());
                }
            }
        }
        deviations.push((worst, 1.0 / (inst.config.grid - 1) as f64));
    }
    for &(dev, h) in &deviations {
        assert!(dev <= h, "slope deviation {dev} exceeds grid step {h}");
    }
    let [(coarse, _), (fine, _)] = deviations[..] else { unreachable!() };
    assert!(fine <= 0.5 * coarse || coarse < 1e-9, "deviation {coarse} → {fine}");
}

#[test]
fn outputs_are_deterministic() {
    let inst = random_instance(3);
    let run = || {
        let crit = critical_value(&inst).unwrap();
        let aubry = aubry_set(&inst, &crit).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let trace = hopflax::random_admissible_trace(&inst, crit.c, &DomainItem::from_aubry(&aubry), &mut rng).unwrap();
        let u = hopflax::solve(&inst, crit.c, &trace).unwrap();
        (serde_json::to_string(&crit).unwrap(), serde_json::to_string(&aubry).unwrap(), serde_json::to_string(&u.to_document(&inst, None)).unwrap())
    };
    assert_eq!(run(), run());
}
