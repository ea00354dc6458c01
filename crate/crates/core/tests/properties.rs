use lanchester_core::graph::{pair_count, Adjacency, Engagement};
use lanchester_core::meanfield::{integrate_meanfield, meanfield_invariant, GroupState, MeanFieldSpec};
use lanchester_core::metrics::compute_metrics_with;
use lanchester_core::scenarios::force_balance;
use lanchester_core::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
struct Battle {
    topo: Topology,
    state: ForceState,
    config: BattleConfig,
}

fn random_topology(rng: &mut ChaCha8Rng, nb: usize, nr: usize, density: f64) -> Topology {
    let links = |n: usize, rng: &mut ChaCha8Rng| rng.random_range(0..=((pair_count(n) as f64 * density) as usize));
    let lb = links(nb, rng);
    let lr = links(nr, rng);
    let le = rng.random_range(0..=((nb * nr) as f64 * density) as usize);
    Topology::new(
        Adjacency::random(nb, lb, rng).unwrap(),
        Adjacency::random(nr, lr, rng).unwrap(),
        Engagement::random(nb, nr, le, rng).unwrap(),
    )
    .unwrap()
}

fn battle() -> impl Strategy<Value = Battle> {
    (any::<u64>(), 1usize..10, 1usize..10, 0.1f64..1.0).prop_map(|(seed, nb, nr, density)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let topo = random_topology(&mut rng, nb, nr, density);
        let state = ForceState::new(
            (0..nb).map(|_| rng.random_range(0.0..2.0)).collect(),
            (0..nr).map(|_| rng.random_range(0.0..2.0)).collect(),
        );
        let config = BattleConfig {
            kappa_blue: rng.random_range(0.1..2.0),
            kappa_red: rng.random_range(0.1..2.0),
            gamma_blue: rng.random_range(0.0..2.0),
            gamma_red: rng.random_range(0.0..2.0),
            ..BattleConfig::default()
        };
        Battle { topo, state, config }
    })
}

fn permutation(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

fn mirrored_config(c: &BattleConfig) -> BattleConfig {
    BattleConfig {
        kappa_blue: c.kappa_red,
        kappa_red: c.kappa_blue,
        gamma_blue: c.gamma_red,
        gamma_red: c.gamma_blue,
        ..*c
    }
}

fn symmetric_difference(a: &Topology, b: &Topology) -> (usize, usize, usize) {
    let diff = |x: &Adjacency, y: &Adjacency| {
        x.edges().filter(|&(i, j)| !y.contains(i, j)).count() + y.edges().filter(|&(i, j)| !x.contains(i, j)).count()
    };
    let e = a
        .engagement
        .links()
        .filter(|&(i, j)| !b.engagement.contains(i, j))
        .count()
        + b.engagement
            .links()
            .filter(|&(i, j)| !a.engagement.contains(i, j))
            .count();
    (
        diff(&a.blue_manoeuvre, &b.blue_manoeuvre),
        diff(&a.red_manoeuvre, &b.red_manoeuvre),
        e,
    )
}

fn quick_spec(seed: u64, n: usize) -> ScenarioSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let topo = seed_topology(n, n, 2, &mut rng).unwrap();
    let config = BattleConfig {
        kappa_red: 0.5,
        t_max: 5.0,
        ..BattleConfig::default()
    };
    ScenarioSpec::new(topo, config, ForceState::uniform(n, n, 1.0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn manoeuvre_alone_conserves_each_side(b in battle()) {
        let config = BattleConfig { kappa_blue: 0.0, kappa_red: 0.0, ..b.config };
        let d = rhs(&b.state, &b.topo, &config).unwrap();
        let scale = 1.0 + d.max_abs();
        prop_assert!(d.blue.iter().sum::<f64>().abs() < 1e-12 * scale * b.topo.n_blue() as f64);
        prop_assert!(d.red.iter().sum::<f64>().abs() < 1e-12 * scale * b.topo.n_red() as f64);
    }

    #[test]
    fn relabelling_nodes_permutes_the_vector_field(b in battle(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pb = permutation(&mut rng, b.topo.n_blue());
        let pr = permutation(&mut rng, b.topo.n_red());
        let mut blue = vec![0.0; pb.len()];
        let mut red = vec![0.0; pr.len()];
        for (i, &p) in pb.iter().enumerate() { blue[p] = b.state.blue[i]; }
        for (i, &p) in pr.iter().enumerate() { red[p] = b.state.red[i]; }
        let d = rhs(&b.state, &b.topo, &b.config).unwrap();
        let dp = rhs(&ForceState::new(blue, red), &b.topo.permuted(&pb, &pr), &b.config).unwrap();
        for (i, &p) in pb.iter().enumerate() {
            prop_assert!((d.blue[i] - dp.blue[p]).abs() < 1e-12);
        }
        for (i, &p) in pr.iter().enumerate() {
            prop_assert!((d.red[i] - dp.red[p]).abs() < 1e-12);
        }
    }

    #[test]
    fn swapping_sides_swaps_the_vector_field(b in battle()) {
        let d = rhs(&b.state, &b.topo, &b.config).unwrap();
        let swapped = ForceState::new(b.state.red.clone(), b.state.blue.clone());
        let dm = rhs(&swapped, &b.topo.mirrored(), &mirrored_config(&b.config)).unwrap();
        prop_assert_eq!(&d.blue, &dm.red);
        prop_assert_eq!(&d.red, &dm.blue);
    }

    #[test]
    fn attack_counts_add_up(b in battle()) {
        let p = UtilityParams::new(0.5, 1.0).unwrap();
        let m = compute_metrics(&b.topo, &b.state, &p);
        prop_assert!((0.0..=1.0).contains(&m.frac_attacked_blue));
        match m.avg_attacks_on_attacked {
            Some(avg) => {
                let total = m.frac_attacked_blue * b.topo.n_blue() as f64 * avg;
                prop_assert!((total - b.topo.engagement.link_count() as f64).abs() < 1e-9);
            }
            None => prop_assert_eq!(b.topo.engagement.link_count(), 0),
        }
    }

    #[test]
    fn sacrificial_count_falls_with_threshold(b in battle()) {
        let counts: Vec<usize> = (1..12).map(|k| count_sacrificial(&b.topo, k)).collect();
        prop_assert!(counts.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn metrics_ignore_labels(b in battle(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pb = permutation(&mut rng, b.topo.n_blue());
        let pr = permutation(&mut rng, b.topo.n_red());
        let p = UtilityParams::new(0.3, 1.0).unwrap();
        let a = compute_metrics_with(&b.topo, &b.state, &p, 2);
        let c = compute_metrics_with(&b.topo.permuted(&pb, &pr), &b.state, &p, 2);
        prop_assert_eq!(a.n_sacrificial, c.n_sacrificial);
        prop_assert_eq!(a.max_red_manoeuvre_degree, c.max_red_manoeuvre_degree);
        prop_assert_eq!(a.frac_attacked_blue, c.frac_attacked_blue);
        prop_assert_eq!(a.avg_attacks_on_attacked, c.avg_attacks_on_attacked);
        prop_assert_eq!(a.avg_manoeuvre_degree_attacked_blue, c.avg_manoeuvre_degree_attacked_blue);
        prop_assert_eq!(a.avg_manoeuvre_degree_attacking_red, c.avg_manoeuvre_degree_attacking_red);
    }

    #[test]
    fn smoothed_step_is_monotone_and_odd(x in -1.0f64..1.0, dx in 0.0f64..0.1, eps in 1e-4f64..0.5) {
        prop_assert!(smoothed_step(x + dx, eps) >= smoothed_step(x, eps));
        prop_assert!((smoothed_step(x, eps) + smoothed_step(-x, eps) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn seed_networks_have_the_requested_counts(seed in any::<u64>(), n in 2usize..30, fm in 0.0f64..1.0, fe in 0.0f64..1.0) {
        let lm = (pair_count(n) as f64 * fm) as usize;
        let le = ((n * n) as f64 * fe) as usize;
        let t = seed_topology(n, lm, le, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(t.blue_manoeuvre.edge_count(), lm);
        prop_assert_eq!(t.red_manoeuvre.edge_count(), lm);
        prop_assert_eq!(t.engagement.link_count(), le);
    }

    #[test]
    fn a_move_touches_one_link(b in battle(), seed in any::<u64>(), allow in any::<bool>()) {
        let moves = MoveSet { allow_link_count_change: allow, ..MoveSet::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if let Some((next, kind)) = propose_move(&b.topo, &moves, &mut rng) {
            let (db, dr, de) = symmetric_difference(&b.topo, &next);
            prop_assert_eq!(db, 0);
            prop_assert_eq!(next.red_manoeuvre.edge_count(), b.topo.red_manoeuvre.edge_count());
            match kind {
                MoveKind::ManoeuvreRewire => prop_assert_eq!((dr, de), (2, 0)),
                MoveKind::EngageRewire => prop_assert_eq!((dr, de), (0, 2)),
                MoveKind::EngageAdd | MoveKind::EngageRemove => {
                    prop_assert!(allow);
                    prop_assert_eq!((dr, de), (0, 1));
                }
            }
        }
    }

    // RK4 overshoots the cutoff by up to dt times the fire a node receives;
    // the bound holds for kill-rates and levels of at most one.
    #[test]
    fn integration_keeps_levels_above_the_cutoff(b in battle()) {
        let config = BattleConfig {
            t_max: 20.0,
            kappa_blue: b.config.kappa_blue / 2.0,
            kappa_red: b.config.kappa_red / 2.0,
            ..b.config
        };
        let state = ForceState::new(
            b.state.blue.iter().map(|x| x / 2.0).collect(),
            b.state.red.iter().map(|x| x / 2.0).collect(),
        );
        let spec = ScenarioSpec::new(b.topo, config, state).unwrap();
        let traj = integrate(&spec, 50).unwrap();
        for s in traj.states.iter().chain(core::iter::once(&traj.terminal)) {
            prop_assert!(s.min_entry() >= -10.0 * config.eps_theta, "min {} at t {}", s.min_entry(), s.time);
        }
        prop_assert!(traj.sample_times.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(traj.states.last().unwrap(), &traj.terminal);
    }

    #[test]
    fn mirrored_battles_have_opposite_balance(b in battle()) {
        let config = BattleConfig { t_max: 10.0, ..b.config };
        let spec = ScenarioSpec::new(b.topo.clone(), config, b.state.clone()).unwrap();
        let mirror = ScenarioSpec::new(
            b.topo.mirrored(),
            mirrored_config(&config),
            ForceState::new(b.state.red.clone(), b.state.blue.clone()),
        )
        .unwrap();
        let (x, y) = (force_balance(&spec).unwrap(), force_balance(&mirror).unwrap());
        prop_assert!((x + y).abs() < 1e-9, "{} vs {}", x, y);
    }

    #[test]
    fn meanfield_invariant_is_conserved(
        n in 2.0f64..60.0, f1 in 0.0f64..1.0, k1 in 1.0f64..10.0, k2 in 1.0f64..10.0,
        kr in 0.1f64..2.0, kb in 0.1f64..2.0,
    ) {
        let spec = MeanFieldSpec::new(n, (n * f1).floor(), k1.min(n), k2.min(n), kr, kb).unwrap();
        let init = GroupState { r1: 1.0, r2: 1.0, b: 1.0 };
        let v0 = meanfield_invariant(init, &spec);
        let path = integrate_meanfield(init, &spec, 0.001, 500).unwrap();
        for s in path {
            let scale = 1.0 + v0.abs();
            prop_assert!((meanfield_invariant(s, &spec) - v0).abs() < 1e-8 * scale);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn hill_climbing_is_reproducible_and_monotone(seed in any::<u64>(), allow in any::<bool>(), lambda in 0.0f64..1.0) {
        let spec = quick_spec(seed, 5);
        let p = UtilityParams::new(lambda, 1.0).unwrap();
        let moves = MoveSet { allow_link_count_change: allow, ..MoveSet::default() };
        let a = optimize(&spec, &p, &moves, 30, seed).unwrap();
        let b = optimize(&spec, &p, &moves, 30, seed).unwrap();
        prop_assert_eq!(&a.trace, &b.trace);
        prop_assert_eq!(&a.best_topology, &b.best_topology);

        let accepted: Vec<f64> = a.accepted().map(|t| t.utility).collect();
        prop_assert!(accepted.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(accepted.first().is_none_or(|&u| u > a.seed_utility));
        prop_assert!(a.best_utility >= a.seed_utility);

        prop_assert_eq!(&a.best_topology.blue_manoeuvre, &spec.topology.blue_manoeuvre);
        prop_assert_eq!(a.best_topology.red_manoeuvre.edge_count(), spec.topology.red_manoeuvre.edge_count());
        if !allow {
            prop_assert!(a.trace.iter().all(|t| t.l_rb == spec.topology.engagement.link_count()));
        }
    }
}

#[test]
fn zero_iterations_return_the_seed() {
    let spec = quick_spec(3, 4);
    let p = UtilityParams::new(0.5, 1.0).unwrap();
    let run = optimize(&spec, &p, &MoveSet::default(), 0, 3).unwrap();
    assert!(run.trace.is_empty());
    assert_eq!(run.best_topology, spec.topology);
    assert_eq!(run.best_utility, run.seed_utility);
}
