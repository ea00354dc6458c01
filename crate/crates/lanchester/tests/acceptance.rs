//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the report is always printed; exits non-zero on any failure.
//!
//! The optimizer criteria run ten 10^4-iteration hill-climbs and dominate the
//! runtime (over an hour on one core).

use std::process::ExitCode;
use std::time::Instant;

use lanchester_core::graph::{Adjacency, Engagement};
use lanchester_core::meanfield::{
    appendix_topology, integrate_meanfield, meanfield_invariant, optimal_split, split_margin, split_value,
    victory_factor, victory_margin, GroupState, MeanFieldSpec,
};
use lanchester_core::scenarios::{
    build_case_study, critical_curve, critical_kappa, force_balance, run_sweep_job, summarize_sweep, winner, CaseId,
    CaseStudySpec, MetricsSummary, NetworkScenario, Outcome, SweepResult, SweepSettings,
};
use lanchester_core::{integrate, BattleConfig, ForceState, MoveSet, ScenarioSpec, Topology};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

struct Report {
    failed: Vec<&'static str>,
}

impl Report {
    fn record(&mut self, name: &'static str, pass: bool, detail: String, started: Instant) {
        println!(
            "{} {name}: {detail} [{:.1}s]",
            if pass { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64()
        );
        if !pass {
            self.failed.push(name);
        }
    }
}

fn manoeuvre_conservation(report: &mut Report) {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for n in [5, 12, 20, 35, 50] {
        let max_links = n * (n - 1) / 2;
        let links = [
            rng.random_range(n..=(3 * n).min(max_links)),
            rng.random_range(n..=(3 * n).min(max_links)),
        ];
        let topo = Topology::new(
            Adjacency::random(n, links[0], &mut rng).unwrap(),
            Adjacency::random(n, links[1], &mut rng).unwrap(),
            Engagement::empty(n, n),
        )
        .unwrap();
        let initial = ForceState::new(
            (0..n).map(|_| rng.random_range(0.2..1.8)).collect(),
            (0..n).map(|_| rng.random_range(0.2..1.8)).collect(),
        );
        let config = BattleConfig {
            t_max: 100.0,
            dt: 0.01,
            term_tol: f64::MIN_POSITIVE,
            ..BattleConfig::default()
        };
        let totals = |s: &ForceState| (s.blue.iter().sum::<f64>(), s.red.iter().sum::<f64>());
        let (b0, r0) = totals(&initial);
        let spec = ScenarioSpec::new(topo, config, initial).unwrap();
        let traj = integrate(&spec, 100).unwrap();
        assert!((traj.terminal.time - 100.0).abs() < 1e-9);
        for s in &traj.states {
            let (b, r) = totals(s);
            worst = worst.max((b - b0).abs()).max((r - r0).abs());
        }
    }
    report.record(
        "manoeuvre_conservation",
        worst < 1e-9,
        format!("max |drift| {worst:.2e} over t=100 on 5 networks (need < 1e-9)"),
        t,
    );
}

fn duel(kappa_red: f64, red0: f64) -> ScenarioSpec {
    let topo = Topology::new(
        Adjacency::empty(1),
        Adjacency::empty(1),
        Engagement::from_links(1, 1, &[(0, 0)]).unwrap(),
    )
    .unwrap();
    let config = BattleConfig {
        kappa_red,
        kappa_blue: 1.0,
        ..BattleConfig::default()
    };
    ScenarioSpec::new(topo, config, ForceState::new(vec![1.0], vec![red0])).unwrap()
}

fn square_law(report: &mut Report) {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    let mut wrong = Vec::new();
    for kappa_red in [0.5, 0.75, 1.0, 1.5, 2.0] {
        for red0 in [0.3, 0.5, 0.7, 0.9, 1.2] {
            let spec = duel(kappa_red, red0);
            let blue_strength = 1.0;
            let red_strength = kappa_red * red0 * red0;
            let (expected, k_winner) = if blue_strength > red_strength {
                (Outcome::Blue, 1.0)
            } else {
                (Outcome::Red, kappa_red)
            };
            let survivor = ((blue_strength - red_strength).abs() / k_winner).sqrt();
            let traj = integrate(&spec, 0).unwrap();
            let got = match expected {
                Outcome::Blue => traj.blue_mean(),
                _ => traj.red_mean(),
            };
            worst = worst.max((got - survivor).abs());
            if winner(&spec).unwrap() != expected {
                wrong.push((kappa_red, red0));
            }
        }
    }
    report.record(
        "square_law",
        worst < 2e-3 && wrong.is_empty(),
        format!("max survivor error {worst:.2e} (need < 2e-3), wrong winners {wrong:?}"),
        t,
    );
}

fn case_study_flip(report: &mut Report) {
    let t = Instant::now();
    let at = |k: f64| winner(&build_case_study(&CaseStudySpec::new(CaseId::ExtraReserves, 0.8, k)).unwrap()).unwrap();
    let (w91, w92) = (at(0.91), at(0.92));
    let star = critical_kappa(&CaseStudySpec::new(CaseId::ExtraReserves, 0.8, 0.0), 0.5, 1.5, 1e-4).unwrap();
    report.record(
        "case_study_flip",
        w91 == Outcome::Blue && w92 == Outcome::Red && (0.90..=0.93).contains(&star),
        format!(
            "kappa_R=0.91 -> {}, 0.92 -> {}, kappa_R* = {star:.5} (need blue, red, [0.90, 0.93])",
            w91.as_str(),
            w92.as_str()
        ),
        t,
    );
}

fn critical_curve_shape(report: &mut Report) {
    let t = Instant::now();
    let fractions: Vec<f64> = (3..=20).map(|i| i as f64 / 10.0).collect();
    let curves: Vec<Vec<(f64, Option<f64>)>> = CaseId::ALL
        .par_iter()
        .map(|&case| critical_curve(case, &fractions, &BattleConfig::default(), 0.01, 5.0, 1e-4).unwrap())
        .collect();

    // First grid fraction at which Red wins with a kill-rate below one.
    let crossing = |curve: &[(f64, Option<f64>)]| curve.iter().find(|(_, k)| k.is_some_and(|k| k < 1.0)).map(|p| p.0);
    let enters_grey = |curve: &[(f64, Option<f64>)]| curve.iter().any(|&(f, k)| f < 1.0 && k.is_some_and(|k| k < 1.0));
    let c2 = crossing(&curves[1]);
    let pass = c2.is_some_and(|f| f > 1.0) && enters_grey(&curves[0]) && enters_grey(&curves[2]);
    report.record(
        "critical_curve_shape",
        pass,
        format!(
            "case 2 reaches kappa_R* < 1 first at f_R = {c2:?} (need > 1); cases 1, 3 enter kappa_R < 1, f_R < 1: {}, {}",
            enters_grey(&curves[0]),
            enters_grey(&curves[2])
        ),
        t,
    );
}

fn desk_settings() -> SweepSettings {
    SweepSettings {
        scenario: NetworkScenario {
            n: 20,
            l_manoeuvre: 40,
            l_engage: 4,
            ..NetworkScenario::reference()
        },
        iterations: 10_000,
        moves: MoveSet::default(),
        replicas: 5,
        best_k: 5,
        base_seed: 0,
    }
}

fn optimizer_runs(lambda: f64) -> Vec<SweepResult> {
    let settings = desk_settings();
    let jobs = settings.jobs(&[(lambda, settings.scenario.config.kappa_red)]);
    jobs.par_iter()
        .map(|job| run_sweep_job(&settings, job).unwrap())
        .collect()
}

fn optimizer_improvement(report: &mut Report, runs: &[SweepResult], started: Instant) {
    let monotone = runs.iter().all(|r| {
        let accepted: Vec<f64> = r.run.accepted().map(|e| e.utility).collect();
        accepted.windows(2).all(|w| w[0] < w[1]) && accepted.first().is_none_or(|&u| u > r.run.seed_utility)
    });
    let red_ahead = runs.iter().filter(|r| r.metrics.red_mean > r.metrics.blue_mean).count();
    let blue_low = runs.iter().filter(|r| r.metrics.blue_mean < 0.2).count();
    let means: Vec<String> = runs
        .iter()
        .map(|r| {
            format!(
                "seed {} B={:.3} R={:.3}",
                r.job.seed, r.metrics.blue_mean, r.metrics.red_mean
            )
        })
        .collect();
    report.record(
        "optimizer_improvement",
        monotone && red_ahead >= 4 && blue_low >= 3,
        format!(
            "accepted utilities increasing: {monotone}; red > blue in {red_ahead}/5 (need >= 4); blue < 0.2 in {blue_low}/5 (need >= 3); {}",
            means.join(", ")
        ),
        started,
    );
}

fn summary_of(runs: &[SweepResult]) -> MetricsSummary {
    let point = (runs[0].job.lambda, runs[0].job.kappa_red);
    summarize_sweep(&[point], runs, desk_settings().best_k)[0]
}

fn lambda_transition(report: &mut Report, mid: &[SweepResult], started: Instant) {
    let high = optimizer_runs(0.9);
    let (a, b) = (summary_of(mid), summary_of(&high));
    report.record(
        "lambda_transition",
        a.n_sacrificial > b.n_sacrificial && b.max_red_manoeuvre_degree > a.max_red_manoeuvre_degree,
        format!(
            "n_sacrificial {:.2} at 0.5 vs {:.2} at 0.9 (need >); max red manoeuvre degree {:.2} at 0.9 vs {:.2} at 0.5 (need >); utilities {:.4}, {:.4}",
            a.n_sacrificial, b.n_sacrificial, b.max_red_manoeuvre_degree, a.max_red_manoeuvre_degree, a.utility, b.utility
        ),
        started,
    );
}

fn random_heatmap_diagonal(report: &mut Report) {
    let t = Instant::now();
    let kappas: Vec<f64> = (0..11).map(|i| i as f64 * 0.2).collect();
    let mut cells = Vec::new();
    for seed in 0..3u64 {
        for &kr in &kappas {
            for &kb in &kappas {
                if (kr - kb).abs() > 0.1 {
                    cells.push((seed, kr, kb));
                }
            }
        }
    }
    let reference = NetworkScenario::reference();
    let wrong: Vec<(u64, f64, f64, f64)> = cells
        .par_iter()
        .filter_map(|&(seed, kr, kb)| {
            let base = reference.instantiate(seed).unwrap();
            let spec = base.with_config(BattleConfig {
                kappa_red: kr,
                kappa_blue: kb,
                ..base.config
            });
            let balance = force_balance(&spec).unwrap();
            (balance.signum() != (kr - kb).signum() || balance == 0.0).then_some((seed, kr, kb, balance))
        })
        .collect();
    report.record(
        "random_heatmap_diagonal",
        wrong.is_empty(),
        format!(
            "{} off-diagonal cells over 3 random 50-node networks, {} with the wrong sign {:?}",
            cells.len(),
            wrong.len(),
            &wrong[..wrong.len().min(5)]
        ),
        t,
    );
}

fn exhaustive_split(n: usize) -> Vec<(usize, usize, usize)> {
    let mut best = f64::NEG_INFINITY;
    let mut argmax = Vec::new();
    for n1 in 0..=n {
        for k1 in 1..=n {
            for k2 in 1..=n {
                let f = split_value(n as f64, n1 as f64, k1 as f64, k2 as f64);
                if f > best + 1e-12 {
                    best = f;
                    argmax.clear();
                }
                if (f - best).abs() <= 1e-12 {
                    argmax.push((n1, k1, k2));
                }
            }
        }
    }
    argmax
}

/// Largest invariant drift while every group is still alive; past the
/// first annihilation the unclipped system no longer describes a battle.
fn battle_drift(spec: &MeanFieldSpec) -> (f64, f64) {
    let init = GroupState {
        r1: 1.0,
        r2: 1.0,
        b: 1.0,
    };
    let v0 = meanfield_invariant(init, spec);
    let (mut battle, mut overall): (f64, f64) = (0.0, 0.0);
    let mut alive = true;
    for s in integrate_meanfield(init, spec, 0.01, 1000).unwrap() {
        let d = (meanfield_invariant(s, spec) - v0).abs();
        alive &= s.r1 >= 0.0 && s.r2 >= 0.0 && s.b >= 0.0;
        if alive {
            battle = battle.max(d);
        }
        overall = overall.max(d);
    }
    (battle, overall)
}

fn engine_winner(n: usize, split: (usize, usize, usize), kr: f64, kb: f64) -> Outcome {
    let topo = appendix_topology(n, split.0, split.1, split.2).unwrap();
    let config = BattleConfig {
        kappa_red: kr,
        kappa_blue: kb,
        ..BattleConfig::default()
    };
    winner(&ScenarioSpec::new(topo, config, ForceState::uniform(n, n, 1.0)).unwrap()).unwrap()
}

fn meanfield_suite(report: &mut Report) {
    let t = Instant::now();
    let (mut drift, mut unclipped): (f64, f64) = (0.0, 0.0);
    for (n, n1, k1, k2, kr, kb) in [
        (50.0, 25.0, 1.0, 50.0, 1.0, 1.0),
        (50.0, 25.0, 1.0, 50.0, 0.05, 1.0),
        (10.0, 5.0, 1.0, 10.0, 0.5, 2.0),
        (20.0, 7.0, 3.0, 11.0, 1.3, 0.4),
        (12.0, 12.0, 4.0, 4.0, 1.0, 1.0),
    ] {
        let (d, u) = battle_drift(&MeanFieldSpec::new(n, n1, k1, k2, kr, kb).unwrap());
        drift = drift.max(d);
        unclipped = unclipped.max(u);
    }

    let split_mismatch: Vec<usize> = (2..=12)
        .step_by(2)
        .filter(|&n| {
            let s = optimal_split(n).unwrap();
            !exhaustive_split(n).contains(&(s.n1, s.k1, s.k2))
        })
        .collect();

    let factor = victory_factor(50.0);

    // Engine battles at n = 10 on splits in which every Blue node sees the
    // same number of attackers from each group. Grid ratios keep clear of
    // the predicted boundaries.
    let grid_r = [0.2, 0.4, 0.8, 1.6, 3.2];
    let grid_b = [0.25, 0.5, 1.0, 2.0, 4.0];
    let mut cells = 0;
    let mut disagreements = Vec::new();
    for split in [(10, 3, 3), (5, 2, 10), (2, 5, 10)] {
        for &kr in &grid_r {
            for &kb in &grid_b {
                let margin = if split.1 == split.2 {
                    victory_margin(10.0, kr, kb, 1.0, 1.0, false)
                } else {
                    let spec =
                        MeanFieldSpec::new(10.0, split.0 as f64, split.1 as f64, split.2 as f64, kr, kb).unwrap();
                    split_margin(&spec, 1.0, 1.0)
                };
                let predicted = if margin > 0.0 { Outcome::Red } else { Outcome::Blue };
                let got = engine_winner(10, split, kr, kb);
                cells += 1;
                if got != predicted {
                    disagreements.push((split, kr, kb, got.as_str()));
                }
            }
        }
    }
    // The optimal split itself leaves half of Blue outside the focused
    // group's reach, so its battles are reported but not gated.
    let mut optimal_agree = 0;
    let mut optimal_stalemates = 0;
    for &kr in &grid_r {
        for &kb in &grid_b {
            let predicted = if victory_margin(10.0, kr, kb, 1.0, 1.0, true) > 0.0 {
                Outcome::Red
            } else {
                Outcome::Blue
            };
            match engine_winner(10, (5, 1, 10), kr, kb) {
                w if w == predicted => optimal_agree += 1,
                Outcome::Stalemate => optimal_stalemates += 1,
                _ => {}
            }
        }
    }

    let pass = drift < 1e-8 && split_mismatch.is_empty() && factor == 13.005 && disagreements.is_empty();
    report.record(
        "meanfield_suite",
        pass,
        format!(
            "invariant drift {drift:.2e} up to first annihilation (need < 1e-8; {unclipped:.2e} on the unclipped continuation); \
             optimal_split mismatches at n = {split_mismatch:?}; factor(50) = {factor}; \
             engine vs margin disagreements {disagreements:?} of {cells}; \
             optimal split (5, 1, 10): {optimal_agree}/25 agree, {optimal_stalemates} stalemates"
        ),
        t,
    );
}

type Criterion = (&'static str, fn(&mut Report));

fn main() -> ExitCode {
    // Like libtest, a free argument selects criteria by substring.
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let selected = |name: &str| filter.as_deref().is_none_or(|f| name.contains(f));
    let mut report = Report { failed: Vec::new() };
    let quick: [Criterion; 6] = [
        ("manoeuvre_conservation", manoeuvre_conservation),
        ("square_law", square_law),
        ("case_study_flip", case_study_flip),
        ("critical_curve_shape", critical_curve_shape),
        ("random_heatmap_diagonal", random_heatmap_diagonal),
        ("meanfield_suite", meanfield_suite),
    ];
    let mut ran = 0;
    for (name, run) in quick {
        if selected(name) {
            run(&mut report);
            ran += 1;
        }
    }
    let (improve, transition) = (selected("optimizer_improvement"), selected("lambda_transition"));
    if improve || transition {
        let t = Instant::now();
        let mid = optimizer_runs(0.5);
        if improve {
            optimizer_improvement(&mut report, &mid, t);
            ran += 1;
        }
        if transition {
            lambda_transition(&mut report, &mid, Instant::now());
            ran += 1;
        }
    }

    if report.failed.is_empty() {
        println!("acceptance: {ran} criteria pass");
        ExitCode::SUCCESS
    } else {
        println!(
            "acceptance: {} of {ran} failed: {}",
            report.failed.len(),
            report.failed.join(", ")
        );
        ExitCode::FAILURE
    }
}
