//! Command implementations. Each takes a validated [`Config`] and writes
//! its data files into the output directory; [`execute`] adds the run
//! summary.

use std::fs;
use std::path::Path;
use std::time::Instant;

use lanchester_core::integrator::default_stride;
use lanchester_core::meanfield::{
    appendix_topology, integrate_meanfield, meanfield_invariant, optimal_split, required_force_fraction, split_value,
    victory_factor, victory_margin, GroupState, MeanFieldSpec,
};
use lanchester_core::metrics::StructuralMetrics;
use lanchester_core::scenarios::{
    build_case_study, critical_kappa, heatmap_cell, run_sweep_job, summarize_sweep, winner, CaseId, CaseStudySpec,
    HeatmapSpec, MetricsSummary, Outcome, SweepResult, SweepSettings, TopologySource,
};
use lanchester_core::{
    compute_metrics, integrate, optimize, BattleConfig, ModelError, ScenarioSpec, Side, Trajectory, UtilityParams,
};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{Config, SourceKind};
use crate::error::CliError;
use crate::formats::{trajectory_table, write_json, Cell, DataFormat, StateFile, Table, TopologyFile};
use crate::summary::{Command, RunManifest, RunSummary};

/// Output of one command before the summary is assembled.
struct Report {
    artifacts: Vec<String>,
    results: serde_json::Value,
}

struct Out<'a> {
    dir: &'a Path,
    format: DataFormat,
    artifacts: Vec<String>,
}

impl Out<'_> {
    fn table(&mut self, stem: &str, table: &Table) -> Result<(), CliError> {
        let name = table.write(self.dir, stem, self.format)?;
        self.artifacts.push(name);
        Ok(())
    }

    fn json<T: serde::Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        write_json(&self.dir.join(name), value)?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    fn topology(&mut self, name: &str, spec: &ScenarioSpec) -> Result<(), CliError> {
        self.json(name, &TopologyFile::from_topology(&spec.topology))
    }

    fn finish(self, results: serde_json::Value) -> Report {
        Report {
            artifacts: self.artifacts,
            results,
        }
    }
}

/// Runs `manifest.command` on `config`, writing data files and
/// `summary.json` into `manifest.output_dir`.
pub fn execute(manifest: &RunManifest, config: &Config) -> Result<RunSummary, CliError> {
    let started = Instant::now();
    let dir = &manifest.output_dir;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(manifest.workers)
        .build()
        .map_err(|e| CliError::config(format!("worker pool: {e}")))?;
    let out = Out {
        dir,
        format: manifest.format,
        artifacts: Vec::new(),
    };
    let report = pool.install(|| match manifest.command {
        Command::Simulate => simulate(config, out),
        Command::Optimize => optimize_cmd(config, out),
        Command::Sweep => sweep(config, out),
        Command::Heatmap => heatmap_cmd(config, out),
        Command::Casestudy => casestudy(config, out),
        Command::Meanfield => meanfield(config, out),
    })?;
    let summary = RunSummary {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        manifest: manifest.clone(),
        config: config.clone(),
        elapsed_seconds: started.elapsed().as_secs_f64(),
        artifacts: report.artifacts,
        results: report.results,
    };
    summary.write(dir)?;
    Ok(summary)
}

fn side_time(v: Option<(Side, f64)>) -> serde_json::Value {
    match v {
        Some((side, t)) => json!({ "side": side.to_string(), "time": t }),
        None => serde_json::Value::Null,
    }
}

fn outcome_of(traj: &Trajectory) -> Outcome {
    match traj.combat_defeat {
        Some((Side::Blue, _)) => Outcome::Red,
        Some((Side::Red, _)) => Outcome::Blue,
        None => Outcome::Stalemate,
    }
}

fn trajectory_results(spec: &ScenarioSpec, traj: &Trajectory) -> serde_json::Value {
    json!({
        "termination": traj.termination.as_str(),
        "hit_horizon": traj.hit_horizon,
        "annihilation": side_time(traj.annihilation),
        "combat_defeat": side_time(traj.combat_defeat),
        "outcome": outcome_of(traj).as_str(),
        "steps": traj.steps,
        "final_time": traj.terminal.time,
        "final_rate": traj.final_rate,
        "initial_blue_mean": spec.initial.mean(Side::Blue),
        "initial_red_mean": spec.initial.mean(Side::Red),
        "blue_mean": traj.blue_mean(),
        "red_mean": traj.red_mean(),
    })
}

fn stride(config: &Config, battle: &BattleConfig) -> usize {
    config.record_every().unwrap_or_else(|| default_stride(battle, 2000))
}

fn simulate(config: &Config, mut out: Out) -> Result<Report, CliError> {
    let spec = config.scenario(config.seed)?;
    let traj = integrate(&spec, stride(config, &spec.config))?;
    out.table("trajectory", &trajectory_table(&traj))?;
    out.topology("topology.json", &spec)?;
    out.json("terminal.json", &StateFile::from(&traj.terminal))?;
    Ok(out.finish(trajectory_results(&spec, &traj)))
}

fn metrics_columns() -> [&'static str; 10] {
    [
        "utility",
        "blue_mean",
        "red_mean",
        "n_sacrificial",
        "l_rb_per_node",
        "frac_attacked_blue",
        "avg_attacks_on_attacked",
        "max_red_manoeuvre_degree",
        "avg_manoeuvre_degree_attacked_blue",
        "avg_manoeuvre_degree_attacking_red",
    ]
}

fn metrics_cells(m: &StructuralMetrics) -> Vec<Cell> {
    vec![
        m.utility.into(),
        m.blue_mean.into(),
        m.red_mean.into(),
        m.n_sacrificial.into(),
        m.l_rb_per_node.into(),
        m.frac_attacked_blue.into(),
        m.avg_attacks_on_attacked.into(),
        m.max_red_manoeuvre_degree.into(),
        m.avg_manoeuvre_degree_attacked_blue.into(),
        m.avg_manoeuvre_degree_attacking_red.into(),
    ]
}

fn optimizer_settings(config: &Config) -> Result<&crate::config::OptimizerSection, CliError> {
    config
        .optimizer
        .as_ref()
        .ok_or_else(|| CliError::config("this command needs an [optimizer] section"))
}

fn optimize_cmd(config: &Config, mut out: Out) -> Result<Report, CliError> {
    let opt = optimizer_settings(config)?;
    let lambda = opt
        .lambda
        .ok_or_else(|| CliError::config("optimizer.lambda is required to optimize"))?;
    let spec = config.scenario(config.seed)?;
    let params = UtilityParams::new(lambda, spec.initial.mean(Side::Blue))?;
    let run = optimize(&spec, &params, &opt.moves, opt.iterations, config.seed)?;
    let best = ScenarioSpec {
        topology: run.best_topology.clone(),
        ..spec.clone()
    };
    let traj = integrate(&best, stride(config, &best.config))?;
    let metrics = compute_metrics(&run.best_topology, &run.best_terminal, &params);

    let mut trace = Table::new([
        "iteration",
        "utility",
        "blue_mean",
        "red_mean",
        "accepted",
        "l_rb",
        "move",
    ]);
    for e in &run.trace {
        trace.push(vec![
            e.iteration.into(),
            e.utility.into(),
            e.blue_mean.into(),
            e.red_mean.into(),
            e.accepted.into(),
            e.l_rb.into(),
            e.kind.map(|k| k.as_str()).into(),
        ]);
    }
    out.table("trace", &trace)?;
    let mut row = Table::new(["lambda", "kappa_red", "seed"].into_iter().chain(metrics_columns()));
    row.push(
        [lambda.into(), spec.config.kappa_red.into(), config.seed.into()]
            .into_iter()
            .chain(metrics_cells(&metrics))
            .collect(),
    );
    out.table("metrics", &row)?;
    out.topology("seed_topology.json", &spec)?;
    out.topology("best_topology.json", &best)?;
    out.table("best_trajectory", &trajectory_table(&traj))?;
    out.json("best_terminal.json", &StateFile::from(&run.best_terminal))?;
    Ok(out.finish(json!({
        "seed": run.seed,
        "lambda": lambda,
        "iterations": run.iterations,
        "seed_utility": run.seed_utility,
        "best_utility": run.best_utility,
        "accepted": run.accepted().count(),
        "failed_integrations": run.trace.iter().filter(|e| e.utility.is_nan()).count(),
        "metrics": metrics,
        "best": trajectory_results(&best, &traj),
    })))
}

fn sweep(config: &Config, mut out: Out) -> Result<Report, CliError> {
    let sw = config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::config("this command needs a [sweep] section"))?;
    let opt = optimizer_settings(config)?;
    let settings = SweepSettings {
        scenario: config.network_scenario()?,
        iterations: opt.iterations,
        moves: opt.moves,
        replicas: sw.replicas,
        best_k: sw.best_k,
        base_seed: config.seed,
    };
    settings.validate()?;
    let kappas = if sw.kappa_red.is_empty() {
        vec![config.battle.kappa_red]
    } else {
        sw.kappa_red.clone()
    };
    let points: Vec<(f64, f64)> = sw
        .lambdas
        .iter()
        .flat_map(|&l| kappas.iter().map(move |&k| (l, k)))
        .collect();
    let jobs = settings.jobs(&points);
    let results: Vec<SweepResult> = jobs
        .par_iter()
        .map(|job| run_sweep_job(&settings, job))
        .collect::<Result<_, _>>()?;

    let seed_columns = metrics_columns().map(|c| format!("seed_{c}"));
    let mut rows = Table::new(
        ["lambda", "kappa_red", "seed", "replica"]
            .into_iter()
            .map(String::from)
            .chain(metrics_columns().map(String::from))
            .chain(seed_columns),
    );
    let topo_dir = out.dir.join("topologies");
    fs::create_dir_all(&topo_dir).map_err(|e| CliError::io(&topo_dir, e))?;
    for r in &results {
        let j = r.job;
        rows.push(
            [j.lambda.into(), j.kappa_red.into(), j.seed.into(), j.replica.into()]
                .into_iter()
                .chain(metrics_cells(&r.metrics))
                .chain(metrics_cells(&r.seed_metrics))
                .collect(),
        );
        let name = format!(
            "topologies/lambda_{}_kappa_{}_seed_{}.json",
            j.lambda, j.kappa_red, j.seed
        );
        out.json(&name, &TopologyFile::from_topology(&r.run.best_topology))?;
    }
    out.table("sweep", &rows)?;
    let summaries = summarize_sweep(&points, &results, settings.best_k);
    out.table("sweep_summary", &summary_table(&summaries))?;
    Ok(out.finish(json!({
        "jobs": results.len(),
        "seeds": (0..settings.replicas).map(|r| settings.base_seed + r as u64).collect::<Vec<_>>(),
        "best_k": settings.best_k,
        "summary": summaries,
    })))
}

fn summary_table(summaries: &[MetricsSummary]) -> Table {
    let mut t = Table::new(["lambda", "kappa_red", "runs"].into_iter().chain(metrics_columns()));
    for s in summaries {
        t.push(vec![
            s.lambda.into(),
            s.kappa_red.into(),
            s.runs.into(),
            s.utility.into(),
            s.blue_mean.into(),
            s.red_mean.into(),
            s.n_sacrificial.into(),
            s.l_rb_per_node.into(),
            s.frac_attacked_blue.into(),
            s.avg_attacks_on_attacked.into(),
            s.max_red_manoeuvre_degree.into(),
            s.avg_manoeuvre_degree_attacked_blue.into(),
            s.avg_manoeuvre_degree_attacking_red.into(),
        ]);
    }
    t
}

fn heatmap_cmd(config: &Config, mut out: Out) -> Result<Report, CliError> {
    let h = config
        .heatmap
        .as_ref()
        .ok_or_else(|| CliError::config("this command needs a [heatmap] section"))?;
    let spec = HeatmapSpec {
        x: h.x.into(),
        y: h.y.into(),
        overrides: h.overrides.iter().map(|(p, v)| (*p, *v)).collect(),
        source: match h.source {
            SourceKind::Random => TopologySource::RandomSeed,
            SourceKind::Optimized => TopologySource::Optimized {
                lambda: h.lambda.unwrap_or_default(),
            },
        },
    };
    spec.validate()?;
    let seeds: Vec<u64> = (0..h.replicas as u64).map(|r| config.seed + r).collect();
    let bases: Vec<(ScenarioSpec, Option<f64>)> = seeds
        .par_iter()
        .map(|&seed| -> Result<_, CliError> {
            let base = config.scenario(seed)?;
            match spec.source {
                TopologySource::RandomSeed => Ok((base, None)),
                TopologySource::Optimized { lambda } => {
                    let opt = optimizer_settings(config)?;
                    let params = UtilityParams::new(lambda, base.initial.mean(Side::Blue))?;
                    let run = optimize(&base, &params, &opt.moves, opt.iterations, seed)?;
                    let best_utility = run.best_utility;
                    Ok((
                        ScenarioSpec {
                            topology: run.best_topology,
                            ..base
                        },
                        Some(best_utility),
                    ))
                }
            }
        })
        .collect::<Result<_, _>>()?;
    let cells = spec.cells();
    let work: Vec<(usize, usize, usize)> = (0..bases.len())
        .flat_map(|b| cells.iter().map(move |&(ix, iy)| (b, ix, iy)))
        .collect();
    let values: Vec<f64> = work
        .par_iter()
        .map(|&(b, ix, iy)| heatmap_cell(&spec, &bases[b].0, ix, iy))
        .collect::<Result<_, ModelError>>()?;
    let n_cells = cells.len();
    let mut table = Table::new(["x", "y", "value"]);
    for (c, &(ix, iy)) in cells.iter().enumerate() {
        let mean = (0..bases.len()).map(|b| values[b * n_cells + c]).sum::<f64>() / bases.len() as f64;
        table.push(vec![spec.x.value(ix).into(), spec.y.value(iy).into(), mean.into()]);
    }
    out.table("heatmap", &table)?;
    for (seed, (base, _)) in seeds.iter().zip(&bases) {
        out.topology(&format!("topology_seed_{seed}.json"), base)?;
    }
    Ok(out.finish(json!({
        "x": spec.x.param.as_str(),
        "y": spec.y.param.as_str(),
        "value": "red_mean / red_initial_mean - blue_mean / blue_initial_mean",
        "seeds": seeds,
        "optimized_utilities": bases.iter().map(|b| b.1).collect::<Vec<_>>(),
    })))
}

fn casestudy(config: &Config, mut out: Out) -> Result<Report, CliError> {
    let cs = config
        .casestudy
        .as_ref()
        .ok_or_else(|| CliError::config("this command needs a [casestudy] section or --case, --f-r, --kappa-r"))?;
    let case = CaseId::from_number(cs.case)?;
    let base = CaseStudySpec {
        case,
        f_r: cs.f_r,
        kappa_red: cs.kappa_red,
        config: config.battle,
        red_wiring: cs.red_wiring.iter().map(|&[a, b]| (a, b)).collect(),
    };
    let spec = build_case_study(&base)?;
    let traj = integrate(&spec, stride(config, &spec.config))?;
    let result = winner(&spec)?;
    out.table("trajectory", &trajectory_table(&traj))?;
    out.topology("topology.json", &spec)?;
    let mut results = trajectory_results(&spec, &traj);
    results["winner"] = result.as_str().into();
    results["case"] = case.number().into();

    if let Some(curve) = &cs.curve {
        let points: Vec<(f64, Option<f64>)> = curve
            .f_r
            .par_iter()
            .map(|&f_r| {
                let point = CaseStudySpec { f_r, ..base.clone() };
                match critical_kappa(&point, curve.kappa_lo, curve.kappa_hi, curve.tol) {
                    Ok(k) => Ok((f_r, Some(k))),
                    Err(ModelError::Unbracketed { .. }) => Ok((f_r, None)),
                    Err(e) => Err(e),
                }
            })
            .collect::<Result<_, _>>()?;
        let mut table = Table::new(["f_r", "kappa_red_star"]);
        for &(f, k) in &points {
            table.push(vec![f.into(), k.into()]);
        }
        out.table("critical_curve", &table)?;
        results["critical_curve_points"] = points.len().into();
        let own = points.iter().find(|p| p.0 == cs.f_r).and_then(|p| p.1);
        if own.is_some() {
            results["kappa_red_star"] = own.into();
        }
    }
    Ok(out.finish(results))
}

fn meanfield(config: &Config, mut out: Out) -> Result<Report, CliError> {
    let mf = config
        .meanfield
        .as_ref()
        .ok_or_else(|| CliError::config("this command needs a [meanfield] section or --n"))?;
    let n = mf.n;
    let nf = n as f64;

    let mut victory = Table::new([
        "n",
        "victory_factor",
        "margin_optimized",
        "margin_uniform",
        "required_force_fraction",
        "two_over_sqrt_n",
    ]);
    for m in 2..=n {
        let mf64 = m as f64;
        victory.push(vec![
            m.into(),
            victory_factor(mf64).into(),
            victory_margin(mf64, mf.kappa_red, mf.kappa_blue, mf.r0, mf.b0, true).into(),
            victory_margin(mf64, mf.kappa_red, mf.kappa_blue, mf.r0, mf.b0, false).into(),
            required_force_fraction(mf64).into(),
            (2.0 / mf64.sqrt()).into(),
        ]);
    }
    out.table("victory", &victory)?;

    let best = optimal_split(n)?;
    let mut surface = Table::new(["n1", "k1", "k2", "f"]);
    for k1 in 1..=n {
        for k2 in 1..=n {
            surface.push(vec![
                best.n1.into(),
                k1.into(),
                k2.into(),
                split_value(nf, best.n1 as f64, k1 as f64, k2 as f64).into(),
            ]);
        }
    }
    out.table("f_surface", &surface)?;

    let mut search = (0usize, 1usize, 1usize, f64::NEG_INFINITY);
    for n1 in 0..=n {
        for k1 in 1..=n {
            for k2 in 1..=n {
                let f = split_value(nf, n1 as f64, k1 as f64, k2 as f64);
                if f > search.3 {
                    search = (n1, k1, k2, f);
                }
            }
        }
    }

    let [n1, k1, k2] = mf.split.unwrap_or([best.n1, best.k1, best.k2]);
    let spec = MeanFieldSpec::new(nf, n1 as f64, k1 as f64, k2 as f64, mf.kappa_red, mf.kappa_blue)?;
    let init = GroupState {
        r1: mf.r0,
        r2: mf.r0,
        b: mf.b0,
    };
    let states = integrate_meanfield(init, &spec, mf.dt, mf.steps)?;
    let inv0 = meanfield_invariant(init, &spec);
    let mut traj = Table::new(["time", "r1", "r2", "b", "invariant"]);
    let mut drift = 0.0f64;
    for (i, s) in states.iter().enumerate() {
        let inv = meanfield_invariant(*s, &spec);
        drift = drift.max((inv - inv0).abs());
        traj.push(vec![
            (i as f64 * mf.dt).into(),
            s.r1.into(),
            s.r2.into(),
            s.b.into(),
            inv.into(),
        ]);
    }
    out.table("meanfield_trajectory", &traj)?;
    out.json(
        "appendix_topology.json",
        &TopologyFile::from_topology(&appendix_topology(n, n1, k1, k2)?),
    )?;

    Ok(out.finish(json!({
        "n": n,
        "victory_factor": victory_factor(nf),
        "margin_optimized": victory_margin(nf, mf.kappa_red, mf.kappa_blue, mf.r0, mf.b0, true),
        "margin_uniform": victory_margin(nf, mf.kappa_red, mf.kappa_blue, mf.r0, mf.b0, false),
        "required_force_fraction": required_force_fraction(nf),
        "optimal_split": { "n1": best.n1, "k1": best.k1, "k2": best.k2, "exact": best.exact },
        "exhaustive_best": { "n1": search.0, "k1": search.1, "k2": search.2, "f": search.3 },
        "trajectory_split": [n1, k1, k2],
        "invariant_initial": inv0,
        "invariant_max_drift": drift,
    })))
}
