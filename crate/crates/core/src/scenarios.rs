//! Experiment drivers: the two-versus-four case study, critical kill-rate
//! search, battle-outcome heatmaps and optimization sweeps.
//!
//! Everything here is sequential. Grid cells and replicas are independent
//! jobs, exposed individually so callers can distribute them.

use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::ModelError;
use crate::graph::{Adjacency, Engagement};
use crate::integrator::{integrate_with, run_to_end};
use crate::metrics::{compute_metrics, StructuralMetrics};
use crate::model::{BattleConfig, ForceState, ScenarioSpec, Side, Topology};
use crate::optimizer::{optimize, seed_topology, MoveSet, OptimizationRun, UtilityParams};

/// Reserve arrangements of the case study. Red nodes 0 and 1 fight, 2 and 3
/// are reserves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseId {
    /// Combat units matched at 0.5, reserves of `f_R / 2` each.
    EqualPlusReserves,
    /// Equal totals: combat units at `f_R / 2`, reserves share the rest.
    EqualTotal,
    /// Every Red node at `f_R / 2`.
    ExtraReserves,
}

impl CaseId {
    pub const ALL: [CaseId; 3] = [CaseId::EqualPlusReserves, CaseId::EqualTotal, CaseId::ExtraReserves];

    pub fn from_number(n: u32) -> Result<Self, ModelError> {
        match n {
            1 => Ok(CaseId::EqualPlusReserves),
            2 => Ok(CaseId::EqualTotal),
            3 => Ok(CaseId::ExtraReserves),
            _ => Err(ModelError::parameter(
                "case",
                alloc::format!("unknown case {n}, expected 1, 2 or 3"),
            )),
        }
    }

    pub fn number(self) -> u32 {
        match self {
            CaseId::EqualPlusReserves => 1,
            CaseId::EqualTotal => 2,
            CaseId::ExtraReserves => 3,
        }
    }

    /// Initial Red levels for fraction `f_r`.
    pub fn red_initial(self, f_r: f64) -> [f64; 4] {
        let h = f_r / 2.0;
        match self {
            CaseId::EqualPlusReserves => [0.5, 0.5, h, h],
            CaseId::EqualTotal => {
                let reserve = ((1.0 - f_r) / 2.0).max(0.0);
                [h, h, reserve, reserve]
            }
            CaseId::ExtraReserves => [h; 4],
        }
    }
}

/// Reserve 2 backs combat unit 0, reserve 3 backs combat unit 1, and the
/// reserves are linked to each other.
pub const DEFAULT_RESERVE_WIRING: [(usize, usize); 3] = [(0, 2), (1, 3), (2, 3)];

#[derive(Debug, Clone, PartialEq)]
pub struct CaseStudySpec {
    pub case: CaseId,
    pub f_r: f64,
    pub kappa_red: f64,
    /// Rates and integration controls; `kappa_red` above overrides the
    /// config's.
    pub config: BattleConfig,
    pub red_wiring: Vec<(usize, usize)>,
}

impl CaseStudySpec {
    pub fn new(case: CaseId, f_r: f64, kappa_red: f64) -> Self {
        CaseStudySpec {
            case,
            f_r,
            kappa_red,
            config: BattleConfig::default(),
            red_wiring: DEFAULT_RESERVE_WIRING.to_vec(),
        }
    }
}

/// Two Blue nodes without manoeuvre links, each engaging one Red combat
/// unit; four Red nodes wired per `red_wiring`.
pub fn build_case_study(spec: &CaseStudySpec) -> Result<ScenarioSpec, ModelError> {
    if !(spec.f_r > 0.0 && spec.f_r.is_finite()) {
        return Err(ModelError::parameter("f_r", "must be > 0"));
    }
    let topology = Topology::new(
        Adjacency::empty(2),
        Adjacency::from_edges(4, &spec.red_wiring)?,
        Engagement::from_links(2, 4, &[(0, 0), (1, 1)])?,
    )?;
    let config = BattleConfig {
        kappa_red: spec.kappa_red,
        ..spec.config
    };
    let initial = ForceState::new(vec![0.5, 0.5], spec.case.red_initial(spec.f_r).to_vec());
    ScenarioSpec::new(topology, config, initial)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Blue,
    Red,
    Stalemate,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Blue => "blue",
            Outcome::Red => "red",
            Outcome::Stalemate => "stalemate",
        }
    }
}

/// The side whose engaged nodes outlast the other's; a stalemate if both
/// are still fighting at `t_max`.
pub fn winner(spec: &ScenarioSpec) -> Result<Outcome, ModelError> {
    let traj = integrate_with(spec, 0, true)?;
    Ok(match traj.combat_defeat {
        Some((Side::Blue, _)) => Outcome::Red,
        Some((Side::Red, _)) => Outcome::Blue,
        None => Outcome::Stalemate,
    })
}

fn red_wins(base: &CaseStudySpec, kappa_red: f64) -> Result<bool, ModelError> {
    let spec = CaseStudySpec {
        kappa_red,
        ..base.clone()
    };
    Ok(winner(&build_case_study(&spec)?)? == Outcome::Red)
}

/// Bisects Red's kill-rate over `[lo, hi]` to width `tol` for the value at
/// which the case-study outcome flips to a Red win; returns the midpoint of
/// the final bracket. `base.kappa_red` is ignored.
pub fn critical_kappa(base: &CaseStudySpec, lo: f64, hi: f64, tol: f64) -> Result<f64, ModelError> {
    if !(lo < hi) || !(tol > 0.0) {
        return Err(ModelError::Unbracketed { lo, hi });
    }
    let red_lo = red_wins(base, lo)?;
    if red_lo == red_wins(base, hi)? {
        return Err(ModelError::Unbracketed { lo, hi });
    }
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if red_wins(base, mid)? == red_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `(f_R, kappa_R*)` over a grid of fractions; `None` where `[lo, hi]` does
/// not bracket the flip.
pub fn critical_curve(
    case: CaseId,
    fractions: &[f64],
    config: &BattleConfig,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<Vec<(f64, Option<f64>)>, ModelError> {
    fractions
        .iter()
        .map(|&f_r| {
            let base = CaseStudySpec {
                config: *config,
                ..CaseStudySpec::new(case, f_r, lo)
            };
            match critical_kappa(&base, lo, hi, tol) {
                Ok(k) => Ok((f_r, Some(k))),
                Err(ModelError::Unbracketed { .. }) => Ok((f_r, None)),
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// Rate parameters a heatmap axis can scan.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Param {
    KappaRed,
    KappaBlue,
    GammaRed,
    GammaBlue,
}

impl Param {
    pub fn as_str(self) -> &'static str {
        match self {
            Param::KappaRed => "kappa_red",
            Param::KappaBlue => "kappa_blue",
            Param::GammaRed => "gamma_red",
            Param::GammaBlue => "gamma_blue",
        }
    }

    pub fn apply(self, cfg: &mut BattleConfig, value: f64) {
        match self {
            Param::KappaRed => cfg.kappa_red = value,
            Param::KappaBlue => cfg.kappa_blue = value,
            Param::GammaRed => cfg.gamma_red = value,
            Param::GammaBlue => cfg.gamma_blue = value,
        }
    }
}

/// Evenly spaced values `lo..=hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub param: Param,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Axis {
    pub fn value(&self, i: usize) -> f64 {
        if self.steps <= 1 {
            return self.lo;
        }
        self.lo + (self.hi - self.lo) * i as f64 / (self.steps - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.steps).map(|i| self.value(i)).collect()
    }
}

/// Where a heatmap's fixed topology came from; carried through to outputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TopologySource {
    Optimized { lambda: f64 },
    RandomSeed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapSpec {
    pub x: Axis,
    pub y: Axis,
    /// Applied before the axis values.
    pub overrides: Vec<(Param, f64)>,
    pub source: TopologySource,
}

impl HeatmapSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.x.steps < 2 || self.y.steps < 2 {
            return Err(ModelError::parameter("heatmap", "grid resolutions must be >= 2"));
        }
        if self.x.param == self.y.param {
            return Err(ModelError::parameter("heatmap", "axes must scan different parameters"));
        }
        Ok(())
    }

    /// `(ix, iy)` for every cell, x fastest.
    pub fn cells(&self) -> Vec<(usize, usize)> {
        (0..self.y.steps)
            .flat_map(|iy| (0..self.x.steps).map(move |ix| (ix, iy)))
            .collect()
    }

    pub fn cell_config(&self, base: &BattleConfig, ix: usize, iy: usize) -> BattleConfig {
        let mut cfg = *base;
        for &(p, v) in &self.overrides {
            p.apply(&mut cfg, v);
        }
        self.x.param.apply(&mut cfg, self.x.value(ix));
        self.y.param.apply(&mut cfg, self.y.value(iy));
        cfg
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Row-major by y: `values[iy * xs.len() + ix]`.
    pub values: Vec<f64>,
}

impl HeatmapGrid {
    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.xs.len() + ix]
    }
}

/// Terminal Red minus Blue mean force, each relative to its initial mean.
pub fn force_balance(spec: &ScenarioSpec) -> Result<f64, ModelError> {
    let traj = run_to_end(spec)?;
    let norm = |side: Side| {
        let m = spec.initial.mean(side);
        if m > 0.0 {
            m
        } else {
            1.0
        }
    };
    Ok(traj.red_mean() / norm(Side::Red) - traj.blue_mean() / norm(Side::Blue))
}

pub fn heatmap_cell(spec: &HeatmapSpec, base: &ScenarioSpec, ix: usize, iy: usize) -> Result<f64, ModelError> {
    force_balance(&base.with_config(spec.cell_config(&base.config, ix, iy)))
}

/// Integrates `base` at every grid point.
pub fn heatmap(spec: &HeatmapSpec, base: &ScenarioSpec) -> Result<HeatmapGrid, ModelError> {
    spec.validate()?;
    let values = spec
        .cells()
        .into_iter()
        .map(|(ix, iy)| heatmap_cell(spec, base, ix, iy))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(HeatmapGrid {
        xs: spec.x.values(),
        ys: spec.y.values(),
        values,
    })
}

/// Random `n`-vs-`n` battles: uniform random manoeuvre graphs with
/// `l_manoeuvre` links per side and `l_engage` engagement links, every node
/// starting at `initial_level`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkScenario {
    pub n: usize,
    pub l_manoeuvre: usize,
    pub l_engage: usize,
    pub initial_level: f64,
    pub config: BattleConfig,
}

impl NetworkScenario {
    /// Fifty nodes a side, mean manoeuvre degree four, ten engagements,
    /// Red at half Blue's kill-rate.
    pub fn reference() -> Self {
        NetworkScenario {
            n: 50,
            l_manoeuvre: 100,
            l_engage: 10,
            initial_level: 1.0,
            config: BattleConfig {
                kappa_red: 0.5,
                kappa_blue: 1.0,
                ..BattleConfig::default()
            },
        }
    }

    pub fn instantiate(&self, seed: u64) -> Result<ScenarioSpec, ModelError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let topology = seed_topology(self.n, self.l_manoeuvre, self.l_engage, &mut rng)?;
        ScenarioSpec::new(
            topology,
            self.config,
            ForceState::uniform(self.n, self.n, self.initial_level),
        )
    }
}

/// One optimization run of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepJob {
    pub lambda: f64,
    pub kappa_red: f64,
    pub replica: usize,
    /// Seeds both the random starting networks and the hill-climber.
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub job: SweepJob,
    pub metrics: StructuralMetrics,
    /// Metrics of the random starting configuration.
    pub seed_metrics: StructuralMetrics,
    pub run: OptimizationRun,
}

/// Settings shared by every job of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSettings {
    pub scenario: NetworkScenario,
    pub iterations: usize,
    pub moves: MoveSet,
    pub replicas: usize,
    pub best_k: usize,
    pub base_seed: u64,
}

impl SweepSettings {
    /// Jobs for every `(lambda, kappa_red)` point, replicas inner. Replica
    /// `r` uses seed `base_seed + r` at every point.
    pub fn jobs(&self, points: &[(f64, f64)]) -> Vec<SweepJob> {
        points
            .iter()
            .flat_map(|&(lambda, kappa_red)| {
                (0..self.replicas).map(move |replica| SweepJob {
                    lambda,
                    kappa_red,
                    replica,
                    seed: self.base_seed + replica as u64,
                })
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.best_k == 0 || self.replicas < self.best_k {
            return Err(ModelError::parameter("replicas", "need replicas >= best_k >= 1"));
        }
        self.moves.validate()
    }
}

pub fn run_sweep_job(settings: &SweepSettings, job: &SweepJob) -> Result<SweepResult, ModelError> {
    let scenario = NetworkScenario {
        config: BattleConfig {
            kappa_red: job.kappa_red,
            ..settings.scenario.config
        },
        ..settings.scenario
    };
    let spec = scenario.instantiate(job.seed)?;
    let params = UtilityParams::new(job.lambda, spec.initial.mean(Side::Blue))?;
    let start = run_to_end(&spec)?;
    let seed_metrics = compute_metrics(&spec.topology, &start.terminal, &params);
    let run = optimize(&spec, &params, &settings.moves, settings.iterations, job.seed)?;
    let metrics = compute_metrics(&run.best_topology, &run.best_terminal, &params);
    Ok(SweepResult {
        job: *job,
        metrics,
        seed_metrics,
        run,
    })
}

/// Field-wise means of a set of metrics; `None` fields are skipped and
/// stay `None` when absent everywhere.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsSummary {
    pub lambda: f64,
    pub kappa_red: f64,
    pub runs: usize,
    pub utility: f64,
    pub blue_mean: f64,
    pub red_mean: f64,
    pub n_sacrificial: f64,
    pub l_rb_per_node: f64,
    pub frac_attacked_blue: f64,
    pub avg_attacks_on_attacked: Option<f64>,
    pub max_red_manoeuvre_degree: f64,
    pub avg_manoeuvre_degree_attacked_blue: Option<f64>,
    pub avg_manoeuvre_degree_attacking_red: Option<f64>,
}

pub fn average_metrics(lambda: f64, kappa_red: f64, ms: &[StructuralMetrics]) -> MetricsSummary {
    let n = ms.len().max(1) as f64;
    let avg = |f: fn(&StructuralMetrics) -> f64| ms.iter().map(f).sum::<f64>() / n;
    let avg_opt = |f: fn(&StructuralMetrics) -> Option<f64>| {
        let (s, c) = ms.iter().filter_map(f).fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
        (c > 0).then(|| s / c as f64)
    };
    MetricsSummary {
        lambda,
        kappa_red,
        runs: ms.len(),
        utility: avg(|m| m.utility),
        blue_mean: avg(|m| m.blue_mean),
        red_mean: avg(|m| m.red_mean),
        n_sacrificial: avg(|m| m.n_sacrificial as f64),
        l_rb_per_node: avg(|m| m.l_rb_per_node),
        frac_attacked_blue: avg(|m| m.frac_attacked_blue),
        avg_attacks_on_attacked: avg_opt(|m| m.avg_attacks_on_attacked),
        max_red_manoeuvre_degree: avg(|m| m.max_red_manoeuvre_degree as f64),
        avg_manoeuvre_degree_attacked_blue: avg_opt(|m| m.avg_manoeuvre_degree_attacked_blue),
        avg_manoeuvre_degree_attacking_red: avg_opt(|m| m.avg_manoeuvre_degree_attacking_red),
    }
}

/// The `best_k` results with highest utility; equal utilities keep replica
/// order.
pub fn top_results(results: &[SweepResult], best_k: usize) -> Vec<&SweepResult> {
    let mut ranked: Vec<&SweepResult> = results.iter().collect();
    ranked.sort_by(|a, b| {
        b.metrics
            .utility
            .total_cmp(&a.metrics.utility)
            .then(a.job.replica.cmp(&b.job.replica))
    });
    ranked.truncate(best_k);
    ranked
}

/// Groups results by point (in `points` order) and averages the top
/// `best_k` of each group.
pub fn summarize_sweep(points: &[(f64, f64)], results: &[SweepResult], best_k: usize) -> Vec<MetricsSummary> {
    points
        .iter()
        .map(|&(lambda, kappa_red)| {
            let group: Vec<SweepResult> = results
                .iter()
                .filter(|r| r.job.lambda == lambda && r.job.kappa_red == kappa_red)
                .cloned()
                .collect();
            let best: Vec<StructuralMetrics> = top_results(&group, best_k).into_iter().map(|r| r.metrics).collect();
            average_metrics(lambda, kappa_red, &best)
        })
        .collect()
}

/// Optimizes `replicas` random starts per `lambda` and averages the metrics
/// of the best `best_k`.
pub fn lambda_sweep(settings: &SweepSettings, lambdas: &[f64]) -> Result<Vec<MetricsSummary>, ModelError> {
    let points: Vec<(f64, f64)> = lambdas
        .iter()
        .map(|&l| (l, settings.scenario.config.kappa_red))
        .collect();
    sweep(settings, &points)
}

/// As [`lambda_sweep`] over Red kill-rates at a fixed `lambda`.
pub fn kappa_sweep(settings: &SweepSettings, lambda: f64, kappas: &[f64]) -> Result<Vec<MetricsSummary>, ModelError> {
    let points: Vec<(f64, f64)> = kappas.iter().map(|&k| (lambda, k)).collect();
    sweep(settings, &points)
}

fn sweep(settings: &SweepSettings, points: &[(f64, f64)]) -> Result<Vec<MetricsSummary>, ModelError> {
    settings.validate()?;
    let results = settings
        .jobs(points)
        .iter()
        .map(|job| run_sweep_job(settings, job))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(summarize_sweep(points, &results, settings.best_k))
}
