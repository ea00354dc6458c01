//! Stochastic hill-climbing over Red's manoeuvre and engagement networks.
//!
//! Each iteration applies one random link operation to Red's configuration,
//! integrates the battle to its terminal state and keeps the change only if
//! Red's utility strictly improves. Blue's networks are never touched.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::ModelError;
use crate::graph::{Adjacency, Engagement};
use crate::integrator::run_to_end;
use crate::model::{ForceState, ScenarioSpec, Side, Topology};

/// Red's offence/defence trade-off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilityParams {
    /// Weight on Red's own surviving force; `1 - lambda` weighs Blue's losses.
    pub lambda: f64,
    /// Blue's initial mean force.
    pub initial_blue_mean: f64,
}

impl UtilityParams {
    pub fn new(lambda: f64, initial_blue_mean: f64) -> Result<Self, ModelError> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(ModelError::parameter(
                "lambda",
                alloc::format!("must lie in [0, 1], got {lambda}"),
            ));
        }
        Ok(UtilityParams {
            lambda,
            initial_blue_mean,
        })
    }
}

/// `lambda * mean(R) + (1 - lambda) * (B(0) - mean(B))`.
pub fn utility(terminal: &ForceState, params: &UtilityParams) -> f64 {
    let lambda = params.lambda;
    lambda * terminal.mean(Side::Red) + (1.0 - lambda) * (params.initial_blue_mean - terminal.mean(Side::Blue))
}

/// Probabilities of the four move classes.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoveSet {
    pub p_manoeuvre: f64,
    pub p_engage_rewire: f64,
    pub p_engage_add: f64,
    pub p_engage_remove: f64,
    /// When off, engagement links can only be moved, never added or removed.
    pub allow_link_count_change: bool,
}

impl Default for MoveSet {
    fn default() -> Self {
        MoveSet {
            p_manoeuvre: 0.5,
            p_engage_rewire: 0.25,
            p_engage_add: 0.125,
            p_engage_remove: 0.125,
            allow_link_count_change: true,
        }
    }
}

impl MoveSet {
    pub fn validate(&self) -> Result<(), ModelError> {
        let ps = [
            self.p_manoeuvre,
            self.p_engage_rewire,
            self.p_engage_add,
            self.p_engage_remove,
        ];
        if ps.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
            return Err(ModelError::parameter("move probabilities", "must be finite and >= 0"));
        }
        let sum: f64 = ps.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(ModelError::parameter(
                "move probabilities",
                alloc::format!("must sum to 1, got {sum}"),
            ));
        }
        Ok(())
    }

    fn weight(&self, kind: MoveKind) -> f64 {
        match kind {
            MoveKind::ManoeuvreRewire => self.p_manoeuvre,
            MoveKind::EngageRewire => self.p_engage_rewire,
            MoveKind::EngageAdd => self.p_engage_add,
            MoveKind::EngageRemove => self.p_engage_remove,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MoveKind {
    ManoeuvreRewire,
    EngageRewire,
    EngageAdd,
    EngageRemove,
}

impl MoveKind {
    pub const ALL: [MoveKind; 4] = [
        MoveKind::ManoeuvreRewire,
        MoveKind::EngageRewire,
        MoveKind::EngageAdd,
        MoveKind::EngageRemove,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MoveKind::ManoeuvreRewire => "manoeuvre_rewire",
            MoveKind::EngageRewire => "engage_rewire",
            MoveKind::EngageAdd => "engage_add",
            MoveKind::EngageRemove => "engage_remove",
        }
    }
}

/// Random networks for an `n`-vs-`n` battle: both manoeuvre networks are
/// uniform simple graphs with `l_manoeuvre` links and the engagement network
/// holds `l_engage` distinct Blue-Red pairs.
pub fn seed_topology<R: Rng + ?Sized>(
    n: usize,
    l_manoeuvre: usize,
    l_engage: usize,
    rng: &mut R,
) -> Result<Topology, ModelError> {
    let blue = Adjacency::random(n, l_manoeuvre, rng)?;
    let red = Adjacency::random(n, l_manoeuvre, rng)?;
    let engagement = Engagement::random(n, n, l_engage, rng)?;
    Topology::new(blue, red, engagement)
}

fn feasible(topo: &Topology, moves: &MoveSet, kind: MoveKind) -> bool {
    let red = &topo.red_manoeuvre;
    let e = &topo.engagement;
    match kind {
        MoveKind::ManoeuvreRewire => red.edge_count() > 0 && red.vacancy_count() > 0,
        MoveKind::EngageRewire => e.link_count() > 0 && e.vacancy_count() > 0,
        MoveKind::EngageAdd => moves.allow_link_count_change && e.vacancy_count() > 0,
        MoveKind::EngageRemove => moves.allow_link_count_change && e.link_count() > 0,
    }
}

/// Applies one random link operation to a copy of `topo`. Move classes that
/// cannot act on `topo` are skipped; `None` when no class can act.
pub fn propose_move<R: Rng + ?Sized>(topo: &Topology, moves: &MoveSet, rng: &mut R) -> Option<(Topology, MoveKind)> {
    let mut weights = [0.0; 4];
    for (w, kind) in weights.iter_mut().zip(MoveKind::ALL) {
        if feasible(topo, moves, kind) {
            *w = moves.weight(kind);
        }
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let mut u = rng.random::<f64>() * total;
    let mut kind = MoveKind::ALL[3];
    for (w, k) in weights.iter().zip(MoveKind::ALL) {
        if *w > 0.0 {
            kind = k;
            if u < *w {
                break;
            }
            u -= w;
        }
    }

    let mut next = topo.clone();
    match kind {
        MoveKind::ManoeuvreRewire => {
            let red = &mut next.red_manoeuvre;
            let (i, j) = pick(red.edges(), red.edge_count(), rng);
            let (a, b) = pick(red.vacancies(), red.vacancy_count(), rng);
            red.remove(i, j);
            red.insert(a, b);
        }
        MoveKind::EngageRewire => {
            let e = &mut next.engagement;
            let (b, r) = pick(e.links(), e.link_count(), rng);
            let (b2, r2) = pick(e.vacancies(), e.vacancy_count(), rng);
            e.remove(b, r);
            e.insert(b2, r2);
        }
        MoveKind::EngageAdd => {
            let e = &mut next.engagement;
            let (b, r) = pick(e.vacancies(), e.vacancy_count(), rng);
            e.insert(b, r);
        }
        MoveKind::EngageRemove => {
            let e = &mut next.engagement;
            let (b, r) = pick(e.links(), e.link_count(), rng);
            e.remove(b, r);
        }
    }
    Some((next, kind))
}

fn pick<T, R: Rng + ?Sized>(mut items: impl Iterator<Item = T>, len: usize, rng: &mut R) -> T {
    let k = rng.random_range(0..len);
    items.nth(k).expect("index within iterator length")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub iteration: usize,
    /// Utility of the proposed configuration, NaN if its integration failed.
    pub utility: f64,
    pub blue_mean: f64,
    pub red_mean: f64,
    pub accepted: bool,
    /// Engagement link count of the configuration kept after this iteration.
    pub l_rb: usize,
    pub kind: Option<MoveKind>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationRun {
    pub seed: u64,
    pub iterations: usize,
    pub seed_utility: f64,
    pub best_utility: f64,
    pub best_topology: Topology,
    pub best_terminal: ForceState,
    pub trace: Vec<TraceEntry>,
}

impl OptimizationRun {
    pub fn accepted(&self) -> impl Iterator<Item = &TraceEntry> {
        self.trace.iter().filter(|t| t.accepted)
    }
}

/// Hill-climbs Red's networks from `spec.topology` with a ChaCha8 stream
/// seeded by `seed`.
pub fn optimize(
    spec: &ScenarioSpec,
    params: &UtilityParams,
    moves: &MoveSet,
    iterations: usize,
    seed: u64,
) -> Result<OptimizationRun, ModelError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut run = optimize_with_rng(spec, params, moves, iterations, &mut rng)?;
    run.seed = seed;
    Ok(run)
}

/// As [`optimize`] with a caller-supplied generator; `seed` in the result is 0.
pub fn optimize_with_rng<R: Rng + ?Sized>(
    spec: &ScenarioSpec,
    params: &UtilityParams,
    moves: &MoveSet,
    iterations: usize,
    rng: &mut R,
) -> Result<OptimizationRun, ModelError> {
    moves.validate()?;
    let start = run_to_end(spec)?;
    let seed_utility = utility(&start.terminal, params);
    let mut current = spec.clone();
    let mut best_utility = seed_utility;
    let mut best_terminal = start.terminal;
    let mut trace = Vec::with_capacity(iterations);

    for iteration in 0..iterations {
        let Some((candidate, kind)) = propose_move(&current.topology, moves, rng) else {
            trace.push(TraceEntry {
                iteration,
                utility: best_utility,
                blue_mean: best_terminal.mean(Side::Blue),
                red_mean: best_terminal.mean(Side::Red),
                accepted: false,
                l_rb: current.topology.engagement.link_count(),
                kind: None,
            });
            continue;
        };
        let trial = ScenarioSpec {
            topology: candidate,
            config: current.config,
            initial: current.initial.clone(),
        };
        let entry = match run_to_end(&trial) {
            Ok(traj) => {
                let u = utility(&traj.terminal, params);
                let accepted = u > best_utility;
                let (b, r) = (traj.blue_mean(), traj.red_mean());
                if accepted {
                    best_utility = u;
                    best_terminal = traj.terminal;
                    current = trial;
                }
                TraceEntry {
                    iteration,
                    utility: u,
                    blue_mean: b,
                    red_mean: r,
                    accepted,
                    l_rb: current.topology.engagement.link_count(),
                    kind: Some(kind),
                }
            }
            Err(_) => TraceEntry {
                iteration,
                utility: f64::NAN,
                blue_mean: f64::NAN,
                red_mean: f64::NAN,
                accepted: false,
                l_rb: current.topology.engagement.link_count(),
                kind: Some(kind),
            },
        };
        trace.push(entry);
    }

    Ok(OptimizationRun {
        seed: 0,
        iterations,
        seed_utility,
        best_utility,
        best_topology: current.topology,
        best_terminal,
        trace,
    })
}
