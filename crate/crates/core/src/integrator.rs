//! Fixed-step RK4 integration of a [`ScenarioSpec`].
//!
//! A run stops at the first of
//! * the vector field falling below `term_tol` in max-norm (after one side is
//!   annihilated only the survivor's nodes are checked, so the run ends once
//!   the survivor's reserves have equalized),
//! * `t_max`.
//!
//! The first time a side's mean force drops below `annihilation_tol` is
//! recorded as the battle outcome.

use alloc::vec;
use alloc::vec::Vec;

use crate::dynamics::{max_abs, Network, Scratch};
use crate::error::ModelError;
use crate::model::{BattleConfig, ForceState, ScenarioSpec, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    /// Both sides alive and stationary.
    Converged,
    /// `t_max` reached with both sides alive.
    Horizon,
    /// Blue's mean force fell below the annihilation tolerance.
    AnnihilationBlue,
    /// Red's mean force fell below the annihilation tolerance.
    AnnihilationRed,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::Horizon => "horizon",
            Termination::AnnihilationBlue => "annihilation_blue",
            Termination::AnnihilationRed => "annihilation_red",
        }
    }

    pub fn annihilated(self) -> Option<Side> {
        match self {
            Termination::AnnihilationBlue => Some(Side::Blue),
            Termination::AnnihilationRed => Some(Side::Red),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub sample_times: Vec<f64>,
    pub states: Vec<ForceState>,
    pub terminal: ForceState,
    pub termination: Termination,
    /// Side annihilated first and when.
    pub annihilation: Option<(Side, f64)>,
    /// First side whose engaged nodes' mean force fell below the
    /// annihilation tolerance, and when. Sides without engaged nodes are
    /// never defeated.
    pub combat_defeat: Option<(Side, f64)>,
    /// `true` when the run was cut by `t_max` rather than by stationarity.
    pub hit_horizon: bool,
    pub steps: usize,
    /// Max-norm of the vector field at the terminal state.
    pub final_rate: f64,
}

impl Trajectory {
    pub fn blue_mean(&self) -> f64 {
        self.terminal.mean(Side::Blue)
    }

    pub fn red_mean(&self) -> f64 {
        self.terminal.mean(Side::Red)
    }
}

/// Compiled network plus RK4 stage buffers.
struct Stepper<'a> {
    net: Network,
    cfg: &'a BattleConfig,
    scratch: Scratch,
    k: [(Vec<f64>, Vec<f64>); 4],
    tmp: (Vec<f64>, Vec<f64>),
}

impl<'a> Stepper<'a> {
    fn new(spec: &'a ScenarioSpec) -> Self {
        let net = Network::new(&spec.topology);
        let (nb, nr) = (net.n_blue(), net.n_red());
        let zero = || (vec![0.0; nb], vec![0.0; nr]);
        Stepper {
            scratch: Scratch::new(&net),
            net,
            cfg: &spec.config,
            k: [zero(), zero(), zero(), zero()],
            tmp: zero(),
        }
    }

    fn eval(&mut self, stage: usize, blue: &[f64], red: &[f64]) {
        let (db, dr) = &mut self.k[stage];
        self.net.eval(blue, red, self.cfg, db, dr, &mut self.scratch);
    }

    /// Derivative at the current state, kept in stage 0 for the next step.
    fn prime(&mut self, state: &ForceState) {
        self.eval(0, &state.blue, &state.red);
    }

    fn rate(&self, side: Option<Side>) -> f64 {
        let (db, dr) = &self.k[0];
        match side {
            None => max_abs(db).max(max_abs(dr)),
            Some(Side::Blue) => max_abs(db),
            Some(Side::Red) => max_abs(dr),
        }
    }

    /// Advances `state` by `dt`, assuming stage 0 holds its derivative, and
    /// leaves the derivative of the new state in stage 0.
    fn step(&mut self, state: &mut ForceState, dt: f64) {
        let h = 0.5 * dt;
        for (stage, c) in [(1usize, h), (2, h), (3, dt)] {
            let (pb, pr) = &self.k[stage - 1];
            for (t, (x, d)) in self.tmp.0.iter_mut().zip(state.blue.iter().zip(pb)) {
                *t = x + c * d;
            }
            for (t, (x, d)) in self.tmp.1.iter_mut().zip(state.red.iter().zip(pr)) {
                *t = x + c * d;
            }
            let (tb, tr) = core::mem::take(&mut self.tmp);
            self.eval(stage, &tb, &tr);
            self.tmp = (tb, tr);
        }
        let w = dt / 6.0;
        for (i, x) in state.blue.iter_mut().enumerate() {
            *x += w * (self.k[0].0[i] + 2.0 * self.k[1].0[i] + 2.0 * self.k[2].0[i] + self.k[3].0[i]);
        }
        for (l, x) in state.red.iter_mut().enumerate() {
            *x += w * (self.k[0].1[l] + 2.0 * self.k[1].1[l] + 2.0 * self.k[2].1[l] + self.k[3].1[l]);
        }
        state.time += dt;
        self.prime(state);
    }
}

/// One classical RK4 step of length `dt`.
pub fn rk4_step(state: &ForceState, spec: &ScenarioSpec, dt: f64) -> Result<ForceState, ModelError> {
    if !(dt > 0.0) {
        return Err(ModelError::parameter("dt", "must be > 0"));
    }
    crate::model::check_dims(&spec.topology, state)?;
    let mut stepper = Stepper::new(spec);
    let mut next = state.clone();
    stepper.prime(&next);
    stepper.step(&mut next, dt);
    if !next.is_finite() {
        return Err(ModelError::NonFinite { time: next.time });
    }
    Ok(next)
}

/// Number of steps between recorded samples that keeps a run within
/// `max_samples` samples.
pub fn default_stride(config: &BattleConfig, max_samples: usize) -> usize {
    let steps = libm::ceil(config.t_max / config.dt) as usize;
    steps.div_ceil(max_samples.max(1)).max(1)
}

/// Integrates `spec`, keeping every `record_every`-th state. With
/// `record_every == 0` only the terminal state is kept.
pub fn integrate(spec: &ScenarioSpec, record_every: usize) -> Result<Trajectory, ModelError> {
    integrate_with(spec, record_every, false)
}

/// Mean over the nodes listed in `idx`.
fn subset_mean(xs: &[f64], idx: &[usize]) -> f64 {
    idx.iter().map(|&i| xs[i]).sum::<f64>() / idx.len() as f64
}

/// As [`integrate`]; with `stop_at_defeat` the run ends as soon as one
/// side's engaged nodes are defeated.
pub fn integrate_with(
    spec: &ScenarioSpec,
    record_every: usize,
    stop_at_defeat: bool,
) -> Result<Trajectory, ModelError> {
    spec.validate()?;
    let e = &spec.topology.engagement;
    let engaged_blue: Vec<usize> = (0..e.n_blue()).filter(|&b| e.blue_degree(b) > 0).collect();
    let engaged_red: Vec<usize> = (0..e.n_red()).filter(|&r| e.red_degree(r) > 0).collect();
    let cfg = &spec.config;
    let mut stepper = Stepper::new(spec);
    let mut state = spec.initial.clone();
    let t0 = state.time;
    let n_steps_max = libm::ceil((cfg.t_max - 1e-9 * cfg.dt) / cfg.dt).max(0.0) as usize;

    let mut sample_times = Vec::new();
    let mut states = Vec::new();
    if record_every > 0 {
        sample_times.push(state.time);
        states.push(state.clone());
    }

    stepper.prime(&state);
    let mut annihilation: Option<(Side, f64)> = None;
    let mut combat_defeat: Option<(Side, f64)> = None;
    let mut steps = 0usize;
    let hit_horizon = loop {
        if combat_defeat.is_none() && !engaged_blue.is_empty() && !engaged_red.is_empty() {
            let b = subset_mean(&state.blue, &engaged_blue);
            let r = subset_mean(&state.red, &engaged_red);
            if b < cfg.annihilation_tol || r < cfg.annihilation_tol {
                let side = if b <= r { Side::Blue } else { Side::Red };
                combat_defeat = Some((side, state.time));
                if stop_at_defeat {
                    break false;
                }
            }
        }
        if annihilation.is_none() {
            let (b, r) = (state.mean(Side::Blue), state.mean(Side::Red));
            let tol = cfg.annihilation_tol;
            if b < tol || r < tol {
                let side = if b - tol <= r - tol { Side::Blue } else { Side::Red };
                annihilation = Some((side, state.time));
            }
        }
        let watched = annihilation.map(|(side, _)| side.opponent());
        if stepper.rate(watched) < cfg.term_tol {
            break false;
        }
        if steps >= n_steps_max {
            break true;
        }
        stepper.step(&mut state, cfg.dt);
        steps += 1;
        // Re-anchor time to avoid drift from repeated addition.
        state.time = t0 + steps as f64 * cfg.dt;
        if !state.is_finite() {
            return Err(ModelError::NonFinite { time: state.time });
        }
        if record_every > 0 && steps.is_multiple_of(record_every) {
            sample_times.push(state.time);
            states.push(state.clone());
        }
    };

    if sample_times.last() != Some(&state.time) {
        sample_times.push(state.time);
        states.push(state.clone());
    }
    let termination = match annihilation {
        Some((Side::Blue, _)) => Termination::AnnihilationBlue,
        Some((Side::Red, _)) => Termination::AnnihilationRed,
        None if hit_horizon => Termination::Horizon,
        None => Termination::Converged,
    };
    Ok(Trajectory {
        sample_times,
        states,
        final_rate: stepper.rate(None),
        terminal: state,
        termination,
        annihilation,
        combat_defeat,
        hit_horizon,
        steps,
    })
}

/// Integrates keeping only the terminal state.
pub fn run_to_end(spec: &ScenarioSpec) -> Result<Trajectory, ModelError> {
    integrate(spec, 0)
}
