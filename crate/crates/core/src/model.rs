//! Domain types shared by every module.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::ModelError;
use crate::graph::{Adjacency, Engagement};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Blue,
    Red,
}

impl Side {
    pub fn opponent(self) -> Side {
        match self {
            Side::Blue => Side::Red,
            Side::Red => Side::Blue,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Blue => "blue",
            Side::Red => "red",
        })
    }
}

/// Per-node resource of both forces at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceState {
    pub blue: Vec<f64>,
    pub red: Vec<f64>,
    pub time: f64,
}

impl ForceState {
    pub fn new(blue: Vec<f64>, red: Vec<f64>) -> Self {
        ForceState { blue, red, time: 0.0 }
    }

    /// Every node of both sides at `level`.
    pub fn uniform(n_blue: usize, n_red: usize, level: f64) -> Self {
        Self::new(vec![level; n_blue], vec![level; n_red])
    }

    pub fn side(&self, side: Side) -> &[f64] {
        match side {
            Side::Blue => &self.blue,
            Side::Red => &self.red,
        }
    }

    pub fn mean(&self, side: Side) -> f64 {
        let xs = self.side(side);
        if xs.is_empty() {
            0.0
        } else {
            xs.iter().sum::<f64>() / xs.len() as f64
        }
    }

    pub fn is_finite(&self) -> bool {
        self.time.is_finite() && self.blue.iter().chain(&self.red).all(|x| x.is_finite())
    }

    /// Smallest entry over both sides, `+inf` for an empty state.
    pub fn min_entry(&self) -> f64 {
        self.blue.iter().chain(&self.red).copied().fold(f64::INFINITY, f64::min)
    }
}

/// The three networks of a battle.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Topology {
    pub blue_manoeuvre: Adjacency,
    pub red_manoeuvre: Adjacency,
    pub engagement: Engagement,
}

impl Topology {
    pub fn new(
        blue_manoeuvre: Adjacency,
        red_manoeuvre: Adjacency,
        engagement: Engagement,
    ) -> Result<Self, ModelError> {
        let topo = Topology {
            blue_manoeuvre,
            red_manoeuvre,
            engagement,
        };
        topo.validate()?;
        Ok(topo)
    }

    pub fn empty(n_blue: usize, n_red: usize) -> Self {
        Topology {
            blue_manoeuvre: Adjacency::empty(n_blue),
            red_manoeuvre: Adjacency::empty(n_red),
            engagement: Engagement::empty(n_blue, n_red),
        }
    }

    pub fn n_blue(&self) -> usize {
        self.blue_manoeuvre.len()
    }

    pub fn n_red(&self) -> usize {
        self.red_manoeuvre.len()
    }

    pub fn manoeuvre(&self, side: Side) -> &Adjacency {
        match side {
            Side::Blue => &self.blue_manoeuvre,
            Side::Red => &self.red_manoeuvre,
        }
    }

    pub fn size(&self, side: Side) -> usize {
        self.manoeuvre(side).len()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.engagement.n_blue() != self.n_blue() {
            return Err(ModelError::Dimension {
                what: "engagement rows",
                expected: self.n_blue(),
                found: self.engagement.n_blue(),
            });
        }
        if self.engagement.n_red() != self.n_red() {
            return Err(ModelError::Dimension {
                what: "engagement columns",
                expected: self.n_red(),
                found: self.engagement.n_red(),
            });
        }
        Ok(())
    }

    /// Relabels Blue node `i` as `blue_perm[i]` and Red node `l` as
    /// `red_perm[l]` across all three networks.
    pub fn permuted(&self, blue_perm: &[usize], red_perm: &[usize]) -> Self {
        Topology {
            blue_manoeuvre: self.blue_manoeuvre.permuted(blue_perm),
            red_manoeuvre: self.red_manoeuvre.permuted(red_perm),
            engagement: self.engagement.permuted(blue_perm, red_perm),
        }
    }

    /// Exchanges the roles of the two sides.
    pub fn mirrored(&self) -> Self {
        let mut engagement = Engagement::empty(self.n_red(), self.n_blue());
        for (b, r) in self.engagement.links() {
            engagement.insert(r, b);
        }
        Topology {
            blue_manoeuvre: self.red_manoeuvre.clone(),
            red_manoeuvre: self.blue_manoeuvre.clone(),
            engagement,
        }
    }
}

/// Rates, regularizers and integration controls.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BattleConfig {
    /// Blue kill-rate.
    pub kappa_blue: f64,
    /// Red kill-rate.
    pub kappa_red: f64,
    /// Blue manoeuvre rate.
    pub gamma_blue: f64,
    /// Red manoeuvre rate.
    pub gamma_red: f64,
    /// Width of the smoothed step cutting off depleted nodes.
    pub eps_theta: f64,
    /// Regularizer of the manoeuvre weight, the "standing force" a node
    /// facing no opposition keeps.
    pub eps_delta: f64,
    /// Level below which a node stops taking part in manoeuvre.
    pub theta_floor: f64,
    pub dt: f64,
    pub t_max: f64,
    /// Max-norm of the vector field below which the battle is stationary.
    pub term_tol: f64,
    /// Mean force below which a side counts as annihilated.
    pub annihilation_tol: f64,
}

impl Default for BattleConfig {
    fn default() -> Self {
        BattleConfig {
            kappa_blue: 1.0,
            kappa_red: 1.0,
            gamma_blue: 1.0,
            gamma_red: 1.0,
            eps_theta: 1e-3,
            eps_delta: 1.0,
            theta_floor: 0.0,
            dt: 0.01,
            t_max: 200.0,
            term_tol: 1e-6,
            annihilation_tol: 1e-3,
        }
    }
}

impl BattleConfig {
    pub fn kappa(&self, side: Side) -> f64 {
        match side {
            Side::Blue => self.kappa_blue,
            Side::Red => self.kappa_red,
        }
    }

    pub fn gamma(&self, side: Side) -> f64 {
        match side {
            Side::Blue => self.gamma_blue,
            Side::Red => self.gamma_red,
        }
    }

    /// All violated constraints, empty when valid.
    pub fn problems(&self) -> Vec<ModelError> {
        let mut out = Vec::new();
        let rates = [
            ("kappa_blue", self.kappa_blue),
            ("kappa_red", self.kappa_red),
            ("gamma_blue", self.gamma_blue),
            ("gamma_red", self.gamma_red),
        ];
        for (name, v) in rates {
            if !(v >= 0.0 && v.is_finite()) {
                out.push(ModelError::parameter(
                    name,
                    format!("must be a finite rate >= 0, got {v}"),
                ));
            }
        }
        let positive = [
            ("eps_theta", self.eps_theta),
            ("eps_delta", self.eps_delta),
            ("dt", self.dt),
            ("t_max", self.t_max),
            ("term_tol", self.term_tol),
            ("annihilation_tol", self.annihilation_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                out.push(ModelError::parameter(name, format!("must be finite and > 0, got {v}")));
            }
        }
        if !self.theta_floor.is_finite() {
            out.push(ModelError::parameter("theta_floor", "must be finite"));
        }
        out
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        match self.problems().into_iter().next() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

/// A fully specified battle.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub topology: Topology,
    pub config: BattleConfig,
    pub initial: ForceState,
}

impl ScenarioSpec {
    pub fn new(topology: Topology, config: BattleConfig, initial: ForceState) -> Result<Self, ModelError> {
        let spec = ScenarioSpec {
            topology,
            config,
            initial,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.topology.validate()?;
        self.config.validate()?;
        check_dims(&self.topology, &self.initial)?;
        if !self.initial.is_finite() {
            return Err(ModelError::NonFinite {
                time: self.initial.time,
            });
        }
        Ok(())
    }

    pub fn with_config(&self, config: BattleConfig) -> Self {
        ScenarioSpec { config, ..self.clone() }
    }
}

pub(crate) fn check_dims(topo: &Topology, state: &ForceState) -> Result<(), ModelError> {
    if state.blue.len() != topo.n_blue() {
        return Err(ModelError::Dimension {
            what: "blue forces",
            expected: topo.n_blue(),
            found: state.blue.len(),
        });
    }
    if state.red.len() != topo.n_red() {
        return Err(ModelError::Dimension {
            what: "red forces",
            expected: topo.n_red(),
            found: state.red.len(),
        });
    }
    Ok(())
}
