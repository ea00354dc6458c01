//! Two-group mean-field reduction of the engagement dynamics.
//!
//! Red splits into `n1` nodes attacking `k1` Blue nodes each and `n2` nodes
//! attacking `k2` each, against `n` Blue nodes hit uniformly at random. With
//! `L = n1 k1 + n2 k2` attacks in total, a representative node of each group
//! obeys
//!
//! ```text
//! dR1 = -kappa_B k1 B n / L
//! dR2 = -kappa_B k2 B n / L
//! dB  = -kappa_R (n1 k1 / n) (R1 / k1) - kappa_R (n2 k2 / n) (R2 / k2)
//! ```
//!
//! which conserves `kappa_B B^2 - kappa_R (L / n^2) ((n1/k1) R1^2 + (n2/k2) R2^2)`.

use alloc::vec::Vec;

use crate::error::ModelError;
use crate::graph::{Adjacency, Engagement};
use crate::model::Topology;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldSpec {
    pub n: f64,
    pub n1: f64,
    pub n2: f64,
    pub k1: f64,
    pub k2: f64,
    pub kappa_red: f64,
    pub kappa_blue: f64,
}

impl MeanFieldSpec {
    pub fn new(n: f64, n1: f64, k1: f64, k2: f64, kappa_red: f64, kappa_blue: f64) -> Result<Self, ModelError> {
        let spec = MeanFieldSpec {
            n,
            n1,
            n2: n - n1,
            k1,
            k2,
            kappa_red,
            kappa_blue,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.n > 0.0) {
            return Err(ModelError::parameter("n", "must be > 0"));
        }
        if !(self.n1 >= 0.0 && self.n2 >= 0.0) || (self.n1 + self.n2 - self.n).abs() > 1e-12 * self.n {
            return Err(ModelError::parameter("n1", "group sizes must be >= 0 and sum to n"));
        }
        for (name, k) in [("k1", self.k1), ("k2", self.k2)] {
            if !(k >= 1.0 && k <= self.n) {
                return Err(ModelError::parameter(name, "attacks per node must lie in [1, n]"));
            }
        }
        if !(self.kappa_red >= 0.0 && self.kappa_blue >= 0.0) {
            return Err(ModelError::parameter("kappa", "kill-rates must be >= 0"));
        }
        if !(self.total_attacks() > 0.0) {
            return Err(ModelError::parameter("L", "total attack count must be > 0"));
        }
        Ok(())
    }

    /// `L = n1 k1 + n2 k2`.
    pub fn total_attacks(&self) -> f64 {
        self.n1 * self.k1 + self.n2 * self.k2
    }
}

/// Representative forces of the two Red groups and of Blue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupState {
    pub r1: f64,
    pub r2: f64,
    pub b: f64,
}

impl GroupState {
    fn axpy(self, c: f64, d: GroupState) -> GroupState {
        GroupState {
            r1: self.r1 + c * d.r1,
            r2: self.r2 + c * d.r2,
            b: self.b + c * d.b,
        }
    }
}

pub fn meanfield_rhs(state: GroupState, spec: &MeanFieldSpec) -> Result<GroupState, ModelError> {
    let l = spec.total_attacks();
    if !(l > 0.0) {
        return Err(ModelError::parameter("L", "total attack count must be > 0"));
    }
    let n = spec.n;
    let (l1, l2) = (spec.n1 * spec.k1, spec.n2 * spec.k2);
    Ok(GroupState {
        r1: -spec.kappa_blue * spec.k1 * state.b * n / l,
        r2: -spec.kappa_blue * spec.k2 * state.b * n / l,
        b: -spec.kappa_red * (l1 / n) * state.r1 / spec.k1 - spec.kappa_red * (l2 / n) * state.r2 / spec.k2,
    })
}

pub fn meanfield_invariant(state: GroupState, spec: &MeanFieldSpec) -> f64 {
    let l = spec.total_attacks();
    let n = spec.n;
    -spec.kappa_red
        * (l / (n * n))
        * (spec.n1 / spec.k1 * state.r1 * state.r1 + spec.n2 / spec.k2 * state.r2 * state.r2)
        + spec.kappa_blue * state.b * state.b
}

/// RK4 samples of the unclipped mean-field system at `t = 0, dt, ..., steps * dt`.
pub fn integrate_meanfield(
    init: GroupState,
    spec: &MeanFieldSpec,
    dt: f64,
    steps: usize,
) -> Result<Vec<GroupState>, ModelError> {
    spec.validate()?;
    let f = |s: GroupState| meanfield_rhs(s, spec);
    let mut out = Vec::with_capacity(steps + 1);
    let mut s = init;
    out.push(s);
    for _ in 0..steps {
        let k1 = f(s)?;
        let k2 = f(s.axpy(0.5 * dt, k1))?;
        let k3 = f(s.axpy(0.5 * dt, k2))?;
        let k4 = f(s.axpy(dt, k3))?;
        s = GroupState {
            r1: s.r1 + dt / 6.0 * (k1.r1 + 2.0 * k2.r1 + 2.0 * k3.r1 + k4.r1),
            r2: s.r2 + dt / 6.0 * (k1.r2 + 2.0 * k2.r2 + 2.0 * k3.r2 + k4.r2),
            b: s.b + dt / 6.0 * (k1.b + 2.0 * k2.b + 2.0 * k3.b + k4.b),
        };
        out.push(s);
    }
    Ok(out)
}

/// `f(k1, k2, n1) = (L / n^2) (n1/k1 + n2/k2)`, the factor multiplying
/// Red's share of the invariant for equal initial forces.
pub fn split_value(n: f64, n1: f64, k1: f64, k2: f64) -> f64 {
    let n2 = n - n1;
    let l = n1 * k1 + n2 * k2;
    l / (n * n) * (n1 / k1 + n2 / k2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Split {
    pub n1: usize,
    pub k1: usize,
    pub k2: usize,
    /// `false` when `n` is odd and the half split was rounded down.
    pub exact: bool,
}

/// Half the force attacks one target each, the other half attacks every
/// Blue node.
pub fn optimal_split(n: usize) -> Result<Split, ModelError> {
    if n < 2 {
        return Err(ModelError::parameter("n", "needs at least two nodes"));
    }
    Ok(Split {
        n1: n / 2,
        k1: 1,
        k2: n,
        exact: n.is_multiple_of(2),
    })
}

/// `1/2 + n/4 + 1/(4n)`, the value of [`split_value`] at the optimal split.
pub fn victory_factor(n: f64) -> f64 {
    0.5 + n / 4.0 + 1.0 / (4.0 * n)
}

/// Left minus right side of Red's victory condition; positive predicts a Red
/// win. `optimized` selects the optimal split, otherwise every Red node
/// attacks the same number of targets.
pub fn victory_margin(n: f64, kappa_red: f64, kappa_blue: f64, r0: f64, b0: f64, optimized: bool) -> f64 {
    let factor = if optimized { victory_factor(n) } else { 1.0 };
    kappa_red * r0 * r0 * factor - kappa_blue * b0 * b0
}

/// As [`victory_margin`] for an arbitrary split: `-invariant` at uniform
/// initial forces.
pub fn split_margin(spec: &MeanFieldSpec, r0: f64, b0: f64) -> f64 {
    spec.kappa_red * r0 * r0 * split_value(spec.n, spec.n1, spec.k1, spec.k2) - spec.kappa_blue * b0 * b0
}

/// Red force needed with the optimal split, relative to a uniform split.
/// Tends to `2 / sqrt(n)`.
pub fn required_force_fraction(n: f64) -> f64 {
    1.0 / libm::sqrt(victory_factor(n))
}

/// An `n`-vs-`n` topology realising a two-group split: Red nodes `0..n1`
/// attack `k1` consecutive Blue nodes each and the rest `k2` each, handing
/// out targets cyclically. No manoeuvre links. Every Blue node sees the same
/// number of attackers from each group when `n` divides both `n1 k1` and
/// `n2 k2`.
pub fn appendix_topology(n: usize, n1: usize, k1: usize, k2: usize) -> Result<Topology, ModelError> {
    if n1 > n || k1 == 0 || k2 == 0 || k1 > n || k2 > n {
        return Err(ModelError::parameter("split", "need n1 <= n and 1 <= k1, k2 <= n"));
    }
    let mut e = Engagement::empty(n, n);
    let mut cursor = 0usize;
    for r in 0..n {
        let k = if r < n1 { k1 } else { k2 };
        for t in 0..k {
            e.insert((cursor + t) % n, r);
        }
        cursor = (cursor + k) % n;
    }
    Topology::new(Adjacency::empty(n), Adjacency::empty(n), e)
}
