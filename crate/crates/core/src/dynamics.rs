//! The networked Lanchester vector field.
//!
//! For Blue node `i` (Red is symmetric):
//!
//! ```text
//! dB_i = -gamma_B * sum_j A_ij (w_i B_i - w_j B_j) S(B_i - floor) S(B_j - floor)
//!        -kappa_R * sum_m E_im (R_m / k_m) S(B_i) S(R_m)
//! w_i  = 1 / (sum_m E_im R_m + eps_delta)
//! S(x) = (1 + tanh(x / eps_theta)) / 2
//! ```
//!
//! `k_m` is the number of targets of the *attacking* node `m`, so each node
//! splits its fire evenly over the nodes it engages.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::ModelError;
use crate::model::{check_dims, BattleConfig, ForceState, Side, Topology};

/// `(1 + tanh(x / eps)) / 2`, a smooth step from 0 to 1 around `x = 0`.
#[inline]
pub fn smoothed_step(x: f64, eps: f64) -> f64 {
    let z = x / eps;
    // tanh rounds to exactly 1.0 above 20.
    if z > 20.0 {
        return 1.0;
    }
    0.5 * (1.0 + libm::tanh(z))
}

/// Inverse of the engaged adversary strength of `node`, regularized by
/// `eps_delta`. Depleted adversaries contribute nothing rather than a
/// negative strength.
pub fn manoeuvre_weight(node: usize, side: Side, state: &ForceState, topo: &Topology, config: &BattleConfig) -> f64 {
    let e = &topo.engagement;
    let engaged: f64 = match side {
        Side::Blue => (0..e.n_red())
            .filter(|&r| e.contains(node, r))
            .map(|r| state.red[r].max(0.0))
            .sum(),
        Side::Red => (0..e.n_blue())
            .filter(|&b| e.contains(b, node))
            .map(|b| state.blue[b].max(0.0))
            .sum(),
    };
    1.0 / (engaged + config.eps_delta)
}

/// Time derivative of a [`ForceState`].
#[derive(Debug, Clone, PartialEq)]
pub struct Derivative {
    pub blue: Vec<f64>,
    pub red: Vec<f64>,
}

impl Derivative {
    pub fn zeros(n_blue: usize, n_red: usize) -> Self {
        Derivative {
            blue: vec![0.0; n_blue],
            red: vec![0.0; n_red],
        }
    }

    pub fn side(&self, side: Side) -> &[f64] {
        match side {
            Side::Blue => &self.blue,
            Side::Red => &self.red,
        }
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.blue).max(max_abs(&self.red))
    }
}

pub(crate) fn max_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Evaluates the vector field at `state`.
pub fn rhs(state: &ForceState, topo: &Topology, config: &BattleConfig) -> Result<Derivative, ModelError> {
    check_dims(topo, state)?;
    let net = Network::new(topo);
    let mut out = Derivative::zeros(net.n_blue, net.n_red);
    let mut scratch = Scratch::new(&net);
    net.eval(
        &state.blue,
        &state.red,
        config,
        &mut out.blue,
        &mut out.red,
        &mut scratch,
    );
    Ok(out)
}

/// Sum and per-node mean of one side's resource.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceTotals {
    pub sum: f64,
    pub mean: f64,
}

pub fn total_force(state: &ForceState, side: Side) -> ForceTotals {
    let xs = state.side(side);
    let sum: f64 = xs.iter().sum();
    let mean = if xs.is_empty() { 0.0 } else { sum / xs.len() as f64 };
    ForceTotals { sum, mean }
}

/// Edge-list form of a [`Topology`], built once per integration.
#[derive(Debug, Clone)]
pub struct Network {
    n_blue: usize,
    n_red: usize,
    blue_edges: Vec<(u32, u32)>,
    red_edges: Vec<(u32, u32)>,
    /// `(blue, red)` engagement links.
    links: Vec<(u32, u32)>,
    /// Reciprocal engagement degree, zero for unengaged nodes.
    blue_share: Vec<f64>,
    red_share: Vec<f64>,
}

/// Per-node work buffers for [`Network::eval`].
#[derive(Debug, Clone)]
pub struct Scratch {
    step_blue: Vec<f64>,
    step_red: Vec<f64>,
    floor_blue: Vec<f64>,
    floor_red: Vec<f64>,
    engaged_blue: Vec<f64>,
    engaged_red: Vec<f64>,
}

impl Scratch {
    pub fn new(net: &Network) -> Self {
        Scratch {
            step_blue: vec![0.0; net.n_blue],
            step_red: vec![0.0; net.n_red],
            floor_blue: vec![0.0; net.n_blue],
            floor_red: vec![0.0; net.n_red],
            engaged_blue: vec![0.0; net.n_blue],
            engaged_red: vec![0.0; net.n_red],
        }
    }
}

impl Network {
    pub fn new(topo: &Topology) -> Self {
        let e = &topo.engagement;
        let share = |deg: usize| if deg == 0 { 0.0 } else { 1.0 / deg as f64 };
        Network {
            n_blue: topo.n_blue(),
            n_red: topo.n_red(),
            blue_edges: topo.blue_manoeuvre.edges().map(|(i, j)| (i as u32, j as u32)).collect(),
            red_edges: topo.red_manoeuvre.edges().map(|(i, j)| (i as u32, j as u32)).collect(),
            links: e.links().map(|(b, r)| (b as u32, r as u32)).collect(),
            blue_share: (0..e.n_blue()).map(|b| share(e.blue_degree(b))).collect(),
            red_share: (0..e.n_red()).map(|r| share(e.red_degree(r))).collect(),
        }
    }

    pub fn n_blue(&self) -> usize {
        self.n_blue
    }

    pub fn n_red(&self) -> usize {
        self.n_red
    }

    /// Writes the derivative of `(blue, red)` into `d_blue`, `d_red`.
    pub fn eval(
        &self,
        blue: &[f64],
        red: &[f64],
        cfg: &BattleConfig,
        d_blue: &mut [f64],
        d_red: &mut [f64],
        s: &mut Scratch,
    ) {
        let eps = cfg.eps_theta;
        for (i, &x) in blue.iter().enumerate() {
            s.step_blue[i] = smoothed_step(x, eps);
            s.floor_blue[i] = if cfg.theta_floor == 0.0 {
                s.step_blue[i]
            } else {
                smoothed_step(x - cfg.theta_floor, eps)
            };
            s.engaged_blue[i] = 0.0;
            d_blue[i] = 0.0;
        }
        for (l, &x) in red.iter().enumerate() {
            s.step_red[l] = smoothed_step(x, eps);
            s.floor_red[l] = if cfg.theta_floor == 0.0 {
                s.step_red[l]
            } else {
                smoothed_step(x - cfg.theta_floor, eps)
            };
            s.engaged_red[l] = 0.0;
            d_red[l] = 0.0;
        }

        // Attrition, and the engaged strength each node faces.
        for &(b, r) in &self.links {
            let (b, r) = (b as usize, r as usize);
            let cut = s.step_blue[b] * s.step_red[r];
            d_blue[b] -= cfg.kappa_red * red[r] * self.red_share[r] * cut;
            d_red[r] -= cfg.kappa_blue * blue[b] * self.blue_share[b] * cut;
            s.engaged_blue[b] += red[r].max(0.0);
            s.engaged_red[r] += blue[b].max(0.0);
        }

        // Manoeuvre: w_i x_i becomes the weighted level, overwriting engaged_*.
        for (i, w) in s.engaged_blue.iter_mut().enumerate() {
            *w = blue[i] / (*w + cfg.eps_delta);
        }
        for (l, w) in s.engaged_red.iter_mut().enumerate() {
            *w = red[l] / (*w + cfg.eps_delta);
        }
        diffuse(&self.blue_edges, &s.engaged_blue, &s.floor_blue, cfg.gamma_blue, d_blue);
        diffuse(&self.red_edges, &s.engaged_red, &s.floor_red, cfg.gamma_red, d_red);
    }
}

#[inline]
fn diffuse(edges: &[(u32, u32)], weighted: &[f64], cut: &[f64], gamma: f64, d: &mut [f64]) {
    if gamma == 0.0 {
        return;
    }
    for &(i, j) in edges {
        let (i, j) = (i as usize, j as usize);
        let flux = gamma * (weighted[i] - weighted[j]) * cut[i] * cut[j];
        d[i] -= flux;
        d[j] += flux;
    }
}
