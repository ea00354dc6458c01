//! Degree statistics of an optimized configuration.

use crate::model::{ForceState, Side, Topology};
use crate::optimizer::{utility, UtilityParams};

/// Engagement degree above which an unsupported Red node counts as
/// sacrificial.
pub const SACRIFICIAL_THRESHOLD: usize = 10;

/// Averages over empty node sets are `None`.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructuralMetrics {
    pub utility: f64,
    pub blue_mean: f64,
    pub red_mean: f64,
    pub n_sacrificial: usize,
    /// Engagement links per Red node.
    pub l_rb_per_node: f64,
    pub frac_attacked_blue: f64,
    /// Mean engagement degree of the Blue nodes under attack.
    pub avg_attacks_on_attacked: Option<f64>,
    pub max_red_manoeuvre_degree: usize,
    pub avg_manoeuvre_degree_attacked_blue: Option<f64>,
    pub avg_manoeuvre_degree_attacking_red: Option<f64>,
}

/// Red nodes with no manoeuvre links and more than `k_threshold` engagement
/// links.
pub fn count_sacrificial(topo: &Topology, k_threshold: usize) -> usize {
    (0..topo.n_red())
        .filter(|&r| topo.red_manoeuvre.degree(r) == 0 && topo.engagement.red_degree(r) > k_threshold)
        .count()
}

fn mean_of(values: impl Iterator<Item = usize>) -> Option<f64> {
    let (sum, n) = values.fold((0usize, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum as f64 / n as f64)
}

pub fn compute_metrics(topo: &Topology, terminal: &ForceState, params: &UtilityParams) -> StructuralMetrics {
    compute_metrics_with(topo, terminal, params, SACRIFICIAL_THRESHOLD)
}

pub fn compute_metrics_with(
    topo: &Topology,
    terminal: &ForceState,
    params: &UtilityParams,
    k_threshold: usize,
) -> StructuralMetrics {
    let e = &topo.engagement;
    let n_blue = topo.n_blue();
    let attacked_blue = || (0..n_blue).filter(|&b| e.blue_degree(b) > 0);
    let attacking_red = || (0..topo.n_red()).filter(|&r| e.red_degree(r) > 0);
    let n_attacked = attacked_blue().count();

    StructuralMetrics {
        utility: utility(terminal, params),
        blue_mean: terminal.mean(Side::Blue),
        red_mean: terminal.mean(Side::Red),
        n_sacrificial: count_sacrificial(topo, k_threshold),
        l_rb_per_node: if topo.n_red() == 0 {
            0.0
        } else {
            e.link_count() as f64 / topo.n_red() as f64
        },
        frac_attacked_blue: if n_blue == 0 {
            0.0
        } else {
            n_attacked as f64 / n_blue as f64
        },
        avg_attacks_on_attacked: mean_of(attacked_blue().map(|b| e.blue_degree(b))),
        max_red_manoeuvre_degree: topo.red_manoeuvre.max_degree(),
        avg_manoeuvre_degree_attacked_blue: mean_of(attacked_blue().map(|b| topo.blue_manoeuvre.degree(b))),
        avg_manoeuvre_degree_attacking_red: mean_of(attacking_red().map(|r| topo.red_manoeuvre.degree(r))),
    }
}
