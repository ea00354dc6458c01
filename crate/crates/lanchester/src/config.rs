//! Run configuration files.
//!
//! One TOML or JSON file holds every parameter of a run. Sections that a
//! command does not use are ignored, missing fields take the defaults listed
//! in the README, and [`validate_config`] reports every problem at once with
//! the line it refers to.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use lanchester_core::graph::{pair_count, Adjacency, Engagement};
use lanchester_core::scenarios::{Axis, CaseId, NetworkScenario, Param, DEFAULT_RESERVE_WIRING};
use lanchester_core::{BattleConfig, ForceState, ModelError, MoveSet, ScenarioSpec, Topology};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::formats::TopologyFile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Toml,
    Json,
}

impl Format {
    /// JSON for `.json` files, TOML otherwise.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Toml,
        }
    }
}

/// One validation problem. `line` is 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigIssue {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigIssue {
    pub fn new(line: Option<usize>, message: impl Into<String>) -> Self {
        ConfigIssue {
            line,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

fn one() -> f64 {
    1.0
}

fn five() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Seeds random networks and the optimizer.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub battle: BattleConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<NetworkSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<TopologySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<OptimizerSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heatmap: Option<HeatmapSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub casestudy: Option<CaseStudySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meanfield: Option<MeanFieldSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
}

/// Random `n`-vs-`n` networks drawn from `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub n: usize,
    /// Manoeuvre links per side.
    pub l_manoeuvre: usize,
    /// Engagement links.
    pub l_engage: usize,
}

/// An explicit topology: a JSON topology file, edge lists, or 0/1 matrices.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_blue: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_red: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blue_edges: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub red_edges: Option<Vec<[usize; 2]>>,
    /// `[blue, red]` pairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub engagement_edges: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blue_matrix: Option<Vec<Vec<u8>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub red_matrix: Option<Vec<Vec<u8>>>,
    /// `n_blue` rows of `n_red` entries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub engagement_matrix: Option<Vec<Vec<u8>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    /// Level of every node not given explicitly.
    #[serde(default = "one")]
    pub level: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blue: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub red: Option<Vec<f64>>,
}

impl Default for InitialSection {
    fn default() -> Self {
        InitialSection {
            level: 1.0,
            blue: None,
            red: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    /// Trade-off of the utility; sweeps take theirs from `[sweep]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub iterations: usize,
    #[serde(default)]
    pub moves: MoveSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub lambdas: Vec<f64>,
    /// Red kill-rates; empty means `battle.kappa_red` only.
    #[serde(default)]
    pub kappa_red: Vec<f64>,
    pub replicas: usize,
    #[serde(default = "five")]
    pub best_k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSection {
    pub param: Param,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl From<AxisSection> for Axis {
    fn from(a: AxisSection) -> Axis {
        Axis {
            param: a.param,
            lo: a.lo,
            hi: a.hi,
            steps: a.steps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    /// The network scenario's random starting networks.
    Random,
    /// Red's networks optimized with `[optimizer]` at the heatmap's lambda.
    Optimized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatmapSection {
    pub x: AxisSection,
    pub y: AxisSection,
    pub source: SourceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Fixed values applied before the axes.
    #[serde(default)]
    pub overrides: BTreeMap<Param, f64>,
    /// Topologies averaged per cell, seeded `seed, seed + 1, ...`.
    #[serde(default = "one_usize")]
    pub replicas: usize,
}

fn one_usize() -> usize {
    1
}

fn default_wiring() -> Vec<[usize; 2]> {
    DEFAULT_RESERVE_WIRING.iter().map(|&(a, b)| [a, b]).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseStudySection {
    pub case: u32,
    pub f_r: f64,
    pub kappa_red: f64,
    /// Red manoeuvre links; nodes 0 and 1 fight, 2 and 3 are reserves.
    #[serde(default = "default_wiring")]
    pub red_wiring: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve: Option<CurveSection>,
}

/// Critical kill-rate over a grid of Red fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSection {
    pub f_r: Vec<f64>,
    #[serde(default = "curve_lo")]
    pub kappa_lo: f64,
    #[serde(default = "curve_hi")]
    pub kappa_hi: f64,
    #[serde(default = "curve_tol")]
    pub tol: f64,
}

fn curve_lo() -> f64 {
    0.01
}

fn curve_hi() -> f64 {
    5.0
}

fn curve_tol() -> f64 {
    1e-4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeanFieldSection {
    pub n: usize,
    #[serde(default = "one")]
    pub kappa_red: f64,
    #[serde(default = "one")]
    pub kappa_blue: f64,
    #[serde(default = "one")]
    pub r0: f64,
    #[serde(default = "one")]
    pub b0: f64,
    /// Group split `[n1, k1, k2]` of the trajectory; the optimal split when
    /// absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<[usize; 3]>,
    #[serde(default = "mf_dt")]
    pub dt: f64,
    #[serde(default = "mf_steps")]
    pub steps: usize,
}

fn mf_dt() -> f64 {
    0.01
}

fn mf_steps() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Steps between trajectory samples; by default at most 2000 samples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_every: Option<usize>,
}

/// Finds the line of a key path in the raw text, falling back to the
/// nearest enclosing key that can be found.
pub(crate) fn locate(raw: &str, format: Format, path: &[&str]) -> Option<usize> {
    (1..=path.len()).rev().find_map(|len| match format {
        Format::Toml => locate_toml(raw, &path[..len]),
        Format::Json => locate_json(raw, &path[..len]),
    })
}

fn locate_toml(raw: &str, path: &[&str]) -> Option<usize> {
    let (key, table) = path.split_last()?;
    let table = table.join(".");
    let full = path.join(".");
    let mut current = String::new();
    for (i, line) in raw.lines().enumerate() {
        let t = line.trim();
        if let Some(h) = t.strip_prefix('[') {
            let name = h.trim_start_matches('[').split(']').next().unwrap_or("").trim();
            if name == full {
                return Some(i + 1);
            }
            current = name.to_string();
            continue;
        }
        if current == table {
            if let Some(rest) = t.strip_prefix(key) {
                let rest = rest.trim_start();
                if rest.starts_with('=') {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

fn locate_json(raw: &str, path: &[&str]) -> Option<usize> {
    let mut offset = 0usize;
    for key in path {
        let needle = format!("\"{key}\"");
        offset += raw[offset..].find(&needle)? + needle.len();
    }
    Some(raw[..offset].matches('\n').count() + 1)
}

fn line_of_offset(raw: &str, offset: usize) -> usize {
    raw[..offset.min(raw.len())].matches('\n').count() + 1
}

/// Issue collector that resolves key paths to lines.
struct Checker<'a> {
    raw: &'a str,
    format: Format,
    issues: Vec<ConfigIssue>,
}

impl Checker<'_> {
    fn push(&mut self, path: &[&str], message: impl Into<String>) {
        let line = locate(self.raw, self.format, path);
        self.issues.push(ConfigIssue::new(
            line,
            format!("{}: {}", path.join("."), message.into()),
        ));
    }

    fn model(&mut self, section: &str, e: ModelError) {
        let key = match &e {
            ModelError::Parameter { name, .. } => Some(*name),
            _ => None,
        };
        match key {
            Some(k) if !k.contains(' ') => self.push(&[section, k], e.to_string()),
            _ => self.push(&[section], e.to_string()),
        }
    }
}

/// Parses and validates a configuration, reporting every problem found.
pub fn validate_config(raw: &str, format: Format) -> Result<Config, Vec<ConfigIssue>> {
    validate_in(raw, format, None)
}

fn validate_in(raw: &str, format: Format, base_dir: Option<&Path>) -> Result<Config, Vec<ConfigIssue>> {
    let empty = match format {
        Format::Toml => match raw.parse::<toml::Table>() {
            Ok(t) => t.is_empty(),
            Err(e) => {
                let line = e.span().map(|s| line_of_offset(raw, s.start));
                return Err(vec![ConfigIssue::new(line, e.message().trim().to_string())]);
            }
        },
        Format::Json => match serde_json::from_str::<serde_json::Value>(raw) {
            Ok(serde_json::Value::Object(m)) => m.is_empty(),
            Ok(_) => return Err(vec![ConfigIssue::new(Some(1), "top level must be an object")]),
            Err(e) => return Err(vec![ConfigIssue::new(Some(e.line()), e.to_string())]),
        },
    };
    if empty {
        return Err(vec![ConfigIssue::new(None, "configuration is empty")]);
    }
    let mut config: Config = match format {
        Format::Toml => toml::from_str(raw).map_err(|e| {
            let line = e.span().map(|s| line_of_offset(raw, s.start));
            vec![ConfigIssue::new(line, e.message().trim().to_string())]
        })?,
        Format::Json => serde_json::from_str(raw).map_err(|e| vec![ConfigIssue::new(Some(e.line()), e.to_string())])?,
    };
    if let (Some(dir), Some(file)) = (base_dir, config.topology.as_mut().and_then(|t| t.file.as_mut())) {
        if file.is_relative() {
            *file = dir.join(&*file);
        }
    }
    let mut c = Checker {
        raw,
        format,
        issues: Vec::new(),
    };
    check(&config, &mut c);
    if c.issues.is_empty() {
        Ok(config)
    } else {
        Err(c.issues)
    }
}

fn check_lambda(c: &mut Checker, path: &[&str], lambda: f64) {
    if !(0.0..=1.0).contains(&lambda) {
        c.push(path, format!("lambda must lie in [0, 1], got {lambda}"));
    }
}

fn check(config: &Config, c: &mut Checker) {
    for e in config.battle.problems() {
        c.model("battle", e);
    }
    if config.network.is_some() && config.topology.is_some() {
        c.push(&["topology"], "give either [network] or [topology], not both");
    }
    if let Some(net) = &config.network {
        if net.n < 2 {
            c.push(&["network", "n"], "needs at least 2 nodes a side");
        }
        if net.l_manoeuvre > pair_count(net.n) {
            c.push(
                &["network", "l_manoeuvre"],
                format!(
                    "{} links do not fit {} nodes (max {})",
                    net.l_manoeuvre,
                    net.n,
                    pair_count(net.n)
                ),
            );
        }
        if net.l_engage > net.n * net.n {
            c.push(
                &["network", "l_engage"],
                format!("at most {} engagement links", net.n * net.n),
            );
        }
    }
    let topo = config.topology.as_ref().map(|t| check_topology(t, c));
    if let Some(init) = &config.initial {
        if !(init.level >= 0.0 && init.level.is_finite()) {
            c.push(&["initial", "level"], "must be finite and >= 0");
        }
        let sizes = match (&config.network, &topo) {
            (Some(net), _) => Some((net.n, net.n)),
            (None, Some(Some(t))) => Some((t.n_blue(), t.n_red())),
            _ => None,
        };
        for (key, values, size) in [
            ("blue", &init.blue, sizes.map(|s| s.0)),
            ("red", &init.red, sizes.map(|s| s.1)),
        ] {
            let Some(values) = values else { continue };
            if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                c.push(&["initial", key], "levels must be finite and >= 0");
            }
            if let Some(size) = size {
                if values.len() != size {
                    c.push(
                        &["initial", key],
                        format!("expected {size} levels, found {}", values.len()),
                    );
                }
            }
        }
    }
    if let Some(opt) = &config.optimizer {
        if let Some(lambda) = opt.lambda {
            check_lambda(c, &["optimizer", "lambda"], lambda);
        }
        if let Err(e) = opt.moves.validate() {
            c.push(&["optimizer", "moves"], e.to_string());
        }
    }
    if let Some(sweep) = &config.sweep {
        if sweep.lambdas.is_empty() {
            c.push(&["sweep", "lambdas"], "needs at least one value");
        }
        for &l in &sweep.lambdas {
            check_lambda(c, &["sweep", "lambdas"], l);
        }
        if sweep.kappa_red.iter().any(|k| !(*k >= 0.0 && k.is_finite())) {
            c.push(&["sweep", "kappa_red"], "kill-rates must be finite and >= 0");
        }
        if sweep.best_k == 0 || sweep.replicas < sweep.best_k {
            c.push(
                &["sweep", "replicas"],
                format!(
                    "need replicas >= best_k >= 1, got {} and {}",
                    sweep.replicas, sweep.best_k
                ),
            );
        }
        if config.optimizer.is_none() {
            c.push(&["sweep"], "sweeps take iterations and moves from [optimizer]");
        }
    }
    if let Some(h) = &config.heatmap {
        for (key, axis) in [("x", &h.x), ("y", &h.y)] {
            if axis.steps < 2 {
                c.push(&["heatmap", key, "steps"], "grid resolution must be >= 2");
            }
            if !(axis.lo.is_finite() && axis.hi.is_finite() && axis.lo >= 0.0 && axis.lo <= axis.hi) {
                c.push(&["heatmap", key], "need finite 0 <= lo <= hi");
            }
        }
        if h.x.param == h.y.param {
            c.push(&["heatmap", "y", "param"], "axes must scan different parameters");
        }
        if h.overrides.values().any(|v| !(*v >= 0.0 && v.is_finite())) {
            c.push(&["heatmap", "overrides"], "values must be finite and >= 0");
        }
        if h.replicas == 0 {
            c.push(&["heatmap", "replicas"], "must be >= 1");
        }
        match (h.source, h.lambda) {
            (SourceKind::Optimized, None) => c.push(&["heatmap", "lambda"], "optimized source needs lambda"),
            (SourceKind::Optimized, Some(l)) => {
                check_lambda(c, &["heatmap", "lambda"], l);
                if config.optimizer.is_none() {
                    c.push(&["heatmap", "source"], "optimized source needs [optimizer]");
                }
            }
            _ => {}
        }
    }
    if let Some(cs) = &config.casestudy {
        if let Err(e) = CaseId::from_number(cs.case) {
            c.push(&["casestudy", "case"], e.to_string());
        }
        if !(cs.f_r > 0.0 && cs.f_r.is_finite()) {
            c.push(&["casestudy", "f_r"], "must be > 0");
        }
        if !(cs.kappa_red >= 0.0 && cs.kappa_red.is_finite()) {
            c.push(&["casestudy", "kappa_red"], "must be finite and >= 0");
        }
        let wiring: Vec<(usize, usize)> = cs.red_wiring.iter().map(|&[a, b]| (a, b)).collect();
        if let Err(e) = Adjacency::from_edges(4, &wiring) {
            c.push(&["casestudy", "red_wiring"], e.to_string());
        }
        if let Some(curve) = &cs.curve {
            if curve.f_r.is_empty() || curve.f_r.iter().any(|f| !(*f > 0.0 && f.is_finite())) {
                c.push(&["casestudy", "curve", "f_r"], "needs positive fractions");
            }
            if !(curve.kappa_lo >= 0.0 && curve.kappa_lo < curve.kappa_hi && curve.kappa_hi.is_finite()) {
                c.push(&["casestudy", "curve", "kappa_lo"], "need 0 <= kappa_lo < kappa_hi");
            }
            if !(curve.tol > 0.0) {
                c.push(&["casestudy", "curve", "tol"], "must be > 0");
            }
        }
    }
    if let Some(mf) = &config.meanfield {
        if mf.n < 2 {
            c.push(&["meanfield", "n"], "needs n >= 2");
        }
        for (key, v) in [
            ("kappa_red", mf.kappa_red),
            ("kappa_blue", mf.kappa_blue),
            ("r0", mf.r0),
            ("b0", mf.b0),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                c.push(&["meanfield", key], "must be finite and >= 0");
            }
        }
        if let Some([n1, k1, k2]) = mf.split {
            if n1 > mf.n || k1 == 0 || k2 == 0 || k1 > mf.n || k2 > mf.n {
                c.push(&["meanfield", "split"], "need n1 <= n and 1 <= k1, k2 <= n");
            }
        }
        if !(mf.dt > 0.0) {
            c.push(&["meanfield", "dt"], "must be > 0");
        }
    }
    if let Some(out) = &config.output {
        if out.record_every == Some(0) {
            c.push(&["output", "record_every"], "must be >= 1");
        }
    }
}

fn pairs(edges: &[[usize; 2]]) -> Vec<(usize, usize)> {
    edges.iter().map(|&[a, b]| (a, b)).collect()
}

fn manoeuvre_from(
    c: &mut Checker,
    side: &str,
    n: Option<usize>,
    edges: &Option<Vec<[usize; 2]>>,
    matrix: &Option<Vec<Vec<u8>>>,
) -> Option<Adjacency> {
    let edges_key = format!("{side}_edges");
    let matrix_key = format!("{side}_matrix");
    match (edges, matrix) {
        (Some(_), Some(_)) => {
            c.push(
                &["topology", &matrix_key],
                format!("give {edges_key} or {matrix_key}, not both"),
            );
            None
        }
        (None, Some(m)) => {
            let n_rows = m.len();
            if let Some(bad) = m.iter().position(|row| row.len() != n_rows) {
                c.push(
                    &["topology", &matrix_key],
                    format!("row {bad} does not have {n_rows} entries"),
                );
                return None;
            }
            if m.iter().flatten().any(|v| *v > 1) {
                c.push(&["topology", &matrix_key], "entries must be 0 or 1");
                return None;
            }
            match Adjacency::from_matrix(m) {
                Ok(a) => Some(a),
                Err(ModelError::Asymmetric(i, j)) => {
                    c.push(
                        &["topology", &matrix_key],
                        format!("not symmetric: entry ({i}, {j}) differs from ({j}, {i})"),
                    );
                    None
                }
                Err(e) => {
                    c.push(&["topology", &matrix_key], e.to_string());
                    None
                }
            }
        }
        (edges, None) => {
            let Some(n) = n else {
                c.push(&["topology"], format!("n_{side} is required without {matrix_key}"));
                return None;
            };
            let edges = edges.as_deref().unwrap_or(&[]);
            Adjacency::from_edges(n, &pairs(edges))
                .map_err(|e| c.push(&["topology", &edges_key], e.to_string()))
                .ok()
        }
    }
}

fn check_topology(t: &TopologySection, c: &mut Checker) -> Option<Topology> {
    if let Some(file) = &t.file {
        let inline = t.n_blue.is_some()
            || t.n_red.is_some()
            || t.blue_edges.is_some()
            || t.red_edges.is_some()
            || t.engagement_edges.is_some()
            || t.blue_matrix.is_some()
            || t.red_matrix.is_some()
            || t.engagement_matrix.is_some();
        if inline {
            c.push(&["topology", "file"], "a topology file excludes inline networks");
            return None;
        }
        return match TopologyFile::read(file) {
            Ok(tf) => tf
                .to_topology()
                .map_err(|e| c.push(&["topology", "file"], e.to_string()))
                .ok(),
            Err(e) => {
                c.push(&["topology", "file"], e.to_string());
                None
            }
        };
    }
    let blue = manoeuvre_from(c, "blue", t.n_blue, &t.blue_edges, &t.blue_matrix);
    let red = manoeuvre_from(c, "red", t.n_red, &t.red_edges, &t.red_matrix);
    let (Some(blue), Some(red)) = (blue, red) else {
        return None;
    };
    for (key, given, found) in [("n_blue", t.n_blue, blue.len()), ("n_red", t.n_red, red.len())] {
        if given.is_some_and(|g| g != found) {
            c.push(&["topology", key], format!("matrix has {found} nodes"));
            return None;
        }
    }
    let engagement = match (&t.engagement_edges, &t.engagement_matrix) {
        (Some(_), Some(_)) => {
            c.push(
                &["topology", "engagement_matrix"],
                "give engagement_edges or engagement_matrix, not both",
            );
            return None;
        }
        (None, Some(m)) => {
            if m.len() != blue.len() || m.iter().any(|row| row.len() != red.len()) {
                c.push(
                    &["topology", "engagement_matrix"],
                    format!("must be {} rows of {} entries", blue.len(), red.len()),
                );
                return None;
            }
            Engagement::from_matrix(m, red.len())
        }
        (edges, None) => Engagement::from_links(blue.len(), red.len(), &pairs(edges.as_deref().unwrap_or(&[]))),
    };
    let engagement = engagement
        .map_err(|e| c.push(&["topology", "engagement_edges"], e.to_string()))
        .ok()?;
    Topology::new(blue, red, engagement)
        .map_err(|e| c.push(&["topology"], e.to_string()))
        .ok()
}

/// Reads and validates a configuration file. A relative topology file path
/// is taken relative to the configuration's directory and stored absolute.
pub fn load_config(path: &Path) -> Result<Config, CliError> {
    let raw = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let dir = path.parent().unwrap_or(Path::new("."));
    validate_in(&raw, Format::from_path(path), Some(dir)).map_err(CliError::Config)
}

impl Config {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes to TOML")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes to JSON")
    }

    /// Re-runs validation on an already parsed configuration, e.g. after
    /// command-line overrides.
    pub fn revalidate(&self) -> Result<(), CliError> {
        let raw = self.to_toml();
        validate_config(&raw, Format::Toml)
            .map(|_| ())
            .map_err(CliError::Config)
    }

    /// The battle described by `[network]` (drawn from `seed`) or
    /// `[topology]`, with `[initial]` levels.
    pub fn scenario(&self, seed: u64) -> Result<ScenarioSpec, CliError> {
        let topology = match (&self.network, &self.topology) {
            (Some(net), None) => {
                let scenario = NetworkScenario {
                    n: net.n,
                    l_manoeuvre: net.l_manoeuvre,
                    l_engage: net.l_engage,
                    initial_level: 1.0,
                    config: self.battle,
                };
                scenario.instantiate(seed)?.topology
            }
            (None, Some(t)) => {
                let mut c = Checker {
                    raw: "",
                    format: Format::Toml,
                    issues: Vec::new(),
                };
                match check_topology(t, &mut c) {
                    Some(topo) => topo,
                    None => return Err(CliError::Config(c.issues)),
                }
            }
            _ => {
                return Err(CliError::config(
                    "the battle needs exactly one of [network] or [topology]",
                ))
            }
        };
        let init = self.initial.clone().unwrap_or_default();
        let blue = init.blue.unwrap_or_else(|| vec![init.level; topology.n_blue()]);
        let red = init.red.unwrap_or_else(|| vec![init.level; topology.n_red()]);
        Ok(ScenarioSpec::new(topology, self.battle, ForceState::new(blue, red))?)
    }

    /// The random network scenario of `[network]` with `[initial] level`.
    pub fn network_scenario(&self) -> Result<NetworkScenario, CliError> {
        let net = self
            .network
            .as_ref()
            .ok_or_else(|| CliError::config("this command needs a [network] section"))?;
        let init = self.initial.clone().unwrap_or_default();
        if init.blue.is_some() || init.red.is_some() {
            return Err(CliError::config("random networks take a uniform [initial] level only"));
        }
        Ok(NetworkScenario {
            n: net.n,
            l_manoeuvre: net.l_manoeuvre,
            l_engage: net.l_engage,
            initial_level: init.level,
            config: self.battle,
        })
    }

    pub fn record_every(&self) -> Option<usize> {
        self.output.as_ref().and_then(|o| o.record_every)
    }
}
