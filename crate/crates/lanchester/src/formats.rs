//! File formats: the topology JSON shared by every command and the tabular
//! outputs, written as CSV or as JSON arrays of records.

use std::fs;
use std::io::Write;
use std::path::Path;

use lanchester_core::graph::{Adjacency, Engagement};
use lanchester_core::{ForceState, ModelError, Topology, Trajectory};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// `{n_blue, n_red, blue_edges, red_edges, engagement_edges}` with
/// manoeuvre edges as `[i, j]`, `i < j`, and engagement edges as
/// `[blue, red]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyFile {
    pub n_blue: usize,
    pub n_red: usize,
    pub blue_edges: Vec<[usize; 2]>,
    pub red_edges: Vec<[usize; 2]>,
    pub engagement_edges: Vec<[usize; 2]>,
}

impl TopologyFile {
    pub fn from_topology(t: &Topology) -> Self {
        TopologyFile {
            n_blue: t.n_blue(),
            n_red: t.n_red(),
            blue_edges: t.blue_manoeuvre.edges().map(|(i, j)| [i, j]).collect(),
            red_edges: t.red_manoeuvre.edges().map(|(i, j)| [i, j]).collect(),
            engagement_edges: t.engagement.links().map(|(b, r)| [b, r]).collect(),
        }
    }

    pub fn to_topology(&self) -> Result<Topology, ModelError> {
        let pairs = |e: &[[usize; 2]]| e.iter().map(|&[a, b]| (a, b)).collect::<Vec<_>>();
        Topology::new(
            Adjacency::from_edges(self.n_blue, &pairs(&self.blue_edges))?,
            Adjacency::from_edges(self.n_red, &pairs(&self.red_edges))?,
            Engagement::from_links(self.n_blue, self.n_red, &pairs(&self.engagement_edges))?,
        )
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let raw = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&raw).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        write_json(path, self)
    }
}

/// `{time, blue, red}` snapshot of a force state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub time: f64,
    pub blue: Vec<f64>,
    pub red: Vec<f64>,
}

impl From<&ForceState> for StateFile {
    fn from(s: &ForceState) -> Self {
        StateFile {
            time: s.time,
            blue: s.blue.clone(),
            red: s.red.clone(),
        }
    }
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("value serializes to JSON");
    fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}

/// Output flavour of tabular data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    Csv,
    Json,
}

impl DataFormat {
    pub fn extension(self) -> &'static str {
        match self {
            DataFormat::Csv => "csv",
            DataFormat::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(v) if v.is_nan() => String::new(),
            Cell::Float(v) => format!("{v}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Float(v) => serde_json::Number::from_f64(*v).map_or(serde_json::Value::Null, Into::into),
            Cell::Int(v) => (*v).into(),
            Cell::Text(s) => s.clone().into(),
            Cell::Bool(b) => (*b).into(),
            Cell::Empty => serde_json::Value::Null,
        }
    }
}

/// Named columns of rows. Empty and NaN cells are blank in CSV and `null`
/// in JSON.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Writes `<stem>.csv` or `<stem>.json` in `dir` and returns the file
    /// name.
    pub fn write(&self, dir: &Path, stem: &str, format: DataFormat) -> Result<String, CliError> {
        let name = format!("{stem}.{}", format.extension());
        let path = dir.join(&name);
        match format {
            DataFormat::Csv => {
                let io = |e: csv::Error| match e.into_kind() {
                    csv::ErrorKind::Io(e) => CliError::io(&path, e),
                    other => CliError::io(&path, std::io::Error::other(format!("{other:?}"))),
                };
                let mut w = csv::Writer::from_path(&path).map_err(io)?;
                w.write_record(&self.columns).map_err(io)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::csv)).map_err(io)?;
                }
                w.flush().map_err(|e| CliError::io(&path, e))?;
            }
            DataFormat::Json => {
                let records: Vec<serde_json::Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let map = self.columns.iter().cloned().zip(row.iter().map(Cell::json)).collect();
                        serde_json::Value::Object(map)
                    })
                    .collect();
                let mut f = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
                serde_json::to_writer(&mut f, &records).map_err(|e| CliError::io(&path, e.into()))?;
                f.write_all(b"\n").map_err(|e| CliError::io(&path, e))?;
            }
        }
        Ok(name)
    }
}

/// `time, B_1..B_N, R_1..R_M`, one row per sample.
pub fn trajectory_table(traj: &Trajectory) -> Table {
    let (nb, nr) = (traj.terminal.blue.len(), traj.terminal.red.len());
    let columns = std::iter::once("time".to_string())
        .chain((1..=nb).map(|i| format!("B_{i}")))
        .chain((1..=nr).map(|i| format!("R_{i}")));
    let mut t = Table::new(columns);
    for s in &traj.states {
        let row = std::iter::once(s.time)
            .chain(s.blue.iter().copied())
            .chain(s.red.iter().copied())
            .map(Cell::from)
            .collect();
        t.push(row);
    }
    t
}

/// Reads back a trajectory CSV as `(header, rows)`.
pub fn read_trajectory_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::io(path, std::io::Error::other(e.to_string())))?;
    let header = r
        .headers()
        .map_err(|e| CliError::io(path, std::io::Error::other(e.to_string())))?
        .iter()
        .map(String::from)
        .collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| CliError::io(path, std::io::Error::other(e.to_string())))?;
        let row = rec
            .iter()
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|e| CliError::config(format!("{}: {e}", path.display())))
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}
