//! Line-delimited lattice catalogue.
//!
//! One JSON object per line:
//! `{"name": .., "cell": [9 reals, row-major A], "nodes": [3N reals],
//!   "edges": [[i, j, tx, ty, tz], ..], "radius": ..}`.
//! Blank lines and lines starting with `#` are skipped.

use super::{Edge, Lattice};
use crate::error::{Error, Result};
use crate::{Mat3, Vec3};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeRecord {
    pub name: String,
    pub cell: Vec<f64>,
    pub nodes: Vec<f64>,
    pub edges: Vec<[i64; 5]>,
    pub radius: f64,
}

impl LatticeRecord {
    pub fn into_lattice(self) -> Result<Lattice> {
        if self.cell.len() != 9 {
            return Err(Error::InvalidLattice(format!(
                "cell needs 9 entries, got {}",
                self.cell.len()
            )));
        }
        if !self.nodes.len().is_multiple_of(3) {
            return Err(Error::InvalidLattice(format!(
                "nodes must hold 3 coordinates per node, got {} values",
                self.nodes.len()
            )));
        }
        let cell = Mat3::from_row_slice(&self.cell);
        let nodes = self.nodes.chunks(3).map(Vec3::from_column_slice).collect();
        let mut edges = Vec::with_capacity(self.edges.len());
        for (n, e) in self.edges.iter().enumerate() {
            if e[0] < 0 || e[1] < 0 {
                return Err(Error::InvalidLattice(format!(
                    "edge {n} has a negative node index"
                )));
            }
            let shift: Result<Vec<i32>> = e[2..]
                .iter()
                .map(|&t| {
                    i32::try_from(t)
                        .map_err(|_| Error::InvalidLattice(format!("edge {n} shift out of range")))
                })
                .collect();
            let shift = shift?;
            edges.push(Edge::new(
                e[0] as usize,
                e[1] as usize,
                [shift[0], shift[1], shift[2]],
            ));
        }
        Lattice::new(self.name, cell, nodes, edges, self.radius)
    }
}

impl From<&Lattice> for LatticeRecord {
    fn from(lat: &Lattice) -> Self {
        let a = lat.cell();
        LatticeRecord {
            name: lat.name().to_string(),
            cell: (0..3)
                .flat_map(|i| (0..3).map(move |j| (i, j)))
                .map(|(i, j)| a[(i, j)])
                .collect(),
            nodes: lat.nodes().iter().flat_map(|x| x.iter().copied()).collect(),
            edges: lat
                .edges()
                .iter()
                .map(|e| {
                    [
                        e.i as i64,
                        e.j as i64,
                        e.shift[0] as i64,
                        e.shift[1] as i64,
                        e.shift[2] as i64,
                    ]
                })
                .collect(),
            radius: lat.radius(),
        }
    }
}

impl Lattice {
    /// Single-line JSON record.
    pub fn to_record_line(&self) -> String {
        serde_json::to_string(&LatticeRecord::from(self)).expect("record serializes")
    }
}

/// Parses every record, keeping per-line outcomes (1-based line numbers).
pub fn parse_catalogue(text: &str) -> Vec<(usize, Result<Lattice>)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .map(|(n, l)| {
            let line = n + 1;
            let parsed = serde_json::from_str::<LatticeRecord>(l)
                .map_err(|e| e.to_string())
                .and_then(|r| r.into_lattice().map_err(|e| e.to_string()))
                .map_err(|reason| Error::Parse { line, reason });
            (line, parsed)
        })
        .collect()
}

/// Parses a catalogue, failing on the first invalid record.
pub fn read_catalogue(text: &str) -> Result<Vec<Lattice>> {
    parse_catalogue(text).into_iter().map(|(_, r)| r).collect()
}
