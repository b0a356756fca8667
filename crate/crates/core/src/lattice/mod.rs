//! Periodic unit cells in the fundamental representation.
//!
//! Nodes are stored in reduced coordinates `x ∈ [0, 1)³`; their positions in
//! space are `A·x` where the columns of the cell matrix `A` are the lattice
//! vectors. An edge `(i, j, t)` joins node `i` to the image of node `j` in the
//! cell displaced by the integer shift `t`, so its vector is
//! `A·(x_j − x_i + t)`.

mod catalogue;
pub mod library;
mod window;

pub use catalogue::{parse_catalogue, read_catalogue, LatticeRecord};
pub use window::{PeriodicPair, WindowedLattice};

use crate::error::{Error, Result};
use crate::sampling;
use crate::tensor4::check_rotation;
use crate::{Mat3, Vec3};
use std::f64::consts::PI;

/// Boundary-membership tolerance for reduced coordinates.
pub const BOUNDARY_TOL: f64 = 1e-9;
/// Minimum admissible edge length.
pub const MIN_EDGE_LENGTH: f64 = 1e-9;

/// Integer cell offset.
pub type Shift = [i32; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub shift: Shift,
}

impl Edge {
    pub fn new(i: usize, j: usize, shift: Shift) -> Self {
        Self { i, j, shift }
    }

    /// Orientation-independent form: `(j, i, −t)` describes the same strut.
    pub fn canonical(&self) -> Edge {
        let neg = [-self.shift[0], -self.shift[1], -self.shift[2]];
        if self.i < self.j || (self.i == self.j && self.shift > neg) {
            *self
        } else {
            Edge::new(self.j, self.i, neg)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeType {
    Inner,
    Face,
    Edge,
    Corner,
}

/// Classifies a reduced position by how many coordinates sit on 0 or 1.
pub fn classify_node(x: &Vec3) -> Result<NodeType> {
    let mut on_boundary = 0;
    for &c in x.iter() {
        if !c.is_finite() || !(-BOUNDARY_TOL..=1.0 + BOUNDARY_TOL).contains(&c) {
            return Err(Error::InvalidArgument(format!(
                "reduced coordinate {c} outside the unit cell"
            )));
        }
        if c.abs() <= BOUNDARY_TOL || (c - 1.0).abs() <= BOUNDARY_TOL {
            on_boundary += 1;
        }
    }
    Ok(match on_boundary {
        0 => NodeType::Inner,
        1 => NodeType::Face,
        2 => NodeType::Edge,
        _ => NodeType::Corner,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    name: String,
    cell: Mat3,
    nodes: Vec<Vec3>,
    edges: Vec<Edge>,
    radius: f64,
}

impl Lattice {
    pub fn new(
        name: impl Into<String>,
        cell: Mat3,
        nodes: Vec<Vec3>,
        edges: Vec<Edge>,
        radius: f64,
    ) -> Result<Self> {
        let invalid = |msg: String| Err(Error::InvalidLattice(msg));
        if cell.iter().any(|x| !x.is_finite()) {
            return invalid("cell has non-finite entries".into());
        }
        let det = cell.determinant();
        if det.is_nan() || det <= 1e-12 {
            return invalid(format!("cell determinant {det:e} is not positive"));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return invalid(format!("strut radius {radius} must be positive"));
        }
        for (n, x) in nodes.iter().enumerate() {
            if x.iter().any(|c| !c.is_finite() || *c < 0.0 || *c >= 1.0) {
                return invalid(format!(
                    "node {n} at ({}, {}, {}) is outside [0, 1)",
                    x[0], x[1], x[2]
                ));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for (n, e) in edges.iter().enumerate() {
            if e.i >= nodes.len() || e.j >= nodes.len() {
                return invalid(format!(
                    "edge {n} references node {} but only {} nodes exist",
                    e.i.max(e.j),
                    nodes.len()
                ));
            }
            let v = cell * (nodes[e.j] - nodes[e.i] + shift_vec(&e.shift));
            if v.norm() <= MIN_EDGE_LENGTH {
                return invalid(format!("edge {n} ({} -> {}) has zero length", e.i, e.j));
            }
            if !seen.insert(e.canonical()) {
                return invalid(format!(
                    "edge {n} duplicates ({} -> {}, shift {:?})",
                    e.i, e.j, e.shift
                ));
            }
        }
        Ok(Self {
            name: name.into(),
            cell,
            nodes,
            edges,
            radius,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn cell(&self) -> &Mat3 {
        &self.cell
    }

    /// Reduced coordinates.
    pub fn nodes(&self) -> &[Vec3] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn volume(&self) -> f64 {
        self.cell.determinant()
    }

    pub fn with_radius(&self, radius: f64) -> Result<Self> {
        Self::new(
            self.name.clone(),
            self.cell,
            self.nodes.clone(),
            self.edges.clone(),
            radius,
        )
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Position of node `i` in transformed coordinates.
    pub fn position(&self, i: usize) -> Vec3 {
        self.cell * self.nodes[i]
    }

    /// `A·(x_j − x_i + t)`.
    pub fn edge_vector(&self, e: &Edge) -> Result<Vec3> {
        if e.i >= self.nodes.len() || e.j >= self.nodes.len() {
            return Err(Error::InvalidArgument(format!(
                "edge ({} -> {}) references a node outside 0..{}",
                e.i,
                e.j,
                self.nodes.len()
            )));
        }
        Ok(self.edge_vector_unchecked(e))
    }

    pub(crate) fn edge_vector_unchecked(&self, e: &Edge) -> Vec3 {
        self.cell * (self.nodes[e.j] - self.nodes[e.i] + shift_vec(&e.shift))
    }

    pub fn edge_vectors(&self) -> Vec<Vec3> {
        self.edges
            .iter()
            .map(|e| self.edge_vector_unchecked(e))
            .collect()
    }

    pub fn node_types(&self) -> Vec<NodeType> {
        self.nodes
            .iter()
            .map(|x| classify_node(x).expect("validated node"))
            .collect()
    }

    /// Canonical, sorted edge multiset used for structural comparisons.
    pub fn canonical_edges(&self) -> Vec<Edge> {
        let mut out: Vec<Edge> = self.edges.iter().map(Edge::canonical).collect();
        out.sort();
        out
    }

    /// Strut volume fraction `Σ π r² L / det A`, ignoring junction overlap.
    pub fn relative_density(&self) -> f64 {
        let length: f64 = self.edge_vectors().iter().map(|v| v.norm()).sum();
        PI * self.radius * self.radius * length / self.volume()
    }

    /// First node not connected to node 0 through the strut graph.
    pub fn unreachable_node(&self) -> Option<usize> {
        let n = self.nodes.len();
        if n == 0 {
            return None;
        }
        let mut adjacency = vec![Vec::new(); n];
        for e in &self.edges {
            adjacency[e.i].push(e.j);
            adjacency[e.j].push(e.i);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().position(|s| !s)
    }

    /// The same infinite structure viewed through an `n×n×n` supercell.
    pub fn tessellate(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "tessellation factor must be at least 1".into(),
            ));
        }
        let count = self.nodes.len();
        let ni = n as i32;
        let offsets: Vec<Shift> = (0..ni)
            .flat_map(|a| (0..ni).flat_map(move |b| (0..ni).map(move |c| [a, b, c])))
            .collect();
        let cell_index = |o: &Shift| ((o[0] * ni + o[1]) * ni + o[2]) as usize;

        let mut nodes = Vec::with_capacity(count * offsets.len());
        for o in &offsets {
            for x in &self.nodes {
                nodes.push((x + shift_vec(o)) / n as f64);
            }
        }
        let mut edges = Vec::with_capacity(self.edges.len() * offsets.len());
        for o in &offsets {
            for e in &self.edges {
                let mut target = [0; 3];
                let mut shift = [0; 3];
                for c in 0..3 {
                    let abs = o[c] + e.shift[c];
                    target[c] = abs.rem_euclid(ni);
                    shift[c] = abs.div_euclid(ni);
                }
                edges.push(Edge::new(
                    cell_index(o) * count + e.i,
                    cell_index(&target) * count + e.j,
                    shift,
                ));
            }
        }
        Self::new(
            self.name.clone(),
            self.cell * n as f64,
            nodes,
            edges,
            self.radius,
        )
    }

    /// Moves nodes by displacements given in transformed coordinates, wrapping
    /// them back into `[0, 1)` and correcting incident shifts so every edge
    /// keeps its unwrapped geometry.
    pub fn displace_nodes(&self, moves: &[(usize, Vec3)]) -> Result<Self> {
        let inv = self
            .cell
            .try_inverse()
            .ok_or_else(|| Error::InvalidLattice("singular cell".into()))?;
        let mut nodes = self.nodes.clone();
        let mut wraps = vec![[0i32; 3]; nodes.len()];
        for &(i, delta) in moves {
            if i >= nodes.len() {
                return Err(Error::InvalidArgument(format!("node {i} does not exist")));
            }
            if delta.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite("node displacement"));
            }
            let moved = nodes[i] + inv * delta;
            for c in 0..3 {
                let mut w = moved[c].floor();
                let mut frac = moved[c] - w;
                if frac >= 1.0 {
                    frac -= 1.0;
                    w += 1.0;
                }
                nodes[i][c] = frac;
                wraps[i][c] += w as i32;
            }
        }
        let edges = self
            .edges
            .iter()
            .map(|e| {
                let mut shift = e.shift;
                for c in 0..3 {
                    shift[c] += wraps[e.j][c] - wraps[e.i][c];
                }
                Edge::new(e.i, e.j, shift)
            })
            .collect();
        Self::new(self.name.clone(), self.cell, nodes, edges, self.radius)
    }

    /// Displaces every node by exactly `level` (transformed units) along an
    /// independent uniform random direction. The direction of node `i`
    /// depends only on `(seed, i)`.
    pub fn perturb(&self, level: f64, seed: u64) -> Result<Self> {
        if self.nodes.len() < 2 {
            return Err(Error::InvalidArgument(
                "perturbation needs at least 2 fundamental nodes".into(),
            ));
        }
        if !(level.is_finite() && level >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "perturbation level {level} must be >= 0"
            )));
        }
        if level == 0.0 {
            return Ok(self.clone());
        }
        let moves: Vec<(usize, Vec3)> = (0..self.nodes.len())
            .map(|i| {
                let mut rng = sampling::stream_rng(seed, i as u64);
                (i, sampling::unit_vector(&mut rng) * level)
            })
            .collect();
        self.displace_nodes(&moves)
    }

    /// Rigid rotation of the embedding: `A ← R·A`.
    pub fn rotate(&self, r: &Mat3) -> Result<Self> {
        check_rotation(r)?;
        Ok(Self {
            cell: r * self.cell,
            ..self.clone()
        })
    }

    pub fn window(&self) -> WindowedLattice {
        WindowedLattice::from_lattice(self)
    }
}

pub(crate) fn shift_vec(s: &Shift) -> Vec3 {
    Vec3::new(s[0] as f64, s[1] as f64, s[2] as f64)
}
