//! Windowed view of a unit cell: every strut is cut where it crosses the
//! cell boundary so that each element lies inside the cell, and the cut
//! points on opposite faces are tied together as periodic pairs.

use super::{shift_vec, Edge, Lattice, Shift};
use crate::error::{Error, Result};
use crate::{Mat3, Vec3};
use std::collections::HashMap;

const KEY_SCALE: f64 = 1e9;
const CROSSING_TOL: f64 = 1e-12;

/// `slave = master + offset` in reduced coordinates; `separation = A·offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicPair {
    pub master: usize,
    pub slave: usize,
    pub offset: Shift,
    pub separation: Vec3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowedLattice {
    pub cell: Mat3,
    pub radius: f64,
    /// Reduced coordinates, each component in `[0, 1]`.
    pub reduced: Vec<Vec3>,
    /// Fundamental node that a windowed node is an image of, `None` for
    /// boundary cut points.
    pub origin: Vec<Option<usize>>,
    pub elements: Vec<(usize, usize)>,
    pub periodic_pairs: Vec<PeriodicPair>,
}

type Key = [i64; 3];

fn key(x: &Vec3) -> Key {
    [
        (x[0] * KEY_SCALE).round() as i64,
        (x[1] * KEY_SCALE).round() as i64,
        (x[2] * KEY_SCALE).round() as i64,
    ]
}

fn wrapped_key(x: &Vec3) -> Key {
    let k = key(x);
    let s = KEY_SCALE as i64;
    [k[0].rem_euclid(s), k[1].rem_euclid(s), k[2].rem_euclid(s)]
}

struct Builder {
    cell: Mat3,
    reduced: Vec<Vec3>,
    origin: Vec<Option<usize>>,
    elements: Vec<(usize, usize)>,
    pairs: Vec<PeriodicPair>,
    by_position: HashMap<Key, usize>,
    by_class: HashMap<Key, usize>,
}

impl Builder {
    fn node(&mut self, x: Vec3, origin: Option<usize>) -> usize {
        let k = key(&x);
        if let Some(&n) = self.by_position.get(&k) {
            if self.origin[n].is_none() {
                self.origin[n] = origin;
            }
            return n;
        }
        let n = self.reduced.len();
        self.reduced.push(x);
        self.origin.push(origin);
        self.by_position.insert(k, n);
        match self.by_class.get(&wrapped_key(&x)) {
            Some(&master) => {
                let d = x - self.reduced[master];
                let offset = [
                    d[0].round() as i32,
                    d[1].round() as i32,
                    d[2].round() as i32,
                ];
                self.pairs.push(PeriodicPair {
                    master,
                    slave: n,
                    offset,
                    separation: self.cell * shift_vec(&offset),
                });
            }
            None => {
                self.by_class.insert(wrapped_key(&x), n);
            }
        }
        n
    }

    /// Walks the straight segment from node `e.i` to the image of `e.j`,
    /// emitting one element per cell it passes through.
    fn add_edge(&mut self, lat: &Lattice, e: &Edge) {
        let start = lat.nodes[e.i];
        let d = lat.nodes[e.j] + shift_vec(&e.shift) - start;

        // Cell the segment heads into; a start point on a face counts as
        // belonging to the cell on the side the segment leaves towards.
        let mut cell: Shift = [0; 3];
        for c in 0..3 {
            cell[c] = if d[c] >= 0.0 {
                start[c].floor() as i32
            } else {
                start[c].ceil() as i32 - 1
            };
        }

        let mut from = self.node(start - shift_vec(&cell), Some(e.i));
        let mut s_done = 0.0;
        loop {
            let mut s_exit = f64::INFINITY;
            let mut exits = [f64::INFINITY; 3];
            for c in 0..3 {
                if d[c] != 0.0 {
                    let bound = if d[c] > 0.0 { cell[c] + 1 } else { cell[c] } as f64;
                    exits[c] = (bound - start[c]) / d[c];
                    s_exit = s_exit.min(exits[c]);
                }
            }
            if s_exit >= 1.0 - CROSSING_TOL {
                let mut end = lat.nodes[e.j];
                for c in 0..3 {
                    end[c] += (e.shift[c] - cell[c]) as f64;
                }
                let to = self.node(end, Some(e.j));
                self.elements.push((from, to));
                return;
            }
            debug_assert!(s_exit > s_done);
            s_done = s_exit;

            let crossing = start + d * s_exit;
            let mut inside = crossing - shift_vec(&cell);
            let mut next_cell = cell;
            for c in 0..3 {
                if exits[c] <= s_exit + CROSSING_TOL {
                    // Snap the crossed coordinate onto the face exactly.
                    inside[c] = if d[c] > 0.0 { 1.0 } else { 0.0 };
                    next_cell[c] += d[c].signum() as i32;
                }
            }
            let to = self.node(inside, None);
            self.elements.push((from, to));

            let mut image = inside;
            for c in 0..3 {
                image[c] -= (next_cell[c] - cell[c]) as f64;
            }
            cell = next_cell;
            from = self.node(image, None);
        }
    }
}

impl WindowedLattice {
    pub fn from_lattice(lat: &Lattice) -> Self {
        let mut b = Builder {
            cell: lat.cell,
            reduced: Vec::new(),
            origin: Vec::new(),
            elements: Vec::new(),
            pairs: Vec::new(),
            by_position: HashMap::new(),
            by_class: HashMap::new(),
        };
        for (i, x) in lat.nodes.iter().enumerate() {
            b.node(*x, Some(i));
        }
        for e in &lat.edges {
            b.add_edge(lat, e);
        }
        WindowedLattice {
            cell: lat.cell,
            radius: lat.radius,
            reduced: b.reduced,
            origin: b.origin,
            elements: b.elements,
            periodic_pairs: b.pairs,
        }
    }

    pub fn node_count(&self) -> usize {
        self.reduced.len()
    }

    /// Positions in transformed coordinates.
    pub fn positions(&self) -> Vec<Vec3> {
        self.reduced.iter().map(|x| self.cell * x).collect()
    }

    /// For every windowed node, the independent node it is tied to and the
    /// integer offset between them.
    pub fn masters(&self) -> Vec<(usize, Shift)> {
        let mut out: Vec<(usize, Shift)> = (0..self.reduced.len()).map(|n| (n, [0; 3])).collect();
        for p in &self.periodic_pairs {
            out[p.slave] = (p.master, p.offset);
        }
        out
    }

    /// Re-assembles the fundamental edge multiset by following strut chains
    /// through boundary cut points.
    pub fn fold(&self, name: &str) -> Result<Lattice> {
        let masters = self.masters();
        let mut incident: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
        for (k, &(a, b)) in self.elements.iter().enumerate() {
            incident.entry(masters[a].0).or_default().push((k, a));
            incident.entry(masters[b].0).or_default().push((k, b));
        }

        let mut fundamental: Vec<(usize, Vec3)> = Vec::new();
        for (n, o) in self.origin.iter().enumerate() {
            if let Some(i) = *o {
                if fundamental.iter().all(|(j, _)| *j != i) {
                    fundamental.push((i, self.reduced[n].map(|c| c - c.floor())));
                }
            }
        }
        fundamental.sort_by_key(|(i, _)| *i);
        if fundamental.iter().enumerate().any(|(k, (i, _))| k != *i) {
            return Err(Error::InvalidLattice(
                "windowed node origins are not contiguous".into(),
            ));
        }
        let base: Vec<Vec3> = fundamental.into_iter().map(|(_, x)| x).collect();

        let mut visited = vec![false; self.elements.len()];
        let mut edges = Vec::new();
        for k in 0..self.elements.len() {
            if visited[k] {
                continue;
            }
            let (a, b) = self.elements[k];
            let (start, mut cur) = match (self.origin[a], self.origin[b]) {
                (Some(_), _) => (a, b),
                (None, Some(_)) => (b, a),
                (None, None) => continue,
            };
            visited[k] = true;
            let i = self.origin[start].expect("start is a node image");
            let mut acc = self.reduced[cur] - self.reduced[start];
            let mut came_from = k;
            while self.origin[cur].is_none() {
                let next = incident[&masters[cur].0]
                    .iter()
                    .find(|&&(e, _)| e != came_from && !visited[e])
                    .copied()
                    .ok_or_else(|| Error::InvalidLattice("dangling boundary cut point".into()))?;
                let (e, at) = next;
                visited[e] = true;
                let (p, q) = self.elements[e];
                let other = if p == at { q } else { p };
                acc += self.reduced[other] - self.reduced[at];
                cur = other;
                came_from = e;
            }
            let j = self.origin[cur].expect("loop ends at a node image");
            let t = base[i] + acc - base[j];
            edges.push(Edge::new(
                i,
                j,
                [
                    t[0].round() as i32,
                    t[1].round() as i32,
                    t[2].round() as i32,
                ],
            ));
        }
        Lattice::new(name, self.cell, base, edges, self.radius)
    }
}
