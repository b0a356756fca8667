//! A handful of classic strut lattices, useful for demos and tests.
//!
//! Nodes sit at interior positions (no coordinate on 0) and edges are found
//! by a nearest-neighbour shell search over adjacent cells.

use super::{shift_vec, Edge, Lattice, Shift};
use crate::{Mat3, Vec3};
use std::collections::BTreeSet;

/// Connects every node pair (including periodic images in the 26 adjacent
/// cells) whose distance is within `rel_tol` of the shortest one.
pub fn nearest_neighbour_lattice(
    name: &str,
    cell: Mat3,
    nodes: Vec<Vec3>,
    radius: f64,
    rel_tol: f64,
) -> Lattice {
    let mut candidates = Vec::new();
    for i in 0..nodes.len() {
        for j in 0..nodes.len() {
            for a in -1..=1 {
                for b in -1..=1 {
                    for c in -1..=1 {
                        let t: Shift = [a, b, c];
                        let len = (cell * (nodes[j] - nodes[i] + shift_vec(&t))).norm();
                        if len > 1e-9 {
                            candidates.push((len, Edge::new(i, j, t).canonical()));
                        }
                    }
                }
            }
        }
    }
    let shortest = candidates.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    let edges: BTreeSet<Edge> = candidates
        .into_iter()
        .filter(|(len, _)| *len <= shortest * (1.0 + rel_tol))
        .map(|(_, e)| e)
        .collect();
    Lattice::new(name, cell, nodes, edges.into_iter().collect(), radius)
        .expect("library lattice is valid")
}

/// One node at the cell centre with three struts along the lattice vectors.
pub fn simple_cubic_with_cell(cell: Mat3, radius: f64) -> Lattice {
    Lattice::new(
        "simple_cubic",
        cell,
        vec![Vec3::new(0.5, 0.5, 0.5)],
        vec![
            Edge::new(0, 0, [1, 0, 0]),
            Edge::new(0, 0, [0, 1, 0]),
            Edge::new(0, 0, [0, 0, 1]),
        ],
        radius,
    )
    .expect("simple cubic is valid")
}

pub fn simple_cubic(radius: f64) -> Lattice {
    simple_cubic_with_cell(Mat3::identity(), radius)
}

/// Body-centred cubic: 2 nodes, 8 struts along body diagonals.
pub fn bcc(radius: f64) -> Lattice {
    nearest_neighbour_lattice(
        "bcc",
        Mat3::identity(),
        vec![Vec3::new(0.25, 0.25, 0.25), Vec3::new(0.75, 0.75, 0.75)],
        radius,
        1e-6,
    )
}

/// Octet truss: face-centred cubic nodes with 12 nearest neighbours.
pub fn octet(radius: f64) -> Lattice {
    nearest_neighbour_lattice(
        "octet",
        Mat3::identity(),
        vec![
            Vec3::new(0.25, 0.25, 0.25),
            Vec3::new(0.75, 0.75, 0.25),
            Vec3::new(0.75, 0.25, 0.75),
            Vec3::new(0.25, 0.75, 0.75),
        ],
        radius,
        1e-6,
    )
}

/// Diamond: two interpenetrating FCC sublattices, 4-coordinated.
pub fn diamond(radius: f64) -> Lattice {
    let fcc = [
        Vec3::new(0.0, 0.0, 0.0),
        Vec3::new(0.5, 0.5, 0.0),
        Vec3::new(0.5, 0.0, 0.5),
        Vec3::new(0.0, 0.5, 0.5),
    ];
    let offset = Vec3::new(0.125, 0.125, 0.125);
    let nodes = fcc
        .iter()
        .map(|p| p + offset)
        .chain(fcc.iter().map(|p| p + offset + Vec3::new(0.25, 0.25, 0.25)))
        .collect();
    nearest_neighbour_lattice("diamond", Mat3::identity(), nodes, radius, 1e-6)
}

/// Simple cubic plus body diagonals from a central node: 2 nodes, 11 struts.
pub fn simple_cubic_bcc(radius: f64) -> Lattice {
    let corner = Vec3::new(0.25, 0.25, 0.25);
    let centre = Vec3::new(0.75, 0.75, 0.75);
    let mut edges = vec![
        Edge::new(0, 0, [1, 0, 0]),
        Edge::new(0, 0, [0, 1, 0]),
        Edge::new(0, 0, [0, 0, 1]),
    ];
    for a in -1..=0 {
        for b in -1..=0 {
            for c in -1..=0 {
                edges.push(Edge::new(1, 0, [a + 1, b + 1, c + 1]));
            }
        }
    }
    Lattice::new(
        "sc_bcc",
        Mat3::identity(),
        vec![corner, centre],
        edges,
        radius,
    )
    .expect("valid")
}

/// Simple cubic topology in a sheared, stretched triclinic cell.
pub fn triclinic(radius: f64) -> Lattice {
    #[rustfmt::skip]
    let cell = Mat3::new(
        1.0, 0.2, 0.1,
        0.0, 1.1, 0.15,
        0.0, 0.0, 0.9,
    );
    simple_cubic_with_cell(cell, radius).with_name("triclinic")
}
