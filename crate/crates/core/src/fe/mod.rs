//! Periodic frame homogenization.
//!
//! Each strut is an Euler–Bernoulli beam between two nodes. The displacement
//! of a node is the macroscopic affine field `ε·X` plus a periodic
//! fluctuation, and rotations are periodic. Working on the fundamental
//! representation, an edge `(i, j, t)` therefore sees the jump `ε·v` between
//! its ends, `v = A·(x_j − x_i + t)`, on top of the fluctuations of nodes `i`
//! and `j`. Translation of node 0 is pinned to remove the rigid modes.
//!
//! For every unit Mandel strain the fluctuation problem is solved, and the
//! Mandel stiffness is assembled from the cross energies,
//! `C_ab = dₐᵀ K d_b / V`, which makes it symmetric and positive
//! semi-definite by construction.

pub mod beam;
mod solver;

pub use beam::beam_stiffness;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::lattice::{Lattice, WindowedLattice};
use crate::tensor4::{mandel_to_strain, ElasticTensor4, MandelMatrix};
use crate::{Mat6, Vec3};
use nalgebra::{SMatrix, Vector6};
use solver::Cholesky;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamMaterial {
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
}

impl Default for BeamMaterial {
    fn default() -> Self {
        Self {
            youngs_modulus: 1.0,
            poisson_ratio: 0.3,
        }
    }
}

impl BeamMaterial {
    pub fn new(youngs_modulus: f64, poisson_ratio: f64) -> Result<Self> {
        if !(youngs_modulus.is_finite() && youngs_modulus > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "Young's modulus {youngs_modulus} must be positive"
            )));
        }
        if !(poisson_ratio > -1.0 && poisson_ratio < 0.5) {
            return Err(Error::InvalidArgument(format!(
                "Poisson ratio {poisson_ratio} must lie in (-1, 0.5)"
            )));
        }
        Ok(Self {
            youngs_modulus,
            poisson_ratio,
        })
    }

    pub fn shear_modulus(&self) -> f64 {
        self.youngs_modulus / (2.0 * (1.0 + self.poisson_ratio))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomogenizationResult {
    pub stiffness: ElasticTensor4,
    pub relative_density: f64,
    /// Number of unknowns after pinning.
    pub dof_count: usize,
    /// `‖K U − F‖_F / ‖F‖_F` over the six load cases.
    pub residual: f64,
    /// `max |H − Hᵀ| / max |H|` of the assembled Mandel matrix before it is
    /// stored symmetrically.
    pub raw_asymmetry: f64,
    pub elapsed: Duration,
}

/// A strut between two independent nodes, with its current vector `b − a`.
#[derive(Debug, Clone, Copy)]
pub struct Bar {
    pub a: usize,
    pub b: usize,
    pub vector: Vec3,
}

/// Global unknown for (node, local dof); node 0 translations are pinned.
#[inline]
fn dof(node: usize, local: usize) -> Option<usize> {
    if node == 0 && local < 3 {
        None
    } else {
        Some(6 * node + local - 3)
    }
}

fn element_dofs(bar: &Bar) -> [Option<usize>; 12] {
    std::array::from_fn(|p| {
        if p < 6 {
            dof(bar.a, p)
        } else {
            dof(bar.b, p - 6)
        }
    })
}

fn unreachable(node_count: usize, bars: &[Bar]) -> Option<usize> {
    let mut adjacency = vec![Vec::new(); node_count];
    for b in bars {
        adjacency[b.a].push(b.b);
        adjacency[b.b].push(b.a);
    }
    let mut seen = vec![false; node_count];
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

/// Solves the six unit-strain cell problems and returns the raw Mandel
/// energy matrix `H` (not yet divided by the cell volume), the number of
/// unknowns and the solve residual.
pub(crate) fn solve_bars(
    node_count: usize,
    bars: &[Bar],
    radius: f64,
    mat: &BeamMaterial,
) -> Result<(Mat6, usize, f64)> {
    if node_count == 0 {
        return Err(Error::InvalidLattice("lattice has no nodes".into()));
    }
    if let Some(node) = unreachable(node_count, bars) {
        return Err(Error::Disconnected { node });
    }
    let n = 6 * node_count - 3;
    let unit_strains: Vec<crate::Mat3> = (0..6)
        .map(|a| {
            let mut v = Vector6::zeros();
            v[a] = 1.0;
            mandel_to_strain(&v)
        })
        .collect();

    let mut k = vec![0.0; n * n];
    let mut f = vec![0.0; 6 * n];
    let mut elements = Vec::with_capacity(bars.len());
    for bar in bars {
        let length = bar.vector.norm();
        let ke = beam_stiffness(length, radius, &bar.vector, mat)?;
        let dofs = element_dofs(bar);
        // Affine jump on the translations of end b, one column per load case.
        let mut g = SMatrix::<f64, 12, 6>::zeros();
        for (s, eps) in unit_strains.iter().enumerate() {
            g.fixed_view_mut::<3, 1>(6, s)
                .copy_from(&(eps * bar.vector));
        }
        let fe = -(ke * g);
        for p in 0..12 {
            let Some(gp) = dofs[p] else { continue };
            for q in 0..12 {
                if let Some(gq) = dofs[q] {
                    k[gp * n + gq] += ke[(p, q)];
                }
            }
            for s in 0..6 {
                f[s * n + gp] += fe[(p, s)];
            }
        }
        elements.push((ke, dofs, g));
    }

    let chol = Cholesky::factor(n, &k)?;
    let mut u = f.clone();
    for s in 0..6 {
        chol.solve_in_place(&mut u[s * n..(s + 1) * n]);
    }

    let mut res2 = 0.0;
    let mut f2 = 0.0;
    for s in 0..6 {
        let us = &u[s * n..(s + 1) * n];
        for i in 0..n {
            let row = &k[i * n..(i + 1) * n];
            let ku: f64 = row.iter().zip(us).map(|(a, b)| a * b).sum();
            let r = ku - f[s * n + i];
            res2 += r * r;
            f2 += f[s * n + i] * f[s * n + i];
        }
    }
    let residual = if f2 > 0.0 {
        (res2 / f2).sqrt()
    } else {
        res2.sqrt()
    };

    let mut h = Mat6::zeros();
    for (ke, dofs, g) in &elements {
        let mut d = *g;
        for p in 0..12 {
            if let Some(gp) = dofs[p] {
                for s in 0..6 {
                    d[(p, s)] += u[s * n + gp];
                }
            }
        }
        h += d.transpose() * ke * d;
    }
    Ok((h, n, residual))
}

fn finish(
    h: Mat6,
    volume: f64,
    relative_density: f64,
    dof_count: usize,
    residual: f64,
    start: Instant,
) -> Result<HomogenizationResult> {
    let scale = h.amax();
    let raw_asymmetry = if scale > 0.0 {
        (h - h.transpose()).amax() / scale
    } else {
        0.0
    };
    let mandel = MandelMatrix::new(h / volume)?;
    Ok(HomogenizationResult {
        stiffness: mandel.to_tensor(),
        relative_density,
        dof_count,
        residual,
        raw_asymmetry,
        elapsed: start.elapsed(),
    })
}

/// Homogenized stiffness of a lattice on its fundamental representation.
pub fn homogenize(lat: &Lattice, mat: &BeamMaterial) -> Result<HomogenizationResult> {
    let start = Instant::now();
    let relative_density = lat.relative_density();
    if relative_density >= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "strut radius {} gives relative density {relative_density:.3} >= 1",
            lat.radius()
        )));
    }
    let bars: Vec<Bar> = lat
        .edges()
        .iter()
        .zip(lat.edge_vectors())
        .map(|(e, v)| Bar {
            a: e.i,
            b: e.j,
            vector: v,
        })
        .collect();
    let (h, n, residual) = solve_bars(lat.node_count(), &bars, lat.radius(), mat)?;
    finish(h, lat.volume(), relative_density, n, residual, start)
}

/// Same problem on the windowed representation, with boundary images tied
/// to their masters (equal fluctuation and rotation, affine jump through
/// their actual positions). A strut cut very close to a face yields a short
/// segment whose stiffness scales as `1/L³`, so the conditioning of this
/// path degrades with the shortest cut; the fundamental path has no cuts.
pub fn homogenize_windowed(
    w: &WindowedLattice,
    mat: &BeamMaterial,
) -> Result<HomogenizationResult> {
    let start = Instant::now();
    let masters = w.masters();
    let mut index = vec![usize::MAX; w.node_count()];
    let mut count = 0;
    for (n, (m, _)) in masters.iter().enumerate() {
        if *m == n {
            index[n] = count;
            count += 1;
        }
    }
    let pos = w.positions();
    let bars: Vec<Bar> = w
        .elements
        .iter()
        .map(|&(a, b)| Bar {
            a: index[masters[a].0],
            b: index[masters[b].0],
            vector: pos[b] - pos[a],
        })
        .collect();
    let volume = w.cell.determinant();
    let length: f64 = bars.iter().map(|b| b.vector.norm()).sum();
    let relative_density = std::f64::consts::PI * w.radius * w.radius * length / volume;
    let (h, n, residual) = solve_bars(count, &bars, w.radius, mat)?;
    finish(h, volume, relative_density, n, residual, start)
}

/// Homogenizes every (lattice, radius) pair, lattice-major. Failures are
/// reported per item with the lattice name and do not stop the batch.
pub fn homogenize_batch(
    catalogue: &[Lattice],
    radii: &[f64],
    mat: &BeamMaterial,
    exec: Execution,
) -> Vec<Result<HomogenizationResult>> {
    let jobs: Vec<(usize, f64)> = (0..catalogue.len())
        .flat_map(|i| radii.iter().map(move |&r| (i, r)))
        .collect();
    exec.map(&jobs, |&(i, r)| {
        let lat = &catalogue[i];
        lat.with_radius(r)
            .and_then(|l| homogenize(&l, mat))
            .map_err(|e| e.in_lattice(lat.name()))
    })
}
