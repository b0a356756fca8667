//! Nodal-position design by gradient descent with the homogenizer in the
//! loop.
//!
//! Gradients are central finite differences of the component loss with
//! respect to the transformed coordinates of the free nodes. The cell is held
//! fixed. With backtracking enabled a step is halved until the objective does
//! not increase, so the objective history is nonincreasing.

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fe::{homogenize, BeamMaterial};
use crate::lattice::Lattice;
use crate::metrics::l_comp;
use crate::tensor4::ElasticTensor4;
use crate::Vec3;

pub const DEFAULT_MAX_STEPS: usize = 50;
pub const DEFAULT_FD_STEP: f64 = 1e-5;
/// Step size tuned on the simple-cubic softening demo.
pub const DEFAULT_STEP_SIZE: f64 = 2000.0;
pub const MAX_HALVINGS: usize = 20;
pub const GRADIENT_TOL: f64 = 1e-8;
/// Shortest strut a step may produce.
pub const MIN_STRUT_LENGTH: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct DesignProblem {
    pub base: Lattice,
    pub target: ElasticTensor4,
    pub free_nodes: Vec<usize>,
    pub step_size: f64,
    pub max_steps: usize,
    pub fd_step: f64,
    /// Halve rejected steps; when off every step is taken as computed.
    pub backtracking: bool,
}

impl DesignProblem {
    /// All nodes free, default step counts and difference step.
    pub fn new(base: Lattice, target: ElasticTensor4, step_size: f64) -> Self {
        let free_nodes = (0..base.node_count()).collect();
        Self {
            base,
            target,
            free_nodes,
            step_size,
            max_steps: DEFAULT_MAX_STEPS,
            fd_step: DEFAULT_FD_STEP,
            backtracking: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(&i) = self
            .free_nodes
            .iter()
            .find(|&&i| i >= self.base.node_count())
        {
            return Err(Error::InvalidArgument(format!(
                "free node {i} does not exist"
            )));
        }
        let mut sorted = self.free_nodes.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.free_nodes.len() {
            return Err(Error::InvalidArgument(
                "free nodes contain duplicates".into(),
            ));
        }
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "step size {} must be positive",
                self.step_size
            )));
        }
        if !(self.fd_step.is_finite() && self.fd_step > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "finite-difference step {} must be positive",
                self.fd_step
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StopReason {
    MaxSteps,
    /// Gradient norm fell below [`GRADIENT_TOL`] or the objective reached 0.
    Stationary,
    /// No halving of the step reduced the objective.
    LineSearchFailed,
    /// Homogenization failed mid-run; the trace ends at the last good lattice.
    Aborted(Error),
}

#[derive(Debug, Clone)]
pub struct DesignTrace {
    pub objective_history: Vec<f64>,
    pub final_lattice: Lattice,
    pub final_stiffness: ElasticTensor4,
    pub stop: StopReason,
}

impl DesignTrace {
    pub fn steps(&self) -> usize {
        self.objective_history.len() - 1
    }
}

fn loss(c: &ElasticTensor4, target: &ElasticTensor4) -> f64 {
    l_comp(&c.to_mandel(), &target.to_mandel())
}

pub fn objective(lat: &Lattice, target: &ElasticTensor4, mat: &BeamMaterial) -> Result<f64> {
    Ok(loss(&homogenize(lat, mat)?.stiffness, target))
}

/// Central-difference gradient with respect to the transformed coordinates
/// of each free node, in the order given.
pub fn fd_gradient(
    lat: &Lattice,
    target: &ElasticTensor4,
    free_nodes: &[usize],
    fd_step: f64,
    mat: &BeamMaterial,
    exec: Execution,
) -> Result<Vec<(usize, Vec3)>> {
    if !(fd_step.is_finite() && fd_step > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "finite-difference step {fd_step} must be positive"
        )));
    }
    let values = exec.map_range(6 * free_nodes.len(), |k| {
        let (node, comp, sign) = (
            free_nodes[k / 6],
            (k / 2) % 3,
            if k % 2 == 0 { 1.0 } else { -1.0 },
        );
        let mut delta = Vec3::zeros();
        delta[comp] = sign * fd_step;
        objective(&lat.displace_nodes(&[(node, delta)])?, target, mat)
    });
    let values: Vec<f64> = values.into_iter().collect::<Result<_>>()?;
    Ok(free_nodes
        .iter()
        .enumerate()
        .map(|(n, &node)| {
            let g = Vec3::from_fn(|c, _| {
                (values[6 * n + 2 * c] - values[6 * n + 2 * c + 1]) / (2.0 * fd_step)
            });
            (node, g)
        })
        .collect())
}

fn shortest_strut(lat: &Lattice) -> f64 {
    lat.edge_vectors()
        .iter()
        .map(|v| v.norm())
        .fold(f64::INFINITY, f64::min)
}

/// Lattice after `x ← x − η g`, or `None` when the step is geometrically
/// inadmissible (collapsed strut or invalid graph).
fn take_step(lat: &Lattice, grad: &[(usize, Vec3)], eta: f64) -> Option<Lattice> {
    let moves: Vec<(usize, Vec3)> = grad.iter().map(|&(i, g)| (i, -eta * g)).collect();
    let next = lat.displace_nodes(&moves).ok()?;
    (shortest_strut(&next) >= MIN_STRUT_LENGTH).then_some(next)
}

pub fn solve(prob: &DesignProblem, mat: &BeamMaterial, exec: Execution) -> Result<DesignTrace> {
    prob.validate()?;
    let mut lat = prob.base.clone();
    let mut stiffness = homogenize(&lat, mat)?.stiffness;
    let mut current = loss(&stiffness, &prob.target);
    let mut history = vec![current];
    let mut stop = StopReason::MaxSteps;

    for _ in 0..prob.max_steps {
        if current <= 0.0 {
            stop = StopReason::Stationary;
            break;
        }
        let grad = match fd_gradient(
            &lat,
            &prob.target,
            &prob.free_nodes,
            prob.fd_step,
            mat,
            exec,
        ) {
            Ok(g) => g,
            Err(e) => {
                stop = StopReason::Aborted(e);
                break;
            }
        };
        let norm = grad
            .iter()
            .map(|(_, g)| g.norm_squared())
            .sum::<f64>()
            .sqrt();
        if norm < GRADIENT_TOL {
            stop = StopReason::Stationary;
            break;
        }

        let mut eta = prob.step_size;
        let mut accepted = None;
        let mut failure = None;
        for _ in 0..=MAX_HALVINGS {
            if let Some(next) = take_step(&lat, &grad, eta) {
                match homogenize(&next, mat) {
                    Ok(res) => {
                        let value = loss(&res.stiffness, &prob.target);
                        if !prob.backtracking || value <= current {
                            accepted = Some((next, res.stiffness, value));
                            break;
                        }
                    }
                    Err(e) if !prob.backtracking => {
                        failure = Some(e);
                        break;
                    }
                    Err(_) => {}
                }
            }
            eta *= 0.5;
        }
        match (accepted, failure) {
            (Some((next, c, value)), _) => {
                lat = next;
                stiffness = c;
                current = value;
                history.push(value);
            }
            (None, Some(e)) => {
                stop = StopReason::Aborted(e);
                break;
            }
            (None, None) => {
                stop = StopReason::LineSearchFailed;
                break;
            }
        }
    }

    // Fresh verification of the returned design.
    let verified = homogenize(&lat, mat)?.stiffness;
    debug_assert_eq!(verified, stiffness);
    Ok(DesignTrace {
        objective_history: history,
        final_lattice: lat,
        final_stiffness: verified,
        stop,
    })
}

/// Copy of `c` with every Mandel entry in row or column `slot` scaled by
/// `factor` (the diagonal entry once).
pub fn scale_mandel_slot(c: &ElasticTensor4, slot: usize, factor: f64) -> ElasticTensor4 {
    let mut m = c.to_mandel().into_inner();
    for k in 0..6 {
        m[(slot, k)] *= factor;
        if k != slot {
            m[(k, slot)] *= factor;
        }
    }
    crate::tensor4::MandelMatrix::new(m)
        .expect("scaling preserves symmetry")
        .to_tensor()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::library::*;
    use crate::sampling;

    fn start() -> Lattice {
        simple_cubic(0.05)
            .tessellate(2)
            .unwrap()
            .perturb(0.02, 1)
            .unwrap()
    }

    #[test]
    fn objective_vanishes_at_own_stiffness() {
        let lat = bcc(0.03);
        let c = homogenize(&lat, &BeamMaterial::default())
            .unwrap()
            .stiffness;
        assert_eq!(objective(&lat, &c, &BeamMaterial::default()).unwrap(), 0.0);
    }

    #[test]
    fn objective_is_rotation_invariant() {
        let mat = BeamMaterial::default();
        let lat = start();
        let target = scale_mandel_slot(&homogenize(&lat, &mat).unwrap().stiffness, 1, 0.9);
        let base = objective(&lat, &target, &mat).unwrap();
        for r in sampling::rotations(3, 2) {
            let rotated =
                objective(&lat.rotate(&r).unwrap(), &target.rotate(&r).unwrap(), &mat).unwrap();
            assert!((rotated - base).abs() < 1e-8 * base);
        }
    }

    #[test]
    fn gradient_vanishes_at_minimum_and_respects_free_set() {
        let mat = BeamMaterial::default();
        let lat = start();
        let c = homogenize(&lat, &mat).unwrap().stiffness;
        let g = fd_gradient(
            &lat,
            &c,
            &[1, 4],
            DEFAULT_FD_STEP,
            &mat,
            Execution::Parallel,
        )
        .unwrap();
        assert_eq!(g.iter().map(|p| p.0).collect::<Vec<_>>(), vec![1, 4]);
        assert!(g.iter().all(|(_, v)| v.norm() < 1e-6));
        assert!(fd_gradient(&lat, &c, &[1], 0.0, &mat, Execution::Sequential).is_err());
    }

    #[test]
    fn gradient_matches_directional_derivative() {
        let mat = BeamMaterial::default();
        let lat = start();
        let target = scale_mandel_slot(&homogenize(&lat, &mat).unwrap().stiffness, 1, 0.8);
        let free: Vec<usize> = (0..lat.node_count()).collect();
        let g = fd_gradient(
            &lat,
            &target,
            &free,
            DEFAULT_FD_STEP,
            &mat,
            Execution::Parallel,
        )
        .unwrap();
        let norm = g.iter().map(|(_, v)| v.norm_squared()).sum::<f64>().sqrt();
        let h = 1e-4;
        let moves: Vec<_> = g.iter().map(|&(i, v)| (i, v * (h / norm))).collect();
        let f0 = objective(&lat, &target, &mat).unwrap();
        let f1 = objective(&lat.displace_nodes(&moves).unwrap(), &target, &mat).unwrap();
        let slope = (f1 - f0) / h;
        assert!((slope - norm).abs() < 0.05 * norm, "{slope} vs {norm}");
    }

    #[test]
    fn gradient_is_identical_sequential_and_parallel() {
        let mat = BeamMaterial::default();
        let lat = start();
        let target = scale_mandel_slot(&homogenize(&lat, &mat).unwrap().stiffness, 1, 0.8);
        let a = fd_gradient(&lat, &target, &[0, 3, 5], 1e-5, &mat, Execution::Sequential).unwrap();
        let b = fd_gradient(&lat, &target, &[0, 3, 5], 1e-5, &mat, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_step_trace_at_target() {
        let mat = BeamMaterial::default();
        let lat = start();
        let c = homogenize(&lat, &mat).unwrap().stiffness;
        let trace = solve(
            &DesignProblem::new(lat.clone(), c, DEFAULT_STEP_SIZE),
            &mat,
            Execution::Parallel,
        )
        .unwrap();
        assert_eq!(trace.objective_history, vec![0.0]);
        assert_eq!(trace.stop, StopReason::Stationary);
        assert_eq!(trace.final_lattice, lat);
    }

    #[test]
    fn one_step_decreases_and_history_is_monotone() {
        let mat = BeamMaterial::default();
        let lat = start();
        let target = scale_mandel_slot(&homogenize(&lat, &mat).unwrap().stiffness, 1, 0.9);
        let mut prob = DesignProblem::new(lat, target, DEFAULT_STEP_SIZE);
        prob.max_steps = 5;
        let trace = solve(&prob, &mat, Execution::Parallel).unwrap();
        let h = &trace.objective_history;
        assert!(h[0] > 0.0 && h[1] < h[0]);
        assert!(h.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(
            trace.final_stiffness,
            homogenize(&trace.final_lattice, &mat).unwrap().stiffness
        );
    }

    #[test]
    fn rotated_problem_follows_same_path() {
        let mat = BeamMaterial::default();
        let lat = start();
        let target = scale_mandel_slot(&homogenize(&lat, &mat).unwrap().stiffness, 1, 0.8);
        let mut prob = DesignProblem::new(lat.clone(), target, DEFAULT_STEP_SIZE);
        prob.max_steps = 3;
        let a = solve(&prob, &mat, Execution::Parallel).unwrap();
        let r = sampling::rotations(1, 5)[0];
        let mut rotated = DesignProblem::new(
            lat.rotate(&r).unwrap(),
            target.rotate(&r).unwrap(),
            DEFAULT_STEP_SIZE,
        );
        rotated.max_steps = 3;
        let b = solve(&rotated, &mat, Execution::Parallel).unwrap();
        assert_eq!(a.steps(), b.steps());
        let (fa, fb) = (
            a.objective_history.last().unwrap(),
            b.objective_history.last().unwrap(),
        );
        assert!((fa - fb).abs() < 1e-6 * a.objective_history[0]);
    }

    #[test]
    fn invalid_problems_rejected() {
        let lat = start();
        let c = ElasticTensor4::isotropic(1.0, 1.0);
        let mut p = DesignProblem::new(lat.clone(), c, 1.0);
        p.free_nodes = vec![0, 99];
        assert!(p.validate().is_err());
        assert!(DesignProblem::new(lat.clone(), c, 0.0).validate().is_err());
        let mut q = DesignProblem::new(lat, c, 1.0);
        q.fd_step = -1.0;
        assert!(q.validate().is_err());
    }

    #[test]
    fn slot_scaling_touches_row_and_column_once() {
        let c = ElasticTensor4::isotropic(1.0, 1.0);
        let m = scale_mandel_slot(&c, 1, 0.8).to_mandel().into_inner();
        assert!((m[(1, 1)] - 2.4).abs() < 1e-15);
        assert!((m[(0, 1)] - 0.8).abs() < 1e-15 && (m[(1, 2)] - 0.8).abs() < 1e-15);
        assert_eq!(m[(0, 0)], 3.0);
        assert_eq!(m[(0, 2)], 1.0);
    }
}
