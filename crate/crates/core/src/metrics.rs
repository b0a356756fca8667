//! Error metrics between predicted and target stiffness tensors.
//!
//! Component loss works on Mandel entries, directional losses on the scalar
//! projections `c_q = C_ijkl d_i d_j d_k d_l` over a fixed set of random
//! directions, and the rotation-consistency loss compares rotating a
//! prediction with predicting on a rotated lattice. The negative-eigenvalue
//! fraction counts tensors whose smallest Kelvin eigenvalue is strictly
//! below zero.

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fe::{homogenize, BeamMaterial};
use crate::lattice::Lattice;
use crate::sampling;
use crate::tensor4::{check_rotation, ElasticTensor4, MandelMatrix};
use crate::{Mat3, Vec3};
use serde::Serialize;

pub const DEFAULT_DIRECTIONS: usize = 250;
const DIRECTION_STREAM: u64 = 0x646972;

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    directions: Vec<Vec3>,
    seed: u64,
}

impl DirectionSet {
    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = sampling::stream_rng(seed, DIRECTION_STREAM);
        Self {
            directions: (0..n).map(|_| sampling::unit_vector(&mut rng)).collect(),
            seed,
        }
    }

    pub fn directions(&self) -> &[Vec3] {
        &self.directions
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn rotated(&self, r: &Mat3) -> Self {
        Self {
            directions: self.directions.iter().map(|d| r * d).collect(),
            seed: self.seed,
        }
    }

    /// Directional moduli of `c` along every direction.
    pub fn project(&self, c: &ElasticTensor4) -> Vec<f64> {
        self.directions
            .iter()
            .map(|d| c.directional_modulus_unchecked(d))
            .collect()
    }
}

pub fn l_comp(pred: &MandelMatrix, target: &MandelMatrix) -> f64 {
    (pred.matrix() - target.matrix()).norm_squared()
}

/// Mean-square of the 36 Mandel entries.
pub fn gamma(target: &MandelMatrix) -> f64 {
    target.matrix().norm_squared() / 36.0
}

/// Batch training loss `(1/B) Σ_p L_comp,p / γ_p`.
pub fn aggregate_training_loss(pairs: &[(MandelMatrix, MandelMatrix)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::InvalidArgument(
            "training loss needs at least one pair".into(),
        ));
    }
    let mut total = 0.0;
    for (p, (pred, target)) in pairs.iter().enumerate() {
        let g = gamma(target);
        if g == 0.0 {
            return Err(Error::InvalidArgument(format!(
                "target {p} is identically zero"
            )));
        }
        total += l_comp(pred, target) / g;
    }
    Ok(total / pairs.len() as f64)
}

/// Mean absolute directional error and its value relative to `√γ` of the
/// target.
pub fn l_dir(
    pred: &ElasticTensor4,
    target: &ElasticTensor4,
    dirs: &DirectionSet,
) -> Result<(f64, f64)> {
    if dirs.is_empty() {
        return Err(Error::InvalidArgument("direction set is empty".into()));
    }
    let diff = *pred - *target;
    let l = dirs.project(&diff).iter().map(|c| c.abs()).sum::<f64>() / dirs.len() as f64;
    let g = gamma(&target.to_mandel());
    if g == 0.0 {
        return Err(Error::InvalidArgument(
            "relative directional loss needs a nonzero target".into(),
        ));
    }
    Ok((l, l / g.sqrt()))
}

/// Anything that maps a lattice to a stiffness tensor.
pub trait Predictor: Sync {
    fn predict(&self, lat: &Lattice) -> Result<ElasticTensor4>;

    /// Whether calls may run concurrently.
    fn concurrency_safe(&self) -> bool {
        false
    }
}

/// The finite-element homogenizer as a predictor.
#[derive(Debug, Clone, Copy, Default)]
pub struct FePredictor {
    pub material: BeamMaterial,
}

impl Predictor for FePredictor {
    fn predict(&self, lat: &Lattice) -> Result<ElasticTensor4> {
        Ok(homogenize(lat, &self.material)?.stiffness)
    }

    fn concurrency_safe(&self) -> bool {
        true
    }
}

/// Adapter for closures.
pub struct FnPredictor<F> {
    f: F,
    concurrent: bool,
}

impl<F> FnPredictor<F>
where
    F: Fn(&Lattice) -> Result<ElasticTensor4> + Sync,
{
    pub fn new(f: F, concurrent: bool) -> Self {
        Self { f, concurrent }
    }
}

impl<F> Predictor for FnPredictor<F>
where
    F: Fn(&Lattice) -> Result<ElasticTensor4> + Sync,
{
    fn predict(&self, lat: &Lattice) -> Result<ElasticTensor4> {
        (self.f)(lat)
    }

    fn concurrency_safe(&self) -> bool {
        self.concurrent
    }
}

/// Rotation-consistency loss: mean over lattices, rotations and directions
/// of `|[R·f(L) − f(R·L)]_q|`.
pub fn l_equiv(
    predictor: &dyn Predictor,
    lattices: &[Lattice],
    rotations: &[Mat3],
    dirs: &DirectionSet,
    exec: Execution,
) -> Result<f64> {
    if rotations.is_empty() {
        return Err(Error::InvalidArgument(
            "l_equiv needs at least one rotation".into(),
        ));
    }
    if lattices.is_empty() || dirs.is_empty() {
        return Err(Error::InvalidArgument(
            "l_equiv needs lattices and directions".into(),
        ));
    }
    for r in rotations {
        check_rotation(r)?;
    }
    let exec = if predictor.concurrency_safe() {
        exec
    } else {
        Execution::Sequential
    };
    let s = rotations.len() + 1;
    let outputs = exec.map_range(lattices.len() * s, |job| {
        let lat = &lattices[job / s];
        let out = match job % s {
            0 => predictor.predict(lat),
            k => lat
                .rotate(&rotations[k - 1])
                .and_then(|l| predictor.predict(&l)),
        };
        out.map_err(|e| e.in_lattice(lat.name()))
    });
    let outputs: Vec<ElasticTensor4> = outputs.into_iter().collect::<Result<_>>()?;
    let mut total = 0.0;
    for p in 0..lattices.len() {
        let base = &outputs[p * s];
        for (k, r) in rotations.iter().enumerate() {
            let diff = base.rotate_unchecked(r) - outputs[p * s + k + 1];
            total += dirs.project(&diff).iter().map(|c| c.abs()).sum::<f64>();
        }
    }
    Ok(total / (lattices.len() * rotations.len() * dirs.len()) as f64)
}

/// Fraction of tensors with a strictly negative Kelvin eigenvalue.
pub fn negative_eig_fraction(preds: &[ElasticTensor4]) -> Result<f64> {
    if preds.is_empty() {
        return Err(Error::InvalidArgument(
            "negative-eigenvalue fraction of an empty set".into(),
        ));
    }
    let negative = preds
        .iter()
        .filter(|c| c.kelvin_spectrum().min_eigenvalue() < 0.0)
        .count();
    Ok(negative as f64 / preds.len() as f64)
}

/// Soft penalty `k · mean_q relu(−c_q)` on negative directional moduli.
pub fn negative_direction_penalty(c: &ElasticTensor4, dirs: &DirectionSet, k: f64) -> f64 {
    if dirs.is_empty() {
        return 0.0;
    }
    k * dirs.project(c).iter().map(|v| (-v).max(0.0)).sum::<f64>() / dirs.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub l_comp: f64,
    pub l_dir: f64,
    pub l_dir_rel: f64,
    pub l_equiv: Option<f64>,
    pub negative_eig_fraction: f64,
}

impl MetricReport {
    /// Per-pair losses averaged over the set; the eigenvalue fraction is taken
    /// over the predictions.
    pub fn evaluate(
        preds: &[ElasticTensor4],
        targets: &[ElasticTensor4],
        dirs: &DirectionSet,
    ) -> Result<Self> {
        if preds.len() != targets.len() {
            return Err(Error::InvalidArgument(format!(
                "{} predictions but {} targets",
                preds.len(),
                targets.len()
            )));
        }
        if preds.is_empty() {
            return Err(Error::InvalidArgument("no tensors to compare".into()));
        }
        let n = preds.len() as f64;
        let (mut comp, mut dir, mut dir_rel) = (0.0, 0.0, 0.0);
        for (p, (pred, target)) in preds.iter().zip(targets).enumerate() {
            comp += l_comp(&pred.to_mandel(), &target.to_mandel());
            let (a, b) = l_dir(pred, target, dirs).map_err(|e| match e {
                Error::InvalidArgument(m) => Error::InvalidArgument(format!("pair {p}: {m}")),
                other => other,
            })?;
            dir += a;
            dir_rel += b;
        }
        Ok(Self {
            l_comp: comp / n,
            l_dir: dir / n,
            l_dir_rel: dir_rel / n,
            l_equiv: None,
            negative_eig_fraction: negative_eig_fraction(preds)?,
        })
    }
}
