//! Numerical toolkit for periodic strut-lattice metamaterials.
//!
//! The crate covers the full path from a unit-cell graph to a homogenized
//! fourth-order stiffness tensor and the algebra around it:
//!
//! * [`tensor4`]: elasticity tensors, Mandel/Voigt matrices, rotations,
//!   directional moduli and the Kelvin spectrum.
//! * [`psd`]: positive-semidefinite projections of symmetric 6×6 matrices.
//! * [`lattice`]: the periodic unit-cell data model, windowing,
//!   tessellation and nodal perturbation.
//! * [`fe`]: periodic Euler–Bernoulli frame homogenization.
//! * [`metrics`]: component, directional and rotation-consistency errors.
//! * [`optimize`]: finite-difference gradient descent on nodal positions.
//!
//! Batch work (catalogue homogenization, equivariance sweeps, gradient
//! stencils) runs through [`exec::Execution`], which uses rayon when the
//! `parallel` feature is enabled and falls back to plain iteration otherwise.

#![allow(clippy::needless_range_loop)]

pub mod eigen;
pub mod error;
pub mod exec;
pub mod fe;
pub mod lattice;
pub mod metrics;
pub mod optimize;
pub mod psd;
pub mod record;
pub mod sampling;
pub mod tensor4;

pub use error::{Error, Result};
pub use exec::Execution;
pub use fe::{homogenize, homogenize_batch, BeamMaterial, HomogenizationResult};
pub use lattice::{Edge, Lattice, NodeType, WindowedLattice};
pub use metrics::{DirectionSet, MetricReport};
pub use psd::{PositiveMap, PsdMethod};
pub use tensor4::{ElasticTensor4, KelvinSpectrum, MandelMatrix, RotationPair, VoigtMatrix};

/// 3-vector used throughout for positions and directions.
pub type Vec3 = nalgebra::Vector3<f64>;
/// 3×3 matrix used for cells, rotations and second-order tensors.
pub type Mat3 = nalgebra::Matrix3<f64>;
/// 6×6 matrix in Mandel or Voigt space.
pub type Mat6 = nalgebra::Matrix6<f64>;
