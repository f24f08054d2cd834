//! Metric optimization in logarithmic Penner coordinates.
//!
//! ```
//! use std::f64::consts::{PI, TAU};
//! use penner::energy::{Energy, EnergyKind};
//! use penner::mesh::shapes;
//! use penner::optimize::{penner_optimize, OptimizerConfig, OptimizeStatus};
//! use penner::ConeMetric;
//!
//! let (mesh, positions) = shapes::icosphere::<f64>(1);
//! let lambda0 = ConeMetric::from_embedding(mesh.clone(), &positions)?.log_lengths();
//! // four cones of angle π, everything else flat
//! let mut theta = vec![TAU; mesh.n_vertices()];
//! for v in [0, 3, 4, 6] {
//!     theta[v] = PI;
//! }
//! let energy = Energy::new(EnergyKind::LogLength2, &mesh, &lambda0)?;
//! let result = penner_optimize(&mesh, &lambda0, &theta, &energy, &OptimizerConfig::default())?;
//! assert_eq!(result.status, OptimizeStatus::Converged);
//! # Ok::<(), penner::Error>(())
//! ```

pub mod conformal;
pub mod constraints;
pub mod energy;
pub mod error;
pub mod io;
pub mod linalg;
pub mod mapping;
pub mod mesh;
pub mod optimize;
pub mod penner;
pub mod scalar;

pub use error::{Error, Result};
pub use mesh::{ConeMetric, ConePrescription, HalfedgeMesh};
pub use scalar::Real;

pub type ConeMetric64 = ConeMetric<f64>;
pub type ConeMetric32 = ConeMetric<f32>;
