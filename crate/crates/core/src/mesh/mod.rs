//! Triangle mesh connectivity, discrete metrics and mesh generators.

pub mod doubling;
mod halfedge;
mod metric;
pub mod shapes;

pub use doubling::{double_embedded, double_mesh, DoubledMesh};
pub use halfedge::HalfedgeMesh;
pub use metric::{
    validate_prescription, ConeMetric, ConePrescription, PrescriptionReport, DEGENERATE_AREA,
    GAUSS_BONNET_TOLERANCE,
};
