use crate::error::{check_len, Error, Result};
use crate::mesh::HalfedgeMesh;
use crate::scalar::Real;

/// Relative area threshold below which an embedded face counts as degenerate.
pub const DEGENERATE_AREA: f64 = 1e-14;

/// Absolute tolerance on the Gauss-Bonnet identity for target angles.
pub const GAUSS_BONNET_TOLERANCE: f64 = 1e-9;

/// A discrete metric: positive edge lengths satisfying the strict triangle
/// inequality in every face.
#[derive(Clone, Debug)]
pub struct ConeMetric<T> {
    mesh: HalfedgeMesh,
    lengths: Vec<T>,
}

impl<T: Real> ConeMetric<T> {
    pub fn new(mesh: HalfedgeMesh, lengths: Vec<T>) -> Result<Self> {
        check_len(mesh.n_edges(), lengths.len())?;
        for (e, &l) in lengths.iter().enumerate() {
            if !(l > T::zero()) || !l.is_finite() {
                return Err(Error::NonpositiveLength {
                    edge: e,
                    length: l.f64(),
                });
            }
        }
        for f in 0..mesh.n_faces() {
            let [a, b, c] = mesh.face_edges(f).map(|e| lengths[e]);
            if !(a < b + c && b < c + a && c < a + b) {
                return Err(Error::TriangleInequalityViolated { face: f });
            }
        }
        Ok(Self { mesh, lengths })
    }

    /// Metric induced by a vertex embedding in R³.
    pub fn from_embedding(mesh: HalfedgeMesh, positions: &[[T; 3]]) -> Result<Self> {
        check_len(mesh.n_vertices(), positions.len())?;
        if positions.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite vertex position".into()));
        }
        let lengths: Vec<T> = (0..mesh.n_edges())
            .map(|e| {
                let [a, b] = mesh.edge_vertices(e);
                distance(&positions[a], &positions[b])
            })
            .collect();
        for f in 0..mesh.n_faces() {
            let [a, b, c] = mesh.face_vertices(f).map(|v| positions[v]);
            let area = triangle_area(&a, &b, &c);
            let lmax = mesh
                .face_edges(f)
                .iter()
                .map(|&e| lengths[e])
                .fold(T::zero(), T::max);
            if area < T::of(DEGENERATE_AREA) * lmax * lmax {
                return Err(Error::DegenerateTriangle {
                    face: f,
                    area: area.f64(),
                });
            }
        }
        Self::new(mesh, lengths)
    }

    pub fn mesh(&self) -> &HalfedgeMesh {
        &self.mesh
    }

    pub fn lengths(&self) -> &[T] {
        &self.lengths
    }

    /// Logarithmic coordinates `λ = 2 ln ℓ`.
    pub fn log_lengths(&self) -> Vec<T> {
        self.lengths.iter().map(|l| T::two() * l.ln()).collect()
    }

    pub fn into_parts(self) -> (HalfedgeMesh, Vec<T>) {
        (self.mesh, self.lengths)
    }
}

pub(crate) fn distance<T: Real>(a: &[T; 3], b: &[T; 3]) -> T {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

pub(crate) fn triangle_area<T: Real>(a: &[T; 3], b: &[T; 3], c: &[T; 3]) -> T {
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let n = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    T::half() * (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt()
}

/// Target cone angles `Θ̂`, one per vertex, in radians.
#[derive(Clone, Debug, PartialEq)]
pub struct ConePrescription<T> {
    pub angles: Vec<T>,
}

/// Outcome of a successful prescription check.
#[derive(Clone, Copy, Debug)]
pub struct PrescriptionReport<T> {
    /// `Σ (2π − Θ̂_v) − 2πχ`.
    pub residual: T,
    pub total_curvature: T,
}

impl<T: Real> ConePrescription<T> {
    pub fn new(mesh: &HalfedgeMesh, angles: Vec<T>) -> Result<Self> {
        validate_prescription(mesh, &angles)?;
        Ok(Self { angles })
    }

    /// Every vertex flat (`2π`); only valid on surfaces with `χ = 0`.
    pub fn flat(mesh: &HalfedgeMesh) -> Result<Self> {
        Self::new(mesh, vec![T::two() * T::PI(); mesh.n_vertices()])
    }
}

/// Checks positivity and the discrete Gauss-Bonnet identity
/// `Σ (2π − Θ̂_v) = 2πχ` to [`GAUSS_BONNET_TOLERANCE`].
pub fn validate_prescription<T: Real>(
    mesh: &HalfedgeMesh,
    angles: &[T],
) -> Result<PrescriptionReport<T>> {
    check_len(mesh.n_vertices(), angles.len())?;
    if let Some(v) = angles
        .iter()
        .position(|&a| !(a > T::zero()) || !a.is_finite())
    {
        return Err(Error::NonpositiveAngle { vertex: v });
    }
    let two_pi = T::two() * T::PI();
    let total_curvature: T = angles.iter().map(|&a| two_pi - a).sum();
    let chi = T::of(mesh.euler_characteristic() as f64);
    let residual = total_curvature - two_pi * chi;
    if residual.abs() > T::of(GAUSS_BONNET_TOLERANCE) {
        return Err(Error::GaussBonnetViolation {
            residual: residual.f64(),
        });
    }
    Ok(PrescriptionReport {
        residual,
        total_curvature,
    })
}
