//! Corner angles, their derivatives, and the vertex angle constraints.

use crate::error::{check_len, Error, Result};
use crate::linalg::SparseRows;
use crate::mesh::HalfedgeMesh;
use crate::penner::{make_delaunay, DelaunayOptions};
use crate::scalar::Real;

/// Relative slack on the triangle inequality before a face is rejected.
const TRIANGLE_SLACK: f64 = 1e-12;

/// Scale of the cotangent entries in the angle Jacobian for `λ = 2 ln ℓ`.
pub const ANGLE_JACOBIAN_SCALE: f64 = 0.5;

/// Corner angles indexed by halfedge: entry `h` is the angle opposite `h`.
pub fn corner_angles<T: Real>(mesh: &HalfedgeMesh, lambda: &[T]) -> Result<Vec<T>> {
    check_len(mesh.n_edges(), lambda.len())?;
    let mut alpha = vec![T::zero(); mesh.n_halfedges()];
    for f in 0..mesh.n_faces() {
        let hs = mesh.face_halfedges(f);
        let a = face_angles(hs.map(|h| lambda[mesh.edge(h)]))
            .ok_or(Error::TriangleInequalityViolated { face: f })?;
        for k in 0..3 {
            alpha[hs[k]] = a[k];
        }
    }
    Ok(alpha)
}

/// Angles opposite three log lengths by the half-angle formula on lengths
/// normalized by the largest one.
fn face_angles<T: Real>(lambda: [T; 3]) -> Option<[T; 3]> {
    let m = lambda[0].max(lambda[1]).max(lambda[2]);
    let l = lambda.map(|x| ((x - m) * T::half()).exp());
    let s = (l[0] + l[1] + l[2]) * T::half();
    let d = l.map(|x| s - x);
    let slack = -T::of(TRIANGLE_SLACK);
    if d.iter().any(|&x| x < slack) {
        return None;
    }
    let d = d.map(|x| x.max(T::zero()));
    Some([0, 1, 2].map(|i| {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        T::two() * (d[j] * d[k]).sqrt().atan2((s * d[i]).sqrt())
    }))
}

/// Angle sum `Θ_v` at every vertex.
pub fn vertex_angle_sums<T: Real>(mesh: &HalfedgeMesh, alpha: &[T]) -> Vec<T> {
    let mut theta = vec![T::zero(); mesh.n_vertices()];
    for (h, &a) in alpha.iter().enumerate() {
        theta[mesh.opposite_vertex(h)] += a;
    }
    theta
}

/// Sparse `3|F| × |E|` matrix of corner-angle derivatives with respect to `λ`.
pub fn angle_jacobian<T: Real>(mesh: &HalfedgeMesh, lambda: &[T]) -> Result<SparseRows<T>> {
    let alpha = corner_angles(mesh, lambda)?;
    Ok(angle_jacobian_for_angles(mesh, &alpha))
}

pub fn angle_jacobian_for_angles<T: Real>(mesh: &HalfedgeMesh, alpha: &[T]) -> SparseRows<T> {
    let c = T::of(ANGLE_JACOBIAN_SCALE);
    let cot: Vec<T> = alpha.iter().map(|a| a.cos() / a.sin()).collect();
    let mut trip = Vec::with_capacity(9 * mesh.n_faces());
    for h in 0..mesh.n_halfedges() {
        let n = mesh.next(h);
        let p = mesh.next(n);
        trip.push((h, mesh.edge(h), c * (cot[n] + cot[p])));
        trip.push((h, mesh.edge(n), -c * cot[p]));
        trip.push((h, mesh.edge(p), -c * cot[n]));
    }
    SparseRows::from_triplets(mesh.n_halfedges(), mesh.n_edges(), &trip)
}

/// Target angles in constraint form; the highest-index vertex is dropped
/// since Gauss-Bonnet makes its row redundant.
#[derive(Clone, Debug)]
pub struct ConstraintSystem<T> {
    pub targets: Vec<T>,
    pub dropped: usize,
}

/// Residual and Jacobian of the angle constraints at one point.
#[derive(Clone, Debug)]
pub struct ConstraintEval<T> {
    /// `Θ_v − Θ̂_v` on retained vertices.
    pub residual: Vec<T>,
    /// `S ∇α D`, present when requested.
    pub jacobian: Option<SparseRows<T>>,
    /// Angle sums at every vertex, including the dropped one.
    pub angle_sums: Vec<T>,
    pub flips: usize,
}

impl<T: Real> ConstraintEval<T> {
    pub fn max_residual(&self) -> T {
        crate::scalar::max_abs(&self.residual)
    }
}

impl<T: Real> ConstraintSystem<T> {
    pub fn new(targets: Vec<T>) -> Self {
        let dropped = targets.len().saturating_sub(1);
        Self { targets, dropped }
    }

    pub fn n_constraints(&self) -> usize {
        self.dropped
    }

    /// Evaluates `F(λ) = S α(Del(λ)) − Θ̂` and optionally its Jacobian.
    pub fn evaluate(
        &self,
        mesh0: &HalfedgeMesh,
        lambda: &[T],
        with_jacobian: bool,
    ) -> Result<ConstraintEval<T>> {
        check_len(mesh0.n_vertices(), self.targets.len())?;
        let (seq, d) = make_delaunay(
            mesh0,
            lambda,
            DelaunayOptions {
                with_differential: with_jacobian,
                ..Default::default()
            },
        )?;
        let alpha = corner_angles(&seq.mesh, &seq.lambda)?;
        let sums = vertex_angle_sums(&seq.mesh, &alpha);
        let residual = (0..self.dropped)
            .map(|v| sums[v] - self.targets[v])
            .collect();
        let jacobian = d.map(|d| {
            let ga = angle_jacobian_for_angles(&seq.mesh, &alpha);
            summation_matrix(&seq.mesh, self.dropped).mul(&ga).mul(&d)
        });
        Ok(ConstraintEval {
            residual,
            jacobian,
            angle_sums: sums,
            flips: seq.flips.len(),
        })
    }
}

/// `(|V|−1) × 3|F|` matrix summing corners around every vertex below
/// `dropped`.
pub fn summation_matrix<T: Real>(mesh: &HalfedgeMesh, dropped: usize) -> SparseRows<T> {
    let trip: Vec<(usize, usize, T)> = (0..mesh.n_halfedges())
        .filter_map(|h| {
            let v = mesh.opposite_vertex(h);
            (v < dropped).then_some((v, h, T::one()))
        })
        .collect();
    SparseRows::from_triplets(dropped, mesh.n_halfedges(), &trip)
}

/// Residual and Jacobian for target angles `theta`; convenience wrapper.
pub fn constraint_residual_and_jacobian<T: Real>(
    mesh0: &HalfedgeMesh,
    lambda: &[T],
    theta: &[T],
) -> Result<(Vec<T>, SparseRows<T>)> {
    let eval = ConstraintSystem::new(theta.to_vec()).evaluate(mesh0, lambda, true)?;
    Ok((eval.residual, eval.jacobian.expect("requested")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::shapes;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn angles_of(l: [f64; 3]) -> [f64; 3] {
        face_angles(l.map(|x| 2.0 * x.ln())).unwrap()
    }

    #[test]
    fn right_triangle() {
        let a = angles_of([3.0, 4.0, 5.0]);
        assert!((a[0] - 0.643501108793284).abs() < 1e-14);
        assert!((a[1] - 0.927295218001612).abs() < 1e-14);
        assert!((a[2] - PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn needle_triangle_sums_to_pi() {
        let a = angles_of([1.0, 1.0, 1.999]);
        assert!((a.iter().sum::<f64>() - PI).abs() < 1e-10);
        // acos of the cosine law, evaluated by hand for the obtuse corner
        let big = (1.0f64 + 1.0 - 1.999 * 1.999) / 2.0;
        assert!((a[2] - big.acos()).abs() < 1e-7);
    }

    #[test]
    fn violated_inequality_is_reported() {
        let m = shapes::two_triangle_sphere();
        let l = [0.0, 0.0, 2.0 * 2.5f64.ln()];
        assert!(matches!(
            corner_angles(&m, &l),
            Err(Error::TriangleInequalityViolated { .. })
        ));
    }

    #[test]
    fn equilateral_jacobian_entries() {
        let m = shapes::two_triangle_sphere();
        let j = angle_jacobian(&m, &[0.0f64; 3]).unwrap();
        let k = 1.0 / 3f64.sqrt();
        for h in 0..6 {
            let row = j.row(h);
            assert_eq!(row.len(), 3);
            let own = j.get(h, m.edge(h));
            assert!((own - 2.0 * ANGLE_JACOBIAN_SCALE * k).abs() < 1e-14);
            let other = j.get(h, m.edge(m.next(h)));
            assert!((other + ANGLE_JACOBIAN_SCALE * k).abs() < 1e-14);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let (m, _) = shapes::regular_tetrahedron::<f64>();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let l: Vec<f64> = (0..6).map(|_| rng.gen_range(-0.3..0.3)).collect();
            let j = angle_jacobian(&m, &l).unwrap().to_dense();
            for e in 0..6 {
                let step = 1e-6;
                let (mut lp, mut lm) = (l.clone(), l.clone());
                lp[e] += step;
                lm[e] -= step;
                let (ap, am) = (
                    corner_angles(&m, &lp).unwrap(),
                    corner_angles(&m, &lm).unwrap(),
                );
                for h in 0..12 {
                    let fd = (ap[h] - am[h]) / (2.0 * step);
                    assert!((fd - j[h][e]).abs() <= 1e-6 * fd.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn residual_examples() {
        let (m, _) = shapes::regular_tetrahedron::<f64>();
        let eval = ConstraintSystem::new(vec![PI; 4])
            .evaluate(&m, &[0.0; 6], true)
            .unwrap();
        assert_eq!(eval.residual.len(), 3);
        assert!(eval.max_residual() < 1e-14);
        let s = shapes::two_triangle_sphere();
        let eval = ConstraintSystem::new(vec![2.0 * PI / 3.0; 3])
            .evaluate(&s, &[0.0; 3], false)
            .unwrap();
        assert!(eval.max_residual() < 1e-14);
    }
}
