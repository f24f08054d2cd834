//! Penner coordinates, Ptolemy flips and the ideal Delaunay flip algorithm.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Result};
use crate::linalg::SparseRows;
use crate::mesh::HalfedgeMesh;
use crate::scalar::{log_sum_exp, logistic, Real};

/// Ties (co-circular quads) within this tolerance count as Delaunay.
pub const DELAUNAY_TOLERANCE: f64 = 1e-12;

/// Logarithmic edge coordinates `λ = 2 ln ℓ` on a fixed reference mesh.
#[derive(Clone, Debug)]
pub struct PennerCoords<T> {
    pub mesh: HalfedgeMesh,
    pub lambda: Vec<T>,
}

impl<T: Real> PennerCoords<T> {
    pub fn new(mesh: HalfedgeMesh, lambda: Vec<T>) -> Result<Self> {
        check_len(mesh.n_edges(), lambda.len())?;
        if lambda.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite Penner coordinate".into()));
        }
        Ok(Self { mesh, lambda })
    }

    pub fn lengths(&self) -> Vec<T> {
        self.lambda.iter().map(|&l| (l * T::half()).exp()).collect()
    }
}

/// Edges `[e, a, b, c, d]` of the quad around `e`: `a`, `b` follow the
/// canonical halfedge of `e` in its face, `c`, `d` follow its twin.
pub fn quad_edges(mesh: &HalfedgeMesh, e: usize) -> [usize; 5] {
    let h = mesh.edge_halfedge(e);
    let t = mesh.twin(h);
    let (h1, t1) = (mesh.next(h), mesh.next(t));
    [
        e,
        mesh.edge(h1),
        mesh.edge(mesh.next(h1)),
        mesh.edge(t1),
        mesh.edge(mesh.next(t1)),
    ]
}

/// Log shear `ln x = (λa − λb + λc − λd) / 2`.
pub fn log_shear<T: Real>(mesh: &HalfedgeMesh, lambda: &[T], e: usize) -> T {
    let [_, a, b, c, d] = quad_edges(mesh, e);
    (lambda[a] - lambda[b] + lambda[c] - lambda[d]) * T::half()
}

/// Shear `x = ℓa ℓc / (ℓb ℓd)`.
pub fn shear<T: Real>(mesh: &HalfedgeMesh, lambda: &[T], e: usize) -> T {
    log_shear(mesh, lambda, e).exp()
}

/// Ptolemy flip of `e` in place. Returns the quad edges `[e, a, b, c, d]`
/// as they were before the flip.
pub fn ptolemy_flip<T: Real>(
    mesh: &mut HalfedgeMesh,
    lambda: &mut [T],
    e: usize,
) -> Result<[usize; 5]> {
    let q = quad_edges(mesh, e);
    mesh.flip_connectivity(e)?;
    let [_, a, b, c, d] = q;
    let s = log_sum_exp(
        (lambda[a] + lambda[c]) * T::half(),
        (lambda[b] + lambda[d]) * T::half(),
    );
    lambda[e] = T::two() * s - lambda[e];
    Ok(q)
}

/// Derivatives of the flipped coordinate with respect to `(λe, λa, λb, λc, λd)`,
/// given the log shear of the quad before the flip.
pub fn flip_differential_row<T: Real>(log_shear: T) -> [T; 5] {
    let p = logistic(log_shear);
    let q = logistic(-log_shear);
    [-T::one(), p, q, p, q]
}

/// Cosine of the angle opposite `e` in the face of `h`, by the cosine law on
/// Penner lengths; defined for any positive lengths.
fn cosine_term<T: Real>(mesh: &HalfedgeMesh, lambda: &[T], h: usize) -> T {
    let n = mesh.next(h);
    let (le, la, lb) = (
        lambda[mesh.edge(h)],
        lambda[mesh.edge(n)],
        lambda[mesh.edge(mesh.next(n))],
    );
    ((la - lb) * T::half()).cosh() - T::half() * (le - (la + lb) * T::half()).exp()
}

/// Sum of the two opposite-angle cosines across `e`; non-negative iff `e`
/// satisfies the ideal Delaunay condition.
pub fn delaunay_sum<T: Real>(mesh: &HalfedgeMesh, lambda: &[T], e: usize) -> T {
    let h = mesh.edge_halfedge(e);
    cosine_term(mesh, lambda, h) + cosine_term(mesh, lambda, mesh.twin(h))
}

pub fn is_ideal_delaunay<T: Real>(mesh: &HalfedgeMesh, lambda: &[T], e: usize) -> bool {
    let h = mesh.edge_halfedge(e);
    mesh.face(h) == mesh.face(mesh.twin(h))
        || delaunay_sum(mesh, lambda, e) >= -T::of(DELAUNAY_TOLERANCE)
}

/// Order in which failing edges are processed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FlipOrder {
    #[default]
    Fifo,
    /// Pops a uniformly random queued edge; used to probe path independence.
    Shuffled(u64),
}

#[derive(Clone, Copy, Debug, Default)]
pub struct DelaunayOptions {
    pub with_differential: bool,
    pub order: FlipOrder,
    /// Defaults to `100 · |E|`.
    pub max_flips: Option<usize>,
}

/// Result of the flip algorithm.
#[derive(Clone, Debug)]
pub struct FlipSequence<T> {
    /// Flipped edges in order.
    pub flips: Vec<usize>,
    pub mesh: HalfedgeMesh,
    pub lambda: Vec<T>,
}

impl<T: Real> FlipSequence<T> {
    /// Replays the flips from the reference coordinates.
    pub fn replay(mesh: &HalfedgeMesh, lambda: &[T], flips: &[usize]) -> Result<Self> {
        let mut m = mesh.clone();
        let mut l = lambda.to_vec();
        for &e in flips {
            ptolemy_flip(&mut m, &mut l, e)?;
        }
        Ok(Self {
            flips: flips.to_vec(),
            mesh: m,
            lambda: l,
        })
    }
}

/// Jacobian of the Delaunay coordinates with respect to the reference ones.
pub type FlipDifferential<T> = SparseRows<T>;

/// Flips edges violating the ideal Delaunay condition until none remain.
pub fn make_delaunay<T: Real>(
    mesh: &HalfedgeMesh,
    lambda: &[T],
    options: DelaunayOptions,
) -> Result<(FlipSequence<T>, Option<FlipDifferential<T>>)> {
    check_len(mesh.n_edges(), lambda.len())?;
    let n_e = mesh.n_edges();
    let limit = options.max_flips.unwrap_or(100 * n_e);
    let mut m = mesh.clone();
    let mut l = lambda.to_vec();
    let mut d = options.with_differential.then(|| SparseRows::identity(n_e));
    let mut flips = Vec::new();
    let mut queued = vec![true; n_e];
    let mut queue: VecDeque<usize> = (0..n_e).collect();
    let mut rng = match options.order {
        FlipOrder::Shuffled(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        FlipOrder::Fifo => None,
    };
    loop {
        let e = match rng.as_mut() {
            Some(r) if !queue.is_empty() => {
                let i = r.gen_range(0..queue.len());
                queue.swap_remove_back(i)
            }
            _ => queue.pop_front(),
        };
        let Some(e) = e else { break };
        queued[e] = false;
        if is_ideal_delaunay(&m, &l, e) {
            continue;
        }
        if flips.len() >= limit {
            return Err(Error::FlipLimitExceeded { limit });
        }
        let ls = log_shear(&m, &l, e);
        let q = ptolemy_flip(&mut m, &mut l, e)?;
        if let Some(d) = d.as_mut() {
            let row = flip_differential_row(ls);
            let terms: Vec<(usize, T)> = q.iter().copied().zip(row).collect();
            let new_row = d.combine_rows(&terms);
            d.set_row(e, new_row);
        }
        flips.push(e);
        for &x in &q[1..] {
            if !queued[x] {
                queued[x] = true;
                queue.push_back(x);
            }
        }
    }
    Ok((
        FlipSequence {
            flips,
            mesh: m,
            lambda: l,
        },
        d,
    ))
}

/// Every edge Delaunay and every face satisfying the triangle inequality.
pub fn check_delaunay<T: Real>(mesh: &HalfedgeMesh, lambda: &[T]) -> bool {
    (0..mesh.n_edges()).all(|e| is_ideal_delaunay(mesh, lambda, e))
        && (0..mesh.n_faces()).all(|f| {
            let [a, b, c] = mesh.face_edges(f).map(|e| (lambda[e] * T::half()).exp());
            a < b + c && b < c + a && c < a + b
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::shapes;
    use rand::Rng;

    /// Two triangles forming a quad `i j k l`, with edge `e = ij` first.
    fn quad() -> HalfedgeMesh {
        // A closed mesh is required; the tetrahedron supplies a generic quad
        // around any edge.
        shapes::regular_tetrahedron::<f64>().0
    }

    #[test]
    fn symmetric_flip() {
        let mut m = quad();
        let mut l = vec![0.0; 6];
        ptolemy_flip(&mut m, &mut l, 0).unwrap();
        assert!((l[0] - 2f64.ln() * 2.0).abs() < 1e-15);
        m.check_invariants().unwrap();
    }

    #[test]
    fn ptolemy_arithmetic() {
        let mut m = quad();
        let [e, a, b, c, d] = quad_edges(&m, 0);
        let mut l = vec![0.0; 6];
        l[a] = 2.0 * 2f64.ln();
        l[c] = 2.0 * 2f64.ln();
        let _ = (b, d);
        ptolemy_flip(&mut m, &mut l, e).unwrap();
        assert!((l[e] - 2.0 * 5f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn double_flip_restores() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let m0 = quad();
            let l0: Vec<f64> = (0..6).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let (mut m, mut l) = (m0.clone(), l0.clone());
            ptolemy_flip(&mut m, &mut l, 2).unwrap();
            ptolemy_flip(&mut m, &mut l, 2).unwrap();
            for (x, y) in l.iter().zip(&l0) {
                assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
            }
            assert_eq!(m.canonical_faces(), m0.canonical_faces());
        }
    }

    #[test]
    fn differential_row_limits() {
        assert_eq!(flip_differential_row(0.0f64), [-1.0, 0.5, 0.5, 0.5, 0.5]);
        let r = flip_differential_row(-800.0f64);
        assert_eq!(r, [-1.0, 0.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn delaunay_examples() {
        let m = quad();
        let [e, a, b, c, d] = quad_edges(&m, 0);
        let mut l = vec![0.0f64; 6];
        assert!((delaunay_sum(&m, &l, e) - 1.0).abs() < 1e-15);
        l[e] = 2.0 * 2f64.sqrt().ln();
        assert!(delaunay_sum(&m, &l, e).abs() < 1e-15);
        assert!(is_ideal_delaunay(&m, &l, e));
        l[e] = 2.0 * 1.8f64.ln();
        assert!((delaunay_sum(&m, &l, e) + 1.24).abs() < 1e-12);
        assert!(!is_ideal_delaunay(&m, &l, e));
        let _ = (a, b, c, d);
    }

    #[test]
    fn shear_is_scale_invariant() {
        let m = quad();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let l: Vec<f64> = (0..6).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let u: Vec<f64> = (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let lu: Vec<f64> = (0..6)
                .map(|e| {
                    let [i, j] = m.edge_vertices(e);
                    l[e] + u[i] + u[j]
                })
                .collect();
            for e in 0..6 {
                assert!((log_shear(&m, &l, e) - log_shear(&m, &lu, e)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn delaunay_tetrahedron_is_fixed_point() {
        let m = quad();
        let (seq, d) = make_delaunay(
            &m,
            &[0.0f64; 6],
            DelaunayOptions {
                with_differential: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(seq.flips.is_empty());
        assert_eq!(
            d.unwrap().to_dense(),
            SparseRows::<f64>::identity(6).to_dense()
        );
    }

    #[test]
    fn flip_limit_is_reported() {
        let m = quad();
        let mut l = vec![0.0f64; 6];
        l[0] = 3.0;
        assert!(matches!(
            make_delaunay(
                &m,
                &l,
                DelaunayOptions {
                    max_flips: Some(0),
                    ..Default::default()
                }
            ),
            Err(Error::FlipLimitExceeded { limit: 0 })
        ));
    }

    #[test]
    fn self_adjacent_flip_is_an_error() {
        // After one flip on the 3-vertex sphere some edge borders one face on
        // both sides.
        let mut m = shapes::two_triangle_sphere();
        let mut l = vec![0.0f64; 3];
        ptolemy_flip(&mut m, &mut l, 0).unwrap();
        let bad = (0..3)
            .find(|&e| {
                let h = m.edge_halfedge(e);
                m.face(h) == m.face(m.twin(h))
            })
            .unwrap();
        assert!(matches!(
            ptolemy_flip(&mut m, &mut l, bad),
            Err(Error::SelfAdjacentFlip { .. })
        ));
    }
}
