//! Shear coordinates, minimal-translation projective maps between hyperbolic
//! metrics on one connectivity, and pointwise evaluation of the induced map
//! between surfaces.
//!
//! Points are stored as barycentric coordinates per face, indexed by corner:
//! entry `c` belongs to the tail of the `c`-th halfedge of
//! [`HalfedgeMesh::face_halfedges`]. "Reference" coordinates live in the
//! ideal triangle of the Beltrami-Klein disk with vertices at the cube roots
//! of unity; "Euclidean" coordinates live in the triangle with lengths
//! `exp(λ/2)`. The two are related by `y_v ∝ ℓ_opp(v)² w_v`, the unique
//! vertex-fixing projective map that also preserves the circumcircle.

use crate::error::{check_len, Error, Result};
use crate::linalg::{SparseRows, SymmetricBuilder};
use crate::mesh::HalfedgeMesh;
use crate::penner::{log_shear, make_delaunay, ptolemy_flip, DelaunayOptions, FlipSequence};
use crate::scalar::{max_abs, Real};

/// Barycentric coordinates below this are reported as outside the quad.
pub const OUTSIDE_TOLERANCE: f64 = 1e-10;

/// Shear coordinate `σ_e = (λa − λb + λc − λd)/2` of every edge.
pub fn shear_coords<T: Real>(mesh: &HalfedgeMesh, lambda: &[T]) -> Vec<T> {
    (0..mesh.n_edges())
        .map(|e| log_shear(mesh, lambda, e))
        .collect()
}

/// Sum of `values` over the edges at every vertex (a loop counts twice).
pub fn vertex_edge_sums<T: Real>(mesh: &HalfedgeMesh, values: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); mesh.n_vertices()];
    for e in 0..mesh.n_edges() {
        let [i, j] = mesh.edge_vertices(e);
        out[i] += values[e];
        out[j] += values[e];
    }
    out
}

/// Signed translations per halfedge: `τ_h` moves points along the edge of
/// `h` inside the face of `h`.
#[derive(Clone, Debug, PartialEq)]
pub struct TranslationField<T> {
    pub tau: Vec<T>,
}

impl<T: Real> TranslationField<T> {
    pub fn face(&self, mesh: &HalfedgeMesh, f: usize) -> [T; 3] {
        mesh.face_halfedges(f).map(|h| self.tau[h])
    }
}

/// Minimal-norm `τ` with zero sum on every face and `τ_h + τ_twin(h) = σ′_e − σ_e`.
///
/// Writing `τ_h = Δσ_e/2 + s(h) ρ_e` with `s = ±1` for the canonical and
/// the other halfedge satisfies the edge constraints for any `ρ`; the face
/// constraints become `d ρ = g` for the face-edge incidence `d`, and the
/// minimal `ρ` is `dᵀ y` with `d dᵀ y = g` (one face pinned).
pub fn minimal_translations<T: Real>(
    mesh: &HalfedgeMesh,
    sigma: &[T],
    sigma_new: &[T],
) -> Result<TranslationField<T>> {
    check_len(mesh.n_edges(), sigma.len())?;
    check_len(mesh.n_edges(), sigma_new.len())?;
    let ds: Vec<T> = sigma_new.iter().zip(sigma).map(|(a, b)| *a - *b).collect();
    let sums = vertex_edge_sums(mesh, &ds);
    let worst = max_abs(&sums);
    if worst > T::of(1e-8) * (T::one() + max_abs(&ds)) {
        return Err(Error::InfeasibleConstraints {
            max_sum: worst.f64(),
        });
    }
    let nf = mesh.n_faces();
    let sign = |h: usize| {
        if mesh.edge_halfedge(mesh.edge(h)) == h {
            T::one()
        } else {
            -T::one()
        }
    };
    let mut trip = Vec::with_capacity(3 * nf);
    let mut g = vec![T::zero(); nf];
    for h in 0..mesh.n_halfedges() {
        let f = mesh.face(h);
        trip.push((f, mesh.edge(h), sign(h)));
        g[f] -= T::half() * ds[mesh.edge(h)];
    }
    let d = SparseRows::from_triplets(nf, mesh.n_edges(), &trip);
    let y = if nf > 1 {
        let keep: Vec<usize> = (0..nf - 1).collect();
        let lap: SymmetricBuilder<T> = d.gram().principal_submatrix(&keep);
        let yk = lap.factor()?.solve(&g[..nf - 1]);
        let mut y = yk;
        y.push(T::zero());
        y
    } else {
        vec![T::zero()]
    };
    let rho = d.tr_mul_vec(&y);
    let tau = (0..mesh.n_halfedges())
        .map(|h| {
            let e = mesh.edge(h);
            T::half() * ds[e] + sign(h) * rho[e]
        })
        .collect();
    Ok(TranslationField { tau })
}

/// Gains `c` of the projective map for face translations `(τ_ij, τ_jk, τ_ki)`,
/// normalized so that `½ ln(c_j / c_i) = τ_ij` (and cyclically) when the
/// translations sum to zero.
pub fn projective_gains<T: Real>(tau: [T; 3]) -> [T; 3] {
    let k = T::of(2.0 / 3.0);
    [
        (k * (tau[2] - tau[0])).exp(),
        (k * (tau[0] - tau[1])).exp(),
        (k * (tau[1] - tau[2])).exp(),
    ]
}

/// Applies the projective triangle map with translations `tau` to reference
/// coordinates `w`.
pub fn projective_triangle_map<T: Real>(tau: [T; 3], w: [T; 3]) -> [T; 3] {
    let c = projective_gains(tau);
    normalize([c[0] * w[0], c[1] * w[1], c[2] * w[2]])
}

fn normalize<T: Real>(w: [T; 3]) -> [T; 3] {
    let s = w[0] + w[1] + w[2];
    w.map(|x| x / s)
}

/// A point on a face, in barycentric coordinates indexed by corner.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfacePoint<T> {
    pub face: usize,
    pub coords: [T; 3],
}

impl<T: Real> SurfacePoint<T> {
    pub fn new(face: usize, coords: [T; 3]) -> Self {
        Self {
            face,
            coords: normalize(coords),
        }
    }
}

/// `λ` of the edge opposite each corner of `f`.
fn opposite_lambdas<T: Real>(mesh: &HalfedgeMesh, lambda: &[T], f: usize) -> [T; 3] {
    let hs = mesh.face_halfedges(f);
    [0, 1, 2].map(|c| lambda[mesh.edge(hs[(c + 1) % 3])])
}

/// Multiplies each coordinate by `exp(sign · λ_opp)`, normalized in a way
/// that cannot overflow.
fn rescale<T: Real>(w: [T; 3], lam: [T; 3], sign: T) -> [T; 3] {
    let s = lam.map(|x| sign * x);
    let m = s[0].max(s[1]).max(s[2]);
    normalize([0, 1, 2].map(|c| w[c] * (s[c] - m).exp()))
}

pub fn euclidean_to_reference<T: Real>(
    mesh: &HalfedgeMesh,
    lambda: &[T],
    p: SurfacePoint<T>,
) -> [T; 3] {
    rescale(p.coords, opposite_lambdas(mesh, lambda, p.face), -T::one())
}

pub fn reference_to_euclidean<T: Real>(
    mesh: &HalfedgeMesh,
    lambda: &[T],
    f: usize,
    w: [T; 3],
) -> [T; 3] {
    rescale(w, opposite_lambdas(mesh, lambda, f), T::one())
}

/// Klein-disk positions of the quad around the canonical halfedge `h = ij`
/// of an edge with log shear `sigma`: `i`, `j`, `k` at the cube roots of
/// unity and `l` on the arc between `i` and `j`.
pub fn klein_quad<T: Real>(sigma: T) -> [[T; 2]; 4] {
    let third = T::two() * T::PI() / T::of(3.0);
    let at = |a: T| [a.cos(), a.sin()];
    let s = T::of(3f64.sqrt()).atan2(T::two() * (-sigma).exp() + T::one());
    [
        at(T::zero()),
        at(third),
        at(T::two() * third),
        at(T::two() * s),
    ]
}

fn sub2<T: Real>(a: [T; 2], b: [T; 2]) -> [T; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn cross2<T: Real>(a: [T; 2], b: [T; 2]) -> T {
    a[0] * b[1] - a[1] * b[0]
}

/// Euclidean barycentric coordinates of `x` in triangle `t`.
fn barycentric<T: Real>(t: [[T; 2]; 3], x: [T; 2]) -> [T; 3] {
    let area = cross2(sub2(t[1], t[0]), sub2(t[2], t[0]));
    [
        cross2(sub2(t[1], x), sub2(t[2], x)) / area,
        cross2(sub2(t[2], x), sub2(t[0], x)) / area,
        cross2(sub2(t[0], x), sub2(t[1], x)) / area,
    ]
}

fn chord_sq<T: Real>(a: [T; 2], b: [T; 2]) -> T {
    let d = sub2(a, b);
    d[0] * d[0] + d[1] * d[1]
}

/// Reference coordinates to a point of the inscribed triangle `t`.
fn reference_to_klein<T: Real>(t: [[T; 2]; 3], w: [T; 3]) -> [T; 2] {
    let y = normalize([0, 1, 2].map(|c| w[c] * chord_sq(t[(c + 1) % 3], t[(c + 2) % 3])));
    [
        y[0] * t[0][0] + y[1] * t[1][0] + y[2] * t[2][0],
        y[0] * t[0][1] + y[1] * t[1][1] + y[2] * t[2][1],
    ]
}

fn klein_to_reference<T: Real>(t: [[T; 2]; 3], y: [T; 3]) -> [T; 3] {
    normalize([0, 1, 2].map(|c| y[c] / chord_sq(t[(c + 1) % 3], t[(c + 2) % 3])))
}

/// Rotates corner-indexed coordinates of face `f` so that corner 0 is the
/// tail of halfedge `h`.
fn rotate_to<T: Real>(mesh: &HalfedgeMesh, f: usize, h: usize, w: [T; 3]) -> [T; 3] {
    let hs = mesh.face_halfedges(f);
    let r = hs.iter().position(|&x| x == h).expect("halfedge in face");
    [w[r], w[(r + 1) % 3], w[(r + 2) % 3]]
}

/// Re-expresses a point given in reference coordinates on `mesh` (before
/// flipping `e`) in the faces that exist after the flip. Returns the new
/// coordinates and whether the point had to be clamped into the quad.
pub fn transfer_through_flip<T: Real>(
    mesh: &HalfedgeMesh,
    lambda: &[T],
    e: usize,
    p: SurfacePoint<T>,
) -> (SurfacePoint<T>, bool) {
    let h = mesh.edge_halfedge(e);
    let t = mesh.twin(h);
    let (f1, f2) = (mesh.face(h), mesh.face(t));
    if p.face != f1 && p.face != f2 {
        return (p, false);
    }
    let [pi, pj, pk, pl] = klein_quad(log_shear(mesh, lambda, e));
    let x = if p.face == f1 {
        reference_to_klein([pi, pj, pk], rotate_to(mesh, f1, h, p.coords))
    } else {
        reference_to_klein([pj, pi, pl], rotate_to(mesh, f2, t, p.coords))
    };
    // after the flip: f1 = (l, k, i) from h, f2 = (k, l, j) from t
    let t1 = [pl, pk, pi];
    let t2 = [pk, pl, pj];
    let (b1, b2) = (barycentric(t1, x), barycentric(t2, x));
    let min = |b: &[T; 3]| b[0].min(b[1]).min(b[2]);
    let (face, tri, b) = if min(&b1) >= min(&b2) {
        (f1, t1, b1)
    } else {
        (f2, t2, b2)
    };
    let outside = min(&b) < -T::of(OUTSIDE_TOLERANCE);
    let b = normalize(b.map(|v| v.max(T::zero())));
    (
        SurfacePoint {
            face,
            coords: klein_to_reference(tri, b),
        },
        outside,
    )
}

/// Result of mapping one point.
#[derive(Clone, Copy, Debug)]
pub struct MappedPoint<T> {
    /// Euclidean coordinates on the Delaunay connectivity of the target.
    pub point: SurfacePoint<T>,
    /// Some flip transfer clamped the point back into its quad.
    pub clamped: bool,
}

/// The map from `(M0, λ_src)` to `(Del(M0, λ_dst), λ̃_dst)`, with the
/// translation field and flip sequence computed once.
#[derive(Clone, Debug)]
pub struct SurfaceMap<T> {
    mesh0: HalfedgeMesh,
    lambda_src: Vec<T>,
    lambda_dst: Vec<T>,
    tau: TranslationField<T>,
    flips: FlipSequence<T>,
}

impl<T: Real> SurfaceMap<T> {
    pub fn new(mesh0: &HalfedgeMesh, lambda_src: &[T], lambda_dst: &[T]) -> Result<Self> {
        let (flips, _) = make_delaunay(mesh0, lambda_dst, DelaunayOptions::default())?;
        Self::with_flips(mesh0, lambda_src, lambda_dst, flips)
    }

    pub fn with_flips(
        mesh0: &HalfedgeMesh,
        lambda_src: &[T],
        lambda_dst: &[T],
        flips: FlipSequence<T>,
    ) -> Result<Self> {
        check_len(mesh0.n_edges(), lambda_src.len())?;
        check_len(mesh0.n_edges(), lambda_dst.len())?;
        let tau = minimal_translations(
            mesh0,
            &shear_coords(mesh0, lambda_src),
            &shear_coords(mesh0, lambda_dst),
        )?;
        Ok(Self {
            mesh0: mesh0.clone(),
            lambda_src: lambda_src.to_vec(),
            lambda_dst: lambda_dst.to_vec(),
            tau,
            flips,
        })
    }

    pub fn translations(&self) -> &TranslationField<T> {
        &self.tau
    }

    /// Target connectivity.
    pub fn flips(&self) -> &FlipSequence<T> {
        &self.flips
    }

    pub fn target_mesh(&self) -> &HalfedgeMesh {
        &self.flips.mesh
    }

    pub fn target_lambda(&self) -> &[T] {
        &self.flips.lambda
    }

    /// Maps a point given in Euclidean coordinates of `(M0, λ_src)`.
    pub fn evaluate(&self, x: SurfacePoint<T>) -> Result<MappedPoint<T>> {
        if x.face >= self.mesh0.n_faces() {
            return Err(Error::IndexOutOfRange {
                index: x.face,
                count: self.mesh0.n_faces(),
            });
        }
        let w = euclidean_to_reference(&self.mesh0, &self.lambda_src, x);
        let w = projective_triangle_map(self.tau.face(&self.mesh0, x.face), w);
        let mut p = SurfacePoint {
            face: x.face,
            coords: w,
        };
        let mut clamped = false;
        let mut mesh = self.mesh0.clone();
        let mut lambda = self.lambda_dst.clone();
        for &e in &self.flips.flips {
            let (q, out) = transfer_through_flip(&mesh, &lambda, e, p);
            p = q;
            clamped |= out;
            ptolemy_flip(&mut mesh, &mut lambda, e)?;
        }
        let coords = reference_to_euclidean(&mesh, &lambda, p.face, p.coords);
        Ok(MappedPoint {
            point: SurfacePoint {
                face: p.face,
                coords,
            },
            clamped,
        })
    }
}

/// One-shot evaluation for a precomputed flip sequence of `λ_dst`.
pub fn evaluate_surface_map<T: Real>(
    mesh0: &HalfedgeMesh,
    x: SurfacePoint<T>,
    lambda_src: &[T],
    lambda_dst: &[T],
    flips: &FlipSequence<T>,
) -> Result<MappedPoint<T>> {
    SurfaceMap::with_flips(mesh0, lambda_src, lambda_dst, flips.clone())?.evaluate(x)
}
