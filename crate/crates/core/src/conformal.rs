//! Conformal scaling `λ ↦ λ + Bu`, best-fit scale factors, and projection
//! onto prescribed cone angles.

use crate::constraints::{
    angle_jacobian_for_angles, corner_angles, summation_matrix, vertex_angle_sums,
};
use crate::error::{check_len, Error, Result};
use crate::linalg::{Cholesky, SparseRows};
use crate::mesh::HalfedgeMesh;
use crate::penner::{make_delaunay, DelaunayOptions};
use crate::scalar::{max_abs, norm2, Real};

/// `|E| × |V|` matrix with `(Bu)_e = u_i + u_j` for edge `e = ij`; a loop
/// edge gets a `2`.
pub fn scaling_matrix<T: Real>(mesh: &HalfedgeMesh) -> SparseRows<T> {
    let trip: Vec<(usize, usize, T)> = (0..mesh.n_edges())
        .flat_map(|e| {
            let [i, j] = mesh.edge_vertices(e);
            [(e, i, T::one()), (e, j, T::one())]
        })
        .collect();
    SparseRows::from_triplets(mesh.n_edges(), mesh.n_vertices(), &trip)
}

/// `λ + Bu`.
pub fn apply_scaling<T: Real>(mesh: &HalfedgeMesh, lambda: &[T], u: &[T]) -> Vec<T> {
    (0..mesh.n_edges())
        .map(|e| {
            let [i, j] = mesh.edge_vertices(e);
            lambda[e] + u[i] + u[j]
        })
        .collect()
}

/// Least-squares fit of vertex scale factors, with `BᵀB` factored once.
///
/// `BᵀB` is the signless Laplacian plus degrees; it is nonsingular whenever
/// every component contains an odd cycle, which holds on triangle meshes.
#[derive(Clone, Debug)]
pub struct ScaleFit<T> {
    b: SparseRows<T>,
    factor: Cholesky<T>,
}

impl<T: Real> ScaleFit<T> {
    pub fn new(mesh: &HalfedgeMesh) -> Result<Self> {
        let b = scaling_matrix(mesh);
        let factor = b
            .transpose()
            .gram()
            .factor()
            .map_err(|_| Error::SingularNormalEquations)?;
        Ok(Self { b, factor })
    }

    pub fn matrix(&self) -> &SparseRows<T> {
        &self.b
    }

    /// `argmin_u ‖δ − Bu‖`.
    pub fn fit(&self, delta: &[T]) -> Vec<T> {
        self.factor.solve(&self.b.tr_mul_vec(delta))
    }

    /// `(BᵀB)⁻¹ x`.
    pub fn solve_normal(&self, x: &[T]) -> Vec<T> {
        self.factor.solve(x)
    }

    /// Residual `δ − Bu` of the best fit.
    pub fn residual(&self, delta: &[T]) -> Vec<T> {
        let u = self.fit(delta);
        let bu = self.b.mul_vec(&u);
        delta.iter().zip(&bu).map(|(d, b)| *d - *b).collect()
    }
}

/// Best-fit scale factors `u` for `λ − λ0`.
pub fn best_fit_scale_factors<T: Real>(
    mesh: &HalfedgeMesh,
    lambda: &[T],
    lambda0: &[T],
) -> Result<Vec<T>> {
    check_len(mesh.n_edges(), lambda.len())?;
    check_len(mesh.n_edges(), lambda0.len())?;
    let delta: Vec<T> = lambda.iter().zip(lambda0).map(|(a, b)| *a - *b).collect();
    Ok(ScaleFit::new(mesh)?.fit(&delta))
}

#[derive(Clone, Copy, Debug)]
pub struct ProjectionOptions {
    /// Target for `max |Θ − Θ̂|` in radians.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 100,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProjectionStatus {
    Converged,
    /// The best iterate is returned with its residual.
    MaxIterationsExceeded,
}

#[derive(Clone, Debug)]
pub struct ProjectionResult<T> {
    /// `λ + Bu` in reference coordinates.
    pub lambda: Vec<T>,
    /// Scale factors, centered to mean zero.
    pub u: Vec<T>,
    pub iterations: usize,
    pub max_residual: T,
    /// Residual norm after every accepted Newton step, starting with the input.
    pub residual_history: Vec<T>,
    pub status: ProjectionStatus,
}

impl<T: Real> ProjectionResult<T> {
    pub fn converged(&self) -> bool {
        self.status == ProjectionStatus::Converged
    }
}

struct Eval<T> {
    residual: Vec<T>,
    mesh: HalfedgeMesh,
    alpha: Vec<T>,
}

fn evaluate<T: Real>(
    mesh0: &HalfedgeMesh,
    lambda: &[T],
    u: &[T],
    targets: &[T],
) -> Result<Eval<T>> {
    let lu = apply_scaling(mesh0, lambda, u);
    let (seq, _) = make_delaunay(mesh0, &lu, DelaunayOptions::default())?;
    let alpha = corner_angles(&seq.mesh, &seq.lambda)?;
    let sums = vertex_angle_sums(&seq.mesh, &alpha);
    let n = targets.len() - 1;
    let residual = (0..n).map(|v| sums[v] - targets[v]).collect();
    Ok(Eval {
        residual,
        mesh: seq.mesh,
        alpha,
    })
}

const POLISH_FACTOR: f64 = 1e-3;
const POLISH_STEPS: usize = 2;

/// Finds `u` with `Θ(λ + Bu) = Θ̂` by Newton's method with backtracking on the
/// residual norm. The last vertex is pinned during the solve.
pub fn conformal_project<T: Real>(
    mesh0: &HalfedgeMesh,
    lambda: &[T],
    targets: &[T],
    options: ProjectionOptions,
) -> Result<ProjectionResult<T>> {
    check_len(mesh0.n_edges(), lambda.len())?;
    check_len(mesh0.n_vertices(), targets.len())?;
    let nv = mesh0.n_vertices();
    let n = nv - 1;
    let tol = T::of(options.tolerance);
    let mut u = vec![T::zero(); nv];
    let mut cur = evaluate(mesh0, lambda, &u, targets)?;
    let mut rnorm = norm2(&cur.residual);
    let mut history = vec![rnorm];
    let mut iterations = 0;
    let mut status = ProjectionStatus::MaxIterationsExceeded;
    let mut polish = 0;
    loop {
        let worst = max_abs(&cur.residual);
        if worst <= tol {
            status = ProjectionStatus::Converged;
            // a couple of extra steps leave the caller a residual near
            // rounding level, so energies of projected points compare cleanly
            if worst <= tol * T::of(POLISH_FACTOR) || polish == POLISH_STEPS {
                break;
            }
            polish += 1;
        } else if iterations >= options.max_iterations {
            break;
        }
        iterations += 1;
        let lap = negative_angle_hessian(&cur.mesh, &cur.alpha, n);
        let factor = match lap.factor() {
            Ok(f) => f,
            Err(_) => {
                let mut shifted = lap.clone();
                shifted.add_diagonal(T::of(1e-12));
                shifted.factor()?
            }
        };
        let du = factor.solve(&cur.residual);
        let mut beta = T::one();
        let mut accepted = None;
        for _ in 0..60 {
            let mut trial = u.clone();
            for v in 0..n {
                trial[v] += beta * du[v];
            }
            let ev = evaluate(mesh0, lambda, &trial, targets)?;
            let tn = norm2(&ev.residual);
            if tn * tn <= (T::one() - T::of(2e-4) * beta) * rnorm * rnorm {
                accepted = Some((trial, ev, tn));
                break;
            }
            beta *= T::half();
        }
        match accepted {
            Some((trial, ev, tn)) => {
                u = trial;
                cur = ev;
                rnorm = tn;
                history.push(tn);
            }
            None => break,
        }
    }
    let mean = u.iter().copied().sum::<T>() / T::count(nv);
    for x in u.iter_mut() {
        *x -= mean;
    }
    Ok(ProjectionResult {
        lambda: apply_scaling(mesh0, lambda, &u),
        u,
        iterations,
        max_residual: max_abs(&cur.residual),
        residual_history: history,
        status,
    })
}

/// `−∂Θ/∂u` on the first `n` vertices of a Delaunay mesh: the cotangent
/// Laplacian, assembled as `−S ∇α B`.
fn negative_angle_hessian<T: Real>(
    mesh: &HalfedgeMesh,
    alpha: &[T],
    n: usize,
) -> crate::linalg::SymmetricBuilder<T> {
    let h = summation_matrix::<T>(mesh, n)
        .mul(&angle_jacobian_for_angles(mesh, alpha))
        .mul(&scaling_matrix(mesh));
    let mut out = crate::linalg::SymmetricBuilder::new(n);
    for i in 0..n {
        for &(j, v) in h.row(i) {
            if j <= i {
                out.add(i, j, -v);
            }
        }
    }
    out
}
