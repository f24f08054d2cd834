//! Distortion energies on Penner coordinates and per-triangle invariants.

use crate::conformal::ScaleFit;
use crate::error::{check_len, Error, Result};
use crate::mesh::HalfedgeMesh;
use crate::scalar::Real;

/// Scale between the quadratic form and the second-order term of symmetric
/// Dirichlet: `E_SD(λ0 + tδ) ≈ E_SD(λ0) + c t² δᵀAδ`, measured numerically.
pub const SDQ_SECOND_ORDER_SCALE: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnergyKind {
    /// `Σ (λ − λ0)²`.
    LogLength2,
    /// `Σ (λ − λ0)^p` for even `p ≥ 2`.
    LogLengthP(u32),
    /// `‖u‖²` for the best-fit scale factors of `λ − λ0`.
    LogScale,
    /// Quadratic approximation of symmetric Dirichlet around `λ0`.
    QuadraticSymmetricDirichlet,
}

impl EnergyKind {
    pub fn name(&self) -> String {
        match self {
            EnergyKind::LogLength2 => "log_length".into(),
            EnergyKind::LogLengthP(p) => format!("log_length_p{p}"),
            EnergyKind::LogScale => "log_scale".into(),
            EnergyKind::QuadraticSymmetricDirichlet => "sdq".into(),
        }
    }
}

/// An energy bound to a reference metric, with cached per-mesh data.
#[derive(Clone, Debug)]
pub struct Energy<T> {
    kind: EnergyKind,
    lambda0: Vec<T>,
    fit: Option<ScaleFit<T>>,
    faces: Vec<[usize; 3]>,
    sdq: Vec<[[T; 3]; 3]>,
}

impl<T: Real> Energy<T> {
    pub fn new(kind: EnergyKind, mesh: &HalfedgeMesh, lambda0: &[T]) -> Result<Self> {
        check_len(mesh.n_edges(), lambda0.len())?;
        if let EnergyKind::LogLengthP(p) = kind {
            if p < 2 || p % 2 != 0 {
                return Err(Error::InvalidInput(format!(
                    "p = {p} must be even and at least 2"
                )));
            }
        }
        let fit = match kind {
            EnergyKind::LogScale => Some(ScaleFit::new(mesh)?),
            _ => None,
        };
        let (faces, sdq) = if kind == EnergyKind::QuadraticSymmetricDirichlet {
            let faces: Vec<[usize; 3]> = (0..mesh.n_faces()).map(|f| mesh.face_edges(f)).collect();
            let sdq = faces
                .iter()
                .map(|fe| local_sdq_matrix(fe.map(|e| (lambda0[e] * T::half()).exp())))
                .collect::<Result<_>>()?;
            (faces, sdq)
        } else {
            (Vec::new(), Vec::new())
        };
        Ok(Self {
            kind,
            lambda0: lambda0.to_vec(),
            fit,
            faces,
            sdq,
        })
    }

    pub fn kind(&self) -> EnergyKind {
        self.kind
    }

    pub fn reference(&self) -> &[T] {
        &self.lambda0
    }

    pub fn value(&self, lambda: &[T]) -> T {
        self.evaluate(lambda, false).0
    }

    pub fn value_and_gradient(&self, lambda: &[T]) -> (T, Vec<T>) {
        let (v, g) = self.evaluate(lambda, true);
        (v, g.expect("requested"))
    }

    fn evaluate(&self, lambda: &[T], with_grad: bool) -> (T, Option<Vec<T>>) {
        let d: Vec<T> = lambda
            .iter()
            .zip(&self.lambda0)
            .map(|(a, b)| *a - *b)
            .collect();
        match self.kind {
            EnergyKind::LogLength2 => {
                let v = d.iter().map(|x| *x * *x).sum();
                (
                    v,
                    with_grad.then(|| d.iter().map(|x| T::two() * *x).collect()),
                )
            }
            EnergyKind::LogLengthP(p) => {
                let v = d.iter().map(|x| x.powi(p as i32)).sum();
                let pt = T::count(p as usize);
                (
                    v,
                    with_grad.then(|| d.iter().map(|x| pt * x.powi(p as i32 - 1)).collect()),
                )
            }
            EnergyKind::LogScale => {
                let fit = self.fit.as_ref().expect("prepared");
                let u = fit.fit(&d);
                let v = u.iter().map(|x| *x * *x).sum();
                let g = with_grad.then(|| {
                    let w = fit.solve_normal(&u);
                    fit.matrix()
                        .mul_vec(&w)
                        .into_iter()
                        .map(|x| T::two() * x)
                        .collect()
                });
                (v, g)
            }
            EnergyKind::QuadraticSymmetricDirichlet => {
                let mut v = T::zero();
                let mut g = with_grad.then(|| vec![T::zero(); d.len()]);
                for (fe, a) in self.faces.iter().zip(&self.sdq) {
                    let df = fe.map(|e| d[e]);
                    let ad = [0, 1, 2].map(|i| (0..3).map(|j| a[i][j] * df[j]).sum::<T>());
                    v += (0..3).map(|i| df[i] * ad[i]).sum::<T>();
                    if let Some(g) = g.as_mut() {
                        for i in 0..3 {
                            g[fe[i]] += T::two() * ad[i];
                        }
                    }
                }
                (v, g)
            }
        }
    }
}

/// Cosines of the angles opposite each length, and the Heron area squared.
fn cosines_and_area2<T: Real>(l: [T; 3]) -> ([T; 3], T) {
    let q = l.map(|x| x * x);
    let cos = [0, 1, 2].map(|i| {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        (q[j] + q[k] - q[i]) / (T::two() * l[j] * l[k])
    });
    let s = (l[0] + l[1] + l[2]) * T::half();
    (cos, s * (s - l[0]) * (s - l[1]) * (s - l[2]))
}

/// Per-face matrix of the quadratic symmetric Dirichlet energy for reference
/// lengths `l`; angle `i` is opposite `l[i]`.
pub fn local_sdq_matrix<T: Real>(l: [T; 3]) -> Result<[[T; 3]; 3]> {
    let lmax = l[0].max(l[1]).max(l[2]);
    let (cos, a2) = cosines_and_area2(l);
    if !(l.iter().all(|&x| x > T::zero()))
        || !(a2 > T::of(crate::mesh::DEGENERATE_AREA).powi(2) * lmax.powi(4))
    {
        return Err(Error::DegenerateReference {
            lengths: l.map(|x| x.f64()),
        });
    }
    let q = l.map(|x| x * x);
    let f1 = q[0] * q[1] * q[2] / (T::of(4.0) * a2 * a2);
    let f2 = T::one() / (T::two() * a2);
    let mut m = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let first = if i == j {
                q[i] * cos[i] * cos[i]
            } else {
                let k = 3 - i - j;
                -l[i] * l[j] * cos[k]
            };
            m[i][j] = f1 * first + f2 * q[i] * q[j];
        }
    }
    Ok(m)
}

/// Per-triangle invariants of the linear map from a reference triangle to a
/// deformed one: `J1 = σ1² + σ2²`, `J2 = σ1² σ2²`.
#[derive(Clone, Copy, Debug)]
pub struct TriangleInvariants<T> {
    pub j1: T,
    pub j2: T,
    /// The deformed lengths violate the triangle inequality; `j2` was clamped
    /// to zero.
    pub degenerate: bool,
}

impl<T: Real> TriangleInvariants<T> {
    /// `J1 (1 + 1/J2)`, when the deformed triangle has positive area.
    pub fn symmetric_dirichlet(&self) -> Option<T> {
        (self.j2 > T::zero()).then(|| self.j1 * (T::one() + T::one() / self.j2))
    }
}

pub fn triangle_invariants<T: Real>(l0: [T; 3], l: [T; 3]) -> Result<TriangleInvariants<T>> {
    let (cos0, a0sq) = cosines_and_area2(l0);
    if !(a0sq > T::zero()) {
        return Err(Error::DegenerateReference {
            lengths: l0.map(|x| x.f64()),
        });
    }
    let a0 = a0sq.sqrt();
    let j1 = (0..3)
        .map(|i| {
            let sin = (T::one() - cos0[i] * cos0[i]).max(T::zero()).sqrt();
            cos0[i] / sin / (T::two() * a0) * l[i] * l[i]
        })
        .sum();
    let (_, asq) = cosines_and_area2(l);
    let degenerate = !(asq > T::zero());
    let j2 = if degenerate { T::zero() } else { asq / a0sq };
    Ok(TriangleInvariants { j1, j2, degenerate })
}

/// Total symmetric Dirichlet energy, or `None` if some deformed face is
/// degenerate.
pub fn symmetric_dirichlet<T: Real>(
    mesh: &HalfedgeMesh,
    lambda0: &[T],
    lambda: &[T],
) -> Result<Option<T>> {
    let mut total = T::zero();
    for f in 0..mesh.n_faces() {
        let fe = mesh.face_edges(f);
        let inv = triangle_invariants(
            fe.map(|e| (lambda0[e] * T::half()).exp()),
            fe.map(|e| (lambda[e] * T::half()).exp()),
        )?;
        match inv.symmetric_dirichlet() {
            Some(v) => total += v,
            None => return Ok(None),
        }
    }
    Ok(Some(total))
}
