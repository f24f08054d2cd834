//! Projected gradient descent on the angle-constraint manifold.

use serde::{Deserialize, Serialize};

use crate::conformal::{conformal_project, ProjectionOptions, ProjectionResult};
use crate::constraints::{corner_angles, vertex_angle_sums, ConstraintSystem};
use crate::energy::Energy;
use crate::error::{check_len, Error, Result};
use crate::linalg::SparseRows;
use crate::mesh::{validate_prescription, HalfedgeMesh};
use crate::penner::{make_delaunay, DelaunayOptions};
use crate::scalar::{dot, max_abs, norm2, Real};

/// Tikhonov shift added to `∇F ∇Fᵀ` when it is numerically singular.
pub const LAGRANGE_REGULARIZATION: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Constraint tolerance `max |Θ − Θ̂|`.
    pub constraint_tolerance: f64,
    /// Tolerance on the projected gradient norm.
    pub gradient_tolerance: f64,
    pub max_iterations: usize,
    pub line_search: LineSearch,
    /// Number of continuation stages; `1` disables continuation.
    pub continuation_steps: usize,
    pub projection_max_iterations: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            constraint_tolerance: 1e-10,
            gradient_tolerance: 1e-6,
            max_iterations: 200,
            line_search: LineSearch::default(),
            continuation_steps: 1,
            projection_max_iterations: 100,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let ls = &self.line_search;
        let positive = [
            self.constraint_tolerance,
            self.gradient_tolerance,
            ls.armijo,
            ls.backtrack,
            ls.constraint_cap,
        ];
        if positive.iter().any(|x| !(*x > 0.0)) || ls.backtrack >= 1.0 {
            return Err(Error::InvalidInput(
                "optimizer tolerances must be positive".into(),
            ));
        }
        if self.continuation_steps == 0 {
            return Err(Error::InvalidInput(
                "continuation_steps must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn projection(&self) -> ProjectionOptions {
        ProjectionOptions {
            tolerance: self.constraint_tolerance,
            max_iterations: self.projection_max_iterations,
        }
    }
}

/// Backtracking parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineSearch {
    pub armijo: f64,
    pub backtrack: f64,
    pub max_halvings: usize,
    /// Allowed growth of `max |F|` at the unprojected trial point, radians.
    pub constraint_cap: f64,
}

impl Default for LineSearch {
    fn default() -> Self {
        Self {
            armijo: 1e-4,
            backtrack: 0.5,
            max_halvings: 40,
            constraint_cap: 0.1,
        }
    }
}

/// One logged iterate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub energy: f64,
    pub max_residual: f64,
    /// Step accepted to reach this iterate; `0` for the start.
    pub step: f64,
    pub flips: usize,
    pub projected_gradient: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OptimizeStatus {
    Converged,
    MaxIterations,
    LineSearchFailed,
    ProjectionFailed,
}

#[derive(Clone, Debug)]
pub struct OptimizeResult<T> {
    pub lambda: Vec<T>,
    pub records: Vec<IterationRecord>,
    pub status: OptimizeStatus,
    /// Energy at the conformal projection the descent started from.
    pub initial_energy: T,
}

impl<T: Real> OptimizeResult<T> {
    pub fn energy(&self) -> f64 {
        self.records
            .last()
            .map_or(self.initial_energy.f64(), |r| r.energy)
    }

    pub fn max_residual(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.max_residual)
    }
}

#[derive(Clone, Debug)]
pub struct LagrangeStep<T> {
    pub direction: Vec<T>,
    pub mu: Vec<T>,
    /// The normal matrix needed the Tikhonov shift.
    pub regularized: bool,
    /// `‖(I − ∇Fᵀ(∇F∇Fᵀ)⁻¹∇F) ∇E‖`.
    pub projected_gradient: T,
}

/// Solves `∇F∇Fᵀ μ = F − ∇F∇E` and returns `d = −(∇E + ∇Fᵀμ)`, which
/// satisfies `∇F d = −F`.
pub fn lagrange_step_direction<T: Real>(
    grad_e: &[T],
    f: &[T],
    jf: &SparseRows<T>,
) -> Result<LagrangeStep<T>> {
    check_len(jf.ncols(), grad_e.len())?;
    check_len(jf.nrows(), f.len())?;
    let normal = jf.gram();
    let (factor, regularized) = match normal.factor() {
        Ok(c) if c.min_pivot() > T::of(1e-14) => (c, false),
        _ => {
            let mut shifted = normal.clone();
            shifted.add_diagonal(T::of(LAGRANGE_REGULARIZATION));
            (
                shifted
                    .factor()
                    .map_err(|_| Error::SingularNormalEquations)?,
                true,
            )
        }
    };
    let jg = jf.mul_vec(grad_e);
    let nu = factor.solve(&jg);
    let jt_nu = jf.tr_mul_vec(&nu);
    let pg: Vec<T> = grad_e.iter().zip(&jt_nu).map(|(g, x)| *g - *x).collect();
    let rhs: Vec<T> = f.iter().zip(&jg).map(|(a, b)| *a - *b).collect();
    let mu = factor.solve(&rhs);
    let jt_mu = jf.tr_mul_vec(&mu);
    let direction = grad_e.iter().zip(&jt_mu).map(|(g, x)| -(*g + *x)).collect();
    Ok(LagrangeStep {
        direction,
        mu,
        regularized,
        projected_gradient: norm2(&pg),
    })
}

/// Accepted line-search step.
#[derive(Clone, Debug)]
pub struct Accepted<T, S> {
    pub beta: T,
    pub energy: T,
    pub state: S,
}

impl LineSearch {
    /// Backtracks from `beta0`. A trial passes when `residual_at(β)` stays
    /// within `residual0 + cap` and `project_at(β)` yields an energy with
    /// Armijo decrease `E ≤ E0 + c β slope`. `project_at` returning `None`
    /// rejects the trial. `None` means no step was found.
    pub fn search<T: Real, S>(
        &self,
        beta0: T,
        energy0: T,
        slope: T,
        residual0: T,
        mut residual_at: impl FnMut(T) -> Result<T>,
        mut project_at: impl FnMut(T) -> Result<Option<(T, S)>>,
    ) -> Result<Option<Accepted<T, S>>> {
        let slope = slope.min(T::zero());
        let cap = residual0 + T::of(self.constraint_cap);
        let mut beta = beta0;
        for _ in 0..=self.max_halvings {
            let fits = match residual_at(beta) {
                Ok(r) => r <= cap,
                Err(Error::FlipLimitExceeded { .. })
                | Err(Error::TriangleInequalityViolated { .. }) => false,
                Err(e) => return Err(e),
            };
            if fits {
                if let Some((energy, state)) = project_at(beta)? {
                    if energy <= energy0 + T::of(self.armijo) * beta * slope {
                        return Ok(Some(Accepted {
                            beta,
                            energy,
                            state,
                        }));
                    }
                }
            }
            beta *= T::of(self.backtrack);
        }
        Ok(None)
    }
}

/// Minimizes `energy` over metrics with angle sums `targets`, starting from
/// the conformal projection of `lambda_start`.
pub fn penner_optimize<T: Real>(
    mesh0: &HalfedgeMesh,
    lambda_start: &[T],
    targets: &[T],
    energy: &Energy<T>,
    config: &OptimizerConfig,
) -> Result<OptimizeResult<T>> {
    config.validate()?;
    check_len(mesh0.n_edges(), lambda_start.len())?;
    validate_prescription(mesh0, targets)?;
    let system = ConstraintSystem::new(targets.to_vec());
    let start = conformal_project(mesh0, lambda_start, targets, config.projection())?;
    let start_ok = start.status_ok();
    let mut lambda = start.lambda;
    let initial_energy = energy.value(&lambda);
    if !start_ok {
        return Ok(OptimizeResult {
            lambda,
            records: Vec::new(),
            status: OptimizeStatus::ProjectionFailed,
            initial_energy,
        });
    }
    let mut records = Vec::new();
    let mut step = T::zero();
    let mut beta_prev = T::one();
    let mut previous: Option<(Vec<T>, Vec<T>)> = None;
    let mut status = OptimizeStatus::MaxIterations;
    for k in 0..config.max_iterations {
        let eval = system.evaluate(mesh0, &lambda, true)?;
        let jf = eval.jacobian.as_ref().expect("requested");
        let (e, grad) = energy.value_and_gradient(&lambda);
        let ls = lagrange_step_direction(&grad, &eval.residual, jf)?;
        let fmax = eval.max_residual();
        records.push(IterationRecord {
            iteration: k,
            energy: e.f64(),
            max_residual: fmax.f64(),
            step: step.f64(),
            flips: eval.flips,
            projected_gradient: ls.projected_gradient.f64(),
        });
        if ls.projected_gradient <= T::of(config.gradient_tolerance) {
            status = OptimizeStatus::Converged;
            break;
        }
        if k + 1 == config.max_iterations {
            break;
        }
        let d = &ls.direction;
        let beta0 = match &previous {
            Some((lp, dp)) => barzilai_borwein(&lambda, lp, d, dp),
            None => None,
        }
        .unwrap_or((beta_prev * T::two()).min(T::one()));
        let trial = |beta: T| -> Vec<T> {
            lambda
                .iter()
                .zip(d)
                .map(|(l, di)| *l + beta * *di)
                .collect()
        };
        let found = config.line_search.search(
            beta0,
            e,
            dot(&grad, d),
            fmax,
            |beta| Ok(system.evaluate(mesh0, &trial(beta), false)?.max_residual()),
            |beta| {
                let p = conformal_project(mesh0, &trial(beta), targets, config.projection())?;
                Ok(p.status_ok().then(|| (energy.value(&p.lambda), p.lambda)))
            },
        )?;
        match found {
            Some(acc) => {
                previous = Some((std::mem::replace(&mut lambda, acc.state), d.clone()));
                step = acc.beta;
                beta_prev = acc.beta;
            }
            None => {
                status = OptimizeStatus::LineSearchFailed;
                break;
            }
        }
    }
    Ok(OptimizeResult {
        lambda,
        records,
        status,
        initial_energy,
    })
}

/// Step `sᵀs / sᵀy` from the last move `s` and the change `y` of the
/// negated direction; `None` without positive curvature.
fn barzilai_borwein<T: Real>(lambda: &[T], lambda_prev: &[T], d: &[T], d_prev: &[T]) -> Option<T> {
    let s: Vec<T> = lambda
        .iter()
        .zip(lambda_prev)
        .map(|(a, b)| *a - *b)
        .collect();
    let y: Vec<T> = d_prev.iter().zip(d).map(|(a, b)| *a - *b).collect();
    let sy = dot(&s, &y);
    let beta = dot(&s, &s) / sy;
    (sy > T::zero() && beta.is_finite()).then(|| beta.min(T::of(1e6)).max(T::of(1e-8)))
}

impl<T: Real> ProjectionResult<T> {
    fn status_ok(&self) -> bool {
        self.converged()
    }
}

/// Angle sums of the metric `lambda`, at every vertex.
pub fn cone_angles<T: Real>(mesh0: &HalfedgeMesh, lambda: &[T]) -> Result<Vec<T>> {
    let (seq, _) = make_delaunay(mesh0, lambda, DelaunayOptions::default())?;
    let alpha = corner_angles(&seq.mesh, &seq.lambda)?;
    Ok(vertex_angle_sums(&seq.mesh, &alpha))
}

#[derive(Clone, Debug)]
pub struct StageReport {
    pub stage: usize,
    /// `max |F|` of the warm start against this stage's targets.
    pub initial_residual: f64,
    pub status: OptimizeStatus,
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub struct ContinuationResult<T> {
    pub result: OptimizeResult<T>,
    pub stages: Vec<StageReport>,
    /// First stage that did not converge, if any.
    pub failed_stage: Option<usize>,
}

/// Moves the targets linearly from the angles of `lambda0` to `targets` in
/// `config.continuation_steps` stages, warm-starting each stage.
pub fn continuation_optimize<T: Real>(
    mesh0: &HalfedgeMesh,
    lambda0: &[T],
    targets: &[T],
    energy: &Energy<T>,
    config: &OptimizerConfig,
) -> Result<ContinuationResult<T>> {
    config.validate()?;
    let n = config.continuation_steps;
    let theta0 = cone_angles(mesh0, lambda0)?;
    let mut lambda = lambda0.to_vec();
    let mut stages = Vec::with_capacity(n);
    let mut last = None;
    let mut failed_stage = None;
    for t in 1..=n {
        let s = T::count(t) / T::count(n);
        let stage_targets: Vec<T> = if t == n {
            targets.to_vec()
        } else {
            theta0
                .iter()
                .zip(targets)
                .map(|(a, b)| (T::one() - s) * *a + s * *b)
                .collect()
        };
        validate_prescription(mesh0, &stage_targets)?;
        let sys = ConstraintSystem::new(stage_targets.clone());
        let initial_residual = sys.evaluate(mesh0, &lambda, false)?.max_residual().f64();
        let r = penner_optimize(mesh0, &lambda, &stage_targets, energy, config)?;
        stages.push(StageReport {
            stage: t,
            initial_residual,
            status: r.status,
            iterations: r.records.len(),
        });
        lambda = r.lambda.clone();
        let ok = r.status == OptimizeStatus::Converged;
        last = Some(r);
        if !ok {
            failed_stage = Some(t);
            break;
        }
    }
    Ok(ContinuationResult {
        result: last.expect("at least one stage"),
        stages,
        failed_stage,
    })
}

/// Conformal projection of `Σ wᵢ λᵢ`.
pub fn interpolate_metrics<T: Real>(
    mesh0: &HalfedgeMesh,
    weights: &[T],
    metrics: &[Vec<T>],
    targets: &[T],
    options: ProjectionOptions,
) -> Result<ProjectionResult<T>> {
    check_len(metrics.len(), weights.len())?;
    if metrics.is_empty() {
        return Err(Error::InvalidInput("no metrics to interpolate".into()));
    }
    let total: T = weights.iter().copied().sum();
    if (total - T::one()).abs() > T::of(1e-12) {
        return Err(Error::InvalidInput(format!(
            "interpolation weights sum to {total}, not 1"
        )));
    }
    let mut mix = vec![T::zero(); mesh0.n_edges()];
    for (w, m) in weights.iter().zip(metrics) {
        check_len(mesh0.n_edges(), m.len())?;
        for (x, y) in mix.iter_mut().zip(m) {
            *x += *w * *y;
        }
    }
    validate_prescription(mesh0, targets)?;
    conformal_project(mesh0, &mix, targets, options)
}

/// `max |F|` of `lambda` against `targets`.
pub fn max_constraint_residual<T: Real>(
    mesh0: &HalfedgeMesh,
    lambda: &[T],
    targets: &[T],
) -> Result<T> {
    let th = cone_angles(mesh0, lambda)?;
    let d: Vec<T> = th.iter().zip(targets).map(|(a, b)| *a - *b).collect();
    Ok(max_abs(&d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::EnergyKind;
    use crate::mesh::shapes;
    use std::f64::consts::PI;

    #[test]
    fn trivial_directions() {
        let j = SparseRows::from_triplets(2, 3, &[(0, 0, 1.0), (0, 1, 1.0), (1, 2, 2.0)]);
        let s = lagrange_step_direction(&[0.0; 3], &[0.0; 2], &j).unwrap();
        assert!(max_abs(&s.direction) == 0.0);
        // gradient in the row space of the Jacobian
        let g = j.tr_mul_vec(&[0.7, -0.3]);
        let s = lagrange_step_direction(&g, &[0.0; 2], &j).unwrap();
        assert!(max_abs(&s.direction) < 1e-14);
        assert!(s.projected_gradient < 1e-14);
    }

    #[test]
    fn direction_linearizes_constraints() {
        let j = SparseRows::from_triplets(
            2,
            4,
            &[
                (0, 0, 1.0),
                (0, 1, -2.0),
                (0, 3, 0.5),
                (1, 1, 1.0),
                (1, 2, 3.0),
            ],
        );
        let (g, f): ([f64; 4], [f64; 2]) = ([0.3, -1.0, 0.2, 0.8], [0.05, -0.02]);
        let s = lagrange_step_direction(&g, &f, &j).unwrap();
        let jd = j.mul_vec(&s.direction);
        for i in 0..2 {
            assert!((jd[i] + f[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn line_search_contract() {
        let ls = LineSearch::default();
        // quadratic with exact decrease accepts the full step
        let e = |b: f64| (1.0 - b) * (1.0 - b);
        let big = |b: f64| e(1e6 * b);
        let acc = ls
            .search(
                1.0,
                e(0.0),
                -2.0,
                0.0,
                |_| Ok(0.0),
                |b| Ok(Some((e(b), ()))),
            )
            .unwrap()
            .unwrap();
        assert_eq!(acc.beta, 1.0);
        // a huge direction backtracks
        let acc = ls
            .search(
                1.0,
                e(0.0),
                -2e6,
                0.0,
                |_| Ok(0.0),
                |b| Ok(Some((big(b), ()))),
            )
            .unwrap()
            .unwrap();
        assert!(acc.beta < 1e-5);
        // every trial breaks the constraint cap
        let tight = LineSearch {
            constraint_cap: 1e-12,
            ..ls
        };
        let r = tight
            .search(
                1.0f64,
                1.0,
                -1.0,
                0.0,
                |b: f64| Ok(b.sqrt()),
                |_| Ok(Some((0.0, ()))),
            )
            .unwrap();
        assert!(r.is_none());
    }

    #[test]
    fn tetrahedron_improves_on_conformal() {
        let (m, _) = shapes::regular_tetrahedron::<f64>();
        let th = [PI / 2.0, PI / 2.0, 1.5 * PI, 1.5 * PI];
        let l0 = [0.0; 6];
        let en = Energy::new(EnergyKind::LogLength2, &m, &l0).unwrap();
        let r = penner_optimize(&m, &l0, &th, &en, &OptimizerConfig::default()).unwrap();
        assert_eq!(r.status, OptimizeStatus::Converged);
        assert!(r.energy() < r.initial_energy);
        for rec in &r.records {
            assert!(rec.max_residual <= 1e-10);
        }
        for w in r.records.windows(2) {
            assert!(w[1].energy <= w[0].energy + 1e-9);
        }
    }

    #[test]
    fn feasible_minimizer_is_stationary() {
        let (m, _) = shapes::regular_tetrahedron::<f64>();
        let en = Energy::new(EnergyKind::LogLength2, &m, &[0.0; 6]).unwrap();
        let r = penner_optimize(&m, &[0.0; 6], &[PI; 4], &en, &OptimizerConfig::default()).unwrap();
        assert_eq!(r.status, OptimizeStatus::Converged);
        assert_eq!(r.records.len(), 1);
        assert!(max_abs(&r.lambda) < 1e-12);
    }

    #[test]
    fn one_stage_continuation_matches_direct() {
        let (m, _) = shapes::regular_tetrahedron::<f64>();
        let th = [PI / 2.0, 1.5 * PI, PI / 2.0, 1.5 * PI];
        let l0 = [0.1, 0.0, -0.1, 0.2, 0.0, 0.0];
        let en = Energy::new(EnergyKind::LogLength2, &m, &l0).unwrap();
        let cfg = OptimizerConfig::default();
        let a = penner_optimize(&m, &l0, &th, &en, &cfg).unwrap();
        let b = continuation_optimize(&m, &l0, &th, &en, &cfg).unwrap();
        assert_eq!(a.lambda, b.result.lambda);
        assert_eq!(a.records, b.result.records);
    }

    #[test]
    fn interpolation_weights_must_sum_to_one() {
        let (m, _) = shapes::regular_tetrahedron::<f64>();
        let r = interpolate_metrics(
            &m,
            &[0.5, 0.6],
            &[vec![0.0; 6], vec![0.0; 6]],
            &[PI; 4],
            Default::default(),
        );
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }
}
