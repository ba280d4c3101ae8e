//! ADMM with increasing penalty and Moreau smoothing for
//! `min f(X) - g(X) + h(A(X))` over the Stiefel manifold.
//!
//! Each iteration performs
//!
//! 1. `beta^t = beta0 (1 + xi t^p)`, `mu^t = tau / beta^t`;
//! 2. an `X` step on the augmented Lagrangian (projected linearized step
//!    with extrapolation, or retraction with backtracking);
//! 3. the exact `y` minimization of `h_mu(y) + (beta/2)|y - b|^2`;
//! 4. the over-relaxed dual step `z += sigma beta (A(X) - y)`.

mod config;

pub use config::{SolverConfig, StepRule, Variant};

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::diagnostics::{crit_terms, keep_row, lyapunov_terms_at, IterationTrace, LyapunovConstants, LyapunovInput};
use crate::error::{Error, Result};
use crate::problem::CompositeProblem;
use crate::prox::{moreau_value, y_subproblem};
use crate::scalar::Real;
use crate::stiefel::{
    descent_direction, gaussian_matrix, inner, polar_retraction, project_to_stiefel, tangent_project, StiefelPoint,
};

/// Hard cap on backtracking steps of the retraction variant.
pub const MAX_BACKTRACKS: usize = 200;

/// Iterates of the solver after `t` completed updates.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState<T: Real> {
    pub x: StiefelPoint<T>,
    pub x_prev: StiefelPoint<T>,
    pub y: DVector<T>,
    pub z: DVector<T>,
    /// `prox(b; mu + 1/beta)` from the latest `y` step (equals `y` initially).
    pub y_breve: DVector<T>,
    /// `beta (b - y)`, an element of `dh(y_breve)`.
    pub dual_element: Option<DVector<T>>,
    pub t: usize,
    /// Penalty used by the latest update (`beta0` before the first one).
    pub beta: T,
    pub tau: T,
}

impl<T: Real> SolverState<T> {
    pub fn new(
        prob: &CompositeProblem<T>,
        cfg: &SolverConfig<T>,
        x0: StiefelPoint<T>,
        y0: DVector<T>,
        z0: DVector<T>,
    ) -> Result<Self> {
        prob.check_point(&x0)?;
        prob.check_vector(&y0, "y0")?;
        prob.check_vector(&z0, "z0")?;
        Ok(Self {
            x_prev: x0.clone(),
            x: x0,
            y_breve: y0.clone(),
            y: y0,
            z: z0,
            dual_element: None,
            t: 0,
            beta: cfg.beta0,
            tau: cfg.tau,
        })
    }

    /// `mu = tau / beta`, always derived.
    #[inline]
    pub fn mu(&self) -> T {
        self.tau / self.beta
    }
}

/// `beta^t = beta0 (1 + xi t^p)`.
pub fn penalty_at<T: Real>(cfg: &SolverConfig<T>, t: usize) -> T {
    let growth = if t == 0 { T::zero() } else { T::of(t as f64).powf(cfg.p) };
    cfg.beta0 * (T::one() + cfg.xi * growth)
}

/// `X`-dependent part of the smoothed augmented Lagrangian,
/// `f(X) + <z, A(X) - y> + (beta/2)|A(X) - y|^2 - g(X)`.
fn lagrangian_x_part<T: Real>(prob: &CompositeProblem<T>, x: &DMatrix<T>, y: &DVector<T>, z: &DVector<T>, beta: T) -> T {
    let res = prob.a.apply(x) - y;
    prob.f.value(x) + z.dot(&res) + beta / T::of(2.0) * res.norm_squared() - prob.g.value(x)
}

/// `L(X, y, z, beta) = f(X) + <z, A(X) - y> + (beta/2)|A(X) - y|^2 - g(X) + h_{tau/beta}(y)`.
pub fn smoothed_lagrangian<T: Real>(
    prob: &CompositeProblem<T>,
    x: &StiefelPoint<T>,
    y: &DVector<T>,
    z: &DVector<T>,
    beta: T,
    tau: T,
) -> Result<T> {
    prob.check_point(x)?;
    prob.check_vector(y, "y")?;
    prob.check_vector(z, "z")?;
    let env = moreau_value(prob.h.as_ref(), tau / beta, y)?;
    Ok(lagrangian_x_part(prob, x.matrix(), y, z, beta) + env)
}

/// `grad_X S(X, y, z, beta) = grad f(X) + A^T(z + beta (A(X) - y))`.
fn augmented_gradient<T: Real>(prob: &CompositeProblem<T>, x: &DMatrix<T>, y: &DVector<T>, z: &DVector<T>, beta: T) -> DMatrix<T> {
    let dual = z + (prob.a.apply(x) - y) * beta;
    prob.f.gradient(x) + prob.a.adjoint(&dual)
}

/// Projection with one seeded `1e-12` Gaussian perturbation on rank loss.
pub(crate) fn project_or_perturb<T: Real>(m: &DMatrix<T>, seed: u64, t: usize) -> Result<StiefelPoint<T>> {
    match project_to_stiefel(m) {
        Err(Error::RankDeficient { .. }) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (t as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let noise: DMatrix<T> = gaussian_matrix(m.nrows(), m.ncols(), &mut rng);
            project_to_stiefel(&(m + noise * T::of(1e-12)))
        }
        other => other,
    }
}

/// Result of a projected `X` step.
#[derive(Debug, Clone)]
pub struct EpStep<T: Real> {
    pub x: StiefelPoint<T>,
    /// `G^t`.
    pub direction: DMatrix<T>,
    /// `theta ell(beta^t)`.
    pub curvature: T,
}

/// Projected step: `X_c = X + alpha (X - X_prev)`,
/// `G = grad_X S(X_c, y, z, beta) - dg(X)`, `X+ = Proj(X_c - G / (theta ell))`.
pub fn x_update_ep<T: Real>(prob: &CompositeProblem<T>, state: &SolverState<T>, cfg: &SolverConfig<T>, beta: T) -> Result<EpStep<T>> {
    let x = state.x.matrix();
    let xc = x + (x - state.x_prev.matrix()) * cfg.alpha;
    let direction = augmented_gradient(prob, &xc, &state.y, &state.z, beta) - prob.g.subgradient(x);
    let curvature = cfg.theta * cfg.smoothness(prob, beta);
    let target = &xc - &direction / curvature;
    let next = project_or_perturb(&target, cfg.seed, state.t)?;

    if cfg!(debug_assertions) {
        // X+ minimizes <X - X^t, G> + (theta ell / 2)|X - X_c|^2 over the manifold; X^t competes.
        let half = curvature / T::of(2.0);
        let lhs = inner(&(next.matrix() - x), &direction) + half * (next.matrix() - &xc).norm_squared();
        let rhs = half * (x - &xc).norm_squared();
        let scale = T::one() + lhs.abs().max(rhs.abs()) + inner(&direction, &direction).sqrt();
        debug_assert!(lhs <= rhs + T::of(1e-8) * scale, "projected step optimality violated: {lhs} > {rhs}");
    }
    Ok(EpStep { x: next, direction, curvature })
}

/// Result of a retraction step.
#[derive(Debug, Clone)]
pub struct RrStep<T: Real> {
    pub x: StiefelPoint<T>,
    pub eta: T,
    pub backtracks: usize,
    /// Riemannian gradient `G_1` at the old iterate, kept for the next BB step.
    pub riemannian_grad: DMatrix<T>,
}

/// Retraction step `X+ = Retr_X(-eta G_rho)` with `eta = b gamma^j / beta`
/// and the smallest `j` satisfying the Armijo condition
/// `L(X+) - L(X) <= -delta eta |G_rho|^2`.
///
/// `-eta G_rho` is passed through the tangent projection before the polar
/// retraction; the acceptance test runs on the actual trial point.
pub fn x_update_rr<T: Real>(
    prob: &CompositeProblem<T>,
    state: &SolverState<T>,
    cfg: &SolverConfig<T>,
    beta: T,
    base_step: T,
) -> Result<RrStep<T>> {
    let x = &state.x;
    let g = augmented_gradient(prob, x.matrix(), &state.y, &state.z, beta) - prob.g.subgradient(x.matrix());
    let dir = descent_direction(x, &g, cfg.rho)?;
    let riemannian_grad = if cfg.rho == T::one() { dir.clone() } else { descent_direction(x, &g, T::one())? };
    let dir_sq = dir.norm_squared();
    let current = lagrangian_x_part(prob, x.matrix(), &state.y, &state.z, beta);
    let mut eta = base_step / beta;
    if dir_sq == T::zero() {
        return Ok(RrStep { x: x.clone(), eta, backtracks: 0, riemannian_grad });
    }
    // Absorbs roundoff in the two Lagrangian evaluations.
    let slack = T::eps() * T::of(4.0) * (T::one() + current.abs());
    for j in 0..=MAX_BACKTRACKS {
        let step = tangent_project(x, &(&dir * (-eta)))?;
        let trial = polar_retraction(x, &step);
        let value = lagrangian_x_part(prob, trial.matrix(), &state.y, &state.z, beta);
        if value - current <= -cfg.delta * eta * dir_sq + slack {
            return Ok(RrStep { x: trial, eta, backtracks: j, riemannian_grad });
        }
        eta *= cfg.gamma;
    }
    Err(Error::LineSearchStalled { iteration: state.t, backtracks: MAX_BACKTRACKS })
}

/// `b = A(X+) + z / beta`, then the closed-form smoothed `y` step.
/// Returns `(y_bar, y_breve, b)`.
pub fn y_update<T: Real>(
    prob: &CompositeProblem<T>,
    state: &SolverState<T>,
    x_new: &StiefelPoint<T>,
    beta: T,
) -> Result<(DVector<T>, DVector<T>, DVector<T>)> {
    let b = prob.a.apply(x_new.matrix()) + &state.z / beta;
    let sub = y_subproblem(prob.h.as_ref(), state.tau / beta, beta, &b)?;
    Ok((sub.y_bar, sub.y_breve, b))
}

/// `z + sigma beta (A(X+) - y+)`.
pub fn z_update<T: Real>(z: &DVector<T>, ax_new: &DVector<T>, y_new: &DVector<T>, sigma: T, beta: T) -> DVector<T> {
    z + (ax_new - y_new) * (sigma * beta)
}

/// Barzilai-Borwein base step from `S = X - X_prev` and `Z = G1 - G1_prev`,
/// clamped to `bounds`. Non-positive or non-finite curvature yields the
/// lower bound.
pub fn bb_step<T: Real>(
    x: &DMatrix<T>,
    x_prev: &DMatrix<T>,
    g1: &DMatrix<T>,
    g1_prev: &DMatrix<T>,
    rule: StepRule<T>,
    bounds: (T, T),
) -> T {
    let (lo, hi) = bounds;
    let raw = match rule {
        StepRule::Fixed(b) => b,
        StepRule::Bb1 | StepRule::Bb2 => {
            let s = x - x_prev;
            let z = g1 - g1_prev;
            let sz = inner(&s, &z);
            if !(sz > T::zero()) {
                return lo;
            }
            match rule {
                StepRule::Bb1 => inner(&s, &s) / sz,
                _ => sz / inner(&z, &z),
            }
        }
    };
    if !(raw > T::zero()) || !raw.is_finite_value() {
        return lo;
    }
    raw.max(lo).min(hi)
}

/// Why [`solve`] returned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxIterations,
    Converged,
}

/// Snapshot handed to observers after every update.
#[derive(Debug)]
pub struct IterationView<'a, T: Real> {
    /// Iteration index `t`; the state now holds iterate `t + 1`.
    pub t: usize,
    pub beta: T,
    pub mu: T,
    /// `z^t`, the multiplier before this update.
    pub z_prev: &'a DVector<T>,
    pub state: &'a SolverState<T>,
    /// Full record, independent of the trace cadence.
    pub record: &'a IterationTrace,
}

#[derive(Debug, Clone)]
pub struct SolveOutput<T: Real> {
    pub state: SolverState<T>,
    pub trace: Vec<IterationTrace>,
    pub stop: StopReason,
}

/// Runs the solver from `(x0, y0, z0)`.
pub fn solve<T: Real>(
    prob: &CompositeProblem<T>,
    cfg: &SolverConfig<T>,
    x0: StiefelPoint<T>,
    y0: DVector<T>,
    z0: DVector<T>,
) -> Result<SolveOutput<T>> {
    solve_with_observer(prob, cfg, x0, y0, z0, |_| {})
}

/// [`solve`] with a callback invoked after every iteration.
pub fn solve_with_observer<T: Real, F>(
    prob: &CompositeProblem<T>,
    cfg: &SolverConfig<T>,
    x0: StiefelPoint<T>,
    y0: DVector<T>,
    z0: DVector<T>,
    mut observer: F,
) -> Result<SolveOutput<T>>
where
    F: FnMut(&IterationView<'_, T>),
{
    cfg.validate_for(prob)?;
    let mut state = SolverState::new(prob, cfg, x0, y0, z0)?;
    let consts = LyapunovConstants::new(cfg, prob.c_h());
    let z_bound = state.z.norm() + cfg.sigma * prob.c_h() / (T::of(2.0) - cfg.sigma);
    let start = Instant::now();
    let mut trace = Vec::new();
    let mut g1_prev: Option<DMatrix<T>> = None;
    let mut stop = StopReason::MaxIterations;

    for t in 0..cfg.max_iters {
        let beta = penalty_at(cfg, t);
        let mu = state.tau / beta;

        let (x_new, eta, backtracks, g1) = match cfg.variant {
            Variant::EuclideanProjection => {
                let step = x_update_ep(prob, &state, cfg, beta)?;
                (step.x, None, None, None)
            }
            Variant::RiemannianRetraction => {
                let base = match (&g1_prev, cfg.step) {
                    (_, StepRule::Fixed(_)) | (None, _) => {
                        let fixed = if let StepRule::Fixed(b) = cfg.step { b } else { T::one() };
                        bb_step(state.x.matrix(), state.x_prev.matrix(), &DMatrix::zeros(0, 0), &DMatrix::zeros(0, 0), StepRule::Fixed(fixed), cfg.step_bounds)
                    }
                    (Some(prev), rule) => {
                        // Needs the gradient at the current point; recomputed inside the step.
                        let g = augmented_gradient(prob, state.x.matrix(), &state.y, &state.z, beta)
                            - prob.g.subgradient(state.x.matrix());
                        let g1 = descent_direction(&state.x, &g, T::one())?;
                        bb_step(state.x.matrix(), state.x_prev.matrix(), &g1, prev, rule, cfg.step_bounds)
                    }
                };
                let step = x_update_rr(prob, &state, cfg, beta, base)?;
                (step.x, Some(step.eta), Some(step.backtracks), Some(step.riemannian_grad))
            }
        };

        let (y_new, y_breve, b) = y_update(prob, &state, &x_new, beta)?;
        let ax_new = prob.a.apply(x_new.matrix());
        let z_new = z_update(&state.z, &ax_new, &y_new, cfg.sigma, beta);
        let dual_element = (&b - &y_new) * beta;
        let primal_residual = (&ax_new - &y_new).norm();

        let z_prev = std::mem::replace(&mut state.z, z_new);
        let x_prev = std::mem::replace(&mut state.x, x_new);
        state.x_prev = x_prev;
        state.y = y_new;
        state.y_breve = y_breve;
        state.dual_element = Some(dual_element);
        state.beta = beta;
        state.t = t + 1;
        if g1.is_some() {
            g1_prev = g1;
        }

        debug_assert!(
            state.z.norm() <= z_bound * (T::one() + T::of(1e-9)) + T::of(1e-9),
            "dual bound violated: {} > {}",
            state.z.norm(),
            z_bound
        );

        let beta_next = penalty_at(cfg, t + 1);
        let theta = lyapunov_terms_at(
            prob,
            cfg,
            &consts,
            LyapunovInput {
                x: &state.x,
                x_prev: &state.x_prev,
                y: &state.y,
                z: &state.z,
                beta: beta_next,
                beta_prev: beta,
            },
        )?
        .total();
        let crit = crit_terms(prob, &state.x, &state.y_breve, &state.z, state.dual_element.as_ref())?.total();
        let objective = prob.objective_unchecked(state.x.matrix());

        let record = IterationTrace {
            t: t + 1,
            objective: objective.as_f64(),
            crit: Some(crit.as_f64()),
            theta: Some(theta.as_f64()),
            primal_residual: Some(primal_residual.as_f64()),
            beta: Some(beta.as_f64()),
            step_eta: eta.map(Real::as_f64),
            backtracks,
            elapsed_seconds: start.elapsed().as_secs_f64(),
        };
        if !record.objective.is_finite() || !crit.is_finite_value() || !theta.is_finite_value() {
            return Err(Error::NonFinite(format!("iteration {}", t + 1)));
        }
        observer(&IterationView { t, beta, mu, z_prev: &z_prev, state: &state, record: &record });

        let converged = crit <= cfg.crit_tol;
        let last = converged || t + 1 == cfg.max_iters;
        if keep_row(t + 1) || last {
            trace.push(record);
        }
        if converged {
            stop = StopReason::Converged;
            break;
        }
    }

    Ok(SolveOutput { state, trace, stop })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::make_sparse_pca;
    use crate::prox::{moreau_grad, L1Norm, ZeroProx, ZeroSubgrad};
    use crate::problem::{Vectorize, ZeroSmooth};
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(21)
    }

    fn small_problem(rng: &mut ChaCha8Rng) -> CompositeProblem<f64> {
        let d: DMatrix<f64> = gaussian_matrix(8, 20, rng);
        make_sparse_pca(d, 0.5, 6, 3).unwrap()
    }

    fn start(prob: &CompositeProblem<f64>, rng: &mut ChaCha8Rng) -> (StiefelPoint<f64>, DVector<f64>, DVector<f64>) {
        let x = StiefelPoint::random(prob.n(), prob.r(), rng).unwrap();
        let y = prob.a.apply(x.matrix());
        (x, y, DVector::zeros(prob.m()))
    }

    #[test]
    fn penalty_schedule() {
        let mut cfg = SolverConfig::<f64>::defaults(Variant::EuclideanProjection, 100.0);
        assert_eq!(penalty_at(&cfg, 0), 100.0);
        assert_abs_diff_eq!(penalty_at(&cfg, 8), 300.0, epsilon = 1e-12);
        for t in 1..10_000 {
            let (a, b) = (penalty_at(&cfg, t), penalty_at(&cfg, t + 1));
            assert!(b >= a && b <= (1.0 + cfg.xi) * a);
        }
        cfg.xi = 0.0;
        assert_eq!(penalty_at(&cfg, 1234), 100.0);
    }

    #[test]
    fn lagrangian_reduces_to_f_on_feasible_pair() {
        let mut rng = rng();
        let d: DMatrix<f64> = gaussian_matrix(5, 9, &mut rng);
        let prob = CompositeProblem::new(
            Box::new(crate::problem::SparsePcaLoss::new(d, 2).unwrap()),
            Box::new(ZeroSubgrad),
            Box::new(ZeroProx),
            Box::new(Vectorize { n: 5, r: 2 }),
        )
        .unwrap();
        let x = StiefelPoint::random(5, 2, &mut rng).unwrap();
        let y = prob.a.apply(x.matrix());
        let l = smoothed_lagrangian(&prob, &x, &y, &DVector::zeros(10), 7.0, 4.5).unwrap();
        assert_abs_diff_eq!(l, prob.f.value(x.matrix()), epsilon = 1e-14);
    }

    #[test]
    fn lagrangian_drops_at_y_minimizer_and_recomposes() {
        let mut rng = rng();
        let prob = small_problem(&mut rng);
        for _ in 0..20 {
            let x = StiefelPoint::random(8, 3, &mut rng).unwrap();
            let y = DVector::from_fn(24, |_, _| rng.random_range(-1.0..1.0));
            let z = DVector::from_fn(24, |_, _| rng.random_range(-1.0..1.0));
            let (beta, tau) = (40.0, 5.0);
            let before = smoothed_lagrangian(&prob, &x, &y, &z, beta, tau).unwrap();
            // Minimizing over y: h_mu(y) - <z, y> + (beta/2)|A(X) - y|^2 = h_mu(y) + (beta/2)|y - b|^2 + const.
            let b = prob.a.apply(x.matrix()) + &z / beta;
            let sub = y_subproblem(prob.h.as_ref(), tau / beta, beta, &b).unwrap();
            let after = smoothed_lagrangian(&prob, &x, &sub.y_bar, &z, beta, tau).unwrap();
            assert!(after <= before + 1e-12);

            let res = prob.a.apply(x.matrix()) - &y;
            let env = moreau_value(prob.h.as_ref(), tau / beta, &y).unwrap();
            let want = prob.f.value(x.matrix()) + z.dot(&res) + beta / 2.0 * res.norm_squared() - prob.g.value(x.matrix()) + env;
            assert_abs_diff_eq!(before, want, epsilon = 1e-10 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn ep_step_is_identity_without_gradient() {
        let prob = CompositeProblem::<f64>::null(4, 2).unwrap();
        let cfg = SolverConfig::defaults(Variant::EuclideanProjection, 10.0);
        let x = StiefelPoint::identity(4, 2).unwrap();
        let state = SolverState::new(&prob, &cfg, x.clone(), prob.a.apply(x.matrix()), DVector::zeros(8)).unwrap();
        let step = x_update_ep(&prob, &state, &cfg, 10.0).unwrap();
        assert_abs_diff_eq!(step.x.matrix(), x.matrix(), epsilon = 1e-15);
    }

    /// `f(X) = <C, X>` on the sphere, used to pin a hand-computed EP step.
    #[derive(Debug)]
    struct Linear(DMatrix<f64>);
    impl crate::problem::SmoothPart<f64> for Linear {
        fn value(&self, x: &DMatrix<f64>) -> f64 {
            self.0.dot(x)
        }
        fn gradient(&self, _x: &DMatrix<f64>) -> DMatrix<f64> {
            self.0.clone()
        }
        fn lipschitz(&self) -> f64 {
            0.0
        }
        fn grad_bound(&self) -> f64 {
            self.0.norm()
        }
    }

    #[test]
    fn ep_step_on_the_circle() {
        // G = [0, 4] and theta ell = 8: X' = [1, -0.5], X+ = [2, -1]/sqrt(5).
        let c = DMatrix::from_column_slice(2, 1, &[0.0, 4.0]);
        let prob = CompositeProblem::new(
            Box::new(Linear(c)),
            Box::new(ZeroSubgrad),
            Box::new(ZeroProx),
            Box::new(Vectorize { n: 2, r: 1 }),
        )
        .unwrap();
        let mut cfg = SolverConfig::defaults(Variant::EuclideanProjection, 1.0);
        cfg.alpha = 0.0;
        cfg.theta = 8.0;
        let x = StiefelPoint::identity(2, 1).unwrap();
        let state = SolverState::new(&prob, &cfg, x.clone(), prob.a.apply(x.matrix()), DVector::zeros(2)).unwrap();
        let step = x_update_ep(&prob, &state, &cfg, 1.0).unwrap();
        assert_abs_diff_eq!(step.curvature, 8.0);
        let s5 = 5f64.sqrt();
        assert_abs_diff_eq!(step.x.matrix(), &DMatrix::from_column_slice(2, 1, &[2.0 / s5, -1.0 / s5]), epsilon = 1e-15);
    }

    #[test]
    fn rr_step_with_zero_direction() {
        let prob = CompositeProblem::<f64>::null(3, 2).unwrap();
        let cfg = SolverConfig::defaults(Variant::RiemannianRetraction, 10.0);
        let x = StiefelPoint::identity(3, 2).unwrap();
        let state = SolverState::new(&prob, &cfg, x.clone(), prob.a.apply(x.matrix()), DVector::zeros(6)).unwrap();
        let step = x_update_rr(&prob, &state, &cfg, 10.0, 1.0).unwrap();
        assert_eq!(step.backtracks, 0);
        assert_abs_diff_eq!(step.eta, 0.1);
        assert_eq!(step.x.matrix(), x.matrix());
    }

    #[test]
    fn rr_step_accepts_first_trial_when_possible() {
        let mut rng = rng();
        let prob = small_problem(&mut rng);
        let cfg = SolverConfig::defaults(Variant::RiemannianRetraction, 5.0);
        let (x, y, z) = start(&prob, &mut rng);
        let state = SolverState::new(&prob, &cfg, x, y, z).unwrap();
        // A tiny base step always satisfies the Armijo condition at j = 0.
        let step = x_update_rr(&prob, &state, &cfg, 5.0, 1e-6).unwrap();
        assert_eq!(step.backtracks, 0);
        assert_abs_diff_eq!(step.eta, 1e-6 / 5.0);
        // A huge one must backtrack.
        let step = x_update_rr(&prob, &state, &cfg, 5.0, 1e6).unwrap();
        assert!(step.backtracks > 0);
        assert!(step.x.feasibility() <= 1e-10);
    }

    #[test]
    fn y_update_examples() {
        let mut rng = rng();
        let prob = small_problem(&mut rng);
        let cfg = SolverConfig::defaults(Variant::RiemannianRetraction, 5.0);
        let (x, y, z) = start(&prob, &mut rng);
        let state = SolverState::new(&prob, &cfg, x.clone(), y, z).unwrap();
        let (_, _, b) = y_update(&prob, &state, &x, 5.0).unwrap();
        assert_eq!(b, prob.a.apply(x.matrix()));

        let null = CompositeProblem::<f64>::null(8, 3).unwrap();
        let z = DVector::from_fn(24, |_, _| rng.random_range(-1.0..1.0));
        let state = SolverState::new(&null, &cfg, x.clone(), DVector::zeros(24), z).unwrap();
        let (y_bar, _, b) = y_update(&null, &state, &x, 5.0).unwrap();
        assert_abs_diff_eq!(y_bar, b, epsilon = 1e-15);

        for _ in 0..20 {
            let z = DVector::from_fn(24, |_, _| rng.random_range(-2.0..2.0));
            let state = SolverState::new(&prob, &cfg, x.clone(), DVector::zeros(24), z).unwrap();
            let beta = 37.0;
            let (y_bar, _, b) = y_update(&prob, &state, &x, beta).unwrap();
            let grad = moreau_grad(prob.h.as_ref(), cfg.tau / beta, &y_bar).unwrap();
            assert!((grad + (&y_bar - &b) * beta).norm() <= 1e-8);
        }
    }

    #[test]
    fn z_update_examples() {
        let z = DVector::from_column_slice(&[0.0]);
        let out = z_update(&z, &DVector::from_column_slice(&[0.2]), &DVector::from_column_slice(&[0.0]), 1.1, 10.0);
        assert_abs_diff_eq!(out[0], 2.2, epsilon = 1e-15);
        let z = DVector::from_column_slice(&[1.5, -2.0]);
        let a = DVector::from_column_slice(&[0.3, 0.4]);
        assert_eq!(z_update(&z, &a, &a, 1.5, 100.0), z);
    }

    #[test]
    fn bb_rules() {
        let x = DMatrix::from_column_slice(2, 1, &[1.0, 2.0]);
        let xp = DMatrix::from_column_slice(2, 1, &[0.5, 1.0]);
        let s = &x - &xp;
        let gp = DMatrix::zeros(2, 1);
        // Z = S.
        for rule in [StepRule::Bb1, StepRule::Bb2] {
            assert_abs_diff_eq!(bb_step(&x, &xp, &s, &gp, rule, (1e-3, 1e3)), 1.0, epsilon = 1e-15);
        }
        assert_eq!(bb_step(&x, &xp, &s, &gp, StepRule::Fixed(1.0), (1e-3, 1e3)), 1.0);
        // <S, Z> <= 0 falls back to the lower bound.
        assert_eq!(bb_step(&x, &xp, &(-&s), &gp, StepRule::Bb1, (0.25, 4.0)), 0.25);
        assert_eq!(bb_step(&x, &x, &s, &gp, StepRule::Bb2, (0.25, 4.0)), 0.25);
        // Clamping.
        assert_eq!(bb_step(&x, &xp, &(&s * 100.0), &gp, StepRule::Bb1, (0.25, 4.0)), 0.25);
        assert_eq!(bb_step(&x, &xp, &(&s * 0.01), &gp, StepRule::Bb2, (0.25, 4.0)), 4.0);
    }

    #[test]
    fn null_problem_stays_put() {
        let prob = CompositeProblem::<f64>::null(5, 2).unwrap();
        let mut rng = rng();
        for variant in [Variant::EuclideanProjection, Variant::RiemannianRetraction] {
            let mut cfg = SolverConfig::defaults(variant, 10.0);
            cfg.max_iters = 25;
            let (x0, y0, z0) = start(&prob, &mut rng);
            let out = solve(&prob, &cfg, x0.clone(), y0, z0).unwrap();
            assert_abs_diff_eq!(out.state.x.matrix(), x0.matrix(), epsilon = 1e-14);
            assert_eq!(out.trace.len(), 25);
            assert!(out.trace.iter().all(|r| r.objective == 0.0));
        }
    }

    #[test]
    fn solver_invariants_on_a_small_instance() {
        let mut rng = rng();
        let prob = small_problem(&mut rng);
        for variant in [Variant::EuclideanProjection, Variant::RiemannianRetraction] {
            let mut cfg = SolverConfig::defaults(variant, 5.0);
            cfg.max_iters = 300;
            let (x0, y0, z0) = start(&prob, &mut rng);
            let z_bound = cfg.sigma * prob.c_h() / (2.0 - cfg.sigma);
            let mut thetas = Vec::new();
            let out = solve_with_observer(&prob, &cfg, x0, y0, z0, |view| {
                assert!(view.state.x.feasibility() <= 1e-10);
                assert!(view.state.z.norm() <= z_bound + 1e-9);
                let lhs = view.z_prev - (view.z_prev - &view.state.z) / cfg.sigma;
                let rhs = moreau_grad(prob.h.as_ref(), view.mu, &view.state.y).unwrap();
                assert!((lhs - rhs).norm() <= 1e-8);
                thetas.push(view.record.theta.unwrap());
            })
            .unwrap();
            for w in thetas.windows(2) {
                assert!(w[1] <= w[0] + 1e-9 * (1.0 + w[0].abs()), "{variant:?}: {} -> {}", w[0], w[1]);
            }
            assert_eq!(out.state.t, 300);
        }
    }

    #[test]
    fn solve_is_deterministic() {
        let mut rng = rng();
        let prob = small_problem(&mut rng);
        let (x0, y0, z0) = start(&prob, &mut rng);
        for variant in [Variant::EuclideanProjection, Variant::RiemannianRetraction] {
            let mut cfg = SolverConfig::defaults(variant, 5.0);
            cfg.max_iters = 50;
            let a = solve(&prob, &cfg, x0.clone(), y0.clone(), z0.clone()).unwrap();
            let b = solve(&prob, &cfg, x0.clone(), y0.clone(), z0.clone()).unwrap();
            assert_eq!(a.state, b.state);
            assert!(a.trace.iter().zip(&b.trace).all(|(p, q)| p.same_numbers(q)));
        }
    }

    #[test]
    fn bb_rules_run_end_to_end() {
        let mut rng = rng();
        let prob = small_problem(&mut rng);
        let (x0, y0, z0) = start(&prob, &mut rng);
        for rule in [StepRule::Bb1, StepRule::Bb2] {
            let mut cfg = SolverConfig::defaults(Variant::RiemannianRetraction, 5.0);
            cfg.step = rule;
            cfg.max_iters = 100;
            let out = solve(&prob, &cfg, x0.clone(), y0.clone(), z0.clone()).unwrap();
            assert!(out.state.x.feasibility() <= 1e-10);
            assert!(out.trace.last().unwrap().objective.is_finite());
        }
    }

    #[test]
    fn stops_on_tolerance() {
        let prob = CompositeProblem::<f64>::null(4, 2).unwrap();
        let mut cfg = SolverConfig::defaults(Variant::RiemannianRetraction, 10.0);
        cfg.crit_tol = 1e-12;
        let x = StiefelPoint::identity(4, 2).unwrap();
        let out = solve(&prob, &cfg, x.clone(), prob.a.apply(x.matrix()), DVector::zeros(8)).unwrap();
        assert_eq!(out.stop, StopReason::Converged);
        assert_eq!(out.trace.len(), 1);
    }

    #[test]
    fn rejects_invalid_inputs() {
        let prob = CompositeProblem::<f64>::null(4, 2).unwrap();
        let mut cfg = SolverConfig::defaults(Variant::EuclideanProjection, 10.0);
        let x = StiefelPoint::identity(4, 2).unwrap();
        assert!(matches!(
            solve(&prob, &cfg, x.clone(), DVector::zeros(3), DVector::zeros(8)),
            Err(Error::DimensionMismatch(_))
        ));
        cfg.sigma = 2.5;
        assert!(matches!(
            solve(&prob, &cfg, x, DVector::zeros(8), DVector::zeros(8)),
            Err(Error::ConfigInvalid(_))
        ));
    }

    #[test]
    fn single_precision_solve() {
        let mut rng = rng();
        let d: DMatrix<f32> = gaussian_matrix(6, 12, &mut rng);
        let prob = make_sparse_pca(d, 0.3f32, 4, 2).unwrap();
        let mut cfg = SolverConfig::<f32>::defaults(Variant::EuclideanProjection, 3.0);
        cfg.max_iters = 30;
        let x = StiefelPoint::<f32>::random(6, 2, &mut rng).unwrap();
        let y = prob.a.apply(x.matrix());
        let out = solve(&prob, &cfg, x, y, DVector::zeros(12)).unwrap();
        assert!(out.state.x.feasibility() <= crate::stiefel::feasibility_tol::<f32>());
    }

    #[test]
    fn l1_problem_builds() {
        let _ = L1Norm::new(1.0f64);
        let _ = ZeroSmooth;
    }
}
