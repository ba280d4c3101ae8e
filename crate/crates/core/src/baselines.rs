//! Comparison solvers: projected subgradient, fixed-penalty ADMM and a
//! smoothing proximal gradient method with Euclidean projection.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use crate::diagnostics::{keep_row, IterationTrace};
use crate::error::{Error, Result};
use crate::oadmm::{project_or_perturb, solve, SolveOutput, SolverConfig, Variant};
use crate::problem::CompositeProblem;
use crate::scalar::Real;
use crate::stiefel::StiefelPoint;

/// Which baseline to run and its step parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaselineKind<T> {
    /// `eta_t = eta0 / sqrt(t + 1)`; `None` selects `eta0 = 1 / L_f`.
    SubGrad { eta0: Option<T> },
    /// Retraction ADMM with the penalty frozen at `beta`.
    FixedBetaAdmm { beta: T },
    /// `mu_t = mu0 / (1 + t)^exponent`.
    SpgmEp { mu0: T, exponent: T },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineConfig<T> {
    pub kind: BaselineKind<T>,
    pub max_iters: usize,
    pub seed: u64,
}

impl<T: Real> BaselineConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ConfigInvalid(msg));
        match self.kind {
            BaselineKind::SubGrad { eta0: Some(e) } if !(e > T::zero() && e.is_finite_value()) => {
                bad(format!("eta0 = {e} must be positive"))
            }
            BaselineKind::FixedBetaAdmm { beta } if !(beta > T::zero() && beta.is_finite_value()) => {
                bad(format!("beta = {beta} must be positive"))
            }
            BaselineKind::SpgmEp { mu0, exponent } if !(mu0 > T::zero() && mu0.is_finite_value()) || !(exponent >= T::zero()) => {
                bad(format!("mu0 = {mu0} must be positive and exponent = {exponent} nonnegative"))
            }
            _ => Ok(()),
        }
    }
}

/// Final point and trace of a baseline run.
#[derive(Debug, Clone)]
pub struct BaselineOutput<T: Real> {
    pub x: StiefelPoint<T>,
    pub trace: Vec<IterationTrace>,
}

fn row(t: usize, objective: f64, residual: Option<f64>, eta: f64, start: &Instant) -> IterationTrace {
    IterationTrace {
        t,
        objective,
        crit: None,
        theta: None,
        primal_residual: residual,
        beta: None,
        step_eta: Some(eta),
        backtracks: None,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    }
}

fn push_row(trace: &mut Vec<IterationTrace>, record: IterationTrace, last: bool) -> Result<()> {
    if !record.objective.is_finite() {
        return Err(Error::NonFinite(format!("iteration {}", record.t)));
    }
    if keep_row(record.t) || last {
        trace.push(record);
    }
    Ok(())
}

/// Projected subgradient method:
/// `X+ = Proj(X - eta_t (grad f(X) - dg(X) + A^T dh(A(X))))`.
pub fn subgrad_solve<T: Real>(
    prob: &CompositeProblem<T>,
    cfg: &BaselineConfig<T>,
    x0: StiefelPoint<T>,
) -> Result<BaselineOutput<T>> {
    cfg.validate()?;
    prob.check_point(&x0)?;
    let eta0 = match cfg.kind {
        BaselineKind::SubGrad { eta0: Some(e) } => e,
        BaselineKind::SubGrad { eta0: None } => {
            let l = prob.f.lipschitz();
            if l > T::zero() { T::one() / l } else { T::one() }
        }
        _ => return Err(Error::ConfigInvalid("subgrad_solve needs a SubGrad config".into())),
    };
    let start = Instant::now();
    let mut x = x0;
    let mut trace = Vec::new();
    for t in 0..cfg.max_iters {
        let m = x.matrix();
        let s = prob.h.subgradient(&prob.a.apply(m));
        let g = prob.f.gradient(m) - prob.g.subgradient(m) + prob.a.adjoint(&s);
        let eta = eta0 / T::of((t + 1) as f64).sqrt();
        x = project_or_perturb(&(m - g * eta), cfg.seed, t)?;
        let objective = prob.objective_unchecked(x.matrix()).as_f64();
        push_row(&mut trace, row(t + 1, objective, None, eta.as_f64(), &start), t + 1 == cfg.max_iters)?;
    }
    Ok(BaselineOutput { x, trace })
}

/// Solver configuration of the fixed-penalty ADMM: the retraction variant
/// with `xi = 0`, `sigma = 1` and `alpha = 0`.
pub fn fixed_beta_config<T: Real>(beta: T, max_iters: usize, seed: u64) -> SolverConfig<T> {
    let mut cfg = SolverConfig::defaults(Variant::RiemannianRetraction, beta);
    cfg.xi = T::zero();
    cfg.sigma = T::one();
    cfg.alpha = T::zero();
    cfg.max_iters = max_iters;
    cfg.seed = seed;
    cfg
}

/// ADMM with constant penalty, realized through the main solver loop.
pub fn fixed_beta_admm_solve<T: Real>(
    prob: &CompositeProblem<T>,
    cfg: &BaselineConfig<T>,
    x0: StiefelPoint<T>,
    y0: DVector<T>,
    z0: DVector<T>,
) -> Result<SolveOutput<T>> {
    cfg.validate()?;
    let BaselineKind::FixedBetaAdmm { beta } = cfg.kind else {
        return Err(Error::ConfigInvalid("fixed_beta_admm_solve needs a FixedBetaAdmm config".into()));
    };
    solve(prob, &fixed_beta_config(beta, cfg.max_iters, cfg.seed), x0, y0, z0)
}

/// Smoothing proximal gradient on `f(X) - g(X) + h(y) + |A(X) - y|^2 / (2 mu)`,
/// alternating a projected gradient step in `X` with the exact `y` minimization
/// `y = prox_h(A(X); mu)`, while `mu` shrinks.
pub fn spgm_ep_solve<T: Real>(
    prob: &CompositeProblem<T>,
    cfg: &BaselineConfig<T>,
    x0: StiefelPoint<T>,
    y0: DVector<T>,
) -> Result<BaselineOutput<T>> {
    cfg.validate()?;
    prob.check_point(&x0)?;
    prob.check_vector(&y0, "y0")?;
    let BaselineKind::SpgmEp { mu0, exponent } = cfg.kind else {
        return Err(Error::ConfigInvalid("spgm_ep_solve needs an SpgmEp config".into()));
    };
    let a_sq = prob.a_bar() * prob.a_bar();
    let l_f = prob.f.lipschitz();
    let start = Instant::now();
    let mut x = x0;
    let mut y = y0;
    let mut trace = Vec::new();
    for t in 0..cfg.max_iters {
        let mu = mu0 / T::of((1 + t) as f64).powf(exponent);
        let eta = T::one() / (l_f + a_sq / mu);
        let m = x.matrix();
        let coupling: DVector<T> = (prob.a.apply(m) - &y) / mu;
        let g: DMatrix<T> = prob.f.gradient(m) + prob.a.adjoint(&coupling) - prob.g.subgradient(m);
        x = project_or_perturb(&(m - g * eta), cfg.seed, t)?;
        let ax = prob.a.apply(x.matrix());
        y = prob.h.prox(&ax, mu);
        let residual = (&ax - &y).norm().as_f64();
        let objective = prob.objective_unchecked(x.matrix()).as_f64();
        push_row(&mut trace, row(t + 1, objective, Some(residual), eta.as_f64(), &start), t + 1 == cfg.max_iters)?;
    }
    Ok(BaselineOutput { x, trace })
}
