//! Criticality measure, Lyapunov function and per-iteration records.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::oadmm::{penalty_at, smoothed_lagrangian, SolverConfig, SolverState};
use crate::problem::CompositeProblem;
use crate::scalar::Real;
use crate::stiefel::{tangent_project, StiefelPoint};

/// One row of a solver trace.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    /// Index of the iterate this row describes (`1` after the first update).
    pub t: usize,
    pub objective: f64,
    pub crit: Option<f64>,
    pub theta: Option<f64>,
    pub primal_residual: Option<f64>,
    pub beta: Option<f64>,
    pub step_eta: Option<f64>,
    pub backtracks: Option<usize>,
    pub elapsed_seconds: f64,
}

impl IterationTrace {
    /// Same row ignoring wall time.
    pub fn same_numbers(&self, other: &Self) -> bool {
        let strip = |r: &Self| Self { elapsed_seconds: 0.0, ..r.clone() };
        strip(self) == strip(other)
    }
}

/// Rows up to `10^4` are kept, then every tenth.
pub fn keep_row(t: usize) -> bool {
    t <= 10_000 || t.is_multiple_of(10)
}

/// The three terms of the criticality measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CritTerms<T> {
    /// `|A(X) - y|`.
    pub primal: T,
    /// `dist(z, dh(y))`, or `|s - z|` for a known `s in dh(y)`.
    pub dual: T,
    /// `|Proj_{T_X}(grad f(X) - dg(X) + A^T z)|_F`.
    pub tangent: T,
}

impl<T: Real> CritTerms<T> {
    pub fn total(&self) -> T {
        self.primal + self.dual + self.tangent
    }
}

/// Terms of `Crit(X, y, z)`. The dual term uses the exact subdifferential
/// distance when `h` provides one and falls back to `|s - z|` otherwise.
pub fn crit_terms<T: Real>(
    prob: &CompositeProblem<T>,
    x: &StiefelPoint<T>,
    y: &DVector<T>,
    z: &DVector<T>,
    canonical: Option<&DVector<T>>,
) -> Result<CritTerms<T>> {
    prob.check_point(x)?;
    prob.check_vector(y, "y")?;
    prob.check_vector(z, "z")?;
    let ax = prob.a.apply(x.matrix());
    let primal = (&ax - y).norm();
    let dual = match (prob.h.subdiff_dist(y, z), canonical) {
        (Some(d), _) => d,
        (None, Some(s)) => (s - z).norm(),
        (None, None) => return Err(Error::MissingCanonicalElement),
    };
    let grad: DMatrix<T> = prob.f.gradient(x.matrix()) - prob.g.subgradient(x.matrix()) + prob.a.adjoint(z);
    let tangent = tangent_project(x, &grad)?.norm();
    Ok(CritTerms { primal, dual, tangent })
}

pub fn crit<T: Real>(
    prob: &CompositeProblem<T>,
    x: &StiefelPoint<T>,
    y: &DVector<T>,
    z: &DVector<T>,
    canonical: Option<&DVector<T>>,
) -> Result<T> {
    Ok(crit_terms(prob, x, y, z, canonical)?.total())
}

/// Constants of the Lyapunov function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovConstants<T> {
    /// `12 sigma^2 C_h^2 / (p (2 - sigma)^2)`.
    pub sigma_ddot: T,
    /// `eps_beta + tau C_h^2 + (2/sigma) sigma_ddot`.
    pub c: T,
}

impl<T: Real> LyapunovConstants<T> {
    pub fn new(cfg: &SolverConfig<T>, c_h: T) -> Self {
        let two = T::of(2.0);
        let gap = two - cfg.sigma;
        let sigma_ddot = T::of(12.0) * cfg.sigma * cfg.sigma * c_h * c_h / (cfg.p * gap * gap);
        let c = cfg.eps_beta + cfg.tau * c_h * c_h + two / cfg.sigma * sigma_ddot;
        Self { sigma_ddot, c }
    }
}

/// `Theta^t = L(X^t, y^t, z^t, beta^t) + c/beta^t + P^t + D^t`, term by term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovTerms<T> {
    pub lagrangian: T,
    /// `c / beta^t`.
    pub penalty_decay: T,
    /// `P^t = alpha (theta + 1) ell(beta^t) / 2 |X^t - X^{t-1}|_F^2`.
    pub momentum: T,
    /// `D^t = 2 beta^{t-1} (sigma - 1)/(2 - sigma) |sigma (A(X^t) - y^t)|^2`.
    pub dual_history: T,
}

impl<T: Real> LyapunovTerms<T> {
    pub fn total(&self) -> T {
        self.lagrangian + self.penalty_decay + self.momentum + self.dual_history
    }
}

/// Everything the Lyapunov value depends on at iterate `t >= 1`.
#[derive(Debug, Clone, Copy)]
pub struct LyapunovInput<'a, T: Real> {
    pub x: &'a StiefelPoint<T>,
    pub x_prev: &'a StiefelPoint<T>,
    pub y: &'a DVector<T>,
    pub z: &'a DVector<T>,
    /// `beta^t`.
    pub beta: T,
    /// `beta^{t-1}`.
    pub beta_prev: T,
}

pub fn lyapunov_terms_at<T: Real>(
    prob: &CompositeProblem<T>,
    cfg: &SolverConfig<T>,
    consts: &LyapunovConstants<T>,
    input: LyapunovInput<'_, T>,
) -> Result<LyapunovTerms<T>> {
    let two = T::of(2.0);
    let lagrangian = smoothed_lagrangian(prob, input.x, input.y, input.z, input.beta, cfg.tau)?;
    let step = (input.x.matrix() - input.x_prev.matrix()).norm_squared();
    let momentum = cfg.alpha * (cfg.theta + T::one()) * cfg.smoothness(prob, input.beta) / two * step;
    let residual = (prob.a.apply(input.x.matrix()) - input.y) * cfg.sigma;
    let dual_history = two * input.beta_prev * (cfg.sigma - T::one()) / (two - cfg.sigma) * residual.norm_squared();
    Ok(LyapunovTerms { lagrangian, penalty_decay: consts.c / input.beta, momentum, dual_history })
}

/// Lyapunov terms for a solver state that has completed `t >= 1` updates.
pub fn lyapunov_terms<T: Real>(
    prob: &CompositeProblem<T>,
    state: &SolverState<T>,
    cfg: &SolverConfig<T>,
) -> Result<LyapunovTerms<T>> {
    if state.t == 0 {
        return Err(Error::InsufficientHistory);
    }
    let consts = LyapunovConstants::new(cfg, prob.c_h());
    lyapunov_terms_at(
        prob,
        cfg,
        &consts,
        LyapunovInput {
            x: &state.x,
            x_prev: &state.x_prev,
            y: &state.y,
            z: &state.z,
            beta: penalty_at(cfg, state.t),
            beta_prev: penalty_at(cfg, state.t - 1),
        },
    )
}

pub fn lyapunov<T: Real>(prob: &CompositeProblem<T>, state: &SolverState<T>, cfg: &SolverConfig<T>) -> Result<T> {
    Ok(lyapunov_terms(prob, state, cfg)?.total())
}

/// Running averages `(t, mean of crit over rows <= t)`. Rows without a
/// criticality value are skipped.
pub fn ergodic_crit(trace: &[IterationTrace]) -> Result<Vec<(usize, f64)>> {
    let mut out = Vec::with_capacity(trace.len());
    let mut sum = 0.0;
    let mut count = 0usize;
    for row in trace {
        if let Some(c) = row.crit {
            sum += c;
            count += 1;
            out.push((row.t, sum / count as f64));
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyTrace);
    }
    Ok(out)
}

/// Average criticality over the rows with `t <= horizon`.
pub fn ergodic_crit_at(trace: &[IterationTrace], horizon: usize) -> Result<f64> {
    ergodic_crit(trace)?
        .into_iter()
        .take_while(|&(t, _)| t <= horizon)
        .last()
        .map(|(_, avg)| avg)
        .ok_or(Error::EmptyTrace)
}
