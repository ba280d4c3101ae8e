use crate::error::{Error, Result};
use crate::problem::CompositeProblem;
use crate::scalar::Real;

/// How the primal block is updated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Linearized proximal step with extrapolation, followed by a Euclidean
    /// projection onto the manifold.
    EuclideanProjection,
    /// Riemannian descent with a polar retraction and Armijo backtracking.
    RiemannianRetraction,
}

impl Variant {
    pub fn short_name(self) -> &'static str {
        match self {
            Self::EuclideanProjection => "ep",
            Self::RiemannianRetraction => "rr",
        }
    }
}

/// Base step `b^t` of the retraction variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule<T> {
    Fixed(T),
    /// `<S, S> / <S, Z>`.
    Bb1,
    /// `<S, Z> / <Z, Z>`.
    Bb2,
}

/// Parameters of the solver. Field names follow their role; the comment on
/// each gives the admissible range checked by [`SolverConfig::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T> {
    pub variant: Variant,
    /// Penalty growth exponent, `(0, 1)`.
    pub p: T,
    /// Penalty growth rate, `[0, 1]`; `0` freezes the penalty at `beta0`.
    pub xi: T,
    /// Proximal scaling of the EP step, `> 1`.
    pub theta: T,
    /// Dual over-relaxation, `[1, 2)`.
    pub sigma: T,
    /// Smoothing-to-penalty ratio `mu * beta`, `>= 4 / (2 - sigma)`.
    pub tau: T,
    /// Initial penalty, `> 0` and `>= 2 tau W_h`.
    pub beta0: T,
    /// Extrapolation, `[0, (theta-1)/((theta+1)(xi+2)))` for EP, `0` for RR.
    pub alpha: T,
    /// Descent-direction mixing, `> 0`.
    pub rho: T,
    /// Backtracking factor, `(0, 1)`.
    pub gamma: T,
    /// Armijo constant, `(0, 1/max(1, 2 rho))`.
    pub delta: T,
    pub step: StepRule<T>,
    /// Clamp `[b_lo, b_hi]` for the base step.
    pub step_bounds: (T, T),
    pub max_iters: usize,
    /// Stop once the criticality measure drops to this value.
    pub crit_tol: T,
    /// Free positive constant of the Lyapunov function.
    pub eps_beta: T,
    pub seed: u64,
}

impl<T: Real> SolverConfig<T> {
    /// Recommended defaults: `p = 1/3`, `theta = 1.01`, `sigma = 1.1`,
    /// `rho = 1`, `gamma = 1/2`, `delta = 1e-3`, `xi = 1`,
    /// `tau = 4/(2 - sigma)`, `alpha` just below its bound for EP, and a
    /// fixed base step `b = 1`.
    pub fn defaults(variant: Variant, beta0: T) -> Self {
        let theta = T::of(1.01);
        let xi = T::one();
        let sigma = T::of(1.1);
        let alpha = match variant {
            Variant::EuclideanProjection => {
                let bound = Self::alpha_bound(theta, xi);
                bound - T::of(1e-12).max(bound * T::eps() * T::of(8.0))
            }
            Variant::RiemannianRetraction => T::zero(),
        };
        Self {
            variant,
            p: T::one() / T::of(3.0),
            xi,
            theta,
            sigma,
            tau: Self::min_tau(sigma),
            beta0,
            alpha,
            rho: T::one(),
            gamma: T::of(0.5),
            delta: T::of(1e-3),
            step: StepRule::Fixed(T::one()),
            step_bounds: (T::of(1e-3), T::of(1e3)),
            max_iters: 1000,
            crit_tol: T::zero(),
            eps_beta: T::one(),
            seed: 0,
        }
    }

    /// `(theta - 1) / ((theta + 1)(xi + 2))`, the exclusive upper bound on `alpha`.
    pub fn alpha_bound(theta: T, xi: T) -> T {
        (theta - T::one()) / ((theta + T::one()) * (xi + T::of(2.0)))
    }

    /// `4 / (2 - sigma)`.
    pub fn min_tau(sigma: T) -> T {
        T::of(4.0) / (T::of(2.0) - sigma)
    }

    /// Checks every range independent of the problem.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ConfigInvalid(msg));
        let zero = T::zero();
        let one = T::one();
        let fields = [
            self.p,
            self.xi,
            self.theta,
            self.sigma,
            self.tau,
            self.beta0,
            self.alpha,
            self.rho,
            self.gamma,
            self.delta,
            self.step_bounds.0,
            self.step_bounds.1,
            self.crit_tol,
            self.eps_beta,
        ];
        if fields.iter().any(|v| !v.is_finite_value()) {
            return bad("all parameters must be finite".into());
        }
        if !(self.p > zero && self.p < one) {
            return bad(format!("p = {} must lie in (0, 1)", self.p));
        }
        if !(self.xi >= zero && self.xi <= one) {
            return bad(format!("xi = {} must lie in [0, 1]", self.xi));
        }
        if !(self.theta > one) {
            return bad(format!("theta = {} must exceed 1", self.theta));
        }
        if !(self.sigma >= one && self.sigma < T::of(2.0)) {
            return bad(format!("sigma = {} must lie in [1, 2)", self.sigma));
        }
        let tau_min = Self::min_tau(self.sigma);
        if !(self.tau >= tau_min * (one - T::eps() * T::of(4.0))) {
            return bad(format!("tau = {} must be at least 4/(2 - sigma) = {}", self.tau, tau_min));
        }
        if !(self.beta0 > zero) {
            return bad(format!("beta0 = {} must be positive", self.beta0));
        }
        match self.variant {
            Variant::EuclideanProjection => {
                let bound = Self::alpha_bound(self.theta, self.xi);
                if !(self.alpha >= zero && self.alpha < bound) {
                    return bad(format!("alpha = {} must lie in [0, {})", self.alpha, bound));
                }
            }
            Variant::RiemannianRetraction => {
                if self.alpha != zero {
                    return bad(format!("alpha = {} must be 0 for the retraction variant", self.alpha));
                }
            }
        }
        if !(self.rho > zero) {
            return bad(format!("rho = {} must be positive", self.rho));
        }
        if !(self.gamma > zero && self.gamma < one) {
            return bad(format!("gamma = {} must lie in (0, 1)", self.gamma));
        }
        let delta_max = one / one.max(T::of(2.0) * self.rho);
        if !(self.delta > zero && self.delta < delta_max) {
            return bad(format!("delta = {} must lie in (0, {})", self.delta, delta_max));
        }
        let (lo, hi) = self.step_bounds;
        if !(lo > zero && lo <= hi) {
            return bad(format!("step bounds [{lo}, {hi}] must satisfy 0 < lo <= hi"));
        }
        if let StepRule::Fixed(b) = self.step {
            if !(b > zero && b.is_finite_value()) {
                return bad(format!("fixed base step {b} must be positive"));
            }
        }
        if !(self.crit_tol >= zero) {
            return bad(format!("crit_tol = {} must be nonnegative", self.crit_tol));
        }
        if !(self.eps_beta > zero) {
            return bad(format!("eps_beta = {} must be positive", self.eps_beta));
        }
        Ok(())
    }

    /// [`validate`](Self::validate) plus `beta0 >= 2 tau W_h`.
    pub fn validate_for(&self, prob: &CompositeProblem<T>) -> Result<()> {
        self.validate()?;
        let w = prob.h.weak_convexity();
        let need = T::of(2.0) * self.tau * w;
        if self.beta0 < need {
            return Err(Error::ConfigInvalid(format!(
                "beta0 = {} must be at least 2 tau W_h = {}",
                self.beta0, need
            )));
        }
        Ok(())
    }

    /// `ell(beta) = beta A_bar^2 + L_f`, the smoothness of the augmented
    /// term in `X`.
    pub fn smoothness(&self, prob: &CompositeProblem<T>, beta: T) -> T {
        let a = prob.a_bar();
        beta * a * a + prob.f.lipschitz()
    }
}
