//! TOML experiment specification.
//!
//! ```toml
//! dataset = "randn-200-50"
//! r = 10
//! rho_dot = 50.0
//! iterations = 2000
//! seed = 42
//!
//! [solver.oadmm-ep]
//!
//! [solver.radmm-1]
//! kind = "fixed-beta-admm"
//! beta = 100.0
//! ```
//!
//! A solver table without `kind` is resolved by its name.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use oadmm_core::baselines::{BaselineConfig, BaselineKind};
use oadmm_core::data::Centering;
use oadmm_core::{SolverConfig, StepRule, Variant};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::CliError;

pub const SOLVER_KINDS: [&str; 5] = ["oadmm-ep", "oadmm-rr", "subgrad", "spgm-ep", "fixed-beta-admm"];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CenteringName {
    #[default]
    Mean,
    ColumnSum,
    None,
}

impl From<CenteringName> for Centering {
    fn from(c: CenteringName) -> Self {
        match c {
            CenteringName::Mean => Centering::Mean,
            CenteringName::ColumnSum => Centering::ColumnSum,
            CenteringName::None => Centering::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    /// `randn-<m>-<d>`, `randn-<m>-<d>:seed=<u64>` or `file:<path>`.
    pub dataset: String,
    #[serde(default)]
    pub centering: CenteringName,
    /// Number of components; 20 when omitted.
    #[serde(default = "default_r")]
    pub r: usize,
    /// Sparsity weight of the sparse PCA model.
    pub rho_dot: f64,
    /// Largest-k parameter; defaults to `ceil(n r / 10)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub iterations: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub solver: BTreeMap<String, SolverTable>,
}

fn default_r() -> usize {
    20
}

/// Per-solver keys. Each kind accepts only its own subset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverTable {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// `fixed`, `bb1` or `bb2`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_lo: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_hi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crit_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_exponent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

const OADMM_KEYS: &[&str] = &[
    "p", "xi", "theta", "sigma", "tau", "beta0", "alpha", "rho", "gamma", "delta", "step", "b", "b_lo", "b_hi",
    "crit_tol", "eps_beta",
];

impl SolverTable {
    fn set_keys(&self) -> Vec<&'static str> {
        let fields: [(&'static str, bool); 20] = [
            ("p", self.p.is_some()),
            ("xi", self.xi.is_some()),
            ("theta", self.theta.is_some()),
            ("sigma", self.sigma.is_some()),
            ("tau", self.tau.is_some()),
            ("beta0", self.beta0.is_some()),
            ("alpha", self.alpha.is_some()),
            ("rho", self.rho.is_some()),
            ("gamma", self.gamma.is_some()),
            ("delta", self.delta.is_some()),
            ("step", self.step.is_some()),
            ("b", self.b.is_some()),
            ("b_lo", self.b_lo.is_some()),
            ("b_hi", self.b_hi.is_some()),
            ("crit_tol", self.crit_tol.is_some()),
            ("eps_beta", self.eps_beta.is_some()),
            ("eta0", self.eta0.is_some()),
            ("mu0", self.mu0.is_some()),
            ("mu_exponent", self.mu_exponent.is_some()),
            ("beta", self.beta.is_some()),
        ];
        fields.iter().filter(|(_, set)| *set).map(|(k, _)| *k).collect()
    }
}

/// A fully resolved solver run.
#[derive(Debug, Clone, PartialEq)]
pub enum SolverPlan {
    Oadmm(SolverConfig<f64>),
    SubGrad(BaselineConfig<f64>),
    SpgmEp(BaselineConfig<f64>),
    FixedBetaAdmm(BaselineConfig<f64>),
}

impl SolverPlan {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Oadmm(c) if c.variant == Variant::EuclideanProjection => "oadmm-ep",
            Self::Oadmm(_) => "oadmm-rr",
            Self::SubGrad(_) => "subgrad",
            Self::SpgmEp(_) => "spgm-ep",
            Self::FixedBetaAdmm(_) => "fixed-beta-admm",
        }
    }

    pub fn max_iters(&self) -> usize {
        match self {
            Self::Oadmm(c) => c.max_iters,
            Self::SubGrad(c) | Self::SpgmEp(c) | Self::FixedBetaAdmm(c) => c.max_iters,
        }
    }

    /// Resolved parameters for the summary.
    pub fn describe(&self) -> Value {
        match self {
            Self::Oadmm(c) => {
                let step = match c.step {
                    StepRule::Fixed(b) => json!({ "rule": "fixed", "b": b }),
                    StepRule::Bb1 => json!({ "rule": "bb1" }),
                    StepRule::Bb2 => json!({ "rule": "bb2" }),
                };
                json!({
                    "kind": self.kind(), "p": c.p, "xi": c.xi, "theta": c.theta, "sigma": c.sigma,
                    "tau": c.tau, "beta0": c.beta0, "alpha": c.alpha, "rho": c.rho, "gamma": c.gamma,
                    "delta": c.delta, "step": step, "b_lo": c.step_bounds.0, "b_hi": c.step_bounds.1,
                    "crit_tol": c.crit_tol, "eps_beta": c.eps_beta, "max_iters": c.max_iters, "seed": c.seed,
                })
            }
            Self::SubGrad(c) | Self::SpgmEp(c) | Self::FixedBetaAdmm(c) => {
                let params = match c.kind {
                    BaselineKind::SubGrad { eta0 } => json!({ "eta0": eta0 }),
                    BaselineKind::SpgmEp { mu0, exponent } => json!({ "mu0": mu0, "mu_exponent": exponent }),
                    BaselineKind::FixedBetaAdmm { beta } => json!({ "beta": beta }),
                };
                json!({ "kind": self.kind(), "params": params, "max_iters": c.max_iters, "seed": c.seed })
            }
        }
    }
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Checks problem-level fields; solver tables are checked by [`plans`](Self::plans).
    pub fn validate(&self) -> Result<(), CliError> {
        if self.r == 0 {
            return Err(CliError::Config("r must be positive".into()));
        }
        if !(self.rho_dot > 0.0 && self.rho_dot.is_finite()) {
            return Err(CliError::Config(format!("rho_dot = {} must be positive", self.rho_dot)));
        }
        if self.iterations == 0 {
            return Err(CliError::Config("iterations must be positive".into()));
        }
        if self.solver.is_empty() {
            return Err(CliError::Config("no [solver.<name>] tables".into()));
        }
        Ok(())
    }

    /// Default largest-k parameter for an `n x r` unknown.
    pub fn k_for(&self, n: usize) -> usize {
        self.k.unwrap_or_else(|| (n * self.r).div_ceil(10))
    }

    /// Resolves every solver table, in name order.
    pub fn plans(&self) -> Result<Vec<(String, SolverPlan)>, CliError> {
        self.validate()?;
        self.solver.iter().map(|(name, table)| Ok((name.clone(), self.plan(name, table)?))).collect()
    }

    fn plan(&self, name: &str, t: &SolverTable) -> Result<SolverPlan, CliError> {
        let kind = t.kind.as_deref().unwrap_or(name);
        let allowed: &[&str] = match kind {
            "oadmm-ep" | "oadmm-rr" => OADMM_KEYS,
            "subgrad" => &["eta0"],
            "spgm-ep" => &["mu0", "mu_exponent"],
            "fixed-beta-admm" => &["beta"],
            other => {
                return Err(CliError::Config(format!(
                    "unknown solver {other:?} in [solver.{name}]; known: {}",
                    SOLVER_KINDS.join(", ")
                )))
            }
        };
        if let Some(key) = t.set_keys().into_iter().find(|k| !allowed.contains(k)) {
            return Err(CliError::Config(format!("key {key:?} does not apply to solver {name:?} ({kind})")));
        }
        let max_iters = t.iterations.unwrap_or(self.iterations);
        if max_iters == 0 {
            return Err(CliError::Config(format!("[solver.{name}] iterations must be positive")));
        }
        let beta0 = t.beta0.unwrap_or(10.0 * self.rho_dot);
        let tau_default = SolverConfig::<f64>::min_tau(t.sigma.unwrap_or(1.1));
        let plan = match kind {
            "oadmm-ep" | "oadmm-rr" => {
                let variant =
                    if kind == "oadmm-ep" { Variant::EuclideanProjection } else { Variant::RiemannianRetraction };
                let mut c = SolverConfig::defaults(variant, beta0);
                macro_rules! take {
                    ($($field:ident),*) => { $(if let Some(v) = t.$field { c.$field = v; })* };
                }
                take!(p, xi, theta, sigma, tau, rho, gamma, delta, crit_tol, eps_beta);
                if t.tau.is_none() {
                    c.tau = SolverConfig::<f64>::min_tau(c.sigma);
                }
                c.alpha = match (t.alpha, variant) {
                    (Some(a), _) => a,
                    (None, Variant::EuclideanProjection) => {
                        let bound = SolverConfig::<f64>::alpha_bound(c.theta, c.xi);
                        bound - (1e-12f64).max(bound * f64::EPSILON * 8.0)
                    }
                    (None, Variant::RiemannianRetraction) => 0.0,
                };
                c.step = match t.step.as_deref().unwrap_or("fixed") {
                    "fixed" => StepRule::Fixed(t.b.unwrap_or(1.0)),
                    "bb1" | "bb2" if t.b.is_some() => {
                        return Err(CliError::Config(format!("[solver.{name}] b only applies to step = \"fixed\"")))
                    }
                    "bb1" => StepRule::Bb1,
                    "bb2" => StepRule::Bb2,
                    other => return Err(CliError::Config(format!("[solver.{name}] unknown step rule {other:?}"))),
                };
                c.step_bounds = (t.b_lo.unwrap_or(c.step_bounds.0), t.b_hi.unwrap_or(c.step_bounds.1));
                c.max_iters = max_iters;
                c.seed = self.seed;
                c.validate().map_err(|e| CliError::Config(format!("[solver.{name}] {e}")))?;
                SolverPlan::Oadmm(c)
            }
            "subgrad" => SolverPlan::SubGrad(BaselineConfig {
                kind: BaselineKind::SubGrad { eta0: t.eta0 },
                max_iters,
                seed: self.seed,
            }),
            "spgm-ep" => SolverPlan::SpgmEp(BaselineConfig {
                kind: BaselineKind::SpgmEp {
                    mu0: t.mu0.unwrap_or(tau_default / beta0),
                    exponent: t.mu_exponent.unwrap_or(1.0 / 3.0),
                },
                max_iters,
                seed: self.seed,
            }),
            _ => SolverPlan::FixedBetaAdmm(BaselineConfig {
                kind: BaselineKind::FixedBetaAdmm { beta: t.beta.unwrap_or(100.0) },
                max_iters,
                seed: self.seed,
            }),
        };
        if let SolverPlan::SubGrad(c) | SolverPlan::SpgmEp(c) | SolverPlan::FixedBetaAdmm(c) = &plan {
            c.validate().map_err(|e| CliError::Config(format!("[solver.{name}] {e}")))?;
        }
        Ok(plan)
    }
}
