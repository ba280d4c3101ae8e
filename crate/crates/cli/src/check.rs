//! Self-check of the library invariants on a small seeded instance.

use nalgebra::{DMatrix, DVector};
use oadmm_core::data::{load_or_synthesize_data, Centering, DatasetDescriptor};
use oadmm_core::prox::{moreau_grad, moreau_value, y_subproblem, L1Norm, Mcp, ProxFunction};
use oadmm_core::stiefel::{descent_direction, gaussian_matrix, polar_retraction, tangent_project};
use oadmm_core::{make_sparse_pca, solve_with_observer, SolverConfig, StiefelPoint, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::CliError;
use crate::run::initial_point;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn result(name: &'static str, worst: f64, limit: f64) -> CheckResult {
    CheckResult { name, passed: worst <= limit, detail: format!("worst {worst:.3e} (limit {limit:.0e})") }
}

fn envelope_bounds(rng: &mut ChaCha8Rng) -> Result<f64, CliError> {
    let hs: [Box<dyn ProxFunction<f64>>; 2] = [Box::new(L1Norm::new(0.7)), Box::new(Mcp::new(0.7, 2.0))];
    let mut worst = f64::NEG_INFINITY;
    for h in &hs {
        let cap = if h.weak_convexity() > 0.0 { 0.5 / h.weak_convexity() } else { 1.0 };
        for _ in 0..200 {
            let y = DVector::from_fn(6, |_, _| rng.random_range(-3.0..3.0));
            let mu1 = rng.random_range(0.01..cap);
            let mu2 = rng.random_range(0.001..mu1);
            let c = h.lipschitz(6);
            let gap = moreau_value(h.as_ref(), mu2, &y)? - moreau_value(h.as_ref(), mu1, &y)?;
            let upper = (mu1 / (2.0 * mu2)).min(1.0) * (mu1 - mu2) * c * c;
            let drift = (moreau_grad(h.as_ref(), mu1, &y)? - moreau_grad(h.as_ref(), mu2, &y)?).norm();
            worst = worst.max(-gap).max(gap - upper).max(drift - (mu1 / mu2 - 1.0) * c);
        }
    }
    Ok(worst)
}

fn y_step_optimality(rng: &mut ChaCha8Rng) -> Result<f64, CliError> {
    let h = L1Norm::new(0.5);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let b = DVector::from_fn(5, |_, _| rng.random_range(-2.0..2.0));
        let mu = rng.random_range(0.01..1.0);
        let beta = rng.random_range(1.1..10.0) / mu;
        let s = y_subproblem(&h, mu, beta, &b)?;
        let stat = moreau_grad(&h, mu, &s.y_bar)? + (&s.y_bar - &b) * beta;
        let member = h.subdiff_dist(&s.y_breve, &s.canonical_subgradient(beta, &b)).unwrap_or(f64::INFINITY);
        worst = worst.max(stat.norm()).max(member);
    }
    Ok(worst)
}

fn manifold_bounds(rng: &mut ChaCha8Rng) -> Result<f64, CliError> {
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..200 {
        let x = StiefelPoint::random(7, 3, rng)?;
        let g: DMatrix<f64> = gaussian_matrix(7, 3, rng);
        let rho = rng.random_range(0.1..3.0);
        let proj = tangent_project(&x, &g)?;
        worst = worst.max(proj.norm() - g.norm());
        let gr = descent_direction(&x, &g, rho)?;
        let g1 = descent_direction(&x, &g, 1.0)?;
        let half = descent_direction(&x, &g, 0.5)?;
        let sq = gr.norm_squared();
        worst = worst
            .max(sq - 1f64.max(2.0 * rho) * g.dot(&gr))
            .max(1f64.min(rho * rho) * g1.norm_squared() - sq)
            .max(1f64.min(2.0 * rho) * half.norm() - gr.norm())
            .max(gr.norm() - 1f64.max(2.0 * rho) * half.norm());
        let step = tangent_project(&x, &(g * 1e-3))?;
        worst = worst.max(polar_retraction(&x, &step).feasibility() - 1e-10);
    }
    Ok(worst)
}

/// Runs every check; the command fails if any check fails.
pub fn run_checks() -> Result<Vec<CheckResult>, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut out = vec![
        result("moreau envelope bounds", envelope_bounds(&mut rng)?, 1e-9),
        result("y-step optimality", y_step_optimality(&mut rng)?, 1e-8),
        result("manifold inequalities", manifold_bounds(&mut rng)?, 1e-9),
    ];

    let d = load_or_synthesize_data(&DatasetDescriptor::randn(60, 20, 11), Centering::Mean)?;
    let prob = make_sparse_pca(d, 5.0, 8, 4)?;
    for variant in [Variant::EuclideanProjection, Variant::RiemannianRetraction] {
        let mut cfg = SolverConfig::defaults(variant, 50.0);
        cfg.max_iters = 300;
        let (x0, y0, z0) = initial_point(&prob, 11)?;
        let z_bound = z0.norm() + cfg.sigma * prob.c_h() / (2.0 - cfg.sigma);
        let (mut feas, mut dual, mut ident, mut mono) = (0.0f64, f64::NEG_INFINITY, 0.0f64, f64::NEG_INFINITY);
        let mut prev: Option<f64> = None;
        let mut failure = None;
        let run = solve_with_observer(&prob, &cfg, x0, y0, z0, |v| {
            feas = feas.max(v.state.x.feasibility());
            dual = dual.max(v.state.z.norm() - z_bound);
            match moreau_grad(prob.h.as_ref(), v.mu, &v.state.y) {
                Ok(g) => ident = ident.max((v.z_prev - (v.z_prev - &v.state.z) / cfg.sigma - g).norm()),
                Err(e) => failure = Some(e),
            }
            let theta = v.record.theta.unwrap_or(f64::NAN);
            if let Some(p) = prev {
                mono = mono.max((theta - p) / (1.0 + p.abs()));
            }
            prev = Some(theta);
        });
        if let Some(e) = failure {
            return Err(e.into());
        }
        run?;
        let tag = variant.short_name();
        out.push(CheckResult {
            name: if tag == "ep" { "solver invariants (ep)" } else { "solver invariants (rr)" },
            passed: feas <= 1e-10 && dual <= 1e-9 && ident <= 1e-8 && mono <= 1e-9,
            detail: format!("feasibility {feas:.1e}, dual excess {dual:.1e}, identity {ident:.1e}, lyapunov rise {mono:.1e}"),
        });
    }
    Ok(out)
}
