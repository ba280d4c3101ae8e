//! Proximal catalog and Moreau-envelope machinery.
//!
//! For a `W_h`-weakly convex, `C_h`-Lipschitz `h` and `0 < mu <= 1/(2 W_h)`
//! the envelope
//!
//! ```text
//! h_mu(y) = min_u h(u) + |u - y|^2 / (2 mu)
//! ```
//!
//! is `1/mu`-smooth with gradient `(y - prox(y; mu)) / mu`. The coupled
//! problem `min_y h_mu(y) + (beta/2)|y - b|^2` has the closed form returned
//! by [`y_subproblem`].

use std::fmt::Debug;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A proper, lower semicontinuous, weakly convex function with a cheap prox.
pub trait ProxFunction<T: Real>: Debug + Send + Sync {
    fn value(&self, y: &DVector<T>) -> T;

    /// `argmin_u |u - y|^2 / (2 mu) + h(u)`.
    fn prox(&self, y: &DVector<T>, mu: T) -> DVector<T>;

    /// Lipschitz constant `C_h` on `R^dim`.
    fn lipschitz(&self, dim: usize) -> T;

    /// Weak convexity modulus `W_h` (`0` for convex functions).
    fn weak_convexity(&self) -> T;

    /// One element of the (limiting) subdifferential at `y`.
    fn subgradient(&self, y: &DVector<T>) -> DVector<T>;

    /// `dist(z, dh(y))` when it has a closed form.
    fn subdiff_dist(&self, _y: &DVector<T>, _z: &DVector<T>) -> Option<T> {
        None
    }
}

/// A convex Lipschitz function accessed through one subgradient.
pub trait SubgradFunction<T: Real>: Debug + Send + Sync {
    fn value(&self, x: &DMatrix<T>) -> T;

    fn subgradient(&self, x: &DMatrix<T>) -> DMatrix<T>;

    /// Lipschitz constant `C_g`.
    fn lipschitz(&self) -> T;
}

// --- catalog -----------------------------------------------------------------

/// `h(y) = lambda |y|_1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1Norm<T: Real> {
    pub weight: T,
}

impl<T: Real> L1Norm<T> {
    pub fn new(weight: T) -> Self {
        assert!(weight >= T::zero(), "l1 weight must be nonnegative");
        Self { weight }
    }
}

impl<T: Real> ProxFunction<T> for L1Norm<T> {
    fn value(&self, y: &DVector<T>) -> T {
        self.weight * y.lp_norm(1)
    }

    fn prox(&self, y: &DVector<T>, mu: T) -> DVector<T> {
        l1_prox(y, self.weight * mu)
    }

    /// `lambda sqrt(dim)`, the largest norm of a sign vector.
    fn lipschitz(&self, dim: usize) -> T {
        self.weight * T::of(dim as f64).sqrt()
    }

    fn weak_convexity(&self) -> T {
        T::zero()
    }

    fn subgradient(&self, y: &DVector<T>) -> DVector<T> {
        y.map(|v| sign(v) * self.weight)
    }

    fn subdiff_dist(&self, y: &DVector<T>, z: &DVector<T>) -> Option<T> {
        Some(l1_subdiff_dist(y, z, self.weight))
    }
}

/// Minimax concave penalty, coordinate-wise
///
/// ```text
/// phi(t) = lambda |t| - t^2 / (2 gamma)   if |t| <= gamma lambda
///        = gamma lambda^2 / 2             otherwise
/// ```
///
/// which is `1/gamma`-weakly convex and `lambda`-Lipschitz per coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mcp<T: Real> {
    pub lambda: T,
    pub gamma: T,
}

impl<T: Real> Mcp<T> {
    pub fn new(lambda: T, gamma: T) -> Self {
        assert!(lambda > T::zero() && gamma > T::zero(), "MCP needs lambda, gamma > 0");
        Self { lambda, gamma }
    }

    fn phi(&self, t: T) -> T {
        let a = t.abs();
        if a <= self.gamma * self.lambda {
            self.lambda * a - a * a / (T::of(2.0) * self.gamma)
        } else {
            self.gamma * self.lambda * self.lambda / T::of(2.0)
        }
    }

    fn prox_scalar(&self, v: T, mu: T) -> T {
        let a = v.abs();
        let knee = self.gamma * self.lambda;
        if mu < self.gamma {
            // Firm thresholding.
            if a <= mu * self.lambda {
                T::zero()
            } else if a <= knee {
                sign(v) * (a - mu * self.lambda) / (T::one() - mu / self.gamma)
            } else {
                v
            }
        } else {
            // Non-strongly-convex regime: the inner piece is concave, so the
            // minimizer sits at 0, at the knee, or at v itself.
            let obj = |u: T| (u - v) * (u - v) / (T::of(2.0) * mu) + self.phi(u);
            let mut best = T::zero();
            let mut best_val = obj(best);
            let mut candidates = vec![sign(v) * knee];
            if a >= knee {
                candidates.push(v);
            }
            for u in candidates {
                let val = obj(u);
                if val < best_val {
                    best = u;
                    best_val = val;
                }
            }
            best
        }
    }
}

impl<T: Real> ProxFunction<T> for Mcp<T> {
    fn value(&self, y: &DVector<T>) -> T {
        y.iter().fold(T::zero(), |acc, &v| acc + self.phi(v))
    }

    fn prox(&self, y: &DVector<T>, mu: T) -> DVector<T> {
        y.map(|v| self.prox_scalar(v, mu))
    }

    fn lipschitz(&self, dim: usize) -> T {
        self.lambda * T::of(dim as f64).sqrt()
    }

    fn weak_convexity(&self) -> T {
        T::one() / self.gamma
    }

    fn subgradient(&self, y: &DVector<T>) -> DVector<T> {
        y.map(|v| {
            if v.abs() >= self.gamma * self.lambda {
                T::zero()
            } else {
                sign(v) * self.lambda - v / self.gamma
            }
        })
    }

    /// At `0` the subdifferential is `[-lambda, lambda]`, elsewhere the
    /// derivative of `phi`.
    fn subdiff_dist(&self, y: &DVector<T>, z: &DVector<T>) -> Option<T> {
        let g = self.subgradient(y);
        let sq = y.iter().zip(z.iter()).zip(g.iter()).fold(T::zero(), |acc, ((&yi, &zi), &gi)| {
            let d = if yi == T::zero() {
                (zi.abs() - self.lambda).max(T::zero())
            } else {
                (zi - gi).abs()
            };
            acc + d * d
        });
        Some(sq.sqrt())
    }
}

/// `h == 0`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ZeroProx;

impl<T: Real> ProxFunction<T> for ZeroProx {
    fn value(&self, _y: &DVector<T>) -> T {
        T::zero()
    }

    fn prox(&self, y: &DVector<T>, _mu: T) -> DVector<T> {
        y.clone()
    }

    fn lipschitz(&self, _dim: usize) -> T {
        T::zero()
    }

    fn weak_convexity(&self) -> T {
        T::zero()
    }

    fn subgradient(&self, y: &DVector<T>) -> DVector<T> {
        DVector::zeros(y.len())
    }

    fn subdiff_dist(&self, _y: &DVector<T>, z: &DVector<T>) -> Option<T> {
        Some(z.norm())
    }
}

/// `g(X) = weight |X|_[k]`, the weighted sum of the `k` largest magnitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LargestK<T: Real> {
    pub weight: T,
    pub k: usize,
}

impl<T: Real> LargestK<T> {
    pub fn new(weight: T, k: usize) -> Self {
        Self { weight, k }
    }
}

impl<T: Real> SubgradFunction<T> for LargestK<T> {
    fn value(&self, x: &DMatrix<T>) -> T {
        self.weight * largest_k_value(x, self.k).expect("k validated at construction")
    }

    fn subgradient(&self, x: &DMatrix<T>) -> DMatrix<T> {
        largest_k_subgradient(x, self.k).expect("k validated at construction") * self.weight
    }

    /// `weight sqrt(k)`: a subgradient has at most `k` entries of size `weight`.
    fn lipschitz(&self) -> T {
        self.weight * T::of(self.k as f64).sqrt()
    }
}

/// `g == 0`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ZeroSubgrad;

impl<T: Real> SubgradFunction<T> for ZeroSubgrad {
    fn value(&self, _x: &DMatrix<T>) -> T {
        T::zero()
    }

    fn subgradient(&self, x: &DMatrix<T>) -> DMatrix<T> {
        DMatrix::zeros(x.nrows(), x.ncols())
    }

    fn lipschitz(&self) -> T {
        T::zero()
    }
}

// --- envelope operations -----------------------------------------------------

fn sign<T: Real>(v: T) -> T {
    if v > T::zero() {
        T::one()
    } else if v < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

/// Checks `0 < mu <= 1/(2 W_h)`.
pub fn check_smoothing<T: Real>(h: &dyn ProxFunction<T>, mu: T) -> Result<()> {
    let w = h.weak_convexity();
    if !(mu > T::zero()) {
        return Err(Error::SmoothingTooCoarse { mu: mu.as_f64(), limit: f64::NAN });
    }
    if w > T::zero() {
        let limit = T::one() / (T::of(2.0) * w);
        // A few ulps of slack so mu = tau / beta computed at the boundary passes.
        if mu > limit * (T::one() + T::eps() * T::of(8.0)) {
            return Err(Error::SmoothingTooCoarse { mu: mu.as_f64(), limit: limit.as_f64() });
        }
    }
    Ok(())
}

/// `h_mu(y) = h(p) + |p - y|^2 / (2 mu)` with `p = prox(y; mu)`.
pub fn moreau_value<T: Real>(h: &dyn ProxFunction<T>, mu: T, y: &DVector<T>) -> Result<T> {
    check_smoothing(h, mu)?;
    let p = h.prox(y, mu);
    Ok(h.value(&p) + (&p - y).norm_squared() / (T::of(2.0) * mu))
}

/// `grad h_mu(y) = (y - prox(y; mu)) / mu`.
pub fn moreau_grad<T: Real>(h: &dyn ProxFunction<T>, mu: T, y: &DVector<T>) -> Result<DVector<T>> {
    check_smoothing(h, mu)?;
    Ok((y - h.prox(y, mu)) / mu)
}

/// Solution of `min_y h_mu(y) + (beta/2)|y - b|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct YSubproblem<T: Real> {
    /// The minimizer.
    pub y_bar: DVector<T>,
    /// `prox(b; mu + 1/beta)`, the point where `beta (b - y_bar)` is a subgradient.
    pub y_breve: DVector<T>,
}

impl<T: Real> YSubproblem<T> {
    /// `beta (b - y_bar)`, an element of `dh(y_breve)`.
    pub fn canonical_subgradient(&self, beta: T, b: &DVector<T>) -> DVector<T> {
        (b - &self.y_bar) * beta
    }
}

/// Closed form `y_breve = prox(b; mu + 1/beta)`,
/// `y_bar = (y_breve + mu beta b) / (1 + mu beta)`.
pub fn y_subproblem<T: Real>(h: &dyn ProxFunction<T>, mu: T, beta: T, b: &DVector<T>) -> Result<YSubproblem<T>> {
    check_smoothing(h, mu)?;
    if !(beta * mu > T::one()) {
        return Err(Error::BetaTooSmall { beta: beta.as_f64(), limit: (T::one() / mu).as_f64() });
    }
    let y_breve = h.prox(b, mu + T::one() / beta);
    let mb = mu * beta;
    let y_bar = (&y_breve + b * mb) / (T::one() + mb);
    Ok(YSubproblem { y_bar, y_breve })
}

/// Soft thresholding `sign(y) max(|y| - lambda, 0)`.
pub fn l1_prox<T: Real>(y: &DVector<T>, lambda: T) -> DVector<T> {
    y.map(|v| sign(v) * (v.abs() - lambda).max(T::zero()))
}

/// Indices of the `k` largest magnitudes, ties broken by row-major index.
fn largest_k_indices<T: Real>(x: &DMatrix<T>, k: usize) -> Result<Vec<(usize, usize)>> {
    let (n, r) = x.shape();
    let total = n * r;
    if k == 0 || k > total {
        return Err(Error::KOutOfRange { k, max: total });
    }
    let mut idx: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..r).map(move |j| (i, j))).collect();
    // Row-major enumeration plus a stable sort realizes the tie-break.
    idx.sort_by(|&a, &b| {
        x[b].abs().partial_cmp(&x[a].abs()).unwrap_or(std::cmp::Ordering::Equal)
    });
    idx.truncate(k);
    Ok(idx)
}

/// `|X|_[k]`.
pub fn largest_k_value<T: Real>(x: &DMatrix<T>, k: usize) -> Result<T> {
    Ok(largest_k_indices(x, k)?.into_iter().fold(T::zero(), |acc, ij| acc + x[ij].abs()))
}

/// Element of `d|X|_[k]`: signs at the selected positions.
pub fn largest_k_subgradient<T: Real>(x: &DMatrix<T>, k: usize) -> Result<DMatrix<T>> {
    let mut out = DMatrix::zeros(x.nrows(), x.ncols());
    for ij in largest_k_indices(x, k)? {
        out[ij] = sign(x[ij]);
    }
    Ok(out)
}

/// `dist(z, d(lambda |.|_1)(y))`.
pub fn l1_subdiff_dist<T: Real>(y: &DVector<T>, z: &DVector<T>, lambda: T) -> T {
    assert_eq!(y.len(), z.len(), "subdifferential distance needs equal lengths");
    y.iter()
        .zip(z.iter())
        .fold(T::zero(), |acc, (&yi, &zi)| {
            let d = if yi != T::zero() {
                (zi - lambda * sign(yi)).abs()
            } else {
                (zi.abs() - lambda).max(T::zero())
            };
            acc + d * d
        })
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(11)
    }

    #[test]
    fn moreau_value_examples() {
        let h = L1Norm::new(1.0);
        assert_abs_diff_eq!(moreau_value(&h, 0.5, &v(&[2.0])).unwrap(), 1.75, epsilon = 1e-15);
        assert_abs_diff_eq!(moreau_value(&h, 0.5, &v(&[0.0, 0.0])).unwrap(), 0.0);
        assert_abs_diff_eq!(moreau_value(&h, 0.5, &v(&[0.3])).unwrap(), 0.09, epsilon = 1e-15);
        assert!(moreau_value(&h, 0.5, &v(&[2.0])).unwrap() <= h.value(&v(&[2.0])));
    }

    #[test]
    fn moreau_grad_examples() {
        let h = L1Norm::new(1.0);
        assert_abs_diff_eq!(moreau_grad(&h, 0.5, &v(&[2.0])).unwrap()[0], 1.0);
        assert_abs_diff_eq!(moreau_grad(&h, 0.5, &v(&[0.0])).unwrap()[0], 0.0);
    }

    #[test]
    fn smoothing_bound_is_enforced() {
        let h = Mcp::new(1.0, 2.0);
        assert!(moreau_value(&h, 1.0, &v(&[0.5])).is_ok());
        assert!(matches!(
            moreau_value(&h, 1.5, &v(&[0.5])),
            Err(Error::SmoothingTooCoarse { .. })
        ));
        assert!(moreau_grad(&h, 1.5, &v(&[0.5])).is_err());
        assert!(moreau_value(&L1Norm::new(1.0), 0.0, &v(&[0.5])).is_err());
    }

    #[test]
    fn moreau_grad_matches_central_differences() {
        let mut rng = rng();
        let catalog: Vec<Box<dyn ProxFunction<f64>>> =
            vec![Box::new(L1Norm::new(0.7)), Box::new(Mcp::new(0.8, 3.0))];
        for h in &catalog {
            for _ in 0..50 {
                let y = DVector::from_fn(5, |_, _| rng.random_range(-3.0..3.0));
                let mu = rng.random_range(0.05..0.5);
                let g = moreau_grad(h.as_ref(), mu, &y).unwrap();
                let step = 1e-6;
                for i in 0..y.len() {
                    let mut up = y.clone();
                    let mut dn = y.clone();
                    up[i] += step;
                    dn[i] -= step;
                    let fd = (moreau_value(h.as_ref(), mu, &up).unwrap()
                        - moreau_value(h.as_ref(), mu, &dn).unwrap())
                        / (2.0 * step);
                    assert!((fd - g[i]).abs() <= 1e-5 * g[i].abs().max(1.0), "{fd} vs {}", g[i]);
                }
            }
        }
    }

    #[test]
    fn y_subproblem_example() {
        let h = L1Norm::new(1.0);
        let s = y_subproblem(&h, 0.1, 20.0, &v(&[1.0])).unwrap();
        assert_abs_diff_eq!(s.y_breve[0], 0.85, epsilon = 1e-12);
        assert_abs_diff_eq!(s.y_bar[0], 0.95, epsilon = 1e-12);
        // Stationarity: clamp(y/mu, -1, 1) + beta (y - b) = 0.
        let huber_grad = (s.y_bar[0] / 0.1).clamp(-1.0, 1.0);
        assert_abs_diff_eq!(huber_grad + 20.0 * (s.y_bar[0] - 1.0), 0.0, epsilon = 1e-12);

        let s = y_subproblem(&h, 0.1, 20.0, &v(&[0.0, 0.0])).unwrap();
        assert_eq!(s.y_bar, v(&[0.0, 0.0]));
        assert_eq!(s.y_breve, v(&[0.0, 0.0]));
    }

    #[test]
    fn y_subproblem_rejects_small_beta() {
        let h = L1Norm::new(1.0);
        assert!(matches!(
            y_subproblem(&h, 0.1, 10.0, &v(&[1.0])),
            Err(Error::BetaTooSmall { .. })
        ));
    }

    #[test]
    fn y_subproblem_gap_bound() {
        let mut rng = rng();
        let catalog: Vec<Box<dyn ProxFunction<f64>>> =
            vec![Box::new(L1Norm::new(1.3)), Box::new(Mcp::new(1.0, 2.0))];
        for h in &catalog {
            for _ in 0..1000 {
                let b = DVector::from_fn(4, |_, _| rng.random_range(-5.0..5.0));
                let w = h.weak_convexity();
                let mu_max = if w > 0.0 { 0.5 / w } else { 1.0 };
                let mu = rng.random_range(0.01..mu_max);
                let beta = (1.0 / mu) * rng.random_range(1.01..20.0);
                let s = y_subproblem(h.as_ref(), mu, beta, &b).unwrap();
                let gap = (&s.y_bar - &s.y_breve).norm();
                assert!(gap <= mu * h.lipschitz(4) + 1e-12);
                let d = h.subdiff_dist(&s.y_breve, &s.canonical_subgradient(beta, &b)).unwrap();
                assert!(d <= 1e-8, "canonical element off the subdifferential by {d}");
            }
        }
    }

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(l1_prox(&v(&[3.0]), 1.0), v(&[2.0]));
        assert_eq!(l1_prox(&v(&[-0.5]), 1.0), v(&[0.0]));
        assert_eq!(l1_prox(&v(&[-3.0]), 1.0), v(&[-2.0]));
    }

    #[test]
    fn soft_threshold_beats_grid_search() {
        let mut rng = rng();
        let lambda = 0.6;
        let y = DVector::from_fn(6, |_, _| rng.random_range(-2.0..2.0));
        let p = l1_prox(&y, lambda);
        for i in 0..y.len() {
            let obj = |u: f64| 0.5 * (u - y[i]).powi(2) + lambda * u.abs();
            let grid_best = (0..=40_000)
                .map(|s| -2.0 + s as f64 * 1e-4)
                .map(obj)
                .fold(f64::INFINITY, f64::min);
            assert!(obj(p[i]) <= grid_best + 1e-8);
        }
    }

    #[test]
    fn mcp_prox_minimizes_scalar_problem() {
        let h = Mcp::new(1.0, 2.0);
        for &mu in &[0.3, 1.0, 1.9, 2.5] {
            for s in -30..=30 {
                let y = s as f64 * 0.15;
                let p = h.prox(&v(&[y]), mu)[0];
                let obj = |u: f64| (u - y).powi(2) / (2.0 * mu) + h.phi(u);
                let grid_best = (0..=80_000)
                    .map(|k| -6.0 + k as f64 * 1.5e-4)
                    .map(obj)
                    .fold(f64::INFINITY, f64::min);
                assert!(obj(p) <= grid_best + 1e-8, "mu {mu} y {y}: {p}");
            }
        }
    }

    #[test]
    fn largest_k_examples() {
        let x = DMatrix::from_row_slice(1, 3, &[3.0, -1.0, 2.0]);
        assert_abs_diff_eq!(largest_k_value(&x, 2).unwrap(), 5.0);
        assert_abs_diff_eq!(largest_k_value(&x, 3).unwrap(), 6.0);
        assert_eq!(
            largest_k_subgradient(&x, 2).unwrap(),
            DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 1.0])
        );
        let zero = DMatrix::<f64>::zeros(2, 2);
        assert_eq!(largest_k_subgradient(&zero, 3).unwrap(), zero);
        assert!(matches!(largest_k_value(&x, 0), Err(Error::KOutOfRange { .. })));
        assert!(matches!(largest_k_subgradient(&x, 4), Err(Error::KOutOfRange { .. })));
    }

    #[test]
    fn largest_k_ties_follow_row_major_order() {
        // Column-major storage would pick (1,0) first; row-major picks (0,1).
        let x = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.5]);
        let g = largest_k_subgradient(&x, 1).unwrap();
        assert_eq!(g, DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 0.0, 0.0]));
    }

    #[test]
    fn largest_k_matches_sort_oracle_and_convexity() {
        let mut rng = rng();
        for _ in 0..50 {
            let x: DMatrix<f64> = DMatrix::from_fn(4, 3, |_, _| rng.random_range(-1.0..1.0));
            let k = rng.random_range(1..=12);
            let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
            mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let oracle: f64 = mags[..k].iter().sum();
            assert_abs_diff_eq!(largest_k_value(&x, k).unwrap(), oracle, epsilon = 1e-12);

            let g = largest_k_subgradient(&x, k).unwrap();
            assert_abs_diff_eq!(g.dot(&x), oracle, epsilon = 1e-12);
            for _ in 0..100 {
                let y = DMatrix::from_fn(4, 3, |_, _| rng.random_range(-1.0..1.0));
                let lhs = largest_k_value(&y, k).unwrap();
                assert!(lhs >= oracle + g.dot(&(&y - &x)) - 1e-12);
            }
        }
    }

    #[test]
    fn subdiff_dist_examples() {
        let lambda = 0.8;
        assert_abs_diff_eq!(l1_subdiff_dist(&v(&[1.0]), &v(&[lambda]), lambda), 0.0);
        assert_abs_diff_eq!(l1_subdiff_dist(&v(&[0.0]), &v(&[0.5 * lambda]), lambda), 0.0);
        assert_abs_diff_eq!(l1_subdiff_dist(&v(&[-2.0]), &v(&[0.2]), lambda), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn subdiff_dist_matches_interval_projection() {
        let mut rng = rng();
        let lambda = 0.5;
        for _ in 0..200 {
            let y: DVector<f64> = DVector::from_fn(5, |_, _| {
                if rng.random_bool(0.4) { 0.0 } else { rng.random_range(-1.0..1.0) }
            });
            let z: DVector<f64> = DVector::from_fn(5, |_, _| rng.random_range(-1.5..1.5));
            let mut sq = 0.0f64;
            for i in 0..5 {
                let (lo, hi) = if y[i] > 0.0 {
                    (lambda, lambda)
                } else if y[i] < 0.0 {
                    (-lambda, -lambda)
                } else {
                    (-lambda, lambda)
                };
                let proj = z[i].clamp(lo, hi);
                sq += (z[i] - proj).powi(2);
            }
            assert_abs_diff_eq!(l1_subdiff_dist(&y, &z, lambda), sq.sqrt(), epsilon = 1e-12);
        }
    }

    #[test]
    fn catalog_constants() {
        let h = L1Norm::new(2.0);
        assert_abs_diff_eq!(ProxFunction::<f64>::lipschitz(&h, 9), 6.0);
        let g = LargestK::new(2.0, 4);
        assert_abs_diff_eq!(SubgradFunction::<f64>::lipschitz(&g), 4.0);
        let m = Mcp::new(1.0, 4.0);
        assert_abs_diff_eq!(ProxFunction::<f64>::weak_convexity(&m), 0.25);
    }
}
