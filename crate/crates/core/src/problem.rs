//! Composite objective `F(X) = f(X) - g(X) + h(A(X))` over the Stiefel
//! manifold, and the sparse PCA instance built on it.

use std::fmt::Debug;

use nalgebra::{DMatrix, DVector, SVD};

use crate::error::{Error, Result};
use crate::prox::{L1Norm, LargestK, ProxFunction, SubgradFunction, ZeroProx, ZeroSubgrad};
use crate::scalar::Real;
use crate::stiefel::StiefelPoint;

/// Linear map `A: R^{n x r} -> R^m` with its adjoint.
pub trait LinearMap<T: Real>: Debug + Send + Sync {
    fn apply(&self, x: &DMatrix<T>) -> DVector<T>;

    fn adjoint(&self, z: &DVector<T>) -> DMatrix<T>;

    /// Upper bound `A_bar` on `|A(V)| / |V|_F`.
    fn op_norm(&self) -> T;

    /// `(n, r)` of the domain.
    fn domain(&self) -> (usize, usize);

    /// `m`.
    fn codomain(&self) -> usize;
}

/// Column-major vectorization `vec: R^{n x r} -> R^{nr}`; its own inverse
/// on the range, with `A_bar = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vectorize {
    pub n: usize,
    pub r: usize,
}

impl<T: Real> LinearMap<T> for Vectorize {
    fn apply(&self, x: &DMatrix<T>) -> DVector<T> {
        debug_assert_eq!(x.shape(), (self.n, self.r));
        DVector::from_column_slice(x.as_slice())
    }

    fn adjoint(&self, z: &DVector<T>) -> DMatrix<T> {
        debug_assert_eq!(z.len(), self.n * self.r);
        DMatrix::from_column_slice(self.n, self.r, z.as_slice())
    }

    fn op_norm(&self) -> T {
        T::one()
    }

    fn domain(&self) -> (usize, usize) {
        (self.n, self.r)
    }

    fn codomain(&self) -> usize {
        self.n * self.r
    }
}

/// `A(X) = M vec(X)` for an explicit `m x nr` matrix `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLinearMap<T: Real> {
    matrix: DMatrix<T>,
    n: usize,
    r: usize,
    norm: T,
}

impl<T: Real> DenseLinearMap<T> {
    pub fn new(matrix: DMatrix<T>, n: usize, r: usize) -> Result<Self> {
        if matrix.ncols() != n * r || matrix.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "operator is {}x{}, domain {n}x{r}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let norm = SVD::new(matrix.clone(), false, false).singular_values.max();
        Ok(Self { matrix, n, r, norm })
    }
}

impl<T: Real> LinearMap<T> for DenseLinearMap<T> {
    fn apply(&self, x: &DMatrix<T>) -> DVector<T> {
        &self.matrix * DVector::from_column_slice(x.as_slice())
    }

    fn adjoint(&self, z: &DVector<T>) -> DMatrix<T> {
        let v = self.matrix.tr_mul(z);
        DMatrix::from_column_slice(self.n, self.r, v.as_slice())
    }

    fn op_norm(&self) -> T {
        self.norm
    }

    fn domain(&self) -> (usize, usize) {
        (self.n, self.r)
    }

    fn codomain(&self) -> usize {
        self.matrix.nrows()
    }
}

/// `L_f`-smooth part of the objective.
pub trait SmoothPart<T: Real>: Debug + Send + Sync {
    fn value(&self, x: &DMatrix<T>) -> T;

    fn gradient(&self, x: &DMatrix<T>) -> DMatrix<T>;

    /// Gradient Lipschitz constant `L_f` (valid on a neighbourhood of the manifold).
    fn lipschitz(&self) -> T;

    /// Bound `C_f` on `|grad f(X)|_F` over the manifold.
    fn grad_bound(&self) -> T;
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ZeroSmooth;

impl<T: Real> SmoothPart<T> for ZeroSmooth {
    fn value(&self, _x: &DMatrix<T>) -> T {
        T::zero()
    }

    fn gradient(&self, x: &DMatrix<T>) -> DMatrix<T> {
        DMatrix::zeros(x.nrows(), x.ncols())
    }

    fn lipschitz(&self) -> T {
        T::zero()
    }

    fn grad_bound(&self) -> T {
        T::zero()
    }
}

/// Spectral radius of the region where `lipschitz()` of [`SparsePcaLoss`]
/// is certified. Extrapolated points `X + alpha (X - X_prev)` stay inside it
/// for every admissible `alpha`.
pub const SPARSE_PCA_RADIUS: f64 = 1.01;

/// `f(X) = |X X^T D - D|_F^2 / (2 m)` for data `D in R^{n x m}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePcaLoss<T: Real> {
    data: DMatrix<T>,
    samples: usize,
    lipschitz: T,
    grad_bound: T,
}

impl<T: Real> SparsePcaLoss<T> {
    pub fn new(data: DMatrix<T>, r: usize) -> Result<Self> {
        let (n, samples) = data.shape();
        if n == 0 || samples == 0 {
            return Err(Error::EmptyData);
        }
        let spectral = SVD::new(data.clone(), false, false).singular_values.max();
        let frob = data.norm();
        let inv_m = T::one() / T::of(samples as f64);
        // With E = X X^T - I and C = D D^T, grad f = (E C X + C E X)/m. For
        // |X|_2 <= R: |E|_2 <= max(1, R^2 - 1) and |dE|_F <= 2R |dX|_F, so the
        // directional derivative of the gradient is bounded by
        // |C|_2 (4R^2 + 2 max(1, R^2 - 1)) |dX|_F / m.
        let radius = T::of(SPARSE_PCA_RADIUS);
        let r2 = radius * radius;
        let e_bound = T::one().max(r2 - T::one());
        let lipschitz = spectral * spectral * inv_m * (T::of(4.0) * r2 + T::of(2.0) * e_bound);
        // On the manifold |E|_2 <= 1, |E D|_F <= |D|_F and |D^T X|_F <= sqrt(r)|D|_2.
        let cross = frob.min(T::of(r as f64).sqrt() * spectral);
        let grad_bound = T::of(2.0) * inv_m * spectral * cross;
        Ok(Self { data, samples, lipschitz, grad_bound })
    }

    pub fn data(&self) -> &DMatrix<T> {
        &self.data
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    /// `X X^T D - D`.
    fn residual(&self, x: &DMatrix<T>) -> DMatrix<T> {
        let proj = x.tr_mul(&self.data);
        x * proj - &self.data
    }
}

impl<T: Real> SmoothPart<T> for SparsePcaLoss<T> {
    fn value(&self, x: &DMatrix<T>) -> T {
        self.residual(x).norm_squared() / (T::of(2.0) * T::of(self.samples as f64))
    }

    /// `(R D^T X + D R^T X) / m` with `R = X X^T D - D`.
    fn gradient(&self, x: &DMatrix<T>) -> DMatrix<T> {
        let res = self.residual(x);
        let dtx = self.data.tr_mul(x);
        let rtx = res.tr_mul(x);
        (res * dtx + &self.data * rtx) / T::of(self.samples as f64)
    }

    fn lipschitz(&self) -> T {
        self.lipschitz
    }

    fn grad_bound(&self) -> T {
        self.grad_bound
    }
}

/// `min_{X^T X = I} f(X) - g(X) + h(A(X))`.
#[derive(Debug)]
pub struct CompositeProblem<T: Real> {
    pub f: Box<dyn SmoothPart<T>>,
    pub g: Box<dyn SubgradFunction<T>>,
    pub h: Box<dyn ProxFunction<T>>,
    pub a: Box<dyn LinearMap<T>>,
    n: usize,
    r: usize,
    m: usize,
}

impl<T: Real> CompositeProblem<T> {
    pub fn new(
        f: Box<dyn SmoothPart<T>>,
        g: Box<dyn SubgradFunction<T>>,
        h: Box<dyn ProxFunction<T>>,
        a: Box<dyn LinearMap<T>>,
    ) -> Result<Self> {
        let (n, r) = a.domain();
        let m = a.codomain();
        if r == 0 || n < r || m == 0 {
            return Err(Error::DimensionMismatch(format!(
                "linear map domain {n}x{r} -> R^{m} is not a valid Stiefel problem"
            )));
        }
        Ok(Self { f, g, h, a, n, r, m })
    }

    /// `f = g = h = 0` with `A = vec`.
    pub fn null(n: usize, r: usize) -> Result<Self> {
        Self::new(
            Box::new(ZeroSmooth),
            Box::new(ZeroSubgrad),
            Box::new(ZeroProx),
            Box::new(Vectorize { n, r }),
        )
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn r(&self) -> usize {
        self.r
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    /// `C_h` on `R^m`.
    pub fn c_h(&self) -> T {
        self.h.lipschitz(self.m)
    }

    pub fn a_bar(&self) -> T {
        self.a.op_norm()
    }

    pub fn check_point(&self, x: &StiefelPoint<T>) -> Result<()> {
        if x.shape() != (self.n, self.r) {
            return Err(Error::DimensionMismatch(format!(
                "iterate is {}x{}, problem expects {}x{}",
                x.n(),
                x.r(),
                self.n,
                self.r
            )));
        }
        Ok(())
    }

    pub fn check_vector(&self, v: &DVector<T>, what: &str) -> Result<()> {
        if v.len() != self.m {
            return Err(Error::DimensionMismatch(format!(
                "{what} has length {}, expected {}",
                v.len(),
                self.m
            )));
        }
        Ok(())
    }

    /// `F(X) = f(X) - g(X) + h(A(X))`.
    pub fn objective(&self, x: &StiefelPoint<T>) -> Result<T> {
        self.check_point(x)?;
        Ok(self.objective_unchecked(x.matrix()))
    }

    pub(crate) fn objective_unchecked(&self, x: &DMatrix<T>) -> T {
        self.f.value(x) - self.g.value(x) + self.h.value(&self.a.apply(x))
    }
}

/// Sparse PCA with the `l1 - largest-k` penalty:
///
/// ```text
/// min |X X^T D - D|_F^2 / (2 m) + rho (|X|_1 - |X|_[k])   s.t. X^T X = I_r
/// ```
///
/// with `g = rho |.|_[k]`, `h = rho |.|_1` and `A = vec`.
pub fn make_sparse_pca<T: Real>(data: DMatrix<T>, rho: T, k: usize, r: usize) -> Result<CompositeProblem<T>> {
    let (n, samples) = data.shape();
    if n == 0 || samples == 0 {
        return Err(Error::EmptyData);
    }
    if r == 0 || r > n {
        return Err(Error::InvalidDimensions(format!("need 1 <= r <= n = {n}, got r = {r}")));
    }
    if k == 0 || k > n * r {
        return Err(Error::KOutOfRange { k, max: n * r });
    }
    if !(rho >= T::zero()) {
        return Err(Error::ConfigInvalid(format!("penalty weight must be nonnegative, got {rho}")));
    }
    CompositeProblem::new(
        Box::new(SparsePcaLoss::new(data, r)?),
        Box::new(LargestK::new(rho, k)),
        Box::new(L1Norm::new(rho)),
        Box::new(Vectorize { n, r }),
    )
}
