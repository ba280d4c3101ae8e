//! Primitives on the Stiefel manifold `St(n, r) = {X in R^{n x r} : X^T X = I_r}`.
//!
//! Everything here works with thin factorizations only; no `n x n` matrix is
//! ever formed, so the cost stays `O(n r^2)` for `n >> r`.
//!
//! The tangent space at `X` is `T_X = {D : X^T D + D^T X = 0}` and its
//! orthogonal projection is `D - X sym(X^T D)`.

use nalgebra::{DMatrix, SymmetricEigen, QR, SVD};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{shape_mismatch, Error, Result};
use crate::scalar::Real;

/// Feasibility tolerance for `|X^T X - I|_F`.
pub fn feasibility_tol<T: Real>() -> T {
    T::of(1e-10).max(T::eps() * T::of(1e3))
}

fn rank_tol<T: Real>() -> T {
    T::of(1e-12).max(T::eps() * T::of(100.0))
}

/// `|X^T X - I_r|_F`.
pub fn orthogonality_residual<T: Real>(m: &DMatrix<T>) -> T {
    let mut gram = m.tr_mul(m);
    for i in 0..gram.ncols() {
        gram[(i, i)] -= T::one();
    }
    gram.norm()
}

/// Frobenius inner product `<A, B> = tr(A^T B)`.
#[inline]
pub fn inner<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> T {
    a.dot(b)
}

fn sym<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    (m + m.transpose()) * T::of(0.5)
}

/// A matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct StiefelPoint<T: Real> {
    data: DMatrix<T>,
}

impl<T: Real> StiefelPoint<T> {
    /// Wraps `data`, checking `n >= r >= 1` and orthonormality of the columns.
    pub fn new(data: DMatrix<T>) -> Result<Self> {
        let (n, r) = data.shape();
        if r == 0 || n < r {
            return Err(Error::InvalidDimensions(format!(
                "Stiefel point needs n >= r >= 1, got {n}x{r}"
            )));
        }
        let residual = orthogonality_residual(&data);
        if !(residual <= feasibility_tol::<T>()) {
            return Err(Error::NotOnManifold { residual: residual.as_f64() });
        }
        Ok(Self { data })
    }

    /// The first `r` columns of the `n x n` identity.
    pub fn identity(n: usize, r: usize) -> Result<Self> {
        Self::new(DMatrix::identity(n, r))
    }

    /// Projection of an i.i.d. standard normal matrix.
    pub fn random<R: Rng + ?Sized>(n: usize, r: usize, rng: &mut R) -> Result<Self> {
        project_to_stiefel(&gaussian_matrix(n, r, rng))
    }

    pub(crate) fn from_raw(data: DMatrix<T>) -> Self {
        debug_assert!(
            orthogonality_residual(&data) <= feasibility_tol::<T>(),
            "lost feasibility: {}",
            orthogonality_residual(&data)
        );
        Self { data }
    }

    #[inline]
    pub fn matrix(&self) -> &DMatrix<T> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.data
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    #[inline]
    pub fn r(&self) -> usize {
        self.data.ncols()
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        self.data.shape()
    }

    pub fn feasibility(&self) -> T {
        orthogonality_residual(&self.data)
    }

    fn check_shape(&self, m: &DMatrix<T>) -> Result<()> {
        if m.shape() != self.shape() {
            return Err(shape_mismatch(self.shape(), m.shape()));
        }
        Ok(())
    }
}

/// Element of the tangent space at the point it was built for.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector<T: Real> {
    data: DMatrix<T>,
}

impl<T: Real> TangentVector<T> {
    /// Checks `|X^T D + D^T X|_F <= 1e-8 max(1, |D|_F)` before wrapping.
    pub fn new(base: &StiefelPoint<T>, data: DMatrix<T>) -> Result<Self> {
        base.check_shape(&data)?;
        let xtd = base.data.tr_mul(&data);
        let defect = (&xtd + xtd.transpose()).norm();
        let tol = T::of(1e-8).max(T::eps() * T::of(1e4)) * T::one().max(data.norm());
        if !(defect <= tol) {
            return Err(Error::InvalidDimensions(format!(
                "matrix is not tangent: |X^T D + D^T X|_F = {defect}"
            )));
        }
        Ok(Self { data })
    }

    pub fn zeros(base: &StiefelPoint<T>) -> Self {
        Self { data: DMatrix::zeros(base.n(), base.r()) }
    }

    #[inline]
    pub fn matrix(&self) -> &DMatrix<T> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.data
    }

    pub fn norm(&self) -> T {
        self.data.norm()
    }

    pub fn scale(&self, s: T) -> Self {
        Self { data: &self.data * s }
    }
}

/// Nearest point of the manifold in Frobenius norm: `U V^T` from the thin
/// SVD `M = U diag(s) V^T`.
pub fn project_to_stiefel<T: Real>(m: &DMatrix<T>) -> Result<StiefelPoint<T>> {
    let (n, r) = m.shape();
    if r == 0 || n < r {
        return Err(Error::InvalidDimensions(format!(
            "projection needs n >= r >= 1, got {n}x{r}"
        )));
    }
    if m.iter().any(|v| !v.is_finite_value()) {
        return Err(Error::NonFinite("projection input".into()));
    }
    let svd = SVD::new(m.clone(), true, true);
    let s_max = svd.singular_values.max();
    let s_min = svd.singular_values.min();
    if !(s_max > T::zero()) || s_min <= rank_tol::<T>() * s_max {
        let ratio = if s_max > T::zero() { (s_min / s_max).as_f64() } else { 0.0 };
        return Err(Error::RankDeficient { ratio });
    }
    let u = svd.u.expect("U requested");
    let v_t = svd.v_t.expect("V^T requested");
    Ok(StiefelPoint::from_raw(u * v_t))
}

/// `D - (1/2) X (D^T X + X^T D)`.
pub fn tangent_project<T: Real>(x: &StiefelPoint<T>, delta: &DMatrix<T>) -> Result<TangentVector<T>> {
    x.check_shape(delta)?;
    let s = sym(&x.data.tr_mul(delta));
    Ok(TangentVector { data: delta - &x.data * s })
}

/// Polar retraction `(X + D)(I_r + D^T D)^{-1/2}`.
pub fn polar_retraction<T: Real>(x: &StiefelPoint<T>, delta: &TangentVector<T>) -> StiefelPoint<T> {
    assert_eq!(x.shape(), delta.data.shape(), "tangent vector shape");
    let r = x.r();
    let mut gram = delta.data.tr_mul(&delta.data);
    for i in 0..r {
        gram[(i, i)] += T::one();
    }
    // I + D^T D is symmetric positive definite with eigenvalues >= 1.
    let eig = SymmetricEigen::new(gram);
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| T::one() / l.sqrt()));
    let factor = &eig.eigenvectors * inv_sqrt * eig.eigenvectors.transpose();
    StiefelPoint::from_raw((&x.data + &delta.data) * factor)
}

/// QR retraction `qf(X + D)` with the diagonal of `R` made positive.
pub fn qr_retraction<T: Real>(x: &StiefelPoint<T>, delta: &TangentVector<T>) -> Result<StiefelPoint<T>> {
    x.check_shape(&delta.data)?;
    let qr = QR::new(&x.data + &delta.data);
    let mut q = qr.q();
    let rr = qr.r();
    let diag_max = (0..rr.nrows()).map(|i| rr[(i, i)].abs()).fold(T::zero(), |a, b| a.max(b));
    for j in 0..rr.ncols() {
        let d = rr[(j, j)];
        if !(diag_max > T::zero()) || d.abs() <= rank_tol::<T>() * diag_max {
            let ratio = if diag_max > T::zero() { (d.abs() / diag_max).as_f64() } else { 0.0 };
            return Err(Error::RankDeficient { ratio });
        }
        if d < T::zero() {
            q.column_mut(j).neg_mut();
        }
    }
    Ok(StiefelPoint::from_raw(q))
}

/// `G_rho = G - rho X G^T X - (1 - rho) X X^T G`.
pub fn descent_direction<T: Real>(x: &StiefelPoint<T>, g: &DMatrix<T>, rho: T) -> Result<DMatrix<T>> {
    x.check_shape(g)?;
    if !(rho > T::zero()) {
        return Err(Error::InvalidDimensions(format!("rho must be positive, got {rho}")));
    }
    let w = x.data.tr_mul(g);
    let mix = w.transpose() * rho + w * (T::one() - rho);
    Ok(g - &x.data * mix)
}

/// `|G - X G^T X|_F`, an upper bound on `dist(0, N_X + G)`.
pub fn stationarity_residual<T: Real>(x: &StiefelPoint<T>, g: &DMatrix<T>) -> Result<T> {
    x.check_shape(g)?;
    let w = x.data.tr_mul(g);
    Ok((g - &x.data * w.transpose()).norm())
}

/// i.i.d. standard normal matrix.
pub fn gaussian_matrix<T: Real, R: Rng + ?Sized>(n: usize, r: usize, rng: &mut R) -> DMatrix<T> {
    // Column-major fill order keeps the draw sequence stable across types.
    DMatrix::from_fn(n, r, |_, _| T::of(rng.sample::<f64, _>(StandardNormal)))
}
