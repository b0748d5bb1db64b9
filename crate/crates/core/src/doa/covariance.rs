use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::Cplx;
use crate::error::{Error, Result};
use crate::mcrb::{MAX_CONDITION, SYMMETRY_TOL};
use crate::scalar::Real;

/// Relative diagonal loading applied to rank-deficient sample covariances.
pub const LOADING_EPS: f64 = 1e-9;

/// Complex Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix<T: Real>(DMatrix<Cplx<T>>);

impl<T: Real> HermitianMatrix<T> {
    pub fn new(m: DMatrix<Cplx<T>>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch { expected: "square matrix".into(), got: format!("{:?}", m.shape()) });
        }
        if (&m - m.adjoint()).norm() > T::lit(SYMMETRY_TOL) * m.norm() {
            return Err(Error::NotSymmetric);
        }
        Ok(Self::hermitize(m))
    }

    /// Forces exact Hermitian symmetry by averaging with the adjoint.
    pub(crate) fn hermitize(m: DMatrix<Cplx<T>>) -> Self {
        let mut h = (&m + m.adjoint()) * Cplx::new(T::lit(0.5), T::zero());
        for i in 0..h.nrows() {
            h[(i, i)].im = T::zero();
        }
        Self(h)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<Cplx<T>> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<Cplx<T>> {
        self.0
    }

    pub fn trace(&self) -> T {
        (0..self.dim()).map(|i| self.0[(i, i)].re).sum()
    }

    /// Adds `δ I`.
    pub fn loaded(&self, delta: T) -> Self {
        let n = self.dim();
        Self(&self.0 + DMatrix::<Cplx<T>>::identity(n, n) * Cplx::new(delta, T::zero()))
    }
}

/// `(1/T) Σ x_t x_tᴴ` over the columns of `x`.
pub fn sample_covariance<T: Real>(x: &DMatrix<Cplx<T>>) -> HermitianMatrix<T> {
    let t = T::from_usize_lossy(x.ncols().max(1));
    HermitianMatrix::hermitize(x * x.adjoint() / Cplx::new(t, T::zero()))
}

/// Eigendecomposition of a Hermitian PSD matrix, eigenvalues in descending
/// order. Shared by all truncation orders of the same sample covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceEigen<T: Real> {
    eigvecs: DMatrix<Cplx<T>>,
    eigvals: DVector<T>,
}

impl<T: Real> CovarianceEigen<T> {
    pub fn new(r: &HermitianMatrix<T>) -> Result<Self> {
        let n = r.dim();
        let eig = SymmetricEigen::try_new(r.as_matrix().clone(), T::default_epsilon(), 0).ok_or(Error::EigenFailure)?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap_or(std::cmp::Ordering::Equal));
        let eigvals = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i].max(T::zero())));
        let mut eigvecs = DMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            eigvecs.set_column(dst, &eig.eigenvectors.column(src));
        }
        Ok(Self { eigvecs, eigvals })
    }

    pub fn dim(&self) -> usize {
        self.eigvals.len()
    }

    pub fn eigvecs(&self) -> &DMatrix<Cplx<T>> {
        &self.eigvecs
    }

    pub fn eigvals(&self) -> &DVector<T> {
        &self.eigvals
    }

    /// `max λ / min λ`; infinite when the smallest eigenvalue is zero.
    pub fn condition(&self) -> T {
        let max = self.eigvals[0];
        let min = self.eigvals[self.dim() - 1];
        if min > T::zero() {
            max / min
        } else {
            T::max_value().expect("bounded")
        }
    }

    /// Same eigenvectors with every eigenvalue raised by `delta`.
    pub fn loaded(&self, delta: T) -> Self {
        Self { eigvecs: self.eigvecs.clone(), eigvals: self.eigvals.map(|l| l + delta) }
    }

    pub fn truncate(&self, order: usize) -> Result<TruncatedCovariance<T>> {
        let n = self.dim();
        if order >= n {
            return Err(Error::OrderOutOfRange { order, max: n - 1 });
        }
        let tail = self.eigvals.rows(order, n - order);
        let tail_var = tail.sum() / T::from_usize_lossy(n - order);
        let model_eigvals = DVector::from_fn(n, |i, _| if i < order { self.eigvals[i] } else { tail_var });
        let matrix = reconstruct(&self.eigvecs, &model_eigvals);
        Ok(TruncatedCovariance {
            eigvecs: self.eigvecs.clone(),
            eigvals: self.eigvals.clone(),
            order,
            tail_var,
            model_eigvals,
            matrix,
        })
    }

    pub fn reconstruct(&self) -> HermitianMatrix<T> {
        reconstruct(&self.eigvecs, &self.eigvals)
    }
}

fn reconstruct<T: Real>(u: &DMatrix<Cplx<T>>, vals: &DVector<T>) -> HermitianMatrix<T> {
    let mut scaled = u.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= Cplx::new(vals[j], T::zero());
    }
    HermitianMatrix::hermitize(scaled * u.adjoint())
}

/// Order-`m` covariance model: the `m` leading sample eigenvalues are kept and
/// the remaining `N − m` are replaced by their mean.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedCovariance<T: Real> {
    eigvecs: DMatrix<Cplx<T>>,
    eigvals: DVector<T>,
    order: usize,
    tail_var: T,
    model_eigvals: DVector<T>,
    matrix: HermitianMatrix<T>,
}

impl<T: Real> TruncatedCovariance<T> {
    pub fn eigvecs(&self) -> &DMatrix<Cplx<T>> {
        &self.eigvecs
    }
    /// Sample eigenvalues, descending.
    pub fn eigvals(&self) -> &DVector<T> {
        &self.eigvals
    }
    pub fn order(&self) -> usize {
        self.order
    }
    /// Mean of the `N − m` smallest eigenvalues.
    pub fn tail_var(&self) -> T {
        self.tail_var
    }
    /// `[λ_1, …, λ_m, σ̂_m², …, σ̂_m²]`
    pub fn model_eigvals(&self) -> &DVector<T> {
        &self.model_eigvals
    }
    pub fn matrix(&self) -> &HermitianMatrix<T> {
        &self.matrix
    }

    /// Reciprocal model eigenvalues, gated on the condition number.
    pub fn inverse_eigvals(&self) -> Result<DVector<T>> {
        let max = self.model_eigvals.max();
        let min = self.model_eigvals.min();
        if !(min > T::zero()) || max / min > T::lit(MAX_CONDITION) {
            let condition = if min > T::zero() { (max / min).to_f64_lossy() } else { f64::INFINITY };
            return Err(Error::SingularMatrix { condition });
        }
        Ok(self.model_eigvals.map(|l| T::one() / l))
    }

    pub fn inverse(&self) -> Result<DMatrix<Cplx<T>>> {
        let inv = self.inverse_eigvals()?;
        Ok(reconstruct(&self.eigvecs, &inv).into_inner())
    }
}

/// Eigendecomposes `r` and builds its order-`m` model.
pub fn truncate_covariance<T: Real>(r: &HermitianMatrix<T>, m: usize) -> Result<TruncatedCovariance<T>> {
    CovarianceEigen::new(r)?.truncate(m)
}

/// Inverse of a Hermitian positive-definite matrix, gated on the condition
/// number.
pub fn hermitian_inverse<T: Real>(r: &HermitianMatrix<T>) -> Result<DMatrix<Cplx<T>>> {
    let eig = CovarianceEigen::new(r)?;
    if eig.condition() > T::lit(MAX_CONDITION) {
        return Err(Error::SingularMatrix { condition: eig.condition().to_f64_lossy() });
    }
    Ok(reconstruct(&eig.eigvecs, &eig.eigvals.map(|l| T::one() / l)).into_inner())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_hermitian_psd(seed: &[f64], n: usize, shift: f64) -> HermitianMatrix<f64> {
        let g = DMatrix::from_fn(n, n, |i, j| Cplx::new(seed[2 * (i * n + j)], seed[2 * (i * n + j) + 1]));
        HermitianMatrix::hermitize(&g * g.adjoint() + DMatrix::identity(n, n) * Cplx::new(shift, 0.0))
    }

    fn rel(a: &DMatrix<Cplx<f64>>, b: &DMatrix<Cplx<f64>>) -> f64 {
        (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn sample_covariance_examples() {
        let zero = DMatrix::<Cplx<f64>>::zeros(3, 4);
        assert_eq!(sample_covariance(&zero).as_matrix(), &DMatrix::zeros(3, 3));
        let x = DMatrix::from_column_slice(2, 1, &[Cplx::new(1.0, 2.0), Cplx::new(-0.5, 0.25)]);
        assert!(rel(sample_covariance(&x).as_matrix(), &(&x * x.adjoint())) < 1e-15);
    }

    #[test]
    fn sample_covariance_trace_is_mean_energy() {
        let x = DMatrix::from_fn(4, 7, |i, j| Cplx::new((i * 7 + j) as f64 * 0.1 - 1.0, (j as f64).sin()));
        let direct: f64 = x.column_iter().map(|c| c.norm_squared()).sum::<f64>() / 7.0;
        assert!((sample_covariance(&x).trace() - direct).abs() < 1e-12 * direct);
    }

    #[test]
    fn scaled_identity_is_fixed_point() {
        let r = HermitianMatrix::hermitize(DMatrix::identity(5, 5) * Cplx::new(2.5, 0.0));
        for m in 0..5 {
            let t = truncate_covariance(&r, m).unwrap();
            assert!(rel(t.matrix().as_matrix(), r.as_matrix()) < 1e-12);
        }
    }

    #[test]
    fn order_zero_is_mean_power() {
        let seed: Vec<f64> = (0..72).map(|i| ((i * 37 % 17) as f64 - 8.0) / 5.0).collect();
        let r = random_hermitian_psd(&seed, 6, 0.0);
        let t = truncate_covariance(&r, 0).unwrap();
        let expected = DMatrix::identity(6, 6) * Cplx::new(r.trace() / 6.0, 0.0);
        assert!(rel(t.matrix().as_matrix(), &expected) < 1e-12);
    }

    #[test]
    fn full_order_reproduces_sample_covariance() {
        let seed: Vec<f64> = (0..242).map(|i| ((i * 53 % 29) as f64 - 14.0) / 7.0).collect();
        let r = random_hermitian_psd(&seed, 11, 0.1);
        let t = truncate_covariance(&r, 10).unwrap();
        assert!(rel(t.matrix().as_matrix(), r.as_matrix()) < 1e-12);
        assert!(truncate_covariance(&r, 11).is_err());
    }

    #[test]
    fn inverse_is_gated() {
        let r = HermitianMatrix::hermitize(DMatrix::from_diagonal(&DVector::from_vec(vec![
            Cplx::new(1.0, 0.0),
            Cplx::new(0.0, 0.0),
        ])));
        let t = truncate_covariance(&r, 1).unwrap();
        assert!(matches!(t.inverse(), Err(Error::SingularMatrix { .. })));
        assert!(matches!(hermitian_inverse(&r), Err(Error::SingularMatrix { .. })));
    }

    proptest! {
        #[test]
        fn truncation_invariants(seed in proptest::collection::vec(-2.0f64..2.0, 98), m in 0usize..7) {
            let r = random_hermitian_psd(&seed, 7, 0.1);
            let t = truncate_covariance(&r, m).unwrap();
            // eigenvalues descending, tail mean, trace preserved, reconstruction
            prop_assert!(t.eigvals().as_slice().windows(2).all(|w| w[0] >= w[1]));
            let tail: f64 = t.eigvals().rows(m, 7 - m).sum() / (7 - m) as f64;
            prop_assert!((t.tail_var() - tail).abs() <= 1e-12 * tail.abs().max(1.0));
            prop_assert!((t.matrix().trace() - r.trace()).abs() <= 1e-10 * r.trace());
            let m_h = t.matrix().as_matrix();
            prop_assert!((m_h - m_h.adjoint()).norm() == 0.0);
            let u = t.eigvecs();
            let rebuilt = u * DMatrix::from_diagonal(&t.model_eigvals().map(|l| Cplx::new(l, 0.0))) * u.adjoint();
            prop_assert!(rel(&rebuilt, m_h) < 1e-10);
            let inv = t.inverse().unwrap();
            prop_assert!(rel(&(&inv * m_h), &DMatrix::identity(7, 7)) < 1e-8);
        }
    }
}
