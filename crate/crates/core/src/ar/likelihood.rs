//! Approximate Gaussian AR log-likelihood, its analytic derivatives, and the
//! sample MCRB built from them.
//!
//! Everything is expressed through the `(m+1)×(m+1)` matrix
//! `Q = T·R̂_{m+1} − X₁ᵀX₁ − X₂ᵀX₂`, so the `(T+m)×(m+1)` data matrix never
//! has to be formed outside of [`build_edge_matrices`].

use nalgebra::{DMatrix, DVector};

use super::autocov::{sample_autocov, ArFit};
use crate::error::{Error, Result};
use crate::mcrb::{sandwich_mcrb, SandwichPair};
use crate::scalar::Real;

/// The data matrix `X` (`X[i][j] = x_{i−j}`, zero outside `0..T`) and the two
/// `m×(m+1)` edge blocks built from the first and last `m` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMatrices<T: Real> {
    pub x: DMatrix<T>,
    pub x1: DMatrix<T>,
    pub x2: DMatrix<T>,
}

impl<T: Real> EdgeMatrices<T> {
    pub fn order(&self) -> usize {
        self.x.ncols() - 1
    }

    /// First `m` columns of `X`.
    pub fn xt(&self) -> DMatrix<T> {
        self.x.columns(0, self.order()).into_owned()
    }

    pub fn xt1(&self) -> DMatrix<T> {
        let m = self.order();
        self.x1.view((0, 0), (m, m)).into_owned()
    }

    pub fn xt2(&self) -> DMatrix<T> {
        let m = self.order();
        self.x2.view((0, 0), (m, m)).into_owned()
    }
}

fn check_length(len: usize, m: usize) -> Result<()> {
    if len < 3 * m + 1 {
        return Err(Error::TooFewSamples { needed: 3 * m + 1, order: m, got: len });
    }
    Ok(())
}

pub fn build_edge_matrices<T: Real>(x: &[T], m: usize) -> Result<EdgeMatrices<T>> {
    let n = x.len();
    check_length(n, m)?;
    let big = DMatrix::from_fn(n + m, m + 1, |i, j| if i >= j && i - j < n { x[i - j] } else { T::zero() });
    let x1 = DMatrix::from_fn(m, m + 1, |r, c| if r >= c { x[r - c] } else { T::zero() });
    let x2 = DMatrix::from_fn(m, m + 1, |r, c| if r >= c { x[n - 1 - (r - c)] } else { T::zero() });
    Ok(EdgeMatrices { x: big, x1, x2 })
}

/// `Q = T·R̂_{m+1} − X₁ᵀX₁ − X₂ᵀX₂` from autocovariances and the edge samples.
pub fn approx_quadratic<T: Real>(x: &[T], m: usize) -> Result<DMatrix<T>> {
    check_length(x.len(), m)?;
    let r = sample_autocov(x, m)?;
    Ok(quadratic_with_autocov(x, &r, m))
}

/// [`approx_quadratic`] given autocovariances up to at least lag `m`.
pub(crate) fn quadratic_with_autocov<T: Real>(x: &[T], r: &[T], m: usize) -> DMatrix<T> {
    let n = x.len();
    let t = T::from_usize_lossy(n);
    let mut q = DMatrix::from_fn(m + 1, m + 1, |i, j| t * r[i.abs_diff(j)]);
    for c in 0..=m {
        for d in c..=m {
            let mut edge = T::zero();
            for row in d..m {
                edge += x[row - c] * x[row - d] + x[n - 1 - (row - c)] * x[n - 1 - (row - d)];
            }
            q[(c, d)] -= edge;
            if c != d {
                q[(d, c)] -= edge;
            }
        }
    }
    q
}

fn check_variance<T: Real>(var: T) -> Result<()> {
    if var > T::zero() {
        Ok(())
    } else {
        Err(Error::NonPositiveVariance)
    }
}

fn extended<T: Real>(coeffs_rev: &[T]) -> DVector<T> {
    let m = coeffs_rev.len();
    DVector::from_fn(m + 1, |i, _| if i < m { coeffs_rev[i] } else { T::one() })
}

/// Approximate log-likelihood at `σ²` and `a = [a_m, …, a_1]`.
pub fn loglik_approx<T: Real>(innov_var: T, coeffs_rev: &[T], x: &[T]) -> Result<T> {
    check_variance(innov_var)?;
    let q = approx_quadratic(x, coeffs_rev.len())?;
    Ok(loglik_from_quadratic(innov_var, coeffs_rev, &q, x.len()))
}

fn loglik_from_quadratic<T: Real>(innov_var: T, coeffs_rev: &[T], q: &DMatrix<T>, n: usize) -> T {
    let v = extended(coeffs_rev);
    let s = v.dot(&(q * &v));
    let t = T::from_usize_lossy(n);
    -t / T::lit(2.0) * (T::two_pi() * innov_var).ln() - s / (T::lit(2.0) * innov_var)
}

/// Gradient and Hessian of [`loglik_approx`] in the ordering `[σ², a_m, …, a_1]`.
pub fn score_and_hessian<T: Real>(innov_var: T, coeffs_rev: &[T], x: &[T]) -> Result<(DVector<T>, DMatrix<T>)> {
    check_variance(innov_var)?;
    let q = approx_quadratic(x, coeffs_rev.len())?;
    Ok(derivatives_from_quadratic(innov_var, coeffs_rev, &q, x.len()))
}

fn derivatives_from_quadratic<T: Real>(var: T, coeffs_rev: &[T], q: &DMatrix<T>, n: usize) -> (DVector<T>, DMatrix<T>) {
    let m = coeffs_rev.len();
    let v = extended(coeffs_rev);
    let qv = q * &v;
    let s = v.dot(&qv);
    let t = T::from_usize_lossy(n);
    let two = T::lit(2.0);
    let var2 = var * var;

    let mut grad = DVector::zeros(m + 1);
    grad[0] = -t / (two * var) + s / (two * var2);
    for j in 0..m {
        grad[j + 1] = -qv[j] / var;
    }

    let mut hess = DMatrix::zeros(m + 1, m + 1);
    hess[(0, 0)] = t / (two * var2) - s / (var2 * var);
    for j in 0..m {
        let cross = qv[j] / var2;
        hess[(0, j + 1)] = cross;
        hess[(j + 1, 0)] = cross;
        for i in 0..m {
            hess[(i + 1, j + 1)] = -q[(i, j)] / var;
        }
    }
    (grad, hess)
}

/// Exact maximizer of [`loglik_approx`] over AR(m) parameters.
pub fn approx_ml_fit<T: Real>(x: &[T], m: usize) -> Result<ArFit<T>> {
    let q = approx_quadratic(x, m)?;
    let qaa = q.view((0, 0), (m, m)).into_owned();
    let rhs = -q.view((0, m), (m, 1)).into_owned();
    let a_rev = if m == 0 {
        DVector::zeros(0)
    } else {
        let sol = qaa.cholesky().ok_or(Error::SingularMatrix { condition: f64::INFINITY })?.solve(&rhs);
        DVector::from_iterator(m, sol.iter().copied())
    };
    let v = extended(a_rev.as_slice());
    let var = v.dot(&(&q * &v)) / T::from_usize_lossy(x.len());
    let forward: Vec<T> = a_rev.iter().rev().copied().collect();
    ArFit::from_coeffs(var, &forward)
}

/// How the `B` matrix of the sample sandwich is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BMode {
    /// `Σ_t ∇ℓ_t ∇ℓ_tᵀ` over per-sample conditional Gaussian log-densities.
    #[default]
    PerSampleScore,
    /// One outer product of the full-data gradient. At a maximizer this is
    /// (numerically) zero.
    ScoreOuterProduct,
}

/// Per-sample score rows `∂ℓ_t/∂θ` for `t ∈ rows`, one row per sample.
pub(crate) fn score_rows<T: Real>(fit: &ArFit<T>, x: &[T], rows: &[usize]) -> DMatrix<T> {
    let m = fit.order();
    let var = fit.innov_var();
    let a_rev = fit.coeffs_rev();
    let inv_var = T::one() / var;
    let half_inv_var2 = inv_var * inv_var / T::lit(2.0);
    let mut z = DMatrix::zeros(rows.len(), m + 1);
    for (r, &t) in rows.iter().enumerate() {
        let past = &x[t - m..t];
        let e = x[t] + past.iter().zip(a_rev.iter()).map(|(&xv, &a)| xv * a).sum::<T>();
        z[(r, 0)] = (e * e - var) * half_inv_var2;
        let w = -e * inv_var;
        for (j, &xv) in past.iter().enumerate() {
            z[(r, j + 1)] = w * xv;
        }
    }
    z
}

pub(crate) const SCORE_BLOCK: usize = 2048;

/// `Σ_t s_t s_tᵀ` with `s_t` the score of `log N(x_t; −Σ a_k x_{t−k}, σ²)`.
fn per_sample_gram<T: Real>(fit: &ArFit<T>, x: &[T]) -> DMatrix<T> {
    let m = fit.order();
    let mut gram = DMatrix::zeros(m + 1, m + 1);
    let rows: Vec<usize> = (m..x.len()).collect();
    for chunk in rows.chunks(SCORE_BLOCK) {
        let z = score_rows(fit, x, chunk);
        gram.gemm_tr(T::one(), &z, &z, T::one());
    }
    gram
}

pub fn sample_sandwich_pair<T: Real>(fit: &ArFit<T>, x: &[T], mode: BMode) -> Result<SandwichPair<T>> {
    let q = approx_quadratic(x, fit.order())?;
    pair_with_quadratic(fit, x, &q, mode)
}

pub(crate) fn pair_with_quadratic<T: Real>(fit: &ArFit<T>, x: &[T], q: &DMatrix<T>, mode: BMode) -> Result<SandwichPair<T>> {
    let (grad, hess) = derivatives_from_quadratic(fit.innov_var(), fit.coeffs_rev().as_slice(), q, x.len());
    let b = match mode {
        BMode::PerSampleScore => per_sample_gram(fit, x),
        BMode::ScoreOuterProduct => &grad * grad.transpose(),
    };
    SandwichPair::new(hess, b)
}

/// Sample MCRB `Â⁻¹B̂Â⁻¹` for the AR parameters `[σ², a_m, …, a_1]`.
pub fn sample_mcrb<T: Real>(fit: &ArFit<T>, x: &[T], mode: BMode) -> Result<DMatrix<T>> {
    sandwich_mcrb(&sample_sandwich_pair(fit, x, mode)?)
}
