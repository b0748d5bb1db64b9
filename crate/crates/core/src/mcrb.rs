//! Model-agnostic misspecified Cramér-Rao bound machinery.
//!
//! A candidate model is scored by the sum of a squared pseudo-true bias and the
//! trace of its (mapped) sandwich covariance `A⁻¹ B A⁻¹`; the candidate with the
//! smallest total wins.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest condition number accepted for the `A` matrix before inversion.
pub const MAX_CONDITION: f64 = 1e12;

/// Relative tolerance for symmetry / semidefiniteness checks.
pub const SYMMETRY_TOL: f64 = 1e-9;

/// Expected Hessian `A` and expected score outer product `B` of a candidate
/// log-likelihood, evaluated at the (pseudo-true or estimated) parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct SandwichPair<T: Real> {
    a: DMatrix<T>,
    b: DMatrix<T>,
}

impl<T: Real> SandwichPair<T> {
    pub fn new(a: DMatrix<T>, b: DMatrix<T>) -> Result<Self> {
        if !a.is_square() || a.shape() != b.shape() {
            return Err(Error::DimensionMismatch {
                expected: format!("two equal square matrices, A is {:?}", a.shape()),
                got: format!("B is {:?}", b.shape()),
            });
        }
        if !is_symmetric(&a) || !is_symmetric(&b) {
            return Err(Error::NotSymmetric);
        }
        let nb = b.norm();
        if nb > T::zero() {
            let eig = SymmetricEigen::new(symmetrize(&b));
            let floor = -T::lit(SYMMETRY_TOL) * nb;
            if eig.eigenvalues.iter().any(|&l| l < floor) {
                return Err(Error::NotPositiveSemidefinite);
            }
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> &DMatrix<T> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<T> {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }
}

/// One candidate's criterion value, split into its bias and covariance parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionScore<T: Real> {
    pub model_index: usize,
    pub bias_sq: T,
    pub cov_trace: T,
    pub total: T,
}

impl<T: Real> CriterionScore<T> {
    pub fn new(model_index: usize, bias_sq: T, cov_trace: T) -> Result<Self> {
        if !bias_sq.is_finite() || !cov_trace.is_finite() {
            return Err(Error::NonFiniteScore { model_index });
        }
        if cov_trace < T::zero() {
            return Err(Error::NegativeCovarianceTrace { model_index, value: cov_trace.to_f64_lossy() });
        }
        if bias_sq < T::zero() {
            return Err(Error::NonFiniteScore { model_index });
        }
        Ok(Self { model_index, bias_sq, cov_trace, total: bias_sq + cov_trace })
    }

    /// Score with a precomputed total. Used when only the total is meaningful
    /// (and may legitimately be any finite value) or for testing the selector.
    pub fn from_total(model_index: usize, total: T) -> Self {
        Self { model_index, bias_sq: T::zero(), cov_trace: total, total }
    }
}

/// Outcome of an argmin selection over candidate scores.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult<T: Real> {
    pub selected: usize,
    pub scores: Vec<CriterionScore<T>>,
}

impl<T: Real> SelectionResult<T> {
    pub fn selected_score(&self) -> &CriterionScore<T> {
        self.scores
            .iter()
            .find(|s| s.model_index == self.selected)
            .expect("selected index present in scores")
    }

    pub fn score_for(&self, model_index: usize) -> Option<&CriterionScore<T>> {
        self.scores.iter().find(|s| s.model_index == model_index)
    }
}

/// Sandwich bound `A⁻¹ B A⁻¹`, symmetrized.
pub fn sandwich_mcrb<T: Real>(pair: &SandwichPair<T>) -> Result<DMatrix<T>> {
    let a_inv = symmetric_inverse(pair.a())?;
    let m = &a_inv * pair.b() * &a_inv;
    Ok(symmetrize(&m))
}

/// `tr(J M Jᵀ)` with tiny negative round-off clamped to zero.
pub fn mapped_cov_trace<T: Real>(jacobian: &DMatrix<T>, mcrb: &DMatrix<T>) -> Result<T> {
    let k = mcrb.nrows();
    if !mcrb.is_square() || jacobian.ncols() != k {
        return Err(Error::DimensionMismatch {
            expected: format!("J with {} columns and square M", k),
            got: format!("J {:?}, M {:?}", jacobian.shape(), mcrb.shape()),
        });
    }
    // tr(J M Jᵀ) = Σ_ij M_ij (JᵀJ)_ij
    let gram = jacobian.tr_mul(jacobian);
    let trace = mcrb.component_mul(&gram).sum();
    Ok(clamp_round_off(trace, mcrb.norm()))
}

pub(crate) fn clamp_round_off<T: Real>(value: T, scale: T) -> T {
    if value < T::zero() && value >= -T::lit(SYMMETRY_TOL) * scale {
        T::zero()
    } else {
        value
    }
}

/// Argmin over candidate totals; exact ties go to the smallest model index.
pub fn select_model<T: Real>(scores: Vec<CriterionScore<T>>) -> Result<SelectionResult<T>> {
    if scores.is_empty() {
        return Err(Error::EmptyCandidateSet);
    }
    if let Some(bad) = scores.iter().find(|s| !s.total.is_finite()) {
        return Err(Error::NonFiniteScore { model_index: bad.model_index });
    }
    let best = scores
        .iter()
        .min_by(|x, y| {
            x.total
                .partial_cmp(&y.total)
                .expect("finite totals")
                .then(x.model_index.cmp(&y.model_index))
        })
        .expect("nonempty");
    Ok(SelectionResult { selected: best.model_index, scores })
}

/// Inverse of a real symmetric matrix through its eigendecomposition, gated on
/// the condition number.
pub fn symmetric_inverse<T: Real>(a: &DMatrix<T>) -> Result<DMatrix<T>> {
    let eig = SymmetricEigen::new(symmetrize(a));
    let max = eig.eigenvalues.iter().fold(T::zero(), |acc, l| acc.max(l.abs()));
    let min = eig.eigenvalues.iter().fold(T::max_value().expect("bounded"), |acc, l| acc.min(l.abs()));
    if !(max > T::zero()) || !(min > T::zero()) || max / min > T::lit(MAX_CONDITION) {
        let condition = if min > T::zero() { (max / min).to_f64_lossy() } else { f64::INFINITY };
        return Err(Error::SingularMatrix { condition });
    }
    let inv_vals = eig.eigenvalues.map(|l| T::one() / l);
    let v = &eig.eigenvectors;
    Ok(symmetrize(&(v * DMatrix::from_diagonal(&inv_vals) * v.transpose())))
}

pub(crate) fn symmetrize<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    (m + m.transpose()) * T::lit(0.5)
}

fn is_symmetric<T: Real>(m: &DMatrix<T>) -> bool {
    let n = m.norm();
    (m - m.transpose()).norm() <= T::lit(SYMMETRY_TOL) * n
}
