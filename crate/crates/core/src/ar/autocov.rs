//! Sample autocovariances, the Levinson–Durbin recursion and Yule–Walker fits.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Biased sample autocovariances `r̂_k = (1/T) Σ_t x_{t+k} x_t`, `k = 0..=maxlag`.
pub fn sample_autocov<T: Real>(x: &[T], maxlag: usize) -> Result<Vec<T>> {
    let n = x.len();
    if maxlag >= n {
        return Err(Error::LagTooLarge { maxlag, len: n });
    }
    let scale = T::one() / T::from_usize_lossy(n);
    Ok((0..=maxlag)
        .map(|k| x[k..].iter().zip(x).map(|(&a, &b)| a * b).sum::<T>() * scale)
        .collect())
}

/// Output of the Levinson–Durbin recursion up to some order `m`.
///
/// Coefficients use the prediction-error convention: the order-`n` error is
/// `x_t + Σ_k a_k x_{t−k}`, so an AR(1) with `r₁/r₀ = ρ` gives `a₁ = −ρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Levinson<T: Real> {
    /// `K_1..K_m`.
    pub partials: Vec<T>,
    /// `coeffs[n]` holds `a_1..a_n` of the order-`n` predictor (`coeffs[0]` is empty).
    pub coeffs: Vec<Vec<T>>,
    /// `variances[n]` is the order-`n` prediction error variance; `variances[0] = r̂₀`.
    pub variances: Vec<T>,
}

pub fn levinson_durbin<T: Real>(r: &[T], m: usize) -> Result<Levinson<T>> {
    if r.len() <= m {
        return Err(Error::DimensionMismatch { expected: format!("at least {} autocovariances", m + 1), got: r.len().to_string() });
    }
    if !(r[0] > T::zero()) {
        return Err(Error::NonPositiveR0);
    }
    let mut partials = Vec::with_capacity(m);
    let mut coeffs = vec![Vec::new()];
    let mut variances = vec![r[0]];
    let mut a: Vec<T> = Vec::with_capacity(m);
    let mut var = r[0];
    for n in 1..=m {
        let acc = r[n] + (1..n).map(|k| a[k - 1] * r[n - k]).sum::<T>();
        let k = acc / var;
        if !(k.abs() < T::one()) {
            return Err(Error::DegenerateStep { order: n });
        }
        let prev = a.clone();
        for j in 1..n {
            a[j - 1] = prev[j - 1] - k * prev[n - j - 1];
        }
        a.push(-k);
        var *= T::one() - k * k;
        partials.push(k);
        coeffs.push(a.clone());
        variances.push(var);
    }
    Ok(Levinson { partials, coeffs, variances })
}

/// Partial correlations from prediction-error coefficients `a_1..a_n` by
/// running the recursion backwards.
pub fn step_down<T: Real>(coeffs: &[T]) -> Result<Vec<T>> {
    let mut a = coeffs.to_vec();
    let mut partials = vec![T::zero(); a.len()];
    for n in (1..=a.len()).rev() {
        let k = -a[n - 1];
        if !(k.abs() < T::one()) {
            return Err(Error::DegeneratePartial { index: n });
        }
        partials[n - 1] = k;
        let denom = T::one() - k * k;
        let prev: Vec<T> = (1..n).map(|j| (a[j - 1] + k * a[n - j - 1]) / denom).collect();
        a = prev;
    }
    Ok(partials)
}

/// A fitted AR(m) model. Coefficients are stored reversed, `[a_m, …, a_1]`,
/// matching the parameter ordering `[σ², a_m, …, a_1]` used throughout.
#[derive(Debug, Clone, PartialEq)]
pub struct ArFit<T: Real> {
    innov_var: T,
    coeffs_rev: DVector<T>,
    partials: Vec<T>,
}

impl<T: Real> ArFit<T> {
    /// Builds a fit from forward coefficients `a_1..a_m`; partial correlations
    /// are recovered by step-down and must all be inside (−1, 1).
    pub fn from_coeffs(innov_var: T, forward: &[T]) -> Result<Self> {
        if !(innov_var > T::zero()) {
            return Err(Error::NonPositiveVariance);
        }
        let partials = step_down(forward)?;
        Ok(Self { innov_var, coeffs_rev: DVector::from_iterator(forward.len(), forward.iter().rev().copied()), partials })
    }

    pub fn white(innov_var: T) -> Result<Self> {
        Self::from_coeffs(innov_var, &[])
    }

    pub fn order(&self) -> usize {
        self.coeffs_rev.len()
    }

    pub fn innov_var(&self) -> T {
        self.innov_var
    }

    pub fn coeffs_rev(&self) -> &DVector<T> {
        &self.coeffs_rev
    }

    /// `a_1..a_m`.
    pub fn forward_coeffs(&self) -> Vec<T> {
        self.coeffs_rev.iter().rev().copied().collect()
    }

    pub fn partials(&self) -> &[T] {
        &self.partials
    }

    /// Parameter vector `[σ², a_m, …, a_1]`.
    pub fn theta(&self) -> DVector<T> {
        let mut v = DVector::zeros(self.order() + 1);
        v[0] = self.innov_var;
        v.rows_mut(1, self.order()).copy_from(&self.coeffs_rev);
        v
    }
}

/// Yule–Walker AR(m) fit from autocovariances `r̂₀..r̂_m`, solved by
/// Levinson–Durbin.
pub fn yule_walker<T: Real>(r: &[T], m: usize) -> Result<ArFit<T>> {
    let lev = levinson_durbin(r, m).map_err(|e| match e {
        Error::NonPositiveR0 | Error::DegenerateStep { .. } => Error::SingularToeplitz,
        other => other,
    })?;
    Ok(fit_from_levinson(&lev, m))
}

/// The order-`m` fit contained in a Levinson run (`m` ≤ its maximum order).
pub fn fit_from_levinson<T: Real>(lev: &Levinson<T>, m: usize) -> ArFit<T> {
    let forward = &lev.coeffs[m];
    ArFit {
        innov_var: lev.variances[m],
        coeffs_rev: DVector::from_iterator(m, forward.iter().rev().copied()),
        partials: lev.partials[..m].to_vec(),
    }
}
