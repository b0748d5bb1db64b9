//! Log-spectra of fitted AR models on a frequency grid, and their gradients
//! with respect to `[σ², a_m, …, a_1]`.

use nalgebra::DMatrix;

use super::autocov::ArFit;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Floor applied to `|a(e^{jω})|²` (and `|b(e^{jω})|²`) before taking logs.
pub const POLY_FLOOR: f64 = 1e-30;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumGrid<T: Real> {
    omegas: Vec<T>,
}

impl<T: Real> SpectrumGrid<T> {
    pub fn new(omegas: Vec<T>) -> Result<Self> {
        if omegas.is_empty() {
            return Err(Error::InvalidGrid("no frequencies".into()));
        }
        let in_range = omegas.iter().all(|&w| w >= T::zero() && w < T::pi());
        let increasing = omegas.windows(2).all(|p| p[0] < p[1]);
        if !in_range || !increasing {
            return Err(Error::InvalidGrid("frequencies must be strictly increasing in [0, π)".into()));
        }
        Ok(Self { omegas })
    }

    /// `W` equally spaced frequencies `πl/W`, `l = 0..W−1`.
    pub fn uniform(w: usize) -> Result<Self> {
        let step = T::pi() / T::from_usize_lossy(w);
        Self::new((0..w).map(|l| step * T::from_usize_lossy(l)).collect())
    }

    pub fn omegas(&self) -> &[T] {
        &self.omegas
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }
}

/// `c_0 + Σ_{k≥1} c_k e^{−jωk}` as `(re, im)`, by Horner's rule in `e^{−jω}`.
pub(crate) fn poly_on_circle<T: Real>(c0: T, tail: impl DoubleEndedIterator<Item = T>, omega: T) -> (T, T) {
    let (zr, zi) = (omega.cos(), -omega.sin());
    let (mut re, mut im) = (T::zero(), T::zero());
    for c in tail.rev() {
        let nr = re * zr - im * zi + c;
        let ni = re * zi + im * zr;
        re = nr;
        im = ni;
    }
    // one more multiplication by z shifts the tail to start at k = 1
    let nr = re * zr - im * zi + c0;
    let ni = re * zi + im * zr;
    (nr, ni)
}

fn ar_poly<T: Real>(fit: &ArFit<T>, omega: T) -> (T, T) {
    // coeffs_rev = [a_m..a_1]; Horner wants a_1..a_m in forward order
    poly_on_circle(T::one(), fit.coeffs_rev().iter().rev().copied(), omega)
}

/// `φ(ω) = log σ² − log|1 + Σ a_k e^{−jωk}|²` with the polynomial modulus floored.
pub fn log_spectrum_ar<T: Real>(fit: &ArFit<T>, grid: &SpectrumGrid<T>) -> Vec<T> {
    let log_var = fit.innov_var().ln();
    let floor = T::lit(POLY_FLOOR);
    grid.omegas()
        .iter()
        .map(|&w| {
            let (re, im) = ar_poly(fit, w);
            log_var - (re * re + im * im).max(floor).ln()
        })
        .collect()
}

/// Grid indices where the AR polynomial modulus hit the floor.
pub fn clamped_frequencies<T: Real>(fit: &ArFit<T>, grid: &SpectrumGrid<T>) -> Vec<usize> {
    let floor = T::lit(POLY_FLOOR);
    grid.omegas()
        .iter()
        .enumerate()
        .filter(|(_, &w)| {
            let (re, im) = ar_poly(fit, w);
            re * re + im * im < floor
        })
        .map(|(l, _)| l)
        .collect()
}

/// `W × (m+1)` Jacobian of the log-spectrum. Column 0 is `1/σ²`; column `j`
/// (parameter `a_{m+1−j}`) is `−2 Re[e^{−jω(m+1−j)} / a(e^{jω})]`.
pub fn spectrum_jacobian<T: Real>(fit: &ArFit<T>, grid: &SpectrumGrid<T>) -> DMatrix<T> {
    let m = fit.order();
    let floor = T::lit(POLY_FLOOR);
    let two = T::lit(2.0);
    let mut jac = DMatrix::zeros(grid.len(), m + 1);
    let inv_var = T::one() / fit.innov_var();
    for (l, &w) in grid.omegas().iter().enumerate() {
        jac[(l, 0)] = inv_var;
        let (re, im) = ar_poly(fit, w);
        let mag = (re * re + im * im).max(floor);
        // 1/a = conj(a)/|a|²
        let (ir, ii) = (re / mag, -im / mag);
        let (zr, zi) = (w.cos(), -w.sin());
        let (mut pr, mut pi) = (ir, ii);
        for k in 1..=m {
            let nr = pr * zr - pi * zi;
            let ni = pr * zi + pi * zr;
            pr = nr;
            pi = ni;
            jac[(l, m + 1 - k)] = -two * pr;
        }
    }
    jac
}
