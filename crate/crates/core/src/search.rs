//! One-dimensional maximization: coarse grid scan plus golden-section
//! refinement inside the bracketing cell.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Coarse scan grid and refinement tolerance for a scalar search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T: Real> {
    pub lo: T,
    pub hi: T,
    pub step: T,
    pub tol: T,
}

impl<T: Real> GridSpec<T> {
    pub fn new(lo: T, hi: T, step: T, tol: T) -> Result<Self> {
        if !(lo < hi) || !(step > T::zero()) || !(tol > T::zero()) {
            return Err(Error::InvalidGrid(format!(
                "need lo < hi and positive step/tol (lo={}, hi={}, step={}, tol={})",
                lo, hi, step, tol
            )));
        }
        Ok(Self { lo, hi, step, tol })
    }

    /// DOA default: [−π/3, π/3] at 0.2°, refined to 1e-6 rad.
    pub fn doa_default() -> Self {
        let third = T::pi() / T::lit(3.0);
        Self { lo: -third, hi: third, step: T::lit(0.2f64.to_radians()), tol: T::lit(1e-6) }
    }

    /// Grid nodes, always including both end points.
    pub fn points(&self) -> Vec<T> {
        let n = ((self.hi - self.lo) / self.step).to_f64_lossy().round() as usize;
        let n = n.max(1);
        let h = (self.hi - self.lo) / T::from_usize_lossy(n);
        (0..=n).map(|i| self.lo + h * T::from_usize_lossy(i)).collect()
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a maximum of `f` on `[a, b]`, stopping once the
/// bracket is narrower than `tol`.
pub fn golden_section_max<T: Real, F: FnMut(T) -> T>(mut f: F, mut a: T, mut b: T, tol: T) -> (T, T) {
    let r = T::lit(INV_PHI);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let x = (a + b) * T::lit(0.5);
    let fx = f(x);
    // The midpoint can lose to an interior probe on a sharp peak.
    [(x, fx), (c, fc), (d, fd)]
        .into_iter()
        .fold((x, fx), |best, cand| if cand.1 > best.1 { cand } else { best })
}

/// Index of the largest value; first one wins on ties. NaN entries are skipped.
pub fn argmax<T: Real>(values: &[T]) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            continue;
        }
        match best {
            Some((_, bv)) if bv >= v => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

/// Grid scan of `f` over `points`, then golden-section refinement within the
/// cell around the best node. Returns `(argmax, max)`.
pub fn grid_then_golden<T: Real, F: FnMut(T) -> T>(mut f: F, points: &[T], tol: T) -> Option<(T, T)> {
    let values: Vec<T> = points.iter().map(|&p| f(p)).collect();
    refine_from_scan(f, points, &values, tol)
}

/// Golden-section refinement given an existing scan of `f` over `points`.
pub fn refine_from_scan<T: Real, F: FnMut(T) -> T>(f: F, points: &[T], values: &[T], tol: T) -> Option<(T, T)> {
    let i = argmax(values)?;
    let lo = points[i.saturating_sub(1)];
    let hi = points[(i + 1).min(points.len() - 1)];
    if hi - lo <= tol {
        return Some((points[i], values[i]));
    }
    let (x, fx) = golden_section_max(f, lo, hi, tol);
    if fx >= values[i] {
        Some((x, fx))
    } else {
        Some((points[i], values[i]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_peak() {
        // a kink keeps the peak resolvable well below sqrt(machine epsilon)
        let (x, fx) = golden_section_max(|x: f64| 2.0 - (x - 0.3).abs(), -1.0, 1.0, 1e-9);
        assert!((x - 0.3).abs() < 1e-9);
        assert!((fx - 2.0).abs() < 1e-9);
        let (x, _) = golden_section_max(|x: f64| -(x - 0.3).powi(2), -1.0, 1.0, 1e-9);
        assert!((x - 0.3).abs() < 1e-7);
    }

    #[test]
    fn grid_then_golden_refines_within_cell() {
        let spec = GridSpec::<f64>::doa_default();
        let pts = spec.points();
        assert!((pts[0] + std::f64::consts::FRAC_PI_3).abs() < 1e-15);
        assert!((pts.last().unwrap() - std::f64::consts::FRAC_PI_3).abs() < 1e-12);
        let target = 0.123_456_7;
        let (x, _) = grid_then_golden(|x: f64| (-(x - target).powi(2) * 50.0).exp(), &pts, 1e-7).unwrap();
        assert!((x - target).abs() < 1e-6);
    }

    #[test]
    fn argmax_first_on_ties_and_skips_nan() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), Some(1));
        assert_eq!(argmax(&[f64::NAN, 0.5]), Some(1));
        assert_eq!(argmax::<f64>(&[]), None);
    }

    #[test]
    fn invalid_grid_rejected() {
        assert!(GridSpec::new(1.0, 0.0, 0.1, 1e-6).is_err());
        assert!(GridSpec::new(0.0, 1.0, 0.0, 1e-6).is_err());
    }
}
