use nalgebra::{DMatrix, DVector};

use super::covariance::{hermitian_inverse, HermitianMatrix, TruncatedCovariance};
use super::geometry::{steering, steering_derivative, UlaGeometry};
use super::Cplx;
use crate::error::{Error, Result};
use crate::mcrb::{sandwich_mcrb, SandwichPair};
use crate::scalar::Real;

fn quad<T: Real>(x: &DVector<Cplx<T>>, m: &DMatrix<Cplx<T>>, y: &DVector<Cplx<T>>) -> Cplx<T> {
    (x.adjoint() * m * y)[(0, 0)]
}

fn check_dims<T: Real>(geom: &UlaGeometry, mats: &[&HermitianMatrix<T>]) -> Result<()> {
    for m in mats {
        if m.dim() != geom.n_sensors() {
            return Err(Error::DimensionMismatch {
                expected: format!("{0}x{0}", geom.n_sensors()),
                got: format!("{0}x{0}", m.dim()),
            });
        }
    }
    Ok(())
}

/// Misspecified bound on the DOA variance when the target snapshots are
/// processed with covariance `r_model` but actually have covariance `r_true`:
///
/// ```text
/// ȧᴴ R_m⁻¹ R R_m⁻¹ ȧ / (2 ‖s‖² (ȧᴴ R_m⁻¹ ȧ)²)
/// ```
///
/// This is the DOA entry of the full 3×3 sandwich ([`mcrb_doa_full`]) for
/// zero-sum target amplitudes.
pub fn mcrb_doa<T: Real>(
    psi: T,
    geom: &UlaGeometry,
    r_model: &HermitianMatrix<T>,
    r_true: &HermitianMatrix<T>,
    signal_energy: T,
) -> Result<T> {
    check_dims(geom, &[r_model, r_true])?;
    if !(signal_energy > T::zero()) {
        return Err(Error::InvalidScenario("signal energy must be positive".into()));
    }
    let rm_inv = hermitian_inverse(r_model)?;
    let ad = steering_derivative(psi, geom);
    let w = &rm_inv * &ad;
    let q = quad(&w, r_true.as_matrix(), &w).re;
    let p = ad.dotc(&w).re;
    Ok(q / (T::lit(2.0) * signal_energy * p * p))
}

/// Same bound as [`mcrb_doa`] for a truncated model, using its eigenbasis
/// instead of a fresh inversion.
pub fn population_bound<T: Real>(
    psi: T,
    geom: &UlaGeometry,
    model: &TruncatedCovariance<T>,
    r_true: &DMatrix<Cplx<T>>,
    signal_energy: T,
) -> Result<T> {
    let inv = model.inverse_eigvals()?;
    let c = model.eigvecs().adjoint() * steering_derivative(psi, geom);
    let z = DVector::from_fn(c.len(), |i, _| c[i] * inv[i]);
    let u = model.eigvecs();
    let w = u * &z;
    let q = quad(&w, r_true, &w).re;
    let p: T = (0..c.len()).map(|i| c[i].norm_sqr() * inv[i]).sum();
    Ok(q / (T::lit(2.0) * signal_energy * p * p))
}

/// Full sandwich over `[ψ, Re s, Im s]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DoaSandwich<T: Real> {
    pub pair: SandwichPair<T>,
    pub mcrb: DMatrix<T>,
}

/// Builds the 3×3 expected-score and expected-Hessian matrices of the
/// misspecified target likelihood and their sandwich.
pub fn mcrb_doa_full<T: Real>(
    psi: T,
    geom: &UlaGeometry,
    signals: &DVector<Cplx<T>>,
    r_model: &HermitianMatrix<T>,
    r_true: &HermitianMatrix<T>,
) -> Result<DoaSandwich<T>> {
    check_dims(geom, &[r_model, r_true])?;
    let d = signals.len();
    if d == 0 {
        return Err(Error::InvalidScenario("need at least one target snapshot".into()));
    }
    let d_t = T::from_usize_lossy(d);
    let energy_per = signals.norm_squared() / d_t;
    let mean_conj = signals.iter().fold(Cplx::new(T::zero(), T::zero()), |acc, s| acc + s.conj()) / Cplx::new(d_t, T::zero());

    let rm_inv = hermitian_inverse(r_model)?;
    let mid = &rm_inv * r_true.as_matrix() * &rm_inv;
    let a = steering(psi, geom);
    let ad = steering_derivative(psi, geom);

    let a_j = quad(&ad, &mid, &ad).re * energy_per;
    let c_j = quad(&a, &mid, &a).re;
    let d_j = quad(&ad, &mid, &a) * mean_conj;
    let b_j = quad(&ad, &rm_inv, &ad).re * energy_per;
    let e_j = quad(&ad, &rm_inv, &a) * mean_conj;
    let f_j = quad(&a, &rm_inv, &a).re;

    let block = |diag0: T, off: Cplx<T>, diag1: T| {
        DMatrix::from_row_slice(3, 3, &[
            diag0, off.re, -off.im,
            off.re, diag1, T::zero(),
            -off.im, T::zero(), diag1,
        ])
    };
    let two_d = T::lit(2.0) * d_t;
    let b = block(a_j, d_j, c_j) * two_d;
    let a_mat = block(b_j, e_j, f_j) * (-two_d);
    let pair = SandwichPair::new(a_mat, b)?;
    let mcrb = sandwich_mcrb(&pair)?;
    Ok(DoaSandwich { pair, mcrb })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doa::{design_signals, CovarianceEigen};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_psd(rng: &mut ChaCha8Rng, n: usize) -> HermitianMatrix<f64> {
        let g = DMatrix::from_fn(n, n, |_, _| Cplx::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        HermitianMatrix::hermitize(&g * g.adjoint() + DMatrix::identity(n, n) * Cplx::new(0.1, 0.0))
    }

    fn matched_value(psi: f64, g: &UlaGeometry, r: &HermitianMatrix<f64>, energy: f64) -> f64 {
        let ad = steering_derivative(psi, g);
        let p = quad(&ad, &hermitian_inverse(r).unwrap(), &ad).re;
        1.0 / (2.0 * energy * p)
    }

    #[test]
    fn matched_model_reduces_to_crb() {
        let g = UlaGeometry::new(11).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = random_psd(&mut rng, 11);
        let v = mcrb_doa(0.1, &g, &r, &r, 40.0).unwrap();
        let expected = matched_value(0.1, &g, &r, 40.0);
        assert!((v - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn model_scale_cancels() {
        let g = UlaGeometry::new(7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let r = random_psd(&mut rng, 7);
        let scaled = HermitianMatrix::hermitize(r.as_matrix() * Cplx::new(3.7, 0.0));
        let a = mcrb_doa(-0.3, &g, &scaled, &r, 10.0).unwrap();
        let b = mcrb_doa(-0.3, &g, &r, &r, 10.0).unwrap();
        assert!((a - b).abs() <= 1e-12 * b);
    }

    #[test]
    fn zero_sum_makes_matrices_block_diagonal() {
        let g = UlaGeometry::new(11).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rm = random_psd(&mut rng, 11);
        let rt = random_psd(&mut rng, 11);
        let s = design_signals(10, 20.0, 1.0).unwrap();
        let full = mcrb_doa_full(0.2, &g, &s, &rm, &rt).unwrap();
        for mat in [full.pair.a(), full.pair.b()] {
            for (i, j) in [(0, 1), (0, 2), (1, 0), (2, 0), (1, 2), (2, 1)] {
                assert!(mat[(i, j)].abs() <= 1e-12 * mat.norm());
            }
        }
    }

    #[test]
    fn full_sandwich_matches_closed_form() {
        let g = UlaGeometry::new(11).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let rm = random_psd(&mut rng, 11);
            let rt = random_psd(&mut rng, 11);
            let psi = rng.random_range(-1.0..1.0);
            let d = 2 * rng.random_range(1..6);
            let s = design_signals(d, rng.random_range(-5.0..30.0), 1.0).unwrap();
            let full = mcrb_doa_full(psi, &g, &s, &rm, &rt).unwrap();
            let closed = mcrb_doa(psi, &g, &rm, &rt, s.norm_squared()).unwrap();
            assert!((full.mcrb[(0, 0)] - closed).abs() <= 1e-8 * closed);
        }
        // matched case
        let r = random_psd(&mut rng, 11);
        let s = design_signals(4, 10.0, 1.0).unwrap();
        let full = mcrb_doa_full(0.4, &g, &s, &r, &r).unwrap();
        let expected = matched_value(0.4, &g, &r, s.norm_squared());
        assert!((full.mcrb[(0, 0)] - expected).abs() <= 1e-10 * expected);
    }

    #[test]
    fn population_bound_agrees_with_direct_inverse() {
        let g = UlaGeometry::new(9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let r = random_psd(&mut rng, 9);
        let rt = random_psd(&mut rng, 9);
        let eig = CovarianceEigen::new(&r).unwrap();
        for m in 0..9 {
            let t = eig.truncate(m).unwrap();
            let a = population_bound(0.15, &g, &t, rt.as_matrix(), 12.0).unwrap();
            let b = mcrb_doa(0.15, &g, t.matrix(), &rt, 12.0).unwrap();
            assert!((a - b).abs() <= 1e-9 * b, "m={m}: {a} vs {b}");
        }
    }

    #[test]
    fn singular_model_rejected() {
        let g = UlaGeometry::new(3).unwrap();
        let z = HermitianMatrix::hermitize(DMatrix::zeros(3, 3));
        let i = HermitianMatrix::hermitize(DMatrix::identity(3, 3));
        assert!(matches!(mcrb_doa(0.0, &g, &z, &i, 1.0), Err(Error::SingularMatrix { .. })));
    }
}
