//! Analytic identities that every build must satisfy, checked on fixed inputs.

use mcrb_core::ar::{build_edge_matrices, levinson_durbin, loglik_approx, sample_autocov, score_and_hessian, whittle_crb};
use mcrb_core::doa::{
    design_signals, hermitian_inverse, mcrb_doa, mcrb_doa_full, steering_derivative, CovarianceEigen, HermitianMatrix,
    UlaGeometry,
};
use mcrb_core::{Complex, DoaScenario};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Largest observed error against the tolerance, or the failure reason.
    pub detail: String,
}

fn check(name: &'static str, err: Result<f64, String>, tol: f64) -> Check {
    match err {
        Ok(e) => Check { name, passed: e <= tol, detail: format!("max error {e:.3e} (tolerance {tol:.0e})") },
        Err(why) => Check { name, passed: false, detail: why },
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn reference_scenario() -> Result<DoaScenario, String> {
    let dirs = [-46.0f64, -43.0, -40.0, 40.0, 43.0, 46.0].iter().map(|d| d.to_radians()).collect();
    let signals = design_signals(10, 30.0, 1.0).map_err(|e| e.to_string())?;
    DoaScenario::new(UlaGeometry::new(11).map_err(|e| e.to_string())?, 0.0, signals, dirs, 10f64.powf(4.5), 1.0, 12)
        .map_err(|e| e.to_string())
}

fn true_covariance(scn: &DoaScenario) -> Result<HermitianMatrix<f64>, String> {
    HermitianMatrix::new(scn.disturbance_covariance()).map_err(|e| e.to_string())
}

fn truncated(r: &HermitianMatrix<f64>, m: usize) -> Result<HermitianMatrix<f64>, String> {
    let eig = CovarianceEigen::new(r).map_err(|e| e.to_string())?;
    Ok(eig.truncate(m).map_err(|e| e.to_string())?.matrix().clone())
}

/// With the model equal to the truth the sandwich collapses to the inverse
/// Fisher information and the DOA bound to `1/(2‖s‖²ȧᴴR⁻¹ȧ)`.
fn matched_model() -> Result<f64, String> {
    let scn = reference_scenario()?;
    let r = true_covariance(&scn)?;
    let g = scn.geometry();
    let mut worst = 0.0f64;
    for psi in [0.0, 0.2, -0.35] {
        let ad = steering_derivative(psi, g);
        let p = (ad.adjoint() * hermitian_inverse(&r).map_err(|e| e.to_string())? * &ad)[(0, 0)].re;
        let crb = 1.0 / (2.0 * scn.signal_energy() * p);
        let closed = mcrb_doa(psi, g, &r, &r, scn.signal_energy()).map_err(|e| e.to_string())?;
        let full = mcrb_doa_full(psi, g, scn.signals(), &r, &r).map_err(|e| e.to_string())?;
        let fisher_inv = (-full.pair.a().clone()).try_inverse().ok_or("singular Fisher matrix")?;
        let collapse = (&full.mcrb - &fisher_inv).norm() / fisher_inv.norm();
        worst = worst.max(rel(closed, crb)).max(collapse).max(rel(full.mcrb[(0, 0)], crb));
    }
    Ok(worst)
}

/// The bound is unchanged by rescaling the assumed covariance, and by
/// rescaling the true covariance together with the signal energy.
fn scale_invariance() -> Result<f64, String> {
    let scn = reference_scenario()?;
    let r = true_covariance(&scn)?;
    let model = truncated(&r, 3)?;
    let g = scn.geometry();
    let e = scn.signal_energy();
    let base = mcrb_doa(0.05, g, &model, &r, e).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for c in [1e-3, 0.5, 7.0, 1e4] {
        let scale = |h: &HermitianMatrix<f64>| HermitianMatrix::new(h.as_matrix() * Complex::new(c, 0.0)).map_err(|e| e.to_string());
        let a = mcrb_doa(0.05, g, &scale(&model)?, &r, e).map_err(|e| e.to_string())?;
        let b = mcrb_doa(0.05, g, &model, &scale(&r)?, c * e).map_err(|e| e.to_string())?;
        worst = worst.max(rel(a, base)).max(rel(b, base));
    }
    Ok(worst)
}

/// Closed-form DOA bound against the (ψ, ψ) entry of the full sandwich under
/// a misspecified, truncated model.
fn closed_vs_full() -> Result<f64, String> {
    let scn = reference_scenario()?;
    let r = true_covariance(&scn)?;
    let g = scn.geometry();
    let mut worst = 0.0f64;
    for m in [0, 3, 6, 9] {
        let model = truncated(&r, m)?;
        for psi in [0.0, 0.1, -0.3] {
            let closed = mcrb_doa(psi, g, &model, &r, scn.signal_energy()).map_err(|e| e.to_string())?;
            let full = mcrb_doa_full(psi, g, scn.signals(), &model, &r).map_err(|e| e.to_string())?;
            worst = worst.max(rel(closed, full.mcrb[(0, 0)]));
        }
    }
    Ok(worst)
}

/// Positive-definite autocovariance: a few sinusoids plus white noise.
fn autocov_sequence(rng: &mut ChaCha20Rng, len: usize) -> Vec<f64> {
    let parts: Vec<(f64, f64)> = (0..4).map(|_| (rng.random_range(0.1..2.0), rng.random_range(0.0..std::f64::consts::PI))).collect();
    (0..len)
        .map(|k| parts.iter().map(|(w, om)| w * (om * k as f64).cos()).sum::<f64>() + if k == 0 { 0.5 } else { 0.0 })
        .collect()
}

fn levinson_vs_dense() -> Result<f64, String> {
    let mut rng = ChaCha20Rng::seed_from_u64(41);
    let mut worst = 0.0f64;
    for p in [1, 2, 5, 9] {
        let r = autocov_sequence(&mut rng, p + 1);
        let lev = levinson_durbin(&r, p).map_err(|e| e.to_string())?;
        let toeplitz = DMatrix::from_fn(p, p, |i, j| r[i.abs_diff(j)]);
        let rhs = DVector::from_fn(p, |i, _| -r[i + 1]);
        let dense = toeplitz.lu().solve(&rhs).ok_or("singular Toeplitz system")?;
        let got = DVector::from_column_slice(&lev.coeffs[p]);
        worst = worst.max((got - &dense).norm() / dense.norm().max(1.0));
    }
    Ok(worst)
}

fn edge_identity() -> Result<f64, String> {
    let mut rng = ChaCha20Rng::seed_from_u64(43);
    let mut worst = 0.0f64;
    for (t, m) in [(13, 4), (50, 3), (200, 10)] {
        let x: Vec<f64> = (0..t).map(|_| rng.random_range(-2.0..2.0)).collect();
        let edges = build_edge_matrices(&x, m).map_err(|e| e.to_string())?;
        let r = sample_autocov(&x, m).map_err(|e| e.to_string())?;
        let lhs = edges.x.tr_mul(&edges.x) / t as f64;
        let toeplitz = DMatrix::from_fn(m + 1, m + 1, |i, j| r[i.abs_diff(j)]);
        worst = worst.max((lhs - &toeplitz).norm() / toeplitz.norm());
    }
    Ok(worst)
}

/// Central differences of the approximate log-likelihood against its
/// analytic gradient and Hessian. Returns the gradient and Hessian errors.
fn derivative_errors() -> Result<(f64, f64), String> {
    let mut rng = ChaCha20Rng::seed_from_u64(47);
    let (mut g_err, mut h_err) = (0.0f64, 0.0f64);
    let ll = |theta: &DVector<f64>, x: &[f64]| loglik_approx(theta[0], &theta.as_slice()[1..], x).map_err(|e| e.to_string());
    let sh = |theta: &DVector<f64>, x: &[f64]| score_and_hessian(theta[0], &theta.as_slice()[1..], x).map_err(|e| e.to_string());
    for _ in 0..10 {
        let m = rng.random_range(1..5);
        let t = rng.random_range(3 * m + 1..80);
        let x: Vec<f64> = (0..t).map(|_| rng.random_range(-2.0..2.0)).collect();
        let theta = DVector::from_fn(m + 1, |i, _| if i == 0 { rng.random_range(0.5..2.0) } else { rng.random_range(-0.5..0.5) });
        let (grad, hess) = sh(&theta, &x)?;
        for p in 0..=m {
            let shifted = |h: f64| {
                let mut v = theta.clone();
                v[p] += h;
                v
            };
            let h = 1e-6 * theta[p].abs().max(1.0);
            let fd = (ll(&shifted(h), &x)? - ll(&shifted(-h), &x)?) / (2.0 * h);
            g_err = g_err.max((fd - grad[p]).abs() / grad[p].abs().max(1.0));
            let hh = 1e-4 * theta[p].abs().max(1.0);
            let (gu, _) = sh(&shifted(hh), &x)?;
            let (gd, _) = sh(&shifted(-hh), &x)?;
            for k in 0..=m {
                let fd = (gu[k] - gd[k]) / (2.0 * hh);
                h_err = h_err.max((fd - hess[(k, p)]).abs() / hess[(k, p)].abs().max(1.0));
            }
        }
    }
    Ok((g_err, h_err))
}

fn whittle_exact() -> Result<f64, String> {
    let cases: [(usize, usize, usize, f64); 3] = [(0, 5, 1000, 0.012), (0, 0, 2, 1.0), (2, 1, 400, 0.02)];
    let mut worst = 0.0f64;
    for (p, q, t, want) in cases {
        let got: f64 = whittle_crb(p, q, t);
        if got != want {
            worst = worst.max((got - want).abs().max(f64::MIN_POSITIVE));
        }
    }
    Ok(worst)
}

/// Runs every identity and reports each one.
pub fn run_selftest() -> Vec<Check> {
    let (g, h) = match derivative_errors() {
        Ok((g, h)) => (Ok(g), Ok(h)),
        Err(e) => (Err(e.clone()), Err(e)),
    };
    vec![
        check("matched-model MCRB reduces to the CRB", matched_model(), 1e-8),
        check("DOA bound scale invariance", scale_invariance(), 1e-10),
        check("closed-form vs full 3x3 MCRB", closed_vs_full(), 1e-8),
        check("Levinson-Durbin vs dense Toeplitz solve", levinson_vs_dense(), 1e-10),
        check("edge-matrix Toeplitz identity", edge_identity(), 1e-10),
        check("log-likelihood gradient vs finite differences", g, 1e-6),
        check("log-likelihood Hessian vs finite differences", h, 1e-4),
        check("Whittle bound 2(p+q+1)/T exact", whittle_exact(), 0.0),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_identities_hold() {
        for c in run_selftest() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
