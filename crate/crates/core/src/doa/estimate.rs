use nalgebra::{DMatrix, DVector};

use super::covariance::TruncatedCovariance;
use super::geometry::{steering, UlaGeometry};
use super::Cplx;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::search::{refine_from_scan, GridSpec};

/// ML DOA objective `‖X_dᴴ R⁻¹ a(ψ)‖² / (a(ψ)ᴴ R⁻¹ a(ψ))`, evaluated in the
/// eigenbasis of `R` so that several covariance models sharing eigenvectors
/// can reuse the projected steering vector `b = Uᴴ a(ψ)`.
pub(crate) struct WhitenedObjective<T: Real> {
    u_adj: DMatrix<Cplx<T>>,
    /// `Uᴴ X_d`
    y: DMatrix<Cplx<T>>,
    geom: UlaGeometry,
}

impl<T: Real> WhitenedObjective<T> {
    pub(crate) fn new(eigvecs: &DMatrix<Cplx<T>>, xd: &DMatrix<Cplx<T>>, geom: UlaGeometry) -> Result<Self> {
        if xd.nrows() != eigvecs.nrows() || geom.n_sensors() != xd.nrows() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} sensors", eigvecs.nrows()),
                got: format!("X_d {:?}, array of {}", xd.shape(), geom.n_sensors()),
            });
        }
        let u_adj = eigvecs.adjoint();
        let y = &u_adj * xd;
        Ok(Self { u_adj, y, geom })
    }

    pub(crate) fn project(&self, psi: T) -> DVector<Cplx<T>> {
        &self.u_adj * steering(psi, &self.geom)
    }

    pub(crate) fn eval_projected(&self, b: &DVector<Cplx<T>>, inv_eig: &DVector<T>) -> T {
        let n = b.len();
        let mut den = T::zero();
        for i in 0..n {
            den += b[i].norm_sqr() * inv_eig[i];
        }
        let mut num = T::zero();
        for col in self.y.column_iter() {
            let mut acc = Cplx::new(T::zero(), T::zero());
            for i in 0..n {
                acc += col[i].conj() * b[i] * inv_eig[i];
            }
            num += acc.norm_sqr();
        }
        num / den
    }

    pub(crate) fn eval(&self, psi: T, inv_eig: &DVector<T>) -> T {
        self.eval_projected(&self.project(psi), inv_eig)
    }

    /// Terms `|ȧᴴ R⁻¹ e_j|²` over the target residuals `e_j = x_j − a(ψ) ŝ_j`
    /// left after fitting the ML amplitudes at `psi`. `c` is the projected
    /// derivative `Uᴴ ȧ(ψ)`.
    pub(crate) fn residual_terms(&self, psi: T, c: &DVector<Cplx<T>>, inv_eig: &DVector<T>) -> Vec<T> {
        let b = self.project(psi);
        let n = b.len();
        let zero = Cplx::new(T::zero(), T::zero());
        let den: T = (0..n).map(|i| b[i].norm_sqr() * inv_eig[i]).sum();
        self.y
            .column_iter()
            .map(|col| {
                let mut amp = zero;
                for i in 0..n {
                    amp += b[i].conj() * col[i] * inv_eig[i];
                }
                let amp = amp / den;
                let mut g = zero;
                for i in 0..n {
                    g += c[i].conj() * (col[i] - b[i] * amp) * inv_eig[i];
                }
                g.norm_sqr()
            })
            .collect()
    }

    /// Scan over precomputed projections, then golden-section refinement.
    pub(crate) fn maximize(&self, points: &[T], projected: &[DVector<Cplx<T>>], inv_eig: &DVector<T>, tol: T) -> Result<T> {
        let values: Vec<T> = projected.iter().map(|b| self.eval_projected(b, inv_eig)).collect();
        refine_from_scan(|psi| self.eval(psi, inv_eig), points, &values, tol)
            .map(|(psi, _)| psi)
            .ok_or(Error::SingularMatrix { condition: f64::INFINITY })
    }
}

/// Value of the ML DOA objective at `psi` for the model covariance `rm`.
pub fn ml_objective<T: Real>(xd: &DMatrix<Cplx<T>>, rm: &TruncatedCovariance<T>, geom: &UlaGeometry, psi: T) -> Result<T> {
    let inv = rm.inverse_eigvals()?;
    Ok(WhitenedObjective::new(rm.eigvecs(), xd, *geom)?.eval(psi, &inv))
}

/// Maximum-likelihood DOA of the target snapshots `xd` under the covariance
/// model `rm`: coarse grid scan followed by golden-section refinement.
pub fn ml_doa<T: Real>(xd: &DMatrix<Cplx<T>>, rm: &TruncatedCovariance<T>, geom: &UlaGeometry, search: &GridSpec<T>) -> Result<T> {
    let inv = rm.inverse_eigvals()?;
    let obj = WhitenedObjective::new(rm.eigvecs(), xd, *geom)?;
    let points = search.points();
    let projected: Vec<_> = points.iter().map(|&p| obj.project(p)).collect();
    obj.maximize(&points, &projected, &inv, search.tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doa::covariance::{truncate_covariance, HermitianMatrix};
    use crate::doa::scenario::{design_signals, simulate_target, simulate_training, DoaScenario};
    use crate::doa::{mcrb_doa, sample_covariance, CovarianceEigen};
    use crate::search::argmax;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn identity_model(n: usize) -> TruncatedCovariance<f64> {
        truncate_covariance(&HermitianMatrix::hermitize(DMatrix::identity(n, n)), n - 1).unwrap()
    }

    #[test]
    fn noise_free_peak_at_true_direction() {
        let g = UlaGeometry::new(11).unwrap();
        let s = design_signals::<f64>(4, 10.0, 1.0).unwrap();
        let a = steering(0.25, &g);
        let xd = &a * s.transpose();
        let psi = ml_doa(&xd, &identity_model(11), &g, &GridSpec::doa_default()).unwrap();
        assert!((psi - 0.25).abs() < 1e-6, "{psi}");
    }

    #[test]
    fn scale_of_model_covariance_cancels() {
        let g = UlaGeometry::new(8).unwrap();
        let scn = DoaScenario::new(g, -0.2, design_signals(6, 5.0, 1.0).unwrap(), vec![0.5, 0.9], 30.0, 1.0, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r = sample_covariance(&simulate_training(&scn, &mut rng));
        let xd = simulate_target(&scn, &mut rng);
        let spec = GridSpec::doa_default();
        let pts = spec.points();
        let scan = |rm: &TruncatedCovariance<f64>| {
            let v: Vec<f64> = pts.iter().map(|&p| ml_objective(&xd, rm, &g, p).unwrap()).collect();
            argmax(&v).unwrap()
        };
        let rm = truncate_covariance(&r, 2).unwrap();
        let scaled = truncate_covariance(&HermitianMatrix::hermitize(r.as_matrix() * Cplx::new(7.5, 0.0)), 2).unwrap();
        assert_eq!(scan(&rm), scan(&scaled));
        let p1 = ml_doa(&xd, &rm, &g, &spec).unwrap();
        let p2 = ml_doa(&xd, &scaled, &g, &spec).unwrap();
        assert!((p1 - p2).abs() < 1e-6);
    }

    #[test]
    fn two_sensor_estimate_within_three_sigma() {
        // D=1 would violate the zero-sum design, so use the smallest even D.
        let g = UlaGeometry::new(2).unwrap();
        let s = design_signals::<f64>(2, 30.0, 1.0).unwrap();
        let scn = DoaScenario::new(g, 0.2, s, vec![], 0.0, 1.0, 1).unwrap();
        let rm = identity_model(2);
        let eye = HermitianMatrix::hermitize(DMatrix::identity(2, 2));
        let sigma = mcrb_doa(0.2, &g, &eye, &eye, scn.signal_energy()).unwrap().sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let xd = simulate_target(&scn, &mut rng);
            let psi = ml_doa(&xd, &rm, &g, &GridSpec::doa_default()).unwrap();
            assert!((psi - 0.2).abs() < 3.0 * sigma + 2e-6, "{psi} vs σ={sigma}");
        }
    }

    fn population_objective(psi_d: f64, psi: f64, rinv: &DMatrix<Cplx<f64>>, g: &UlaGeometry) -> f64 {
        let ad = steering(psi_d, g);
        let a = steering(psi, g);
        let num = (ad.adjoint() * rinv * &a)[(0, 0)].norm_sqr();
        let den = (a.adjoint() * rinv * &a)[(0, 0)].re;
        num / den
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn pseudo_true_doa_is_true_doa(seed in proptest::collection::vec(-1.0f64..1.0, 72), m in 0usize..6, psi_d in -0.8f64..0.8) {
            let g = UlaGeometry::new(6).unwrap();
            let gm = DMatrix::from_fn(6, 6, |i, j| Cplx::new(seed[2 * (i * 6 + j)], seed[2 * (i * 6 + j) + 1]));
            let r = HermitianMatrix::hermitize(&gm * gm.adjoint() + DMatrix::identity(6, 6) * Cplx::new(0.05, 0.0));
            let rm = CovarianceEigen::new(&r).unwrap().truncate(m).unwrap();
            let rinv = rm.inverse().unwrap();
            let step = 1e-3;
            let pts: Vec<f64> = (0..=2000).map(|i| -1.0 + step * i as f64).collect();
            let vals: Vec<f64> = pts.iter().map(|&p| population_objective(psi_d, p, &rinv, &g)).collect();
            let best = pts[argmax(&vals).unwrap()];
            prop_assert!((best - psi_d).abs() <= step, "best {} vs {}", best, psi_d);
        }
    }
}
