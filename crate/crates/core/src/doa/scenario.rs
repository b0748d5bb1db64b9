use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::geometry::{steering, UlaGeometry};
use super::Cplx;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Array, target and disturbance description for one DOA experiment.
///
/// Clutter is `P` point interferers with i.i.d. circular Gaussian amplitudes of
/// power `clutter_power` each; sensor noise is white with power `noise_power`.
#[derive(Debug, Clone, PartialEq)]
pub struct DoaScenario<T: Real> {
    geometry: UlaGeometry,
    psi_true: T,
    signals: DVector<Cplx<T>>,
    clutter_dirs: Vec<T>,
    clutter_power: T,
    noise_power: T,
    n_training: usize,
}

impl<T: Real> DoaScenario<T> {
    pub fn new(
        geometry: UlaGeometry,
        psi_true: T,
        signals: DVector<Cplx<T>>,
        clutter_dirs: Vec<T>,
        clutter_power: T,
        noise_power: T,
        n_training: usize,
    ) -> Result<Self> {
        let half_pi = T::frac_pi_2();
        if signals.is_empty() {
            return Err(Error::InvalidScenario("need at least one target snapshot".into()));
        }
        if n_training == 0 {
            return Err(Error::InvalidScenario("need at least one training snapshot".into()));
        }
        if !(clutter_power >= T::zero()) || !(noise_power >= T::zero()) {
            return Err(Error::InvalidScenario("powers must be non-negative".into()));
        }
        if std::iter::once(&psi_true).chain(clutter_dirs.iter()).any(|p| !(p.abs() < half_pi)) {
            return Err(Error::InvalidScenario("directions must satisfy |ψ| < π/2".into()));
        }
        let sum: Cplx<T> = signals.iter().copied().fold(Cplx::new(T::zero(), T::zero()), |a, b| a + b);
        if sum.norm_sqr().sqrt() > T::lit(1e-12) * signals.norm() {
            return Err(Error::InvalidScenario("target amplitudes must sum to zero".into()));
        }
        Ok(Self { geometry, psi_true, signals, clutter_dirs, clutter_power, noise_power, n_training })
    }

    pub fn geometry(&self) -> &UlaGeometry {
        &self.geometry
    }
    pub fn psi_true(&self) -> T {
        self.psi_true
    }
    pub fn signals(&self) -> &DVector<Cplx<T>> {
        &self.signals
    }
    pub fn clutter_dirs(&self) -> &[T] {
        &self.clutter_dirs
    }
    pub fn clutter_power(&self) -> T {
        self.clutter_power
    }
    pub fn noise_power(&self) -> T {
        self.noise_power
    }
    pub fn n_training(&self) -> usize {
        self.n_training
    }
    pub fn n_target(&self) -> usize {
        self.signals.len()
    }

    /// `‖s‖²`
    pub fn signal_energy(&self) -> T {
        self.signals.norm_squared()
    }

    /// Population disturbance covariance `σ_c² Σ_p a(ψ_p)a(ψ_p)ᴴ + σ² I`.
    pub fn disturbance_covariance(&self) -> DMatrix<Cplx<T>> {
        let n = self.geometry.n_sensors();
        let mut r = DMatrix::<Cplx<T>>::identity(n, n) * Cplx::new(self.noise_power, T::zero());
        for &p in &self.clutter_dirs {
            let a = steering(p, &self.geometry);
            r += &a * a.adjoint() * Cplx::new(self.clutter_power, T::zero());
        }
        r
    }

    fn clutter_steering(&self) -> Vec<DVector<Cplx<T>>> {
        self.clutter_dirs.iter().map(|&p| steering(p, &self.geometry)).collect()
    }

    fn add_disturbance<R: Rng + ?Sized>(&self, col: &mut [Cplx<T>], clutter: &[DVector<Cplx<T>>], rng: &mut R) {
        let c_scale = (self.clutter_power * T::lit(0.5)).sqrt();
        let v_scale = (self.noise_power * T::lit(0.5)).sqrt();
        for a in clutter {
            let g = complex_normal(rng, c_scale);
            for (x, ai) in col.iter_mut().zip(a.iter()) {
                *x += *ai * g;
            }
        }
        for x in col.iter_mut() {
            *x += complex_normal(rng, v_scale);
        }
    }
}

fn complex_normal<T: Real, R: Rng + ?Sized>(rng: &mut R, scale: T) -> Cplx<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Cplx::new(T::lit(re) * scale, T::lit(im) * scale)
}

/// Target-free training snapshots, one column per snapshot (`N × T`).
pub fn simulate_training<T: Real, R: Rng + ?Sized>(scn: &DoaScenario<T>, rng: &mut R) -> DMatrix<Cplx<T>> {
    let n = scn.geometry.n_sensors();
    let clutter = scn.clutter_steering();
    let mut x = DMatrix::zeros(n, scn.n_training);
    for mut col in x.column_iter_mut() {
        scn.add_disturbance(col.as_mut_slice(), &clutter, rng);
    }
    x
}

/// Target snapshots `a(ψ_d)s_j + c_j + v_j` (`N × D`).
pub fn simulate_target<T: Real, R: Rng + ?Sized>(scn: &DoaScenario<T>, rng: &mut R) -> DMatrix<Cplx<T>> {
    let n = scn.geometry.n_sensors();
    let a = steering(scn.psi_true, &scn.geometry);
    let clutter = scn.clutter_steering();
    let mut x = DMatrix::zeros(n, scn.n_target());
    for (j, mut col) in x.column_iter_mut().enumerate() {
        col.copy_from(&(&a * scn.signals[j]));
        scn.add_disturbance(col.as_mut_slice(), &clutter, rng);
    }
    x
}

/// Constant-modulus target amplitudes with alternating 0/π phase, so that
/// `Σ s_j = 0` and `|s_j|²/σ² = SNR`.
pub fn design_signals<T: Real>(n_target: usize, snr_db: T, noise_power: T) -> Result<DVector<Cplx<T>>> {
    if n_target == 0 || n_target % 2 == 1 {
        return Err(Error::OddTargetCount(n_target));
    }
    let snr = T::lit(10.0).powf(snr_db / T::lit(10.0));
    let amp = (snr * noise_power).sqrt();
    Ok(DVector::from_fn(n_target, |j, _| Cplx::new(if j % 2 == 0 { amp } else { -amp }, T::zero())))
}
