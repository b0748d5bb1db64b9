//! ARMA truth models and their simulation.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use super::autocov::step_down;
use super::spectrum::{poly_on_circle, SpectrumGrid, POLY_FLOOR};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Roots of the AR polynomial must lie strictly inside this radius.
pub const STABILITY_RADIUS: f64 = 0.999;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnovationLaw {
    Gaussian,
    /// Laplace with scale `σ_u/√2`, so the variance is still `σ_u²`.
    Laplacian,
}

/// `x_t = −Σ_{k=1}^p a_k x_{t−k} + Σ_{k=0}^q b_k u_{t−k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmaModel<T: Real> {
    ar: Vec<T>,
    ma: Vec<T>,
    innov_var: T,
    law: InnovationLaw,
}

impl<T: Real> ArmaModel<T> {
    pub fn new(ar: Vec<T>, ma: Vec<T>, innov_var: T, law: InnovationLaw) -> Result<Self> {
        if ma.is_empty() {
            return Err(Error::InvalidScenario("MA polynomial needs at least b_0".into()));
        }
        if !(innov_var > T::zero()) {
            return Err(Error::NonPositiveVariance);
        }
        if !is_stable(&ar, T::lit(STABILITY_RADIUS)) {
            return Err(Error::UnstableModel);
        }
        Ok(Self { ar, ma, innov_var, law })
    }

    /// MA(q) with equal taps `1/(q+1)`.
    pub fn moving_average(q: usize, innov_var: T, law: InnovationLaw) -> Result<Self> {
        let tap = T::one() / T::from_usize_lossy(q + 1);
        Self::new(Vec::new(), vec![tap; q + 1], innov_var, law)
    }

    pub fn ar(&self) -> &[T] {
        &self.ar
    }

    pub fn ma(&self) -> &[T] {
        &self.ma
    }

    pub fn innov_var(&self) -> T {
        self.innov_var
    }

    pub fn law(&self) -> InnovationLaw {
        self.law
    }

    pub fn p(&self) -> usize {
        self.ar.len()
    }

    pub fn q(&self) -> usize {
        self.ma.len() - 1
    }
}

/// Whether every root of `1 + Σ a_k z^{−k}` lies strictly inside `radius`.
/// Scaling `a_k` by `radius^{−k}` maps that disc to the unit disc, where the
/// step-down partials decide.
pub fn is_stable<T: Real>(ar: &[T], radius: T) -> bool {
    let mut scale = T::one();
    let scaled: Vec<T> = ar
        .iter()
        .map(|&a| {
            scale /= radius;
            a * scale
        })
        .collect();
    step_down(&scaled).is_ok()
}

fn draw_innovation<R: Rng + ?Sized>(law: InnovationLaw, sd: f64, rng: &mut R) -> f64 {
    match law {
        InnovationLaw::Gaussian => {
            let z: f64 = StandardNormal.sample(rng);
            sd * z
        }
        InnovationLaw::Laplacian => {
            let e1: f64 = Exp1.sample(rng);
            let e2: f64 = Exp1.sample(rng);
            sd / std::f64::consts::SQRT_2 * (e1 - e2)
        }
    }
}

/// A length-`len` realization. Models with an AR part discard a burn-in of
/// `max(500, 50p)` samples; pure MA models only draw `q` extra innovations.
pub fn simulate_arma<T: Real, R: Rng + ?Sized>(model: &ArmaModel<T>, len: usize, rng: &mut R) -> Result<Vec<T>> {
    if !is_stable(model.ar(), T::lit(STABILITY_RADIUS)) {
        return Err(Error::UnstableModel);
    }
    let sd = model.innov_var().to_f64_lossy().sqrt();
    let a: Vec<f64> = model.ar().iter().map(|v| v.to_f64_lossy()).collect();
    let b: Vec<f64> = model.ma().iter().map(|v| v.to_f64_lossy()).collect();
    let p = a.len();
    let q = b.len() - 1;
    let burn = if p > 0 { 500.max(50 * p) } else { 0 };
    let total = burn + len;
    let u: Vec<f64> = (0..total + q).map(|_| draw_innovation(model.law(), sd, rng)).collect();
    let mut x = vec![0.0f64; total];
    for t in 0..total {
        // u[t + q] is the innovation at time t
        let mut v: f64 = b.iter().enumerate().map(|(k, bk)| bk * u[t + q - k]).sum();
        for (k, ak) in a.iter().enumerate() {
            if t > k {
                v -= ak * x[t - k - 1];
            }
        }
        x[t] = v;
    }
    Ok(x[burn..].iter().map(|&v| T::lit(v)).collect())
}

/// `log(σ_u² |b(e^{jω})|² / |a(e^{jω})|²)` on the grid, both moduli floored.
pub fn log_spectrum_arma<T: Real>(model: &ArmaModel<T>, grid: &SpectrumGrid<T>) -> Vec<T> {
    let floor = T::lit(POLY_FLOOR);
    let log_var = model.innov_var().ln();
    grid.omegas()
        .iter()
        .map(|&w| {
            let (ar, ai) = poly_on_circle(T::one(), model.ar().iter().copied(), w);
            let (br, bi) = poly_on_circle(model.ma()[0], model.ma()[1..].iter().copied(), w);
            log_var + (br * br + bi * bi).max(floor).ln() - (ar * ar + ai * ai).max(floor).ln()
        })
        .collect()
}
