use nalgebra::DVector;

use super::Cplx;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Half-wavelength uniform linear array with `n_sensors` elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UlaGeometry {
    n_sensors: usize,
}

impl UlaGeometry {
    pub fn new(n_sensors: usize) -> Result<Self> {
        if n_sensors < 2 {
            return Err(Error::InvalidScenario(format!("need at least 2 sensors, got {n_sensors}")));
        }
        Ok(Self { n_sensors })
    }

    pub fn n_sensors(&self) -> usize {
        self.n_sensors
    }

    /// Element offset from the array phase center, `n − (N−1)/2`.
    #[inline]
    pub(crate) fn offset<T: Real>(&self, n: usize) -> T {
        T::from_usize_lossy(n) - T::from_usize_lossy(self.n_sensors - 1) * T::lit(0.5)
    }
}

/// Unit-norm steering vector `[a(ψ)]_n = exp(jπ(n−(N−1)/2) sin ψ) / √N`.
pub fn steering<T: Real>(psi: T, geom: &UlaGeometry) -> DVector<Cplx<T>> {
    let n = geom.n_sensors();
    let scale = T::one() / T::from_usize_lossy(n).sqrt();
    let k = T::pi() * psi.sin();
    DVector::from_fn(n, |i, _| {
        let (s, c) = (k * geom.offset::<T>(i)).sin_cos();
        Cplx::new(c * scale, s * scale)
    })
}

/// Derivative of [`steering`] with respect to ψ.
pub fn steering_derivative<T: Real>(psi: T, geom: &UlaGeometry) -> DVector<Cplx<T>> {
    let a = steering(psi, geom);
    let c = T::pi() * psi.cos();
    DVector::from_fn(geom.n_sensors(), |i, _| a[i] * Cplx::new(T::zero(), c * geom.offset::<T>(i)))
}
