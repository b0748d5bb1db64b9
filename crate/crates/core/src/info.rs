//! Classical information-criterion scores (AIC, AICc, MDL) over a list of
//! candidate orders.

use crate::scalar::Real;

/// Per-order AIC/AICc/MDL values. An AICc entry is `None` where its
/// finite-sample denominator is not positive; such orders never win.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoCriteria<T: Real> {
    pub orders: Vec<usize>,
    /// Goodness-of-fit part shared by all three criteria (`−2 × log-likelihood`).
    pub fit: Vec<T>,
    pub aic: Vec<T>,
    pub aicc: Vec<Option<T>>,
    pub mdl: Vec<T>,
}

impl<T: Real> InfoCriteria<T> {
    pub fn selected_aic(&self) -> Option<usize> {
        self.argmin(self.aic.iter().map(|&v| Some(v)))
    }

    pub fn selected_aicc(&self) -> Option<usize> {
        self.argmin(self.aicc.iter().copied())
    }

    pub fn selected_mdl(&self) -> Option<usize> {
        self.argmin(self.mdl.iter().map(|&v| Some(v)))
    }

    fn argmin(&self, values: impl Iterator<Item = Option<T>>) -> Option<usize> {
        let mut best: Option<(usize, T)> = None;
        for (&m, v) in self.orders.iter().zip(values) {
            let Some(v) = v.filter(|v| v.is_finite()) else { continue };
            match best {
                Some((bm, bv)) if bv < v || (bv == v && bm <= m) => {}
                _ => best = Some((m, v)),
            }
        }
        best.map(|(m, _)| m)
    }
}
