use super::autocov::{fit_from_levinson, levinson_durbin, sample_autocov, ArFit};
use super::likelihood::{pair_with_quadratic, quadratic_with_autocov, score_rows, BMode, SCORE_BLOCK};
use super::spectrum::{log_spectrum_ar, spectrum_jacobian, SpectrumGrid};
use crate::error::{Error, Result};
use crate::info::InfoCriteria;
use crate::mcrb::{mapped_cov_trace, select_model, symmetric_inverse, symmetrize, CriterionScore, SelectionResult};
use nalgebra::DMatrix;
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct SpectrumCandidate<T: Real> {
    pub score: CriterionScore<T>,
    pub fit: ArFit<T>,
    pub log_spectrum: Vec<T>,
}

#[derive(Debug, Clone)]
pub struct SpectrumSelection<T: Real> {
    pub selection: SelectionResult<T>,
    pub candidates: Vec<SpectrumCandidate<T>>,
    pub dropped: Vec<(usize, Error)>,
    /// Largest feasible order; its spectrum is the bias reference.
    pub reference_order: usize,
    /// Whether the bias terms had the reference noise removed. False when the
    /// reference sandwich could not be formed and the plug-in was used.
    pub debiased: bool,
    /// Sample variance `r̂₀` and Levinson partial correlations up to the
    /// reference order, for the classical baselines.
    pub r0: T,
    pub partials: Vec<T>,
}

impl<T: Real> SpectrumSelection<T> {
    pub fn candidate(&self, m: usize) -> Option<&SpectrumCandidate<T>> {
        self.candidates.iter().find(|c| c.score.model_index == m)
    }

    pub fn selected(&self) -> &SpectrumCandidate<T> {
        self.candidate(self.selection.selected).expect("selected candidate exists")
    }
}

/// How the squared bias of order `m` is estimated from the distance between
/// its spectrum and the reference spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BiasEstimate {
    /// `‖φ̂^(M) − φ̂^(m)‖²/W` minus the sandwich estimate of the trace of
    /// `Var(φ̂^(M) − φ̂^(m))`, floored at zero. The variance comes from the
    /// stacked per-sample scores of both fits, so the cross covariance of the
    /// nested estimates is included.
    #[default]
    Debiased,
    /// The raw distance `‖φ̂^(M) − φ̂^(m)‖²/W`. Its expectation carries the
    /// estimation noise of the reference, which roughly cancels the growth of
    /// the covariance term and leaves the ranking of orders above the true
    /// one close to random.
    PlugIn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SpectrumCriterionOptions {
    pub mode: BMode,
    pub bias: BiasEstimate,
}

struct Fitted<T: Real> {
    order: usize,
    fit: ArFit<T>,
    phi: Vec<T>,
    /// `J·A⁻¹` and the covariance trace, or the reason they are missing.
    mapped: Result<(DMatrix<T>, T)>,
}

/// MCRB criterion for AR order selection in spectral estimation.
///
/// Every order is fitted by Yule–Walker. The bias term compares each
/// candidate's log-spectrum with that of the largest order `M`; the
/// covariance term maps the sample MCRB through the spectrum Jacobian. Both
/// are averaged over the grid. Orders with `T < 3m+1` are dropped, and `M` is
/// the largest order that survives.
pub fn spectrum_criterion<T: Real>(
    x: &[T],
    orders: &[usize],
    grid: &SpectrumGrid<T>,
    options: &SpectrumCriterionOptions,
) -> Result<SpectrumSelection<T>> {
    if orders.is_empty() {
        return Err(Error::EmptyCandidateSet);
    }
    let n = x.len();
    let mut dropped = Vec::new();
    let mut feasible: Vec<usize> = Vec::new();
    for &m in orders {
        if n > 3 * m {
            feasible.push(m);
        } else {
            dropped.push((m, Error::TooFewSamples { needed: 3 * m + 1, order: m, got: n }));
        }
    }
    feasible.sort_unstable();
    feasible.dedup();
    let Some(&max) = feasible.last() else {
        return Err(Error::AllCandidatesFailed);
    };
    let r = sample_autocov(x, max)?;
    let lev = levinson_durbin(&r, max).map_err(|_| Error::AllCandidatesFailed)?;
    let w = T::from_usize_lossy(grid.len());

    let fitted: Vec<Fitted<T>> = feasible
        .iter()
        .map(|&m| {
            let fit = fit_from_levinson(&lev, m);
            let phi = log_spectrum_ar(&fit, grid);
            let q = quadratic_with_autocov(x, &r, m);
            let mapped = pair_with_quadratic(&fit, x, &q, options.mode).and_then(|pair| {
                let a_inv = symmetric_inverse(pair.a())?;
                let jac = spectrum_jacobian(&fit, grid);
                let c = symmetrize(&(&a_inv * pair.b() * &a_inv));
                let tr = mapped_cov_trace(&jac, &c)?;
                Ok((jac * a_inv, tr / w))
            });
            Fitted { order: m, fit, phi, mapped }
        })
        .collect();
    let reference = fitted.last().expect("nonempty");
    let noise = match (options.bias, &reference.mapped) {
        (BiasEstimate::Debiased, Ok(_)) => Some(difference_noise(x, &fitted, w)),
        _ => None,
    };

    let mut candidates = Vec::with_capacity(fitted.len());
    for (i, f) in fitted.iter().enumerate() {
        let distance = reference.phi.iter().zip(&f.phi).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>() / w;
        let bias_sq = match noise.as_ref().and_then(|v| v[i]) {
            Some(v) if f.order != max => (distance - v).max(T::zero()),
            _ => distance,
        };
        match f.mapped.as_ref().map_err(Clone::clone).and_then(|(_, tr)| CriterionScore::new(f.order, bias_sq, *tr)) {
            Ok(score) => candidates.push(SpectrumCandidate { score, fit: f.fit.clone(), log_spectrum: f.phi.clone() }),
            Err(e) => dropped.push((f.order, e)),
        }
    }
    if candidates.is_empty() {
        return Err(Error::AllCandidatesFailed);
    }
    let selection = select_model(candidates.iter().map(|c| c.score).collect())?;
    dropped.sort_by_key(|(m, _)| *m);
    Ok(SpectrumSelection {
        selection,
        candidates,
        dropped,
        reference_order: max,
        debiased: noise.is_some(),
        r0: r[0],
        partials: lev.partials,
    })
}

/// `tr Var(φ̂^(M) − φ̂^(m))/W` for every fitted order, from the linearization
/// `δφ̂^(m) ≈ −J_m A_m⁻¹ Σ_t s_t^(m)` on the samples every order can score.
fn difference_noise<T: Real>(x: &[T], fitted: &[Fitted<T>], w: T) -> Vec<Option<T>> {
    let reference = fitted.last().expect("nonempty");
    let Ok((h_ref, _)) = &reference.mapped else {
        return vec![None; fitted.len()];
    };
    let rows: Vec<usize> = (reference.order..x.len()).collect();
    let mut grams: Vec<(DMatrix<T>, DMatrix<T>)> = fitted
        .iter()
        .map(|f| (DMatrix::zeros(f.order + 1, f.order + 1), DMatrix::zeros(reference.order + 1, f.order + 1)))
        .collect();
    for chunk in rows.chunks(SCORE_BLOCK) {
        let z_ref = score_rows(&reference.fit, x, chunk);
        for (f, (own, cross)) in fitted.iter().zip(grams.iter_mut()) {
            if f.mapped.is_err() {
                continue;
            }
            let z = score_rows(&f.fit, x, chunk);
            own.gemm_tr(T::one(), &z, &z, T::one());
            cross.gemm_tr(T::one(), &z_ref, &z, T::one());
        }
    }
    let ref_gram = &grams.last().expect("nonempty").0;
    let ref_part = (h_ref.tr_mul(h_ref)).component_mul(ref_gram).sum();
    fitted
        .iter()
        .zip(&grams)
        .map(|(f, (own, cross))| {
            let (h, _) = f.mapped.as_ref().ok()?;
            let own_part = h.tr_mul(h).component_mul(own).sum();
            let cross_part = h_ref.tr_mul(h).component_mul(cross).sum();
            Some((ref_part + own_part - T::lit(2.0) * cross_part).max(T::zero()) / w)
        })
        .collect()
}

/// AIC, MDL and AICc for AR orders from `r̂₀` and the partial correlations:
/// `T(log r̂₀ + Σ_{n≤m} log(1−K̂_n²))` plus `2(m+1)`, `(m+1) log T` and
/// `2(T+1)(m+1)/(T−m−1)` respectively.
pub fn ar_baseline_criteria<T: Real>(r0: T, partials: &[T], t: usize, orders: &[usize]) -> Result<InfoCriteria<T>> {
    if !(r0 > T::zero()) {
        return Err(Error::NonPositiveR0);
    }
    if let Some(i) = partials.iter().position(|k| !(k.abs() < T::one())) {
        return Err(Error::DegeneratePartial { index: i + 1 });
    }
    let tt = T::from_usize_lossy(t);
    let mut cum = vec![r0.ln()];
    for &k in partials {
        let last = *cum.last().expect("nonempty");
        cum.push(last + (T::one() - k * k).ln());
    }
    let mut out = InfoCriteria { orders: Vec::new(), fit: Vec::new(), aic: Vec::new(), aicc: Vec::new(), mdl: Vec::new() };
    for &m in orders {
        if m > partials.len() {
            return Err(Error::OrderOutOfRange { order: m, max: partials.len() });
        }
        let fit = tt * cum[m];
        let params = T::from_usize_lossy(m + 1);
        out.orders.push(m);
        out.fit.push(fit);
        out.aic.push(fit + T::lit(2.0) * params);
        out.mdl.push(fit + params * tt.ln());
        out.aicc.push((t > m + 1).then(|| fit + T::lit(2.0) * (tt + T::one()) * params / (tt - params)));
    }
    Ok(out)
}

/// Mean squared log-spectrum error of each candidate against `truth`.
pub fn spectrum_mse<T: Real>(phi: &[T], truth: &[T]) -> T {
    let w = T::from_usize_lossy(truth.len());
    phi.iter().zip(truth).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>() / w
}
