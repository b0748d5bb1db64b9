use nalgebra::{DMatrix, DVector};

use super::covariance::{sample_covariance, CovarianceEigen, TruncatedCovariance, LOADING_EPS};
use super::estimate::WhitenedObjective;
use super::geometry::{steering_derivative, UlaGeometry};
use super::Cplx;
use crate::error::{Error, Result};
use crate::info::InfoCriteria;
use crate::mcrb::{select_model, CriterionScore, SelectionResult, MAX_CONDITION};
use crate::scalar::Real;
use crate::search::GridSpec;

/// Diagonal loading policy for the training covariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Loading {
    /// Load by `ε · tr(R̂)/N` when `T < N` or the condition number exceeds the gate.
    #[default]
    Auto,
    Disabled,
}

/// What stands in for the unknown disturbance covariance `R_x` in the
/// numerator `ȧᴴR̂_m⁻¹R_xR̂_m⁻¹ȧ` of the plug-in score.
///
/// The numerator is a second moment of the disturbance seen through the
/// model's weight vector. It must be estimated from snapshots that did not
/// build the model, otherwise the full-rank model always looks best.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Plugin {
    /// Leave-one-out training terms and target residuals, pooled by count.
    #[default]
    Pooled,
    /// Leave-one-out over the training snapshots only: each snapshot is
    /// scored with the order-`m` model built from the other `T−1`.
    CrossValidated,
    /// Target-set residuals after removing the fitted signal.
    TargetResiduals,
    /// The full-rank training covariance `R̂_{x,N−1}`. It is also the
    /// `m = N−1` model, so by Cauchy–Schwarz that order scores lowest at any
    /// fixed `ψ`.
    TrainingCovariance,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoaCriterionOptions<T: Real> {
    pub search: GridSpec<T>,
    pub loading: Loading,
    pub plugin: Plugin,
    pub rule: SelectionRule,
}

/// How the order is picked from the candidate scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelectionRule {
    /// Smallest order whose score is within one standard error of the
    /// minimum score.
    #[default]
    OneStandardError,
    Argmin,
}

impl<T: Real> Default for DoaCriterionOptions<T> {
    fn default() -> Self {
        Self { search: GridSpec::doa_default(), loading: Loading::Auto, plugin: Plugin::default(), rule: SelectionRule::default() }
    }
}

/// One covariance-model candidate: its plug-in score and ML DOA.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoaCandidate<T: Real> {
    pub score: CriterionScore<T>,
    /// Standard error of the score from the spread of its plug-in terms.
    pub score_se: T,
    pub psi_hat: T,
}

#[derive(Debug, Clone)]
pub struct DoaSelection<T: Real> {
    pub selection: SelectionResult<T>,
    pub candidates: Vec<DoaCandidate<T>>,
    pub dropped: Vec<(usize, Error)>,
    /// ML DOA under the selected model.
    pub estimate: T,
    /// Eigendecomposition of the (possibly loaded) training covariance.
    pub eigen: CovarianceEigen<T>,
    pub loaded: bool,
}

impl<T: Real> DoaSelection<T> {
    pub fn psi_hat(&self, m: usize) -> Option<T> {
        self.candidates.iter().find(|c| c.score.model_index == m).map(|c| c.psi_hat)
    }

    pub fn model(&self, m: usize) -> Result<TruncatedCovariance<T>> {
        self.eigen.truncate(m)
    }

    /// Criterion value of candidate `m` on the bound scale, i.e. with the
    /// model-independent factor `1/(2‖s‖²)` restored.
    pub fn reported_bound(&self, m: usize, signal_energy: T) -> Option<T> {
        self.selection.score_for(m).map(|s| s.total / (T::lit(2.0) * signal_energy))
    }
}

/// Eigendecomposition of the training covariance with the loading policy
/// applied. Returns the decomposition and whether loading engaged.
pub fn training_eigen<T: Real>(x_train: &DMatrix<Cplx<T>>, loading: Loading) -> Result<(CovarianceEigen<T>, bool)> {
    let n = x_train.nrows();
    let r = sample_covariance(x_train);
    let eigen = CovarianceEigen::new(&r)?;
    let needs = x_train.ncols() < n || eigen.condition() > T::lit(MAX_CONDITION);
    if loading == Loading::Auto && needs {
        let delta = T::lit(LOADING_EPS) * r.trace() / T::from_usize_lossy(n);
        Ok((eigen.loaded(delta), true))
    } else {
        Ok((eigen, false))
    }
}

/// MCRB-based covariance-order selection for DOA estimation.
///
/// For every order `m = 0..N−1`: build the truncated model, find its ML DOA
/// on the target set, and score it by
/// `ȧᴴR̂_m⁻¹R_xR̂_m⁻¹ȧ / (ȧᴴR̂_m⁻¹ȧ)²` at the estimate, with the numerator
/// estimated as chosen by [`Plugin`]. The signal-energy factor is the same for
/// every candidate and is left out of the score.
pub fn doa_criterion<T: Real>(
    x_train: &DMatrix<Cplx<T>>,
    x_target: &DMatrix<Cplx<T>>,
    geom: &UlaGeometry,
    opts: &DoaCriterionOptions<T>,
) -> Result<DoaSelection<T>> {
    let n = geom.n_sensors();
    if x_train.nrows() != n || x_target.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: format!("{n} rows"),
            got: format!("training {:?}, target {:?}", x_train.shape(), x_target.shape()),
        });
    }
    let (eigen, loaded) = training_eigen(x_train, opts.loading)?;
    let obj = WhitenedObjective::new(eigen.eigvecs(), x_target, *geom)?;
    let points = opts.search.points();
    let projected: Vec<DVector<Cplx<T>>> = points.iter().map(|&p| obj.project(p)).collect();
    let u_adj = eigen.eigvecs().adjoint();
    let full = eigen.eigvals();

    let loo = match opts.plugin {
        Plugin::CrossValidated | Plugin::Pooled => leave_one_out(x_train, opts.loading),
        _ => Ok(Vec::new()),
    };

    let mut candidates = Vec::with_capacity(n);
    let mut dropped = Vec::new();
    for m in 0..n {
        let outcome = eigen.truncate(m).and_then(|model| {
            let inv = model.inverse_eigvals()?;
            let psi_hat = obj.maximize(&points, &projected, &inv, opts.search.tol)?;
            let c = &u_adj * steering_derivative(psi_hat, geom);
            let mut p = T::zero();
            let mut q = T::zero();
            for i in 0..n {
                let w = c[i].norm_sqr() * inv[i];
                p += w;
                q += w * inv[i] * full[i];
            }
            let terms = match opts.plugin {
                Plugin::TrainingCovariance => vec![q],
                Plugin::TargetResiduals => obj.residual_terms(psi_hat, &c, &inv),
                Plugin::CrossValidated => loo_terms(loo.as_ref().map_err(Clone::clone)?, m, psi_hat, geom)?,
                Plugin::Pooled => {
                    let mut all = obj.residual_terms(psi_hat, &c, &inv);
                    all.extend(loo_terms(loo.as_ref().map_err(Clone::clone)?, m, psi_hat, geom)?);
                    all
                }
            };
            let (q, q_se) = mean_and_se(&terms);
            let p2 = p * p;
            let score = CriterionScore::new(m, T::zero(), q / p2)?;
            Ok(DoaCandidate { score, score_se: q_se / p2, psi_hat })
        });
        match outcome {
            Ok(c) => candidates.push(c),
            Err(e) => dropped.push((m, e)),
        }
    }
    if candidates.is_empty() {
        return Err(Error::AllCandidatesFailed);
    }
    let mut selection = select_model(candidates.iter().map(|c| c.score).collect())?;
    if opts.rule == SelectionRule::OneStandardError {
        let best = candidates.iter().find(|c| c.score.model_index == selection.selected).expect("selected candidate exists");
        let limit = best.score.total + best.score_se;
        selection.selected = candidates
            .iter()
            .filter(|c| c.score.total <= limit)
            .map(|c| c.score.model_index)
            .min()
            .expect("the minimizer qualifies");
    }
    let estimate = candidates
        .iter()
        .find(|c| c.score.model_index == selection.selected)
        .map(|c| c.psi_hat)
        .expect("selected candidate exists");
    Ok(DoaSelection { selection, candidates, dropped, estimate, eigen, loaded })
}

/// Per training snapshot: eigendecomposition of the covariance of the other
/// snapshots, and the held-out snapshot expressed in its eigenbasis.
type LooFold<T> = (CovarianceEigen<T>, DVector<Cplx<T>>);

fn leave_one_out<T: Real>(x_train: &DMatrix<Cplx<T>>, loading: Loading) -> Result<Vec<LooFold<T>>> {
    let t = x_train.ncols();
    if t < 2 {
        return Err(Error::InvalidScenario("leave-one-out needs at least two training snapshots".into()));
    }
    (0..t)
        .map(|k| {
            let rest = x_train.clone().remove_column(k);
            let (eigen, _) = training_eigen(&rest, loading)?;
            let y = eigen.eigvecs().adjoint() * x_train.column(k);
            Ok((eigen, y))
        })
        .collect()
}

/// Terms `|ȧᴴ R̂_{m,(−t)}⁻¹ x_t|²`, one per training snapshot.
fn loo_terms<T: Real>(folds: &[LooFold<T>], m: usize, psi: T, geom: &UlaGeometry) -> Result<Vec<T>> {
    let d = steering_derivative(psi, geom);
    folds
        .iter()
        .map(|(eigen, y)| {
            let inv = eigen.truncate(m)?.inverse_eigvals()?;
            let c = eigen.eigvecs().adjoint() * &d;
            let mut g = Cplx::new(T::zero(), T::zero());
            for i in 0..c.len() {
                g += c[i].conj() * y[i] * inv[i];
            }
            Ok(g.norm_sqr())
        })
        .collect()
}

fn mean_and_se<T: Real>(terms: &[T]) -> (T, T) {
    let n = T::from_usize_lossy(terms.len());
    let mean = terms.iter().copied().sum::<T>() / n;
    if terms.len() < 2 {
        return (mean, T::zero());
    }
    let var = terms.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / (n - T::one());
    (mean, (var / n).sqrt())
}

/// Wax–Kailath AIC/AICc/MDL over interference orders `m = 0..N−1` from the
/// descending training eigenvalues. The additive constant of the maximized
/// log-likelihood is taken as zero.
pub fn wax_criteria<T: Real>(eigvals: &[T], n_training: usize, n_sensors: usize) -> Result<InfoCriteria<T>> {
    if eigvals.len() != n_sensors {
        return Err(Error::DimensionMismatch { expected: format!("{n_sensors} eigenvalues"), got: format!("{}", eigvals.len()) });
    }
    if let Some(index) = eigvals.iter().position(|&l| !(l > T::zero())) {
        return Err(Error::NonPositiveEigenvalue { index });
    }
    let t = T::from_usize_lossy(n_training);
    let n = n_sensors;
    let logs: Vec<T> = eigvals.iter().map(|l| l.ln()).collect();
    let mut out = InfoCriteria { orders: Vec::new(), fit: Vec::new(), aic: Vec::new(), aicc: Vec::new(), mdl: Vec::new() };
    for m in 0..n {
        let tail = n - m;
        let sigma2 = eigvals[m..].iter().copied().sum::<T>() / T::from_usize_lossy(tail);
        let log_sigma = sigma2.ln();
        let loglik = t * logs[m..].iter().map(|&l| l - log_sigma).sum::<T>();
        let params = T::from_usize_lossy(m * (2 * n - m) + 1);
        let fit = -T::lit(2.0) * loglik;
        let denom = t - T::one() - params;
        out.orders.push(m);
        out.fit.push(fit);
        out.aic.push(fit + T::lit(2.0) * params);
        out.mdl.push(fit + params * t.ln());
        out.aicc.push((denom > T::zero()).then(|| fit + T::lit(2.0) * t * params / denom));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doa::{design_signals, simulate_target, simulate_training, DoaScenario};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn equal_eigenvalues_give_zero_loglik() {
        let c = wax_criteria(&[2.0f64; 5], 50, 5).unwrap();
        assert!(c.fit.iter().all(|&f| f.abs() < 1e-12));
        assert_eq!(c.selected_mdl(), Some(0));
        assert_eq!(c.selected_aic(), Some(0));
    }

    #[test]
    fn hand_computed_three_sensor_case() {
        let c = wax_criteria(&[10.0, 1.0, 1.0], 100, 3).unwrap();
        // L(1) = 0; L(0) = 100 Σ log(λ/4)
        let l0 = 100.0 * ((10.0f64 / 4.0).ln() + 2.0 * (0.25f64).ln());
        assert!((c.fit[0] + 2.0 * l0).abs() < 1e-10);
        assert!(c.fit[1].abs() < 1e-12);
        assert!((c.mdl[0] - (-2.0 * l0 + 100f64.ln())).abs() < 1e-10);
        assert!((c.mdl[1] - 6.0 * 100f64.ln()).abs() < 1e-10);
        assert_eq!(c.selected_mdl(), Some(1));
    }

    #[test]
    fn aicc_guard_excludes_overparameterized_orders() {
        // N=11, T=12: P_1 = 22 > T − 1
        let c = wax_criteria(&[5.0, 4.0, 3.0, 2.0, 1.5, 1.2, 1.1, 1.0, 0.9, 0.8, 0.7], 12, 11).unwrap();
        assert!(c.aicc[0].is_some());
        assert!(c.aicc[1..].iter().all(Option::is_none));
        assert_eq!(c.selected_aicc(), Some(0));
    }

    #[test]
    fn non_positive_eigenvalue_rejected() {
        assert_eq!(wax_criteria(&[1.0, 0.0], 10, 2).unwrap_err(), Error::NonPositiveEigenvalue { index: 1 });
    }

    #[test]
    fn all_candidates_fail_without_loading() {
        let g = UlaGeometry::new(4).unwrap();
        let x_train = DMatrix::<Cplx<f64>>::zeros(4, 1);
        let x_target = DMatrix::from_element(4, 2, Cplx::new(1.0, 0.0));
        let opts = DoaCriterionOptions { loading: Loading::Disabled, ..Default::default() };
        assert!(matches!(doa_criterion(&x_train, &x_target, &g, &opts), Err(Error::AllCandidatesFailed)));
    }

    #[test]
    fn white_training_mostly_selects_order_zero() {
        let g = UlaGeometry::new(11).unwrap();
        let scn = DoaScenario::new(g, 0.0, design_signals(10, 20.0, 1.0).unwrap(), vec![], 0.0, 1.0, 100).unwrap();
        let mut hits = 0;
        let trials = 500;
        for seed in 0..trials {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let xt = simulate_training(&scn, &mut rng);
            let xd = simulate_target(&scn, &mut rng);
            let sel = doa_criterion(&xt, &xd, &g, &DoaCriterionOptions::default()).unwrap();
            if sel.selection.selected == 0 {
                hits += 1;
            }
        }
        assert!(hits as f64 >= 0.9 * trials as f64, "{hits}/{trials}");
    }

    #[test]
    fn short_training_engages_loading() {
        let g = UlaGeometry::new(6).unwrap();
        let scn = DoaScenario::new(g, 0.1, design_signals(2, 20.0, 1.0).unwrap(), vec![0.7], 100.0, 1.0, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xt = simulate_training(&scn, &mut rng);
        let xd = simulate_target(&scn, &mut rng);
        let sel = doa_criterion(&xt, &xd, &g, &DoaCriterionOptions::default()).unwrap();
        assert!(sel.loaded);
        assert!(sel.selection.scores.iter().all(|s| s.bias_sq == 0.0 && s.total >= 0.0));
    }
}
