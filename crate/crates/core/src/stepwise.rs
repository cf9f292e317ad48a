//! Gaussian covariate stepwise selection.
//!
//! At stage ℓ the best remaining covariate is compared with the best (or
//! ν-th best) of `ek - ℓ` fresh Gaussian covariates. Its P-value is
//!
//! ```text
//! 1 - B_{ek-ℓ+1-ν, ν}( B_{1/2, (n-ℓ-1)/2}(1 - ss_best / ss_cur) )
//! ```
//!
//! and selection stops as soon as the P-value exceeds `alpha`.

use serde::Serialize;

use crate::data::{ColMatrix, Dataset};
use crate::error::{Error, Result};
use crate::regression::{fit_subset, ResidualState};
use crate::special::{self, BetaParams};

/// Cut-off and order-statistic settings for a selection run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PvalueConfig {
    /// P-value cut-off. Zero disables selection.
    pub alpha: f64,
    /// Maximum number of covariates per run.
    pub kmax: usize,
    /// Order-statistic parameter, `1 <= nu`; need not be an integer.
    pub nu: f64,
    /// Effective number of covariates in the P-value. Defaults to the number
    /// of candidate columns.
    pub ek: Option<f64>,
    /// Include an intercept by centering.
    pub centered: bool,
    /// Record misclassification counts (label-valued responses only).
    pub misclass: bool,
}

impl PvalueConfig {
    pub fn new(alpha: f64, kmax: usize) -> Self {
        Self {
            alpha,
            kmax,
            nu: 1.0,
            ek: None,
            centered: true,
            misclass: false,
        }
    }

    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu = nu;
        self
    }

    pub fn with_ek(mut self, ek: f64) -> Self {
        self.ek = Some(ek);
        self
    }

    pub fn with_misclass(mut self, misclass: bool) -> Self {
        self.misclass = misclass;
        self
    }

    pub fn with_centered(mut self, centered: bool) -> Self {
        self.centered = centered;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::domain(format!("alpha must lie in [0, 1], got {}", self.alpha)));
        }
        if self.kmax == 0 {
            return Err(Error::domain("kmax must be at least 1"));
        }
        if !(self.nu.is_finite() && self.nu >= 1.0) {
            return Err(Error::domain(format!("nu must be >= 1, got {}", self.nu)));
        }
        if let Some(ek) = self.ek {
            if !(ek.is_finite() && ek >= self.nu) {
                return Err(Error::domain(format!("ek = {ek} must be finite and >= nu")));
            }
        }
        Ok(())
    }
}

/// One selected covariate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionStep {
    /// Column index (0-based).
    pub index: usize,
    /// P-value at the inclusion step.
    pub pvalue: f64,
    /// Residual sum of squares after inclusion.
    pub rss: f64,
    pub misclass: Option<usize>,
}

/// Why a selection run ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum StopReason {
    /// The best remaining covariate had this P-value, above the cut-off.
    PvalueAboveAlpha(f64),
    /// The cut-off is zero.
    ZeroAlpha,
    /// The covariate limit was reached.
    Kmax,
    /// No eligible candidate remains.
    NoCandidates,
    /// The residual sum of squares reached zero.
    PerfectFit,
    /// Fewer than ν Gaussian comparisons remain (`ek - ℓ < ν`).
    EffectiveKExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionPath {
    pub steps: Vec<SelectionStep>,
    /// Residual sum of squares before the first inclusion.
    pub ss0: f64,
    /// Effective number of covariates used in the P-values.
    pub ek: f64,
    pub n: usize,
    pub stop: StopReason,
}

impl SelectionPath {
    pub fn indices(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.index).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }
}

/// One linear approximation of the repeated procedure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionGroup {
    /// 1-based group number.
    pub id: usize,
    pub steps: Vec<SelectionStep>,
}

impl SelectionGroup {
    pub fn indices(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.index).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionGroupList {
    pub groups: Vec<SelectionGroup>,
    pub total_covariates: usize,
}

/// Limits on the repeated procedure.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RepeatLimits {
    /// Maximum number of groups.
    pub nmax: Option<usize>,
    /// Maximum total number of covariates; defaults to `kmax * nmax`.
    pub vmax: Option<usize>,
}

/// Probability that the ν-th best of `m` Gaussian covariates beats the
/// observed reduction from `ss_old` to `ss_new`, where a single Gaussian
/// covariate's relative reduction is Beta(1/2, shape_b).
pub(crate) fn gaussian_pvalue(
    ss_new: f64,
    ss_old: f64,
    shape_b: f64,
    m: f64,
    nu: f64,
) -> Result<f64> {
    if !(ss_old > 0.0) {
        return Err(Error::PerfectFit);
    }
    let ss_new = ss_new.clamp(0.0, ss_old);
    let ratio = ss_new / ss_old;
    let gain = (ss_old - ss_new) / ss_old;
    if !(m >= nu) {
        return Err(Error::domain(format!(
            "{m} Gaussian comparisons cannot supply order statistic nu = {nu}"
        )));
    }
    let inner = BetaParams::new(0.5, shape_b)?;
    let w = special::beta_tails(gain, ratio, inner).1;
    special::order_statistic_pvalue_from_tail(w, m, nu)
}

/// P-value of the best candidate at stage `ell` (ℓ covariates already
/// selected), given its residual sum of squares `ss_best` and the current one
/// `ss_cur`.
pub fn step_pvalue(ss_best: f64, ss_cur: f64, n: usize, ell: usize, ek: f64, nu: f64) -> Result<f64> {
    if ell + 1 >= n {
        return Err(Error::domain(format!(
            "stage {ell} leaves no residual degrees of freedom with n = {n}"
        )));
    }
    let shape_b = (n - ell - 1) as f64 / 2.0;
    gaussian_pvalue(ss_best, ss_cur, shape_b, ek - ell as f64, nu)
}

/// Sorted distinct integer labels of a classification response.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LabelSet(Vec<f64>);

impl LabelSet {
    pub(crate) fn from_response(y: &[f64]) -> Result<Self> {
        if let Some(v) = y.iter().find(|v| v.fract() != 0.0) {
            return Err(Error::domain(format!(
                "misclassification counts need integer labels, found {v}"
            )));
        }
        let mut labels = y.to_vec();
        labels.sort_by(f64::total_cmp);
        labels.dedup();
        Ok(Self(labels))
    }

    /// Nearest label; exact midpoints go to the lower label.
    pub(crate) fn classify(&self, v: f64) -> f64 {
        let mut best = self.0[0];
        for &l in &self.0[1..] {
            if (v - l).abs() < (v - best).abs() {
                best = l;
            }
        }
        best
    }

    pub(crate) fn count_errors(&self, y: &[f64], fitted: &[f64]) -> usize {
        y.iter()
            .zip(fitted)
            .filter(|(y, f)| self.classify(**f) != **y)
            .count()
    }
}

pub(crate) fn resolve_ek(cfg: &PvalueConfig, candidates: usize) -> f64 {
    cfg.ek.unwrap_or(candidates as f64)
}

/// Stepwise selection of `y` on the `candidates` columns of `x`.
pub(crate) fn select_path(
    y: &[f64],
    x: &ColMatrix,
    candidates: &[usize],
    cfg: &PvalueConfig,
    labels: Option<&LabelSet>,
) -> Result<SelectionPath> {
    let mut state = ResidualState::new(y, x, candidates, cfg.centered)?;
    let n = state.n();
    let ek = resolve_ek(cfg, candidates.len());
    let cap = cfg.kmax.min(n.saturating_sub(2)).min(candidates.len());
    let mut steps = Vec::new();

    let stop = loop {
        let ell = state.active().len();
        if ell >= cap {
            break StopReason::Kmax;
        }
        if ek - (ell as f64) < cfg.nu {
            break StopReason::EffectiveKExhausted;
        }
        if !(state.ss_r() > 0.0) {
            break StopReason::PerfectFit;
        }
        let Some(best) = state.scan_candidates(None) else {
            break StopReason::NoCandidates;
        };
        let pvalue = step_pvalue(best.ss, state.ss_r(), n, ell, ek, cfg.nu)?;
        if cfg.alpha == 0.0 {
            break StopReason::ZeroAlpha;
        }
        if pvalue > cfg.alpha {
            break StopReason::PvalueAboveAlpha(pvalue);
        }
        state.add_covariate(best.index)?;
        let misclass = labels.map(|l| l.count_errors(y, &state.fitted()));
        steps.push(SelectionStep {
            index: best.index,
            pvalue,
            rss: best.ss,
            misclass,
        });
    };

    Ok(SelectionPath {
        steps,
        ss0: state.ss0(),
        ek,
        n,
        stop,
    })
}

fn labels_for(y: &[f64], cfg: &PvalueConfig) -> Result<Option<LabelSet>> {
    cfg.misclass.then(|| LabelSet::from_response(y)).transpose()
}

/// Gaussian covariate stepwise regression over all columns of `data`.
pub fn stepwise(data: &Dataset, cfg: &PvalueConfig) -> Result<SelectionPath> {
    cfg.validate()?;
    let labels = labels_for(data.y(), cfg)?;
    let all: Vec<usize> = (0..data.k()).collect();
    select_path(data.y(), data.x(), &all, cfg, labels.as_ref())
}

pub(crate) fn repeated_on(
    y: &[f64],
    x: &ColMatrix,
    candidates: &[usize],
    cfg: &PvalueConfig,
    limits: RepeatLimits,
    labels: Option<&LabelSet>,
) -> Result<SelectionGroupList> {
    let nmax = limits.nmax.unwrap_or(usize::MAX);
    let vmax = limits.vmax.unwrap_or_else(|| cfg.kmax.saturating_mul(nmax));
    let mut excluded = vec![false; x.ncols()];
    let mut groups: Vec<SelectionGroup> = Vec::new();
    let mut total = 0usize;

    while groups.len() < nmax && total < vmax {
        let remaining: Vec<usize> = candidates.iter().copied().filter(|&j| !excluded[j]).collect();
        if remaining.is_empty() {
            break;
        }
        let run_cfg = PvalueConfig {
            kmax: cfg.kmax.min(vmax - total),
            ..cfg.clone()
        };
        let path = select_path(y, x, &remaining, &run_cfg, labels)?;
        if path.is_empty() {
            break;
        }
        for step in &path.steps {
            excluded[step.index] = true;
        }
        total += path.len();
        groups.push(SelectionGroup {
            id: groups.len() + 1,
            steps: path.steps,
        });
    }

    Ok(SelectionGroupList {
        groups,
        total_covariates: total,
    })
}

/// Repeated stepwise selection: each run's covariates form one linear
/// approximation and are excluded from all later runs.
pub fn repeated_stepwise(
    data: &Dataset,
    cfg: &PvalueConfig,
    limits: RepeatLimits,
) -> Result<SelectionGroupList> {
    cfg.validate()?;
    if limits.nmax == Some(0) || limits.vmax == Some(0) {
        return Err(Error::domain("nmax and vmax must be at least 1"));
    }
    let labels = labels_for(data.y(), cfg)?;
    let all: Vec<usize> = (0..data.k()).collect();
    repeated_on(data.y(), data.x(), &all, cfg, limits, labels.as_ref())
}

/// Misclassifications of the least-squares fit (with intercept) on `subset`
/// when each fitted value is assigned to the nearest response label.
pub fn misclassification_count(data: &Dataset, subset: &[usize]) -> Result<usize> {
    let labels = LabelSet::from_response(data.y())?;
    if labels.0.len() == 1 {
        return Ok(0);
    }
    let fit = fit_subset(data.y(), data.x(), subset, true)?;
    Ok(labels.count_errors(data.y(), &fit.fitted()))
}

/// Elementwise average of the least-squares fits (with intercept) of every
/// group.
pub fn averaged_fit(data: &Dataset, groups: &SelectionGroupList) -> Result<Vec<f64>> {
    if groups.groups.is_empty() {
        return Err(Error::domain("averaged fit needs at least one group"));
    }
    let mut avg = vec![0.0; data.n()];
    for group in &groups.groups {
        let fit = fit_subset(data.y(), data.x(), &group.indices(), true)?;
        for (a, f) in avg.iter_mut().zip(fit.fitted()) {
            *a += f;
        }
    }
    let g = groups.groups.len() as f64;
    avg.iter_mut().for_each(|a| *a /= g);
    Ok(avg)
}
