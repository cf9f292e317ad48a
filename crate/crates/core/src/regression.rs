//! Incremental least squares.
//!
//! [`ResidualState`] keeps the response residual and every candidate column
//! orthogonal to the span of the intercept (when centered) and the active
//! covariates. Scanning all candidates for the largest reduction in the
//! residual sum of squares then costs one pass over the candidate block, and
//! admitting a covariate costs one Gram-Schmidt sweep over it.

use rayon::prelude::*;

use crate::data::{ColMatrix, Dataset};
use crate::error::{Error, Result};
use crate::special::{self, BetaParams};

/// A candidate whose squared residual norm falls below this fraction of its
/// original squared norm is treated as collinear with the active set.
pub const TOL_COLINEAR: f64 = 1e-10;

// Squared norms below this fraction of the raw sum of squares count as zero
// after centering (constant columns, constant responses).
const TOL_CONSTANT: f64 = 1e-28;

// Work size (rows x candidates) above which scans and sweeps use rayon.
const PAR_MIN_WORK: usize = 1 << 16;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let tail: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Best candidate of a scan: its original column index and the residual sum
/// of squares after adding it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub index: usize,
    pub ss: f64,
}

fn better(a: &Candidate, b: &Candidate) -> std::cmp::Ordering {
    a.ss.total_cmp(&b.ss).then(a.index.cmp(&b.index))
}

/// Active set, residualized response and residualized candidate columns.
#[derive(Debug, Clone)]
pub struct ResidualState {
    n: usize,
    centered: bool,
    y: Vec<f64>,
    r_y: Vec<f64>,
    ss_r: f64,
    ss0: f64,
    // Candidate block: slot s holds original column ids[s].
    ids: Vec<usize>,
    slot_of: Vec<Option<usize>>,
    cols: Vec<f64>,
    base_norm2: Vec<f64>,
    live: Vec<bool>,
    active: Vec<usize>,
    basis: Vec<f64>,
}

/// State over every covariate of `data`.
pub fn init_state(data: &Dataset, centered: bool) -> Result<ResidualState> {
    let all: Vec<usize> = (0..data.k()).collect();
    ResidualState::new(data.y(), data.x(), &all, centered)
}

impl ResidualState {
    /// Starts from an empty active set with the listed columns of `x` as
    /// candidates. With `centered`, the response and candidates are
    /// mean-centered, which implements the intercept.
    pub fn new(y: &[f64], x: &ColMatrix, candidates: &[usize], centered: bool) -> Result<Self> {
        let n = y.len();
        if x.nrows() != n {
            return Err(Error::Data(format!(
                "response has {n} rows but the covariates have {}",
                x.nrows()
            )));
        }
        let raw_ss = dot(y, y);
        let r_y: Vec<f64> = if centered {
            let m = mean(y);
            y.iter().map(|v| v - m).collect()
        } else {
            y.to_vec()
        };
        let ss0 = dot(&r_y, &r_y);
        if !(ss0 > TOL_CONSTANT * raw_ss) {
            return Err(Error::DegenerateResponse);
        }

        let mut slot_of = vec![None; x.ncols()];
        let mut ids = Vec::with_capacity(candidates.len());
        let mut cols = Vec::with_capacity(candidates.len() * n);
        let mut base_norm2 = Vec::with_capacity(candidates.len());
        let mut live = Vec::with_capacity(candidates.len());
        for &j in candidates {
            if j >= x.ncols() {
                return Err(Error::domain(format!(
                    "column index {} out of range 1..={}",
                    j + 1,
                    x.ncols()
                )));
            }
            if slot_of[j].is_some() {
                continue;
            }
            slot_of[j] = Some(ids.len());
            ids.push(j);
            let c = x.col(j);
            let raw = dot(c, c);
            let start = cols.len();
            if centered {
                let m = mean(c);
                cols.extend(c.iter().map(|v| v - m));
            } else {
                cols.extend_from_slice(c);
            }
            let s = &cols[start..];
            let norm2 = dot(s, s);
            let usable = norm2 > TOL_CONSTANT * raw && norm2 > 0.0;
            base_norm2.push(if usable { norm2 } else { 0.0 });
            live.push(usable);
        }

        Ok(Self {
            n,
            centered,
            y: y.to_vec(),
            r_y,
            ss_r: ss0,
            ss0,
            ids,
            slot_of,
            cols,
            base_norm2,
            live,
            active: Vec::new(),
            basis: Vec::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn centered(&self) -> bool {
        self.centered
    }

    /// Active covariates in order of inclusion.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    /// Current residual sum of squares.
    pub fn ss_r(&self) -> f64 {
        self.ss_r
    }

    /// Residual sum of squares before any covariate was added.
    pub fn ss0(&self) -> f64 {
        self.ss0
    }

    pub fn residuals(&self) -> &[f64] {
        &self.r_y
    }

    /// Least-squares fitted values on the intercept (when centered) and the
    /// active covariates.
    pub fn fitted(&self) -> Vec<f64> {
        self.y.iter().zip(&self.r_y).map(|(y, r)| y - r).collect()
    }

    /// Number of candidates still eligible for a scan (ignoring exclusions).
    pub fn eligible_count(&self) -> usize {
        (0..self.ids.len()).filter(|&s| self.slot_eligible(s).is_some()).count()
    }

    fn col(&self, slot: usize) -> &[f64] {
        &self.cols[slot * self.n..(slot + 1) * self.n]
    }

    // Squared residual norm when the slot is live and not collinear.
    fn slot_eligible(&self, slot: usize) -> Option<f64> {
        if !self.live[slot] {
            return None;
        }
        let c = self.col(slot);
        let nn = dot(c, c);
        (nn > TOL_COLINEAR * self.base_norm2[slot]).then_some(nn)
    }

    fn evaluate(&self, slot: usize, excluded: Option<&[bool]>) -> Option<Candidate> {
        let index = self.ids[slot];
        if excluded.is_some_and(|e| e.get(index).copied().unwrap_or(false)) {
            return None;
        }
        let nn = self.slot_eligible(slot)?;
        let dy = dot(&self.r_y, self.col(slot));
        let ss = (self.ss_r - dy * dy / nn).clamp(0.0, self.ss_r);
        Some(Candidate { index, ss })
    }

    /// The inactive candidate whose inclusion gives the smallest residual sum
    /// of squares, ties going to the lowest column index. `excluded` is
    /// indexed by original column. Returns `None` when nothing is eligible.
    pub fn scan_candidates(&self, excluded: Option<&[bool]>) -> Option<Candidate> {
        let m = self.ids.len();
        if m * self.n >= PAR_MIN_WORK {
            (0..m)
                .into_par_iter()
                .filter_map(|s| self.evaluate(s, excluded))
                .min_by(better)
        } else {
            (0..m).filter_map(|s| self.evaluate(s, excluded)).min_by(better)
        }
    }

    /// Residual sum of squares that adding column `j` would give.
    pub fn ss_if_added(&self, j: usize) -> Result<f64> {
        let slot = self.live_slot(j)?;
        self.evaluate(slot, None).map(|c| c.ss).ok_or(Error::Collinear(j))
    }

    fn live_slot(&self, j: usize) -> Result<usize> {
        match self.slot_of.get(j).copied().flatten() {
            None => Err(Error::domain(format!("column {} is not a candidate", j + 1))),
            Some(_) if self.active.contains(&j) => {
                Err(Error::domain(format!("column {} is already active", j + 1)))
            }
            Some(slot) => Ok(slot),
        }
    }

    /// Moves column `j` into the active set and sweeps its normalized
    /// residual out of the response and every remaining candidate.
    pub fn add_covariate(&mut self, j: usize) -> Result<()> {
        let slot = self.live_slot(j)?;
        let nn = self.slot_eligible(slot).ok_or(Error::Collinear(j))?;
        let n = self.n;
        let dy = dot(&self.r_y, self.col(slot));
        self.ss_r = (self.ss_r - dy * dy / nn).clamp(0.0, self.ss_r);

        let norm = nn.sqrt();
        let q: Vec<f64> = self.col(slot).iter().map(|v| v / norm).collect();
        let d = dot(&self.r_y, &q);
        axpy(-d, &q, &mut self.r_y);

        self.live[slot] = false;
        let live = &self.live;
        let sweep = |(s, c): (usize, &mut [f64])| {
            if live[s] {
                let proj = dot(&q, c);
                axpy(-proj, &q, c);
            }
        };
        if self.ids.len() * n >= PAR_MIN_WORK {
            self.cols.par_chunks_mut(n).enumerate().for_each(sweep);
        } else {
            self.cols.chunks_mut(n).enumerate().for_each(sweep);
        }

        self.basis.extend_from_slice(&q);
        self.active.push(j);
        Ok(())
    }

    /// Orthonormal residualized active columns, one slice per active covariate.
    pub fn basis(&self) -> impl Iterator<Item = &[f64]> {
        self.basis.chunks(self.n)
    }

    /// Residualized candidate column `j`, if `j` is a candidate.
    pub fn residual_column(&self, j: usize) -> Option<&[f64]> {
        let slot = self.slot_of.get(j).copied().flatten()?;
        Some(self.col(slot))
    }
}

/// Residual sum of squares and fitted values of the least-squares fit of
/// `y` on the listed columns (plus an intercept when `centered`).
pub(crate) fn fit_subset(
    y: &[f64],
    x: &ColMatrix,
    subset: &[usize],
    centered: bool,
) -> Result<ResidualState> {
    let mut state = ResidualState::new(y, x, subset, centered)?;
    for &j in subset {
        state.add_covariate(j)?;
    }
    Ok(state)
}

/// P-values of a single covariate by the F-test and by comparison with one
/// Gaussian covariate, both with an intercept. The two agree identically.
pub fn single_covariate_pvalues(y: &[f64], x: &[f64]) -> Result<(f64, f64)> {
    let n = y.len();
    if n < 3 || x.len() != n {
        return Err(Error::domain(
            "need equal-length vectors with at least 3 observations",
        ));
    }
    let (my, mx) = (mean(y), mean(x));
    let yc: Vec<f64> = y.iter().map(|v| v - my).collect();
    let xc: Vec<f64> = x.iter().map(|v| v - mx).collect();
    let sxx = dot(&xc, &xc);
    if !(sxx > TOL_CONSTANT * dot(x, x)) {
        return Err(Error::domain("covariate is constant"));
    }
    let syy = dot(&yc, &yc);
    if !(syy > TOL_CONSTANT * dot(y, y)) {
        return Err(Error::DegenerateResponse);
    }
    let sxy = dot(&xc, &yc);
    let explained = (sxy * sxy / sxx).min(syy);
    let ss_r = syy - explained;
    let df = (n - 1) as f64;

    let b_stat = explained / syy;
    let params = BetaParams::new(0.5, df / 2.0)?;
    let p_b = special::beta_tails(b_stat, ss_r / syy, params).1;

    let f_stat = if ss_r > 0.0 {
        explained / (ss_r / df)
    } else {
        f64::INFINITY
    };
    let p_f = special::f_sf(f_stat, 1.0, df)?;
    Ok((p_f, p_b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(y: Vec<f64>, cols: &[Vec<f64>]) -> Dataset {
        Dataset::new(y, ColMatrix::from_columns(cols).unwrap()).unwrap()
    }

    #[test]
    fn init_centered_sum_of_squares() {
        let d = data(vec![1.0, 2.0, 3.0], &[vec![0.0, 1.0, 5.0]]);
        let s = init_state(&d, true).unwrap();
        assert!((s.ss0() - 2.0).abs() < 1e-15);
        assert_eq!(s.ss_r(), s.ss0());
        assert!(s.active().is_empty());
        let s = init_state(&d, false).unwrap();
        assert!((s.ss0() - 14.0).abs() < 1e-15);
    }

    #[test]
    fn constant_response_is_degenerate() {
        let d = data(vec![0.1; 5], &[vec![1.0, 2.0, 3.0, 4.0, 6.0]]);
        assert!(matches!(init_state(&d, true), Err(Error::DegenerateResponse)));
    }

    #[test]
    fn exact_fit_found_by_scan() {
        let c0 = vec![1.0, -2.0, 0.5, 3.0, 1.0, -1.0];
        let c1 = vec![0.3, 0.1, -0.7, 0.2, 0.9, 1.1];
        let c2 = vec![2.0, 1.0, 1.0, -3.0, 0.0, 0.5];
        let y: Vec<f64> = c2.iter().map(|v| 2.5 * v).collect();
        let d = data(y, &[c0, c1, c2]);
        let s = init_state(&d, true).unwrap();
        let best = s.scan_candidates(None).unwrap();
        assert_eq!(best.index, 2);
        assert!(best.ss < 1e-12);
    }

    #[test]
    fn orthonormal_projection_identity() {
        // Centered orthonormal columns: ss_j = ss_r - <r_y, x_j>^2.
        let h = 0.5;
        let c0 = vec![h, h, -h, -h];
        let c1 = vec![h, -h, h, -h];
        let y = vec![3.0, 1.0, 0.0, 2.0];
        let d = data(y.clone(), &[c0.clone(), c1.clone()]);
        let s = init_state(&d, true).unwrap();
        let my = mean(&y);
        let yc: Vec<f64> = y.iter().map(|v| v - my).collect();
        for (j, c) in [c0, c1].iter().enumerate() {
            let want = s.ss0() - dot(&yc, c).powi(2);
            assert!((s.ss_if_added(j).unwrap() - want).abs() < 1e-14);
        }
    }

    #[test]
    fn duplicate_column_is_skipped_after_add() {
        let c = vec![1.0, 4.0, 2.0, 8.0, 5.0];
        let y = vec![1.0, 3.0, 2.0, 7.0, 4.0];
        let d = data(y, &[c.clone(), c]);
        let mut s = init_state(&d, true).unwrap();
        let best = s.scan_candidates(None).unwrap();
        assert_eq!(best.index, 0);
        s.add_covariate(0).unwrap();
        assert!(s.scan_candidates(None).is_none());
        assert!(matches!(s.add_covariate(1), Err(Error::Collinear(1))));
        assert!(s.add_covariate(0).is_err());
    }

    #[test]
    fn exclusion_mask_is_respected() {
        let c0 = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let c1 = vec![2.0, 1.0, 0.0, 1.0, 2.0];
        let d = data(vec![1.1, 2.0, 2.9, 4.2, 5.0], &[c0, c1]);
        let s = init_state(&d, true).unwrap();
        assert_eq!(s.scan_candidates(None).unwrap().index, 0);
        assert_eq!(s.scan_candidates(Some(&[true, false])).unwrap().index, 1);
        assert!(s.scan_candidates(Some(&[true, true])).is_none());
    }

    #[test]
    fn single_covariate_edge_cases() {
        let x = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let (pf, pb) = single_covariate_pvalues(&x, &x).unwrap();
        assert_eq!((pf, pb), (0.0, 0.0));
        // y orthogonal to x after centering
        let y = vec![1.0, -1.0, 0.0, -1.0, 1.0];
        let (pf, pb) = single_covariate_pvalues(&y, &x).unwrap();
        assert!((pf - 1.0).abs() < 1e-15 && (pb - 1.0).abs() < 1e-15);
        assert!(single_covariate_pvalues(&y, &[2.0; 5]).is_err());
    }
}
