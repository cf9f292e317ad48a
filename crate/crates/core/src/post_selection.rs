//! P-values for covariate sets chosen by some other procedure.
//!
//! For a subset `S` of size `s` and a member `i`, the member is compared with
//! the best of `k - s + 1` Gaussian covariates:
//!
//! ```text
//! p_i(S) = 1 - B_{k-s+1, 1}( B_{1/2, (n-s-1)/2}(1 - ss_S / ss_{S\i}) )
//! ```
//!
//! A subset qualifies when all its members have `p_i(S) < alpha1`; the final
//! P-value of a covariate is its minimum over qualifying subsets.

use std::collections::{BTreeMap, HashMap};

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::regression::{fit_subset, ResidualState};
use crate::stepwise::{gaussian_pvalue, LabelSet};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PostSelectionConfig {
    /// Report covariates whose final P-value is below this.
    pub alpha: f64,
    /// Every member of a qualifying subset must have a P-value below this.
    pub alpha1: f64,
    /// Number of covariates the selection was made from; defaults to the
    /// column count of the dataset.
    pub k: Option<usize>,
    pub misclass: bool,
}

impl PostSelectionConfig {
    pub fn new(alpha: f64, alpha1: f64) -> Self {
        Self {
            alpha,
            alpha1,
            k: None,
            misclass: false,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("alpha1", self.alpha1)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::domain(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        Ok(())
    }
}

/// A further member of the subset that produced a covariate's P-value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Companion {
    pub index: usize,
    /// Set when this companion was added by augmentation and also belongs to
    /// the initial selection.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PostSelectionResult {
    pub index: usize,
    pub pvalue: f64,
    pub companions: Vec<Companion>,
    /// Residual sum of squares of the minimizing subset.
    pub rss: f64,
    pub misclass: Option<usize>,
}

// One scored subset: sorted members and each member's P-value.
struct Scored {
    members: Vec<usize>,
    pvalues: Vec<f64>,
    rss: f64,
    augmenting: Option<usize>,
    // Subset the augmentation started from (sorted); used for tie-breaking.
    seed: Vec<usize>,
}

fn normalize_ind(data: &Dataset, ind: &[usize]) -> Result<Vec<usize>> {
    if ind.is_empty() {
        return Err(Error::domain("the covariate list is empty"));
    }
    if let Some(&bad) = ind.iter().find(|&&j| j >= data.k()) {
        return Err(Error::domain(format!(
            "covariate {} out of range 1..={}",
            bad + 1,
            data.k()
        )));
    }
    Ok(ind.iter().copied().sorted().dedup().collect())
}

fn rss_of(data: &Dataset, subset: &[usize]) -> Option<f64> {
    fit_subset(data.y(), data.x(), subset, true).ok().map(|s| s.ss_r())
}

fn member_pvalue(n: usize, k: usize, s: usize, ss_full: f64, ss_without: f64) -> Option<f64> {
    if n <= s + 1 || k < s {
        return None;
    }
    let shape_b = (n - s - 1) as f64 / 2.0;
    gaussian_pvalue(ss_full, ss_without, shape_b, (k + 1 - s) as f64, 1.0).ok()
}

fn aggregate(
    data: &Dataset,
    scored: Vec<Scored>,
    ind: &[usize],
    cfg: &PostSelectionConfig,
) -> Result<Vec<PostSelectionResult>> {
    let labels = cfg.misclass.then(|| LabelSet::from_response(data.y())).transpose()?;
    // Best (p, members, seed) per covariate over qualifying subsets.
    let mut best: BTreeMap<usize, &Scored> = BTreeMap::new();
    let mut best_p: HashMap<usize, f64> = HashMap::new();
    for sc in &scored {
        if !sc.pvalues.iter().all(|&p| p < cfg.alpha1) {
            continue;
        }
        for (&i, &p) in sc.members.iter().zip(&sc.pvalues) {
            let replace = match best.get(&i) {
                None => true,
                Some(cur) => {
                    let cp = best_p[&i];
                    p.total_cmp(&cp)
                        .then_with(|| sc.members.cmp(&cur.members))
                        .then_with(|| sc.seed.cmp(&cur.seed))
                        .is_lt()
                }
            };
            if replace {
                best.insert(i, sc);
                best_p.insert(i, p);
            }
        }
    }

    let mut out = Vec::new();
    for (i, sc) in best {
        let pvalue = best_p[&i];
        if !(pvalue < cfg.alpha) {
            continue;
        }
        let companions = sc
            .members
            .iter()
            .filter(|&&m| m != i)
            .map(|&m| Companion {
                index: m,
                flagged: sc.augmenting == Some(m) && ind.binary_search(&m).is_ok(),
            })
            .collect();
        let misclass = match &labels {
            Some(l) => {
                let fit = fit_subset(data.y(), data.x(), &sc.members, true)?;
                Some(l.count_errors(data.y(), &fit.fitted()))
            }
            None => None,
        };
        out.push(PostSelectionResult {
            index: i,
            pvalue,
            companions,
            rss: sc.rss,
            misclass,
        });
    }
    Ok(out)
}

/// Scores every subset of `ind` with one to three members.
pub fn pval_subsets(
    data: &Dataset,
    ind: &[usize],
    cfg: &PostSelectionConfig,
) -> Result<Vec<PostSelectionResult>> {
    cfg.validate()?;
    let ind = normalize_ind(data, ind)?;
    let n = data.n();
    let k = cfg.k.unwrap_or(data.k());
    let ss0 = ResidualState::new(data.y(), data.x(), &[], true)?.ss0();

    let mut cache: HashMap<Vec<usize>, Option<f64>> = HashMap::new();
    cache.insert(Vec::new(), Some(ss0));
    let mut rss = |subset: Vec<usize>| -> Option<f64> {
        *cache
            .entry(subset)
            .or_insert_with_key(|s| rss_of(data, s))
    };

    let mut scored = Vec::new();
    for size in 1..=3.min(ind.len()) {
        for members in ind.iter().copied().combinations(size) {
            let Some(ss_full) = rss(members.clone()) else {
                continue;
            };
            let mut pvalues = Vec::with_capacity(size);
            for (pos, _) in members.iter().enumerate() {
                let mut rest = members.clone();
                rest.remove(pos);
                let p = rss(rest).and_then(|ss| member_pvalue(n, k, size, ss_full, ss));
                match p {
                    Some(p) => pvalues.push(p),
                    None => break,
                }
            }
            if pvalues.len() == size {
                scored.push(Scored {
                    members,
                    pvalues,
                    rss: ss_full,
                    augmenting: None,
                    seed: Vec::new(),
                });
            }
        }
    }
    aggregate(data, scored, &ind, cfg)
}

fn score_augmented(data: &Dataset, seed: Vec<usize>, k: usize) -> Option<Scored> {
    let n = data.n();
    let all: Vec<usize> = (0..data.k()).collect();
    let mut state = ResidualState::new(data.y(), data.x(), &all, true).ok()?;
    for &j in &seed {
        state.add_covariate(j).ok()?;
    }
    let best = state.scan_candidates(None)?;
    let j = best.index;
    let members: Vec<usize> = seed.iter().copied().chain([j]).sorted().collect();
    let s = members.len();
    let mut pvalues = Vec::with_capacity(s);
    for &i in &members {
        let without = if i == j {
            state.ss_r()
        } else {
            let rest: Vec<usize> = members.iter().copied().filter(|&m| m != i).collect();
            rss_of(data, &rest)?
        };
        pvalues.push(member_pvalue(n, k, s, best.ss, without)?);
    }
    Some(Scored {
        members,
        pvalues,
        rss: best.ss,
        augmenting: Some(j),
        seed,
    })
}

/// Scores every subset of `ind` with zero to two members after augmenting
/// it with the single best covariate among all columns.
pub fn pval_subsets_augmented(
    data: &Dataset,
    ind: &[usize],
    cfg: &PostSelectionConfig,
) -> Result<Vec<PostSelectionResult>> {
    cfg.validate()?;
    let ind = normalize_ind(data, ind)?;
    // Surfaces a degenerate response as an error instead of an empty result.
    ResidualState::new(data.y(), data.x(), &[], true)?;
    let k = cfg.k.unwrap_or(data.k());

    let seeds: Vec<Vec<usize>> = (0..=2.min(ind.len()))
        .flat_map(|size| ind.iter().copied().combinations(size))
        .collect();
    let scored: Vec<Scored> = seeds
        .into_par_iter()
        .filter_map(|seed| score_augmented(data, seed, k))
        .collect();
    aggregate(data, scored, &ind, cfg)
}
