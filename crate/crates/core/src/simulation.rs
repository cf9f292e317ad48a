//! Seeded Monte-Carlo harnesses.
//!
//! Every replication draws from its own ChaCha8 stream: the master seed
//! selects the key and the replication index the stream, so results do not
//! depend on how replications are scheduled across threads.

use std::fmt::Write as _;
use std::time::Instant;

use rand::seq::index::sample;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::data::{ColMatrix, Dataset};
use crate::error::{Error, Result};
use crate::graph::{neighborhood_graph, EdgeList, GraphConfig};
use crate::stepwise::{stepwise, PvalueConfig};

/// Correlation of neighbouring columns in the tutorial designs.
pub const TUTORIAL_RHO: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub seed: u64,
    pub nsim: usize,
    pub n: usize,
    pub k: usize,
    /// Number of covariates with a nonzero coefficient.
    pub s: usize,
    pub amplitude: f64,
    pub alpha: f64,
    pub nu: f64,
    /// Largest selection count tabulated (also the per-run covariate limit).
    pub kmx: usize,
}

impl SimConfig {
    /// Pure-noise configuration.
    pub fn noise(n: usize, k: usize, alpha: f64, nu: f64, kmx: usize, nsim: usize) -> Self {
        Self {
            seed: 0,
            nsim,
            n,
            k,
            s: 0,
            amplitude: 0.0,
            alpha,
            nu,
            kmx,
        }
    }

    /// Tutorial configuration: `s` active covariates of strength `amplitude`.
    pub fn tutorial(n: usize, k: usize, s: usize, amplitude: f64, alpha: f64, nu: f64, nsim: usize) -> Self {
        Self {
            seed: 0,
            nsim,
            n,
            k,
            s,
            amplitude,
            alpha,
            nu,
            kmx: k,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.nsim == 0 {
            return Err(Error::domain("nsim must be at least 1"));
        }
        if self.n < 3 || self.k == 0 {
            return Err(Error::domain(format!(
                "need n >= 3 and k >= 1, got n = {}, k = {}",
                self.n, self.k
            )));
        }
        if self.s > self.k {
            return Err(Error::domain(format!(
                "active count {} exceeds k = {}",
                self.s, self.k
            )));
        }
        if !self.amplitude.is_finite() {
            return Err(Error::domain("amplitude must be finite"));
        }
        Ok(())
    }
}

/// Random stream of replication `rep` under master seed `seed`.
pub fn replication_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

fn normals(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

/// `n x k` matrix of i.i.d. standard normals.
pub fn gaussian_matrix(rng: &mut impl Rng, n: usize, k: usize) -> ColMatrix {
    ColMatrix::from_col_major(n, k, normals(rng, n * k)).expect("shape matches buffer")
}

/// `n x k` matrix whose rows are N(0, Σ) with `Σ_ij = rho^|i-j|`. The
/// lower Cholesky factor of this Toeplitz matrix has `1` and
/// `sqrt(1 - rho^2)` on the diagonal and `rho` times the previous row below,
/// so multiplying by it is a first-order recursion across columns.
pub fn toeplitz_matrix(rng: &mut impl Rng, n: usize, k: usize, rho: f64) -> ColMatrix {
    let mut data = normals(rng, n * k);
    let c = (1.0 - rho * rho).sqrt();
    for j in 1..k {
        let (prev, cur) = data[(j - 1) * n..(j + 1) * n].split_at_mut(n);
        for (x, &p) in cur.iter_mut().zip(prev.iter()) {
            *x = rho * p + c * *x;
        }
    }
    ColMatrix::from_col_major(n, k, data).expect("shape matches buffer")
}

/// Frequencies of the number of covariates selected under pure noise.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FpTable {
    /// Proportion of runs selecting `c` covariates, `c = 0..=kmx`.
    pub proportions: Vec<f64>,
    pub mean: f64,
    pub nsim: usize,
}

impl FpTable {
    fn from_counts(counts: &[usize], nsim: usize) -> Self {
        let proportions: Vec<f64> = counts.iter().map(|&c| c as f64 / nsim as f64).collect();
        let mean = proportions
            .iter()
            .enumerate()
            .map(|(c, f)| c as f64 * f)
            .sum();
        Self {
            proportions,
            mean,
            nsim,
        }
    }

    /// Two aligned rows: selection counts and their frequencies, then the mean.
    pub fn to_text(&self) -> String {
        let mut head = String::new();
        let mut row = String::new();
        for (c, f) in self.proportions.iter().enumerate() {
            let _ = write!(head, "{c:>6}");
            let _ = write!(row, "{f:>6.2}");
        }
        let _ = write!(head, "{:>8}", "mean");
        let _ = write!(row, "{:>8.2}", self.mean);
        format!("{head}\n{row}\n")
    }

    pub fn to_key_value(&self) -> String {
        let mut out = format!("nsim={}\nmean={}\n", self.nsim, self.mean);
        for (c, f) in self.proportions.iter().enumerate() {
            let _ = writeln!(out, "freq{c}={f}");
        }
        out
    }
}

/// Selection counts of stepwise runs on pure noise with `ek = k`.
pub fn simulate_false_positives(cfg: &SimConfig) -> Result<FpTable> {
    cfg.validate()?;
    let pcfg = PvalueConfig::new(cfg.alpha, cfg.kmx.max(1))
        .with_nu(cfg.nu)
        .with_ek(cfg.k as f64);
    pcfg.validate()?;
    let selected: Vec<usize> = (0..cfg.nsim as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replication_rng(cfg.seed, rep);
            let x = gaussian_matrix(&mut rng, cfg.n, cfg.k);
            let y = normals(&mut rng, cfg.n);
            let data = Dataset::new(y, x)?;
            Ok(stepwise(&data, &pcfg)?.len())
        })
        .collect::<Result<_>>()?;
    let mut counts = vec![0usize; cfg.kmx + 1];
    for c in selected {
        counts[c.min(cfg.kmx)] += 1;
    }
    Ok(FpTable::from_counts(&counts, cfg.nsim))
}

/// The two tutorial designs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TutorialVariant {
    /// Linear response `y = X beta + eps`.
    One,
    /// Binary response drawn from a logistic model in `X beta`.
    Two,
}

impl TryFrom<u8> for TutorialVariant {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Self::One),
            2 => Ok(Self::Two),
            _ => Err(Error::domain(format!("tutorial variant must be 1 or 2, got {v}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TutorialResult {
    pub fp_mean: f64,
    pub fn_mean: f64,
    /// Mean seconds per stepwise run.
    pub elapsed: f64,
    pub nsim: usize,
}

impl TutorialResult {
    pub fn to_text(&self) -> String {
        format!(
            "{:>8}{:>8}{:>10}\n{:>8.2}{:>8.2}{:>10.3}\n",
            "fp", "fn", "time", self.fp_mean, self.fn_mean, self.elapsed
        )
    }

    pub fn to_key_value(&self) -> String {
        format!(
            "nsim={}\nfp={}\nfn={}\ntime={}\n",
            self.nsim, self.fp_mean, self.fn_mean, self.elapsed
        )
    }
}

/// Draws one tutorial instance: design, response and the coefficient vector.
pub fn tutorial_instance(
    variant: TutorialVariant,
    cfg: &SimConfig,
    rep: u64,
) -> (ColMatrix, Vec<f64>, Vec<f64>) {
    let mut rng = replication_rng(cfg.seed, rep);
    let x = toeplitz_matrix(&mut rng, cfg.n, cfg.k, TUTORIAL_RHO);
    let mut beta = vec![0.0; cfg.k];
    let size = cfg.amplitude / (cfg.n as f64).sqrt();
    for j in sample(&mut rng, cfg.k, cfg.s) {
        beta[j] = if rng.random::<bool>() { size } else { -size };
    }
    let mut eta = vec![0.0; cfg.n];
    for (j, &b) in beta.iter().enumerate() {
        if b != 0.0 {
            for (e, &v) in eta.iter_mut().zip(x.col(j)) {
                *e += b * v;
            }
        }
    }
    let y = match variant {
        TutorialVariant::One => eta
            .iter()
            .map(|&e| e + rng.sample::<f64, _>(StandardNormal))
            .collect(),
        TutorialVariant::Two => eta
            .iter()
            .map(|&e| {
                let p = 1.0 / (1.0 + (-e).exp());
                if rng.random::<f64>() < p {
                    1.0
                } else {
                    0.0
                }
            })
            .collect(),
    };
    (x, y, beta)
}

/// Average false positives and negatives of stepwise selection on the
/// tutorial designs.
pub fn tutorial_sim(variant: TutorialVariant, cfg: &SimConfig) -> Result<TutorialResult> {
    cfg.validate()?;
    let pcfg = PvalueConfig::new(cfg.alpha, cfg.k.min(cfg.n - 2).max(1)).with_nu(cfg.nu);
    pcfg.validate()?;
    let runs: Vec<(usize, usize, f64)> = (0..cfg.nsim as u64)
        .into_par_iter()
        .map(|rep| {
            let (x, y, beta) = tutorial_instance(variant, cfg, rep);
            let data = Dataset::new(y, x)?;
            let start = Instant::now();
            let path = stepwise(&data, &pcfg)?;
            let secs = start.elapsed().as_secs_f64();
            let mut chosen = vec![false; cfg.k];
            for j in path.indices() {
                chosen[j] = true;
            }
            let fp = (0..cfg.k).filter(|&j| chosen[j] && beta[j] == 0.0).count();
            let fn_ = (0..cfg.k).filter(|&j| !chosen[j] && beta[j] != 0.0).count();
            Ok((fp, fn_, secs))
        })
        .collect::<Result<_>>()?;
    let m = cfg.nsim as f64;
    let fp: usize = runs.iter().map(|r| r.0).sum();
    let fn_: usize = runs.iter().map(|r| r.1).sum();
    let secs: f64 = runs.iter().map(|r| r.2).sum();
    Ok(TutorialResult {
        fp_mean: fp as f64 / m,
        fn_mean: fn_ as f64 / m,
        elapsed: secs / m,
        nsim: cfg.nsim,
    })
}

/// `n x k` matrix whose rows are N(0, Θ⁻¹) for the tridiagonal precision
/// Θ with unit diagonal and `rho` beside it. Θ = L Lᵀ with L lower
/// bidiagonal; rows are `L⁻ᵀ z`.
pub fn tridiagonal_precision_matrix(rng: &mut impl Rng, n: usize, k: usize, rho: f64) -> Result<ColMatrix> {
    let mut diag = Vec::with_capacity(k);
    let mut sub = vec![0.0; k];
    diag.push(1.0);
    for i in 1..k {
        let m = rho / diag[i - 1];
        let d2 = 1.0 - m * m;
        if !(d2 > 0.0) {
            return Err(Error::domain(format!(
                "precision matrix with off-diagonal {rho} is not positive definite"
            )));
        }
        sub[i] = m;
        diag.push(d2.sqrt());
    }
    let mut data = normals(rng, n * k);
    for x in &mut data[(k - 1) * n..] {
        *x /= diag[k - 1];
    }
    for i in (0..k - 1).rev() {
        let (cur, next) = data[i * n..(i + 2) * n].split_at_mut(n);
        for (x, &v) in cur.iter_mut().zip(next.iter()) {
            *x = (*x - sub[i + 1] * v) / diag[i];
        }
    }
    ColMatrix::from_col_major(n, k, data)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphSimResult {
    pub false_positives: usize,
    pub false_negatives: usize,
    pub edges: EdgeList,
}

/// Neighborhood-selection graph on data with a tridiagonal precision
/// matrix, compared with the true path graph.
pub fn bidiagonal_graph_sim(n: usize, k: usize, rho: f64, alpha: f64, seed: u64) -> Result<GraphSimResult> {
    if k < 2 {
        return Err(Error::domain("a graph needs at least two nodes"));
    }
    let mut rng = replication_rng(seed, 0);
    let x = tridiagonal_precision_matrix(&mut rng, n, k, rho)?;
    let edges = neighborhood_graph(&x, &GraphConfig::new(alpha), None)?;
    let true_edge = |i: usize, j: usize| rho != 0.0 && j == i + 1;
    let false_positives = edges.edges.iter().filter(|e| !true_edge(e.i, e.j)).count();
    let false_negatives = if rho == 0.0 {
        0
    } else {
        (0..k - 1).filter(|&i| !edges.contains(i, i + 1)).count()
    };
    Ok(GraphSimResult {
        false_positives,
        false_negatives,
        edges,
    })
}
