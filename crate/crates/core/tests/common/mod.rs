#![allow(clippy::excessive_precision, dead_code)]

use gausscov::{ColMatrix, Dataset};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normals(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn noise_dataset(rng: &mut impl Rng, n: usize, k: usize) -> Dataset {
    let x = ColMatrix::from_col_major(n, k, normals(rng, n * k)).unwrap();
    Dataset::new(normals(rng, n), x).unwrap()
}

/// Noise design with a response driven by a few columns.
pub fn signal_dataset(rng: &mut impl Rng, n: usize, k: usize, active: &[(usize, f64)]) -> Dataset {
    let x = ColMatrix::from_col_major(n, k, normals(rng, n * k)).unwrap();
    let mut y = normals(rng, n);
    for &(j, b) in active {
        for (yi, xi) in y.iter_mut().zip(x.col(j)) {
            *yi += b * xi;
        }
    }
    Dataset::new(y, x).unwrap()
}

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let f1 = f(c - h * XGK[i]);
        let f2 = f(c + h * XGK[i]);
        k += WGK[i] * (f1 + f2);
        if i % 2 == 1 {
            g += WG[i / 2] * (f1 + f2);
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss-Kronrod integral of `f` over `[lo, hi]` to absolute `tol`.
pub fn integrate(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    fn go(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, tol: f64, depth: u32) -> f64 {
        let (v, err) = gk15(f, lo, hi);
        if err <= tol.max(50.0 * f64::EPSILON * v.abs()) || depth > 45 {
            return v;
        }
        let mid = 0.5 * (lo + hi);
        go(f, lo, mid, 0.5 * tol, depth + 1) + go(f, mid, hi, 0.5 * tol, depth + 1)
    }
    if hi <= lo {
        return 0.0;
    }
    go(f, lo, hi, tol, 0)
}

/// Regularized incomplete beta function by numerical integration of the
/// density, normalized by the integral over `[0, 1]`. Endpoint
/// singularities are removed with `s = t^a` (resp. `v = (1 - t)^b`).
pub fn beta_cdf_quadrature(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let sd = (a * b / ((a + b) * (a + b) * (a + b + 1.0))).sqrt();
    let mode = if a >= 1.0 && b >= 1.0 && a + b > 2.0 {
        (a - 1.0) / (a + b - 2.0)
    } else {
        a / (a + b)
    };
    let log_f = |t: f64| (a - 1.0) * t.ln() + (b - 1.0) * (-t).ln_1p();
    let shift = if a >= 1.0 && b >= 1.0 { log_f(mode) } else { 0.0 };
    let dens = move |t: f64| {
        if t <= 0.0 || t >= 1.0 {
            0.0
        } else {
            (log_f(t) - shift).exp()
        }
    };
    let mut pts: Vec<f64> = [-40.0, -20.0, -10.0, -5.0, -2.0, 0.0, 2.0, 5.0, 10.0, 20.0, 40.0]
        .iter()
        .map(|z| mode + z * sd)
        .filter(|&t| t > 0.0 && t < 1.0)
        .collect();
    pts.push(x);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let (first, last) = (pts[0], *pts.last().unwrap());

    // Head [0, first] via s = t^a, tail [last, 1] via v = (1 - t)^b.
    let head_f = move |s: f64| {
        let t = s.powf(1.0 / a);
        ((b - 1.0) * (-t).ln_1p() - shift).exp() / a
    };
    let tail_f = move |v: f64| {
        let u = v.powf(1.0 / b);
        ((a - 1.0) * (-u).ln_1p() - shift).exp() / b
    };
    let pieces = |tol: f64| -> (f64, f64) {
        let mut below = integrate(&head_f, 0.0, first.powf(a), tol);
        let mut above = integrate(&tail_f, 0.0, (1.0 - last).powf(b), tol);
        for w in pts.windows(2) {
            let v = integrate(&dens, w[0], w[1], tol);
            if w[1] <= x {
                below += v;
            } else {
                above += v;
            }
        }
        (below, above)
    };
    let (b0, a0) = pieces(1e-6 * sd);
    let total = b0 + a0;
    let (below, above) = pieces(1e-16 * total);
    below / (below + above)
}

/// Residual sum of squares of the least-squares fit of `y` on the columns
/// `cols` of `x` (plus an intercept when `centered`), by SVD.
pub fn dense_rss(y: &[f64], x: &ColMatrix, cols: &[usize], centered: bool) -> f64 {
    let n = y.len();
    let p = cols.len() + usize::from(centered);
    if p == 0 {
        return y.iter().map(|v| v * v).sum();
    }
    let mut a = DMatrix::<f64>::zeros(n, p);
    let mut c0 = 0;
    if centered {
        a.column_mut(0).fill(1.0);
        c0 = 1;
    }
    for (c, &j) in cols.iter().enumerate() {
        a.column_mut(c0 + c).copy_from_slice(x.col(j));
    }
    let b = DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let beta = svd.solve(&b, 1e-12).unwrap();
    let r = &b - &a * beta;
    r.norm_squared()
}

/// Independent first-order P-value `1 - (1 - w)^m`, `w` the upper tail of
/// Beta(1/2, shape_b) at `u`, from quadrature.
pub fn pvalue_quadrature(u: f64, shape_b: f64, m: f64) -> f64 {
    let w = 1.0 - beta_cdf_quadrature(u, 0.5, shape_b);
    -(m * (-w).ln_1p()).exp_m1()
}

/// Forward selection by dense refits: each step adds the column with the
/// smallest refit RSS (lowest index on ties) while the P-value stays
/// within `alpha`.
pub fn brute_force_path(data: &Dataset, alpha: f64, kmax: usize) -> Vec<(usize, f64, f64)> {
    let (n, k) = (data.n(), data.k());
    let mut active: Vec<usize> = Vec::new();
    let mut ss_cur = dense_rss(data.y(), data.x(), &[], true);
    let mut path = Vec::new();
    while active.len() < kmax.min(n - 2).min(k) {
        let ell = active.len();
        let mut best: Option<(usize, f64)> = None;
        for j in (0..k).filter(|j| !active.contains(j)) {
            let mut cols = active.clone();
            cols.push(j);
            let ss = dense_rss(data.y(), data.x(), &cols, true);
            if best.is_none_or(|(_, b)| ss < b) {
                best = Some((j, ss));
            }
        }
        let (j, ss) = best.unwrap();
        let u = 1.0 - ss / ss_cur;
        let p = pvalue_quadrature(u, (n - ell - 1) as f64 / 2.0, (k - ell) as f64);
        if p > alpha {
            break;
        }
        active.push(j);
        path.push((j, ss, p));
        ss_cur = ss;
    }
    path
}

/// Two-sided Kolmogorov-Smirnov statistic of `sample` against U(0, 1).
pub fn ks_uniform(sample: &mut [f64]) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, &v)| ((i as f64 + 1.0) / n - v).max(v - i as f64 / n))
        .fold(0.0, f64::max)
}

/// Asymptotic Kolmogorov distribution tail `P(sqrt(n) D > t)`.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let t = (sn + 0.12 + 0.11 / sn) * d;
    let mut sum = 0.0;
    for j in 1..200 {
        let j = j as f64;
        let term = 2.0 * (-1f64).powi(j as i32 - 1) * (-2.0 * j * j * t * t).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}
