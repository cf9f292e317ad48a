//! Regularized incomplete beta function and the tail transforms used by
//! every Gaussian covariate P-value.
//!
//! All functions are pure. Quantities of the form `1 - q^k` are evaluated in
//! log space because `k` may be tens of thousands while `q` sits within a
//! few ulps of one.

use crate::error::{Error, Result};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Shape pair of a Beta distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaParams {
    a: f64,
    b: f64,
}

impl BetaParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0) {
            return Err(Error::domain(format!(
                "beta shapes must be positive and finite, got ({a}, {b})"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// The shape pair with the roles of `a` and `b` exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            a: self.b,
            b: self.a,
        }
    }
}

/// Remainder of the Stirling series, `ln Γ(x) - [(x-½)ln x - x + ½ln 2π]`,
/// accurate to f64 precision for `x >= 10`.
fn stirling_correction(x: f64) -> f64 {
    const C: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
    ];
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut acc = 0.0;
    for c in C.iter().rev() {
        acc = acc * inv2 + c;
    }
    acc * inv
}

/// `ln Γ(x)` for `x > 0`.
pub(crate) fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x >= 10.0 {
        return (x - 0.5) * x.ln() - x + HALF_LN_2PI + stirling_correction(x);
    }
    let mut z = x;
    let mut prod = 1.0;
    while z < 10.0 {
        prod *= z;
        z += 1.0;
    }
    ln_gamma(z) - prod.ln()
}

/// `ln Γ(big + small) - ln Γ(big)` for `big >= 10`, without forming either
/// large term.
fn ln_gamma_shift(big: f64, small: f64) -> f64 {
    (big - 0.5) * (small / big).ln_1p() + small * (big + small).ln() - small
        + stirling_correction(big + small)
        - stirling_correction(big)
}

/// `ln B(a, b)`.
pub fn log_beta(params: BetaParams) -> f64 {
    let (a, b) = (params.a, params.b);
    let (small, big) = if a < b { (a, b) } else { (b, a) };
    if big < 10.0 {
        ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
    } else if small < 10.0 {
        ln_gamma(small) - ln_gamma_shift(big, small)
    } else {
        HALF_LN_2PI - (a - 0.5) * (b / a).ln_1p() - (b - 0.5) * (a / b).ln_1p()
            - 0.5 * (a + b).ln()
            + stirling_correction(a)
            + stirling_correction(b)
            - stirling_correction(a + b)
    }
}

/// Continued fraction for the incomplete beta function (modified Lentz).
/// Converges quickly for `x < (a + 1) / (a + b + 2)`.
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    const MAX_ITER: usize = 100_000;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;

        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;

        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() <= EPS {
            break;
        }
    }
    h
}

/// Lower and upper tails `(I_x(a,b), 1 - I_x(a,b))` given both `x` and
/// `y = 1 - x`. Passing the complement separately keeps full precision when
/// the caller knows `y` more accurately than `1 - x`.
pub(crate) fn beta_tails(x: f64, y: f64, params: BetaParams) -> (f64, f64) {
    if x <= 0.0 {
        return (0.0, 1.0);
    }
    if y <= 0.0 {
        return (1.0, 0.0);
    }
    let (a, b) = (params.a, params.b);
    let ln_front = a * x.ln() + b * y.ln() - log_beta(params);
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        let lower = (front * beta_continued_fraction(a, b, x) / a).clamp(0.0, 1.0);
        (lower, 1.0 - lower)
    } else {
        let upper = (front * beta_continued_fraction(b, a, y) / b).clamp(0.0, 1.0);
        (1.0 - upper, upper)
    }
}

fn check_unit(x: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("{what} must lie in [0, 1], got {x}")));
    }
    Ok(())
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn beta_cdf(x: f64, params: BetaParams) -> Result<f64> {
    check_unit(x, "beta_cdf argument")?;
    Ok(beta_tails(x, 1.0 - x, params).0)
}

/// Upper tail `1 - I_x(a, b)`, computed without cancellation.
pub fn beta_sf(x: f64, params: BetaParams) -> Result<f64> {
    check_unit(x, "beta_sf argument")?;
    Ok(beta_tails(x, 1.0 - x, params).1)
}

/// `1 - q^k`, evaluated as `-expm1(k ln q)`.
pub fn beta_tail_power(q: f64, k_eff: f64) -> Result<f64> {
    check_unit(q, "beta_tail_power base")?;
    if !(k_eff > 0.0 && k_eff.is_finite()) {
        return Err(Error::domain(format!("exponent must be positive, got {k_eff}")));
    }
    Ok(tail_power_from_complement(1.0 - q, k_eff, q.ln()))
}

/// `1 - (1 - w)^k` where `ln_q = ln(1 - w)` is supplied when known.
fn tail_power_from_complement(w: f64, k_eff: f64, ln_q: f64) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    if w >= 1.0 {
        return 1.0;
    }
    (-(k_eff * ln_q).exp_m1()).clamp(0.0, 1.0)
}

fn check_order_params(k_eff: f64, nu: f64) -> Result<()> {
    if !(k_eff.is_finite() && nu.is_finite() && nu >= 1.0 && k_eff >= 1.0) {
        return Err(Error::domain(format!(
            "order statistic needs k >= 1 and nu >= 1, got k = {k_eff}, nu = {nu}"
        )));
    }
    if nu > k_eff {
        return Err(Error::domain(format!(
            "order statistic parameter nu = {nu} exceeds k = {k_eff}"
        )));
    }
    Ok(())
}

/// `1 - B_{k-ν+1, ν}(u)`: the probability that the ν-th largest of `k`
/// i.i.d. uniforms exceeds `u`.
pub fn order_statistic_pvalue(u: f64, k_eff: f64, nu: f64) -> Result<f64> {
    check_unit(u, "order statistic argument")?;
    check_order_params(k_eff, nu)?;
    if nu == 1.0 {
        return beta_tail_power(u, k_eff);
    }
    Ok(order_tail(1.0 - u, u, k_eff, nu))
}

/// Same probability as [`order_statistic_pvalue`], parameterized by the
/// upper tail `w = 1 - u`. This is the form the selection code uses, since
/// `w` is available to full relative precision when it is tiny.
pub fn order_statistic_pvalue_from_tail(w: f64, k_eff: f64, nu: f64) -> Result<f64> {
    check_unit(w, "order statistic tail")?;
    check_order_params(k_eff, nu)?;
    Ok(order_tail(w, 1.0 - w, k_eff, nu))
}

fn order_tail(w: f64, u: f64, k_eff: f64, nu: f64) -> f64 {
    if nu == 1.0 {
        return tail_power_from_complement(w, k_eff, (-w).ln_1p());
    }
    // 1 - I_u(k-ν+1, ν) = I_w(ν, k-ν+1)
    let params = BetaParams {
        a: nu,
        b: k_eff - nu + 1.0,
    };
    beta_tails(w, u, params).0
}

/// Upper tail of the F distribution with `(d1, d2)` degrees of freedom,
/// through `1 - F_{d1,d2}(f) = I_{d2/(d2 + d1 f)}(d2/2, d1/2)`.
pub fn f_sf(f: f64, d1: f64, d2: f64) -> Result<f64> {
    let params = BetaParams::new(d2 / 2.0, d1 / 2.0)?;
    if f.is_nan() || f < 0.0 {
        return Err(Error::domain(format!("F statistic must be >= 0, got {f}")));
    }
    if f.is_infinite() {
        return Ok(0.0);
    }
    let denom = d2 + d1 * f;
    Ok(beta_tails(d2 / denom, d1 * f / denom, params).0)
}
