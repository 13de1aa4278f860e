//! Special functions used by the stopping rules and the scaling asymptotics.
//!
//! Beta shapes here are always vote counts plus one, so the regularized
//! incomplete beta at 1/2 is evaluated through the exact binomial-tail
//! identity instead of a continued fraction.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Integer Beta shapes `a = n1 + 1`, `b = n2 + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BetaParams {
    pub a: u64,
    pub b: u64,
}

impl BetaParams {
    pub fn new(a: u64, b: u64) -> Result<Self> {
        if a == 0 || b == 0 {
            return Err(Error::Domain(format!(
                "beta shapes must be >= 1, got ({a}, {b})"
            )));
        }
        Ok(Self { a, b })
    }

    /// Shapes for the posterior of the top-two split after `n1`, `n2` votes.
    pub fn from_counts(n1: u64, n2: u64) -> Self {
        Self { a: n1 + 1, b: n2 + 1 }
    }
}

// Stirling series coefficients B_{2k} / (2k (2k - 1)).
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

fn ln_gamma_stirling(z: f64) -> f64 {
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut pow = inv;
    for c in STIRLING {
        series += c * pow;
        pow *= inv2;
    }
    (z - 0.5) * z.ln() - z + LN_SQRT_2PI + series
}

/// `ln Γ(z)` for `z > 0`.
pub fn log_gamma(z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("log_gamma requires z > 0, got {z}")));
    }
    Ok(ln_gamma_pos(z))
}

/// `ln Γ(z)` without the domain check; caller guarantees `z > 0`.
pub(crate) fn ln_gamma_pos(z: f64) -> f64 {
    const SHIFT_TO: f64 = 15.0;
    if z >= SHIFT_TO {
        return ln_gamma_stirling(z);
    }
    let mut prod = 1.0;
    let mut w = z;
    while w < SHIFT_TO {
        prod *= w;
        w += 1.0;
    }
    ln_gamma_stirling(w) - prod.ln()
}

/// `ln n!` for integer `n`.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        0.0
    } else {
        ln_gamma_pos(n as f64 + 1.0)
    }
}

/// `ln B(a, b)`.
pub fn ln_beta(p: BetaParams) -> f64 {
    ln_gamma_pos(p.a as f64) + ln_gamma_pos(p.b as f64) - ln_gamma_pos((p.a + p.b) as f64)
}

/// Beta density `x^{a-1} (1-x)^{b-1} / B(a, b)` evaluated in log space.
pub fn beta_pdf(x: f64, p: BetaParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("beta_pdf requires x in [0,1], got {x}")));
    }
    let left = if p.a == 1 { 0.0 } else { (p.a - 1) as f64 * x.ln() };
    let right = if p.b == 1 {
        0.0
    } else {
        (p.b - 1) as f64 * (1.0 - x).ln()
    };
    Ok((left + right - ln_beta(p)).exp())
}

/// `ln` of the Beta density at `x = 1/2`.
pub fn ln_beta_pdf_half(p: BetaParams) -> f64 {
    -((p.a + p.b - 2) as f64) * LN_2 - ln_beta(p)
}

fn scale_pow2(mut v: f64, mut k: i64) -> f64 {
    while k > 1000 {
        v *= 2f64.powi(1000);
        k -= 1000;
    }
    while k < -1000 {
        v *= 2f64.powi(-1000);
        k += 1000;
    }
    v * 2f64.powi(k as i32)
}

/// `Σ_{j<terms} C(n, j)` as `(mantissa, e)` meaning `mantissa * 2^e`.
///
/// Terms come from the multiplicative recurrence with exact power-of-two
/// rescaling, so the relative error grows only linearly in `terms`.
fn binomial_prefix_sum(n: u64, terms: u64) -> (f64, i64) {
    const LIMIT: f64 = 1e250;
    const SHIFT: i32 = 800;
    let down = 2f64.powi(-SHIFT);
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut exp2 = 0i64;
    for j in 1..terms {
        term = term * (n - j + 1) as f64 / j as f64;
        sum += term;
        if sum > LIMIT {
            term *= down;
            sum *= down;
            exp2 += SHIFT as i64;
        }
    }
    (sum, exp2)
}

/// `I_{1/2}(a, b) = Σ_{j<b} C(a+b-1, j) 2^{-(a+b-1)}`, summing the shorter side.
pub fn reg_inc_beta_half(p: BetaParams) -> f64 {
    if p.a == p.b {
        return 0.5;
    }
    let n = p.a + p.b - 1;
    if p.b < p.a {
        let (m, e) = binomial_prefix_sum(n, p.b);
        scale_pow2(m, e - n as i64)
    } else {
        let (m, e) = binomial_prefix_sum(n, p.a);
        1.0 - scale_pow2(m, e - n as i64)
    }
}

/// Above this shorter-side length the binomial sum gives way to the
/// continued fraction.
const SUM_LIMIT: u64 = 512;

/// `ln I_{1/2}(a, b)` for `a > b` from the continued fraction, which converges
/// in `O(√(a + b))` terms on this side.
fn ln_inc_beta_half_cf(a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let x = 0.5;
    let mut c = 1.0;
    let mut d = 1.0 - (a + b) * x / (a + 1.0);
    d = if d.abs() < TINY { TINY } else { d };
    d = 1.0 / d;
    let mut h = d;
    for m in 1..100_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        for num in [
            m * (b - m) * x / ((a + m2 - 1.0) * (a + m2)),
            -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0)),
        ] {
            d = 1.0 + num * d;
            d = if d.abs() < TINY { TINY } else { d };
            c = 1.0 + num / c;
            c = if c.abs() < TINY { TINY } else { c };
            d = 1.0 / d;
            h *= d * c;
        }
        if (d * c - 1.0).abs() < 1e-16 {
            break;
        }
    }
    let ln_b = ln_gamma_pos(a) + ln_gamma_pos(b) - ln_gamma_pos(a + b);
    -(a + b) * LN_2 - a.ln() - ln_b + h.ln()
}

/// `ln I_{1/2}(a, b)`; finite even when the value underflows `f64`.
pub fn ln_reg_inc_beta_half(p: BetaParams) -> f64 {
    if p.a == p.b {
        return -LN_2;
    }
    if p.a.min(p.b) > SUM_LIMIT {
        let (a, b) = (p.a as f64, p.b as f64);
        return if p.a > p.b {
            ln_inc_beta_half_cf(a, b)
        } else {
            (-ln_inc_beta_half_cf(b, a).exp()).ln_1p()
        };
    }
    let n = p.a + p.b - 1;
    if p.b < p.a {
        let (m, e) = binomial_prefix_sum(n, p.b);
        m.ln() + (e - n as i64) as f64 * LN_2
    } else {
        let (m, e) = binomial_prefix_sum(n, p.a);
        (-scale_pow2(m, e - n as i64)).ln_1p()
    }
}

fn erf_series(x: f64) -> f64 {
    // erf x = 2/sqrt(pi) e^{-x^2} sum 2^n x^{2n+1} / (2n+1)!!
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    loop {
        n += 1.0;
        term *= 2.0 * x2 / (2.0 * n + 1.0);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    2.0 / SQRT_PI * (-x2).exp() * sum
}

fn erfc_continued_fraction(x: f64) -> f64 {
    // erfc x = e^{-x^2}/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    // evaluated with the modified Lentz method.
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..500 {
        let a = k as f64 * 0.5;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / (SQRT_PI * f)
}

const ERF_SWITCH: f64 = 2.5;

pub fn erf(x: f64) -> f64 {
    if x < 0.0 {
        return -erf(-x);
    }
    if x == 0.0 {
        0.0
    } else if x < ERF_SWITCH {
        erf_series(x)
    } else {
        1.0 - erfc_continued_fraction(x)
    }
}

pub fn erfc(x: f64) -> f64 {
    if x < ERF_SWITCH {
        1.0 - erf(x)
    } else {
        erfc_continued_fraction(x)
    }
}

/// Standard normal CDF.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Lower incomplete gamma `γ(1/2, z) = √π (2Φ(√(2z)) − 1) = √π erf(√z)`.
pub fn lower_inc_gamma_half(z: f64) -> Result<f64> {
    if z < 0.0 || z.is_nan() {
        return Err(Error::Domain(format!(
            "lower_inc_gamma_half requires z >= 0, got {z}"
        )));
    }
    if z.is_infinite() {
        return Ok(SQRT_PI);
    }
    Ok(SQRT_PI * erf(z.sqrt()))
}
