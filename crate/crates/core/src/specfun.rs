//! Special functions: log-gamma, polygamma, regularized incomplete gamma,
//! chi-square distribution, standard normal and probabilists' Hermite
//! polynomials.
//!
//! Everything here is a pure function of its arguments. Log-gamma and the
//! complementary error function are taken from `libm`; the rest is built on
//! top of them.

use crate::error::{Error, Result};

/// Largest polygamma order accepted by [`polygamma`].
pub const MAX_POLYGAMMA_ORDER: u32 = 12;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// B_2, B_4, ..., B_24.
const BERNOULLI_EVEN: [f64; 12] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
];

const INCGAMMA_MAX_ITER: usize = 100_000;

/// Natural log of Γ(x) for x > 0.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Γ(x) for moderate positive x.
#[inline]
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Polygamma function ψ^(s)(x) = d^{s+1}/dx^{s+1} log Γ(x).
///
/// The argument is shifted upward with ψ^(s)(x) = ψ^(s)(x+1) − (−1)^s s!/x^{s+1}
/// until it clears `16 + s`, where the Bernoulli asymptotic series converges
/// to full double precision within a dozen terms.
pub fn polygamma(order: u32, x: f64) -> Result<f64> {
    if order > MAX_POLYGAMMA_ORDER {
        return Err(Error::UnsupportedOrder(order));
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("polygamma requires a finite positive argument, got {x}")));
    }

    let threshold = 16.0 + order as f64;
    let s_fact = factorial(order);
    // (−1)^{s+1}
    let sign = if order % 2 == 0 { -1.0 } else { 1.0 };

    let mut shift_sum = 0.0;
    let mut x = x;
    while x < threshold {
        if order == 0 {
            shift_sum -= 1.0 / x;
        } else {
            shift_sum += sign * s_fact / x.powi(order as i32 + 1);
        }
        x += 1.0;
    }

    let x2 = x * x;
    let asym = if order == 0 {
        let mut sum = x.ln() - 0.5 / x;
        let mut xpow = x2;
        for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
            let two_k = 2.0 * (k + 1) as f64;
            let term = b / (two_k * xpow);
            sum -= term;
            if term.abs() < f64::EPSILON * 1e-2 * sum.abs() {
                break;
            }
            xpow *= x2;
        }
        sum
    } else {
        let s = order as i32;
        let mut sum = factorial(order - 1) / x.powi(s) + s_fact / (2.0 * x.powi(s + 1));
        // coef = (2k+s−1)!/(2k)!, updated incrementally
        let mut coef = factorial(order); // k = 1: (s+1)!/2! computed below
        coef *= (order + 1) as f64 / 2.0;
        let mut xpow = x.powi(s + 2);
        for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
            let term = b * coef / xpow;
            sum += term;
            if term.abs() < f64::EPSILON * 1e-2 * sum.abs() {
                break;
            }
            let two_k = 2.0 * (k + 1) as f64;
            coef *= (two_k + order as f64) * (two_k + order as f64 + 1.0) / ((two_k + 1.0) * (two_k + 2.0));
            xpow *= x2;
        }
        sign * sum
    };
    Ok(shift_sum + asym)
}

/// Digamma ψ(x).
pub fn digamma(x: f64) -> Result<f64> {
    polygamma(0, x)
}

fn check_incgamma_args(a: f64, x: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Domain(format!("incomplete gamma shape must be positive, got {a}")));
    }
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("incomplete gamma argument must be non-negative, got {x}")));
    }
    Ok(())
}

/// log of x^a e^{−x} / Γ(a), the common prefactor of P and Q.
fn ln_incgamma_prefactor(a: f64, x: f64) -> f64 {
    a * x.ln() - x - ln_gamma(a)
}

fn lower_series(a: f64, x: f64) -> Result<f64> {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..INCGAMMA_MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * 1e-17 {
            return Ok(sum * ln_incgamma_prefactor(a, x).exp());
        }
    }
    Err(Error::NonConvergence(format!("incomplete gamma series a={a}, x={x}")))
}

/// Modified Lentz evaluation of the continued fraction for Q(a, x).
fn upper_continued_fraction(a: f64, x: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..INCGAMMA_MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            return Ok(h * ln_incgamma_prefactor(a, x).exp());
        }
    }
    Err(Error::NonConvergence(format!("incomplete gamma continued fraction a={a}, x={x}")))
}

/// Regularized lower incomplete gamma P(a, x).
pub fn gamma_p(a: f64, x: f64) -> Result<f64> {
    check_incgamma_args(a, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x < a + 1.0 {
        lower_series(a, x)
    } else {
        Ok(1.0 - upper_continued_fraction(a, x)?)
    }
}

/// Regularized upper incomplete gamma Q(a, x) = 1 − P(a, x).
pub fn gamma_q(a: f64, x: f64) -> Result<f64> {
    check_incgamma_args(a, x)?;
    if x == 0.0 {
        return Ok(1.0);
    }
    if x < a + 1.0 {
        Ok(1.0 - lower_series(a, x)?)
    } else {
        upper_continued_fraction(a, x)
    }
}

fn check_dof(k: u32) -> Result<()> {
    if k < 1 {
        return Err(Error::Domain("chi-square degrees of freedom must be at least 1".into()));
    }
    Ok(())
}

/// Chi-square distribution function G_k(x).
pub fn chi2_cdf(x: f64, k: u32) -> Result<f64> {
    check_dof(k)?;
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("chi-square argument must be non-negative, got {x}")));
    }
    gamma_p(0.5 * k as f64, 0.5 * x)
}

/// Chi-square survival function 1 − G_k(x), computed without cancellation.
pub fn chi2_sf(x: f64, k: u32) -> Result<f64> {
    check_dof(k)?;
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("chi-square argument must be non-negative, got {x}")));
    }
    gamma_q(0.5 * k as f64, 0.5 * x)
}

/// Chi-square density.
pub fn chi2_pdf(x: f64, k: u32) -> f64 {
    if x <= 0.0 {
        return match k {
            1 => f64::INFINITY,
            2 => 0.5,
            _ => 0.0,
        };
    }
    let h = 0.5 * k as f64;
    ((h - 1.0) * x.ln() - 0.5 * x - h * std::f64::consts::LN_2 - ln_gamma(h)).exp()
}

/// Upper 100α percentile χ²_k(α): the x with 1 − G_k(x) = α.
///
/// Safeguarded Newton on the survival function, started from the
/// Wilson–Hilferty approximation and kept inside a bracket.
pub fn chi2_quantile(alpha: f64, k: u32) -> Result<f64> {
    check_dof(k)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("chi-square tail probability must lie in (0,1), got {alpha}")));
    }
    let kf = k as f64;
    let z = normal_quantile(1.0 - alpha);
    let c = 2.0 / (9.0 * kf);
    let mut x = (kf * (1.0 - c + z * c.sqrt()).powi(3)).max(1e-8);

    // bracket: sf(lo) > alpha > sf(hi)
    let mut lo = x;
    while lo > 1e-300 && chi2_sf(lo, k)? <= alpha {
        lo *= 0.5;
    }
    if lo <= 1e-300 {
        lo = 0.0;
    }
    let mut hi = x.max(lo + 1.0);
    while chi2_sf(hi, k)? > alpha {
        hi *= 2.0;
    }
    x = x.clamp(lo, hi);

    for _ in 0..200 {
        let g = chi2_sf(x, k)? - alpha;
        if g.abs() <= 1e-15 * alpha {
            return Ok(x);
        }
        if g > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        // d/dx sf = −pdf
        let pdf = chi2_pdf(x, k);
        let mut next = x + g / pdf;
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * x.max(1e-300) || hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// Standard normal distribution function and density, (Φ(x), φ(x)).
pub fn normal_cdf_pdf(x: f64) -> (f64, f64) {
    (normal_cdf(x), normal_pdf(x))
}

#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

#[inline]
pub fn normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Inverse of Φ. Acklam's rational approximation polished by one Halley
/// step against `erfc`.
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383_577_518_672_69e2,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;
    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let e = normal_cdf(x) - p;
    let u = e / normal_pdf(x);
    x - u / (1.0 + 0.5 * x * u)
}

/// Probabilists' Hermite polynomial h_r(x), with φ(x)h_r(x) = (−1)^r φ^{(r)}(x).
pub fn hermite(r: usize, x: f64) -> f64 {
    match r {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut prev, mut cur) = (1.0, x);
            for k in 1..r {
                let next = x * cur - k as f64 * prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// h_0(x), ..., h_max(x) in one pass.
pub fn hermite_table(max_order: usize, x: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(max_order + 1);
    h.push(1.0);
    if max_order >= 1 {
        h.push(x);
    }
    for k in 1..max_order {
        let next = x * h[k] - k as f64 * h[k - 1];
        h.push(next);
    }
    h
}
