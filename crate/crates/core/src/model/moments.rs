use super::design::MonotoneDesign;
use crate::error::{Error, Result};
use crate::specfun::ln_gamma;

/// log E[λ^h] under sphericity, exact for real h ≥ 0.
pub fn log_null_moment(h: f64, design: &MonotoneDesign) -> Result<f64> {
    if !(h >= 0.0) || !h.is_finite() {
        return Err(Error::Domain(format!("moment order h = {h} must be finite and non-negative")));
    }
    let n = design.n_total() as f64;
    let n1 = design.n_complete() as f64;
    let p1 = design.p1();
    let p2 = design.p2();
    let p = design.p() as f64;
    let s = n * p1 as f64 + n1 * p2 as f64;

    let mut acc = h * (0.5 * s * s.ln() - 0.5 * n * p1 as f64 * n.ln());
    if p2 > 0 {
        acc -= h * 0.5 * n1 * p2 as f64 * n1.ln();
    }
    for l in 1..=p1 {
        let a = 0.5 * (n - p1 as f64 - 1.0 + l as f64);
        acc += ln_gamma(a + 0.5 * n * h) - ln_gamma(a);
    }
    for l in 1..=p2 {
        let a = 0.5 * (n1 - p - 1.0 + l as f64);
        acc += ln_gamma(a + 0.5 * n1 * h) - ln_gamma(a);
    }
    let base = 0.5 * ((n - 1.0) * p1 as f64 + (n1 - 1.0) * p2 as f64);
    acc += ln_gamma(base) - ln_gamma(base + 0.5 * s * h);
    if acc.is_finite() {
        Ok(acc)
    } else {
        Err(Error::Overflow("null moment"))
    }
}

/// E[λ^h] under sphericity for integer h.
pub fn null_moment(h: u32, design: &MonotoneDesign) -> Result<f64> {
    let v = log_null_moment(h as f64, design)?.exp();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow("null moment"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeroth_moment_is_one() {
        let d = MonotoneDesign::new(20, 10, 2, 2).unwrap();
        assert!((null_moment(0, &d).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn moments_lie_in_unit_interval_and_decrease() {
        let d = MonotoneDesign::new(20, 10, 2, 2).unwrap();
        let m1 = null_moment(1, &d).unwrap();
        let m2 = null_moment(2, &d).unwrap();
        assert!(0.0 < m2 && m2 < m1 && m1 < 1.0);
        assert!(m2 >= m1 * m1);
    }

    #[test]
    fn complete_p2_case_matches_classical_moment() {
        // Classical sphericity moment for N observations of dimension 2:
        // E[λ^h] = (2N)^{hN} Γ(n)Γ((n-1)/2 + Nh/2)Γ(n/2 + Nh/2) / (N^{hN} Γ(n + Nh) Γ((n-1)/2) Γ(n/2))
        // with n = N - 1, written in log form.
        let big_n = 15usize;
        let d = MonotoneDesign::complete(big_n, 2).unwrap();
        let nf = big_n as f64;
        let n = nf - 1.0;
        for h in [1.0, 2.0, 0.5] {
            let expect = h * nf * (2.0f64).ln()
                + ln_gamma(n)
                + ln_gamma(0.5 * (n - 1.0) + 0.5 * nf * h)
                + ln_gamma(0.5 * n + 0.5 * nf * h)
                - ln_gamma(n + nf * h)
                - ln_gamma(0.5 * (n - 1.0))
                - ln_gamma(0.5 * n);
            assert!((log_null_moment(h, &d).unwrap() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_negative_order() {
        let d = MonotoneDesign::new(20, 10, 2, 2).unwrap();
        assert!(log_null_moment(-1.0, &d).is_err());
    }
}
