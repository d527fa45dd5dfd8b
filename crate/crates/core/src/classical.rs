//! Large-sample chi-square expansions of the null distribution and the
//! approximations of the upper-tail probability they induce.

use serde::{Deserialize, Serialize};

use crate::cumulants::CumulantSet;
use crate::edgeworth::{q_alpha, EdgeworthExpansion};
use crate::error::{Error, Result};
use crate::model::MonotoneDesign;
use crate::specfun::{chi2_cdf, chi2_quantile};

/// Which statistic a chi-square expansion refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    /// −2 log λ.
    Lrt,
    /// −2ρ log λ.
    Modified,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticCoefficients {
    pub beta: f64,
    pub gamma: f64,
    pub rho: f64,
    pub gamma_star: f64,
    pub f: u32,
    /// M = ρN.
    pub m: f64,
    pub n_total: f64,
}

impl AsymptoticCoefficients {
    /// Evaluated at the finite-sample τ1 = N1/N.
    pub fn new(design: &MonotoneDesign) -> Self {
        let p1 = design.p1() as f64;
        let p2 = design.p2() as f64;
        let p = p1 + p2;
        let t = design.tau1();
        let q = design.effective_dim();
        let n = design.n_total() as f64;
        let beta = (p1 * (2.0 * p1 * p1 + 9.0 * p1 + 11.0)
            + (p2 * (2.0 * p2 * p2 + 9.0 * p2 + 11.0) + 6.0 * p1 * p2 * (p + 3.0)) / t
            - 2.0 / q * (3.0 * p * p + 6.0 * p + 2.0))
            / 24.0;
        let rising4 = |x: f64| x * (x + 1.0) * (x + 2.0) * (x + 3.0);
        let gamma = (rising4(p1)
            + (rising4(p2)
                + 2.0 * p1 * p2 * ((p2 + 1.0) * (2.0 * p + p1 + 7.0) + 2.0 * (p1 + 1.0) * (p1 + 2.0)))
                / (t * t)
            - 4.0 / (q * q) * p * (p + 1.0) * (p + 2.0))
            / 48.0;
        let fp = (p + 2.0) * (p - 1.0);
        let rho = 1.0 - 4.0 * beta / (fp * n);
        let gamma_star = -2.0 * beta * beta / fp + gamma;
        Self { beta, gamma, rho, gamma_star, f: design.chi2_dof(), m: rho * n, n_total: n }
    }

    /// Truncated chi-square expansion of Pr(stat ≤ x). Not clamped.
    pub fn cdf(&self, x: f64, which: Statistic) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::Domain(format!("x = {x} must be non-negative")));
        }
        let g0 = chi2_cdf(x, self.f)?;
        let g4 = chi2_cdf(x, self.f + 4)?;
        Ok(match which {
            Statistic::Lrt => {
                let g2 = chi2_cdf(x, self.f + 2)?;
                let n = self.n_total;
                g0 + self.beta / n * (g2 - g0) + self.gamma / (n * n) * (g4 - g0)
            }
            Statistic::Modified => g0 + self.gamma_star / (self.m * self.m) * (g4 - g0),
        })
    }
}

/// Approximations of α1 = Pr(−2 log λ > χ²_f(α)) under the null.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailApproximations {
    pub alpha: f64,
    /// 1 − Q_2(q(α)) from the Edgeworth expansion.
    pub a_prop: f64,
    /// 1 − (chi-square expansion at χ²_f(α)).
    pub a_sys: f64,
}

impl TailApproximations {
    pub fn new(design: &MonotoneDesign, alpha: f64) -> Result<Self> {
        let cset = CumulantSet::new(design, 4)?;
        Self::with_order(design, &cset, alpha, 2)
    }

    /// Uses an Edgeworth expansion of the given order for `a_prop`.
    pub fn with_order(design: &MonotoneDesign, cset: &CumulantSet, alpha: f64, order: usize) -> Result<Self> {
        let q = q_alpha(alpha, design, cset)?;
        let a_prop = 1.0 - EdgeworthExpansion::new(cset, order)?.cdf(q);
        let crit = chi2_quantile(alpha, design.chi2_dof())?;
        let a_sys = 1.0 - AsymptoticCoefficients::new(design).cdf(crit, Statistic::Lrt)?;
        Ok(Self { alpha, a_prop, a_sys })
    }

    /// (B_prop, B_SYS) = (α̂1 − A_prop, α̂1 − A_SYS).
    pub fn biases(&self, alpha1_hat: f64) -> (f64, f64) {
        (alpha1_hat - self.a_prop, alpha1_hat - self.a_sys)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_data_beta_matches_box_correction() {
        // For complete data the standard Bartlett factor on the n = N − 1
        // scale is 1 − (2p² + p + 2)/(6pn); on the N scale this gives
        // 4β/((p + 2)(p − 1)) = 1 + (2p² + p + 2)/(6p).
        for p in 2..12usize {
            let d = MonotoneDesign::complete(p + 20, p).unwrap();
            let c = AsymptoticCoefficients::new(&d);
            let pf = p as f64;
            let expect = (pf + 2.0) * (pf - 1.0) / 4.0 * (1.0 + (2.0 * pf * pf + pf + 2.0) / (6.0 * pf));
            assert!((c.beta - expect).abs() < 1e-12 * expect, "p = {p}");
        }
        let d = MonotoneDesign::complete(30, 3).unwrap();
        assert!((AsymptoticCoefficients::new(&d).beta - 205.0 / 36.0).abs() < 1e-13);
    }

    #[test]
    fn rho_and_gamma_star_identities() {
        let d = MonotoneDesign::new(50, 25, 4, 6).unwrap();
        let c = AsymptoticCoefficients::new(&d);
        let fp = 12.0 * 9.0;
        assert!((1.0 - c.rho - 4.0 * c.beta / (fp * 75.0)).abs() < 1e-15);
        assert!((c.gamma_star - (c.gamma - 2.0 * c.beta * c.beta / fp)).abs() < 1e-12);
        assert_eq!(c.f, 54);
    }

    #[test]
    fn tabulated_tail_approximations() {
        let t = TailApproximations::new(&MonotoneDesign::new(50, 50, 2, 2).unwrap(), 0.10).unwrap();
        assert_eq!(format!("{:.3}", t.a_prop), "0.120");
        assert_eq!(format!("{:.3}", t.a_sys), "0.122");
        let (bp, bs) = t.biases(0.123);
        assert_eq!(format!("{bp:.3} {bs:.3}"), "0.003 0.001");

        let t = TailApproximations::new(&MonotoneDesign::new(50, 50, 2, 8).unwrap(), 0.10).unwrap();
        assert_eq!(format!("{:.3}", t.a_sys), "0.200");
        let t = TailApproximations::new(&MonotoneDesign::new(50, 50, 8, 32).unwrap(), 0.10).unwrap();
        assert_eq!(format!("{:.3}", t.a_sys), "1.596");
    }

    #[test]
    fn leading_term_only() {
        let d = MonotoneDesign::new(50, 50, 2, 2).unwrap();
        let mut c = AsymptoticCoefficients::new(&d);
        c.beta = 0.0;
        c.gamma = 0.0;
        c.gamma_star = 0.0;
        for x in [1.0, 9.0, 20.0] {
            assert_eq!(c.cdf(x, Statistic::Lrt).unwrap(), chi2_cdf(x, 9).unwrap());
            assert_eq!(c.cdf(x, Statistic::Modified).unwrap(), chi2_cdf(x, 9).unwrap());
        }
        assert!(c.cdf(-1.0, Statistic::Lrt).is_err());
    }
}
