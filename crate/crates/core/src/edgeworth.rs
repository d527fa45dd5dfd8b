//! Edgeworth expansion Q_s of the distribution of the standardized statistic
//! T and its truncated characteristic function.

use num_complex::Complex64;

use crate::cumulants::{CumulantSet, GammaTable};
use crate::error::{Error, Result};
use crate::model::MonotoneDesign;
use crate::specfun::{chi2_quantile, hermite_table, normal_cdf_pdf};

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeworthExpansion {
    gamma: GammaTable,
    inv_factorial: Vec<f64>,
    max_hermite: usize,
}

impl EdgeworthExpansion {
    pub fn new(cset: &CumulantSet, order: usize) -> Result<Self> {
        Ok(Self::from_gamma(GammaTable::new(cset, order)?))
    }

    pub fn from_gamma(gamma: GammaTable) -> Self {
        let s = gamma.order();
        let inv_factorial = (0..=s).map(|k| 1.0 / crate::cumulants::factorial(k)).collect();
        Self { gamma, inv_factorial, max_hermite: 3 * s + 1 }
    }

    pub fn order(&self) -> usize {
        self.gamma.order()
    }

    pub fn gamma(&self) -> &GammaTable {
        &self.gamma
    }

    /// Σ_k (1/k!) Σ_j γ_{k,j} h_{3k+j+shift}(x), shift ∈ {−1, 0}.
    fn hermite_sum(&self, h: &[f64], shift: isize) -> f64 {
        self.gamma
            .iter()
            .map(|(k, j, g)| {
                let deg = (3 * k + j) as isize + shift;
                self.inv_factorial[k] * g * h[deg as usize]
            })
            .sum()
    }

    /// Q_s(x) = Φ(x) − φ(x) Σ_k (1/k!) Σ_j γ_{k,j} h_{3k+j−1}(x).
    ///
    /// This is an expansion, not a distribution function: it may leave
    /// [0, 1] in the tails.
    pub fn cdf(&self, x: f64) -> f64 {
        let (cdf, pdf) = normal_cdf_pdf(x);
        if pdf == 0.0 {
            return cdf;
        }
        cdf - pdf * self.hermite_sum(&hermite_table(self.max_hermite, x), -1)
    }

    /// Q_s(x) clamped to [0, 1].
    pub fn cdf_clamped(&self, x: f64) -> f64 {
        self.cdf(x).clamp(0.0, 1.0)
    }

    /// Q_s'(x) = φ(x) {1 + Σ_k (1/k!) Σ_j γ_{k,j} h_{3k+j}(x)}.
    pub fn density(&self, x: f64) -> f64 {
        let (_, pdf) = normal_cdf_pdf(x);
        if pdf == 0.0 {
            return 0.0;
        }
        pdf * (1.0 + self.hermite_sum(&hermite_table(self.max_hermite, x), 0))
    }

    /// φ_{T,s}(t) = exp(−t²/2) {1 + Σ_k (1/k!) (it)^{3k} Σ_j γ_{k,j} (it)^j}.
    pub fn char_fn(&self, t: f64) -> Complex64 {
        let it = Complex64::new(0.0, t);
        let poly: Complex64 = self
            .gamma
            .iter()
            .map(|(k, j, g)| it.powu((3 * k + j) as u32) * (g * self.inv_factorial[k]))
            .sum();
        (Complex64::new(1.0, 0.0) + poly) * (-0.5 * t * t).exp()
    }
}

/// q(α) = (χ²_f(α)/N − κ^(1)) / √κ^(2), the standardized critical value.
pub fn q_alpha(alpha: f64, design: &MonotoneDesign, cset: &CumulantSet) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("α = {alpha} must lie in (0, 1)")));
    }
    let crit = chi2_quantile(alpha, design.chi2_dof())?;
    Ok(cset.standardize(crit / design.n_total() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;
    use crate::specfun::{normal_cdf, normal_pdf};
    use proptest::prelude::*;

    fn reference() -> (MonotoneDesign, CumulantSet) {
        let d = MonotoneDesign::from_dof(60, 40, 5, 5).unwrap();
        (d, CumulantSet::new(&d, 6).unwrap())
    }

    #[test]
    fn second_order_closed_form() {
        let (_, c) = reference();
        let e = EdgeworthExpansion::new(&c, 2).unwrap();
        let k3 = c.standardized(3);
        let k4 = c.standardized(4);
        for x in [-3.0f64, -1.2, 0.0, 0.4, 2.5] {
            let x2 = x * x;
            let expect = normal_cdf(x)
                - normal_pdf(x)
                    * (k3 * (x2 - 1.0) / 6.0
                        + k4 * (x2 * x - 3.0 * x) / 24.0
                        + k3 * k3 * (x2 * x2 * x - 10.0 * x2 * x + 15.0 * x) / 72.0);
            assert!((e.cdf(x) - expect).abs() < 1e-15, "x = {x}");
        }
    }

    #[test]
    fn zero_coefficients_give_normal() {
        let e = EdgeworthExpansion::from_gamma(GammaTable::from_coefficients(&[0.0, 0.0, 0.0], 3));
        for x in [-2.0, 0.0, 1.3] {
            assert_eq!(e.cdf(x), normal_cdf(x));
        }
    }

    #[test]
    fn tails_vanish() {
        let (_, c) = reference();
        let e = EdgeworthExpansion::new(&c, 2).unwrap();
        assert!((e.cdf(10.0) - 1.0).abs() < 1e-15);
        assert!(e.cdf(-10.0).abs() < 1e-15);
    }

    #[test]
    fn char_fn_basics() {
        let (_, c) = reference();
        let e = EdgeworthExpansion::new(&c, 3).unwrap();
        assert_eq!(e.char_fn(0.0), Complex64::new(1.0, 0.0));
        for t in [0.3, 1.7] {
            let a = e.char_fn(-t);
            let b = e.char_fn(t).conj();
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn fourier_inversion_gives_density() {
        let (_, c) = reference();
        let e = EdgeworthExpansion::new(&c, 2).unwrap();
        for x in [-1.0, 0.0, 1.5] {
            let re = |t: f64| (Complex64::new(0.0, -t * x).exp() * e.char_fn(t)).re;
            let v = integrate(re, -40.0, 40.0, 1e-12).unwrap().value / (2.0 * std::f64::consts::PI);
            assert!((v - e.density(x)).abs() < 1e-6, "x = {x}");
        }
    }

    #[test]
    fn quantile_input_is_decreasing() {
        let (d, c) = reference();
        assert!(q_alpha(0.9, &d, &c).unwrap() < q_alpha(0.1, &d, &c).unwrap());
        assert!(q_alpha(0.0, &d, &c).is_err());
        assert!(q_alpha(1.0, &d, &c).is_err());
    }

    #[test]
    fn tabulated_edgeworth_tail() {
        let d = MonotoneDesign::new(50, 50, 2, 2).unwrap();
        let c = CumulantSet::new(&d, 6).unwrap();
        let e = EdgeworthExpansion::new(&c, 2).unwrap();
        let tail = 1.0 - e.cdf(q_alpha(0.10, &d, &c).unwrap());
        assert_eq!(format!("{tail:.3}"), "0.120");
    }

    proptest! {
        #[test]
        fn density_is_derivative(x in -6.0f64..6.0) {
            let (_, c) = reference();
            let e = EdgeworthExpansion::new(&c, 2).unwrap();
            let h = 1e-4;
            let fd = (e.cdf(x + h) - e.cdf(x - h)) / (2.0 * h);
            prop_assert!((fd - e.density(x)).abs() < 1e-8);
        }
    }
}
