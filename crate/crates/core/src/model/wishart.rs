use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::design::MonotoneDesign;
use super::sample::MonotoneSample;
use crate::error::{Error, Result};

/// Largest accepted condition number of W11 from the complete block.
pub const MAX_CONDITION: f64 = 1e12;

/// Sums-of-squares matrices of a monotone sample.
#[derive(Debug, Clone, PartialEq)]
pub struct WMatrices {
    /// W11 from the complete rows, `p1 × p1`.
    pub w11_complete: DMatrix<f64>,
    /// W11 from the partial rows plus the mean-shift term, `p1 × p1`.
    pub w11_partial: DMatrix<f64>,
    /// W12 from the complete rows, `p1 × p2`.
    pub w12: DMatrix<f64>,
    /// W22 from the complete rows, `p2 × p2`.
    pub w22: DMatrix<f64>,
    /// W22·1 = W22 − W21 W11⁻¹ W12, `p2 × p2`.
    pub w22_dot1: DMatrix<f64>,
}

fn centered(x: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let n = x.nrows() as f64;
    let mean = DVector::from_iterator(x.ncols(), x.column_iter().map(|c| c.sum() / n));
    let mut c = x.clone();
    for (j, mut col) in c.column_iter_mut().enumerate() {
        col.add_scalar_mut(-mean[j]);
    }
    (c, mean)
}

fn condition_number(m: &DMatrix<f64>) -> f64 {
    let eig = SymmetricEigen::new(m.clone());
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

impl WMatrices {
    /// Computes the W matrices. Needs at least two complete rows; the design
    /// constraints themselves are not enforced here.
    ///
    /// W11 of the complete block must be invertible unless it vanishes
    /// identically, in which case W12 vanishes too and W22·1 = W22.
    pub fn from_sample(sample: &MonotoneSample) -> Result<Self> {
        let p1 = sample.p1();
        let p2 = sample.p2();
        let n1 = sample.n_complete();
        let n2 = sample.n_partial();
        let (xc, mean_c) = centered(sample.complete());
        let w = xc.transpose() * &xc;
        let w11_complete = w.view((0, 0), (p1, p1)).into_owned();
        let w12 = w.view((0, p1), (p1, p2)).into_owned();
        let w22 = w.view((p1, p1), (p2, p2)).into_owned();

        let w11_partial = if n2 == 0 {
            DMatrix::zeros(p1, p1)
        } else {
            let (xp, mean_p) = centered(sample.partial());
            let shift = mean_c.rows(0, p1) - &mean_p;
            let nn = (n1 * n2) as f64 / (n1 + n2) as f64;
            xp.transpose() * &xp + (&shift * shift.transpose()) * nn
        };

        let w22_dot1 = if p2 == 0 {
            DMatrix::zeros(0, 0)
        } else if w11_complete.iter().all(|&x| x == 0.0) {
            w22.clone()
        } else {
            let cond = condition_number(&w11_complete);
            if !(cond <= MAX_CONDITION) {
                return Err(Error::SingularMatrix(cond));
            }
            let chol = w11_complete
                .clone()
                .cholesky()
                .ok_or(Error::SingularMatrix(cond))?;
            let solved = chol.solve(&w12);
            let mut r = &w22 - w12.transpose() * solved;
            r = (&r + r.transpose()) * 0.5;
            r
        };

        Ok(Self { w11_complete, w11_partial, w12, w22, w22_dot1 })
    }
}

fn spd_logdet(m: &DMatrix<f64>, name: &'static str) -> Result<f64> {
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    let chol = m.clone().cholesky().ok_or(Error::NonPositiveDeterminant(name))?;
    let l = chol.l_dirty();
    let logdet = 2.0 * (0..m.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>();
    if logdet.is_finite() {
        Ok(logdet)
    } else {
        Err(Error::NonPositiveDeterminant(name))
    }
}

/// The sufficient summary of a sample for the likelihood ratio:
/// A = W11 (complete) + W11 (partial), B = W22·1, C = W21 W11⁻¹ W12.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WishartSummary {
    pub logdet_a: f64,
    pub logdet_b: f64,
    pub trace_a: f64,
    pub trace_b: f64,
    pub trace_c: f64,
}

impl WishartSummary {
    pub fn from_w(w: &WMatrices) -> Result<Self> {
        let a = &w.w11_complete + &w.w11_partial;
        let logdet_a = spd_logdet(&a, "A = W11(1) + W11(2)")?;
        let logdet_b = spd_logdet(&w.w22_dot1, "B = W22.1")?;
        let trace_b = w.w22_dot1.trace();
        let trace_c = w.w22.trace() - trace_b;
        Ok(Self { logdet_a, logdet_b, trace_a: a.trace(), trace_b, trace_c })
    }

    pub fn from_sample(sample: &MonotoneSample) -> Result<Self> {
        Self::from_w(&WMatrices::from_sample(sample)?)
    }
}

/// The likelihood-ratio statistic of a realised summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrStatistic {
    /// log λ, always ≤ 0.
    pub log_lambda: f64,
    /// −(2/N) log λ, the scale on which the cumulants are stated.
    pub scaled: f64,
}

impl LrStatistic {
    /// −2 log λ.
    pub fn minus_two_log_lambda(&self) -> f64 {
        -2.0 * self.log_lambda
    }
}

/// Evaluates the likelihood ratio for sphericity from a summary.
pub fn lr_lambda(summary: &WishartSummary, design: &MonotoneDesign) -> Result<LrStatistic> {
    let n = design.n_total() as f64;
    let n1 = design.n_complete() as f64;
    let p1 = design.p1() as f64;
    let p2 = design.p2() as f64;
    let s = n * p1 + n1 * p2;
    let total = summary.trace_a + summary.trace_b + summary.trace_c;
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::Domain(format!("total trace {total} must be positive")));
    }
    if !summary.logdet_a.is_finite() {
        return Err(Error::NonPositiveDeterminant("A"));
    }
    if !summary.logdet_b.is_finite() {
        return Err(Error::NonPositiveDeterminant("B"));
    }
    let mut log_lambda = 0.5 * n * (summary.logdet_a - p1 * n.ln())
        + if design.p2() > 0 { 0.5 * n1 * (summary.logdet_b - p2 * n1.ln()) } else { 0.0 }
        - 0.5 * s * (total / s).ln();
    // Weighted AM-GM gives log λ ≤ 0; only rounding can push it above.
    if log_lambda > 0.0 {
        log_lambda = 0.0;
    }
    Ok(LrStatistic { log_lambda, scaled: -2.0 * log_lambda / n })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> MonotoneSample {
        let complete = DMatrix::from_row_slice(
            6,
            3,
            &[
                1.0, 0.3, -0.2, //
                0.4, -1.1, 0.5, //
                -0.7, 0.9, 1.3, //
                2.1, 0.2, -0.4, //
                -0.3, -0.8, 0.1, //
                0.6, 1.4, -1.0,
            ],
        );
        let partial = DMatrix::from_row_slice(3, 1, &[0.2, -1.5, 0.9]);
        MonotoneSample::new(1, 2, complete, partial).unwrap()
    }

    #[test]
    fn w22_dot1_is_schur_complement() {
        let w = WMatrices::from_sample(&sample()).unwrap();
        let w11 = w.w11_complete[(0, 0)];
        for i in 0..2 {
            for j in 0..2 {
                let expect = w.w22[(i, j)] - w.w12[(0, i)] * w.w12[(0, j)] / w11;
                assert!((w.w22_dot1[(i, j)] - expect).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn partial_block_includes_mean_shift() {
        let s = sample();
        let w = WMatrices::from_sample(&s).unwrap();
        // pooled scatter of all N observations on the first coordinate
        let all: Vec<f64> = s.complete().column(0).iter().chain(s.partial().iter()).copied().collect();
        let mean = all.iter().sum::<f64>() / all.len() as f64;
        let pooled: f64 = all.iter().map(|x| (x - mean).powi(2)).sum();
        let a = w.w11_complete[(0, 0)] + w.w11_partial[(0, 0)];
        assert!((a - pooled).abs() < 1e-12);
    }

    #[test]
    fn complete_data_matches_classical_statistic() {
        let s = sample();
        let full = MonotoneSample::new(3, 0, s.complete().clone(), DMatrix::zeros(0, 3)).unwrap();
        let design = MonotoneDesign::complete(6, 3).unwrap();
        let stat = lr_lambda(&WishartSummary::from_sample(&full).unwrap(), &design).unwrap();
        let (xc, _) = centered(full.complete());
        let w = xc.transpose() * &xc;
        let n: f64 = 6.0;
        let expect = 0.5 * n * (w.determinant() / n.powi(3)).ln() - 1.5 * n * (w.trace() / (3.0 * n)).ln();
        assert!((stat.log_lambda - expect).abs() < 1e-12);
        assert!(stat.log_lambda <= 0.0);
    }

    #[test]
    fn identical_columns_give_zero_blocks() {
        let complete = DMatrix::from_element(4, 3, 2.5);
        let partial = DMatrix::from_element(2, 1, 2.5);
        let s = MonotoneSample::new(1, 2, complete, partial).unwrap();
        let w = WMatrices::from_sample(&s).unwrap();
        assert!(w.w11_complete.iter().chain(w.w11_partial.iter()).all(|&x| x == 0.0));
        assert!(w.w22_dot1.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn collinear_w11_is_singular() {
        let complete = DMatrix::from_row_slice(
            4,
            3,
            &[1.0, 2.0, 0.1, 2.0, 4.0, 0.7, 3.0, 6.0, -0.2, 4.0, 8.0, 0.4],
        );
        let s = MonotoneSample::new(2, 1, complete, DMatrix::zeros(0, 2)).unwrap();
        assert!(matches!(WMatrices::from_sample(&s), Err(Error::SingularMatrix(_))));
    }

    #[test]
    fn small_sample_is_accepted() {
        let complete = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 2.0, -0.5]);
        let partial = DMatrix::from_row_slice(1, 1, &[0.0]);
        let s = MonotoneSample::new(1, 1, complete, partial).unwrap();
        let w = WMatrices::from_sample(&s).unwrap();
        assert!((w.w11_complete[(0, 0)] - 0.5).abs() < 1e-15);
        assert!(w.w22_dot1[(0, 0)].abs() < 1e-14);
        assert!(s.design().is_err());
    }
}
