//! Computable upper bounds on sup_x |Pr(T ≤ x) − Q_s(x)| and their grid
//! minimization.
//!
//! The bounds split the smoothing-inequality integral into a low-frequency
//! part U1 (cumulant remainder), a mid part (exact I2, or its upper bounds
//! U2 and Ũ2) and a high-frequency part U3 bounding the true characteristic
//! function directly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cumulants::{composition_sums, factorial, CumulantSet, GammaTable, RemainderSeries};
use crate::error::{Error, Result};
use crate::model::MonotoneDesign;
use crate::quadrature::{integrate, integrate_to_infinity, integrate_to_infinity_tol, TailDecay, Tolerance};
use crate::specfun::gamma;

pub const DEFAULT_GRID_STEP: f64 = 0.05;
pub const DEFAULT_ORDER: usize = 2;

const FINITE_TOL: f64 = 1e-12;
// U3 is negligible far below this absolute level, where its integrand is
// also too small to evaluate to full relative precision.
const U3_TOL: Tolerance = Tolerance { rel: 1e-12, abs: 1e-16 };
const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// H(z) = arctan(z)/z − log z + ½ log(1 + z²), for z > 0.
pub fn h_function(z: f64) -> f64 {
    if z > 1.0 {
        z.atan() / z + 0.5 * (1.0 / (z * z)).ln_1p()
    } else {
        z.atan() / z - z.ln() + 0.5 * (z * z).ln_1p()
    }
}

/// t² F(t): the exponent in U3's integrand (2/t) exp(−t² F(t)).
pub fn u3_exponent(design: &MonotoneDesign, t: f64) -> f64 {
    let n = design.n() as f64;
    let n1 = design.n1() as f64;
    let p1 = design.p1();
    let p2 = design.p2();
    let p = design.p() as f64;
    let tau = design.tau1();
    let q = design.effective_dim();
    let a = n * p1 as f64 + n1 * p2 as f64;
    let mut r = 0.5 * a * h_function(a / (2.0 * q * t)) + (0.5 * a).ln();
    for l in 1..=p1 {
        let c = n - p1 as f64 + l as f64;
        r -= 0.5 * c * h_function(c / (2.0 * t));
    }
    for l in 1..=p2 {
        let c = n1 - p + l as f64;
        r -= 0.5 * c * h_function(c / (2.0 * tau * t));
    }
    r - 0.5 * (0.25 * a * a + q * q * t * t).ln()
}

/// Power-law decay rate of U3's integrand: it falls like t^(−rate).
pub fn u3_tail_rate(design: &MonotoneDesign) -> f64 {
    let p = design.p() as f64;
    (p * p - p - 4.0) / 4.0 + 1.0
}

/// ∫ t^k e^{−c t²/2} over [0, b], split at powers of two so the peak of
/// the integrand is always resolved.
fn moment_to(k: i32, c: f64, b: f64) -> Result<f64> {
    let f = |t: f64| t.powi(k) * (-0.5 * c * t * t).exp();
    let mut total = 0.0;
    let mut lo = 0.0;
    let mut hi = 1.0f64.min(b);
    while lo < b {
        total += integrate(f, lo, hi, FINITE_TOL)?.value;
        lo = hi;
        hi = (2.0 * hi).min(b);
    }
    Ok(total)
}

/// The bound components of an expansion of order s at one design.
#[derive(Debug, Clone)]
pub struct BoundCalculator {
    design: MonotoneDesign,
    order: usize,
    cset: CumulantSet,
    gamma: GammaTable,
    series: RemainderSeries,
    b: Vec<f64>,
}

impl BoundCalculator {
    pub fn new(design: &MonotoneDesign, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::Domain("expansion order must be at least 1".into()));
        }
        let cset = CumulantSet::new(design, (order + 2).max(4))?;
        let gamma = GammaTable::new(&cset, order)?;
        let series = RemainderSeries::new(design, &cset);
        let b = series.coefficients(order + 1);
        Ok(Self { design: *design, order, cset, gamma, series, b })
    }

    pub fn design(&self) -> &MonotoneDesign {
        &self.design
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn cumulants(&self) -> &CumulantSet {
        &self.cset
    }

    pub fn series(&self) -> &RemainderSeries {
        &self.series
    }

    pub fn m(&self) -> f64 {
        self.cset.m()
    }

    pub fn m0(&self) -> f64 {
        self.cset.m0()
    }

    fn check_v(v: f64) -> Result<()> {
        if v > 0.0 && v < 1.0 {
            Ok(())
        } else {
            Err(Error::Domain(format!("v = {v} must lie in (0, 1)")))
        }
    }

    /// R_{k,ℓ}(v) = v^{−ℓ} {B(v)^k − Σ_{j<ℓ} c_{k,j} v^j}, where c_{k,j} are
    /// the coefficients of B(v)^k.
    pub fn remainder(&self, k: usize, l: usize, v: f64) -> Result<f64> {
        Self::check_v(v)?;
        let bk = self.series.big_b(v)?.powi(k as i32);
        let coeffs = composition_sums(&self.b, k, l);
        let head: f64 = coeffs.iter().rev().fold(0.0, |acc, &c| acc * v + c);
        Ok((bk - head) / v.powi(l as i32))
    }

    /// c_v = 1 − 2 v B(v).
    pub fn c_v(&self, v: f64) -> Result<f64> {
        self.series.c_v(v)
    }

    pub fn u1(&self, v: f64) -> Result<f64> {
        Self::check_v(v)?;
        let s = self.order;
        let m = self.m();
        let upper = m * v;
        let mut total = 0.0;
        for k in 1..=s {
            let r = self.remainder(k, s - k + 1, v)?;
            total += r / factorial(k) * moment_to((s + 2 * k) as i32, 1.0, upper)?;
        }
        let big_b = self.series.big_b(v)?;
        let cv = 1.0 - 2.0 * v * big_b;
        total += big_b.powi(s as i32 + 1) / factorial(s + 1) * moment_to((3 * s + 2) as i32, cv, upper)?;
        Ok(2.0 / m.powi(s as i32 + 1) * total)
    }

    pub fn i2(&self, v: f64) -> Result<f64> {
        Self::check_v(v)?;
        let lower = self.m() * v;
        let terms: Vec<(i32, f64)> = self
            .gamma
            .iter()
            .map(|(k, j, g)| ((3 * k + j) as i32 - 1, g / factorial(k)))
            .collect();
        let f = |t: f64| {
            let poly: f64 = terms.iter().map(|&(d, w)| w * t.powi(d)).sum();
            (1.0 / t + poly) * (-0.5 * t * t).exp()
        };
        Ok(2.0 * integrate_to_infinity(f, lower, FINITE_TOL, TailDecay::Gaussian)?.value)
    }

    fn u2_rest(&self, c: f64) -> f64 {
        self.gamma
            .iter()
            .map(|(k, j, g)| {
                let e = (3 * k + j) as f64 / 2.0;
                g * (c / 2.0).powf(-e) * gamma(e)
            })
            .sum()
    }

    fn check_c(c: f64) -> Result<()> {
        if c > 0.0 && c < 1.0 {
            Ok(())
        } else {
            Err(Error::Domain(format!("c = {c} must lie in (0, 1)")))
        }
    }

    /// Closed-form upper bound of I2.
    pub fn u2(&self, v: f64, c: f64) -> Result<f64> {
        Self::check_v(v)?;
        Self::check_c(c)?;
        let mv = self.m() * v;
        let e = (-0.5 * mv * mv * (1.0 - c)).exp();
        Ok(e * ((TWO_PI / c).sqrt() / mv + self.u2_rest(c)))
    }

    /// U2 with its first bracket term replaced by 1, valid once
    /// (1/(mv))√(2π/c) < 1.
    pub fn u2_tilde(&self, v: f64, c: f64) -> Result<f64> {
        Self::check_v(v)?;
        Self::check_c(c)?;
        let mv = self.m() * v;
        let e = (-0.5 * mv * mv * (1.0 - c)).exp();
        Ok(e * (1.0 + self.u2_rest(c)))
    }

    /// U3(v) = 2 ∫_{m0 v}^∞ (1/t) exp(−t² F(t)) dt. Diverges for p < 3.
    pub fn u3(&self, v: f64) -> Result<f64> {
        Self::check_v(v)?;
        if self.design.p() < 3 {
            return Err(Error::Divergence(format!(
                "U3 needs p ≥ 3, design has p = {}",
                self.design.p()
            )));
        }
        let d = self.design;
        let f = move |t: f64| 2.0 / t * (-u3_exponent(&d, t)).exp();
        let rate = u3_tail_rate(&self.design);
        Ok(integrate_to_infinity_tol(f, self.m0() * v, U3_TOL, TailDecay::Power(rate))?.value)
    }

    /// All components at one grid value of v.
    fn point(&self, v: f64, cs: &[f64]) -> Result<GridPoint> {
        let u1 = self.u1(v)?;
        let i2 = self.i2(v)?;
        let u3 = self.u3(v)?;
        let u2 = cs.iter().map(|&c| self.u2(v, c)).collect::<Result<Vec<_>>>()?;
        let u2_tilde = cs.iter().map(|&c| self.u2_tilde(v, c)).collect::<Result<Vec<_>>>()?;
        Ok(GridPoint { v, c_v: self.c_v(v)?, u1, i2, u3, u2, u2_tilde })
    }

    /// Minimizes the four bounds over the grid {step, 2·step, …} ∩ (0, 1) for
    /// both v and c. Ties go to the smallest v, then the smallest c.
    pub fn minimize(&self, grid_step: f64) -> Result<BoundReport> {
        let grid = grid(grid_step)?;
        let points = grid
            .par_iter()
            .map(|&v| self.point(v, &grid))
            .collect::<Result<Vec<_>>>()?;

        let m = self.m();
        let mut best: [Option<BoundChoice>; 4] = [None, None, None, None];
        let mut offer = |slot: usize, candidate: BoundChoice| {
            let better = match &best[slot] {
                None => true,
                Some(b) => candidate.value < b.value - 1e-15,
            };
            if better {
                best[slot] = Some(candidate);
            }
        };
        for pt in &points {
            let base = pt.u1 + pt.u3;
            offer(
                0,
                BoundChoice { value: (base + pt.i2) / TWO_PI, v: pt.v, c: None, c_v: pt.c_v, u1: pt.u1, mid: pt.i2, u3: pt.u3 },
            );
            for (ci, &c) in grid.iter().enumerate() {
                let choice = |mid: f64| BoundChoice {
                    value: (base + mid) / TWO_PI,
                    v: pt.v,
                    c: Some(c),
                    c_v: pt.c_v,
                    u1: pt.u1,
                    mid,
                    u3: pt.u3,
                };
                offer(1, choice(pt.u2[ci]));
                if c > TWO_PI / (m * m * pt.v * pt.v) {
                    offer(2, choice(pt.u2_tilde[ci]));
                }
                if pt.v >= std::f64::consts::SQRT_2 / m {
                    offer(3, choice(pt.u2_tilde[ci]));
                }
            }
        }
        let [b1, b2, b3, b4] = best;
        Ok(BoundReport {
            n: self.design.n(),
            n1: self.design.n1(),
            p1: self.design.p1(),
            p2: self.design.p2(),
            order: self.order,
            kappa2: self.cset.kappa2(),
            m,
            m0: self.m0(),
            bound1: b1.expect("grid is non-empty"),
            bound2: b2.expect("grid is non-empty"),
            bound3: b3,
            bound4: b4,
        })
    }
}

struct GridPoint {
    v: f64,
    c_v: f64,
    u1: f64,
    i2: f64,
    u3: f64,
    u2: Vec<f64>,
    u2_tilde: Vec<f64>,
}

/// Grid values i·step in (0, 1), computed as i/k when step = 1/k.
pub fn grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step < 1.0) {
        return Err(Error::Domain(format!("grid step {step} must lie in (0, 1)")));
    }
    let k = (1.0 / step).round();
    let exact = ((1.0 / step) - k).abs() < 1e-9;
    let mut out = Vec::new();
    for i in 1.. {
        let v = if exact { i as f64 / k } else { i as f64 * step };
        if v >= 1.0 - 1e-12 {
            break;
        }
        out.push(v);
    }
    Ok(out)
}

/// One minimized bound with its minimizer and components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundChoice {
    pub value: f64,
    pub v: f64,
    /// The c gridpoint, absent for BOUND1.
    pub c: Option<f64>,
    /// c_v = 1 − 2vB(v) at the minimizing v.
    pub c_v: f64,
    pub u1: f64,
    /// I2 for BOUND1, U2 for BOUND2, Ũ2 for BOUND3 and BOUND4.
    pub mid: f64,
    pub u3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: usize,
    pub n1: usize,
    pub p1: usize,
    pub p2: usize,
    pub order: usize,
    pub kappa2: f64,
    pub m: f64,
    pub m0: f64,
    pub bound1: BoundChoice,
    pub bound2: BoundChoice,
    /// None when no gridpoint satisfies c > 2π/(m²v²).
    pub bound3: Option<BoundChoice>,
    /// None when no gridpoint satisfies v ≥ √2/m.
    pub bound4: Option<BoundChoice>,
}

impl BoundReport {
    /// The smallest of the available bounds.
    pub fn min_bound(&self) -> f64 {
        [Some(self.bound1), Some(self.bound2), self.bound3, self.bound4]
            .iter()
            .flatten()
            .map(|b| b.value)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Convenience wrapper: [`BoundCalculator::minimize`] at one design.
pub fn minimize_bounds(design: &MonotoneDesign, order: usize, grid_step: f64) -> Result<BoundReport> {
    BoundCalculator::new(design, order)?.minimize(grid_step)
}
