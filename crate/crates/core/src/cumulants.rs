//! Exact cumulants of −(2/N) log λ under the null, the standardized
//! cumulants of T, the Edgeworth coefficients γ_{k,j}, and the coefficients
//! b_s bounding the standardized cumulants together with their generating
//! function B(v).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::MonotoneDesign;
use crate::specfun::{polygamma, MAX_POLYGAMMA_ORDER};

/// Default highest cumulant order.
pub const DEFAULT_S_MAX: usize = 6;

/// Cumulants κ^(1..=s_max) of −(2/N) log λ and the scale m.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulantSet {
    kappa: Vec<f64>,
    m0: f64,
    m: f64,
}

impl CumulantSet {
    pub fn new(design: &MonotoneDesign, s_max: usize) -> Result<Self> {
        if s_max < 2 || s_max > MAX_POLYGAMMA_ORDER as usize + 1 {
            return Err(Error::UnsupportedOrder(s_max.saturating_sub(1) as u32));
        }
        let n = design.n() as f64;
        let n1 = design.n1() as f64;
        let p1 = design.p1();
        let p2 = design.p2();
        let p = design.p() as f64;
        let tau = design.tau1();
        let q = design.effective_dim();
        let big_a = 0.5 * (n * p1 as f64 + n1 * p2 as f64);

        let mut kappa = Vec::with_capacity(s_max);
        for s in 1..=s_max {
            let order = (s - 1) as u32;
            let first: f64 = (1..=p1)
                .map(|l| polygamma(order, 0.5 * (n - p1 as f64 + l as f64)))
                .sum::<Result<f64>>()?;
            let second: f64 = (1..=p2)
                .map(|l| polygamma(order, 0.5 * (n1 - p + l as f64)))
                .sum::<Result<f64>>()?;
            let lead = polygamma(order, big_a)?;
            let k = if s == 1 {
                let mut k = -q * q.ln() + q * lead - first - tau * second;
                if p2 > 0 {
                    k += tau * p2 as f64 * tau.ln();
                }
                k
            } else {
                let sign = if s % 2 == 0 { -1.0 } else { 1.0 };
                sign * (q.powi(s as i32) * lead - first - tau.powi(s as i32) * second)
            };
            kappa.push(k);
        }
        if !(kappa[1] > 0.0) {
            return Err(Error::Domain(format!("non-positive second cumulant {}", kappa[1])));
        }
        let m0 = 0.5 * (n1 - p - 0.5);
        let m = m0 * kappa[1].sqrt();
        Ok(Self { kappa, m0, m })
    }

    pub fn s_max(&self) -> usize {
        self.kappa.len()
    }

    /// κ^(s) for 1 ≤ s ≤ s_max.
    ///
    /// # Panics
    /// If `s` is outside `1..=s_max`.
    pub fn kappa(&self, s: usize) -> f64 {
        assert!(s >= 1 && s <= self.s_max(), "cumulant order {s} not computed");
        self.kappa[s - 1]
    }

    pub fn kappa1(&self) -> f64 {
        self.kappa[0]
    }

    pub fn kappa2(&self) -> f64 {
        self.kappa[1]
    }

    /// Standardized cumulant κ̃^(s) = κ^(s) / (κ^(2))^{s/2} of T.
    pub fn standardized(&self, s: usize) -> f64 {
        self.kappa(s) / self.kappa2().powf(0.5 * s as f64)
    }

    /// m0 = (n1 − p − 1/2)/2.
    pub fn m0(&self) -> f64 {
        self.m0
    }

    /// m = m0 √κ^(2).
    pub fn m(&self) -> f64 {
        self.m
    }

    /// T = (−(2/N) log λ − κ^(1)) / √κ^(2).
    pub fn standardize(&self, scaled_stat: f64) -> f64 {
        (scaled_stat - self.kappa1()) / self.kappa2().sqrt()
    }
}

/// Coefficients of (Σ_i a_i x^i)^k up to x^(len−1): entry j is the sum over
/// weak compositions j = s_1 + … + s_k of a_{s_1} ⋯ a_{s_k}.
pub fn composition_sums(a: &[f64], k: usize, len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    if len == 0 {
        return out;
    }
    out[0] = 1.0;
    for _ in 0..k {
        let mut next = vec![0.0; len];
        for (i, &x) in out.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for (j, &y) in a.iter().enumerate().take(len - i) {
                next[i + j] += x * y;
            }
        }
        out = next;
    }
    out
}

/// Edgeworth coefficients γ_{k,j}, 1 ≤ k ≤ s, 0 ≤ j ≤ s − k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaTable {
    order: usize,
    rows: Vec<Vec<f64>>,
}

impl GammaTable {
    /// Needs standardized cumulants up to order s + 2.
    pub fn new(cset: &CumulantSet, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::Domain("expansion order must be at least 1".into()));
        }
        if cset.s_max() < order + 2 {
            return Err(Error::Domain(format!(
                "order {order} needs cumulants through {}, have {}",
                order + 2,
                cset.s_max()
            )));
        }
        let a: Vec<f64> = (0..order)
            .map(|i| cset.standardized(i + 3) / factorial(i + 3))
            .collect();
        Ok(Self::from_coefficients(&a, order))
    }

    /// Builds the table from a_i = κ̃^(i+3)/(i+3)!, i = 0..order−1.
    pub fn from_coefficients(a: &[f64], order: usize) -> Self {
        let rows = (1..=order)
            .map(|k| composition_sums(a, k, order - k + 1))
            .collect();
        Self { order, rows }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// γ_{k,j}.
    pub fn get(&self, k: usize, j: usize) -> f64 {
        self.rows[k - 1][j]
    }

    /// Iterates over (k, j, γ_{k,j}).
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(k, row)| row.iter().enumerate().map(move |(j, &g)| (k + 1, j, g)))
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

const SERIES_CUTOFF: f64 = 0.05;

fn series<F: Fn(usize) -> f64>(x: f64, term: F) -> f64 {
    let mut sum = 0.0;
    let mut xp = 1.0;
    for s in 1..200 {
        xp *= x;
        let t = term(s) * xp;
        sum += t;
        if t.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// L1(x) = Σ_{s≥1} x^s / (s(s+1)(s+2)).
pub fn l1(x: f64) -> f64 {
    if x.abs() < SERIES_CUTOFF {
        let s = |k: usize| 1.0 / (k * (k + 1) * (k + 2)) as f64;
        return series(x, s);
    }
    (3.0 * x - 2.0) / (4.0 * x) - (1.0 - x).powi(2) / (2.0 * x * x) * (-x).ln_1p()
}

/// L2(x) = Σ_{s≥1} x^s / (s+2).
pub fn l2(x: f64) -> f64 {
    if x.abs() < SERIES_CUTOFF {
        return series(x, |k| 1.0 / (k + 2) as f64);
    }
    -(-x).ln_1p() / (x * x) - (2.0 + x) / (2.0 * x)
}

/// L3(x) = Σ_{s≥1} x^s / ((s+1)(s+2)).
pub fn l3(x: f64) -> f64 {
    if x.abs() < SERIES_CUTOFF {
        return series(x, |k| 1.0 / ((k + 1) * (k + 2)) as f64);
    }
    (1.0 - x) / (x * x) * (-x).ln_1p() + (2.0 - x) / (2.0 * x)
}

/// The coefficients b_s with 0 < κ̃^(s)/s! < m^{−(s−2)} b_{s−3}, and their
/// generating function B(v) = Σ_s b_s v^s.
#[derive(Debug, Clone, PartialEq)]
pub struct RemainderSeries {
    kappa2: f64,
    tau: f64,
    q: f64,
    n: f64,
    r1: f64,
    r2: f64,
    r3: f64,
    r4: f64,
}

impl RemainderSeries {
    pub fn new(design: &MonotoneDesign, cset: &CumulantSet) -> Self {
        let n = design.n() as f64;
        let n1 = design.n1() as f64;
        let p1 = design.p1() as f64;
        let a = n1 - design.p() as f64 - 0.5;
        Self {
            kappa2: cset.kappa2(),
            tau: design.tau1(),
            q: design.effective_dim(),
            n,
            r1: a / (n - p1 - 0.5),
            r2: a / (n - 0.5),
            r3: a / (n1 - p1 - 0.5),
            r4: a / n,
        }
    }

    /// b_s.
    pub fn b(&self, s: usize) -> f64 {
        let sf = s as f64;
        let e = (s + 1) as i32;
        let c = 2.0 / (self.kappa2 * (sf + 1.0) * (sf + 2.0) * (sf + 3.0));
        let t = self.tau;
        c * (self.r1.powi(e) - self.r2.powi(e))
            + c * t * t * (t.powi(e) - (t * self.r3).powi(e))
            - (2.0 / (self.kappa2 * (sf + 3.0) * self.n * self.n)
                + 2.0 * self.q / (self.kappa2 * (sf + 2.0) * (sf + 3.0) * self.n))
                * self.r4.powi(e)
    }

    /// b_0, …, b_{count−1}.
    pub fn coefficients(&self, count: usize) -> Vec<f64> {
        (0..count).map(|s| self.b(s)).collect()
    }

    /// B(v) in closed form, 0 ≤ v < 1.
    pub fn big_b(&self, v: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&v) {
            return Err(Error::Domain(format!("B(v) needs 0 ≤ v < 1, got {v}")));
        }
        if v == 0.0 {
            return Ok(self.b(0));
        }
        let t = self.tau;
        let args = [self.r1 * v, self.r2 * v, t * v, t * self.r3 * v, self.r4 * v];
        if let Some(x) = args.iter().find(|&&x| x >= 1.0) {
            return Err(Error::Domain(format!("L-function argument {x} ≥ 1")));
        }
        let inner = l1(args[0]) - l1(args[1]) + t * t * (l1(args[2]) - l1(args[3]))
            - l2(args[4]) / (self.n * self.n)
            - self.q / self.n * l3(args[4]);
        Ok(2.0 / (v * self.kappa2) * inner)
    }

    /// c_v = 1 − 2 v B(v).
    pub fn c_v(&self, v: f64) -> Result<f64> {
        Ok(1.0 - 2.0 * v * self.big_b(v)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::log_null_moment;

    fn table1_row1() -> (MonotoneDesign, CumulantSet) {
        let d = MonotoneDesign::from_dof(60, 40, 5, 5).unwrap();
        let c = CumulantSet::new(&d, 10).unwrap();
        (d, c)
    }

    #[test]
    fn reproduces_tabulated_scale() {
        let (_, c) = table1_row1();
        assert_eq!(format!("{:.3}", c.kappa2()), "0.037");
        assert_eq!(format!("{:.2}", c.m()), "2.83");
        let d = MonotoneDesign::from_dof(50, 40, 20, 10).unwrap();
        let c = CumulantSet::new(&d, 6).unwrap();
        assert_eq!(format!("{:.3}", c.kappa2()), "0.838");
        assert_eq!(format!("{:.2}", c.m()), "4.35");
    }

    #[test]
    fn low_cumulants_match_moment_derivatives() {
        // κ^(1), κ^(2) from finite differences of the cumulant generating
        // function t ↦ log E[λ^{−2t/N}].
        let d = MonotoneDesign::new(20, 10, 2, 2).unwrap();
        let c = CumulantSet::new(&d, 4).unwrap();
        let nn = d.n_total() as f64;
        let cgf = |t: f64| log_null_moment(-2.0 * t / nn, &d).unwrap();
        // h must stay ≥ 0, so use one-sided differences at t ≤ 0.
        let h = 2e-3;
        let d1 = (-3.0 * cgf(0.0) + 4.0 * cgf(-h) - cgf(-2.0 * h)) / (-2.0 * h);
        let d2 = (2.0 * cgf(0.0) - 5.0 * cgf(-h) + 4.0 * cgf(-2.0 * h) - cgf(-3.0 * h)) / (h * h);
        assert!((d1 - c.kappa1()).abs() < 1e-6 * c.kappa1().abs(), "{d1} {}", c.kappa1());
        assert!((d2 - c.kappa2()).abs() < 1e-4 * c.kappa2(), "{d2} {}", c.kappa2());
    }

    #[test]
    fn cumulants_are_positive() {
        for (n, n1, p1, p2) in [(60, 40, 5, 5), (30, 12, 3, 6), (200, 150, 40, 20), (20, 20, 4, 0)] {
            let d = MonotoneDesign::from_dof(n, n1, p1, p2).unwrap();
            let c = CumulantSet::new(&d, 10).unwrap();
            for s in 2..=10 {
                assert!(c.kappa(s) > 0.0, "κ^({s}) at {d}");
            }
        }
    }

    #[test]
    fn gamma_table_identities() {
        let (_, c) = table1_row1();
        let g = GammaTable::new(&c, 4).unwrap();
        let k3 = c.standardized(3);
        let k4 = c.standardized(4);
        for j in 0..=3 {
            let expect = c.standardized(j + 3) / factorial(j + 3);
            assert!((g.get(1, j) - expect).abs() < 1e-15 * expect.abs());
        }
        assert!((g.get(2, 0) - k3 * k3 / 36.0).abs() < 1e-15);
        assert!((g.get(2, 1) - 2.0 * k3 / 6.0 * k4 / 24.0).abs() < 1e-15);
        let g2 = GammaTable::new(&c, 2).unwrap();
        assert_eq!(g2.iter().count(), 3);
        assert!(GammaTable::new(&c, 9).is_err());
    }

    #[test]
    fn composition_sums_enumerate_compositions() {
        let a = [1.0, 2.0, 3.0];
        // (1 + 2x + 3x²)³ = 1 + 6x + 21x² + …
        assert_eq!(composition_sums(&a, 3, 3), vec![1.0, 6.0, 21.0]);
        assert_eq!(composition_sums(&a, 0, 2), vec![1.0, 0.0]);
    }

    #[test]
    fn l_functions_match_series() {
        for x in [1e-6f64, 0.01, 0.049, 0.051, 0.3, 0.5, 0.9] {
            let mut s1 = 0.0;
            let mut s2 = 0.0;
            let mut s3 = 0.0;
            for k in 1..2000usize {
                let kf = k as f64;
                let xp = x.powi(k as i32);
                s1 += xp / (kf * (kf + 1.0) * (kf + 2.0));
                s2 += xp / (kf + 2.0);
                s3 += xp / ((kf + 1.0) * (kf + 2.0));
            }
            assert!((l1(x) - s1).abs() < 1e-12 * s1.abs().max(1e-300), "L1({x})");
            assert!((l2(x) - s2).abs() < 1e-11 * s2.abs(), "L2({x})");
            assert!((l3(x) - s3).abs() < 1e-11 * s3.abs(), "L3({x})");
        }
    }

    #[test]
    fn sandwich_at_reference_design() {
        let (d, c) = table1_row1();
        let r = RemainderSeries::new(&d, &c);
        for s in 3..=10 {
            let lhs = c.standardized(s) / factorial(s);
            let rhs = c.m().powi(-(s as i32 - 2)) * r.b(s - 3);
            assert!(0.0 < lhs && lhs < rhs, "s = {s}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn closed_form_generating_function() {
        let (d, c) = table1_row1();
        let r = RemainderSeries::new(&d, &c);
        let b = r.coefficients(400);
        for v in [0.0, 0.01, 0.3, 0.5, 0.85] {
            let series: f64 = b.iter().rev().fold(0.0, |acc, &x| acc * v + x);
            let closed = r.big_b(v).unwrap();
            assert!((closed - series).abs() < 1e-10 * series.abs(), "v = {v}");
        }
        assert_eq!(format!("{:.2}", r.c_v(0.85).unwrap()), "0.50");
        assert!(r.big_b(1.0).is_err());
    }

    #[test]
    fn complete_data_b_has_no_second_block() {
        let d = MonotoneDesign::complete(30, 4).unwrap();
        let c = CumulantSet::new(&d, 6).unwrap();
        let r = RemainderSeries::new(&d, &c);
        let (n, a): (f64, f64) = (29.0, 29.0 - 4.0 - 0.5);
        let k2 = c.kappa2();
        for s in 0..6usize {
            let sf = s as f64;
            let e = (s + 1) as i32;
            let expect = 2.0 / (k2 * (sf + 1.0) * (sf + 2.0) * (sf + 3.0))
                * ((a / (n - 4.0 - 0.5)).powi(e) - (a / (n - 0.5)).powi(e))
                - (2.0 / (k2 * (sf + 3.0) * n * n) + 8.0 / (k2 * (sf + 2.0) * (sf + 3.0) * n)) * (a / n).powi(e);
            assert!((r.b(s) - expect).abs() < 1e-13 * expect.abs().max(1.0));
        }
    }
}
