use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use super::design::MonotoneDesign;
use super::sample::MonotoneSample;
use super::wishart::WishartSummary;
use crate::error::{Error, Result};

fn chi2(dof: usize) -> ChiSquared<f64> {
    ChiSquared::new(dof as f64).expect("positive degrees of freedom")
}

/// Bartlett decomposition of a standard Wishart matrix W_k(ν, I): the
/// log-determinant is the sum of the logs of the diagonal chi-squares, the
/// trace adds the squared off-diagonal normals, whose sum is drawn as a
/// single chi-square with k(k−1)/2 degrees of freedom.
#[derive(Debug, Clone)]
struct Bartlett {
    diag: Vec<ChiSquared<f64>>,
    off: Option<ChiSquared<f64>>,
}

impl Bartlett {
    fn new(k: usize, nu: usize) -> Self {
        let diag = (1..=k).map(|i| chi2(nu + 1 - i)).collect();
        let n_off = k * k.saturating_sub(1) / 2;
        Self { diag, off: (n_off > 0).then(|| chi2(n_off)) }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let mut logdet = 0.0;
        let mut trace = 0.0;
        for d in &self.diag {
            let x = d.sample(rng);
            logdet += x.ln();
            trace += x;
        }
        if let Some(off) = &self.off {
            trace += off.sample(rng);
        }
        (logdet, trace)
    }
}

/// Draws the likelihood-ratio summary directly under the null (σ² = 1):
/// A ~ W_{p1}(N − 1, I), B ~ W_{p2}(n1 − p1, I) and tr C ~ χ²_{p1 p2},
/// mutually independent.
#[derive(Debug, Clone)]
pub struct SummarySampler {
    a: Bartlett,
    b: Option<Bartlett>,
    c: Option<ChiSquared<f64>>,
}

impl SummarySampler {
    pub fn new(design: &MonotoneDesign) -> Self {
        let p1 = design.p1();
        let p2 = design.p2();
        let a = Bartlett::new(p1, design.n());
        if p2 == 0 {
            return Self { a, b: None, c: None };
        }
        Self {
            a,
            b: Some(Bartlett::new(p2, design.n1() - p1)),
            c: Some(chi2(p1 * p2)),
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> WishartSummary {
        let (logdet_a, trace_a) = self.a.draw(rng);
        let (logdet_b, trace_b) = match &self.b {
            Some(b) => b.draw(rng),
            None => (0.0, 0.0),
        };
        let trace_c = self.c.as_ref().map_or(0.0, |c| c.sample(rng));
        WishartSummary { logdet_a, logdet_b, trace_a, trace_b, trace_c }
    }
}

/// One summary draw under the null.
pub fn sample_summary<R: Rng + ?Sized>(design: &MonotoneDesign, rng: &mut R) -> WishartSummary {
    SummarySampler::new(design).draw(rng)
}

/// Draws a raw monotone sample from N_p(0, σ² I).
pub fn sample_raw<R: Rng + ?Sized>(
    design: &MonotoneDesign,
    sigma2: f64,
    rng: &mut R,
) -> Result<MonotoneSample> {
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::Domain(format!("σ² = {sigma2} must be positive")));
    }
    let sd = sigma2.sqrt();
    let mut normal = |_: usize, _: usize| -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        sd * z
    };
    let complete = DMatrix::from_fn(design.n_complete(), design.p(), &mut normal);
    let partial = DMatrix::from_fn(design.n_partial(), design.p1(), &mut normal);
    MonotoneSample::new(design.p1(), design.p2(), complete, partial)
}
