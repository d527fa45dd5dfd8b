//! Seeded Monte Carlo experiments under the null: empirical distribution of
//! T, its sup-distance to the Edgeworth expansion, and empirical Type I
//! error rates of the chi-square test.
//!
//! Replications are split into fixed chunks of [`CHUNK_SIZE`]; chunk `i`
//! draws from ChaCha12 seeded with `seed` on stream `i`. Results therefore
//! depend only on `(seed, reps)`, not on the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::TailApproximations;
use crate::cumulants::CumulantSet;
use crate::edgeworth::EdgeworthExpansion;
use crate::error::{Error, Result};
use crate::model::{lr_lambda, sample_raw, MonotoneDesign, SummarySampler, WishartSummary};
use crate::specfun::chi2_quantile;

pub const CHUNK_SIZE: u64 = 4096;
pub const MIN_REPS: u64 = 1000;
pub const DEFAULT_REPS: u64 = 1_000_000;
pub const DEFAULT_ALPHAS: [f64; 3] = [0.10, 0.05, 0.01];
const DIGEST_LEVELS: [f64; 11] = [0.001, 0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99, 0.999];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    /// Draws the Wishart summary directly.
    Summary,
    /// Simulates the full data matrix and computes W from it.
    Raw,
}

impl std::str::FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "summary" => Ok(Self::Summary),
            "raw" => Ok(Self::Raw),
            other => Err(Error::InvalidPlan(format!("unknown sampler {other:?}"))),
        }
    }
}

/// The stream-`stream` generator of a seed.
pub fn substream(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub design: MonotoneDesign,
    pub reps: u64,
    pub seed: u64,
    pub sampler: SamplerKind,
    pub alphas: Vec<f64>,
    pub order: usize,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl ExperimentPlan {
    pub fn new(design: MonotoneDesign, reps: u64, seed: u64) -> Self {
        Self {
            design,
            reps,
            seed,
            sampler: SamplerKind::Summary,
            alphas: DEFAULT_ALPHAS.to_vec(),
            order: 2,
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps < MIN_REPS {
            return Err(Error::InvalidPlan(format!("reps = {} below the minimum {MIN_REPS}", self.reps)));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return Err(Error::InvalidPlan(format!("α = {a} must lie in (0, 1)")));
        }
        if self.order == 0 {
            return Err(Error::InvalidPlan("expansion order must be at least 1".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidPlan("threads must be at least 1".into()));
        }
        Ok(())
    }
}

fn draw_chunk(plan: &ExperimentPlan, chunk: u64) -> Result<Vec<f64>> {
    let start = chunk * CHUNK_SIZE;
    let len = CHUNK_SIZE.min(plan.reps - start) as usize;
    let mut rng = substream(plan.seed, chunk);
    let design = &plan.design;
    let mut out = Vec::with_capacity(len);
    match plan.sampler {
        SamplerKind::Summary => {
            let sampler = SummarySampler::new(design);
            for _ in 0..len {
                out.push(lr_lambda(&sampler.draw(&mut rng), design)?.scaled);
            }
        }
        SamplerKind::Raw => {
            for _ in 0..len {
                let sample = sample_raw(design, 1.0, &mut rng)?;
                out.push(lr_lambda(&WishartSummary::from_sample(&sample)?, design)?.scaled);
            }
        }
    }
    Ok(out)
}

fn with_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidPlan(e.to_string()))?;
            Ok(pool.install(job))
        }
    }
}

/// Draws `plan.reps` values of −(2/N) log λ, in replication order.
pub fn simulate_scaled(plan: &ExperimentPlan) -> Result<Vec<f64>> {
    plan.validate()?;
    let chunks = plan.reps.div_ceil(CHUNK_SIZE);
    let parts = with_pool(plan.threads, || {
        (0..chunks)
            .into_par_iter()
            .map(|c| draw_chunk(plan, c))
            .collect::<Result<Vec<_>>>()
    })??;
    Ok(parts.concat())
}

/// sup_x |F_R(x) − Q(x)| between the empirical CDF of an ascending sample
/// and a continuous function Q.
pub fn sup_distance<F: Fn(f64) -> f64>(sorted: &[f64], q: F) -> f64 {
    let r = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let qt = q(t);
            ((i + 1) as f64 / r - qt).abs().max((i as f64 / r - qt).abs())
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaOutcome {
    pub alpha: f64,
    /// χ²_f(α), the rejection threshold for −2 log λ.
    pub critical: f64,
    pub rejections: u64,
    /// Empirical α1.
    pub alpha1: f64,
    /// Binomial standard error of α1.
    pub std_error: f64,
    pub a_prop: f64,
    pub a_sys: f64,
    pub b_prop: f64,
    pub b_sys: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub design: MonotoneDesign,
    pub reps: u64,
    pub seed: u64,
    pub sampler: SamplerKind,
    pub order: usize,
    pub kappa1: f64,
    pub kappa2: f64,
    pub mean_t: f64,
    pub var_t: f64,
    /// sup_x |Pr(T ≤ x) − Q_s(x)| estimated from the sample.
    pub mae: Option<f64>,
    pub alpha1: Vec<AlphaOutcome>,
    /// (level, empirical quantile of T).
    pub t_quantiles: Vec<(f64, f64)>,
}

fn summarize(plan: &ExperimentPlan, scaled: &[f64], with_mae: bool, with_alpha: bool) -> Result<ExperimentResult> {
    let design = &plan.design;
    let cset = CumulantSet::new(design, (plan.order + 2).max(4))?;
    let mut t: Vec<f64> = scaled.iter().map(|&s| cset.standardize(s)).collect();
    let r = t.len() as f64;
    let mean_t = t.iter().sum::<f64>() / r;
    let var_t = t.iter().map(|x| (x - mean_t).powi(2)).sum::<f64>() / (r - 1.0);

    let mut alpha1 = Vec::new();
    if with_alpha {
        let nn = design.n_total() as f64;
        for &alpha in &plan.alphas {
            let critical = chi2_quantile(alpha, design.chi2_dof())?;
            let rejections = scaled.iter().filter(|&&s| nn * s > critical).count() as u64;
            let rate = rejections as f64 / r;
            let approx = TailApproximations::with_order(design, &cset, alpha, plan.order)?;
            let (b_prop, b_sys) = approx.biases(rate);
            alpha1.push(AlphaOutcome {
                alpha,
                critical,
                rejections,
                alpha1: rate,
                std_error: (rate * (1.0 - rate) / r).sqrt(),
                a_prop: approx.a_prop,
                a_sys: approx.a_sys,
                b_prop,
                b_sys,
            });
        }
    }

    t.par_sort_unstable_by(f64::total_cmp);
    let mae = if with_mae {
        let expansion = EdgeworthExpansion::new(&cset, plan.order)?;
        Some(sup_distance(&t, |x| expansion.cdf(x)))
    } else {
        None
    };
    let t_quantiles = DIGEST_LEVELS
        .iter()
        .map(|&lvl| {
            let idx = ((lvl * r).ceil() as usize).clamp(1, t.len()) - 1;
            (lvl, t[idx])
        })
        .collect();

    Ok(ExperimentResult {
        design: *design,
        reps: plan.reps,
        seed: plan.seed,
        sampler: plan.sampler,
        order: plan.order,
        kappa1: cset.kappa1(),
        kappa2: cset.kappa2(),
        mean_t,
        var_t,
        mae,
        alpha1,
        t_quantiles,
    })
}

/// Empirical sup-distance between the distribution of T and Q_s.
pub fn run_mae(plan: &ExperimentPlan) -> Result<ExperimentResult> {
    summarize(plan, &simulate_scaled(plan)?, true, false)
}

/// Empirical Type I error of the chi-square test at each α, with the
/// Edgeworth and chi-square-expansion approximations and their biases.
pub fn run_type1(plan: &ExperimentPlan) -> Result<ExperimentResult> {
    summarize(plan, &simulate_scaled(plan)?, false, true)
}

/// Both analyses from one set of draws.
pub fn run(plan: &ExperimentPlan) -> Result<ExperimentResult> {
    summarize(plan, &simulate_scaled(plan)?, true, true)
}
