//! Monotone designs, samples, the likelihood-ratio statistic and its null
//! distribution.

mod design;
mod moments;
mod sample;
mod sampler;
mod wishart;

pub use design::MonotoneDesign;
pub use moments::{log_null_moment, null_moment};
pub use sample::MonotoneSample;
pub use sampler::{sample_raw, sample_summary, SummarySampler};
pub use wishart::{lr_lambda, LrStatistic, WMatrices, WishartSummary, MAX_CONDITION};
