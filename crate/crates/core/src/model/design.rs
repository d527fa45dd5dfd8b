use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape of a two-step monotone sample: `N1` complete p-vectors followed by
/// `N2` vectors observed on the first `p1` coordinates only.
///
/// The complete-data case is `p2 = 0, N2 = 0`, giving τ1 = 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MonotoneDesign {
    n_complete: usize,
    n_partial: usize,
    p1: usize,
    p2: usize,
}

impl MonotoneDesign {
    /// Builds a design from observation counts `N1`, `N2` and block sizes.
    pub fn new(n_complete: usize, n_partial: usize, p1: usize, p2: usize) -> Result<Self> {
        let design = Self { n_complete, n_partial, p1, p2 };
        design.validate()?;
        Ok(design)
    }

    /// Builds a design from the degrees of freedom `n = N − 1`, `n1 = N1 − 1`.
    pub fn from_dof(n: usize, n1: usize, p1: usize, p2: usize) -> Result<Self> {
        if n < n1 {
            return Err(Error::InvalidDesign(format!("n = {n} must be at least n1 = {n1}")));
        }
        Self::new(n1 + 1, n - n1, p1, p2)
    }

    /// Complete data: `n_obs` full observations of dimension `p`.
    pub fn complete(n_obs: usize, p: usize) -> Result<Self> {
        Self::new(n_obs, 0, p, 0)
    }

    fn validate(&self) -> Result<()> {
        if self.p1 == 0 {
            return Err(Error::InvalidDesign("p1 must be at least 1".into()));
        }
        if self.p2 == 0 && self.n_partial > 0 {
            return Err(Error::InvalidDesign(
                "p2 = 0 (complete data) requires N2 = 0".into(),
            ));
        }
        let p = self.p();
        if self.n_complete < p + 2 {
            return Err(Error::InvalidDesign(format!(
                "need n1 = N1 − 1 > p, got N1 = {} with p = {p}",
                self.n_complete
            )));
        }
        Ok(())
    }

    /// N1.
    pub fn n_complete(&self) -> usize {
        self.n_complete
    }

    /// N2.
    pub fn n_partial(&self) -> usize {
        self.n_partial
    }

    /// N = N1 + N2.
    pub fn n_total(&self) -> usize {
        self.n_complete + self.n_partial
    }

    pub fn p1(&self) -> usize {
        self.p1
    }

    pub fn p2(&self) -> usize {
        self.p2
    }

    pub fn p(&self) -> usize {
        self.p1 + self.p2
    }

    /// n = N − 1.
    pub fn n(&self) -> usize {
        self.n_total() - 1
    }

    /// n1 = N1 − 1.
    pub fn n1(&self) -> usize {
        self.n_complete - 1
    }

    /// τ1 = N1 / N.
    pub fn tau1(&self) -> f64 {
        self.n_complete as f64 / self.n_total() as f64
    }

    pub fn is_complete(&self) -> bool {
        self.p2 == 0
    }

    /// p1 + τ1 p2.
    pub fn effective_dim(&self) -> f64 {
        self.p1 as f64 + self.tau1() * self.p2 as f64
    }

    /// Degrees of freedom f = (p + 2)(p − 1)/2 of the limiting chi-square.
    pub fn chi2_dof(&self) -> u32 {
        let p = self.p();
        ((p + 2) * (p - 1) / 2) as u32
    }
}

impl std::fmt::Display for MonotoneDesign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "N1={} N2={} p1={} p2={} (n={}, n1={})",
            self.n_complete,
            self.n_partial,
            self.p1,
            self.p2,
            self.n(),
            self.n1()
        )
    }
}
