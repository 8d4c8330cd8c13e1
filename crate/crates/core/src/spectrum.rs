//! Unperturbed energy levels with multiplicities.

use crate::error::{Error, Result};

/// Ordered list of eigenvalues `h_m` with finite multiplicities `M_m`.
///
/// Level indices are 0-based positions into `levels`; model constructors
/// decide how positions map onto physical quantum numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    levels: Vec<f64>,
    mults: Vec<usize>,
    offsets: Vec<usize>,
}

impl Spectrum {
    pub fn new(levels: Vec<f64>, mults: Vec<usize>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Config("spectrum needs at least one level".into()));
        }
        if levels.len() != mults.len() {
            return Err(Error::Config(format!(
                "levels/mults length mismatch: {} vs {}",
                levels.len(),
                mults.len()
            )));
        }
        if !levels.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Config("levels must be strictly increasing".into()));
        }
        if mults.iter().any(|&m| m == 0) {
            return Err(Error::Config("all multiplicities must be >= 1".into()));
        }
        let mut offsets = Vec::with_capacity(mults.len());
        let mut acc = 0;
        for &m in &mults {
            offsets.push(acc);
            acc += m;
        }
        Ok(Self {
            levels,
            mults,
            offsets,
        })
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, m: usize) -> f64 {
        self.levels[m]
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn mult(&self, m: usize) -> usize {
        self.mults[m]
    }

    /// Offset of level `m` inside the stacked per-mode basis.
    pub fn offset(&self, m: usize) -> usize {
        self.offsets[m]
    }

    /// Total dimension of one Fourier-mode slice.
    pub fn total_dim(&self) -> usize {
        self.offsets.last().copied().unwrap_or(0) + self.mults.last().copied().unwrap_or(0)
    }

    /// Gap h_m - h_n.
    pub fn delta(&self, m: usize, n: usize) -> f64 {
        self.levels[m] - self.levels[n]
    }

    /// Minimal gap between distinct levels. Infinite for a single level.
    pub fn delta0(&self) -> f64 {
        self.levels
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// mu_mn = min(M_m, M_n)^{1/2} M_m M_n.
    pub fn mu(&self, m: usize, n: usize) -> f64 {
        let mm = self.mults[m] as f64;
        let mn = self.mults[n] as f64;
        mm.min(mn).sqrt() * mm * mn
    }
}
