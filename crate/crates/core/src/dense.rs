//! Dense assembly of block operators on the truncated Fourier-mode window.

use std::sync::Arc;

use faer::Mat;

use crate::block::BlockOperator;
use crate::linalg::{self, C64};
use crate::spectrum::Spectrum;

/// Truncated basis {(k, m, i) : |k| <= k_trunc, m < n_levels, i < M_m},
/// ordered lexicographically in (k, m, i).
#[derive(Clone)]
pub struct DenseWindow {
    spectrum: Arc<Spectrum>,
    k_trunc: i64,
}

impl DenseWindow {
    pub fn new(spectrum: Arc<Spectrum>, k_trunc: i64) -> Self {
        assert!(k_trunc >= 0);
        Self { spectrum, k_trunc }
    }

    pub fn k_trunc(&self) -> i64 {
        self.k_trunc
    }

    pub fn spectrum(&self) -> &Arc<Spectrum> {
        &self.spectrum
    }

    pub fn n_modes(&self) -> usize {
        (2 * self.k_trunc + 1) as usize
    }

    pub fn dim(&self) -> usize {
        self.n_modes() * self.spectrum.total_dim()
    }

    /// Start of the (k, m) block row.
    pub fn offset(&self, k: i64, m: usize) -> usize {
        debug_assert!(k.abs() <= self.k_trunc);
        ((k + self.k_trunc) as usize) * self.spectrum.total_dim() + self.spectrum.offset(m)
    }

    /// Assemble the multiplication operator of `x` at grid point `grid_idx`.
    /// Modes the window cannot hold are dropped (zero-padded when
    /// k_trunc exceeds the stored support).
    pub fn assemble(&self, x: &BlockOperator, grid_idx: usize) -> Mat<C64> {
        let mut out = linalg::zeros(self.dim(), self.dim());
        for (idx, mats) in x.entries() {
            let block = &mats[grid_idx];
            for k_col in -self.k_trunc..=self.k_trunc {
                let k_row = k_col + idx.k;
                if k_row.abs() > self.k_trunc {
                    continue;
                }
                let r0 = self.offset(k_row, idx.n);
                let c0 = self.offset(k_col, idx.m);
                for i in 0..block.nrows() {
                    for j in 0..block.ncols() {
                        out[(r0 + i, c0 + j)] = out[(r0 + i, c0 + j)] + block[(i, j)];
                    }
                }
            }
        }
        out
    }

    /// Diagonal matrix of the unperturbed operator: kω + h_m per basis state.
    pub fn floquet_k(&self, omega: f64) -> Mat<C64> {
        let mut out = linalg::zeros(self.dim(), self.dim());
        for k in -self.k_trunc..=self.k_trunc {
            for m in 0..self.spectrum.n_levels() {
                let v = k as f64 * omega + self.spectrum.level(m);
                let o = self.offset(k, m);
                for i in 0..self.spectrum.mult(m) {
                    out[(o + i, o + i)] = linalg::cr(v);
                }
            }
        }
        out
    }

    /// Unperturbed eigenvalue list restricted to |k| <= k_int, ascending,
    /// tagged with the generating (k, m).
    pub fn interior_modes(&self, k_int: i64) -> Vec<(i64, usize)> {
        let mut out = Vec::new();
        for k in -k_int.min(self.k_trunc)..=k_int.min(self.k_trunc) {
            for m in 0..self.spectrum.n_levels() {
                out.push((k, m));
            }
        }
        out
    }

    /// Max-abs entry over rows and columns whose mode satisfies
    /// |k| <= k_trunc - margin.
    pub fn max_abs_interior(&self, m: &Mat<C64>, margin: i64) -> f64 {
        let k_int = self.k_trunc - margin;
        if k_int < 0 {
            return 0.0;
        }
        let lo = self.offset(-k_int, 0);
        let hi = self.offset(k_int, 0) + self.spectrum.total_dim();
        let mut best = 0.0f64;
        for i in lo..hi {
            for j in lo..hi {
                best = best.max(m[(i, j)].abs());
            }
        }
        best
    }

    /// Max-abs entry over off-diagonal positions (mode or level differs),
    /// restricted to the interior.
    pub fn max_abs_interior_offdiag(&self, m: &Mat<C64>, margin: i64) -> f64 {
        let k_int = self.k_trunc - margin;
        if k_int < 0 {
            return 0.0;
        }
        let dim_m = self.spectrum.total_dim();
        let lo = self.offset(-k_int, 0);
        let hi = self.offset(k_int, 0) + dim_m;
        let mut best = 0.0f64;
        for i in lo..hi {
            for j in lo..hi {
                // same (k, m) block?
                let (bi, bj) = (i / dim_m, j / dim_m);
                let (li, lj) = (i % dim_m, j % dim_m);
                let same_level = self.level_of(li) == self.level_of(lj);
                if bi == bj && same_level {
                    continue;
                }
                best = best.max(m[(i, j)].abs());
            }
        }
        best
    }

    fn level_of(&self, pos_in_mode: usize) -> usize {
        let mut lvl = 0;
        for m in 0..self.spectrum.n_levels() {
            if pos_in_mode >= self.spectrum.offset(m) {
                lvl = m;
            }
        }
        lvl
    }
}
