#![allow(dead_code, unused_imports)]

//! Shared random generators for the property suites.

use std::sync::Arc;

use faer::Mat;
use rand::Rng;

use floq_core::block::{BlockIndex, BlockOperator, OmegaGrid};
use floq_core::linalg::{self, C64};
use floq_core::spectrum::Spectrum;

pub fn random_spectrum<R: Rng>(rng: &mut R, max_levels: usize, max_mult: usize) -> Arc<Spectrum> {
    let nl = rng.gen_range(1..=max_levels);
    let mut levels = vec![rng.gen_range(-2.0..2.0)];
    for _ in 1..nl {
        let last = *levels.last().unwrap();
        levels.push(last + rng.gen_range(0.3..4.0));
    }
    let mults = (0..nl).map(|_| rng.gen_range(1..=max_mult)).collect();
    Arc::new(Spectrum::new(levels, mults).unwrap())
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Mat<C64> {
    Mat::from_fn(rows, cols, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

pub fn random_hermitian<R: Rng>(rng: &mut R, n: usize) -> Mat<C64> {
    let m = random_matrix(rng, n, n);
    Mat::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * linalg::cr(0.5))
}

/// Random block operator over the shared grid with |k| <= k_store and
/// roughly `density` filled indices.
pub fn random_block_op<R: Rng>(
    rng: &mut R,
    spectrum: &Arc<Spectrum>,
    grid: &Arc<OmegaGrid>,
    k_store: i64,
    density: f64,
) -> BlockOperator {
    let mut op = BlockOperator::zero(spectrum.clone(), grid.clone(), k_store);
    let nl = spectrum.n_levels();
    for k in -k_store..=k_store {
        for n in 0..nl {
            for m in 0..nl {
                if rng.gen_range(0.0..1.0) > density {
                    continue;
                }
                let mats = (0..grid.len())
                    .map(|_| random_matrix(rng, spectrum.mult(n), spectrum.mult(m)))
                    .collect();
                op.insert(BlockIndex::new(k, n, m), mats).unwrap();
            }
        }
    }
    op
}

/// Hermitian-symmetric random block operator: X_{knm}(ω)^* = X_{-k,m,n}(ω).
pub fn random_hermitian_block_op<R: Rng>(
    rng: &mut R,
    spectrum: &Arc<Spectrum>,
    grid: &Arc<OmegaGrid>,
    k_store: i64,
    density: f64,
) -> BlockOperator {
    let raw = random_block_op(rng, spectrum, grid, k_store, density);
    let adj = raw.adjoint_op();
    raw.add(&adj).unwrap().scale(linalg::cr(0.5))
}

pub fn three_point_grid<R: Rng>(rng: &mut R) -> Arc<OmegaGrid> {
    let lo = rng.gen_range(0.5..1.5);
    let d1 = rng.gen_range(0.05..0.3);
    let d2 = rng.gen_range(0.05..0.3);
    Arc::new(OmegaGrid::new(vec![lo, lo + d1, lo + d1 + d2]).unwrap())
}
