//! ω-parameterized block operators on the (Fourier mode k, level n, level m)
//! lattice, with the weighted algebra norm, convolution product, diagonal
//! projector and symmetry predicates.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use faer::Mat;
use serde_json::json;

use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::spectrum::Spectrum;

/// Lattice index of one block. `k` is the Fourier mode, `n` the row level,
/// `m` the column level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockIndex {
    pub k: i64,
    pub n: usize,
    pub m: usize,
}

impl BlockIndex {
    pub fn new(k: i64, n: usize, m: usize) -> Self {
        Self { k, n, m }
    }

    pub fn is_diagonal(&self) -> bool {
        self.k == 0 && self.n == self.m
    }

    /// Index carrying the adjoint block: (k, n, m) -> (-k, m, n).
    pub fn adjoint(&self) -> Self {
        Self {
            k: -self.k,
            n: self.m,
            m: self.n,
        }
    }
}

/// Sorted sample points in ω.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaGrid {
    points: Vec<f64>,
}

impl OmegaGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Config("omega grid needs at least one point".into()));
        }
        if !points.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Config(
                "omega grid points must be strictly increasing".into(),
            ));
        }
        Ok(Self { points })
    }

    pub fn single(omega: f64) -> Arc<Self> {
        Arc::new(Self {
            points: vec![omega],
        })
    }

    pub fn uniform(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 2 || hi <= lo {
            return Err(Error::Config("uniform grid needs n >= 2 and hi > lo".into()));
        }
        let step = (hi - lo) / (n - 1) as f64;
        Self::new((0..n).map(|i| lo + step * i as f64).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> f64 {
        self.points[i]
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }
}

/// Family X_{knm}(ω) of dense complex blocks on a shared ω grid. Absent
/// indices denote zero blocks; stored blocks satisfy |k| <= k_store.
#[derive(Clone)]
pub struct BlockOperator {
    spectrum: Arc<Spectrum>,
    grid: Arc<OmegaGrid>,
    k_store: i64,
    entries: BTreeMap<BlockIndex, Vec<Mat<C64>>>,
}

impl BlockOperator {
    pub fn zero(spectrum: Arc<Spectrum>, grid: Arc<OmegaGrid>, k_store: i64) -> Self {
        Self {
            spectrum,
            grid,
            k_store,
            entries: BTreeMap::new(),
        }
    }

    /// Identity element of the algebra: I at every (0, n, n).
    pub fn identity(spectrum: Arc<Spectrum>, grid: Arc<OmegaGrid>) -> Self {
        let mut op = Self::zero(spectrum.clone(), grid, 0);
        for n in 0..spectrum.n_levels() {
            let eye = linalg::identity(spectrum.mult(n));
            op.insert_constant(BlockIndex::new(0, n, n), eye).unwrap();
        }
        op
    }

    pub fn spectrum(&self) -> &Arc<Spectrum> {
        &self.spectrum
    }

    pub fn grid(&self) -> &Arc<OmegaGrid> {
        &self.grid
    }

    pub fn k_store(&self) -> i64 {
        self.k_store
    }

    /// Largest |k| actually stored.
    pub fn k_support(&self) -> i64 {
        self.entries.keys().map(|i| i.k.abs()).max().unwrap_or(0)
    }

    pub fn n_blocks(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&BlockIndex, &Vec<Mat<C64>>)> {
        self.entries.iter()
    }

    fn check_block_shape(&self, idx: BlockIndex, mat: &Mat<C64>) -> Result<()> {
        let (wr, wc) = (self.spectrum.mult(idx.n), self.spectrum.mult(idx.m));
        if mat.nrows() != wr || mat.ncols() != wc {
            return Err(Error::ShapeMismatch {
                k: idx.k,
                n: idx.n,
                m: idx.m,
                rows: mat.nrows(),
                cols: mat.ncols(),
                want_rows: wr,
                want_cols: wc,
            });
        }
        Ok(())
    }

    /// Insert one block per grid point.
    pub fn insert(&mut self, idx: BlockIndex, mats: Vec<Mat<C64>>) -> Result<()> {
        if idx.n >= self.spectrum.n_levels() || idx.m >= self.spectrum.n_levels() {
            return Err(Error::Usage(format!(
                "level index out of range at (k={}, n={}, m={})",
                idx.k, idx.n, idx.m
            )));
        }
        if mats.len() != self.grid.len() {
            return Err(Error::GridMismatch);
        }
        for m in &mats {
            self.check_block_shape(idx, m)?;
        }
        if idx.k.abs() > self.k_store {
            self.k_store = idx.k.abs();
        }
        self.entries.insert(idx, mats);
        Ok(())
    }

    /// Insert an ω-independent block, replicated across the grid.
    pub fn insert_constant(&mut self, idx: BlockIndex, mat: Mat<C64>) -> Result<()> {
        let mats = vec![mat; self.grid.len()];
        self.insert(idx, mats)
    }

    pub fn get(&self, idx: BlockIndex, grid_idx: usize) -> Option<&Mat<C64>> {
        self.entries.get(&idx).map(|v| &v[grid_idx])
    }

    pub fn block_or_zero(&self, idx: BlockIndex, grid_idx: usize) -> Mat<C64> {
        match self.get(idx, grid_idx) {
            Some(m) => m.clone(),
            None => linalg::zeros(self.spectrum.mult(idx.n), self.spectrum.mult(idx.m)),
        }
    }

    /// Diagonal block W_{0nn}(ω_i); zero matrix if absent.
    pub fn diag_block(&self, n: usize, grid_idx: usize) -> Mat<C64> {
        self.block_or_zero(BlockIndex::new(0, n, n), grid_idx)
    }

    fn check_compat(&self, rhs: &Self) -> Result<()> {
        if self.spectrum.as_ref() != rhs.spectrum.as_ref() {
            return Err(Error::SpectrumMismatch);
        }
        if self.grid.as_ref() != rhs.grid.as_ref() {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    pub fn scale(&self, z: C64) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|(idx, mats)| (*idx, mats.iter().map(|m| linalg::scale(z, m)).collect()))
            .collect();
        Self {
            spectrum: self.spectrum.clone(),
            grid: self.grid.clone(),
            k_store: self.k_store,
            entries,
        }
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.check_compat(rhs)?;
        let mut out = self.clone();
        out.k_store = self.k_store.max(rhs.k_store);
        for (idx, mats) in &rhs.entries {
            match out.entries.get_mut(idx) {
                Some(acc) => {
                    for (a, b) in acc.iter_mut().zip(mats) {
                        *a = &*a + b;
                    }
                }
                None => {
                    out.entries.insert(*idx, mats.clone());
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.add(&rhs.scale(linalg::cr(-1.0)))
    }

    /// Convolution in k, composition over the intermediate level:
    /// (UV)_{knm}(ω) = Σ_{l,p} U_{k-l,n,p}(ω) V_{l,p,m}(ω).
    pub fn product(&self, rhs: &Self) -> Result<Self> {
        self.check_compat(rhs)?;
        let mut out = Self::zero(
            self.spectrum.clone(),
            self.grid.clone(),
            self.k_store + rhs.k_store,
        );
        if self.is_zero() || rhs.is_zero() {
            return Ok(out);
        }
        // Bucket rhs entries by their row level so only composable pairs meet.
        let mut by_row: HashMap<usize, Vec<(&BlockIndex, &Vec<Mat<C64>>)>> = HashMap::new();
        for (idx, mats) in &rhs.entries {
            by_row.entry(idx.n).or_default().push((idx, mats));
        }
        let g = self.grid.len();
        for (iu, mu) in &self.entries {
            let Some(cands) = by_row.get(&iu.m) else {
                continue;
            };
            for (iv, mv) in cands {
                let idx = BlockIndex::new(iu.k + iv.k, iu.n, iv.m);
                let acc = out.entries.entry(idx).or_insert_with(|| {
                    vec![
                        linalg::zeros(self.spectrum.mult(idx.n), self.spectrum.mult(idx.m));
                        g
                    ]
                });
                for gi in 0..g {
                    acc[gi] = &acc[gi] + &mu[gi] * &mv[gi];
                }
            }
        }
        out.prune_zeros();
        Ok(out)
    }

    /// i (UV - VU); note the plain commutator of two Hermitian-symmetric
    /// elements is anti-Hermitian-symmetric.
    pub fn commutator(&self, rhs: &Self) -> Result<Self> {
        self.product(rhs)?.sub(&rhs.product(self)?)
    }

    /// Keeps only the (0, n, n) blocks.
    pub fn diagonal_part(&self) -> Self {
        let entries = self
            .entries
            .iter()
            .filter(|(idx, _)| idx.is_diagonal())
            .map(|(idx, mats)| (*idx, mats.clone()))
            .collect();
        Self {
            spectrum: self.spectrum.clone(),
            grid: self.grid.clone(),
            k_store: self.k_store,
            entries,
        }
    }

    pub fn off_diagonal_part(&self) -> Self {
        let entries = self
            .entries
            .iter()
            .filter(|(idx, _)| !idx.is_diagonal())
            .map(|(idx, mats)| (*idx, mats.clone()))
            .collect();
        Self {
            spectrum: self.spectrum.clone(),
            grid: self.grid.clone(),
            k_store: self.k_store,
            entries,
        }
    }

    /// Adjoint element: (X*)_{knm} = (X_{-k,m,n})^H.
    pub fn adjoint_op(&self) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|(idx, mats)| {
                (
                    idx.adjoint(),
                    mats.iter().map(linalg::adjoint).collect::<Vec<_>>(),
                )
            })
            .collect();
        Self {
            spectrum: self.spectrum.clone(),
            grid: self.grid.clone(),
            k_store: self.k_store,
            entries,
        }
    }

    /// Keep modes with |k| < limit (strict, matching the stage cutoffs).
    pub fn cutoff_below(&self, limit: f64) -> Self {
        let entries: BTreeMap<_, _> = self
            .entries
            .iter()
            .filter(|(idx, _)| (idx.k.abs() as f64) < limit)
            .map(|(idx, mats)| (*idx, mats.clone()))
            .collect();
        let k_store = entries.keys().map(|i| i.k.abs()).max().unwrap_or(0);
        Self {
            spectrum: self.spectrum.clone(),
            grid: self.grid.clone(),
            k_store,
            entries,
        }
    }

    /// Keep modes with |k| <= cap.
    pub fn truncate_k(&self, cap: i64) -> Self {
        let entries: BTreeMap<_, _> = self
            .entries
            .iter()
            .filter(|(idx, _)| idx.k.abs() <= cap)
            .map(|(idx, mats)| (*idx, mats.clone()))
            .collect();
        Self {
            spectrum: self.spectrum.clone(),
            grid: self.grid.clone(),
            k_store: self.k_store.min(cap),
            entries,
        }
    }

    pub fn prune_zeros(&mut self) {
        self.entries
            .retain(|_, mats| mats.iter().any(|m| linalg::max_abs(m) > 0.0));
    }

    /// Drop blocks whose weighted contribution stays below `threshold`
    /// at every grid point. Used to keep series supports tight.
    pub fn prune(&mut self, threshold: f64, e_weight: f64) {
        self.entries.retain(|idx, mats| {
            let w = ((idx.k.abs() as f64) / e_weight).exp();
            mats.iter().any(|m| linalg::spectral_norm(m) * w > threshold)
        });
    }

    /// The weighted algebra norm: sup over adjacent grid pairs (ω, ω') and
    /// over n of Σ_{k,m} (‖X_{knm}(ω)‖ + φ ‖∂X_{knm}(ω,ω')‖) e^{|k|/E},
    /// with ∂X = (X(ω) - X(ω'))/(ω - ω'). On a single-point grid the ∂ term
    /// is zero. Restricting the sup to adjacent pairs makes this a lower
    /// bound on the all-pairs sup.
    pub fn weighted_norm(&self, phi: f64, e_weight: f64) -> f64 {
        let g = self.grid.len();
        let n_levels = self.spectrum.n_levels();
        let mut best = 0.0f64;
        let mut pairs: Vec<(usize, Option<usize>)> = Vec::new();
        if g == 1 {
            pairs.push((0, None));
        } else {
            for i in 0..g - 1 {
                pairs.push((i, Some(i + 1)));
                pairs.push((i + 1, Some(i)));
            }
        }
        for (i, j) in pairs {
            let mut row_sums = vec![0.0f64; n_levels];
            for (idx, mats) in &self.entries {
                let w = ((idx.k.abs() as f64) / e_weight).exp();
                let mut term = linalg::spectral_norm(&mats[i]);
                if let Some(j) = j {
                    let dw = self.grid.point(i) - self.grid.point(j);
                    let diff = &mats[i] - &mats[j];
                    term += phi * linalg::spectral_norm(&diff) / dw.abs();
                }
                row_sums[idx.n] += term * w;
            }
            best = best.max(row_sums.iter().fold(0.0f64, |a, &b| a.max(b)));
        }
        best
    }

    /// Schur-Holmgren norm at one grid point: max of the sup-row and
    /// sup-column block-norm sums.
    pub fn schur_holmgren(&self, grid_idx: usize) -> f64 {
        let n_levels = self.spectrum.n_levels();
        let mut row_sums = vec![0.0f64; n_levels];
        let mut col_sums = vec![0.0f64; n_levels];
        for (idx, mats) in &self.entries {
            let nrm = linalg::spectral_norm(&mats[grid_idx]);
            row_sums[idx.n] += nrm;
            col_sums[idx.m] += nrm;
        }
        let r = row_sums.iter().fold(0.0f64, |a, &b| a.max(b));
        let c = col_sums.iter().fold(0.0f64, |a, &b| a.max(b));
        r.max(c)
    }

    /// Max over stored indices and grid points of
    /// ‖X_{knm}(ω)^* - X_{-k,m,n}(ω)‖.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev = 0.0f64;
        for (idx, mats) in &self.entries {
            let adj = idx.adjoint();
            for gi in 0..self.grid.len() {
                let partner = self.block_or_zero(adj, gi);
                let diff = linalg::adjoint(&mats[gi]) - &partner;
                dev = dev.max(linalg::spectral_norm(&diff));
            }
        }
        dev
    }

    pub fn hermitian_symmetry_check(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// Max over stored indices and grid points of
    /// ‖X_{knm}(ω)^* + X_{-k,m,n}(ω)‖.
    pub fn anti_hermitian_deviation(&self) -> f64 {
        let mut dev = 0.0f64;
        for (idx, mats) in &self.entries {
            let adj = idx.adjoint();
            for gi in 0..self.grid.len() {
                let partner = self.block_or_zero(adj, gi);
                let diff = linalg::adjoint(&mats[gi]) + &partner;
                dev = dev.max(linalg::spectral_norm(&diff));
            }
        }
        dev
    }

    /// Matrix of the multiplication operator on the truncated basis
    /// {(k, m, i) : |k| <= k_trunc}, ordered lexicographically in
    /// (k, m, intra-block index). Entry coupling (l, n) <- (k, m) is
    /// X_{l-k, n, m}(ω).
    pub fn to_dense(&self, k_trunc: i64, grid_idx: usize) -> Mat<C64> {
        crate::dense::DenseWindow::new(self.spectrum.clone(), k_trunc).assemble(self, grid_idx)
    }

    /// Debug dump: one record per stored block and grid point.
    pub fn debug_json(&self) -> serde_json::Value {
        let mut records = Vec::new();
        for (idx, mats) in &self.entries {
            for (gi, m) in mats.iter().enumerate() {
                let mut flat = Vec::with_capacity(m.nrows() * m.ncols());
                for i in 0..m.nrows() {
                    for j in 0..m.ncols() {
                        flat.push(vec![m[(i, j)].re, m[(i, j)].im]);
                    }
                }
                records.push(json!({
                    "index": [idx.k, idx.n, idx.m],
                    "omega_index": gi,
                    "matrix": flat,
                }));
            }
        }
        serde_json::Value::Array(records)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cr;

    fn spectrum_m1(levels: usize) -> Arc<Spectrum> {
        Arc::new(
            Spectrum::new((0..levels).map(|i| i as f64 * 2.0).collect(), vec![1; levels]).unwrap(),
        )
    }

    fn scalar(v: f64) -> Mat<C64> {
        Mat::from_fn(1, 1, |_, _| cr(v))
    }

    #[test]
    fn product_identity_left_factor() {
        let sp = spectrum_m1(3);
        let grid = OmegaGrid::single(1.0);
        let u = BlockOperator::identity(sp.clone(), grid.clone());
        let mut v = BlockOperator::zero(sp, grid, 3);
        v.insert_constant(BlockIndex::new(3, 0, 1), scalar(2.5)).unwrap();
        let p = u.product(&v).unwrap();
        assert_eq!(p.n_blocks(), 1);
        assert!((p.get(BlockIndex::new(3, 0, 1), 0).unwrap()[(0, 0)].re - 2.5).abs() < 1e-15);
    }

    #[test]
    fn product_annihilates_zero() {
        let sp = spectrum_m1(2);
        let grid = OmegaGrid::single(1.0);
        let mut u = BlockOperator::zero(sp.clone(), grid.clone(), 1);
        u.insert_constant(BlockIndex::new(1, 0, 1), scalar(1.0)).unwrap();
        let v = BlockOperator::zero(sp, grid, 2);
        let p = u.product(&v).unwrap();
        assert!(p.is_zero());
        assert_eq!(p.k_store(), 3);
    }

    #[test]
    fn product_convolution_support() {
        // U at k in {1,-1}, V at k in {2}: product supported at {3, 1}.
        let sp = spectrum_m1(2);
        let grid = OmegaGrid::single(1.0);
        let mut u = BlockOperator::zero(sp.clone(), grid.clone(), 1);
        u.insert_constant(BlockIndex::new(1, 0, 0), scalar(2.0)).unwrap();
        u.insert_constant(BlockIndex::new(-1, 0, 0), scalar(3.0)).unwrap();
        let mut v = BlockOperator::zero(sp, grid, 2);
        v.insert_constant(BlockIndex::new(2, 0, 1), scalar(5.0)).unwrap();
        let p = u.product(&v).unwrap();
        let ks: Vec<i64> = p.entries().map(|(i, _)| i.k).collect();
        assert_eq!(ks, vec![1, 3]);
        assert!((p.get(BlockIndex::new(3, 0, 1), 0).unwrap()[(0, 0)].re - 10.0).abs() < 1e-15);
        assert!((p.get(BlockIndex::new(1, 0, 1), 0).unwrap()[(0, 0)].re - 15.0).abs() < 1e-15);
    }

    #[test]
    fn weighted_norm_single_block_k0() {
        let sp = spectrum_m1(2);
        let grid = OmegaGrid::single(1.0);
        let mut x = BlockOperator::zero(sp, grid, 0);
        x.insert_constant(BlockIndex::new(0, 0, 0), scalar(0.7)).unwrap();
        assert!((x.weighted_norm(3.0, 1.5) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn weighted_norm_mode_weight() {
        let sp = spectrum_m1(2);
        let grid = OmegaGrid::single(1.0);
        let mut x = BlockOperator::zero(sp, grid, 2);
        x.insert_constant(BlockIndex::new(2, 0, 0), scalar(1.0)).unwrap();
        let expect = (1.0f64).exp(); // e^{|k|/E} = e^{2/2}
        assert!((x.weighted_norm(0.5, 2.0) - expect).abs() < 1e-12);
    }

    #[test]
    fn weighted_norm_discrete_derivative() {
        // Two-point grid ω = 1, ω' = 1.1; block value ω·I at (0,0,0).
        let sp = spectrum_m1(1);
        let grid = Arc::new(OmegaGrid::new(vec![1.0, 1.1]).unwrap());
        let mut x = BlockOperator::zero(sp, grid, 0);
        x.insert(BlockIndex::new(0, 0, 0), vec![scalar(1.0), scalar(1.1)])
            .unwrap();
        // sup over pair orders: max(1.0, 1.1) + 0.5 * |∂| = 1.1 + 0.5
        let got = x.weighted_norm(0.5, 1.0);
        assert!((got - 1.6).abs() < 1e-9, "got {got}");
    }

    #[test]
    fn diagonal_part_projects() {
        let sp = spectrum_m1(4);
        let grid = OmegaGrid::single(1.0);
        let mut x = BlockOperator::zero(sp, grid, 2);
        x.insert_constant(BlockIndex::new(0, 0, 0), scalar(1.0)).unwrap();
        x.insert_constant(BlockIndex::new(2, 0, 2), scalar(2.0)).unwrap();
        let d = x.diagonal_part();
        assert_eq!(d.n_blocks(), 1);
        assert!(d.get(BlockIndex::new(0, 0, 0), 0).is_some());
        // D∘D = D
        let dd = d.diagonal_part();
        assert_eq!(dd.n_blocks(), 1);
        // purely off-diagonal input projects to zero
        let off = x.off_diagonal_part();
        assert!(off.diagonal_part().is_zero());
    }

    #[test]
    fn hermitian_symmetry_detects_missing_partner() {
        let sp = spectrum_m1(3);
        let grid = OmegaGrid::single(1.0);
        let mut x = BlockOperator::zero(sp.clone(), grid.clone(), 1);
        x.insert_constant(BlockIndex::new(1, 0, 1), scalar(1.0)).unwrap();
        assert!(!x.hermitian_symmetry_check(1e-12));
        let mut y = BlockOperator::zero(sp, grid, 1);
        y.insert_constant(BlockIndex::new(1, 0, 1), scalar(1.0)).unwrap();
        y.insert_constant(BlockIndex::new(-1, 1, 0), scalar(1.0)).unwrap();
        assert!(y.hermitian_symmetry_check(1e-12));
    }

    #[test]
    fn schur_holmgren_single_block() {
        let sp = spectrum_m1(2);
        let grid = OmegaGrid::single(1.0);
        let mut x = BlockOperator::zero(sp, grid, 5);
        x.insert_constant(BlockIndex::new(5, 0, 1), scalar(3.0)).unwrap();
        assert!((x.schur_holmgren(0) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn insert_rejects_wrong_shape_and_product_rejects_grid_mismatch() {
        let sp = Arc::new(Spectrum::new(vec![0.0, 2.0], vec![2, 1]).unwrap());
        let grid = OmegaGrid::single(1.0);
        let mut x = BlockOperator::zero(sp.clone(), grid.clone(), 1);
        // block at (k, 0, 1) must be 2x1
        let err = x.insert_constant(BlockIndex::new(1, 0, 1), scalar(1.0));
        assert!(matches!(err, Err(Error::ShapeMismatch { .. })));
        let err2 = x.insert_constant(BlockIndex::new(0, 0, 7), scalar(1.0));
        assert!(matches!(err2, Err(Error::Usage(_))));
        let other_grid = OmegaGrid::single(2.0);
        let y = BlockOperator::zero(sp, other_grid, 1);
        assert!(matches!(x.product(&y), Err(Error::GridMismatch)));
    }

    #[test]
    fn cutoff_below_is_strict() {
        let sp = spectrum_m1(2);
        let grid = OmegaGrid::single(1.0);
        let mut x = BlockOperator::zero(sp, grid, 3);
        for k in -3..=3i64 {
            x.insert_constant(BlockIndex::new(k, 0, 1), scalar(1.0)).unwrap();
        }
        let c = x.cutoff_below(std::f64::consts::E);
        assert_eq!(c.k_support(), 2);
        let c1 = x.cutoff_below(1.0);
        assert_eq!(c1.k_support(), 0);
    }
}
