//! The two worked perturbation models (driven square well and pulsed rotor)
//! plus the regularity norm ε_V and the spectral sum Δ_σ(J).

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use faer::Mat;

use crate::block::{BlockIndex, BlockOperator, OmegaGrid};
use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::spectrum::Spectrum;

/// Fourier coefficients z_k of a real 2π-periodic drive z(t); real drives
/// satisfy z_{-k} = conj(z_k).
#[derive(Debug, Clone)]
pub struct DriveCoefficients {
    z: BTreeMap<i64, C64>,
}

impl DriveCoefficients {
    pub fn new(z: BTreeMap<i64, C64>) -> Result<Self> {
        for (&k, &v) in &z {
            let partner = z.get(&-k).copied().unwrap_or(C64::new(0.0, 0.0));
            if (partner - v.conj()).abs() > 1e-14 * v.abs().max(1.0) {
                return Err(Error::Config(format!(
                    "drive is not real: z_{} != conj(z_{})",
                    -k, k
                )));
            }
        }
        Ok(Self { z })
    }

    /// z(t) = amplitude · cos t.
    pub fn cosine(amplitude: f64) -> Self {
        let mut z = BTreeMap::new();
        z.insert(1, linalg::cr(amplitude / 2.0));
        z.insert(-1, linalg::cr(amplitude / 2.0));
        Self { z }
    }

    /// Finitely truncated surrogate of a C^s drive:
    /// z_k = amplitude (-1)^k |k|^{-s-1.1} for 1 <= |k| <= k_max, z_0 = 0.
    /// Probes the ε_V-finiteness threshold s > r + 1.
    pub fn power_law(amplitude: f64, smoothness: f64, k_max: i64) -> Self {
        let mut z = BTreeMap::new();
        for k in 1..=k_max {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let v = linalg::cr(amplitude * sign * (k as f64).powf(-smoothness - 1.1));
            z.insert(k, v);
            z.insert(-k, v);
        }
        Self { z }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            z: self
                .z
                .iter()
                .map(|(&k, &v)| (k, v * linalg::cr(factor)))
                .collect(),
        }
    }

    pub fn get(&self, k: i64) -> C64 {
        self.z.get(&k).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn coefficients(&self) -> &BTreeMap<i64, C64> {
        &self.z
    }

    /// Σ_k |z_k| max{|k|^r, 1}; for the square well this is the closed form
    /// of ε_V in the limit of infinitely many levels.
    pub fn epsilon_v_closed_form(&self, r: f64) -> f64 {
        self.z
            .iter()
            .map(|(&k, v)| v.abs() * (k.abs() as f64).powf(r).max(1.0))
            .sum()
    }
}

/// Dirichlet square well with drive V(t) = z(t) x²: h_m = m²π², M_m = 1,
/// V_{knm} = z_k c_{nm} with the stated matrix elements of x².
#[derive(Debug, Clone)]
pub struct SquareWellModel {
    pub drive: DriveCoefficients,
    pub m_max: usize,
    pub k_max: i64,
}

impl SquareWellModel {
    pub fn new(drive: DriveCoefficients, m_max: usize, k_max: i64) -> Result<Self> {
        if m_max < 2 {
            return Err(Error::Config("square well needs M_max >= 2".into()));
        }
        Ok(Self {
            drive,
            m_max,
            k_max,
        })
    }

    /// Matrix element of x² between levels n and m (1-based labels).
    pub fn coupling(n_phys: usize, m_phys: usize) -> f64 {
        let (nf, mf) = (n_phys as f64, m_phys as f64);
        if n_phys == m_phys {
            1.0 / 3.0 - 1.0 / (2.0 * mf * mf * PI * PI)
        } else {
            let sign = if (n_phys + m_phys) % 2 == 0 { 1.0 } else { -1.0 };
            8.0 * sign * mf * nf / ((mf * mf - nf * nf).powi(2) * PI * PI)
        }
    }

    pub fn spectrum(&self) -> Spectrum {
        let levels = (1..=self.m_max)
            .map(|m| (m * m) as f64 * PI * PI)
            .collect();
        Spectrum::new(levels, vec![1; self.m_max]).expect("square-well levels increase")
    }

    /// Assemble (Spectrum, V) on the given grid; blocks are ω-independent.
    pub fn blocks(&self, grid: Arc<OmegaGrid>) -> (Arc<Spectrum>, BlockOperator) {
        let spectrum = Arc::new(self.spectrum());
        let mut v = BlockOperator::zero(spectrum.clone(), grid, self.k_max);
        for (&k, &zk) in self.drive.coefficients() {
            if k.abs() > self.k_max || zk.abs() == 0.0 {
                continue;
            }
            for n in 0..self.m_max {
                for m in 0..self.m_max {
                    let c = Self::coupling(n + 1, m + 1);
                    let val = zk * linalg::cr(c);
                    if val.abs() == 0.0 {
                        continue;
                    }
                    let mat = Mat::from_fn(1, 1, |_, _| val);
                    v.insert_constant(BlockIndex::new(k, n, m), mat)
                        .expect("shape 1x1");
                }
            }
        }
        (spectrum, v)
    }
}

/// Pulsed rotor on S^N: h_m = m(m+N-1) with binomial multiplicities. The
/// matrix blocks are not synthesized; the model supplies the spectrum and a
/// norm envelope for feasibility studies.
#[derive(Debug, Clone)]
pub struct RotorModel {
    pub n_dim: usize,
    pub m_max: usize,
    /// Unspecified constant in the envelope bound; exposed as a parameter.
    pub envelope_const: f64,
}

impl RotorModel {
    pub fn new(n_dim: usize, m_max: usize) -> Result<Self> {
        if n_dim < 1 {
            return Err(Error::Config("rotor needs N >= 1".into()));
        }
        Ok(Self {
            n_dim,
            m_max,
            envelope_const: 1.0,
        })
    }

    pub fn spectrum(&self) -> Spectrum {
        rotor_spectrum(self.n_dim, self.m_max)
    }

    /// Envelope ‖V_knm‖ <= const (1 + min{h_n, h_m})/(|k|^s (h_m - h_n)²)
    /// for k != 0, m != n.
    pub fn coupling_envelope(&self, k: i64, n_idx: usize, m_idx: usize, s: f64) -> f64 {
        let sp = self.spectrum();
        let (hn, hm) = (sp.level(n_idx), sp.level(m_idx));
        if k == 0 || n_idx == m_idx {
            return f64::NAN;
        }
        self.envelope_const * (1.0 + hn.min(hm)) / ((k.abs() as f64).powf(s) * (hm - hn).powi(2))
    }
}

fn binomial(n: i64, k: i64) -> u128 {
    if k < 0 || n < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k) as u128;
    let n = n as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Levels m = 0..m_max with h_m = m(m+N-1) and
/// M_m = C(m+N, N) - C(m+N-2, N).
pub fn rotor_spectrum(n_dim: usize, m_max: usize) -> Spectrum {
    let n = n_dim as i64;
    let levels: Vec<f64> = (0..=m_max as i64).map(|m| (m * (m + n - 1)) as f64).collect();
    let mults: Vec<usize> = (0..=m_max as i64)
        .map(|m| (binomial(m + n, n) - binomial(m + n - 2, n)) as usize)
        .collect();
    Spectrum::new(levels, mults).expect("rotor levels increase")
}

/// The regularity norm sup_n Σ_{k,m} ‖V_{knm}‖ max{|k|^r, 1} over the stored
/// blocks, maximized over grid points.
pub fn epsilon_v(v: &BlockOperator, r: f64) -> f64 {
    let nl = v.spectrum().n_levels();
    let g = v.grid().len();
    let mut best = 0.0f64;
    for gi in 0..g {
        let mut rows = vec![0.0f64; nl];
        for (idx, mats) in v.entries() {
            let w = (idx.k.abs() as f64).powf(r).max(1.0);
            rows[idx.n] += linalg::spectral_norm(&mats[gi]) * w;
        }
        best = best.max(rows.iter().fold(0.0f64, |a, &b| a.max(b)));
    }
    best
}

/// Truncated Δ_σ(J) = J^σ Σ_{Δ_mn > J/2} μ_mn / Δ_mn^σ together with the
/// last-shell contribution (pairs touching the top level) as a convergence
/// indicator.
pub fn delta_sigma(spectrum: &Spectrum, sigma: f64, j: f64) -> (f64, f64) {
    let nl = spectrum.n_levels();
    let mut total = 0.0;
    let mut last_shell = 0.0;
    for m in 0..nl {
        for n in 0..nl {
            let d = spectrum.delta(m, n);
            if d <= j / 2.0 {
                continue;
            }
            let term = spectrum.mu(m, n) / d.powf(sigma);
            total += term;
            if m == nl - 1 || n == nl - 1 {
                last_shell += term;
            }
        }
    }
    (j.powf(sigma) * total, j.powf(sigma) * last_shell)
}

/// The rotor coefficient sum a_n: brute-force series over m <= terms
/// (m ranges over nonnegative integers, m != n) against the closed form
/// (1 + 1/n²) π²/12 - 3/(16n²) + 5/(16n⁴) - (1/2n) Σ_{m=1}^{2n-1} 1/m.
pub fn rotor_an_check(n: usize, terms: usize) -> (f64, f64) {
    assert!(n >= 1 && terms >= 1);
    let nf = n as f64;
    let n2 = nf * nf;
    let mut series = 0.0;
    for m in 0..=terms {
        if m == n {
            continue;
        }
        let mf = m as f64;
        let m2 = mf * mf;
        series += (1.0 + n2.min(m2)) / (m2 - n2).powi(2);
    }
    let harmonic: f64 = (1..=(2 * n - 1)).map(|m| 1.0 / m as f64).sum();
    let closed = (1.0 + 1.0 / n2) * PI * PI / 12.0 - 3.0 / (16.0 * n2) + 5.0 / (16.0 * n2 * n2)
        - harmonic / (2.0 * nf);
    (series, closed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_well_matrix_elements() {
        // diagonal: 1/3 - 1/(2π²) ≈ 0.282673
        let c11 = SquareWellModel::coupling(1, 1);
        assert!((c11 - (1.0 / 3.0 - 1.0 / (2.0 * PI * PI))).abs() < 1e-15);
        assert!((c11 - 0.282673).abs() < 1e-6);
        // off-diagonal (1, 2): -16/(9π²) ≈ -0.180127
        let c12 = SquareWellModel::coupling(1, 2);
        assert!((c12 + 16.0 / (9.0 * PI * PI)).abs() < 1e-15);
        assert!((c12 + 0.180127).abs() < 1e-6);
        assert!((c12 - SquareWellModel::coupling(2, 1)).abs() < 1e-15);
    }

    #[test]
    fn square_well_blocks_structure() {
        let model = SquareWellModel::new(DriveCoefficients::cosine(1.0), 4, 3).unwrap();
        let (sp, v) = model.blocks(OmegaGrid::single(1.0));
        assert!((sp.level(0) - PI * PI).abs() < 1e-12);
        assert!((sp.delta0() - 3.0 * PI * PI).abs() < 1e-10);
        // cos t drive: blocks vanish except |k| = 1
        assert!(v.entries().all(|(idx, _)| idx.k.abs() == 1));
        assert!(v.hermitian_symmetry_check(1e-14));
        // V_{1,1,1} = (1/2)(1/3 - 1/(2π²))
        let b = v.get(BlockIndex::new(1, 0, 0), 0).unwrap();
        assert!((b[(0, 0)].re - 0.5 * SquareWellModel::coupling(1, 1)).abs() < 1e-15);
    }

    #[test]
    fn square_well_hermitian_for_any_real_drive() {
        let mut z = BTreeMap::new();
        z.insert(0, C64::new(0.4, 0.0));
        z.insert(2, C64::new(0.1, -0.3));
        z.insert(-2, C64::new(0.1, 0.3));
        let drive = DriveCoefficients::new(z).unwrap();
        let model = SquareWellModel::new(drive, 5, 4).unwrap();
        let (_, v) = model.blocks(OmegaGrid::single(2.0));
        assert!(v.hermitian_symmetry_check(1e-13));
    }

    #[test]
    fn complex_drive_is_rejected() {
        let mut z = BTreeMap::new();
        z.insert(1, C64::new(0.5, 0.1));
        // missing conjugate partner at k = -1
        assert!(DriveCoefficients::new(z).is_err());
    }

    #[test]
    fn rotor_multiplicities() {
        // N = 1: M_m = 2 for m >= 1, M_0 = 1
        let s1 = rotor_spectrum(1, 5);
        assert_eq!(s1.mult(0), 1);
        for m in 1..=5 {
            assert_eq!(s1.mult(m), 2);
        }
        // N = 2: h_m = m(m+1), M_m = 2m+1
        let s2 = rotor_spectrum(2, 6);
        for m in 0..=6 {
            assert_eq!(s2.level(m), (m * (m + 1)) as f64);
            assert_eq!(s2.mult(m), 2 * m + 1);
        }
        // asymptotics M_m ~ (2/(N-1)!) m^{N-1}
        let s3 = rotor_spectrum(3, 40);
        let m = 40.0f64;
        let predicted = 2.0 / 2.0 * m * m; // (2/(N-1)!) m^{N-1}, N = 3
        let actual = s3.mult(40) as f64;
        assert!((actual / predicted - 1.0).abs() < 0.1);
    }

    #[test]
    fn epsilon_v_single_blocks() {
        let sp = Arc::new(Spectrum::new(vec![0.0, 1.0], vec![1, 1]).unwrap());
        let grid = OmegaGrid::single(1.0);
        let mut v = BlockOperator::zero(sp.clone(), grid.clone(), 0);
        v.insert_constant(BlockIndex::new(0, 0, 0), Mat::from_fn(1, 1, |_, _| linalg::cr(0.3)))
            .unwrap();
        assert!((epsilon_v(&v, 3.0) - 0.3).abs() < 1e-15);
        let mut v2 = BlockOperator::zero(sp, grid, 2);
        v2.insert_constant(BlockIndex::new(2, 0, 0), Mat::from_fn(1, 1, |_, _| linalg::cr(1.0)))
            .unwrap();
        assert!((epsilon_v(&v2, 3.0) - 8.0).abs() < 1e-15);
    }

    #[test]
    fn epsilon_v_square_well_approaches_closed_form() {
        let drive = DriveCoefficients::cosine(0.8);
        let closed = drive.epsilon_v_closed_form(3.0);
        assert!((closed - 0.8).abs() < 1e-15);
        let mut last_gap = f64::INFINITY;
        for &m_max in &[10usize, 20, 40, 80] {
            let model = SquareWellModel::new(drive.clone(), m_max, 2).unwrap();
            let (_, v) = model.blocks(OmegaGrid::single(1.0));
            let e = epsilon_v(&v, 3.0);
            let gap = 1.0 - e / closed;
            assert!(gap > 0.0, "truncated sup exceeded the closed form");
            // harmonic-tail estimate: the sup row sits near M/2 and misses
            // about (4/π²)(1/n* + 1/(M-n*)) ≈ 16/(π² M), plus the 2/(M²π²)
            // diagonal defect
            let bound = 16.0 / (PI * PI * m_max as f64) + 2.0 / ((m_max * m_max) as f64 * PI * PI);
            assert!(gap <= bound * 1.5, "gap {gap} vs bound {bound} at M = {m_max}");
            assert!(gap < last_gap);
            last_gap = gap;
        }
    }

    #[test]
    fn delta_sigma_square_well() {
        let j = 3.0 * PI * PI;
        let mut last = 0.0;
        for &m_max in &[4usize, 8, 16, 32] {
            let model =
                SquareWellModel::new(DriveCoefficients::cosine(1.0), m_max, 1).unwrap();
            let (d, _tail) = delta_sigma(&model.spectrum(), 2.0, j);
            assert!(d >= last, "Δ_σ must be monotone in the truncation");
            last = d;
        }
        // σ > 1 converges: the increments collapse
        let m64 = SquareWellModel::new(DriveCoefficients::cosine(1.0), 64, 1).unwrap();
        let m128 = SquareWellModel::new(DriveCoefficients::cosine(1.0), 128, 1).unwrap();
        let (d64, t64) = delta_sigma(&m64.spectrum(), 2.0, j);
        let (d128, t128) = delta_sigma(&m128.spectrum(), 2.0, j);
        assert!(d128 - d64 < 0.05 * d64);
        assert!(t128 < t64);
    }

    #[test]
    fn delta_sigma_rotor_divergence_indicator() {
        // N = 2, σ = 3 < 3.5 = (5/2)(N-1)+1: last-shell term does not vanish
        let j = 6.0;
        let (_, tail_small) = delta_sigma(&rotor_spectrum(2, 30), 3.0, j);
        let (_, tail_big) = delta_sigma(&rotor_spectrum(2, 60), 3.0, j);
        // non-vanishing (actually growing) last shell signals divergence
        assert!(tail_big > 0.5 * tail_small);
        // for comparison, σ = 4 > 3.5 converges and the shell dies off
        let (_, conv_small) = delta_sigma(&rotor_spectrum(2, 30), 4.0, j);
        let (_, conv_big) = delta_sigma(&rotor_spectrum(2, 60), 4.0, j);
        assert!(conv_big < conv_small);
    }

    #[test]
    fn delta_sigma_empty_sum() {
        let sp = Spectrum::new(vec![0.0, 1.0], vec![1, 1]).unwrap();
        let (d, t) = delta_sigma(&sp, 2.0, 4.0);
        assert_eq!(d, 0.0);
        assert_eq!(t, 0.0);
    }

    #[test]
    fn rotor_an_series_vs_closed_form() {
        // n = 1: closed form = π²/6 + 1/8 - 1/2
        let (series, closed) = rotor_an_check(1, 2000);
        let want = PI * PI / 6.0 + 0.125 - 0.5;
        assert!((closed - want).abs() < 1e-14);
        assert!((closed - 1.269934).abs() < 1e-6);
        assert!((series - closed).abs() < 1e-6, "series {series} closed {closed}");
        // the index set starts at m = 0: for n = 1 and terms = 1 only the
        // m = 0 term (1+0)/1 = 1 survives
        let (s_m0, _) = rotor_an_check(1, 1);
        assert_eq!(s_m0, 1.0);
        // boundedness over n
        for n in 1..=50 {
            let (_, c) = rotor_an_check(n, 1);
            assert!(c < 2.0, "a_n not bounded at n = {n}");
        }
    }
}
