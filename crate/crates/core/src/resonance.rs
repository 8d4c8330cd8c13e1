//! Critical-index classification, the ψ_s thresholds, (W, ψ)-non-resonance
//! testing over eigenvalue lists, and bad-set measure accounting.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::schedule::Schedule;
use crate::spectrum::Spectrum;
use crate::sylvester::min_gap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexClass {
    Diagonal,
    NonCriticalZero,
    NonCriticalNonzero,
    Critical,
}

/// An index is critical iff m != n and kJ/Δ_mn lies in the open interval
/// (1/2, 2); this forces sgn(k) = sgn(h_m - h_n).
pub fn classify_index(k: i64, n: usize, m: usize, spectrum: &Spectrum, j: f64) -> IndexClass {
    if k == 0 && n == m {
        return IndexClass::Diagonal;
    }
    if n != m {
        let ratio = k as f64 * j / spectrum.delta(m, n);
        if ratio > 0.5 && ratio < 2.0 {
            return IndexClass::Critical;
        }
    }
    if k == 0 {
        IndexClass::NonCriticalZero
    } else {
        IndexClass::NonCriticalNonzero
    }
}

/// The stage-s divisor threshold ψ_s(k, n, m).
pub fn psi(
    s: usize,
    k: i64,
    n: usize,
    m: usize,
    class: IndexClass,
    sched: &Schedule,
    spectrum: &Spectrum,
    j: f64,
    delta0: f64,
) -> Result<f64> {
    match class {
        IndexClass::Diagonal => Err(Error::Usage(
            "psi is defined on non-diagonal indices only".into(),
        )),
        IndexClass::NonCriticalZero => Ok(delta0 / 2.0),
        IndexClass::NonCriticalNonzero => Ok(7.0 / 18.0 * j * (k.abs() as f64 - 0.5)),
        IndexClass::Critical => {
            let min_m = spectrum.mult(m).min(spectrum.mult(n)) as f64;
            let ak = k.abs() as f64;
            Ok(sched.phi_s(s + 1) * min_m.sqrt() * ak.sqrt() * (-sched.rho_s(s) * ak / 2.0).exp())
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct Witness {
    pub k: i64,
    pub n: usize,
    pub m: usize,
    pub dist: f64,
    pub psi: f64,
}

/// Test whether ω is (W, ψ_s)-non-resonant: for every non-diagonal (k, n, m)
/// in the truncated index set,
/// dist(Spec(kω - Δ_mn + W_0nn(ω)), Spec(W_0mm(ω))) >= ψ_s(k, n, m).
///
/// `diag_eigs[n]` holds the ascending eigenvalues of W_0nn(ω). Indices with
/// k >= 1 over all ordered level pairs cover negative k by the symmetry
/// ψ(-k, m, n) = ψ(k, n, m) and the matching symmetry of the distance.
/// Beyond the returned per-pair range the distance exceeds ψ automatically.
///
/// Returns `None` when non-resonant, otherwise the first failing witness.
pub fn is_nonresonant(
    omega: f64,
    s: usize,
    diag_eigs: &[Vec<f64>],
    spectrum: &Spectrum,
    sched: &Schedule,
    j: f64,
    delta0: f64,
) -> Result<Option<Witness>> {
    let nl = spectrum.n_levels();
    assert_eq!(diag_eigs.len(), nl);
    let max_w = diag_eigs
        .iter()
        .flat_map(|v| v.iter().map(|x| x.abs()))
        .fold(0.0f64, f64::max);

    let check = |k: i64, n: usize, m: usize| -> Result<Option<Witness>> {
        let class = classify_index(k, n, m, spectrum, j);
        let threshold = psi(s, k, n, m, class, sched, spectrum, j, delta0)?;
        let shift = k as f64 * omega - spectrum.delta(m, n);
        let shifted: Vec<f64> = diag_eigs[n].iter().map(|&x| shift + x).collect();
        let dist = min_gap(&shifted, &diag_eigs[m]);
        if dist < threshold {
            Ok(Some(Witness {
                k,
                n,
                m,
                dist,
                psi: threshold,
            }))
        } else {
            Ok(None)
        }
    };

    // k = 0, n != m (unordered pairs suffice by symmetry)
    for n in 0..nl {
        for m in (n + 1)..nl {
            if let Some(w) = check(0, n, m)? {
                return Ok(Some(w));
            }
        }
    }
    // k >= 1, all ordered pairs. For |k| > 2(|Δ_mn| + 2 max_w)/J the distance
    // |kω - Δ| - 2 max_w already exceeds (7/18)J(|k| - 1/2) on Ω_0.
    for n in 0..nl {
        for m in 0..nl {
            let k_hi = (2.0 * (spectrum.delta(m, n).abs() + 2.0 * max_w) / j).ceil() as i64 + 1;
            for k in 1..=k_hi {
                if let Some(w) = check(k, n, m)? {
                    return Ok(Some(w));
                }
            }
        }
    }
    Ok(None)
}

/// Integer k strictly inside (Δ_mn/2J, 2Δ_mn/J); empty unless Δ_mn > 0.
pub fn critical_k_range(delta_mn: f64, j: f64) -> std::ops::Range<i64> {
    if delta_mn <= 0.0 {
        return 0..0;
    }
    let lo = (delta_mn / (2.0 * j)).floor() as i64 + 1; // smallest k > Δ/2J
    let hi = (2.0 * delta_mn / j).ceil() as i64 - 1; // largest k < 2Δ/J
    // guard against exact boundary hits
    let lo = if lo as f64 <= delta_mn / (2.0 * j) { lo + 1 } else { lo };
    let hi = if hi as f64 >= 2.0 * delta_mn / j { hi - 1 } else { hi };
    lo..hi + 1
}

/// Lemma-style stage budget: the exact truncated double sum
/// 8 Σ_{Δ_mn > J/2} Σ_{Δ/2J < k < 2Δ/J} (M_m M_n / k) ψ_s(k, n, m)
/// and its closed-form majorant
/// 32 · 2^σ φ_{s+1} ((2σ+1)/(e ϱ_s))^{σ+1/2} Δ_σ(J).
pub fn bad_measure_bound(
    s: usize,
    spectrum: &Spectrum,
    sched: &Schedule,
    sigma: f64,
    j: f64,
) -> (f64, f64) {
    let nl = spectrum.n_levels();
    let delta0 = spectrum.delta0();
    let mut sum = 0.0;
    let mut delta_sigma = 0.0;
    for m in 0..nl {
        for n in 0..nl {
            let d = spectrum.delta(m, n);
            if d <= j / 2.0 {
                continue;
            }
            delta_sigma += spectrum.mu(m, n) / d.powf(sigma);
            let mm = (spectrum.mult(m) * spectrum.mult(n)) as f64;
            for k in critical_k_range(d, j) {
                let class = classify_index(k, n, m, spectrum, j);
                if class != IndexClass::Critical {
                    continue;
                }
                let p = psi(s, k, n, m, class, sched, spectrum, j, delta0)
                    .expect("non-diagonal index");
                sum += 8.0 * mm / k as f64 * p;
            }
        }
    }
    delta_sigma *= j.powf(sigma);
    let rho = sched.rho_s(s);
    let majorant = 32.0
        * 2f64.powf(sigma)
        * sched.phi_s(s + 1)
        * ((2.0 * sigma + 1.0) / (std::f64::consts::E * rho)).powf(sigma + 0.5)
        * delta_sigma;
    (sum, majorant)
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub enum PointStatus {
    Unprocessed,
    Good,
    Resonant { stage: usize, witness: Witness },
}

/// Uniform sample of Ω_0 = [8J/9, 9J/8] with per-point exclusion flags.
#[derive(Debug, Clone)]
pub struct FrequencyGrid {
    pub j: f64,
    points: Vec<f64>,
    pub flags: Vec<PointStatus>,
    pub cell_width: f64,
}

impl FrequencyGrid {
    pub fn uniform(j: f64, n_points: usize) -> Result<Self> {
        if n_points < 2 {
            return Err(Error::Config("frequency grid needs >= 2 points".into()));
        }
        let lo = 8.0 * j / 9.0;
        let hi = 9.0 * j / 8.0;
        let step = (hi - lo) / (n_points - 1) as f64;
        let points: Vec<f64> = (0..n_points).map(|i| lo + step * i as f64).collect();
        Ok(Self {
            j,
            points,
            flags: vec![PointStatus::Good; n_points],
            cell_width: step,
        })
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

    pub fn omega0_measure(&self) -> f64 {
        17.0 * self.j / 72.0
    }

    pub fn good_count(&self) -> usize {
        self.flags
            .iter()
            .filter(|f| matches!(f, PointStatus::Good))
            .count()
    }

    pub fn good_measure(&self) -> f64 {
        self.good_count() as f64 * self.cell_width
    }

    pub fn bad_measure(&self) -> f64 {
        (self.len() - self.good_count()) as f64 * self.cell_width
    }

    /// Number of maximal runs of excluded points.
    pub fn excluded_intervals(&self) -> usize {
        let mut count = 0;
        let mut inside = false;
        for f in &self.flags {
            let bad = matches!(f, PointStatus::Resonant { .. });
            if bad && !inside {
                count += 1;
            }
            inside = bad;
        }
        count
    }
}

/// One stage of exclusion: every Good point is tested via `is_nonresonant`
/// with the diagonal eigenvalue lists supplied per point; failures become
/// Resonant(stage, witness). Points are independent and evaluated in
/// parallel.
pub fn exclude_resonant<F>(
    grid: &mut FrequencyGrid,
    s: usize,
    diag_provider: F,
    spectrum: &Spectrum,
    sched: &Schedule,
    delta0: f64,
) -> Result<()>
where
    F: Fn(usize, f64) -> Vec<Vec<f64>> + Sync,
{
    let j = grid.j;
    let updates: Vec<(usize, Witness)> = grid
        .flags
        .par_iter()
        .enumerate()
        .filter(|(_, f)| matches!(f, PointStatus::Good))
        .filter_map(|(i, _)| {
            let omega = grid.point(i);
            let eigs = diag_provider(i, omega);
            match is_nonresonant(omega, s, &eigs, spectrum, sched, j, delta0) {
                Ok(Some(w)) => Some((i, w)),
                Ok(None) => None,
                Err(_) => None,
            }
        })
        .collect();
    for (i, w) in updates {
        grid.flags[i] = PointStatus::Resonant {
            stage: s,
            witness: w,
        };
    }
    Ok(())
}
