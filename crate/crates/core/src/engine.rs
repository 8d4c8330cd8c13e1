//! The stage iteration at fixed ω: mode cutoffs, the divisor map Γ_s, the
//! generators A_s, the conjugation series, the W recursion, unitary assembly
//! and the exact stage identity check.

use std::sync::Arc;

use faer::Mat;
use serde::Serialize;

use crate::block::BlockOperator;
use crate::dense::DenseWindow;
use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::resonance::{self, IndexClass, Witness};
use crate::schedule::{contraction_constants, Schedule};
use crate::spectrum::Spectrum;

/// Cutoff to modes |k| < E_s.
pub fn cutoff(v: &BlockOperator, e_s: f64) -> BlockOperator {
    v.cutoff_below(e_s)
}

/// Per-index diagnostics accumulated while applying Γ_s.
#[derive(Debug, Clone, Copy, Default)]
pub struct GammaDiagnostics {
    /// max over blocks of ‖X_knm‖ ψ / (min{M_m, M_n}^{1/2} ‖Y_knm‖)
    pub cert_max_ratio: f64,
    /// max over non-interlaced blocks of ‖X_knm‖ ψ / ‖Y_knm‖
    pub cert_max_ratio_noninterlaced: f64,
}

/// Apply Γ_s to Y: per non-diagonal index solve
/// (kω - Δ_mn + W_0nn(ω)) X - X W_0mm(ω) = Y_knm(ω).
/// Diagonal indices map to zero. `diag_eigs` are the eigendecompositions of
/// the blocks W_0nn(ω).
pub fn gamma_apply(
    omega: f64,
    s: usize,
    diag_eigs: &[(Vec<f64>, Mat<C64>)],
    y: &BlockOperator,
    spectrum: &Spectrum,
    sched: &Schedule,
    j: f64,
    delta0: f64,
) -> Result<(BlockOperator, GammaDiagnostics)> {
    let mut out = BlockOperator::zero(
        y.spectrum().clone(),
        y.grid().clone(),
        y.k_store(),
    );
    assert_eq!(y.grid().len(), 1, "gamma acts at a fixed frequency");
    let mut diag = GammaDiagnostics::default();
    let scale = j.max(spectrum.levels().last().copied().unwrap_or(1.0).abs());
    for (idx, mats) in y.entries() {
        if idx.is_diagonal() {
            continue;
        }
        let (en, un) = &diag_eigs[idx.n];
        let (em, um) = &diag_eigs[idx.m];
        let shift = idx.k as f64 * omega - spectrum.delta(idx.m, idx.n);
        // spectra of the two coefficients
        let a_eigs: Vec<f64> = en.iter().map(|&x| shift + x).collect();
        let dist = crate::sylvester::min_gap(&a_eigs, em);
        if dist <= 1e-12 * scale {
            return Err(Error::Resonance {
                stage: s,
                k: idx.k,
                n: idx.n,
                m: idx.m,
                dist,
                threshold: 1e-12 * scale,
            });
        }
        let yb = &mats[0];
        // W~ = Un^H Y Um, divide by the shifted divisors, transform back.
        let yt = un.adjoint() * yb * um;
        let xt = Mat::from_fn(yb.nrows(), yb.ncols(), |i, jj| {
            yt[(i, jj)] * linalg::cr(1.0 / (a_eigs[i] - em[jj]))
        });
        let x = un * xt * um.adjoint();

        // certificate bookkeeping against the stage thresholds
        let class = resonance::classify_index(idx.k, idx.n, idx.m, spectrum, j);
        if class != IndexClass::Diagonal {
            let threshold =
                resonance::psi(s, idx.k, idx.n, idx.m, class, sched, spectrum, j, delta0)?;
            let yn = linalg::spectral_norm(yb);
            if yn > 0.0 && threshold > 0.0 {
                let xn = linalg::spectral_norm(&x);
                let min_m = (spectrum.mult(idx.n).min(spectrum.mult(idx.m)) as f64).sqrt();
                diag.cert_max_ratio = diag.cert_max_ratio.max(xn * threshold / (min_m * yn));
                let interlaced = crate::sylvester::interlacing_class(&a_eigs, em, 0.0)
                    == crate::sylvester::InterlacingClass::Interlaced;
                if !interlaced {
                    diag.cert_max_ratio_noninterlaced = diag
                        .cert_max_ratio_noninterlaced
                        .max(xn * threshold / yn);
                }
            }
        }
        out.insert(*idx, vec![x])?;
    }
    Ok((out, diag))
}

/// e^{ad_A} X = Σ_j ad_A^j X / j!, truncated once the next term's weighted
/// norm drops below `tol`; intermediate supports capped at `k_cap`.
pub fn exp_ad(
    a: &BlockOperator,
    x: &BlockOperator,
    phi_w: f64,
    e_w: f64,
    tol: f64,
    k_cap: i64,
) -> Result<BlockOperator> {
    let mut acc = x.clone();
    let mut term = x.clone();
    let mut j = 1.0f64;
    loop {
        term = a
            .product(&term)?
            .sub(&term.product(a)?)?
            .scale(linalg::cr(1.0 / j))
            .truncate_k(k_cap);
        term.prune(tol * 1e-6, e_w);
        if term.is_zero() {
            break;
        }
        acc = acc.add(&term)?;
        if term.weighted_norm(phi_w, e_w) <= tol || j > 60.0 {
            break;
        }
        j += 1.0;
    }
    Ok(acc)
}

/// Θ φ(Θ) Y = Σ_{j>=1} j/(j+1)! ad_A^j Y, truncated at `tol`.
pub fn theta_phi_theta(
    a: &BlockOperator,
    y: &BlockOperator,
    phi_w: f64,
    e_w: f64,
    tol: f64,
    k_cap: i64,
) -> Result<BlockOperator> {
    let mut acc = BlockOperator::zero(y.spectrum().clone(), y.grid().clone(), y.k_store());
    let mut ad_j = y.clone();
    let mut factorial = 1.0f64; // (j+1)! for the current j, starting from 2! below
    let mut j = 1.0f64;
    loop {
        ad_j = a
            .product(&ad_j)?
            .sub(&ad_j.product(a)?)?
            .truncate_k(k_cap);
        ad_j.prune(tol * 1e-6, e_w);
        if ad_j.is_zero() {
            break;
        }
        factorial *= j + 1.0;
        let term = ad_j.scale(linalg::cr(j / factorial));
        acc = acc.add(&term)?;
        if term.weighted_norm(phi_w, e_w) <= tol || j > 60.0 {
            break;
        }
        j += 1.0;
    }
    Ok(acc)
}

#[derive(Debug, Clone, Serialize)]
pub struct StageRecord {
    pub s: usize,
    pub w_s: f64,
    pub v_s: f64,
    pub a_norm: Option<f64>,
    pub gamma_ratio: Option<f64>,
    pub gamma_bound: Option<f64>,
    pub gamma_hyp_ok: Option<bool>,
    pub gamma_bound_ok: Option<bool>,
    pub cert_max_ratio: Option<f64>,
    pub contraction_ok: bool,
    pub herm_dev: f64,
    pub anti_dev: Option<f64>,
    pub identity_residual: Option<f64>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
#[serde(tag = "kind")]
pub enum RunStatus {
    Completed { stages: usize },
    ResonantAbort { stage: usize, witness: Witness },
    Underflow { stage: usize },
}

#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub s_max: usize,
    pub k_work: i64,
    pub series_tol: f64,
    pub herm_tol: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            s_max: 5,
            k_work: 64,
            series_tol: 1e-12,
            herm_tol: 1e-12,
        }
    }
}

/// One fixed-frequency KAM run: holds the cutoff sequence V_s, the iterates
/// W_s, the generators A_s and per-stage diagnostics.
pub struct Iteration {
    pub spectrum: Arc<Spectrum>,
    pub sched: Schedule,
    pub omega: f64,
    pub j: f64,
    pub delta0: f64,
    pub cfg: EngineConfig,
    v_full: BlockOperator,
    /// W_0 .. W_{s_cur}
    pub w_hist: Vec<BlockOperator>,
    /// A_0 .. A_{s_cur - 1}
    pub a_list: Vec<BlockOperator>,
    pub records: Vec<StageRecord>,
    pub status: Option<RunStatus>,
    smallness_ok: bool,
}

impl Iteration {
    pub fn new(
        spectrum: Arc<Spectrum>,
        v: BlockOperator,
        omega: f64,
        j: f64,
        sched: Schedule,
        cfg: EngineConfig,
    ) -> Result<Self> {
        if v.grid().len() != 1 {
            return Err(Error::Usage("iteration runs at a single frequency".into()));
        }
        if (v.grid().point(0) - omega).abs() > 0.0 {
            return Err(Error::Usage("operator grid must match omega".into()));
        }
        let delta0 = spectrum.delta0();
        if !(delta0 > 0.0) {
            return Err(Error::Config("spectrum needs Delta_0 > 0".into()));
        }
        let smallness_ok = contraction_constants(&sched).smallness_ok();
        let w0 = cutoff(&v, sched.e_s(0));
        let w_norm = w0.weighted_norm(sched.phi_s(0), sched.e_s(0));
        let mut it = Self {
            spectrum,
            sched,
            omega,
            j,
            delta0,
            cfg,
            v_full: v,
            w_hist: vec![w0],
            a_list: Vec::new(),
            records: Vec::new(),
            status: None,
            smallness_ok,
        };
        let v0 = it.sched.v_s(0);
        it.records.push(StageRecord {
            s: 0,
            w_s: w_norm,
            v_s: v0,
            a_norm: None,
            gamma_ratio: None,
            gamma_bound: None,
            gamma_hyp_ok: None,
            gamma_bound_ok: None,
            cert_max_ratio: None,
            contraction_ok: !it.smallness_ok || w_norm <= 3.0 * v0,
            herm_dev: it.w_hist[0].hermitian_deviation(),
            anti_dev: None,
            identity_residual: None,
        });
        Ok(it)
    }

    pub fn stage(&self) -> usize {
        self.w_hist.len() - 1
    }

    pub fn w_cur(&self) -> &BlockOperator {
        self.w_hist.last().unwrap()
    }

    fn w_prev(&self) -> BlockOperator {
        if self.w_hist.len() >= 2 {
            self.w_hist[self.w_hist.len() - 2].clone()
        } else {
            BlockOperator::zero(
                self.spectrum.clone(),
                self.w_cur().grid().clone(),
                0,
            )
        }
    }

    /// Eigendecompositions of the current diagonal blocks W_0nn(ω).
    pub fn diag_eigs(&self) -> Vec<(Vec<f64>, Mat<C64>)> {
        (0..self.spectrum.n_levels())
            .map(|n| linalg::hermitian_eig(&self.w_cur().diag_block(n, 0)))
            .collect()
    }

    /// A_s = Γ_s((1 - D)(W_s - W_{s-1})) at the current stage; also returns
    /// the Γ argument and the per-block certificate diagnostics.
    pub fn build_generator(
        &self,
        diag_eigs: &[(Vec<f64>, Mat<C64>)],
    ) -> Result<(BlockOperator, BlockOperator, GammaDiagnostics)> {
        let s = self.stage();
        let arg = self.w_cur().sub(&self.w_prev())?.off_diagonal_part();
        let (a_s, gdiag) = gamma_apply(
            self.omega,
            s,
            diag_eigs,
            &arg,
            &self.spectrum,
            &self.sched,
            self.j,
            self.delta0,
        )?;
        Ok((a_s, arg, gdiag))
    }

    /// Check non-resonance of ω at the current stage, then perform one
    /// recursion step. Returns false when the run has stopped.
    pub fn advance(&mut self) -> Result<bool> {
        if self.status.is_some() {
            return Ok(false);
        }
        let s = self.stage();
        if s >= self.cfg.s_max {
            self.status = Some(RunStatus::Completed { stages: s });
            return Ok(false);
        }
        if self.sched.v_s(s) < 1e-15 {
            self.status = Some(RunStatus::Underflow { stage: s });
            return Ok(false);
        }
        let diag_eigs = self.diag_eigs();
        let eig_lists: Vec<Vec<f64>> = diag_eigs.iter().map(|(v, _)| v.clone()).collect();
        if let Some(w) = resonance::is_nonresonant(
            self.omega,
            s,
            &eig_lists,
            &self.spectrum,
            &self.sched,
            self.j,
            self.delta0,
        )? {
            self.status = Some(RunStatus::ResonantAbort {
                stage: s,
                witness: w,
            });
            return Ok(false);
        }

        let (a_s, arg, gdiag) = self.build_generator(&diag_eigs)?;
        let arg_norm = arg.weighted_norm(self.sched.phi_s(s), self.sched.e_s(s as i64));
        let phi_next = self.sched.phi_s(s + 1);
        let e_next = self.sched.e_s(s as i64 + 1);
        let a_norm = a_s.weighted_norm(phi_next, e_next);
        let gamma_bound = 5.0 / (2.0 * phi_next);
        let gamma_ratio = if arg_norm > 0.0 { a_norm / arg_norm } else { 0.0 };
        let diag_cap = (self.delta0 / 4.0).min(7.0 * self.j / 72.0);
        let diag_norm_max = (0..self.spectrum.n_levels())
            .map(|n| linalg::spectral_norm(&self.w_cur().diag_block(n, 0)))
            .fold(0.0f64, f64::max);
        let gamma_hyp_ok = diag_norm_max <= diag_cap
            && phi_next <= (2.0 * self.delta0 / 3.0).min(self.j / 6.0);
        let gamma_bound_ok = gamma_ratio <= gamma_bound * (1.0 + 1e-9);
        let anti_dev = a_s.anti_hermitian_deviation();

        // W_{s+1} = W_s + T_{s+1}(V_{s+1} - V_s) + Θφ(Θ)((1-D)(W_s - W_{s-1}))
        let v_next = cutoff(&self.v_full, self.sched.e_s(s as i64 + 1));
        let v_cur = cutoff(&self.v_full, self.sched.e_s(s as i64));
        let dv = v_next.sub(&v_cur)?;
        let tol = self.cfg.series_tol;
        let k_cap = self.cfg.k_work;
        let mut transported = dv;
        if !transported.is_zero() {
            // T_{s+1} = e^{Θ^s} ... e^{Θ^0}: oldest factor applied first
            let chain: Vec<&BlockOperator> = self.a_list.iter().collect();
            for a_t in chain {
                transported = exp_ad(a_t, &transported, phi_next, e_next, tol, k_cap)?;
            }
            transported = exp_ad(&a_s, &transported, phi_next, e_next, tol, k_cap)?;
        }
        let theta_term = theta_phi_theta(&a_s, &arg, phi_next, e_next, tol, k_cap)?;
        let w_next = self
            .w_cur()
            .add(&transported)?
            .add(&theta_term)?
            .truncate_k(k_cap);

        let w_norm = w_next
            .sub(self.w_cur())?
            .weighted_norm(phi_next, e_next);
        let v_bound = self.sched.v_s(s + 1);
        self.records.push(StageRecord {
            s: s + 1,
            w_s: w_norm,
            v_s: v_bound,
            a_norm: Some(a_norm),
            gamma_ratio: Some(gamma_ratio),
            gamma_bound: Some(gamma_bound),
            gamma_hyp_ok: Some(gamma_hyp_ok),
            gamma_bound_ok: Some(gamma_bound_ok),
            cert_max_ratio: Some(gdiag.cert_max_ratio),
            contraction_ok: !self.smallness_ok || w_norm <= 3.0 * v_bound,
            herm_dev: w_next.hermitian_deviation(),
            anti_dev: Some(anti_dev),
            identity_residual: None,
        });
        self.a_list.push(a_s);
        self.w_hist.push(w_next);
        Ok(true)
    }

    /// Run to the stop condition.
    pub fn run(&mut self) -> Result<&RunStatus> {
        while self.advance()? {}
        Ok(self.status.as_ref().unwrap())
    }

    pub fn v_cutoff(&self, s: usize) -> BlockOperator {
        cutoff(&self.v_full, self.sched.e_s(s as i64))
    }

    pub fn v_full(&self) -> &BlockOperator {
        &self.v_full
    }

    pub fn completed(&self) -> bool {
        matches!(
            self.status,
            Some(RunStatus::Completed { .. }) | Some(RunStatus::Underflow { .. })
        )
    }
}

/// U_s = e^{dense(A_{s-1})} ... e^{dense(A_0)} on the window; the empty
/// product is the identity.
pub fn assemble_u(a_list: &[BlockOperator], window: &DenseWindow, grid_idx: usize) -> Mat<C64> {
    let mut u = linalg::identity(window.dim());
    for a in a_list {
        if a.is_zero() {
            continue;
        }
        let ad = window.assemble(a, grid_idx);
        let e = linalg::expm_antihermitian(&ad);
        u = &e * &u;
    }
    u
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub stage: usize,
    pub k_trunc: i64,
    pub leak_margin: i64,
    /// max-abs entry of LHS - RHS over interior rows and columns
    pub residual_interior: f64,
    /// ‖U^H U - 1‖_max of the assembled unitary
    pub unitarity: f64,
    /// interior off-diagonal part of U(K + V_s)U^{-1} - K - D(W_s); at the
    /// final stage this is the off-diagonal defect of the diagonalization
    pub offdiag_defect: f64,
}

/// Verify the stage-s identity
/// U_s (K + V_s) U_s^{-1} = K + D(W_s) + (1-D)(W_s - W_{s-1})
/// on the dense window, restricted to interior modes
/// |k| <= k_trunc - leak_margin.
pub fn verify_identity(
    it: &Iteration,
    s: usize,
    k_trunc: i64,
    leak_margin: i64,
) -> Result<IdentityReport> {
    if s >= it.w_hist.len() {
        return Err(Error::Usage(format!(
            "stage {s} not reached (have {})",
            it.w_hist.len() - 1
        )));
    }
    let window = DenseWindow::new(it.spectrum.clone(), k_trunc);
    let u = assemble_u(&it.a_list[..s], &window, 0);
    let unitarity = linalg::max_abs(&(u.adjoint() * &u - linalg::identity(window.dim())));

    let k_dense = window.floquet_k(it.omega);
    let v_s = window.assemble(&it.v_cutoff(s), 0);
    let lhs = &u * (&k_dense + &v_s) * u.adjoint();

    let w_s = &it.w_hist[s];
    let w_prev = if s >= 1 {
        it.w_hist[s - 1].clone()
    } else {
        BlockOperator::zero(it.spectrum.clone(), w_s.grid().clone(), 0)
    };
    let rhs_op = w_s
        .diagonal_part()
        .add(&w_s.sub(&w_prev)?.off_diagonal_part())?;
    let rhs = &k_dense + window.assemble(&rhs_op, 0);

    let diff = &lhs - &rhs;
    let residual_interior = window.max_abs_interior(&diff, leak_margin);

    // off-diagonal defect of U(K+V_s)U^{-1} - K - D(W_s)
    let defect = &lhs - &k_dense - window.assemble(&w_s.diagonal_part(), 0);
    let offdiag_defect = window.max_abs_interior_offdiag(&defect, leak_margin);

    Ok(IdentityReport {
        stage: s,
        k_trunc,
        leak_margin,
        residual_interior,
        unitarity,
        offdiag_defect,
    })
}

/// Stage identities for s = 0..=last reached stage, sharing one window and
/// building U incrementally (one exponential per generator).
pub fn verify_identity_stages(
    it: &Iteration,
    k_trunc: i64,
    leak_margin: i64,
) -> Result<Vec<IdentityReport>> {
    let window = DenseWindow::new(it.spectrum.clone(), k_trunc);
    let dim = window.dim();
    let k_dense = window.floquet_k(it.omega);
    let mut u = linalg::identity(dim);
    let mut u_trivial = true;
    let mut unitarity = 0.0f64;
    let mut reports = Vec::new();
    for s in 0..it.w_hist.len() {
        if s >= 1 && !it.a_list[s - 1].is_zero() {
            let ad = window.assemble(&it.a_list[s - 1], 0);
            let e = linalg::expm_antihermitian(&ad);
            u = &e * &u;
            u_trivial = false;
            unitarity = linalg::max_abs(&(u.adjoint() * &u - linalg::identity(dim)));
        }
        let v_s = window.assemble(&it.v_cutoff(s), 0);
        let lhs = if u_trivial {
            &k_dense + &v_s
        } else {
            &u * (&k_dense + &v_s) * u.adjoint()
        };
        let w_s = &it.w_hist[s];
        let w_prev = if s >= 1 {
            it.w_hist[s - 1].clone()
        } else {
            BlockOperator::zero(it.spectrum.clone(), w_s.grid().clone(), 0)
        };
        let rhs_op = w_s
            .diagonal_part()
            .add(&w_s.sub(&w_prev)?.off_diagonal_part())?;
        let rhs = &k_dense + window.assemble(&rhs_op, 0);
        let diff = &lhs - &rhs;
        let residual_interior = window.max_abs_interior(&diff, leak_margin);
        let defect = &lhs - &k_dense - window.assemble(&w_s.diagonal_part(), 0);
        let offdiag_defect = window.max_abs_interior_offdiag(&defect, leak_margin);
        reports.push(IdentityReport {
            stage: s,
            k_trunc,
            leak_margin,
            residual_interior,
            unitarity,
            offdiag_defect,
        });
    }
    Ok(reports)
}

/// Match each predicted eigenvalue against the nearest dense eigenvalue
/// (both lists ascending); returns (max, median) absolute error.
pub fn match_eigenvalues(predicted: &[f64], dense: &[f64]) -> (f64, f64) {
    assert!(!dense.is_empty());
    let mut errs: Vec<f64> = predicted
        .iter()
        .map(|&p| {
            let idx = dense.partition_point(|&x| x < p);
            let lo = idx.saturating_sub(1);
            let hi = idx.min(dense.len() - 1);
            (dense[lo] - p).abs().min((dense[hi] - p).abs())
        })
        .collect();
    if errs.is_empty() {
        return (0.0, 0.0);
    }
    errs.sort_by(f64::total_cmp);
    let max = *errs.last().unwrap();
    let median = errs[errs.len() / 2];
    (max, median)
}

/// Predicted quasi-energies from K + D(W_s): eigenvalues of
/// kω + h_m + W_0mm(ω) over interior modes |k| <= k_int, ascending.
pub fn predicted_eigenvalues(it: &Iteration, s: usize, k_int: i64) -> Vec<f64> {
    let w = &it.w_hist[s];
    let mut out = Vec::new();
    for k in -k_int..=k_int {
        for m in 0..it.spectrum.n_levels() {
            let block = w.diag_block(m, 0);
            for lam in linalg::hermitian_eigenvalues(&block) {
                out.push(k as f64 * it.omega + it.spectrum.level(m) + lam);
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}
