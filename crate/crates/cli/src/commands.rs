//! Command implementations; IO-free so the suites can drive them directly.

use rayon::prelude::*;
use serde::Serialize;

use floq_core::engine::{
    assemble_u, match_eigenvalues, predicted_eigenvalues, verify_identity_stages, EngineConfig,
    Iteration,
};
use floq_core::linalg;
use floq_core::models::{delta_sigma, epsilon_v};
use floq_core::resonance::{bad_measure_bound, FrequencyGrid, PointStatus};
use floq_core::schedule::{contraction_constants, delta_star, eps_star, Schedule};
use floq_core::{DenseWindow, Error, OmegaGrid, Result, RunStatus, StageRecord};

use crate::config::RunConfig;

/// Everything a square-well run needs, with the drive scaled to its target.
pub struct Prepared {
    pub cfg: RunConfig,
    pub q: f64,
    pub model: floq_core::SquareWellModel,
    pub eps_v: f64,
    pub eps_star: f64,
    pub delta0: f64,
    pub sched: Schedule,
    pub k_work: i64,
}

pub fn prepare(cfg: &RunConfig) -> Result<Prepared> {
    cfg.validate()?;
    let q = cfg.resolve_q()?;
    let base = cfg.square_well(1.0)?;
    let probe_grid = OmegaGrid::single(cfg.j);
    let (spectrum, v_base) = base.blocks(probe_grid.clone());
    let eps_base = epsilon_v(&v_base, cfg.r);
    let delta0 = spectrum.delta0();
    let estar = eps_star(cfg.r, delta0, cfg.j, q);
    let scale = match cfg.eps_star_fraction {
        Some(f) => {
            if eps_base <= 0.0 {
                return Err(Error::Config("drive has no weight; cannot scale".into()));
            }
            f * estar / eps_base
        }
        None => cfg.eps_scale,
    };
    let model = cfg.square_well(scale)?;
    let (_, v) = model.blocks(probe_grid);
    let eps_v = epsilon_v(&v, cfg.r);
    let sched = Schedule::new(cfg.alpha, q, cfg.r, eps_v, cfg.s_max)?;
    let k_work = (cfg.k_work_factor * sched.e_s(cfg.s_max as i64)).ceil() as i64;
    Ok(Prepared {
        cfg: cfg.clone(),
        q,
        model,
        eps_v,
        eps_star: estar,
        delta0,
        sched,
        k_work,
    })
}

impl Prepared {
    pub fn iteration(&self, omega: f64) -> Result<Iteration> {
        let (sp, v) = self.model.blocks(OmegaGrid::single(omega));
        let cfg = EngineConfig {
            s_max: self.cfg.s_max,
            k_work: self.k_work,
            series_tol: self.cfg.tolerances.series,
            herm_tol: self.cfg.tolerances.hermitian,
        };
        Iteration::new(sp, v, omega, self.cfg.j, self.sched.clone(), cfg)
    }

    /// Interior leak margin: the configured value, else the stage-band
    /// estimate S_max·ceil(E_{S_max}) capped at half the window.
    pub fn leak_margin(&self, k_trunc: i64) -> i64 {
        self.cfg.leak_margin.unwrap_or_else(|| {
            let bands = self.cfg.s_max as f64 * self.sched.e_s(self.cfg.s_max as i64).ceil();
            (bands as i64).min(k_trunc / 2)
        })
    }

    /// Largest mode cutoff whose window stays within `max_dim` basis states.
    pub fn k_for_dim(&self, max_dim: usize) -> i64 {
        let per_mode = self.model.spectrum().total_dim();
        (((max_dim / per_mode).max(1) as i64) - 1) / 2
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantsReport {
    pub j: f64,
    pub delta0: f64,
    pub omega0_measure: f64,
    pub q: f64,
    pub r: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub eps_v: Option<f64>,
    pub eps_star: f64,
    pub delta_sigma: f64,
    pub delta_sigma_tail: f64,
    pub delta_star: f64,
    /// min{ε*, |Ω_0|/δ*}
    pub admissible_budget: f64,
    pub eps_v_admissible: Option<bool>,
    /// ε_V A*, ε_V B*, ε_V C* and the smallness verdicts
    pub small_a: f64,
    pub small_b: f64,
    pub small_c: f64,
    pub smallness_b_ok: bool,
    pub smallness_a_ok: bool,
    pub abd_ok: bool,
    pub series_agreement: f64,
}

pub fn cmd_constants(cfg: &RunConfig) -> Result<ConstantsReport> {
    cfg.validate()?;
    let q = cfg.resolve_q()?;
    let (spectrum, eps_v) = match cfg.rotor() {
        Some(rot) => (rot.spectrum(), None),
        None => {
            let p = prepare(cfg)?;
            (p.model.spectrum(), Some(p.eps_v))
        }
    };
    let delta0 = spectrum.delta0();
    let estar = eps_star(cfg.r, delta0, cfg.j, q);
    let (dsig, dsig_tail) = delta_sigma(&spectrum, cfg.sigma, cfg.j);
    let dstar = delta_star(cfg.sigma, cfg.r, cfg.j, cfg.alpha, q, dsig)?;
    let omega0 = 17.0 * cfg.j / 72.0;
    let budget = estar.min(omega0 / dstar);
    let sched = Schedule::new(cfg.alpha, q, cfg.r, eps_v.unwrap_or(1.0), cfg.s_max)?;
    let cc = contraction_constants(&sched);
    Ok(ConstantsReport {
        j: cfg.j,
        delta0,
        omega0_measure: omega0,
        q,
        r: cfg.r,
        sigma: cfg.sigma,
        alpha: cfg.alpha,
        eps_v,
        eps_star: estar,
        delta_sigma: dsig,
        delta_sigma_tail: dsig_tail,
        delta_star: dstar,
        admissible_budget: budget,
        eps_v_admissible: eps_v.map(|e| e < budget),
        small_a: cc.a,
        small_b: cc.b,
        small_c: cc.c,
        smallness_b_ok: cc.smallness_b_ok,
        smallness_a_ok: cc.smallness_a_ok,
        abd_ok: cc.abd_ok,
        series_agreement: cc.max_rel_disagreement,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub omega: f64,
    pub status: RunStatus,
    pub stages: Vec<StageRecord>,
    pub eigenvalues: Vec<f64>,
    pub oracle_eigenvalues: Option<Vec<f64>>,
    pub max_eig_error: Option<f64>,
}

pub fn cmd_run(cfg: &RunConfig, omega: Option<f64>, check_identity: bool) -> Result<RunReport> {
    let p = prepare(cfg)?;
    let omega = omega.or(cfg.omega).unwrap_or(cfg.j);
    let mut it = p.iteration(omega)?;
    it.run()?;
    let mut stages = it.records.clone();
    if check_identity && it.completed() {
        let margin = p.leak_margin(p.k_work);
        let reports = verify_identity_stages(&it, p.k_work, margin)?;
        for (rec, rep) in stages.iter_mut().zip(&reports) {
            rec.identity_residual = Some(rep.residual_interior);
        }
    }
    let k_eig = p.k_for_dim(1500).min(p.k_work);
    let eigenvalues = if it.completed() {
        let margin = p.leak_margin(k_eig);
        predicted_eigenvalues(&it, it.w_hist.len() - 1, (k_eig - margin).max(0))
    } else {
        Vec::new()
    };
    Ok(RunReport {
        omega,
        status: it.status.clone().unwrap(),
        stages,
        eigenvalues,
        oracle_eigenvalues: None,
        max_eig_error: None,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub run: RunReport,
    pub basis_size: usize,
    pub k_oracle: i64,
    pub interior_k: i64,
    pub median_eig_error: f64,
    pub unitarity: f64,
    /// smallest overlap between an interior basis state transported by U and
    /// the oracle eigenvector nearest in eigenvalue
    pub min_overlap: f64,
}

pub fn cmd_oracle(cfg: &RunConfig, omega: Option<f64>) -> Result<OracleReport> {
    let p = prepare(cfg)?;
    let omega = omega.or(cfg.omega).unwrap_or(cfg.j);
    let mut it = p.iteration(omega)?;
    it.run()?;
    if !it.completed() {
        return Err(Error::Usage(format!(
            "omega {omega} is resonant ({:?}); the oracle needs a surviving frequency",
            it.status
        )));
    }
    let k_oracle = cfg.k_oracle.unwrap_or_else(|| p.k_for_dim(1500).min(p.k_work));
    let per_mode = it.spectrum.total_dim();
    let basis_size = (2 * k_oracle + 1) as usize * per_mode;
    if basis_size > 2000 {
        return Err(Error::Config(format!(
            "oracle basis size {basis_size} exceeds 2000; lower k_oracle to \
             {} or reduce M_max",
            p.k_for_dim(2000)
        )));
    }
    let window = DenseWindow::new(it.spectrum.clone(), k_oracle);
    let s_last = it.w_hist.len() - 1;
    let dense = window.floquet_k(omega) + window.assemble(&it.v_cutoff(s_last), 0);
    let herm_dev = linalg::hermitian_deviation(&dense);
    if herm_dev > 1e-10 {
        return Err(Error::Tolerance(format!(
            "dense assembly lost Hermitian symmetry: {herm_dev:e}"
        )));
    }
    let (evals, evecs) = linalg::hermitian_eig(&dense);
    let margin = p.leak_margin(k_oracle);
    let interior_k = (k_oracle - margin).max(0);
    let predicted = predicted_eigenvalues(&it, s_last, interior_k);
    let (max_err, median_err) = match_eigenvalues(&predicted, &evals);

    let u = assemble_u(&it.a_list, &window, 0);
    let unitarity = linalg::max_abs(&(u.adjoint() * &u - linalg::identity(window.dim())));

    // eigenvector localization: oracle vectors vs U^H e_(k,m,i)
    let mut min_overlap = 1.0f64;
    let uh = u.adjoint().to_owned();
    for k in -interior_k..=interior_k {
        for m in 0..it.spectrum.n_levels() {
            for i in 0..it.spectrum.mult(m) {
                let col = window.offset(k, m) + i;
                // predicted eigenvalue for this state (multiplicity-one
                // blocks dominate here; for degenerate blocks compare the
                // i-th eigenvalue of the diagonal block)
                let block = it.w_hist[s_last].diag_block(m, 0);
                let lam = linalg::hermitian_eigenvalues(&block)[i];
                let target = k as f64 * omega + it.spectrum.level(m) + lam;
                let idx = evals.partition_point(|&x| x < target);
                let idx = if idx == evals.len() { idx - 1 } else { idx };
                let idx = if idx > 0 && (evals[idx - 1] - target).abs() < (evals[idx] - target).abs()
                {
                    idx - 1
                } else {
                    idx
                };
                let mut dot = linalg::cr(0.0);
                for row in 0..window.dim() {
                    dot = dot + evecs[(row, idx)].conj() * uh[(row, col)];
                }
                min_overlap = min_overlap.min(dot.abs());
            }
        }
    }

    let run = RunReport {
        omega,
        status: it.status.clone().unwrap(),
        stages: it.records.clone(),
        eigenvalues: predicted,
        oracle_eigenvalues: Some(evals),
        max_eig_error: Some(max_err),
    };
    Ok(OracleReport {
        run,
        basis_size,
        k_oracle,
        interior_k,
        median_eig_error: median_err,
        unitarity,
        min_overlap,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPointRow {
    pub omega: f64,
    pub stage: usize,
    pub status: &'static str,
    pub witness_k: Option<i64>,
    pub witness_n: Option<usize>,
    pub witness_m: Option<usize>,
    pub distance: Option<f64>,
    pub psi: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub good_measure_estimate: f64,
    /// |Ω_0| - δ* ε_V
    pub bound: f64,
    pub satisfied: bool,
    pub bad_measure_estimate: f64,
    /// δ* ε_V + (excluded intervals) · cell width
    pub bad_measure_bound_total: f64,
    pub bad_within_bound: bool,
    pub excluded_intervals: usize,
    pub cell_width: f64,
    pub omega0_measure: f64,
    pub completed: usize,
    pub total: usize,
    pub contraction_ok_everywhere: bool,
    /// sampled sup of ‖∂W_0mm‖ over adjacent surviving pairs
    pub max_diag_lipschitz: Option<f64>,
    /// per-stage (truncated ψ-sum, closed-form majorant)
    pub stage_budgets: Vec<(f64, f64)>,
}

pub struct SweepResult {
    pub grid: FrequencyGrid,
    pub rows: Vec<SweepPointRow>,
    pub summary: SweepSummary,
    pub reports: Vec<RunStatus>,
    pub surviving: Vec<f64>,
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<SweepResult> {
    let p = prepare(cfg)?;
    let mut grid = FrequencyGrid::uniform(cfg.j, cfg.grid_points)?;
    let spectrum = p.model.spectrum();

    struct PointOutcome {
        status: RunStatus,
        rows: Vec<SweepPointRow>,
        contraction_ok: bool,
        final_diag: Option<Vec<floq_core::linalg::Mat<floq_core::C64>>>,
    }

    let outcomes: Vec<PointOutcome> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let omega = grid.point(i);
            let mut it = p.iteration(omega).expect("grid omega is valid");
            let status = it.run().expect("run errors are statuses").clone();
            let mut rows = Vec::new();
            let reached = match &status {
                RunStatus::ResonantAbort { stage, .. } => *stage,
                _ => cfg.s_max,
            };
            for s in 0..reached {
                rows.push(SweepPointRow {
                    omega,
                    stage: s,
                    status: "good",
                    witness_k: None,
                    witness_n: None,
                    witness_m: None,
                    distance: None,
                    psi: None,
                });
            }
            if let RunStatus::ResonantAbort { stage, witness } = &status {
                rows.push(SweepPointRow {
                    omega,
                    stage: *stage,
                    status: "resonant",
                    witness_k: Some(witness.k),
                    witness_n: Some(witness.n),
                    witness_m: Some(witness.m),
                    distance: Some(witness.dist),
                    psi: Some(witness.psi),
                });
            }
            let contraction_ok = it.records.iter().all(|r| r.contraction_ok);
            let final_diag = if it.completed() {
                Some(
                    (0..spectrum.n_levels())
                        .map(|n| it.w_cur().diag_block(n, 0))
                        .collect(),
                )
            } else {
                None
            };
            PointOutcome {
                status,
                rows,
                contraction_ok,
                final_diag,
            }
        })
        .collect();

    let mut rows = Vec::new();
    let mut reports = Vec::new();
    let mut completed = 0usize;
    let mut contraction_ok_everywhere = true;
    for (i, o) in outcomes.iter().enumerate() {
        match &o.status {
            RunStatus::ResonantAbort { stage, witness } => {
                grid.flags[i] = PointStatus::Resonant {
                    stage: *stage,
                    witness: *witness,
                };
            }
            _ => {
                completed += 1;
                if !o.contraction_ok {
                    contraction_ok_everywhere = false;
                }
            }
        }
        rows.extend(o.rows.iter().cloned());
        reports.push(o.status.clone());
    }

    // sampled Lipschitz check on adjacent surviving pairs
    let mut max_lip: Option<f64> = None;
    for i in 0..grid.len() - 1 {
        let (Some(a), Some(b)) = (&outcomes[i].final_diag, &outcomes[i + 1].final_diag) else {
            continue;
        };
        let dw = grid.point(i + 1) - grid.point(i);
        for (ba, bb) in a.iter().zip(b) {
            let lip = linalg::spectral_norm(&(ba - bb)) / dw;
            max_lip = Some(max_lip.unwrap_or(0.0).max(lip));
        }
    }

    let (dsig, _) = delta_sigma(&spectrum, cfg.sigma, cfg.j);
    let dstar = delta_star(cfg.sigma, cfg.r, cfg.j, cfg.alpha, p.q, dsig)?;
    let omega0 = grid.omega0_measure();
    let bound = omega0 - dstar * p.eps_v;
    let bad = grid.bad_measure();
    let bad_bound = dstar * p.eps_v + grid.excluded_intervals() as f64 * grid.cell_width;
    let stage_budgets: Vec<(f64, f64)> = (0..cfg.s_max)
        .map(|s| bad_measure_bound(s, &spectrum, &p.sched, cfg.sigma, cfg.j))
        .collect();
    let summary = SweepSummary {
        good_measure_estimate: grid.good_measure(),
        bound,
        satisfied: grid.good_measure() >= bound - grid.excluded_intervals() as f64 * grid.cell_width,
        bad_measure_estimate: bad,
        bad_measure_bound_total: bad_bound,
        bad_within_bound: bad <= bad_bound,
        excluded_intervals: grid.excluded_intervals(),
        cell_width: grid.cell_width,
        omega0_measure: omega0,
        completed,
        total: grid.len(),
        contraction_ok_everywhere,
        max_diag_lipschitz: max_lip,
        stage_budgets,
    };
    let surviving = (0..grid.len())
        .filter(|&i| matches!(grid.flags[i], PointStatus::Good))
        .map(|i| grid.point(i))
        .collect();
    Ok(SweepResult {
        grid,
        rows,
        summary,
        reports,
        surviving,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelDump {
    pub levels: Vec<f64>,
    pub mults: Vec<usize>,
    pub delta0: f64,
    pub eps_v: f64,
    pub eps_v_closed_form: f64,
    pub blocks: serde_json::Value,
}

pub fn cmd_model_dump(cfg: &RunConfig) -> Result<ModelDump> {
    let p = prepare(cfg)?;
    let (sp, v) = p.model.blocks(OmegaGrid::single(cfg.j));
    Ok(ModelDump {
        levels: sp.levels().to_vec(),
        mults: (0..sp.n_levels()).map(|m| sp.mult(m)).collect(),
        delta0: sp.delta0(),
        eps_v: p.eps_v,
        eps_v_closed_form: p.model.drive.epsilon_v_closed_form(cfg.r),
        blocks: v.debug_json(),
    })
}
