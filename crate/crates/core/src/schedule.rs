//! Scalar machinery of the stage schedule: the entire-function phi, the
//! sequences φ_s, E_s, ϱ_s, the contraction constants and the admissible
//! coupling thresholds.

use crate::error::{Error, Result};

/// phi(x) = (1/x)(e^x - (e^x - 1)/x) = Σ_{k>=0} (k+1) x^k / (k+2)!.
/// Series branch below |x| = 1e-4 where the closed form cancels.
pub fn phi(x: f64) -> f64 {
    if x.abs() > 1e-4 {
        (x.exp() - (x.exp() - 1.0) / x) / x
    } else {
        // first 8 series terms; remainder < |x|^8/9! at the branch point
        let mut acc = 0.0;
        let mut xk = 1.0;
        let mut fact = 2.0; // (k+2)! starting at k = 0
        for k in 0..8u32 {
            acc += (k as f64 + 1.0) * xk / fact;
            xk *= x;
            fact *= (k + 3) as f64;
        }
        acc
    }
}

/// Riemann zeta for real alpha > 1: direct sum with Euler-Maclaurin tail.
pub fn zeta(alpha: f64) -> f64 {
    assert!(alpha > 1.0, "zeta(alpha) needs alpha > 1");
    let n = 200_000u64;
    let mut acc = 0.0;
    for k in 1..=n {
        acc += (k as f64).powf(-alpha);
    }
    let nf = (n + 1) as f64;
    // tail Σ_{k>=n+1} k^{-α} by Euler-Maclaurin at a = n+1
    acc += zeta_tail(alpha, nf);
    acc
}

/// Σ_{k>=a} k^{-alpha} by Euler-Maclaurin.
fn zeta_tail(alpha: f64, a: f64) -> f64 {
    a.powf(1.0 - alpha) / (alpha - 1.0) + 0.5 * a.powf(-alpha)
        + alpha / 12.0 * a.powf(-alpha - 1.0)
        - alpha * (alpha + 1.0) * (alpha + 2.0) / 720.0 * a.powf(-alpha - 3.0)
}

/// Li_{-alpha}(z) = Σ_{k>=1} k^alpha z^k for 0 <= z < 1. Closed form for
/// alpha = 2: z(1+z)/(1-z)^3.
pub fn li_neg(alpha: f64, z: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&z) {
        return Err(Error::Divergence(format!(
            "polylogarithm argument {z} outside [0, 1)"
        )));
    }
    if alpha == 2.0 {
        return Ok(z * (1.0 + z) / (1.0 - z).powi(3));
    }
    let mut acc = 0.0;
    let mut zk = 1.0;
    for k in 1..100_000u64 {
        zk *= z;
        let term = (k as f64).powf(alpha) * zk;
        acc += term;
        if term < 1e-17 * acc.max(1e-300) && k > 8 {
            break;
        }
    }
    Ok(acc)
}

/// The stage sequences φ_s = a s^α q^{-rs} (s >= 1, φ_0 = φ_1),
/// E_s = q^{s+1} (E_{-1} = 1), ϱ_s = 1/E_s - 1/E_{s+1}, with
/// a = 45 e q^{2r} ε_V.
#[derive(Debug, Clone)]
pub struct Schedule {
    pub alpha: f64,
    pub q: f64,
    pub r: f64,
    pub eps_v: f64,
    pub a: f64,
    pub s_max: usize,
}

impl Schedule {
    pub fn new(alpha: f64, q: f64, r: f64, eps_v: f64, s_max: usize) -> Result<Self> {
        if alpha <= 1.0 || q <= 1.0 || r <= 0.0 {
            return Err(Error::Config(
                "schedule needs alpha > 1, q > 1, r > 0".into(),
            ));
        }
        if eps_v < 0.0 {
            return Err(Error::Config("eps_v must be nonnegative".into()));
        }
        let qr = q.powf(r);
        if qr < alpha.exp() {
            return Err(Error::Config(format!(
                "constraint q^r >= e^alpha violated: q^r = {qr:.6e} < e^alpha = {:.6e}",
                alpha.exp()
            )));
        }
        let z = zeta(alpha);
        let lim = 3.0 * std::f64::consts::LN_2;
        if z / qr > lim {
            return Err(Error::Config(format!(
                "constraint q^-r zeta(alpha) <= 3 ln 2 violated: {:.6e} > {lim:.6e}",
                z / qr
            )));
        }
        let a = 45.0 * std::f64::consts::E * q.powf(2.0 * r) * eps_v;
        Ok(Self {
            alpha,
            q,
            r,
            eps_v,
            a,
            s_max,
        })
    }

    pub fn q_pow_r(&self) -> f64 {
        self.q.powf(self.r)
    }

    /// φ_s = a s^α q^{-rs} for s >= 1; φ_0 = φ_1 by convention.
    pub fn phi_s(&self, s: usize) -> f64 {
        let s = s.max(1) as f64;
        self.a * s.powf(self.alpha) * self.q.powf(-self.r * s)
    }

    /// E_s = q^{s+1} for s >= 0, with E_{-1} = 1.
    pub fn e_s(&self, s: i64) -> f64 {
        if s < 0 {
            1.0
        } else {
            self.q.powf(s as f64 + 1.0)
        }
    }

    pub fn rho_s(&self, s: usize) -> f64 {
        1.0 / self.e_s(s as i64) - 1.0 / self.e_s(s as i64 + 1)
    }

    /// v_s = e ε_V / E_{s-1}^r.
    pub fn v_s(&self, s: usize) -> f64 {
        std::f64::consts::E * self.eps_v / self.e_s(s as i64 - 1).powf(self.r)
    }

    /// F_s = 5/φ_{s+1}.
    pub fn f_s(&self, s: usize) -> f64 {
        5.0 / self.phi_s(s + 1)
    }
}

/// A*, B*, C* from the schedule, evaluated both as the defining sup/series
/// (truncated at s_max with a zeta tail bound) and in closed form.
#[derive(Debug, Clone)]
pub struct ContractionConstants {
    pub a_star: f64,
    pub b_star: f64,
    pub c_star: f64,
    pub a_star_series: f64,
    pub b_star_series: f64,
    pub c_star_series: f64,
    /// A = ε_V A*, B = ε_V B*, C = ε_V C*.
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    /// ε_V B* <= (1/3) ln 2
    pub smallness_b_ok: bool,
    /// ε_V A* phi(3 ε_V C*) <= 1/9
    pub smallness_a_ok: bool,
    /// e^{dB} + A phi(dC) d^2 <= d with d = 3
    pub abd_ok: bool,
    pub max_rel_disagreement: f64,
}

impl ContractionConstants {
    pub fn smallness_ok(&self) -> bool {
        self.smallness_b_ok && self.smallness_a_ok
    }
}

pub fn contraction_constants(sched: &Schedule) -> ContractionConstants {
    let e = std::f64::consts::E;
    let qr = sched.q_pow_r();
    // closed forms
    let a_star = 5.0 * e * qr * qr / sched.a;
    let b_star = 5.0 * e * qr * zeta(sched.alpha) / sched.a;
    let c_star = 5.0 * e * qr / sched.a;

    // defining expressions: terms reduce to (5 e q^r / a) (s+1)^{-alpha} for
    // B*, and suprema attained at s = 0 for A*, C*.
    let mut a_sup = 0.0f64;
    let mut c_sup = 0.0f64;
    let mut b_sum = 0.0f64;
    for s in 0..=sched.s_max {
        let num = sched.e_s(s as i64).powf(sched.r);
        let den = sched.phi_s(s + 1) * sched.e_s(s as i64 - 1).powf(2.0 * sched.r);
        a_sup = a_sup.max(5.0 * e * num / den);
        let inv = 1.0 / (sched.phi_s(s + 1) * sched.e_s(s as i64 - 1).powf(sched.r));
        c_sup = c_sup.max(5.0 * e * inv);
        b_sum += 5.0 * e * inv;
    }
    // tail of the B* series beyond s_max via Euler-Maclaurin on (s+1)^{-alpha}
    let coeff = 5.0 * e * qr / sched.a;
    let tail = coeff * zeta_tail(sched.alpha, (sched.s_max + 2) as f64);
    let b_series = b_sum + tail;

    let rel = |x: f64, y: f64| ((x - y) / y.max(1e-300)).abs();
    let max_rel_disagreement = rel(a_sup, a_star)
        .max(rel(b_series, b_star))
        .max(rel(c_sup, c_star));

    let a = sched.eps_v * a_star;
    let b = sched.eps_v * b_star;
    let c = sched.eps_v * c_star;
    let d = 3.0;
    let smallness_b_ok = b <= std::f64::consts::LN_2 / 3.0;
    let smallness_a_ok = a * phi(3.0 * c) <= 1.0 / 9.0;
    let abd_ok = (d * b).exp() + a * phi(d * c) * d * d <= d;

    ContractionConstants {
        a_star,
        b_star,
        c_star,
        a_star_series: a_sup,
        b_star_series: b_series,
        c_star_series: c_sup,
        a,
        b,
        c,
        d,
        smallness_b_ok,
        smallness_a_ok,
        abd_ok,
        max_rel_disagreement,
    }
}

/// Maximal ε* with (3e/(1-q^{-r})) ε* <= min{Δ0/4, 7J/72} and
/// 45 e q^r ε* <= min{2Δ0/3, J/6}.
pub fn eps_star(r: f64, delta0: f64, j: f64, q: f64) -> f64 {
    let e = std::f64::consts::E;
    let qr = q.powf(r);
    let b1 = (delta0 / 4.0).min(7.0 * j / 72.0) * (1.0 - qr.recip()) / (3.0 * e);
    let b2 = (2.0 * delta0 / 3.0).min(j / 6.0) / (45.0 * e * qr);
    b1.min(b2)
}

/// δ* = δ1(σ, r) Δ_σ(J) with
/// δ1 = 1440 e q^{2r} 2^σ ((2σ+1)/((1-1/q)e))^{σ+1/2} Li_{-α}(q^{-r+σ+1/2}).
/// Requires r > σ + 1/2.
pub fn delta_star(
    sigma: f64,
    r: f64,
    _j: f64,
    alpha: f64,
    q: f64,
    delta_sigma_j: f64,
) -> Result<f64> {
    if r <= sigma + 0.5 {
        return Err(Error::Divergence(format!(
            "delta_star needs r > sigma + 1/2 (got r = {r}, sigma = {sigma})"
        )));
    }
    let e = std::f64::consts::E;
    let z = q.powf(-r + sigma + 0.5);
    let li = li_neg(alpha, z)?;
    let d1 = 1440.0
        * e
        * q.powf(2.0 * r)
        * 2f64.powf(sigma)
        * ((2.0 * sigma + 1.0) / ((1.0 - 1.0 / q) * e)).powf(sigma + 0.5)
        * li;
    Ok(d1 * delta_sigma_j)
}
