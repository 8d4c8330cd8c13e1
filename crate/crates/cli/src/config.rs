//! Run configuration: JSON file plus dotted-path overrides.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use floq_core::linalg::C64;
use floq_core::models::{DriveCoefficients, RotorModel, SquareWellModel};
use floq_core::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    SquareWell {
        /// Fourier coefficients as [k, re, im] triples.
        z: Vec<(i64, f64, f64)>,
        #[serde(rename = "M_max")]
        m_max: usize,
        #[serde(rename = "K_max")]
        k_max: i64,
    },
    Rotor {
        #[serde(rename = "N")]
        n: usize,
        #[serde(rename = "M_max")]
        m_max: usize,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub series: f64,
    pub hermitian: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            series: 1e-12,
            hermitian: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub j: f64,
    pub r: f64,
    pub sigma: f64,
    pub alpha: f64,
    /// Either q directly or the q^r preset; q wins when both are set.
    pub q: Option<f64>,
    pub q_pow_r: Option<f64>,
    /// Multiplier applied to the drive coefficients.
    pub eps_scale: f64,
    /// When set, overrides eps_scale so that ε_V = fraction · ε*.
    pub eps_star_fraction: Option<f64>,
    pub s_max: usize,
    pub k_work_factor: f64,
    pub grid_points: usize,
    pub omega: Option<f64>,
    pub k_oracle: Option<i64>,
    pub leak_margin: Option<i64>,
    pub tolerances: Tolerances,
    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        // the square-well desk preset: z(t) = cos t scaled to ε_V = ε*/2
        let j = 3.0 * std::f64::consts::PI * std::f64::consts::PI;
        Self {
            model: ModelSpec::SquareWell {
                z: vec![(1, 0.5, 0.0), (-1, 0.5, 0.0)],
                m_max: 6,
                k_max: 1,
            },
            j,
            r: 4.0,
            sigma: 2.0,
            alpha: 2.0,
            q: None,
            q_pow_r: Some((2.0f64).exp()),
            eps_scale: 1.0,
            eps_star_fraction: Some(0.5),
            s_max: 5,
            k_work_factor: 4.0,
            grid_points: 201,
            omega: None,
            k_oracle: None,
            leak_margin: None,
            tolerances: Tolerances::default(),
            output_dir: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config parse: {e}")))
    }

    /// Apply `--set path.to.key=value` overrides onto the JSON tree before
    /// deserializing; values parse as JSON with a plain-string fallback.
    pub fn with_overrides(&self, overrides: &[String]) -> Result<Self> {
        let mut tree = serde_json::to_value(self)
            .map_err(|e| Error::Config(format!("config serialize: {e}")))?;
        for ov in overrides {
            let (path, raw) = ov
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override '{ov}' is not key=value")))?;
            let val: serde_json::Value = serde_json::from_str(raw)
                .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
            let mut cursor = &mut tree;
            let parts: Vec<&str> = path.split('.').collect();
            for (i, part) in parts.iter().enumerate() {
                if i + 1 == parts.len() {
                    cursor[part] = val.clone();
                } else {
                    cursor = cursor
                        .get_mut(*part)
                        .ok_or_else(|| Error::Config(format!("unknown config path '{path}'")))?;
                }
            }
        }
        serde_json::from_value(tree).map_err(|e| Error::Config(format!("override parse: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 2 {
            return Err(Error::Config("grid_points must be >= 2".into()));
        }
        if self.tolerances.series <= 0.0 || self.tolerances.hermitian <= 0.0 {
            return Err(Error::Config("all tolerances must be > 0".into()));
        }
        if self.j <= 0.0 {
            return Err(Error::Config("J must be > 0".into()));
        }
        Ok(())
    }

    pub fn resolve_q(&self) -> Result<f64> {
        if let Some(q) = self.q {
            return Ok(q);
        }
        if let Some(qr) = self.q_pow_r {
            if qr <= 1.0 {
                return Err(Error::Config("q^r preset must exceed 1".into()));
            }
            return Ok(qr.powf(1.0 / self.r));
        }
        Err(Error::Config("set either q or q_pow_r".into()))
    }

    pub fn drive(&self) -> Result<DriveCoefficients> {
        match &self.model {
            ModelSpec::SquareWell { z, .. } => {
                let mut map = BTreeMap::new();
                for &(k, re, im) in z {
                    map.insert(k, C64::new(re, im));
                }
                DriveCoefficients::new(map)
            }
            ModelSpec::Rotor { .. } => Err(Error::Config(
                "the rotor model supplies a spectrum and norm envelopes only; \
                 it has no drive coefficients"
                    .into(),
            )),
        }
    }

    pub fn square_well(&self, scale: f64) -> Result<SquareWellModel> {
        match &self.model {
            ModelSpec::SquareWell { m_max, k_max, .. } => {
                SquareWellModel::new(self.drive()?.scaled(scale), *m_max, *k_max)
            }
            ModelSpec::Rotor { .. } => Err(Error::Config(
                "this command needs explicit perturbation blocks; the rotor \
                 model has none"
                    .into(),
            )),
        }
    }

    pub fn rotor(&self) -> Option<RotorModel> {
        match &self.model {
            ModelSpec::Rotor { n, m_max } => RotorModel::new(*n, *m_max).ok(),
            _ => None,
        }
    }

    pub fn m_max(&self) -> usize {
        match &self.model {
            ModelSpec::SquareWell { m_max, .. } => *m_max,
            ModelSpec::Rotor { m_max, .. } => *m_max,
        }
    }
}

/// Print a float with 17 significant digits (round-trip exact).
pub fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}
