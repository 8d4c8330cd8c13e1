//! Numerical engine for iterative block-diagonalization of Floquet
//! Hamiltonians K + V on truncated Fourier-mode × energy-level lattices:
//! the weighted operator algebra, the commutation-equation solver, the
//! stage schedules, resonant-frequency exclusion, and dense-window
//! verification against direct diagonalization.

pub mod block;
pub mod dense;
pub mod engine;
pub mod error;
pub mod linalg;
pub mod models;
pub mod resonance;
pub mod schedule;
pub mod spectrum;
pub mod sylvester;

pub use block::{BlockIndex, BlockOperator, OmegaGrid};
pub use dense::DenseWindow;
pub use engine::{EngineConfig, IdentityReport, Iteration, RunStatus, StageRecord};
pub use error::{Error, Result};
pub use linalg::C64;
pub use models::{DriveCoefficients, RotorModel, SquareWellModel};
pub use resonance::{FrequencyGrid, IndexClass, PointStatus, Witness};
pub use schedule::{ContractionConstants, Schedule};
pub use spectrum::Spectrum;
pub use sylvester::{HermitianPair, InterlacingClass};
