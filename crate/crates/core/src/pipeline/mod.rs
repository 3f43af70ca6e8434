//! The quantization recipe driven by a JSON config: build the groupoid,
//! check potential and polarization, derive the twist, reduce, construct
//! the algebra and verify it. Produces a deterministic report.

mod config;
mod flow;
mod report;

use std::env;
use std::fmt;

use thiserror::Error;

use crate::algebra::{AlgebraError, MatrixRep};
use crate::deformation::{DeformationError, SweepResult};
use crate::poisson::PoissonError;
use crate::prequant::PrequantError;
use crate::scalar::Rational;
use crate::symplectic::SymplecticError;

pub use config::{
    DeformationSpec, GridSpec, GroupoidSpec, HbarSpec, Outputs, PipelineConfig, PolarizationConfig, PotentialSpec,
    ScalarChoice,
};
pub use report::{Check, PipelineReport, Step, StepStatus, STEP_NAMES};

/// Environment variable overriding the residual tolerance.
pub const TOL_ENV: &str = "QUANTIZE_TOL";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl PipelineError {
    /// 2 for schema errors, 3 for unsupported input; I/O failures count as
    /// schema errors since they concern the paths the config names.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Schema(_) | PipelineError::Io(_) => 2,
            PipelineError::Unsupported(_) => 3,
        }
    }
}

impl From<PoissonError> for PipelineError {
    fn from(e: PoissonError) -> Self {
        match e {
            PoissonError::DegreeCapExceeded { .. } | PoissonError::Unsupported(_) | PoissonError::MixedClasses(..) => {
                PipelineError::Unsupported(e.to_string())
            }
            _ => PipelineError::Schema(e.to_string()),
        }
    }
}

impl From<PrequantError> for PipelineError {
    fn from(e: PrequantError) -> Self {
        match e {
            PrequantError::DimensionMismatch { .. } => PipelineError::Schema(e.to_string()),
            _ => PipelineError::Unsupported(e.to_string()),
        }
    }
}

impl From<SymplecticError> for PipelineError {
    fn from(e: SymplecticError) -> Self {
        match e {
            SymplecticError::Unsupported(_) => PipelineError::Unsupported(e.to_string()),
            _ => PipelineError::Schema(e.to_string()),
        }
    }
}

impl From<AlgebraError> for PipelineError {
    fn from(e: AlgebraError) -> Self {
        match e {
            AlgebraError::Unsupported(_) | AlgebraError::SupportCapExceeded { .. } => {
                PipelineError::Unsupported(e.to_string())
            }
            AlgebraError::Csv(m) => PipelineError::Io(m),
            _ => PipelineError::Schema(e.to_string()),
        }
    }
}

impl From<DeformationError> for PipelineError {
    fn from(e: DeformationError) -> Self {
        match e {
            DeformationError::Dimension(_) => PipelineError::Unsupported(e.to_string()),
            DeformationError::Algebra(a) => a.into(),
            DeformationError::Csv(m) => PipelineError::Io(m),
            DeformationError::InvalidGrid(_) => PipelineError::Schema(e.to_string()),
        }
    }
}

/// The verification suites, selectable with `check --only`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Module {
    Poisson,
    Groupoid,
    Potential,
    Polarization,
    Twist,
    Reduction,
    Algebra,
    Deformation,
}

impl Module {
    pub const ALL: [Module; 8] = [
        Module::Poisson,
        Module::Groupoid,
        Module::Potential,
        Module::Polarization,
        Module::Twist,
        Module::Reduction,
        Module::Algebra,
        Module::Deformation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Module::Poisson => "poisson",
            Module::Groupoid => "groupoid",
            Module::Potential => "potential",
            Module::Polarization => "polarization",
            Module::Twist => "twist",
            Module::Reduction => "reduction",
            Module::Algebra => "algebra",
            Module::Deformation => "deformation",
        }
    }

    pub fn parse(s: &str) -> Option<Module> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }
}

impl fmt::Display for Module {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Floating-point residuals of algebraic identities. Exact arithmetic
    /// is always held to zero.
    pub residual: f64,
    /// `|hol − e^{−2πiy}|` for quadrature holonomies.
    pub holonomy: f64,
    /// Distance of detected Bohr–Sommerfeld levels from the integers.
    pub bs_set: f64,
    /// Relative gap between a truncated norm and the sampled sup-norm.
    pub gelfand: f64,
    /// Allowed deviation of the fitted order from 2 for monomial pairs.
    pub order: f64,
    /// Defect bound at the smallest ħ for general trig polynomials.
    pub defect: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            residual: 1e-10,
            holonomy: 1e-8,
            bs_set: 1e-6,
            gelfand: 0.02,
            order: 0.1,
            defect: 1e-3,
        }
    }
}

impl Tolerances {
    /// Defaults, then the config's `tolerances.residual`, then `QUANTIZE_TOL`.
    pub fn resolve(cfg: &PipelineConfig) -> Result<Self, PipelineError> {
        let mut t = Tolerances::default();
        if let Some(r) = cfg.residual_tol {
            t.residual = r;
        }
        if let Ok(text) = env::var(TOL_ENV) {
            t.residual = text
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite() && *x >= 0.0)
                .ok_or_else(|| PipelineError::Schema(format!("{TOL_ENV}={text:?} is not a non-negative number")))?;
        }
        if !(t.residual.is_finite() && t.residual >= 0.0) {
            return Err(PipelineError::Schema("tolerances.residual must be a non-negative number".into()));
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Quantize,
    Check { only: Option<Module> },
    Sweep,
}

impl Mode {
    pub fn tag(self) -> &'static str {
        match self {
            Mode::Quantize => "quantize",
            Mode::Check { .. } => "check",
            Mode::Sweep => "sweep",
        }
    }
}

/// A finished run: the report plus artifacts the caller may write out.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: PipelineReport,
    pub sweep: Option<SweepResult>,
    pub matrices: Option<MatrixRep>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        self.report.exit_code()
    }
}

/// Run with tolerances from the config and environment.
pub fn run(cfg: &PipelineConfig, mode: Mode) -> Result<Outcome, PipelineError> {
    run_with(cfg, mode, Tolerances::resolve(cfg)?)
}

pub fn run_with(cfg: &PipelineConfig, mode: Mode, tol: Tolerances) -> Result<Outcome, PipelineError> {
    match cfg.scalar {
        ScalarChoice::Exact => flow::execute::<Rational>(cfg, mode, tol),
        ScalarChoice::Float => flow::execute::<f64>(cfg, mode, tol),
    }
}
