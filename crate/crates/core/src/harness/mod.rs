//! Verification harness: manufactured solutions, convergence studies in
//! space, time and along the coupled refinement path, the Bochner averaging
//! check, and log-log rate fitting.

mod bochner;
mod mms;
mod rates;
mod study;

use alloc::string::String;

pub use bochner::{bochner_check, l2_sampling, BochnerReport, TimeProfile};
pub use mms::{forcing, ManufacturedSolution, MmsKind};
pub use rates::{fit_rates, fit_rates_with_floor, RateFit, Rates};
pub use study::{
    run_level, run_study, ConvergenceTable, Headline, LevelPlan, LevelResult, Quantity, Scale, StudyConfig, StudyKind,
    StudySlopes, EXACT_FLOOR,
};

use crate::stepper::StepperError;
use crate::structure::StructureError;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("level {level}: coupling h^(4/p') <= sigma0 * kappa violated ({lhs:e} > {rhs:e})")]
    Coupling { level: usize, lhs: f64, rhs: f64 },
    #[error("forcing: {0}")]
    Forcing(StructureError),
    #[error("level {level}: {source}")]
    Solver { level: usize, source: StepperError },
    #[error("rate fit: {0}")]
    DegenerateFit(&'static str),
}
