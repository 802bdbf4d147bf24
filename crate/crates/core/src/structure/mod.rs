//! Constitutive algebra: tensors, the canonical (p,δ)-stress, `F`, the
//! N-function `φ` with its shifts and conjugates, and empirical checkers for
//! the structure conditions.

mod check;
mod nfunction;
mod params;
mod probe;
mod stress;
mod tensor;

pub use check::{
    check_structure, check_structure_seeded, cubic_stress, sample_pairs, CheckConfig, StructureReport, Violation,
};
pub use nfunction::{PhiValues, ShiftedPhi};
pub use params::StructureParams;
pub use probe::{
    check_shift_change, check_young, check_young_derivative, equivalence_probe, equivalence_probe_seeded,
    field_catalog, field_equivalence, shift_change_conjugate_constant, shift_change_constant, young_constant,
    young_derivative_constant, Bracket, EquivalenceReport, FieldEquivalenceReport, FieldFn, InequalityReport,
    TensorField,
};
pub use stress::ZERO_STRAIN_CLAMP;
pub use tensor::{SymTensor, Tensor};

#[derive(Clone, Copy, Debug, PartialEq, thiserror::Error)]
pub enum StructureError {
    #[error("p must exceed 1 (got {0})")]
    InvalidExponent(f64),
    #[error("delta must be non-negative (got {0})")]
    InvalidDelta(f64),
    #[error("epsilon must be non-negative (got {0})")]
    InvalidEpsilon(f64),
    #[error("{what} must be non-negative (got {value})")]
    Domain { what: &'static str, value: f64 },
    #[error("derivative is singular at zero strain for delta = 0, p < 2")]
    Singular,
}
