//! Vector-valued P1 finite elements on triangle meshes: spaces with
//! Dirichlet dofs, quadrature, assembly, interpolation operators, error
//! functionals and interpolation studies.

mod assembly;
mod fields;
mod interp;
mod norms;
mod quadrature;
mod space;
mod study;

pub use assembly::{
    assemble_load, assemble_mass, assemble_sym_stiffness, l2_project, solve_with_boundary, BoundaryMode,
};
pub(crate) use assembly::{sym_basis, sym_dot};
pub use fields::{PointSingularity, SineSeries, VectorField};
pub use interp::{
    clement_stability_constant, interpolate_clement, interpolate_lagrange, inverse_estimate_constant,
    CLEMENT_QUAD_DEGREE,
};
pub use norms::{error_f, error_gradient_lr, error_l2, error_lr, f_norm_sq, norm_l2, stress_power};
pub use quadrature::{gauss_legendre, QuadratureRule};
pub use space::{FeFunction, FeSpace, COMPONENTS};
pub use study::{
    compact_embedding, f_interpolation_check, interpolation_study, max_embedding_order, predicted_exponent,
    study_field, FInterpolationReport, InterpolationStudy, RateRow, RateTable, DIM,
};

use crate::linalg::LinalgError;

/// Quadrature degree for error functionals and load vectors.
pub const DEFAULT_QUAD_DEGREE: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, thiserror::Error)]
pub enum FeError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("W^{{{ell},{q}}} is not compactly embedded in W^{{{m},{r}}} in two dimensions (or l outside 1..=2)")]
    InvalidEmbedding { ell: usize, m: usize, q: f64, r: f64 },
    #[error("rate fit needs at least two levels with positive errors")]
    DegenerateStudy,
}
