//! Fully implicit space-time finite elements for nonlinear parabolic systems
//!
//! ```text
//!     ∂u/∂t − div S(Du) = f   in (0,T) × Ω,     u = 0 on ∂Ω,
//! ```
//!
//! where the stress `S` has (p,δ)-structure. The crate is `no_std` (it needs
//! `alloc`) and is split along the lines of the numerical method:
//!
//! * [`structure`]: tensors, the canonical stress, its derivative, the `F`
//!   map, the N-function `φ` and its shifts, plus empirical checkers for the
//!   structure conditions and the equivalences between them.
//! * [`mesh`]: structured simplicial meshes of the unit square with
//!   shape-regularity bookkeeping, red refinement and element patches.
//! * [`fe`]: vector-valued P1 spaces with homogeneous Dirichlet dofs,
//!   quadrature, assembly, nodal and Clément-type interpolation, error norms
//!   and interpolation studies.
//! * [`linalg`]: CSR matrices and an envelope Cholesky factorization.
//! * [`stepper`]: backward Euler with a damped Newton solve of the convex
//!   step energy per time step.
//! * [`harness`]: manufactured solutions, forcing, convergence studies, the
//!   Bochner averaging check and rate fitting.
#![no_std]

extern crate alloc;

pub mod fe;
pub mod harness;
pub mod linalg;
pub(crate) mod math;
pub mod mesh;
pub mod rng;
pub mod stepper;
pub mod structure;

pub use fe::{FeFunction, FeSpace, QuadratureRule};
pub use harness::{ConvergenceTable, ManufacturedSolution, StudyConfig};
pub use mesh::Mesh;
pub use stepper::{TimeGrid, Trajectory};
pub use structure::{StructureParams, SymTensor, Tensor};
