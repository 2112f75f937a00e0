//! Numerical laboratory for optimal covariant measurement of momentum on a
//! half line.
//!
//! The crate follows one chain end to end on discretized 1D Hilbert spaces:
//!
//! * [`grid`]: lattices, wave functions, quadrature and plane-wave functionals.
//! * [`operators`]: momentum, position and Hamiltonian matrices, symmetry
//!   defects, ground states and a semi-analytic deficiency-index classifier.
//! * [`naimark`]: the two-sector extension `H+ ⊗ C²`, the sector-local
//!   reflection and the partial trace over the auxiliary qubit.
//! * [`covariant_povm`]: covariant POVMs generated by positive-definite
//!   kernels, Born-rule densities, characteristic functions, risk and the
//!   invariant-measure check.
//! * [`measurement`]: the impulsive-kick measurement model, Kraus operators,
//!   and the momentum distribution obtained on the half line.
//! * [`cli`]: configuration and batch commands behind the `qhalfline` binary.

pub mod cli;
pub mod covariant_povm;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod measurement;
pub mod naimark;
pub mod operators;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

pub use covariant_povm::{
    build_povm, optimal_kernel, CovariantPovm, DeviationSpec, Kernel, PovmElements, State,
};
pub use grid::{make_grid, DomainKind, Grid, MomentumGrid, WaveFunction};
pub use naimark::{ExtendedObject, Picture};
pub use operators::{Boundary, DenseOperator};
