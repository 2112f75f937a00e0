//! Covariant POVMs generated by positive-definite kernels.
//!
//! An element is `M_j[x,x'] = K(x,x') e^{i(x-x')p_j} dx dp/2π` in the
//! orthonormal lattice basis. On the DFT-conjugate outcome grid the phase
//! sums are exact Kronecker deltas, so completeness holds to roundoff for
//! any kernel with unit diagonal.

mod born;
mod kernel;
mod lemma;
mod povm;
mod risk;

pub use born::{
    characteristic_from_density, characteristic_function, fourier_density, phi_star,
    probability_distribution, random_state, State, TRACE_TOL,
};
pub use kernel::{optimal_kernel, random_gram_kernel, Kernel, DIAGONAL_TOL, INDEFINITE_TOL};
pub use lemma::{lemma1_check, Lemma1Result};
pub use povm::{
    build_povm, covariance_defect, element_report, CovariantPovm, ElementReport, PovmElements,
    BOUNDARY_FRACTION, COMPLETENESS_TOL,
};
pub use risk::{risk, risk_from_density, DeviationSpec, ROUTE_AGREEMENT_TOL};
