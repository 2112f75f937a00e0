//! The kick-and-project Kraus family reproduces the optimal covariant POVM
//! of the half-line ground state.

use qhalfline::measurement::{kraus_equivalence, povm_from_kraus, system_hamiltonian, KrausFamily, ModelParams};
use qhalfline::operators::ground_state;
use qhalfline::{build_povm, make_grid, optimal_kernel, DomainKind, MomentumGrid};

fn main() -> qhalfline::Result<()> {
    let params = ModelParams::harmonic(1.0, 1.0, 0.5, 0.0);
    let grid = make_grid(DomainKind::HalfLine, 10.0, 96)?;
    let ham = system_hamiltonian(&params, &grid)?;
    let (_, ground) = ground_state(&ham)?;
    let momenta = MomentumGrid::nyquist(&grid);
    let optimal = build_povm(optimal_kernel(&ground), momenta.clone(), &grid)?;
    let family = KrausFamily::new(&ham, &ground, params.coupling, momenta)?;
    let report = kraus_equivalence(&povm_from_kraus(family), &optimal)?;
    println!("outcome map p = {:+} g P", report.sign);
    println!("max elementwise deviation {:.2e}", report.max_deviation);
    println!("opposite sign deviation   {:.2e}", report.other_sign_deviation);
    Ok(())
}
