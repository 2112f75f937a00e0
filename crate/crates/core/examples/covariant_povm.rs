//! Builds the optimal covariant POVM for the whole-line oscillator ground
//! state and checks it against the Fourier density of a wave packet.

use qhalfline::covariant_povm::{element_report, fourier_density, probability_distribution};
use qhalfline::grid::normalize;
use qhalfline::operators::{ground_state, harmonic_hamiltonian};
use qhalfline::{build_povm, make_grid, optimal_kernel, DomainKind, MomentumGrid, State, WaveFunction, C64};

fn main() -> qhalfline::Result<()> {
    let grid = make_grid(DomainKind::WholeLine, 10.0, 128)?;
    let (_, ground) = ground_state(&harmonic_hamiltonian(&grid, 1.0, 1.0)?)?;
    let povm = build_povm(optimal_kernel(&ground), MomentumGrid::nyquist(&grid), &grid)?;

    let report = element_report(&povm)?;
    println!("max hermiticity defect {:.1e}", report.max_hermiticity_defect);
    println!("min element eigenvalue {:.1e}", report.min_eigenvalue);
    println!("completeness residual  {:.1e}", report.completeness_residual);

    let packet = normalize(&WaveFunction::from_fn(&grid, |x| C64::from_polar((-(x - 1.0).powi(2) / 2.0).exp(), 1.5 * x)))?;
    let measured = probability_distribution(&State::from(packet.clone()), &povm)?;
    let (_, oracle) = fourier_density(&packet)?;
    let worst = measured.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("max deviation from |FT psi|^2: {worst:.1e}");
    Ok(())
}
