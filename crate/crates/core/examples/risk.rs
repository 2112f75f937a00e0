//! Risk of the optimal kernel against random Gram kernels for a Gaussian
//! deviation function.

use qhalfline::covariant_povm::{random_gram_kernel, random_state, risk};
use qhalfline::{build_povm, make_grid, optimal_kernel, DeviationSpec, DomainKind, MomentumGrid, State};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qhalfline::Result<()> {
    let grid = make_grid(DomainKind::WholeLine, 10.0, 128)?;
    let momenta = MomentumGrid::nyquist(&grid);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let psi = random_state(&grid, 2, &mut rng)?;
    let dev = DeviationSpec::gaussian(1.0, 1.0);

    let optimal = build_povm(optimal_kernel(&psi), momenta.clone(), &grid)?;
    let state = State::from(psi);
    println!("optimal kernel  R = {:+.6}", risk(&optimal, &state, &dev)?);
    for k in 0..5 {
        let povm = build_povm(random_gram_kernel(&grid, 2, 4, 2.0, &mut rng)?, momenta.clone(), &grid)?;
        println!("random kernel {k} R = {:+.6}", risk(&povm, &state, &dev)?);
    }
    Ok(())
}
