//! Dirichlet ground state of the harmonic trap on the half line and its odd
//! continuation to the whole line.

use qhalfline::measurement::{odd_ground_state, ModelParams};

fn main() -> qhalfline::Result<()> {
    let params = ModelParams::harmonic(1.0, 1.0, 1.0, 0.0);
    let grid = params.default_half_grid(1024)?;
    let ground = odd_ground_state(&params, &grid)?;
    println!("energy {:.6} (odd oscillator level 1.5)", ground.energy);
    let whole = &ground.whole;
    let n = whole.grid().len();
    for i in (n / 2 - 20..=n / 2 + 20).step_by(10) {
        println!("x = {:+.3}  psi = {:+.6}", whole.grid().x(i), whole.amplitudes()[i].re);
    }
    Ok(())
}
