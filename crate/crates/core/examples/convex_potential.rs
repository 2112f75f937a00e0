//! Quartic trap: the measured density is the ground-state momentum density
//! shifted to the plane-wave momentum.

use std::f64::consts::PI;

use qhalfline::covariant_povm::fourier_density;
use qhalfline::measurement::{convex_potential_distribution, ModelParams, Potential, Window};
use qhalfline::{make_grid, DomainKind};

fn main() -> qhalfline::Result<()> {
    let shift = 40;
    let params = ModelParams {
        potential: Potential::Quartic { strength: 0.25 },
        p_true: shift as f64 * 2.0 * PI / 160.0,
        window: Window::Gaussian { sigma: 30.0 },
        ..ModelParams::harmonic(1.0, 1.0, 1.0, 0.0)
    };
    let grid = make_grid(DomainKind::HalfLine, 80.0, 800)?;
    let dist = convex_potential_distribution(&params, &grid)?;
    let (_, spectrum) = fourier_density(dist.ground())?;
    let n = spectrum.len() as i64;
    let worst = (0..n)
        .map(|j| (dist.density[j as usize] - spectrum[(j - shift).rem_euclid(n) as usize]).abs())
        .fold(0.0, f64::max);
    let (lo, hi) = dist.peaks(params.p_true);
    println!("p_true {:.4}, peaks {lo:.3} / {hi:.3}", params.p_true);
    println!("max deviation from shifted ground-state density {worst:.2e}");
    Ok(())
}
