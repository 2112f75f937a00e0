//! Momentum distribution produced by the measurement model for a plane wave,
//! compared with the closed form, and its narrowing as the trap opens.

use qhalfline::measurement::{analytic_distribution, conservation_and_limit_check, measured_distribution, ModelParams};

fn main() -> qhalfline::Result<()> {
    let params = ModelParams::harmonic(1.0, 1.0, 1.0, 2.0);
    let grid = params.default_half_grid(1024)?;
    let dist = measured_distribution(&params, &grid)?;
    let (lo, hi) = dist.peaks(params.p_true);
    println!("peaks at {lo:.3} and {hi:.3}, mean {:.4}, variance {:.4}", dist.mean(), dist.variance());
    for p in [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5] {
        println!("p = {p:.1}  measured {:.5}  closed form {:.5}", dist.density_at(p), analytic_distribution(p, &params)?);
    }

    let sweep = conservation_and_limit_check(&params, &[1.0, 0.25, 0.0625], 1024)?;
    for row in &sweep.rows {
        println!("omega {:<7} variance {:.5}", row.omega, row.variance);
    }
    println!("variance = {:.4} omega + {:.1e}", sweep.slope, sweep.intercept);
    Ok(())
}
