use std::f64::consts::PI;

use nalgebra::DVector;
use rand::Rng;
use rustfft::FftPlanner;

use crate::covariant_povm::povm::PovmElements;
use crate::grid::{normalize, Grid, MomentumGrid, WaveFunction};
use crate::{Error, Result, C64};

/// Tolerance on `Tr ρ = 1`.
pub const TRACE_TOL: f64 = 1e-8;

/// Pure or mixed state on a lattice.
#[derive(Clone, Debug)]
pub enum State {
    Pure(WaveFunction),
    /// Convex mixture `Σ w_k |ψ_k⟩⟨ψ_k|`.
    Mixed(Vec<(f64, WaveFunction)>),
}

impl State {
    fn components(&self) -> Vec<(f64, &WaveFunction)> {
        match self {
            State::Pure(psi) => vec![(1.0, psi)],
            State::Mixed(parts) => parts.iter().map(|(w, psi)| (*w, psi)).collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        self.components().iter().map(|(w, psi)| w * psi.norm().powi(2)).sum()
    }

    fn validate(&self) -> Result<()> {
        let parts = self.components();
        if parts.is_empty() {
            return Err(Error::InvalidState("mixture has no components".into()));
        }
        if parts.iter().any(|(w, _)| !(*w >= 0.0)) {
            return Err(Error::InvalidState("mixture weights must be nonnegative".into()));
        }
        let trace = self.trace();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("state has trace {trace}, expected 1")));
        }
        Ok(())
    }
}

impl From<WaveFunction> for State {
    fn from(psi: WaveFunction) -> Self {
        State::Pure(psi)
    }
}

/// Born-rule density per unit momentum on the outcome bins of `povm`.
pub fn probability_distribution(state: &State, povm: &impl PovmElements) -> Result<Vec<f64>> {
    state.validate()?;
    let mut total = vec![0.0; povm.momenta().len()];
    for (w, psi) in state.components() {
        for (t, rho) in total.iter_mut().zip(povm.densities(psi)?) {
            *t += w * rho;
        }
    }
    Ok(total)
}

/// `Φ(x) = Σ_j e^{ixp_j} ρ_j dp`.
pub fn characteristic_from_density(density: &[f64], momenta: &MomentumGrid, x: f64) -> C64 {
    let step = C64::from_polar(1.0, x * momenta.dp());
    let mut phase = C64::from_polar(1.0, x * momenta.p(0));
    let mut acc = C64::new(0.0, 0.0);
    for &rho in density {
        acc += phase * rho;
        phase *= step;
    }
    acc * momenta.dp()
}

/// Characteristic function of the outcome distribution at displacement
/// `x`, which must be a multiple of the grid spacing.
pub fn characteristic_function(state: &State, povm: &impl PovmElements, x: f64) -> Result<C64> {
    let dx = povm.grid().dx();
    if ((x / dx) - (x / dx).round()).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("displacement {x} is not a multiple of dx")));
    }
    let density = probability_distribution(state, povm)?;
    Ok(characteristic_from_density(&density, povm.momenta(), x))
}

/// `Φ_*(k dx) = Σ_μ ‖ψ_μ‖ ‖ψ_{μ-k}‖ dx`, the bound on `Re Φ`; indices
/// outside the grid contribute zero.
pub fn phi_star(psi: &WaveFunction, k: i64) -> f64 {
    let n = psi.grid().len() as i64;
    let mut acc = 0.0;
    for mu in 0..n {
        let nu = mu - k;
        if (0..n).contains(&nu) {
            acc += psi.fiber_norm(mu as usize) * psi.fiber_norm(nu as usize);
        }
    }
    acc * psi.grid().dx()
}

/// `|(1/√2π) Σ_x ψ_x e^{-ipx} dx|²` on the DFT-conjugate momentum grid,
/// computed with an FFT (scalar fiber).
pub fn fourier_density(psi: &WaveFunction) -> Result<(MomentumGrid, Vec<f64>)> {
    if psi.fiber_dim() != 1 {
        return Err(Error::Shape("Fourier density needs a scalar wave function".into()));
    }
    let grid = psi.grid();
    let n = grid.len();
    let momenta = MomentumGrid::nyquist(grid);
    let mut buf: Vec<C64> = psi.amplitudes().iter().copied().collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let dx = grid.dx();
    let density = (0..momenta.len())
        .map(|j| {
            let p = momenta.p(j);
            let bin = (momenta.j_min() + j as i64).rem_euclid(n as i64) as usize;
            // forward FFT gives Σ ψ_i e^{-2πi i·bin/n}; restore the x_min offset
            let z = buf[bin] * C64::from_polar(1.0, -p * grid.x_min());
            z.norm_sqr() * dx * dx / (2.0 * PI)
        })
        .collect();
    Ok((momenta, density))
}

/// Normalized sum of three Gaussian wave packets with random centers in
/// the middle half of the domain, widths in `[0.5, 1.5)`, momenta in
/// `[-1, 1)` and random complex fiber vectors.
pub fn random_state(grid: &Grid, fiber_dim: usize, rng: &mut impl Rng) -> Result<WaveFunction> {
    let (lo, hi) = (grid.x_min() + 0.25 * grid.extent(), grid.x_min() + 0.75 * grid.extent());
    let mut amps = DVector::<C64>::zeros(grid.len() * fiber_dim);
    for _ in 0..3 {
        let center = rng.random_range(lo..hi);
        let width = rng.random_range(0.5..1.5);
        let k = rng.random_range(-1.0..1.0);
        let fiber: Vec<C64> =
            (0..fiber_dim).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        for i in 0..grid.len() {
            let x = grid.x(i);
            let envelope = C64::from_polar((-(x - center).powi(2) / (4.0 * width * width)).exp(), k * x);
            for (a, f) in fiber.iter().enumerate() {
                amps[i * fiber_dim + a] += envelope * f;
            }
        }
    }
    normalize(&WaveFunction::new(grid.clone(), fiber_dim, amps)?)
}
