use std::f64::consts::PI;

use crate::covariant_povm::born::{characteristic_from_density, probability_distribution, State};
use crate::covariant_povm::povm::PovmElements;
use crate::grid::MomentumGrid;
use crate::{Error, Result, C64};

/// Agreement required between the momentum-space and displacement-space
/// forms of the risk.
pub const ROUTE_AGREEMENT_TOL: f64 = 1e-8;
const EVENNESS_TOL: f64 = 1e-12;
/// Gaussian `W̃` is truncated at this many standard deviations.
const CUTOFF_SIGMAS: f64 = 12.0;

/// Even finite measure `W̃(dx) = weight · N(x; center, σ²) dx`, inducing
/// `W(p) = -∫ e^{ipx} W̃(dx)`. `sigma = 0` is a point mass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeviationSpec {
    pub sigma: f64,
    pub weight: f64,
    pub center: f64,
}

impl DeviationSpec {
    pub fn gaussian(sigma: f64, weight: f64) -> Self {
        Self { sigma, weight, center: 0.0 }
    }

    pub fn point_mass(weight: f64) -> Self {
        Self { sigma: 0.0, weight, center: 0.0 }
    }

    /// Density of `W̃` at `x`.
    pub fn w_tilde(&self, x: f64) -> f64 {
        let z = (x - self.center) / self.sigma;
        self.weight * (-0.5 * z * z).exp() / (self.sigma * (2.0 * PI).sqrt())
    }

    /// `W(p)` for an even measure.
    pub fn w(&self, p: f64) -> f64 {
        -self.weight * (-0.5 * self.sigma * self.sigma * p * p).exp()
    }

    /// Rejects negative scales and measures that are not even on the
    /// displacement lattice `k·dx`.
    pub fn validate(&self, dx: f64) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) || !(self.weight >= 0.0 && self.weight.is_finite()) {
            return Err(Error::InvalidDeviation("sigma and weight must be finite and nonnegative".into()));
        }
        if self.sigma == 0.0 {
            if self.center != 0.0 {
                return Err(Error::InvalidDeviation("point mass must sit at the origin".into()));
            }
            return Ok(());
        }
        let peak = self.weight / (self.sigma * (2.0 * PI).sqrt());
        let reach = self.center.abs() + CUTOFF_SIGMAS * self.sigma;
        let kmax = (reach / dx).ceil() as i64;
        for k in 0..=kmax {
            let x = k as f64 * dx;
            let asym = (self.w_tilde(x) - self.w_tilde(-x)).abs();
            if asym > EVENNESS_TOL * peak.max(1.0) {
                return Err(Error::InvalidDeviation(format!(
                    "W~ is not even: asymmetry {asym:e} at x = {x}"
                )));
            }
        }
        Ok(())
    }
}

/// `Σ_j W(p_j) ρ_j dp`.
fn momentum_route(density: &[f64], momenta: &MomentumGrid, dev: &DeviationSpec) -> f64 {
    density.iter().enumerate().map(|(j, rho)| dev.w(momenta.p(j)) * rho).sum::<f64>() * momenta.dp()
}

/// `-Σ_k Re Φ(k dx) W̃(k dx) dx` over the truncated support.
fn displacement_route(density: &[f64], momenta: &MomentumGrid, dev: &DeviationSpec, dx: f64) -> f64 {
    if dev.sigma == 0.0 {
        let phi0 = characteristic_from_density(density, momenta, 0.0);
        return -dev.weight * phi0.re;
    }
    let kmax = (CUTOFF_SIGMAS * dev.sigma / dx).ceil() as i64;
    let mut acc = 0.0;
    for k in -kmax..=kmax {
        let x = k as f64 * dx;
        let phi: C64 = characteristic_from_density(density, momenta, x);
        acc += phi.re * dev.w_tilde(x);
    }
    -acc * dx
}

/// Risk at zero true momentum from a precomputed density, both routes.
pub fn risk_from_density(
    density: &[f64],
    momenta: &MomentumGrid,
    dev: &DeviationSpec,
    dx: f64,
) -> Result<f64> {
    dev.validate(dx)?;
    let a = momentum_route(density, momenta, dev);
    let b = displacement_route(density, momenta, dev, dx);
    if (a - b).abs() > ROUTE_AGREEMENT_TOL * a.abs().max(1.0) {
        return Err(Error::NumericalFailure(format!(
            "risk routes disagree: {a} (momentum) vs {b} (displacement)"
        )));
    }
    Ok(a)
}

/// `R₀{M} = ∫ W(p) μ_ρ(dp) = -∫ Φ_ρ(x) W̃(dx)`, with both forms evaluated
/// and cross-checked.
pub fn risk(povm: &impl PovmElements, state: &State, dev: &DeviationSpec) -> Result<f64> {
    dev.validate(povm.grid().dx())?;
    let density = probability_distribution(state, povm)?;
    risk_from_density(&density, povm.momenta(), dev, povm.grid().dx())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariant_povm::kernel::{optimal_kernel, random_gram_kernel, Kernel};
    use crate::covariant_povm::povm::build_povm;
    use crate::grid::{make_grid, normalize, DomainKind, WaveFunction};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn point_mass_risk_is_minus_weight() {
        let g = make_grid(DomainKind::WholeLine, 6.0, 64).unwrap();
        let psi = normalize(&WaveFunction::from_fn(&g, |x| C64::new((-x * x).exp(), 0.2 * x))).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let kernels = [
            Kernel::all_ones(64),
            Kernel::identity(64, 1),
            random_gram_kernel(&g, 1, 4, 1.0, &mut rng).unwrap(),
        ];
        for k in kernels {
            let povm = build_povm(k, MomentumGrid::nyquist(&g), &g).unwrap();
            let r = risk(&povm, &State::Pure(psi.clone()), &DeviationSpec::point_mass(2.5)).unwrap();
            assert!((r + 2.5).abs() < 1e-10);
        }
    }

    #[test]
    fn gaussian_risk_matches_closed_form() {
        let g = make_grid(DomainKind::WholeLine, 15.0, 512).unwrap();
        let (s, k0, w0) = (0.7, 0.8, 1.3);
        let psi = normalize(&WaveFunction::from_fn(&g, |x| {
            C64::from_polar((-x * x / (4.0 * s * s)).exp(), k0 * x)
        }))
        .unwrap();
        let povm = build_povm(Kernel::all_ones(512), MomentumGrid::nyquist(&g), &g).unwrap();
        for sigma in [0.5, 1.0, 2.0] {
            let r = risk(&povm, &State::Pure(psi.clone()), &DeviationSpec::gaussian(sigma, w0)).unwrap();
            let sp2 = 1.0 / (4.0 * s * s);
            let q = 1.0 + sp2 * sigma * sigma;
            let exact = -w0 * (-k0 * k0 * sigma * sigma / (2.0 * q)).exp() / q.sqrt();
            assert!((r - exact).abs() < 1e-4, "sigma {sigma}: {r} vs {exact}");
        }
    }

    #[test]
    fn optimal_kernel_beats_random_kernels() {
        let g = make_grid(DomainKind::WholeLine, 8.0, 96).unwrap();
        let psi = normalize(&WaveFunction::from_fn(&g, |x| {
            C64::from_polar((-x * x / 2.0).exp() * (1.0 + 0.2 * x), 0.5 * x + 0.1 * x * x)
        }))
        .unwrap();
        let state = State::Pure(psi.clone());
        let dev = DeviationSpec::gaussian(1.0, 1.0);
        let best = risk(&build_povm(optimal_kernel(&psi), MomentumGrid::nyquist(&g), &g).unwrap(), &state, &dev)
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let k = random_gram_kernel(&g, 1, 4, 1.0, &mut rng).unwrap();
            let r = risk(&build_povm(k, MomentumGrid::nyquist(&g), &g).unwrap(), &state, &dev).unwrap();
            assert!(best < r - 1e-10);
        }
    }

    #[test]
    fn uneven_deviation_is_rejected() {
        let dev = DeviationSpec { sigma: 1.0, weight: 1.0, center: 0.3 };
        assert!(matches!(dev.validate(0.1), Err(Error::InvalidDeviation(_))));
        assert!(DeviationSpec::gaussian(1.0, 1.0).validate(0.1).is_ok());
        assert!(matches!(DeviationSpec::gaussian(-1.0, 1.0).validate(0.1), Err(Error::InvalidDeviation(_))));
    }
}
