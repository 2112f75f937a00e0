//! Impulsive-kick measurement of the half-line momentum.
//!
//! The system interacts with a probe through `g P x δ(t)` and then relaxes
//! to its ground state. With the probe prepared in a momentum eigenstate
//! `|P̃⟩`, the Kraus operator is `A(P̃) = |ψ₀⟩⟨ψ₀| e^{-igP̃x}`, and the
//! outcome `p = gP̃` is read off the probe.
//!
//! On the half line the ground state is odd about the origin once the
//! negative sector of `H+ ⊗ C²` is glued on, so the measured density is
//! computed coherently on the glued whole line.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::covariant_povm::{CovariantPovm, PovmElements};
use crate::grid::{make_grid, DomainKind, Grid, MomentumGrid, WaveFunction};
use crate::naimark::ExtendedState;
use crate::operators::{ground_state, potential_hamiltonian, Boundary, DenseOperator};
use crate::{Error, Result, C64};

/// Largest accepted `‖Hψ - Eψ‖_max` for a ground state.
pub const GROUND_RESIDUAL_TOL: f64 = 1e-6;
/// Default Gaussian window width in units of `1/√(mω)`.
pub const DEFAULT_WINDOW_WIDTHS: f64 = 8.0;
/// Default half-line extent in units of `1/√(mω)`.
pub const DEFAULT_LENGTH_WIDTHS: f64 = 20.0;

#[derive(Clone, Copy, Debug)]
pub enum Potential {
    /// `mω²x²/2`.
    Harmonic,
    /// `strength · x⁴`.
    Quartic { strength: f64 },
    /// `V = 0`; the box walls confine the particle.
    Flat,
    Custom(fn(f64) -> f64),
}

/// Envelope making the plane wave normalizable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Window {
    /// `|φ(x)|² ∝ exp(-(x-c)²/(2σ²))` about the domain midpoint.
    Gaussian { sigma: f64 },
    /// Constant amplitude over the whole grid.
    Hard,
}

#[derive(Clone, Copy, Debug)]
pub struct ModelParams {
    pub mass: f64,
    /// Enters only through a global phase.
    pub probe_mass: f64,
    pub omega: f64,
    pub coupling: f64,
    pub potential: Potential,
    pub p_true: f64,
    pub window: Window,
}

impl ModelParams {
    /// Harmonic trap with the default window `σ_w = 8/√(mω)`.
    pub fn harmonic(mass: f64, omega: f64, coupling: f64, p_true: f64) -> Self {
        let sigma = DEFAULT_WINDOW_WIDTHS / (mass * omega).sqrt();
        Self {
            mass,
            probe_mass: 1.0,
            omega,
            coupling,
            potential: Potential::Harmonic,
            p_true,
            window: Window::Gaussian { sigma },
        }
    }

    /// Oscillator length `1/√(mω)`, or 1 without a trap.
    pub fn length_scale(&self) -> f64 {
        if self.omega > 0.0 {
            1.0 / (self.mass * self.omega).sqrt()
        } else {
            1.0
        }
    }

    pub fn potential_at(&self, x: f64) -> f64 {
        match self.potential {
            Potential::Harmonic => 0.5 * self.mass * self.omega * self.omega * x * x,
            Potential::Quartic { strength } => strength * x.powi(4),
            Potential::Flat => 0.0,
            Potential::Custom(f) => f(x),
        }
    }

    /// Checks parameter ranges and convexity of the potential on `grid`.
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err(Error::InvalidParameter(format!("mass must be positive, got {}", self.mass)));
        }
        if !(self.probe_mass.is_finite() && self.probe_mass > 0.0) {
            return Err(Error::InvalidParameter("probe mass must be positive".into()));
        }
        if !(self.omega.is_finite() && self.omega >= 0.0) {
            return Err(Error::InvalidParameter(format!("omega must be non-negative, got {}", self.omega)));
        }
        if !self.coupling.is_finite() || self.coupling == 0.0 {
            return Err(Error::InvalidParameter("coupling must be finite and nonzero".into()));
        }
        if !self.p_true.is_finite() {
            return Err(Error::InvalidParameter("p_true must be finite".into()));
        }
        if let Potential::Quartic { strength } = self.potential {
            if !(strength.is_finite() && strength >= 0.0) {
                return Err(Error::InvalidParameter("quartic strength must be non-negative".into()));
            }
        }
        let v: Vec<f64> = grid.points().into_iter().map(|x| self.potential_at(x)).collect();
        if v.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidParameter("potential is not finite on the grid".into()));
        }
        for k in 1..v.len() - 1 {
            let second = v[k - 1] - 2.0 * v[k] + v[k + 1];
            let scale = 1e-12 * (1.0 + v[k].abs());
            if second < -scale {
                return Err(Error::InvalidParameter(format!(
                    "potential is not convex near x = {}",
                    grid.x(k)
                )));
            }
        }
        Ok(())
    }

    /// Half-line grid of extent `20/√(mω)` with `n` points.
    pub fn default_half_grid(&self, n: usize) -> Result<Grid> {
        make_grid(DomainKind::HalfLine, DEFAULT_LENGTH_WIDTHS * self.length_scale(), n)
    }
}

/// System Hamiltonian `p²/2m + V`; Dirichlet at the origin on a half line.
pub fn system_hamiltonian(params: &ModelParams, grid: &Grid) -> Result<DenseOperator> {
    params.validate(grid)?;
    let boundary = match grid.kind() {
        DomainKind::HalfLine => Boundary::DirichletAtZero,
        DomainKind::WholeLine => Boundary::Free,
    };
    potential_hamiltonian(grid, params.mass, |x| params.potential_at(x), boundary)
}

/// `e^{-igP̃x}` as a diagonal operator.
pub fn kick_unitary(coupling: f64, probe_momentum: f64, grid: &Grid) -> Result<DenseOperator> {
    let q = coupling * probe_momentum;
    grid.check_momentum(q)?;
    let diag = DVector::from_iterator(grid.len(), grid.points().into_iter().map(|x| C64::from_polar(1.0, -q * x)));
    DenseOperator::new(DMatrix::from_diagonal(&diag), grid.clone(), Boundary::Free, "kick")
}

/// Lattice coefficients `ψ√dx` of a verified ground state.
fn checked_ground(ham: &DenseOperator, ground: &WaveFunction) -> Result<DVector<C64>> {
    let h_psi = ham.apply(ground)?;
    let norm_sq = ground.amplitudes().norm_squared();
    if norm_sq == 0.0 {
        return Err(Error::DegenerateState("ground state is zero".into()));
    }
    let energy = (ground.amplitudes().dotc(h_psi.amplitudes()) / norm_sq).re;
    let residual = ham.eigen_residual(ground, energy)?;
    if residual > GROUND_RESIDUAL_TOL {
        return Err(Error::InvalidGround { residual, tolerance: GROUND_RESIDUAL_TOL });
    }
    let c = ground.basis_coefficients();
    let n = c.norm();
    Ok(c / C64::new(n, 0.0))
}

/// `A(P̃) = |ψ₀⟩⟨ψ₀| e^{-igP̃x}` in the orthonormal lattice basis.
pub fn kraus_operator(
    ham: &DenseOperator,
    ground: &WaveFunction,
    coupling: f64,
    probe_momentum: f64,
) -> Result<DMatrix<C64>> {
    let c = checked_ground(ham, ground)?;
    let kick = kick_unitary(coupling, probe_momentum, ground.grid())?;
    Ok(&c * c.adjoint() * kick.matrix())
}

/// Kraus operators `A_j = A(p_j/g)` on an outcome grid `p_j = gP̃_j`.
///
/// As a POVM (see [`povm_from_kraus`]) the family is read in the fiber-normalized frame: the entry
/// `(A_j†A_j)[x,x']` is divided by `|ψ₀(x)||ψ₀(x')|` and weighted by
/// `dx dp/2π`. Points where the ground state vanishes are singular in
/// that frame and fall back to the identity, as for the optimal kernel.
#[derive(Clone, Debug)]
pub struct KrausFamily {
    grid: Grid,
    coeffs: DVector<C64>,
    coupling: f64,
    momenta: MomentumGrid,
    singular: Vec<usize>,
}

impl KrausFamily {
    pub fn new(ham: &DenseOperator, ground: &WaveFunction, coupling: f64, momenta: MomentumGrid) -> Result<Self> {
        if !coupling.is_finite() || coupling == 0.0 {
            return Err(Error::InvalidParameter("coupling must be finite and nonzero".into()));
        }
        let coeffs = checked_ground(ham, ground)?;
        momenta.check_against(ground.grid())?;
        let singular = (0..coeffs.len()).filter(|&k| coeffs[k].norm() <= f64::MIN_POSITIVE).collect();
        Ok(Self { grid: ground.grid().clone(), coeffs, coupling, momenta, singular })
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn singular_points(&self) -> &[usize] {
        &self.singular
    }

    /// Probe reading `P̃_j = p_j/g`.
    pub fn probe_momentum(&self, j: usize) -> f64 {
        self.momenta.p(j) / self.coupling
    }

    /// Dense `A_j`.
    pub fn operator(&self, j: usize) -> Result<DMatrix<C64>> {
        let kick = kick_unitary(self.coupling, self.probe_momentum(j), &self.grid)?;
        Ok(&self.coeffs * self.coeffs.adjoint() * kick.matrix())
    }

    /// `A_j†A_j = ‖c‖² w w†` with `w = U_j† c`.
    pub fn raw_element(&self, j: usize) -> Result<DMatrix<C64>> {
        let kick = kick_unitary(self.coupling, self.probe_momentum(j), &self.grid)?;
        let w = kick.matrix().adjoint() * &self.coeffs;
        Ok(&w * w.adjoint() * C64::new(self.coeffs.norm_squared(), 0.0))
    }
}

/// The POVM `M_j` built from a Kraus family.
#[derive(Clone, Debug)]
pub struct KrausPovm {
    family: KrausFamily,
}

pub fn povm_from_kraus(family: KrausFamily) -> KrausPovm {
    KrausPovm { family }
}

impl KrausPovm {
    pub fn family(&self) -> &KrausFamily {
        &self.family
    }
}

impl PovmElements for KrausPovm {
    fn grid(&self) -> &Grid {
        &self.family.grid
    }

    fn momenta(&self) -> &MomentumGrid {
        &self.family.momenta
    }

    fn element(&self, j: usize) -> Result<DMatrix<C64>> {
        let f = &self.family;
        let raw = f.raw_element(j)?;
        let n = f.grid.len();
        let scale = f.grid.dx() * f.momenta.dp() / (2.0 * PI);
        let mags: Vec<f64> = f.coeffs.iter().map(|z| z.norm()).collect();
        Ok(DMatrix::from_fn(n, n, |x, xp| {
            let singular = mags[x] <= f64::MIN_POSITIVE || mags[xp] <= f64::MIN_POSITIVE;
            if singular {
                C64::new(if x == xp { scale } else { 0.0 }, 0.0)
            } else {
                raw[(x, xp)] / (mags[x] * mags[xp]) * scale
            }
        }))
    }
}

/// Elementwise comparison of a Kraus POVM with a covariant POVM under the
/// outcome map `p = sign · gP̃`.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceReport {
    /// The sign with the smaller deviation.
    pub sign: i8,
    pub max_deviation: f64,
    /// Deviation for the opposite sign, for the record.
    pub other_sign_deviation: f64,
    pub singular_points: usize,
}

/// Compares every element of `family` with `optimal` at `±p_j`, skipping
/// rows and columns at singular points.
pub fn kraus_equivalence(povm: &KrausPovm, optimal: &CovariantPovm) -> Result<EquivalenceReport> {
    let family = &povm.family;
    if optimal.grid() != &family.grid {
        return Err(Error::Shape("Kraus family and POVM live on different grids".into()));
    }
    if (optimal.momenta().dp() - family.momenta.dp()).abs() > 1e-12 * family.momenta.dp() {
        return Err(Error::Shape("outcome grids have different spacing".into()));
    }
    let n = family.grid.len();
    let keep: Vec<usize> = (0..n).filter(|k| !family.singular.contains(k)).collect();
    let mut dev = [0.0f64; 2];
    for j in 0..family.momenta.len() {
        let m = povm.element(j)?;
        for (slot, sign) in [1.0, -1.0].into_iter().enumerate() {
            let target = optimal.element_at(sign * family.momenta.p(j));
            for &a in &keep {
                for &b in &keep {
                    dev[slot] = dev[slot].max((m[(a, b)] - target[(a, b)]).norm());
                }
            }
        }
    }
    let (sign, best, other) = if dev[0] <= dev[1] { (1, dev[0], dev[1]) } else { (-1, dev[1], dev[0]) };
    Ok(EquivalenceReport { sign, max_deviation: best, other_sign_deviation: other, singular_points: family.singular.len() })
}

/// Normalized windowed plane wave `e^{ip_true x}` on `grid`.
pub fn plane_wave_state(params: &ModelParams, grid: &Grid) -> Result<WaveFunction> {
    grid.check_momentum(params.p_true)?;
    let center = grid.center();
    let psi = match params.window {
        Window::Gaussian { sigma } => {
            if !(sigma.is_finite() && sigma > 0.0) {
                return Err(Error::Configuration(format!("window width must be positive, got {sigma}")));
            }
            if sigma > grid.extent() {
                return Err(Error::Configuration(format!(
                    "window width {sigma} exceeds the domain extent {}",
                    grid.extent()
                )));
            }
            WaveFunction::from_fn(grid, |x| {
                C64::from_polar((-(x - center).powi(2) / (4.0 * sigma * sigma)).exp(), params.p_true * x)
            })
        }
        Window::Hard => WaveFunction::from_fn(grid, |x| C64::from_polar(1.0, params.p_true * x)),
    };
    crate::grid::normalize(&psi)
}

/// Half-line ground state and its odd continuation to the whole line.
#[derive(Clone, Debug)]
pub struct OddGround {
    pub energy: f64,
    pub half: WaveFunction,
    /// Unit-norm odd state on `[-L, L)`.
    pub whole: WaveFunction,
}

pub fn odd_ground_state(params: &ModelParams, half_grid: &Grid) -> Result<OddGround> {
    if half_grid.kind() != DomainKind::HalfLine {
        return Err(Error::Configuration("the model lives on a half-line grid".into()));
    }
    let ham = system_hamiltonian(params, half_grid)?;
    let (energy, half) = ground_state(&ham)?;
    checked_ground(&ham, &half)?;
    let whole = ExtendedState::odd_extension(&half)?.pi1_transform()?.to_whole_line()?;
    Ok(OddGround { energy, half, whole })
}

/// Outcome density of the kick measurement on a windowed plane wave.
#[derive(Clone, Debug)]
pub struct MeasuredDistribution {
    pub momenta: MomentumGrid,
    /// Normalized density on `momenta`.
    pub density: Vec<f64>,
    /// `Σ_j raw_j dp` before normalization.
    pub raw_total: f64,
    ground: WaveFunction,
    probe: WaveFunction,
}

impl MeasuredDistribution {
    /// `(1/2π) |Σ_x ψ₀(x) e^{-ipx} φ(x) dx|²` for a real ground state.
    fn raw_at(ground: &WaveFunction, probe: &WaveFunction, p: f64) -> f64 {
        let grid = ground.grid();
        let step = C64::from_polar(1.0, -p * grid.dx());
        let mut phase = C64::from_polar(1.0, -p * grid.x_min());
        let mut acc = C64::new(0.0, 0.0);
        for (g, f) in ground.amplitudes().iter().zip(probe.amplitudes().iter()) {
            acc += g.conj() * f * phase;
            phase *= step;
        }
        (acc * grid.dx()).norm_sqr() / (2.0 * PI)
    }

    /// Normalized density at an arbitrary outcome.
    pub fn density_at(&self, p: f64) -> f64 {
        Self::raw_at(&self.ground, &self.probe, p) / self.raw_total
    }

    /// Unnormalized density at `p`; integrates to `raw_total`.
    pub fn raw_density_at(&self, p: f64) -> f64 {
        Self::raw_at(&self.ground, &self.probe, p)
    }

    pub fn mean(&self) -> f64 {
        let dp = self.momenta.dp();
        self.density.iter().enumerate().map(|(j, r)| self.momenta.p(j) * r * dp).sum()
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        let dp = self.momenta.dp();
        self.density.iter().enumerate().map(|(j, r)| (self.momenta.p(j) - mu).powi(2) * r * dp).sum()
    }

    pub fn peak_value(&self) -> f64 {
        self.density.iter().copied().fold(0.0, f64::max)
    }

    /// Locations of the largest bin below and above `center`.
    pub fn peaks(&self, center: f64) -> (f64, f64) {
        let mut lo = (f64::NEG_INFINITY, center);
        let mut hi = (f64::NEG_INFINITY, center);
        for (j, &r) in self.density.iter().enumerate() {
            let p = self.momenta.p(j);
            let slot = if p < center { &mut lo } else { &mut hi };
            if r > slot.0 {
                *slot = (r, p);
            }
        }
        (lo.1, hi.1)
    }

    pub fn ground(&self) -> &WaveFunction {
        &self.ground
    }

    pub fn probe(&self) -> &WaveFunction {
        &self.probe
    }
}

/// Full chain: odd ground state of the trap, windowed plane wave, kick and
/// ground-state projection, evaluated on the glued whole line. Outcomes
/// use the DFT-conjugate grid of the whole line.
pub fn measured_distribution(params: &ModelParams, half_grid: &Grid) -> Result<MeasuredDistribution> {
    let ground = odd_ground_state(params, half_grid)?.whole;
    let probe = plane_wave_state(params, ground.grid())?;
    let momenta = MomentumGrid::nyquist(ground.grid());
    let raw: Vec<f64> = momenta.values().into_iter().map(|p| MeasuredDistribution::raw_at(&ground, &probe, p)).collect();
    let raw_total = raw.iter().sum::<f64>() * momenta.dp();
    if !(raw_total > 0.0) {
        return Err(Error::DegenerateState("plane wave does not overlap the ground state".into()));
    }
    let density = raw.iter().map(|r| r / raw_total).collect();
    Ok(MeasuredDistribution { momenta, density, raw_total, ground, probe })
}

/// Measured density for a general convex potential.
pub fn convex_potential_distribution(params: &ModelParams, half_grid: &Grid) -> Result<MeasuredDistribution> {
    params.validate(half_grid)?;
    measured_distribution(params, half_grid)
}

/// Normalized plane-wave density for the harmonic trap,
/// `2/(√π (mω)^{3/2}) (p-p_true)² e^{-(p-p_true)²/(mω)}`.
pub fn analytic_distribution(p: f64, params: &ModelParams) -> Result<f64> {
    let a = params.mass * params.omega;
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::InvalidParameter("analytic density needs m > 0 and omega > 0".into()));
    }
    let k = p - params.p_true;
    Ok(2.0 / (PI.sqrt() * a.powf(1.5)) * k * k * (-k * k / a).exp())
}

/// Unnormalized density for a constant-amplitude plane wave with
/// `|A|² = amplitude_sq`; integrates to `amplitude_sq`.
pub fn unnormalized_analytic(p: f64, params: &ModelParams, amplitude_sq: f64) -> Result<f64> {
    Ok(amplitude_sq * analytic_distribution(p, params)?)
}

/// Moments of the measured distribution across a trap-frequency sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub omega: f64,
    pub mean: f64,
    pub variance: f64,
    pub dp: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// Least-squares fit `variance ≈ slope·ω + intercept`.
    pub slope: f64,
    pub intercept: f64,
}

/// Runs the harmonic chain for each `ω` on a grid scaled to the oscillator
/// length, with the default window.
pub fn conservation_and_limit_check(base: &ModelParams, omegas: &[f64], n_half: usize) -> Result<SweepReport> {
    if omegas.len() < 2 {
        return Err(Error::InvalidParameter("the sweep needs at least two frequencies".into()));
    }
    let mut rows = Vec::with_capacity(omegas.len());
    for &omega in omegas {
        if !(omega > 0.0) {
            return Err(Error::InvalidParameter(format!("sweep frequencies must be positive, got {omega}")));
        }
        let params = ModelParams { omega, ..ModelParams::harmonic(base.mass, omega, base.coupling, base.p_true) };
        let grid = params.default_half_grid(n_half)?;
        let dist = measured_distribution(&params, &grid)?;
        rows.push(SweepRow { omega, mean: dist.mean(), variance: dist.variance(), dp: dist.momenta.dp() });
    }
    let m = rows.len() as f64;
    let sx: f64 = rows.iter().map(|r| r.omega).sum();
    let sy: f64 = rows.iter().map(|r| r.variance).sum();
    let sxx: f64 = rows.iter().map(|r| r.omega * r.omega).sum();
    let sxy: f64 = rows.iter().map(|r| r.omega * r.variance).sum();
    let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    let intercept = (sy - slope * sx) / m;
    Ok(SweepReport { rows, slope, intercept })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariant_povm::{build_povm, element_report, fourier_density, optimal_kernel};
    use crate::linalg::{max_abs, singular_values};

    fn small_setup() -> (ModelParams, Grid, DenseOperator, WaveFunction) {
        let params = ModelParams::harmonic(1.0, 1.0, 0.7, 1.0);
        let grid = make_grid(DomainKind::HalfLine, 8.0, 64).unwrap();
        let ham = system_hamiltonian(&params, &grid).unwrap();
        let (_, ground) = ground_state(&ham).unwrap();
        (params, grid, ham, ground)
    }

    #[test]
    fn kick_is_unitary_and_trivial_at_zero() {
        let g = make_grid(DomainKind::WholeLine, 10.0, 128).unwrap();
        let u = kick_unitary(0.8, 1.5, &g).unwrap();
        let id = DMatrix::<C64>::identity(128, 128);
        assert!(max_abs(&(u.matrix().adjoint() * u.matrix() - &id)) < 1e-12);
        assert_eq!(kick_unitary(0.8, 0.0, &g).unwrap().matrix(), &id);
        assert!(matches!(kick_unitary(1.0, 1e3, &g), Err(Error::Aliasing { .. })));
    }

    #[test]
    fn kick_shifts_mean_momentum() {
        let g = make_grid(DomainKind::WholeLine, 20.0, 512).unwrap();
        let phi = crate::grid::normalize(&WaveFunction::from_fn(&g, |x| {
            C64::from_polar((-x * x / 16.0).exp(), 1.0 * x)
        }))
        .unwrap();
        let (g_coupling, pt) = (0.5, 2.0);
        let kicked = kick_unitary(g_coupling, pt, &g).unwrap().apply(&phi).unwrap();
        let mean = |psi: &WaveFunction| {
            let (m, rho) = fourier_density(psi).unwrap();
            rho.iter().enumerate().map(|(j, r)| m.p(j) * r * m.dp()).sum::<f64>()
        };
        let shift = mean(&kicked) - mean(&phi);
        assert!((shift + g_coupling * pt).abs() < MomentumGrid::nyquist(&g).dp());
    }

    #[test]
    fn kraus_operator_structure() {
        let (_, grid, ham, ground) = small_setup();
        let a = kraus_operator(&ham, &ground, 0.7, 1.3).unwrap();
        let s = singular_values(&a);
        assert!((s[0] - 1.0).abs() < 1e-10 && s[1] < 1e-10);
        let a0 = kraus_operator(&ham, &ground, 0.7, 0.0).unwrap();
        let c = ground.basis_coefficients();
        assert!(max_abs(&(a0 - &c * c.adjoint())) < 1e-12);
        // ψ_x ψ̄_x' e^{-igP̃x'} dx
        let dx = grid.dx();
        for (x, xp) in [(3usize, 5usize), (10, 2), (20, 20)] {
            let psi = ground.amplitudes();
            let expect = psi[x] * psi[xp].conj() * C64::from_polar(dx, -0.7 * 1.3 * grid.x(xp));
            assert!((a[(x, xp)] - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn non_eigenstate_is_rejected() {
        let (_, grid, ham, _) = small_setup();
        let fake = crate::grid::normalize(&WaveFunction::from_fn(&grid, |x| C64::new(x * (-x).exp(), 0.0))).unwrap();
        assert!(matches!(kraus_operator(&ham, &fake, 1.0, 0.0), Err(Error::InvalidGround { .. })));
    }

    #[test]
    fn kraus_povm_matches_optimal_povm() {
        let (_, grid, ham, ground) = small_setup();
        let momenta = MomentumGrid::nyquist(&grid);
        let family = KrausFamily::new(&ham, &ground, 0.7, momenta.clone()).unwrap();
        // rank-one form equals the dense product
        for j in [0usize, 17, 40] {
            let a = family.operator(j).unwrap();
            assert!(max_abs(&(a.adjoint() * &a - family.raw_element(j).unwrap())) < 1e-12);
        }
        let family = povm_from_kraus(family);
        let optimal = build_povm(optimal_kernel(&ground), momenta, &grid).unwrap();
        let report = kraus_equivalence(&family, &optimal).unwrap();
        assert_eq!(report.sign, 1);
        assert!(report.max_deviation < 1e-10);
        assert!(report.other_sign_deviation > 1e-6);
        assert_eq!(report.singular_points, 1);
        let elements = element_report(&family).unwrap();
        assert!(elements.min_eigenvalue > -1e-10);
        assert!(elements.completeness_residual < 1e-10);
    }

    #[test]
    fn relabeling_the_coupling_changes_nothing() {
        let (_, grid, ham, ground) = small_setup();
        let momenta = MomentumGrid::nyquist(&grid);
        let a = povm_from_kraus(KrausFamily::new(&ham, &ground, 0.7, momenta.clone()).unwrap());
        let b = povm_from_kraus(KrausFamily::new(&ham, &ground, -2.5, momenta).unwrap());
        let psi = crate::grid::normalize(&WaveFunction::from_fn(&grid, |x| C64::from_polar(x * (-x).exp(), 0.4 * x)))
            .unwrap();
        let (da, db) = (a.densities(&psi).unwrap(), b.densities(&psi).unwrap());
        assert!(da.iter().zip(&db).all(|(x, y)| (x - y).abs() < 1e-8));
        assert!((a.family().probe_momentum(5) * 0.7 - b.family().probe_momentum(5) * -2.5).abs() < 1e-12);
    }

    #[test]
    fn analytic_density_moments() {
        let params = ModelParams::harmonic(1.0, 1.0, 1.0, 2.0);
        assert_eq!(analytic_distribution(2.0, &params).unwrap(), 0.0);
        let peak = analytic_distribution(3.0, &params).unwrap();
        assert!((peak - 2.0 / PI.sqrt() * (-1.0f64).exp()).abs() < 1e-14);
        let h = 1e-3;
        let (mut total, mut mean, mut second) = (0.0, 0.0, 0.0);
        for k in -20000..20000 {
            let p = 2.0 + k as f64 * h;
            let r = analytic_distribution(p, &params).unwrap() * h;
            total += r;
            mean += p * r;
            second += (p - 2.0).powi(2) * r;
        }
        assert!((total - 1.0).abs() < 1e-10);
        assert!((mean - 2.0).abs() < 1e-10);
        assert!((second - 1.5).abs() < 1e-8);
        let bad = ModelParams { omega: 0.0, ..params };
        assert!(matches!(analytic_distribution(1.0, &bad), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn plane_wave_properties() {
        let params = ModelParams::harmonic(1.0, 1.0, 1.0, 1.5);
        let g = make_grid(DomainKind::WholeLine, 20.0, 512).unwrap();
        let phi = plane_wave_state(&params, &g).unwrap();
        assert!((phi.norm() - 1.0).abs() < 1e-12);
        let (m, rho) = fourier_density(&phi).unwrap();
        let mean: f64 = rho.iter().enumerate().map(|(j, r)| m.p(j) * r * m.dp()).sum();
        assert!((mean - 1.5).abs() < m.dp().max(1.0 / 8.0));
        let hard = ModelParams { window: Window::Hard, ..params };
        let a1 = plane_wave_state(&hard, &g).unwrap().amplitudes()[0].norm_sqr();
        let g2 = make_grid(DomainKind::WholeLine, 40.0, 1024).unwrap();
        let a2 = plane_wave_state(&hard, &g2).unwrap().amplitudes()[0].norm_sqr();
        assert!((a1 / a2 - 2.0).abs() < 1e-12);
        let wide = ModelParams { window: Window::Gaussian { sigma: 100.0 }, ..params };
        assert!(matches!(plane_wave_state(&wide, &g), Err(Error::Configuration(_))));
    }

    #[test]
    fn convexity_is_enforced() {
        let g = make_grid(DomainKind::HalfLine, 5.0, 64).unwrap();
        let params = ModelParams { potential: Potential::Custom(|x| (2.0 * x).sin()), ..ModelParams::harmonic(1.0, 1.0, 1.0, 0.0) };
        assert!(matches!(convex_potential_distribution(&params, &g), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn hard_window_reproduces_unnormalized_shape() {
        let params = ModelParams { window: Window::Hard, ..ModelParams::harmonic(1.0, 1.0, 1.0, 0.0) };
        let grid = params.default_half_grid(512).unwrap();
        let dist = measured_distribution(&params, &grid).unwrap();
        // |A|² = 1/(2L) for a constant amplitude on [-L, L)
        let a_sq = 1.0 / (2.0 * grid.length());
        for p in [-2.0, -1.0, -0.3, 0.5, 1.0, 2.5] {
            let exact = unnormalized_analytic(p, &params, a_sq).unwrap();
            assert!((dist.raw_density_at(p) - exact).abs() < 1e-4 * a_sq, "p = {p}");
        }
        assert!((dist.raw_total - a_sq).abs() < 1e-6 * a_sq);
    }

    #[test]
    fn flat_potential_concentrates() {
        let flat = ModelParams { potential: Potential::Flat, omega: 0.0, window: Window::Gaussian { sigma: 5.0 }, ..ModelParams::harmonic(1.0, 1.0, 1.0, 0.0) };
        let grid = make_grid(DomainKind::HalfLine, 20.0, 256).unwrap();
        let dist = convex_potential_distribution(&flat, &grid).unwrap();
        assert!(dist.variance() < 1.5 / 16.0);
    }
}
