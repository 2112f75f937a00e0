//! Position, momentum and Hamiltonian matrices on a [`Grid`], with the
//! boundary condition they were built for.
//!
//! Matrices act on amplitudes pointwise (the lattice basis is orthonormal up
//! to the common factor `√dx`, which cancels for local operators). Dirichlet
//! conditions are imposed by projection: the constrained component is zeroed
//! in both the row and the column and recorded in
//! [`DenseOperator::constrained`], so spectral routines work on the
//! complementary subspace.

mod deficiency;

pub use deficiency::{
    deficiency_indices, Classification, DeficiencyAnalyzer, DeficiencyReport, OperatorSpec,
    TailDiagnostic,
};

use nalgebra::{DMatrix, DVector};

use crate::grid::{inner_product, DomainKind, Grid, WaveFunction};
use crate::linalg::{as_real_tridiagonal, hermiticity_defect, hermitian_eigen, lowest_tridiagonal};
use crate::{Error, Result, C64};

/// Hermiticity threshold for operators flagged Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Boundary {
    /// `ψ(0) = 0`; needs a grid point at the origin.
    DirichletAtZero,
    /// No condition: the formal adjoint. Edge rows close the stencil with a
    /// mirrored ghost value so that discrete integration by parts is exact.
    Free,
    /// Wrap-around, whole line only.
    Periodic,
}

#[derive(Clone, Debug)]
pub struct DenseOperator {
    matrix: DMatrix<C64>,
    grid: Grid,
    boundary: Boundary,
    label: String,
    constrained: Vec<usize>,
}

impl DenseOperator {
    pub fn new(
        matrix: DMatrix<C64>,
        grid: Grid,
        boundary: Boundary,
        label: impl Into<String>,
    ) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() != grid.len() {
            return Err(Error::Shape(format!(
                "operator is {}x{}, grid has {} points",
                matrix.nrows(),
                matrix.ncols(),
                grid.len()
            )));
        }
        Ok(Self { matrix, grid, boundary, label: label.into(), constrained: Vec::new() })
    }

    fn with_constraint(mut self, index: usize) -> Self {
        for k in 0..self.matrix.nrows() {
            self.matrix[(index, k)] = C64::new(0.0, 0.0);
            self.matrix[(k, index)] = C64::new(0.0, 0.0);
        }
        self.constrained.push(index);
        self
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Grid indices whose amplitude is forced to zero.
    pub fn constrained(&self) -> &[usize] {
        &self.constrained
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.matrix)
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() < HERMITIAN_TOL
    }

    pub fn negated(&self) -> Self {
        Self {
            matrix: -self.matrix.clone(),
            grid: self.grid.clone(),
            boundary: self.boundary,
            label: format!("-{}", self.label),
            constrained: self.constrained.clone(),
        }
    }

    pub fn apply(&self, psi: &WaveFunction) -> Result<WaveFunction> {
        if psi.grid() != &self.grid || psi.fiber_dim() != 1 {
            return Err(Error::Shape("operator and state are incompatible".into()));
        }
        WaveFunction::new(self.grid.clone(), 1, &self.matrix * psi.amplitudes())
    }

    /// `max_i |(Hψ - Eψ)_i|` on the amplitudes.
    pub fn eigen_residual(&self, psi: &WaveFunction, energy: f64) -> Result<f64> {
        let h_psi = self.apply(psi)?;
        Ok((h_psi.amplitudes() - psi.amplitudes() * C64::new(energy, 0.0)).camax())
    }
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn origin(grid: &Grid) -> Result<usize> {
    grid.origin_index().ok_or_else(|| {
        Error::Configuration("dirichlet-at-0 needs a grid point at x = 0 (use an even n)".into())
    })
}

/// `(1/i) d/dx` by central differences.
pub fn momentum_operator(grid: &Grid, boundary: Boundary) -> Result<DenseOperator> {
    let n = grid.len();
    let h = 1.0 / (2.0 * grid.dx());
    // -i/(2dx) (ψ_{k+1} - ψ_{k-1})
    let fwd = C64::new(0.0, -h);
    let mut m = DMatrix::<C64>::zeros(n, n);
    for k in 0..n {
        if k + 1 < n {
            m[(k, k + 1)] = fwd;
        }
        if k > 0 {
            m[(k, k - 1)] = -fwd;
        }
    }
    let op = match boundary {
        Boundary::Periodic => {
            if grid.kind() != DomainKind::WholeLine {
                return Err(Error::Configuration("periodic momentum needs a whole-line grid".into()));
            }
            m[(0, n - 1)] = -fwd;
            m[(n - 1, 0)] = fwd;
            DenseOperator::new(m, grid.clone(), boundary, "p")?
        }
        Boundary::Free => {
            // ghost ψ_{-1} = ψ_0 and ψ_n = ψ_{n-1}
            m[(0, 0)] -= fwd;
            m[(n - 1, n - 1)] += fwd;
            DenseOperator::new(m, grid.clone(), boundary, "p+†")?
        }
        Boundary::DirichletAtZero => {
            let o = origin(grid)?;
            DenseOperator::new(m, grid.clone(), boundary, "p+")?.with_constraint(o)
        }
    };
    Ok(op)
}

/// Multiplication by `x`.
pub fn position_operator(grid: &Grid) -> DenseOperator {
    let diag = DVector::from_iterator(grid.len(), grid.points().into_iter().map(c));
    DenseOperator {
        matrix: DMatrix::from_diagonal(&diag),
        grid: grid.clone(),
        boundary: Boundary::Free,
        label: "x".into(),
        constrained: Vec::new(),
    }
}

/// `p²/2m + V(x)` with a three-point Laplacian. The far edges of the
/// truncated domain are hard walls; `boundary` controls the origin
/// (`DirichletAtZero`) or wrap-around (`Periodic`).
pub fn potential_hamiltonian(
    grid: &Grid,
    mass: f64,
    potential: impl Fn(f64) -> f64,
    boundary: Boundary,
) -> Result<DenseOperator> {
    if !(mass.is_finite() && mass > 0.0) {
        return Err(Error::InvalidParameter(format!("mass must be positive, got {mass}")));
    }
    let n = grid.len();
    let t = 1.0 / (2.0 * mass * grid.dx() * grid.dx());
    let mut m = DMatrix::<C64>::zeros(n, n);
    for k in 0..n {
        let v = potential(grid.x(k));
        if !v.is_finite() {
            return Err(Error::InvalidParameter(format!("potential is not finite at x = {}", grid.x(k))));
        }
        m[(k, k)] = c(2.0 * t + v);
        if k + 1 < n {
            m[(k, k + 1)] = c(-t);
            m[(k + 1, k)] = c(-t);
        }
    }
    let op = match boundary {
        Boundary::Periodic => {
            if grid.kind() != DomainKind::WholeLine {
                return Err(Error::Configuration("periodic Hamiltonian needs a whole-line grid".into()));
            }
            m[(0, n - 1)] = c(-t);
            m[(n - 1, 0)] = c(-t);
            DenseOperator::new(m, grid.clone(), boundary, "H")?
        }
        Boundary::Free => DenseOperator::new(m, grid.clone(), boundary, "H")?,
        Boundary::DirichletAtZero => {
            let o = origin(grid)?;
            DenseOperator::new(m, grid.clone(), boundary, "H")?.with_constraint(o)
        }
    };
    Ok(op)
}

/// `p²/2m + mω²x²/2`; Dirichlet at the origin on a half line.
pub fn harmonic_hamiltonian(grid: &Grid, mass: f64, omega: f64) -> Result<DenseOperator> {
    if !(omega.is_finite() && omega >= 0.0) {
        return Err(Error::InvalidParameter(format!("omega must be non-negative, got {omega}")));
    }
    let boundary = match grid.kind() {
        DomainKind::HalfLine => Boundary::DirichletAtZero,
        DomainKind::WholeLine => Boundary::Free,
    };
    let k = mass * omega * omega;
    let mut h = potential_hamiltonian(grid, mass, |x| 0.5 * k * x * x, boundary)?;
    h.label = "H0".into();
    Ok(h)
}

/// `max |⟨φ, Aψ⟩ - ⟨Aφ, ψ⟩|` over the trial pairs.
pub fn symmetry_defect(op: &DenseOperator, pairs: &[(WaveFunction, WaveFunction)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::InvalidParameter("symmetry defect needs at least one trial pair".into()));
    }
    let mut worst = 0.0f64;
    for (phi, psi) in pairs {
        let lhs = inner_product(phi, &op.apply(psi)?)?;
        let rhs = inner_product(&op.apply(phi)?, psi)?;
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// Lowest eigenpair of a Hermitian operator on its unconstrained subspace.
/// The state is normalized and its first non-negligible amplitude is real
/// positive.
pub fn ground_state(op: &DenseOperator) -> Result<(f64, WaveFunction)> {
    let defect = op.hermiticity_defect();
    if defect >= HERMITIAN_TOL {
        return Err(Error::InvalidParameter(format!(
            "ground state needs a Hermitian operator, defect {defect:e}"
        )));
    }
    let n = op.grid.len();
    let free: Vec<usize> = (0..n).filter(|k| !op.constrained.contains(k)).collect();
    let reduced = DMatrix::from_fn(free.len(), free.len(), |i, j| op.matrix[(free[i], free[j])]);

    let (energy, coeffs): (f64, Vec<C64>) = match as_real_tridiagonal(&reduced, 0.0) {
        Some((diag, off)) => {
            let (e, v) = lowest_tridiagonal(&diag, &off)?;
            (e, v.into_iter().map(c).collect())
        }
        None => {
            let (values, vectors) = hermitian_eigen(&reduced)?;
            (values[0], vectors.column(0).iter().copied().collect())
        }
    };
    if !energy.is_finite() || coeffs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NumericalFailure(format!("eigensolver returned non-finite output (n = {n})")));
    }

    let mut amps = DVector::<C64>::zeros(n);
    for (k, &idx) in free.iter().enumerate() {
        amps[idx] = coeffs[k];
    }
    let peak = amps.camax();
    let phase = amps
        .iter()
        .find(|z| z.norm() > 1e-8 * peak)
        .map(|z| z.conj() / z.norm())
        .unwrap_or(c(1.0));
    let scale = phase / (amps.norm() * op.grid.dx().sqrt());
    amps *= scale;
    let psi = WaveFunction::new(op.grid.clone(), 1, amps)?;
    Ok((energy, psi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, normalize};
    use std::f64::consts::PI;

    fn half(n: usize, l: f64) -> Grid {
        make_grid(DomainKind::HalfLine, l, n).unwrap()
    }

    /// Odd oscillator state `2 (mω)^{3/4} π^{-1/4} x e^{-mωx²/2}`.
    fn odd_ground(x: f64, mw: f64) -> f64 {
        2.0 * (mw.powi(3) / PI).powf(0.25) * x * (-0.5 * mw * x * x).exp()
    }

    #[test]
    fn momentum_of_plane_wave_matches_taylor_bound() {
        let g = make_grid(DomainKind::WholeLine, 20.0, 1024).unwrap();
        let p = momentum_operator(&g, Boundary::Free).unwrap();
        let k = 1.0;
        let psi = WaveFunction::from_fn(&g, |x| C64::from_polar(1.0, k * x));
        let out = p.apply(&psi).unwrap();
        // central difference: sin(k dx)/dx, error ≈ k³dx²/6
        let bound = k.powi(3) * g.dx().powi(2) / 6.0 * 1.01;
        for i in 1..g.len() - 1 {
            let err = (out.amplitudes()[i] - psi.amplitudes()[i] * k).norm();
            assert!(err < bound && err < 1e-3, "i={i} err={err}");
        }
    }

    #[test]
    fn periodic_momentum_is_hermitian_and_needs_whole_line() {
        let g = make_grid(DomainKind::WholeLine, 5.0, 64).unwrap();
        let p = momentum_operator(&g, Boundary::Periodic).unwrap();
        assert!(p.hermiticity_defect() < 1e-12);
        let h = half(64, 5.0);
        assert!(matches!(momentum_operator(&h, Boundary::Periodic), Err(Error::Configuration(_))));
        let odd = make_grid(DomainKind::WholeLine, 5.0, 65).unwrap();
        assert!(matches!(momentum_operator(&odd, Boundary::DirichletAtZero), Err(Error::Configuration(_))));
    }

    fn bump(l: f64, at_zero: f64) -> impl Fn(f64) -> C64 {
        // smooth, vanishes at x = L, value `at_zero` at the origin
        move |x: f64| {
            let s = (PI * x / (2.0 * l)).cos().powi(2);
            C64::new(at_zero * s + (PI * x / l).sin() * s, 0.3 * (PI * x / l).sin() * s)
        }
    }

    #[test]
    fn symmetry_defect_reproduces_boundary_term() {
        let l = 10.0;
        let g = half(1024, l);
        let adjoint = momentum_operator(&g, Boundary::Free).unwrap();
        let pair = |a: f64, b: f64| {
            (WaveFunction::from_fn(&g, bump(l, a)), WaveFunction::from_fn(&g, bump(l, b)))
        };
        // both in the domain
        assert!(symmetry_defect(&adjoint, &[pair(0.0, 0.0)]).unwrap() < 1e-8);
        // one factor of the boundary term vanishes
        assert!(symmetry_defect(&adjoint, &[pair(1.0, 0.0)]).unwrap() < 1e-8);
        // boundary term |φ̄(0)ψ(0)| = 1
        let d = symmetry_defect(&adjoint, &[pair(1.0, 1.0)]).unwrap();
        assert!((d - 1.0).abs() < 0.05, "{d}");
        // the Dirichlet matrix itself is symmetric on its domain
        let p_plus = momentum_operator(&g, Boundary::DirichletAtZero).unwrap();
        assert!(symmetry_defect(&p_plus, &[pair(0.0, 0.0)]).unwrap() < 1e-10);
        assert!(p_plus.hermiticity_defect() < 1e-12);
        assert!(symmetry_defect(&p_plus, &[]).is_err());
    }

    #[test]
    fn symmetry_defect_on_domain_shrinks_with_refinement() {
        let l = 10.0;
        let mut prev = f64::INFINITY;
        for n in [128usize, 256, 512, 1024] {
            let g = half(n, l);
            let a = momentum_operator(&g, Boundary::Free).unwrap();
            let phi = WaveFunction::from_fn(&g, |x| C64::new((PI * x / l).sin(), 0.0));
            let psi = WaveFunction::from_fn(&g, |x| C64::new(0.0, (2.0 * PI * x / l).sin()));
            let d = symmetry_defect(&a, &[(phi, psi)]).unwrap();
            assert!(d < prev, "n={n} d={d} prev={prev}");
            prev = d;
        }
    }

    #[test]
    fn position_operator_is_diagonal_grid() {
        let g = half(64, 4.0);
        let x = position_operator(&g);
        for i in 0..64 {
            assert_eq!(x.matrix()[(i, i)], C64::new(g.x(i), 0.0));
        }
        assert_eq!(x.hermiticity_defect(), 0.0);
    }

    #[test]
    fn first_moment_of_odd_ground_state() {
        // ∫₀^∞ x·4π^{-1/2} x² e^{-x²} dx = 2/√π
        let g = half(1024, 20.0);
        let psi = WaveFunction::from_fn(&g, |x| C64::new(odd_ground(x, 1.0), 0.0));
        let xpsi = position_operator(&g).apply(&psi).unwrap();
        let moment = inner_product(&psi, &xpsi).unwrap().re;
        assert!((moment - 2.0 / PI.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn harmonic_spectra() {
        let whole = make_grid(DomainKind::WholeLine, 20.0, 1024).unwrap();
        let h = harmonic_hamiltonian(&whole, 1.0, 1.0).unwrap();
        assert!(h.is_hermitian());
        let (e, psi) = ground_state(&h).unwrap();
        assert!((e - 0.5).abs() < 1e-3, "{e}");
        assert!((psi.norm() - 1.0).abs() < 1e-12);
        let gauss = normalize(&WaveFunction::from_fn(&whole, |x| C64::new((-x * x / 2.0).exp(), 0.0))).unwrap();
        assert!(inner_product(&gauss, &psi).unwrap().norm() > 0.9999);

        let g = half(1024, 20.0);
        let h = harmonic_hamiltonian(&g, 1.0, 1.0).unwrap();
        let (e, psi) = ground_state(&h).unwrap();
        assert!((e - 1.5).abs() < 1e-3, "{e}");
        assert_eq!(psi.amplitudes()[0], C64::new(0.0, 0.0));
        let exact = WaveFunction::from_fn(&g, |x| C64::new(odd_ground(x, 1.0), 0.0));
        assert!(inner_product(&exact, &psi).unwrap().norm() > 0.9999);
        assert!(h.eigen_residual(&psi, e).unwrap() < 1e-6);

        let free = harmonic_hamiltonian(&g, 1.0, 0.0).unwrap();
        let (e0, _) = ground_state(&free).unwrap();
        // particle in a box of length L: π²/(2L²)
        assert!(e0 > 0.0 && e0 < 2.0 * PI * PI / (2.0 * 400.0));

        assert!(matches!(harmonic_hamiltonian(&g, 0.0, 1.0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn ground_state_phase_is_deterministic() {
        let g = half(256, 10.0);
        let h = harmonic_hamiltonian(&g, 1.0, 1.0).unwrap();
        let (_, psi) = ground_state(&h).unwrap();
        let first = psi.amplitudes().iter().find(|z| z.norm() > 1e-6).unwrap();
        assert!(first.re > 0.0 && first.im == 0.0);
    }

    #[test]
    fn dense_fallback_agrees_with_tridiagonal_path() {
        let g = make_grid(DomainKind::WholeLine, 6.0, 64).unwrap();
        let h = harmonic_hamiltonian(&g, 1.0, 1.0).unwrap();
        let (e_fast, _) = ground_state(&h).unwrap();
        // A unitary phase on the off-diagonal breaks the real-tridiagonal
        // structure without changing the spectrum.
        let n = g.len();
        let u = DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| C64::from_polar(1.0, 0.3 * i as f64)));
        let rotated = &u * h.matrix() * u.adjoint();
        let op = DenseOperator::new(rotated, g, Boundary::Free, "UHU†").unwrap();
        let (e_dense, _) = ground_state(&op).unwrap();
        assert!((e_fast - e_dense).abs() < 1e-10);
    }
}
