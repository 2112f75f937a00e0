use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::covariant_povm::kernel::{Kernel, DIAGONAL_TOL, INDEFINITE_TOL};
use crate::grid::{Grid, MomentumGrid, WaveFunction};
use crate::linalg::{hermiticity_defect, min_eigenvalue};
use crate::{Error, Result, C64};

/// Fraction of the outcome band treated as boundary bins.
pub const BOUNDARY_FRACTION: f64 = 0.05;
/// Completeness tolerance on `‖Σ_j M_j - I‖_max`; the all-ones whole-line
/// kernel reaches roundoff, so this is a generous ceiling.
pub const COMPLETENESS_TOL: f64 = 1e-3;

/// Outcome-indexed family of positive operators on a lattice, expressed in
/// the orthonormal lattice basis. `element(j)` is the probability operator
/// of bin `j` (it already carries the `dp` weight).
pub trait PovmElements {
    fn grid(&self) -> &Grid;

    fn fiber_dim(&self) -> usize {
        1
    }

    fn momenta(&self) -> &MomentumGrid;

    fn element(&self, j: usize) -> Result<DMatrix<C64>>;

    /// Probability density per unit momentum on every bin,
    /// `⟨ψ|M_j|ψ⟩ / dp`.
    fn densities(&self, psi: &WaveFunction) -> Result<Vec<f64>> {
        check_state(self.grid(), self.fiber_dim(), psi)?;
        let c = psi.basis_coefficients();
        let dp = self.momenta().dp();
        (0..self.momenta().len())
            .map(|j| Ok(c.dotc(&(self.element(j)? * &c)).re / dp))
            .collect()
    }
}

pub(crate) fn check_state(grid: &Grid, fiber_dim: usize, psi: &WaveFunction) -> Result<()> {
    if psi.grid() != grid || psi.fiber_dim() != fiber_dim {
        return Err(Error::Shape("state does not live on the POVM grid".into()));
    }
    Ok(())
}

/// Covariant POVM `M_j[x,x'] = K(x,x') e^{i(x-x')p_j} dx dp/2π`.
#[derive(Clone, Debug)]
pub struct CovariantPovm {
    kernel: Kernel,
    momenta: MomentumGrid,
    grid: Grid,
}

/// Checks the kernel hypotheses and assembles the POVM.
pub fn build_povm(kernel: Kernel, momenta: MomentumGrid, grid: &Grid) -> Result<CovariantPovm> {
    if kernel.len() != grid.len() {
        return Err(Error::Shape(format!(
            "kernel has {} points, grid has {}",
            kernel.len(),
            grid.len()
        )));
    }
    momenta.check_against(grid)?;
    let defect = kernel.diagonal_defect();
    if defect > DIAGONAL_TOL {
        return Err(Error::InvalidKernel(format!("K(x,x) deviates from the identity by {defect:e}")));
    }
    let lowest = kernel.min_eigenvalue()?;
    if lowest < -INDEFINITE_TOL {
        return Err(Error::InvalidKernel(format!("kernel is indefinite: min eigenvalue {lowest:e}")));
    }
    Ok(CovariantPovm { kernel, momenta, grid: grid.clone() })
}

impl CovariantPovm {
    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    /// Operator `K(x,x') e^{i(x-x')p} dx dp/2π` at an arbitrary outcome.
    pub fn element_at(&self, p: f64) -> DMatrix<C64> {
        let d = self.kernel.fiber_dim();
        let dim = self.grid.len() * d;
        let scale = self.grid.dx() * self.momenta.dp() / (2.0 * PI);
        let phases: Vec<C64> = self.grid.points().iter().map(|&x| C64::from_polar(1.0, x * p)).collect();
        let mut m = self.kernel.dense();
        for col in 0..dim {
            for row in 0..dim {
                m[(row, col)] *= phases[row / d] * phases[col / d].conj() * scale;
            }
        }
        m
    }

    /// `⟨ψ|M(p)|ψ⟩ / dp` at an arbitrary outcome.
    pub fn density_at(&self, psi: &WaveFunction, p: f64) -> Result<f64> {
        check_state(&self.grid, self.kernel.fiber_dim(), psi)?;
        let (coeffs, local) = self.projections(psi);
        Ok(self.density_from(&coeffs, local, p))
    }

    /// `c_{x,k} = Σ_a conj(ψ_{x,a}) F_{(x,a),k}` and the `p`-independent
    /// local contribution `Σ_x ψ_x† D_x ψ_x`.
    fn projections(&self, psi: &WaveFunction) -> (Vec<Vec<C64>>, f64) {
        let d = self.kernel.fiber_dim();
        let f = self.kernel.factor();
        let n = self.grid.len();
        let coeffs = (0..f.ncols())
            .map(|k| {
                (0..n)
                    .map(|x| (0..d).map(|a| psi.fiber(x)[a].conj() * f[(x * d + a, k)]).sum())
                    .collect()
            })
            .collect();
        let mut local = 0.0;
        if let Some(blocks) = self.kernel.local_blocks() {
            for (x, b) in blocks.iter().enumerate() {
                let v = psi.fiber(x);
                for a in 0..d {
                    for c in 0..d {
                        local += (v[a].conj() * b[(a, c)] * v[c]).re;
                    }
                }
            }
        }
        (coeffs, local)
    }

    fn density_from(&self, coeffs: &[Vec<C64>], local: f64, p: f64) -> f64 {
        let dx = self.grid.dx();
        let step = C64::from_polar(1.0, dx * p);
        let mut total = local;
        for column in coeffs {
            let mut phase = C64::from_polar(1.0, self.grid.x_min() * p);
            let mut acc = C64::new(0.0, 0.0);
            for &c in column {
                acc += c * phase;
                phase *= step;
            }
            total += acc.norm_sqr();
        }
        total * dx * dx / (2.0 * PI)
    }

    /// `max |Σ_j M_j - I|`, evaluated entrywise from the phase sums
    /// `S(x-x') = Σ_j e^{i(x-x')p_j}` without assembling the elements.
    pub fn completeness_residual(&self) -> f64 {
        let n = self.grid.len();
        let d = self.kernel.fiber_dim();
        let dx = self.grid.dx();
        let scale = dx * self.momenta.dp() / (2.0 * PI);
        // S depends only on the index difference.
        let sums: Vec<C64> = (0..n)
            .map(|k| {
                (0..self.momenta.len())
                    .map(|j| C64::from_polar(1.0, k as f64 * dx * self.momenta.p(j)))
                    .sum::<C64>()
                    * scale
            })
            .collect();
        let mut worst = 0.0f64;
        for row in 0..n * d {
            for col in 0..n * d {
                let (x, xp) = (row / d, col / d);
                let s = if x >= xp { sums[x - xp] } else { sums[xp - x].conj() };
                let target = if row == col { 1.0 } else { 0.0 };
                worst = worst.max((self.kernel.entry(row, col) * s - target).norm());
            }
        }
        worst
    }
}

impl PovmElements for CovariantPovm {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn fiber_dim(&self) -> usize {
        self.kernel.fiber_dim()
    }

    fn momenta(&self) -> &MomentumGrid {
        &self.momenta
    }

    fn element(&self, j: usize) -> Result<DMatrix<C64>> {
        if j >= self.momenta.len() {
            return Err(Error::InvalidParameter(format!("outcome index {j} out of range")));
        }
        Ok(self.element_at(self.momenta.p(j)))
    }

    fn densities(&self, psi: &WaveFunction) -> Result<Vec<f64>> {
        check_state(&self.grid, self.kernel.fiber_dim(), psi)?;
        let (coeffs, local) = self.projections(psi);
        Ok(self.momenta.values().into_iter().map(|p| self.density_from(&coeffs, local, p)).collect())
    }
}

/// `max_j ‖V_s† M_j V_s - M_{j+s/dp}‖_max` with `V_s = e^{-isx̂}`, over
/// interior bins whose shifted partner is also on the grid.
///
/// With `V_s = e^{-isx̂}` the conjugated element picks up `e^{i(x-x')s}`,
/// so outcomes move up by `s`.
pub fn covariance_defect(povm: &impl PovmElements, shift: f64) -> Result<f64> {
    let momenta = povm.momenta();
    let steps = shift / momenta.dp();
    if !steps.is_finite() || (steps - steps.round()).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("shift {shift} is not a multiple of dp")));
    }
    let steps = steps.round() as i64;
    let d = povm.fiber_dim();
    let phases: Vec<C64> = povm.grid().points().iter().map(|&x| C64::from_polar(1.0, -shift * x)).collect();
    let mut worst = 0.0f64;
    for j in 0..momenta.len() {
        let target = j as i64 + steps;
        if target < 0 || target as usize >= momenta.len() {
            continue;
        }
        let target = target as usize;
        if momenta.is_boundary_bin(j, BOUNDARY_FRACTION) || momenta.is_boundary_bin(target, BOUNDARY_FRACTION) {
            continue;
        }
        let m = povm.element(j)?;
        let shifted = povm.element(target)?;
        for col in 0..m.ncols() {
            for row in 0..m.nrows() {
                let conj = phases[row / d].conj() * m[(row, col)] * phases[col / d];
                worst = worst.max((conj - shifted[(row, col)]).norm());
            }
        }
    }
    Ok(worst)
}

/// Worst Hermiticity defect and lowest eigenvalue over every element.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElementReport {
    pub max_hermiticity_defect: f64,
    pub min_eigenvalue: f64,
    /// `‖Σ_j M_j - I‖_max` from the assembled elements.
    pub completeness_residual: f64,
}

/// Assembles every element; intended for moderate lattice sizes.
pub fn element_report(povm: &impl PovmElements) -> Result<ElementReport> {
    let dim = povm.grid().len() * povm.fiber_dim();
    let mut sum = DMatrix::<C64>::zeros(dim, dim);
    let mut herm = 0.0f64;
    let mut lowest = f64::INFINITY;
    for j in 0..povm.momenta().len() {
        let m = povm.element(j)?;
        herm = herm.max(hermiticity_defect(&m));
        lowest = lowest.min(min_eigenvalue(&m)?);
        sum += m;
    }
    for i in 0..dim {
        sum[(i, i)] -= C64::new(1.0, 0.0);
    }
    Ok(ElementReport {
        max_hermiticity_defect: herm,
        min_eigenvalue: lowest,
        completeness_residual: crate::linalg::max_abs(&sum),
    })
}
