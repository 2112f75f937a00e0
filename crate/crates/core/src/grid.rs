//! Uniform 1D lattices, state vectors and the position/momentum Fourier map.
//!
//! Grids include the left endpoint and exclude the right one, so a
//! whole-line grid of `n` points on `[-L, L)` is exactly DFT compatible and
//! contains `x = 0` whenever `n` is even. Quadrature is the rectangle rule
//! with weight `dx`.

use std::f64::consts::PI;

use nalgebra::DVector;

use crate::{Error, Result, C64};

/// Smallest admissible point count.
pub const MIN_POINTS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DomainKind {
    /// `[0, L)`, first point at `x = 0`.
    HalfLine,
    /// `[-L, L)`, first point at `x = -L`.
    WholeLine,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    kind: DomainKind,
    length: f64,
    n: usize,
    dx: f64,
}

/// Builds a uniform grid. `dx = L/n` on the half line and `2L/n` on the
/// whole line.
pub fn make_grid(kind: DomainKind, length: f64, n: usize) -> Result<Grid> {
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::InvalidParameter(format!("grid length must be positive, got {length}")));
    }
    if n < MIN_POINTS {
        return Err(Error::InvalidParameter(format!(
            "grid needs at least {MIN_POINTS} points, got {n}"
        )));
    }
    let extent = match kind {
        DomainKind::HalfLine => length,
        DomainKind::WholeLine => 2.0 * length,
    };
    Ok(Grid { kind, length, n, dx: extent / n as f64 })
}

impl Grid {
    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn x_min(&self) -> f64 {
        match self.kind {
            DomainKind::HalfLine => 0.0,
            DomainKind::WholeLine => -self.length,
        }
    }

    /// Total extent `n * dx`.
    pub fn extent(&self) -> f64 {
        self.n as f64 * self.dx
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min() + i as f64 * self.dx
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Midpoint of the truncated domain.
    pub fn center(&self) -> f64 {
        match self.kind {
            DomainKind::HalfLine => 0.5 * self.length,
            DomainKind::WholeLine => 0.0,
        }
    }

    /// Largest momentum representable without aliasing, `π/dx`.
    pub fn nyquist(&self) -> f64 {
        PI / self.dx
    }

    /// Index of the grid point at `x = 0`, if the grid has one.
    pub fn origin_index(&self) -> Option<usize> {
        let k = (-self.x_min() / self.dx).round();
        if k >= 0.0 && (k as usize) < self.n && self.x(k as usize).abs() < 1e-9 * self.dx {
            Some(k as usize)
        } else {
            None
        }
    }

    pub(crate) fn check_momentum(&self, p: f64) -> Result<()> {
        let limit = self.nyquist();
        if !p.is_finite() || p.abs() > limit * (1.0 + 1e-12) {
            return Err(Error::Aliasing { momentum: p, limit });
        }
        Ok(())
    }
}

/// Complex amplitudes on a grid with an optional fiber of dimension `d`.
/// Amplitude `(i, a)` is stored at `i * d + a`.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveFunction {
    grid: Grid,
    fiber_dim: usize,
    amps: DVector<C64>,
}

impl WaveFunction {
    pub fn new(grid: Grid, fiber_dim: usize, amps: DVector<C64>) -> Result<Self> {
        if fiber_dim == 0 {
            return Err(Error::InvalidParameter("fiber dimension must be at least 1".into()));
        }
        if amps.len() != grid.len() * fiber_dim {
            return Err(Error::Shape(format!(
                "expected {} amplitudes, got {}",
                grid.len() * fiber_dim,
                amps.len()
            )));
        }
        if amps.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidParameter("amplitudes must be finite".into()));
        }
        Ok(Self { grid, fiber_dim, amps })
    }

    /// Scalar (`d = 1`) wave function sampled from `f`.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> C64) -> Self {
        let amps = DVector::from_iterator(grid.len(), grid.points().into_iter().map(f));
        Self { grid: grid.clone(), fiber_dim: 1, amps }
    }

    pub fn zeros(grid: &Grid, fiber_dim: usize) -> Self {
        Self { grid: grid.clone(), fiber_dim, amps: DVector::zeros(grid.len() * fiber_dim) }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut DVector<C64> {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amps
    }

    /// Fiber vector at grid point `i`.
    pub fn fiber(&self, i: usize) -> &[C64] {
        let d = self.fiber_dim;
        &self.amps.as_slice()[i * d..(i + 1) * d]
    }

    /// Euclidean norm of the fiber at grid point `i`.
    pub fn fiber_norm(&self, i: usize) -> f64 {
        self.fiber(i).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn norm(&self) -> f64 {
        (self.amps.norm_squared() * self.grid.dx()).sqrt()
    }

    /// Amplitudes in the orthonormal lattice basis, `ψ_i √dx`.
    pub fn basis_coefficients(&self) -> DVector<C64> {
        &self.amps * C64::new(self.grid.dx().sqrt(), 0.0)
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self { grid: self.grid.clone(), fiber_dim: self.fiber_dim, amps: &self.amps * factor }
    }

    pub fn map(&self, f: impl Fn(f64, C64) -> C64) -> Self {
        let d = self.fiber_dim;
        let amps = DVector::from_iterator(
            self.amps.len(),
            self.amps.iter().enumerate().map(|(k, &z)| f(self.grid.x(k / d), z)),
        );
        Self { grid: self.grid.clone(), fiber_dim: d, amps }
    }
}

fn check_compatible(phi: &WaveFunction, psi: &WaveFunction) -> Result<()> {
    if phi.grid != psi.grid {
        return Err(Error::Shape("wave functions live on different grids".into()));
    }
    if phi.fiber_dim != psi.fiber_dim {
        return Err(Error::Shape(format!(
            "fiber dimensions differ: {} vs {}",
            phi.fiber_dim, psi.fiber_dim
        )));
    }
    Ok(())
}

/// Rectangle-rule inner product `Σ conj(φ_i)·ψ_i·dx`, summed over the fiber.
pub fn inner_product(phi: &WaveFunction, psi: &WaveFunction) -> Result<C64> {
    check_compatible(phi, psi)?;
    Ok(phi.amps.dotc(&psi.amps) * phi.grid.dx())
}

/// Rescales to unit norm.
pub fn normalize(psi: &WaveFunction) -> Result<WaveFunction> {
    let norm = psi.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::DegenerateState("cannot normalize a zero vector".into()));
    }
    Ok(psi.scaled(C64::new(1.0 / norm, 0.0)))
}

/// Plane-wave analysis functional `e^{ipx}/√(2π)` sampled on the grid.
pub fn fourier_synthesis(grid: &Grid, p: f64) -> Result<WaveFunction> {
    grid.check_momentum(p)?;
    let c = 1.0 / (2.0 * PI).sqrt();
    Ok(WaveFunction::from_fn(grid, |x| C64::from_polar(c, p * x)))
}

/// Outcome bins `p_j = (j_min + j)·dp`, `j = 0..count`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentumGrid {
    dp: f64,
    j_min: i64,
    count: usize,
}

impl MomentumGrid {
    pub fn new(dp: f64, j_min: i64, count: usize) -> Result<Self> {
        if !(dp.is_finite() && dp > 0.0) {
            return Err(Error::InvalidParameter(format!("dp must be positive, got {dp}")));
        }
        if count == 0 {
            return Err(Error::InvalidParameter("momentum grid needs at least one bin".into()));
        }
        Ok(Self { dp, j_min, count })
    }

    /// The DFT-conjugate grid of `grid`: `dp = 2π/(n dx)`, `n` bins covering
    /// `[-π/dx, π/dx)` with `p = 0` on a bin center.
    pub fn nyquist(grid: &Grid) -> Self {
        let n = grid.len();
        Self { dp: 2.0 * PI / grid.extent(), j_min: -((n / 2) as i64), count: n }
    }

    /// Bins symmetric about zero, `-half..=half` steps of the conjugate
    /// spacing of `grid`.
    pub fn symmetric(grid: &Grid, half: usize) -> Result<Self> {
        let dp = 2.0 * PI / grid.extent();
        let m = Self { dp, j_min: -(half as i64), count: 2 * half + 1 };
        m.check_against(grid)?;
        Ok(m)
    }

    pub fn check_against(&self, grid: &Grid) -> Result<()> {
        grid.check_momentum(self.p_max())
    }

    pub fn dp(&self) -> f64 {
        self.dp
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn j_min(&self) -> i64 {
        self.j_min
    }

    pub fn p(&self, j: usize) -> f64 {
        (self.j_min + j as i64) as f64 * self.dp
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|j| self.p(j)).collect()
    }

    pub fn p_max(&self) -> f64 {
        self.p(0).abs().max(self.p(self.count - 1).abs())
    }

    /// Bin whose center is nearest to `p`, if inside the grid.
    pub fn index_of(&self, p: f64) -> Option<usize> {
        let k = (p / self.dp).round() as i64 - self.j_min;
        (k >= 0 && (k as usize) < self.count).then_some(k as usize)
    }

    /// Whether bin `j` lies within `fraction` of the band edge.
    pub fn is_boundary_bin(&self, j: usize, fraction: f64) -> bool {
        let margin = ((self.count as f64) * fraction).ceil() as usize;
        j < margin || j + margin >= self.count
    }
}
