//! Two-sector extension `H+ ⊗ C²` of the half line.
//!
//! Objects carry two blocks on one half-line grid. In the tensor picture
//! both blocks use the half-line coordinates. The sector-local reflection
//! `Π₁` moves the second block to the negative half line; it is stored in
//! ascending `x`, which for the lattice `{0, -dx, ..., -(n-1)dx}` is plain
//! array reversal. Gluing the blocks along `x = 0` gives the whole line.

use nalgebra::{DMatrix, DVector};

use crate::covariant_povm::{CovariantPovm, PovmElements};
use crate::grid::{make_grid, DomainKind, Grid, MomentumGrid, WaveFunction};
use crate::linalg::{hermiticity_defect, max_abs};
use crate::operators::{Boundary, DenseOperator};
use crate::{Error, Result, C64};

/// Off-diagonal blocks larger than this make a matrix non-block-diagonal.
pub const BLOCK_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Picture {
    Tensor,
    DirectSum,
}

/// Auxiliary qubit sector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sector {
    Zero,
    One,
}

/// Per-sector payload: amplitudes or an operator block.
pub trait Block: Clone {
    fn dim(&self) -> usize;
    /// Image under `x → -x` with array reversal.
    fn reflected(&self) -> Self;
}

impl Block for DVector<C64> {
    fn dim(&self) -> usize {
        self.len()
    }

    fn reflected(&self) -> Self {
        let n = self.len();
        DVector::from_fn(n, |i, _| self[n - 1 - i])
    }
}

impl Block for DMatrix<C64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn reflected(&self) -> Self {
        let n = self.nrows();
        DMatrix::from_fn(n, n, |i, j| self[(n - 1 - i, n - 1 - j)])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedObject<B> {
    plus: B,
    minus: B,
    grid: Grid,
    picture: Picture,
}

/// Vector in `H+ ⊗ C²` (continuum-normalized amplitudes).
pub type ExtendedState = ExtendedObject<DVector<C64>>;
/// Block-diagonal operator on `H+ ⊗ C²` (lattice matrices).
pub type ExtendedOperator = ExtendedObject<DMatrix<C64>>;

impl<B: Block> ExtendedObject<B> {
    pub fn new(grid: &Grid, plus: B, minus: B, picture: Picture) -> Result<Self> {
        if grid.kind() != DomainKind::HalfLine {
            return Err(Error::Configuration("extended objects live on a half-line grid".into()));
        }
        if plus.dim() != grid.len() || minus.dim() != grid.len() {
            return Err(Error::Shape(format!(
                "blocks must have dimension {}, got {} and {}",
                grid.len(),
                plus.dim(),
                minus.dim()
            )));
        }
        Ok(Self { plus, minus, grid: grid.clone(), picture })
    }

    pub fn plus(&self) -> &B {
        &self.plus
    }

    pub fn minus(&self) -> &B {
        &self.minus
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn picture(&self) -> Picture {
        self.picture
    }

    /// Tensor picture to direct-sum picture.
    pub fn pi1_transform(&self) -> Result<Self> {
        if self.picture != Picture::Tensor {
            return Err(Error::State("object is already in the direct-sum picture".into()));
        }
        Ok(Self {
            plus: self.plus.clone(),
            minus: self.minus.reflected(),
            grid: self.grid.clone(),
            picture: Picture::DirectSum,
        })
    }

    /// Direct-sum picture back to the tensor picture.
    pub fn pi1_inverse(&self) -> Result<Self> {
        if self.picture != Picture::DirectSum {
            return Err(Error::State("object is already in the tensor picture".into()));
        }
        Ok(Self {
            plus: self.plus.clone(),
            minus: self.minus.reflected(),
            grid: self.grid.clone(),
            picture: Picture::Tensor,
        })
    }

    /// Minus block in half-line coordinates regardless of picture.
    fn minus_tensor(&self) -> B {
        match self.picture {
            Picture::Tensor => self.minus.clone(),
            Picture::DirectSum => self.minus.reflected(),
        }
    }
}

/// `ψ` placed in one sector, zero in the other (tensor picture).
pub fn embed_halfline_state(psi: &WaveFunction, sector: Sector) -> Result<ExtendedState> {
    if psi.fiber_dim() != 1 {
        return Err(Error::Shape("extension expects a scalar wave function".into()));
    }
    let zero = DVector::zeros(psi.grid().len());
    let amps = psi.amplitudes().clone();
    let (plus, minus) = match sector {
        Sector::Zero => (amps, zero),
        Sector::One => (zero, amps),
    };
    ExtendedObject::new(psi.grid(), plus, minus, Picture::Tensor)
}

impl ExtendedState {
    /// `(ψ ⊗ |0⟩ - ψ ⊗ |1⟩)/√2`, the odd continuation of `ψ` across the
    /// origin once mapped to the direct-sum picture.
    pub fn odd_extension(psi: &WaveFunction) -> Result<Self> {
        let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let amps = psi.amplitudes() * s;
        ExtendedObject::new(psi.grid(), amps.clone(), -amps, Picture::Tensor)
    }

    /// `Σ (conj(a₊)b₊ + conj(a₋)b₋) dx`; both states must share a picture.
    pub fn inner_product(&self, other: &Self) -> Result<C64> {
        if self.grid != other.grid || self.picture != other.picture {
            return Err(Error::Shape("extended states differ in grid or picture".into()));
        }
        Ok((self.plus.dotc(&other.plus) + self.minus.dotc(&other.minus)) * self.grid.dx())
    }

    pub fn norm(&self) -> f64 {
        ((self.plus.norm_squared() + self.minus.norm_squared()) * self.grid.dx()).sqrt()
    }

    /// Glues a direct-sum state into a whole-line wave function on
    /// `[-L, L)` with `2n` points. The two samples at `x = 0` are added and
    /// the point `x = -L` is set to zero.
    pub fn to_whole_line(&self) -> Result<WaveFunction> {
        if self.picture != Picture::DirectSum {
            return Err(Error::State("whole-line gluing needs the direct-sum picture".into()));
        }
        let n = self.grid.len();
        let whole = make_grid(DomainKind::WholeLine, self.grid.length(), 2 * n)?;
        let mut amps = DVector::zeros(2 * n);
        for k in 0..n - 1 {
            amps[k + 1] = self.minus[k];
        }
        amps[n] = self.minus[n - 1] + self.plus[0];
        for i in 1..n {
            amps[n + i] = self.plus[i];
        }
        WaveFunction::new(whole, 1, amps)
    }

    /// Inverse of [`ExtendedState::to_whole_line`] for states vanishing at
    /// `x = -L`; the origin sample goes to the plus block.
    pub fn from_whole_line(psi: &WaveFunction) -> Result<Self> {
        let g = psi.grid();
        if g.kind() != DomainKind::WholeLine || g.len() % 2 != 0 || psi.fiber_dim() != 1 {
            return Err(Error::Shape("expected a scalar wave function on an even whole-line grid".into()));
        }
        let n = g.len() / 2;
        let half = make_grid(DomainKind::HalfLine, g.length(), n)?;
        let a = psi.amplitudes();
        let plus = DVector::from_fn(n, |i, _| a[n + i]);
        let minus = DVector::from_fn(n, |k, _| if k + 1 < n { a[k + 1] } else { C64::new(0.0, 0.0) });
        ExtendedObject::new(&half, plus, minus, Picture::DirectSum)
    }
}

impl ExtendedOperator {
    /// Splits a `2n × 2n` matrix into sector blocks; fails unless the
    /// off-diagonal blocks vanish.
    pub fn from_full(grid: &Grid, full: &DMatrix<C64>, picture: Picture) -> Result<Self> {
        let n = grid.len();
        if full.nrows() != 2 * n || full.ncols() != 2 * n {
            return Err(Error::Shape(format!("expected a {0}x{0} matrix", 2 * n)));
        }
        let off = max_abs(&full.view((0, n), (n, n)).clone_owned())
            .max(max_abs(&full.view((n, 0), (n, n)).clone_owned()));
        if off > BLOCK_TOL {
            return Err(Error::Structure(format!(
                "operator couples the two sectors (off-diagonal block {off:e})"
            )));
        }
        let plus = full.view((0, 0), (n, n)).clone_owned();
        let minus = full.view((n, n), (n, n)).clone_owned();
        ExtendedObject::new(grid, plus, minus, picture)
    }

    pub fn to_full(&self) -> DMatrix<C64> {
        let n = self.grid.len();
        let mut full = DMatrix::zeros(2 * n, 2 * n);
        full.view_mut((0, 0), (n, n)).copy_from(&self.plus);
        full.view_mut((n, n), (n, n)).copy_from(&self.minus);
        full
    }

    pub fn apply(&self, state: &ExtendedState) -> Result<ExtendedState> {
        if self.grid != state.grid || self.picture != state.picture {
            return Err(Error::Shape("operator and state differ in grid or picture".into()));
        }
        ExtendedObject::new(&self.grid, &self.plus * &state.plus, &self.minus * &state.minus, self.picture)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.plus).max(hermiticity_defect(&self.minus))
    }
}

/// `p+ ⊗ |0⟩⟨0| - p+ ⊗ |1⟩⟨1|` in the tensor picture.
pub fn extend_momentum(p_plus: &DenseOperator) -> Result<ExtendedOperator> {
    if p_plus.boundary() != Boundary::DirichletAtZero || p_plus.grid().kind() != DomainKind::HalfLine {
        return Err(Error::Configuration(
            "extension needs the half-line momentum with the Dirichlet condition at 0".into(),
        ));
    }
    let m = p_plus.matrix().clone();
    ExtendedObject::new(p_plus.grid(), m.clone(), -m, Picture::Tensor)
}

/// `(plus + minus)/2` with the minus block taken in half-line
/// coordinates. The factor ½ keeps the identity fixed.
pub fn partial_trace(op: &ExtendedOperator) -> DMatrix<C64> {
    (&op.plus + op.minus_tensor()) * C64::new(0.5, 0.0)
}

/// Outcome-indexed family of block-diagonal operators on `H+ ⊗ C²`.
pub trait ExtendedElements {
    fn grid(&self) -> &Grid;
    fn momenta(&self) -> &MomentumGrid;
    fn element(&self, j: usize) -> Result<ExtendedOperator>;
}

/// Half-line POVM obtained by tracing out the auxiliary qubit, evaluated
/// lazily per outcome.
#[derive(Clone, Debug)]
pub struct ReducedPovm<F> {
    family: F,
}

pub fn partial_trace_spin<F: ExtendedElements>(family: F) -> ReducedPovm<F> {
    ReducedPovm { family }
}

impl<F> ReducedPovm<F> {
    pub fn family(&self) -> &F {
        &self.family
    }
}

impl<F: ExtendedElements> PovmElements for ReducedPovm<F> {
    fn grid(&self) -> &Grid {
        self.family.grid()
    }

    fn momenta(&self) -> &MomentumGrid {
        self.family.momenta()
    }

    fn element(&self, j: usize) -> Result<DMatrix<C64>> {
        Ok(partial_trace(&self.family.element(j)?))
    }
}

/// Extension of a half-line covariant POVM: sector `|0⟩` reads `p+` and
/// sector `|1⟩` reads `-p+`, so outcome `p` uses `M(p)` and `M(-p)`.
/// Elements are produced in the direct-sum picture.
#[derive(Clone, Debug)]
pub struct ExtendedCovariantPovm {
    half: CovariantPovm,
}

impl ExtendedCovariantPovm {
    pub fn new(half: CovariantPovm) -> Result<Self> {
        if half.grid().kind() != DomainKind::HalfLine || half.fiber_dim() != 1 {
            return Err(Error::Configuration("extension needs a scalar half-line POVM".into()));
        }
        Ok(Self { half })
    }

    pub fn half(&self) -> &CovariantPovm {
        &self.half
    }
}

impl ExtendedElements for ExtendedCovariantPovm {
    fn grid(&self) -> &Grid {
        self.half.grid()
    }

    fn momenta(&self) -> &MomentumGrid {
        self.half.momenta()
    }

    fn element(&self, j: usize) -> Result<ExtendedOperator> {
        let p = self.half.momenta().p(j);
        ExtendedObject::new(
            self.half.grid(),
            self.half.element_at(p),
            self.half.element_at(-p).reflected(),
            Picture::DirectSum,
        )
    }
}
