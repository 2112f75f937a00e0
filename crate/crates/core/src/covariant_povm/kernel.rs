use nalgebra::DMatrix;
use rand::Rng;

use crate::grid::{Grid, WaveFunction};
use crate::linalg::{hermiticity_defect, hermitian_eigen, min_eigenvalue};
use crate::{Error, Result, C64};

/// Tolerance on `K(x,x) = I`.
pub const DIAGONAL_TOL: f64 = 1e-10;
/// Kernels with an eigenvalue below this are rejected as indefinite.
pub const INDEFINITE_TOL: f64 = 1e-6;
/// Above this matrix size [`Kernel::min_eigenvalue`] reports the structural
/// lower bound instead of diagonalizing.
const DENSE_EIGEN_LIMIT: usize = 512;

/// Positive semidefinite kernel `K(x,x')` on a grid with fiber dimension `d`.
///
/// Stored as `K = F F† + ⊕_x D_x`: a low-rank factor `F` of shape
/// `(n·d) × r` plus optional point-local blocks `D_x` (`d × d`, PSD) that
/// contribute only on the diagonal `x = x'`. Both pieces are positive by
/// construction.
#[derive(Clone, Debug)]
pub struct Kernel {
    n: usize,
    fiber_dim: usize,
    factor: DMatrix<C64>,
    local: Option<Vec<DMatrix<C64>>>,
    singular: Vec<usize>,
}

impl Kernel {
    pub fn from_parts(
        n: usize,
        fiber_dim: usize,
        factor: DMatrix<C64>,
        local: Option<Vec<DMatrix<C64>>>,
    ) -> Result<Self> {
        let dim = n * fiber_dim;
        if factor.nrows() != dim {
            return Err(Error::Shape(format!("factor has {} rows, expected {dim}", factor.nrows())));
        }
        if let Some(blocks) = &local {
            if blocks.len() != n || blocks.iter().any(|b| b.nrows() != fiber_dim || b.ncols() != fiber_dim) {
                return Err(Error::Shape("local blocks must be n blocks of d x d".into()));
            }
            for b in blocks {
                if hermiticity_defect(b) > DIAGONAL_TOL || min_eigenvalue(b)? < -INDEFINITE_TOL {
                    return Err(Error::InvalidKernel("local block is not positive semidefinite".into()));
                }
            }
        }
        Ok(Self { n, fiber_dim, factor, local, singular: Vec::new() })
    }

    /// `K(x,x') = δ_{xx'} I`.
    pub fn identity(n: usize, fiber_dim: usize) -> Self {
        Self {
            n,
            fiber_dim,
            factor: DMatrix::zeros(n * fiber_dim, 0),
            local: Some(vec![DMatrix::identity(fiber_dim, fiber_dim); n]),
            singular: Vec::new(),
        }
    }

    /// `K ≡ 1` (scalar fiber).
    pub fn all_ones(n: usize) -> Self {
        Self {
            n,
            fiber_dim: 1,
            factor: DMatrix::from_element(n, 1, C64::new(1.0, 0.0)),
            local: None,
            singular: Vec::new(),
        }
    }

    /// Gram kernel `K(x,x') = U_x U_{x'}†` of a field of `d × r` matrices
    /// with orthonormal rows; `rows[x]` is `U_x`.
    pub fn gram(rows: &[DMatrix<C64>]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map(|u| u.nrows()).unwrap_or(1);
        let r = rows.first().map(|u| u.ncols()).unwrap_or(0);
        let mut factor = DMatrix::zeros(n * d, r);
        for (x, u) in rows.iter().enumerate() {
            if u.nrows() != d || u.ncols() != r {
                return Err(Error::Shape("Gram field blocks differ in shape".into()));
            }
            factor.view_mut((x * d, 0), (d, r)).copy_from(u);
        }
        Self::from_parts(n, d, factor, None)
    }

    /// Factorizes a dense Hermitian kernel matrix of size `(n·d)²`.
    pub fn from_dense(n: usize, fiber_dim: usize, matrix: &DMatrix<C64>) -> Result<Self> {
        let dim = n * fiber_dim;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::Shape(format!("kernel matrix must be {dim}x{dim}")));
        }
        let defect = hermiticity_defect(matrix);
        if defect > DIAGONAL_TOL {
            return Err(Error::InvalidKernel(format!("kernel is not Hermitian (defect {defect:e})")));
        }
        let (values, vectors) = hermitian_eigen(matrix)?;
        if values[0] < -INDEFINITE_TOL {
            return Err(Error::InvalidKernel(format!(
                "kernel is indefinite: min eigenvalue {:e}",
                values[0]
            )));
        }
        let cutoff = 1e-14 * values[dim - 1].abs().max(1.0);
        let keep: Vec<usize> = (0..dim).filter(|&k| values[k] > cutoff).collect();
        let factor = DMatrix::from_fn(dim, keep.len(), |i, j| {
            vectors[(i, keep[j])] * values[keep[j]].sqrt()
        });
        Ok(Self { n, fiber_dim, factor, local: None, singular: Vec::new() })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    pub fn rank_bound(&self) -> usize {
        self.factor.ncols() + if self.local.is_some() { self.n * self.fiber_dim } else { 0 }
    }

    pub fn factor(&self) -> &DMatrix<C64> {
        &self.factor
    }

    pub fn local_blocks(&self) -> Option<&[DMatrix<C64>]> {
        self.local.as_deref()
    }

    /// Grid points where the generating state vanished and the identity
    /// fallback was used.
    pub fn singular_points(&self) -> &[usize] {
        &self.singular
    }

    /// Scalar entry at flat indices `(x·d + a, x'·d + b)`.
    pub fn entry(&self, row: usize, col: usize) -> C64 {
        let mut z = self.factor.row(row).dot(&self.factor.row(col).map(|w| w.conj()));
        if let Some(blocks) = &self.local {
            let d = self.fiber_dim;
            if row / d == col / d {
                z += blocks[row / d][(row % d, col % d)];
            }
        }
        z
    }

    /// The `d × d` block `K(x, x')`.
    pub fn block(&self, x: usize, x_prime: usize) -> DMatrix<C64> {
        let d = self.fiber_dim;
        DMatrix::from_fn(d, d, |a, b| self.entry(x * d + a, x_prime * d + b))
    }

    pub fn dense(&self) -> DMatrix<C64> {
        let dim = self.n * self.fiber_dim;
        let mut k = &self.factor * self.factor.adjoint();
        if let Some(blocks) = &self.local {
            let d = self.fiber_dim;
            for (x, b) in blocks.iter().enumerate() {
                let mut view = k.view_mut((x * d, x * d), (d, d));
                view += b;
            }
        }
        debug_assert_eq!(k.nrows(), dim);
        k
    }

    /// `max_x ‖K(x,x) - I‖_max`.
    pub fn diagonal_defect(&self) -> f64 {
        let d = self.fiber_dim;
        let mut worst = 0.0f64;
        for x in 0..self.n {
            for a in 0..d {
                for b in 0..d {
                    let target = if a == b { 1.0 } else { 0.0 };
                    worst = worst.max((self.entry(x * d + a, x * d + b) - C64::new(target, 0.0)).norm());
                }
            }
        }
        worst
    }

    /// Smallest eigenvalue for moderate sizes; for large kernels the
    /// structural lower bound `min(0, min_x λ_min(D_x))`.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let dim = self.n * self.fiber_dim;
        if dim <= DENSE_EIGEN_LIMIT {
            return min_eigenvalue(&self.dense());
        }
        let mut bound: f64 = 0.0;
        if let Some(blocks) = &self.local {
            for b in blocks {
                bound = bound.min(min_eigenvalue(b)?);
            }
        }
        Ok(bound)
    }
}

/// Kernel of the optimal covariant POVM generated by `ψ`:
/// `K(x,x') = ψ_x ψ_{x'}† / (‖ψ_x‖ ‖ψ_{x'}‖)`.
///
/// For fibers with `d > 1` the rank-one diagonal block is completed to the
/// identity by the projector onto the orthogonal complement of `ψ_x`, which
/// is annihilated by `ψ` and keeps `K(x,x) = I`. Where `ψ_x = 0` the row and
/// column fall back to the identity and the point is listed in
/// [`Kernel::singular_points`].
pub fn optimal_kernel(psi: &WaveFunction) -> Kernel {
    let n = psi.grid().len();
    let d = psi.fiber_dim();
    let mut factor = DMatrix::zeros(n * d, 1);
    let mut local = vec![DMatrix::zeros(d, d); n];
    let mut singular = Vec::new();
    let mut any_local = false;
    for x in 0..n {
        let norm = psi.fiber_norm(x);
        if norm <= f64::MIN_POSITIVE {
            singular.push(x);
            local[x] = DMatrix::identity(d, d);
            any_local = true;
            continue;
        }
        let u: Vec<C64> = psi.fiber(x).iter().map(|z| z / norm).collect();
        for a in 0..d {
            factor[(x * d + a, 0)] = u[a];
        }
        if d > 1 {
            local[x] = DMatrix::from_fn(d, d, |a, b| {
                let id = if a == b { 1.0 } else { 0.0 };
                C64::new(id, 0.0) - u[a] * u[b].conj()
            });
            any_local = true;
        }
    }
    Kernel { n, fiber_dim: d, factor, local: any_local.then_some(local), singular }
}

/// Gram kernel of a smooth random field of `d × rank` matrices with
/// orthonormal rows (`rank ≥ d`). Smoothness comes from a handful of random
/// Fourier modes with wavelengths of order `correlation`.
pub fn random_gram_kernel(
    grid: &Grid,
    fiber_dim: usize,
    rank: usize,
    correlation: f64,
    rng: &mut impl Rng,
) -> Result<Kernel> {
    if rank < fiber_dim {
        return Err(Error::InvalidParameter("Gram rank must be at least the fiber dimension".into()));
    }
    const MODES: usize = 4;
    let gauss = |rng: &mut dyn rand::RngCore| -> C64 {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    };
    let coeffs: Vec<DMatrix<C64>> = (0..MODES)
        .map(|_| DMatrix::from_fn(fiber_dim, rank, |_, _| gauss(rng)))
        .collect();
    let freqs: Vec<f64> = (0..MODES).map(|_| rng.random_range(-1.0..1.0) / correlation).collect();

    let rows: Vec<DMatrix<C64>> = grid
        .points()
        .into_iter()
        .map(|x| {
            let mut u = DMatrix::zeros(fiber_dim, rank);
            for (c, w) in coeffs.iter().zip(&freqs) {
                u += c * C64::from_polar(1.0, w * x);
            }
            orthonormalize_rows(u)
        })
        .collect();
    Kernel::gram(&rows)
}

/// Modified Gram-Schmidt on the rows.
fn orthonormalize_rows(mut u: DMatrix<C64>) -> DMatrix<C64> {
    for a in 0..u.nrows() {
        for b in 0..a {
            let proj = u.row(b).conjugate().transpose().dot(&u.row(a).transpose());
            let rb = u.row(b).clone_owned();
            let mut ra = u.row_mut(a);
            ra -= rb * proj;
        }
        let norm = u.row(a).norm();
        u.row_mut(a).unscale_mut(norm);
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, DomainKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid(n: usize) -> Grid {
        make_grid(DomainKind::WholeLine, 5.0, n).unwrap()
    }

    #[test]
    fn positive_state_gives_all_ones_kernel() {
        let g = grid(32);
        let psi = WaveFunction::from_fn(&g, |x| C64::new((-x * x).exp() + 0.1, 0.0));
        let k = optimal_kernel(&psi);
        let dense = k.dense();
        assert!(dense.iter().all(|z| (z - C64::new(1.0, 0.0)).norm() < 1e-14));
        assert!(k.singular_points().is_empty());
    }

    #[test]
    fn scalar_kernel_entries_are_phases() {
        let g = grid(32);
        let psi = WaveFunction::from_fn(&g, |x| C64::from_polar(1.0 + x * x, 0.7 * x - 0.2 * x * x));
        let k = optimal_kernel(&psi);
        for i in 0..32 {
            for j in 0..32 {
                let z = k.entry(i, j);
                assert!((z.norm() - 1.0).abs() < 1e-12);
                // direct formula
                let a = psi.amplitudes()[i];
                let b = psi.amplitudes()[j];
                let expect = a * b.conj() / (a.norm() * b.norm());
                assert!((z - expect).norm() < 1e-12);
            }
        }
        assert!(k.diagonal_defect() < 1e-12);
    }

    #[test]
    fn zeros_use_identity_fallback() {
        let g = make_grid(DomainKind::HalfLine, 5.0, 32).unwrap();
        let psi = WaveFunction::from_fn(&g, |x| C64::new(x * (-x * x).exp(), 0.0));
        let k = optimal_kernel(&psi);
        assert_eq!(k.singular_points(), &[0]);
        assert_eq!(k.entry(0, 0), C64::new(1.0, 0.0));
        assert_eq!(k.entry(0, 5), C64::new(0.0, 0.0));
        assert!(k.diagonal_defect() < 1e-12);
        assert!(k.min_eigenvalue().unwrap() > -1e-10);
    }

    #[test]
    fn fiber_kernel_has_identity_diagonal_blocks() {
        let g = grid(20);
        let d = 3;
        let amps = nalgebra::DVector::from_fn(20 * d, |k, _| C64::new((k as f64).sin(), (k as f64 * 0.3).cos()));
        let psi = WaveFunction::new(g, d, amps).unwrap();
        let k = optimal_kernel(&psi);
        assert!(k.diagonal_defect() < 1e-12);
        assert!(k.min_eigenvalue().unwrap() > -1e-10);
        // ψ_x† K(x,x') ψ_x' = ‖ψ_x‖‖ψ_x'‖
        for (x, xp) in [(0usize, 1usize), (4, 17), (9, 9)] {
            let b = k.block(x, xp);
            let u = nalgebra::DVector::from_column_slice(psi.fiber(x));
            let v = nalgebra::DVector::from_column_slice(psi.fiber(xp));
            let val = u.dotc(&(&b * &v));
            assert!((val - C64::new(psi.fiber_norm(x) * psi.fiber_norm(xp), 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn random_gram_kernels_satisfy_hypotheses() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in [1usize, 2, 4] {
            let k = random_gram_kernel(&grid(48), d, 4, 2.0, &mut rng).unwrap();
            assert!(k.diagonal_defect() < 1e-10);
            assert!(k.min_eigenvalue().unwrap() > -1e-10);
            assert!(hermiticity_defect(&k.dense()) < 1e-12);
        }
    }

    #[test]
    fn dense_round_trip_and_indefinite_rejection() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let k = random_gram_kernel(&grid(24), 1, 4, 1.0, &mut rng).unwrap();
        let dense = k.dense();
        let again = Kernel::from_dense(24, 1, &dense).unwrap();
        assert!(crate::linalg::max_abs(&(again.dense() - &dense)) < 1e-12);

        let mut bad = DMatrix::<C64>::identity(24, 24);
        bad[(0, 1)] = C64::new(2.0, 0.0);
        bad[(1, 0)] = C64::new(2.0, 0.0);
        assert!(matches!(Kernel::from_dense(24, 1, &bad), Err(Error::InvalidKernel(_))));
    }
}
