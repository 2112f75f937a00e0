//! Two-sector extension of the half-line momentum: the extended operator is
//! Hermitian and the partial trace of a covariant element averages `±p`.

use qhalfline::linalg::max_abs;
use qhalfline::naimark::{extend_momentum, partial_trace, ExtendedCovariantPovm, ExtendedElements};
use qhalfline::operators::{momentum_operator, Boundary};
use qhalfline::{build_povm, make_grid, DomainKind, Kernel, MomentumGrid};

fn main() -> qhalfline::Result<()> {
    let grid = make_grid(DomainKind::HalfLine, 8.0, 64)?;
    let p_plus = momentum_operator(&grid, Boundary::DirichletAtZero)?;
    let extended = extend_momentum(&p_plus)?;
    println!("extended momentum hermiticity defect {:.1e}", extended.hermiticity_defect());

    let half = build_povm(Kernel::all_ones(grid.len()), MomentumGrid::nyquist(&grid), &grid)?;
    let family = ExtendedCovariantPovm::new(half.clone())?;
    let j = 40;
    let p = family.momenta().p(j);
    let reduced = partial_trace(&family.element(j)?);
    let average = (half.element_at(p) + half.element_at(-p)) * qhalfline::C64::new(0.5, 0.0);
    println!("p = {p:.3}: |reduced - (M(p) + M(-p))/2| = {:.1e}", max_abs(&(reduced - average)));
    Ok(())
}
