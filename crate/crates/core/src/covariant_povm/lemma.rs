use std::f64::consts::PI;

use crate::covariant_povm::povm::{CovariantPovm, PovmElements, BOUNDARY_FRACTION};
use crate::grid::WaveFunction;
use crate::{Error, Result, C64};

/// Shift-averaged probability of a bin set.
#[derive(Clone, Debug, PartialEq)]
pub struct Lemma1Result {
    /// `Σ_s Tr(V_s ρ V_s† M(Δ)) · dp/2π` over the full cyclic group of
    /// on-grid shifts `s = k·dp`.
    pub value: f64,
    /// `value / (mes(Δ)/2π)`; 0 for an empty set.
    pub ratio: f64,
    /// Set when `Δ` includes bins near the band edge.
    pub boundary_warning: bool,
}

/// Averages the probability of `bins` over every shift `V_s = e^{-isx̂}`
/// with `s` on the outcome lattice. Requires the DFT-conjugate outcome grid
/// so that the shifts form a group.
pub fn lemma1_check(povm: &CovariantPovm, psi: &WaveFunction, bins: &[usize]) -> Result<Lemma1Result> {
    let momenta = povm.momenta();
    let grid = povm.grid();
    let n = grid.len();
    if momenta.len() != n || (momenta.dp() * grid.extent() - 2.0 * PI).abs() > 1e-9 {
        return Err(Error::Configuration(
            "invariant-measure check needs the DFT-conjugate outcome grid".into(),
        ));
    }
    if let Some(&j) = bins.iter().find(|&&j| j >= momenta.len()) {
        return Err(Error::InvalidParameter(format!("bin {j} out of range")));
    }
    let norm = psi.norm();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidState(format!("state has norm {norm}, expected 1")));
    }
    if bins.is_empty() {
        return Ok(Lemma1Result { value: 0.0, ratio: 0.0, boundary_warning: false });
    }
    let boundary_warning = bins.iter().any(|&j| momenta.is_boundary_bin(j, BOUNDARY_FRACTION));
    let dp = momenta.dp();
    let mut value = 0.0;
    for k in 0..momenta.len() {
        let s = k as f64 * dp;
        let shifted = psi.map(|x, z| z * C64::from_polar(1.0, -s * x));
        for &j in bins {
            value += povm.density_at(&shifted, momenta.p(j))? * dp;
        }
    }
    value *= dp / (2.0 * PI);
    let mes = bins.len() as f64 * dp;
    Ok(Lemma1Result { value, ratio: value / (mes / (2.0 * PI)), boundary_warning })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariant_povm::kernel::{optimal_kernel, random_gram_kernel};
    use crate::covariant_povm::povm::build_povm;
    use crate::grid::{make_grid, normalize, DomainKind, MomentumGrid};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ratio_is_state_independent_and_additive() {
        let g = make_grid(DomainKind::HalfLine, 10.0, 64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let povm = build_povm(random_gram_kernel(&g, 1, 4, 1.0, &mut rng).unwrap(), MomentumGrid::nyquist(&g), &g)
            .unwrap();
        let a = normalize(&WaveFunction::from_fn(&g, |x| C64::new(x * (-x).exp(), 0.0))).unwrap();
        let b = normalize(&WaveFunction::from_fn(&g, |x| C64::from_polar((-(x - 4.0).powi(2)).exp(), 2.0 * x)))
            .unwrap();
        let set: Vec<usize> = (30..35).collect();
        let ra = lemma1_check(&povm, &a, &set).unwrap();
        let rb = lemma1_check(&povm, &b, &set).unwrap();
        assert!((ra.ratio - 1.0).abs() < 1e-10 && (rb.ratio - 1.0).abs() < 1e-10);
        let double: Vec<usize> = (30..40).collect();
        let rd = lemma1_check(&povm, &a, &double).unwrap();
        assert!((rd.value / ra.value - 2.0).abs() < 1e-10);
        assert!(!ra.boundary_warning);
    }

    #[test]
    fn edge_cases() {
        let g = make_grid(DomainKind::WholeLine, 5.0, 32).unwrap();
        let psi = normalize(&WaveFunction::from_fn(&g, |x| C64::new((-x * x).exp(), 0.0))).unwrap();
        let povm = build_povm(optimal_kernel(&psi), MomentumGrid::nyquist(&g), &g).unwrap();
        assert_eq!(lemma1_check(&povm, &psi, &[]).unwrap().value, 0.0);
        assert!(lemma1_check(&povm, &psi, &[0, 1]).unwrap().boundary_warning);
        let narrow = build_povm(optimal_kernel(&psi), MomentumGrid::symmetric(&g, 5).unwrap(), &g).unwrap();
        assert!(matches!(lemma1_check(&narrow, &psi, &[3]), Err(Error::Configuration(_))));
    }
}
