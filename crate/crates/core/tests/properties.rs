use proptest::prelude::*;

use qhalfline::grid::{inner_product, normalize};
use qhalfline::linalg::min_eigenvalue;
use qhalfline::naimark::{partial_trace, ExtendedObject, ExtendedState};
use qhalfline::{make_grid, DomainKind, Picture, WaveFunction, C64};
use nalgebra::{DMatrix, DVector};

const N: usize = 16;

fn amplitudes(len: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), len)
}

fn wave(kind: DomainKind, amps: &[(f64, f64)]) -> WaveFunction {
    let grid = make_grid(kind, 4.0, N).unwrap();
    let v = DVector::from_iterator(N, amps.iter().map(|&(re, im)| C64::new(re, im)));
    WaveFunction::new(grid, 1, v).unwrap()
}

proptest! {
    #[test]
    fn inner_product_is_hermitian_and_positive(a in amplitudes(N), b in amplitudes(N)) {
        let (phi, psi) = (wave(DomainKind::HalfLine, &a), wave(DomainKind::HalfLine, &b));
        let ab = inner_product(&phi, &psi).unwrap();
        let ba = inner_product(&psi, &phi).unwrap();
        prop_assert!((ab - ba.conj()).norm() < 1e-12);
        let aa = inner_product(&phi, &phi).unwrap();
        prop_assert!(aa.re >= 0.0 && aa.im.abs() < 1e-12);
    }

    #[test]
    fn normalized_states_have_unit_norm(a in amplitudes(N)) {
        let psi = wave(DomainKind::WholeLine, &a);
        prop_assume!(psi.norm() > 1e-6);
        prop_assert!((normalize(&psi).unwrap().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reflection_is_unitary_and_involutive(a in amplitudes(N), b in amplitudes(N)) {
        let grid = make_grid(DomainKind::HalfLine, 4.0, N).unwrap();
        let to_vec = |v: &[(f64, f64)]| DVector::from_iterator(N, v.iter().map(|&(re, im)| C64::new(re, im)));
        let s = ExtendedState::new(&grid, to_vec(&a), to_vec(&b), Picture::Tensor).unwrap();
        let t = s.pi1_transform().unwrap();
        prop_assert!((t.norm() - s.norm()).abs() < 1e-12);
        let back = t.pi1_inverse().unwrap();
        prop_assert!((back.plus() - s.plus()).norm() < 1e-12);
        prop_assert!((back.minus() - s.minus()).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_preserves_positivity(a in amplitudes(N), b in amplitudes(N), direct_sum in any::<bool>()) {
        let grid = make_grid(DomainKind::HalfLine, 4.0, N).unwrap();
        let psd = |v: &[(f64, f64)]| {
            let u = DVector::from_iterator(N, v.iter().map(|&(re, im)| C64::new(re, im)));
            &u * u.adjoint()
        };
        let picture = if direct_sum { Picture::DirectSum } else { Picture::Tensor };
        let op = ExtendedObject::new(&grid, psd(&a), psd(&b), picture).unwrap();
        let reduced: DMatrix<C64> = partial_trace(&op);
        prop_assert!(min_eigenvalue(&reduced).unwrap() >= -1e-10);
    }

    #[test]
    fn glued_whole_line_round_trip(mut a in amplitudes(N)) {
        a[0] = (0.0, 0.0);
        let psi = wave(DomainKind::HalfLine, &a);
        let odd = ExtendedState::odd_extension(&psi).unwrap().pi1_transform().unwrap();
        let whole = odd.to_whole_line().unwrap();
        prop_assert!((whole.norm() - psi.norm()).abs() < 1e-12);
        let back = ExtendedState::from_whole_line(&whole).unwrap();
        prop_assert!((back.plus() - odd.plus()).norm() < 1e-12);
        prop_assert!((back.minus() - odd.minus()).norm() < 1e-12);
    }
}
