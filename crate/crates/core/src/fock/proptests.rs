use num_complex::Complex64;
use proptest::prelude::*;

use super::*;
use crate::elements::{bs50_with, hadamard, hwp, pbs, BsConvention};

const LABELS: [&str; 3] = ["a", "b", "c"];

fn modes() -> Vec<ModeId> {
    registry(&LABELS)
}

prop_compose! {
    fn occupation()(counts in proptest::collection::vec(0u8..=2, 6)) -> Vec<u8> {
        // keep at most 6 photons
        let mut left = 6u8;
        counts.into_iter().map(|n| { let k = n.min(left); left -= k; k }).collect()
    }
}

prop_compose! {
    fn random_state()(terms in proptest::collection::vec((occupation(), -1.0f64..1.0, -1.0f64..1.0), 1..8)) -> PhotonicState {
        let reg = modes();
        let terms = terms.into_iter().map(|(occ, re, im)| {
            let v: FockBasisVector = reg.iter().cloned().zip(occ).collect();
            (v, Complex64::new(re, im))
        });
        let s = PhotonicState::from_terms(reg.clone(), terms).unwrap();
        s.normalized().unwrap_or_else(|| PhotonicState::vacuum(reg).unwrap())
    }
}

fn built_in_maps() -> Vec<ModeLinearMap> {
    vec![
        hadamard("a"),
        hwp("b", 0.37),
        pbs("a", "b", "x", "y").unwrap(),
        bs50_with("b", "c", "x", "y", BsConvention::Real).unwrap(),
        bs50_with("a", "c", "x", "y", BsConvention::ImaginaryReflection).unwrap(),
    ]
}

proptest! {
    #[test]
    fn maps_preserve_norm(psi in random_state()) {
        for map in built_in_maps() {
            let out = psi.apply_map(&map).unwrap();
            prop_assert!((out.norm_squared() - psi.norm_squared()).abs() < 1e-10);
        }
    }

    #[test]
    fn maps_are_linear(psi in random_state(), chi in random_state(), ar in -1.0f64..1.0, bi in -1.0f64..1.0) {
        let alpha = Complex64::new(ar, 0.3);
        let beta = Complex64::new(0.2, bi);
        for map in built_in_maps() {
            let lhs = PhotonicState::superpose(&[(alpha, &psi), (beta, &chi)]).unwrap().apply_map(&map).unwrap();
            let rhs = PhotonicState::superpose(&[
                (alpha, &psi.apply_map(&map).unwrap()),
                (beta, &chi.apply_map(&map).unwrap()),
            ]).unwrap();
            let diff = PhotonicState::superpose(&[(Complex64::new(1.0, 0.0), &lhs), (Complex64::new(-1.0, 0.0), &rhs)]).unwrap();
            prop_assert!(diff.norm_squared().sqrt() < 1e-10);
        }
    }

    #[test]
    fn hadamard_twice_is_identity(re in -1.0f64..1.0, im in -1.0f64..1.0, vr in -1.0f64..1.0) {
        let psi = PhotonicState::polarized_photon("a", Complex64::new(re, im), Complex64::new(vr, 0.1)).unwrap();
        let back = psi.apply_map(&hadamard("a")).unwrap().apply_map(&hadamard("a")).unwrap();
        let diff = PhotonicState::superpose(&[(Complex64::new(1.0, 0.0), &back), (Complex64::new(-1.0, 0.0), &psi)]).unwrap();
        prop_assert!(diff.norm_squared().sqrt() < 1e-10);
    }

    #[test]
    fn post_selection_branches_sum_to_one(psi in random_state(), label in 0usize..3, n in 0u32..3) {
        let l = LABELS[label];
        let (_, p_in) = psi.post_select(|b| b.spatial_count(l) == n);
        let (_, p_out) = psi.post_select(|b| b.spatial_count(l) != n);
        prop_assert!((p_in + p_out - 1.0).abs() < 1e-10);
    }

    #[test]
    fn json_round_trip_is_exact(psi in random_state()) {
        let back = PhotonicState::from_json(&psi.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, psi);
    }

    #[test]
    fn self_inner_product_is_norm(psi in random_state()) {
        let ip = psi.inner_product(&psi).unwrap();
        prop_assert!((ip.re - psi.norm_squared()).abs() < 1e-10);
        prop_assert!(ip.im.abs() < 1e-12);
    }

    #[test]
    fn pbs_conserves_polarization_counts(psi in random_state()) {
        let count = |s: &PhotonicState, p: Polarization| -> Vec<u32> {
            s.terms().map(|(b, _)| b.iter().filter(|(m, _)| m.polarization() == p).map(|(_, n)| u32::from(n)).sum()).collect()
        };
        let out = psi.apply_map(&pbs("a", "b", "x", "y").unwrap()).unwrap();
        for p in Polarization::BOTH {
            let before: std::collections::BTreeSet<u32> = count(&psi, p).into_iter().collect();
            for n in count(&out, p) {
                prop_assert!(before.contains(&n));
            }
        }
        // term by term: a permutation of modes keeps each ket's H and V totals
        for (b, a) in psi.terms() {
            let single = PhotonicState::basis(psi.modes().to_vec(), &b.to_vector()).unwrap();
            let mapped = single.apply_map(&pbs("a", "b", "x", "y").unwrap()).unwrap();
            prop_assert_eq!(mapped.len(), 1);
            let (mb, _) = mapped.terms().next().unwrap();
            for p in Polarization::BOTH {
                let n_in: u32 = b.iter().filter(|(m, _)| m.polarization() == p).map(|(_, n)| u32::from(n)).sum();
                let n_out: u32 = mb.iter().filter(|(m, _)| m.polarization() == p).map(|(_, n)| u32::from(n)).sum();
                prop_assert_eq!(n_in, n_out);
            }
            let _ = a;
        }
    }
}
