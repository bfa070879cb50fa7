use cloning_optics::scalar::cplx;
use cloning_optics::{
    inner_product, monomial_to_state, single_photon_fidelity, Complex64, FockState, ModeSpace, Occupation,
    OperatorPolynomial, Polarization,
};
use num_complex::Complex;
use proptest::prelude::*;

fn space() -> ModeSpace {
    ModeSpace::new(["A", "B"]).unwrap()
}

/// Up to five monomials with at most three photons per slot on two modes.
fn poly_strategy() -> impl Strategy<Value = OperatorPolynomial<f64>> {
    prop::collection::vec((prop::array::uniform4(0u16..3), -1.0f64..1.0, -1.0f64..1.0), 1..6).prop_map(|terms| {
        let s = space();
        terms.into_iter().fold(OperatorPolynomial::zero(s.clone()), |acc, (e, re, im)| {
            let m = OperatorPolynomial::monomial(s.clone(), Occupation::from_counts(e.to_vec()), cplx(re, im));
            acc.add(&m).unwrap()
        })
    })
}

fn state_strategy() -> impl Strategy<Value = FockState<f64>> {
    poly_strategy().prop_filter("nonzero", |p| !p.is_zero()).prop_map(|p| p.to_state())
}

fn max_diff(a: &FockState<f64>, b: &FockState<f64>) -> f64 {
    cloning_optics::max_amplitude_difference(a, b).unwrap()
}

proptest! {
    #[test]
    fn monomial_to_state_is_linear(p in poly_strategy(), q in poly_strategy(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let lhs = monomial_to_state(&p.scaled(Complex::new(a, 0.0)).add(&q.scaled(Complex::new(b, 0.0))).unwrap());
        let rhs = monomial_to_state(&p).scaled(Complex::new(a, 0.0)).add_scaled(&monomial_to_state(&q), Complex::new(b, 0.0)).unwrap();
        prop_assert!(max_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn state_polynomial_round_trip(s in state_strategy()) {
        let back = monomial_to_state(&OperatorPolynomial::from_state(&s));
        prop_assert!(max_diff(&s, &back) < 1e-12);
    }

    #[test]
    fn inner_product_with_itself_is_norm(s in state_strategy()) {
        let ip = inner_product(&s, &s).unwrap();
        prop_assert!(ip.re >= 0.0);
        prop_assert!(ip.im.abs() < 1e-12);
        prop_assert!((ip.re - s.norm_sqr()).abs() < 1e-12 * s.norm_sqr().max(1.0));
    }

    #[test]
    fn fidelity_ignores_phase_and_scale(s in state_strategy(), phase in 0.0f64..6.3, scale in 0.1f64..10.0) {
        let occupied = s.filter(|o| o.mode_total(0) > 0);
        prop_assume!(!occupied.is_zero());
        let f = single_photon_fidelity(&occupied, "A", Polarization::Psi).unwrap();
        let g = single_photon_fidelity(&occupied.scaled(Complex::from_polar(scale, phase)), "A", Polarization::Psi).unwrap();
        prop_assert!((f - g).abs() < 1e-12);
        prop_assert!((0.0..=1.0 + 1e-15).contains(&f));
    }
}

#[test]
fn inner_product_is_conjugate_linear_in_lhs() {
    let s = space();
    let a = FockState::basis(s.clone(), Occupation::from_slots(&s, &[("A", Polarization::Psi, 1)]).unwrap()).unwrap();
    let c: Complex64 = cplx(0.0, 2.0);
    assert_eq!(inner_product(&a.scaled(c), &a).unwrap(), c.conj());
    assert_eq!(inner_product(&a, &a.scaled(c)).unwrap(), c);
}

#[test]
fn mismatched_spaces_are_rejected() {
    let a = FockState::<f64>::vacuum(space());
    let b = FockState::<f64>::vacuum(ModeSpace::new(["A", "C"]).unwrap());
    assert!(inner_product(&a, &b).is_err());
}
