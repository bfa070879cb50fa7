//! The whole stack instantiated with `f32`.

use cloning_optics::{
    build_partial_symmetrizer, product_input, run_cloner, single_photon_cloner, target_state, Limits, Qubit,
};

#[test]
fn two_clone_cloner_in_f32() {
    let eta = (2.0f32 / 3.0).sqrt();
    let out = run_cloner(&Qubit::<f32>::psi(), 2, eta, &Limits::default()).unwrap();
    assert!((out.probability - 1.0 / 64.0).abs() < 1e-6);
    assert!((out.fidelity - 0.5 * (1.0 + eta)).abs() < 1e-5);
}

#[test]
fn symmetrizer_and_single_cloner_in_f32() {
    let pair = product_input("A_in", &Qubit::<f32>::psi(), "B_in", &Qubit::perp()).unwrap();
    let out = build_partial_symmetrizer((2.0f32 / 3.0).sqrt()).unwrap().run(&pair).unwrap();
    assert!((out.probability - 5.0 / 48.0).abs() < 1e-6);
    let single = single_photon_cloner(&Qubit::<f32>::from_bloch(0.4, 1.3)).unwrap();
    assert!((single.clone_fidelity - 5.0 / 6.0).abs() < 1e-5);
}

#[test]
fn target_state_in_f32() {
    let t = target_state::<f32>(4, &Limits::default()).unwrap();
    assert!((t.state.norm() - 1.0).abs() < 1e-6);
}
