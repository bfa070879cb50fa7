use cloning_optics::analysis::amplifier::expm;
use cloning_optics::analysis::optimize::golden_section_bracket;
use cloning_optics::{
    alpha, amplifier_output, fidelity_f2, fidelity_fperp, lambda_for_q, optimal_q, single_photon_fidelity,
    target_state, AmplifierModel, Limits, Polarization,
};
use nalgebra::DMatrix;

#[test]
fn alpha_normalization_and_fidelity() {
    for m in 1..=10 {
        let a: Vec<f64> = (0..=m).map(|j| alpha(j, m).unwrap()).collect();
        let norm: f64 = a.iter().map(|x| x * x).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        let f: f64 = a.iter().enumerate().map(|(j, x)| x * x * (m - j) as f64 / m as f64).sum();
        assert!((f - fidelity_fperp::<f64>(m).unwrap()).abs() < 1e-12, "M = {m}");
    }
}

#[test]
fn target_state_fidelity_matches_formula() {
    let lim = Limits { m_cap: 8 };
    for m in 1..=8 {
        let t = target_state::<f64>(m, &lim).unwrap();
        let f = single_photon_fidelity(&t.state, "A", Polarization::Psi).unwrap();
        assert!((f - fidelity_fperp::<f64>(m).unwrap()).abs() < 1e-12);
    }
    assert!(target_state::<f64>(9, &lim).is_err());
}

#[test]
fn fperp_decreases_to_its_limit() {
    let limit = 0.5 * (1.0 + 1.0 / 3f64.sqrt());
    let mut prev = fidelity_fperp::<f64>(1).unwrap();
    for m in 2..200 {
        let f = fidelity_fperp::<f64>(m).unwrap();
        assert!(f < prev && f > limit);
        prev = f;
    }
    assert!((fidelity_fperp::<f64>(1_000_000).unwrap() - limit).abs() < 1e-6);
}

#[test]
fn optimal_q_large_m_limit() {
    let q = optimal_q::<f64>(1_000_000).unwrap();
    assert!((q - (2.0 - 3f64.sqrt())).abs() < 1e-6);
}

#[test]
fn golden_section_finds_two_clone_optimum() {
    let (a, b) = golden_section_bracket(|q: f64| Ok(fidelity_f2(q)), 0.0, 1.0, 1e-7).unwrap();
    assert!(((a + b) / 2.0 - (5.0 - 2.0 * 6f64.sqrt())).abs() < 1e-7);
    let x = cloning_optics::analysis::argmax(|q: f64| Ok(fidelity_f2(q)), 0.0, 1.0).unwrap();
    assert!((x - (5.0 - 2.0 * 6f64.sqrt())).abs() < 1e-9);
}

/// Heralded q from expanding the factorized amplifier by hand:
/// `q = r/(1 − r)` with `r = λ²/(M(1 − λ²))`.
fn hand_q(lambda: f64, m: usize) -> f64 {
    let r = lambda * lambda / (m as f64 * (1.0 - lambda * lambda));
    r / (1.0 - r)
}

#[test]
fn amplifier_q_matches_hand_expansion() {
    for m in 1..=4 {
        for lambda in [0.05, 0.2, 0.5, 0.6] {
            let model = AmplifierModel::from_lambda(lambda, 2 * m).unwrap();
            let out = amplifier_output(&model, m).unwrap();
            if m == 1 {
                // M = 1 output is the input ket alone
                assert!(out.fit.residual < 1e-12);
            }
            assert!((out.fit.q - hand_q(lambda, m)).abs() < 1e-12, "λ = {lambda}, M = {m}");
            assert!(out.fit.q_imag.abs() < 1e-14);
        }
    }
}

#[test]
fn lambda_for_q_inverts_the_fit() {
    for m in [2, 3] {
        let q = optimal_q::<f64>(m).unwrap();
        let lambda = lambda_for_q(q, m).unwrap();
        // invert r/(1−r) = q by hand: r = q/(1+q), λ² = rM/(1 + rM)
        let r = q / (1.0 + q);
        let want = (r * m as f64 / (1.0 + r * m as f64)).sqrt();
        assert!((lambda - want).abs() < 1e-12);
    }
    assert!(lambda_for_q(-0.1, 2).is_err());
}

#[test]
fn amplifier_is_norm_preserving_before_truncation() {
    // with a generous cap almost all weight is kept
    let model = AmplifierModel::<f64>::from_lambda(0.3, 60).unwrap();
    let out = model.evolve_factorized(&AmplifierModel::standard_input()).unwrap();
    assert!((out.norm() - 1.0).abs() < 1e-12);
}

#[test]
fn expm_of_antisymmetric_is_orthogonal() {
    let n = 6;
    let a = DMatrix::from_fn(n, n, |i, j| if i < j { ((i * 7 + j * 3) % 5) as f64 - 2.0 } else { 0.0 });
    let k = &a - a.transpose();
    let e = expm(&k);
    assert!((&e * e.transpose() - DMatrix::identity(n, n)).norm() < 1e-12);
}
