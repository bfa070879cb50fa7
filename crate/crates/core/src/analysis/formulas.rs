//! Closed-form cloning formulas and the covariant target state.

use nalgebra::Matrix4;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::fock::{FockState, ModeSpace, Occupation, OperatorPolynomial, Polarization};
use crate::interferometers::{pair_creation_operator, Limits};
use crate::scalar::{real, Real};

/// Coefficient `α_{j,M}` of the optimal covariant `M`-clone state.
pub fn alpha<T: Real>(j: usize, m: usize) -> Result<T> {
    if m < 1 {
        return Err(Error::InvalidParameter("M must be at least 1".into()));
    }
    if j > m {
        return Err(Error::InvalidParameter(format!("j = {j} exceeds M = {m}")));
    }
    let mf = T::from_count(m);
    let two = T::lit(2.0);
    let sign = if j.is_multiple_of(2) { T::one() } else { -T::one() };
    let tilt = T::lit(3.0).sqrt() * (mf - two * T::from_count(j)) / (mf * (mf + two)).sqrt();
    Ok(sign / (two * (mf + T::one())).sqrt() * (T::one() + tilt))
}

pub fn alphas<T: Real>(m: usize) -> Result<Vec<T>> {
    (0..=m).map(|j| alpha(j, m)).collect()
}

/// Ideal covariant output: `Σ_j α_j |(M−j)ψ, jψ⊥⟩_A |jψ, (M−j)ψ⊥⟩_B`.
#[derive(Clone, Debug, PartialEq)]
pub struct CloningTarget<T: Real> {
    pub m: usize,
    pub alphas: Vec<T>,
    pub state: FockState<T>,
}

pub fn target_state<T: Real>(m: usize, limits: &Limits) -> Result<CloningTarget<T>> {
    limits.check(m)?;
    let alphas = alphas::<T>(m)?;
    let space = ModeSpace::new(["A", "B"])?;
    let mut terms = Vec::with_capacity(m + 1);
    for (j, &a) in alphas.iter().enumerate() {
        let (jj, mj) = (j as u16, (m - j) as u16);
        let occ = Occupation::from_slots(
            &space,
            &[
                ("A", Polarization::Psi, mj),
                ("A", Polarization::Perp, jj),
                ("B", Polarization::Psi, jj),
                ("B", Polarization::Perp, mj),
            ],
        )?;
        terms.push((occ, real(a)));
    }
    let state = FockState::from_amplitudes(space, terms)?.normalized()?;
    Ok(CloningTarget { m, alphas, state })
}

/// Two-clone fidelity as a function of the symmetrization parameter `q`.
pub fn fidelity_f2<T: Real>(q: T) -> T {
    let l = T::lit;
    (q * q - l(2.0) * q + l(9.0)) / (l(2.0) * (l(5.0) * q * q - l(2.0) * q + l(5.0)))
}

/// `q` maximizing the single-clone fidelity for `M` clones.
pub fn optimal_q<T: Real>(m: usize) -> Result<T> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("M = {m}, need M ≥ 2")));
    }
    let mf = T::from_count(m);
    let a = (T::lit(3.0) * mf).sqrt();
    let b = (mf + T::lit(2.0)).sqrt();
    Ok((a - b) / (a + b))
}

/// Optimal single-clone fidelity `(1 + √((M+2)/(3M)))/2`.
pub fn fidelity_fperp<T: Real>(m: usize) -> Result<T> {
    if m < 1 {
        return Err(Error::InvalidParameter("M must be at least 1".into()));
    }
    let mf = T::from_count(m);
    Ok((T::one() + ((mf + T::lit(2.0)) / (T::lit(3.0) * mf)).sqrt()) / T::lit(2.0))
}

/// `(Π₊, Π₋)` on two polarization qubits, index `2p + s`.
pub fn two_qubit_projectors<T: Real>() -> (Matrix4<Complex<T>>, Matrix4<Complex<T>>) {
    let zero = real(T::zero());
    let half = real(T::lit(0.5));
    let mut minus = Matrix4::from_element(zero);
    minus[(1, 1)] = half;
    minus[(2, 2)] = half;
    minus[(1, 2)] = -half;
    minus[(2, 1)] = -half;
    let mut plus = -minus;
    for i in 0..4 {
        plus[(i, i)] += real(T::one());
    }
    (plus, minus)
}

/// `X^{M−1}(a_ψ† b_⊥† + q a_⊥† b_ψ†)|0⟩` on modes `A`, `B`, unnormalized.
pub fn reference_clone_state<T: Real>(m: usize, q: Complex<T>) -> Result<FockState<T>> {
    let (u, v) = reference_components::<T>(m)?;
    u.add_scaled(&v, q)
}

/// The two pieces `X^{M−1} a_ψ† b_⊥† |0⟩` and `X^{M−1} a_⊥† b_ψ† |0⟩`.
pub fn reference_components<T: Real>(m: usize) -> Result<(FockState<T>, FockState<T>)> {
    if m < 1 {
        return Err(Error::InvalidParameter("M must be at least 1".into()));
    }
    let space = ModeSpace::new(["A", "B"])?;
    let x = pair_creation_operator::<T>(&space, "A", "B")?.pow(m - 1)?;
    let c = |mode: &str, p| OperatorPolynomial::creation(space.clone(), mode, p);
    let u = x.mul(&c("A", Polarization::Psi)?.mul(&c("B", Polarization::Perp)?)?)?;
    let v = x.mul(&c("A", Polarization::Perp)?.mul(&c("B", Polarization::Psi)?)?)?;
    Ok((u.to_state(), v.to_state()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{overlap_magnitude, single_photon_fidelity};

    #[test]
    fn alpha_edge_cases() {
        assert!((alpha::<f64>(0, 1).unwrap() - 1.0).abs() < 1e-15);
        assert!(alpha::<f64>(1, 1).unwrap().abs() < 1e-15);
        assert!(alpha::<f64>(3, 2).is_err());
        assert!(alpha::<f64>(0, 0).is_err());
    }

    #[test]
    fn target_m1_is_the_input() {
        let t = target_state::<f64>(1, &Limits::default()).unwrap();
        let a = t.state.amplitude_of(&[("A", Polarization::Psi, 1), ("B", Polarization::Perp, 1)]).unwrap();
        assert!((a.re - 1.0).abs() < 1e-15);
        assert_eq!(t.state.len(), 1);
    }

    #[test]
    fn target_m2_fidelity() {
        let t = target_state::<f64>(2, &Limits::default()).unwrap();
        let f = single_photon_fidelity(&t.state, "A", Polarization::Psi).unwrap();
        assert!((f - 0.5 * (1.0 + (2.0f64 / 3.0).sqrt())).abs() < 1e-12);
        let r = reference_clone_state(2, real(5.0 - 2.0 * 6f64.sqrt())).unwrap();
        assert!((overlap_magnitude(&t.state, &r).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn closed_forms() {
        assert!((fidelity_f2(0.0f64) - 0.9).abs() < 1e-15);
        assert!((fidelity_f2(1.0f64) - 0.5).abs() < 1e-15);
        assert!((optimal_q::<f64>(2).unwrap() - (5.0 - 2.0 * 6f64.sqrt())).abs() < 1e-15);
        assert!(optimal_q::<f64>(1).is_err());
        assert!((fidelity_fperp::<f64>(1).unwrap() - 1.0).abs() < 1e-15);
        assert!((fidelity_fperp::<f64>(6).unwrap() - 5.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn projectors() {
        let (p, m) = two_qubit_projectors::<f64>();
        assert!((p + m - Matrix4::identity()).norm() < 1e-15);
        assert!((p * p - p).norm() < 1e-15);
        assert!((p * m).norm() < 1e-15);
    }
}
