//! Heralding: conditional projection on photon numbers per spatial mode.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::fock::FockState;
use crate::scalar::Real;

/// Exact photon counts demanded in some spatial modes, summed over both polarizations.
/// Modes absent from the pattern are unconstrained.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PostSelectionPattern {
    constraints: BTreeMap<String, usize>,
}

impl PostSelectionPattern {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, mode: impl Into<String>, count: usize) -> Self {
        self.constraints.insert(mode.into(), count);
        self
    }

    pub fn constraints(&self) -> &BTreeMap<String, usize> {
        &self.constraints
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    /// Total photon number the pattern asks for.
    pub fn total(&self) -> usize {
        self.constraints.values().sum()
    }
}

/// Result of heralding on a pattern.
#[derive(Clone, Debug, PartialEq)]
pub struct PostSelection<T: Real> {
    /// Renormalized conditional state; the zero vector when nothing matched.
    pub state: FockState<T>,
    /// Matching component before renormalization.
    pub projected: FockState<T>,
    /// Squared norm of `projected`, i.e. the success probability for a unit-norm input.
    pub probability: T,
}

impl<T: Real> PostSelection<T> {
    /// True when no basis term matched the pattern.
    pub fn is_empty(&self) -> bool {
        self.projected.is_zero()
    }
}

/// Keeps the basis terms matching every constraint of `pattern`.
pub fn project<T: Real>(state: &FockState<T>, pattern: &PostSelectionPattern) -> Result<FockState<T>> {
    let mut checks = Vec::with_capacity(pattern.constraints.len());
    for (mode, &count) in &pattern.constraints {
        let k = state.space().index_of(mode).ok_or_else(|| Error::UnknownMode(mode.clone()))?;
        checks.push((k, count));
    }
    Ok(state.filter(|occ| checks.iter().all(|&(k, n)| occ.mode_total(k) == n)))
}

/// Projects `state` on `pattern` and renormalizes. `probability` is the squared norm of the
/// projected component, which is the success probability whenever the evolution started
/// from a normalized state (losses show up as missing norm).
pub fn postselect<T: Real>(state: &FockState<T>, pattern: &PostSelectionPattern) -> Result<PostSelection<T>> {
    let projected = project(state, pattern)?;
    let probability = projected.norm_sqr();
    let conditional =
        if projected.is_zero() { FockState::zero(projected.space().clone()) } else { projected.normalized()? };
    Ok(PostSelection { state: conditional, projected, probability })
}

/// Closed-form success probability of the partial symmetrizer,
/// `(⟨Π₊⟩ + |η|² ⟨Π₋⟩) / 8`, from the symmetric and antisymmetric weights of the input.
pub fn success_probability_formula<T: Real>(sym_weight: T, antisym_weight: T, eta_abs: T) -> Result<T> {
    let in_unit = |w: T| w >= T::zero() && w <= T::one();
    if !in_unit(sym_weight) || !in_unit(antisym_weight) {
        return Err(Error::InvalidParameter("projector weights must lie in [0, 1]".into()));
    }
    if (sym_weight + antisym_weight - T::one()).abs() > T::lit(1e-10) {
        return Err(Error::InvalidParameter("projector weights must sum to 1".into()));
    }
    Ok((sym_weight + eta_abs * eta_abs * antisym_weight) / T::lit(8.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{ModeSpace, Occupation, Polarization::*};
    use crate::scalar::real;

    #[test]
    fn formula_examples() {
        let eta = (2.0f64 / 3.0).sqrt();
        assert!((success_probability_formula(0.5, 0.5, eta).unwrap() - 5.0 / 48.0).abs() < 1e-16);
        assert_eq!(success_probability_formula(1.0, 0.0, 0.3).unwrap(), 0.125);
        assert_eq!(success_probability_formula(0.0, 1.0, 0.0).unwrap(), 0.0);
        assert!(success_probability_formula(0.7, 0.7, 0.5).is_err());
        assert!(success_probability_formula(-0.1, 1.1, 0.5).is_err());
    }

    #[test]
    fn projection_and_probability() {
        let s = ModeSpace::new(["A", "B"]).unwrap();
        let t1 = Occupation::from_slots(&s, &[("A", Psi, 1), ("B", Perp, 1)]).unwrap();
        let t2 = Occupation::from_slots(&s, &[("A", Psi, 2)]).unwrap();
        let h = real(std::f64::consts::FRAC_1_SQRT_2);
        let st = FockState::from_amplitudes(s, [(t1.clone(), h), (t2, h)]).unwrap();

        let pat = PostSelectionPattern::new().with("A", 1).with("B", 1);
        let ps = postselect(&st, &pat).unwrap();
        assert!((ps.probability - 0.5).abs() < 1e-15);
        assert!((ps.state.amplitude(&t1).re - 1.0).abs() < 1e-15);

        // idempotent
        let again = postselect(&ps.state, &pat).unwrap();
        assert!((again.probability - 1.0).abs() < 1e-15);
        assert_eq!(again.state, ps.state);

        let greedy = PostSelectionPattern::new().with("A", 3);
        let none = postselect(&st, &greedy).unwrap();
        assert_eq!(none.probability, 0.0);
        assert!(none.is_empty() && none.state.is_zero());

        let unknown = PostSelectionPattern::new().with("Z", 0);
        assert_eq!(postselect(&st, &unknown).unwrap_err(), Error::UnknownMode("Z".into()));
    }
}
