//! Polarization-insensitive parametric amplifier, `H = i g X + h.c.`, as an oracle for the
//! linear-optics cloner.
//!
//! Two independent evolutions are provided. [`AmplifierModel::evolve_factorized`] uses
//! `e^{λX} (1−λ²)^{n/2+1} e^{−λX†}`; [`AmplifierModel::evolve_dense`] exponentiates the
//! generator as a dense matrix on the sector of Fock space reachable from the input.

use std::collections::{BTreeMap, VecDeque};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::analysis::formulas::reference_components;
use crate::error::{Error, Result};
use crate::fock::{
    distance, inner_product, max_amplitude_difference, FockState, ModeSpace, Occupation, OperatorPolynomial,
    Polarization,
};
use crate::interferometers::pair_creation_operator;
use crate::postselect::{postselect, PostSelectionPattern};
use crate::scalar::{real, Real};

/// Photons added to the truncation for the first dense working space.
const DENSE_MARGIN: usize = 8;
/// Hard ceiling on the dense working space, in photons above the truncation.
const DENSE_MAX_MARGIN: usize = 96;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmplifierModel<T: Real> {
    pub gain: T,
    /// `tanh(gain)`.
    pub lambda: T,
    /// Largest total photon number kept.
    pub truncation: usize,
}

impl<T: Real> AmplifierModel<T> {
    pub fn from_gain(gain: T, truncation: usize) -> Result<Self> {
        if !gain.is_finite() || gain < T::zero() {
            return Err(Error::InvalidParameter(format!("gain {gain} must be finite and ≥ 0")));
        }
        Self::from_lambda(gain.tanh(), truncation)
    }

    pub fn from_lambda(lambda: T, truncation: usize) -> Result<Self> {
        if !(lambda >= T::zero() && lambda < T::one()) {
            return Err(Error::InvalidParameter(format!("λ = {lambda} outside [0, 1)")));
        }
        Ok(Self { gain: lambda.atanh(), lambda, truncation })
    }

    /// Signal `A` and idler `B`.
    pub fn space() -> ModeSpace {
        ModeSpace::new(["A", "B"]).expect("static labels")
    }

    /// `|ψ⟩_A |ψ⊥⟩_B`.
    pub fn standard_input() -> FockState<T> {
        let space = Self::space();
        let occ = Occupation::from_slots(&space, &[("A", Polarization::Psi, 1), ("B", Polarization::Perp, 1)])
            .expect("static labels");
        FockState::basis(space, occ).expect("slot count matches")
    }

    fn x_operator() -> Result<OperatorPolynomial<T>> {
        pair_creation_operator(&Self::space(), "A", "B")
    }

    fn check_input(&self, input: &FockState<T>) -> Result<()> {
        if !input.space().same_modes(&Self::space()) {
            return Err(Error::ModeMismatch("amplifier acts on modes A and B".into()));
        }
        if let Some(&n) = input.photon_numbers().iter().next_back() {
            if n > self.truncation {
                return Err(Error::Truncation { truncation: self.truncation, required: n });
            }
        }
        Ok(())
    }

    /// Factorized evolution, projected on at most `truncation` photons. The projection is
    /// exact: every factor either lowers, keeps, or raises the photon number monotonically.
    pub fn evolve_factorized(&self, input: &FockState<T>) -> Result<FockState<T>> {
        self.check_input(input)?;
        let x = Self::x_operator()?;
        let lambda = self.lambda;

        // e^{−λX†}: terminates once every photon pair is removed.
        let mut lowered = input.clone();
        let mut term = input.clone();
        for k in 1.. {
            term = x.act_adjoint(&term)?.scaled(real(-lambda / T::from_count(k)));
            if term.is_zero() {
                break;
            }
            lowered = lowered.add(&term)?;
        }

        // (1−λ²)^{n/2+1}
        let base = T::one() - lambda * lambda;
        let mut weighted = FockState::zero(Self::space());
        for n in lowered.photon_numbers() {
            let part = lowered.filter(|o| o.total() == n);
            let exponent = T::from_count(n) / T::lit(2.0) + T::one();
            weighted = weighted.add(&part.scaled(real(base.powf(exponent))))?;
        }

        // e^{λX}, cut at the truncation.
        let cap = self.truncation;
        let mut out = weighted.clone();
        let mut term = weighted;
        for k in 1.. {
            term = x.act(&term)?.scaled(real(lambda / T::from_count(k))).filter(|o| o.total() <= cap);
            if term.is_zero() {
                break;
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// Dense `exp(g(X − X†))` on the sector reachable from `input`, working with enough
    /// extra photons that the projection on at most `truncation` photons has converged.
    pub fn evolve_dense(&self, input: &FockState<T>) -> Result<DenseEvolution<T>> {
        self.check_input(input)?;
        let tol = T::epsilon() * T::lit(512.0);
        let mut working = self.truncation + DENSE_MARGIN;
        let mut previous: Option<FockState<T>> = None;
        while working <= self.truncation + DENSE_MAX_MARGIN {
            let full = dense_exponential_action(self.gain, input, working)?;
            let cut = self.truncation;
            let projected = full.filter(|o| o.total() <= cut);
            if let Some(prev) = &previous {
                if max_amplitude_difference(&projected, prev)? <= tol {
                    return Ok(DenseEvolution { state: projected, working_photons: working });
                }
            }
            previous = Some(projected);
            working += DENSE_MARGIN;
        }
        Err(Error::NotConverged(format!(
            "dense amplifier evolution at λ = {} did not settle within {} photons",
            self.lambda,
            self.truncation + DENSE_MAX_MARGIN
        )))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseEvolution<T: Real> {
    /// Evolved state projected on at most `truncation` photons.
    pub state: FockState<T>,
    /// Photon cap of the dense space that produced it.
    pub working_photons: usize,
}

/// Occupations reachable from the support of `input` by `X` and `X†`, up to `cap` photons.
fn reachable_basis<T: Real>(x: &OperatorPolynomial<T>, input: &FockState<T>, cap: usize) -> Result<Vec<Occupation>> {
    let space = input.space().clone();
    let mut seen: BTreeMap<Occupation, ()> = BTreeMap::new();
    let mut queue: VecDeque<Occupation> = input.iter().map(|(o, _)| o.clone()).collect();
    while let Some(occ) = queue.pop_front() {
        if seen.contains_key(&occ) || occ.total() > cap {
            continue;
        }
        seen.insert(occ.clone(), ());
        let ket = FockState::basis(space.clone(), occ)?;
        for next in [x.act(&ket)?, x.act_adjoint(&ket)?] {
            for (o, _) in next.iter() {
                if o.total() <= cap && !seen.contains_key(o) {
                    queue.push_back(o.clone());
                }
            }
        }
    }
    Ok(seen.into_keys().collect())
}

fn dense_exponential_action<T: Real>(gain: T, input: &FockState<T>, cap: usize) -> Result<FockState<T>> {
    let x = AmplifierModel::<T>::x_operator()?;
    let basis = reachable_basis(&x, input, cap)?;
    let index: BTreeMap<&Occupation, usize> = basis.iter().enumerate().map(|(i, o)| (o, i)).collect();
    let n = basis.len();
    let space = input.space().clone();

    // Generator −iH = g(X − X†) is real in the Fock basis. Outside the cap it is cut.
    let mut gen = DMatrix::<T>::zeros(n, n);
    for (col, occ) in basis.iter().enumerate() {
        let image = x.act(&FockState::basis(space.clone(), occ.clone())?)?;
        for (o, a) in image.iter() {
            if let Some(&row) = index.get(o) {
                gen[(row, col)] += gain * a.re;
                gen[(col, row)] -= gain * a.re;
            }
        }
    }

    let u = expm(&gen);
    let mut re = DVector::<T>::zeros(n);
    let mut im = DVector::<T>::zeros(n);
    for (o, a) in input.iter() {
        let i = index[o];
        re[i] = a.re;
        im[i] = a.im;
    }
    let (re, im) = (&u * re, &u * im);
    let terms = basis.into_iter().enumerate().map(|(i, o)| (o, Complex::new(re[i], im[i])));
    FockState::from_amplitudes(space, terms)
}

/// Matrix exponential by scaling and squaring with a Taylor core.
pub fn expm<T: Real>(a: &DMatrix<T>) -> DMatrix<T> {
    let n = a.nrows();
    let norm = (0..n).map(|j| a.column(j).iter().fold(T::zero(), |s, v| s + v.abs())).fold(T::zero(), T::max);
    let mut squarings = 0u32;
    let half = T::lit(0.5);
    let mut scale = T::one();
    while norm * scale > half {
        scale *= half;
        squarings += 1;
    }
    let b = a * scale;
    let mut result = DMatrix::<T>::identity(n, n);
    let mut term = DMatrix::<T>::identity(n, n);
    for k in 1..=30 {
        term = &term * &b / T::from_count(k);
        result += &term;
        let size = term.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        if size <= T::epsilon() * T::lit(1e-3) {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Least-squares fit of a state on `A`, `B` to `c (u + q v)` with
/// `u = X^{M−1} a_ψ† b_⊥† |0⟩` and `v = X^{M−1} a_⊥† b_ψ† |0⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QFit<T: Real> {
    pub q: T,
    /// Imaginary part of the unconstrained complex ratio.
    pub q_imag: T,
    /// `‖ψ − c(u + q v)‖ / ‖ψ‖` with the real `q` above.
    pub residual: T,
}

pub fn fit_q<T: Real>(state: &FockState<T>, m: usize) -> Result<QFit<T>> {
    let (u, v) = reference_components::<T>(m)?;
    let norm = state.norm();
    if norm <= T::zero() {
        return Err(Error::ZeroNorm);
    }
    let uu = inner_product(&u, &u)?;
    let uv = inner_product(&u, &v)?;
    let vv = inner_product(&v, &v)?;
    let us = inner_product(&u, state)?;
    let vs = inner_product(&v, state)?;
    let det = uu * vv - uv * uv.conj();
    if det.norm() <= T::epsilon() * uu.norm() * vv.norm() {
        return Err(Error::InvalidParameter("fit basis is degenerate".into()));
    }
    let c1 = (vv * us - uv * vs) / det;
    let c2 = (uu * vs - uv.conj() * us) / det;
    if c1.norm() <= T::epsilon() * norm {
        return Err(Error::InvalidParameter("state has no component along the leading term".into()));
    }
    let ratio = c2 / c1;
    let model = u.add_scaled(&v, real(ratio.re))?.scaled(c1);
    let residual = distance(state, &model)? / norm;
    Ok(QFit { q: ratio.re, q_imag: ratio.im, residual })
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmplifierOutput<T: Real> {
    /// Normalized conditional state with `M` photons in each of `A`, `B`.
    pub state: FockState<T>,
    pub probability: T,
    pub fit: QFit<T>,
}

/// Amplifies `|ψ⟩_A|ψ⊥⟩_B` and heralds `M` photons in each output mode.
pub fn amplifier_output<T: Real>(model: &AmplifierModel<T>, m: usize) -> Result<AmplifierOutput<T>> {
    if m < 1 {
        return Err(Error::InvalidParameter("M must be at least 1".into()));
    }
    if model.truncation < 2 * m {
        return Err(Error::Truncation { truncation: model.truncation, required: 2 * m });
    }
    let out = model.evolve_factorized(&AmplifierModel::standard_input())?;
    let selected = postselect(&out, &PostSelectionPattern::new().with("A", m).with("B", m))?;
    if selected.is_empty() {
        return Err(Error::EmptyPostSelection);
    }
    let fit = fit_q(&selected.state, m)?;
    Ok(AmplifierOutput { state: selected.state, probability: selected.probability, fit })
}

/// `λ` at which the heralded `M`-photon output has coefficient `q`, by bisection.
/// The fitted `q` grows monotonically from 0 and changes sign past a pole, so any
/// negative value is treated as overshoot.
pub fn lambda_for_q<T: Real>(q: T, m: usize) -> Result<T> {
    if !q.is_finite() || q <= T::zero() {
        return Err(Error::InvalidParameter(format!("target q = {q} must be positive")));
    }
    let q_at = |lambda: T| -> Result<T> {
        let model = AmplifierModel::from_lambda(lambda, 2 * m)?;
        Ok(amplifier_output(&model, m)?.fit.q)
    };
    let overshoot = |value: T| value >= q || value < T::zero();
    let mut lo = T::zero();
    let mut hi = T::lit(0.5);
    while !overshoot(q_at(hi)?) {
        lo = hi;
        hi = (hi + T::one()) / T::lit(2.0);
        if T::one() - hi < T::epsilon() * T::lit(64.0) {
            return Err(Error::NotConverged("no λ < 1 reaches the requested q".into()));
        }
    }
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if overshoot(q_at(mid)?) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo + hi) / T::lit(2.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gain_is_identity() {
        let model = AmplifierModel::<f64>::from_lambda(0.0, 4).unwrap();
        let input = AmplifierModel::standard_input();
        assert_eq!(model.evolve_factorized(&input).unwrap(), input);
        let out = amplifier_output(&model, 1).unwrap();
        assert!(out.fit.q.abs() < 1e-15 && out.fit.residual < 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(AmplifierModel::<f64>::from_lambda(1.0, 4).is_err());
        assert!(AmplifierModel::<f64>::from_gain(-0.1, 4).is_err());
        let model = AmplifierModel::<f64>::from_lambda(0.3, 3).unwrap();
        assert_eq!(amplifier_output(&model, 2).unwrap_err(), Error::Truncation { truncation: 3, required: 4 });
    }

    #[test]
    fn expm_rotation() {
        let t = 0.7f64;
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -t, t, 0.0]);
        let e = expm(&a);
        assert!((e[(0, 0)] - t.cos()).abs() < 1e-15);
        assert!((e[(1, 0)] - t.sin()).abs() < 1e-15);
    }

    #[test]
    fn dense_matches_factorized_small() {
        let model = AmplifierModel::<f64>::from_lambda(0.2, 6).unwrap();
        let input = AmplifierModel::standard_input();
        let a = model.evolve_factorized(&input).unwrap();
        let b = model.evolve_dense(&input).unwrap().state;
        assert!(max_amplitude_difference(&a, &b).unwrap() < 1e-12);
    }
}
