//! Multimode, polarization-resolved bosonic Fock states and creation-operator polynomials.
//!
//! Every spatial mode carries two polarization slots, `ψ` and `ψ⊥`, so a space of `n`
//! spatial modes has `2n` slots. Slot `2k + p` belongs to spatial mode `k` with
//! polarization index `p`. Basis kets are [`Occupation`] vectors over those slots and a
//! [`FockState`] is a sparse, deterministically ordered map from occupations to complex
//! amplitudes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::{real, sqrt_factorial, Real};

/// Polarization index in the abstract covariant basis `{ψ, ψ⊥}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarization {
    Psi = 0,
    Perp = 1,
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::Psi, Polarization::Perp];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        match index {
            0 => Some(Polarization::Psi),
            1 => Some(Polarization::Perp),
            _ => None,
        }
    }

    pub fn orthogonal(self) -> Self {
        match self {
            Polarization::Psi => Polarization::Perp,
            Polarization::Perp => Polarization::Psi,
        }
    }
}

/// One `(spatial mode, polarization)` pair.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeSlot {
    pub spatial: String,
    pub pol: Polarization,
}

impl ModeSlot {
    pub fn new(spatial: impl Into<String>, pol: Polarization) -> Self {
        Self { spatial: spatial.into(), pol }
    }
}

/// Ordered set of uniquely labelled spatial modes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModeSpace {
    modes: Vec<String>,
}

impl ModeSpace {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut modes: Vec<String> = Vec::new();
        for label in labels {
            let label = label.into();
            if label.is_empty() {
                return Err(Error::InvalidParameter("empty mode label".into()));
            }
            if modes.contains(&label) {
                return Err(Error::DuplicateMode(label));
            }
            modes.push(label);
        }
        Ok(Self { modes })
    }

    pub fn empty() -> Self {
        Self { modes: Vec::new() }
    }

    pub fn modes(&self) -> &[String] {
        &self.modes
    }

    /// Number of spatial modes.
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn slot_count(&self) -> usize {
        2 * self.modes.len()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.modes.iter().position(|m| m == label)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.index_of(label).is_some()
    }

    pub fn slot_index(&self, label: &str, pol: Polarization) -> Result<usize> {
        self.index_of(label).map(|k| 2 * k + pol.index()).ok_or_else(|| Error::UnknownMode(label.to_string()))
    }

    pub fn slot(&self, index: usize) -> ModeSlot {
        ModeSlot::new(self.modes[index / 2].clone(), Polarization::from_index(index % 2).unwrap())
    }

    pub fn is_subset_of(&self, other: &ModeSpace) -> bool {
        self.modes.iter().all(|m| other.contains(m))
    }

    /// Equal as sets, ignoring order.
    pub fn same_modes(&self, other: &ModeSpace) -> bool {
        self.len() == other.len() && self.is_subset_of(other)
    }

    /// `self` followed by the modes of `other` not already present.
    pub fn union(&self, other: &ModeSpace) -> ModeSpace {
        let mut modes = self.modes.clone();
        modes.extend(other.modes.iter().filter(|m| !self.contains(m)).cloned());
        ModeSpace { modes }
    }

    pub(crate) fn push(&mut self, label: &str) -> Result<()> {
        if self.contains(label) {
            return Err(Error::DuplicateMode(label.to_string()));
        }
        self.modes.push(label.to_string());
        Ok(())
    }
}

/// Photon counts per slot of a [`ModeSpace`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Occupation(Vec<u16>);

impl Occupation {
    pub fn vacuum(slots: usize) -> Self {
        Self(vec![0; slots])
    }

    pub fn from_counts(counts: Vec<u16>) -> Self {
        Self(counts)
    }

    /// Builds an occupation from `(mode, polarization, count)` triples; repeated slots add up.
    pub fn from_slots(space: &ModeSpace, slots: &[(&str, Polarization, u16)]) -> Result<Self> {
        let mut occ = Self::vacuum(space.slot_count());
        for &(label, pol, n) in slots {
            occ.0[space.slot_index(label, pol)?] += n;
        }
        Ok(occ)
    }

    pub fn counts(&self) -> &[u16] {
        &self.0
    }

    pub fn get(&self, slot: usize) -> u16 {
        self.0[slot]
    }

    pub fn total(&self) -> usize {
        self.0.iter().map(|&n| n as usize).sum()
    }

    /// Photons in spatial mode `mode` summed over both polarizations.
    pub fn mode_total(&self, mode: usize) -> usize {
        self.0[2 * mode] as usize + self.0[2 * mode + 1] as usize
    }

    pub fn is_vacuum(&self) -> bool {
        self.0.iter().all(|&n| n == 0)
    }

    pub fn slot_count(&self) -> usize {
        self.0.len()
    }

    /// `sqrt(prod_i n_i!)`, the bosonic normalization linking monomials and kets.
    pub fn sqrt_factorials<T: Real>(&self) -> T {
        self.0.iter().fold(T::one(), |acc, &n| acc * sqrt_factorial::<T>(n as usize))
    }
}

fn prune<T: Real>(amplitudes: &mut BTreeMap<Occupation, Complex<T>>) {
    let threshold = T::prune_threshold();
    amplitudes.retain(|_, a| a.norm() >= threshold);
}

fn accumulate<T: Real>(map: &mut BTreeMap<Occupation, Complex<T>>, key: Occupation, value: Complex<T>) {
    *map.entry(key).or_insert_with(Complex::zero) += value;
}

/// Sparse pure state (possibly unnormalized) over a [`ModeSpace`].
#[derive(Clone, Debug, PartialEq)]
pub struct FockState<T: Real> {
    space: ModeSpace,
    amplitudes: BTreeMap<Occupation, Complex<T>>,
}

impl<T: Real> FockState<T> {
    /// The zero vector (not the vacuum).
    pub fn zero(space: ModeSpace) -> Self {
        Self { space, amplitudes: BTreeMap::new() }
    }

    pub fn vacuum(space: ModeSpace) -> Self {
        let mut state = Self::zero(space);
        let occ = Occupation::vacuum(state.space.slot_count());
        state.amplitudes.insert(occ, real(T::one()));
        state
    }

    pub fn basis(space: ModeSpace, occ: Occupation) -> Result<Self> {
        Self::from_amplitudes(space, [(occ, real(T::one()))])
    }

    pub fn from_amplitudes<I>(space: ModeSpace, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Occupation, Complex<T>)>,
    {
        let mut amplitudes = BTreeMap::new();
        for (occ, amp) in terms {
            if occ.slot_count() != space.slot_count() {
                return Err(Error::ModeMismatch(format!(
                    "occupation over {} slots in a space of {} slots",
                    occ.slot_count(),
                    space.slot_count()
                )));
            }
            accumulate(&mut amplitudes, occ, amp);
        }
        prune(&mut amplitudes);
        Ok(Self { space, amplitudes })
    }

    pub fn space(&self) -> &ModeSpace {
        &self.space
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Occupation, &Complex<T>)> {
        self.amplitudes.iter()
    }

    /// Number of stored basis terms.
    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_zero(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    pub fn amplitude(&self, occ: &Occupation) -> Complex<T> {
        self.amplitudes.get(occ).copied().unwrap_or_else(Complex::zero)
    }

    pub fn amplitude_of(&self, slots: &[(&str, Polarization, u16)]) -> Result<Complex<T>> {
        Ok(self.amplitude(&Occupation::from_slots(&self.space, slots)?))
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.values().fold(T::zero(), |acc, a| acc + a.norm_sqr())
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm();
        if norm <= T::zero() {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scaled(real(norm.recip())))
    }

    pub fn scaled(&self, factor: Complex<T>) -> Self {
        let mut amplitudes: BTreeMap<_, _> = self.amplitudes.iter().map(|(k, a)| (k.clone(), a * factor)).collect();
        prune(&mut amplitudes);
        Self { space: self.space.clone(), amplitudes }
    }

    /// `self + factor * other`; `other` may live on the same modes in another order.
    pub fn add_scaled(&self, other: &Self, factor: Complex<T>) -> Result<Self> {
        let other = other.reordered_to(&self.space)?;
        let mut amplitudes = self.amplitudes.clone();
        for (k, a) in other.amplitudes {
            accumulate(&mut amplitudes, k, a * factor);
        }
        prune(&mut amplitudes);
        Ok(Self { space: self.space.clone(), amplitudes })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.add_scaled(other, real(T::one()))
    }

    /// Total photon numbers present across the stored terms.
    pub fn photon_numbers(&self) -> BTreeSet<usize> {
        self.amplitudes.keys().map(Occupation::total).collect()
    }

    /// Photon counts found in spatial mode `label` across the stored terms.
    pub fn mode_photon_numbers(&self, label: &str) -> Result<BTreeSet<usize>> {
        let k = self.space.index_of(label).ok_or_else(|| Error::UnknownMode(label.into()))?;
        Ok(self.amplitudes.keys().map(|o| o.mode_total(k)).collect())
    }

    /// Product state on the disjoint union of both mode spaces.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mut space = self.space.clone();
        for m in other.space.modes() {
            space.push(m)?;
        }
        let mut amplitudes = BTreeMap::new();
        for (ka, a) in &self.amplitudes {
            for (kb, b) in &other.amplitudes {
                let mut counts = ka.counts().to_vec();
                counts.extend_from_slice(kb.counts());
                accumulate(&mut amplitudes, Occupation(counts), a * b);
            }
        }
        prune(&mut amplitudes);
        Ok(Self { space, amplitudes })
    }

    /// Re-expresses the state on a larger space; modes absent from `self` hold vacuum.
    pub fn embed(&self, space: &ModeSpace) -> Result<Self> {
        if !self.space.is_subset_of(space) {
            return Err(Error::ModeMismatch(format!("cannot embed {:?} into {:?}", self.space.modes(), space.modes())));
        }
        let positions: Vec<usize> = self.space.modes().iter().map(|m| space.index_of(m).unwrap()).collect();
        let amplitudes = self
            .amplitudes
            .iter()
            .map(|(k, a)| {
                let mut counts = vec![0u16; space.slot_count()];
                for (src, &dst) in positions.iter().enumerate() {
                    counts[2 * dst] = k.0[2 * src];
                    counts[2 * dst + 1] = k.0[2 * src + 1];
                }
                (Occupation(counts), *a)
            })
            .collect();
        Ok(Self { space: space.clone(), amplitudes })
    }

    fn reordered_to(&self, space: &ModeSpace) -> Result<Self> {
        if self.space == *space {
            return Ok(self.clone());
        }
        if !self.space.same_modes(space) {
            return Err(Error::ModeMismatch(format!("{:?} vs {:?}", self.space.modes(), space.modes())));
        }
        self.embed(space)
    }

    /// Drops every mode not listed in `keep`. Fails if a dropped mode is occupied in any term,
    /// since a pure state cannot be reduced over an occupied mode.
    pub fn restrict(&self, keep: &[&str]) -> Result<Self> {
        let target = ModeSpace::new(keep.iter().copied())?;
        let mut positions = Vec::with_capacity(target.len());
        for m in target.modes() {
            positions.push(self.space.index_of(m).ok_or_else(|| Error::UnknownMode(m.clone()))?);
        }
        let dropped: Vec<usize> = (0..self.space.len()).filter(|k| !positions.contains(k)).collect();
        let mut amplitudes = BTreeMap::new();
        for (k, a) in &self.amplitudes {
            if let Some(&d) = dropped.iter().find(|&&d| k.mode_total(d) > 0) {
                return Err(Error::ModeMismatch(format!(
                    "cannot restrict: mode `{}` is occupied",
                    self.space.modes()[d]
                )));
            }
            let mut counts = Vec::with_capacity(target.slot_count());
            for &p in &positions {
                counts.push(k.0[2 * p]);
                counts.push(k.0[2 * p + 1]);
            }
            accumulate(&mut amplitudes, Occupation(counts), *a);
        }
        Ok(Self { space: target, amplitudes })
    }

    /// Renames spatial modes; labels not mentioned keep their names.
    pub fn rename_modes(&self, renames: &[(&str, &str)]) -> Result<Self> {
        for (from, _) in renames {
            if !self.space.contains(from) {
                return Err(Error::UnknownMode(from.to_string()));
            }
        }
        let labels = self.space.modes().iter().map(|m| {
            renames.iter().find(|(from, _)| from == m).map(|(_, to)| to.to_string()).unwrap_or_else(|| m.clone())
        });
        let space = ModeSpace::new(labels)?;
        Ok(Self { space, amplitudes: self.amplitudes.clone() })
    }

    /// Applies `a†` on slot `slot`.
    pub fn create(&self, slot: usize) -> Self {
        let amplitudes = self
            .amplitudes
            .iter()
            .map(|(k, a)| {
                let mut k = k.clone();
                k.0[slot] += 1;
                let factor = T::from_count(k.0[slot] as usize).sqrt();
                (k, a * factor)
            })
            .collect();
        Self { space: self.space.clone(), amplitudes }
    }

    /// Applies `a` on slot `slot`.
    pub fn annihilate(&self, slot: usize) -> Self {
        let amplitudes = self
            .amplitudes
            .iter()
            .filter(|(k, _)| k.0[slot] > 0)
            .map(|(k, a)| {
                let factor = T::from_count(k.0[slot] as usize).sqrt();
                let mut k = k.clone();
                k.0[slot] -= 1;
                (k, a * factor)
            })
            .collect();
        Self { space: self.space.clone(), amplitudes }
    }

    /// Keeps only the terms for which `keep` holds.
    pub fn filter(&self, mut keep: impl FnMut(&Occupation) -> bool) -> Self {
        let amplitudes = self.amplitudes.iter().filter(|(k, _)| keep(k)).map(|(k, a)| (k.clone(), *a)).collect();
        Self { space: self.space.clone(), amplitudes }
    }

    pub(crate) fn from_parts(space: ModeSpace, mut amplitudes: BTreeMap<Occupation, Complex<T>>) -> Self {
        prune(&mut amplitudes);
        Self { space, amplitudes }
    }
}

impl<T: Real> fmt::Display for FockState<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.amplitudes.is_empty() {
            return write!(f, "0");
        }
        for (i, (k, a)) in self.amplitudes.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:.6}{:+.6}i)|", a.re, a.im)?;
            for (m, label) in self.space.modes().iter().enumerate() {
                if m > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}:{},{}", label, k.0[2 * m], k.0[2 * m + 1])?;
            }
            write!(f, "⟩")?;
        }
        Ok(())
    }
}

/// Polynomial in commuting creation operators, keyed by canonical exponent vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorPolynomial<T: Real> {
    space: ModeSpace,
    terms: BTreeMap<Occupation, Complex<T>>,
}

impl<T: Real> OperatorPolynomial<T> {
    pub fn zero(space: ModeSpace) -> Self {
        Self { space, terms: BTreeMap::new() }
    }

    /// The constant polynomial 1 (identity operator).
    pub fn one(space: ModeSpace) -> Self {
        Self::monomial(space.clone(), Occupation::vacuum(space.slot_count()), real(T::one()))
    }

    pub fn monomial(space: ModeSpace, exponents: Occupation, coeff: Complex<T>) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(exponents, coeff);
        prune(&mut terms);
        Self { space, terms }
    }

    pub fn creation(space: ModeSpace, label: &str, pol: Polarization) -> Result<Self> {
        let exps = Occupation::from_slots(&space, &[(label, pol, 1)])?;
        Ok(Self::monomial(space, exps, real(T::one())))
    }

    /// `Σ c · a†` over the listed slots.
    pub fn linear(space: ModeSpace, terms: &[(&str, Polarization, Complex<T>)]) -> Result<Self> {
        let mut out = BTreeMap::new();
        for &(label, pol, c) in terms {
            accumulate(&mut out, Occupation::from_slots(&space, &[(label, pol, 1)])?, c);
        }
        prune(&mut out);
        Ok(Self { space, terms: out })
    }

    pub fn space(&self) -> &ModeSpace {
        &self.space
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Occupation, &Complex<T>)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    pub fn coefficient(&self, exponents: &Occupation) -> Complex<T> {
        self.terms.get(exponents).copied().unwrap_or_else(Complex::zero)
    }

    fn check_space(&self, other: &Self) -> Result<()> {
        if self.space != other.space {
            return Err(Error::ModeMismatch(format!("{:?} vs {:?}", self.space.modes(), other.space.modes())));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_space(other)?;
        let mut terms = self.terms.clone();
        for (k, c) in &other.terms {
            accumulate(&mut terms, k.clone(), *c);
        }
        prune(&mut terms);
        Ok(Self { space: self.space.clone(), terms })
    }

    pub fn scaled(&self, factor: Complex<T>) -> Self {
        let mut terms: BTreeMap<_, _> = self.terms.iter().map(|(k, c)| (k.clone(), c * factor)).collect();
        prune(&mut terms);
        Self { space: self.space.clone(), terms }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_space(other)?;
        let mut terms = BTreeMap::new();
        for (ka, a) in &self.terms {
            for (kb, b) in &other.terms {
                let counts = ka.0.iter().zip(&kb.0).map(|(x, y)| x + y).collect();
                accumulate(&mut terms, Occupation(counts), a * b);
            }
        }
        prune(&mut terms);
        Ok(Self { space: self.space.clone(), terms })
    }

    pub fn pow(&self, exponent: usize) -> Result<Self> {
        let mut acc = Self::one(self.space.clone());
        for _ in 0..exponent {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// The polynomial acting on the vacuum.
    pub fn to_state(&self) -> FockState<T> {
        monomial_to_state(self)
    }

    /// Inverse of [`monomial_to_state`]: divides each amplitude by `sqrt(prod n!)`.
    pub fn from_state(state: &FockState<T>) -> Self {
        let terms = state.iter().map(|(k, a)| (k.clone(), a / k.sqrt_factorials::<T>())).collect();
        Self { space: state.space().clone(), terms }
    }

    /// Applies the polynomial (creation operators) to `state`.
    pub fn act(&self, state: &FockState<T>) -> Result<FockState<T>> {
        self.check_state(state)?;
        let mut out = BTreeMap::new();
        for (e, c) in &self.terms {
            for (k, a) in state.iter() {
                let counts: Vec<u16> = k.0.iter().zip(&e.0).map(|(n, d)| n + d).collect();
                let target = Occupation(counts);
                let factor = target.sqrt_factorials::<T>() / k.sqrt_factorials::<T>();
                accumulate(&mut out, target, c * a * factor);
            }
        }
        Ok(FockState::from_parts(self.space.clone(), out))
    }

    /// Applies the Hermitian adjoint: conjugated coefficients on annihilation monomials.
    pub fn act_adjoint(&self, state: &FockState<T>) -> Result<FockState<T>> {
        self.check_state(state)?;
        let mut out = BTreeMap::new();
        for (e, c) in &self.terms {
            for (k, a) in state.iter() {
                if k.0.iter().zip(&e.0).any(|(n, d)| n < d) {
                    continue;
                }
                let counts: Vec<u16> = k.0.iter().zip(&e.0).map(|(n, d)| n - d).collect();
                let target = Occupation(counts);
                let factor = k.sqrt_factorials::<T>() / target.sqrt_factorials::<T>();
                accumulate(&mut out, target, c.conj() * a * factor);
            }
        }
        Ok(FockState::from_parts(self.space.clone(), out))
    }

    fn check_state(&self, state: &FockState<T>) -> Result<()> {
        if &self.space != state.space() {
            return Err(Error::ModeMismatch(format!(
                "operator on {:?}, state on {:?}",
                self.space.modes(),
                state.space().modes()
            )));
        }
        Ok(())
    }
}

/// Applies a creation-operator polynomial to the vacuum: each monomial `c · prod (a_i†)^n_i`
/// becomes amplitude `c · sqrt(prod n_i!)` on the ket with occupations `n_i`.
pub fn monomial_to_state<T: Real>(poly: &OperatorPolynomial<T>) -> FockState<T> {
    let amplitudes = poly.terms.iter().map(|(k, c)| (k.clone(), c * k.sqrt_factorials::<T>())).collect();
    FockState::from_parts(poly.space.clone(), amplitudes)
}

/// `⟨lhs|rhs⟩`, conjugate-linear in `lhs`. Both states must live on the same set of modes.
pub fn inner_product<T: Real>(lhs: &FockState<T>, rhs: &FockState<T>) -> Result<Complex<T>> {
    let rhs = rhs.reordered_to(lhs.space())?;
    let mut acc = Complex::zero();
    for (k, a) in lhs.iter() {
        if let Some(b) = rhs.amplitudes.get(k) {
            acc += a.conj() * b;
        }
    }
    Ok(acc)
}

/// Per-ket differences `lhs − rhs` over the union of supports, without pruning.
fn differences<T: Real>(lhs: &FockState<T>, rhs: &FockState<T>) -> Result<Vec<Complex<T>>> {
    let rhs = rhs.reordered_to(lhs.space())?;
    let mut out: Vec<Complex<T>> =
        lhs.iter().map(|(k, a)| a - rhs.amplitudes.get(k).copied().unwrap_or_else(Complex::zero)).collect();
    out.extend(rhs.iter().filter(|(k, _)| !lhs.amplitudes.contains_key(*k)).map(|(_, b)| -b));
    Ok(out)
}

/// `max_k |lhs_k − rhs_k|`, unaffected by the prune threshold.
pub fn max_amplitude_difference<T: Real>(lhs: &FockState<T>, rhs: &FockState<T>) -> Result<T> {
    Ok(differences(lhs, rhs)?.iter().fold(T::zero(), |m, d| m.max(d.norm())))
}

/// `‖lhs − rhs‖`, unaffected by the prune threshold.
pub fn distance<T: Real>(lhs: &FockState<T>, rhs: &FockState<T>) -> Result<T> {
    Ok(differences(lhs, rhs)?.iter().fold(T::zero(), |acc, d| acc + d.norm_sqr()).sqrt())
}

/// `|⟨lhs|rhs⟩| / (‖lhs‖ ‖rhs‖)`.
pub fn overlap_magnitude<T: Real>(lhs: &FockState<T>, rhs: &FockState<T>) -> Result<T> {
    let denom = lhs.norm() * rhs.norm();
    if denom <= T::zero() {
        return Err(Error::ZeroNorm);
    }
    Ok(inner_product(lhs, rhs)?.norm() / denom)
}

/// Single-clone fidelity in spatial mode `spatial`: the probability-weighted fraction
/// `j / (j + k)` of photons in that mode carrying `target_pol`, where `j` counts photons
/// with the target polarization and `k` those with the orthogonal one.
pub fn single_photon_fidelity<T: Real>(state: &FockState<T>, spatial: &str, target_pol: Polarization) -> Result<T> {
    let mode = state.space().index_of(spatial).ok_or_else(|| Error::UnknownMode(spatial.into()))?;
    let norm = state.norm_sqr();
    if norm <= T::zero() {
        return Err(Error::ZeroNorm);
    }
    let mut weighted = T::zero();
    for (k, a) in state.iter() {
        let j = k.get(2 * mode + target_pol.index()) as usize;
        let total = k.mode_total(mode);
        if total == 0 {
            return Err(Error::EmptyMode(spatial.into()));
        }
        weighted += a.norm_sqr() * T::from_count(j) / T::from_count(total);
    }
    Ok(weighted / norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;
    use Polarization::{Perp, Psi};

    fn ab() -> ModeSpace {
        ModeSpace::new(["A", "B"]).unwrap()
    }

    /// `(a_ψ† b_⊥† − a_⊥† b_ψ†)(a_ψ† b_⊥† + q a_⊥† b_ψ†)` on modes A, B.
    fn two_clone_poly(q: f64) -> OperatorPolynomial<f64> {
        let s = ab();
        let ap = OperatorPolynomial::creation(s.clone(), "A", Psi).unwrap();
        let ao = OperatorPolynomial::creation(s.clone(), "A", Perp).unwrap();
        let bp = OperatorPolynomial::creation(s.clone(), "B", Psi).unwrap();
        let bo = OperatorPolynomial::creation(s.clone(), "B", Perp).unwrap();
        let x = ap.mul(&bo).unwrap().add(&ao.mul(&bp).unwrap().scaled(real(-1.0))).unwrap();
        let y = ap.mul(&bo).unwrap().add(&ao.mul(&bp).unwrap().scaled(real(q))).unwrap();
        x.mul(&y).unwrap()
    }

    #[test]
    fn duplicate_labels_rejected() {
        assert_eq!(ModeSpace::new(["A", "A"]).unwrap_err(), Error::DuplicateMode("A".into()));
    }

    #[test]
    fn squared_creation_gives_sqrt_two() {
        let s = ModeSpace::new(["a"]).unwrap();
        let p = OperatorPolynomial::<f64>::creation(s.clone(), "a", Psi).unwrap().pow(2).unwrap();
        let st = monomial_to_state(&p);
        let amp = st.amplitude_of(&[("a", Psi, 2)]).unwrap();
        assert!((amp.re - 2f64.sqrt()).abs() < 1e-15 && amp.im == 0.0);
        assert_eq!(st.len(), 1);
    }

    #[test]
    fn distinct_modes_give_unit_amplitude() {
        let s = ab();
        let p = OperatorPolynomial::<f64>::creation(s.clone(), "A", Psi)
            .unwrap()
            .mul(&OperatorPolynomial::creation(s, "B", Psi).unwrap())
            .unwrap();
        let amp = p.to_state().amplitude_of(&[("A", Psi, 1), ("B", Psi, 1)]).unwrap();
        assert_eq!(amp, real(1.0));
    }

    #[test]
    fn two_clone_state_amplitude_ratios() {
        for q in [0.0, 0.1, 0.37, 1.0] {
            let st = two_clone_poly(q).to_state();
            let a = st.amplitude_of(&[("A", Psi, 2), ("B", Perp, 2)]).unwrap();
            let b = st.amplitude_of(&[("A", Psi, 1), ("A", Perp, 1), ("B", Psi, 1), ("B", Perp, 1)]).unwrap();
            let c = st.amplitude_of(&[("A", Perp, 2), ("B", Psi, 2)]).unwrap();
            assert!((a.re - 2.0).abs() < 1e-14);
            assert!((b.re - (q - 1.0)).abs() < 1e-14);
            assert!((c.re + 2.0 * q).abs() < 1e-14);
            // q = 0 drops c, q = 1 cancels b
            let expected_len = if q == 0.0 || q == 1.0 { 2 } else { 3 };
            assert_eq!(st.len(), expected_len);
        }
    }

    #[test]
    fn inner_product_examples() {
        let s = ab();
        let x = OperatorPolynomial::linear(s.clone(), &[("A", Psi, real(1.0))])
            .unwrap()
            .mul(&OperatorPolynomial::linear(s.clone(), &[("B", Perp, real(1.0))]).unwrap())
            .unwrap()
            .add(
                &OperatorPolynomial::linear(s.clone(), &[("A", Perp, real(-1.0))])
                    .unwrap()
                    .mul(&OperatorPolynomial::linear(s.clone(), &[("B", Psi, real(1.0))]).unwrap())
                    .unwrap(),
            )
            .unwrap();
        let singlet = x.to_state().normalized().unwrap();
        let ip: Complex<f64> = inner_product(&singlet, &singlet).unwrap();
        assert!((ip.re - 1.0).abs() < 1e-15 && ip.im.abs() < 1e-15);

        let two_clone = two_clone_poly(0.3).to_state();
        let ket =
            FockState::basis(s.clone(), Occupation::from_slots(&s, &[("A", Psi, 2), ("B", Perp, 2)]).unwrap()).unwrap();
        let ip = inner_product(&ket, &two_clone).unwrap();
        assert!((ip.re - 2.0).abs() < 1e-14);

        let other = FockState::<f64>::basis(s.clone(), Occupation::from_slots(&s, &[("A", Perp, 1)]).unwrap()).unwrap();
        assert_eq!(inner_product(&ket, &other).unwrap(), Complex::zero());
    }

    #[test]
    fn inner_product_rejects_mismatched_spaces() {
        let a = FockState::<f64>::vacuum(ab());
        let b = FockState::<f64>::vacuum(ModeSpace::new(["A", "C"]).unwrap());
        assert!(matches!(inner_product(&a, &b), Err(Error::ModeMismatch(_))));
        // same modes in a different order are fine
        let c = FockState::<f64>::vacuum(ModeSpace::new(["B", "A"]).unwrap());
        assert_eq!(inner_product(&a, &c).unwrap(), real(1.0));
    }

    #[test]
    fn fidelity_examples() {
        let f0 = single_photon_fidelity(&two_clone_poly(0.0).to_state(), "A", Psi).unwrap();
        assert!((f0 - 0.9).abs() < 1e-15);
        let qopt = 5.0 - 2.0 * 6f64.sqrt();
        let fo = single_photon_fidelity(&two_clone_poly(qopt).to_state(), "A", Psi).unwrap();
        assert!((fo - 0.5 * (1.0 + (2.0f64 / 3.0).sqrt())).abs() < 1e-14);
        // q = 1: weights 4 : 0 : 4, so 4·1/(4+4)
        let f1 = single_photon_fidelity(&two_clone_poly(1.0).to_state(), "A", Psi).unwrap();
        assert!((f1 - 0.5).abs() < 1e-15);
        // anticlones in B see the same fidelity against ψ⊥
        let fb = single_photon_fidelity(&two_clone_poly(0.0).to_state(), "B", Perp).unwrap();
        assert!((fb - 0.9).abs() < 1e-15);
    }

    #[test]
    fn fidelity_errors() {
        let s = ab();
        assert_eq!(single_photon_fidelity(&FockState::<f64>::zero(s.clone()), "A", Psi), Err(Error::ZeroNorm));
        let only_b = FockState::<f64>::basis(s.clone(), Occupation::from_slots(&s, &[("B", Psi, 1)]).unwrap()).unwrap();
        assert_eq!(single_photon_fidelity(&only_b, "A", Psi), Err(Error::EmptyMode("A".into())));
        assert!(matches!(single_photon_fidelity(&only_b, "Z", Psi), Err(Error::UnknownMode(_))));
    }

    #[test]
    fn ladder_operators() {
        let s = ModeSpace::new(["a"]).unwrap();
        let two = FockState::<f64>::basis(s.clone(), Occupation::from_counts(vec![2, 0])).unwrap();
        let three = two.create(0);
        assert!((three.amplitude(&Occupation::from_counts(vec![3, 0])).re - 3f64.sqrt()).abs() < 1e-15);
        let one = two.annihilate(0);
        assert!((one.amplitude(&Occupation::from_counts(vec![1, 0])).re - 2f64.sqrt()).abs() < 1e-15);
        assert!(FockState::<f64>::vacuum(s).annihilate(0).is_zero());
    }

    #[test]
    fn act_and_adjoint_are_consistent_with_ladders() {
        let s = ab();
        let x = OperatorPolynomial::<f64>::creation(s.clone(), "A", Psi)
            .unwrap()
            .mul(&OperatorPolynomial::creation(s.clone(), "B", Perp).unwrap())
            .unwrap()
            .scaled(cplx(0.0, 1.0));
        let st = FockState::basis(s.clone(), Occupation::from_counts(vec![1, 0, 2, 1])).unwrap();
        let via_poly = x.act(&st).unwrap();
        let via_ladders = st.create(0).create(3).scaled(cplx(0.0, 1.0));
        assert_eq!(via_poly, via_ladders);
        let down = x.act_adjoint(&st).unwrap();
        let via_ladders = st.annihilate(0).annihilate(3).scaled(cplx(0.0, -1.0));
        assert_eq!(down, via_ladders);
    }

    #[test]
    fn restrict_and_rename() {
        let s = ModeSpace::new(["A", "junk", "B"]).unwrap();
        let st =
            FockState::<f64>::basis(s.clone(), Occupation::from_slots(&s, &[("A", Psi, 1), ("B", Perp, 1)]).unwrap())
                .unwrap();
        let r = st.restrict(&["B", "A"]).unwrap();
        assert_eq!(r.space().modes(), &["B".to_string(), "A".to_string()]);
        assert_eq!(r.amplitude_of(&[("A", Psi, 1), ("B", Perp, 1)]).unwrap(), real(1.0));
        assert!(st.restrict(&["A"]).is_err());
        let renamed = r.rename_modes(&[("A", "X")]).unwrap();
        assert!(renamed.space().contains("X") && !renamed.space().contains("A"));
        assert!(r.rename_modes(&[("B", "A")]).is_err());
    }

    #[test]
    fn tensor_requires_disjoint_modes() {
        let a = FockState::<f64>::vacuum(ModeSpace::new(["A"]).unwrap());
        assert!(a.tensor(&a).is_err());
        let b = FockState::<f64>::vacuum(ModeSpace::new(["B"]).unwrap());
        assert_eq!(a.tensor(&b).unwrap().space().len(), 2);
    }

    #[test]
    fn display_is_readable() {
        let s = ModeSpace::new(["A"]).unwrap();
        let st = FockState::<f64>::basis(s, Occupation::from_counts(vec![1, 0])).unwrap();
        assert_eq!(st.to_string(), "(1.000000+0.000000i)|A:1,0⟩");
    }
}
