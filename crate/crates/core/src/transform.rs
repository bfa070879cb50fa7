//! Linear optical elements as linear maps on creation operators.
//!
//! A [`LinearModeMap`] holds a complex matrix `T` with rows indexed by output slots and
//! columns by input slots; an input creation operator is substituted as
//! `a†_in,i ↦ Σ_j T[j, i] a†_out,j`. Maps need not be unitary: an attenuator rescales
//! `a† ↦ η a†`, which after photon-number post-selection is equivalent to coupling the
//! mode to an unobserved loss mode.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::fock::{FockState, ModeSpace, Occupation, Polarization};
use crate::scalar::{real, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct LinearModeMap<T: Real> {
    input: ModeSpace,
    output: ModeSpace,
    matrix: DMatrix<Complex<T>>,
    unitary: bool,
}

impl<T: Real> LinearModeMap<T> {
    pub fn identity(space: ModeSpace) -> Self {
        let n = space.slot_count();
        Self { input: space.clone(), output: space, matrix: DMatrix::identity(n, n), unitary: true }
    }

    /// Builds a map from a full slot matrix (rows: output slots, columns: input slots).
    /// The unitary flag is set when `T†T = I` holds to a few hundred ulps.
    pub fn from_matrix(input: ModeSpace, output: ModeSpace, matrix: DMatrix<Complex<T>>) -> Result<Self> {
        if matrix.nrows() != output.slot_count() || matrix.ncols() != input.slot_count() {
            return Err(Error::ModeMismatch(format!(
                "matrix is {}x{}, spaces need {}x{}",
                matrix.nrows(),
                matrix.ncols(),
                output.slot_count(),
                input.slot_count()
            )));
        }
        let mut map = Self { input, output, matrix, unitary: false };
        map.unitary = map.unitarity_defect() <= T::epsilon() * T::lit(256.0);
        Ok(map)
    }

    /// Polarization-preserving map given by a spatial matrix `spatial[out][in]`, acting as
    /// `spatial ⊗ I₂` on the polarization slots.
    pub fn spatial(inputs: &[&str], outputs: &[&str], spatial: &[Vec<Complex<T>>]) -> Result<Self> {
        let input = ModeSpace::new(inputs.iter().copied())?;
        let output = ModeSpace::new(outputs.iter().copied())?;
        if spatial.len() != output.len() || spatial.iter().any(|row| row.len() != input.len()) {
            return Err(Error::InvalidParameter("spatial matrix shape does not match the mode lists".into()));
        }
        let mut m = DMatrix::zeros(output.slot_count(), input.slot_count());
        for (j, row) in spatial.iter().enumerate() {
            for (i, &c) in row.iter().enumerate() {
                for p in 0..2 {
                    m[(2 * j + p, 2 * i + p)] = c;
                }
            }
        }
        Self::from_matrix(input, output, m)
    }

    /// Balanced beam splitter in the real Hadamard convention:
    /// `in1† ↦ (out1† + out2†)/√2`, `in2† ↦ (out1† − out2†)/√2`, on both polarizations.
    pub fn balanced_beam_splitter(in1: &str, in2: &str, out1: &str, out2: &str) -> Result<Self> {
        let h = real(T::FRAC_1_SQRT_2());
        let mut map = Self::spatial(&[in1, in2], &[out1, out2], &[vec![h, h], vec![h, -h]])?;
        map.unitary = true;
        Ok(map)
    }

    /// `a† ↦ η a†` on both polarizations of `mode`, with `0 ≤ η ≤ 1`.
    pub fn attenuator(mode: &str, eta: T) -> Result<Self> {
        if !(eta >= T::zero() && eta <= T::one()) {
            return Err(Error::InvalidParameter(format!("attenuator transmittance {eta} outside [0, 1]")));
        }
        let mut map = Self::spatial(&[mode], &[mode], &[vec![real(eta)]])?;
        map.unitary = eta == T::one();
        Ok(map)
    }

    /// `a† ↦ e^{iφ} a†` on both polarizations of `mode`.
    pub fn phase_shifter(mode: &str, phi: T) -> Result<Self> {
        let mut map = Self::spatial(&[mode], &[mode], &[vec![Complex::from_polar(T::one(), phi)]])?;
        map.unitary = true;
        Ok(map)
    }

    /// Applies the 2×2 polarization matrix `u` (columns are images of `ψ`, `ψ⊥`) to every
    /// spatial mode of `space`. Used to rotate the abstract basis in covariance checks.
    pub fn polarization_rotation(space: &ModeSpace, u: [[Complex<T>; 2]; 2]) -> Self {
        let n = space.slot_count();
        let mut m = DMatrix::zeros(n, n);
        for k in 0..space.len() {
            for (p_out, row) in u.iter().enumerate() {
                for (p_in, &c) in row.iter().enumerate() {
                    m[(2 * k + p_out, 2 * k + p_in)] = c;
                }
            }
        }
        Self::from_matrix(space.clone(), space.clone(), m).expect("square block-diagonal matrix")
    }

    pub fn input_space(&self) -> &ModeSpace {
        &self.input
    }

    pub fn output_space(&self) -> &ModeSpace {
        &self.output
    }

    pub fn matrix(&self) -> &DMatrix<Complex<T>> {
        &self.matrix
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    /// Matrix element for `in_label,in_pol ↦ out_label,out_pol`.
    pub fn entry(
        &self,
        out_label: &str,
        out_pol: Polarization,
        in_label: &str,
        in_pol: Polarization,
    ) -> Result<Complex<T>> {
        Ok(self.matrix[(self.output.slot_index(out_label, out_pol)?, self.input.slot_index(in_label, in_pol)?)])
    }

    /// `max |(T†T − I)_{ij}|`; infinite for non-square maps.
    pub fn unitarity_defect(&self) -> T {
        if self.matrix.nrows() != self.matrix.ncols() {
            return T::infinity();
        }
        let gram = self.matrix.adjoint_manual() * &self.matrix;
        let mut worst = T::zero();
        for i in 0..gram.nrows() {
            for j in 0..gram.ncols() {
                let target = if i == j { Complex::one() } else { Complex::zero() };
                worst = worst.max((gram[(i, j)] - target).norm());
            }
        }
        worst
    }

    /// Extends the map with identity on `extra` modes, which must be untouched by it.
    pub fn padded(&self, extra: &[String]) -> Result<Self> {
        if extra.is_empty() {
            return Ok(self.clone());
        }
        let mut input = self.input.clone();
        let mut output = self.output.clone();
        for label in extra {
            if self.input.contains(label) || self.output.contains(label) {
                return Err(Error::ModeMismatch(format!(
                    "mode `{label}` cannot pass through an element that already addresses it"
                )));
            }
            input.push(label)?;
            output.push(label)?;
        }
        let (r0, c0) = self.matrix.shape();
        let mut m = DMatrix::zeros(output.slot_count(), input.slot_count());
        m.view_mut((0, 0), (r0, c0)).copy_from(&self.matrix);
        for s in 0..2 * extra.len() {
            m[(r0 + s, c0 + s)] = Complex::one();
        }
        Ok(Self { input, output, matrix: m, unitary: self.unitary })
    }

    /// Pads with identity on every mode of `space` the map does not consume.
    pub fn padded_for(&self, space: &ModeSpace) -> Result<Self> {
        let extra: Vec<String> = space.modes().iter().filter(|m| !self.input.contains(m)).cloned().collect();
        self.padded(&extra)
    }

    /// Re-indexes the input slots to follow `order` (same set of modes).
    fn with_input_order(&self, order: &ModeSpace) -> Result<Self> {
        if !self.input.same_modes(order) {
            return Err(Error::ModeMismatch(format!("{:?} vs {:?}", self.input.modes(), order.modes())));
        }
        let mut m = DMatrix::zeros(self.matrix.nrows(), order.slot_count());
        for (new_k, label) in order.modes().iter().enumerate() {
            let old_k = self.input.index_of(label).unwrap();
            for p in 0..2 {
                m.set_column(2 * new_k + p, &self.matrix.column(2 * old_k + p));
            }
        }
        Ok(Self { input: order.clone(), output: self.output.clone(), matrix: m, unitary: self.unitary })
    }
}

trait AdjointManual<T: Real> {
    fn adjoint_manual(&self) -> DMatrix<Complex<T>>;
}

impl<T: Real> AdjointManual<T> for DMatrix<Complex<T>> {
    fn adjoint_manual(&self) -> DMatrix<Complex<T>> {
        DMatrix::from_fn(self.ncols(), self.nrows(), |i, j| self[(j, i)].conj())
    }
}

/// `second ∘ first`, padding each side with identity on modes the other one addresses.
pub fn compose<T: Real>(first: &LinearModeMap<T>, second: &LinearModeMap<T>) -> Result<LinearModeMap<T>> {
    let untouched_by_second: Vec<String> =
        first.output.modes().iter().filter(|m| !second.input.contains(m)).cloned().collect();
    let fresh_for_second: Vec<String> =
        second.input.modes().iter().filter(|m| !first.output.contains(m)).cloned().collect();
    let second = second.padded(&untouched_by_second)?;
    let first = first.padded(&fresh_for_second)?;
    let second = second.with_input_order(&first.output)?;
    Ok(LinearModeMap {
        input: first.input.clone(),
        output: second.output.clone(),
        matrix: &second.matrix * &first.matrix,
        unitary: first.unitary && second.unitary,
    })
}

/// Substitutes every input creation operator of `state` by its image under `map` and
/// expands the product. Exact for any finite photon number; the result is unnormalized
/// when the map is not unitary.
pub fn apply_map<T: Real>(state: &FockState<T>, map: &LinearModeMap<T>) -> Result<FockState<T>> {
    let state = state.embed(&map.input)?;
    let out_slots = map.output.slot_count();
    let columns: Vec<Vec<(usize, Complex<T>)>> = (0..map.input.slot_count())
        .map(|i| map.matrix.column(i).iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(j, c)| (j, *c)).collect())
        .collect();

    let mut out: BTreeMap<Occupation, Complex<T>> = BTreeMap::new();
    for (occ, amp) in state.iter() {
        // |n⟩ = Π (a_i†)^{n_i} / sqrt(n_i!) |0⟩
        let mut poly: BTreeMap<Vec<u16>, Complex<T>> = BTreeMap::new();
        poly.insert(vec![0; out_slots], amp / occ.sqrt_factorials::<T>());
        for (i, &n) in occ.counts().iter().enumerate() {
            for _ in 0..n {
                let mut next = BTreeMap::new();
                for (mono, c) in &poly {
                    for &(j, t) in &columns[i] {
                        let mut m = mono.clone();
                        m[j] += 1;
                        *next.entry(m).or_insert_with(Complex::zero) += c * t;
                    }
                }
                poly = next;
            }
        }
        for (mono, c) in poly {
            let key = Occupation::from_counts(mono);
            let a = c * key.sqrt_factorials::<T>();
            *out.entry(key).or_insert_with(Complex::zero) += a;
        }
    }
    Ok(FockState::from_parts(map.output.clone(), out))
}

/// Applies `map` to a state that may carry modes the map does not touch.
pub fn apply_element<T: Real>(state: &FockState<T>, map: &LinearModeMap<T>) -> Result<FockState<T>> {
    apply_map(state, &map.padded_for(state.space())?)
}

/// Rotates the polarization of every mode of `state` by `u`.
pub fn rotate_polarization<T: Real>(state: &FockState<T>, u: [[Complex<T>; 2]; 2]) -> FockState<T> {
    apply_map(state, &LinearModeMap::polarization_rotation(state.space(), u))
        .expect("map built on the state's own space")
}

/// Conjugate transpose of a 2×2 polarization matrix.
pub fn adjoint2<T: Real>(u: [[Complex<T>; 2]; 2]) -> [[Complex<T>; 2]; 2] {
    [[u[0][0].conj(), u[1][0].conj()], [u[0][1].conj(), u[1][1].conj()]]
}
