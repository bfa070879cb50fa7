//! Circuits: ordered optical elements over named spatial modes, an optional prepared
//! resource state, and a heralding pattern. Stages can be chained into a [`Pipeline`]
//! where each stage is post-selected on its own and the probabilities multiply.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::Matrix4;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::fock::{FockState, ModeSpace, Occupation, Polarization};
use crate::postselect::{postselect, PostSelectionPattern};
use crate::scalar::{real, Real};
use crate::transform::{apply_element, apply_map, compose, LinearModeMap};

#[derive(Clone, Debug, PartialEq)]
pub enum Element<T: Real> {
    BeamSplitter { inputs: [String; 2], outputs: [String; 2] },
    Attenuator { mode: String, eta: T },
    PhaseShifter { mode: String, phi: T },
}

impl<T: Real> Element<T> {
    pub fn beam_splitter(in1: &str, in2: &str, out1: &str, out2: &str) -> Self {
        Element::BeamSplitter {
            inputs: [in1.to_string(), in2.to_string()],
            outputs: [out1.to_string(), out2.to_string()],
        }
    }

    pub fn attenuator(mode: &str, eta: T) -> Self {
        Element::Attenuator { mode: mode.to_string(), eta }
    }

    pub fn phase_shifter(mode: &str, phi: T) -> Self {
        Element::PhaseShifter { mode: mode.to_string(), phi }
    }

    pub fn to_map(&self) -> Result<LinearModeMap<T>> {
        match self {
            Element::BeamSplitter { inputs, outputs } => {
                LinearModeMap::balanced_beam_splitter(&inputs[0], &inputs[1], &outputs[0], &outputs[1])
            }
            Element::Attenuator { mode, eta } => LinearModeMap::attenuator(mode, *eta),
            Element::PhaseShifter { mode, phi } => LinearModeMap::phase_shifter(mode, *phi),
        }
    }

    pub fn inputs(&self) -> Vec<&str> {
        match self {
            Element::BeamSplitter { inputs, .. } => inputs.iter().map(String::as_str).collect(),
            Element::Attenuator { mode, .. } | Element::PhaseShifter { mode, .. } => vec![mode.as_str()],
        }
    }

    pub fn outputs(&self) -> Vec<&str> {
        match self {
            Element::BeamSplitter { outputs, .. } => outputs.iter().map(String::as_str).collect(),
            Element::Attenuator { mode, .. } | Element::PhaseShifter { mode, .. } => vec![mode.as_str()],
        }
    }
}

impl<T: Real> fmt::Display for Element<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::BeamSplitter { inputs, outputs } => {
                write!(f, "BS({},{} -> {},{})", inputs[0], inputs[1], outputs[0], outputs[1])
            }
            Element::Attenuator { mode, eta } => write!(f, "ATT({mode}, eta={eta})"),
            Element::PhaseShifter { mode, phi } => write!(f, "PHASE({mode}, phi={phi})"),
        }
    }
}

/// Heralded outcome of running a circuit on one input.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitOutcome<T: Real> {
    /// Normalized conditional state on the output modes (zero vector on failure).
    pub state: FockState<T>,
    /// Unnormalized conditional component on the output modes.
    pub projected: FockState<T>,
    pub probability: T,
}

impl<T: Real> CircuitOutcome<T> {
    pub fn is_empty(&self) -> bool {
        self.projected.is_zero()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit<T: Real> {
    pub name: String,
    pub elements: Vec<Element<T>>,
    pub input_modes: Vec<String>,
    pub output_modes: Vec<String>,
    /// Prepared state on ancillary modes, injected alongside the input.
    pub resource: Option<FockState<T>>,
    pub pattern: PostSelectionPattern,
}

impl<T: Real> Circuit<T> {
    /// Checks the mode flow: every element input is either live or a fresh vacuum port,
    /// no element output collides with a live mode, and outputs and pattern only name
    /// modes alive at the end. Returns the final set of live modes.
    pub fn validate(&self) -> Result<BTreeSet<String>> {
        let mut live: BTreeSet<String> = BTreeSet::new();
        let mut consumed: BTreeSet<String> = BTreeSet::new();
        for m in &self.input_modes {
            if !live.insert(m.clone()) {
                return Err(Error::DuplicateMode(m.clone()));
            }
        }
        if let Some(res) = &self.resource {
            for m in res.space().modes() {
                if !live.insert(m.clone()) {
                    return Err(Error::DuplicateMode(m.clone()));
                }
            }
        }
        for el in &self.elements {
            for m in el.inputs() {
                if !live.remove(m) && !consumed.insert(m.to_string()) {
                    return Err(Error::ModeMismatch(format!("mode `{m}` was already consumed before {el}")));
                }
                consumed.insert(m.to_string());
            }
            for m in el.outputs() {
                if !live.insert(m.to_string()) {
                    return Err(Error::DuplicateMode(m.to_string()));
                }
            }
        }
        for m in self.output_modes.iter().chain(self.pattern.constraints().keys()) {
            if !live.contains(m) {
                return Err(Error::UnknownMode(m.clone()));
            }
        }
        Ok(live)
    }

    fn prepare(&self, input: &FockState<T>) -> Result<FockState<T>> {
        let expected = ModeSpace::new(self.input_modes.iter().cloned())?;
        if !input.space().same_modes(&expected) {
            return Err(Error::ModeMismatch(format!(
                "circuit `{}` expects inputs {:?}, got {:?}",
                self.name,
                self.input_modes,
                input.space().modes()
            )));
        }
        if (input.norm_sqr() - T::one()).abs() > T::epsilon().sqrt() {
            return Err(Error::InvalidParameter("circuit input must be normalized".into()));
        }
        let input = input.embed(&expected)?;
        match &self.resource {
            Some(res) => input.tensor(res),
            None => Ok(input),
        }
    }

    /// Evolves `input` element by element, without heralding.
    pub fn evolve(&self, input: &FockState<T>) -> Result<FockState<T>> {
        self.validate()?;
        let mut state = self.prepare(input)?;
        for el in &self.elements {
            state = apply_element(&state, &el.to_map()?)?;
        }
        Ok(state)
    }

    /// The whole network as a single composed map, starting from the input and resource modes.
    pub fn network_map(&self) -> Result<LinearModeMap<T>> {
        self.validate()?;
        let mut start = self.input_modes.clone();
        if let Some(res) = &self.resource {
            start.extend(res.space().modes().iter().cloned());
        }
        let mut map = LinearModeMap::identity(ModeSpace::new(start)?);
        for el in &self.elements {
            map = compose(&map, &el.to_map()?)?;
        }
        Ok(map)
    }

    /// Same as [`Circuit::evolve`] but through the composed network map.
    pub fn evolve_composed(&self, input: &FockState<T>) -> Result<FockState<T>> {
        apply_map(&self.prepare(input)?, &self.network_map()?)
    }

    fn herald(&self, evolved: &FockState<T>) -> Result<CircuitOutcome<T>> {
        let ps = postselect(evolved, &self.pattern)?;
        let keep: Vec<&str> = self.output_modes.iter().map(String::as_str).collect();
        Ok(CircuitOutcome {
            state: ps.state.restrict(&keep)?,
            projected: ps.projected.restrict(&keep)?,
            probability: ps.probability,
        })
    }

    pub fn run(&self, input: &FockState<T>) -> Result<CircuitOutcome<T>> {
        self.herald(&self.evolve(input)?)
    }

    pub fn run_composed(&self, input: &FockState<T>) -> Result<CircuitOutcome<T>> {
        self.herald(&self.evolve_composed(input)?)
    }

    /// Conditional two-qubit map of a circuit with two single-photon inputs and two
    /// single-photon outputs, read off from the four polarization basis inputs.
    pub fn conditional_map(&self) -> Result<Matrix4<Complex<T>>> {
        two_qubit_map(&self.input_modes, &self.output_modes, |input| Ok(self.run(input)?.projected))
    }
}

/// Polarization state `Σ c[2p+s] |p⟩_a |s⟩_b` of one photon in each of two modes.
pub fn two_photon_state<T: Real>(mode_a: &str, mode_b: &str, coeffs: &[Complex<T>; 4]) -> Result<FockState<T>> {
    let space = ModeSpace::new([mode_a, mode_b])?;
    let mut terms = Vec::with_capacity(4);
    for (idx, &c) in coeffs.iter().enumerate() {
        let p = Polarization::from_index(idx / 2).unwrap();
        let s = Polarization::from_index(idx % 2).unwrap();
        terms.push((Occupation::from_slots(&space, &[(mode_a, p, 1), (mode_b, s, 1)])?, c));
    }
    FockState::from_amplitudes(space, terms)
}

/// Coefficients of a state with one photon in each of two modes; fails on any other term.
pub fn two_photon_coefficients<T: Real>(state: &FockState<T>, mode_a: &str, mode_b: &str) -> Result<[Complex<T>; 4]> {
    let ia = state.space().index_of(mode_a).ok_or_else(|| Error::UnknownMode(mode_a.into()))?;
    let ib = state.space().index_of(mode_b).ok_or_else(|| Error::UnknownMode(mode_b.into()))?;
    let mut out = [Complex::new(T::zero(), T::zero()); 4];
    for (occ, amp) in state.iter() {
        if occ.mode_total(ia) != 1 || occ.mode_total(ib) != 1 || occ.total() != 2 {
            return Err(Error::PhotonNumber(format!("expected one photon in each of `{mode_a}` and `{mode_b}`")));
        }
        let p = occ.get(2 * ia + 1) as usize;
        let s = occ.get(2 * ib + 1) as usize;
        out[2 * p + s] += *amp;
    }
    Ok(out)
}

fn two_qubit_map<T: Real>(
    inputs: &[String],
    outputs: &[String],
    mut run: impl FnMut(&FockState<T>) -> Result<FockState<T>>,
) -> Result<Matrix4<Complex<T>>> {
    if inputs.len() != 2 || outputs.len() != 2 {
        return Err(Error::InvalidParameter("conditional map needs two input and two output modes".into()));
    }
    let zero = Complex::new(T::zero(), T::zero());
    let mut m = Matrix4::from_element(zero);
    for col in 0..4 {
        let mut coeffs = [zero; 4];
        coeffs[col] = real(T::one());
        let input = two_photon_state(&inputs[0], &inputs[1], &coeffs)?;
        let out = run(&input)?;
        let c = two_photon_coefficients(&out, &outputs[0], &outputs[1])?;
        for (row, v) in c.iter().enumerate() {
            m[(row, col)] = *v;
        }
    }
    Ok(m)
}

/// Outcome of a chain of independently heralded stages.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineOutcome<T: Real> {
    pub state: FockState<T>,
    /// Unnormalized conditional output for the original (unit-norm) input.
    pub projected: FockState<T>,
    pub stage_probabilities: Vec<T>,
    pub probability: T,
}

/// Stages run one after another; the outputs of a stage are renamed positionally to the
/// inputs of the next.
#[derive(Clone, Debug, PartialEq)]
pub struct Pipeline<T: Real> {
    pub stages: Vec<Circuit<T>>,
}

impl<T: Real> Pipeline<T> {
    pub fn new(stages: Vec<Circuit<T>>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::InvalidParameter("pipeline needs at least one stage".into()));
        }
        for pair in stages.windows(2) {
            if pair[0].output_modes.len() != pair[1].input_modes.len() {
                return Err(Error::ModeMismatch(format!(
                    "stage `{}` has {} outputs but `{}` takes {} inputs",
                    pair[0].name,
                    pair[0].output_modes.len(),
                    pair[1].name,
                    pair[1].input_modes.len()
                )));
            }
        }
        Ok(Self { stages })
    }

    pub fn input_modes(&self) -> &[String] {
        &self.stages[0].input_modes
    }

    pub fn output_modes(&self) -> &[String] {
        &self.stages.last().unwrap().output_modes
    }

    pub fn run(&self, input: &FockState<T>) -> Result<PipelineOutcome<T>> {
        let mut state = input.clone();
        let mut probs = Vec::with_capacity(self.stages.len());
        let mut scale = T::one();
        let mut projected = None;
        for (k, stage) in self.stages.iter().enumerate() {
            if k > 0 {
                let prev = &self.stages[k - 1];
                let renames: Vec<(&str, &str)> =
                    prev.output_modes.iter().zip(&stage.input_modes).map(|(a, b)| (a.as_str(), b.as_str())).collect();
                state = state.rename_modes(&renames)?;
            }
            let out = stage.run(&state)?;
            probs.push(out.probability);
            if out.is_empty() {
                projected = Some(out.projected);
                state = out.state;
                break;
            }
            if k + 1 < self.stages.len() {
                scale *= out.probability.sqrt();
            } else {
                projected = Some(out.projected.scaled(real(scale)));
            }
            state = out.state;
        }
        let probability =
            if probs.len() == self.stages.len() { probs.iter().fold(T::one(), |acc, &p| acc * p) } else { T::zero() };
        Ok(PipelineOutcome { state, projected: projected.unwrap(), stage_probabilities: probs, probability })
    }

    pub fn conditional_map(&self) -> Result<Matrix4<Complex<T>>> {
        two_qubit_map(self.input_modes(), self.output_modes(), |input| Ok(self.run(input)?.projected))
    }
}
