//! Builders and runners for the four interferometric experiments: the partial
//! symmetrizer, the single-photon cloner, the orthogonal-pair cloner for any `M`, and the
//! partial-SWAP gate.
//!
//! # Partial symmetrizer layout
//!
//! ```text
//! A_in ─┐          upper ── BS2 ──────────── A_out
//!       BS1                  │ tap
//! B_in ─┘          lower ── BS3 ── arm ─[η]─[π]── BS4 ── B_out
//!                            │ dump               │ dump
//! ```
//!
//! BS2 and BS3 take a vacuum ancilla on their second input. The π phase on the arm
//! fixes the sign of the antisymmetric branch so that the heralded map is
//! `(Π₊ + ηΠ₋)/(2√2)`; replacing `η` by a phase `e^{iφ}` gives the partial SWAP.

use num_complex::Complex;
use num_traits::Zero;

use crate::circuit::{two_photon_state, Circuit, CircuitOutcome, Element, Pipeline};
use crate::error::{Error, Result};
use crate::fock::{single_photon_fidelity, FockState, ModeSpace, OperatorPolynomial, Polarization};
use crate::postselect::PostSelectionPattern;
use crate::scalar::{real, Real};
use crate::transform::{adjoint2, rotate_polarization};

/// Default cap on the number of clones; the Fock expansion grows quickly beyond it.
pub const DEFAULT_M_CAP: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub m_cap: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self { m_cap: DEFAULT_M_CAP }
    }
}

impl Limits {
    pub fn check(&self, m: usize) -> Result<()> {
        if m > self.m_cap {
            return Err(Error::CapExceeded { m, cap: self.m_cap });
        }
        Ok(())
    }
}

/// Normalized single-photon polarization state in the `{ψ, ψ⊥}` basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Qubit<T: Real>(pub [Complex<T>; 2]);

impl<T: Real> Qubit<T> {
    pub fn new(c0: Complex<T>, c1: Complex<T>) -> Result<Self> {
        let n = (c0.norm_sqr() + c1.norm_sqr()).sqrt();
        if n <= T::zero() {
            return Err(Error::ZeroNorm);
        }
        Ok(Self([c0 / n, c1 / n]))
    }

    pub fn psi() -> Self {
        Self([real(T::one()), Complex::zero()])
    }

    pub fn perp() -> Self {
        Self([Complex::zero(), real(T::one())])
    }

    /// Point on the Bloch sphere: `cos(θ/2)|ψ⟩ + e^{iφ} sin(θ/2)|ψ⊥⟩`.
    pub fn from_bloch(theta: T, phi: T) -> Self {
        let half = theta / T::lit(2.0);
        Self([real(half.cos()), Complex::from_polar(half.sin(), phi)])
    }

    /// The orthogonal state `(−c₁*, c₀*)`, chosen so that `[self, orthogonal]` has unit determinant.
    pub fn orthogonal(&self) -> Self {
        Self([-self.0[1].conj(), self.0[0].conj()])
    }

    /// Unitary whose columns are `self` and `self.orthogonal()`.
    pub fn basis_matrix(&self) -> [[Complex<T>; 2]; 2] {
        let o = self.orthogonal();
        [[self.0[0], o.0[0]], [self.0[1], o.0[1]]]
    }

    /// `Σ c_p a_p†` on `mode`.
    pub fn creation(&self, space: &ModeSpace, mode: &str) -> Result<OperatorPolynomial<T>> {
        OperatorPolynomial::linear(
            space.clone(),
            &[(mode, Polarization::Psi, self.0[0]), (mode, Polarization::Perp, self.0[1])],
        )
    }
}

/// Product input `|a⟩_{mode_a} |b⟩_{mode_b}`.
pub fn product_input<T: Real>(mode_a: &str, a: &Qubit<T>, mode_b: &str, b: &Qubit<T>) -> Result<FockState<T>> {
    let coeffs = [a.0[0] * b.0[0], a.0[0] * b.0[1], a.0[1] * b.0[0], a.0[1] * b.0[1]];
    two_photon_state(mode_a, mode_b, &coeffs)
}

/// Fidelity of the photons in `mode` with an arbitrary target polarization.
pub fn qubit_fidelity<T: Real>(state: &FockState<T>, mode: &str, target: &Qubit<T>) -> Result<T> {
    let back = rotate_polarization(state, adjoint2(target.basis_matrix()));
    single_photon_fidelity(&back, mode, Polarization::Psi)
}

/// `X = a_ψ† b_⊥† − a_⊥† b_ψ†`, the singlet-pair creation operator on modes `a`, `b`.
pub fn pair_creation_operator<T: Real>(space: &ModeSpace, a: &str, b: &str) -> Result<OperatorPolynomial<T>> {
    let c = |m: &str, p| OperatorPolynomial::creation(space.clone(), m, p);
    let first = c(a, Polarization::Psi)?.mul(&c(b, Polarization::Perp)?)?;
    let second = c(a, Polarization::Perp)?.mul(&c(b, Polarization::Psi)?)?;
    first.add(&second.scaled(real(-T::one())))
}

/// `M − 1` singlet pairs, `X^{M−1}|0⟩` normalized, on modes `a` and `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct EprResource<T: Real> {
    pub pair_count: usize,
    pub state: FockState<T>,
}

impl<T: Real> EprResource<T> {
    pub fn new(pair_count: usize, a: &str, b: &str) -> Result<Self> {
        if pair_count == 0 {
            return Err(Error::InvalidParameter("EPR resource needs at least one pair".into()));
        }
        let space = ModeSpace::new([a, b])?;
        let x = pair_creation_operator::<T>(&space, a, b)?;
        let state = x.pow(pair_count)?.to_state().normalized()?;
        Ok(Self { pair_count, state })
    }
}

/// Mode labels of one partial-symmetrizer instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetrizerPorts {
    pub a_in: String,
    pub b_in: String,
    pub a_out: String,
    pub b_out: String,
    /// Prefix for internal arm and ancilla modes.
    pub prefix: String,
}

impl Default for SymmetrizerPorts {
    fn default() -> Self {
        Self {
            a_in: "A_in".into(),
            b_in: "B_in".into(),
            a_out: "A_out".into(),
            b_out: "B_out".into(),
            prefix: String::new(),
        }
    }
}

impl SymmetrizerPorts {
    fn internal(&self, name: &str) -> String {
        format!("{}{}", self.prefix, name)
    }

    /// Discarded BS3/BS4 outputs, which must stay empty on success.
    pub fn dumps(&self) -> [String; 2] {
        [self.internal("bs3_dump"), self.internal("bs4_dump")]
    }
}

/// What sits in the lower arm between BS3 and BS4.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ArmSetting<T: Real> {
    /// Real amplitude transmittance `η ∈ [0, 1]`.
    Attenuation(T),
    /// Phase shift `φ`, i.e. `η = e^{iφ}`.
    Phase(T),
}

fn symmetrizer_elements<T: Real>(arm: ArmSetting<T>, ports: &SymmetrizerPorts) -> Result<Vec<Element<T>>> {
    let upper = ports.internal("upper");
    let lower = ports.internal("lower");
    let tap = ports.internal("bs2_tap");
    let arm_mode = ports.internal("bs3_arm");
    let [dump3, dump4] = ports.dumps();
    let arm_element = match arm {
        ArmSetting::Attenuation(eta) => {
            if !(eta >= T::zero() && eta <= T::one()) {
                return Err(Error::InvalidParameter(format!("η = {eta} outside [0, 1]")));
            }
            Element::attenuator(&arm_mode, eta)
        }
        ArmSetting::Phase(phi) => {
            if !phi.is_finite() {
                return Err(Error::InvalidParameter("phase must be finite".into()));
            }
            Element::phase_shifter(&arm_mode, phi)
        }
    };
    Ok(vec![
        Element::beam_splitter(&ports.a_in, &ports.b_in, &upper, &lower),
        Element::beam_splitter(&upper, &ports.internal("bs2_vac"), &ports.a_out, &tap),
        Element::beam_splitter(&lower, &ports.internal("bs3_vac"), &arm_mode, &dump3),
        arm_element,
        Element::phase_shifter(&arm_mode, T::PI()),
        Element::beam_splitter(&tap, &arm_mode, &ports.b_out, &dump4),
    ])
}

pub fn build_partial_symmetrizer_with<T: Real>(arm: ArmSetting<T>, ports: &SymmetrizerPorts) -> Result<Circuit<T>> {
    let [dump3, dump4] = ports.dumps();
    let name = match arm {
        ArmSetting::Attenuation(_) => "partial_symmetrizer",
        ArmSetting::Phase(_) => "partial_swap",
    };
    let circuit = Circuit {
        name: name.into(),
        elements: symmetrizer_elements(arm, ports)?,
        input_modes: vec![ports.a_in.clone(), ports.b_in.clone()],
        output_modes: vec![ports.a_out.clone(), ports.b_out.clone()],
        resource: None,
        pattern: PostSelectionPattern::new()
            .with(ports.a_out.clone(), 1)
            .with(ports.b_out.clone(), 1)
            .with(dump3, 0)
            .with(dump4, 0),
    };
    circuit.validate()?;
    Ok(circuit)
}

/// Partial symmetrizer with a real attenuator `η ∈ [0, 1]` on the default ports.
pub fn build_partial_symmetrizer<T: Real>(eta: T) -> Result<Circuit<T>> {
    build_partial_symmetrizer_with(ArmSetting::Attenuation(eta), &SymmetrizerPorts::default())
}

/// The symmetrizer with the attenuator replaced by a phase shifter: heralds `U(φ)/(2√2)`.
pub fn build_partial_swap<T: Real>(phi: T) -> Result<Circuit<T>> {
    build_partial_symmetrizer_with(ArmSetting::Phase(phi), &SymmetrizerPorts::default())
}

/// Chain of partial-SWAP stages, each heralded independently.
pub fn partial_swap_pipeline<T: Real>(phis: &[T]) -> Result<Pipeline<T>> {
    Pipeline::new(phis.iter().map(|&phi| build_partial_swap(phi)).collect::<Result<_>>()?)
}

/// Runs the partial symmetrizer on a two-photon input over `A_in`, `B_in`.
pub fn run_partial_symmetrizer<T: Real>(input: &FockState<T>, eta: T) -> Result<CircuitOutcome<T>> {
    for mode in ["A_in", "B_in"] {
        let counts = input.mode_photon_numbers(mode)?;
        if counts.len() != 1 || !counts.contains(&1) {
            return Err(Error::PhotonNumber(format!("need exactly one photon in `{mode}`")));
        }
    }
    if input.photon_numbers().into_iter().any(|n| n != 2) {
        return Err(Error::PhotonNumber("input must hold exactly two photons".into()));
    }
    build_partial_symmetrizer(eta)?.run(input)
}

/// `q = (1 − η)/(1 + η)`.
pub fn q_from_eta<T: Real>(eta: T) -> T {
    (T::one() - eta) / (T::one() + eta)
}

/// `η = (1 − q)/(1 + q)`.
pub fn eta_from_q<T: Real>(q: T) -> T {
    (T::one() - q) / (T::one() + q)
}

const CLONE_INPUTS: [&str; 2] = ["psi_in", "perp_in"];

fn cloner_symmetrizer_ports() -> SymmetrizerPorts {
    SymmetrizerPorts {
        a_in: CLONE_INPUTS[0].into(),
        b_in: CLONE_INPUTS[1].into(),
        a_out: "C".into(),
        b_out: "D".into(),
        prefix: "sym.".into(),
    }
}

fn check_cloner_args<T: Real>(m: usize, eta: T, limits: &Limits) -> Result<()> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("M = {m}, need M ≥ 2")));
    }
    limits.check(m)?;
    if !(eta >= T::zero() && eta <= T::one()) {
        return Err(Error::InvalidParameter(format!("η = {eta} outside [0, 1]")));
    }
    Ok(())
}

fn epr_stage_parts<T: Real>(m: usize) -> Result<(Vec<Element<T>>, FockState<T>, PostSelectionPattern)> {
    let epr = EprResource::<T>::new(m - 1, "A", "B")?;
    let elements =
        vec![Element::beam_splitter("A", "C", "A_out", "C_out"), Element::beam_splitter("B", "D", "B_out", "D_out")];
    let pattern = PostSelectionPattern::new().with("A_out", m).with("B_out", m).with("C_out", 0).with("D_out", 0);
    Ok((elements, epr.state, pattern))
}

/// Heralded interference of a two-photon input in modes `C`, `D` with `M − 1` EPR pairs
/// on two balanced beam splitters; succeeds on `M` photons in each of `A_out`, `B_out`.
/// With `M = 2` and no preceding symmetrizer this is the suboptimal pair cloner.
pub fn build_epr_stage<T: Real>(m: usize, limits: &Limits) -> Result<Circuit<T>> {
    check_cloner_args(m, T::one(), limits)?;
    let (elements, resource, pattern) = epr_stage_parts(m)?;
    let circuit = Circuit {
        name: "epr_stage".into(),
        elements,
        input_modes: vec!["C".into(), "D".into()],
        output_modes: vec!["A_out".into(), "B_out".into()],
        resource: Some(resource),
        pattern,
    };
    circuit.validate()?;
    Ok(circuit)
}

/// Full orthogonal-pair cloner as one coherent circuit: symmetrizer on the inputs feeding
/// modes `C`, `D`, then the EPR stage. The heralding pattern forces exactly one photon into
/// each of `C` and `D`, so this is equivalent to the two independently heralded stages.
pub fn build_cloner<T: Real>(m: usize, eta: T, limits: &Limits) -> Result<Circuit<T>> {
    check_cloner_args(m, eta, limits)?;
    let ports = cloner_symmetrizer_ports();
    let mut elements = symmetrizer_elements(ArmSetting::Attenuation(eta), &ports)?;
    let (stage, resource, mut pattern) = epr_stage_parts(m)?;
    elements.extend(stage);
    for dump in ports.dumps() {
        pattern = pattern.with(dump, 0);
    }
    let circuit = Circuit {
        name: "cloner".into(),
        elements,
        input_modes: CLONE_INPUTS.iter().map(|s| s.to_string()).collect(),
        output_modes: vec!["A_out".into(), "B_out".into()],
        resource: Some(resource),
        pattern,
    };
    circuit.validate()?;
    Ok(circuit)
}

/// The cloner split into its two heralded stages (symmetrizer, EPR stage).
pub fn build_cloner_stages<T: Real>(m: usize, eta: T, limits: &Limits) -> Result<Pipeline<T>> {
    check_cloner_args(m, eta, limits)?;
    let sym = build_partial_symmetrizer_with(ArmSetting::Attenuation(eta), &cloner_symmetrizer_ports())?;
    Pipeline::new(vec![sym, build_epr_stage(m, limits)?])
}

#[derive(Clone, Debug, PartialEq)]
pub struct CloneOutcome<T: Real> {
    /// Normalized joint state of clones (`A_out`) and anticlones (`B_out`).
    pub state: FockState<T>,
    pub projected: FockState<T>,
    pub probability: T,
    /// Single-clone fidelity in `A_out` against `|ψ⟩`.
    pub fidelity: T,
    /// Single-anticlone fidelity in `B_out` against `|ψ⊥⟩`.
    pub anticlone_fidelity: T,
    pub q: T,
}

/// Clones `|ψ⟩|ψ⊥⟩` into `M` clones and `M` anticlones.
pub fn run_cloner<T: Real>(psi: &Qubit<T>, m: usize, eta: T, limits: &Limits) -> Result<CloneOutcome<T>> {
    let circuit = build_cloner(m, eta, limits)?;
    let perp = psi.orthogonal();
    let input = product_input(CLONE_INPUTS[0], psi, CLONE_INPUTS[1], &perp)?;
    let out = circuit.run(&input)?;
    if out.is_empty() {
        return Err(Error::EmptyPostSelection);
    }
    Ok(CloneOutcome {
        fidelity: qubit_fidelity(&out.state, "A_out", psi)?,
        anticlone_fidelity: qubit_fidelity(&out.state, "B_out", &perp)?,
        state: out.state,
        projected: out.projected,
        probability: out.probability,
        q: q_from_eta(eta),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingleCloneOutcome<T: Real> {
    /// Joint state of the two clones in `A_out` and the anticlone in `B`.
    pub state: FockState<T>,
    pub probability: T,
    pub clone_fidelity: T,
    pub anticlone_fidelity: T,
}

pub fn build_single_photon_cloner<T: Real>() -> Result<Circuit<T>> {
    let circuit = Circuit {
        name: "single_photon_cloner".into(),
        elements: vec![Element::beam_splitter("A", "C", "A_out", "C_out")],
        input_modes: vec!["C".into()],
        output_modes: vec!["A_out".into(), "B".into()],
        resource: Some(EprResource::new(1, "A", "B")?.state),
        pattern: PostSelectionPattern::new().with("A_out", 2).with("C_out", 0),
    };
    circuit.validate()?;
    Ok(circuit)
}

/// One photon `|ψ⟩` bunched with half of a singlet: two clones in `A_out`, anticlone in `B`.
pub fn single_photon_cloner<T: Real>(psi: &Qubit<T>) -> Result<SingleCloneOutcome<T>> {
    let circuit = build_single_photon_cloner()?;
    let space = ModeSpace::new(["C"])?;
    let input = psi.creation(&space, "C")?.to_state();
    let out = circuit.run(&input)?;
    if out.is_empty() {
        return Err(Error::EmptyPostSelection);
    }
    Ok(SingleCloneOutcome {
        clone_fidelity: qubit_fidelity(&out.state, "A_out", psi)?,
        anticlone_fidelity: qubit_fidelity(&out.state, "B", &psi.orthogonal())?,
        state: out.state,
        probability: out.probability,
    })
}
