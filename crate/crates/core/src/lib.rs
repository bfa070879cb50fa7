//! Linear-optical cloning of orthogonally polarized photon pairs.
//!
//! States are sparse superpositions of polarization-resolved Fock kets over named
//! spatial modes. Optical elements act on creation operators; heralded schemes are
//! evolved exactly and post-selected on photon numbers per spatial mode.
//!
//! ```
//! use cloning_optics::{run_cloner, Limits, Qubit};
//!
//! let eta = (2.0f64 / 3.0).sqrt();
//! let out = run_cloner(&Qubit::psi(), 2, eta, &Limits::default()).unwrap();
//! assert!((out.probability - 1.0 / 64.0).abs() < 1e-12);
//! assert!((out.fidelity - 0.5 * (1.0 + eta)).abs() < 1e-12);
//! ```
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases at the
//! crate root fix `f64`.

pub mod acceptance;
pub mod analysis;
pub mod circuit;
pub mod error;
pub mod fock;
pub mod interferometers;
pub mod postselect;
pub mod scalar;
pub mod transform;

pub use analysis::{
    alpha, alphas, amplifier_output, fidelity_f2, fidelity_fperp, fit_q, lambda_for_q, optimal_q, optimal_q_numerical,
    reference_clone_state, reference_components, target_state, two_qubit_projectors, AmplifierModel, CloningTarget,
};
pub use circuit::{
    two_photon_coefficients, two_photon_state, Circuit, CircuitOutcome, Element, Pipeline, PipelineOutcome,
};
pub use error::{Error, Result};
pub use fock::{
    distance, inner_product, max_amplitude_difference, monomial_to_state, overlap_magnitude, single_photon_fidelity,
    FockState, ModeSlot, ModeSpace, Occupation, OperatorPolynomial, Polarization,
};
pub use interferometers::{
    build_cloner, build_cloner_stages, build_epr_stage, build_partial_swap, build_partial_symmetrizer,
    build_partial_symmetrizer_with, eta_from_q, partial_swap_pipeline, product_input, q_from_eta, qubit_fidelity,
    run_cloner, run_partial_symmetrizer, single_photon_cloner, ArmSetting, CloneOutcome, EprResource, Limits, Qubit,
    SymmetrizerPorts, DEFAULT_M_CAP,
};
pub use postselect::{postselect, success_probability_formula, PostSelection, PostSelectionPattern};
pub use scalar::Real;
pub use transform::{apply_map, compose, LinearModeMap};

pub type State = FockState<f64>;
pub type Polynomial = OperatorPolynomial<f64>;
pub type ModeMap = LinearModeMap<f64>;
pub type OpticalCircuit = Circuit<f64>;
pub type OpticalPipeline = Pipeline<f64>;
pub type Complex64 = num_complex::Complex<f64>;
pub type PolarizationQubit = Qubit<f64>;
pub type Amplifier = AmplifierModel<f64>;
