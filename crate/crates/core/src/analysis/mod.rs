//! Closed-form references, the covariant target state, argmax search and the amplifier oracle.

pub mod amplifier;
pub mod formulas;
pub mod optimize;

pub use amplifier::{amplifier_output, fit_q, lambda_for_q, AmplifierModel, AmplifierOutput, DenseEvolution, QFit};
pub use formulas::{
    alpha, alphas, fidelity_f2, fidelity_fperp, optimal_q, reference_clone_state, reference_components, target_state,
    two_qubit_projectors, CloningTarget,
};
pub use optimize::{argmax, optimal_q_numerical};
