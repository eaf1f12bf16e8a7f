//! Spectral calculus for `A = -mu d^2/dx^2 + s(x)` on `[0, 1]` with Neumann conditions
//! and `s = s0` on `[0, eps]`: exact eigenpairs from the transcendental characteristic
//! equation, the two-term asymptotic eigenpairs for narrow windows, modal
//! reconstruction of the population, the spectral time-to-threshold, and the
//! modal cascade used in the large-`mu` analysis.

mod asymptotic;
mod cascade;
mod characteristic;
mod exact;
mod modal;

pub use asymptotic::{
    corrector_pi2, corrector_pi2_derivative, eigs_asymptotic, v0_value, v1_value, AsymptoticEigen,
};
pub use cascade::{cosine_mode_coefficients, modal_cascade, overlap_matrix, CascadeSolution};
pub use characteristic::characteristic_value;
pub use exact::{eigs_exact, EigenPair, EigenShape};
pub use modal::{
    modal_solution, rho_rate_spectral, rho_spectral, time_to_threshold_spectral,
    ModalCoefficients, ModalSnapshot, DEGENERATE_RATE,
};
