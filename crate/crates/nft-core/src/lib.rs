//! Nonlinear Fourier transform toolkit for the focusing nonlinear
//! Schrödinger equation's Zakharov-Shabat system.
//!
//! Two directions are covered:
//!
//! - **Synthesis (inverse transform)**: build an N-solitary waveform from a
//!   prescribed discrete spectrum `(lambda_i, Q_d(lambda_i))` with the
//!   Darboux recursion and exact norming factors ([`darboux`]).
//! - **Detection (forward transform)**: recover eigenvalues, discrete
//!   amplitudes `Q_d = b/a'` and the continuous spectrum `Q_c = b/a` from a
//!   sampled pulse with transfer-matrix scattering ([`kernels`]), stabilized
//!   by a forward-backward split ([`fb`]) and a Newton eigenvalue search
//!   ([`eigensolver`]).
//!
//! All heavy per-`lambda` work is embarrassingly parallel and runs as rayon
//! maps; every public type is an immutable value object.

pub mod darboux;
pub mod eigensolver;
pub mod error;
pub mod fb;
pub mod io;
pub mod kernels;
pub mod spectra;

pub use num_complex::Complex64 as C64;

pub use darboux::{
    add_eigenvalue, default_grid, norming_factor, synthesize, synthesize_with, DarbouxAlgorithm,
    DarbouxState, Synthesis,
};
pub use eigensolver::{
    count_zeros, discrete_spectrum, discrete_spectrum_refined, find_eigenvalues,
    find_eigenvalues_checked, SearchRegion,
};
pub use error::{Error, Result};
pub use fb::{fb_continuous_spectrum, fb_scatter, split_index, split_scatter, SplitPolicy, SplitScatter};
pub use kernels::{
    forward_scatter, scalar_scheme_errors, scalar_scheme_values, step_matrix,
    step_matrix_dlambda, KernelKind, ScalarDemoErrors,
};
pub use spectra::{
    evolution_factor, time_shift_correction, ContinuousSpectrum, DiscretePoint, DiscreteSpectrum,
    SampledPulse, ScatteringData, SpectralPoint, TransferMatrix,
};
