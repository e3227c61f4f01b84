//! Ground-state entanglement of the harmonic lattice obtained from a 2D
//! lattice of two-component dipolar condensates in the spin-wave
//! (Holstein-Primakoff) regime.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: couplings, lattice geometry and the potential matrix `V`.
//! * [`spectrum`]: dispersion `v_k`, energy gap and the phase boundary.
//! * [`groundstate`]: Gaussian ground-state second moments from three engines
//!   (dense eigendecomposition, periodic FFT, Brillouin-zone quadrature).
//! * [`entanglement`]: block entropies, symplectic spectra, two-site `zeta`
//!   and entanglement of formation.
//! * [`oracle`]: brute-force validators (two-site exact diagonalization,
//!   an alternate symplectic-spectrum route).
//! * [`scan`]: parameter sweeps, area-law fits and finite-size scaling.
//!
//! Energies are expressed in units of `kappa`.

pub mod entanglement;
pub mod error;
pub mod groundstate;
pub mod model;
pub mod oracle;
pub mod scan;
pub mod spectrum;

mod linalg;
mod quadrature;

pub use error::{Error, Result};
