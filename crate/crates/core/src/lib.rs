//! Pseudo-spectral simulation and verification core for the two-component
//! higher-order Camassa–Holm system
//!
//! ```text
//! m_t = alpha u_x - b u_x m - u m_x - kappa rho rho_x,   m = (1 - d_xx)^r u,
//! rho_t = -u rho_x - (b - 1) u_x rho,
//! ```
//!
//! on a periodic truncation `[-L, L)` of the line. The crate is `no_std`
//! (with `alloc`); file formats, configuration and the command line live in
//! the companion `hoch-harness` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod besov;
pub mod characteristics;
pub mod dynamics;
pub mod spectral;
pub mod weights;

pub use spectral::{Grid, RealField, SpectralError, SpectralField};
