//! Periodic grid, Fourier transforms and the Fourier multipliers used by the
//! model: derivatives, the fractional inertia operator, the Helmholtz Green's
//! convolution and two-thirds dealiasing.

mod fft;
mod field;
mod grid;
mod ops;

pub(crate) use field::lp_norm_of;
pub use field::{eval_many, RealField, SpectralField};
pub use grid::{Grid, MIN_POINTS};
pub(crate) use ops::dealias_in_place;
pub use ops::{
    apply_inertia, dealias, dealias_cutoff, derivative, derivative_spectral, helmholtz_convolve, helmholtz_spectral,
    invert_inertia, Inertia,
};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum SpectralError {
    #[error("invalid grid: need half-length > 0 and a power-of-two point count >= 16 (got L={half_length}, n={n})")]
    InvalidGrid { half_length: f64, n: usize },
    #[error("sample count {found} does not match grid size {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("field contains non-finite samples")]
    NonFinite,
    #[error("inertia exponent r={0} outside r >= 1")]
    InertiaExponent(f64),
}
