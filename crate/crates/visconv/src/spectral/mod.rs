//! Fourier representation of periodic, mean-free, divergence-free vector
//! fields and the discrete operators `A`, `A^-1`, `B(., .)`, `P_N`, norms
//! and inner products.

mod bilinear;
pub mod fft;
mod field;
mod grid;

pub use bilinear::{bilinear, self_advection, trilinear, trilinear_estimate};
pub use field::SpectralField;
pub use grid::TorusGrid;

/// Ladyzhenskaya constant `c0 = sqrt(1 + 1/(2 pi))` from the torus form of
/// the inequality `|u|_L4 <= c0 |u|^1/2 ||u||^1/2`.
pub fn ladyzhenskaya_c0() -> f64 {
    (1.0 + 0.5 / std::f64::consts::PI).sqrt()
}
