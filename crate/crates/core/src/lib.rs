//! Numerical lab for the linear kinetic equation ∂ₜf + v·∇ₓf = Lf whose local
//! equilibria have algebraic tails F(v) = c_γ⟨v⟩^{-(d+γ)}.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: closed-form exponents, normalization and predicted decay rates.
//! * [`grid`]: tail-adapted velocity quadrature, weighted norms and projections.
//! * [`collision`]: the Fokker–Planck, scattering and fractional Fokker–Planck operators.
//! * [`coefficients`]: the ξ-dependent coefficient family of the hypocoercivity estimate.
//! * [`hypocoercivity`]: mode generators, the operator A_ξ, entropy bookkeeping.
//! * [`sim`]: Fourier mode sweeps, rate fitting and the verification battery.

pub mod coefficients;
pub mod collision;
pub mod error;
pub mod grid;
pub mod hypocoercivity;
pub mod model;
pub mod quad;
pub mod sim;
pub mod states;

pub use error::{Error, Result};

/// Complex scalar used for Fourier modes.
pub type C64 = num_complex::Complex64;
