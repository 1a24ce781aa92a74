//! Smooth solitary waves of the modified Camassa-Holm equation
//! `m_t + ((u^2 - u_x^2) m)_x = 0`, `m = u - u_xx`, on a constant background.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod evolution;
pub mod fourier;
pub mod functionals;
pub mod numerics;
pub mod params;
pub mod profile;
pub mod spectral;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
pub use params::WaveParameters;
pub use profile::{construct_profile, GridSpec, WaveProfile};
