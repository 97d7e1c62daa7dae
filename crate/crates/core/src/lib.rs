//! Desk-scale simulator and diagnostics for a diffusion-enhanced
//! Navier-Stokes / Cahn-Hilliard / Oldroyd thrombus model on a 2D channel.

pub mod cases;
pub mod cli;
pub mod diagnostics;
pub mod energy;
pub mod error;
pub mod fields;
pub mod io;
pub mod model;
pub mod sampler;
pub mod spectral;
pub mod stepper;

pub use error::{Error, Result};
