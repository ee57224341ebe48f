//! D-bar inverse scattering at negative energy.

pub mod bie;
pub mod dbar;
pub mod error;
pub mod experiments;
pub mod fft2;
pub mod forward;
pub mod gmres;
pub mod green;
pub mod io;
pub mod ls;
pub mod profiles;
pub mod reconstruct;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::{Energy, PeriodicGrid, ReducedZeta, SpectralLambda, SpectralZeta, C64};
