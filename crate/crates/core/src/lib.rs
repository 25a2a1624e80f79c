//! Forward and inverse spectral problems for `−y″ + q y = λ y` on `[0,1]`
//! with `y(0) = 0` and the eigenparameter-dependent condition
//! `y(1) cos ρa − y′(1) sin ρa / ρ = 0`, `λ = ρ²`.

pub mod charfn;
pub mod cli;
pub mod error;
pub mod forward;
pub mod inverse;
pub mod io;
pub mod kernel;
pub mod quad;
pub mod regularity;
pub mod solvability;
pub mod types;
pub mod zeros;

pub use error::{Error, Result};
pub use kernel::{CauchyData, KernelConfig, TriangularKernel};
pub use types::{GridSpec, Potential, SampledFn, Smoothness, SpectrumKind, SpectrumSeq, C64};
