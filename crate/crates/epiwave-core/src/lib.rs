//! SQIR-V epidemic model with a distributed information delay.
//!
//! The library provides the pieces needed to reproduce the full analysis
//! pipeline of the model:
//!
//! * [`model`] — parameters, the uniform reporting-delay kernel, nonlinear
//!   transition rates, the basic reproduction number and the right-hand
//!   side of the delay system;
//! * [`equilibria`] — disease-free and endemic steady states via the
//!   prevalence cubic, with Descartes sign diagnostics;
//! * [`spectral`] — the transcendental characteristic equation, K-function
//!   root hunt, critical-delay ladders, crossing directions and
//!   stability-interval assembly;
//! * [`sim`] — explicit Euler integration with a rectangle-rule delay
//!   convolution, trajectory classification, a Lyapunov monitor and a
//!   multistability probe.

pub mod equilibria;
pub mod error;
pub mod model;
pub mod sim;
pub mod spectral;

pub use equilibria::{EquilibriumKind, EquilibriumPoint};
pub use error::{ModelError, SimError, SpectralError};
pub use model::{ModelParams, State, UniformKernel};
