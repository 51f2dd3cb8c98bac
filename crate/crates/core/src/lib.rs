//! Extinction and invasion analysis for a reaction-diffusion model of an
//! invasive prey with logistic growth facing a generalist predator with a
//! Holling type II functional response.
//!
//! The crate is organised bottom-up:
//!
//! - [`kinetics`]: the dimensionless model and its pointwise reaction terms.
//! - [`ode`]: steady states, stability, `h*` and `h**` of the space-free system.
//! - [`waves`]: scalar comparison equations, the potential `W`, `h1`, `h-`, `h+`.
//! - [`pde`]: 1-D method-of-lines simulation, front tracking and classification.
//! - [`cartography`]: `h_crit` bisection and parameter-plane sweeps.
//! - [`io`]: CSV/JSON encodings, run manifests and key-value configuration.

pub mod cartography;
pub mod error;
pub mod io;
pub mod kinetics;
pub mod ode;
pub mod pde;
pub mod rk;
pub mod roots;
pub mod waves;

pub use error::{Error, Result};
pub use kinetics::{KineticsPoint, Params, RawParams};
