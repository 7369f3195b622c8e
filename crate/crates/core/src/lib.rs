//! Pathwise simulation of stochastic lattice systems driven by fractional
//! Brownian motion with Hurst index above one half, together with the
//! machinery needed to certify exponential stability of stationary points:
//! exact-covariance noise synthesis, weighted Hölder norms, Young integrals
//! built from fractional derivatives, dissipative lattice operators, a
//! contraction-based mild solver, and cut-off/Gronwall stability checks.

pub mod error;
pub mod fbm;
pub mod holder;
pub mod lattice;
pub mod par;
pub mod path;
pub mod quad;
pub mod report;
pub mod solver;
pub mod stability;
pub mod young;

pub use error::{Error, Result};
