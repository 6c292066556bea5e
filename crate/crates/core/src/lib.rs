//! Pseudo-spectral simulation of incompressible viscous-resistive Hall-MHD
//! on the periodic box, with energy-budget diagnostics and experiment drivers.

pub mod calculus;
pub mod cli;
pub mod dynamics;
pub mod experiments;
pub mod fields;
pub mod norms;
