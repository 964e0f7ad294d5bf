//! Kinetic ion/electron plasma sheath: stationary equilibrium construction
//! and its evolution with a Strang-split semi-Lagrangian Vlasov-Ampere
//! solver.

pub mod boundary;
pub mod config;
pub mod diagnostics;
pub mod equilibrium;
pub mod error;
pub mod interp;
pub mod io;
pub mod mesh;
pub mod moments;
pub mod quadrature;
pub mod transport;

pub use error::{Result, SheathError};
