//! Analytical Neumann-boundary Poisson solver for rectangle densities and an
//! electrostatic global placer built on it.

pub mod analytic;
pub mod density;
pub mod error;
pub mod fast;
pub mod io;
pub mod legalize;
pub mod netlist;
pub mod placer;
pub mod trig;

pub use error::{Error, Result};
