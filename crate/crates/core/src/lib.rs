//! Radial interface solutions of the generalized Cahn–Hilliard (Willmore-type) flow
//! u_t = −(Δ − W″(u))(Δu − W′(u)).
//!
//! The crate tabulates the heteroclinic layer and its correction, evaluates the
//! approximate solution built on a shrinking or expanding sphere, provides the
//! biharmonic heat kernels and mild solvers, the Lyapunov–Schmidt reduction of the
//! interface dynamics, and a semi-implicit evolution of the radial PDE.

pub mod error;
pub mod jet;
pub mod quad;
pub mod special;
pub mod hermite;
pub mod spline;
pub mod banded;

pub mod potential;
pub mod layer;
pub mod correction;
pub mod geometry;
pub mod ansatz;
pub mod kernels;
pub mod reduction;
pub mod pde;

pub use error::{Error, Result};
pub mod verify;
pub mod cli;
