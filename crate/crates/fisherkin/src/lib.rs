//! fisherkin: a numerical workbench for Fisher-information monotonicity in
//! collisional kinetic theory.
//!
//! The crate provides:
//! - entropy and Fisher-information functionals on velocity grids, with heat
//!   and Fokker-Planck flows ([`info`], [`grid`]);
//! - classical scattering and the taxonomy of collision kernels
//!   ([`scattering`], [`kernels`]);
//! - geometry and quadrature on S^1 and S^2, including the tangent transport
//!   map and the transported squared distance ([`sphere`]);
//! - Legendre polynomials in arbitrary dimension, spectra of linear Boltzmann
//!   operators on the sphere, heat kernels and Bernstein subordination
//!   ([`spectral`]);
//! - the nonlocal Gamma functionals, the monotonicity-criterion ratio and its
//!   minimisation, counterexample kernels and the 1D McKean identities
//!   ([`gamma`]);
//! - desk-scale kinetic flows (2D Boltzmann, isotropic Landau, linear
//!   Boltzmann on the sphere) with dissipation diagnostics ([`solver`]).

pub mod error;
pub mod grid;
pub mod info;
pub mod kernels;
pub mod quad;
pub mod scattering;
pub mod sphere;
pub mod spectral;
pub mod gamma;
pub mod solver;

pub use error::{FisherkinError, Result};
