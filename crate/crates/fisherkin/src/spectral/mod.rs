//! Legendre polynomials in dimension d, Laplace-Beltrami and linear-Boltzmann
//! spectra on S^{d-1}, heat kernels, Bernstein subordination, and pointwise
//! kernel-ratio comparisons.

pub mod heat;
pub mod legendre;
pub mod ratio;
pub mod spectrum;

pub use heat::{heat_kernel, HeatCombination, HeatWeight};
pub use legendre::{
    laplace_eigenvalue, legendre, legendre_all, legendre_derivative, multiplicity, ode_residual,
};
pub use ratio::{kernel_ratio, RatioReport};
pub use spectrum::{boltzmann_spectrum, nu_eigenvalue, sigma_of_beta, SpectralKernel};
