//! Spectrum of the linear Boltzmann operator -L_beta on S^{d-1}.
//!
//! Spherical harmonics diagonalise L_beta for every angular kernel, with
//! eigenvalue on the degree-l subspace
//!
//!   nu_l = int [1 - P_l^{(d)}(k.sigma)] beta(k.sigma) dsigma
//!        = |S^{d-2}| int_0^pi [1 - P_l(cos theta)] beta(cos theta) sin^{d-2} theta dtheta.
//!
//! The theta -> 0 region is handled by the cancellation
//! 1 - P_l(cos theta) = lambda_l theta^2 / (2(d-1)) (1 + O(theta^2)), split off
//! below theta = 0.01 so eigenvalues stay accurate for kernels with angular
//! singularity nu close to 2.

use super::legendre::{laplace_eigenvalue, legendre};
use crate::error::{FisherkinError, Result};
use crate::kernels::AngularKernel;
use crate::quad::{gauss_legendre, integrate_adaptive};
use crate::sphere::sphere_area;
use std::f64::consts::PI;

/// Eigenvalues nu_0..nu_lmax of -L_beta on the harmonic subspaces.
#[derive(Debug, Clone)]
pub struct SpectralKernel {
    pub dim: usize,
    pub eigenvalues: Vec<f64>,
}

impl SpectralKernel {
    pub fn lmax(&self) -> usize {
        self.eigenvalues.len() - 1
    }

    pub fn nu(&self, l: usize) -> f64 {
        self.eigenvalues[l]
    }
}

const THETA_SPLIT: f64 = 0.01;

/// Stable 1 - P_l(cos theta): series below 1e-4, direct evaluation above.
fn one_minus_legendre(d: usize, l: usize, theta: f64) -> f64 {
    if theta < 1e-4 {
        laplace_eigenvalue(d, l) * theta * theta / (2.0 * (d as f64 - 1.0))
    } else {
        1.0 - legendre(d, l, theta.cos())
    }
}

/// Single eigenvalue nu_l(beta).
pub fn nu_eigenvalue(beta: &AngularKernel, d: usize, l: usize) -> Result<f64> {
    if l == 0 {
        return Ok(0.0);
    }
    let sd2 = sphere_area(d - 1);
    if let Some((angles, masses)) = beta.atoms() {
        // concentrated kernel: nu_l(theta) = |S^{d-2}| (1 - P_l(cos theta))
        let cut = beta.theta_min;
        return Ok(angles
            .iter()
            .zip(masses)
            .filter(|(&t, _)| t >= cut)
            .map(|(&t, &m)| m * sd2 * (1.0 - legendre(d, l, t.cos())))
            .sum());
    }
    let nu_exp = beta.nu_estimate();
    if nu_exp >= 2.0 && beta.theta_min <= 0.0 {
        return Err(FisherkinError::DivergentNu(format!(
            "angular singularity nu = {nu_exp} >= 2 without cutoff"
        )));
    }
    let dm2 = d as i32 - 2;
    let lo = beta.theta_min.max(0.0);
    let h = |t: f64| one_minus_legendre(d, l, t) * beta.eval_theta(t) * t.sin().powi(dm2);
    // bulk
    let mut acc = integrate_adaptive(&h, lo.max(THETA_SPLIT), PI, 1e-12);
    if lo < THETA_SPLIT {
        let theta_a = lo.max(1e-4);
        // log-spaced panels on [theta_a, 0.01]
        acc += log_panel_integral(&h, theta_a, THETA_SPLIT);
        if lo < theta_a {
            // analytic head: fit beta sin^{d-2} ~ C theta^p locally and use
            // the exact series factor lambda_l theta^2 / (2(d-1))
            let w = |t: f64| beta.eval_theta(t) * t.sin().powi(dm2);
            let (w1, w2) = (w(theta_a), w(theta_a / 2.0));
            if w1 > 0.0 && w2 > 0.0 {
                let p = (w2 / w1).ln() / 0.5f64.ln();
                let c = w1 / theta_a.powf(p);
                let e = p + 3.0; // theta^2 * theta^p integrated
                if e > 0.0 {
                    let lam = laplace_eigenvalue(d, l) / (2.0 * (d as f64 - 1.0));
                    acc += lam * c * (theta_a.powf(e) - lo.max(0.0).powf(e)) / e;
                }
            }
        }
    }
    Ok(sd2 * acc)
}

fn log_panel_integral<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> f64 {
    if lo >= hi {
        return 0.0;
    }
    let (xg, wg) = gauss_legendre(12);
    let panels = (((hi / lo).ln() / 0.25).ceil() as usize).max(1);
    let step = (hi / lo).ln() / panels as f64;
    let mut acc = 0.0;
    for k in 0..panels {
        let a = lo * (step * k as f64).exp();
        let b = lo * (step * (k + 1) as f64).exp();
        let c = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut panel = 0.0;
        for i in 0..xg.len() {
            panel += wg[i] * f(mid + c * xg[i]);
        }
        acc += c * panel;
    }
    acc
}

/// The full spectrum nu_0..nu_lmax.
pub fn boltzmann_spectrum(beta: &AngularKernel, d: usize, lmax: usize) -> Result<SpectralKernel> {
    let mut eigenvalues = Vec::with_capacity(lmax + 1);
    for l in 0..=lmax {
        eigenvalues.push(nu_eigenvalue(beta, d, l)?);
    }
    Ok(SpectralKernel { dim: d, eigenvalues })
}

/// Sigma(beta) = (1/(2(d-1))) int [1 - (k.sigma)^2] beta dsigma,
/// the sharp constant comparing int Gamma_beta to the Dirichlet energy on
/// even functions.
pub fn sigma_of_beta(beta: &AngularKernel, d: usize) -> f64 {
    beta.integrate(|t| t.sin().powi(2)) / (2.0 * (d as f64 - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::heat::HeatWeight;
    use approx::assert_relative_eq;

    #[test]
    fn constant_kernel_eigenvalues() {
        // int P_l dsigma = 0 for l >= 1, so nu_l = |S^{d-1}|
        for d in [2usize, 3] {
            let beta = AngularKernel::constant(d, 1.0);
            let spec = boltzmann_spectrum(&beta, d, 12).unwrap();
            assert_eq!(spec.nu(0), 0.0);
            for l in 1..=12 {
                assert_relative_eq!(spec.nu(l), sphere_area(d), epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn atomic_kernel_closed_form() {
        let d = 3;
        let theta0 = 1.1f64;
        let beta = AngularKernel::atomic_at(d, vec![theta0], vec![2.5]).unwrap();
        for l in 1..=10 {
            let expected = 2.5 * sphere_area(d - 1) * (1.0 - legendre(d, l, theta0.cos()));
            assert_relative_eq!(nu_eigenvalue(&beta, d, l).unwrap(), expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn grazing_spectrum_tends_to_laplacian() {
        // nu_l(beta_n) / mu_n -> lambda_l / (d-1), within 1% at n = 1000
        for d in [2usize, 3] {
            let base = AngularKernel::constant(d, 1.0);
            let g = base.grazing(1000).unwrap();
            let mu = g.mu();
            for l in 1..=6 {
                let nu = nu_eigenvalue(&g, d, l).unwrap();
                let target = laplace_eigenvalue(d, l) / (d as f64 - 1.0);
                assert!(
                    (nu / mu / target - 1.0).abs() < 0.01,
                    "d={d} l={l}: nu/mu = {} vs {target}",
                    nu / mu
                );
            }
        }
    }

    #[test]
    fn subordinated_spectrum_matches_multiplier() {
        // quadrature of the synthesized kernel reproduces g(lambda_l)
        let d = 3;
        let w = HeatWeight::fractional(1.0).unwrap();
        let beta = AngularKernel::heat_combination(d, w.clone()).unwrap();
        for l in 1..=12 {
            let nu = nu_eigenvalue(&beta, d, l).unwrap();
            let g = w.multiplier(laplace_eigenvalue(d, l));
            assert_relative_eq!(nu, g, max_relative = 1e-3);
        }
    }

    #[test]
    fn sigma_of_constant_kernel() {
        // d=3, beta = 1: Sigma = (1/4) int sin^2 dsigma = (1/4)(2 pi)(4/3) = 2 pi / 3
        let beta = AngularKernel::constant(3, 1.0);
        assert_relative_eq!(sigma_of_beta(&beta, 3), 2.0 * PI / 3.0, epsilon = 1e-8);
    }

    #[test]
    fn sigma_bounds_nu_with_equality_at_two() {
        // nu_l <= Sigma(beta) lambda_l for even l, equality at l = 2
        let d = 3;
        for beta in [
            AngularKernel::constant(d, 1.0),
            AngularKernel::heat_combination(d, HeatWeight::single(0.3).unwrap()).unwrap(),
        ] {
            let sig = sigma_of_beta(&beta, d);
            for l in (2..=12).step_by(2) {
                let nu = nu_eigenvalue(&beta, d, l).unwrap();
                assert!(
                    nu <= sig * laplace_eigenvalue(d, l) + 1e-8,
                    "l={l}: nu={nu} vs bound {}",
                    sig * laplace_eigenvalue(d, l)
                );
            }
            let nu2 = nu_eigenvalue(&beta, d, 2).unwrap();
            assert_relative_eq!(nu2, sig * laplace_eigenvalue(d, 2), max_relative = 1e-7);
        }
    }

    #[test]
    fn grazing_sigma_over_mu_tends_to_inverse_dminus1() {
        // sin^2 theta / (2(d-1)(1 - cos theta)) -> 1/(d-1) as theta -> 0
        for d in [2usize, 3] {
            let base = AngularKernel::constant(d, 1.0);
            let g = base.grazing(1000).unwrap();
            let ratio = sigma_of_beta(&g, d) / g.mu();
            assert_relative_eq!(ratio, 1.0 / (d as f64 - 1.0), max_relative = 1e-3);
        }
    }
}
