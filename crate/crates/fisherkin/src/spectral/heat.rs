//! Heat kernels on S^{d-1} and Bernstein subordination.
//!
//! K_t(k.sigma) = sum_l exp(-lambda_l t) (N(d,l)/|S^{d-1}|) P_l(k.sigma) is the
//! heat kernel built from the addition formula. A nonnegative weight lambda(dt)
//! produces the combination beta = int K_t lambda(dt), whose linear Boltzmann
//! operator is -g(-Delta) with the Bernstein function
//! g(omega) = int (1 - e^{-omega t}) lambda(dt).

use super::legendre::{laplace_eigenvalue, legendre_all, multiplicity};
use crate::error::{FisherkinError, Result};
use crate::sphere::sphere_area;
use statrs::function::gamma::gamma;

/// Discretized subordination weight: node times t_j > 0 with masses w_j >= 0
/// (log-spaced midpoint panels of a density unless built from atoms).
#[derive(Debug, Clone)]
pub struct HeatWeight {
    pub times: Vec<f64>,
    pub masses: Vec<f64>,
}

/// Default panel count and t-range for density-based weights: covers both the
/// singular small-t regime and the spectral-gap large-t regime.
pub const WEIGHT_PANELS: usize = 400;
pub const WEIGHT_T_LO: f64 = 1e-6;
pub const WEIGHT_T_HI: f64 = 1e3;

impl HeatWeight {
    /// Point mass at a single diffusion time: beta = K_t.
    pub fn single(t: f64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(FisherkinError::InvalidParameter(format!(
                "heat time must be positive, got {t}"
            )));
        }
        Ok(HeatWeight {
            times: vec![t],
            masses: vec![1.0],
        })
    }

    /// Log-spaced midpoint discretization of a density on [t_lo, t_hi].
    pub fn from_density<F: Fn(f64) -> f64>(density: F, t_lo: f64, t_hi: f64, panels: usize) -> Self {
        let mut times = Vec::with_capacity(panels);
        let mut masses = Vec::with_capacity(panels);
        let lr = (t_hi / t_lo).ln();
        for j in 0..panels {
            let x0 = t_lo * (lr * j as f64 / panels as f64).exp();
            let x1 = t_lo * (lr * (j + 1) as f64 / panels as f64).exp();
            let tm = (x0 * x1).sqrt();
            times.push(tm);
            masses.push(density(tm).max(0.0) * (x1 - x0));
        }
        HeatWeight { times, masses }
    }

    /// Fractional-diffusion weight: density c t^{-(1+a)} with
    /// c = a / Gamma(1 - a), so that g(omega) = omega^a exactly
    /// (int_0^infty (1 - e^{-omega t}) t^{-1-a} dt = Gamma(1-a) omega^a / a).
    /// For the fractional Laplacian of order nu/2 pass a = nu/2.
    pub fn fractional_exponent(a: f64) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) {
            return Err(FisherkinError::InvalidParameter(format!(
                "fractional exponent must lie in (0,1), got {a}"
            )));
        }
        let c = a / gamma(1.0 - a);
        Ok(Self::from_density(
            |t| c * t.powf(-1.0 - a),
            WEIGHT_T_LO,
            WEIGHT_T_HI,
            WEIGHT_PANELS,
        ))
    }

    /// Weight matching the angular singularity nu: g(omega) = omega^{nu/2}.
    pub fn fractional(nu: f64) -> Result<Self> {
        Self::fractional_exponent(nu / 2.0)
    }

    /// Damped fractional weight, density t^{-(1+a)} / sqrt(1 + kappa t)
    /// (overall scale irrelevant for kernel-ratio comparisons).
    pub fn damped(a: f64, kappa: f64) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) || kappa < 0.0 {
            return Err(FisherkinError::InvalidParameter(format!(
                "damped weight needs a in (0,1), kappa >= 0; got a={a}, kappa={kappa}"
            )));
        }
        Ok(Self::from_density(
            |t| t.powf(-1.0 - a) / (1.0 + kappa * t).sqrt(),
            WEIGHT_T_LO,
            WEIGHT_T_HI,
            WEIGHT_PANELS,
        ))
    }

    /// Spectral multiplier g(omega) = sum_j w_j (1 - e^{-omega t_j}).
    pub fn multiplier(&self, omega: f64) -> f64 {
        self.times
            .iter()
            .zip(&self.masses)
            .map(|(&t, &w)| w * (-(-omega * t).exp_m1()))
            .sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn min_time(&self) -> f64 {
        self.times.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Heat kernel K_t on S^{d-1}, as a function of x = k.sigma.
///
/// Truncates the zonal series once exp(-lambda_l t) N(d,l) < 1e-16 past the
/// decay onset; satisfies int K_t(k.sigma) dsigma = 1.
pub fn heat_kernel(d: usize, t: f64, x: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(FisherkinError::InvalidParameter(format!(
            "heat kernel needs t > 0, got {t}"
        )));
    }
    let area = sphere_area(d);
    let lmax = heat_series_cutoff(d, t);
    let p = legendre_all(d, lmax, x.clamp(-1.0, 1.0));
    let mut acc = 0.0;
    for (l, pl) in p.iter().enumerate() {
        acc += (-laplace_eigenvalue(d, l) * t).exp() * multiplicity(d, l) / area * pl;
    }
    Ok(acc)
}

/// Smallest l past which exp(-lambda_l t) N(d,l) < 1e-16.
fn heat_series_cutoff(d: usize, t: f64) -> usize {
    let mut l = 2usize;
    loop {
        let term = (-laplace_eigenvalue(d, l) * t).exp() * multiplicity(d, l);
        if term < 1e-16 && laplace_eigenvalue(d, l) * t > 1.0 {
            return l;
        }
        l += 1;
        if l > 2_000_000 {
            return l;
        }
    }
}

/// Precomputed zonal synthesis of beta = int K_t lambda(dt):
/// beta(x) = sum_l c_l P_l(x) with c_l = (N(d,l)/|S^{d-1}|) (W - g(lambda_l)),
/// W the total weight mass.
#[derive(Debug, Clone)]
pub struct HeatCombination {
    pub dim: usize,
    pub weight: HeatWeight,
    coeffs: Vec<f64>,
}

impl HeatCombination {
    pub fn new(dim: usize, weight: HeatWeight) -> Result<Self> {
        if dim < 2 {
            return Err(FisherkinError::InvalidParameter(
                "heat combination needs dim >= 2".into(),
            ));
        }
        let area = sphere_area(dim);
        let w_total = weight.total_mass();
        let t_min = weight.min_time();
        let mut coeffs = Vec::new();
        let mut l = 0usize;
        loop {
            let survive = w_total - weight.multiplier(laplace_eigenvalue(dim, l));
            let c = multiplicity(dim, l) / area * survive;
            coeffs.push(c);
            let lam = laplace_eigenvalue(dim, l);
            if lam * t_min > 37.0 && c.abs() < 1e-15 * (coeffs[0].abs() + 1.0) {
                break;
            }
            l += 1;
            if l > 200_000 {
                break;
            }
        }
        Ok(HeatCombination { dim, weight, coeffs })
    }

    /// beta(x), streamed Legendre recursion over the cached coefficients.
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(-1.0, 1.0);
        let d = self.dim as f64;
        let mut acc = self.coeffs[0];
        if self.coeffs.len() == 1 {
            return acc;
        }
        let mut p0 = 1.0f64;
        let mut p1 = x;
        acc += self.coeffs[1] * p1;
        for (l, &c) in self.coeffs.iter().enumerate().skip(2) {
            let kf = (l - 1) as f64;
            let p2 = ((2.0 * kf + d - 2.0) * x * p1 - kf * p0) / (kf + d - 2.0);
            acc += c * p2;
            p0 = p1;
            p1 = p2;
        }
        acc
    }

    /// Exact eigenvalue of -L_beta on H_l: nu_l = g(lambda_l).
    pub fn spectral_eigenvalue(&self, l: usize) -> f64 {
        self.weight.multiplier(laplace_eigenvalue(self.dim, l))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate_gl;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    /// int K_t(k.sigma) dsigma over S^{d-1} as a theta-integral.
    fn kernel_mass(d: usize, t: f64) -> f64 {
        let sd2 = sphere_area(d - 1);
        integrate_gl(
            |theta: f64| {
                heat_kernel(d, t, theta.cos()).unwrap() * theta.sin().powi(d as i32 - 2)
            },
            0.0,
            PI,
            200,
        ) * sd2
    }

    #[test]
    fn heat_kernel_has_unit_mass() {
        for d in [2usize, 3] {
            for &t in &[0.01, 0.1, 1.0] {
                assert_relative_eq!(kernel_mass(d, t), 1.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn heat_kernel_flattens_at_large_time() {
        for d in [2usize, 3] {
            let uniform = 1.0 / sphere_area(d);
            for i in 0..10 {
                let x = -1.0 + 2.0 * i as f64 / 9.0;
                let k = heat_kernel(d, 50.0, x).unwrap();
                assert_relative_eq!(k, uniform, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn semigroup_property_by_spherical_convolution() {
        // (K_t * K_s)(k.sigma) = K_{t+s}(k.sigma); convolve numerically on S^2
        let d = 3;
        let (t, s) = (0.35, 0.2);
        let k_e3 = |x: f64| heat_kernel(d, t, x).unwrap();
        // convolution of zonal kernels at axis separation angle `alpha`:
        // int_{S^2} K_t(e.u) K_s(u.sigma) du with e.sigma = cos alpha
        let conv = |alpha: f64| {
            let ca = alpha.cos();
            let sa = alpha.sin();
            integrate_gl(
                |th: f64| {
                    let ring = integrate_gl(
                        |ph: f64| {
                            let usig = ca * th.cos() + sa * th.sin() * ph.cos();
                            heat_kernel(d, s, usig).unwrap()
                        },
                        0.0,
                        2.0 * PI,
                        64,
                    );
                    k_e3(th.cos()) * th.sin() * ring
                },
                0.0,
                PI,
                80,
            )
        };
        for &alpha in &[0.3f64, 1.1, 2.4] {
            assert_relative_eq!(
                conv(alpha),
                heat_kernel(d, t + s, alpha.cos()).unwrap(),
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn single_time_combination_reproduces_heat_kernel() {
        let hc = HeatCombination::new(3, HeatWeight::single(0.2).unwrap()).unwrap();
        for i in 0..20 {
            let x = -0.99 + 1.98 * i as f64 / 19.0;
            assert_relative_eq!(hc.eval(x), heat_kernel(3, 0.2, x).unwrap(), epsilon = 1e-12);
        }
    }

    #[test]
    fn fractional_multiplier_is_a_power() {
        // g(lambda_l) / lambda_l^{nu/2} = 1 +- 1e-3 for l <= 20
        for d in [2usize, 3] {
            for &nu in &[0.5f64, 1.0, 1.5] {
                let w = HeatWeight::fractional(nu).unwrap();
                for l in 1..=20 {
                    let lam = laplace_eigenvalue(d, l);
                    let ratio = w.multiplier(lam) / lam.powf(nu / 2.0);
                    assert!(
                        (ratio - 1.0).abs() < 1e-3,
                        "d={d} nu={nu} l={l}: ratio {ratio}"
                    );
                }
            }
        }
    }

    #[test]
    fn multiplier_monotone_in_l() {
        let w = HeatWeight::damped(0.5, 1.0).unwrap();
        let mut last = 0.0;
        for l in 0..=30 {
            let g = w.multiplier(laplace_eigenvalue(3, l));
            assert!(g >= last - 1e-15);
            last = g;
        }
    }
}
