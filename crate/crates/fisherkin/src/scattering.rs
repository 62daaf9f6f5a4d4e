//! Classical scattering for repulsive inverse-power-law forces.
//!
//! A particle with impact parameter p and relative speed |z| scatters off the
//! potential psi(r) = psi0 / r^{s-1}. The turning point r0 solves
//! 1 - p^2/r0^2 - 4 psi(r0)/|z|^2 = 0 and the deviation angle is
//!
//!   theta(p, z) = pi - 2 p int_{r0}^infty (dr / r^2) / sqrt(1 - p^2/r^2 - 4 psi(r)/|z|^2).
//!
//! Units are chosen so that psi0 = 1/4 by default, which makes theta(p)
//! = theta(p, 1) the reference profile for all speeds via the scaling
//! p |z|^{2/(s-1)} = const.

use crate::error::{FisherkinError, Result};
use crate::quad::{integrate_adaptive, integrate_gl};
use std::f64::consts::PI;

/// Repulsive inverse power-law force of exponent s (psi(r) = psi0 / r^{s-1}).
#[derive(Debug, Clone, Copy)]
pub struct PowerLawForce {
    pub s: f64,
    pub dim: usize,
    pub psi0: f64,
}

impl PowerLawForce {
    pub fn new(s: f64, dim: usize) -> Result<Self> {
        Self::with_psi0(s, dim, 0.25)
    }

    pub fn with_psi0(s: f64, dim: usize, psi0: f64) -> Result<Self> {
        if !(s > 1.0) {
            return Err(FisherkinError::InvalidParameter(format!(
                "force exponent must satisfy s > 1, got {s}"
            )));
        }
        if dim < 2 {
            return Err(FisherkinError::InvalidParameter(format!(
                "scattering requires dim >= 2, got {dim}"
            )));
        }
        if !(psi0 > 0.0) {
            return Err(FisherkinError::InvalidParameter(format!(
                "psi0 must be positive, got {psi0}"
            )));
        }
        Ok(PowerLawForce { s, dim, psi0 })
    }

    /// Velocity and angular exponents (gamma, nu) of the induced collision
    /// kernel: gamma = (s - (2d - 1))/(s - 1), nu = (d - 1)/(s - 1).
    /// They satisfy gamma + 2 nu = 1 identically.
    pub fn exponents(&self) -> (f64, f64) {
        power_law_exponents(self.s, self.dim)
    }
}

/// (gamma, nu) for an s-power force in dimension d.
///
/// # Panics
/// Asserts gamma + 2 nu = 1 (exact for power laws) and s > 1.
pub fn power_law_exponents(s: f64, d: usize) -> (f64, f64) {
    assert!(s > 1.0, "power_law_exponents requires s > 1");
    let gamma = (s - (2.0 * d as f64 - 1.0)) / (s - 1.0);
    let nu = (d as f64 - 1.0) / (s - 1.0);
    debug_assert!((gamma + 2.0 * nu - 1.0).abs() < 1e-12);
    (gamma, nu)
}

/// Turning-point radius: the positive root of 1 - p^2/r^2 - 4 psi(r)/z^2 = 0.
///
/// The left-hand side is strictly increasing in r, so bracketing + bisection
/// converges unconditionally; refined to 1e-12 relative.
pub fn turning_point(force: &PowerLawForce, p: f64, z_mag: f64) -> Result<f64> {
    let c = 4.0 * force.psi0 / (z_mag * z_mag);
    let g = |r: f64| 1.0 - (p * p) / (r * r) - c / r.powf(force.s - 1.0);
    let mut hi = p.max(c.powf(1.0 / (force.s - 1.0))).max(1e-8);
    let mut iters = 0;
    while g(hi) <= 0.0 {
        hi *= 2.0;
        iters += 1;
        if iters > 500 {
            return Err(FisherkinError::NoTurningPoint(format!(
                "no bracket for p={p}, z={z_mag}"
            )));
        }
    }
    let mut lo = hi / 2.0;
    iters = 0;
    while g(lo) >= 0.0 {
        lo /= 2.0;
        iters += 1;
        if iters > 500 {
            return Err(FisherkinError::NoTurningPoint(format!(
                "no sign change below r={hi} for p={p}, z={z_mag}"
            )));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if (hi - lo) < 1e-12 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Deviation angle theta(p, z) in [0, pi].
///
/// After the substitution y = r0/r the integral becomes
///   theta = pi - (2p/r0) int_0^1 dy / sqrt(A (1 - y^2) + c (1 - y^{s-1}))
/// with A = p^2/r0^2, c = 4 psi0 / (z^2 r0^{s-1}), A + c = 1. The endpoint
/// square-root singularity at y = 1 is removed by y = 1 - u^2; the milder
/// y^{s-1} kink at y = 0 is handled by adaptive quadrature.
pub fn deflection_angle(force: &PowerLawForce, p: f64, z_mag: f64) -> Result<f64> {
    if p < 0.0 {
        return Err(FisherkinError::InvalidParameter("p must be >= 0".into()));
    }
    if !(z_mag > 0.0) {
        return Err(FisherkinError::InvalidParameter("z must be > 0".into()));
    }
    if p == 0.0 {
        return Ok(PI); // head-on collision
    }
    let s = force.s;
    let r0 = turning_point(force, p, z_mag)?;
    let a = (p * p) / (r0 * r0);
    let c = 4.0 * force.psi0 / (z_mag * z_mag * r0.powf(s - 1.0));

    // stable 1 - y^{s-1} = -expm1((s-1) ln y) for y in (0, 1]
    let one_minus_pow = |y: f64| -> f64 {
        if y <= 0.0 {
            1.0
        } else {
            -((s - 1.0) * y.ln()).exp_m1()
        }
    };
    // integrand in y
    let fy = |y: f64| -> f64 {
        let h = a * (1.0 - y * y) + c * one_minus_pow(y);
        1.0 / h.sqrt()
    };
    // [0, 1/2]: smooth interior, adaptive handles the y^{s-1} kink at 0
    let part1 = integrate_adaptive(fy, 0.0, 0.5, 1e-13);
    // [1/2, 1]: substitute y = 1 - u^2, dy = -2u du:
    //   int_{1/2}^1 f dy = int_0^{1/sqrt 2} 2 u f(1 - u^2) du, now smooth.
    let fu = |u: f64| -> f64 {
        let u2 = u * u;
        // h / u^2 stays bounded near u = 0:
        //   A (1 - y^2) = A u^2 (2 - u^2),  1 - y^{s-1} -> (s-1) u^2 (1 + O(u^2))
        let h_over_u2 = if u2 < 1e-12 {
            2.0 * a + (s - 1.0) * c
        } else {
            // ln y = ln(1 - u^2) via ln_1p keeps full precision near y = 1
            let omp = -((s - 1.0) * (-u2).ln_1p()).exp_m1();
            (a * u2 * (2.0 - u2) + c * omp) / u2
        };
        2.0 / h_over_u2.sqrt()
    };
    let part2 = integrate_gl(fu, 0.0, 0.5f64.sqrt(), 96);
    let theta = PI - (2.0 * p / r0) * (part1 + part2);
    Ok(theta.clamp(0.0, PI))
}

/// Invert theta(p) (strictly decreasing, theta(0) = pi) by bisection to 1e-10.
pub fn impact_parameter(force: &PowerLawForce, theta: f64, z_mag: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < PI) {
        return Err(FisherkinError::AngleOutOfRange(format!(
            "theta must lie in (0, pi), got {theta}"
        )));
    }
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let mut iters = 0;
    while deflection_angle(force, hi, z_mag)? > theta {
        lo = hi;
        hi *= 2.0;
        iters += 1;
        if iters > 200 {
            return Err(FisherkinError::AngleOutOfRange(format!(
                "theta={theta} below the reachable range"
            )));
        }
    }
    for _ in 0..120 {
        let mid = 0.5 * (lo + hi);
        if deflection_angle(force, mid, z_mag)? > theta {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-10 * hi.max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// |z|-independent angular factor b(cos theta) of the scattering kernel,
/// b(cos theta) = (p / sin theta)^{d-2} |dp/dtheta|, evaluated at z = 1
/// with the psi0 = 1/4 normalisation.
///
/// dp/dtheta comes from a centered difference on the inverse map with step
/// 1e-4 * theta.
pub fn angular_kernel_from_scattering(force: &PowerLawForce, theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < PI) {
        return Err(FisherkinError::AngleOutOfRange(format!(
            "theta must lie in (0, pi), got {theta}"
        )));
    }
    let h = 1e-4 * theta.min(PI - theta).min(1.0);
    let p_plus = impact_parameter(force, theta + h, 1.0)?;
    let p_minus = impact_parameter(force, theta - h, 1.0)?;
    let p_mid = impact_parameter(force, theta, 1.0)?;
    let dpdtheta = (p_plus - p_minus) / (2.0 * h);
    Ok((p_mid / theta.sin()).powi(force.dim as i32 - 2) * dpdtheta.abs())
}
