//! Pointwise comparison of two angular kernels over the deviation angle.
//!
//! Both kernels are weighted by sin^{d-2} theta and symmetrised
//! ([beta(cos t) + beta(-cos t)]/2) so that endpoint behaviour compares like
//! with like for even-function criteria; the ratio then extends continuously
//! to the endpoints, which are excluded at 1e-3 to avoid floating-point
//! blowup. The reported pair (m, M) feeds the perturbation bound
//! K_*(beta) >= (m/M) K_*(beta_0).

use crate::error::{FisherkinError, Result};
use crate::kernels::AngularKernel;
use std::f64::consts::PI;

/// Result of a kernel comparison over a theta grid.
#[derive(Debug, Clone)]
pub struct RatioReport {
    pub theta: Vec<f64>,
    pub target_weighted: Vec<f64>,
    pub reference_weighted: Vec<f64>,
    pub ratio: Vec<f64>,
    /// inf of target/reference
    pub m: f64,
    /// sup of target/reference
    pub big_m: f64,
}

impl RatioReport {
    pub fn spread(&self) -> f64 {
        self.big_m / self.m
    }
}

/// Compare sin^{d-2}-weighted, symmetrised kernels on
/// theta in [theta_lo, pi - theta_lo] (default exclusion 1e-3).
pub fn kernel_ratio(
    target: &AngularKernel,
    reference: &AngularKernel,
    n_grid: usize,
    theta_lo: Option<f64>,
) -> Result<RatioReport> {
    if target.dim != reference.dim {
        return Err(FisherkinError::DimMismatch(format!(
            "target dim {} vs reference dim {}",
            target.dim, reference.dim
        )));
    }
    let d = target.dim;
    let lo = theta_lo.unwrap_or(1e-3);
    let n = n_grid.max(16);
    let mut theta = Vec::with_capacity(n);
    let mut tw = Vec::with_capacity(n);
    let mut rw = Vec::with_capacity(n);
    let mut ratio = Vec::with_capacity(n);
    let mut m = f64::INFINITY;
    let mut big_m = 0.0f64;
    // log-spaced up to pi/2 then mirrored linear: resolves the singular end
    for i in 0..n {
        let t = if i < n / 2 {
            // log spacing on [lo, pi/2]
            lo * (PI / 2.0 / lo).powf(i as f64 / (n / 2) as f64)
        } else {
            // linear on [pi/2, pi - lo]
            PI / 2.0 + (PI / 2.0 - lo) * (i - n / 2) as f64 / (n - n / 2) as f64
        };
        let w = t.sin().powi(d as i32 - 2);
        let tv = target.eval_symmetrised(t) * w;
        let rv = reference.eval_symmetrised(t) * w;
        if !(rv > 0.0) {
            return Err(FisherkinError::VanishingReference);
        }
        let r = tv / rv;
        m = m.min(r);
        big_m = big_m.max(r);
        theta.push(t);
        tw.push(tv);
        rw.push(rv);
        ratio.push(r);
    }
    Ok(RatioReport {
        theta,
        target_weighted: tw,
        reference_weighted: rw,
        ratio,
        m,
        big_m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scattering::PowerLawForce;
    use crate::spectral::heat::HeatWeight;

    #[test]
    fn identical_kernels_have_unit_spread() {
        let a = AngularKernel::constant(3, 2.0);
        let b = AngularKernel::constant(3, 1.0);
        let r = kernel_ratio(&a, &b, 200, None).unwrap();
        assert!((r.m - 2.0).abs() < 1e-12);
        assert!((r.big_m - 2.0).abs() < 1e-12);
        assert!((r.spread() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_law_vs_fractional_dimension_two() {
        // the s = 2 case (nu = 1) of the d = 2 comparison family
        let force = PowerLawForce::new(2.0, 2).unwrap();
        let (_, nu) = force.exponents();
        let target = AngularKernel::from_scattering(force).unwrap();
        let reference =
            AngularKernel::heat_combination(2, HeatWeight::fractional(nu).unwrap()).unwrap();
        let r = kernel_ratio(&target, &reference, 400, None).unwrap();
        assert!(
            r.spread() <= 2f64.sqrt() + 0.05,
            "d=2 s=2: M/m = {}",
            r.spread()
        );
    }
}
