//! Collision kernels B(|z|, cos theta) and angular kernels beta(cos theta).
//!
//! The taxonomy: inverse power-law scattering kernels (tabulated from the
//! classical scattering problem), the Rutherford and hard-sphere closed forms,
//! the screened Coulomb approximation, and product kernels |z|^gamma beta.
//! Derived quantities: the cross-section for momentum transfer M(z), the
//! compensated adjoint kernel S(z), the relative-velocity log-derivative bound
//! gamma_bar, and grazing restrictions that drive the Landau limit.

use crate::error::{FisherkinError, Result};
use crate::quad::{gauss_legendre, integrate_adaptive};
use crate::scattering::{deflection_angle, PowerLawForce};
use crate::spectral::heat::{HeatCombination, HeatWeight};
use crate::sphere::sphere_area;
use std::f64::consts::PI;
use std::sync::Arc;

/// Angular factor b(cos theta) of an inverse-power-law kernel, tabulated once
/// from the scattering map p -> theta(p) and interpolated log-log in theta.
#[derive(Debug, Clone)]
pub struct ScatteringTable {
    pub force: PowerLawForce,
    /// ascending theta
    log_theta: Vec<f64>,
    log_b: Vec<f64>,
    /// local log-log slope at the small-theta end, for extrapolation
    head_slope: f64,
}

impl ScatteringTable {
    /// Sweep the impact parameter geometrically and record
    /// b = (p / sin theta)^{d-2} / |dtheta/dp|.
    pub fn build(force: PowerLawForce) -> Result<Self> {
        let mut p_max = 10.0f64;
        while deflection_angle(&force, p_max, 1.0)? > 1e-4 {
            p_max *= 2.0;
            if p_max > 1e12 {
                break;
            }
        }
        let p_min = 1e-5f64;
        let n = 600usize;
        let ratio = (p_max / p_min).ln();
        let eps = 1e-4;
        let mut entries: Vec<(f64, f64)> = Vec::with_capacity(n);
        for i in 0..n {
            let p = p_min * (ratio * i as f64 / (n - 1) as f64).exp();
            let th = deflection_angle(&force, p, 1.0)?;
            if !(th > 1e-9 && th < PI - 1e-9) {
                continue;
            }
            let tp = deflection_angle(&force, p * (1.0 + eps), 1.0)?;
            let tm = deflection_angle(&force, p * (1.0 - eps), 1.0)?;
            let dtheta_dp = (tp - tm) / (2.0 * eps * p);
            if dtheta_dp >= 0.0 {
                continue;
            }
            let b = (p / th.sin()).powi(force.dim as i32 - 2) / dtheta_dp.abs();
            if b.is_finite() && b > 0.0 {
                entries.push((th, b));
            }
        }
        entries.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        entries.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-12);
        if entries.len() < 10 {
            return Err(FisherkinError::InvalidParameter(
                "scattering sweep produced too few samples".into(),
            ));
        }
        let log_theta: Vec<f64> = entries.iter().map(|e| e.0.ln()).collect();
        let log_b: Vec<f64> = entries.iter().map(|e| e.1.ln()).collect();
        let head_slope = (log_b[1] - log_b[0]) / (log_theta[1] - log_theta[0]);
        Ok(ScatteringTable {
            force,
            log_theta,
            log_b,
            head_slope,
        })
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let lt = theta.ln();
        let n = self.log_theta.len();
        if lt <= self.log_theta[0] {
            // power-law extrapolation into the grazing regime
            return (self.log_b[0] + self.head_slope * (lt - self.log_theta[0])).exp();
        }
        if lt >= self.log_theta[n - 1] {
            return self.log_b[n - 1].exp();
        }
        let idx = match self
            .log_theta
            .binary_search_by(|v| v.partial_cmp(&lt).unwrap())
        {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let (x0, x1) = (self.log_theta[idx], self.log_theta[idx + 1]);
        let (y0, y1) = (self.log_b[idx], self.log_b[idx + 1]);
        let t = (lt - x0) / (x1 - x0);
        (y0 + t * (y1 - y0)).exp()
    }
}

/// Angular collision kernel beta on S^{d-1}: closed form, sampled table,
/// atomic measure, or heat-kernel combination.
#[derive(Clone)]
pub enum AngularShape {
    Constant(f64),
    /// Hard-sphere angular factor 1 / (2^{d-2} sin^{d-3}(theta/2)).
    HardSphere,
    /// Arbitrary closed form of cos theta.
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    /// Power-law scattering table.
    Scattering(Arc<ScatteringTable>),
    /// Atomic measure: mass m_i on the subsphere at deviation angle theta_i
    /// (each atom integrates a test g as m_i |S^{d-2}| g(cos theta_i)).
    Atomic { angles: Vec<f64>, masses: Vec<f64> },
    /// beta = int K_t lambda(dt).
    Heat(Arc<HeatCombination>),
}

#[derive(Clone)]
pub struct AngularKernel {
    pub dim: usize,
    pub shape: AngularShape,
    /// kernel vanishes for theta < theta_min
    pub theta_min: f64,
    /// known small-theta singularity exponent: beta sin^{d-2} ~ theta^{-(1+nu)}
    nu_hint: Option<f64>,
}

impl AngularKernel {
    pub fn constant(dim: usize, c: f64) -> Self {
        AngularKernel {
            dim,
            shape: AngularShape::Constant(c),
            theta_min: 0.0,
            nu_hint: Some(-2.0),
        }
    }

    pub fn hard_sphere(dim: usize) -> Self {
        AngularKernel {
            dim,
            // b sin^{d-2} ~ theta^{d-2} / theta^{d-3} = theta: nu = -2 effective
            shape: AngularShape::HardSphere,
            theta_min: 0.0,
            nu_hint: Some(-2.0),
        }
    }

    pub fn from_fn<F: Fn(f64) -> f64 + Send + Sync + 'static>(dim: usize, f: F) -> Self {
        AngularKernel {
            dim,
            shape: AngularShape::Function(Arc::new(f)),
            theta_min: 0.0,
            nu_hint: None,
        }
    }

    pub fn from_scattering(force: PowerLawForce) -> Result<Self> {
        let (_, nu) = force.exponents();
        Ok(AngularKernel {
            dim: force.dim,
            shape: AngularShape::Scattering(Arc::new(ScatteringTable::build(force)?)),
            theta_min: 0.0,
            nu_hint: Some(nu),
        })
    }

    /// Atoms at arbitrary deviation angles.
    pub fn atomic_at(dim: usize, angles: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        if angles.len() != masses.len() {
            return Err(FisherkinError::DimMismatch(
                "angles and masses differ in length".into(),
            ));
        }
        if masses.iter().any(|&m| m < 0.0) {
            return Err(FisherkinError::InvalidParameter(
                "atomic masses must be nonnegative".into(),
            ));
        }
        Ok(AngularKernel {
            dim,
            shape: AngularShape::Atomic { angles, masses },
            theta_min: 0.0,
            nu_hint: None,
        })
    }

    /// Atoms at theta_i = i pi / N, i = 0..=N, with the given masses.
    pub fn atomic(dim: usize, n: usize, masses: Vec<f64>) -> Result<Self> {
        if masses.len() != n + 1 {
            return Err(FisherkinError::InvalidParameter(format!(
                "atomic kernel with N={n} needs {} masses, got {}",
                n + 1,
                masses.len()
            )));
        }
        if masses.iter().any(|&m| m < 0.0) {
            return Err(FisherkinError::InvalidParameter(
                "atomic masses must be nonnegative".into(),
            ));
        }
        let angles = (0..=n).map(|i| PI * i as f64 / n as f64).collect();
        Ok(AngularKernel {
            dim,
            shape: AngularShape::Atomic { angles, masses },
            theta_min: 0.0,
            nu_hint: None,
        })
    }

    pub fn heat_combination(dim: usize, weight: HeatWeight) -> Result<Self> {
        // singularity of the subordinated kernel matches the weight's small-t
        // power if any; leave it to numeric estimation when unknown
        Ok(AngularKernel {
            dim,
            shape: AngularShape::Heat(Arc::new(HeatCombination::new(dim, weight)?)),
            theta_min: 0.0,
            nu_hint: None,
        })
    }

    pub fn with_cutoff(mut self, theta_min: f64) -> Self {
        self.theta_min = theta_min;
        self
    }

    pub fn with_nu_hint(mut self, nu: f64) -> Self {
        self.nu_hint = Some(nu);
        self
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self.shape, AngularShape::Atomic { .. })
    }

    pub fn atoms(&self) -> Option<(&[f64], &[f64])> {
        match &self.shape {
            AngularShape::Atomic { angles, masses } => Some((angles, masses)),
            _ => None,
        }
    }

    /// Pointwise value beta(cos theta) (zero below the cutoff).
    ///
    /// # Panics
    /// On atomic kernels, which have no pointwise density.
    pub fn eval_theta(&self, theta: f64) -> f64 {
        if theta < self.theta_min {
            return 0.0;
        }
        match &self.shape {
            AngularShape::Constant(c) => *c,
            AngularShape::HardSphere => {
                let d = self.dim as i32;
                1.0 / (2f64.powi(d - 2) * (theta / 2.0).sin().powi(d - 3))
            }
            AngularShape::Function(f) => f(theta.cos()),
            AngularShape::Scattering(t) => t.eval(theta),
            AngularShape::Atomic { .. } => panic!("atomic angular kernel has no density"),
            AngularShape::Heat(h) => h.eval(theta.cos()),
        }
    }

    /// Symmetrised value [beta(cos theta) + beta(-cos theta)] / 2.
    pub fn eval_symmetrised(&self, theta: f64) -> f64 {
        0.5 * (self.eval_theta(theta) + self.eval_theta(PI - theta))
    }

    /// Small-theta singularity exponent nu (beta sin^{d-2} ~ theta^{-(1+nu)}),
    /// from the hint or a two-point log fit.
    pub fn nu_estimate(&self) -> f64 {
        if let Some(nu) = self.nu_hint {
            return nu;
        }
        if self.is_atomic() {
            return -2.0; // atoms away from zero: no grazing singularity
        }
        let (t1, t2) = (2e-3, 4e-4);
        let w = |t: f64| self.eval_theta(t) * t.sin().powi(self.dim as i32 - 2);
        let (w1, w2) = (w(t1), w(t2));
        if !(w1 > 0.0 && w2 > 0.0) {
            return -2.0;
        }
        let slope = (w2.ln() - w1.ln()) / (t2.ln() - t1.ln());
        -slope - 1.0
    }

    /// Angular integral int f(theta) beta dsigma over S^{d-1}.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let sd2 = sphere_area(self.dim - 1);
        if let Some((angles, masses)) = self.atoms() {
            return angles
                .iter()
                .zip(masses)
                .map(|(&t, &m)| {
                    if t >= self.theta_min {
                        m * sd2 * f(t)
                    } else {
                        0.0
                    }
                })
                .sum();
        }
        let dm2 = self.dim as i32 - 2;
        let g = |t: f64| f(t) * self.eval_theta(t) * t.sin().powi(dm2);
        sd2 * integrate_theta(g, self.theta_min.max(0.0))
    }

    /// Momentum-transfer moment mu(beta) = int (1 - cos theta) beta dsigma.
    pub fn mu(&self) -> f64 {
        self.integrate(|t| -(t.cos() - 1.0))
    }

    /// Grazing restriction: beta_n = c_n beta 1_{theta <= 1/n} with c_n chosen
    /// so that mu is preserved.
    pub fn grazing(&self, n: usize) -> Result<AngularKernel> {
        let cutoff = 1.0 / n as f64;
        if self.nu_estimate() >= 2.0 && self.theta_min <= 0.0 {
            return Err(FisherkinError::DivergentMomentumTransfer(
                "grazing restriction of a nu >= 2 kernel without cutoff".into(),
            ));
        }
        let mu_full = self.mu();
        let restricted = self.restrict_window(cutoff, 1.0);
        let mu_cut = restricted.mu();
        if !(mu_cut > 0.0) {
            return Err(FisherkinError::InvalidParameter(format!(
                "grazing window theta <= {cutoff} carries no mass"
            )));
        }
        Ok(self.restrict_window(cutoff, mu_full / mu_cut))
    }

    /// Kernel scaled and restricted to theta <= cutoff.
    fn restrict_window(&self, cutoff: f64, scale: f64) -> AngularKernel {
        let inner = self.clone();
        AngularKernel {
            dim: self.dim,
            shape: AngularShape::Function(Arc::new(move |x: f64| {
                let t = x.clamp(-1.0, 1.0).acos();
                if t <= cutoff && !inner.is_atomic() {
                    scale * inner.eval_theta(t)
                } else {
                    0.0
                }
            })),
            theta_min: self.theta_min,
            nu_hint: self.nu_hint,
        }
    }
}

/// Composite quadrature of g over [lo, pi] with an integrable singularity
/// allowed at theta = 0: adaptive rule away from zero plus log-spaced panels
/// toward the origin, truncated when panels stop contributing.
pub fn integrate_theta<F: Fn(f64) -> f64>(g: F, lo: f64) -> f64 {
    let split = 0.05f64;
    if lo >= split {
        return integrate_adaptive(&g, lo, PI, 1e-12);
    }
    let mut acc = integrate_adaptive(&g, split, PI, 1e-12);
    let floor = lo.max(1e-12);
    let (xg, wg) = gauss_legendre(12);
    let mut hi = split;
    let step = (10.0f64).ln() / 4.0;
    let mut quiet = 0;
    while hi > floor {
        let lo_panel = (hi.ln() - step).exp().max(floor);
        let c = 0.5 * (hi - lo_panel);
        let mid = 0.5 * (hi + lo_panel);
        let mut panel = 0.0;
        for i in 0..xg.len() {
            panel += wg[i] * g(mid + c * xg[i]);
        }
        panel *= c;
        acc += panel;
        if panel.abs() < 1e-15 * acc.abs().max(1e-300) {
            quiet += 1;
            if quiet >= 4 {
                break;
            }
        } else {
            quiet = 0;
        }
        hi = lo_panel;
    }
    acc
}

/// Full collision kernel B(|z|, cos theta).
#[derive(Clone)]
pub enum KernelFamily {
    /// Inverse power-law force: B = |z|^gamma b(cos theta), b from scattering.
    PowerLaw {
        force: PowerLawForce,
        table: Arc<ScatteringTable>,
    },
    /// B = |z| / (2 |z| sin(theta/2))^{2(d-1)}.
    Rutherford,
    /// B = |z| / (2^{d-2} sin^{d-3}(theta/2)).
    HardSphere,
    /// Debye-screened Coulomb approximation (d = 3):
    /// B = |z| / ((|z| sin(theta/2))^2 + 1/lambda)^2.
    ScreenedCoulomb { lambda: f64 },
    /// B = |z|^gamma beta(cos theta).
    Product { gamma: f64, angular: AngularKernel },
    /// Grazing restriction of a base kernel: scale * B * 1_{theta <= cutoff}.
    Grazing {
        base: Box<CollisionKernel>,
        cutoff: f64,
        scale: f64,
    },
}

#[derive(Clone)]
pub struct CollisionKernel {
    pub dim: usize,
    pub family: KernelFamily,
    /// angular cutoff: B = 0 for theta < theta_min
    pub theta_min: f64,
}

/// Rutherford kernel in dimension d: |z| / (2 |z| sin(theta/2))^{2(d-1)}.
pub fn rutherford_kernel(d: usize, z_mag: f64, theta: f64) -> f64 {
    z_mag / (2.0 * z_mag * (theta / 2.0).sin()).powi(2 * (d as i32 - 1))
}

/// Hard-sphere kernel in dimension d: |z| / (2^{d-2} sin^{d-3}(theta/2)).
pub fn hard_sphere_kernel(d: usize, z_mag: f64, theta: f64) -> f64 {
    z_mag / (2f64.powi(d as i32 - 2) * (theta / 2.0).sin().powi(d as i32 - 3))
}

impl CollisionKernel {
    pub fn power_law(s: f64, dim: usize) -> Result<Self> {
        let force = PowerLawForce::new(s, dim)?;
        let table = Arc::new(ScatteringTable::build(force)?);
        Ok(CollisionKernel {
            dim,
            family: KernelFamily::PowerLaw { force, table },
            theta_min: 0.0,
        })
    }

    pub fn rutherford(dim: usize) -> Self {
        CollisionKernel {
            dim,
            family: KernelFamily::Rutherford,
            theta_min: 0.0,
        }
    }

    pub fn hard_sphere(dim: usize) -> Self {
        CollisionKernel {
            dim,
            family: KernelFamily::HardSphere,
            theta_min: 0.0,
        }
    }

    pub fn screened_coulomb(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(FisherkinError::InvalidParameter(
                "screening length must be positive".into(),
            ));
        }
        Ok(CollisionKernel {
            dim: 3,
            family: KernelFamily::ScreenedCoulomb { lambda },
            theta_min: 0.0,
        })
    }

    /// Product kernel |z|^gamma beta. Warns (via error) when gamma < -dim,
    /// where the velocity singularity leaves the supported range.
    pub fn product(gamma: f64, angular: AngularKernel) -> Result<Self> {
        if gamma < -(angular.dim as f64) {
            return Err(FisherkinError::InvalidParameter(format!(
                "product kernel with gamma={gamma} below -d={}",
                -(angular.dim as f64)
            )));
        }
        Ok(CollisionKernel {
            dim: angular.dim,
            family: KernelFamily::Product { gamma, angular },
            theta_min: 0.0,
        })
    }

    /// Maxwell kernel: B constant in |z| (here B = c, no angular dependence).
    pub fn maxwell(dim: usize, c: f64) -> Self {
        CollisionKernel {
            dim,
            family: KernelFamily::Product {
                gamma: 0.0,
                angular: AngularKernel::constant(dim, c),
            },
            theta_min: 0.0,
        }
    }

    pub fn with_cutoff(mut self, theta_min: f64) -> Self {
        self.theta_min = theta_min;
        self
    }

    /// B(|z|, cos theta); zero below the angular cutoff.
    pub fn eval(&self, z_mag: f64, theta: f64) -> f64 {
        if theta < self.theta_min {
            return 0.0;
        }
        match &self.family {
            KernelFamily::PowerLaw { force, table } => {
                let (gamma, _) = force.exponents();
                z_mag.powf(gamma) * table.eval(theta)
            }
            KernelFamily::Rutherford => rutherford_kernel(self.dim, z_mag, theta),
            KernelFamily::HardSphere => hard_sphere_kernel(self.dim, z_mag, theta),
            KernelFamily::ScreenedCoulomb { lambda } => {
                let w = (z_mag * (theta / 2.0).sin()).powi(2);
                z_mag / (w + 1.0 / lambda).powi(2)
            }
            KernelFamily::Product { gamma, angular } => {
                z_mag.powf(*gamma) * angular.eval_theta(theta)
            }
            KernelFamily::Grazing {
                base,
                cutoff,
                scale,
            } => {
                if theta <= *cutoff {
                    scale * base.eval(z_mag, theta)
                } else {
                    0.0
                }
            }
        }
    }

    /// dB/d|z| at (z, theta); analytic for every family.
    pub fn db_dz(&self, z_mag: f64, theta: f64) -> f64 {
        if theta < self.theta_min {
            return 0.0;
        }
        match &self.family {
            KernelFamily::ScreenedCoulomb { lambda } => {
                let s2 = (theta / 2.0).sin().powi(2);
                let w = z_mag * z_mag * s2;
                let b = self.eval(z_mag, theta);
                b / z_mag * (1.0 - 4.0 * w / (w + 1.0 / lambda))
            }
            KernelFamily::Grazing {
                base,
                cutoff,
                scale,
            } => {
                if theta <= *cutoff {
                    scale * base.db_dz(z_mag, theta)
                } else {
                    0.0
                }
            }
            _ => {
                let gamma = self.velocity_exponent().expect("product-form kernel");
                gamma * self.eval(z_mag, theta) / z_mag
            }
        }
    }

    /// The z-power gamma when the kernel factorises as |z|^gamma b(cos theta).
    pub fn velocity_exponent(&self) -> Option<f64> {
        match &self.family {
            KernelFamily::PowerLaw { force, .. } => Some(force.exponents().0),
            KernelFamily::Rutherford => Some(3.0 - 2.0 * self.dim as f64),
            KernelFamily::HardSphere => Some(1.0),
            KernelFamily::ScreenedCoulomb { .. } => None,
            KernelFamily::Product { gamma, .. } => Some(*gamma),
            KernelFamily::Grazing { base, .. } => base.velocity_exponent(),
        }
    }

    /// Angular singularity exponent nu (B sin^{d-2} ~ theta^{-(1+nu)}), when known.
    pub fn angular_exponent(&self) -> f64 {
        match &self.family {
            KernelFamily::PowerLaw { force, .. } => force.exponents().1,
            KernelFamily::Rutherford => self.dim as f64 - 1.0,
            KernelFamily::HardSphere => -2.0,
            KernelFamily::ScreenedCoulomb { .. } => -2.0, // bounded at theta = 0
            KernelFamily::Product { angular, .. } => angular.nu_estimate(),
            KernelFamily::Grazing { base, .. } => base.angular_exponent(),
        }
    }

    fn check_momentum_finite(&self) -> Result<()> {
        if self.angular_exponent() >= 2.0 && self.theta_min <= 0.0 {
            return Err(FisherkinError::DivergentMomentumTransfer(format!(
                "nu = {} >= 2 without angular cutoff",
                self.angular_exponent()
            )));
        }
        Ok(())
    }

    /// Cross-section for momentum transfer M(z) = int (1 - k.sigma) B dsigma.
    pub fn momentum_transfer(&self, z_mag: f64) -> Result<f64> {
        self.check_momentum_finite()?;
        if let KernelFamily::Product { gamma, angular } = &self.family {
            if angular.is_atomic() {
                let cut = self.theta_min;
                return Ok(z_mag.powf(*gamma)
                    * angular.integrate(|t| if t >= cut { -(t.cos() - 1.0) } else { 0.0 }));
            }
        }
        let dm2 = self.dim as i32 - 2;
        let sd2 = sphere_area(self.dim - 1);
        let g =
            |t: f64| -> f64 { -(t.cos() - 1.0) * self.eval(z_mag, t) * t.sin().powi(dm2) };
        Ok(sd2 * integrate_theta(g, self.theta_min.max(0.0)))
    }

    /// Transverse moment Sigma(|z|) = int sin^2 theta B dsigma.
    pub fn transverse_sigma(&self, z_mag: f64) -> f64 {
        let dm2 = self.dim as i32 - 2;
        let sd2 = sphere_area(self.dim - 1);
        if let KernelFamily::Product { gamma, angular } = &self.family {
            if angular.is_atomic() {
                let cut = self.theta_min;
                return z_mag.powf(*gamma)
                    * angular
                        .integrate(|t| if t >= cut { t.sin().powi(2) } else { 0.0 });
            }
        }
        let g = |t: f64| -> f64 {
            t.sin().powi(2) * self.eval(z_mag, t) * t.sin().powi(dm2)
        };
        sd2 * integrate_theta(g, self.theta_min.max(0.0))
    }

    /// Compensated adjoint kernel
    /// S(z) = |S^{d-2}| int_0^pi [cos^{-d}(theta/2) B(|z|/cos(theta/2), cos theta) - B(|z|, cos theta)] sin^{d-2} theta dtheta,
    /// so that S * f = Q(f, 1).
    pub fn compensated_adjoint(&self, z_mag: f64) -> Result<f64> {
        if self.angular_exponent() >= 2.0 && self.theta_min <= 0.0 {
            return Err(FisherkinError::DivergentCompensatedAdjoint(format!(
                "nu = {} >= 2 without angular cutoff",
                self.angular_exponent()
            )));
        }
        let d = self.dim as f64;
        let dm2 = self.dim as i32 - 2;
        let sd2 = sphere_area(self.dim - 1);
        let g = |t: f64| -> f64 {
            let c = (t / 2.0).cos();
            (self.eval(z_mag / c, t) / c.powf(d) - self.eval(z_mag, t)) * t.sin().powi(dm2)
        };
        Ok(sd2 * integrate_theta(g, self.theta_min.max(0.0)))
    }

    /// gamma_bar(B, r) = sup over theta of |(|z|/B) dB/d|z|| at |z| = r.
    ///
    /// Exact |gamma| for product kernels; dense theta sampling (1e-3 step)
    /// otherwise.
    pub fn gamma_bar(&self, r: f64) -> f64 {
        if let Some(gamma) = self.velocity_exponent() {
            return gamma.abs();
        }
        let mut sup: f64 = 0.0;
        let mut t = self.theta_min.max(1e-3);
        while t < PI {
            let b = self.eval(r, t);
            if b > 0.0 {
                sup = sup.max((r * self.db_dz(r, t) / b).abs());
            }
            t += 1e-3;
        }
        sup
    }

    /// sup over r of gamma_bar(B, r).
    pub fn gamma_bar_sup(&self) -> f64 {
        if let Some(gamma) = self.velocity_exponent() {
            return gamma.abs();
        }
        let mut sup: f64 = 0.0;
        for i in -40..=40 {
            let r = 10f64.powf(i as f64 / 8.0);
            sup = sup.max(self.gamma_bar(r));
        }
        sup
    }

    /// Grazing family member n: restrict to theta <= 1/n and rescale so the
    /// momentum transfer matches `m_target` (default: the base kernel's own
    /// M(1), which must then be finite).
    pub fn grazing_family(&self, n: usize, m_target: Option<f64>) -> Result<CollisionKernel> {
        let cutoff = 1.0 / n as f64;
        let target = match m_target {
            Some(m) => m,
            None => self.momentum_transfer(1.0)?,
        };
        let restricted = CollisionKernel {
            dim: self.dim,
            family: KernelFamily::Grazing {
                base: Box::new(self.clone()),
                cutoff,
                scale: 1.0,
            },
            theta_min: self.theta_min,
        };
        let m_cut = restricted.momentum_transfer(1.0)?;
        if !(m_cut > 0.0) {
            return Err(FisherkinError::InvalidParameter(format!(
                "grazing window theta <= {cutoff} carries no momentum transfer"
            )));
        }
        Ok(CollisionKernel {
            dim: self.dim,
            family: KernelFamily::Grazing {
                base: Box::new(self.clone()),
                cutoff,
                scale: target / m_cut,
            },
            theta_min: self.theta_min,
        })
    }
}
