//! Geometry and quadrature on the unit sphere S^{d-1}.
//!
//! The transport map `P_{k,sigma}` rotates k onto sigma inside their common
//! plane and scales the orthogonal complement by k.sigma; it carries tangent
//! data at k to tangent data at sigma, so gradients living at different sphere
//! points can be compared. The transported squared distance
//! |y - x|^2_{k,sigma} = |x|^2 + |y|^2 - 2 (P_{k,sigma} x).y is the quadratic
//! form built from it. All algebraic operations work in any dimension d >= 2;
//! quadrature grids are provided for d = 2 (circle) and d = 3.

use crate::error::{FisherkinError, Result};
use crate::quad::gauss_legendre;
use std::f64::consts::PI;
use std::sync::Arc;

/// A point of S^{d-1}, stored as a unit vector in R^d.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Normalizes the input; errors on (near-)zero vectors.
    pub fn new(components: Vec<f64>) -> Result<Self> {
        let n = norm(&components);
        if !(n > 1e-14) {
            return Err(FisherkinError::InvalidParameter(
                "cannot normalize zero vector".into(),
            ));
        }
        Ok(UnitVector(components.iter().map(|c| c / n).collect()))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn antipode(&self) -> UnitVector {
        UnitVector(self.0.iter().map(|c| -c).collect())
    }

    /// Circle point at angle alpha (d = 2).
    pub fn from_angle(alpha: f64) -> Self {
        UnitVector(vec![alpha.cos(), alpha.sin()])
    }

    /// Spherical coordinates (d = 3): theta polar from +z, phi azimuth.
    pub fn from_polar(theta: f64, phi: f64) -> Self {
        UnitVector(vec![
            theta.sin() * phi.cos(),
            theta.sin() * phi.sin(),
            theta.cos(),
        ])
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// The transport map: P_{k,sigma} x = (k.sigma) x + (x.k) sigma - (sigma.x) k.
///
/// Sends k to sigma, maps the tangent plane at k onto the tangent plane at
/// sigma, acts as the plane rotation on span(k, sigma) and as multiplication
/// by k.sigma on its orthogonal complement.
pub fn p_transport(k: &UnitVector, sigma: &UnitVector, x: &[f64]) -> Vec<f64> {
    let (kc, sc) = (k.components(), sigma.components());
    assert_eq!(kc.len(), sc.len());
    assert_eq!(kc.len(), x.len());
    let ks = dot(kc, sc);
    let xk = dot(x, kc);
    let sx = dot(sc, x);
    (0..x.len())
        .map(|i| ks * x[i] + xk * sc[i] - sx * kc[i])
        .collect()
}

/// |P_{k,sigma} x|^2 without forming the vector.
fn p_transport_norm_sq(k: &[f64], s: &[f64], x: &[f64]) -> f64 {
    let ks = dot(k, s);
    let xk = dot(x, k);
    let sx = dot(s, x);
    let xx = dot(x, x);
    // |P x|^2 = (k.s)^2 |x|^2 + (x.k)^2 + (s.x)^2 - 2 (k.s)(x.k)(s.x)
    ks * ks * xx + xk * xk + sx * sx - 2.0 * ks * xk * sx
}

/// (P_{k,sigma} x) . y without forming the vector.
pub fn p_transport_dot(k: &UnitVector, sigma: &UnitVector, x: &[f64], y: &[f64]) -> f64 {
    let (kc, sc) = (k.components(), sigma.components());
    dot(kc, sc) * dot(x, y) + dot(x, kc) * dot(sc, y) - dot(sc, x) * dot(kc, y)
}

/// Transported squared distance |y - x|^2_{k,sigma} = |x|^2 + |y|^2 - 2 (P_{k,sigma} x).y.
///
/// Nonnegative since |P_{k,sigma} x| <= |x|. The "x" slot carries the tangent
/// datum at k, the "y" slot the one at sigma.
pub fn transported_sq_dist(k: &UnitVector, sigma: &UnitVector, x: &[f64], y: &[f64]) -> f64 {
    dot(x, x) + dot(y, y) - 2.0 * p_transport_dot(k, sigma, x, y)
}

/// The transport defect |x|^2 - |P_{k,sigma} x|^2 = [1 - (k.sigma)^2] |Pi_{span(k,sigma)^perp} x|^2.
pub fn defect(k: &UnitVector, sigma: &UnitVector, x: &[f64]) -> f64 {
    dot(x, x) - p_transport_norm_sq(k.components(), sigma.components(), x)
}

/// Average of <A phi, phi> over the subsphere S^{d-2} orthogonal to k:
/// closed form tr(A Pi_{k^perp}) / (d - 1) for symmetric A (row-major d x d).
pub fn subsphere_average(a: &[f64], k: &UnitVector) -> f64 {
    let d = k.dim();
    assert_eq!(a.len(), d * d);
    let kc = k.components();
    let mut tr = 0.0;
    let mut kak = 0.0;
    for i in 0..d {
        tr += a[i * d + i];
        for j in 0..d {
            kak += kc[i] * a[i * d + j] * kc[j];
        }
    }
    (tr - kak) / (d as f64 - 1.0)
}

/// Orthonormal frame (e1, e2) of the plane orthogonal to k (d = 3).
///
/// Seeded by the coordinate axis least aligned with k, so the completion is
/// deterministic and stable when k is near a coordinate axis.
pub fn orthogonal_frame_3d(k: &UnitVector) -> ([f64; 3], [f64; 3]) {
    let kc = k.components();
    let mut seed = [0.0; 3];
    let imin = (0..3)
        .min_by(|&i, &j| kc[i].abs().partial_cmp(&kc[j].abs()).unwrap())
        .unwrap();
    seed[imin] = 1.0;
    let proj = dot(&seed, kc);
    let mut e1 = [0.0; 3];
    for i in 0..3 {
        e1[i] = seed[i] - proj * kc[i];
    }
    let n1 = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    for c in e1.iter_mut() {
        *c /= n1;
    }
    let e2 = [
        kc[1] * e1[2] - kc[2] * e1[1],
        kc[2] * e1[0] - kc[0] * e1[2],
        kc[0] * e1[1] - kc[1] * e1[0],
    ];
    (e1, e2)
}

/// Companion quadrature for `subsphere_average` in d = 3: trapezoid rule on
/// the circle orthogonal to k. Exact for the quadratic integrand once n >= 5.
pub fn subsphere_average_quadrature(a: &[f64], k: &UnitVector, n: usize) -> f64 {
    assert_eq!(k.dim(), 3);
    assert_eq!(a.len(), 9);
    let (e1, e2) = orthogonal_frame_3d(k);
    let mut acc = 0.0;
    for j in 0..n {
        let chi = 2.0 * PI * j as f64 / n as f64;
        let phi = [
            chi.cos() * e1[0] + chi.sin() * e2[0],
            chi.cos() * e1[1] + chi.sin() * e2[1],
            chi.cos() * e1[2] + chi.sin() * e2[2],
        ];
        let mut aphi = [0.0; 3];
        for r in 0..3 {
            for c in 0..3 {
                aphi[r] += a[r * 3 + c] * phi[c];
            }
        }
        acc += phi[0] * aphi[0] + phi[1] * aphi[1] + phi[2] * aphi[2];
    }
    acc / n as f64
}

enum GridDetail {
    /// Uniform angles alpha_i = 2 pi i / n, equal weights (spectrally accurate
    /// for periodic integrands).
    Circle { n: usize },
    /// Gauss-Legendre in cos(theta) times uniform azimuth; node index is
    /// i_theta * n_phi + i_phi.
    Sphere {
        n_theta: usize,
        n_phi: usize,
        /// GL nodes in x = cos(theta), ascending.
        x: Vec<f64>,
        /// first-derivative matrix in x on the GL column (barycentric)
        dx: Vec<f64>,
        /// second-derivative matrix in x
        dxx: Vec<f64>,
    },
}

/// Quadrature grid on S^1 or S^2 with positive weights summing to |S^{d-1}|.
pub struct SphericalGrid {
    dim: usize,
    nodes: Vec<UnitVector>,
    weights: Vec<f64>,
    detail: GridDetail,
}

/// Surface measure of S^{d-1}.
pub fn sphere_area(d: usize) -> f64 {
    // |S^{d-1}| = 2 pi^{d/2} / Gamma(d/2)
    2.0 * PI.powf(d as f64 / 2.0) / statrs::function::gamma::gamma(d as f64 / 2.0)
}

impl SphericalGrid {
    /// Build a quadrature grid. For dim = 2 `resolution` is the number of
    /// angles (rounded up to even); for dim = 3 it is the polar count
    /// n_theta, with n_phi = 2 n_theta azimuthal points.
    pub fn build(dim: usize, resolution: usize) -> Result<Arc<Self>> {
        match dim {
            2 => {
                let n = resolution.max(4) + resolution % 2;
                let nodes = (0..n)
                    .map(|i| UnitVector::from_angle(2.0 * PI * i as f64 / n as f64))
                    .collect();
                let weights = vec![2.0 * PI / n as f64; n];
                Ok(Arc::new(SphericalGrid {
                    dim,
                    nodes,
                    weights,
                    detail: GridDetail::Circle { n },
                }))
            }
            3 => {
                let n_theta = resolution.max(4);
                let n_phi = 2 * n_theta;
                let (x, glw) = gauss_legendre(n_theta);
                let mut nodes = Vec::with_capacity(n_theta * n_phi);
                let mut weights = Vec::with_capacity(n_theta * n_phi);
                for (i, &xi) in x.iter().enumerate() {
                    let theta = xi.acos();
                    for j in 0..n_phi {
                        let phi = 2.0 * PI * j as f64 / n_phi as f64;
                        nodes.push(UnitVector::from_polar(theta, phi));
                        weights.push(glw[i] * 2.0 * PI / n_phi as f64);
                    }
                }
                let dx = barycentric_diff_matrix(&x);
                let dxx = mat_mul(&dx, &dx, n_theta);
                Ok(Arc::new(SphericalGrid {
                    dim,
                    nodes,
                    weights,
                    detail: GridDetail::Sphere {
                        n_theta,
                        n_phi,
                        x,
                        dx,
                        dxx,
                    },
                }))
            }
            _ => Err(FisherkinError::InvalidParameter(format!(
                "quadrature grids support dim 2 or 3, got {dim}"
            ))),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, i: usize) -> &UnitVector {
        &self.nodes[i]
    }

    pub fn nodes(&self) -> &[UnitVector] {
        &self.nodes
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn area(&self) -> f64 {
        sphere_area(self.dim)
    }

    /// Index of the node closest to -node(i); exact for the grids built here.
    pub fn antipode_index(&self, i: usize) -> usize {
        match &self.detail {
            GridDetail::Circle { n } => (i + n / 2) % n,
            GridDetail::Sphere { n_theta, n_phi, .. } => {
                let it = i / n_phi;
                let jp = i % n_phi;
                let it2 = n_theta - 1 - it; // GL nodes are symmetric in x
                let jp2 = (jp + n_phi / 2) % n_phi;
                it2 * n_phi + jp2
            }
        }
    }

    /// Circle angle of node i (d = 2 only).
    pub fn angle(&self, i: usize) -> f64 {
        match &self.detail {
            GridDetail::Circle { n } => 2.0 * PI * i as f64 / *n as f64,
            _ => panic!("angle() is d=2 only"),
        }
    }
}

/// Barycentric first-derivative matrix on arbitrary distinct nodes.
fn barycentric_diff_matrix(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    // barycentric weights
    let mut wb = vec![1.0; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                wb[i] *= x[i] - x[j];
            }
        }
        wb[i] = 1.0 / wb[i];
    }
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in 0..n {
            if i != j {
                let v = (wb[j] / wb[i]) / (x[i] - x[j]);
                d[i * n + j] = v;
                row_sum += v;
            }
        }
        d[i * n + i] = -row_sum;
    }
    d
}

fn mat_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    c
}

/// Values of a function on a spherical quadrature grid.
#[derive(Clone)]
pub struct SphereFunction {
    pub grid: Arc<SphericalGrid>,
    pub values: Vec<f64>,
    pub even: bool,
}

impl SphereFunction {
    /// Wrap grid values; when `even` is set the parity F(-sigma) = F(sigma)
    /// is asserted at paired nodes (tolerance 1e-12 relative to the sup).
    pub fn new(grid: Arc<SphericalGrid>, values: Vec<f64>, even: bool) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(FisherkinError::DimMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if even {
            let scale = values.iter().fold(1e-300f64, |m, v| m.max(v.abs()));
            for i in 0..values.len() {
                let j = grid.antipode_index(i);
                if (values[i] - values[j]).abs() > 1e-12 * scale {
                    return Err(FisherkinError::InvalidParameter(format!(
                        "evenness violated at node pair ({i},{j}): {} vs {}",
                        values[i], values[j]
                    )));
                }
            }
        }
        Ok(SphereFunction { grid, values, even })
    }

    pub fn from_fn<F: Fn(&[f64]) -> f64>(grid: Arc<SphericalGrid>, f: F, even: bool) -> Result<Self> {
        let values = grid.nodes().iter().map(|n| f(n.components())).collect();
        SphereFunction::new(grid, values, even)
    }

    pub fn constant(grid: Arc<SphericalGrid>, c: f64) -> Self {
        let n = grid.len();
        SphereFunction {
            grid,
            values: vec![c; n],
            even: true,
        }
    }

    /// Quadrature of F over the sphere.
    pub fn integrate(&self) -> f64 {
        self.values
            .iter()
            .zip(self.grid.weights())
            .map(|(v, w)| v * w)
            .sum()
    }

    /// Intrinsic gradient at every node, embedded in R^d (node-major, d per node).
    ///
    /// d=2: spectral differentiation on the uniform periodic grid.
    /// d=3: spectral in azimuth, barycentric polynomial differentiation in
    /// cos(theta) along each meridian column. Gauss-Legendre columns contain
    /// no pole nodes, so no rotated chart is needed.
    pub fn gradient_field(&self) -> Vec<f64> {
        let d = self.grid.dim();
        let n = self.grid.len();
        let mut out = vec![0.0; n * d];
        match &self.grid.detail {
            GridDetail::Circle { n: nn } => {
                let df = periodic_derivative(&self.values, 1);
                for i in 0..*nn {
                    let alpha = 2.0 * PI * i as f64 / *nn as f64;
                    // tangent e_alpha = (-sin, cos)
                    out[i * 2] = -alpha.sin() * df[i];
                    out[i * 2 + 1] = alpha.cos() * df[i];
                }
            }
            GridDetail::Sphere {
                n_theta,
                n_phi,
                x,
                dx,
                ..
            } => {
                let (ft, fp) = self.sphere_first_derivatives(*n_theta, *n_phi, x, dx);
                for it in 0..*n_theta {
                    let ct = x[it];
                    let st = (1.0 - ct * ct).sqrt();
                    for jp in 0..*n_phi {
                        let idx = it * n_phi + jp;
                        let phi = 2.0 * PI * jp as f64 / *n_phi as f64;
                        let e_t = [ct * phi.cos(), ct * phi.sin(), -st];
                        let e_p = [-phi.sin(), phi.cos(), 0.0];
                        let gt = ft[idx];
                        let gp = fp[idx] / st;
                        for c in 0..3 {
                            out[idx * 3 + c] = gt * e_t[c] + gp * e_p[c];
                        }
                    }
                }
            }
        }
        out
    }

    /// d_theta F and d_phi F at every node (d = 3).
    fn sphere_first_derivatives(
        &self,
        n_theta: usize,
        n_phi: usize,
        x: &[f64],
        dx: &[f64],
    ) -> (Vec<f64>, Vec<f64>) {
        let n = n_theta * n_phi;
        let mut f_theta = vec![0.0; n];
        let mut f_phi = vec![0.0; n];
        // phi: spectral per ring
        let dphi = fourier_diff_matrix(n_phi, 1);
        let mut ring = vec![0.0; n_phi];
        for it in 0..n_theta {
            ring.copy_from_slice(&self.values[it * n_phi..(it + 1) * n_phi]);
            for j in 0..n_phi {
                let mut s = 0.0;
                for k in 0..n_phi {
                    s += dphi[j * n_phi + k] * ring[k];
                }
                f_phi[it * n_phi + j] = s;
            }
        }
        // theta: F_x along columns, then d_theta = -sin(theta) d_x
        for jp in 0..n_phi {
            for it in 0..n_theta {
                let mut s = 0.0;
                for kt in 0..n_theta {
                    s += dx[it * n_theta + kt] * self.values[kt * n_phi + jp];
                }
                let st = (1.0 - x[it] * x[it]).sqrt();
                f_theta[it * n_phi + jp] = -st * s;
            }
        }
        (f_theta, f_phi)
    }

    /// Orthonormal-frame chart derivatives used by the Gamma_2 machinery.
    ///
    /// Returns (grad, hess) where `grad` is as in [`gradient_field`] and
    /// `hess` holds per node: d=2 one component F''(alpha); d=3 three
    /// components (H_tt, H_tp, H_pp) of the covariant Hessian so that
    /// ||hess||_HS^2 = H_tt^2 + 2 H_tp^2 + H_pp^2 and Delta F = H_tt + H_pp.
    pub fn chart_derivatives(&self) -> (Vec<f64>, Vec<f64>) {
        let grad = self.gradient_field();
        match &self.grid.detail {
            GridDetail::Circle { n } => {
                let d2 = periodic_derivative(&self.values, 2);
                (grad, d2.into_iter().take(*n).collect())
            }
            GridDetail::Sphere {
                n_theta,
                n_phi,
                x,
                dx,
                dxx,
            } => {
                let n = n_theta * n_phi;
                let (ft, fp) = self.sphere_first_derivatives(*n_theta, *n_phi, x, dx);
                // second derivatives
                let d2phi = fourier_diff_matrix(*n_phi, 2);
                let mut fpp = vec![0.0; n];
                let mut ftp = vec![0.0; n];
                for it in 0..*n_theta {
                    for j in 0..*n_phi {
                        let mut s = 0.0;
                        for k in 0..*n_phi {
                            s += d2phi[j * n_phi + k] * self.values[it * n_phi + k];
                        }
                        fpp[it * n_phi + j] = s;
                    }
                }
                // d_theta of f_phi, via x-differentiation of the f_phi columns
                for jp in 0..*n_phi {
                    for it in 0..*n_theta {
                        let mut s = 0.0;
                        for kt in 0..*n_theta {
                            s += dx[it * n_theta + kt] * fp[kt * n_phi + jp];
                        }
                        let st = (1.0 - x[it] * x[it]).sqrt();
                        ftp[it * n_phi + jp] = -st * s;
                    }
                }
                // F_xx columns for H_tt = sin^2 F_xx - cos F_x -> uses dxx
                let mut hess = vec![0.0; n * 3];
                for jp in 0..*n_phi {
                    for it in 0..*n_theta {
                        let mut fxx = 0.0;
                        let mut fx = 0.0;
                        for kt in 0..*n_theta {
                            fxx += dxx[it * n_theta + kt] * self.values[kt * n_phi + jp];
                            fx += dx[it * n_theta + kt] * self.values[kt * n_phi + jp];
                        }
                        let ct = x[it];
                        let st2 = 1.0 - ct * ct;
                        let st = st2.sqrt();
                        let idx = it * n_phi + jp;
                        let h_tt = st2 * fxx - ct * fx;
                        let cot = ct / st;
                        let h_tp = (ftp[idx] - cot * fp[idx]) / st;
                        let h_pp = fpp[idx] / st2 + cot * ft[idx];
                        hess[idx * 3] = h_tt;
                        hess[idx * 3 + 1] = h_tp;
                        hess[idx * 3 + 2] = h_pp;
                    }
                }
                (grad, hess)
            }
        }
    }
}

/// Intrinsic gradient at a single node (tangent vector, orthogonal to the node).
pub fn intrinsic_gradient(f: &SphereFunction, node: usize) -> Vec<f64> {
    let d = f.grid.dim();
    let field = f.gradient_field();
    field[node * d..(node + 1) * d].to_vec()
}

/// Spectral derivative of order 1 or 2 on a uniform periodic grid
/// (Fourier differentiation; exact for band-limited data).
pub fn periodic_derivative(values: &[f64], order: usize) -> Vec<f64> {
    let n = values.len();
    let d = fourier_diff_matrix(n, order);
    let mut out = vec![0.0; n];
    for i in 0..n {
        let mut s = 0.0;
        for j in 0..n {
            s += d[i * n + j] * values[j];
        }
        out[i] = s;
    }
    out
}

/// Dense Fourier differentiation matrix on n uniform nodes of [0, 2 pi).
fn fourier_diff_matrix(n: usize, order: usize) -> Vec<f64> {
    assert!(n % 2 == 0, "spectral grids use an even node count");
    let h = 2.0 * PI / n as f64;
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                if order == 2 {
                    d[i * n + j] = -PI * PI / (3.0 * h * h) - 1.0 / 6.0;
                }
                continue;
            }
            let k = i as isize - j as isize;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let half = 0.5 * h * k as f64;
            d[i * n + j] = match order {
                1 => 0.5 * sign / half.tan(),
                2 => -sign / (2.0 * half.sin().powi(2)),
                _ => panic!("order must be 1 or 2"),
            };
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn rand_unit(rng: &mut ChaCha8Rng, d: usize) -> UnitVector {
        loop {
            let v: Vec<f64> = (0..d).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            if norm(&v) > 1e-3 {
                return UnitVector::new(v).unwrap();
            }
        }
    }

    fn rand_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
        (0..d).map(|_| rng.gen::<f64>() * 4.0 - 2.0).collect()
    }

    #[test]
    fn transport_elementary_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in [2usize, 3, 4, 6] {
            for _ in 0..200 {
                let k = rand_unit(&mut rng, d);
                let s = rand_unit(&mut rng, d);
                let x = rand_vec(&mut rng, d);
                // (i) P_kk = Id
                let same = p_transport(&k, &k, &x);
                for i in 0..d {
                    assert_relative_eq!(same[i], x[i], epsilon = 1e-12);
                }
                // (ii) P_{k sigma} k = sigma
                let img = p_transport(&k, &s, k.components());
                for i in 0..d {
                    assert_relative_eq!(img[i], s.components()[i], epsilon = 1e-12);
                }
                // (ix) sigma . P x = k . x
                let px = p_transport(&k, &s, &x);
                assert_relative_eq!(dot(s.components(), &px), dot(k.components(), &x), epsilon = 1e-12);
                // (vii) contraction
                assert!(norm(&px) <= norm(&x) + 1e-12);
                // (iv)
                let ps = p_transport(&k, &s, s.components());
                let ks = dot(k.components(), s.components());
                assert_relative_eq!(dot(&ps, k.components()), 2.0 * ks * ks - 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn defect_three_expressions_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for d in [2usize, 3, 4, 6] {
            for _ in 0..300 {
                let k = rand_unit(&mut rng, d);
                let s = rand_unit(&mut rng, d);
                let x = rand_vec(&mut rng, d);
                let kc = k.components();
                let sc = s.components();
                let ks = dot(kc, sc);
                let xk = dot(&x, kc);
                let sx = dot(sc, &x);
                let left = defect(&k, &s, &x);
                let mid = (1.0 - ks * ks) * dot(&x, &x) - xk * xk - sx * sx + 2.0 * ks * xk * sx;
                // third expression: restrict to Pi_{k^perp} x
                let xp: Vec<f64> = (0..d).map(|i| x[i] - xk * kc[i]).collect();
                let right = dot(&xp, &xp) - p_transport_norm_sq(kc, sc, &xp);
                assert_relative_eq!(left, mid, epsilon = 1e-12);
                assert_relative_eq!(left, right, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn subsphere_average_matches_circle_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let k = rand_unit(&mut rng, 3);
            let mut a = vec![0.0; 9];
            for i in 0..3 {
                for j in 0..=i {
                    let v = rng.gen::<f64>() * 2.0 - 1.0;
                    a[i * 3 + j] = v;
                    a[j * 3 + i] = v;
                }
            }
            let closed = subsphere_average(&a, &k);
            let quad = subsphere_average_quadrature(&a, &k, 512);
            assert_relative_eq!(closed, quad, epsilon = 1e-10);
        }
    }

    #[test]
    fn subsphere_average_trivial_cases() {
        let k = UnitVector::new(vec![0.0, 0.0, 1.0]).unwrap();
        let id = vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        assert_relative_eq!(subsphere_average(&id, &k), 1.0, epsilon = 1e-14);
        // A = k (x) k annihilated by the projection
        let mut kk = vec![0.0; 9];
        kk[8] = 1.0;
        assert_relative_eq!(subsphere_average(&kk, &k), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn grid_weights_sum_to_area() {
        for (d, res) in [(2usize, 64usize), (3, 24)] {
            let g = SphericalGrid::build(d, res).unwrap();
            let total: f64 = g.weights().iter().sum();
            assert_relative_eq!(total, g.area(), epsilon = 1e-10);
        }
    }

    #[test]
    fn antipode_indexing_is_exact() {
        for (d, res) in [(2usize, 32usize), (3, 12)] {
            let g = SphericalGrid::build(d, res).unwrap();
            for i in 0..g.len() {
                let j = g.antipode_index(i);
                let a = g.node(i).components();
                let b = g.node(j).components();
                for c in 0..d {
                    assert_relative_eq!(a[c], -b[c], epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn integrate_constant_and_moments() {
        let g = SphericalGrid::build(3, 20).unwrap();
        let one = SphereFunction::constant(g.clone(), 1.0);
        assert_relative_eq!(one.integrate(), 4.0 * PI, epsilon = 1e-12);
        // int (e.sigma)^2 dsigma = |S^2| / 3 = 4 pi / 3
        let e = [0.3f64, -0.5, 0.81];
        let en = norm(&e);
        let f = SphereFunction::from_fn(
            g,
            |s| {
                let c = dot(s, &e) / en;
                c * c
            },
            true,
        )
        .unwrap();
        assert_relative_eq!(f.integrate(), 4.0 * PI / 3.0, epsilon = 1e-10);
    }

    #[test]
    fn gradient_of_linear_restriction() {
        // F = e.sigma has intrinsic gradient Pi_{sigma^perp} e
        for (d, res) in [(2usize, 64usize), (3, 20)] {
            let g = SphericalGrid::build(d, res).unwrap();
            let e: Vec<f64> = if d == 2 {
                vec![0.6, 0.8]
            } else {
                vec![0.6, 0.48, 0.64]
            };
            let f = SphereFunction::from_fn(g.clone(), |s| dot(s, &e), false).unwrap();
            let grad = f.gradient_field();
            for i in 0..g.len() {
                let s = g.node(i).components();
                let se = dot(s, &e);
                for c in 0..d {
                    let expected = e[c] - se * s[c];
                    assert_relative_eq!(grad[i * d + c], expected, epsilon = 1e-8);
                }
                // tangency
                let gdot: f64 = (0..d).map(|c| grad[i * d + c] * s[c]).sum();
                assert!(gdot.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn gradient_constant_vanishes() {
        let g = SphericalGrid::build(3, 12).unwrap();
        let f = SphereFunction::constant(g.clone(), 3.7);
        let grad = f.gradient_field();
        assert!(grad.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn spectral_derivative_of_trig() {
        let n = 32;
        let vals: Vec<f64> = (0..n)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / n as f64;
                (3.0 * a).sin()
            })
            .collect();
        let d1 = periodic_derivative(&vals, 1);
        let d2 = periodic_derivative(&vals, 2);
        for i in 0..n {
            let a = 2.0 * PI * i as f64 / n as f64;
            assert_relative_eq!(d1[i], 3.0 * (3.0 * a).cos(), epsilon = 1e-10);
            assert_relative_eq!(d2[i], -9.0 * (3.0 * a).sin(), epsilon = 1e-9);
        }
    }
}
