//! Legendre polynomials P_l^{(d)} in dimension d (Gegenbauer normalised so
//! that P_l(1) = 1) and the Laplace-Beltrami spectrum on S^{d-1}.
//!
//! Recursion: P_0 = 1, P_1 = x, (l + d - 2) P_{l+1} = (2l + d - 2) x P_l - l P_{l-1}.
//! For d = 2 these are the Chebyshev polynomials, P_l(cos a) = cos(l a).

/// Double-double helpers: the recursion is run in ~31 significant digits for
/// l > 30 where cancellation near x = +-1 starts to bite.
#[derive(Clone, Copy, Debug)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        (s, err)
    }

    fn two_prod(a: f64, b: f64) -> (f64, f64) {
        let p = a * b;
        let err = a.mul_add(b, -p);
        (p, err)
    }

    fn add(self, other: Dd) -> Dd {
        let (s, e) = Dd::two_sum(self.hi, other.hi);
        let e = e + self.lo + other.lo;
        let (hi, lo) = Dd::two_sum(s, e);
        Dd { hi, lo }
    }

    fn mul_f64(self, b: f64) -> Dd {
        let (p, e) = Dd::two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (hi, lo) = Dd::two_sum(p, e);
        Dd { hi, lo }
    }

    fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let (p, e) = Dd::two_prod(q1, b);
        let r = ((self.hi - p) - e + self.lo) / b;
        let (hi, lo) = Dd::two_sum(q1, r);
        Dd { hi, lo }
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// Evaluate P_l^{(d)}(x).
///
/// # Panics
/// If d < 2.
pub fn legendre(d: usize, l: usize, x: f64) -> f64 {
    assert!(d >= 2, "Legendre polynomials need dimension d >= 2");
    if l == 0 {
        return 1.0;
    }
    if l == 1 {
        return x;
    }
    if l <= 30 {
        let mut p0 = 1.0f64;
        let mut p1 = x;
        for k in 1..l {
            let kf = k as f64;
            let df = d as f64;
            let p2 = ((2.0 * kf + df - 2.0) * x * p1 - kf * p0) / (kf + df - 2.0);
            p0 = p1;
            p1 = p2;
        }
        p1
    } else {
        let mut p0 = Dd::from(1.0);
        let mut p1 = Dd::from(x);
        for k in 1..l {
            let kf = k as f64;
            let df = d as f64;
            let p2 = p1
                .mul_f64((2.0 * kf + df - 2.0) * x)
                .add(p0.mul_f64(-kf))
                .div_f64(kf + df - 2.0);
            p0 = p1;
            p1 = p2;
        }
        p1.to_f64()
    }
}

/// All of P_0 .. P_lmax at once (plain f64 recursion).
pub fn legendre_all(d: usize, lmax: usize, x: f64) -> Vec<f64> {
    assert!(d >= 2);
    let mut out = Vec::with_capacity(lmax + 1);
    out.push(1.0);
    if lmax == 0 {
        return out;
    }
    out.push(x);
    for k in 1..lmax {
        let kf = k as f64;
        let df = d as f64;
        let p2 = ((2.0 * kf + df - 2.0) * x * out[k] - kf * out[k - 1]) / (kf + df - 2.0);
        out.push(p2);
    }
    out
}

/// First derivative of P_l^{(d)}, by recursion on the derivative.
///
/// Differentiating the three-term recursion:
/// (l + d - 2) P'_{l+1} = (2l + d - 2) (P_l + x P'_l) - l P'_{l-1}.
pub fn legendre_derivative(d: usize, l: usize, x: f64) -> f64 {
    if l == 0 {
        return 0.0;
    }
    let mut p0 = 1.0f64;
    let mut p1 = x;
    let mut q0 = 0.0f64;
    let mut q1 = 1.0f64;
    for k in 1..l {
        let kf = k as f64;
        let df = d as f64;
        let p2 = ((2.0 * kf + df - 2.0) * x * p1 - kf * p0) / (kf + df - 2.0);
        let q2 = ((2.0 * kf + df - 2.0) * (p1 + x * q1) - kf * q0) / (kf + df - 2.0);
        p0 = p1;
        p1 = p2;
        q0 = q1;
        q1 = q2;
    }
    q1
}

/// Second derivative, same scheme one level deeper.
pub fn legendre_second_derivative(d: usize, l: usize, x: f64) -> f64 {
    if l <= 1 {
        return 0.0;
    }
    let mut p0 = 1.0f64;
    let mut p1 = x;
    let mut q0 = 0.0f64;
    let mut q1 = 1.0f64;
    let mut r0 = 0.0f64;
    let mut r1 = 0.0f64;
    for k in 1..l {
        let kf = k as f64;
        let df = d as f64;
        let a = 2.0 * kf + df - 2.0;
        let b = kf + df - 2.0;
        let p2 = (a * x * p1 - kf * p0) / b;
        let q2 = (a * (p1 + x * q1) - kf * q0) / b;
        let r2 = (a * (2.0 * q1 + x * r1) - kf * r0) / b;
        p0 = p1;
        p1 = p2;
        q0 = q1;
        q1 = q2;
        r0 = r1;
        r1 = r2;
    }
    r1
}

/// Eigenvalue of -Delta on the degree-l spherical-harmonic subspace of S^{d-1}.
pub fn laplace_eigenvalue(d: usize, l: usize) -> f64 {
    (l * (l + d - 2)) as f64
}

/// Dimension N(d, l) of the degree-l harmonic subspace:
/// ((2l + d - 2) / l) * C(l + d - 3, l - 1), with N(d, 0) = 1.
pub fn multiplicity(d: usize, l: usize) -> f64 {
    if l == 0 {
        return 1.0;
    }
    let mut binom = 1.0f64;
    // C(l + d - 3, l - 1) = prod_{j=1}^{l-1} (d - 2 + j) / j
    for j in 1..l {
        binom *= (d as f64 - 2.0 + j as f64) / j as f64;
    }
    (2.0 * l as f64 + d as f64 - 2.0) / l as f64 * binom
}

/// Residual of the hypergeometric ODE
/// (1 - x^2) P'' - (d - 1) x P' + l (l + d - 2) P = 0.
pub fn ode_residual(d: usize, l: usize, x: f64) -> f64 {
    let p = legendre(d, l, x);
    let dp = legendre_derivative(d, l, x);
    let ddp = legendre_second_derivative(d, l, x);
    (1.0 - x * x) * ddp - (d as f64 - 1.0) * x * dp + laplace_eigenvalue(d, l) * p
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn p2_closed_form_every_dimension() {
        for d in 2..=8 {
            for i in 0..40 {
                let x = -1.0 + 2.0 * i as f64 / 39.0;
                let expected = (d as f64 * x * x - 1.0) / (d as f64 - 1.0);
                assert_relative_eq!(legendre(d, 2, x), expected, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn chebyshev_in_dimension_two() {
        for l in 0..=25 {
            for i in 0..60 {
                let a = std::f64::consts::PI * i as f64 / 59.0;
                let diff = legendre(2, l, a.cos()) - (l as f64 * a).cos();
                assert!(diff.abs() < 1e-12, "l={l} a={a} diff={diff}");
            }
        }
    }

    #[test]
    fn normalisation_and_bound() {
        for d in 2..=8 {
            for l in 0..=40 {
                assert_relative_eq!(legendre(d, l, 1.0), 1.0, epsilon = 1e-12);
                let parity = if l % 2 == 0 { 1.0 } else { -1.0 };
                assert_relative_eq!(legendre(d, l, -1.0), parity, epsilon = 1e-12);
                for i in 0..201 {
                    let x = -1.0 + i as f64 / 100.0;
                    assert!(legendre(d, l, x).abs() <= 1.0 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn ode_residual_small() {
        for d in 2..=6 {
            for l in 0..=20 {
                for i in 1..50 {
                    let x = -0.98 + 1.96 * i as f64 / 49.0;
                    assert!(
                        ode_residual(d, l, x).abs() < 1e-9,
                        "d={d} l={l} x={x} residual={}",
                        ode_residual(d, l, x)
                    );
                }
            }
        }
    }

    #[test]
    fn multiplicities_match_classical_counts() {
        // S^2: 2l + 1
        for l in 1..=10 {
            assert_relative_eq!(multiplicity(3, l), (2 * l + 1) as f64, epsilon = 1e-12);
        }
        // S^1: 2 for every l >= 1
        for l in 1..=10 {
            assert_relative_eq!(multiplicity(2, l), 2.0, epsilon = 1e-12);
        }
        assert_relative_eq!(multiplicity(5, 0), 1.0, epsilon = 1e-12);
        // lambda_1 = d - 1, lambda_2 = 2d
        for d in 2..=8 {
            assert_relative_eq!(laplace_eigenvalue(d, 1), (d - 1) as f64);
            assert_relative_eq!(laplace_eigenvalue(d, 2), (2 * d) as f64);
        }
    }

    #[test]
    fn rodrigues_cross_check_low_degree() {
        // d = 3 classical Legendre, explicit forms through l = 6
        let classical = |l: usize, x: f64| -> f64 {
            match l {
                0 => 1.0,
                1 => x,
                2 => 0.5 * (3.0 * x * x - 1.0),
                3 => 0.5 * (5.0 * x.powi(3) - 3.0 * x),
                4 => (35.0 * x.powi(4) - 30.0 * x * x + 3.0) / 8.0,
                5 => (63.0 * x.powi(5) - 70.0 * x.powi(3) + 15.0 * x) / 8.0,
                6 => (231.0 * x.powi(6) - 315.0 * x.powi(4) + 105.0 * x * x - 5.0) / 16.0,
                _ => unreachable!(),
            }
        };
        for l in 0..=6 {
            for i in 0..50 {
                let x = -1.0 + 2.0 * i as f64 / 49.0;
                assert_relative_eq!(legendre(3, l, x), classical(l, x), epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for d in [2usize, 3, 5] {
            for l in [1usize, 4, 9] {
                for i in 1..20 {
                    let x = -0.9 + 1.8 * i as f64 / 19.0;
                    let h = 1e-6;
                    let fd = (legendre(d, l, x + h) - legendre(d, l, x - h)) / (2.0 * h);
                    assert_relative_eq!(legendre_derivative(d, l, x), fd, epsilon = 1e-6);
                }
            }
        }
    }
}
