//! Modal Legendre basis on the reference cell [-1, 1].

use crate::scalar::Scalar;

/// `P_0(xi), ..., P_k(xi)` written into `out` (length `k + 1`).
pub fn legendre_values<T: Scalar>(xi: T, out: &mut [T]) {
    if out.is_empty() {
        return;
    }
    out[0] = T::one();
    if out.len() == 1 {
        return;
    }
    out[1] = xi;
    for n in 2..out.len() {
        let nf = T::from_usize_lossy(n);
        out[n] =
            ((T::lit(2.0) * nf - T::one()) * xi * out[n - 1] - (nf - T::one()) * out[n - 2]) / nf;
    }
}

/// `int_{-1}^{1} P_m^2 = 2 / (2m + 1)`.
pub fn norm_sq<T: Scalar>(m: usize) -> T {
    T::lit(2.0) / T::from_usize_lossy(2 * m + 1)
}

/// `P_m(1) = 1`.
pub fn right_trace<T: Scalar>(_m: usize) -> T {
    T::one()
}

/// `P_m(-1) = (-1)^m`.
pub fn left_trace<T: Scalar>(m: usize) -> T {
    if m % 2 == 0 {
        T::one()
    } else {
        -T::one()
    }
}

/// `int_{-1}^{1} P_m(xi) P_i'(xi) dxi`: 2 when `i > m` and `i + m` is odd, else 0.
pub fn derivative_pairing<T: Scalar>(m: usize, i: usize) -> T {
    if i > m && (i + m) % 2 == 1 {
        T::lit(2.0)
    } else {
        T::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh_quadrature::quadrature::gauss_rule;

    fn legendre_derivative(n: usize, x: f64) -> f64 {
        // centered difference is enough to validate the closed form on a Gauss rule
        let h = 1e-6;
        let mut a = vec![0.0; n + 1];
        let mut b = vec![0.0; n + 1];
        legendre_values(x + h, &mut a);
        legendre_values(x - h, &mut b);
        (a[n] - b[n]) / (2.0 * h)
    }

    #[test]
    fn known_low_order_values() {
        let mut p = [0.0f64; 4];
        legendre_values(0.5, &mut p);
        assert_eq!(p[0], 1.0);
        assert_eq!(p[1], 0.5);
        assert!((p[2] - (3.0 * 0.25 - 1.0) / 2.0).abs() < 1e-15);
        assert!((p[3] - (5.0 * 0.125 - 3.0 * 0.5) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn traces_match_evaluation() {
        let mut r = [0.0; 7];
        let mut l = [0.0; 7];
        legendre_values(1.0, &mut r);
        legendre_values(-1.0, &mut l);
        for m in 0..7 {
            assert_eq!(r[m], right_trace::<f64>(m));
            assert_eq!(l[m], left_trace::<f64>(m));
        }
    }

    #[test]
    fn derivative_pairing_matches_quadrature() {
        let rule = gauss_rule::<f64>(8).unwrap();
        for m in 0..6 {
            for i in 0..6 {
                let v = rule.integrate(-1.0, 1.0, |x| {
                    let mut p = [0.0; 6];
                    legendre_values(x, &mut p);
                    p[m] * legendre_derivative(i, x)
                });
                let closed: f64 = derivative_pairing(m, i);
                assert!((v - closed).abs() < 1e-7, "m={m} i={i}: {v} vs {closed}");
            }
        }
    }

    #[test]
    fn orthogonality() {
        let rule = gauss_rule::<f64>(8).unwrap();
        for m in 0..6 {
            for n in 0..6 {
                let v = rule.integrate(-1.0, 1.0, |x| {
                    let mut p = [0.0; 6];
                    legendre_values(x, &mut p);
                    p[m] * p[n]
                });
                let expected = if m == n { norm_sq::<f64>(m) } else { 0.0 };
                assert!((v - expected).abs() < 1e-14);
            }
        }
    }
}
