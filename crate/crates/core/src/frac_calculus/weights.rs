//! Convolution weights for the discrete (tempered) fractional derivative.
//!
//! The order-`q` weights are the Taylor coefficients of
//! `(sum_{i=1}^{q} (1 - z)^i / i)^alpha`, i.e. the fractional power of the
//! `q`-step BDF generating polynomial. For `q = 1` this is `(1 - z)^alpha`
//! and the coefficients satisfy the Grünwald recurrence. Coefficients are
//! accumulated in double-double arithmetic and rounded once to the target
//! scalar type, so long convolutions do not inherit recurrence drift.

use twofloat::TwoFloat;

use super::params::{check_alpha, TemperedParams};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Highest supported convolution order.
pub const MAX_ORDER: usize = 5;

fn to_scalar<T: Scalar>(x: TwoFloat) -> T {
    T::lit(f64::from(x))
}

fn grunwald_extended(alpha: f64, n: usize) -> Vec<TwoFloat> {
    let mut w = Vec::with_capacity(n + 1);
    let mut prev = TwoFloat::from(1.0);
    w.push(prev);
    let a1 = TwoFloat::from(alpha) + 1.0;
    for k in 1..=n {
        let kf = k as f64;
        prev = div_exact(prev * (-a1 + kf), kf);
        w.push(prev);
    }
    w
}

/// Coefficients `w_0..w_n` of `(1 - z)^alpha` from the recurrence
/// `w_k = (1 - (alpha + 1) / k) w_{k-1}`, `w_0 = 1`.
pub fn grunwald_weights<T: Scalar>(alpha: f64, n: usize) -> Result<Vec<T>> {
    check_alpha(alpha)?;
    Ok(grunwald_extended(alpha, n)
        .into_iter()
        .map(to_scalar)
        .collect())
}

/// `x / d` for an f64 divisor, correct to double-double precision.
fn div_exact(x: TwoFloat, d: f64) -> TwoFloat {
    let q1 = x.hi() / d;
    let r = x - TwoFloat::new_mul(q1, d);
    let q2 = r.hi() / d;
    let r2 = r - TwoFloat::new_mul(q2, d);
    TwoFloat::from(q1) + q2 + r2.hi() / d
}

/// Power-series coefficients (in `z`) of `60 sum_{i=1}^{q} (1 - z)^i / i`;
/// the factor 60 makes every coefficient an integer for `q <= 5`.
fn bdf_polynomial(q: usize) -> Vec<f64> {
    let mut p = vec![0.0; q + 1];
    for i in 1..=q {
        let scale = 60.0 / i as f64;
        let mut binom = 1.0f64;
        for (j, pj) in p.iter_mut().enumerate().take(i + 1) {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            *pj += scale * sign * binom;
            binom = binom * (i - j) as f64 / (j + 1) as f64;
        }
    }
    p
}

fn lubich_extended(q: usize, alpha: f64, n: usize) -> Vec<TwoFloat> {
    if q == 1 {
        return grunwald_extended(alpha, n);
    }
    let p = bdf_polynomial(q);
    let p0 = p[0];
    // The recurrence is homogeneous in w_0, so rounding (p0 / 60)^alpha once
    // in f64 scales every coefficient by the same relative error.
    let w0 = TwoFloat::from((p0 / 60.0).powf(alpha));
    let a1 = TwoFloat::from(alpha) + 1.0;
    let mut w = Vec::with_capacity(n + 1);
    w.push(w0);
    // Miller's recurrence for the power of a power series:
    // n p0 w_n = sum_{j=1}^{min(n,q)} ((alpha + 1) j - n) p_j w_{n-j}
    for m in 1..=n {
        let mf = m as f64;
        let mut acc = TwoFloat::from(0.0);
        for j in 1..=m.min(q) {
            let c = a1 * (j as f64) - mf;
            acc += c * p[j] * w[m - j];
        }
        w.push(div_exact(acc, p0 * mf));
    }
    w
}

pub(crate) fn check_order(q: usize) -> Result<()> {
    if (1..=MAX_ORDER).contains(&q) {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "convolution order must be in 1..={MAX_ORDER}, got {q}"
        )))
    }
}

/// Order-`q` Lubich weights `l_0..l_n`. `q = 1` shares the Grünwald code path.
pub fn lubich_weights<T: Scalar>(q: usize, alpha: f64, n: usize) -> Result<Vec<T>> {
    check_order(q)?;
    check_alpha(alpha)?;
    Ok(lubich_extended(q, alpha, n)
        .into_iter()
        .map(to_scalar)
        .collect())
}

/// Weights `l_k` together with their tempered counterparts `d_k = e^{-lambda k tau} l_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionWeights<T> {
    q: usize,
    alpha: f64,
    lambda: f64,
    tau: f64,
    l: Vec<T>,
    d: Vec<T>,
}

impl<T: Scalar> ConvolutionWeights<T> {
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Untempered weights `l_k`.
    pub fn l(&self) -> &[T] {
        &self.l
    }

    /// Tempered weights `d_k`.
    pub fn d(&self) -> &[T] {
        &self.d
    }

    /// Largest index covered.
    pub fn len(&self) -> usize {
        self.l.len()
    }

    pub fn is_empty(&self) -> bool {
        self.l.is_empty()
    }

    /// `S_m = sum_{k=0}^{m} l_k` for `m = 0..=n`, accumulated in extended precision.
    pub fn partial_sums(&self) -> Vec<T> {
        let mut acc = TwoFloat::from(0.0);
        self.l
            .iter()
            .map(|&v| {
                acc += TwoFloat::from(v.as_f64());
                to_scalar(acc)
            })
            .collect()
    }
}

/// Tempering factor `e^{-lambda k tau}` with the time `k tau` formed from the index.
pub fn tempering_factor(lambda: f64, k: usize, tau: f64) -> f64 {
    (-lambda * (k as f64 * tau)).exp()
}

/// Builds `l_k` and `d_k = e^{-lambda k tau} l_k` for `k = 0..=n`.
pub fn tempered_weights<T: Scalar>(
    q: usize,
    params: &TemperedParams,
    tau: f64,
    n: usize,
) -> Result<ConvolutionWeights<T>> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::domain(format!("time step must be > 0, got {tau}")));
    }
    let ext = {
        check_order(q)?;
        check_alpha(params.alpha())?;
        lubich_extended(q, params.alpha(), n)
    };
    let lambda = params.lambda();
    let l: Vec<T> = ext.iter().map(|&v| to_scalar(v)).collect();
    let d: Vec<T> = l
        .iter()
        .enumerate()
        .map(|(k, &lk)| T::lit(tempering_factor(lambda, k, tau)) * lk)
        .collect();
    Ok(ConvolutionWeights {
        q,
        alpha: params.alpha(),
        lambda,
        tau,
        l,
        d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn grunwald_small_cases() {
        assert_eq!(grunwald_weights::<f64>(0.5, 0).unwrap(), vec![1.0]);
        assert_eq!(grunwald_weights::<f64>(0.5, 1).unwrap(), vec![1.0, -0.5]);
        assert_eq!(
            grunwald_weights::<f64>(0.5, 2).unwrap(),
            vec![1.0, -0.5, -0.125]
        );
        assert!(grunwald_weights::<f64>(1.0, 3).is_err());
        assert!(grunwald_weights::<f64>(0.0, 3).is_err());
    }

    #[test]
    fn grunwald_partial_sum_bounds_at_half() {
        let w = grunwald_weights::<f64>(0.5, 100).unwrap();
        let s: f64 = w[..100].iter().sum();
        let lo = 1.0 / (100f64.sqrt() * libm::tgamma(0.5));
        assert!(lo < s && s <= 0.1, "{lo} < {s} <= 0.1");
    }

    /// `ln Gamma(k + a) - ln Gamma(k)`. Small `k` goes straight to lgamma; large
    /// `k` uses the asymptotic expansion of the log-Gamma difference, so no
    /// large log-Gamma values are subtracted.
    fn log_gamma_shift(k: f64, a: f64) -> f64 {
        if k < 40.0 {
            return libm::lgamma(k + a) - libm::lgamma(k);
        }
        let bern = [
            |x: f64| x * x - x + 1.0 / 6.0,
            |x: f64| x.powi(3) - 1.5 * x * x + 0.5 * x,
            |x: f64| x.powi(4) - 2.0 * x.powi(3) + x * x - 1.0 / 30.0,
            |x: f64| x.powi(5) - 2.5 * x.powi(4) + 5.0 / 3.0 * x.powi(3) - x / 6.0,
            |x: f64| x.powi(6) - 3.0 * x.powi(5) + 2.5 * x.powi(4) - 0.5 * x * x + 1.0 / 42.0,
            |x: f64| {
                x.powi(7) - 3.5 * x.powi(6) + 3.5 * x.powi(5) - 7.0 / 6.0 * x.powi(3) + x / 6.0
            },
            |x: f64| {
                x.powi(8) - 4.0 * x.powi(7) + 14.0 / 3.0 * x.powi(6) - 7.0 / 3.0 * x.powi(4)
                    + 2.0 / 3.0 * x * x
                    - 1.0 / 30.0
            },
        ];
        let mut s = a * k.ln();
        for (i, b) in bern.iter().enumerate() {
            let n = (i + 1) as f64;
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * (b(a) - b(0.0)) / (n * (n + 1.0) * k.powi(i as i32 + 1));
        }
        s
    }

    #[test]
    fn recurrence_matches_log_gamma_binomial() {
        // (-1)^k binom(alpha, k) = -alpha Gamma(k - alpha) / (Gamma(1 - alpha) Gamma(k + 1))
        for i in 1..=9 {
            let alpha = i as f64 / 10.0;
            let w = grunwald_weights::<f64>(alpha, 1000).unwrap();
            for (k, &wk) in w.iter().enumerate().skip(1) {
                let kf = k as f64;
                let log_mag =
                    alpha.ln() + log_gamma_shift(kf, -alpha) - kf.ln() - libm::lgamma(1.0 - alpha);
                let expected = -log_mag.exp();
                assert!(
                    rel(wk, expected) <= 1e-12,
                    "alpha={alpha} k={k}: {wk} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn order_one_lubich_is_grunwald() {
        for alpha in [0.1, 0.37, 0.5, 0.93] {
            let g = grunwald_weights::<f64>(alpha, 500).unwrap();
            let l = lubich_weights::<f64>(1, alpha, 500).unwrap();
            assert_eq!(g, l);
        }
        assert_eq!(
            lubich_weights::<f64>(1, 0.5, 2).unwrap(),
            vec![1.0, -0.5, -0.125]
        );
    }

    #[test]
    fn order_two_leading_coefficient() {
        let l = lubich_weights::<f64>(2, 0.5, 0).unwrap();
        assert!(rel(l[0], 1.5f64.sqrt()) <= 1e-15);
    }

    #[test]
    fn higher_order_weights_match_frozen_high_precision_values() {
        // Frozen from a 30-digit evaluation of the same generating function.
        let cases: [(usize, f64, [f64; 6]); 3] = [
            (
                3,
                0.3,
                [
                    1.1994231598205949685,
                    -0.58880773300283752999,
                    -0.042822380582024547635,
                    -0.028743713812512198549,
                    -0.00058053497259992482941,
                    -0.000029095649031298567211,
                ],
            ),
            (
                4,
                0.7,
                [
                    1.671595270990975942,
                    -2.2466240442118716661,
                    1.0379403084258847097,
                    -0.012535956153074688903,
                    -0.000093153454337989136999,
                    -1.8586559982042114946e-6,
                ],
            ),
            (
                5,
                0.5,
                [
                    1.5110702608857515773,
                    -1.6544564900208958876,
                    0.74873213417004047468,
                    -0.015580485783329201457,
                    -0.00028209479265389015299,
                    -8.9206205807641004498e-6,
                ],
            ),
        ];
        for (q, alpha, expected) in cases {
            let l = lubich_weights::<f64>(q, alpha, 1000).unwrap();
            for (&k, &e) in [0usize, 1, 2, 5, 100, 1000].iter().zip(expected.iter()) {
                assert!(rel(l[k], e) <= 1e-14, "q={q} k={k}: {} vs {e}", l[k]);
            }
        }
    }

    #[test]
    fn partial_sums_decay_like_inverse_power() {
        // sum_{k<=n} l_k behaves like n^-alpha / Gamma(1 - alpha) since the
        // generating function divided by (1 - z) has a (1 - z)^(alpha - 1) singularity.
        let w =
            tempered_weights::<f64>(3, &TemperedParams::new(0.3, 0.0, 1.0).unwrap(), 0.1, 10_000)
                .unwrap();
        let sums = w.partial_sums();
        let s = sums[10_000];
        assert!(rel(s, 0.048607163689873443) <= 1e-10, "{s}");
        let asymptote = 10_000f64.powf(-0.3) / libm::tgamma(0.7);
        assert!(rel(s, asymptote) <= 1e-4);
        assert!(sums[10_000] < sums[1_000] && sums[1_000] < sums[100]);
    }

    #[test]
    fn rejects_unsupported_order() {
        assert!(lubich_weights::<f64>(0, 0.5, 3).is_err());
        assert!(lubich_weights::<f64>(6, 0.5, 3).is_err());
    }

    #[test]
    fn tempered_examples() {
        let p0 = TemperedParams::new(0.5, 0.0, 1.0).unwrap();
        let w = tempered_weights::<f64>(1, &p0, 0.1, 2).unwrap();
        assert_eq!(w.l(), &[1.0, -0.5, -0.125]);
        assert_eq!(w.d(), w.l());

        let p1 = TemperedParams::new(0.5, 1.0, 1.0).unwrap();
        let w = tempered_weights::<f64>(1, &p1, 0.1, 1).unwrap();
        assert_eq!(w.d()[1], -0.5 * (-0.1f64).exp());
        assert_eq!(w.d()[0], w.l()[0]);

        assert!(tempered_weights::<f64>(1, &p1, 0.0, 1).is_err());
    }

    #[test]
    fn single_precision_instantiation() {
        let w = lubich_weights::<f32>(2, 0.5, 3).unwrap();
        assert!((w[0] - 1.5f32.sqrt()).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn tempered_weights_scale_exactly(
            q in 1usize..=5,
            alpha in 0.01f64..0.99,
            lambda in 0.0f64..10.0,
            tau in 1e-4f64..1.0,
        ) {
            let p = TemperedParams::new(alpha, lambda, 1.0).unwrap();
            let w = tempered_weights::<f64>(q, &p, tau, 200).unwrap();
            for k in 0..=200 {
                prop_assert_eq!(w.d()[k], tempering_factor(lambda, k, tau) * w.l()[k]);
            }
        }
    }
}
