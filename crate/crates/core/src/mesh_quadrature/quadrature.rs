//! Gauss–Legendre rules on [-1, 1] and an adaptive integrator built on them.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest supported rule size.
pub const MAX_NODES: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> QuadRule<T> {
    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integral of `f` over `[a, b]` by the affine image of the rule.
    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let half = (b - a) * T::lit(0.5);
        let mid = (a + b) * T::lit(0.5);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<T>()
            * half
    }
}

/// `(P_m(x), P_m'(x))` by the three-term recurrence.
fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if m == 0 {
        return (1.0, 0.0);
    }
    for n in 2..=m {
        let nf = n as f64;
        let p2 = ((2.0 * nf - 1.0) * x * p1 - (nf - 1.0) * p0) / nf;
        p0 = p1;
        p1 = p2;
    }
    let dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss–Legendre rule with `m` nodes, ascending.
///
/// Nodes come from Newton iteration on `P_m` started at the Chebyshev-like
/// guess `cos(pi (i - 1/4) / (m + 1/2))`; iteration is carried out in `f64`
/// and rounded to `T`.
pub fn gauss_rule<T: Scalar>(m: usize) -> Result<QuadRule<T>> {
    if !(1..=MAX_NODES).contains(&m) {
        return Err(Error::domain(format!(
            "Gauss rule size must be in 1..={MAX_NODES}, got {m}"
        )));
    }
    let mut nodes = vec![0.0f64; m];
    let mut weights = vec![0.0f64; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(m, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(m, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    Ok(QuadRule {
        nodes: nodes.into_iter().map(T::lit).collect(),
        weights: weights.into_iter().map(T::lit).collect(),
    })
}

/// Adaptive bisection with a 10-point Gauss rule; a panel is accepted when
/// the one-panel and two-half-panel estimates agree to within the local share
/// of `abs_tol + rel_tol |I|`.
#[derive(Debug, Clone)]
pub struct Adaptive {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: usize,
    rule: QuadRule<f64>,
}

impl Default for Adaptive {
    fn default() -> Self {
        Self::new(1e-13, 1e-12)
    }
}

impl Adaptive {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            max_depth: 60,
            rule: gauss_rule(10).expect("10-point rule"),
        }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<f64> {
        if a == b {
            return Ok(0.0);
        }
        let whole = self.rule.integrate(a, b, &f);
        let scale_hint = whole.abs();
        let mut err_total = 0.0;
        let value = self.panel(&f, a, b, whole, 0, scale_hint, &mut err_total);
        let requested = self.abs_tol.max(self.rel_tol * value.abs());
        if err_total > requested * 10.0 || !value.is_finite() {
            return Err(Error::Quadrature {
                achieved: err_total,
                requested,
            });
        }
        Ok(value)
    }

    #[allow(clippy::too_many_arguments)]
    fn panel<F: Fn(f64) -> f64>(
        &self,
        f: &F,
        a: f64,
        b: f64,
        whole: f64,
        depth: usize,
        scale_hint: f64,
        err_total: &mut f64,
    ) -> f64 {
        let mid = 0.5 * (a + b);
        let left = self.rule.integrate(a, mid, f);
        let right = self.rule.integrate(mid, b, f);
        let refined = left + right;
        let diff = (refined - whole).abs();
        let tol = self
            .abs_tol
            .max(self.rel_tol * scale_hint.max(refined.abs()));
        if diff <= tol || depth >= self.max_depth || mid <= a || mid >= b {
            if diff > tol {
                *err_total += diff;
            }
            return refined;
        }
        self.panel(f, a, mid, left, depth + 1, scale_hint, err_total)
            + self.panel(f, mid, b, right, depth + 1, scale_hint, err_total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_rules() {
        let r1 = gauss_rule::<f64>(1).unwrap();
        assert_eq!(r1.nodes(), &[0.0]);
        assert!((r1.weights()[0] - 2.0).abs() < 1e-15);
        let r2 = gauss_rule::<f64>(2).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert!((r2.nodes()[0] + s).abs() < 1e-15 && (r2.nodes()[1] - s).abs() < 1e-15);
        assert!((r2.weights()[0] - 1.0).abs() < 1e-15);
        assert!((r2.weights()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn five_point_integrates_degree_eight() {
        let r = gauss_rule::<f64>(5).unwrap();
        let v = r.integrate(-1.0, 1.0, |x| x.powi(8));
        assert!((v - 2.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn exactness_up_to_sixteen_nodes() {
        for m in 1..=16 {
            let r = gauss_rule::<f64>(m).unwrap();
            let wsum: f64 = r.weights().iter().sum();
            assert!((wsum - 2.0).abs() <= 1e-14, "m={m} sum={wsum}");
            assert!(r.weights().iter().all(|&w| w > 0.0));
            for deg in 0..2 * m {
                let exact = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 / (deg as f64 + 1.0)
                };
                let v = r.integrate(-1.0, 1.0, |x| x.powi(deg as i32));
                let err = if exact == 0.0 {
                    v.abs()
                } else {
                    ((v - exact) / exact).abs()
                };
                assert!(err <= 1e-12, "m={m} deg={deg} err={err}");
            }
        }
    }

    #[test]
    fn large_rule_weights_sum() {
        let r = gauss_rule::<f64>(64).unwrap();
        let wsum: f64 = r.weights().iter().sum();
        assert!((wsum - 2.0).abs() <= 1e-14);
        assert!(r.nodes().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rejects_unsupported_sizes() {
        assert!(gauss_rule::<f64>(0).is_err());
        assert!(gauss_rule::<f64>(65).is_err());
    }

    #[test]
    fn adaptive_handles_integrable_singularity() {
        let q = Adaptive::new(1e-9, 1e-9);
        let v = q.integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0).unwrap();
        assert!((v - 2.0).abs() < 1e-7, "{v}");
        let smooth = Adaptive::default()
            .integrate(|x| x.exp(), 0.0, 2.0)
            .unwrap();
        assert!((smooth - (2f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn adaptive_reports_divergence() {
        let err = Adaptive::default()
            .integrate(|x| 1.0 / x, 0.0, 1.0)
            .unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }
}
