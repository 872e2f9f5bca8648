//! Benchmark problems with exact solutions and forcing terms.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::frac_calculus::{caputo_tempered_derivative, mittag_leffler, TemperedParams};
use crate::ldg::BoundaryCondition;

pub type SpaceFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type SpaceTimeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Default Gaussian width for [`example3`].
pub const EXAMPLE3_SIGMA: f64 = 0.01;

/// A complete problem: `C_D^{alpha,lambda} u = kappa u_xx + f` on `[x_left, x_right] x (0, T]`.
#[derive(Clone)]
pub struct ProblemSpec {
    pub label: String,
    pub params: TemperedParams,
    pub x_left: f64,
    pub x_right: f64,
    pub final_time: f64,
    pub bc: BoundaryCondition,
    pub initial: SpaceFn,
    pub forcing: Option<SpaceTimeFn>,
    pub exact: Option<SpaceTimeFn>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("label", &self.label)
            .field("params", &self.params)
            .field("domain", &(self.x_left, self.x_right))
            .field("final_time", &self.final_time)
            .field("bc", &self.bc)
            .field("forcing", &self.forcing.is_some())
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

impl ProblemSpec {
    /// Programmatic hook for user-defined problems without forcing or exact solution.
    pub fn new(
        label: impl Into<String>,
        params: TemperedParams,
        domain: (f64, f64),
        final_time: f64,
        bc: BoundaryCondition,
        initial: SpaceFn,
    ) -> Result<Self> {
        if !(domain.0 < domain.1) {
            return Err(Error::domain(format!(
                "empty domain [{}, {}]",
                domain.0, domain.1
            )));
        }
        if !(final_time > 0.0) || !final_time.is_finite() {
            return Err(Error::domain(format!(
                "final time must be > 0, got {final_time}"
            )));
        }
        Ok(Self {
            label: label.into(),
            params,
            x_left: domain.0,
            x_right: domain.1,
            final_time,
            bc,
            initial,
            forcing: None,
            exact: None,
        })
    }

    pub fn with_forcing(mut self, f: SpaceTimeFn) -> Self {
        self.forcing = Some(f);
        self
    }

    pub fn with_exact(mut self, u: SpaceTimeFn) -> Self {
        self.exact = Some(u);
        self
    }

    pub fn with_final_time(mut self, t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::domain(format!("final time must be > 0, got {t}")));
        }
        self.final_time = t;
        Ok(self)
    }

    pub fn forcing_at(&self, x: f64, t: f64) -> f64 {
        self.forcing.as_ref().map_or(0.0, |f| f(x, t))
    }
}

/// Manufactured periodic problem with `u = e^{-lambda t} (t^beta + 1) sin(2 pi x)` on `[0, 1]`.
pub fn example1(alpha: f64, lambda: f64, kappa: f64, beta: f64) -> Result<ProblemSpec> {
    let params = TemperedParams::new(alpha, lambda, kappa)?;
    if !(beta > alpha) || !beta.is_finite() {
        return Err(Error::domain(format!(
            "beta must exceed alpha = {alpha}, got {beta}"
        )));
    }
    let ratio = libm::tgamma(beta + 1.0) / libm::tgamma(beta + 1.0 - alpha);
    let spec = ProblemSpec::new(
        "example1",
        params,
        (0.0, 1.0),
        1.0,
        BoundaryCondition::Periodic,
        Arc::new(|x| (2.0 * PI * x).sin()),
    )?;
    Ok(spec
        .with_forcing(Arc::new(move |x, t| {
            (-lambda * t).exp()
                * (ratio * t.powf(beta - alpha) + 4.0 * kappa * PI * PI * (t.powf(beta) + 1.0))
                * (2.0 * PI * x).sin()
        }))
        .with_exact(Arc::new(move |x, t| {
            (-lambda * t).exp() * (t.powf(beta) + 1.0) * (2.0 * PI * x).sin()
        })))
}

/// Dirichlet relaxation problem on `[0, 1]` with `kappa = 1`, no forcing and
/// `u = e^{-lambda t} E_alpha(-4 pi^2 t^alpha) sin(2 pi x)`.
pub fn example2(alpha: f64, lambda: f64) -> Result<ProblemSpec> {
    let params = TemperedParams::new(alpha, lambda, 1.0)?;
    let spec = ProblemSpec::new(
        "example2",
        params,
        (0.0, 1.0),
        1.0,
        BoundaryCondition::HomogeneousDirichlet,
        Arc::new(|x| (2.0 * PI * x).sin()),
    )?;
    Ok(spec.with_exact(Arc::new(move |x, t| {
        example2_amplitude(alpha, lambda, t).unwrap_or(f64::NAN) * (2.0 * PI * x).sin()
    })))
}

/// `e^{-lambda t} E_alpha(-4 pi^2 t^alpha)`, the amplitude of [`example2`]'s exact solution.
pub fn example2_amplitude(alpha: f64, lambda: f64, t: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(1.0);
    }
    Ok((-lambda * t).exp() * mittag_leffler(alpha, -4.0 * PI * PI * t.powf(alpha))?)
}

/// Normalized Gaussian pulse on `[-4, 4]` with homogeneous Dirichlet data.
pub fn example3(alpha: f64, lambda: f64, sigma: f64) -> Result<ProblemSpec> {
    let params = TemperedParams::new(alpha, lambda, 1.0)?;
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::domain(format!("sigma must be > 0, got {sigma}")));
    }
    let norm = 1.0 / (sigma * (2.0 * PI).sqrt());
    ProblemSpec::new(
        "example3",
        params,
        (-4.0, 4.0),
        0.1,
        BoundaryCondition::HomogeneousDirichlet,
        Arc::new(move |x| norm * (-x * x / (2.0 * sigma * sigma)).exp()),
    )
}

/// Second derivative in `x` by Richardson-extrapolated central differences.
fn second_derivative<G: Fn(f64) -> f64>(g: G, x: f64, h: f64) -> f64 {
    let d = |h: f64| (g(x + h) - 2.0 * g(x) + g(x - h)) / (h * h);
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}

/// Pointwise residual of the exact solution,
/// `|C_D^{alpha,lambda} u - kappa u_xx - f| / max(|C_D u|, |kappa u_xx|, |f|)`.
///
/// The Caputo derivative is computed by adaptive quadrature, independent of
/// the convolution weights; `u_xx` by finite differences.
pub fn caputo_residual(problem: &ProblemSpec, x: f64, t: f64) -> Result<f64> {
    let exact = problem
        .exact
        .as_ref()
        .ok_or_else(|| Error::Config(format!("{} has no exact solution", problem.label)))?;
    let p = problem.params;
    let dt = caputo_tempered_derivative(|s| exact(x, s), p.alpha(), p.lambda(), t)?;
    let uxx = p.kappa() * second_derivative(|y| exact(y, t), x, 5e-3);
    let f = problem.forcing_at(x, t);
    let scale = dt.abs().max(uxx.abs()).max(f.abs());
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok((dt - uxx - f).abs() / scale)
}
