use crate::error::{Error, Result};

/// Physical parameters of the tempered fractional diffusion equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemperedParams {
    alpha: f64,
    lambda: f64,
    kappa: f64,
}

impl TemperedParams {
    /// `alpha` in (0, 1), `lambda >= 0`, `kappa > 0`.
    pub fn new(alpha: f64, lambda: f64, kappa: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::domain(format!(
                "tempering rate must be >= 0, got {lambda}"
            )));
        }
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::domain(format!(
                "diffusivity must be > 0, got {kappa}"
            )));
        }
        Ok(Self {
            alpha,
            lambda,
            kappa,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "fractional order must lie in (0, 1), got {alpha}"
        )))
    }
}
