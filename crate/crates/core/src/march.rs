//! Fully discrete scheme: each step solves
//!
//! ```text
//! (l_0 M + kappa tau^alpha L) u^n = e^{-lambda n tau} (sum_{k<n} l_k) M u^0
//!                                   - sum_{k=1}^{n-1} d_k M u^{n-k} + tau^alpha M P f(t_n)
//! ```
//!
//! with the complete history kept in memory.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::frac_calculus::{
    tempered_rl_integral, tempered_weights, tempering_factor, ConvolutionWeights, TemperedParams,
};
use crate::ldg::{LdgSystem, StepSolver};
use crate::mesh_quadrature::{DGCoefficients, Mesh1D};
use crate::problems::ProblemSpec;
use crate::projections::{l2_project, InitialProjection};
use crate::scalar::Scalar;

const LEAF: usize = 16;

/// Time-stepping state: `u^0..u^n` plus the shared operators.
#[derive(Debug, Clone)]
pub struct MarchState<T> {
    system: Arc<LdgSystem<T>>,
    solver: Arc<StepSolver<T>>,
    weights: Arc<ConvolutionWeights<T>>,
    partial_sums: Vec<T>,
    params: TemperedParams,
    tau: f64,
    history: Vec<DGCoefficients<T>>,
    mass_history: Vec<Vec<T>>,
}

impl<T: Scalar> MarchState<T> {
    /// Prepares a march of up to `max_steps` steps from `u0`.
    pub fn new(
        system: Arc<LdgSystem<T>>,
        params: TemperedParams,
        q: usize,
        tau: f64,
        max_steps: usize,
        u0: DGCoefficients<T>,
    ) -> Result<Self> {
        let weights = Arc::new(tempered_weights::<T>(q, &params, tau, max_steps.max(1))?);
        let solver = Arc::new(system.factorize_step_matrix(weights.l()[0], &params, tau)?);
        Self::with_parts(system, solver, weights, params, u0)
    }

    /// Builds a state from precomputed, shareable weights and factorization.
    pub fn with_parts(
        system: Arc<LdgSystem<T>>,
        solver: Arc<StepSolver<T>>,
        weights: Arc<ConvolutionWeights<T>>,
        params: TemperedParams,
        u0: DGCoefficients<T>,
    ) -> Result<Self> {
        if u0.degree() != system.degree() || u0.coeffs().len() != system.dim() {
            return Err(Error::Shape {
                expected: format!(
                    "{} coefficients of degree {}",
                    system.dim(),
                    system.degree()
                ),
                got: format!(
                    "{} coefficients of degree {}",
                    u0.coeffs().len(),
                    u0.degree()
                ),
            });
        }
        let partial_sums = weights.partial_sums();
        let mass_u0 = system.apply_mass(u0.coeffs());
        Ok(Self {
            tau: weights.tau(),
            system,
            solver,
            weights,
            partial_sums,
            params,
            history: vec![u0],
            mass_history: vec![mass_u0],
        })
    }

    pub fn step_index(&self) -> usize {
        self.history.len() - 1
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `t_n = n tau`, formed from the step index.
    pub fn time(&self) -> f64 {
        self.step_index() as f64 * self.tau
    }

    pub fn history(&self) -> &[DGCoefficients<T>] {
        &self.history
    }

    pub fn current(&self) -> &DGCoefficients<T> {
        self.history.last().expect("history holds u^0")
    }

    pub fn system(&self) -> &Arc<LdgSystem<T>> {
        &self.system
    }

    pub fn weights(&self) -> &Arc<ConvolutionWeights<T>> {
        &self.weights
    }

    pub fn params(&self) -> TemperedParams {
        self.params
    }

    pub fn into_history(self) -> Vec<DGCoefficients<T>> {
        self.history
    }

    /// `sum_{m=lo}^{hi-1} d_{n-m} M u^m`, oldest first, summed as a binary tree.
    fn convolution(&self, n: usize, lo: usize, hi: usize, out: &mut [T]) {
        if hi - lo <= LEAF {
            for m in lo..hi {
                let dk = self.weights.d()[n - m];
                for (o, &v) in out.iter_mut().zip(&self.mass_history[m]) {
                    *o += dk * v;
                }
            }
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let mut right = vec![T::zero(); out.len()];
        self.convolution(n, lo, mid, out);
        self.convolution(n, mid, hi, &mut right);
        for (o, r) in out.iter_mut().zip(right) {
            *o += r;
        }
    }

    /// Advances one step. `forcing` is `f(x, t)`, sampled at `t_n` only.
    pub fn step(
        &mut self,
        forcing: Option<&(dyn Fn(T, T) -> T + Sync)>,
    ) -> Result<&DGCoefficients<T>> {
        let n = self.step_index() + 1;
        if n >= self.weights.len() {
            return Err(Error::WeightsTooShort {
                available: self.weights.len(),
                requested: n + 1,
            });
        }
        let dim = self.system.dim();
        let mut rhs = vec![T::zero(); dim];
        if n > 1 {
            self.convolution(n, 1, n, &mut rhs);
        }
        let init =
            T::lit(tempering_factor(self.params.lambda(), n, self.tau)) * self.partial_sums[n - 1];
        for (r, &m0) in rhs.iter_mut().zip(&self.mass_history[0]) {
            *r = init * m0 - *r;
        }
        if let Some(f) = forcing {
            let t = T::lit(n as f64 * self.tau);
            let scale = T::lit(self.tau.powf(self.params.alpha()));
            let pf = l2_project(|x| f(x, t), self.system.mesh(), self.system.degree())?;
            let mpf = self.system.apply_mass(pf.coeffs());
            for (r, v) in rhs.iter_mut().zip(mpf) {
                *r += scale * v;
            }
        }
        self.solver.solve_in_place(&mut rhs)?;
        let un = DGCoefficients::from_vec(self.system.mesh().clone(), self.system.degree(), rhs)?;
        self.mass_history.push(self.system.apply_mass(un.coeffs()));
        self.history.push(un);
        Ok(self.current())
    }
}

/// Discretization choices for [`run`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub cells: usize,
    pub degree: usize,
    pub order: usize,
    pub steps: usize,
    pub initial: InitialProjection,
    pub keep_history: bool,
    /// Record the error at every step instead of only at `t = 0` and `T`.
    pub step_errors: bool,
}

impl RunConfig {
    pub fn new(cells: usize, degree: usize, order: usize, steps: usize) -> Self {
        Self {
            cells,
            degree,
            order,
            steps,
            initial: InitialProjection::L2,
            keep_history: false,
            step_errors: false,
        }
    }
}

/// Output of [`run`]; `norms[n]` and `errors[n]` refer to `t_n`.
#[derive(Debug, Clone)]
pub struct RunOutput<T> {
    pub tau: f64,
    pub final_state: DGCoefficients<T>,
    pub history: Option<Vec<DGCoefficients<T>>>,
    pub norms: Vec<T>,
    /// Per-step errors, present when requested and an exact solution exists.
    pub errors: Option<Vec<T>>,
    pub final_error: Option<T>,
}

impl<T: Scalar> RunOutput<T> {
    pub fn final_error(&self) -> Option<T> {
        self.final_error
    }
}

/// Number of steps `ceil(T / tau_target)`; the actual step is `T / M`.
pub fn steps_for(final_time: f64, tau_target: f64) -> Result<usize> {
    if !(tau_target > 0.0) {
        return Err(Error::domain(format!(
            "time step must be > 0, got {tau_target}"
        )));
    }
    let m = (final_time / tau_target * (1.0 - 1e-12)).ceil();
    Ok((m as usize).max(1))
}

/// Solves `problem` to its final time with `config.steps` uniform steps.
pub fn run<T: Scalar>(problem: &ProblemSpec, config: &RunConfig) -> Result<RunOutput<T>> {
    let mesh = Arc::new(Mesh1D::uniform(
        T::lit(problem.x_left),
        T::lit(problem.x_right),
        config.cells,
    )?);
    let system = Arc::new(LdgSystem::assemble(
        mesh.clone(),
        config.degree,
        problem.bc,
    )?);
    let init = problem.initial.clone();
    let u0 = config
        .initial
        .apply(move |x: T| T::lit(init(x.as_f64())), &mesh, config.degree)?;
    let nodes = config.degree + 5;
    let error_at = |u: &DGCoefficients<T>, t: f64| -> Result<Option<T>> {
        match &problem.exact {
            Some(exact) => Ok(Some(u.l2_error(|x| T::lit(exact(x.as_f64(), t)), nodes)?)),
            None => Ok(None),
        }
    };
    let mut norms = vec![u0.l2_norm()];
    let initial_error = error_at(&u0, 0.0)?;
    let mut errors = match initial_error {
        Some(e) if config.step_errors => Some(vec![e]),
        _ => None,
    };
    if config.steps == 0 {
        return Ok(RunOutput {
            tau: 0.0,
            history: config.keep_history.then(|| vec![u0.clone()]),
            final_state: u0,
            norms,
            errors,
            final_error: initial_error,
        });
    }
    let tau = problem.final_time / config.steps as f64;
    let mut state = MarchState::new(system, problem.params, config.order, tau, config.steps, u0)?;
    let forcing = problem.forcing.clone();
    let f = forcing
        .as_ref()
        .map(|f| move |x: T, t: T| T::lit(f(x.as_f64(), t.as_f64())));
    for n in 1..=config.steps {
        let u = match &f {
            Some(f) => state.step(Some(f)),
            None => state.step(None),
        }
        .map_err(|e| Error::Solver {
            row: n,
            source: Box::new(e),
        })?;
        norms.push(u.l2_norm());
        if let Some(e) = errors.as_mut() {
            if let Some(v) = error_at(state.current(), n as f64 * tau)? {
                e.push(v);
            }
        }
    }
    let final_state = state.current().clone();
    let final_error = match &errors {
        Some(e) => e.last().copied(),
        None => error_at(&final_state, problem.final_time)?,
    };
    Ok(RunOutput {
        tau,
        final_state,
        history: config.keep_history.then(|| state.into_history()),
        norms,
        errors,
        final_error,
    })
}

/// One entry of [`monitor_energy`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRecord {
    pub t: f64,
    /// `||u^n||^2 + 2 kappa I^{alpha, 2 lambda} ||p||^2 (t_n)`.
    pub lhs: f64,
    /// `e^{-2 lambda t_n} ||u^0||^2`.
    pub rhs: f64,
    pub margin: f64,
}

/// Compares the discrete solution with the continuous prior estimate. The
/// gradient-norm history `||p(t)||^2` is interpolated linearly in time and
/// integrated with [`tempered_rl_integral`]. Reported, never asserted.
pub fn monitor_energy<T: Scalar>(
    history: &[DGCoefficients<T>],
    system: &LdgSystem<T>,
    params: &TemperedParams,
    tau: f64,
) -> Result<Vec<EnergyRecord>> {
    let Some(u0) = history.first() else {
        return Ok(Vec::new());
    };
    let u0_sq = u0.l2_norm().as_f64().powi(2);
    let mut grad_sq = Vec::with_capacity(history.len());
    for u in history {
        grad_sq.push(system.reconstruct_gradient(u)?.l2_norm().as_f64().powi(2));
    }
    let interp = |s: f64| {
        let x = (s / tau).clamp(0.0, (grad_sq.len() - 1) as f64);
        let i = (x.floor() as usize).min(grad_sq.len().saturating_sub(2));
        if grad_sq.len() == 1 {
            return grad_sq[0];
        }
        let w = x - i as f64;
        (1.0 - w) * grad_sq[i] + w * grad_sq[i + 1]
    };
    let mut out = Vec::with_capacity(history.len());
    for (n, u) in history.iter().enumerate() {
        let t = n as f64 * tau;
        let integral = if n == 0 {
            0.0
        } else {
            tempered_rl_integral(interp, params.alpha(), 2.0 * params.lambda(), t)?
        };
        let lhs = u.l2_norm().as_f64().powi(2) + 2.0 * params.kappa() * integral;
        let rhs = (-2.0 * params.lambda() * t).exp() * u0_sq;
        out.push(EnergyRecord {
            t,
            lhs,
            rhs,
            margin: rhs - lhs,
        });
    }
    Ok(out)
}
