//! Cellwise projections onto the degree-k DG space: the L2 projection and the
//! Gauss–Radau projections `P-` (right-endpoint interpolation) and `P+`
//! (left-endpoint interpolation).
//!
//! In the modal basis both Gauss–Radau projections keep the L2 coefficients
//! of degree `< k` and fix the top mode from the endpoint condition.

use std::sync::Arc;

use crate::error::Result;
use crate::mesh_quadrature::basis::{legendre_values, norm_sq};
use crate::mesh_quadrature::{gauss_rule, DGCoefficients, Mesh1D};
use crate::scalar::Scalar;

/// Which projection to use for initial data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialProjection {
    #[default]
    L2,
    /// Gauss–Radau projection with right-endpoint interpolation.
    Minus,
}

impl InitialProjection {
    pub fn apply<T: Scalar, F: Fn(T) -> T>(
        self,
        f: F,
        mesh: &Arc<Mesh1D<T>>,
        k: usize,
    ) -> Result<DGCoefficients<T>> {
        match self {
            InitialProjection::L2 => l2_project(f, mesh, k),
            InitialProjection::Minus => project_minus(f, mesh, k),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            InitialProjection::L2 => "l2",
            InitialProjection::Minus => "minus",
        }
    }
}

/// L2 projection with an explicit number of Gauss nodes per cell.
pub fn l2_project_with<T: Scalar, F: Fn(T) -> T>(
    f: F,
    mesh: &Arc<Mesh1D<T>>,
    k: usize,
    nodes: usize,
) -> Result<DGCoefficients<T>> {
    let rule = gauss_rule::<T>(nodes)?;
    let mut out = DGCoefficients::zeros(mesh.clone(), k);
    let mut p = vec![T::zero(); k + 1];
    for j in 0..mesh.num_cells() {
        let cell = out.cell_mut(j);
        for (&xi, &w) in rule.nodes().iter().zip(rule.weights()) {
            legendre_values(xi, &mut p);
            let fx = f(mesh.to_physical(j, xi));
            for (c, &pm) in cell.iter_mut().zip(&p) {
                *c += w * fx * pm;
            }
        }
        for (m, c) in cell.iter_mut().enumerate() {
            *c /= norm_sq::<T>(m);
        }
    }
    Ok(out)
}

/// Cellwise L2 projection computed with `k + 2` Gauss nodes.
pub fn l2_project<T: Scalar, F: Fn(T) -> T>(
    f: F,
    mesh: &Arc<Mesh1D<T>>,
    k: usize,
) -> Result<DGCoefficients<T>> {
    l2_project_with(f, mesh, k, k + 2)
}

/// `P- f`: orthogonal to degree `k - 1` and `(P- f)(x_{j+1/2}^-) = f(x_{j+1/2})`.
pub fn project_minus<T: Scalar, F: Fn(T) -> T>(
    f: F,
    mesh: &Arc<Mesh1D<T>>,
    k: usize,
) -> Result<DGCoefficients<T>> {
    let mut out = l2_project(&f, mesh, k)?;
    for j in 0..mesh.num_cells() {
        let target = f(mesh.boundaries()[j + 1]);
        let cell = out.cell_mut(j);
        // P_m(1) = 1
        let lower: T = cell[..k].iter().copied().sum();
        cell[k] = target - lower;
    }
    Ok(out)
}

/// `P+ f`: orthogonal to degree `k - 1` and `(P+ f)(x_{j-1/2}^+) = f(x_{j-1/2})`.
pub fn project_plus<T: Scalar, F: Fn(T) -> T>(
    f: F,
    mesh: &Arc<Mesh1D<T>>,
    k: usize,
) -> Result<DGCoefficients<T>> {
    let mut out = l2_project(&f, mesh, k)?;
    let sign = |m: usize| if m % 2 == 0 { T::one() } else { -T::one() };
    for j in 0..mesh.num_cells() {
        let target = f(mesh.boundaries()[j]);
        let cell = out.cell_mut(j);
        // P_m(-1) = (-1)^m
        let lower: T = cell[..k]
            .iter()
            .enumerate()
            .map(|(m, &c)| sign(m) * c)
            .sum();
        cell[k] = sign(k) * (target - lower);
    }
    Ok(out)
}
