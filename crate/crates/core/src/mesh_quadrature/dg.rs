use std::fmt::Write as _;
use std::sync::Arc;

use super::basis::{legendre_values, norm_sq};
use super::mesh::Mesh1D;
use super::quadrature::gauss_rule;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Which one-sided limit to take when evaluating at a cell interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `v^-`: trace from the cell on the left.
    Left,
    /// `v^+`: trace from the cell on the right.
    Right,
    /// Point is assumed interior to a cell; interfaces resolve to the right cell.
    Interior,
}

/// Piecewise polynomial of degree `k` in the modal Legendre basis:
/// `v|_{I_j}(x) = sum_m c_{j,m} P_m(xi_j(x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct DGCoefficients<T> {
    mesh: Arc<Mesh1D<T>>,
    degree: usize,
    coeffs: Vec<T>,
}

impl<T: Scalar> DGCoefficients<T> {
    pub fn zeros(mesh: Arc<Mesh1D<T>>, degree: usize) -> Self {
        let len = mesh.num_cells() * (degree + 1);
        Self {
            mesh,
            degree,
            coeffs: vec![T::zero(); len],
        }
    }

    /// Wraps a flat cell-major coefficient vector of length `N (k + 1)`.
    pub fn from_vec(mesh: Arc<Mesh1D<T>>, degree: usize, coeffs: Vec<T>) -> Result<Self> {
        let expected = mesh.num_cells() * (degree + 1);
        if coeffs.len() != expected {
            return Err(Error::Shape {
                expected: format!("{expected} coefficients"),
                got: format!("{}", coeffs.len()),
            });
        }
        Ok(Self {
            mesh,
            degree,
            coeffs,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh1D<T>> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Modes per cell, `k + 1`.
    pub fn modes(&self) -> usize {
        self.degree + 1
    }

    pub fn num_cells(&self) -> usize {
        self.mesh.num_cells()
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.coeffs
    }

    pub fn into_vec(self) -> Vec<T> {
        self.coeffs
    }

    pub fn cell(&self, j: usize) -> &[T] {
        let b = self.modes();
        &self.coeffs[j * b..(j + 1) * b]
    }

    pub fn cell_mut(&mut self, j: usize) -> &mut [T] {
        let b = self.modes();
        &mut self.coeffs[j * b..(j + 1) * b]
    }

    /// Same mesh and degree.
    pub fn is_compatible(&self, other: &Self) -> bool {
        self.degree == other.degree
            && (Arc::ptr_eq(&self.mesh, &other.mesh) || *self.mesh == *other.mesh)
    }

    /// Value at reference coordinate `xi` of cell `j`.
    pub fn eval_in_cell(&self, j: usize, xi: T) -> T {
        let mut p = vec![T::zero(); self.modes()];
        legendre_values(xi, &mut p);
        self.cell(j).iter().zip(&p).map(|(&c, &pm)| c * pm).sum()
    }

    /// Right-end trace `v^-_{j+1/2}` of cell `j`.
    pub fn right_trace(&self, j: usize) -> T {
        self.cell(j).iter().copied().sum()
    }

    /// Left-end trace `v^+_{j-1/2}` of cell `j`.
    pub fn left_trace(&self, j: usize) -> T {
        self.cell(j)
            .iter()
            .enumerate()
            .map(|(m, &c)| if m % 2 == 0 { c } else { -c })
            .sum()
    }

    /// Point evaluation with one-sided limits at interfaces.
    pub fn eval(&self, x: T, side: Side) -> Result<T> {
        let j = self
            .mesh
            .locate(x)
            .ok_or_else(|| Error::domain(format!("x = {x} lies outside the mesh")))?;
        let b = self.mesh.boundaries();
        let n = self.num_cells();
        let tol = T::lit(64.0) * T::epsilon() * (b[0].abs() + b[n].abs() + T::one());
        // Interface index i in 0..=n when x sits on x_{i+1/2 - 1}.
        let on_interface = [j, j + 1].into_iter().find(|&i| (x - b[i]).abs() <= tol);
        match (on_interface, side) {
            (Some(i), Side::Left) => {
                if i == 0 {
                    return Err(Error::domain("no left limit at the left domain end"));
                }
                Ok(self.right_trace(i - 1))
            }
            (Some(i), Side::Right) => {
                if i == n {
                    return Err(Error::domain("no right limit at the right domain end"));
                }
                Ok(self.left_trace(i))
            }
            _ => Ok(self.eval_in_cell(j, self.mesh.to_reference(j, x))),
        }
    }

    /// Jumps `v^+ - v^-` at interior interfaces `x_{3/2}, ..., x_{N-1/2}`.
    pub fn interior_jumps(&self) -> Vec<T> {
        (1..self.num_cells())
            .map(|i| self.left_trace(i) - self.right_trace(i - 1))
            .collect()
    }

    /// `(u, v)` by Legendre orthogonality.
    pub fn inner(&self, other: &Self) -> T {
        let b = self.modes();
        let mut total = T::zero();
        for (j, &h) in self.mesh.cell_sizes().iter().enumerate() {
            let mut cell = T::zero();
            for m in 0..b {
                cell += self.coeffs[j * b + m] * other.coeffs[j * b + m] * norm_sq::<T>(m);
            }
            total += cell * h * T::lit(0.5);
        }
        total
    }

    /// L2 norm by Legendre orthogonality.
    pub fn l2_norm(&self) -> T {
        self.inner(self).sqrt()
    }

    /// L2 norm by cellwise Gauss quadrature with `nodes` points.
    pub fn l2_norm_quadrature(&self, nodes: usize) -> Result<T> {
        self.l2_error(|_| T::zero(), nodes)
    }

    /// `||v - f||_{L2}` with `nodes`-point Gauss quadrature per cell.
    pub fn l2_error<F: Fn(T) -> T>(&self, f: F, nodes: usize) -> Result<T> {
        let rule = gauss_rule::<T>(nodes)?;
        let mut p = vec![T::zero(); self.modes()];
        let mut total = T::zero();
        for j in 0..self.num_cells() {
            let h = self.mesh.cell_sizes()[j];
            let mut cell = T::zero();
            for (&xi, &w) in rule.nodes().iter().zip(rule.weights()) {
                legendre_values(xi, &mut p);
                let v: T = self.cell(j).iter().zip(&p).map(|(&c, &pm)| c * pm).sum();
                let d = v - f(self.mesh.to_physical(j, xi));
                cell += w * d * d;
            }
            total += cell * h * T::lit(0.5);
        }
        Ok(total.sqrt())
    }

    /// `cell,coeff,value` rows with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cell,coeff,value\n");
        let b = self.modes();
        for (idx, &c) in self.coeffs.iter().enumerate() {
            let _ = writeln!(out, "{},{},{:.16e}", idx / b, idx % b, c.as_f64());
        }
        out
    }

    /// Parses the output of [`DGCoefficients::to_csv`] onto `mesh`.
    pub fn from_csv(mesh: Arc<Mesh1D<T>>, degree: usize, text: &str) -> Result<Self> {
        let mut out = Self::zeros(mesh, degree);
        let b = degree + 1;
        for (lineno, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            let parse_err = || Error::Config(format!("bad coefficient row {}: {line}", lineno + 1));
            if fields.len() != 3 {
                return Err(parse_err());
            }
            let j: usize = fields[0].trim().parse().map_err(|_| parse_err())?;
            let m: usize = fields[1].trim().parse().map_err(|_| parse_err())?;
            let v: f64 = fields[2].trim().parse().map_err(|_| parse_err())?;
            if j >= out.num_cells() || m >= b {
                return Err(parse_err());
            }
            out.coeffs[j * b + m] = T::lit(v);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mesh(n: usize) -> Arc<Mesh1D<f64>> {
        Arc::new(Mesh1D::uniform(0.0, 1.0, n).unwrap())
    }

    #[test]
    fn constant_traces_agree() {
        let m = mesh(5);
        let mut v = DGCoefficients::zeros(m, 2);
        for j in 0..5 {
            v.cell_mut(j)[0] = 3.0;
        }
        for i in 1..5 {
            let x = i as f64 / 5.0;
            assert_eq!(v.eval(x, Side::Left).unwrap(), 3.0);
            assert_eq!(v.eval(x, Side::Right).unwrap(), 3.0);
        }
        assert!(v.interior_jumps().iter().all(|&j| j == 0.0));
    }

    #[test]
    fn linear_mode_traces() {
        let m = mesh(4);
        let mut v = DGCoefficients::zeros(m, 1);
        v.cell_mut(2).copy_from_slice(&[0.7, 0.2]);
        // cell 2 is [0.5, 0.75]
        assert!((v.eval(0.5, Side::Right).unwrap() - (0.7 - 0.2)).abs() < 1e-15);
        assert!((v.eval(0.75, Side::Left).unwrap() - (0.7 + 0.2)).abs() < 1e-15);
        assert_eq!(v.eval(0.5, Side::Left).unwrap(), 0.0);
        assert!(v.eval(0.0, Side::Left).is_err());
        assert!(v.eval(1.0, Side::Right).is_err());
        assert!(v.eval(1.2, Side::Interior).is_err());
    }

    #[test]
    fn orthogonality_norm_matches_quadrature() {
        let m = mesh(7);
        let k = 3;
        let coeffs: Vec<f64> = (0..7 * (k + 1))
            .map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0)
            .collect();
        let v = DGCoefficients::from_vec(m, k, coeffs).unwrap();
        let a = v.l2_norm();
        let b = v.l2_norm_quadrature(k + 2).unwrap();
        assert!(((a - b) / a).abs() <= 1e-12);
    }

    #[test]
    fn shape_is_checked() {
        assert!(DGCoefficients::from_vec(mesh(3), 1, vec![0.0; 5]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let m = mesh(3);
        let coeffs: Vec<f64> = (0..9).map(|i| (i as f64).sin() / 7.0).collect();
        let v = DGCoefficients::from_vec(m.clone(), 2, coeffs).unwrap();
        let back = DGCoefficients::from_csv(m, 2, &v.to_csv()).unwrap();
        assert_eq!(v, back);
    }
}
