use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Partition of `[x_left, x_right]` into `N` cells `I_j = [x_{j-1/2}, x_{j+1/2}]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D<T> {
    boundaries: Vec<T>,
    cell_sizes: Vec<T>,
}

impl<T: Scalar> Mesh1D<T> {
    /// Uniform partition with `n` cells.
    pub fn uniform(x_left: T, x_right: T, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("mesh needs at least one cell"));
        }
        if !(x_left < x_right) || !x_left.is_finite() || !x_right.is_finite() {
            return Err(Error::domain(format!(
                "invalid interval [{x_left}, {x_right}]"
            )));
        }
        let len = x_right - x_left;
        let nf = T::from_usize_lossy(n);
        let mut boundaries: Vec<T> = (0..=n)
            .map(|i| x_left + len * (T::from_usize_lossy(i) / nf))
            .collect();
        boundaries[n] = x_right;
        let h = len / nf;
        let cell_sizes = vec![h; n];
        Ok(Self {
            boundaries,
            cell_sizes,
        })
    }

    pub fn num_cells(&self) -> usize {
        self.cell_sizes.len()
    }

    pub fn x_left(&self) -> T {
        self.boundaries[0]
    }

    pub fn x_right(&self) -> T {
        *self.boundaries.last().expect("non-empty mesh")
    }

    pub fn length(&self) -> T {
        self.x_right() - self.x_left()
    }

    /// `x_{1/2}, ..., x_{N+1/2}`.
    pub fn boundaries(&self) -> &[T] {
        &self.boundaries
    }

    pub fn cell_sizes(&self) -> &[T] {
        &self.cell_sizes
    }

    /// Largest cell size.
    pub fn h(&self) -> T {
        self.cell_sizes
            .iter()
            .copied()
            .fold(T::zero(), |a, b| a.max(b))
    }

    pub fn cell_center(&self, j: usize) -> T {
        (self.boundaries[j] + self.boundaries[j + 1]) * T::lit(0.5)
    }

    /// Physical point of reference coordinate `xi in [-1, 1]` in cell `j`.
    pub fn to_physical(&self, j: usize, xi: T) -> T {
        self.cell_center(j) + self.cell_sizes[j] * T::lit(0.5) * xi
    }

    /// Reference coordinate of `x` in cell `j`.
    pub fn to_reference(&self, j: usize, x: T) -> T {
        (x - self.cell_center(j)) * T::lit(2.0) / self.cell_sizes[j]
    }

    /// Index of a cell containing `x`; interface points resolve to the cell on the right
    /// (the last cell for `x_right`).
    pub fn locate(&self, x: T) -> Option<usize> {
        if x < self.x_left() || x > self.x_right() {
            return None;
        }
        let n = self.num_cells();
        let guess = ((x - self.x_left()) / self.length() * T::from_usize_lossy(n))
            .floor()
            .to_usize()
            .unwrap_or(0)
            .min(n - 1);
        let mut j = guess;
        while j > 0 && x < self.boundaries[j] {
            j -= 1;
        }
        while j + 1 < n && x >= self.boundaries[j + 1] {
            j += 1;
        }
        Some(j)
    }
}
