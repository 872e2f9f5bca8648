//! Block-tridiagonal matrices (optionally with cyclic corner blocks) and their
//! direct factorization.
//!
//! Non-cyclic systems use block LU without inter-block pivoting; diagonal
//! pivot blocks are factored by dense LU with partial pivoting. Cyclic systems
//! are reduced to a non-cyclic one by a rank-`b` Woodbury correction.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Small dense row-major matrix helpers.
fn matmul<T: Scalar>(a: &[T], b: &[T], n: usize) -> Vec<T> {
    let mut c = vec![T::zero(); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == T::zero() {
                continue;
            }
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    c
}

fn matvec_add<T: Scalar>(a: &[T], x: &[T], y: &mut [T], n: usize) {
    for i in 0..n {
        let mut acc = T::zero();
        for j in 0..n {
            acc += a[i * n + j] * x[j];
        }
        y[i] += acc;
    }
}

/// Dense LU with partial pivoting.
#[derive(Debug, Clone)]
pub struct DenseLu<T> {
    n: usize,
    lu: Vec<T>,
    piv: Vec<usize>,
}

impl<T: Scalar> DenseLu<T> {
    /// Factorizes the row-major `n x n` matrix `a`. `block` labels errors.
    pub fn new(mut a: Vec<T>, n: usize, block: usize) -> Result<Self> {
        debug_assert_eq!(a.len(), n * n);
        let scale = a.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let tiny = scale * T::epsilon() * T::lit(16.0);
        let mut piv: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let (p, pmax) =
                (col..n)
                    .map(|r| (r, a[r * n + col].abs()))
                    .fold(
                        (col, T::zero()),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            if pmax <= tiny || pmax == T::zero() {
                return Err(Error::Singular { block });
            }
            if p != col {
                for j in 0..n {
                    a.swap(p * n + j, col * n + j);
                }
                piv.swap(p, col);
            }
            let d = a[col * n + col];
            for r in col + 1..n {
                let f = a[r * n + col] / d;
                a[r * n + col] = f;
                for j in col + 1..n {
                    let v = a[col * n + j];
                    a[r * n + j] -= f * v;
                }
            }
        }
        Ok(Self { n, lu: a, piv })
    }

    pub fn solve_in_place(&self, x: &mut [T]) {
        let n = self.n;
        let b: Vec<T> = self.piv.iter().map(|&p| x[p]).collect();
        x.copy_from_slice(&b);
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
    }

    /// Explicit inverse, row-major.
    pub fn inverse(&self) -> Vec<T> {
        let n = self.n;
        let mut inv = vec![T::zero(); n * n];
        let mut col = vec![T::zero(); n];
        for j in 0..n {
            col.iter_mut().for_each(|v| *v = T::zero());
            col[j] = T::one();
            self.solve_in_place(&mut col);
            for i in 0..n {
                inv[i * n + j] = col[i];
            }
        }
        inv
    }
}

/// `n x n` block matrix with `b x b` blocks, nonzero only on the block
/// tridiagonal and, when cyclic, the two corner blocks `(0, n-1)` and `(n-1, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTridiagonal<T> {
    n: usize,
    b: usize,
    diag: Vec<T>,
    /// block `(j, j-1)` stored at index `j`; index 0 unused
    lower: Vec<T>,
    /// block `(j, j+1)` stored at index `j`; index `n-1` unused
    upper: Vec<T>,
    corner_top: Option<Vec<T>>,
    corner_bottom: Option<Vec<T>>,
}

impl<T: Scalar> BlockTridiagonal<T> {
    pub fn zeros(n: usize, b: usize, cyclic: bool) -> Self {
        let bb = b * b;
        let cyclic = cyclic && n >= 3;
        Self {
            n,
            b,
            diag: vec![T::zero(); n * bb],
            lower: vec![T::zero(); n * bb],
            upper: vec![T::zero(); n * bb],
            corner_top: cyclic.then(|| vec![T::zero(); bb]),
            corner_bottom: cyclic.then(|| vec![T::zero(); bb]),
        }
    }

    pub fn num_blocks(&self) -> usize {
        self.n
    }

    pub fn block_size(&self) -> usize {
        self.b
    }

    pub fn dim(&self) -> usize {
        self.n * self.b
    }

    pub fn is_cyclic(&self) -> bool {
        self.corner_top.is_some()
    }

    fn slot(&mut self, row: usize, col: usize) -> Option<&mut [T]> {
        let bb = self.b * self.b;
        let n = self.n;
        if row >= n || col >= n {
            return None;
        }
        if row == col {
            Some(&mut self.diag[row * bb..(row + 1) * bb])
        } else if row + 1 == col {
            Some(&mut self.upper[row * bb..(row + 1) * bb])
        } else if col + 1 == row {
            Some(&mut self.lower[row * bb..(row + 1) * bb])
        } else if row == 0 && col == n - 1 {
            self.corner_top.as_deref_mut()
        } else if row == n - 1 && col == 0 {
            self.corner_bottom.as_deref_mut()
        } else {
            None
        }
    }

    /// Adds the row-major block `blk` at block position `(row, col)`.
    /// Positions outside the sparsity pattern are rejected.
    pub fn add_block(&mut self, row: usize, col: usize, blk: &[T]) -> Result<()> {
        let b = self.b;
        let n = self.n;
        let dst = self.slot(row, col).ok_or_else(|| Error::Shape {
            expected: format!("block-tridiagonal pattern of {n} blocks"),
            got: format!("fill at block ({row}, {col})"),
        })?;
        for (d, &s) in dst.iter_mut().zip(blk.iter().take(b * b)) {
            *d += s;
        }
        Ok(())
    }

    /// Block at `(row, col)`, or `None` outside the pattern.
    pub fn block(&self, row: usize, col: usize) -> Option<&[T]> {
        let bb = self.b * self.b;
        let n = self.n;
        if row >= n || col >= n {
            return None;
        }
        if row == col {
            Some(&self.diag[row * bb..(row + 1) * bb])
        } else if row + 1 == col {
            Some(&self.upper[row * bb..(row + 1) * bb])
        } else if col + 1 == row {
            Some(&self.lower[row * bb..(row + 1) * bb])
        } else if row == 0 && col == n - 1 {
            self.corner_top.as_deref()
        } else if row == n - 1 && col == 0 {
            self.corner_bottom.as_deref()
        } else {
            None
        }
    }

    /// Scales every entry by `s` and adds `t` times `other` (same pattern).
    pub fn scaled_add(&self, s: T, other: &Self, t: T) -> Self {
        let comb = |a: &[T], b: &[T]| a.iter().zip(b).map(|(&x, &y)| s * x + t * y).collect();
        Self {
            n: self.n,
            b: self.b,
            diag: comb(&self.diag, &other.diag),
            lower: comb(&self.lower, &other.lower),
            upper: comb(&self.upper, &other.upper),
            corner_top: self
                .corner_top
                .as_ref()
                .zip(other.corner_top.as_ref())
                .map(|(a, b)| comb(a, b)),
            corner_bottom: self
                .corner_bottom
                .as_ref()
                .zip(other.corner_bottom.as_ref())
                .map(|(a, b)| comb(a, b)),
        }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let b = self.b;
        let mut y = vec![T::zero(); self.dim()];
        for row in 0..self.n {
            let cols = [
                Some(row),
                row.checked_sub(1),
                (row + 1 < self.n).then_some(row + 1),
            ];
            let yr = &mut y[row * b..(row + 1) * b];
            for col in cols.into_iter().flatten() {
                let blk = self.block(row, col).expect("in pattern");
                matvec_add(blk, &x[col * b..(col + 1) * b], yr, b);
            }
            if self.is_cyclic() {
                if row == 0 {
                    let blk = self.block(0, self.n - 1).expect("corner");
                    matvec_add(blk, &x[(self.n - 1) * b..], yr, b);
                } else if row == self.n - 1 {
                    let blk = self.block(self.n - 1, 0).expect("corner");
                    matvec_add(blk, &x[..b], yr, b);
                }
            }
        }
        y
    }

    /// Transposed matrix (same pattern).
    pub fn transpose(&self) -> Self {
        let b = self.b;
        let tr = |blk: &[T]| {
            let mut t = vec![T::zero(); b * b];
            for i in 0..b {
                for j in 0..b {
                    t[j * b + i] = blk[i * b + j];
                }
            }
            t
        };
        let mut out = Self::zeros(self.n, b, self.is_cyclic());
        for row in 0..self.n {
            for col in 0..self.n {
                if let Some(blk) = self.block(row, col) {
                    let t = tr(blk);
                    out.add_block(col, row, &t).expect("transposed pattern");
                }
            }
        }
        out
    }

    /// Direct factorization; cyclic matrices go through a Woodbury correction.
    pub fn factorize(&self) -> Result<BlockFactorization<T>> {
        if !self.is_cyclic() {
            return Ok(BlockFactorization {
                base: BlockLu::new(self)?,
                woodbury: None,
            });
        }
        let b = self.b;
        let n = self.n;
        let top = self.corner_top.clone().expect("cyclic");
        let bottom = self.corner_bottom.clone().expect("cyclic");
        // K = A + U V^T with U = [Y; 0; ...; C], V^T = [I, 0, ..., Y^{-1} T],
        // Y = -K_00, T = top corner, C = bottom corner. For symmetric positive
        // definite K the reduced A stays symmetric positive definite.
        let k00 = self.block(0, 0).expect("diag").to_vec();
        let y: Vec<T> = k00.iter().map(|&v| -v).collect();
        let y_lu = DenseLu::new(y.clone(), b, 0)?;
        let y_inv = y_lu.inverse();
        let y_inv_t = matmul(&y_inv, &top, b);
        let c_y_inv_t = matmul(&bottom, &y_inv_t, b);

        let mut reduced = self.clone();
        reduced.corner_top = None;
        reduced.corner_bottom = None;
        for (d, &v) in reduced.diag[..b * b].iter_mut().zip(&y) {
            *d -= v;
        }
        let last = (n - 1) * b * b;
        for (d, &v) in reduced.diag[last..last + b * b].iter_mut().zip(&c_y_inv_t) {
            *d -= v;
        }
        let base = BlockLu::new(&reduced)?;

        // A^{-1} U, one column at a time; stored column-major (b columns of length n b).
        let dim = n * b;
        let mut ainv_u = vec![T::zero(); dim * b];
        for c in 0..b {
            let col = &mut ainv_u[c * dim..(c + 1) * dim];
            for r in 0..b {
                col[r] = y[r * b + c];
                col[(n - 1) * b + r] = bottom[r * b + c];
            }
            base.solve_in_place(col);
        }
        // S = I + V^T A^{-1} U
        let mut s = vec![T::zero(); b * b];
        for c in 0..b {
            let col = &ainv_u[c * dim..(c + 1) * dim];
            let vt = apply_vt(col, &y_inv_t, n, b);
            for r in 0..b {
                s[r * b + c] = vt[r] + if r == c { T::one() } else { T::zero() };
            }
        }
        let capacitance = DenseLu::new(s, b, n)?;
        Ok(BlockFactorization {
            base,
            woodbury: Some(Woodbury {
                ainv_u,
                y_inv_t,
                capacitance,
            }),
        })
    }
}

fn apply_vt<T: Scalar>(x: &[T], y_inv_t: &[T], n: usize, b: usize) -> Vec<T> {
    let mut out = x[..b].to_vec();
    matvec_add(y_inv_t, &x[(n - 1) * b..n * b], &mut out, b);
    out
}

#[derive(Debug, Clone)]
struct BlockLu<T> {
    n: usize,
    b: usize,
    pivots: Vec<DenseLu<T>>,
    /// `A_j D'_{j-1}^{-1}` at index `j`
    multipliers: Vec<Vec<T>>,
    upper: Vec<T>,
}

impl<T: Scalar> BlockLu<T> {
    fn new(m: &BlockTridiagonal<T>) -> Result<Self> {
        let (n, b) = (m.n, m.b);
        let bb = b * b;
        let mut pivots = Vec::with_capacity(n);
        let mut multipliers = vec![Vec::new(); n];
        let mut prev_inv: Option<Vec<T>> = None;
        for j in 0..n {
            let mut d = m.diag[j * bb..(j + 1) * bb].to_vec();
            if let Some(inv) = &prev_inv {
                let a = &m.lower[j * bb..(j + 1) * bb];
                let g = matmul(a, inv, b);
                let u_prev = &m.upper[(j - 1) * bb..j * bb];
                let gu = matmul(&g, u_prev, b);
                for (dv, v) in d.iter_mut().zip(gu) {
                    *dv -= v;
                }
                multipliers[j] = g;
            }
            let lu = DenseLu::new(d, b, j)?;
            prev_inv = Some(lu.inverse());
            pivots.push(lu);
        }
        Ok(Self {
            n,
            b,
            pivots,
            multipliers,
            upper: m.upper.clone(),
        })
    }

    fn solve_in_place(&self, x: &mut [T]) {
        let (n, b) = (self.n, self.b);
        let bb = b * b;
        for j in 1..n {
            let (head, tail) = x.split_at_mut(j * b);
            let prev = &head[(j - 1) * b..];
            let g = &self.multipliers[j];
            for r in 0..b {
                let mut acc = T::zero();
                for c in 0..b {
                    acc += g[r * b + c] * prev[c];
                }
                tail[r] -= acc;
            }
        }
        for j in (0..n).rev() {
            if j + 1 < n {
                let (head, tail) = x.split_at_mut((j + 1) * b);
                let next = &tail[..b];
                let u = &self.upper[j * bb..(j + 1) * bb];
                let cur = &mut head[j * b..];
                for r in 0..b {
                    let mut acc = T::zero();
                    for c in 0..b {
                        acc += u[r * b + c] * next[c];
                    }
                    cur[r] -= acc;
                }
            }
            self.pivots[j].solve_in_place(&mut x[j * b..(j + 1) * b]);
        }
    }
}

#[derive(Debug, Clone)]
struct Woodbury<T> {
    ainv_u: Vec<T>,
    y_inv_t: Vec<T>,
    capacitance: DenseLu<T>,
}

/// Reusable factorization of a [`BlockTridiagonal`] matrix.
#[derive(Debug, Clone)]
pub struct BlockFactorization<T> {
    base: BlockLu<T>,
    woodbury: Option<Woodbury<T>>,
}

impl<T: Scalar> BlockFactorization<T> {
    pub fn dim(&self) -> usize {
        self.base.n * self.base.b
    }

    pub fn solve_in_place(&self, x: &mut [T]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Shape {
                expected: format!("vector of length {}", self.dim()),
                got: format!("{}", x.len()),
            });
        }
        self.base.solve_in_place(x);
        if let Some(w) = &self.woodbury {
            let (n, b) = (self.base.n, self.base.b);
            let dim = n * b;
            let mut z = apply_vt(x, &w.y_inv_t, n, b);
            w.capacitance.solve_in_place(&mut z);
            for (c, &zc) in z.iter().enumerate() {
                let col = &w.ainv_u[c * dim..(c + 1) * dim];
                for (xi, &ci) in x.iter_mut().zip(col) {
                    *xi -= ci * zc;
                }
            }
        }
        Ok(())
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    fn random_spd(n: usize, b: usize, cyclic: bool, rng: &mut StdRng) -> BlockTridiagonal<f64> {
        // Start from a random pattern-respecting B, return B^T B-like diagonal
        // dominance: off-diagonal blocks random, diagonal blocks dominant and symmetric.
        let mut m = BlockTridiagonal::zeros(n, b, cyclic);
        let bb = b * b;
        for row in 0..n {
            let next = if row + 1 < n {
                Some(row + 1)
            } else if cyclic && n >= 3 {
                Some(0)
            } else {
                None
            };
            if let Some(col) = next {
                let blk: Vec<f64> = (0..bb).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let mut t = vec![0.0; bb];
                for i in 0..b {
                    for j in 0..b {
                        t[j * b + i] = blk[i * b + j];
                    }
                }
                m.add_block(row, col, &blk).unwrap();
                m.add_block(col, row, &t).unwrap();
            }
        }
        for row in 0..n {
            let mut d = vec![0.0; bb];
            for i in 0..b {
                d[i * b + i] = 4.0 * b as f64 + rng.gen_range(0.0..1.0);
            }
            m.add_block(row, row, &d).unwrap();
        }
        m
    }

    fn rel_residual(m: &BlockTridiagonal<f64>, x: &[f64], rhs: &[f64]) -> f64 {
        let r = m.matvec(x);
        let num: f64 = r
            .iter()
            .zip(rhs)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let den: f64 = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
        num / den
    }

    #[test]
    fn dense_lu_solves() {
        let a = vec![0.0f64, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 1.0];
        let lu = DenseLu::new(a.clone(), 3, 0).unwrap();
        let mut x = vec![1.0, 2.0, 3.0];
        lu.solve_in_place(&mut x);
        let mut y = vec![0.0; 3];
        matvec_add(&a, &x, &mut y, 3);
        for (yi, bi) in y.iter().zip([1.0, 2.0, 3.0]) {
            assert!((yi - bi).abs() < 1e-14);
        }
        assert!(DenseLu::new(vec![1.0, 2.0, 2.0, 4.0], 2, 7).is_err());
    }

    #[test]
    fn non_cyclic_and_cyclic_residuals() {
        let mut rng = StdRng::seed_from_u64(7);
        for &(n, b, cyclic) in &[
            (1, 2, false),
            (2, 3, true),
            (5, 1, false),
            (6, 2, true),
            (40, 4, true),
            (3, 3, true),
        ] {
            let m = random_spd(n, b, cyclic, &mut rng);
            let f = m.factorize().unwrap();
            let rhs: Vec<f64> = (0..m.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let x = f.solve(&rhs).unwrap();
            let r = rel_residual(&m, &x, &rhs);
            assert!(r <= 1e-12, "n={n} b={b} cyclic={cyclic}: {r}");
        }
    }

    #[test]
    fn fill_outside_pattern_is_rejected() {
        let mut m = BlockTridiagonal::<f64>::zeros(5, 2, false);
        assert!(m.add_block(0, 2, &[1.0; 4]).is_err());
        assert!(m.add_block(0, 4, &[1.0; 4]).is_err());
        let mut c = BlockTridiagonal::<f64>::zeros(5, 2, true);
        assert!(c.add_block(0, 4, &[1.0; 4]).is_ok());
        assert!(c.add_block(1, 4, &[1.0; 4]).is_err());
    }

    #[test]
    fn wrong_length_rhs() {
        let m = BlockTridiagonal::<f64>::zeros(3, 1, false).scaled_add(
            1.0,
            &BlockTridiagonal::zeros(3, 1, false),
            1.0,
        );
        let mut m = m;
        for j in 0..3 {
            m.add_block(j, j, &[1.0]).unwrap();
        }
        let f = m.factorize().unwrap();
        assert!(f.solve(&[1.0, 2.0]).is_err());
    }
}
