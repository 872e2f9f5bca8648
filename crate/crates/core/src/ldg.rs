//! LDG discretization of `-u_xx` with alternating fluxes `u_hat = u^-`, `p_hat = p^+`.
//!
//! With `p = u_x` the first-order system is written, cell by cell and for
//! every test function, as
//!
//! ```text
//! (p, w) + (u, w_x) - u_hat w^-|_{j+1/2} + u_hat w^+|_{j-1/2} = 0
//! (p, v_x) - p_hat v^-|_{j+1/2} + p_hat v^+|_{j-1/2}        = (-u_xx-part, v)
//! ```
//!
//! giving `M p = G u` and the stiffness `L = -D M^{-1} G`, so that the
//! discrete equation reads `M D_t u + kappa L u = M f`. For Dirichlet data
//! the right-end penalty adds `(c / h) u^- v^-` to `L`; without it `u = P_k`
//! on the last cell would lie in the kernel of `G`. All operators are
//! block tridiagonal with `(k + 1) x (k + 1)` blocks (plus corner blocks for
//! periodic meshes).

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::frac_calculus::TemperedParams;
use crate::linalg::{BlockFactorization, BlockTridiagonal};
use crate::mesh_quadrature::basis::{derivative_pairing, left_trace, norm_sq};
use crate::mesh_quadrature::{DGCoefficients, Mesh1D};
use crate::scalar::Scalar;

/// Penalty `c` in the right-end Dirichlet flux `p_hat = p^- - (c / h) u^-`.
pub const DIRICHLET_PENALTY: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    Periodic,
    /// `u = 0` at both ends: `u_hat = 0` there, `p_hat = p^+` at the left end and
    /// `p_hat = p^- - (c / h) u^-` at the right end.
    HomogeneousDirichlet,
}

impl BoundaryCondition {
    pub fn name(self) -> &'static str {
        match self {
            BoundaryCondition::Periodic => "periodic",
            BoundaryCondition::HomogeneousDirichlet => "dirichlet",
        }
    }
}

impl std::str::FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "periodic" => Ok(Self::Periodic),
            "dirichlet" | "homogeneous-dirichlet" => Ok(Self::HomogeneousDirichlet),
            other => Err(Error::Config(format!(
                "unknown boundary condition {other:?}"
            ))),
        }
    }
}

/// Assembled LDG operators on one mesh.
#[derive(Debug, Clone)]
pub struct LdgSystem<T> {
    mesh: Arc<Mesh1D<T>>,
    degree: usize,
    bc: BoundaryCondition,
    gradient: BlockTridiagonal<T>,
    divergence: BlockTridiagonal<T>,
    mass: Vec<T>,
    stiffness: BlockTridiagonal<T>,
}

fn block_positions(n: usize, cyclic: bool) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |row| {
        let mut cols = vec![row];
        if row > 0 {
            cols.push(row - 1);
        }
        if row + 1 < n {
            cols.push(row + 1);
        }
        if cyclic && n >= 3 {
            if row == 0 {
                cols.push(n - 1);
            } else if row == n - 1 {
                cols.push(0);
            }
        }
        cols.into_iter().map(move |c| (row, c))
    })
}

impl<T: Scalar> LdgSystem<T> {
    pub fn assemble(mesh: Arc<Mesh1D<T>>, degree: usize, bc: BoundaryCondition) -> Result<Self> {
        let n = mesh.num_cells();
        let b = degree + 1;
        let periodic = bc == BoundaryCondition::Periodic;

        let mut own_g = vec![T::zero(); b * b];
        let mut nbr_g = vec![T::zero(); b * b];
        let mut own_d = vec![T::zero(); b * b];
        let mut nbr_d = vec![T::zero(); b * b];
        for i in 0..b {
            for m in 0..b {
                let s: T = derivative_pairing(m, i);
                let sign_i: T = left_trace(i);
                let sign_m: T = left_trace(m);
                // u_hat at x_{j+1/2} is the own right trace; at x_{j-1/2} the
                // left neighbour's right trace.
                own_g[i * b + m] = -s + T::one();
                nbr_g[i * b + m] = -sign_i;
                // p_hat at x_{j-1/2} is the own left trace; at x_{j+1/2} the
                // right neighbour's left trace.
                own_d[i * b + m] = -s - sign_i * sign_m;
                nbr_d[i * b + m] = sign_m;
            }
        }
        // Dirichlet closure at the right end: u_hat = 0 and p_hat = p^- (own trace).
        let mut own_g_right = own_g.clone();
        let mut own_d_right = own_d.clone();
        if !periodic {
            for i in 0..b {
                for m in 0..b {
                    own_g_right[i * b + m] -= T::one();
                    own_d_right[i * b + m] += T::one();
                }
            }
        }

        let mut gradient = BlockTridiagonal::zeros(n, b, periodic);
        let mut divergence = BlockTridiagonal::zeros(n, b, periodic);
        for j in 0..n {
            let last = j + 1 == n;
            gradient.add_block(j, j, if last { &own_g_right } else { &own_g })?;
            divergence.add_block(j, j, if last { &own_d_right } else { &own_d })?;
            if j > 0 {
                gradient.add_block(j, j - 1, &nbr_g)?;
            } else if periodic {
                gradient.add_block(0, n - 1, &nbr_g)?;
            }
            if !last {
                divergence.add_block(j, j + 1, &nbr_d)?;
            } else if periodic {
                divergence.add_block(n - 1, 0, &nbr_d)?;
            }
        }

        let mass: Vec<T> = (0..n)
            .flat_map(|j| {
                let h = mesh.cell_sizes()[j];
                (0..b).map(move |m| h * T::lit(0.5) * norm_sq::<T>(m))
            })
            .collect();

        // L = -D M^{-1} G, accumulated block by block.
        let mut stiffness = BlockTridiagonal::zeros(n, b, periodic);
        let mut tmp = vec![T::zero(); b * b];
        for (row, mid) in block_positions(n, periodic) {
            let Some(dblk) = divergence.block(row, mid) else {
                continue;
            };
            if dblk.iter().all(|v| *v == T::zero()) {
                continue;
            }
            for (grow, col) in block_positions(n, periodic) {
                if grow != mid {
                    continue;
                }
                let Some(gblk) = gradient.block(mid, col) else {
                    continue;
                };
                if gblk.iter().all(|v| *v == T::zero()) {
                    continue;
                }
                tmp.iter_mut().for_each(|v| *v = T::zero());
                for r in 0..b {
                    for l in 0..b {
                        let f = dblk[r * b + l] / mass[mid * b + l];
                        if f == T::zero() {
                            continue;
                        }
                        for c in 0..b {
                            tmp[r * b + c] -= f * gblk[l * b + c];
                        }
                    }
                }
                stiffness.add_block(row, col, &tmp)?;
            }
        }

        if !periodic {
            // p_hat = p^- - (c / h) u^- at the right end.
            let pen = T::lit(DIRICHLET_PENALTY) / mesh.cell_sizes()[n - 1];
            stiffness.add_block(n - 1, n - 1, &vec![pen; b * b])?;
        }

        Ok(Self {
            mesh,
            degree,
            bc,
            gradient,
            divergence,
            mass,
            stiffness,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh1D<T>> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn dim(&self) -> usize {
        self.mass.len()
    }

    /// `G`: `M p = G u`.
    pub fn gradient_operator(&self) -> &BlockTridiagonal<T> {
        &self.gradient
    }

    /// `D`: flux/volume part of the `u` equation acting on `p`.
    pub fn divergence_operator(&self) -> &BlockTridiagonal<T> {
        &self.divergence
    }

    /// `L = -D M^{-1} G`.
    pub fn stiffness(&self) -> &BlockTridiagonal<T> {
        &self.stiffness
    }

    /// Diagonal of the mass matrix, `h_j / (2m + 1)`.
    pub fn mass_diagonal(&self) -> &[T] {
        &self.mass
    }

    fn check(&self, u: &DGCoefficients<T>) -> Result<()> {
        if u.degree() != self.degree || u.coeffs().len() != self.dim() {
            return Err(Error::Shape {
                expected: format!("degree {} with {} coefficients", self.degree, self.dim()),
                got: format!(
                    "degree {} with {} coefficients",
                    u.degree(),
                    u.coeffs().len()
                ),
            });
        }
        Ok(())
    }

    /// `M u` on raw coefficients.
    pub fn apply_mass(&self, u: &[T]) -> Vec<T> {
        u.iter().zip(&self.mass).map(|(&a, &m)| a * m).collect()
    }

    /// Auxiliary variable `p = M^{-1} G u`, the discrete `u_x`.
    pub fn reconstruct_gradient(&self, u: &DGCoefficients<T>) -> Result<DGCoefficients<T>> {
        self.check(u)?;
        let gu = self.gradient.matvec(u.coeffs());
        let p = gu.iter().zip(&self.mass).map(|(&g, &m)| g / m).collect();
        DGCoefficients::from_vec(u.mesh().clone(), self.degree, p)
    }

    /// Coefficients of `M^{-1} L u`, the discrete `-u_xx` as a DG function.
    pub fn apply_laplacian(&self, u: &DGCoefficients<T>) -> Result<DGCoefficients<T>> {
        self.check(u)?;
        let lu = self.stiffness.matvec(u.coeffs());
        let v = lu.iter().zip(&self.mass).map(|(&g, &m)| g / m).collect();
        DGCoefficients::from_vec(u.mesh().clone(), self.degree, v)
    }

    /// Bilinear form `u^T L v`.
    pub fn stiffness_form(&self, u: &[T], v: &[T]) -> T {
        let lv = self.stiffness.matvec(v);
        u.iter().zip(&lv).map(|(&a, &b)| a * b).sum()
    }

    /// Factorizes `K = l0 M + kappa tau^alpha L`.
    pub fn factorize_step_matrix(
        &self,
        l0: T,
        params: &TemperedParams,
        tau: f64,
    ) -> Result<StepSolver<T>> {
        if !(l0 > T::zero()) {
            return Err(Error::domain(format!(
                "leading weight must be > 0, got {l0}"
            )));
        }
        if !(tau > 0.0) {
            return Err(Error::domain(format!("time step must be > 0, got {tau}")));
        }
        let coef = T::lit(params.kappa() * tau.powf(params.alpha()));
        let b = self.degree + 1;
        let n = self.mesh.num_cells();
        let mut mass = BlockTridiagonal::zeros(n, b, self.bc == BoundaryCondition::Periodic);
        let mut blk = vec![T::zero(); b * b];
        for j in 0..n {
            for m in 0..b {
                blk[m * b + m] = self.mass[j * b + m];
            }
            mass.add_block(j, j, &blk)?;
        }
        let matrix = self.stiffness.scaled_add(coef, &mass, l0);
        let factorization = matrix.factorize()?;
        Ok(StepSolver {
            matrix,
            factorization,
            l0,
            coef,
        })
    }
}

/// Factorized per-step matrix `K = l0 M + kappa tau^alpha L`, reused for every step.
#[derive(Debug, Clone)]
pub struct StepSolver<T> {
    matrix: BlockTridiagonal<T>,
    factorization: BlockFactorization<T>,
    l0: T,
    coef: T,
}

impl<T: Scalar> StepSolver<T> {
    pub fn l0(&self) -> T {
        self.l0
    }

    /// `kappa tau^alpha`.
    pub fn diffusion_coefficient(&self) -> T {
        self.coef
    }

    pub fn matrix(&self) -> &BlockTridiagonal<T> {
        &self.matrix
    }

    pub fn apply(&self, v: &[T]) -> Vec<T> {
        self.matrix.matvec(v)
    }

    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>> {
        self.factorization.solve(rhs)
    }

    pub fn solve_in_place(&self, x: &mut [T]) -> Result<()> {
        self.factorization.solve_in_place(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projections::{l2_project, project_minus};
    use rand::{rngs::StdRng, Rng, SeedableRng};
    use std::f64::consts::PI;

    fn system(n: usize, k: usize, bc: BoundaryCondition) -> LdgSystem<f64> {
        let mesh = Arc::new(Mesh1D::uniform(0.0, 1.0, n).unwrap());
        LdgSystem::assemble(mesh, k, bc).unwrap()
    }

    fn constant(sys: &LdgSystem<f64>, c: f64) -> DGCoefficients<f64> {
        let mut u = DGCoefficients::zeros(sys.mesh().clone(), sys.degree());
        for j in 0..sys.mesh().num_cells() {
            u.cell_mut(j)[0] = c;
        }
        u
    }

    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    fn norm(a: &[f64]) -> f64 {
        dot(a, a).sqrt()
    }

    #[test]
    fn gradient_of_constant_vanishes() {
        for n in [1, 2, 3, 8] {
            let sys = system(n, 2, BoundaryCondition::Periodic);
            let p = sys.reconstruct_gradient(&constant(&sys, 1.0)).unwrap();
            assert!(p.coeffs().iter().all(|v| v.abs() < 1e-13), "n={n}");
            let lu = sys.apply_laplacian(&constant(&sys, 2.5)).unwrap();
            assert!(lu.coeffs().iter().all(|v| v.abs() < 1e-10), "n={n}");
        }
    }

    #[test]
    fn discrete_adjointness() {
        let mut rng = StdRng::seed_from_u64(11);
        for bc in [
            BoundaryCondition::Periodic,
            BoundaryCondition::HomogeneousDirichlet,
        ] {
            for &(n, k) in &[(1, 1), (2, 0), (5, 2), (13, 3)] {
                let sys = system(n, k, bc);
                for _ in 0..100 {
                    let u: Vec<f64> = (0..sys.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let p: Vec<f64> = (0..sys.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let udp = dot(&u, &sys.divergence_operator().matvec(&p));
                    let gup = dot(&sys.gradient_operator().matvec(&u), &p);
                    let scale = norm(&u) * norm(&p);
                    assert!((udp + gup).abs() <= 1e-12 * scale, "{bc:?} n={n} k={k}");
                }
            }
        }
    }

    #[test]
    fn stiffness_is_symmetric_positive_semidefinite() {
        let mut rng = StdRng::seed_from_u64(3);
        let sys = system(12, 2, BoundaryCondition::Periodic);
        for _ in 0..50 {
            let u: Vec<f64> = (0..sys.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let v: Vec<f64> = (0..sys.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let a = sys.stiffness_form(&u, &v);
            let b = sys.stiffness_form(&v, &u);
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            assert!(sys.stiffness_form(&u, &u) >= 0.0);
        }
    }

    #[test]
    fn dirichlet_excludes_constants_from_null_space() {
        let sys = system(10, 1, BoundaryCondition::HomogeneousDirichlet);
        let one = constant(&sys, 1.0);
        assert!(sys.stiffness_form(one.coeffs(), one.coeffs()) > 0.0);
        let per = system(10, 1, BoundaryCondition::Periodic);
        let one = constant(&per, 1.0);
        assert!(per.stiffness_form(one.coeffs(), one.coeffs()).abs() < 1e-10);
    }

    #[test]
    fn gradient_of_sine_converges() {
        let k = 2;
        let errs: Vec<f64> = [10, 20, 40, 80]
            .iter()
            .map(|&n| {
                let sys = system(n, k, BoundaryCondition::Periodic);
                // u_hat = u^- makes G P^- u coincide with G u, so p is the L2
                // projection of u_x; the plain L2 projection of u loses one order.
                let u = project_minus(|x: f64| (2.0 * PI * x).sin(), sys.mesh(), k).unwrap();
                sys.reconstruct_gradient(&u)
                    .unwrap()
                    .l2_error(|x| 2.0 * PI * (2.0 * PI * x).cos(), k + 5)
                    .unwrap()
            })
            .collect();
        let rate = (errs[2] / errs[3]).log2();
        assert!(rate >= k as f64 + 1.0 - 0.15, "rate {rate}, errs {errs:?}");
    }

    #[test]
    fn laplacian_of_sine_converges() {
        for k in 1..=3 {
            let errs: Vec<f64> = [10, 20, 40, 80]
                .iter()
                .map(|&n| {
                    let sys = system(n, k, BoundaryCondition::Periodic);
                    let u = l2_project(|x: f64| (2.0 * PI * x).sin(), sys.mesh(), k).unwrap();
                    sys.apply_laplacian(&u)
                        .unwrap()
                        .l2_error(|x| 4.0 * PI * PI * (2.0 * PI * x).sin(), k + 5)
                        .unwrap()
                })
                .collect();
            let rate = (errs[2] / errs[3]).log2();
            // L2 projection of the data limits the second derivative to order k - 1.
            assert!(
                rate >= k as f64 - 1.0 - 0.2,
                "k={k} rate {rate} errs {errs:?}"
            );
        }
    }

    #[test]
    fn dirichlet_elliptic_solve_is_optimal() {
        // Solve (eps M + L) u = M P(4 pi^2 sin 2 pi x) against u = sin 2 pi x.
        let params = TemperedParams::new(0.5, 0.0, 1.0).unwrap();
        for k in 1..=3 {
            let errs: Vec<f64> = [10, 20, 40, 80]
                .iter()
                .map(|&n| {
                    let sys = system(n, k, BoundaryCondition::HomogeneousDirichlet);
                    let solver = sys.factorize_step_matrix(1e-14, &params, 1.0).unwrap();
                    let f =
                        l2_project(|x: f64| 4.0 * PI * PI * (2.0 * PI * x).sin(), sys.mesh(), k)
                            .unwrap();
                    let u = solver.solve(&sys.apply_mass(f.coeffs())).unwrap();
                    DGCoefficients::from_vec(sys.mesh().clone(), k, u)
                        .unwrap()
                        .l2_error(|x| (2.0 * PI * x).sin(), k + 5)
                        .unwrap()
                })
                .collect();
            let rate = (errs[2] / errs[3]).log2();
            assert!(
                (rate - (k as f64 + 1.0)).abs() < 0.1,
                "k={k} rate {rate} errs {errs:?}"
            );
        }
    }

    #[test]
    fn step_matrix_round_trip_and_residual() {
        let mut rng = StdRng::seed_from_u64(5);
        let params = TemperedParams::new(0.5, 1.0, 1.0).unwrap();
        for bc in [
            BoundaryCondition::Periodic,
            BoundaryCondition::HomogeneousDirichlet,
        ] {
            let sys = system(17, 3, bc);
            let solver = sys.factorize_step_matrix(1.2, &params, 1e-2).unwrap();
            let v: Vec<f64> = (0..sys.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let kv = solver.apply(&v);
            let back = solver.solve(&kv).unwrap();
            let err: Vec<f64> = back.iter().zip(&v).map(|(a, b)| a - b).collect();
            assert!(norm(&err) <= 1e-12 * norm(&v));
            let b: Vec<f64> = (0..sys.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let x = solver.solve(&b).unwrap();
            let r: Vec<f64> = solver
                .apply(&x)
                .iter()
                .zip(&b)
                .map(|(a, c)| a - c)
                .collect();
            assert!(norm(&r) <= 1e-12 * norm(&b));
        }
    }

    #[test]
    fn vanishing_diffusion_is_mass_scaling() {
        let sys = system(6, 2, BoundaryCondition::Periodic);
        let params = TemperedParams::new(0.5, 0.0, 1e-300).unwrap();
        let solver = sys.factorize_step_matrix(2.0, &params, 0.1).unwrap();
        let b: Vec<f64> = (0..sys.dim()).map(|i| i as f64 + 1.0).collect();
        let x = solver.solve(&b).unwrap();
        for ((xi, bi), mi) in x.iter().zip(&b).zip(sys.mass_diagonal()) {
            assert!((xi - bi / (2.0 * mi)).abs() <= 1e-13 * xi.abs());
        }
    }

    #[test]
    fn rejects_bad_step_inputs() {
        let sys = system(4, 1, BoundaryCondition::Periodic);
        let params = TemperedParams::new(0.5, 0.0, 1.0).unwrap();
        assert!(sys.factorize_step_matrix(0.0, &params, 0.1).is_err());
        assert!(sys.factorize_step_matrix(1.0, &params, 0.0).is_err());
        let wrong = DGCoefficients::zeros(sys.mesh().clone(), 2);
        assert!(sys.apply_laplacian(&wrong).is_err());
    }

    #[test]
    fn single_precision_assembly() {
        let mesh = Arc::new(Mesh1D::<f32>::uniform(0.0, 1.0, 8).unwrap());
        let sys = LdgSystem::assemble(mesh, 1, BoundaryCondition::Periodic).unwrap();
        let params = TemperedParams::new(0.5, 0.0, 1.0).unwrap();
        let solver = sys.factorize_step_matrix(1.0f32, &params, 0.01).unwrap();
        let b = vec![1.0f32; sys.dim()];
        let x = solver.solve(&b).unwrap();
        let r: f32 = solver
            .apply(&x)
            .iter()
            .zip(&b)
            .map(|(a, c)| (a - c).abs())
            .fold(0.0, f32::max);
        assert!(r < 1e-4);
    }
}
