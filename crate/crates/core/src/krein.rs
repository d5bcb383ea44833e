//! Krein equation `R(x,t) + H(x-t) + int_0^x R(x,s) H(s-t) ds = 0` on the
//! triangle `0 <= t <= x <= 1`, the map `Theta(H)(x) = i R(x, 0)` and the
//! positivity test for `I + H` on `L2(0,1)`.
//!
//! Row `x_i = i h` is discretized with trapezoid weights `w` on `[0, x_i]`:
//! `X (I + W T) = -h_row`, where `T` is the block Toeplitz matrix `H(s_k - t_j)`.
//! With `Y = X W` this becomes `Y (W^{-1} + T) = -h_row`, a Hermitian system
//! whose leading blocks are shared between rows, so a bordered Cholesky factor
//! grown one node at a time solves every row.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::accelerant::Accelerant;
use crate::direct::SPotential;
use crate::error::{Error, Result};
use crate::matcore::{hermitian_eigen, hermitian_part, max_abs, op_norm, ComplexMatrix, CI};

/// Largest tolerated condition number of a row system.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KreinMethod {
    /// Bordered Cholesky factor shared by all rows.
    #[default]
    Bordered,
    /// Independent dense LU solve for every row.
    DenseRows,
}

/// `R(x_i, t_j)` for `0 <= j <= i <= n`, `h = 1/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct KreinKernel {
    pub d: usize,
    pub n: usize,
    rows: Vec<Vec<ComplexMatrix>>,
}

impl KreinKernel {
    pub fn get(&self, i: usize, j: usize) -> &ComplexMatrix {
        &self.rows[i][j]
    }

    pub fn row(&self, i: usize) -> &[ComplexMatrix] {
        &self.rows[i]
    }

    pub fn step(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// `i R(x, 0)` as a potential on `[0, 1]`.
    pub fn theta(&self) -> SPotential {
        SPotential::new(self.rows.iter().map(|r| &r[0] * CI).collect()).expect("kernel grid is valid")
    }

    /// Largest node residual of the discretized equation for `h`.
    pub fn residual(&self, h: &Accelerant) -> f64 {
        let grid = Grid::new(h, self.n);
        let mut worst: f64 = 0.0;
        for i in 0..=self.n {
            let row = &self.rows[i];
            let w = grid.weights(i);
            for j in 0..=i {
                let mut r = &row[j] + grid.forcing(i as i64 - j as i64);
                for k in 0..=i {
                    r += &row[k] * grid.h(k as i64 - j as i64) * Complex64::new(w[k], 0.0);
                }
                worst = worst.max(max_abs(&r));
            }
        }
        worst
    }
}

/// Accelerant values on the node differences of a grid of step `1/n`.
struct Grid {
    n: usize,
    values: Vec<ComplexMatrix>,
    right: ComplexMatrix,
}

impl Grid {
    fn new(h: &Accelerant, n: usize) -> Self {
        let h = h.resample(n);
        let right = h.at_zero_right().clone();
        let mut values = h.samples;
        values[n] = hermitian_part(&values[n]);
        Self { n, values, right }
    }

    /// `H(k / n)` as the free term of the equation, `H(0+)` at `k = 0`.
    fn forcing(&self, k: i64) -> &ComplexMatrix {
        if k == 0 {
            &self.right
        } else {
            self.h(k)
        }
    }

    /// `H(k / n)`.
    fn h(&self, k: i64) -> &ComplexMatrix {
        &self.values[(k + self.n as i64) as usize]
    }

    fn step(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Trapezoid weights on `[0, x_i]`.
    fn weights(&self, i: usize) -> Vec<f64> {
        let h = self.step();
        if i == 0 {
            return vec![0.0];
        }
        let mut w = vec![h; i + 1];
        w[0] = h / 2.0;
        w[i] = h / 2.0;
        w
    }
}

/// Tolerance for the node residual.
pub fn residual_tolerance(h: &Accelerant) -> f64 {
    1e-8 * (1.0 + h.sup_norm())
}

/// Solves the Krein equation on the grid of step `1/n` (the accelerant is
/// resampled when its own grid differs).
pub fn krein_solve(h: &Accelerant, n: usize) -> Result<KreinKernel> {
    krein_solve_with(h, n, KreinMethod::default())
}

pub fn krein_solve_with(h: &Accelerant, n: usize, method: KreinMethod) -> Result<KreinKernel> {
    if n == 0 {
        return Err(Error::InvalidInput("Krein grid needs at least one interval".into()));
    }
    let grid = Grid::new(h, n);
    let rows = match method {
        KreinMethod::Bordered => solve_bordered(&grid, h.d)?,
        KreinMethod::DenseRows => solve_dense(&grid, h.d)?,
    };
    Ok(KreinKernel { d: h.d, n, rows })
}

fn not_accelerant(i: usize, what: &str) -> Error {
    Error::NotAccelerant(format!("row {i}: {what}"))
}

/// Cholesky factor of a small Hermitian block; `None` if not positive definite.
fn block_cholesky(a: &ComplexMatrix) -> Option<ComplexMatrix> {
    hermitian_part(a).cholesky().map(|c| c.l())
}

fn solve_bordered(grid: &Grid, d: usize) -> Result<Vec<Vec<ComplexMatrix>>> {
    let n = grid.n;
    let h = grid.step();
    let h0 = grid.h(0).clone();
    let id = ComplexMatrix::identity(d, d);
    let mut rows = Vec::with_capacity(n + 1);
    rows.push(vec![-grid.forcing(0).clone()]);

    // factor of the core matrix on nodes 0..i-1 (endpoint weight at node 0)
    let size = (n + 1) * d;
    let mut l = DMatrix::<Complex64>::zeros(size, size);
    let first = block_cholesky(&(&id * Complex64::new(2.0 / h, 0.0) + &h0)).ok_or_else(|| not_accelerant(0, "not positive"))?;
    l.view_mut((0, 0), (d, d)).copy_from(&first);
    let (mut dmin, mut dmax) = diag_range(&first, f64::INFINITY, 0.0);

    for i in 1..=n {
        let core = i * d;
        // coupling of node i to nodes 0..i-1
        let mut b = ComplexMatrix::zeros(core, d);
        for k in 0..i {
            b.view_mut((k * d, 0), (d, d)).copy_from(grid.h(k as i64 - i as i64));
        }
        let lc = l.view((0, 0), (core, core));
        let z = lc.solve_lower_triangular(&b).ok_or_else(|| not_accelerant(i, "singular factor"))?;
        let zz = z.adjoint() * &z;

        let end = block_cholesky(&(&id * Complex64::new(2.0 / h, 0.0) + &h0 - &zz))
            .ok_or_else(|| not_accelerant(i, "row system is not positive definite"))?;
        let (lo, hi) = diag_range(&end, dmin, dmax);
        if (hi / lo).powi(2) > MAX_CONDITION {
            return Err(not_accelerant(i, "row system is ill-conditioned"));
        }

        // right-hand side: -(H(x_i - t_j))^* for j = 0..=i
        let mut rhs = ComplexMatrix::zeros(core + d, d);
        for j in 0..=i {
            rhs.view_mut((j * d, 0), (d, d)).copy_from(&(-grid.forcing(i as i64 - j as i64).adjoint()));
        }
        let u1 = lc
            .solve_lower_triangular(&rhs.rows(0, core).into_owned())
            .ok_or_else(|| not_accelerant(i, "singular factor"))?;
        let u2 = end
            .solve_lower_triangular(&(rhs.rows(core, d) - z.adjoint() * &u1))
            .ok_or_else(|| not_accelerant(i, "singular factor"))?;
        let v2 = end
            .ad_solve_lower_triangular(&u2)
            .ok_or_else(|| not_accelerant(i, "singular factor"))?;
        let v1 = lc
            .ad_solve_lower_triangular(&(u1 - &z * &v2))
            .ok_or_else(|| not_accelerant(i, "singular factor"))?;

        let mut row = Vec::with_capacity(i + 1);
        for j in 0..=i {
            let w = if j == 0 || j == i { h / 2.0 } else { h };
            let block = if j < i { v1.rows(j * d, d).adjoint() } else { v2.adjoint() };
            row.push(block * Complex64::new(1.0 / w, 0.0));
        }
        rows.push(row);

        if i < n {
            // node i joins the core with interior weight
            let next = block_cholesky(&(&id * Complex64::new(1.0 / h, 0.0) + &h0 - &zz))
                .ok_or_else(|| not_accelerant(i, "core system is not positive definite"))?;
            (dmin, dmax) = diag_range(&next, dmin, dmax);
            l.view_mut((core, 0), (d, core)).copy_from(&z.adjoint());
            l.view_mut((core, core), (d, d)).copy_from(&next);
        }
    }
    Ok(rows)
}

fn diag_range(l: &ComplexMatrix, lo: f64, hi: f64) -> (f64, f64) {
    let mut lo = lo;
    let mut hi = hi;
    for k in 0..l.nrows() {
        let v = l[(k, k)].re.abs();
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

fn solve_dense(grid: &Grid, d: usize) -> Result<Vec<Vec<ComplexMatrix>>> {
    let n = grid.n;
    let mut rows = Vec::with_capacity(n + 1);
    rows.push(vec![-grid.forcing(0).clone()]);
    for i in 1..=n {
        let w = grid.weights(i);
        let size = (i + 1) * d;
        // (I + W T)^T X^T = -h_row^T
        let mut a = ComplexMatrix::identity(size, size);
        for k in 0..=i {
            for j in 0..=i {
                let block = grid.h(k as i64 - j as i64) * Complex64::new(w[k], 0.0);
                let mut view = a.view_mut((j * d, k * d), (d, d));
                view += block.transpose();
            }
        }
        let mut rhs = ComplexMatrix::zeros(size, d);
        for j in 0..=i {
            rhs.view_mut((j * d, 0), (d, d)).copy_from(&(-grid.forcing(i as i64 - j as i64).transpose()));
        }
        let sv = a.singular_values();
        let (smin, smax) = (sv.min(), sv.max());
        if !(smin > 0.0) || smax / smin > MAX_CONDITION {
            return Err(not_accelerant(i, "row system is singular or ill-conditioned"));
        }
        let x = a.lu().solve(&rhs).ok_or_else(|| not_accelerant(i, "singular row system"))?;
        rows.push((0..=i).map(|j| x.rows(j * d, d).transpose()).collect());
    }
    Ok(rows)
}

/// `Theta(H)(x) = i R_H(x, 0)`.
pub fn theta(h: &Accelerant, n: usize) -> Result<SPotential> {
    Ok(krein_solve(h, n)?.theta())
}

/// Smallest eigenvalue of the trapezoid discretization of `I + H` on `L2(0,1)`
/// (symmetrized with the square roots of the weights); `H` is an accelerant
/// when it is positive.
pub fn is_accelerant(h: &Accelerant, n: usize) -> (bool, f64) {
    let grid = Grid::new(h, n);
    let d = h.d;
    let hstep = grid.step();
    let w: Vec<f64> = (0..=n)
        .map(|k| if k == 0 || k == n { hstep / 2.0 } else { hstep })
        .collect();
    let size = (n + 1) * d;
    let mut a = ComplexMatrix::identity(size, size);
    for k in 0..=n {
        for j in 0..=n {
            let s = Complex64::new((w[k] * w[j]).sqrt(), 0.0);
            let mut view = a.view_mut((k * d, j * d), (d, d));
            view += grid.h(k as i64 - j as i64) * s;
        }
    }
    let (values, _) = hermitian_eigen(&a);
    let margin = values[0];
    (margin > 0.0, margin)
}

/// Operator-norm residual of `(I + R)(I + H)(I + R^*) = I` on a coarse grid;
/// the identity holds for the exact Krein kernel.
pub fn factorization_residual(h: &Accelerant, n: usize) -> Result<f64> {
    let kernel = krein_solve(h, n)?;
    let grid = Grid::new(h, n);
    let d = h.d;
    let step = grid.step();
    let size = (n + 1) * d;
    // Nystrom matrices acting on nodal values
    let mut r = ComplexMatrix::identity(size, size);
    let mut r_adj = ComplexMatrix::identity(size, size);
    let mut hh = ComplexMatrix::identity(size, size);
    for k in 0..=n {
        let wk = grid.weights(k);
        for j in 0..=k {
            let mut view = r.view_mut((k * d, j * d), (d, d));
            view += kernel.get(k, j) * Complex64::new(wk[j], 0.0);
        }
        // (R^* f)(x_k) = int_{x_k}^1 R(t, x_k)^* f(t) dt
        for j in k..=n {
            let w = if k == n {
                0.0
            } else if j == k || j == n {
                step / 2.0
            } else {
                step
            };
            let mut view = r_adj.view_mut((k * d, j * d), (d, d));
            view += kernel.get(j, k).adjoint() * Complex64::new(w, 0.0);
        }
        for j in 0..=n {
            let w = if j == 0 || j == n { step / 2.0 } else { step };
            let mut view = hh.view_mut((k * d, j * d), (d, d));
            view += grid.h(k as i64 - j as i64) * Complex64::new(w, 0.0);
        }
    }
    let product = &r * &hh * &r_adj - ComplexMatrix::identity(size, size);
    Ok(op_norm(&product))
}
