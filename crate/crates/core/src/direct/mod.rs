//! Direct spectral problem for the operator `T_{q,U}` on `[-1, 1]` and the
//! auxiliary operator `S_{V,U}` on `[0, 1]`: Cauchy problems, characteristic
//! matrix, Weyl function, eigenvalues and norming matrices.

pub mod eigen;
pub mod ode;
pub mod potential;

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matcore::{
    compressed_inverse, hermitian_part, identity, kernel_basis, principal_sqrt_unitary, singular_values,
    unitarity_residual, unitary_eig, ComplexMatrix, UnitaryDecomposition, C1, CI, UNITARY_TOL,
};
use ode::{simpson_weights, DiracFlow};

pub use eigen::Root;
pub use potential::{Potential, SPotential, SampledMatrixFunction};

/// Numerical knobs shared by the direct solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Magnus steps per grid interval.
    pub substeps: usize,
    /// Singular values below this count as kernel directions.
    pub tau_ker: f64,
    /// Scan refinement factor; the base step is `pi / (8 * oversample)`.
    pub oversample: usize,
    /// Target accuracy of refined eigenvalues.
    pub resolution: f64,
    /// Roots closer than this are merged into one eigenvalue.
    pub merge_tol: f64,
    /// Trapezoid nodes on residue contours.
    pub contour_points: usize,
    /// Condition number of `B_j` above which a warning is logged.
    pub condition_warn: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            substeps: 2,
            tau_ker: 1e-7,
            oversample: 1,
            resolution: 1e-10,
            merge_tol: 1e-9,
            contour_points: 64,
            condition_warn: 1e8,
        }
    }
}

/// Solution values on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalSolution {
    pub xs: Vec<f64>,
    pub values: Vec<ComplexMatrix>,
}

impl FundamentalSolution {
    /// Value at the grid node closest to `x`.
    pub fn at(&self, x: f64) -> &ComplexMatrix {
        let i = self
            .xs
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - x).abs().partial_cmp(&(b.1 - x).abs()).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        &self.values[i]
    }
}

/// One eigenvalue with its norming matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDatum {
    pub lambda: f64,
    pub a: ComplexMatrix,
    pub mult: usize,
}

/// Real interval `[lo, hi)` searched for eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralWindow {
    pub lo: f64,
    pub hi: f64,
}

/// Spectral data: strictly increasing eigenvalues with norming matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    pub r: usize,
    /// Boundary matrix of the operator the data were computed from, if known.
    pub u: Option<ComplexMatrix>,
    pub data: Vec<SpectralDatum>,
    pub window: SpectralWindow,
}

impl SpectralData {
    pub fn new(r: usize, u: Option<ComplexMatrix>, mut data: Vec<SpectralDatum>, window: SpectralWindow) -> Result<Self> {
        data.sort_by(|a, b| a.lambda.partial_cmp(&b.lambda).unwrap_or(std::cmp::Ordering::Equal));
        for d in &data {
            if !d.lambda.is_finite() || d.a.shape() != (2 * r, 2 * r) {
                return Err(Error::InvalidInput(format!(
                    "datum at {} has wrong shape or non-finite eigenvalue",
                    d.lambda
                )));
            }
        }
        if data.windows(2).any(|w| w[0].lambda >= w[1].lambda) {
            return Err(Error::InvalidInput("eigenvalues must be pairwise distinct".into()));
        }
        Ok(Self { r, u, data, window })
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Label of `data[0]` under the convention `lambda_0 < 0 <= lambda_1`.
    pub fn first_index(&self) -> i64 {
        let negatives = self.data.iter().filter(|d| d.lambda < 0.0).count() as i64;
        1 - negatives
    }

    /// Datum with label `j`.
    pub fn get(&self, j: i64) -> Option<&SpectralDatum> {
        let i = j - self.first_index();
        if i < 0 {
            return None;
        }
        self.data.get(i as usize)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.data.iter().map(|d| d.lambda).collect()
    }
}

/// Norming matrix together with the intermediate quantities it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct NormingDetails {
    pub datum: SpectralDatum,
    /// `M_j` (or the doubled-system analogue).
    pub gram: ComplexMatrix,
    /// Orthogonal projector onto the eigenspace parameters.
    pub projector: ComplexMatrix,
    /// The doubled-system matrix `D_j` (auxiliary operator only).
    pub doubled: Option<ComplexMatrix>,
    pub condition: f64,
}

fn check_square_unitary(u: &ComplexMatrix, n: usize) -> Result<()> {
    if u.shape() != (n, n) {
        return Err(Error::InvalidInput(format!(
            "boundary matrix must be {n}x{n}, got {}x{}",
            u.nrows(),
            u.ncols()
        )));
    }
    let residual = unitarity_residual(u);
    if residual > UNITARY_TOL {
        return Err(Error::NotUnitary { residual });
    }
    Ok(())
}

/// Free eigenvalues `gamma_k + pi n` lying in `[lo, hi]`.
pub fn free_eigenvalues_in(dec: &UnitaryDecomposition, lo: f64, hi: f64) -> Vec<f64> {
    let n_lo = ((lo - PI) / PI).floor() as i64;
    let n_hi = (hi / PI).ceil() as i64;
    let mut out: Vec<f64> = (n_lo..=n_hi)
        .flat_map(|n| dec.gammas.iter().map(move |g| g + PI * n as f64))
        .filter(|&z| z >= lo && z <= hi)
        .collect();
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

/// Smallest distance between consecutive free eigenvalues.
pub fn free_gap(dec: &UnitaryDecomposition) -> f64 {
    let g = &dec.gammas;
    let mut gap = PI + g[0] - g[g.len() - 1];
    for w in g.windows(2) {
        gap = gap.min(w[1] - w[0]);
    }
    gap
}

fn scan_step(gap: f64, opts: &SolverOptions) -> f64 {
    let base = PI / (8.0 * opts.oversample.max(1) as f64);
    base.min((gap / 4.0).max(PI / 512.0))
}

fn lift_kernel(
    kernel: &ComplexMatrix,
    gram: &ComplexMatrix,
    zeta: f64,
    sigma_min: f64,
    opts: &SolverOptions,
) -> Result<(ComplexMatrix, ComplexMatrix, f64)> {
    if kernel.ncols() == 0 {
        return Err(Error::NotEigenvalue {
            lambda: zeta,
            sigma_min,
        });
    }
    let (inv, cond) = compressed_inverse(gram, kernel)?;
    if cond > opts.condition_warn {
        log::warn!("norming matrix at {zeta} built from an ill-conditioned block (cond {cond:.3e})");
    }
    let projector = kernel * kernel.adjoint();
    Ok((inv, hermitian_part(&projector), cond))
}

/// `a = (1/sqrt 2)(I, -I)`, a `d x 2d` matrix.
pub fn a_matrix(d: usize) -> ComplexMatrix {
    let mut a = ComplexMatrix::zeros(d, 2 * d);
    for i in 0..d {
        a[(i, i)] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        a[(i, d + i)] = Complex64::new(-FRAC_1_SQRT_2, 0.0);
    }
    a
}

/// `J = (1/i) diag(I_d, -I_d)`.
pub fn j_matrix(d: usize) -> ComplexMatrix {
    let mut j = ComplexMatrix::zeros(2 * d, 2 * d);
    for i in 0..d {
        j[(i, i)] = -CI;
        j[(d + i, d + i)] = CI;
    }
    j
}

// ---------------------------------------------------------------------------
// operator on [-1, 1]

/// The operator `T_{q,U}` with precomputed integrators.
#[derive(Debug, Clone)]
pub struct TProblem {
    r: usize,
    u: ComplexMatrix,
    a_u: ComplexMatrix,
    b_u: ComplexMatrix,
    forward: DiracFlow,
    backward: DiracFlow,
    grid: Vec<f64>,
    seeds_dec: (UnitaryDecomposition, UnitaryDecomposition),
    opts: SolverOptions,
}

impl TProblem {
    pub fn new(q: &Potential, u: &ComplexMatrix, opts: &SolverOptions) -> Result<Self> {
        let r = q.r();
        check_square_unitary(u, 2 * r)?;
        let n = q.intervals();
        let mid = n / 2;
        let f = q.function();
        let mut p1 = ComplexMatrix::zeros(2 * r, 2 * r);
        let mut p2 = ComplexMatrix::zeros(2 * r, 2 * r);
        for i in 0..r {
            p1[(i, i)] = C1;
            p2[(r + i, r + i)] = C1;
        }
        let a_u = &p2 + u * &p1;
        let b_u = &p1 + u * &p2;
        let neg = -u.clone();
        Ok(Self {
            r,
            u: u.clone(),
            a_u,
            b_u,
            forward: DiracFlow::new(f, mid, n, opts.substeps),
            backward: DiracFlow::new(f, mid, 0, opts.substeps),
            grid: (0..=n).map(|i| f.node(i)).collect(),
            seeds_dec: (unitary_eig(u)?, unitary_eig(&neg)?),
            opts: opts.clone(),
        })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.u
    }

    /// `Y(x, lambda)` on the potential grid, `Y(0) = I`.
    pub fn fundamental(&self, lambda: Complex64) -> FundamentalSolution {
        let id = identity(2 * self.r);
        let k = self.forward.substeps();
        let fwd = self.forward.trajectory(lambda, &id);
        let bwd = self.backward.trajectory(lambda, &id);
        let mut values: Vec<ComplexMatrix> = bwd.into_iter().step_by(k).collect();
        values.reverse();
        values.extend(fwd.into_iter().step_by(k).skip(1));
        FundamentalSolution {
            xs: self.grid.clone(),
            values,
        }
    }

    /// `A_U Y(-1, lambda) + B_U Y(1, lambda)`.
    pub fn boundary_matrix(&self, lambda: Complex64) -> ComplexMatrix {
        let id = identity(2 * self.r);
        let y_plus = self.forward.propagate(lambda, &id);
        let y_minus = self.backward.propagate(lambda, &id);
        &self.a_u * y_minus + &self.b_u * y_plus
    }

    /// Eigenvalues in `[lo, hi)`.
    pub fn eigenvalues(&self, lo: f64, hi: f64) -> Result<Vec<Root>> {
        // seeds from the free spectra of both U and -U so that the search does
        // not presuppose the sign convention
        let mut seeds = free_eigenvalues_in(&self.seeds_dec.0, lo - PI, hi + PI);
        seeds.extend(free_eigenvalues_in(&self.seeds_dec.1, lo - PI, hi + PI));
        let gap = free_gap(&self.seeds_dec.0).min(free_gap(&self.seeds_dec.1));
        eigen::find_roots(
            &|z| self.boundary_matrix(z),
            lo,
            hi,
            &seeds,
            scan_step(gap, &self.opts),
            &self.opts,
        )
    }

    /// Norming matrix `A_j = B_j^{-1} P_j` at an eigenvalue.
    pub fn norming(&self, lambda: f64) -> Result<NormingDetails> {
        let z = Complex64::new(lambda, 0.0);
        let id = identity(2 * self.r);
        let fwd = self.forward.trajectory(z, &id);
        let bwd = self.backward.trajectory(z, &id);
        let boundary = &self.a_u * bwd.last().unwrap() + &self.b_u * fwd.last().unwrap();
        let (kernel, sv) = kernel_basis(&boundary, self.opts.tau_ker);

        let mut gram = ComplexMatrix::zeros(2 * self.r, 2 * self.r);
        for traj in [&fwd, &bwd] {
            let n = traj.len() - 1;
            let w = simpson_weights(n, 1.0 / n as f64);
            for (y, wk) in traj.iter().zip(w) {
                gram += y.adjoint() * y * Complex64::new(0.5 * wk, 0.0);
            }
        }
        let gram = hermitian_part(&gram);
        let (a, projector, condition) = lift_kernel(&kernel, &gram, lambda, sv[0], &self.opts)?;
        Ok(NormingDetails {
            datum: SpectralDatum {
                lambda,
                a,
                mult: kernel.ncols(),
            },
            gram,
            projector,
            doubled: None,
            condition,
        })
    }

    /// Eigenvalues in `[lo, hi)` with their norming matrices.
    pub fn spectral_data(&self, lo: f64, hi: f64) -> Result<SpectralData> {
        let roots = self.eigenvalues(lo, hi)?;
        let data = roots
            .iter()
            .map(|root| self.norming(root.zeta).map(|n| n.datum))
            .collect::<Result<Vec<_>>>()?;
        SpectralData::new(self.r, Some(self.u.clone()), data, SpectralWindow { lo, hi })
    }
}

// ---------------------------------------------------------------------------
// auxiliary operator on [0, 1]

/// The operator `S_{V,U}` with precomputed integrator.
#[derive(Debug, Clone)]
pub struct SProblem {
    r: usize,
    u: ComplexMatrix,
    b_u: ComplexMatrix,
    flow: DiracFlow,
    grid: Vec<f64>,
    dec: UnitaryDecomposition,
    a: ComplexMatrix,
    ja_star: ComplexMatrix,
    bold_a: ComplexMatrix,
    bold_b: ComplexMatrix,
    opts: SolverOptions,
}

impl SProblem {
    pub fn new(v: &SPotential, u: &ComplexMatrix, opts: &SolverOptions) -> Result<Self> {
        let d = v.d();
        let r = v.r();
        check_square_unitary(u, d)?;
        let dec = unitary_eig(u)?;
        let sqrt = principal_sqrt_unitary(u)?;
        let inv_sqrt = sqrt.adjoint();
        let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let mut b_u = ComplexMatrix::zeros(d, 2 * d);
        b_u.view_mut((0, 0), (d, d)).copy_from(&(inv_sqrt * s));
        b_u.view_mut((0, d), (d, d)).copy_from(&(sqrt * (-s)));

        let mut bold_a = ComplexMatrix::zeros(2 * d, 2 * d);
        let mut bold_b = ComplexMatrix::zeros(2 * d, 2 * d);
        for i in 0..d {
            bold_a[(d + i, i)] = -s;
            bold_a[(d + i, d + i)] = s;
            bold_b[(i, i)] = s;
        }
        bold_b.view_mut((0, d), (d, d)).copy_from(&(u * (-s)));

        let a = a_matrix(d);
        let ja_star = j_matrix(d) * a.adjoint();
        let f = v.function();
        Ok(Self {
            r,
            u: u.clone(),
            b_u,
            flow: DiracFlow::new(f, 0, f.intervals(), opts.substeps),
            grid: (0..=f.intervals()).map(|i| f.node(i)).collect(),
            dec,
            a,
            ja_star,
            bold_a,
            bold_b,
            opts: opts.clone(),
        })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.u
    }

    pub fn decomposition(&self) -> &UnitaryDecomposition {
        &self.dec
    }

    /// `b_U = (1/sqrt 2)(U^{-1/2}, -U^{1/2})`.
    pub fn b_u(&self) -> &ComplexMatrix {
        &self.b_u
    }

    /// `phi(x, zeta)` and `psi(x, zeta)` on the potential grid.
    pub fn cauchy(&self, zeta: Complex64) -> (FundamentalSolution, FundamentalSolution) {
        let d = 2 * self.r;
        let mut init = ComplexMatrix::zeros(2 * d, 2 * d);
        init.view_mut((0, 0), (2 * d, d)).copy_from(&self.ja_star);
        init.view_mut((0, d), (2 * d, d)).copy_from(&self.a.adjoint());
        let traj = self.flow.trajectory(zeta, &init);
        let k = self.flow.substeps();
        let (mut phi, mut psi) = (Vec::new(), Vec::new());
        for y in traj.into_iter().step_by(k) {
            phi.push(y.columns(0, d).into_owned());
            psi.push(y.columns(d, d).into_owned());
        }
        (
            FundamentalSolution {
                xs: self.grid.clone(),
                values: phi,
            },
            FundamentalSolution {
                xs: self.grid.clone(),
                values: psi,
            },
        )
    }

    /// `Y(1, zeta)` for `Y(0) = I_{4r}`.
    pub fn end_state(&self, zeta: Complex64) -> ComplexMatrix {
        self.flow.propagate(zeta, &identity(4 * self.r))
    }

    /// Characteristic matrix `s(zeta) = b_U phi(1, zeta)`.
    pub fn char_matrix(&self, zeta: Complex64) -> ComplexMatrix {
        let y = self.flow.propagate(zeta, &self.ja_star);
        &self.b_u * y
    }

    /// `(s(zeta), c(zeta))` from a single integration.
    pub fn char_pair(&self, zeta: Complex64) -> (ComplexMatrix, ComplexMatrix) {
        let y = self.end_state(zeta);
        let by = &self.b_u * y;
        (&by * &self.ja_star, by * self.a.adjoint())
    }

    /// Weyl function `M(zeta) = -s(zeta)^{-1} c(zeta)`.
    pub fn weyl(&self, zeta: Complex64) -> Result<ComplexMatrix> {
        let (s, c) = self.char_pair(zeta);
        let sigma_min = singular_values(&s)[0];
        if sigma_min < 1e-12 {
            return Err(Error::SingularAtEigenvalue {
                zeta: format!("{zeta}"),
            });
        }
        let inv = s.try_inverse().ok_or(Error::Singular { sigma_min })?;
        Ok(-(inv * c))
    }

    /// Free eigenvalues `gamma_k + pi n` in `[lo, hi]`.
    pub fn free_eigenvalues(&self, lo: f64, hi: f64) -> Vec<f64> {
        free_eigenvalues_in(&self.dec, lo, hi)
    }

    /// Eigenvalues in `[lo, hi)`.
    pub fn eigenvalues(&self, lo: f64, hi: f64) -> Result<Vec<Root>> {
        let seeds = self.free_eigenvalues(lo - PI, hi + PI);
        eigen::find_roots(
            &|z| self.char_matrix(z),
            lo,
            hi,
            &seeds,
            scan_step(free_gap(&self.dec), &self.opts),
            &self.opts,
        )
    }

    /// Norming matrix through the doubled Cauchy problem:
    /// `C_j = -(1/2) a J D_j J a^*` with `D_j = B_j^{-1} P_j`.
    pub fn norming(&self, zeta: f64) -> Result<NormingDetails> {
        let d = 2 * self.r;
        let traj = self.flow.trajectory(Complex64::new(zeta, 0.0), &identity(2 * d));
        let boundary = &self.bold_a + &self.bold_b * traj.last().unwrap();
        let (kernel, sv) = kernel_basis(&boundary, self.opts.tau_ker);
        let n = traj.len() - 1;
        let w = simpson_weights(n, 1.0 / n as f64);
        let mut gram = ComplexMatrix::zeros(2 * d, 2 * d);
        for (y, wk) in traj.iter().zip(w) {
            gram += y.adjoint() * y * Complex64::new(0.5 * wk, 0.0);
        }
        let gram = hermitian_part(&gram);
        let (doubled, projector, condition) = lift_kernel(&kernel, &gram, zeta, sv[0], &self.opts)?;
        let aj = &self.a * j_matrix(d);
        let c = hermitian_part(&(&aj * &doubled * aj.adjoint() * Complex64::new(0.5, 0.0)));
        Ok(NormingDetails {
            datum: SpectralDatum {
                lambda: zeta,
                a: c,
                mult: kernel.ncols(),
            },
            gram,
            projector,
            doubled: Some(doubled),
            condition,
        })
    }

    /// `-res M` at `zeta_j` by the trapezoid rule on a circle.
    pub fn residue(&self, zeta: f64, radius: f64) -> Result<ComplexMatrix> {
        let n = self.opts.contour_points.max(4);
        let d = 2 * self.r;
        let mut acc = ComplexMatrix::zeros(d, d);
        for k in 0..n {
            let e = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64);
            let z = Complex64::new(zeta, 0.0) + e * radius;
            let (s, c) = self.char_pair(z);
            let sigma_min = singular_values(&s)[0];
            if sigma_min < 1e-10 {
                return Err(Error::ContourTouchesPole { center: zeta, radius });
            }
            let m = -(s.try_inverse().ok_or(Error::ContourTouchesPole { center: zeta, radius })? * c);
            acc += m * e;
        }
        Ok(acc * Complex64::new(-radius / n as f64, 0.0))
    }

    /// Eigenvalues in `[lo, hi)` with norming matrices.
    pub fn spectral_data(&self, lo: f64, hi: f64) -> Result<SpectralData> {
        let roots = self.eigenvalues(lo, hi)?;
        let data = roots
            .iter()
            .map(|root| self.norming(root.zeta).map(|n| n.datum))
            .collect::<Result<Vec<_>>>()?;
        SpectralData::new(self.r, Some(self.u.clone()), data, SpectralWindow { lo, hi })
    }
}

// ---------------------------------------------------------------------------
// one-shot wrappers

/// `Y(x, lambda)` of the operator on `[-1, 1]`, with `Y(0) = I`.
pub fn solve_cauchy_t(q: &Potential, lambda: Complex64) -> FundamentalSolution {
    let r = q.r();
    let opts = SolverOptions::default();
    let f = q.function();
    let n = f.intervals();
    let fwd = DiracFlow::new(f, n / 2, n, opts.substeps);
    let bwd = DiracFlow::new(f, n / 2, 0, opts.substeps);
    let id = identity(2 * r);
    let k = opts.substeps;
    let mut values: Vec<ComplexMatrix> = bwd.trajectory(lambda, &id).into_iter().step_by(k).collect();
    values.reverse();
    values.extend(fwd.trajectory(lambda, &id).into_iter().step_by(k).skip(1));
    FundamentalSolution {
        xs: (0..=n).map(|i| f.node(i)).collect(),
        values,
    }
}

/// `(phi, psi)` of the auxiliary operator.
pub fn solve_cauchy_s(v: &SPotential, zeta: Complex64) -> (FundamentalSolution, FundamentalSolution) {
    let r = v.r();
    let opts = SolverOptions::default();
    let f = v.function();
    let flow = DiracFlow::new(f, 0, f.intervals(), opts.substeps);
    let d = 2 * r;
    let a = a_matrix(d);
    let mut init = ComplexMatrix::zeros(2 * d, 2 * d);
    init.view_mut((0, 0), (2 * d, d)).copy_from(&(j_matrix(d) * a.adjoint()));
    init.view_mut((0, d), (2 * d, d)).copy_from(&a.adjoint());
    let (mut phi, mut psi) = (Vec::new(), Vec::new());
    for y in flow.trajectory(zeta, &init).into_iter().step_by(opts.substeps) {
        phi.push(y.columns(0, d).into_owned());
        psi.push(y.columns(d, d).into_owned());
    }
    let xs: Vec<f64> = (0..=f.intervals()).map(|i| f.node(i)).collect();
    (
        FundamentalSolution {
            xs: xs.clone(),
            values: phi,
        },
        FundamentalSolution { xs, values: psi },
    )
}

pub fn char_matrix(v: &SPotential, u: &ComplexMatrix, zeta: Complex64) -> Result<ComplexMatrix> {
    Ok(SProblem::new(v, u, &SolverOptions::default())?.char_matrix(zeta))
}

pub fn weyl_function(v: &SPotential, u: &ComplexMatrix, zeta: Complex64) -> Result<ComplexMatrix> {
    SProblem::new(v, u, &SolverOptions::default())?.weyl(zeta)
}

pub fn find_eigenvalues(v: &SPotential, u: &ComplexMatrix, window: SpectralWindow) -> Result<Vec<Root>> {
    SProblem::new(v, u, &SolverOptions::default())?.eigenvalues(window.lo, window.hi)
}

pub fn norming_matrix_t(q: &Potential, u: &ComplexMatrix, lambda: f64) -> Result<SpectralDatum> {
    Ok(TProblem::new(q, u, &SolverOptions::default())?.norming(lambda)?.datum)
}

pub fn norming_matrix_s(v: &SPotential, u: &ComplexMatrix, zeta: f64) -> Result<SpectralDatum> {
    Ok(SProblem::new(v, u, &SolverOptions::default())?.norming(zeta)?.datum)
}

pub fn norming_matrix_residue(v: &SPotential, u: &ComplexMatrix, zeta: f64, radius: f64) -> Result<ComplexMatrix> {
    SProblem::new(v, u, &SolverOptions::default())?.residue(zeta, radius)
}

pub fn spectral_data(v: &SPotential, u: &ComplexMatrix, window: SpectralWindow) -> Result<SpectralData> {
    SProblem::new(v, u, &SolverOptions::default())?.spectral_data(window.lo, window.hi)
}
