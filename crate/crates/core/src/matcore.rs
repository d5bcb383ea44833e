//! Dense complex linear algebra used throughout the crate.
//!
//! Unitary matrices are decomposed as `U = sum_k exp(2i gamma_k) P_k` with
//! phases `gamma_k` in `[0, pi)` and pairwise orthogonal projectors `P_k`.
//! The same branch rule fixes the principal square root used by the
//! characteristic matrix.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;

pub const C0: Complex64 = Complex64::new(0.0, 0.0);
pub const C1: Complex64 = Complex64::new(1.0, 0.0);
pub const CI: Complex64 = Complex64::new(0.0, 1.0);

/// Default tolerance on `||U*U - I||` for accepting a matrix as unitary.
pub const UNITARY_TOL: f64 = 1e-10;
/// Default eigenphase merge tolerance (radians).
pub const PHASE_MERGE_TOL: f64 = 1e-6;
/// Default half-width of the forbidden band around 1/2 in [`nearest_projector`].
pub const PROJECTOR_BAND: f64 = 0.05;
/// Smallest singular value accepted by [`polar_unitary`].
pub const POLAR_SINGULAR_TOL: f64 = 1e-12;

/// Spectral resolution of a unitary matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryDecomposition {
    /// Strictly increasing phases in `[0, pi)`; the eigenvalues are `exp(2i gamma)`.
    pub gammas: Vec<f64>,
    /// Orthogonal eigenprojectors matching `gammas`.
    pub projectors: Vec<ComplexMatrix>,
}

impl UnitaryDecomposition {
    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.projectors.first().map_or(0, |p| p.nrows())
    }

    /// `sum_k f(gamma_k) P_k`.
    pub fn apply<F: Fn(f64) -> Complex64>(&self, f: F) -> ComplexMatrix {
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for (g, p) in self.gammas.iter().zip(&self.projectors) {
            out += p * f(*g);
        }
        out
    }

    /// `sum_k exp(2i gamma_k) P_k`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply(|g| Complex64::from_polar(1.0, 2.0 * g))
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.projectors.iter().map(projector_rank).collect()
    }
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// Largest singular value.
pub fn op_norm(a: &ComplexMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    singular_values(a).iter().cloned().fold(0.0, f64::max)
}

/// Singular values in ascending order.
pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = a.clone().singular_values().iter().cloned().collect();
    s.sort_by(|x, y| x.partial_cmp(y).unwrap());
    s
}

pub fn max_abs(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn is_finite(a: &ComplexMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn hermitian_part(a: &ComplexMatrix) -> ComplexMatrix {
    (a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Eigen-decomposition of the Hermitian part of `a`, eigenvalues ascending.
pub fn hermitian_eigen(a: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let h = hermitian_part(a);
    let eig = h.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        vectors.set_column(c, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

pub fn unitarity_residual(u: &ComplexMatrix) -> f64 {
    let n = u.nrows();
    op_norm(&(u.adjoint() * u - identity(n)))
}

fn check_unitary(u: &ComplexMatrix, tol: f64) -> Result<()> {
    if u.nrows() != u.ncols() || u.nrows() == 0 {
        return Err(Error::InvalidInput(format!(
            "expected a non-empty square matrix, got {}x{}",
            u.nrows(),
            u.ncols()
        )));
    }
    if !is_finite(u) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let residual = unitarity_residual(u);
    if residual > tol {
        return Err(Error::NotUnitary { residual });
    }
    Ok(())
}

/// Distance between two phases on the circle `R / pi Z`.
fn phase_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

/// Reduce an eigenvalue on the unit circle to its phase in `[0, pi)`.
pub fn half_phase(z: Complex64) -> f64 {
    let theta = z.im.atan2(z.re).rem_euclid(2.0 * PI);
    let g = 0.5 * theta;
    if g >= PI {
        0.0
    } else {
        g
    }
}

/// Spectral decomposition of a unitary matrix with the default tolerances.
pub fn unitary_eig(u: &ComplexMatrix) -> Result<UnitaryDecomposition> {
    unitary_eig_with(u, UNITARY_TOL, PHASE_MERGE_TOL)
}

/// Spectral decomposition with explicit unitarity and phase-merge tolerances.
pub fn unitary_eig_with(
    u: &ComplexMatrix,
    unitary_tol: f64,
    merge_tol: f64,
) -> Result<UnitaryDecomposition> {
    check_unitary(u, unitary_tol)?;
    let n = u.nrows();

    // U is normal, so its complex Schur form is diagonal up to rounding and the
    // Schur vectors are eigenvectors.
    let (q, t) = u.clone().schur().unpack();
    let phases: Vec<f64> = (0..n).map(|i| half_phase(t[(i, i)])).collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| phases[i].partial_cmp(&phases[j]).unwrap());

    // Single-linkage clustering on the circle R / pi Z.
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        match clusters.last_mut() {
            Some(last) if phase_distance(phases[*last.last().unwrap()], phases[i]) <= merge_tol => {
                last.push(i)
            }
            _ => clusters.push(vec![i]),
        }
    }
    if clusters.len() > 1 {
        let first = clusters[0][0];
        let last_cluster = clusters.last().unwrap();
        let last = *last_cluster.last().unwrap();
        if phase_distance(phases[first], phases[last]) <= merge_tol {
            let tail = clusters.pop().unwrap();
            clusters[0].extend(tail);
        }
    }

    let k = clusters.len();
    let mut entries: Vec<(f64, ComplexMatrix)> = Vec::with_capacity(k);
    for members in &clusters {
        let mean: Complex64 = members
            .iter()
            .map(|&i| Complex64::from_polar(1.0, 2.0 * phases[i]))
            .sum::<Complex64>()
            / members.len() as f64;
        let gamma = half_phase(mean);
        let mut p = ComplexMatrix::zeros(n, n);
        for &i in members {
            let v = q.column(i);
            p += &v * v.adjoint();
        }
        entries.push((gamma, hermitian_part(&p)));
    }
    entries.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    if k > 1 {
        for w in 0..k {
            let a = entries[w].0;
            let b = entries[(w + 1) % k].0;
            if phase_distance(a, b) <= 2.0 * merge_tol {
                return Err(Error::DegenerateClustering { left: a, right: b });
            }
        }
    }

    let (gammas, projectors) = entries.into_iter().unzip();
    Ok(UnitaryDecomposition { gammas, projectors })
}

/// `U^{1/2} = sum_k exp(i gamma_k) P_k` with `gamma_k` in `[0, pi)`.
pub fn principal_sqrt_unitary(u: &ComplexMatrix) -> Result<ComplexMatrix> {
    let dec = unitary_eig(u)?;
    Ok(dec.apply(|g| Complex64::from_polar(1.0, g)))
}

/// Closest orthogonal projector to the Hermitian part of `a`.
pub fn nearest_projector(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    nearest_projector_with(a, PROJECTOR_BAND)
}

pub fn nearest_projector_with(a: &ComplexMatrix, band: f64) -> Result<ComplexMatrix> {
    if a.nrows() != a.ncols() {
        return Err(Error::InvalidInput("nearest_projector needs a square matrix".into()));
    }
    let n = a.nrows();
    let (values, vectors) = hermitian_eigen(a);
    let mut p = ComplexMatrix::zeros(n, n);
    for (i, &v) in values.iter().enumerate() {
        if (v - 0.5).abs() < band {
            return Err(Error::AmbiguousRank { value: v });
        }
        if v > 0.5 {
            let col = vectors.column(i);
            p += &col * col.adjoint();
        }
    }
    Ok(hermitian_part(&p))
}

/// Unitary factor of the polar decomposition `A = W |A|`.
pub fn polar_unitary(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.nrows() != a.ncols() {
        return Err(Error::InvalidInput("polar_unitary needs a square matrix".into()));
    }
    let svd = a.clone().svd(true, true);
    let sigma_min = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    if sigma_min < POLAR_SINGULAR_TOL {
        return Err(Error::Singular { sigma_min });
    }
    let w = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    Ok(w * vt)
}

/// Numerical rank of a positive semidefinite matrix.
pub fn psd_rank(a: &ComplexMatrix, tol: f64) -> usize {
    let (values, _) = hermitian_eigen(a);
    let scale = values.iter().cloned().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);
    values.iter().filter(|&&v| v > tol * scale).count()
}

fn projector_rank(p: &ComplexMatrix) -> usize {
    p.trace().re.round().max(0.0) as usize
}

/// Orthonormal basis (as columns) of the numerical kernel of `a`: right singular
/// vectors whose singular values fall below `tol`. Also returns all singular
/// values in ascending order.
pub fn kernel_basis(a: &ComplexMatrix, tol: f64) -> (ComplexMatrix, Vec<f64>) {
    let n = a.ncols();
    if a.nrows() < n {
        // pad a wide matrix so that every right singular vector is computed
        let padded = a.clone().insert_rows(a.nrows(), n - a.nrows(), C0);
        return kernel_basis(&padded, tol);
    }
    let svd = a.clone().svd(false, true);
    let vt = svd.v_t.unwrap();
    let sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[i].partial_cmp(&sv[j]).unwrap());
    let cols: Vec<DVector<Complex64>> = order
        .iter()
        .filter(|&&i| sv[i] < tol)
        .map(|&i| vt.row(i).adjoint().into_owned())
        .collect();
    let sorted = order.iter().map(|&i| sv[i]).collect();
    let basis = if cols.is_empty() {
        ComplexMatrix::zeros(n, 0)
    } else {
        ComplexMatrix::from_columns(&cols)
    };
    (basis, sorted)
}

/// `A^{-1}` restricted to the range of the orthonormal columns `basis`:
/// returns `E (E^* A E)^{-1} E^*` together with the condition number of the
/// compressed matrix.
pub fn compressed_inverse(a: &ComplexMatrix, basis: &ComplexMatrix) -> Result<(ComplexMatrix, f64)> {
    let b = basis.adjoint() * a * basis;
    let (values, vectors) = hermitian_eigen(&b);
    let max = values.iter().cloned().fold(0.0_f64, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min > 0.0) {
        return Err(Error::Singular { sigma_min: min });
    }
    let cond = max / min;
    let k = values.len();
    let mut inv = ComplexMatrix::zeros(k, k);
    for (i, &v) in values.iter().enumerate() {
        let col = vectors.column(i);
        inv += (&col * col.adjoint()) * Complex64::new(1.0 / v, 0.0);
    }
    let out = basis * inv * basis.adjoint();
    Ok((hermitian_part(&out), cond))
}

/// Eigenvalues of a general square matrix, read off its complex Schur form.
pub fn general_eigenvalues(a: &ComplexMatrix) -> Vec<Complex64> {
    if a.nrows() == 1 {
        return vec![a[(0, 0)]];
    }
    let (_, t) = a.clone().schur().unpack();
    (0..a.nrows()).map(|i| t[(i, i)]).collect()
}

/// Matrix exponential by scaling and squaring with a degree-12 Taylor kernel.
/// Intended for the small, moderately sized generators produced by one
/// integrator step.
pub fn expm(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.nrows();
    let norm1 = (0..n)
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0u32;
    if norm1 > 0.25 {
        squarings = (norm1 / 0.25).log2().ceil() as u32;
    }
    let scaled = a * Complex64::new(0.5f64.powi(squarings as i32), 0.0);
    let mut out = identity(n);
    for k in (1..=12).rev() {
        out = identity(n) + (&scaled * out) * Complex64::new(1.0 / k as f64, 0.0);
    }
    for _ in 0..squarings {
        out = &out * &out;
    }
    out
}
