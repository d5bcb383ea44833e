//! Correspondence between the operator `T_{q,U}` on `[-1, 1]` and the
//! auxiliary operator `S_{V,U'}` on `[0, 1]` with
//! `V(x) = [[0, q(x)], [q(-x)^*, 0]]`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::direct::{free_eigenvalues_in, Potential, SPotential, SolverOptions, TProblem};
use crate::error::{Error, Result};
use crate::matcore::{op_norm, unitary_eig, ComplexMatrix};
use crate::random::haar_unitary;

/// Default bound on the diagonal blocks of `V` for the T-class.
pub const TAU_C5: f64 = 1e-3;

/// `sigma` such that `T_{q,U}` corresponds to `S_{V, sigma U}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignConvention {
    pub sigma: i8,
    /// Largest eigenvalue mismatch observed for each candidate sign, `(sigma, mismatch)`.
    pub evidence: Vec<(i8, f64)>,
}

impl SignConvention {
    /// Maps a boundary matrix between the two operators (the map is an involution).
    pub fn transport(&self, u: &ComplexMatrix) -> ComplexMatrix {
        u * Complex64::new(self.sigma as f64, 0.0)
    }
}

/// `V(x) = [[0, q(x)], [q(-x)^*, 0]]` sampled on the nonnegative half of the grid of `q`.
pub fn v_from_q(q: &Potential) -> SPotential {
    let r = q.r();
    let n = q.intervals();
    let mid = n / 2;
    let samples = q.samples();
    let out: Vec<ComplexMatrix> = (0..=mid)
        .map(|i| {
            let mut v = ComplexMatrix::zeros(2 * r, 2 * r);
            v.view_mut((0, r), (r, r)).copy_from(&samples[mid + i]);
            v.view_mut((r, 0), (r, r)).copy_from(&samples[mid - i].adjoint());
            v
        })
        .collect();
    SPotential::new(out).expect("halved potential grid is valid")
}

/// Largest operator norm of the diagonal blocks `V_11`, `V_22` over the grid.
pub fn anti_commutation_residual(v: &SPotential) -> f64 {
    let r = v.r();
    v.samples()
        .iter()
        .map(|m| {
            let a = op_norm(&m.view((0, 0), (r, r)).into_owned());
            let b = op_norm(&m.view((r, r), (r, r)).into_owned());
            a.max(b)
        })
        .fold(0.0, f64::max)
}

/// Inverse of [`v_from_q`]: `q(x) = V_12(x)` for `x > 0`, `q(x) = V_21(-x)^*`
/// for `x < 0`, the two one-sided values averaged at the origin.
///
/// Fails with `AntiCommutationViolated` when the diagonal blocks exceed `tau`.
pub fn q_from_v(v: &SPotential, tau: f64) -> Result<(Potential, f64)> {
    let residual = anti_commutation_residual(v);
    if residual > tau {
        return Err(Error::AntiCommutationViolated {
            residual,
            tolerance: tau,
        });
    }
    Ok((q_from_v_unchecked(v), residual))
}

/// [`q_from_v`] without the class check; diagonal blocks are ignored.
pub fn q_from_v_unchecked(v: &SPotential) -> Potential {
    let r = v.r();
    let n = v.intervals();
    let samples = v.samples();
    let upper = |i: usize| samples[i].view((0, r), (r, r)).into_owned();
    let lower_adj = |i: usize| samples[i].view((r, 0), (r, r)).adjoint();
    let mut out = Vec::with_capacity(2 * n + 1);
    for i in (1..=n).rev() {
        out.push(lower_adj(i));
    }
    out.push((upper(0) + lower_adj(0)) * Complex64::new(0.5, 0.0));
    for i in 1..=n {
        out.push(upper(i));
    }
    Potential::new(out).expect("doubled grid is valid")
}

/// `(Vy)(x) = (y_1(x), y_2(-x), y_1(-x), y_2(x))` for `y` sampled on a uniform
/// grid of `[-1, 1]` with an even number of intervals.
pub fn lift_function(y: &[DVector<Complex64>]) -> Result<Vec<DVector<Complex64>>> {
    if y.len() < 3 || (y.len() - 1) % 2 != 0 {
        return Err(Error::AsymmetricGrid);
    }
    let dim = y[0].len();
    if dim % 2 != 0 || y.iter().any(|v| v.len() != dim) {
        return Err(Error::InvalidInput("lifted function must have even, constant length".into()));
    }
    let r = dim / 2;
    let mid = (y.len() - 1) / 2;
    Ok((0..=mid)
        .map(|i| {
            let plus = &y[mid + i];
            let minus = &y[mid - i];
            let mut f = DVector::zeros(2 * dim);
            f.rows_mut(0, r).copy_from(&plus.rows(0, r));
            f.rows_mut(r, r).copy_from(&minus.rows(r, r));
            f.rows_mut(2 * r, r).copy_from(&minus.rows(0, r));
            f.rows_mut(3 * r, r).copy_from(&plus.rows(r, r));
            f
        })
        .collect())
}

fn free_multiset(u: &ComplexMatrix, lo: f64, hi: f64) -> Result<Vec<(f64, usize)>> {
    let dec = unitary_eig(u)?;
    let ranks = dec.ranks();
    let mut out = Vec::new();
    for z in free_eigenvalues_in(&dec, lo, hi) {
        if z >= hi {
            continue;
        }
        let k = dec
            .gammas
            .iter()
            .position(|g| ((z - g) / PI - ((z - g) / PI).round()).abs() < 1e-12)
            .unwrap_or(0);
        out.push((z, ranks[k]));
    }
    Ok(out)
}

fn mismatch(a: &[(f64, usize)], b: &[(f64, usize)]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| if x.1 != y.1 { f64::INFINITY } else { (x.0 - y.0).abs() })
        .fold(0.0, f64::max)
}

/// Decides the sign convention by comparing the free spectra of
/// `T_{0,U}` (computed numerically) with those of `S_{0, +-U}` (closed form)
/// for three random `U`. The result is cached per block size.
pub fn resolve_sign_convention(r: usize) -> Result<SignConvention> {
    static CACHE: OnceLock<Mutex<HashMap<usize, SignConvention>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(found) = cache.lock().unwrap().get(&r) {
        return Ok(found.clone());
    }
    let resolved = resolve_uncached(r)?;
    cache.lock().unwrap().insert(r, resolved.clone());
    Ok(resolved)
}

fn resolve_uncached(r: usize) -> Result<SignConvention> {
    if r == 0 {
        return Err(Error::InvalidInput("block size must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5157_4e00 + r as u64);
    let q = Potential::zero(r, 8)?;
    let (lo, hi) = (-2.0 * PI, 2.0 * PI);
    let mut worst = [0.0f64; 2];
    for _ in 0..3 {
        let u = haar_unitary(2 * r, &mut rng);
        let t = TProblem::new(&q, &u, &SolverOptions::default())?;
        let t_spec: Vec<(f64, usize)> = t.eigenvalues(lo, hi)?.iter().map(|x| (x.zeta, x.mult)).collect();
        for (slot, sigma) in [1.0, -1.0].into_iter().enumerate() {
            let s_spec = free_multiset(&(&u * Complex64::new(sigma, 0.0)), lo, hi)?;
            worst[slot] = worst[slot].max(mismatch(&t_spec, &s_spec));
        }
    }
    let evidence = vec![(1, worst[0]), (-1, worst[1])];
    let ok: Vec<i8> = evidence.iter().filter(|e| e.1 <= 1e-8).map(|e| e.0).collect();
    match ok.as_slice() {
        [sigma] => Ok(SignConvention { sigma: *sigma, evidence }),
        _ => Err(Error::NoConsistentSign),
    }
}
