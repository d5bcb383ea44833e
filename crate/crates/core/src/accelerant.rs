//! Free spectrum, window partition and the accelerant
//! `H(t) = sum_m [ sum_{lambda_j in Delta_m} A_j e^{2i lambda_j t} - A0_m e^{2i zeta0_m t} ]`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::direct::SpectralData;
use crate::error::{Error, Result};
use crate::matcore::{hermitian_part, max_abs, op_norm, unitary_eig, ComplexMatrix, UnitaryDecomposition, CI};

/// Accelerant samples on `2n + 1` uniform points of `[-1, 1]` (step `1/n`).
#[derive(Debug, Clone, PartialEq)]
pub struct Accelerant {
    pub d: usize,
    pub n: usize,
    pub samples: Vec<ComplexMatrix>,
    /// `H(0+)` when `H` jumps at the origin; the sample at `t = 0` then holds
    /// the mean of the two one-sided limits.
    pub right_limit: Option<ComplexMatrix>,
}

impl Accelerant {
    pub fn new(n: usize, samples: Vec<ComplexMatrix>) -> Result<Self> {
        if n == 0 || samples.len() != 2 * n + 1 {
            return Err(Error::InvalidInput(format!(
                "accelerant grid needs 2n+1 = {} samples, got {}",
                2 * n + 1,
                samples.len()
            )));
        }
        let d = samples[0].nrows();
        if samples.iter().any(|s| s.shape() != (d, d) || !crate::matcore::is_finite(s)) {
            return Err(Error::InvalidInput("accelerant samples must be finite square matrices".into()));
        }
        Ok(Self {
            d,
            n,
            samples,
            right_limit: None,
        })
    }

    pub fn zero(d: usize, n: usize) -> Self {
        Self {
            d,
            n,
            samples: vec![ComplexMatrix::zeros(d, d); 2 * n + 1],
            right_limit: None,
        }
    }

    /// Samples `f(t)` on the grid.
    pub fn from_fn<F: FnMut(f64) -> ComplexMatrix>(n: usize, mut f: F) -> Result<Self> {
        Self::new(n, (0..=2 * n).map(|i| f(Self::node_of(n, i))).collect())
    }

    fn node_of(n: usize, i: usize) -> f64 {
        (i as f64 - n as f64) / n as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        Self::node_of(self.n, i)
    }

    /// Sample at `t = k / n`, `-n <= k <= n`.
    pub fn at(&self, k: i64) -> &ComplexMatrix {
        &self.samples[(k + self.n as i64) as usize]
    }

    /// Linear interpolation, clamped to `[-1, 1]`.
    pub fn eval(&self, t: f64) -> ComplexMatrix {
        let pos = ((t + 1.0) * self.n as f64).clamp(0.0, 2.0 * self.n as f64);
        let i = (pos.floor() as usize).min(2 * self.n - 1);
        let w = pos - i as f64;
        if w == 0.0 {
            return self.samples[i].clone();
        }
        &self.samples[i] * Complex64::new(1.0 - w, 0.0) + &self.samples[i + 1] * Complex64::new(w, 0.0)
    }

    /// `max_t |H(-t) - H(t)^*|`.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.n as i64;
        (0..=n)
            .map(|k| max_abs(&(self.at(-k) - self.at(k).adjoint())))
            .fold(0.0, f64::max)
    }

    /// Replaces `H(t)` by `(H(t) + H(-t)^*) / 2`.
    pub fn symmetrize(&mut self) {
        let n = self.n as i64;
        let half = Complex64::new(0.5, 0.0);
        for k in 0..=n {
            let sym = (self.at(k) + self.at(-k).adjoint()) * half;
            self.samples[(n + k) as usize] = sym.clone();
            self.samples[(n - k) as usize] = sym.adjoint();
        }
        let mid = self.n;
        self.samples[mid] = hermitian_part(&self.samples[mid]);
    }

    /// `H(0+)`: the stored right limit, or the sample at the origin.
    pub fn at_zero_right(&self) -> &ComplexMatrix {
        self.right_limit.as_ref().unwrap_or(&self.samples[self.n])
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().map(op_norm).fold(0.0, f64::max)
    }

    /// Resampled on a grid of step `1/n` by linear interpolation.
    pub fn resample(&self, n: usize) -> Accelerant {
        if n == self.n {
            return self.clone();
        }
        Accelerant {
            d: self.d,
            n,
            samples: (0..=2 * n).map(|i| self.eval(Self::node_of(n, i))).collect(),
            right_limit: self.right_limit.clone(),
        }
    }

    pub fn max_difference(&self, other: &Accelerant) -> f64 {
        let n = self.n.max(other.n);
        let (a, b) = (self.resample(n), other.resample(n));
        a.samples
            .iter()
            .zip(&b.samples)
            .map(|(x, y)| op_norm(&(x - y)))
            .fold(0.0, f64::max)
    }
}

/// Free eigenvalue `zeta0_m = gamma_k + pi n`, `m = n s + k`, `k = 1..=s`.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeEntry {
    pub index: i64,
    pub zeta: f64,
    pub projector: ComplexMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreeSpectrum {
    pub decomposition: UnitaryDecomposition,
    pub entries: Vec<FreeEntry>,
}

/// `zeta0_m` for any index `m`.
pub fn free_eigenvalue(dec: &UnitaryDecomposition, m: i64) -> f64 {
    let s = dec.len() as i64;
    let n = (m - 1).div_euclid(s);
    let k = (m - 1).rem_euclid(s) as usize;
    dec.gammas[k] + PI * n as f64
}

fn free_projector(dec: &UnitaryDecomposition, m: i64) -> &ComplexMatrix {
    let s = dec.len() as i64;
    &dec.projectors[(m - 1).rem_euclid(s) as usize]
}

impl FreeSpectrum {
    /// Entries for every index `m` in `[m_lo, m_hi]`.
    pub fn by_index(dec: &UnitaryDecomposition, m_lo: i64, m_hi: i64) -> Self {
        let entries = (m_lo..=m_hi)
            .map(|m| FreeEntry {
                index: m,
                zeta: free_eigenvalue(dec, m),
                projector: free_projector(dec, m).clone(),
            })
            .collect();
        Self {
            decomposition: dec.clone(),
            entries,
        }
    }
}

/// Free spectrum for all periods `n` in `[n_lo, n_hi]`.
pub fn free_spectrum(u: &ComplexMatrix, n_lo: i64, n_hi: i64) -> Result<FreeSpectrum> {
    let dec = unitary_eig(u)?;
    let s = dec.len() as i64;
    Ok(FreeSpectrum::by_index(&dec, n_lo * s + 1, n_hi * s + s))
}

/// Windows `Delta_m = [b_m, b_{m+1})` with `b_m = (zeta0_{m-1} + zeta0_m) / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowPartition {
    pub m_lo: i64,
    /// `boundaries[i]` is the left end of `Delta_{m_lo + i}`; one extra right end.
    pub boundaries: Vec<f64>,
}

impl WindowPartition {
    pub fn new(dec: &UnitaryDecomposition, m_lo: i64, m_hi: i64) -> Self {
        let boundaries = (m_lo..=m_hi + 1)
            .map(|m| 0.5 * (free_eigenvalue(dec, m - 1) + free_eigenvalue(dec, m)))
            .collect();
        Self { m_lo, boundaries }
    }

    pub fn m_hi(&self) -> i64 {
        self.m_lo + self.boundaries.len() as i64 - 2
    }

    pub fn interval(&self, m: i64) -> (f64, f64) {
        let i = (m - self.m_lo) as usize;
        (self.boundaries[i], self.boundaries[i + 1])
    }

    /// Window containing `x`, if covered.
    pub fn locate(&self, x: f64) -> Option<i64> {
        let b = &self.boundaries;
        if x < b[0] || x >= b[b.len() - 1] {
            return None;
        }
        let i = b.partition_point(|&v| v <= x) - 1;
        Some(self.m_lo + i as i64)
    }

    pub fn lo(&self) -> f64 {
        self.boundaries[0]
    }

    pub fn hi(&self) -> f64 {
        *self.boundaries.last().unwrap()
    }
}

pub fn windows(u: &ComplexMatrix, m_lo: i64, m_hi: i64) -> Result<WindowPartition> {
    Ok(WindowPartition::new(&unitary_eig(u)?, m_lo, m_hi))
}

/// Real interval covered by the windows `|m| <= big_m` of `u`.
pub fn window_span(u: &ComplexMatrix, big_m: i64) -> Result<(f64, f64)> {
    let w = windows(u, -big_m, big_m)?;
    Ok((w.lo(), w.hi()))
}

/// Data grouped by window: for each `m` in `[-M, M]`, indices into `a.data`.
pub fn assign_windows(a: &SpectralData, part: &WindowPartition) -> Vec<Vec<usize>> {
    let count = (part.m_hi() - part.m_lo + 1) as usize;
    let mut groups = vec![Vec::new(); count];
    for (j, d) in a.data.iter().enumerate() {
        if let Some(m) = part.locate(d.lambda) {
            groups[(m - part.m_lo) as usize].push(j);
        }
    }
    groups
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccelerantOptions {
    /// Triangular damping of the outermost windows.
    pub fejer: bool,
    /// Fraction of windows (per side) that are damped.
    pub fejer_fraction: f64,
    /// Subtract fitted `1/n` and `1/n^2` asymptotics of the window moments
    /// and add back their full sums in closed form.
    pub tail_model: bool,
}

impl Default for AccelerantOptions {
    fn default() -> Self {
        Self {
            fejer: true,
            fejer_fraction: 0.2,
            tail_model: true,
        }
    }
}

/// Weight of window `m` in the truncated sum `|m| <= big_m`.
pub fn window_weight(m: i64, big_m: i64, opts: &AccelerantOptions) -> f64 {
    let a = m.abs();
    if a > big_m {
        return 0.0;
    }
    if !opts.fejer {
        return 1.0;
    }
    let flat = ((1.0 - opts.fejer_fraction) * big_m as f64).floor() as i64;
    if a <= flat {
        1.0
    } else {
        (big_m + 1 - a) as f64 / (big_m + 1 - flat) as f64
    }
}

/// `sum_{p >= 1} sin(2 pi p t) / p` on `[-1, 1]`; at `t = 0` the mean of the
/// one-sided limits, at `t = +-1` the limit from inside the interval.
fn sawtooth(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else if t > 0.0 {
        0.5 * PI * (1.0 - 2.0 * t)
    } else {
        -0.5 * PI * (1.0 + 2.0 * t)
    }
}

/// `sum_{p >= 1} cos(2 pi p t) / p^2`.
fn cosine2(t: f64) -> f64 {
    let u = t.rem_euclid(1.0);
    PI * PI * (u * u - u + 1.0 / 6.0)
}

/// `sum_{p >= 1} sin(2 pi p t) / p^2` (the Clausen function of `2 pi t`).
fn clausen2(t: f64) -> f64 {
    // reduce to theta in [-pi, pi]
    let theta = 2.0 * PI * (t - t.round());
    if theta == 0.0 {
        return 0.0;
    }
    let mut sum = theta - theta * theta.abs().ln();
    let x2 = (theta / (2.0 * PI)).powi(2);
    let mut power = theta;
    for k in 1..=40 {
        power *= x2;
        let kk = 2 * k;
        let zeta = match k {
            1 => PI.powi(2) / 6.0,
            2 => PI.powi(4) / 90.0,
            3 => PI.powi(6) / 945.0,
            4 => PI.powi(8) / 9450.0,
            _ => (1..=40).map(|j| (j as f64).powi(-kk)).sum(),
        };
        sum += 2.0 * zeta * power / (kk as f64 * (kk + 1) as f64);
    }
    sum
}

/// Asymptotics `y(p) ~ first / p + second / p^2` of a window moment on one side.
#[derive(Debug, Clone)]
struct SideFit {
    first: ComplexMatrix,
    second: ComplexMatrix,
}

/// Fitted tail of one eigenphase class. Window `m = n s + k` contributes
/// `e^{2 i zeta0_m t} (a_m + 2 i t b_m + (2 i t)^2 c_m / 2)` up to `O(p^-3)`, with
/// `a_m = sum A_j - P`, `b_m = sum A_j delta_j`, `c_m = sum A_j delta_j^2`, `p = |n|`.
/// Index 0 is the side `n > 0`, index 1 the side `n < 0`.
#[derive(Debug, Clone)]
struct TailTerm {
    gamma: f64,
    a: [SideFit; 2],
    b: [SideFit; 2],
    c: [ComplexMatrix; 2],
}

impl TailTerm {
    /// Model coefficients `[a, b, c]` of window `p` on `side`. Only the odd part of
    /// the `1/p` terms is modelled: an even part would be a logarithmic singularity.
    fn window(&self, side: usize, p: f64) -> [ComplexMatrix; 3] {
        let sign = if side == 0 { 0.5 } else { -0.5 };
        let order = |f: &[SideFit; 2]| {
            (&f[0].first - &f[1].first) * Complex64::new(sign / p, 0.0) + &f[side].second * Complex64::new(1.0 / (p * p), 0.0)
        };
        [order(&self.a), order(&self.b), &self.c[side] * Complex64::new(1.0 / (p * p), 0.0)]
    }

    /// Sum of [`TailTerm::window`] over all `n != 0`, as `[a, b, c]` coefficients at `t`.
    fn total(&self, t: f64, right: bool) -> [ComplexMatrix; 3] {
        let saw = if right && t == 0.0 { 0.5 * PI } else { sawtooth(t) };
        let (c2, s2) = (cosine2(t), clausen2(t));
        let order = |f: &[SideFit; 2]| {
            (&f[0].first - &f[1].first) * (CI * saw)
                + (&f[0].second + &f[1].second) * Complex64::new(c2, 0.0)
                + (&f[0].second - &f[1].second) * (CI * s2)
        };
        let c = (&self.c[0] + &self.c[1]) * Complex64::new(c2, 0.0) + (&self.c[0] - &self.c[1]) * (CI * s2);
        [order(&self.a), order(&self.b), c]
    }
}

/// `(A + 2 i t B + (2 i t)^2 C / 2) e^{2 i lambda t}`.
fn polynomial_term(coef: &[ComplexMatrix; 3], lambda: f64, t: f64) -> ComplexMatrix {
    let z = CI * 2.0 * t;
    (&coef[0] + &coef[1] * z + &coef[2] * (z * z * 0.5)) * (CI * 2.0 * lambda * t).exp()
}

/// Paired window sums, before any symmetrization.
struct PairedSum {
    terms: Vec<(f64, ComplexMatrix)>,
    /// Window models subtracted from the truncated sum (already weighted and negated).
    models: Vec<(f64, [ComplexMatrix; 3])>,
    tail: Vec<TailTerm>,
}

/// Least-squares coefficients `c_0, c_1, ...` of `y(p) ~ sum_i c_i p^-i` up to `degree`.
fn fit_inverse_powers(samples: &[(f64, ComplexMatrix)], degree: usize) -> Vec<ComplexMatrix> {
    let d = samples[0].1.nrows();
    let design = nalgebra::DMatrix::<f64>::from_fn(samples.len(), degree + 1, |i, k| samples[i].0.powi(-(k as i32)));
    let pinv = design.pseudo_inverse(1e-14).expect("pseudo-inverse of a real matrix");
    (0..=degree)
        .map(|k| {
            let mut c = ComplexMatrix::zeros(d, d);
            for (i, (_, y)) in samples.iter().enumerate() {
                c += y * Complex64::new(pinv[(k, i)], 0.0);
            }
            c
        })
        .collect()
}

/// Window moments `(a_m, b_m, c_m)`.
type Moments = [ComplexMatrix; 3];

/// Fits the tail over the outer half of the complete periods on each side;
/// empty when there are too few periods.
fn fit_tail(dec: &UnitaryDecomposition, part: &WindowPartition, moments: &[Moments], big_m: i64) -> Vec<TailTerm> {
    let s = dec.len() as i64;
    let p_max = big_m / s - 1;
    if p_max < 6 {
        return Vec::new();
    }
    let moment = |m: i64| &moments[(m - part.m_lo) as usize];
    (0..s)
        .map(|k| {
            let side = |sign: i64| {
                let mut a = Vec::new();
                let mut b = Vec::new();
                let mut c = ComplexMatrix::zeros(moments[0][0].nrows(), moments[0][0].nrows());
                let range = (p_max + 1) / 2..=p_max;
                let count = range.clone().count() as f64;
                for p in range {
                    let mm = moment(sign * p * s + k + 1);
                    let pf = p as f64;
                    a.push((pf, &mm[0] * Complex64::new(pf, 0.0)));
                    b.push((pf, &mm[1] * Complex64::new(pf, 0.0)));
                    c += &mm[2] * Complex64::new(pf * pf / count, 0.0);
                }
                let fa = fit_inverse_powers(&a, 1);
                let fb = fit_inverse_powers(&b, 1);
                (
                    SideFit {
                        first: fa[0].clone(),
                        second: fa[1].clone(),
                    },
                    SideFit {
                        first: fb[0].clone(),
                        second: fb[1].clone(),
                    },
                    c,
                )
            };
            let (ap, bp, cp) = side(1);
            let (an, bn, cn) = side(-1);
            TailTerm {
                gamma: dec.gammas[k as usize],
                a: [ap, an],
                b: [bp, bn],
                c: [cp, cn],
            }
        })
        .collect()
}

impl PairedSum {
    fn build(a: &SpectralData, dec: &UnitaryDecomposition, big_m: i64, opts: &AccelerantOptions) -> Result<Self> {
        let part = WindowPartition::new(dec, -big_m, big_m);
        if part.lo() < a.window.lo - 1e-12 || part.hi() > a.window.hi + 1e-12 {
            let m = if part.lo() < a.window.lo { -big_m } else { big_m };
            return Err(Error::WindowUnderflow { index: m });
        }
        let groups = assign_windows(a, &part);
        let s = dec.len() as i64;
        let d = 2 * a.r;
        let moments: Vec<Moments> = groups
            .iter()
            .enumerate()
            .map(|(i, group)| {
                let m = part.m_lo + i as i64;
                let centre = free_eigenvalue(dec, m);
                let mut out = [-free_projector(dec, m), ComplexMatrix::zeros(d, d), ComplexMatrix::zeros(d, d)];
                for &j in group {
                    let delta = a.data[j].lambda - centre;
                    out[0] += &a.data[j].a;
                    out[1] += &a.data[j].a * Complex64::new(delta, 0.0);
                    out[2] += &a.data[j].a * Complex64::new(delta * delta, 0.0);
                }
                out
            })
            .collect();
        let tail = if opts.tail_model {
            fit_tail(dec, &part, &moments, big_m)
        } else {
            Vec::new()
        };
        let mut terms = Vec::new();
        let mut models = Vec::new();
        for (i, group) in groups.iter().enumerate() {
            let m = part.m_lo + i as i64;
            let w = window_weight(m, big_m, opts);
            let wc = Complex64::new(w, 0.0);
            for &j in group {
                terms.push((a.data[j].lambda, &a.data[j].a * wc));
            }
            let zeta = free_eigenvalue(dec, m);
            terms.push((zeta, free_projector(dec, m) * (-wc)));
            let n = (m - 1).div_euclid(s);
            if n != 0 && !tail.is_empty() {
                let side = if n > 0 { 0 } else { 1 };
                let coef = tail[(m - 1).rem_euclid(s) as usize].window(side, n.abs() as f64);
                models.push((zeta, coef.map(|c| c * Complex64::new(-w, 0.0))));
            }
        }
        Ok(Self { terms, models, tail })
    }

    /// Value at `t`; `right` selects the right limit at the origin.
    fn eval(&self, t: f64, d: usize, right: bool) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(d, d);
        for (lambda, a) in &self.terms {
            out += a * (CI * 2.0 * lambda * t).exp();
        }
        for (lambda, coef) in &self.models {
            out += polynomial_term(coef, *lambda, t);
        }
        for term in &self.tail {
            out += polynomial_term(&term.total(t, right), term.gamma, t);
        }
        out
    }
}

/// Accelerant on `2n + 1` points together with its asymmetry before symmetrization.
pub fn accelerant_with_diagnostics(
    a: &SpectralData,
    u: &ComplexMatrix,
    n: usize,
    big_m: i64,
    opts: &AccelerantOptions,
) -> Result<(Accelerant, f64)> {
    let dec = unitary_eig(u)?;
    let d = 2 * a.r;
    let sum = PairedSum::build(a, &dec, big_m, opts)?;
    let mut h = Accelerant::from_fn(n, |t| sum.eval(t, d, false))?;
    let asym = h.symmetry_residual();
    h.symmetrize();
    if !sum.tail.is_empty() {
        let right = sum.eval(0.0, d, true);
        h.right_limit = Some(right);
    }
    Ok((h, asym))
}

/// The accelerant of the spectral data `a` relative to the free operator with
/// boundary matrix `u`, truncated to the windows `|m| <= big_m`.
pub fn accelerant_from_measure(
    a: &SpectralData,
    u: &ComplexMatrix,
    n: usize,
    big_m: i64,
    opts: &AccelerantOptions,
) -> Result<Accelerant> {
    Ok(accelerant_with_diagnostics(a, u, n, big_m, opts)?.0)
}

/// Operator-norm distance, on `L2((0,1))` discretized by the midpoint rule
/// with `grid` cells, between the paired (undamped) Gram sum of the data and
/// the convolution operator of `h`.
pub fn gram_kernel_check(a: &SpectralData, u: &ComplexMatrix, h: &Accelerant, big_m: i64, grid: usize) -> Result<f64> {
    let dec = unitary_eig(u)?;
    let d = 2 * a.r;
    let raw = PairedSum::build(
        a,
        &dec,
        big_m,
        &AccelerantOptions {
            fejer: false,
            tail_model: false,
            ..AccelerantOptions::default()
        },
    )?;
    // difference kernel sampled at x_k - x_l = (k - l) / grid
    let diffs: Vec<ComplexMatrix> = (-(grid as i64 - 1)..grid as i64)
        .map(|k| {
            let t = k as f64 / grid as f64;
            raw.eval(t, d, false) - h.eval(t)
        })
        .collect();
    let size = grid * d;
    let scale = Complex64::new(1.0 / grid as f64, 0.0);
    let mut op = ComplexMatrix::zeros(size, size);
    for k in 0..grid {
        for l in 0..grid {
            let block = &diffs[k + grid - 1 - l] * scale;
            op.view_mut((k * d, l * d), (d, d)).copy_from(&block);
        }
    }
    Ok(op_norm(&op))
}
