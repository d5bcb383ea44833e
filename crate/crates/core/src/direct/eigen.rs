//! Real zeros of an analytic matrix family `s(zeta)`: points where the
//! smallest singular value vanishes.

use num_complex::Complex64;

use super::SolverOptions;
use crate::error::{Error, Result};
use crate::matcore::{general_eigenvalues, singular_values, ComplexMatrix};

/// A located zero with its kernel dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub zeta: f64,
    pub mult: usize,
}

struct Candidate {
    zeta: f64,
    mult: usize,
    lo: f64,
    hi: f64,
    from_pencil: bool,
}

/// Minimizes `f` on `[a, b]` starting from the interior point `x0` using
/// Brent's combination of golden-section and parabolic steps.
pub fn brent_minimize<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, x0: f64, tol: f64, max_iter: usize) -> (f64, f64) {
    const GOLD: f64 = 0.381_966_011_250_105_1;
    let (mut a, mut b) = (a.min(b), a.max(b));
    let mut x = x0.clamp(a, b);
    let mut fx = f(x);
    let (mut w, mut v) = (x, x);
    let (mut fw, mut fv) = (fx, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for _ in 0..max_iter {
        let xm = 0.5 * (a + b);
        let tol1 = tol + 1e-15 * x.abs();
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) || fx == 0.0 {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if p.abs() < (0.5 * q * etemp).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = GOLD * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx)
}

/// Finds all real zeros of `s` in `[lo, hi)`.
///
/// `s` is sampled with the given `step` (plus the `seeds`), local minima of
/// the smallest singular value are refined, and a linearized pencil at each
/// root looks for partners the scan could not separate.
pub fn find_roots<F: Fn(Complex64) -> ComplexMatrix>(
    s: &F,
    lo: f64,
    hi: f64,
    seeds: &[f64],
    step: f64,
    opts: &SolverOptions,
) -> Result<Vec<Root>> {
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidInput(format!("bad search window [{lo}, {hi})")));
    }
    let sigma_min = |z: f64| singular_values(&s(Complex64::new(z, 0.0)))[0];

    let start = lo - step;
    let end = hi + step;
    let count = ((end - start) / step).ceil() as usize;
    let mut points: Vec<f64> = (0..=count).map(|i| start + i as f64 * step).collect();
    points.extend(seeds.iter().copied().filter(|&z| z > start && z < end));
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    points.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
    let values: Vec<f64> = points.iter().map(|&z| sigma_min(z)).collect();

    let tol = 0.25 * opts.resolution;
    let mut candidates: Vec<Candidate> = Vec::new();
    for i in 1..points.len() - 1 {
        if !(values[i] <= values[i - 1] && values[i] <= values[i + 1]) {
            continue;
        }
        let (a, b) = (points[i - 1], points[i + 1]);
        let (z, _) = brent_minimize(|z| sigma_min(z).powi(2), a, b, points[i], tol, 200);
        let sv = singular_values(&s(Complex64::new(z, 0.0)));
        if sv[0] >= opts.tau_ker {
            continue;
        }
        let mult = sv.iter().filter(|&&v| v < opts.tau_ker).count();
        candidates.push(Candidate {
            zeta: z,
            mult,
            lo: a,
            hi: b,
            from_pencil: false,
        });
        for partner in pencil_partners(s, z, mult, a, b, opts) {
            let (zp, _) = brent_minimize(|z| sigma_min(z).powi(2), partner.0, partner.1, partner.2, tol, 200);
            let svp = singular_values(&s(Complex64::new(zp, 0.0)));
            if svp[0] < opts.tau_ker && (zp - z).abs() > opts.merge_tol {
                candidates.push(Candidate {
                    zeta: zp,
                    mult: svp.iter().filter(|&&v| v < opts.tau_ker).count(),
                    lo: partner.0,
                    hi: partner.1,
                    from_pencil: true,
                });
            }
        }
    }

    candidates.sort_by(|a, b| a.zeta.partial_cmp(&b.zeta).unwrap());
    let mut merged: Vec<Candidate> = Vec::new();
    for c in candidates {
        if let Some(last) = merged.last_mut() {
            if (c.zeta - last.zeta).abs() <= opts.merge_tol {
                let overlap = c.lo < last.hi && last.lo < c.hi;
                if !overlap && !c.from_pencil && !last.from_pencil {
                    return Err(Error::ScanTooCoarse { zeta: c.zeta });
                }
                if c.mult > last.mult {
                    *last = c;
                }
                continue;
            }
        }
        merged.push(c);
    }
    Ok(merged
        .into_iter()
        .filter(|c| c.zeta >= lo && c.zeta < hi)
        .map(|c| Root {
            zeta: c.zeta,
            mult: c.mult,
        })
        .collect())
}

/// Predicts further zeros near `z` from the eigenvalues of the linearization
/// `s(z) + mu s'(z)`; returns refinement brackets `(lo, hi, start)` inside `[a, b]`.
fn pencil_partners<F: Fn(Complex64) -> ComplexMatrix>(
    s: &F,
    z: f64,
    mult: usize,
    a: f64,
    b: f64,
    opts: &SolverOptions,
) -> Vec<(f64, f64, f64)> {
    let s0 = s(Complex64::new(z, 0.0));
    if mult >= s0.nrows() {
        return Vec::new();
    }
    let delta = 1e-6;
    let ds = (s(Complex64::new(z + delta, 0.0)) - s(Complex64::new(z - delta, 0.0))) / Complex64::new(2.0 * delta, 0.0);
    let Some(inv) = ds.try_inverse() else {
        return Vec::new();
    };
    let mut mus = general_eigenvalues(&(-(inv * s0)));
    mus.sort_by(|x, y| x.norm().partial_cmp(&y.norm()).unwrap());
    let mut out = Vec::new();
    for mu in mus.into_iter().skip(mult) {
        let shift = mu.re;
        if mu.im.abs() > 0.25 * shift.abs().max(opts.merge_tol) {
            continue;
        }
        let target = z + shift;
        if shift.abs() <= opts.merge_tol || target <= a || target >= b {
            continue;
        }
        let half = 0.5 * shift.abs();
        out.push(((target - half).max(a), (target + half).min(b), target));
    }
    out
}
