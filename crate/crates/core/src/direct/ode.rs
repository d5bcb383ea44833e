//! Fourth-order Magnus integrator for Dirac systems
//! `Y' = (zeta L + C(x)) Y` with `L = diag(iI, -iI)` and
//! `C = [[0, -ip], [ip^*, 0]]`.
//!
//! Both the operator on `[-1, 1]` (with `p = q`) and the auxiliary operator on
//! `[0, 1]` (with `p = V`) are of this form after multiplying `J Y' + Q Y =
//! zeta Y` by `J^{-1} = -J`.

use num_complex::Complex64;

use super::potential::SampledMatrixFunction;
use crate::matcore::{expm, ComplexMatrix, C0, CI};

const GAUSS_OFFSET: f64 = 0.288_675_134_594_812_9; // sqrt(3)/6

/// The generator `C(x)` for an `d x d` block `p`.
pub fn coupling(p: &ComplexMatrix) -> ComplexMatrix {
    let d = p.nrows();
    let mut c = ComplexMatrix::zeros(2 * d, 2 * d);
    for i in 0..d {
        for j in 0..d {
            c[(i, d + j)] = -CI * p[(i, j)];
            c[(d + i, j)] = CI * p[(j, i)].conj();
        }
    }
    c
}

/// `L = diag(iI_d, -iI_d)`.
pub fn lead(d: usize) -> ComplexMatrix {
    let mut l = ComplexMatrix::zeros(2 * d, 2 * d);
    for i in 0..d {
        l[(i, i)] = CI;
        l[(d + i, d + i)] = -CI;
    }
    l
}

fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

/// One Magnus step, stored so that its exponent is `zeta * slope + offset`.
#[derive(Debug, Clone)]
struct Step {
    slope: ComplexMatrix,
    offset: ComplexMatrix,
}

/// Precomputed Magnus steps along a path of grid nodes.
#[derive(Debug, Clone)]
pub struct DiracFlow {
    dim: usize,
    nodes: Vec<f64>,
    steps: Vec<Step>,
    substeps: usize,
}

impl DiracFlow {
    /// Flow from grid node `from` to grid node `to` of `p` (either direction),
    /// each grid interval split into `substeps` Magnus steps.
    pub fn new(p: &SampledMatrixFunction, from: usize, to: usize, substeps: usize) -> Self {
        let substeps = substeps.max(1);
        let d = p.dim();
        let l = lead(d);
        let forward = to >= from;
        let count = if forward { to - from } else { from - to };
        let mut nodes = Vec::with_capacity(count * substeps + 1);
        let mut steps = Vec::with_capacity(count * substeps);
        nodes.push(p.node(from));
        let w = GAUSS_OFFSET;
        for k in 0..count {
            let (a, b) = if forward {
                (p.node(from + k), p.node(from + k + 1))
            } else {
                (p.node(from - k), p.node(from - k - 1))
            };
            let h = (b - a) / substeps as f64;
            for s in 0..substeps {
                let x0 = a + s as f64 * h;
                let x1 = if s + 1 == substeps { b } else { x0 + h };
                let c1 = coupling(&p.eval(x0 + (0.5 - w) * h));
                let c2 = coupling(&p.eval(x0 + (0.5 + w) * h));
                let k2 = Complex64::new(3f64.sqrt() * h * h / 12.0, 0.0);
                let slope = &l * Complex64::new(h, 0.0) + commutator(&l, &(&c1 - &c2)) * k2;
                let offset = (&c1 + &c2) * Complex64::new(h / 2.0, 0.0) + commutator(&c2, &c1) * k2;
                steps.push(Step { slope, offset });
                nodes.push(x1);
            }
        }
        Self {
            dim: 2 * d,
            nodes,
            steps,
            substeps,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// All integrator nodes, including the substep nodes.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn substeps(&self) -> usize {
        self.substeps
    }

    fn propagator(&self, step: &Step, zeta: Complex64) -> ComplexMatrix {
        let mut omega = step.offset.clone();
        if zeta != C0 {
            omega += &step.slope * zeta;
        }
        expm(&omega)
    }

    /// Value at the final node for initial value `y0`.
    pub fn propagate(&self, zeta: Complex64, y0: &ComplexMatrix) -> ComplexMatrix {
        let mut y = y0.clone();
        for step in &self.steps {
            y = self.propagator(step, zeta) * y;
        }
        y
    }

    /// Values at every node (substep nodes included).
    pub fn trajectory(&self, zeta: Complex64, y0: &ComplexMatrix) -> Vec<ComplexMatrix> {
        let mut out = Vec::with_capacity(self.nodes.len());
        out.push(y0.clone());
        for step in &self.steps {
            let next = self.propagator(step, zeta) * out.last().unwrap();
            out.push(next);
        }
        out
    }
}

/// Composite Simpson weights for `n` equal intervals of width `h`; an odd
/// interval count closes with the 3/8 rule on the last three intervals.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; n + 1];
    match n {
        0 => return w,
        1 => {
            w[0] = h / 2.0;
            w[1] = h / 2.0;
            return w;
        }
        _ => {}
    }
    let (even_part, tail) = if n % 2 == 0 { (n, 0) } else { (n - 3, 3) };
    for i in (0..even_part).step_by(2) {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
    }
    if tail == 3 {
        let s = even_part;
        let c = 3.0 * h / 8.0;
        w[s] += c;
        w[s + 1] += 3.0 * c;
        w[s + 2] += 3.0 * c;
        w[s + 3] += c;
    }
    w
}
