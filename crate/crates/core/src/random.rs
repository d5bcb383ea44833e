//! Seeded generators for unitary matrices, Hermitian matrices and smooth
//! test potentials.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::matcore::{hermitian_part, ComplexMatrix};

fn gaussian_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) / std::f64::consts::SQRT_2
    })
}

/// Haar-distributed unitary matrix (QR of a Ginibre matrix with phase fix).
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let z = gaussian_matrix(n, rng);
    let qr = z.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = DVector::from_fn(n, |i, _| {
        let d = r[(i, i)];
        if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        }
    });
    let mut out = q;
    for j in 0..n {
        let ph = phases[j];
        for i in 0..n {
            out[(i, j)] *= ph;
        }
    }
    out
}

/// Hermitian matrix from the Gaussian unitary ensemble.
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    hermitian_part(&gaussian_matrix(n, rng))
}

/// A smooth matrix-valued function on `[-1, 1]` built from a handful of
/// random low-order Fourier/polynomial modes.
#[derive(Debug, Clone)]
pub struct SmoothMatrixFunction {
    pub r: usize,
    /// `(kind, frequency, coefficient matrix)`
    modes: Vec<(u8, f64, ComplexMatrix)>,
}

impl SmoothMatrixFunction {
    /// Random smooth function with sup-norm roughly `amplitude`.
    pub fn random<R: Rng + ?Sized>(r: usize, amplitude: f64, rng: &mut R) -> Self {
        let mut modes = Vec::new();
        let count = 4;
        for k in 0..count {
            let kind = (k % 2) as u8;
            let freq = 0.5 + 1.5 * rng.random::<f64>();
            let c = gaussian_matrix(r, rng) * Complex64::new(amplitude / (count as f64), 0.0);
            modes.push((kind, freq, c));
        }
        Self { r, modes }
    }

    pub fn eval(&self, x: f64) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.r, self.r);
        for (kind, freq, c) in &self.modes {
            let w = match kind {
                0 => (freq * x + 0.3).cos(),
                _ => (freq * x).sin() + 0.5 * x * x,
            };
            out += c * Complex64::new(w, 0.0);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{identity, max_abs};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn haar_samples_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..6 {
            let u = haar_unitary(n, &mut rng);
            assert!(max_abs(&(u.adjoint() * &u - identity(n))) < 1e-13);
        }
    }

    #[test]
    fn seeded_generation_is_deterministic() {
        let a = haar_unitary(3, &mut ChaCha8Rng::seed_from_u64(42));
        let b = haar_unitary(3, &mut ChaCha8Rng::seed_from_u64(42));
        assert_eq!(a, b);
    }
}
