//! Lanczos iteration for the lowest eigenpairs of a Hermitian operator given
//! as a matrix-vector product. Full reorthogonalization; when the Krylov space
//! becomes invariant the iteration continues from a fresh random vector
//! orthogonal to everything seen so far.

use nalgebra::{ComplexField, DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct LanczosOptions {
    pub k: usize,
    pub max_iter: usize,
    /// Converged when `beta |y_last| <= tol * max(1, |theta|)`.
    pub tol: f64,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            k: 1,
            max_iter: 400,
            tol: 1e-10,
            seed: 0x7215,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LanczosResult<T> {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<T>>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

fn dot<T: ComplexField<RealField = f64> + Copy>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + x.conjugate() * *y)
}

fn norm<T: ComplexField<RealField = f64> + Copy>(a: &[T]) -> f64 {
    a.iter().map(|x| x.modulus_squared()).sum::<f64>().sqrt()
}

fn orthogonalize<T: ComplexField<RealField = f64> + Copy>(w: &mut [T], basis: &[Vec<T>]) {
    // twice is enough
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, w);
            for (wi, qi) in w.iter_mut().zip(q) {
                *wi -= c * *qi;
            }
        }
    }
}

fn random_unit<T: ComplexField<RealField = f64> + Copy>(dim: usize, rng: &mut ChaCha8Rng, basis: &[Vec<T>]) -> Option<Vec<T>> {
    for _ in 0..4 {
        let mut v: Vec<T> = (0..dim).map(|_| T::from_real(rng.random_range(-1.0..1.0))).collect();
        orthogonalize(&mut v, basis);
        let n = norm(&v);
        if n > 1e-8 {
            let s = T::from_real(1.0 / n);
            v.iter_mut().for_each(|x| *x *= s);
            return Some(v);
        }
    }
    None
}

/// Lowest `opts.k` eigenpairs of the operator `apply` (`y = H x`) on `dim` dimensions.
pub fn lanczos<T, F>(dim: usize, apply: F, opts: &LanczosOptions) -> Result<LanczosResult<T>>
where
    T: ComplexField<RealField = f64> + Copy,
    F: Fn(&[T], &mut [T]),
{
    if dim == 0 || opts.k == 0 || opts.k > dim {
        return Err(Error::Dimension(format!("k = {} for dimension {dim}", opts.k)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut q: Vec<Vec<T>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut v = random_unit(dim, &mut rng, &q).expect("nonzero dimension");
    let mut w = vec![T::zero(); dim];
    let max_iter = opts.max_iter.min(dim).max(opts.k);

    loop {
        apply(&v, &mut w);
        alpha.push(dot(&v, &w).real());
        q.push(v);
        orthogonalize(&mut w, &q);
        let b = norm(&w);
        let m = q.len();

        let t = DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &c| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[c]));

        let exhausted = m == dim;
        let restart = b <= 1e-12 * alpha.iter().fold(1.0f64, |s, a| s.max(a.abs()));
        let done = m >= opts.k && {
            order.iter().take(opts.k).all(|&j| {
                let res = if restart { 0.0 } else { b * eig.eigenvectors[(m - 1, j)].abs() };
                res <= opts.tol * eig.eigenvalues[j].abs().max(1.0)
            })
        };
        if exhausted || m >= max_iter || (done && !restart) {
            if !done && !exhausted {
                return Err(Error::Chain(format!(
                    "Lanczos did not converge in {m} iterations"
                )));
            }
            let mut values = Vec::new();
            let mut vectors = Vec::new();
            let mut residuals = Vec::new();
            for &j in order.iter().take(opts.k) {
                values.push(eig.eigenvalues[j]);
                residuals.push(if restart { 0.0 } else { b * eig.eigenvectors[(m - 1, j)].abs() });
                let mut x = vec![T::zero(); dim];
                for (i, qi) in q.iter().enumerate() {
                    let c = T::from_real(eig.eigenvectors[(i, j)]);
                    for (xe, qe) in x.iter_mut().zip(qi) {
                        *xe += c * *qe;
                    }
                }
                vectors.push(x);
            }
            return Ok(LanczosResult {
                values,
                vectors,
                residuals,
                iterations: m,
            });
        }
        if restart {
            beta.push(0.0);
            v = match random_unit(dim, &mut rng, &q) {
                Some(v) => v,
                None => return Err(Error::Chain("Krylov space exhausted".into())),
            };
        } else {
            beta.push(b);
            let s = T::from_real(1.0 / b);
            v = w.iter().map(|x| *x * s).collect();
        }
        w.iter_mut().for_each(|x| *x = T::zero());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn diagonal_operator() {
        let d: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin() * 3.0).collect();
        let mut sorted = d.clone();
        sorted.sort_by(f64::total_cmp);
        let r = lanczos(
            50,
            |x: &[f64], y: &mut [f64]| {
                for i in 0..50 {
                    y[i] = d[i] * x[i];
                }
            },
            &LanczosOptions { k: 3, ..Default::default() },
        )
        .unwrap();
        for i in 0..3 {
            assert!((r.values[i] - sorted[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn complex_hermitian_matches_dense() {
        let n = 40;
        let h = crate::linalg::CMatrix::from_fn(n, n, |i, j| {
            let a = (i * 7 + j * 3) as f64;
            let b = (j * 7 + i * 3) as f64;
            Complex64::new((a.sin() + b.sin()) / 2.0, (a.cos() - b.cos()) / 2.0)
        });
        let (w, _) = crate::linalg::eigh(&h).unwrap();
        let r = lanczos(
            n,
            |x: &[Complex64], y: &mut [Complex64]| {
                let xv = nalgebra::DVector::from_column_slice(x);
                y.copy_from_slice((&h * xv).as_slice());
            },
            &LanczosOptions { k: 2, ..Default::default() },
        )
        .unwrap();
        assert!((r.values[0] - w[0]).abs() < 1e-9);
        assert!((r.values[1] - w[1]).abs() < 1e-9);
    }

    #[test]
    fn degenerate_pair_is_found_after_restart() {
        // two decoupled identical blocks
        let r = lanczos(
            4,
            |x: &[f64], y: &mut [f64]| {
                y[0] = -x[0];
                y[1] = x[1];
                y[2] = -x[2];
                y[3] = x[3];
            },
            &LanczosOptions { k: 2, ..Default::default() },
        )
        .unwrap();
        assert!(r.values.iter().all(|v| (v + 1.0).abs() < 1e-12), "{:?}", r.values);
    }
}
