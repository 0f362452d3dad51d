//! Dense complex helpers on top of nalgebra.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Spectral norm.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

pub fn condition_number(m: &CMatrix) -> f64 {
    let s = m.clone().singular_values();
    let min = s.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        s.max() / min
    }
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues ascending.
pub fn eigh(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "{}x{} is not square",
            m.nrows(),
            m.ncols()
        )));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), CMatrix::zeros(0, 0)));
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

/// `f(H)` for Hermitian `H`, through its eigenbasis.
pub fn hermitian_function(h: &CMatrix, f: impl Fn(f64) -> Complex64) -> Result<CMatrix> {
    let (w, v) = eigh(h)?;
    let mut scaled = v.clone();
    for (k, &e) in w.iter().enumerate() {
        let fk = f(e);
        for z in scaled.column_mut(k).iter_mut() {
            *z *= fk;
        }
    }
    Ok(&scaled * v.adjoint())
}

/// `exp(-i H t)`.
pub fn propagator(h: &CMatrix, t: f64) -> Result<CMatrix> {
    hermitian_function(h, |e| Complex64::from_polar(1.0, -e * t))
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eigh_sorts_ascending() {
        let m = CMatrix::from_row_slice(2, 2, &[c(3.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
        let (w, v) = eigh(&m).unwrap();
        assert_eq!(w, vec![-1.0, 3.0]);
        assert!((v[(1, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn propagator_of_pauli_y() {
        let y = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]);
        let t = 0.37;
        let u = propagator(&y, t).unwrap();
        // exp(-i t Y) = cos t I - i sin t Y
        let expect = CMatrix::from_row_slice(
            2,
            2,
            &[c(t.cos(), 0.0), c(-t.sin(), 0.0), c(t.sin(), 0.0), c(t.cos(), 0.0)],
        );
        assert!(max_abs(&(u - expect)) < 1e-14);
    }

    #[test]
    fn norms_and_hermiticity() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(2.0, 1.0), c(2.0, -1.0), c(0.0, 0.0)]);
        assert_eq!(hermitian_deviation(&m), 0.0);
        assert!((op_norm(&m) - 5f64.sqrt()).abs() < 1e-14);
        let k = kron(&identity(2), &m);
        assert_eq!(k.nrows(), 4);
        assert!((condition_number(&m) - 1.0).abs() < 1e-12);
    }
}
