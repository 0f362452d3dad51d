//! Pauli-string expansion of spin-space matrices.
//!
//! Spin configurations are indexed with site 0 as the most significant bit and
//! `|up> = bit 0` (`Z = +1`). A string is stored as bit masks `(x, z)` with
//! `P = i^{|x & z|} X^x Z^z`, so `Y = iXZ` on every site where both are set.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct PauliMask {
    pub n_sites: usize,
    pub x: usize,
    pub z: usize,
}

impl PauliMask {
    pub fn parse(s: &str) -> Result<Self> {
        let n = s.len();
        if n == 0 || n > 30 {
            return Err(Error::InvalidPauli(s.to_string()));
        }
        let (mut x, mut z) = (0usize, 0usize);
        for (k, ch) in s.chars().enumerate() {
            let bit = 1usize << (n - 1 - k);
            match ch {
                'I' => {}
                'X' => x |= bit,
                'Z' => z |= bit,
                'Y' => {
                    x |= bit;
                    z |= bit;
                }
                _ => return Err(Error::InvalidPauli(s.to_string())),
            }
        }
        Ok(Self { n_sites: n, x, z })
    }

    pub fn label(&self) -> String {
        (0..self.n_sites)
            .map(|k| {
                let bit = 1usize << (self.n_sites - 1 - k);
                match (self.x & bit != 0, self.z & bit != 0) {
                    (false, false) => 'I',
                    (true, false) => 'X',
                    (true, true) => 'Y',
                    (false, true) => 'Z',
                }
            })
            .collect()
    }

    fn phase(&self) -> Complex64 {
        match (self.x & self.z).count_ones() % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    /// Nonzero entries as `(row, col, value)`, one per column.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        let ph = self.phase();
        (0..1usize << self.n_sites).map(move |c| {
            let sign = if (self.z & c).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            (c ^ self.x, c, ph * sign)
        })
    }

    pub fn matrix(&self) -> CMatrix {
        let d = 1usize << self.n_sites;
        let mut m = CMatrix::zeros(d, d);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
        }
        m
    }
}

pub fn pauli_matrix(label: &str) -> Result<CMatrix> {
    Ok(PauliMask::parse(label)?.matrix())
}

/// Label with the given letters placed on sites and `I` elsewhere.
pub fn site_string(n_sites: usize, placed: &[(usize, char)]) -> String {
    let mut s = vec!['I'; n_sites];
    for &(site, ch) in placed {
        s[site % n_sites] = ch;
    }
    s.into_iter().collect()
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PauliDecomposition {
    pub n_sites: usize,
    pub coefficients: BTreeMap<String, Complex64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliRecord {
    pub pauli: String,
    pub re: f64,
    pub im: f64,
}

impl PauliDecomposition {
    pub fn new(n_sites: usize) -> Self {
        Self {
            n_sites,
            coefficients: BTreeMap::new(),
        }
    }

    pub fn get(&self, label: &str) -> Complex64 {
        self.coefficients
            .get(label)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn re(&self, label: &str) -> f64 {
        self.get(label).re
    }

    pub fn add_term(&mut self, label: &str, c: Complex64) -> Result<()> {
        if label.len() != self.n_sites {
            return Err(Error::InvalidPauli(label.to_string()));
        }
        PauliMask::parse(label)?;
        *self
            .coefficients
            .entry(label.to_string())
            .or_insert(Complex64::new(0.0, 0.0)) += c;
        Ok(())
    }

    pub fn largest_imaginary(&self) -> f64 {
        self.coefficients.values().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    /// Largest coefficient difference over the union of both supports.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coefficients
            .keys()
            .chain(other.coefficients.keys())
            .map(|k| (self.get(k) - other.get(k)).norm())
            .fold(0.0, f64::max)
    }

    pub fn difference(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, &v) in &other.coefficients {
            *out.coefficients.entry(k.clone()).or_insert(Complex64::new(0.0, 0.0)) -= v;
        }
        out
    }

    pub fn reconstruct(&self) -> Result<CMatrix> {
        let d = 1usize << self.n_sites;
        let mut m = CMatrix::zeros(d, d);
        for (label, &c) in &self.coefficients {
            for (r, col, v) in PauliMask::parse(label)?.entries() {
                m[(r, col)] += c * v;
            }
        }
        Ok(m)
    }

    /// Records with `|c| > threshold`, sorted by label.
    pub fn records(&self, threshold: f64) -> Vec<PauliRecord> {
        self.coefficients
            .iter()
            .filter(|(_, c)| c.norm() > threshold)
            .map(|(k, c)| PauliRecord {
                pauli: k.clone(),
                re: c.re,
                im: c.im,
            })
            .collect()
    }

    pub fn significant(&self, threshold: f64) -> Vec<(String, Complex64)> {
        self.coefficients
            .iter()
            .filter(|(_, c)| c.norm() > threshold)
            .map(|(k, &c)| (k.clone(), c))
            .collect()
    }
}

/// `c_P = Tr(P H) / 2^n` for all `4^n` strings, through one Walsh-Hadamard
/// transform per `x` mask.
pub fn pauli_decompose(m: &CMatrix) -> Result<PauliDecomposition> {
    let d = m.nrows();
    if d != m.ncols() || d == 0 || !d.is_power_of_two() {
        return Err(Error::Dimension(format!(
            "Pauli decomposition needs a 2^n square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let n = d.trailing_zeros() as usize;
    let mut out = PauliDecomposition::new(n);
    let mut f = vec![Complex64::new(0.0, 0.0); d];
    for x in 0..d {
        for (c, fc) in f.iter_mut().enumerate() {
            *fc = m[(c, c ^ x)];
        }
        walsh_hadamard(&mut f);
        for (z, &g) in f.iter().enumerate() {
            if g == Complex64::new(0.0, 0.0) {
                continue;
            }
            let mask = PauliMask { n_sites: n, x, z };
            let c = mask.phase() * g / d as f64;
            out.coefficients.insert(mask.label(), c);
        }
    }
    Ok(out)
}

fn walsh_hadamard(f: &mut [Complex64]) {
    let mut h = 1;
    while h < f.len() {
        for i in (0..f.len()).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (f[j], f[j + h]);
                f[j] = a + b;
                f[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    fn trace_oracle(m: &CMatrix, label: &str) -> Complex64 {
        let p = pauli_matrix(label).unwrap();
        (&p * m).trace() / m.nrows() as f64
    }

    #[test]
    fn single_site_matrices() {
        let y = pauli_matrix("Y").unwrap();
        assert_eq!(y[(0, 1)], Complex64::new(0.0, -1.0));
        assert_eq!(y[(1, 0)], Complex64::new(0.0, 1.0));
        let z = pauli_matrix("Z").unwrap();
        assert_eq!(z[(0, 0)].re, 1.0);
        assert_eq!(z[(1, 1)].re, -1.0);
    }

    #[test]
    fn site_zero_is_most_significant() {
        let zi = pauli_matrix("ZI").unwrap();
        // |down up> = index 2 has Z_0 = -1
        assert_eq!(zi[(2, 2)].re, -1.0);
        assert_eq!(zi[(1, 1)].re, 1.0);
    }

    #[test]
    fn identity_and_zz() {
        let d = pauli_decompose(&CMatrix::identity(8, 8)).unwrap();
        assert_eq!(d.coefficients.len(), 1);
        assert_eq!(d.get("III"), Complex64::new(1.0, 0.0));
        let zz = pauli_decompose(&pauli_matrix("ZZ").unwrap()).unwrap();
        assert_eq!(zz.coefficients.len(), 1);
        assert_eq!(zz.re("ZZ"), 1.0);
    }

    #[test]
    fn matches_trace_oracle_on_dense_matrix() {
        let n = 3;
        let d = 1 << n;
        let m = CMatrix::from_fn(d, d, |r, c| {
            Complex64::new((r * 7 + c * 3) as f64 % 5.0 - 2.0, (r as f64 - c as f64) * 0.1)
        });
        let dec = pauli_decompose(&m).unwrap();
        for label in ["XYZ", "ZZI", "IYX", "YYY", "III", "XIZ"] {
            assert!((dec.get(label) - trace_oracle(&m, label)).norm() < 1e-12, "{label}");
        }
        assert!(max_abs(&(dec.reconstruct().unwrap() - &m)) < 1e-12);
    }

    #[test]
    fn invalid_labels() {
        assert!(PauliMask::parse("XQ").is_err());
        assert!(PauliMask::parse("").is_err());
        let mut d = PauliDecomposition::new(2);
        assert!(d.add_term("XXX", Complex64::new(1.0, 0.0)).is_err());
        assert!(pauli_decompose(&CMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn records_are_sorted() {
        let mut d = PauliDecomposition::new(2);
        d.add_term("ZZ", Complex64::new(1.0, 0.0)).unwrap();
        d.add_term("XX", Complex64::new(0.5, 0.0)).unwrap();
        let r = d.records(0.0);
        assert_eq!(r[0].pauli, "XX");
        assert_eq!(r[1].pauli, "ZZ");
        assert_eq!(site_string(3, &[(2, 'X'), (3, 'Z')]), "ZIX");
    }
}
