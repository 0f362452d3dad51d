//! Exact diagonalization of the derived spin models: spectra with degeneracy
//! clustering, the three-spin chain `H(Bx, Bz)` and its duality scan, the
//! chirality operator, and next-nearest-neighbour terms on zig-zag chains.
//!
//! Spin basis: site 0 is the most significant bit, bit 0 is spin up (`Z = +1`).

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closedform::Boundary;
use crate::error::{Error, Result};
use crate::hubbard::LatticeGraph;
use crate::lanczos::{lanczos, LanczosOptions};
use crate::linalg::{eigh, hermitian_deviation, CMatrix};
use crate::pauli::PauliDecomposition;
use crate::sparse::CsrMatrix;

/// Largest matrix accepted by [`diagonalize`].
pub const MAX_DIM: usize = 1 << 16;
/// Above this dimension only the lowest `k` levels are computed, by Lanczos.
pub const DENSE_DIM: usize = 1 << 14;
pub const CLUSTER_REL_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Sizes of consecutive clusters of `eigenvalues`.
    pub degeneracies: Vec<usize>,
    pub cluster_tolerance: f64,
    /// Columns for the lowest `k` levels, when requested.
    pub eigenvectors: Option<Vec<Vec<Complex64>>>,
}

impl SpectrumReport {
    pub fn ground_degeneracy(&self) -> usize {
        self.degeneracies.first().copied().unwrap_or(0)
    }

    /// `(energy, multiplicity)` per cluster, energy taken from the cluster's first member.
    pub fn levels(&self) -> Vec<(f64, usize)> {
        let mut out = Vec::new();
        let mut k = 0;
        for &d in &self.degeneracies {
            out.push((self.eigenvalues[k], d));
            k += d;
        }
        out
    }
}

pub fn cluster(values: &[f64], tol: f64) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    let mut start = f64::NAN;
    for &v in values {
        match out.last_mut() {
            Some(n) if v - start <= tol => *n += 1,
            _ => {
                out.push(1);
                start = v;
            }
        }
    }
    out
}

fn norm_estimate(h: &CMatrix) -> f64 {
    // max row sum bounds the spectral norm
    h.row_iter()
        .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Spectrum of a Hermitian matrix. `k = None` keeps every eigenvalue and no
/// vectors; `Some(k)` keeps the lowest `k` levels together with their vectors.
pub fn diagonalize(h: &CMatrix, k: Option<usize>) -> Result<SpectrumReport> {
    let n = h.nrows();
    if n != h.ncols() {
        return Err(Error::Dimension(format!("{}x{} is not square", n, h.ncols())));
    }
    if n == 0 {
        return Err(Error::EmptyBasis);
    }
    if n > MAX_DIM {
        return Err(Error::TooLarge(n));
    }
    let dev = hermitian_deviation(h);
    if dev > 1e-12 {
        return Err(Error::NotHermitian(dev));
    }
    let tol = CLUSTER_REL_TOL * norm_estimate(h);
    let keep = k.map(|k| k.min(n));

    let is_diag = (0..n).all(|r| (0..n).all(|c| r == c || h[(r, c)] == Complex64::new(0.0, 0.0)));
    if is_diag {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| h[(a, a)].re.total_cmp(&h[(b, b)].re));
        let take = keep.unwrap_or(n);
        let values: Vec<f64> = idx.iter().take(take).map(|&i| h[(i, i)].re).collect();
        let vectors = keep.map(|_| {
            idx.iter()
                .take(take)
                .map(|&i| {
                    let mut v = vec![Complex64::new(0.0, 0.0); n];
                    v[i] = Complex64::new(1.0, 0.0);
                    v
                })
                .collect()
        });
        return Ok(SpectrumReport {
            degeneracies: cluster(&values, tol),
            eigenvalues: values,
            cluster_tolerance: tol,
            eigenvectors: vectors,
        });
    }

    if n > DENSE_DIM {
        let k = keep.ok_or(Error::TooLarge(n))?;
        let r = lanczos(
            n,
            |x: &[Complex64], y: &mut [Complex64]| {
                let xv = nalgebra::DVector::from_column_slice(x);
                y.copy_from_slice((h * xv).as_slice());
            },
            &LanczosOptions { k, ..Default::default() },
        )?;
        return Ok(SpectrumReport {
            degeneracies: cluster(&r.values, tol),
            eigenvalues: r.values,
            cluster_tolerance: tol,
            eigenvectors: Some(r.vectors),
        });
    }

    let (mut w, v) = eigh(h)?;
    let vectors = keep.map(|k| (0..k).map(|c| v.column(c).iter().copied().collect()).collect());
    if let Some(k) = keep {
        w.truncate(k);
    }
    Ok(SpectrumReport {
        degeneracies: cluster(&w, tol),
        eigenvalues: w,
        cluster_tolerance: tol,
        eigenvectors: vectors,
    })
}

/// Bit of `site` in an `n`-site configuration index.
fn bit(n: usize, site: usize) -> usize {
    1 << (n - 1 - site)
}

fn z_value(n: usize, config: usize, site: usize) -> f64 {
    if config & bit(n, site) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Triples `(j, j+1, j+2)` present under `boundary`.
pub fn chain_triples(n: usize, boundary: Boundary) -> Vec<[usize; 3]> {
    match boundary {
        Boundary::Periodic if n >= 3 => (0..n).map(|j| [j, (j + 1) % n, (j + 2) % n]).collect(),
        _ => (0..n.saturating_sub(2)).map(|j| [j, j + 1, j + 2]).collect(),
    }
}

fn zzz_diagonal(n: usize, bz: f64, triples: &[[usize; 3]], config: usize) -> f64 {
    let mut e = 0.0;
    for j in 0..n {
        e -= bz * z_value(n, config, j);
    }
    for t in triples {
        e -= t.iter().map(|&s| z_value(n, config, s)).product::<f64>();
    }
    e
}

/// `H(Bx, Bz) = -sum_j (Bx X_j + Bz Z_j + Z_j Z_{j+1} Z_{j+2})` as a sparse real matrix.
pub fn zzz_chain(bx: f64, bz: f64, n: usize, boundary: Boundary) -> Result<CsrMatrix<f64>> {
    if n == 0 || n > 16 {
        return Err(Error::TooLarge(n));
    }
    let dim = 1usize << n;
    let triples = chain_triples(n, boundary);
    let mut t = Vec::with_capacity(dim * (n + 1));
    for c in 0..dim {
        t.push((c, c, zzz_diagonal(n, bz, &triples, c)));
        if bx != 0.0 {
            for j in 0..n {
                t.push((c ^ bit(n, j), c, -bx));
            }
        }
    }
    CsrMatrix::from_triplets(dim, dim, t)
}

/// Masks of the two commuting spin-flip symmetries of the `Bz = 0` chain:
/// sites with `j % 3` in `{0, 1}` and in `{1, 2}`.
pub fn flip_masks(n: usize) -> (usize, usize) {
    let mut m01 = 0;
    let mut m12 = 0;
    for j in 0..n {
        if j % 3 != 2 {
            m01 |= bit(n, j);
        }
        if j % 3 != 0 {
            m12 |= bit(n, j);
        }
    }
    (m01, m12)
}

/// `H(Bx, 0)` restricted to the sector where the flips `m01`, `m12` act as `s01`, `s12`.
#[derive(Clone, Debug)]
pub struct SectorOperator {
    pub n: usize,
    pub signs: (i8, i8),
    /// Orbit representatives (smallest member).
    pub reps: Vec<usize>,
    pub matrix: CsrMatrix<f64>,
}

pub fn zzz_sector(bx: f64, n: usize, boundary: Boundary, signs: (i8, i8)) -> Result<SectorOperator> {
    if n < 3 || n > 16 {
        return Err(Error::TooLarge(n));
    }
    let triples = chain_triples(n, boundary);
    let (m01, m12) = flip_masks(n);
    for t in &triples {
        for m in [m01, m12] {
            if t.iter().filter(|&&s| m & bit(n, s) != 0).count() % 2 != 0 {
                return Err(Error::Chain(format!(
                    "flip symmetry broken by {boundary:?} boundary at n = {n}"
                )));
            }
        }
    }
    let group = [(0usize, 1.0), (m01, signs.0 as f64), (m12, signs.1 as f64), (m01 ^ m12, (signs.0 * signs.1) as f64)];
    let dim = 1usize << n;
    let mut reps = Vec::new();
    let mut index: HashMap<usize, usize> = HashMap::new();
    for c in 0..dim {
        if group.iter().all(|&(g, _)| c ^ g >= c) {
            index.insert(c, reps.len());
            reps.push(c);
        }
    }
    let mut t = Vec::with_capacity(reps.len() * (n + 1));
    for (col, &r) in reps.iter().enumerate() {
        t.push((col, col, zzz_diagonal(n, 0.0, &triples, r)));
        if bx != 0.0 {
            for j in 0..n {
                let c = r ^ bit(n, j);
                let (rep, chi) = group
                    .iter()
                    .map(|&(g, chi)| (c ^ g, chi))
                    .min_by_key(|p| p.0)
                    .expect("group is non-empty");
                t.push((index[&rep], col, -bx * chi));
            }
        }
    }
    let size = reps.len();
    Ok(SectorOperator {
        n,
        signs,
        reps,
        matrix: CsrMatrix::from_triplets(size, size, t)?,
    })
}

pub const SECTORS: [(i8, i8); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

/// Lowest `k` eigenvalues of a real symmetric sparse matrix.
pub fn lowest_real(h: &CsrMatrix<f64>, k: usize) -> Result<Vec<f64>> {
    if h.is_diagonal() {
        let mut d = h.diagonal();
        d.sort_by(f64::total_cmp);
        d.truncate(k);
        return Ok(d);
    }
    let n = h.nrows();
    let r = lanczos(
        n,
        |x: &[f64], y: &mut [f64]| {
            for (r, yr) in y.iter_mut().enumerate() {
                *yr = h.row(r).map(|(c, v)| v * x[c]).sum();
            }
        },
        &LanczosOptions { k: k.min(n), ..Default::default() },
    )?;
    Ok(r.values)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainPoint {
    pub bx: f64,
    /// Overall ground energy.
    pub e0: f64,
    /// Second level of the symmetric sector.
    pub e1: f64,
    /// `e1 - e0` inside the symmetric sector.
    pub gap: f64,
    /// Number of sector ground levels within the cluster tolerance of `e0`.
    pub degeneracy0: usize,
    /// `|E0(Bx) - Bx E0(1/Bx)| / n`; absent at `Bx = 0`.
    pub duality: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualityScan {
    pub n: usize,
    pub boundary: Boundary,
    pub points: Vec<ChainPoint>,
    pub argmin: f64,
    pub min_gap: f64,
}

fn ground_energy(bx: f64, n: usize, boundary: Boundary) -> Result<f64> {
    let mut e = f64::INFINITY;
    for s in SECTORS {
        e = e.min(lowest_real(&zzz_sector(bx, n, boundary, s)?.matrix, 1)?[0]);
    }
    Ok(e)
}

pub fn chain_point(bx: f64, n: usize, boundary: Boundary) -> Result<ChainPoint> {
    let mut lows = Vec::new();
    let mut sym = Vec::new();
    for s in SECTORS {
        let op = zzz_sector(bx, n, boundary, s)?;
        let v = lowest_real(&op.matrix, 2)?;
        if s == (1, 1) {
            sym = v.clone();
        }
        lows.push(v[0]);
    }
    let e0 = lows.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = CLUSTER_REL_TOL * n as f64 * (bx.abs() + 1.0);
    let duality = if bx == 0.0 {
        None
    } else if bx == 1.0 {
        Some(0.0)
    } else {
        Some((e0 - bx * ground_energy(1.0 / bx, n, boundary)?).abs() / n as f64)
    };
    Ok(ChainPoint {
        bx,
        e0,
        e1: sym[1],
        gap: sym[1] - sym[0],
        degeneracy0: lows.iter().filter(|&&e| e - e0 <= tol).count(),
        duality,
    })
}

/// Symmetric-sector gap of `H(Bx, 0)` over `grid`, points in grid order.
pub fn duality_scan(grid: &[f64], n: usize, boundary: Boundary) -> Result<DualityScan> {
    if grid.is_empty() {
        return Err(Error::Chain("empty Bx grid".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|b| !b.is_finite()) {
        return Err(Error::Chain("Bx grid must be finite and increasing".into()));
    }
    let points = grid
        .par_iter()
        .map(|&bx| chain_point(bx, n, boundary))
        .collect::<Result<Vec<_>>>()?;
    let best = points
        .iter()
        .min_by(|a, b| a.gap.total_cmp(&b.gap))
        .expect("grid is non-empty");
    Ok(DualityScan {
        n,
        boundary,
        argmin: best.bx,
        min_gap: best.gap,
        points,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainConfig {
    pub n: usize,
    pub bx_min: f64,
    pub bx_max: f64,
    pub bx_step: f64,
    pub boundary: Boundary,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            n: 12,
            bx_min: 0.5,
            bx_max: 1.5,
            bx_step: 0.02,
            boundary: Boundary::Periodic,
        }
    }
}

impl ChainConfig {
    pub fn grid(&self) -> Result<Vec<f64>> {
        if !(self.bx_step > 0.0) || !(self.bx_max >= self.bx_min) {
            return Err(Error::Config("need bx_step > 0 and bx_max >= bx_min".into()));
        }
        let steps = ((self.bx_max - self.bx_min) / self.bx_step + 1e-9).floor() as usize;
        Ok((0..=steps).map(|k| self.bx_min + k as f64 * self.bx_step).collect())
    }
}

fn single(c: char) -> CMatrix {
    let (o, z, i) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0));
    let e = match c {
        'X' => [z, o, o, z],
        'Y' => [z, -i, i, z],
        'Z' => [o, z, z, -o],
        _ => [o, z, z, o],
    };
    CMatrix::from_row_slice(2, 2, &e)
}

fn placed(n: usize, ops: &[(usize, char)]) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    for s in 0..n {
        let c = ops.iter().find(|o| o.0 == s).map_or('I', |o| o.1);
        out = out.kronecker(&single(c));
    }
    out
}

/// `sum_triangles sigma_i . (sigma_j x sigma_k)` for oriented triples `(i, j, k)`.
pub fn chirality_operator(triangles: &[[usize; 3]], n: usize) -> Result<CMatrix> {
    if n > 12 {
        return Err(Error::TooLarge(n));
    }
    let dim = 1usize << n;
    let mut h = CMatrix::zeros(dim, dim);
    for t in triangles {
        if t.iter().any(|&s| s >= n) || t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
            return Err(Error::InvalidGeometry(format!("triangle {t:?} on {n} sites")));
        }
        for (a, b, c, sign) in [
            ('X', 'Y', 'Z', 1.0),
            ('Y', 'Z', 'X', 1.0),
            ('Z', 'X', 'Y', 1.0),
            ('X', 'Z', 'Y', -1.0),
            ('Z', 'Y', 'X', -1.0),
            ('Y', 'X', 'Z', -1.0),
        ] {
            h += placed(n, &[(t[0], a), (t[1], b), (t[2], c)]) * Complex64::new(sign, 0.0);
        }
    }
    Ok(h)
}

pub fn omega() -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0)
}

/// The two lowest chirality states of a counterclockwise triangle as printed:
/// `(|uud> + w|udu> + w^2|duu>)/sqrt3` and `-(|ddu> + w|dud> + w^2|udd>)/sqrt3`.
pub fn chirality_reference_states() -> [Vec<Complex64>; 2] {
    let w = omega();
    let s = 1.0 / 3f64.sqrt();
    let mut plus = vec![Complex64::new(0.0, 0.0); 8];
    plus[0b001] = Complex64::new(s, 0.0);
    plus[0b010] = w * s;
    plus[0b100] = w * w * s;
    let mut minus = vec![Complex64::new(0.0, 0.0); 8];
    minus[0b110] = Complex64::new(-s, 0.0);
    minus[0b101] = -w * s;
    minus[0b011] = -w * w * s;
    [plus, minus]
}

/// `|<ref|P|ref>|` where `P` projects onto the span of `vectors`.
pub fn subspace_overlap(reference: &[Complex64], vectors: &[Vec<Complex64>]) -> f64 {
    vectors
        .iter()
        .map(|v| v.iter().zip(reference).map(|(a, b)| a.conj() * b).sum::<Complex64>().norm_sqr())
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NnnTerm {
    pub pauli: String,
    pub sites: [usize; 2],
    pub coeff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NnnReport {
    /// All two-site strings on chain sites `i`, `i + 2`.
    pub terms: Vec<NnnTerm>,
    pub max_zz: f64,
    /// Largest `|c_XX| + |c_YY|` over distance-2 pairs.
    pub max_xx_yy: f64,
}

/// Two-site terms at chain distance 2, and the decomposition with the
/// distance-2 `ZZ` terms removed.
pub fn detect_nnn_terms(decomp: &PauliDecomposition, graph: &LatticeGraph) -> Result<(NnnReport, PauliDecomposition)> {
    if decomp.n_sites != graph.n_sites {
        return Err(Error::Dimension(format!(
            "decomposition on {} sites, graph on {}",
            decomp.n_sites, graph.n_sites
        )));
    }
    let mut terms = Vec::new();
    for (label, c) in &decomp.coefficients {
        let active: Vec<(usize, char)> = label.chars().enumerate().filter(|p| p.1 != 'I').collect();
        if active.len() == 2 && active[1].0 - active[0].0 == 2 {
            terms.push(NnnTerm {
                pauli: format!("{}{}", active[0].1, active[1].1),
                sites: [active[0].0, active[1].0],
                coeff: c.re,
            });
        }
    }
    let mut compensated = decomp.clone();
    for t in terms.iter().filter(|t| t.pauli == "ZZ") {
        compensated.coefficients.remove(&crate::pauli::site_string(
            decomp.n_sites,
            &[(t.sites[0], 'Z'), (t.sites[1], 'Z')],
        ));
    }
    let max_zz = terms.iter().filter(|t| t.pauli == "ZZ").map(|t| t.coeff.abs()).fold(0.0, f64::max);
    let mut xy: HashMap<[usize; 2], f64> = HashMap::new();
    for t in terms.iter().filter(|t| t.pauli == "XX" || t.pauli == "YY") {
        *xy.entry(t.sites).or_default() += t.coeff.abs();
    }
    let max_xx_yy = xy.values().copied().fold(0.0, f64::max);
    Ok((NnnReport { terms, max_zz, max_xx_yy }, compensated))
}
