//! Lattice geometries and the collisional / tunneling Hamiltonians.
//!
//! `H0 = sum_j [ U_uu n_u(n_u-1)/2 + U_dd n_d(n_d-1)/2 + U_ud n_u n_d ]` and
//! `V = -sum_links sum_sigma ( J a+_{from,sigma} a_{to,sigma} + h.c. )`.
//! A link's `J` multiplies the hop from `to` into `from`; the reverse hop
//! carries `conj(J)`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{transfer, Basis, Species, Statistics};
use crate::linalg::CMatrix;
use crate::sparse::CsrMatrix;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Geometry {
    Triangle,
    ZigzagChain { n: usize },
    TriangularPatch { rows: usize, cols: usize },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub link: usize,
    pub from: usize,
    pub to: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeGraph {
    pub n_sites: usize,
    pub edges: Vec<Edge>,
    pub geometry: Geometry,
}

pub fn make_graph(geometry: &Geometry) -> Result<LatticeGraph> {
    let (n_sites, pairs): (usize, Vec<(usize, usize)>) = match *geometry {
        Geometry::Triangle => (3, vec![(0, 1), (1, 2), (2, 0)]),
        Geometry::ZigzagChain { n } => {
            if n < 3 {
                return Err(Error::InvalidGeometry(format!(
                    "zig-zag chain needs at least 3 sites, got {n}"
                )));
            }
            let mut p: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
            p.extend((0..n - 2).map(|i| (i, i + 2)));
            (n, p)
        }
        Geometry::TriangularPatch { rows, cols } => {
            if rows < 2 || cols < 2 {
                return Err(Error::InvalidGeometry(format!(
                    "triangular patch needs at least 2x2 sites, got {rows}x{cols}"
                )));
            }
            let id = |r: usize, c: usize| r * cols + c;
            let mut p = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    if c + 1 < cols {
                        p.push((id(r, c), id(r, c + 1)));
                    }
                    if r + 1 < rows {
                        p.push((id(r, c), id(r + 1, c)));
                        if c + 1 < cols {
                            p.push((id(r, c), id(r + 1, c + 1)));
                        }
                    }
                }
            }
            (rows * cols, p)
        }
    };
    let edges = pairs
        .into_iter()
        .enumerate()
        .map(|(link, (from, to))| Edge { link, from, to })
        .collect();
    Ok(LatticeGraph {
        n_sites,
        edges,
        geometry: geometry.clone(),
    })
}

impl LatticeGraph {
    pub fn n_links(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, site: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|e| {
                if e.from == site {
                    Some(e.to)
                } else if e.to == site {
                    Some(e.from)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Elementary triangles with counterclockwise vertex order where the
    /// geometry defines one.
    pub fn triangles(&self) -> Vec<[usize; 3]> {
        match self.geometry {
            Geometry::Triangle => vec![[0, 1, 2]],
            Geometry::ZigzagChain { n } => (0..n - 2).map(|i| [i, i + 1, i + 2]).collect(),
            Geometry::TriangularPatch { rows, cols } => {
                let id = |r: usize, c: usize| r * cols + c;
                let mut t = Vec::new();
                for r in 0..rows - 1 {
                    for c in 0..cols - 1 {
                        t.push([id(r, c), id(r, c + 1), id(r + 1, c + 1)]);
                        t.push([id(r, c), id(r + 1, c + 1), id(r + 1, c)]);
                    }
                }
                t
            }
        }
    }

    /// Zig-zag links joining `i` and `i+2`.
    pub fn is_longitudinal(&self, link: usize) -> bool {
        matches!(self.geometry, Geometry::ZigzagChain { .. })
            && self
                .edges
                .get(link)
                .is_some_and(|e| e.from.abs_diff(e.to) == 2)
    }
}

mod energy {
    use serde::{Deserialize, Deserializer, Serializer};

    // `null` in JSON stands for an infinite interaction.
    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_none()
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HubbardParams {
    #[serde(with = "energy")]
    pub u_upup: f64,
    #[serde(with = "energy")]
    pub u_dndn: f64,
    #[serde(with = "energy")]
    pub u_updn: f64,
    /// `link -> [J_up, J_down]`; absent entries are zero.
    #[serde(default)]
    pub tunneling: BTreeMap<usize, [Complex64; 2]>,
}

impl HubbardParams {
    pub fn new(u_upup: f64, u_dndn: f64, u_updn: f64) -> Self {
        Self {
            u_upup,
            u_dndn,
            u_updn,
            tunneling: BTreeMap::new(),
        }
    }

    pub fn equal_u(u: f64) -> Self {
        Self::new(u, u, u)
    }

    /// Same-species channels closed by exclusion.
    pub fn fermionic(u_updn: f64) -> Self {
        Self::new(f64::INFINITY, f64::INFINITY, u_updn)
    }

    pub fn u(&self, a: Species, b: Species) -> f64 {
        match (a, b) {
            (Species::Up, Species::Up) => self.u_upup,
            (Species::Down, Species::Down) => self.u_dndn,
            _ => self.u_updn,
        }
    }

    pub fn j(&self, link: usize, species: Species) -> Complex64 {
        self.tunneling
            .get(&link)
            .map_or(Complex64::new(0.0, 0.0), |js| js[species.index()])
    }

    pub fn set_j(&mut self, link: usize, species: Species, j: Complex64) {
        self.tunneling
            .entry(link)
            .or_insert([Complex64::new(0.0, 0.0); 2])[species.index()] = j;
    }

    pub fn with_j(mut self, link: usize, species: Species, j: Complex64) -> Self {
        self.set_j(link, species, j);
        self
    }

    pub fn with_uniform_j(mut self, n_links: usize, up: Complex64, down: Complex64) -> Self {
        for l in 0..n_links {
            self.tunneling.insert(l, [up, down]);
        }
        self
    }

    pub fn with_real_j(mut self, up: &[f64], down: &[f64]) -> Self {
        for (l, (&a, &b)) in up.iter().zip(down).enumerate() {
            self.tunneling
                .insert(l, [Complex64::new(a, 0.0), Complex64::new(b, 0.0)]);
        }
        self
    }

    /// Exchange the roles of the two species in both `U` and `J`.
    pub fn swapped_species(&self) -> Self {
        Self {
            u_upup: self.u_dndn,
            u_dndn: self.u_upup,
            u_updn: self.u_updn,
            tunneling: self
                .tunneling
                .iter()
                .map(|(&l, &[a, b])| (l, [b, a]))
                .collect(),
        }
    }

    pub fn scaled_j(&self, s: f64) -> Self {
        let mut out = self.clone();
        for js in out.tunneling.values_mut() {
            js[0] *= s;
            js[1] *= s;
        }
        out
    }

    pub fn max_abs_j(&self) -> f64 {
        self.tunneling
            .values()
            .flat_map(|js| js.iter().map(|j| j.norm()))
            .fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        self.tunneling.values().flatten().all(|j| j.im == 0.0)
    }

    /// Smallest finite `|U|` among the three channels.
    pub fn min_abs_u(&self) -> f64 {
        [self.u_upup, self.u_dndn, self.u_updn]
            .into_iter()
            .filter(|u| u.is_finite())
            .map(f64::abs)
            .fold(f64::INFINITY, f64::min)
    }

    fn check(&self) -> Result<()> {
        for (name, u) in [
            ("u_upup", self.u_upup),
            ("u_dndn", self.u_dndn),
            ("u_updn", self.u_updn),
        ] {
            if u.is_nan() || u == f64::NEG_INFINITY {
                return Err(Error::InvalidInteraction(format!("{name} = {u}")));
            }
        }
        if let Some(j) = self
            .tunneling
            .values()
            .flatten()
            .find(|j| !(j.re.is_finite() && j.im.is_finite()))
        {
            return Err(Error::InvalidInteraction(format!("non-finite tunneling {j}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    pub matrix: CsrMatrix<Complex64>,
    pub hermitian: bool,
}

impl SparseOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.matrix.get(r, c)
    }

    pub fn to_dense(&self) -> CMatrix {
        self.matrix.to_dense()
    }

    pub fn diagonal_re(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            matrix: self.matrix.add(&other.matrix)?,
            hermitian: self.hermitian && other.hermitian,
        })
    }
}

pub fn build_h0(basis: &Basis, params: &HubbardParams) -> Result<SparseOperator> {
    params.check()?;
    let fermion = basis.statistics() == Statistics::Fermion;
    let mut diag = Vec::with_capacity(basis.dim());
    for state in basis.states() {
        let mut e = 0.0;
        for &[a, b] in state.occupations() {
            let (a, b) = (a as f64, b as f64);
            let mut add = |u: f64, weight: f64| -> Result<()> {
                if weight != 0.0 {
                    if u.is_infinite() {
                        return Err(Error::InfiniteEnergy);
                    }
                    e += u * weight;
                }
                Ok(())
            };
            if !fermion {
                add(params.u_upup, 0.5 * a * (a - 1.0))?;
                add(params.u_dndn, 0.5 * b * (b - 1.0))?;
            }
            add(params.u_updn, a * b)?;
        }
        diag.push(Complex64::new(e, 0.0));
    }
    Ok(SparseOperator {
        matrix: CsrMatrix::from_diagonal(&diag),
        hermitian: true,
    })
}

/// `coeff * a+_create a_annihilate`; the Hermitian conjugate is added by [`build_hopping`].
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct HopTerm {
    pub create: (usize, Species),
    pub annihilate: (usize, Species),
    pub coeff: Complex64,
}

/// `sum_terms (coeff a+ a + h.c.)`. Transitions that leave the basis are dropped.
pub fn build_hopping(basis: &Basis, terms: &[HopTerm]) -> Result<SparseOperator> {
    let n = basis.n_sites();
    for t in terms {
        for site in [t.create.0, t.annihilate.0] {
            if site >= n {
                return Err(Error::SiteOutOfRange { site, n_sites: n });
            }
        }
    }
    let order = basis.mode_order();
    let chunks: Vec<Vec<(usize, usize, Complex64)>> = (0..basis.dim())
        .into_par_iter()
        .map(|i| {
            let state = basis.state(i);
            let mut out = Vec::new();
            for t in terms {
                if t.coeff == Complex64::new(0.0, 0.0) {
                    continue;
                }
                if let Some((target, amp)) = transfer(state, t.annihilate, t.create, order)
                    .expect("sites checked above")
                {
                    if let Some(k) = basis.index_of(&target) {
                        let z = t.coeff * amp;
                        out.push((k, i, z));
                        out.push((i, k, z.conj()));
                    }
                }
            }
            out
        })
        .collect();
    let triplets = chunks.into_iter().flatten().collect();
    Ok(SparseOperator {
        matrix: CsrMatrix::from_triplets(basis.dim(), basis.dim(), triplets)?,
        hermitian: true,
    })
}

pub fn tunneling_terms(graph: &LatticeGraph, params: &HubbardParams) -> Result<Vec<HopTerm>> {
    if let Some(&link) = params.tunneling.keys().find(|&&l| l >= graph.n_links()) {
        return Err(Error::UnknownLink(link));
    }
    let mut terms = Vec::new();
    for e in &graph.edges {
        for sp in Species::ALL {
            let j = params.j(e.link, sp);
            if j != Complex64::new(0.0, 0.0) {
                terms.push(HopTerm {
                    create: (e.from, sp),
                    annihilate: (e.to, sp),
                    coeff: -j,
                });
            }
        }
    }
    Ok(terms)
}

pub fn build_v(basis: &Basis, graph: &LatticeGraph, params: &HubbardParams) -> Result<SparseOperator> {
    params.check()?;
    if graph.n_sites != basis.n_sites() {
        return Err(Error::Dimension(format!(
            "graph has {} sites, basis has {}",
            graph.n_sites,
            basis.n_sites()
        )));
    }
    build_hopping(basis, &tunneling_terms(graph, params)?)
}

/// Indices of the states with exactly one atom per site.
pub fn projector_m(basis: &Basis) -> Result<Vec<usize>> {
    let total = basis.sector().total_atoms() as usize;
    if total != basis.n_sites() {
        return Err(Error::NoSingleOccupancy(format!(
            "{total} atoms on {} sites",
            basis.n_sites()
        )));
    }
    let m: Vec<usize> = (0..basis.dim())
        .filter(|&k| basis.state(k).is_singly_occupied())
        .collect();
    if m.is_empty() {
        return Err(Error::NoSingleOccupancy("no singly occupied state in sector".into()));
    }
    Ok(m)
}

pub fn number_operator(basis: &Basis, site: usize, species: Species) -> Result<SparseOperator> {
    if site >= basis.n_sites() {
        return Err(Error::SiteOutOfRange {
            site,
            n_sites: basis.n_sites(),
        });
    }
    let diag: Vec<Complex64> = basis
        .states()
        .iter()
        .map(|s| Complex64::new(s.count(site, species) as f64, 0.0))
        .collect();
    Ok(SparseOperator {
        matrix: CsrMatrix::from_diagonal(&diag),
        hermitian: true,
    })
}

pub fn species_number_operator(basis: &Basis, species: Species) -> SparseOperator {
    let diag: Vec<Complex64> = basis
        .states()
        .iter()
        .map(|s| Complex64::new(s.total(species) as f64, 0.0))
        .collect();
    SparseOperator {
        matrix: CsrMatrix::from_diagonal(&diag),
        hermitian: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{enumerate_basis, FockState, SectorSpec};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn edge_set(g: &LatticeGraph) -> Vec<(usize, usize)> {
        let mut s: Vec<_> = g
            .edges
            .iter()
            .map(|e| (e.from.min(e.to), e.from.max(e.to)))
            .collect();
        s.sort_unstable();
        s
    }

    #[test]
    fn triangle_edges() {
        let g = make_graph(&Geometry::Triangle).unwrap();
        let e: Vec<_> = g.edges.iter().map(|e| (e.link, e.from, e.to)).collect();
        assert_eq!(e, vec![(0, 0, 1), (1, 1, 2), (2, 2, 0)]);
    }

    #[test]
    fn zigzag_edges() {
        let g = make_graph(&Geometry::ZigzagChain { n: 4 }).unwrap();
        assert_eq!(edge_set(&g), vec![(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)]);
        let t = make_graph(&Geometry::ZigzagChain { n: 3 }).unwrap();
        let tri = make_graph(&Geometry::Triangle).unwrap();
        assert_eq!(edge_set(&t), edge_set(&tri));
        assert!(make_graph(&Geometry::ZigzagChain { n: 2 }).is_err());
        assert!(g.is_longitudinal(3) && !g.is_longitudinal(0));
    }

    #[test]
    fn patch_interior_site_has_six_neighbours() {
        let g = make_graph(&Geometry::TriangularPatch { rows: 3, cols: 3 }).unwrap();
        assert_eq!(g.neighbors(4).len(), 6);
        assert_eq!(g.triangles().len(), 8);
    }

    #[test]
    fn h0_examples() {
        let p = HubbardParams::new(1.0, 1.3, 0.7);
        let b = enumerate_basis(1, Statistics::Boson, SectorSpec::fixed(2, 1)).unwrap();
        let h0 = build_h0(&b, &p).unwrap();
        assert!((h0.get(0, 0).re - (1.0 + 2.0 * 0.7)).abs() < 1e-15);
        let b = enumerate_basis(1, Statistics::Boson, SectorSpec::fixed(3, 0)).unwrap();
        assert!((build_h0(&b, &p).unwrap().get(0, 0).re - 3.0).abs() < 1e-15);
        let b = enumerate_basis(1, Statistics::Boson, SectorSpec::fixed(1, 0)).unwrap();
        assert_eq!(build_h0(&b, &p).unwrap().get(0, 0).re, 0.0);
    }

    #[test]
    fn infinite_same_species_u_in_bosonic_basis_is_an_error() {
        let b = enumerate_basis(2, Statistics::Boson, SectorSpec::total(2)).unwrap();
        assert!(matches!(
            build_h0(&b, &HubbardParams::fermionic(1.0)),
            Err(Error::InfiniteEnergy)
        ));
        let f = enumerate_basis(2, Statistics::Fermion, SectorSpec::total(2)).unwrap();
        assert!(build_h0(&f, &HubbardParams::fermionic(1.0)).is_ok());
    }

    #[test]
    fn single_particle_hopping_matrix() {
        let g = make_graph(&Geometry::ZigzagChain { n: 3 }).unwrap();
        // two-site sub-problem: only link 0 active
        let b = enumerate_basis(3, Statistics::Boson, SectorSpec::fixed(1, 0)).unwrap();
        let p = HubbardParams::equal_u(1.0).with_j(0, Species::Up, c(0.3));
        let v = build_v(&b, &g, &p).unwrap();
        let s0 = b.index_of(&FockState::new(vec![[1, 0], [0, 0], [0, 0]], Statistics::Boson).unwrap()).unwrap();
        let s1 = b.index_of(&FockState::new(vec![[0, 0], [1, 0], [0, 0]], Statistics::Boson).unwrap()).unwrap();
        assert_eq!(v.get(s0, s1), c(-0.3));
        assert_eq!(v.get(s1, s0), c(-0.3));
        assert_eq!(v.matrix.nnz(), 2);
    }

    #[test]
    fn double_occupancy_amplitude() {
        let g = make_graph(&Geometry::ZigzagChain { n: 3 }).unwrap();
        let b = enumerate_basis(3, Statistics::Boson, SectorSpec::fixed(2, 0)).unwrap();
        let p = HubbardParams::equal_u(1.0).with_j(0, Species::Up, c(0.2));
        let v = build_v(&b, &g, &p).unwrap();
        let st = |o: Vec<[u16; 2]>| b.index_of(&FockState::new(o, Statistics::Boson).unwrap()).unwrap();
        let z = v.get(st(vec![[1, 0], [1, 0], [0, 0]]), st(vec![[2, 0], [0, 0], [0, 0]]));
        assert!((z.re + 0.2 * 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn complex_j_orientation() {
        let g = make_graph(&Geometry::Triangle).unwrap();
        let b = enumerate_basis(3, Statistics::Boson, SectorSpec::fixed(1, 0)).unwrap();
        let j = Complex64::new(0.0, 0.1);
        let p = HubbardParams::equal_u(1.0).with_j(0, Species::Up, j);
        let v = build_v(&b, &g, &p).unwrap();
        let st = |o: Vec<[u16; 2]>| b.index_of(&FockState::new(o, Statistics::Boson).unwrap()).unwrap();
        // J multiplies a+_0 a_1
        let from0 = st(vec![[1, 0], [0, 0], [0, 0]]);
        let from1 = st(vec![[0, 0], [1, 0], [0, 0]]);
        assert_eq!(v.get(from0, from1), -j);
        assert_eq!(v.get(from1, from0), -j.conj());
    }

    #[test]
    fn unknown_link_is_an_error() {
        let g = make_graph(&Geometry::Triangle).unwrap();
        let b = enumerate_basis(3, Statistics::Boson, SectorSpec::total(3)).unwrap();
        let p = HubbardParams::equal_u(1.0).with_j(7, Species::Up, c(0.1));
        assert!(matches!(build_v(&b, &g, &p), Err(Error::UnknownLink(7))));
    }

    #[test]
    fn zero_j_gives_zero_operator() {
        let g = make_graph(&Geometry::Triangle).unwrap();
        let b = enumerate_basis(3, Statistics::Boson, SectorSpec::total(3)).unwrap();
        let v = build_v(&b, &g, &HubbardParams::equal_u(1.0)).unwrap();
        assert_eq!(v.matrix.nnz(), 0);
    }

    #[test]
    fn model_space_sizes() {
        let b = enumerate_basis(3, Statistics::Boson, SectorSpec::total(3)).unwrap();
        assert_eq!(projector_m(&b).unwrap().len(), 8);
        let f = enumerate_basis(3, Statistics::Fermion, SectorSpec::total(3)).unwrap();
        assert_eq!(projector_m(&f).unwrap().len(), 8);
        let two = enumerate_basis(2, Statistics::Fermion, SectorSpec::fixed(1, 1)).unwrap();
        assert_eq!(projector_m(&two).unwrap().len(), 2);
        let bad = enumerate_basis(3, Statistics::Boson, SectorSpec::total(2)).unwrap();
        assert!(matches!(projector_m(&bad), Err(Error::NoSingleOccupancy(_))));
    }

    #[test]
    fn params_json_round_trip_with_infinite_u() {
        let p = HubbardParams::fermionic(1.0).with_j(1, Species::Down, Complex64::new(0.0, -0.2));
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("null"));
        let q: HubbardParams = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
    }
}
