//! Second- and third-order effective Hamiltonians on the single-occupancy
//! subspace `M`:
//!
//! `H2_ab = -sum_g V_ag V_gb / E_g`,
//! `H3_ab = +sum_gd V_ag V_gd V_db / (E_g E_d)`,
//!
//! with `g, d` outside `M` and `E` the diagonal of `H0`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{enumerate_basis, Basis, SectorSpec, Species, Statistics};
use crate::hubbard::{build_h0, build_v, projector_m, HubbardParams, LatticeGraph, SparseOperator};
use crate::linalg::{eigh, hermitian_function, op_norm, propagator, CMatrix};
use crate::pauli::{pauli_decompose, PauliDecomposition};

/// Correspondence between `M` (basis positions) and spin configurations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelSpace {
    n_sites: usize,
    indices: Vec<usize>,
    spins: Vec<usize>,
}

impl ModelSpace {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn spin_dim(&self) -> usize {
        1 << self.n_sites
    }

    /// Basis positions of the `M` states.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Spin configuration of each `M` state, aligned with [`Self::indices`].
    pub fn spins(&self) -> &[usize] {
        &self.spins
    }

    /// True when `M` covers every spin configuration.
    pub fn is_complete(&self) -> bool {
        self.len() == self.spin_dim()
    }

    /// Place an `|M| x |M|` block into the full spin space, zero elsewhere.
    pub fn embed(&self, block: &CMatrix) -> CMatrix {
        let d = self.spin_dim();
        let mut out = CMatrix::zeros(d, d);
        for (a, &sa) in self.spins.iter().enumerate() {
            for (b, &sb) in self.spins.iter().enumerate() {
                out[(sa, sb)] = block[(a, b)];
            }
        }
        out
    }

    /// Inverse of [`Self::embed`].
    pub fn restrict(&self, spin: &CMatrix) -> CMatrix {
        let k = self.len();
        CMatrix::from_fn(k, k, |a, b| spin[(self.spins[a], self.spins[b])])
    }
}

/// Spin configuration index of a singly occupied state: site 0 is the most
/// significant bit, `up -> 0`, `down -> 1`.
pub fn spin_map(basis: &Basis, m: &[usize]) -> Result<ModelSpace> {
    let n = basis.n_sites();
    if n > 24 {
        return Err(Error::TooLarge(1 << n.min(63)));
    }
    let mut spins = Vec::with_capacity(m.len());
    let mut seen = vec![false; 1 << n];
    for &k in m {
        if k >= basis.dim() {
            return Err(Error::SpinMap(format!("index {k} outside basis")));
        }
        let state = basis.state(k);
        let mut s = 0usize;
        for site in 0..n {
            let bit = match state.spin_at(site) {
                Some(Species::Up) => 0,
                Some(Species::Down) => 1,
                None => return Err(Error::SpinMap(format!("{state} is not singly occupied"))),
            };
            s = (s << 1) | bit;
        }
        if seen[s] {
            return Err(Error::SpinMap(format!("{state} listed twice")));
        }
        seen[s] = true;
        spins.push(s);
    }
    if spins.is_empty() {
        return Err(Error::SpinMap("empty model space".into()));
    }
    Ok(ModelSpace {
        n_sites: n,
        indices: m.to_vec(),
        spins,
    })
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    Second,
    Third,
    SecondAndThird,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Perturbative,
    Adiabatic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveHamiltonian {
    /// `2^n x 2^n` in spin space.
    pub matrix: CMatrix,
    pub order: Order,
    pub provenance: Provenance,
}

/// Second- and third-order blocks on `M`, in the order of `space.indices()`.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbativeBlocks {
    pub second: CMatrix,
    pub third: CMatrix,
}

fn check_inputs(h0: &SparseOperator, v: &SparseOperator, space: &ModelSpace) -> Result<(Vec<f64>, Vec<bool>)> {
    let dim = h0.dim();
    if v.dim() != dim {
        return Err(Error::Dimension(format!("H0 is {dim}, V is {}", v.dim())));
    }
    if !h0.matrix.is_diagonal() {
        return Err(Error::Dimension("H0 must be diagonal".into()));
    }
    let e = h0.diagonal_re();
    let mut in_m = vec![false; dim];
    for &a in space.indices() {
        if a >= dim {
            return Err(Error::Dimension(format!("model-space index {a} outside {dim}")));
        }
        if e[a] != 0.0 {
            return Err(Error::InvalidInteraction(format!(
                "model-space state {a} has E = {}",
                e[a]
            )));
        }
        in_m[a] = true;
    }
    let leak = space
        .indices()
        .iter()
        .flat_map(|&a| v.matrix.row(a).filter(|&(c, _)| in_m[c]).map(|(_, z)| z.norm()))
        .fold(0.0, f64::max);
    if leak > 0.0 {
        return Err(Error::TunnelingInsideModelSpace(leak));
    }
    Ok((e, in_m))
}

// Divide the fast components by their energies and zero the slow ones.
fn resolvent(x: &mut [Complex64], e: &[f64], in_m: &[bool]) -> Result<()> {
    for (k, z) in x.iter_mut().enumerate() {
        if in_m[k] {
            *z = Complex64::new(0.0, 0.0);
        } else if *z != Complex64::new(0.0, 0.0) {
            if e[k] == 0.0 {
                return Err(Error::DegenerateIntermediate { index: k });
            }
            *z /= e[k];
        }
    }
    Ok(())
}

pub fn perturbative_blocks(
    h0: &SparseOperator,
    v: &SparseOperator,
    space: &ModelSpace,
) -> Result<PerturbativeBlocks> {
    let (e, in_m) = check_inputs(h0, v, space)?;
    let dim = h0.dim();
    let m = space.indices();
    let columns: Vec<(Vec<Complex64>, Vec<Complex64>)> = m
        .par_iter()
        .map(|&beta| -> Result<_> {
            let mut y = vec![Complex64::new(0.0, 0.0); dim];
            // column beta of V from row beta (V is Hermitian)
            for (c, z) in v.matrix.row(beta) {
                y[c] = z.conj();
            }
            resolvent(&mut y, &e, &in_m)?;
            let mut w = vec![Complex64::new(0.0, 0.0); dim];
            v.matrix.matvec(&y, &mut w);
            let second: Vec<Complex64> = m.iter().map(|&a| -w[a]).collect();
            resolvent(&mut w, &e, &in_m)?;
            let mut w2 = vec![Complex64::new(0.0, 0.0); dim];
            v.matrix.matvec(&w, &mut w2);
            let third: Vec<Complex64> = m.iter().map(|&a| w2[a]).collect();
            Ok((second, third))
        })
        .collect::<Result<_>>()?;
    let k = m.len();
    let mut second = CMatrix::zeros(k, k);
    let mut third = CMatrix::zeros(k, k);
    for (b, (s, t)) in columns.into_iter().enumerate() {
        for a in 0..k {
            second[(a, b)] = s[a];
            third[(a, b)] = t[a];
        }
    }
    Ok(PerturbativeBlocks { second, third })
}

pub fn h_eff_second(h0: &SparseOperator, v: &SparseOperator, space: &ModelSpace) -> Result<EffectiveHamiltonian> {
    let blocks = perturbative_blocks(h0, v, space)?;
    Ok(EffectiveHamiltonian {
        matrix: space.embed(&blocks.second),
        order: Order::Second,
        provenance: Provenance::Perturbative,
    })
}

pub fn h_eff_third(h0: &SparseOperator, v: &SparseOperator, space: &ModelSpace) -> Result<EffectiveHamiltonian> {
    let blocks = perturbative_blocks(h0, v, space)?;
    Ok(EffectiveHamiltonian {
        matrix: space.embed(&blocks.third),
        order: Order::Third,
        provenance: Provenance::Perturbative,
    })
}

pub fn decompose(h: &EffectiveHamiltonian) -> Result<PauliDecomposition> {
    pauli_decompose(&h.matrix)
}

/// Everything one engine evaluation produces.
#[derive(Clone, Debug)]
pub struct EngineRun {
    pub space: ModelSpace,
    pub h0: SparseOperator,
    pub v: SparseOperator,
    pub second: EffectiveHamiltonian,
    pub third: EffectiveHamiltonian,
}

impl EngineRun {
    pub fn total(&self) -> EffectiveHamiltonian {
        EffectiveHamiltonian {
            matrix: &self.second.matrix + &self.third.matrix,
            order: Order::SecondAndThird,
            provenance: Provenance::Perturbative,
        }
    }

    pub fn decomposition(&self) -> Result<PauliDecomposition> {
        decompose(&self.total())
    }

    /// `H2 + H3` on `M`, in basis order.
    pub fn block(&self) -> CMatrix {
        self.space.restrict(&self.total().matrix)
    }
}

/// `N = n_sites` atoms, either species; `forbid_mixed` removes
/// doubly occupied sites holding both species.
pub fn standard_basis(n_sites: usize, statistics: Statistics, forbid_mixed: bool) -> Result<Basis> {
    enumerate_basis(
        n_sites,
        statistics,
        SectorSpec::total(n_sites as u32).with_forbid_mixed(forbid_mixed),
    )
}

/// Builds `H0`, `V`, `M` and both orders from a basis and a parameter set.
pub fn run_engine(basis: &Basis, graph: &LatticeGraph, params: &HubbardParams) -> Result<EngineRun> {
    let h0 = build_h0(basis, params)?;
    let v = build_v(basis, graph, params)?;
    let space = spin_map(basis, &projector_m(basis)?)?;
    run_engine_with(space, h0, v)
}

pub fn run_engine_with(space: ModelSpace, h0: SparseOperator, v: SparseOperator) -> Result<EngineRun> {
    let blocks = perturbative_blocks(&h0, &v, &space)?;
    Ok(EngineRun {
        second: EffectiveHamiltonian {
            matrix: space.embed(&blocks.second),
            order: Order::Second,
            provenance: Provenance::Perturbative,
        },
        third: EffectiveHamiltonian {
            matrix: space.embed(&blocks.third),
            order: Order::Third,
            provenance: Provenance::Perturbative,
        },
        space,
        h0,
        v,
    })
}

/// Largest full-space dimension handled by dense evolution.
pub const EVOLUTION_DIM_LIMIT: usize = 4096;

/// Compare the exact low-energy propagator on `M` with `exp(-i H_eff t)`.
///
/// The `|M|` eigenvectors of `H0 + V` with the largest weight on `M` span the
/// dressed low-energy band. Projecting their propagator onto `M` leaves a
/// static dressing `K^2 = P Pi_low P`, removed symmetrically:
/// `W = K^-1 P Pi_low e^{-iHt} Pi_low P K^-1`. The residual is `||W - exp(-i H_eff t)||_2`.
pub fn validate_by_evolution(
    h0: &SparseOperator,
    v: &SparseOperator,
    space: &ModelSpace,
    h_eff: &EffectiveHamiltonian,
    t: f64,
) -> Result<f64> {
    let dim = h0.dim();
    if dim > EVOLUTION_DIM_LIMIT {
        return Err(Error::TooLarge(dim));
    }
    let h = h0.add(v)?.to_dense();
    let (w, vecs) = eigh(&h)?;
    let m = space.indices();
    let k = m.len();
    let weight: Vec<f64> = (0..dim)
        .map(|c| m.iter().map(|&a| vecs[(a, c)].norm_sqr()).sum())
        .collect();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| weight[b].total_cmp(&weight[a]).then(a.cmp(&b)));
    let low = &order[..k];
    let proj = CMatrix::from_fn(k, k, |r, c| vecs[(m[r], low[c])]);
    let phases = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        k,
        low.iter().map(|&c| Complex64::from_polar(1.0, -w[c] * t)),
    ));
    let evolved = &proj * phases * proj.adjoint();
    let k2 = &proj * proj.adjoint();
    let k_inv = hermitian_function(&k2, |x| Complex64::new(1.0 / x.sqrt(), 0.0))?;
    let dressed = &k_inv * evolved * &k_inv;
    let target = propagator(&space.restrict(&h_eff.matrix), t)?;
    Ok(op_norm(&(dressed - target)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{FockState, SectorSpec};
    use crate::hubbard::{make_graph, Geometry};
    use crate::linalg::{hermitian_deviation, max_abs};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn two_site_fermion(j: f64, u: f64) -> EngineRun {
        let g = make_graph(&Geometry::ZigzagChain { n: 3 }).unwrap();
        // reuse the 3-site graph builder for a 2-site line
        let g = LatticeGraph {
            n_sites: 2,
            edges: vec![g.edges[0]],
            geometry: g.geometry,
        };
        let b = enumerate_basis(2, Statistics::Fermion, SectorSpec::fixed(1, 1)).unwrap();
        let p = HubbardParams::fermionic(u).with_real_j(&[j], &[j]);
        run_engine(&b, &g, &p).unwrap()
    }

    #[test]
    fn spin_map_examples() {
        let b = enumerate_basis(3, Statistics::Boson, SectorSpec::total(3)).unwrap();
        let m = projector_m(&b).unwrap();
        let s = spin_map(&b, &m).unwrap();
        assert!(s.is_complete());
        let pos = |o: Vec<[u16; 2]>| {
            let k = b.index_of(&FockState::new(o, Statistics::Boson).unwrap()).unwrap();
            s.spins()[s.indices().iter().position(|&x| x == k).unwrap()]
        };
        assert_eq!(pos(vec![[1, 0], [1, 0], [1, 0]]), 0b000);
        assert_eq!(pos(vec![[1, 0], [0, 1], [0, 1]]), 0b011);
        let not_single = b.index_of(&FockState::new(vec![[2, 0], [1, 0], [0, 0]], Statistics::Boson).unwrap()).unwrap();
        assert!(matches!(spin_map(&b, &[not_single]), Err(Error::SpinMap(_))));
    }

    #[test]
    fn two_site_fermion_second_order() {
        let (j, u) = (0.1, 1.0);
        let run = two_site_fermion(j, u);
        let h = &run.second.matrix;
        // spins: |up dn> = 0b01, |dn up> = 0b10
        let x = 2.0 * j * j / u;
        assert!((h[(1, 1)] - c(-x)).norm() < 1e-15);
        assert!((h[(2, 2)] - c(-x)).norm() < 1e-15);
        assert!((h[(1, 2)] - c(x)).norm() < 1e-15);
        assert!((h[(2, 1)] - c(x)).norm() < 1e-15);
        assert!(max_abs(&run.third.matrix) == 0.0);
    }

    #[test]
    fn two_site_decomposition_is_exchange_form() {
        let (j, u) = (0.1, 1.0);
        let run = two_site_fermion(j, u);
        let d = decompose(&run.second).unwrap();
        // mu1 (I - ZZ) + mu2 (XX + YY) on the (1,1) sector, embedded with zeros
        // outside it: the sector projector is (I - ZZ)/2.
        let mu1 = -j * j / u;
        let mu2 = j * j / u;
        let sector = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.0), c(1.0), c(1.0), c(0.0)]));
        let expect = &sector
            * (crate::pauli::pauli_matrix("II").unwrap() * c(mu1)
                - crate::pauli::pauli_matrix("ZZ").unwrap() * c(mu1)
                + crate::pauli::pauli_matrix("XX").unwrap() * c(mu2)
                + crate::pauli::pauli_matrix("YY").unwrap() * c(mu2))
            * &sector;
        assert!(max_abs(&(d.reconstruct().unwrap() - expect)) < 1e-15);
    }

    #[test]
    fn zero_tunneling_gives_zero() {
        let g = make_graph(&Geometry::Triangle).unwrap();
        let b = standard_basis(3, Statistics::Boson, false).unwrap();
        let run = run_engine(&b, &g, &HubbardParams::equal_u(1.0)).unwrap();
        assert_eq!(max_abs(&run.total().matrix), 0.0);
        let r = validate_by_evolution(&run.h0, &run.v, &run.space, &run.total(), 50.0).unwrap();
        assert!(r < 1e-12);
    }

    // Independent oracle: enumerate hop-and-return paths from |up up up> by hand.
    #[test]
    fn all_up_diagonal_element_matches_path_enumeration() {
        let g = make_graph(&Geometry::Triangle).unwrap();
        let b = standard_basis(3, Statistics::Boson, false).unwrap();
        let js = [0.03, 0.05, 0.02];
        let u = 1.3;
        let p = HubbardParams::new(u, 0.7, 1.0).with_real_j(&js, &[0.0; 3]);
        let run = run_engine(&b, &g, &p).unwrap();
        // each link, each direction: amplitude sqrt(2) J out and back, energy U_upup
        let oracle: f64 = js.iter().map(|j| -2.0 * (2.0 * j * j) / u).sum();
        assert!((run.second.matrix[(0, 0)].re - oracle).abs() < 1e-15);
    }

    #[test]
    fn hermitian_orders() {
        let g = make_graph(&Geometry::Triangle).unwrap();
        let b = standard_basis(3, Statistics::Boson, false).unwrap();
        let p = HubbardParams::new(1.2, 0.9, 1.0)
            .with_j(0, Species::Up, Complex64::new(0.03, 0.01))
            .with_j(1, Species::Down, Complex64::new(-0.02, 0.04))
            .with_j(2, Species::Up, Complex64::new(0.01, 0.0));
        let run = run_engine(&b, &g, &p).unwrap();
        assert!(hermitian_deviation(&run.second.matrix) < 1e-15);
        assert!(hermitian_deviation(&run.third.matrix) < 1e-15);
    }

    #[test]
    fn zero_energy_intermediate_is_reported() {
        let g = make_graph(&Geometry::Triangle).unwrap();
        let b = standard_basis(3, Statistics::Boson, false).unwrap();
        let p = HubbardParams::new(0.0, 1.0, 1.0).with_real_j(&[0.1; 3], &[0.0; 3]);
        let r = run_engine(&b, &g, &p);
        assert!(matches!(r, Err(Error::DegenerateIntermediate { .. })));
    }
}
