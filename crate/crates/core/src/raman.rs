//! SU(2) rotation of the two internal modes, `(c+, c-)^T = g (a, b)^T` with
//! `g(phi, theta) = [[cos t, e^{i phi} sin t], [sin t, -e^{i phi} cos t]]`.
//!
//! The rotated tunneling `V_c = -sum (J+ c+^dag c+' + J- c-^dag c-' + h.c.)`
//! uses the up coupling of each link as `J+` and the down coupling as `J-`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fock::{Basis, Species};
use crate::hubbard::{build_h0, build_hopping, projector_m, HopTerm, HubbardParams, LatticeGraph, SparseOperator};
use crate::linalg::{kron, max_abs, op_norm, CMatrix};
use crate::perturb::{run_engine_with, spin_map, EngineRun};

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Su2Rotation {
    pub phi: f64,
    pub theta: f64,
}

impl Su2Rotation {
    pub fn new(phi: f64, theta: f64) -> Self {
        Self { phi, theta }
    }

    pub fn elements(&self) -> [[Complex64; 2]; 2] {
        let (s, c) = self.theta.sin_cos();
        let e = Complex64::from_polar(1.0, self.phi);
        [
            [Complex64::new(c, 0.0), e * s],
            [Complex64::new(s, 0.0), -e * c],
        ]
    }

    pub fn matrix(&self) -> CMatrix {
        let g = self.elements();
        CMatrix::from_row_slice(2, 2, &[g[0][0], g[0][1], g[1][0], g[1][1]])
    }

    pub fn unitarity_deviation(&self) -> f64 {
        let g = self.matrix();
        max_abs(&(g.adjoint() * &g - CMatrix::identity(2, 2)))
    }
}

pub fn rotated_tunneling_terms(graph: &LatticeGraph, params: &HubbardParams, g: &Su2Rotation) -> Result<Vec<HopTerm>> {
    // validates link ids
    crate::hubbard::tunneling_terms(graph, params)?;
    let m = g.elements();
    let mut terms = Vec::new();
    for e in &graph.edges {
        for (s, sp) in Species::ALL.into_iter().enumerate() {
            let js = params.j(e.link, sp);
            if js == Complex64::new(0.0, 0.0) {
                continue;
            }
            for a in Species::ALL {
                for b in Species::ALL {
                    let coeff = -js * m[s][a.index()].conj() * m[s][b.index()];
                    if coeff != Complex64::new(0.0, 0.0) {
                        terms.push(HopTerm {
                            create: (e.from, a),
                            annihilate: (e.to, b),
                            coeff,
                        });
                    }
                }
            }
        }
    }
    Ok(terms)
}

pub fn rotate_tunneling(
    basis: &Basis,
    graph: &LatticeGraph,
    params: &HubbardParams,
    g: &Su2Rotation,
) -> Result<SparseOperator> {
    build_hopping(basis, &rotated_tunneling_terms(graph, params, g)?)
}

/// `(g^dag)^{(x) n}`: the map carrying spin configurations of the original
/// modes to those of the rotated modes.
pub fn spin_rotation_matrix(g: &Su2Rotation, n_sites: usize) -> CMatrix {
    let single = g.matrix().adjoint();
    let mut out = CMatrix::identity(1, 1);
    for _ in 0..n_sites {
        out = kron(&out, &single);
    }
    out
}

/// Engine run with the rotated tunneling in place of `V`.
pub fn rotated_engine(basis: &Basis, graph: &LatticeGraph, params: &HubbardParams, g: &Su2Rotation) -> Result<EngineRun> {
    let h0 = build_h0(basis, params)?;
    let v = rotate_tunneling(basis, graph, params, g)?;
    let space = spin_map(basis, &projector_m(basis)?)?;
    run_engine_with(space, h0, v)
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceReport {
    pub order2: f64,
    pub order3: f64,
    pub residual: f64,
}

/// `||engine(V_c) - G engine(V) G^dag||_2` for each order.
pub fn covariance_check(
    basis: &Basis,
    graph: &LatticeGraph,
    params: &HubbardParams,
    g: &Su2Rotation,
) -> Result<CovarianceReport> {
    let plain = crate::perturb::run_engine(basis, graph, params)?;
    let rotated = rotated_engine(basis, graph, params, g)?;
    let big_g = spin_rotation_matrix(g, basis.n_sites());
    let res = |a: &CMatrix, b: &CMatrix| op_norm(&(a - &big_g * b * big_g.adjoint()));
    let order2 = res(&rotated.second.matrix, &plain.second.matrix);
    let order3 = res(&rotated.third.matrix, &plain.third.matrix);
    Ok(CovarianceReport {
        order2,
        order3,
        residual: order2.max(order3),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::Statistics;
    use crate::hubbard::{build_v, make_graph, Geometry};
    use crate::perturb::standard_basis;
    use std::f64::consts::PI;

    fn setup() -> (Basis, LatticeGraph, HubbardParams) {
        let g = make_graph(&Geometry::Triangle).unwrap();
        let b = standard_basis(3, Statistics::Boson, false).unwrap();
        let p = HubbardParams::equal_u(1.0).with_real_j(&[0.05, 0.04, 0.03], &[0.02, 0.035, 0.045]);
        (b, g, p)
    }

    #[test]
    fn g_is_unitary() {
        for (phi, theta) in [(0.0, 0.0), (0.3, 1.1), (2.0, PI / 2.0)] {
            assert!(Su2Rotation::new(phi, theta).unitarity_deviation() < 1e-15);
        }
        let big = spin_rotation_matrix(&Su2Rotation::new(0.7, 0.4), 3);
        assert!(max_abs(&(big.adjoint() * &big - CMatrix::identity(8, 8))) < 1e-14);
    }

    #[test]
    fn theta_zero_keeps_species_diagonal_structure() {
        let (b, g, p) = setup();
        let vc = rotate_tunneling(&b, &g, &p, &Su2Rotation::new(0.9, 0.0)).unwrap();
        let v = build_v(&b, &g, &p).unwrap();
        assert!(max_abs(&(vc.to_dense() - v.to_dense())) < 1e-15);
    }

    #[test]
    fn equal_couplings_commute_through() {
        let (b, g, _) = setup();
        let p = HubbardParams::equal_u(1.0).with_real_j(&[0.05, 0.04, 0.03], &[0.05, 0.04, 0.03]);
        let vc = rotate_tunneling(&b, &g, &p, &Su2Rotation::new(0.4, PI / 4.0)).unwrap();
        let v = build_v(&b, &g, &p).unwrap();
        assert!(max_abs(&(vc.to_dense() - v.to_dense())) < 1e-15);
    }

    #[test]
    fn half_pi_swaps_species() {
        let (b, g, p) = setup();
        let vc = rotate_tunneling(&b, &g, &p, &Su2Rotation::new(0.0, PI / 2.0)).unwrap();
        let v = build_v(&b, &g, &p.swapped_species()).unwrap();
        assert!(max_abs(&(vc.to_dense() - v.to_dense())) < 1e-15);
    }

    #[test]
    fn covariance_at_equal_u() {
        let (b, g, p) = setup();
        let r = covariance_check(&b, &g, &p, &Su2Rotation::new(1.3, 0.7)).unwrap();
        assert!(r.residual < 1e-12, "{r:?}");
        let id = covariance_check(&b, &g, &p, &Su2Rotation::new(0.0, 0.0)).unwrap();
        assert!(id.residual < 1e-15);
    }

    #[test]
    fn n1_half_pi_matrix() {
        let g = spin_rotation_matrix(&Su2Rotation::new(0.0, PI / 2.0), 1);
        assert!((g[(0, 1)].re - 1.0).abs() < 1e-15 && (g[(1, 0)].re - 1.0).abs() < 1e-15);
        assert!(g[(0, 0)].norm() < 1e-15);
    }
}
