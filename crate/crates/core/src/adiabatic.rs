//! Adiabatic elimination of the fast (multiply occupied) states:
//! `H_eff = H_MM - H_MF H_FF^-1 H_FM` with `H = H0 + V`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hubbard::SparseOperator;
use crate::linalg::{condition_number, op_norm, CMatrix};
use crate::perturb::{perturbative_blocks, EffectiveHamiltonian, ModelSpace, Order, Provenance};

pub const MAX_CONDITION: f64 = 1e12;

/// The four blocks of `H0 + V` split along `M` and its complement `F`.
#[derive(Clone, Debug)]
pub struct Blocks {
    pub mm: CMatrix,
    pub mf: CMatrix,
    pub ff: CMatrix,
    pub fm: CMatrix,
    /// Diagonal of `H0` on `F`.
    pub e_f: Vec<f64>,
}

pub fn split_blocks(h0: &SparseOperator, v: &SparseOperator, space: &ModelSpace) -> Result<Blocks> {
    let dim = h0.dim();
    if v.dim() != dim {
        return Err(Error::Dimension(format!("H0 is {dim}, V is {}", v.dim())));
    }
    let m = space.indices();
    let mut in_m = vec![false; dim];
    for &a in m {
        in_m[a] = true;
    }
    let f: Vec<usize> = (0..dim).filter(|&k| !in_m[k]).collect();
    let h = h0.add(v)?.to_dense();
    let pick = |rows: &[usize], cols: &[usize]| {
        CMatrix::from_fn(rows.len(), cols.len(), |r, c| h[(rows[r], cols[c])])
    };
    let e = h0.diagonal_re();
    Ok(Blocks {
        mm: pick(m, m),
        mf: pick(m, &f),
        ff: pick(&f, &f),
        fm: pick(&f, m),
        e_f: f.iter().map(|&k| e[k]).collect(),
    })
}

#[derive(Clone, Debug)]
pub struct AdiabaticResult {
    pub heff: EffectiveHamiltonian,
    /// Same operator on `M` in basis order.
    pub block: CMatrix,
    pub condition_number: f64,
    pub fast_dim: usize,
    pub slow_dim: usize,
}

pub fn adiabatic_eliminate(
    h0: &SparseOperator,
    v: &SparseOperator,
    space: &ModelSpace,
) -> Result<AdiabaticResult> {
    let b = split_blocks(h0, v, space)?;
    let cond = if b.ff.is_empty() { 1.0 } else { condition_number(&b.ff) };
    if !cond.is_finite() || cond > MAX_CONDITION {
        return Err(Error::FastBlockSingular(cond));
    }
    let x = if b.ff.is_empty() {
        CMatrix::zeros(0, b.fm.ncols())
    } else {
        b.ff
            .clone()
            .lu()
            .solve(&b.fm)
            .ok_or(Error::FastBlockSingular(f64::INFINITY))?
    };
    let block = &b.mm - &b.mf * x;
    Ok(AdiabaticResult {
        heff: EffectiveHamiltonian {
            matrix: space.embed(&block),
            order: Order::SecondAndThird,
            provenance: Provenance::Adiabatic,
        },
        block,
        condition_number: cond,
        fast_dim: b.ff.nrows(),
        slow_dim: b.mm.nrows(),
    })
}

/// `H_MM - H_MF [sum_{k<terms} E^-1 (-V_FF E^-1)^k] H_FM`; with two terms this
/// is the second plus third order expression.
pub fn truncated_series(
    h0: &SparseOperator,
    v: &SparseOperator,
    space: &ModelSpace,
    terms: usize,
) -> Result<CMatrix> {
    let b = split_blocks(h0, v, space)?;
    if let Some(k) = b.e_f.iter().position(|&e| e == 0.0) {
        return Err(Error::DegenerateIntermediate { index: k });
    }
    let mut v_ff = b.ff.clone();
    for (k, &e) in b.e_f.iter().enumerate() {
        v_ff[(k, k)] -= e;
    }
    let scale_rows = |m: &CMatrix| {
        let mut out = m.clone();
        for (r, &e) in b.e_f.iter().enumerate() {
            for z in out.row_mut(r).iter_mut() {
                *z /= e;
            }
        }
        out
    };
    let mut term = scale_rows(&b.fm);
    let mut acc = CMatrix::zeros(b.fm.nrows(), b.fm.ncols());
    for k in 0..terms {
        if k > 0 {
            term = -scale_rows(&(&v_ff * &term));
        }
        acc += &term;
    }
    Ok(&b.mm - &b.mf * acc)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesComparison {
    /// `||adiabatic - (H2 + H3)||_2`.
    pub residual: f64,
    pub third_norm: f64,
    pub relative: f64,
    pub v_ff_norm: f64,
    pub gap: f64,
    pub condition_number: f64,
}

pub fn series_compare(h0: &SparseOperator, v: &SparseOperator, space: &ModelSpace) -> Result<SeriesComparison> {
    let b = split_blocks(h0, v, space)?;
    let mut v_ff = b.ff.clone();
    for (k, &e) in b.e_f.iter().enumerate() {
        v_ff[(k, k)] -= e;
    }
    let v_ff_norm = op_norm(&v_ff);
    let gap = b.e_f.iter().map(|e| e.abs()).fold(f64::INFINITY, f64::min);
    if v_ff_norm >= gap {
        return Err(Error::SeriesDiverges { v_ff: v_ff_norm, gap });
    }
    let exact = adiabatic_eliminate(h0, v, space)?;
    let pert = perturbative_blocks(h0, v, space)?;
    let residual = op_norm(&(&exact.block - &pert.second - &pert.third));
    let third_norm = op_norm(&pert.third);
    Ok(SeriesComparison {
        residual,
        third_norm,
        relative: if third_norm > 0.0 { residual / third_norm } else { 0.0 },
        v_ff_norm,
        gap,
        condition_number: exact.condition_number,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{enumerate_basis, SectorSpec, Statistics};
    use crate::hubbard::{make_graph, Geometry, HubbardParams, LatticeGraph};
    use crate::linalg::max_abs;
    use crate::perturb::{run_engine, standard_basis};

    #[test]
    fn triangle_boson_block_sizes() {
        let g = make_graph(&Geometry::Triangle).unwrap();
        let b = standard_basis(3, Statistics::Boson, false).unwrap();
        let p = HubbardParams::equal_u(1.0).with_real_j(&[0.05; 3], &[0.04; 3]);
        let run = run_engine(&b, &g, &p).unwrap();
        let r = adiabatic_eliminate(&run.h0, &run.v, &run.space).unwrap();
        assert_eq!((r.fast_dim + r.slow_dim, r.fast_dim, r.slow_dim), (56, 48, 8));
        assert!(r.condition_number > 1.0 && r.condition_number < 10.0);
    }

    #[test]
    fn zero_tunneling() {
        let g = make_graph(&Geometry::Triangle).unwrap();
        let b = standard_basis(3, Statistics::Boson, false).unwrap();
        let run = run_engine(&b, &g, &HubbardParams::equal_u(1.0)).unwrap();
        let r = adiabatic_eliminate(&run.h0, &run.v, &run.space).unwrap();
        assert_eq!(max_abs(&r.block), 0.0);
        let s = series_compare(&run.h0, &run.v, &run.space).unwrap();
        assert_eq!(s.residual, 0.0);
    }

    #[test]
    fn two_site_fermion_is_exact_at_second_order() {
        let g = make_graph(&Geometry::ZigzagChain { n: 3 }).unwrap();
        let g = LatticeGraph {
            n_sites: 2,
            edges: vec![g.edges[0]],
            geometry: g.geometry,
        };
        let b = enumerate_basis(2, Statistics::Fermion, SectorSpec::fixed(1, 1)).unwrap();
        let (j, u) = (0.2, 1.0);
        let p = HubbardParams::fermionic(u).with_real_j(&[j], &[j]);
        let run = run_engine(&b, &g, &p).unwrap();
        let r = adiabatic_eliminate(&run.h0, &run.v, &run.space).unwrap();
        let x = 2.0 * j * j / u;
        assert!((r.block[(0, 0)].re + x).abs() < 1e-15);
        assert!((r.block[(0, 1)].re - x).abs() < 1e-15);
        let s = series_compare(&run.h0, &run.v, &run.space).unwrap();
        assert!(s.residual < 1e-15);
    }

    #[test]
    fn two_term_series_equals_engine() {
        let g = make_graph(&Geometry::Triangle).unwrap();
        for stat in [Statistics::Boson, Statistics::Fermion] {
            let b = standard_basis(3, stat, false).unwrap();
            let p = match stat {
                Statistics::Boson => HubbardParams::new(1.1, 0.9, 1.0),
                Statistics::Fermion => HubbardParams::fermionic(1.0),
            }
            .with_real_j(&[0.03, 0.05, 0.04], &[0.02, 0.01, 0.045]);
            let run = run_engine(&b, &g, &p).unwrap();
            let series = truncated_series(&run.h0, &run.v, &run.space, 2).unwrap();
            assert!(max_abs(&(series - run.block())) < 1e-15);
        }
    }

    #[test]
    fn resonant_fast_block_is_rejected() {
        let g = make_graph(&Geometry::Triangle).unwrap();
        let b = standard_basis(3, Statistics::Boson, false).unwrap();
        let p = HubbardParams::new(0.0, 1.0, 1.0).with_real_j(&[0.0; 3], &[0.1; 3]);
        let h0 = crate::hubbard::build_h0(&b, &p).unwrap();
        let v = crate::hubbard::build_v(&b, &g, &p).unwrap();
        let space = crate::perturb::spin_map(&b, &crate::hubbard::projector_m(&b).unwrap()).unwrap();
        assert!(matches!(
            adiabatic_eliminate(&h0, &v, &space),
            Err(Error::FastBlockSingular(_))
        ));
    }

    #[test]
    fn divergent_series_is_rejected() {
        let g = make_graph(&Geometry::Triangle).unwrap();
        let b = standard_basis(3, Statistics::Boson, false).unwrap();
        let p = HubbardParams::equal_u(1.0).with_real_j(&[0.6; 3], &[0.6; 3]);
        let run = run_engine(&b, &g, &p).unwrap();
        assert!(matches!(
            series_compare(&run.h0, &run.v, &run.space),
            Err(Error::SeriesDiverges { .. })
        ));
    }
}
