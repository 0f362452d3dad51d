//! Closed-form effective couplings for the triangle and the spin Hamiltonians
//! they define.
//!
//! Links are numbered `j = 0, 1, 2`; link `j` joins sites `j` and `j+1 (mod 3)`.
//! `(up <-> down)` mirror terms are written out explicitly.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{Species, Statistics};
use crate::hubbard::HubbardParams;
use crate::linalg::CMatrix;
use crate::pauli::PauliDecomposition;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Bosonic,
    Fermionic,
    ComplexBosonic,
    ComplexFermionic,
    RotatedXy,
}

impl Family {
    pub fn coupling_names(self) -> &'static [&'static str] {
        match self {
            Family::Bosonic => &["A_j", "B_j", "lambda1_j", "lambda2_j", "lambda3", "lambda4_j"],
            Family::Fermionic => &["mu1_j", "mu2_j", "mu3", "mu4_j"],
            Family::ComplexBosonic | Family::ComplexFermionic => {
                &["A", "B", "tau1", "tau2", "tau3", "tau4"]
            }
            Family::RotatedXy => &["A", "B", "nu1", "nu3"],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CouplingValue {
    Scalar(f64),
    PerLink(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingSet {
    pub family: Family,
    pub values: BTreeMap<String, CouplingValue>,
}

impl CouplingSet {
    fn new(family: Family) -> Self {
        Self {
            family,
            values: BTreeMap::new(),
        }
    }

    fn scalar(&mut self, name: &str, v: f64) {
        self.values.insert(name.into(), CouplingValue::Scalar(v));
    }

    fn per_link(&mut self, name: &str, v: [f64; 3]) {
        self.values.insert(name.into(), CouplingValue::PerLink(v.to_vec()));
    }

    /// Value of `name` on `link`; scalars ignore the link. Missing names read as 0.
    pub fn get(&self, name: &str, link: usize) -> f64 {
        match self.values.get(name) {
            Some(CouplingValue::Scalar(v)) => *v,
            Some(CouplingValue::PerLink(v)) if !v.is_empty() => v[link % v.len()],
            _ => 0.0,
        }
    }

    pub fn is_per_link(&self, name: &str) -> bool {
        matches!(self.values.get(name), Some(CouplingValue::PerLink(_)))
    }

    pub fn all_finite(&self) -> bool {
        self.values.values().all(|v| match v {
            CouplingValue::Scalar(x) => x.is_finite(),
            CouplingValue::PerLink(xs) => xs.iter().all(|x| x.is_finite()),
        })
    }
}

fn finite_nonzero(name: &str, u: f64) -> Result<f64> {
    if u.is_finite() && u != 0.0 {
        Ok(u)
    } else {
        Err(Error::InvalidInteraction(format!("{name} = {u}")))
    }
}

fn triangle_links(params: &HubbardParams) -> Result<()> {
    match params.tunneling.keys().find(|&&l| l >= 3) {
        Some(&l) => Err(Error::UnknownLink(l)),
        None => Ok(()),
    }
}

fn real_links(params: &HubbardParams, sp: Species) -> Result<[f64; 3]> {
    triangle_links(params)?;
    let mut out = [0.0; 3];
    for (l, o) in out.iter_mut().enumerate() {
        let j = params.j(l, sp);
        if j.im != 0.0 {
            return Err(Error::FormulaPrecondition("real tunneling amplitudes".into()));
        }
        *o = j.re;
    }
    Ok(out)
}

// One species' half of the bosonic formulas; `a` is the species written
// explicitly, `b` the other one.
struct BosonHalf {
    a: [f64; 6],
    b_field: [f64; 3],
    l1: [f64; 3],
    l2: [f64; 3],
    l3: f64,
    l4: [f64; 3],
}

fn boson_half(ja: [f64; 3], jb: [f64; 3], ua: f64, uab: f64) -> BosonHalf {
    let p = ja[0] * ja[1] * ja[2];
    let mut h = BosonHalf {
        a: [0.0; 6],
        b_field: [0.0; 3],
        l1: [0.0; 3],
        l2: [0.0; 3],
        l3: -p / ua * (1.5 / ua - 1.0 / uab),
        l4: [0.0; 3],
    };
    for j in 0..3 {
        let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
        h.a[j] = -p * (1.5 / (ua * ua) + 0.5 / (uab * uab) + 1.0 / (uab * ua))
            - ja[j] * ja[j] * (1.0 / ua + 0.5 / uab);
        h.b_field[j] = -(ja[j] * ja[j] + ja[j2] * ja[j2]) / ua - p / ua * (1.0 / uab + 4.5 / ua);
        h.l1[j] = -p * (4.5 / (ua * ua) - 0.5 / (uab * uab) - 1.0 / (uab * ua))
            - ja[j] * ja[j] * (1.0 / ua - 0.5 / uab);
        h.l2[j] = -jb[j] * ja[j1] * ja[j2] * (1.5 / (uab * uab) + 0.5 / (ua * ua) + 1.0 / (uab * ua))
            - ja[j] * jb[j] / (2.0 * uab);
        h.l4[j] = -ja[j] * ja[j1] * jb[j2] / ua * (0.5 / ua + 1.0 / uab);
    }
    h
}

pub fn bosonic_couplings(params: &HubbardParams) -> Result<CouplingSet> {
    let uu = finite_nonzero("u_upup", params.u_upup)?;
    let ud = finite_nonzero("u_dndn", params.u_dndn)?;
    let uab = finite_nonzero("u_updn", params.u_updn)?;
    let jup = real_links(params, Species::Up)?;
    let jdn = real_links(params, Species::Down)?;
    let up = boson_half(jup, jdn, uu, uab);
    let dn = boson_half(jdn, jup, ud, uab);
    let zip = |x: &[f64], y: &[f64], s: f64| [x[0] + s * y[0], x[1] + s * y[1], x[2] + s * y[2]];
    let mut c = CouplingSet::new(Family::Bosonic);
    c.per_link("A_j", zip(&up.a, &dn.a, 1.0));
    c.per_link("B_j", zip(&up.b_field, &dn.b_field, -1.0));
    c.per_link("lambda1_j", zip(&up.l1, &dn.l1, 1.0));
    c.per_link("lambda2_j", zip(&up.l2, &dn.l2, 1.0));
    c.scalar("lambda3", up.l3 - dn.l3);
    c.per_link("lambda4_j", zip(&up.l4, &dn.l4, -1.0));
    Ok(c)
}

pub fn fermionic_couplings(params: &HubbardParams) -> Result<CouplingSet> {
    let u = finite_nonzero("u_updn", params.u_updn)?;
    let a = real_links(params, Species::Up)?;
    let b = real_links(params, Species::Down)?;
    let mut mu1 = [0.0; 3];
    let mut mu2 = [0.0; 3];
    let mut mu4 = [0.0; 3];
    for j in 0..3 {
        let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
        mu1[j] = -(a[j] * a[j] + b[j] * b[j]) / (2.0 * u);
        mu2[j] = a[j] * b[j] / u;
        mu4[j] = 1.5 / (u * u) * (a[j] * a[j1] * b[j2] - b[j] * b[j1] * a[j2]);
    }
    let mut c = CouplingSet::new(Family::Fermionic);
    c.per_link("mu1_j", mu1);
    c.per_link("mu2_j", mu2);
    c.scalar("mu3", -(a[0] * a[1] * a[2] - b[0] * b[1] * b[2]) / (2.0 * u * u));
    c.per_link("mu4_j", mu4);
    Ok(c)
}

fn uniform_imaginary(params: &HubbardParams, sp: Species) -> Result<Complex64> {
    triangle_links(params)?;
    let j0 = params.j(0, sp);
    for l in 0..3 {
        let j = params.j(l, sp);
        if j.re != 0.0 {
            return Err(Error::NotPurelyImaginary);
        }
        if j != j0 {
            return Err(Error::FormulaPrecondition("link-uniform tunneling".into()));
        }
    }
    Ok(j0)
}

// `1/U` with the infinite channel read as its limit.
fn inv(u: f64) -> f64 {
    if u.is_infinite() {
        0.0
    } else {
        1.0 / u
    }
}

pub fn complex_tunneling_couplings(params: &HubbardParams, statistics: Statistics) -> Result<CouplingSet> {
    let a = uniform_imaginary(params, Species::Up)?;
    let b = uniform_imaginary(params, Species::Down)?;
    let i = Complex64::i();
    let (family, vals) = match statistics {
        Statistics::Boson => {
            let uu = finite_nonzero("u_upup", params.u_upup)?;
            let ud = finite_nonzero("u_dndn", params.u_dndn)?;
            if params.u_updn == 0.0 || params.u_updn.is_nan() {
                return Err(Error::InvalidInteraction(format!("u_updn = {}", params.u_updn)));
            }
            let iab = inv(params.u_updn);
            let half = |x: Complex64, y: Complex64, ux: f64| i * x * x * y / ux * (0.5 / ux + iab);
            (
                Family::ComplexBosonic,
                [
                    a * a / uu + b * b / ud + (a * a + b * b) * 0.5 * iab,
                    2.0 * a * a / uu - 2.0 * b * b / ud,
                    a * a / uu + b * b / ud - (a * a + b * b) * 0.5 * iab,
                    a * b * iab,
                    half(a, b, uu) + half(b, a, ud),
                    half(a, b, uu) - half(b, a, ud),
                ],
            )
        }
        Statistics::Fermion => {
            let u = finite_nonzero("u_updn", params.u_updn)?;
            let av = (a * a + b * b) / (2.0 * u);
            let zero = Complex64::new(0.0, 0.0);
            (
                Family::ComplexFermionic,
                [
                    av,
                    zero,
                    -av,
                    -a * b / u,
                    zero,
                    i * (a * a * b - b * b * a) / (2.0 * u * u),
                ],
            )
        }
    };
    let mut c = CouplingSet::new(family);
    for (name, v) in family.coupling_names().iter().zip(vals) {
        if v.im.abs() > 1e-12 * v.norm().max(1e-300) && v.im != 0.0 {
            return Err(Error::FormulaPrecondition(format!("{name} came out complex ({v})")));
        }
        c.scalar(name, v.re);
    }
    Ok(c)
}

pub fn rotated_xy_couplings(j: f64, u: f64) -> Result<CouplingSet> {
    let u = finite_nonzero("u", u)?;
    let (j2, j3) = (j * j / u, j * j * j / (u * u));
    let mut c = CouplingSet::new(Family::RotatedXy);
    c.scalar("A", -1.5 * j2 - 3.0 * j3);
    c.scalar("B", -2.0 * j2 - 5.5 * j3);
    c.scalar("nu1", -0.5 * j2 - 3.0 * j3);
    c.scalar("nu3", -j3 / 6.0);
    Ok(c)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Periodic,
    Open,
}

/// `coeff * pattern[0]_{sites[0]} pattern[1]_{sites[1]} ...`. Sites may exceed
/// `n_sites`; the boundary rule wraps or drops them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinTerm {
    pub pattern: String,
    pub sites: Vec<usize>,
    pub coeff: f64,
}

impl SpinTerm {
    /// Pattern laid on consecutive sites starting at `offset`.
    pub fn at(pattern: &str, offset: usize, coeff: f64) -> Self {
        Self {
            pattern: pattern.into(),
            sites: (offset..offset + pattern.len()).collect(),
            coeff,
        }
    }
}

pub const EPSILON_STRINGS: [(&str, f64); 6] = [
    ("XYZ", 1.0),
    ("YZX", 1.0),
    ("ZXY", 1.0),
    ("XZY", -1.0),
    ("ZYX", -1.0),
    ("YXZ", -1.0),
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinHamiltonianSpec {
    pub n_sites: usize,
    pub boundary: Boundary,
    pub terms: Vec<SpinTerm>,
}

impl SpinHamiltonianSpec {
    /// Expand a coupling set into the cyclic term list of its family. Index
    /// `j` runs over `0..n_sites`; per-link values repeat with period 3.
    pub fn from_couplings(c: &CouplingSet, n_sites: usize, boundary: Boundary) -> Self {
        let mut t = Vec::new();
        for j in 0..n_sites {
            let g = |name: &str| c.get(name, j);
            let mut push = |p: &str, v: f64| t.push(SpinTerm::at(p, j, v));
            match c.family {
                Family::Bosonic => {
                    push("I", g("A_j"));
                    push("Z", g("B_j"));
                    push("ZZ", g("lambda1_j"));
                    push("XX", g("lambda2_j"));
                    push("YY", g("lambda2_j"));
                    push("ZZZ", g("lambda3"));
                    push("XZX", g("lambda4_j"));
                    push("YZY", g("lambda4_j"));
                }
                Family::Fermionic => {
                    push("I", g("mu1_j"));
                    push("ZZ", -g("mu1_j"));
                    push("Z", g("mu3"));
                    push("ZZZ", -g("mu3"));
                    push("XX", g("mu2_j"));
                    push("YY", g("mu2_j"));
                    push("XZX", g("mu4_j"));
                    push("YZY", g("mu4_j"));
                }
                Family::ComplexBosonic | Family::ComplexFermionic => {
                    push("I", g("A"));
                    push("Z", g("B"));
                    push("ZZ", g("tau1"));
                    push("XX", g("tau2"));
                    push("YY", g("tau2"));
                    push("XY", g("tau3"));
                    push("YX", -g("tau3"));
                    for (p, s) in EPSILON_STRINGS {
                        push(p, s * g("tau4"));
                    }
                }
                Family::RotatedXy => {
                    push("I", g("A"));
                    push("X", g("B"));
                    push("XX", g("nu1"));
                    push("XXX", g("nu3"));
                }
            }
        }
        Self {
            n_sites,
            boundary,
            terms: t,
        }
    }

    /// `H(Bx, Bz) = -sum_j (Bx X_j + Bz Z_j + Z_j Z_{j+1} Z_{j+2})`.
    pub fn zzz_chain(bx: f64, bz: f64, n_sites: usize, boundary: Boundary) -> Self {
        let mut t = Vec::new();
        for j in 0..n_sites {
            t.push(SpinTerm::at("X", j, -bx));
            t.push(SpinTerm::at("Z", j, -bz));
            t.push(SpinTerm::at("ZZZ", j, -1.0));
        }
        Self {
            n_sites,
            boundary,
            terms: t,
        }
    }

    /// `tau4 * sum_triangles sigma_i . (sigma_j x sigma_k)`, one copy per oriented triangle.
    pub fn chirality(tau4: f64, triangles: &[[usize; 3]], n_sites: usize) -> Self {
        let mut t = Vec::new();
        for tri in triangles {
            for (p, s) in EPSILON_STRINGS {
                t.push(SpinTerm {
                    pattern: p.into(),
                    sites: tri.to_vec(),
                    coeff: s * tau4,
                });
            }
        }
        Self {
            n_sites,
            boundary: Boundary::Open,
            terms: t,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SpinHamiltonian {
    pub decomposition: PauliDecomposition,
    /// Terms that fell off an open boundary.
    pub dropped: Vec<SpinTerm>,
}

impl SpinHamiltonian {
    pub fn matrix(&self) -> Result<CMatrix> {
        self.decomposition.reconstruct()
    }
}

pub fn build_spin_hamiltonian(spec: &SpinHamiltonianSpec) -> Result<SpinHamiltonian> {
    let n = spec.n_sites;
    if n == 0 || n > 16 {
        return Err(Error::TooLarge(n));
    }
    let mut dec = PauliDecomposition::new(n);
    let mut dropped = Vec::new();
    for term in &spec.terms {
        if term.pattern.len() != term.sites.len() {
            return Err(Error::InvalidPauli(term.pattern.clone()));
        }
        if term.coeff == 0.0 {
            continue;
        }
        if spec.boundary == Boundary::Open && term.sites.iter().any(|&s| s >= n) {
            dropped.push(term.clone());
            continue;
        }
        let mut letters = vec!['I'; n];
        for (ch, &s) in term.pattern.chars().zip(&term.sites) {
            let slot = &mut letters[s % n];
            *slot = match (*slot, ch) {
                ('I', c) => c,
                (c, 'I') => c,
                _ => {
                    return Err(Error::InvalidPauli(format!(
                        "{} overlaps itself on {n} sites",
                        term.pattern
                    )))
                }
            };
        }
        let label: String = letters.into_iter().collect();
        dec.add_term(&label, Complex64::new(term.coeff, 0.0))?;
    }
    dec.coefficients.retain(|_, c| *c != Complex64::new(0.0, 0.0));
    Ok(SpinHamiltonian {
        decomposition: dec,
        dropped,
    })
}
