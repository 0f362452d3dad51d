//! Effective spin-1/2 Hamiltonians, including three-spin terms, derived from
//! two-species Hubbard models on triangular plaquettes and zig-zag chains.
//!
//! The perturbative engine ([`perturb`]) and the adiabatic-elimination oracle
//! ([`adiabatic`]) work on the full Fock space; [`closedform`] holds the
//! coupling formulas they are checked against, and [`chainlab`] diagonalizes
//! the resulting spin models.

pub mod adiabatic;
pub mod chainlab;
pub mod closedform;
pub mod config;
pub mod conformance;
pub mod error;
pub mod fock;
pub mod hubbard;
pub mod lanczos;
pub mod linalg;
pub mod pauli;
pub mod perturb;
pub mod raman;
pub mod scan;
pub mod sparse;

pub use error::{Error, Result};
pub use fock::{enumerate_basis, Basis, FockState, ModeOrder, SectorSpec, Species, Statistics};
pub use hubbard::{make_graph, Geometry, HubbardParams, LatticeGraph, SparseOperator};
pub use linalg::CMatrix;
pub use num_complex::Complex64;
pub use pauli::{pauli_decompose, PauliDecomposition};
pub use perturb::{run_engine, EffectiveHamiltonian, EngineRun, ModelSpace};
