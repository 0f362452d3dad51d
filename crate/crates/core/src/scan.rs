//! Closed-form couplings over a grid of `(J_up, J_dn)` with link-uniform
//! tunneling, row-major with `j_dn` varying fastest.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closedform::{CouplingSet, Family};
use crate::config::ScanConfig;
use crate::conformance::formula_couplings;
use crate::error::Result;
use crate::hubbard::HubbardParams;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub j_up: f64,
    pub j_dn: f64,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub family: Family,
    /// `j_up`, `j_dn`, then the coupling names.
    pub columns: Vec<String>,
    pub rows: Vec<ScanRow>,
    pub warnings: Vec<String>,
}

impl ScanResult {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match k {
                    0 => r.j_up,
                    1 => r.j_dn,
                    _ => r.values[k - 2],
                })
                .collect(),
        )
    }
}

/// Parameters of one grid point. Complex families take `J = i j`; the
/// rotated-XY family uses `j_up` and `u_updn` only.
pub fn grid_params(cfg: &ScanConfig, j_up: f64, j_dn: f64) -> HubbardParams {
    let (a, b) = match cfg.family {
        Family::ComplexBosonic | Family::ComplexFermionic => (Complex64::new(0.0, j_up), Complex64::new(0.0, j_dn)),
        Family::RotatedXy => (Complex64::new(j_up, 0.0), Complex64::new(j_up, 0.0)),
        _ => (Complex64::new(j_up, 0.0), Complex64::new(j_dn, 0.0)),
    };
    let base = match cfg.family {
        Family::Fermionic | Family::ComplexFermionic => HubbardParams::fermionic(cfg.u_updn),
        _ => HubbardParams::new(cfg.u_upup, cfg.u_dndn, cfg.u_updn),
    };
    base.with_uniform_j(3, a, b)
}

fn row_values(family: Family, c: &CouplingSet) -> Vec<f64> {
    family.coupling_names().iter().map(|n| c.get(n, 0)).collect()
}

pub fn run_scan(cfg: &ScanConfig) -> Result<ScanResult> {
    let warnings = cfg.validate()?;
    let ups = ScanConfig::axis(cfg.j_up, cfg.points);
    let dns = ScanConfig::axis(cfg.j_dn, cfg.points);
    let points: Vec<(f64, f64)> = ups.iter().flat_map(|&u| dns.iter().map(move |&d| (u, d))).collect();
    let rows = points
        .par_iter()
        .map(|&(u, d)| {
            let c = formula_couplings(cfg.family, &grid_params(cfg, u, d))?;
            Ok(ScanRow {
                j_up: u,
                j_dn: d,
                values: row_values(cfg.family, &c),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut columns = vec!["j_up".to_string(), "j_dn".to_string()];
    columns.extend(cfg.family.coupling_names().iter().map(|s| s.to_string()));
    Ok(ScanResult {
        family: cfg.family,
        columns,
        rows,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_order() {
        let cfg = ScanConfig {
            points: 4,
            ..ScanConfig::default()
        };
        let r = run_scan(&cfg).unwrap();
        assert_eq!(r.rows.len(), 16);
        assert_eq!(r.columns.len(), 8);
        assert_eq!((r.rows[1].j_up, r.rows[1].j_dn), (0.0, r.rows[1].j_dn));
        assert!(r.rows[1].j_dn > 0.0);
    }

    #[test]
    fn fermionic_diagonal_has_zero_mu3() {
        let cfg = ScanConfig {
            family: Family::Fermionic,
            points: 5,
            ..ScanConfig::default()
        };
        let r = run_scan(&cfg).unwrap();
        let k = r.columns.iter().position(|c| c == "mu3").unwrap() - 2;
        for row in r.rows.iter().filter(|row| row.j_up == row.j_dn) {
            assert_eq!(row.values[k], 0.0);
        }
    }
}
