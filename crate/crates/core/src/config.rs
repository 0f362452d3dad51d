//! JSON configuration documents for the batch commands.

use serde::{Deserialize, Serialize};

use crate::chainlab::ChainConfig;
use crate::closedform::Family;
use crate::error::{Error, Result};

/// Above this `J/U` results are flagged as outside the perturbative regime.
pub const REGIME_WARN: f64 = 0.3;
/// Scans refuse grids beyond this `J/U`.
pub const REGIME_CAP: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub family: Family,
    /// `[min, max]` of `J_up / U`.
    pub j_up: [f64; 2],
    pub j_dn: [f64; 2],
    pub points: usize,
    pub u_upup: f64,
    pub u_dndn: f64,
    pub u_updn: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            family: Family::Bosonic,
            j_up: [0.0, 0.1],
            j_dn: [0.0, 0.1],
            points: 50,
            u_upup: 1.0,
            u_dndn: 1.0,
            u_updn: 1.0,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<Vec<String>> {
        if self.points < 1 {
            return Err(Error::Config("points must be at least 1".into()));
        }
        for r in [self.j_up, self.j_dn] {
            if !(r[0].is_finite() && r[1].is_finite()) || r[0] > r[1] {
                return Err(Error::Config(format!("bad range {r:?}")));
            }
        }
        let max = self.j_up[1].abs().max(self.j_dn[1].abs()).max(self.j_up[0].abs()).max(self.j_dn[0].abs());
        let u = [self.u_upup, self.u_dndn, self.u_updn]
            .into_iter()
            .filter(|u| u.is_finite())
            .map(f64::abs)
            .fold(f64::INFINITY, f64::min);
        let ratio = max / u;
        if ratio > REGIME_CAP {
            return Err(Error::Config(format!(
                "J/U = {ratio} exceeds the perturbative cap {REGIME_CAP}"
            )));
        }
        let mut warnings = Vec::new();
        if ratio > REGIME_WARN {
            warnings.push(format!("J/U = {ratio} is outside the perturbative regime (> {REGIME_WARN})"));
        }
        Ok(warnings)
    }

    pub fn axis(range: [f64; 2], points: usize) -> Vec<f64> {
        if points == 1 {
            return vec![range[0]];
        }
        (0..points)
            .map(|k| range[0] + (range[1] - range[0]) * k as f64 / (points - 1) as f64)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub seed: u64,
    pub draws: usize,
    pub j_over_u: f64,
    /// Additional single draws at these ratios, recorded but not enforced.
    pub probe_ratios: Vec<f64>,
    /// `J/U` ladder for the adiabatic-vs-perturbative order fit.
    pub ladder: Vec<f64>,
    /// `J/U` ladder for the evolution check.
    pub evolution_ladder: Vec<f64>,
    pub evolution_ut: f64,
    pub covariance_draws: usize,
    pub families: Vec<Family>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 20070301,
            draws: 20,
            j_over_u: 0.05,
            probe_ratios: vec![0.4],
            ladder: vec![0.08, 0.04, 0.02, 0.01],
            evolution_ladder: vec![0.04, 0.02, 0.01],
            evolution_ut: 50.0,
            covariance_draws: 10,
            families: vec![
                Family::Bosonic,
                Family::Fermionic,
                Family::ComplexBosonic,
                Family::ComplexFermionic,
            ],
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |x: f64| !(x.is_finite() && x > 0.0 && x <= REGIME_CAP);
        if bad(self.j_over_u) || self.ladder.iter().chain(&self.evolution_ladder).chain(&self.probe_ratios).any(|&x| bad(x)) {
            return Err(Error::Config(format!("J/U values must lie in (0, {REGIME_CAP}]")));
        }
        if self.ladder.len() < 2 || self.evolution_ladder.len() < 2 {
            return Err(Error::Config("ladders need at least two points".into()));
        }
        if !(self.evolution_ut.is_finite() && self.evolution_ut > 0.0) {
            return Err(Error::Config("evolution_ut must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChiralConfig {
    /// Oriented vertex triples; default is one counterclockwise triangle.
    pub triangles: Vec<[usize; 3]>,
    pub n_sites: usize,
    pub tau4: f64,
}

impl Default for ChiralConfig {
    fn default() -> Self {
        Self {
            triangles: vec![[0, 1, 2]],
            n_sites: 3,
            tau4: 1.0,
        }
    }
}

/// A whole config document; each command reads its own section.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub scan: ScanConfig,
    pub verify: VerifyConfig,
    pub chain: ChainConfig,
    pub chiral: ChiralConfig,
}

impl Config {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_documents_fill_defaults() {
        let c = Config::from_json(r#"{"scan": {"points": 3}}"#).unwrap();
        assert_eq!(c.scan.points, 3);
        assert_eq!(c.verify.draws, 20);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(Config::from_json(r#"{"scan": {"pionts": 3}}"#).is_err());
    }

    #[test]
    fn regime_cap_and_warning() {
        let mut s = ScanConfig {
            j_up: [0.0, 0.6],
            ..ScanConfig::default()
        };
        assert!(s.validate().is_err());
        s.j_up = [0.0, 0.4];
        assert_eq!(s.validate().unwrap().len(), 1);
        s.j_up = [0.0, 0.1];
        assert!(s.validate().unwrap().is_empty());
    }

    #[test]
    fn axis_endpoints() {
        let a = ScanConfig::axis([0.0, 0.1], 5);
        assert_eq!(a.len(), 5);
        assert_eq!(a[0], 0.0);
        assert_eq!(a[4], 0.1);
    }
}
