//! Occupation-number bases for two atomic species on labeled sites.
//!
//! A [`FockState`] stores `(n_up, n_down)` per site. Fermionic signs follow a
//! global mode ordering: by default sites ascending, `up` before `down` within
//! a site, and a ladder operator on mode `k` picks up `(-1)^(occupied modes
//! before k)`.

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Species {
    Up,
    Down,
}

impl Species {
    pub const ALL: [Species; 2] = [Species::Up, Species::Down];

    pub fn index(self) -> usize {
        match self {
            Species::Up => 0,
            Species::Down => 1,
        }
    }

    pub fn other(self) -> Species {
        match self {
            Species::Up => Species::Down,
            Species::Down => Species::Up,
        }
    }

    pub fn from_index(i: usize) -> Species {
        if i == 0 {
            Species::Up
        } else {
            Species::Down
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Boson,
    Fermion,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum LadderKind {
    Create,
    Annihilate,
}

/// Global ordering of the `2 * n_sites` fermionic modes used for signs.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeOrder {
    /// `(0,up), (0,down), (1,up), ...`
    #[default]
    SiteMajor,
    /// The site-major order read backwards.
    Reversed,
}

impl ModeOrder {
    fn position(self, n_sites: usize, site: usize, species: Species) -> usize {
        let k = 2 * site + species.index();
        match self {
            ModeOrder::SiteMajor => k,
            ModeOrder::Reversed => 2 * n_sites - 1 - k,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockState {
    occupations: Vec<[u16; 2]>,
    statistics: Statistics,
}

impl FockState {
    pub fn new(occupations: Vec<[u16; 2]>, statistics: Statistics) -> Result<Self> {
        if occupations.is_empty() {
            return Err(Error::InvalidSector("a state needs at least one site".into()));
        }
        if statistics == Statistics::Fermion && occupations.iter().flatten().any(|&n| n > 1) {
            return Err(Error::InvalidSector(
                "fermionic occupation above one".into(),
            ));
        }
        Ok(Self {
            occupations,
            statistics,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.occupations.len()
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn occupations(&self) -> &[[u16; 2]] {
        &self.occupations
    }

    pub fn count(&self, site: usize, species: Species) -> u16 {
        self.occupations[site][species.index()]
    }

    pub fn total(&self, species: Species) -> u32 {
        self.occupations
            .iter()
            .map(|o| o[species.index()] as u32)
            .sum()
    }

    pub fn total_atoms(&self) -> u32 {
        self.total(Species::Up) + self.total(Species::Down)
    }

    /// One atom of either species on every site.
    pub fn is_singly_occupied(&self) -> bool {
        self.occupations.iter().all(|o| o[0] + o[1] == 1)
    }

    /// Pseudo-spin of a singly occupied site: `Some(Up)` for `(1,0)`.
    pub fn spin_at(&self, site: usize) -> Option<Species> {
        match self.occupations[site] {
            [1, 0] => Some(Species::Up),
            [0, 1] => Some(Species::Down),
            _ => None,
        }
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.n_sites() {
            return Err(Error::SiteOutOfRange {
                site,
                n_sites: self.n_sites(),
            });
        }
        Ok(())
    }

    fn fermion_sign(&self, order: ModeOrder, site: usize, species: Species) -> f64 {
        let n = self.n_sites();
        let target = order.position(n, site, species);
        let mut preceding = 0u32;
        for (s, occ) in self.occupations.iter().enumerate() {
            for sp in Species::ALL {
                if occ[sp.index()] > 0 && order.position(n, s, sp) < target {
                    preceding += 1;
                }
            }
        }
        if preceding % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (i, o) in self.occupations.iter().enumerate() {
            if i > 0 {
                write!(f, ";")?;
            }
            write!(f, "{},{}", o[0], o[1])?;
        }
        write!(f, ">")
    }
}

/// Apply `a†` or `a` on `(site, species)` using the default mode order.
pub fn apply_ladder(
    state: &FockState,
    site: usize,
    species: Species,
    kind: LadderKind,
) -> Result<Option<(FockState, Complex64)>> {
    apply_ladder_ordered(state, site, species, kind, ModeOrder::SiteMajor)
}

pub fn apply_ladder_ordered(
    state: &FockState,
    site: usize,
    species: Species,
    kind: LadderKind,
    order: ModeOrder,
) -> Result<Option<(FockState, Complex64)>> {
    state.check_site(site)?;
    let n = state.count(site, species);
    let amplitude = match (state.statistics, kind) {
        (Statistics::Boson, LadderKind::Create) => ((n + 1) as f64).sqrt(),
        (Statistics::Boson, LadderKind::Annihilate) => {
            if n == 0 {
                return Ok(None);
            }
            (n as f64).sqrt()
        }
        (Statistics::Fermion, LadderKind::Create) => {
            if n == 1 {
                return Ok(None);
            }
            state.fermion_sign(order, site, species)
        }
        (Statistics::Fermion, LadderKind::Annihilate) => {
            if n == 0 {
                return Ok(None);
            }
            state.fermion_sign(order, site, species)
        }
    };
    let mut next = state.clone();
    let slot = &mut next.occupations[site][species.index()];
    match kind {
        LadderKind::Create => *slot += 1,
        LadderKind::Annihilate => *slot -= 1,
    }
    Ok(Some((next, Complex64::new(amplitude, 0.0))))
}

/// `a†_{to,species} a_{from,species}` applied to `state`.
pub fn hop(
    state: &FockState,
    from: usize,
    to: usize,
    species: Species,
) -> Result<Option<(FockState, Complex64)>> {
    transfer(state, (from, species), (to, species), ModeOrder::SiteMajor)
}

/// `a†_{to} a_{from}` for arbitrary modes, including species-changing moves.
pub fn transfer(
    state: &FockState,
    from: (usize, Species),
    to: (usize, Species),
    order: ModeOrder,
) -> Result<Option<(FockState, Complex64)>> {
    state.check_site(to.0)?;
    let Some((mid, a1)) = apply_ladder_ordered(state, from.0, from.1, LadderKind::Annihilate, order)?
    else {
        return Ok(None);
    };
    let Some((end, a2)) = apply_ladder_ordered(&mid, to.0, to.1, LadderKind::Create, order)? else {
        return Ok(None);
    };
    Ok(Some((end, a1 * a2)))
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectorNumbers {
    Fixed { up: u32, down: u32 },
    Total(u32),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorSpec {
    pub numbers: SectorNumbers,
    /// Per-(site, species) occupancy cap. `None` means no cap beyond the atom number.
    #[serde(default)]
    pub cutoff: Option<i64>,
    /// Drop states with both species on one site (the `U_updn -> inf` limit).
    #[serde(default)]
    pub forbid_mixed: bool,
}

impl SectorSpec {
    pub fn fixed(up: u32, down: u32) -> Self {
        Self {
            numbers: SectorNumbers::Fixed { up, down },
            cutoff: None,
            forbid_mixed: false,
        }
    }

    pub fn total(n: u32) -> Self {
        Self {
            numbers: SectorNumbers::Total(n),
            cutoff: None,
            forbid_mixed: false,
        }
    }

    pub fn with_forbid_mixed(mut self, forbid: bool) -> Self {
        self.forbid_mixed = forbid;
        self
    }

    pub fn total_atoms(&self) -> u32 {
        match self.numbers {
            SectorNumbers::Fixed { up, down } => up + down,
            SectorNumbers::Total(n) => n,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Basis {
    n_sites: usize,
    statistics: Statistics,
    order: ModeOrder,
    sector: SectorSpec,
    states: Vec<FockState>,
    index: HashMap<FockState, usize>,
}

impl Basis {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn mode_order(&self) -> ModeOrder {
        self.order
    }

    pub fn sector(&self) -> &SectorSpec {
        &self.sector
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[FockState] {
        &self.states
    }

    pub fn state(&self, k: usize) -> &FockState {
        &self.states[k]
    }

    pub fn index_of(&self, state: &FockState) -> Option<usize> {
        self.index.get(state).copied()
    }

    /// Same states, different fermionic sign convention.
    pub fn with_mode_order(mut self, order: ModeOrder) -> Self {
        self.order = order;
        self
    }
}

pub fn enumerate_basis(n_sites: usize, statistics: Statistics, sector: SectorSpec) -> Result<Basis> {
    if n_sites == 0 {
        return Err(Error::InvalidSector("n_sites must be at least 1".into()));
    }
    if let Some(c) = sector.cutoff {
        if c < 0 {
            return Err(Error::InvalidSector(format!("negative cutoff {c}")));
        }
    }
    let total = sector.total_atoms();
    let mut cap = match sector.cutoff {
        Some(c) => (c as u32).min(total),
        None => total,
    };
    if statistics == Statistics::Fermion {
        cap = cap.min(1);
    }

    let mut states = Vec::new();
    let mut current: Vec<[u16; 2]> = Vec::with_capacity(n_sites);
    fill_sites(
        n_sites,
        cap,
        &sector,
        &mut current,
        0,
        0,
        &mut |occ: &[[u16; 2]]| {
            states.push(FockState {
                occupations: occ.to_vec(),
                statistics,
            })
        },
    );
    if states.is_empty() {
        return Err(Error::EmptyBasis);
    }
    let index = states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();
    Ok(Basis {
        n_sites,
        statistics,
        order: ModeOrder::SiteMajor,
        sector,
        states,
        index,
    })
}

// Depth-first over sites with ascending occupations, which yields the
// lexicographic order of the occupation tuples directly.
fn fill_sites(
    n_sites: usize,
    cap: u32,
    sector: &SectorSpec,
    current: &mut Vec<[u16; 2]>,
    used_up: u32,
    used_down: u32,
    emit: &mut dyn FnMut(&[[u16; 2]]),
) {
    let site = current.len();
    if site == n_sites {
        let ok = match sector.numbers {
            SectorNumbers::Fixed { up, down } => used_up == up && used_down == down,
            SectorNumbers::Total(n) => used_up + used_down == n,
        };
        if ok {
            emit(current);
        }
        return;
    }
    let (max_up, max_down) = match sector.numbers {
        SectorNumbers::Fixed { up, down } => (up - used_up, down - used_down),
        SectorNumbers::Total(n) => {
            let left = n - used_up - used_down;
            (left, left)
        }
    };
    for a in 0..=max_up.min(cap) {
        for b in 0..=max_down.min(cap) {
            if let SectorNumbers::Total(n) = sector.numbers {
                if used_up + used_down + a + b > n {
                    break;
                }
            }
            if sector.forbid_mixed && a > 0 && b > 0 {
                continue;
            }
            current.push([a as u16, b as u16]);
            fill_sites(n_sites, cap, sector, current, used_up + a, used_down + b, emit);
            current.pop();
        }
    }
}
