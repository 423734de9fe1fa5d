//! Zones, loads, and transmission corridors.

use std::collections::{BTreeMap, HashMap, HashSet};

use thiserror::Error;

use crate::temporal::{Calendar, TimepointId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Zone {
    pub id: String,
    pub interconnect: String,
}

impl Zone {
    pub fn new(id: impl Into<String>, interconnect: impl Into<String>) -> Self {
        Self { id: id.into(), interconnect: interconnect.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadProfile {
    pub zone: String,
    pub demand: BTreeMap<TimepointId, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corridor {
    pub id: String,
    pub zone_a: String,
    pub zone_b: String,
    pub existing_mw: f64,
    pub loss_fraction: f64,
    /// Annualized, distance-inclusive, $/MW-yr.
    pub capital_cost: f64,
    pub fixed_om: f64,
    pub new_build_allowed: bool,
    pub max_new_mw: Option<f64>,
    /// Reporting only.
    pub length_miles: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TransmissionMode {
    Existing,
    Within,
    Full,
}

impl TransmissionMode {
    pub fn code(self) -> char {
        match self {
            Self::Existing => 'E',
            Self::Within => 'I',
            Self::Full => 'O',
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum NetworkError {
    #[error("no zones defined")]
    NoZones,
    #[error("duplicate zone `{0}`")]
    DuplicateZone(String),
    #[error("zone `{0}` has an empty interconnect label")]
    EmptyInterconnect(String),
    #[error("corridor `{corridor}` references unknown zone `{zone}`")]
    DanglingZone { corridor: String, zone: String },
    #[error("corridor `{0}` connects a zone to itself")]
    SelfLoop(String),
    #[error("corridor `{0}` duplicates an existing zone pair")]
    DuplicateCorridor(String),
    #[error("corridor `{id}`: {message}")]
    InvalidCorridor { id: String, message: String },
    #[error("load profile for unknown zone `{0}`")]
    UnknownLoadZone(String),
    #[error("zone `{0}` has more than one load profile")]
    DuplicateLoad(String),
    #[error("zone `{zone}` has no demand at timepoint {timepoint}")]
    MissingDemand { zone: String, timepoint: usize },
    #[error("zone `{zone}` has demand at timepoint {timepoint} outside the calendar")]
    ExtraDemand { zone: String, timepoint: usize },
    #[error("zone `{zone}` has invalid demand {value} at timepoint {timepoint}")]
    BadDemand { zone: String, timepoint: usize, value: f64 },
}

/// Validated topology plus dense per-zone demand.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    zones: Vec<Zone>,
    corridors: Vec<Corridor>,
    demand: Vec<Vec<f64>>,
    index: HashMap<String, usize>,
}

pub fn validate_network(
    zones: Vec<Zone>,
    corridors: Vec<Corridor>,
    loads: Vec<LoadProfile>,
    calendar: &Calendar,
) -> Result<Network, NetworkError> {
    if zones.is_empty() {
        return Err(NetworkError::NoZones);
    }
    let mut index = HashMap::new();
    for (k, z) in zones.iter().enumerate() {
        if z.interconnect.trim().is_empty() {
            return Err(NetworkError::EmptyInterconnect(z.id.clone()));
        }
        if index.insert(z.id.clone(), k).is_some() {
            return Err(NetworkError::DuplicateZone(z.id.clone()));
        }
    }
    let mut pairs = HashSet::new();
    for c in &corridors {
        for zone in [&c.zone_a, &c.zone_b] {
            if !index.contains_key(zone) {
                return Err(NetworkError::DanglingZone { corridor: c.id.clone(), zone: zone.clone() });
            }
        }
        if c.zone_a == c.zone_b {
            return Err(NetworkError::SelfLoop(c.id.clone()));
        }
        let key = if c.zone_a < c.zone_b {
            (c.zone_a.clone(), c.zone_b.clone())
        } else {
            (c.zone_b.clone(), c.zone_a.clone())
        };
        if !pairs.insert(key) {
            return Err(NetworkError::DuplicateCorridor(c.id.clone()));
        }
        let bad = |message: &str| NetworkError::InvalidCorridor { id: c.id.clone(), message: message.into() };
        if !(c.existing_mw >= 0.0 && c.existing_mw.is_finite()) {
            return Err(bad("existing_mw must be finite and non-negative"));
        }
        if !(0.0..1.0).contains(&c.loss_fraction) {
            return Err(bad("loss_fraction must lie in [0, 1)"));
        }
        if !(c.capital_cost >= 0.0 && c.fixed_om >= 0.0) {
            return Err(bad("costs must be non-negative"));
        }
        if c.max_new_mw.is_some_and(|m| !(m >= 0.0)) {
            return Err(bad("max_new_mw must be non-negative"));
        }
    }

    let t_count = calendar.len();
    let mut demand: Vec<Option<Vec<f64>>> = vec![None; zones.len()];
    for lp in loads {
        let z = *index.get(&lp.zone).ok_or_else(|| NetworkError::UnknownLoadZone(lp.zone.clone()))?;
        if demand[z].is_some() {
            return Err(NetworkError::DuplicateLoad(lp.zone));
        }
        let mut dense = vec![f64::NAN; t_count];
        for (&t, &mw) in &lp.demand {
            if t.0 >= t_count {
                return Err(NetworkError::ExtraDemand { zone: lp.zone.clone(), timepoint: t.0 });
            }
            if !(mw >= 0.0 && mw.is_finite()) {
                return Err(NetworkError::BadDemand { zone: lp.zone.clone(), timepoint: t.0, value: mw });
            }
            dense[t.0] = mw;
        }
        if let Some(t) = dense.iter().position(|v| v.is_nan()) {
            return Err(NetworkError::MissingDemand { zone: lp.zone, timepoint: t });
        }
        demand[z] = Some(dense);
    }
    let demand = demand
        .into_iter()
        .enumerate()
        .map(|(z, d)| {
            d.ok_or_else(|| NetworkError::MissingDemand { zone: zones[z].id.clone(), timepoint: 0 })
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(Network { zones, corridors, demand, index })
}

impl Network {
    pub fn zones(&self) -> &[Zone] {
        &self.zones
    }

    pub fn corridors(&self) -> &[Corridor] {
        &self.corridors
    }

    pub fn zone_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn demand(&self, zone: usize, t: usize) -> f64 {
        self.demand[zone][t]
    }

    pub fn zone_demand(&self, zone: usize) -> &[f64] {
        &self.demand[zone]
    }

    /// Same topology with every corridor loss set to zero.
    pub fn lossless(&self) -> Network {
        let mut n = self.clone();
        for c in &mut n.corridors {
            c.loss_fraction = 0.0;
        }
        n
    }

    pub fn expansion_allowed(&self, corridor: &Corridor, mode: TransmissionMode) -> bool {
        expansion_allowed(corridor, mode, &self.zones)
    }
}

pub fn expansion_allowed(corridor: &Corridor, mode: TransmissionMode, zones: &[Zone]) -> bool {
    match mode {
        TransmissionMode::Existing => false,
        TransmissionMode::Full => corridor.new_build_allowed,
        TransmissionMode::Within => {
            let ic = |id: &str| zones.iter().find(|z| z.id == id).map(|z| z.interconnect.as_str());
            corridor.new_build_allowed
                && ic(&corridor.zone_a).is_some()
                && ic(&corridor.zone_a) == ic(&corridor.zone_b)
        }
    }
}
