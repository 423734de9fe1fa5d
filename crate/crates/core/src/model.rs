//! The model under construction: LP, cost registry, balance and emission
//! ledgers, and the variable handles each component registered.

use thiserror::Error;

use crate::costing::{CostRegistry, CostingError};
use crate::generation::GeneratorVars;
use crate::hydro_hydrogen::{HydroVars, HydrogenVars};
use crate::lp::{LinearProgram, LpError, RowId, VarId};
use crate::storage::StorageVars;
use crate::transmission::CorridorVars;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Costing(#[from] CostingError),
    #[error("{kind} `{id}`: {message}")]
    Invalid { kind: &'static str, id: String, message: String },
    #[error("{kind} `{id}` references unknown zone `{zone}`")]
    UnknownZone { kind: &'static str, id: String, zone: String },
    #[error("generator `{id}` references unknown fuel `{fuel}`")]
    UnknownFuel { id: String, fuel: String },
    #[error("carbon policy needs emission terms, but no generators were registered")]
    NoEmissionTerms,
}

impl ModelError {
    pub(crate) fn invalid(kind: &'static str, id: &str, message: impl Into<String>) -> Self {
        Self::Invalid { kind, id: id.into(), message: message.into() }
    }
}

/// Injection and withdrawal terms per (zone, timepoint).
#[derive(Debug, Clone, Default)]
pub struct BalanceLedger {
    timepoints: usize,
    inject: Vec<Vec<(VarId, f64)>>,
    withdraw: Vec<Vec<(VarId, f64)>>,
}

impl BalanceLedger {
    pub fn new(zones: usize, timepoints: usize) -> Self {
        Self {
            timepoints,
            inject: vec![Vec::new(); zones * timepoints],
            withdraw: vec![Vec::new(); zones * timepoints],
        }
    }

    pub fn inject(&mut self, zone: usize, t: usize, var: VarId, coef: f64) {
        self.inject[zone * self.timepoints + t].push((var, coef));
    }

    pub fn withdraw(&mut self, zone: usize, t: usize, var: VarId, coef: f64) {
        self.withdraw[zone * self.timepoints + t].push((var, coef));
    }

    pub fn injections(&self, zone: usize, t: usize) -> &[(VarId, f64)] {
        &self.inject[zone * self.timepoints + t]
    }

    pub fn withdrawals(&self, zone: usize, t: usize) -> &[(VarId, f64)] {
        &self.withdraw[zone * self.timepoints + t]
    }
}

/// Hourly tCO2/h expressions, one list of (dispatch, t/MWh) per timepoint.
#[derive(Debug, Clone, Default)]
pub struct EmissionLedger {
    pub registered: bool,
    pub per_timepoint: Vec<Vec<(VarId, f64)>>,
}

impl EmissionLedger {
    pub fn new(timepoints: usize) -> Self {
        Self { registered: false, per_timepoint: vec![Vec::new(); timepoints] }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Model {
    pub lp: LinearProgram,
    pub costs: CostRegistry,
    pub balance: BalanceLedger,
    pub emissions: EmissionLedger,
    pub generators: Vec<GeneratorVars>,
    pub storage: Vec<StorageVars>,
    pub hydro: Vec<HydroVars>,
    pub hydrogen: Vec<HydrogenVars>,
    pub corridors: Vec<CorridorVars>,
    /// `balance_rows[z][t]`, filled when the balance is assembled.
    pub balance_rows: Vec<Vec<RowId>>,
    pub carbon_cap_row: Option<RowId>,
}

impl Model {
    pub fn new(zones: usize, timepoints: usize) -> Self {
        Self {
            balance: BalanceLedger::new(zones, timepoints),
            emissions: EmissionLedger::new(timepoints),
            ..Default::default()
        }
    }
}

/// Zone index lookup shared by the component registrations.
pub(crate) fn zone_of(
    network: &crate::network::Network,
    kind: &'static str,
    id: &str,
    zone: &str,
) -> Result<usize, ModelError> {
    network.zone_index(zone).ok_or_else(|| ModelError::UnknownZone {
        kind,
        id: id.into(),
        zone: zone.into(),
    })
}

pub(crate) fn finite_nonneg(kind: &'static str, id: &str, field: &str, v: f64) -> Result<(), ModelError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ModelError::invalid(kind, id, format!("{field} must be finite and non-negative, got {v}")))
    }
}

pub(crate) fn upper(cap: Option<f64>) -> f64 {
    cap.unwrap_or(f64::INFINITY)
}
