//! Storage with separately sized power and energy, a state-of-charge recursion
//! and a cyclic boundary inside each timeseries.
//!
//! The round-trip loss is taken entirely on the charging side: one MWh
//! charged adds `round_trip_efficiency` MWh to the state of charge and
//! discharge is lossless.

use crate::costing::{CostCategory, Expr};
use crate::lp::{RowId, Sense, VarId};
use crate::model::{finite_nonneg, upper, zone_of, Model, ModelError};
use crate::network::Network;
use crate::temporal::Calendar;

#[derive(Debug, Clone, PartialEq)]
pub struct StorageProject {
    pub id: String,
    pub zone: String,
    pub technology: String,
    pub existing_power_mw: f64,
    pub existing_energy_mwh: f64,
    pub power_buildable: bool,
    pub energy_buildable: bool,
    pub max_power_mw: Option<f64>,
    pub max_energy_mwh: Option<f64>,
    /// $/MW-yr on new power capacity.
    pub power_cost: f64,
    /// $/MWh-yr on new energy capacity.
    pub energy_cost: f64,
    /// $/MW-yr on total power capacity.
    pub fixed_om: f64,
    pub round_trip_efficiency: f64,
    pub max_duration_hours: Option<f64>,
    pub sunk_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StorageVars {
    pub project: usize,
    pub zone: usize,
    pub power_build: VarId,
    pub energy_build: VarId,
    pub power: VarId,
    pub energy: VarId,
    pub charge: Vec<VarId>,
    pub discharge: Vec<VarId>,
    pub soc: Vec<VarId>,
    pub soc_rows: Vec<RowId>,
}

pub fn validate_storage(p: &StorageProject) -> Result<(), ModelError> {
    const K: &str = "storage";
    for (field, v) in [
        ("existing_power_mw", p.existing_power_mw),
        ("existing_energy_mwh", p.existing_energy_mwh),
        ("power_cost", p.power_cost),
        ("energy_cost", p.energy_cost),
        ("fixed_om", p.fixed_om),
        ("sunk_cost", p.sunk_cost),
    ] {
        finite_nonneg(K, &p.id, field, v)?;
    }
    if !(p.round_trip_efficiency > 0.0 && p.round_trip_efficiency <= 1.0) {
        return Err(ModelError::invalid(
            K,
            &p.id,
            format!("round_trip_efficiency {} outside (0, 1]", p.round_trip_efficiency),
        ));
    }
    if p.max_power_mw.is_some_and(|m| !(m >= p.existing_power_mw)) {
        return Err(ModelError::invalid(K, &p.id, "max_power_mw below existing power"));
    }
    if p.max_energy_mwh.is_some_and(|m| !(m >= p.existing_energy_mwh)) {
        return Err(ModelError::invalid(K, &p.id, "max_energy_mwh below existing energy"));
    }
    if p.max_duration_hours.is_some_and(|d| !(d > 0.0)) {
        return Err(ModelError::invalid(K, &p.id, "max_duration must be positive"));
    }
    Ok(())
}

pub fn register_storage(
    model: &mut Model,
    calendar: &Calendar,
    network: &Network,
    projects: &[StorageProject],
) -> Result<(), ModelError> {
    for (si, p) in projects.iter().enumerate() {
        validate_storage(p)?;
        let zone = zone_of(network, "storage", &p.id, &p.zone)?;
        let lp = &mut model.lp;
        let id = &p.id;

        let pb_ub = if p.power_buildable { upper(p.max_power_mw) - p.existing_power_mw } else { 0.0 };
        let eb_ub = if p.energy_buildable { upper(p.max_energy_mwh) - p.existing_energy_mwh } else { 0.0 };
        let power_build = lp.add_variable(0.0, pb_ub, 0.0, format!("build_power:{id}"))?;
        let energy_build = lp.add_variable(0.0, eb_ub, 0.0, format!("build_energy:{id}"))?;
        let power = lp.add_variable(0.0, f64::INFINITY, 0.0, format!("power:{id}"))?;
        let energy = lp.add_variable(0.0, f64::INFINITY, 0.0, format!("energy:{id}"))?;
        lp.add_constraint([(power, 1.0), (power_build, -1.0)], Sense::Eq, p.existing_power_mw, format!("power_def:{id}"))?;
        lp.add_constraint([(energy, 1.0), (energy_build, -1.0)], Sense::Eq, p.existing_energy_mwh, format!("energy_def:{id}"))?;
        if let Some(d) = p.max_duration_hours {
            lp.add_constraint([(energy, 1.0), (power, -d)], Sense::Le, 0.0, format!("duration:{id}"))?;
        }

        let n = calendar.len();
        let mut charge = Vec::with_capacity(n);
        let mut discharge = Vec::with_capacity(n);
        let mut soc = Vec::with_capacity(n);
        for t in 0..n {
            charge.push(lp.add_variable(0.0, f64::INFINITY, 0.0, format!("charge:{id}:{t}"))?);
            discharge.push(lp.add_variable(0.0, f64::INFINITY, 0.0, format!("discharge:{id}:{t}"))?);
            soc.push(lp.add_variable(0.0, f64::INFINITY, 0.0, format!("soc:{id}:{t}"))?);
        }
        let mut soc_rows = Vec::with_capacity(n);
        for t in 0..n {
            lp.add_constraint([(charge[t], 1.0), (power, -1.0)], Sense::Le, 0.0, format!("charge_limit:{id}:{t}"))?;
            lp.add_constraint([(discharge[t], 1.0), (power, -1.0)], Sense::Le, 0.0, format!("discharge_limit:{id}:{t}"))?;
            lp.add_constraint([(soc[t], 1.0), (energy, -1.0)], Sense::Le, 0.0, format!("soc_limit:{id}:{t}"))?;
            let h = calendar.hours(t);
            let prev = calendar.prev_in_series(t);
            // A one-timepoint series has prev == t and the soc terms cancel.
            let terms = vec![
                (soc[t], 1.0),
                (soc[prev], -1.0),
                (charge[t], -p.round_trip_efficiency * h),
                (discharge[t], h),
            ];
            soc_rows.push(lp.add_constraint(terms, Sense::Eq, 0.0, format!("soc_balance:{id}:{t}"))?);
            model.balance.inject(zone, t, discharge[t], 1.0);
            model.balance.withdraw(zone, t, charge[t], 1.0);
        }

        let costs = &mut model.costs;
        let lp = &model.lp;
        costs.register_fixed(lp, format!("power_capital:{id}"), CostCategory::Storage, Expr::term(power_build, p.power_cost))?;
        costs.register_fixed(lp, format!("energy_capital:{id}"), CostCategory::Storage, Expr::term(energy_build, p.energy_cost))?;
        costs.register_fixed(lp, format!("fixed_om:{id}"), CostCategory::OperationsMaintenance, Expr::term(power, p.fixed_om))?;
        if p.sunk_cost > 0.0 {
            costs.register_fixed(lp, format!("sunk:{id}"), CostCategory::Sunk, Expr::constant(p.sunk_cost))?;
        }
        model.storage.push(StorageVars {
            project: si,
            zone,
            power_build,
            energy_build,
            power,
            energy,
            charge,
            discharge,
            soc,
            soc_rows,
        });
    }
    Ok(())
}
