//! Hydro with per-series minimum and average flows, and the zonal hydrogen
//! chain: electrolyzer, liquifier, tank, fuel cell.
//!
//! Hydrogen must be liquefied before it is stored. The tank level is chained
//! across timeseries in calendar order and wraps once per year, so it is the
//! one component that can carry energy from one series to another.

use crate::costing::{CostCategory, Expr};
use crate::lp::{RowId, Sense, VarId};
use crate::model::{finite_nonneg, upper, zone_of, Model, ModelError};
use crate::network::Network;
use crate::temporal::Calendar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HydroSeries {
    pub min_flow_mw: f64,
    pub avg_flow_mw: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HydroProject {
    pub id: String,
    pub zone: String,
    pub capacity_mw: f64,
    /// One entry per calendar timeseries, in calendar order.
    pub series: Vec<HydroSeries>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HydroVars {
    pub project: usize,
    pub zone: usize,
    pub dispatch: Vec<VarId>,
    pub average_rows: Vec<RowId>,
}

pub fn validate_hydro(p: &HydroProject, calendar: &Calendar) -> Result<(), ModelError> {
    const K: &str = "hydro";
    finite_nonneg(K, &p.id, "capacity_mw", p.capacity_mw)?;
    if p.series.len() != calendar.timeseries().len() {
        return Err(ModelError::invalid(
            K,
            &p.id,
            format!("flows given for {} of {} timeseries", p.series.len(), calendar.timeseries().len()),
        ));
    }
    for (s, f) in p.series.iter().enumerate() {
        let sid = &calendar.timeseries()[s].id;
        if !(f.min_flow_mw >= 0.0 && f.min_flow_mw <= f.avg_flow_mw && f.avg_flow_mw <= p.capacity_mw) {
            return Err(ModelError::invalid(
                K,
                &p.id,
                format!(
                    "series `{sid}`: need 0 <= min_flow ({}) <= avg_flow ({}) <= capacity ({})",
                    f.min_flow_mw, f.avg_flow_mw, p.capacity_mw
                ),
            ));
        }
    }
    Ok(())
}

pub fn register_hydro(
    model: &mut Model,
    calendar: &Calendar,
    network: &Network,
    projects: &[HydroProject],
) -> Result<(), ModelError> {
    for (hi, p) in projects.iter().enumerate() {
        validate_hydro(p, calendar)?;
        let zone = zone_of(network, "hydro", &p.id, &p.zone)?;
        let mut dispatch = Vec::with_capacity(calendar.len());
        let mut average_rows = Vec::new();
        for (s, ts) in calendar.timeseries().iter().enumerate() {
            let flows = p.series[s];
            let mut terms = Vec::new();
            for t in calendar.series_range(s) {
                let d = model.lp.add_variable(
                    flows.min_flow_mw,
                    p.capacity_mw,
                    0.0,
                    format!("hydro:{}:{t}", p.id),
                )?;
                terms.push((d, calendar.hours(t)));
                model.balance.inject(zone, t, d, 1.0);
                dispatch.push(d);
            }
            average_rows.push(model.lp.add_constraint(
                terms,
                Sense::Eq,
                flows.avg_flow_mw * ts.duration_hours(),
                format!("hydro_average:{}:{}", p.id, ts.id),
            )?);
        }
        model.hydro.push(HydroVars { project: hi, zone, dispatch, average_rows });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct HydrogenZone {
    pub zone: String,
    /// $/MW-yr.
    pub electrolyzer_cost: f64,
    /// $/MW-yr.
    pub fuel_cell_cost: f64,
    /// $/(kg/h)-yr.
    pub liquifier_cost: f64,
    /// $/kg-yr.
    pub tank_cost: f64,
    /// kg produced per MWh consumed.
    pub electrolyzer_kg_per_mwh: f64,
    /// MWh of electricity per kg liquefied.
    pub liquifier_mwh_per_kg: f64,
    /// MWh delivered per kg consumed.
    pub fuel_cell_mwh_per_kg: f64,
    pub max_electrolyzer_mw: Option<f64>,
    pub max_fuel_cell_mw: Option<f64>,
    pub max_liquifier_kg_per_h: Option<f64>,
    pub max_tank_kg: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HydrogenVars {
    pub entry: usize,
    pub zone: usize,
    pub electrolyzer: VarId,
    pub liquifier: VarId,
    pub tank: VarId,
    pub fuel_cell: VarId,
    /// MW drawn by electrolysis.
    pub electrolysis: Vec<VarId>,
    /// kg/h liquefied.
    pub liquefaction: Vec<VarId>,
    /// kg stored at the end of each timepoint.
    pub level: Vec<VarId>,
    /// MW delivered by the fuel cell.
    pub generation: Vec<VarId>,
}

pub fn validate_hydrogen(h: &HydrogenZone) -> Result<(), ModelError> {
    const K: &str = "hydrogen";
    for (field, v) in [
        ("electrolyzer_cost", h.electrolyzer_cost),
        ("fuel_cell_cost", h.fuel_cell_cost),
        ("liquifier_cost", h.liquifier_cost),
        ("tank_cost", h.tank_cost),
        ("liquifier_mwh_per_kg", h.liquifier_mwh_per_kg),
    ] {
        finite_nonneg(K, &h.zone, field, v)?;
    }
    for (field, v) in [
        ("electrolyzer_kg_per_mwh", h.electrolyzer_kg_per_mwh),
        ("fuel_cell_mwh_per_kg", h.fuel_cell_mwh_per_kg),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(ModelError::invalid(K, &h.zone, format!("{field} must be positive, got {v}")));
        }
    }
    for v in [h.max_electrolyzer_mw, h.max_fuel_cell_mw, h.max_liquifier_kg_per_h, h.max_tank_kg]
        .into_iter()
        .flatten()
    {
        finite_nonneg(K, &h.zone, "capacity cap", v)?;
    }
    Ok(())
}

pub fn register_hydrogen(
    model: &mut Model,
    calendar: &Calendar,
    network: &Network,
    zones: &[HydrogenZone],
) -> Result<(), ModelError> {
    for (hi, h) in zones.iter().enumerate() {
        validate_hydrogen(h)?;
        let zone = zone_of(network, "hydrogen", &h.zone, &h.zone)?;
        let z = &h.zone;
        let lp = &mut model.lp;
        let electrolyzer = lp.add_variable(0.0, upper(h.max_electrolyzer_mw), 0.0, format!("h2_electrolyzer:{z}"))?;
        let liquifier = lp.add_variable(0.0, upper(h.max_liquifier_kg_per_h), 0.0, format!("h2_liquifier:{z}"))?;
        let tank = lp.add_variable(0.0, upper(h.max_tank_kg), 0.0, format!("h2_tank:{z}"))?;
        let fuel_cell = lp.add_variable(0.0, upper(h.max_fuel_cell_mw), 0.0, format!("h2_fuel_cell:{z}"))?;

        let n = calendar.len();
        let mut electrolysis = Vec::with_capacity(n);
        let mut liquefaction = Vec::with_capacity(n);
        let mut level = Vec::with_capacity(n);
        let mut generation = Vec::with_capacity(n);
        for t in 0..n {
            electrolysis.push(lp.add_variable(0.0, f64::INFINITY, 0.0, format!("h2_electrolysis:{z}:{t}"))?);
            liquefaction.push(lp.add_variable(0.0, f64::INFINITY, 0.0, format!("h2_liquefaction:{z}:{t}"))?);
            level.push(lp.add_variable(0.0, f64::INFINITY, 0.0, format!("h2_level:{z}:{t}"))?);
            generation.push(lp.add_variable(0.0, f64::INFINITY, 0.0, format!("h2_generation:{z}:{t}"))?);
        }
        for t in 0..n {
            lp.add_constraint([(electrolysis[t], 1.0), (electrolyzer, -1.0)], Sense::Le, 0.0, format!("h2_electrolyzer_limit:{z}:{t}"))?;
            // Everything produced goes through the liquifier.
            lp.add_constraint(
                [(liquefaction[t], 1.0), (electrolysis[t], -h.electrolyzer_kg_per_mwh)],
                Sense::Eq,
                0.0,
                format!("h2_production:{z}:{t}"),
            )?;
            lp.add_constraint([(liquefaction[t], 1.0), (liquifier, -1.0)], Sense::Le, 0.0, format!("h2_liquifier_limit:{z}:{t}"))?;
            lp.add_constraint([(level[t], 1.0), (tank, -1.0)], Sense::Le, 0.0, format!("h2_tank_limit:{z}:{t}"))?;
            lp.add_constraint([(generation[t], 1.0), (fuel_cell, -1.0)], Sense::Le, 0.0, format!("h2_fuel_cell_limit:{z}:{t}"))?;
            let hrs = calendar.hours(t);
            let prev = calendar.prev_in_year(t);
            lp.add_constraint(
                [
                    (level[t], 1.0),
                    (level[prev], -1.0),
                    (liquefaction[t], -hrs),
                    (generation[t], hrs / h.fuel_cell_mwh_per_kg),
                ],
                Sense::Eq,
                0.0,
                format!("h2_level_balance:{z}:{t}"),
            )?;
            model.balance.withdraw(zone, t, electrolysis[t], 1.0);
            if h.liquifier_mwh_per_kg > 0.0 {
                model.balance.withdraw(zone, t, liquefaction[t], h.liquifier_mwh_per_kg);
            }
            model.balance.inject(zone, t, generation[t], 1.0);
        }

        let costs = &mut model.costs;
        let lp = &model.lp;
        for (name, var, cost) in [
            ("electrolyzer", electrolyzer, h.electrolyzer_cost),
            ("liquifier", liquifier, h.liquifier_cost),
            ("tank", tank, h.tank_cost),
            ("fuel_cell", fuel_cell, h.fuel_cell_cost),
        ] {
            costs.register_fixed(lp, format!("h2_{name}:{z}"), CostCategory::Hydrogen, Expr::term(var, cost))?;
        }
        model.hydrogen.push(HydrogenVars {
            entry: hi,
            zone,
            electrolyzer,
            liquifier,
            tank,
            fuel_cell,
            electrolysis,
            liquefaction,
            level,
            generation,
        });
    }
    Ok(())
}
