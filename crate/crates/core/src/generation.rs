//! Generator build, capacity and dispatch variables with their costs and
//! emissions.

use std::collections::HashMap;

use crate::costing::{annualize_overnight, CostCategory, Expr, FinancialParams};
use crate::lp::{RowId, Sense, VarId};
use crate::model::{finite_nonneg, zone_of, Model, ModelError};
use crate::network::Network;
use crate::temporal::Calendar;

/// Capacity factors above 1 are accepted up to this overrating margin.
pub const CF_EPSILON: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct Fuel {
    pub id: String,
    /// $/MMBtu.
    pub price: f64,
    /// tCO2/MMBtu.
    pub emissions_factor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CapitalCost {
    Overnight { cost_per_mw: f64, lifetime_years: f64 },
    Annualized(f64),
}

impl CapitalCost {
    /// $/MW-yr.
    pub fn annual(&self, financials: &FinancialParams) -> Result<f64, ModelError> {
        Ok(match *self {
            CapitalCost::Annualized(a) => a,
            CapitalCost::Overnight { cost_per_mw, lifetime_years } => {
                annualize_overnight(cost_per_mw, financials.interest_rate, lifetime_years)?
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CapacityFactor {
    Constant(f64),
    Profile(Vec<f64>),
}

impl CapacityFactor {
    pub fn at(&self, t: usize) -> f64 {
        match self {
            CapacityFactor::Constant(c) => *c,
            CapacityFactor::Profile(p) => p[t],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorProject {
    pub id: String,
    pub zone: String,
    pub technology: String,
    pub existing_mw: f64,
    pub buildable: bool,
    pub max_total_mw: Option<f64>,
    pub capital: CapitalCost,
    /// $/MW-yr, charged on total capacity.
    pub fixed_om: f64,
    /// $/MWh.
    pub variable_om: f64,
    /// MMBtu/MWh.
    pub heat_rate: f64,
    pub fuel: Option<String>,
    pub capacity_factor: CapacityFactor,
    /// Constant $/yr for capital already spent on existing capacity.
    pub sunk_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorVars {
    pub project: usize,
    pub zone: usize,
    pub build: VarId,
    pub capacity: VarId,
    pub dispatch: Vec<VarId>,
    pub capacity_row: RowId,
    pub dispatch_rows: Vec<RowId>,
    pub cap_row: Option<RowId>,
    /// $/MW-yr on new builds.
    pub annual_capital: f64,
    /// Variable O&M plus fuel, $/MWh.
    pub energy_cost: f64,
    /// tCO2/MWh.
    pub emission_rate: f64,
}

pub fn emissions_rate(project: &GeneratorProject, fuels: &[Fuel]) -> f64 {
    project
        .fuel
        .as_ref()
        .and_then(|f| fuels.iter().find(|x| &x.id == f))
        .map_or(0.0, |f| project.heat_rate * f.emissions_factor)
}

pub fn validate_generator(
    p: &GeneratorProject,
    calendar: &Calendar,
    fuels: &[Fuel],
) -> Result<(), ModelError> {
    const K: &str = "generator";
    finite_nonneg(K, &p.id, "existing_mw", p.existing_mw)?;
    if let Some(m) = p.max_total_mw {
        if !(m >= p.existing_mw) {
            return Err(ModelError::invalid(K, &p.id, format!("max_total_mw {m} below existing_mw")));
        }
    }
    for (field, v) in [
        ("fixed_om", p.fixed_om),
        ("variable_om", p.variable_om),
        ("heat_rate", p.heat_rate),
        ("sunk_cost", p.sunk_cost),
    ] {
        finite_nonneg(K, &p.id, field, v)?;
    }
    match p.capital {
        CapitalCost::Annualized(a) => finite_nonneg(K, &p.id, "capital cost", a)?,
        CapitalCost::Overnight { cost_per_mw, lifetime_years } => {
            finite_nonneg(K, &p.id, "overnight cost", cost_per_mw)?;
            if !(lifetime_years >= 1.0) {
                return Err(ModelError::invalid(K, &p.id, "lifetime must be at least 1 year"));
            }
        }
    }
    let check_cf = |t: Option<usize>, v: f64| {
        if (0.0..=1.0 + CF_EPSILON).contains(&v) {
            Ok(())
        } else {
            let at = t.map_or(String::new(), |t| format!(" at timepoint {t}"));
            Err(ModelError::invalid(K, &p.id, format!("capacity factor {v}{at} outside [0, {}]", 1.0 + CF_EPSILON)))
        }
    };
    match &p.capacity_factor {
        CapacityFactor::Constant(c) => check_cf(None, *c)?,
        CapacityFactor::Profile(prof) => {
            if prof.len() != calendar.len() {
                return Err(ModelError::invalid(
                    K,
                    &p.id,
                    format!("capacity factor defined for {} of {} timepoints", prof.len(), calendar.len()),
                ));
            }
            for (t, &v) in prof.iter().enumerate() {
                check_cf(Some(t), v)?;
            }
        }
    }
    if let Some(f) = &p.fuel {
        if !fuels.iter().any(|x| &x.id == f) {
            return Err(ModelError::UnknownFuel { id: p.id.clone(), fuel: f.clone() });
        }
    }
    Ok(())
}

pub fn register_generators(
    model: &mut Model,
    calendar: &Calendar,
    network: &Network,
    projects: &[GeneratorProject],
    fuels: &[Fuel],
    financials: &FinancialParams,
) -> Result<(), ModelError> {
    let fuel_price: HashMap<&str, f64> = fuels.iter().map(|f| (f.id.as_str(), f.price)).collect();
    for (gi, p) in projects.iter().enumerate() {
        validate_generator(p, calendar, fuels)?;
        let zone = zone_of(network, "generator", &p.id, &p.zone)?;
        let annual_capital = p.capital.annual(financials)?;
        let lp = &mut model.lp;

        // The total cap lives in its own row so that its dual carries the
        // site's scarcity rent; the build bound only switches building off.
        let build_ub = if p.buildable { f64::INFINITY } else { 0.0 };
        let build = lp.add_variable(0.0, build_ub, 0.0, format!("build:{}", p.id))?;
        let capacity = lp.add_variable(0.0, f64::INFINITY, 0.0, format!("capacity:{}", p.id))?;
        let capacity_row = lp.add_constraint(
            [(capacity, 1.0), (build, -1.0)],
            Sense::Eq,
            p.existing_mw,
            format!("capacity_def:{}", p.id),
        )?;
        let cap_row = match p.max_total_mw {
            Some(m) => Some(lp.add_constraint(
                [(capacity, 1.0)],
                Sense::Le,
                m,
                format!("capacity_cap:{}", p.id),
            )?),
            None => None,
        };

        let fuel_cost = p.fuel.as_deref().map_or(0.0, |f| fuel_price[f] * p.heat_rate);
        let emission_rate = emissions_rate(p, fuels);
        let mut dispatch = Vec::with_capacity(calendar.len());
        let mut dispatch_rows = Vec::with_capacity(calendar.len());
        for t in 0..calendar.len() {
            let d = lp.add_variable(0.0, f64::INFINITY, 0.0, format!("dispatch:{}:{t}", p.id))?;
            let eta = p.capacity_factor.at(t);
            let terms = if eta == 0.0 { vec![(d, 1.0)] } else { vec![(d, 1.0), (capacity, -eta)] };
            dispatch_rows.push(lp.add_constraint(terms, Sense::Le, 0.0, format!("dispatch_limit:{}:{t}", p.id))?);
            dispatch.push(d);
        }

        let costs = &mut model.costs;
        let lp = &model.lp;
        costs.register_fixed(lp, format!("capital:{}", p.id), CostCategory::Generation, Expr::term(build, annual_capital))?;
        costs.register_fixed(lp, format!("fixed_om:{}", p.id), CostCategory::OperationsMaintenance, Expr::term(capacity, p.fixed_om))?;
        if p.sunk_cost > 0.0 {
            costs.register_fixed(lp, format!("sunk:{}", p.id), CostCategory::Sunk, Expr::constant(p.sunk_cost))?;
        }
        for (t, &d) in dispatch.iter().enumerate() {
            if p.variable_om != 0.0 {
                costs.register_variable(lp, calendar, format!("variable_om:{}", p.id), CostCategory::OperationsMaintenance, t, Expr::term(d, p.variable_om))?;
            }
            if fuel_cost != 0.0 {
                costs.register_variable(lp, calendar, format!("fuel:{}", p.id), CostCategory::Fuel, t, Expr::term(d, fuel_cost))?;
            }
            model.balance.inject(zone, t, d, 1.0);
            if emission_rate > 0.0 {
                model.emissions.per_timepoint[t].push((d, emission_rate));
            }
        }
        model.generators.push(GeneratorVars {
            project: gi,
            zone,
            build,
            capacity,
            dispatch,
            capacity_row,
            dispatch_rows,
            cap_row,
            annual_capital,
            energy_cost: p.variable_om + fuel_cost,
            emission_rate,
        });
    }
    model.emissions.registered = true;
    Ok(())
}
