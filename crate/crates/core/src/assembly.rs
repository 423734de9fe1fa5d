//! Scenario definitions, model assembly, and the single-scenario pipeline.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::analytics::{self, LoadWeightedPrices, PriceSurface, RentStatement};
use crate::costing::CostCategory;
use crate::generation::register_generators;
use crate::hydro_hydrogen::{register_hydro, register_hydrogen};
use crate::inputs::InputBundle;
use crate::lp::{
    certify, minmax_row_duals, Certificate, LpError, RevisedSimplex, RowId, Sense, Solution,
    Status, Witness,
};
use crate::model::{Model, ModelError};
use crate::network::TransmissionMode;
use crate::policy::{annual_emissions, apply_carbon_policy, CarbonPolicy, SOCIAL_CARBON_PRICE};
use crate::storage::register_storage;
use crate::transmission::register_transmission;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EmissionsRegime {
    Least,
    Social,
    Zero,
}

impl EmissionsRegime {
    pub fn code(self) -> char {
        match self {
            Self::Least => 'L',
            Self::Social => 'S',
            Self::Zero => 'Z',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ScenarioSpec {
    pub emissions: EmissionsRegime,
    pub transmission: TransmissionMode,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown scenario label `{0}` (expected two letters from L/S/Z then E/I/O)")]
pub struct LabelError(pub String);

impl ScenarioSpec {
    pub const fn new(emissions: EmissionsRegime, transmission: TransmissionMode) -> Self {
        Self { emissions, transmission }
    }

    pub fn label(&self) -> String {
        format!("{}{}", self.emissions.code(), self.transmission.code())
    }

    /// The nine scenarios in report order.
    pub fn all() -> Vec<ScenarioSpec> {
        use EmissionsRegime::*;
        use TransmissionMode::*;
        let mut v = Vec::with_capacity(9);
        for e in [Least, Social, Zero] {
            for t in [Existing, Within, Full] {
                v.push(ScenarioSpec::new(e, t));
            }
        }
        v
    }

    /// `all` or a comma-separated label list; duplicates are dropped.
    pub fn parse_list(s: &str) -> Result<Vec<ScenarioSpec>, LabelError> {
        if s.trim().eq_ignore_ascii_case("all") {
            return Ok(Self::all());
        }
        let mut out: Vec<ScenarioSpec> = Vec::new();
        for part in s.split(',') {
            let spec: ScenarioSpec = part.trim().parse()?;
            if !out.contains(&spec) {
                out.push(spec);
            }
        }
        Ok(out)
    }
}

impl FromStr for ScenarioSpec {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let b = s.as_bytes();
        let err = || LabelError(s.to_string());
        if b.len() != 2 {
            return Err(err());
        }
        let e = match b[0] {
            b'L' => EmissionsRegime::Least,
            b'S' => EmissionsRegime::Social,
            b'Z' => EmissionsRegime::Zero,
            _ => return Err(err()),
        };
        let t = match b[1] {
            b'E' => TransmissionMode::Existing,
            b'I' => TransmissionMode::Within,
            b'O' => TransmissionMode::Full,
            _ => return Err(err()),
        };
        Ok(ScenarioSpec::new(e, t))
    }
}

impl fmt::Display for ScenarioSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// How balance-row duals are chosen when the optimal dual is not unique.
/// The basic dual is kept in the bundle either way, and hours where the two
/// choices disagree are flagged as degenerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualSelection {
    /// The basic dual of the final simplex basis.
    Basic,
    /// Among optimal duals, the one minimizing the largest hourly price.
    /// Spreads capacity rent over the hours that share it instead of
    /// loading it onto whichever hour the basis happens to pick.
    MinMax,
}

impl DualSelection {
    pub fn label(self) -> &'static str {
        match self {
            Self::Basic => "basic",
            Self::MinMax => "minmax",
        }
    }
}

impl FromStr for DualSelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "basic" => Ok(Self::Basic),
            "minmax" => Ok(Self::MinMax),
            _ => Err(format!("unknown dual selection `{s}` (expected basic or minmax)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOptions {
    pub carbon_price: f64,
    pub carbon_cap: f64,
    pub duals: DualSelection,
}

impl Default for ScenarioOptions {
    fn default() -> Self {
        Self { carbon_price: SOCIAL_CARBON_PRICE, carbon_cap: 0.0, duals: DualSelection::MinMax }
    }
}

impl ScenarioOptions {
    pub fn policy(&self, regime: EmissionsRegime) -> CarbonPolicy {
        match regime {
            EmissionsRegime::Least => CarbonPolicy::None,
            EmissionsRegime::Social => CarbonPolicy::Price(self.carbon_price),
            EmissionsRegime::Zero => CarbonPolicy::Cap(self.carbon_cap),
        }
    }
}

pub fn build_model(
    inputs: &InputBundle,
    scenario: ScenarioSpec,
    options: &ScenarioOptions,
) -> Result<Model, ModelError> {
    let cal = &inputs.calendar;
    let net = &inputs.network;
    let mut model = Model::new(net.zones().len(), cal.len());
    register_generators(&mut model, cal, net, &inputs.generators, &inputs.fuels, &inputs.financials)?;
    register_storage(&mut model, cal, net, &inputs.storage)?;
    register_hydro(&mut model, cal, net, &inputs.hydro)?;
    register_hydrogen(&mut model, cal, net, &inputs.hydrogen)?;
    register_transmission(&mut model, cal, net, scenario.transmission)?;
    apply_carbon_policy(&mut model, cal, options.policy(scenario.emissions))?;

    for (z, zone) in net.zones().iter().enumerate() {
        let mut rows = Vec::with_capacity(cal.len());
        for t in 0..cal.len() {
            let mut terms: Vec<_> = model.balance.injections(z, t).to_vec();
            terms.extend(model.balance.withdrawals(z, t).iter().map(|&(v, a)| (v, -a)));
            rows.push(model.lp.add_constraint(
                terms,
                Sense::Eq,
                net.demand(z, t),
                format!("balance:{}:{t}", zone.id),
            )?);
        }
        model.balance_rows.push(rows);
    }
    model.costs.apply(&mut model.lp, cal);
    Ok(model)
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{label}: {source}")]
    Model { label: String, source: ModelError },
    #[error("{label}: {source}")]
    Solver { label: String, source: LpError },
    #[error("{label}: infeasible{}", describe_witness(.witness))]
    Infeasible { label: String, witness: Option<Witness> },
    #[error("{label}: unbounded")]
    Unbounded { label: String },
    #[error("{label}: {message}")]
    Stored { label: String, message: String },
}

fn describe_witness(w: &Option<Witness>) -> String {
    match w {
        Some(Witness::Infeasibility { rows, .. }) if !rows.is_empty() => {
            format!(" ({} row(s) in the infeasibility witness)", rows.len())
        }
        _ => String::new(),
    }
}

impl ScenarioError {
    pub fn status(&self) -> &'static str {
        match self {
            Self::Infeasible { .. } => "infeasible",
            Self::Unbounded { .. } => "unbounded",
            Self::Model { .. } => "invalid",
            Self::Solver { .. } => "solver_error",
            Self::Stored { .. } => "invalid_solution",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorResult {
    pub id: String,
    pub zone: String,
    pub technology: String,
    pub existing_mw: f64,
    pub new_mw: f64,
    pub capacity_mw: f64,
    pub dispatch: Vec<f64>,
    /// $/MW-yr on new builds.
    pub annual_capital: f64,
    pub fixed_om: f64,
    /// $/MWh of variable O&M plus fuel.
    pub energy_cost: f64,
    /// $/MWh carbon charge in the objective.
    pub carbon_cost: f64,
    pub emission_rate: f64,
    pub interior_new_build: bool,
    /// Dual of the total-capacity cap row, $/MW-yr.
    pub cap_dual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StorageResult {
    pub id: String,
    pub zone: String,
    pub technology: String,
    pub existing_power_mw: f64,
    pub new_power_mw: f64,
    pub power_mw: f64,
    pub existing_energy_mwh: f64,
    pub new_energy_mwh: f64,
    pub energy_mwh: f64,
    pub charge: Vec<f64>,
    pub discharge: Vec<f64>,
    pub soc: Vec<f64>,
    pub power_cost: f64,
    pub energy_cost: f64,
    pub fixed_om: f64,
    pub interior_new_build: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HydroResult {
    pub id: String,
    pub zone: String,
    pub capacity_mw: f64,
    pub dispatch: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HydrogenResult {
    pub zone: String,
    pub electrolyzer_mw: f64,
    pub liquifier_kg_per_h: f64,
    pub tank_kg: f64,
    pub fuel_cell_mw: f64,
    pub electrolysis: Vec<f64>,
    pub liquefaction: Vec<f64>,
    pub level: Vec<f64>,
    pub generation: Vec<f64>,
    pub liquifier_mwh_per_kg: f64,
    /// Annual capital of the four assets, $/yr.
    pub annual_cost: f64,
    pub interior_new_build: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorridorResult {
    pub id: String,
    pub zone_a: String,
    pub zone_b: String,
    pub existing_mw: f64,
    pub new_mw: f64,
    pub capacity_mw: f64,
    pub send_ab: Vec<f64>,
    pub send_ba: Vec<f64>,
    pub loss_fraction: f64,
    pub capital_cost: f64,
    pub fixed_om: f64,
    pub length_miles: Option<f64>,
    pub expandable: bool,
}

/// Everything one scenario produces. Contains no timing information, so
/// repeated solves compare equal.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultsBundle {
    pub scenario: ScenarioSpec,
    pub status: Status,
    /// LP objective including the constant sunk capital, $/yr.
    pub objective: f64,
    /// Sum of the reported cost categories other than emissions, $/yr.
    pub direct_cost: f64,
    pub emissions_cost: f64,
    pub sunk_cost: f64,
    /// tCO2/yr.
    pub emissions: f64,
    /// The reported categories in report order, $/yr.
    pub costs: Vec<(CostCategory, f64)>,
    pub certificate: Certificate,
    pub basic_certificate: Certificate,
    pub duals: DualSelection,
    pub iterations: usize,
    pub zones: Vec<String>,
    pub weights: Vec<f64>,
    /// `loads[z][t]`, MW.
    pub loads: Vec<Vec<f64>>,
    pub prices: PriceSurface,
    /// `None` when there is no load at all.
    pub average_prices: Option<LoadWeightedPrices>,
    /// (zone, timepoint) pairs where more than one optimal dual was detected.
    pub degenerate: Vec<(usize, usize)>,
    pub generators: Vec<GeneratorResult>,
    pub storage: Vec<StorageResult>,
    pub hydro: Vec<HydroResult>,
    pub hydrogen: Vec<HydrogenResult>,
    pub corridors: Vec<CorridorResult>,
    pub rents: RentStatement,
    pub solution: Solution,
    /// Row duals of the final basis; equal to `solution.dual` under
    /// [`DualSelection::Basic`].
    pub basic_dual: Vec<f64>,
    pub basic_prices: PriceSurface,
    /// LP tags in model order, aligned with `solution`.
    pub variable_tags: Vec<String>,
    pub row_tags: Vec<String>,
}

/// Relative tolerance for classifying variables against their bounds.
const BOUND_TOL: f64 = 1e-7;

fn at_upper(x: f64, ub: f64) -> bool {
    ub.is_finite() && x >= ub - BOUND_TOL * ub.abs().max(1.0)
}

fn positive(x: f64) -> bool {
    x > BOUND_TOL
}

fn balance_targets(model: &Model, inputs: &InputBundle) -> Vec<(RowId, f64)> {
    let mut targets = Vec::new();
    for (z, rows) in model.balance_rows.iter().enumerate() {
        for (t, &r) in rows.iter().enumerate() {
            if inputs.network.demand(z, t) > 0.0 {
                targets.push((r, inputs.calendar.weight(t)));
            }
        }
    }
    targets
}

pub fn solve_scenario(
    inputs: &InputBundle,
    scenario: ScenarioSpec,
    options: &ScenarioOptions,
) -> Result<ResultsBundle, ScenarioError> {
    let label = scenario.label();
    let model = build_model(inputs, scenario, options)
        .map_err(|source| ScenarioError::Model { label: label.clone(), source })?;
    let sol = RevisedSimplex::default()
        .solve(&model.lp)
        .map_err(|source| ScenarioError::Solver { label: label.clone(), source })?;
    match sol.status {
        Status::Optimal => {}
        Status::Infeasible => return Err(ScenarioError::Infeasible { label, witness: sol.witness }),
        Status::Unbounded => return Err(ScenarioError::Unbounded { label }),
    }
    let alternative = match options.duals {
        DualSelection::Basic => None,
        DualSelection::MinMax => minmax_row_duals(&model.lp, &sol, &balance_targets(&model, inputs))
            .map_err(|source| ScenarioError::Solver { label: label.clone(), source })?,
    };
    Ok(finish(inputs, scenario, options, &model, sol, alternative))
}

/// Certifies `basic`, swaps in `alternative` duals if given, and extracts.
fn finish(
    inputs: &InputBundle,
    scenario: ScenarioSpec,
    options: &ScenarioOptions,
    model: &Model,
    basic: Solution,
    alternative: Option<Vec<f64>>,
) -> ResultsBundle {
    let (cal, net) = (&inputs.calendar, &inputs.network);
    let basic_certificate = certify(&model.lp, &basic);
    let basic_prices = analytics::zonal_prices(model, &basic, cal, net);
    let basic_dual = basic.dual.clone();
    let (sol, duals, prices, degenerate) = match alternative {
        Some(dual) => {
            let alt = basic.with_duals(&model.lp, dual);
            let prices = analytics::zonal_prices(model, &alt, cal, net);
            let degenerate = analytics::degenerate_hours(model, &alt, &prices, Some(&basic_prices));
            (alt, DualSelection::MinMax, prices, degenerate)
        }
        None => {
            let degenerate = analytics::degenerate_hours(model, &basic, &basic_prices, None);
            (basic, DualSelection::Basic, basic_prices.clone(), degenerate)
        }
    };
    let certificate = certify(&model.lp, &sol);
    let mut bundle = extract(inputs, scenario, options, model, sol, certificate, duals, prices, degenerate);
    bundle.basic_certificate = basic_certificate;
    bundle.basic_dual = basic_dual;
    bundle.basic_prices = basic_prices;
    bundle
}

/// Rebuilds the bundle of a stored optimal point without solving. `vars`
/// lists (tag, primal value) and `rows` (tag, reported dual, basic dual),
/// both in model order. The stored duals are taken as given.
pub fn bundle_from_point(
    inputs: &InputBundle,
    scenario: ScenarioSpec,
    options: &ScenarioOptions,
    vars: &[(String, f64)],
    rows: &[(String, f64, f64)],
    duals: DualSelection,
    iterations: usize,
) -> Result<ResultsBundle, ScenarioError> {
    let label = scenario.label();
    let model = build_model(inputs, scenario, options)
        .map_err(|source| ScenarioError::Model { label: label.clone(), source })?;
    let lp = &model.lp;
    let stored = |message: String| ScenarioError::Stored { label: label.clone(), message };
    if vars.len() != lp.num_variables() || rows.len() != lp.num_constraints() {
        return Err(stored(format!(
            "stored point has {} variables and {} rows, model has {} and {}",
            vars.len(),
            rows.len(),
            lp.num_variables(),
            lp.num_constraints()
        )));
    }
    if let Some((tag, _)) = vars.iter().zip(lp.variables()).find(|((t, _), v)| *t != v.tag).map(|(s, _)| s) {
        return Err(stored(format!("variable `{tag}` does not match the model")));
    }
    if let Some((tag, ..)) = rows.iter().zip(lp.constraints()).find(|((t, ..), r)| *t != r.tag).map(|(s, _)| s) {
        return Err(stored(format!("row `{tag}` does not match the model")));
    }
    let primal: Vec<f64> = vars.iter().map(|v| v.1).collect();
    let sol = Solution {
        status: Status::Optimal,
        objective: lp.evaluate_objective(&primal),
        primal,
        dual: Vec::new(),
        reduced_cost: Vec::new(),
        iterations,
        witness: None,
        basis: Vec::new(),
    }
    .with_duals(lp, rows.iter().map(|r| r.2).collect());
    let alternative = (duals == DualSelection::MinMax).then(|| rows.iter().map(|r| r.1).collect());
    Ok(finish(inputs, scenario, options, &model, sol, alternative))
}

#[allow(clippy::too_many_arguments)]
fn extract(
    inputs: &InputBundle,
    scenario: ScenarioSpec,
    options: &ScenarioOptions,
    model: &Model,
    sol: Solution,
    certificate: Certificate,
    duals: DualSelection,
    prices: PriceSurface,
    degenerate: Vec<(usize, usize)>,
) -> ResultsBundle {
    let cal = &inputs.calendar;
    let net = &inputs.network;
    let x = &sol.primal;
    let val = |v: crate::lp::VarId| x[v.0];
    let vals = |vs: &[crate::lp::VarId]| vs.iter().map(|v| x[v.0]).collect::<Vec<_>>();
    let zone_name = |z: usize| net.zones()[z].id.clone();
    let carbon_price = match options.policy(scenario.emissions) {
        CarbonPolicy::Price(p) => p,
        _ => 0.0,
    };

    let generators = model
        .generators
        .iter()
        .map(|g| {
            let p = &inputs.generators[g.project];
            let new_mw = val(g.build);
            let capped = p.max_total_mw.is_some_and(|m| at_upper(val(g.capacity), m));
            GeneratorResult {
                id: p.id.clone(),
                zone: zone_name(g.zone),
                technology: p.technology.clone(),
                existing_mw: p.existing_mw,
                new_mw,
                capacity_mw: val(g.capacity),
                dispatch: vals(&g.dispatch),
                annual_capital: g.annual_capital,
                fixed_om: p.fixed_om,
                energy_cost: g.energy_cost,
                carbon_cost: carbon_price * g.emission_rate,
                emission_rate: g.emission_rate,
                interior_new_build: p.existing_mw == 0.0 && positive(new_mw) && !capped,
                cap_dual: g.cap_row.map(|r| sol.dual[r.0]),
            }
        })
        .collect();

    let storage = model
        .storage
        .iter()
        .map(|s| {
            let p = &inputs.storage[s.project];
            let (bp, be) = (val(s.power_build), val(s.energy_build));
            let interior = p.existing_power_mw == 0.0
                && p.existing_energy_mwh == 0.0
                && positive(bp)
                && !at_upper(bp, model.lp.variable(s.power_build).upper)
                && !at_upper(be, model.lp.variable(s.energy_build).upper);
            StorageResult {
                id: p.id.clone(),
                zone: zone_name(s.zone),
                technology: p.technology.clone(),
                existing_power_mw: p.existing_power_mw,
                new_power_mw: bp,
                power_mw: val(s.power),
                existing_energy_mwh: p.existing_energy_mwh,
                new_energy_mwh: be,
                energy_mwh: val(s.energy),
                charge: vals(&s.charge),
                discharge: vals(&s.discharge),
                soc: vals(&s.soc),
                power_cost: p.power_cost,
                energy_cost: p.energy_cost,
                fixed_om: p.fixed_om,
                interior_new_build: interior,
            }
        })
        .collect();

    let hydro = model
        .hydro
        .iter()
        .map(|h| {
            let p = &inputs.hydro[h.project];
            HydroResult {
                id: p.id.clone(),
                zone: zone_name(h.zone),
                capacity_mw: p.capacity_mw,
                dispatch: vals(&h.dispatch),
            }
        })
        .collect();

    let hydrogen = model
        .hydrogen
        .iter()
        .map(|h| {
            let p = &inputs.hydrogen[h.entry];
            let caps = [h.electrolyzer, h.liquifier, h.tank, h.fuel_cell];
            let costs = [p.electrolyzer_cost, p.liquifier_cost, p.tank_cost, p.fuel_cell_cost];
            let annual_cost = caps.iter().zip(costs).map(|(&v, c)| c * val(v)).sum();
            let interior = caps.iter().any(|&v| positive(val(v)))
                && caps.iter().all(|&v| !at_upper(val(v), model.lp.variable(v).upper));
            HydrogenResult {
                zone: p.zone.clone(),
                electrolyzer_mw: val(h.electrolyzer),
                liquifier_kg_per_h: val(h.liquifier),
                tank_kg: val(h.tank),
                fuel_cell_mw: val(h.fuel_cell),
                electrolysis: vals(&h.electrolysis),
                liquefaction: vals(&h.liquefaction),
                level: vals(&h.level),
                generation: vals(&h.generation),
                liquifier_mwh_per_kg: p.liquifier_mwh_per_kg,
                annual_cost,
                interior_new_build: interior,
            }
        })
        .collect();

    let corridors = model
        .corridors
        .iter()
        .map(|c| {
            let p = &net.corridors()[c.corridor];
            CorridorResult {
                id: p.id.clone(),
                zone_a: p.zone_a.clone(),
                zone_b: p.zone_b.clone(),
                existing_mw: p.existing_mw,
                new_mw: val(c.build),
                capacity_mw: val(c.capacity),
                send_ab: vals(&c.send_ab),
                send_ba: vals(&c.send_ba),
                loss_fraction: p.loss_fraction,
                capital_cost: p.capital_cost,
                fixed_om: p.fixed_om,
                length_miles: p.length_miles,
                expandable: c.expandable,
            }
        })
        .collect();

    let by_cat = model.costs.by_category(x, cal);
    let costs: Vec<(CostCategory, f64)> = CostCategory::REPORTED
        .iter()
        .map(|&c| (c, by_cat.get(&c).copied().unwrap_or(0.0)))
        .collect();
    let emissions_cost = by_cat.get(&CostCategory::Emissions).copied().unwrap_or(0.0);
    let direct_cost = costs
        .iter()
        .filter(|(c, _)| *c != CostCategory::Emissions)
        .map(|(_, v)| v)
        .sum();
    let sunk_cost = by_cat.get(&CostCategory::Sunk).copied().unwrap_or(0.0);
    let loads: Vec<Vec<f64>> = (0..net.zones().len()).map(|z| net.zone_demand(z).to_vec()).collect();
    let average_prices = analytics::load_weighted_average(&prices, &loads, cal.weights()).ok();

    let mut bundle = ResultsBundle {
        scenario,
        status: sol.status,
        objective: sol.objective,
        direct_cost,
        emissions_cost,
        sunk_cost,
        emissions: annual_emissions(model, x, cal),
        costs,
        certificate,
        basic_certificate: certificate,
        duals,
        iterations: sol.iterations,
        zones: net.zones().iter().map(|z| z.id.clone()).collect(),
        weights: cal.weights().to_vec(),
        loads,
        prices: prices.clone(),
        average_prices,
        degenerate,
        generators,
        storage,
        hydro,
        hydrogen,
        corridors,
        rents: RentStatement::default(),
        basic_dual: sol.dual.clone(),
        basic_prices: prices,
        solution: sol,
        variable_tags: model.lp.variables().iter().map(|v| v.tag.clone()).collect(),
        row_tags: model.lp.constraints().iter().map(|r| r.tag.clone()).collect(),
    };
    bundle.rents = analytics::resource_rents(&bundle);
    bundle
}
