//! CSV input directory loading and cross-file validation.
//!
//! Timepoint ids in `loads.csv` and `cf_profiles.csv` are the 0-based
//! position of the timepoint in calendar order (series in file order, then
//! index within the series).

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer};

use crate::costing::FinancialParams;
use crate::generation::{validate_generator, CapacityFactor, CapitalCost, Fuel, GeneratorProject, CF_EPSILON};
use crate::hydro_hydrogen::{validate_hydro, validate_hydrogen, HydroProject, HydroSeries, HydrogenZone};
use crate::network::{validate_network, Corridor, LoadProfile, Network, Zone};
use crate::storage::{validate_storage, StorageProject};
use crate::temporal::{build_calendar, Calendar, CalendarConfig, TimepointId, Timeseries};

/// A diagnostic naming the offending file and, where known, its line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputError {
    pub file: String,
    pub line: Option<u64>,
    pub message: String,
}

impl InputError {
    fn new(file: &str, line: Option<u64>, message: impl Into<String>) -> Self {
        Self { file: file.into(), line, message: message.into() }
    }
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "{}:{}: {}", self.file, l, self.message),
            None => write!(f, "{}: {}", self.file, self.message),
        }
    }
}

impl std::error::Error for InputError {}

/// Fully validated inputs for every scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct InputBundle {
    pub calendar: Calendar,
    pub network: Network,
    pub generators: Vec<GeneratorProject>,
    pub fuels: Vec<Fuel>,
    pub storage: Vec<StorageProject>,
    pub hydro: Vec<HydroProject>,
    pub hydrogen: Vec<HydrogenZone>,
    pub financials: FinancialParams,
}

impl InputBundle {
    /// The same system with every corridor loss set to zero.
    pub fn lossless(&self) -> InputBundle {
        InputBundle { network: self.network.lossless(), ..self.clone() }
    }
}

fn de_bool<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
    let s = String::deserialize(d)?;
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "y" => Ok(true),
        "0" | "false" | "no" | "n" => Ok(false),
        other => Err(serde::de::Error::custom(format!("expected a boolean, got `{other}`"))),
    }
}

/// Empty, `inf` and `none` all mean unbounded.
fn de_cap<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
    let s = Option::<String>::deserialize(d)?.unwrap_or_default();
    let s = s.trim();
    if s.is_empty() || s.eq_ignore_ascii_case("none") {
        return Ok(None);
    }
    let v: f64 = s.parse().map_err(|_| serde::de::Error::custom(format!("expected a number, got `{s}`")))?;
    Ok(if v.is_infinite() && v > 0.0 { None } else { Some(v) })
}

fn de_opt_f64<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
    let s = Option::<String>::deserialize(d)?.unwrap_or_default();
    let s = s.trim();
    if s.is_empty() {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|_| serde::de::Error::custom(format!("expected a number, got `{s}`")))
}

fn de_opt_string<'de, D: Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    let s = Option::<String>::deserialize(d)?.unwrap_or_default();
    let s = s.trim();
    Ok(if s.is_empty() || s.eq_ignore_ascii_case("none") { None } else { Some(s.to_string()) })
}

struct Table<'a> {
    file: &'a str,
    required: &'a [&'a str],
    optional: &'a [&'a str],
}

impl Table<'_> {
    /// Rows with their 1-based line numbers; `None` when the file is absent.
    fn read<T: DeserializeOwned>(&self, dir: &Path) -> Result<Option<Vec<(u64, T)>>, InputError> {
        let path = dir.join(self.file);
        if !path.exists() {
            return Ok(None);
        }
        let err = |line, msg: String| InputError::new(self.file, line, msg);
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_path(&path)
            .map_err(|e| err(None, e.to_string()))?;
        let headers = rdr.headers().map_err(|e| err(Some(1), e.to_string()))?.clone();
        let mut seen = HashSet::new();
        for h in headers.iter() {
            if !self.required.contains(&h) && !self.optional.contains(&h) {
                return Err(err(Some(1), format!("unknown column `{h}`")));
            }
            if !seen.insert(h) {
                return Err(err(Some(1), format!("duplicate column `{h}`")));
            }
        }
        for r in self.required {
            if !seen.contains(r) {
                return Err(err(Some(1), format!("missing column `{r}`")));
            }
        }
        let mut out = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| err(e.position().map(|p| p.line()), e.to_string()))?;
            let line = rec.position().map_or(0, |p| p.line());
            let v = rec.deserialize::<T>(Some(&headers)).map_err(|e| {
                let msg = match e.kind() {
                    csv::ErrorKind::Deserialize { err, .. } => match err.field() {
                        Some(f) => format!("column `{}`: {}", headers.get(f as usize).unwrap_or("?"), err.kind()),
                        None => err.kind().to_string(),
                    },
                    _ => e.to_string(),
                };
                err(Some(line), msg)
            })?;
            out.push((line, v));
        }
        Ok(Some(out))
    }

    fn require<T: DeserializeOwned>(&self, dir: &Path) -> Result<Vec<(u64, T)>, InputError> {
        self.read(dir)?.ok_or_else(|| InputError::new(self.file, None, "missing file"))
    }
}

#[derive(Deserialize)]
struct CalendarRow {
    period_label: String,
    period_years: f64,
    annual_hours: f64,
    tolerance_hours: f64,
}

#[derive(Deserialize)]
struct TimeseriesRow {
    timeseries_id: String,
    num_timepoints: usize,
    hours_per_timepoint: f64,
    scale_to_year: f64,
}

#[derive(Deserialize)]
struct ZoneRow {
    zone_id: String,
    interconnect: String,
}

#[derive(Deserialize)]
struct LoadRow {
    zone_id: String,
    timepoint_id: usize,
    mw: f64,
}

#[derive(Deserialize)]
struct CorridorRow {
    corridor_id: String,
    zone_a: String,
    zone_b: String,
    existing_mw: f64,
    loss_fraction: f64,
    capital_cost_per_mw_yr: f64,
    fixed_om_per_mw_yr: f64,
    #[serde(deserialize_with = "de_bool")]
    new_build_allowed: bool,
    #[serde(default, deserialize_with = "de_cap")]
    max_new_mw: Option<f64>,
    #[serde(default, deserialize_with = "de_opt_f64")]
    length_miles: Option<f64>,
}

#[derive(Deserialize)]
struct FinancialRow {
    base_year: i32,
    interest_rate: f64,
    discount_rate: f64,
    report_discount_factor: f64,
}

#[derive(Deserialize)]
struct FuelRow {
    fuel_id: String,
    price_per_mmbtu: f64,
    tco2_per_mmbtu: f64,
}

#[derive(Deserialize)]
struct GeneratorRow {
    project_id: String,
    zone: String,
    tech: String,
    existing_mw: f64,
    #[serde(deserialize_with = "de_bool")]
    buildable: bool,
    #[serde(default, deserialize_with = "de_cap")]
    max_total_mw: Option<f64>,
    #[serde(default, deserialize_with = "de_opt_f64")]
    overnight_cost_per_mw: Option<f64>,
    #[serde(default, deserialize_with = "de_opt_f64")]
    lifetime_years: Option<f64>,
    #[serde(default, deserialize_with = "de_opt_f64")]
    annualized_cost_per_mw_yr: Option<f64>,
    fixed_om_per_mw_yr: f64,
    variable_om_per_mwh: f64,
    heat_rate: f64,
    #[serde(default, deserialize_with = "de_opt_string")]
    fuel: Option<String>,
    #[serde(default, deserialize_with = "de_opt_f64")]
    sunk_cost_per_yr: Option<f64>,
}

#[derive(Deserialize)]
struct CfRow {
    project_id: String,
    timepoint_id: usize,
    cf: f64,
}

#[derive(Deserialize)]
struct StorageRow {
    project_id: String,
    zone: String,
    tech: String,
    existing_power_mw: f64,
    existing_energy_mwh: f64,
    #[serde(deserialize_with = "de_bool")]
    power_buildable: bool,
    #[serde(deserialize_with = "de_bool")]
    energy_buildable: bool,
    #[serde(default, deserialize_with = "de_cap")]
    max_power_mw: Option<f64>,
    #[serde(default, deserialize_with = "de_cap")]
    max_energy_mwh: Option<f64>,
    power_cost_per_mw_yr: f64,
    energy_cost_per_mwh_yr: f64,
    fixed_om_per_mw_yr: f64,
    round_trip_efficiency: f64,
    #[serde(default, deserialize_with = "de_cap")]
    max_duration_hours: Option<f64>,
    #[serde(default, deserialize_with = "de_opt_f64")]
    sunk_cost_per_yr: Option<f64>,
}

#[derive(Deserialize)]
struct HydroRow {
    project_id: String,
    zone: String,
    capacity_mw: f64,
}

#[derive(Deserialize)]
struct HydroSeriesRow {
    project_id: String,
    timeseries_id: String,
    min_flow_mw: f64,
    avg_flow_mw: f64,
}

#[derive(Deserialize)]
struct HydrogenRow {
    zone: String,
    electrolyzer_cost_per_mw_yr: f64,
    fuel_cell_cost_per_mw_yr: f64,
    liquifier_cost_per_kg_h_yr: f64,
    tank_cost_per_kg_yr: f64,
    electrolyzer_kg_per_mwh: f64,
    liquifier_mwh_per_kg: f64,
    fuel_cell_mwh_per_kg: f64,
    #[serde(default, deserialize_with = "de_cap")]
    max_electrolyzer_mw: Option<f64>,
    #[serde(default, deserialize_with = "de_cap")]
    max_fuel_cell_mw: Option<f64>,
    #[serde(default, deserialize_with = "de_cap")]
    max_liquifier_kg_h: Option<f64>,
    #[serde(default, deserialize_with = "de_cap")]
    max_tank_kg: Option<f64>,
}

const CALENDAR: Table = Table {
    file: "calendar.csv",
    required: &["period_label", "period_years", "annual_hours", "tolerance_hours"],
    optional: &[],
};
const TIMESERIES: Table = Table {
    file: "timeseries.csv",
    required: &["timeseries_id", "num_timepoints", "hours_per_timepoint", "scale_to_year"],
    optional: &[],
};
const ZONES: Table = Table { file: "zones.csv", required: &["zone_id", "interconnect"], optional: &[] };
const LOADS: Table = Table { file: "loads.csv", required: &["zone_id", "timepoint_id", "mw"], optional: &[] };
const CORRIDORS: Table = Table {
    file: "corridors.csv",
    required: &[
        "corridor_id",
        "zone_a",
        "zone_b",
        "existing_mw",
        "loss_fraction",
        "capital_cost_per_mw_yr",
        "fixed_om_per_mw_yr",
        "new_build_allowed",
    ],
    optional: &["max_new_mw", "length_miles"],
};
const FINANCIALS: Table = Table {
    file: "financials.csv",
    required: &["base_year", "interest_rate", "discount_rate", "report_discount_factor"],
    optional: &[],
};
const FUELS: Table =
    Table { file: "fuels.csv", required: &["fuel_id", "price_per_mmbtu", "tco2_per_mmbtu"], optional: &[] };
const GENERATORS: Table = Table {
    file: "generators.csv",
    required: &[
        "project_id",
        "zone",
        "tech",
        "existing_mw",
        "buildable",
        "fixed_om_per_mw_yr",
        "variable_om_per_mwh",
        "heat_rate",
    ],
    optional: &[
        "max_total_mw",
        "overnight_cost_per_mw",
        "lifetime_years",
        "annualized_cost_per_mw_yr",
        "fuel",
        "sunk_cost_per_yr",
    ],
};
const CF_PROFILES: Table =
    Table { file: "cf_profiles.csv", required: &["project_id", "timepoint_id", "cf"], optional: &[] };
const STORAGE: Table = Table {
    file: "storage.csv",
    required: &[
        "project_id",
        "zone",
        "tech",
        "existing_power_mw",
        "existing_energy_mwh",
        "power_buildable",
        "energy_buildable",
        "power_cost_per_mw_yr",
        "energy_cost_per_mwh_yr",
        "fixed_om_per_mw_yr",
        "round_trip_efficiency",
    ],
    optional: &["max_power_mw", "max_energy_mwh", "max_duration_hours", "sunk_cost_per_yr"],
};
const HYDRO: Table = Table { file: "hydro.csv", required: &["project_id", "zone", "capacity_mw"], optional: &[] };
const HYDRO_SERIES: Table = Table {
    file: "hydro_series.csv",
    required: &["project_id", "timeseries_id", "min_flow_mw", "avg_flow_mw"],
    optional: &[],
};
const HYDROGEN: Table = Table {
    file: "hydrogen.csv",
    required: &[
        "zone",
        "electrolyzer_cost_per_mw_yr",
        "fuel_cell_cost_per_mw_yr",
        "liquifier_cost_per_kg_h_yr",
        "tank_cost_per_kg_yr",
        "electrolyzer_kg_per_mwh",
        "liquifier_mwh_per_kg",
        "fuel_cell_mwh_per_kg",
    ],
    optional: &["max_electrolyzer_mw", "max_fuel_cell_mw", "max_liquifier_kg_h", "max_tank_kg"],
};

/// Every file the loader understands.
pub const INPUT_FILES: [&str; 13] = [
    "calendar.csv",
    "timeseries.csv",
    "zones.csv",
    "loads.csv",
    "corridors.csv",
    "financials.csv",
    "fuels.csv",
    "generators.csv",
    "cf_profiles.csv",
    "storage.csv",
    "hydro.csv",
    "hydro_series.csv",
    "hydrogen.csv",
];

pub fn load_inputs(dir: &Path) -> Result<InputBundle, InputError> {
    if !dir.is_dir() {
        return Err(InputError::new(&dir.display().to_string(), None, "not a directory"));
    }
    let calendar = load_calendar(dir)?;
    let t_count = calendar.len();

    let zone_rows: Vec<(u64, ZoneRow)> = ZONES.require(dir)?;
    let mut zone_line = HashMap::new();
    for (line, z) in &zone_rows {
        if zone_line.insert(z.zone_id.clone(), *line).is_some() {
            return Err(InputError::new(ZONES.file, Some(*line), format!("duplicate zone `{}`", z.zone_id)));
        }
        if z.interconnect.is_empty() {
            return Err(InputError::new(ZONES.file, Some(*line), "empty interconnect"));
        }
    }
    let zones: Vec<Zone> = zone_rows.into_iter().map(|(_, z)| Zone::new(z.zone_id, z.interconnect)).collect();
    if zones.is_empty() {
        return Err(InputError::new(ZONES.file, None, "no zones"));
    }
    let known_zone = |file: &str, line: u64, zone: &str| {
        if zone_line.contains_key(zone) {
            Ok(())
        } else {
            Err(InputError::new(file, Some(line), format!("unknown zone `{zone}`")))
        }
    };

    let load_rows: Vec<(u64, LoadRow)> = LOADS.require(dir)?;
    if load_rows.is_empty() {
        return Err(InputError::new(LOADS.file, None, "no demand"));
    }
    let mut demand: BTreeMap<String, BTreeMap<TimepointId, f64>> = BTreeMap::new();
    for (line, r) in &load_rows {
        known_zone(LOADS.file, *line, &r.zone_id)?;
        if r.timepoint_id >= t_count {
            return Err(InputError::new(
                LOADS.file,
                Some(*line),
                format!("timepoint {} outside the calendar (0..{t_count})", r.timepoint_id),
            ));
        }
        if !(r.mw >= 0.0 && r.mw.is_finite()) {
            return Err(InputError::new(LOADS.file, Some(*line), format!("demand {} must be non-negative", r.mw)));
        }
        let prev = demand.entry(r.zone_id.clone()).or_default().insert(TimepointId(r.timepoint_id), r.mw);
        if prev.is_some() {
            return Err(InputError::new(
                LOADS.file,
                Some(*line),
                format!("duplicate demand for zone `{}` at timepoint {}", r.zone_id, r.timepoint_id),
            ));
        }
    }
    for z in &zones {
        let n = demand.get(&z.id).map_or(0, |d| d.len());
        if n != t_count {
            return Err(InputError::new(
                LOADS.file,
                None,
                format!("zone `{}` has demand for {n} of {t_count} timepoints", z.id),
            ));
        }
    }
    let loads: Vec<LoadProfile> =
        demand.into_iter().map(|(zone, demand)| LoadProfile { zone, demand }).collect();

    let corridor_rows: Vec<(u64, CorridorRow)> = CORRIDORS.read(dir)?.unwrap_or_default();
    let mut pairs = HashSet::new();
    let mut corridors = Vec::new();
    for (line, r) in corridor_rows {
        known_zone(CORRIDORS.file, line, &r.zone_a)?;
        known_zone(CORRIDORS.file, line, &r.zone_b)?;
        let key = if r.zone_a < r.zone_b { (r.zone_a.clone(), r.zone_b.clone()) } else { (r.zone_b.clone(), r.zone_a.clone()) };
        if !pairs.insert(key) {
            return Err(InputError::new(CORRIDORS.file, Some(line), format!("duplicate corridor `{}` for an existing zone pair", r.corridor_id)));
        }
        corridors.push((
            line,
            Corridor {
                id: r.corridor_id,
                zone_a: r.zone_a,
                zone_b: r.zone_b,
                existing_mw: r.existing_mw,
                loss_fraction: r.loss_fraction,
                capital_cost: r.capital_cost_per_mw_yr,
                fixed_om: r.fixed_om_per_mw_yr,
                new_build_allowed: r.new_build_allowed,
                max_new_mw: r.max_new_mw,
                length_miles: r.length_miles,
            },
        ));
    }
    let corridor_line: HashMap<String, u64> = corridors.iter().map(|(l, c)| (c.id.clone(), *l)).collect();
    let network = validate_network(zones, corridors.into_iter().map(|(_, c)| c).collect(), loads, &calendar)
        .map_err(|e| {
            let (file, line) = match &e {
                crate::network::NetworkError::DanglingZone { corridor, .. }
                | crate::network::NetworkError::DuplicateCorridor(corridor)
                | crate::network::NetworkError::SelfLoop(corridor)
                | crate::network::NetworkError::InvalidCorridor { id: corridor, .. } => {
                    (CORRIDORS.file, corridor_line.get(corridor).copied())
                }
                _ => (LOADS.file, None),
            };
            InputError::new(file, line, e.to_string())
        })?;

    let financials = match FINANCIALS.read::<FinancialRow>(dir)? {
        None => FinancialParams::default(),
        Some(rows) => {
            let [(line, r)]: [(u64, FinancialRow); 1] = rows
                .try_into()
                .map_err(|_| InputError::new(FINANCIALS.file, None, "expected exactly one data row"))?;
            if !(r.interest_rate >= 0.0 && r.discount_rate >= 0.0 && r.report_discount_factor > 0.0) {
                return Err(InputError::new(FINANCIALS.file, Some(line), "rates must be non-negative and the reporting factor positive"));
            }
            FinancialParams {
                base_year: r.base_year,
                interest_rate: r.interest_rate,
                discount_rate: r.discount_rate,
                report_discount_factor: r.report_discount_factor,
            }
        }
    };

    let mut fuels = Vec::new();
    for (line, r) in FUELS.read::<FuelRow>(dir)?.unwrap_or_default() {
        if fuels.iter().any(|f: &Fuel| f.id == r.fuel_id) {
            return Err(InputError::new(FUELS.file, Some(line), format!("duplicate fuel `{}`", r.fuel_id)));
        }
        if !(r.price_per_mmbtu >= 0.0 && r.tco2_per_mmbtu >= 0.0) {
            return Err(InputError::new(FUELS.file, Some(line), "price and emissions factor must be non-negative"));
        }
        fuels.push(Fuel { id: r.fuel_id, price: r.price_per_mmbtu, emissions_factor: r.tco2_per_mmbtu });
    }

    let generators = load_generators(dir, &calendar, &fuels, &known_zone)?;
    let storage = load_storage(dir, &known_zone)?;
    let hydro = load_hydro(dir, &calendar, &known_zone)?;
    let hydrogen = load_hydrogen(dir, &known_zone)?;

    Ok(InputBundle { calendar, network, generators, fuels, storage, hydro, hydrogen, financials })
}

fn load_calendar(dir: &Path) -> Result<Calendar, InputError> {
    let config = match CALENDAR.read::<CalendarRow>(dir)? {
        None => CalendarConfig::default(),
        Some(rows) => {
            let [(_, r)]: [(u64, CalendarRow); 1] = rows
                .try_into()
                .map_err(|_| InputError::new(CALENDAR.file, None, "expected exactly one data row"))?;
            CalendarConfig {
                period_label: r.period_label,
                period_years: r.period_years,
                annual_hours: r.annual_hours,
                tolerance_hours: r.tolerance_hours,
            }
        }
    };
    let rows: Vec<(u64, TimeseriesRow)> = TIMESERIES.require(dir)?;
    let lines: HashMap<String, u64> = rows.iter().map(|(l, r)| (r.timeseries_id.clone(), *l)).collect();
    let defs = rows
        .into_iter()
        .map(|(_, r)| Timeseries::new(r.timeseries_id, r.num_timepoints, r.hours_per_timepoint, r.scale_to_year))
        .collect();
    build_calendar(defs, &config).map_err(|e| {
        let line = match &e {
            crate::temporal::CalendarError::NonPositive { id, .. }
            | crate::temporal::CalendarError::DuplicateSeries(id) => lines.get(id).copied(),
            _ => None,
        };
        InputError::new(TIMESERIES.file, line, e.to_string())
    })
}

type ZoneCheck<'a> = dyn Fn(&str, u64, &str) -> Result<(), InputError> + 'a;

fn load_generators(
    dir: &Path,
    calendar: &Calendar,
    fuels: &[Fuel],
    known_zone: &ZoneCheck,
) -> Result<Vec<GeneratorProject>, InputError> {
    let rows: Vec<(u64, GeneratorRow)> = GENERATORS.require(dir)?;
    let file = GENERATORS.file;
    let mut index = HashMap::new();
    let mut projects = Vec::with_capacity(rows.len());
    let mut lines = Vec::with_capacity(rows.len());
    for (line, r) in rows {
        known_zone(file, line, &r.zone)?;
        if index.insert(r.project_id.clone(), projects.len()).is_some() {
            return Err(InputError::new(file, Some(line), format!("duplicate project `{}`", r.project_id)));
        }
        let capital = match (r.annualized_cost_per_mw_yr, r.overnight_cost_per_mw, r.lifetime_years) {
            (Some(a), None, _) => CapitalCost::Annualized(a),
            (None, Some(cost_per_mw), Some(lifetime_years)) => CapitalCost::Overnight { cost_per_mw, lifetime_years },
            _ => {
                return Err(InputError::new(
                    file,
                    Some(line),
                    "give either annualized_cost_per_mw_yr or overnight_cost_per_mw with lifetime_years",
                ))
            }
        };
        projects.push(GeneratorProject {
            id: r.project_id,
            zone: r.zone,
            technology: r.tech,
            existing_mw: r.existing_mw,
            buildable: r.buildable,
            max_total_mw: r.max_total_mw,
            capital,
            fixed_om: r.fixed_om_per_mw_yr,
            variable_om: r.variable_om_per_mwh,
            heat_rate: r.heat_rate,
            fuel: r.fuel,
            capacity_factor: CapacityFactor::Constant(1.0),
            sunk_cost: r.sunk_cost_per_yr.unwrap_or(0.0),
        });
        lines.push(line);
    }

    let t_count = calendar.len();
    let mut profiles: BTreeMap<usize, Vec<Option<f64>>> = BTreeMap::new();
    for (line, r) in CF_PROFILES.read::<CfRow>(dir)?.unwrap_or_default() {
        let cf_file = CF_PROFILES.file;
        let g = *index
            .get(&r.project_id)
            .ok_or_else(|| InputError::new(cf_file, Some(line), format!("unknown project `{}`", r.project_id)))?;
        if r.timepoint_id >= t_count {
            return Err(InputError::new(cf_file, Some(line), format!("timepoint {} outside the calendar", r.timepoint_id)));
        }
        if !(0.0..=1.0 + CF_EPSILON).contains(&r.cf) {
            return Err(InputError::new(
                cf_file,
                Some(line),
                format!("cf {} for `{}` outside [0, {}]", r.cf, r.project_id, 1.0 + CF_EPSILON),
            ));
        }
        let slot = &mut profiles.entry(g).or_insert_with(|| vec![None; t_count])[r.timepoint_id];
        if slot.replace(r.cf).is_some() {
            return Err(InputError::new(cf_file, Some(line), format!("duplicate cf for `{}` at timepoint {}", r.project_id, r.timepoint_id)));
        }
    }
    for (g, prof) in profiles {
        if let Some(t) = prof.iter().position(Option::is_none) {
            return Err(InputError::new(
                CF_PROFILES.file,
                None,
                format!("project `{}` has no cf at timepoint {t}", projects[g].id),
            ));
        }
        projects[g].capacity_factor = CapacityFactor::Profile(prof.into_iter().map(|v| v.unwrap_or(0.0)).collect());
    }
    for (p, line) in projects.iter().zip(&lines) {
        validate_generator(p, calendar, fuels).map_err(|e| InputError::new(file, Some(*line), e.to_string()))?;
    }
    Ok(projects)
}

fn load_storage(dir: &Path, known_zone: &ZoneCheck) -> Result<Vec<StorageProject>, InputError> {
    let file = STORAGE.file;
    let mut out: Vec<StorageProject> = Vec::new();
    for (line, r) in STORAGE.read::<StorageRow>(dir)?.unwrap_or_default() {
        known_zone(file, line, &r.zone)?;
        if out.iter().any(|s| s.id == r.project_id) {
            return Err(InputError::new(file, Some(line), format!("duplicate project `{}`", r.project_id)));
        }
        let p = StorageProject {
            id: r.project_id,
            zone: r.zone,
            technology: r.tech,
            existing_power_mw: r.existing_power_mw,
            existing_energy_mwh: r.existing_energy_mwh,
            power_buildable: r.power_buildable,
            energy_buildable: r.energy_buildable,
            max_power_mw: r.max_power_mw,
            max_energy_mwh: r.max_energy_mwh,
            power_cost: r.power_cost_per_mw_yr,
            energy_cost: r.energy_cost_per_mwh_yr,
            fixed_om: r.fixed_om_per_mw_yr,
            round_trip_efficiency: r.round_trip_efficiency,
            max_duration_hours: r.max_duration_hours,
            sunk_cost: r.sunk_cost_per_yr.unwrap_or(0.0),
        };
        validate_storage(&p).map_err(|e| InputError::new(file, Some(line), e.to_string()))?;
        out.push(p);
    }
    Ok(out)
}

fn load_hydro(dir: &Path, calendar: &Calendar, known_zone: &ZoneCheck) -> Result<Vec<HydroProject>, InputError> {
    let Some(rows) = HYDRO.read::<HydroRow>(dir)? else {
        return Ok(Vec::new());
    };
    let file = HYDRO.file;
    let n_series = calendar.timeseries().len();
    let mut projects: Vec<(u64, HydroProject, Vec<Option<HydroSeries>>)> = Vec::new();
    for (line, r) in rows {
        known_zone(file, line, &r.zone)?;
        if projects.iter().any(|p| p.1.id == r.project_id) {
            return Err(InputError::new(file, Some(line), format!("duplicate project `{}`", r.project_id)));
        }
        projects.push((line, HydroProject { id: r.project_id, zone: r.zone, capacity_mw: r.capacity_mw, series: Vec::new() }, vec![None; n_series]));
    }
    let sfile = HYDRO_SERIES.file;
    for (line, r) in HYDRO_SERIES.read::<HydroSeriesRow>(dir)?.unwrap_or_default() {
        let p = projects
            .iter_mut()
            .find(|p| p.1.id == r.project_id)
            .ok_or_else(|| InputError::new(sfile, Some(line), format!("unknown hydro project `{}`", r.project_id)))?;
        let s = calendar
            .series_index(&r.timeseries_id)
            .ok_or_else(|| InputError::new(sfile, Some(line), format!("unknown timeseries `{}`", r.timeseries_id)))?;
        if p.2[s].replace(HydroSeries { min_flow_mw: r.min_flow_mw, avg_flow_mw: r.avg_flow_mw }).is_some() {
            return Err(InputError::new(sfile, Some(line), "duplicate project/timeseries pair"));
        }
    }
    let mut out = Vec::with_capacity(projects.len());
    for (line, mut p, flows) in projects {
        if let Some(s) = flows.iter().position(Option::is_none) {
            return Err(InputError::new(
                sfile,
                None,
                format!("hydro project `{}` has no flows for timeseries `{}`", p.id, calendar.timeseries()[s].id),
            ));
        }
        p.series = flows.into_iter().flatten().collect();
        validate_hydro(&p, calendar).map_err(|e| InputError::new(file, Some(line), e.to_string()))?;
        out.push(p);
    }
    Ok(out)
}

fn load_hydrogen(dir: &Path, known_zone: &ZoneCheck) -> Result<Vec<HydrogenZone>, InputError> {
    let file = HYDROGEN.file;
    let mut out: Vec<HydrogenZone> = Vec::new();
    for (line, r) in HYDROGEN.read::<HydrogenRow>(dir)?.unwrap_or_default() {
        known_zone(file, line, &r.zone)?;
        if out.iter().any(|h| h.zone == r.zone) {
            return Err(InputError::new(file, Some(line), format!("duplicate hydrogen zone `{}`", r.zone)));
        }
        let h = HydrogenZone {
            zone: r.zone,
            electrolyzer_cost: r.electrolyzer_cost_per_mw_yr,
            fuel_cell_cost: r.fuel_cell_cost_per_mw_yr,
            liquifier_cost: r.liquifier_cost_per_kg_h_yr,
            tank_cost: r.tank_cost_per_kg_yr,
            electrolyzer_kg_per_mwh: r.electrolyzer_kg_per_mwh,
            liquifier_mwh_per_kg: r.liquifier_mwh_per_kg,
            fuel_cell_mwh_per_kg: r.fuel_cell_mwh_per_kg,
            max_electrolyzer_mw: r.max_electrolyzer_mw,
            max_fuel_cell_mw: r.max_fuel_cell_mw,
            max_liquifier_kg_per_h: r.max_liquifier_kg_h,
            max_tank_kg: r.max_tank_kg,
        };
        validate_hydrogen(&h).map_err(|e| InputError::new(file, Some(line), e.to_string()))?;
        out.push(h);
    }
    Ok(out)
}
