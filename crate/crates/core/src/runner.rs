//! The scenario matrix: concurrent solves, per-scenario output directories,
//! the cross-scenario report and the run manifest.
//!
//! Reported numbers carry 9 significant digits and JSON keys are sorted, so
//! reruns on the same inputs reproduce every file except the timing fields.
//! `solution.csv` is the exception: it keeps full precision so `report` can
//! rebuild a scenario exactly.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::analytics::{self, decarbonization_metrics, price_distribution, rent_delta};
use crate::assembly::{
    bundle_from_point, solve_scenario, DualSelection, EmissionsRegime, ResultsBundle, ScenarioError,
    ScenarioOptions, ScenarioSpec,
};
use crate::inputs::{load_inputs, InputBundle, InputError};
use crate::network::TransmissionMode;

/// Price cuts for `price_cdf.csv`, $/MWh. The highest price in the scenario
/// is appended so the distribution always reaches 1.
pub const CDF_THRESHOLDS: [f64; 14] =
    [0.0, 1.0, 5.0, 10.0, 20.0, 30.0, 40.0, 50.0, 75.0, 100.0, 150.0, 200.0, 500.0, 1000.0];

pub const MANIFEST: &str = "manifest.json";
pub const DECARB_REPORT: &str = "decarb_report.json";
pub const RENT_CHANGES: &str = "rent_changes.csv";

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Input(#[from] InputError),
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", .path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{}: {message}", .path.display())]
    Stored { path: PathBuf, message: String },
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> RunError + '_ {
    move |source| RunError::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> RunError + '_ {
    move |source| RunError::Csv { path: path.to_path_buf(), source }
}

/// A loaded input directory and the digest of its bytes.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub dir: PathBuf,
    pub digest: String,
    pub bundle: InputBundle,
}

impl Inputs {
    pub fn load(dir: &Path) -> Result<Self, RunError> {
        let bundle = load_inputs(dir)?;
        let digest = input_digest(dir)?;
        let dir = fs::canonicalize(dir).unwrap_or_else(|_| dir.to_path_buf());
        Ok(Self { dir, digest, bundle })
    }
}

/// SHA-256 over the names and contents of the regular files in `dir`,
/// taken in name order.
pub fn input_digest(dir: &Path) -> Result<String, RunError> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let entry = entry.map_err(io_err(dir))?;
        if entry.file_type().map_err(io_err(dir))?.is_file() {
            files.push(entry.path());
        }
    }
    files.sort();
    let mut h = Sha256::new();
    for f in &files {
        let bytes = fs::read(f).map_err(io_err(f))?;
        let name = f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        h.update((name.len() as u64).to_le_bytes());
        h.update(name.as_bytes());
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(&bytes);
    }
    Ok(hex::encode(h.finalize()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRecord {
    pub label: String,
    pub status: String,
    pub objective: Option<f64>,
    pub direct_cost: Option<f64>,
    pub emissions_tco2: Option<f64>,
    pub message: Option<String>,
    /// Timing is kept out of the scenario directories so that they are
    /// byte-identical across runs; the manifest alone carries it.
    pub solve_wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub scenarios: Vec<String>,
    pub inputs: PathBuf,
    pub input_digest: String,
    pub carbon_price: f64,
    pub carbon_cap: f64,
    pub duals: String,
    pub jobs: usize,
    pub records: Vec<ScenarioRecord>,
    /// Seconds since the Unix epoch when the run finished.
    pub created_unix_s: u64,
}

impl RunManifest {
    pub fn all_optimal(&self) -> bool {
        self.records.iter().all(|r| r.status == "optimal")
    }

    pub fn read(out: &Path) -> Result<Self, RunError> {
        let path = out.join(MANIFEST);
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        serde_json::from_str(&text).map_err(|e| RunError::Stored { path, message: e.to_string() })
    }

    fn options(&self, path: &Path) -> Result<ScenarioOptions, RunError> {
        let duals: DualSelection =
            self.duals.parse().map_err(|message| RunError::Stored { path: path.to_path_buf(), message })?;
        Ok(ScenarioOptions { carbon_price: self.carbon_price, carbon_cap: self.carbon_cap, duals })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixOptions {
    pub scenario: ScenarioOptions,
    /// Concurrent scenario solves; 0 lets the pool decide.
    pub jobs: usize,
}

impl Default for MatrixOptions {
    fn default() -> Self {
        Self { scenario: ScenarioOptions::default(), jobs: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct MatrixRun {
    pub manifest: RunManifest,
    /// Optimal bundles keyed by label.
    pub bundles: BTreeMap<String, ResultsBundle>,
}

/// Solves each scenario, writes `out/<label>/`, the cross-scenario files
/// and the manifest. A scenario that fails is recorded and the rest still run.
pub fn run_matrix(
    inputs: &Inputs,
    scenarios: &[ScenarioSpec],
    out: &Path,
    options: &MatrixOptions,
) -> Result<MatrixRun, RunError> {
    fs::create_dir_all(out).map_err(io_err(out))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs)
        .build()
        .map_err(|e| RunError::Pool(e.to_string()))?;
    let results: Vec<Result<(ScenarioRecord, Option<ResultsBundle>), RunError>> = pool.install(|| {
        scenarios
            .par_iter()
            .map(|&spec| {
                let label = spec.label();
                let dir = out.join(&label);
                fs::create_dir_all(&dir).map_err(io_err(&dir))?;
                let start = Instant::now();
                let solved = solve_scenario(&inputs.bundle, spec, &options.scenario);
                let wall = start.elapsed().as_secs_f64();
                match solved {
                    Ok(bundle) => {
                        write_bundle(&dir, &bundle)?;
                        let record = ScenarioRecord {
                            label,
                            status: bundle.status.to_string(),
                            objective: Some(bundle.objective),
                            direct_cost: Some(bundle.direct_cost),
                            emissions_tco2: Some(bundle.emissions),
                            message: None,
                            solve_wall_time_s: wall,
                        };
                        Ok((record, Some(bundle)))
                    }
                    Err(e) => {
                        clear_dir(&dir)?;
                        let summary = json!({
                            "scenario": label,
                            "status": e.status(),
                            "message": e.to_string(),
                        });
                        write_json(&dir.join("summary.json"), summary)?;
                        let record = ScenarioRecord {
                            label,
                            status: e.status().to_string(),
                            objective: None,
                            direct_cost: None,
                            emissions_tco2: None,
                            message: Some(e.to_string()),
                            solve_wall_time_s: wall,
                        };
                        Ok((record, None))
                    }
                }
            })
            .collect()
    });

    let mut records = Vec::with_capacity(results.len());
    let mut bundles = BTreeMap::new();
    for r in results {
        let (record, bundle) = r?;
        if let Some(b) = bundle {
            bundles.insert(record.label.clone(), b);
        }
        records.push(record);
    }
    write_cross_scenario(out, &bundles)?;
    let created_unix_s = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let manifest = RunManifest {
        scenarios: scenarios.iter().map(|s| s.label()).collect(),
        inputs: inputs.dir.clone(),
        input_digest: inputs.digest.clone(),
        carbon_price: options.scenario.carbon_price,
        carbon_cap: options.scenario.carbon_cap,
        duals: options.scenario.duals.label().to_string(),
        jobs: pool.current_num_threads(),
        records,
        created_unix_s,
    };
    let value = serde_json::to_value(&manifest).expect("manifest serializes");
    write_json(&out.join(MANIFEST), value)?;
    Ok(MatrixRun { manifest, bundles })
}

/// Recomputes every analytic output of a finished run from the stored
/// solutions. Fails if the inputs changed since the run.
pub fn report(out: &Path) -> Result<MatrixRun, RunError> {
    let manifest = RunManifest::read(out)?;
    let manifest_path = out.join(MANIFEST);
    let options = manifest.options(&manifest_path)?;
    let inputs = Inputs::load(&manifest.inputs)?;
    if inputs.digest != manifest.input_digest {
        return Err(RunError::Stored {
            path: manifest_path,
            message: format!("inputs in {} changed since the run", manifest.inputs.display()),
        });
    }
    let results: Vec<Result<Option<(String, ResultsBundle)>, RunError>> = manifest
        .records
        .par_iter()
        .map(|record| {
            if record.status != "optimal" {
                return Ok(None);
            }
            let spec: ScenarioSpec = record.label.parse().map_err(|e: crate::assembly::LabelError| {
                RunError::Stored { path: manifest_path.clone(), message: e.to_string() }
            })?;
            let dir = out.join(&record.label);
            let summary_path = dir.join("summary.json");
            let summary: Value = serde_json::from_str(&fs::read_to_string(&summary_path).map_err(io_err(&summary_path))?)
                .map_err(|e| RunError::Stored { path: summary_path.clone(), message: e.to_string() })?;
            let iterations = summary["iterations"].as_u64().unwrap_or(0) as usize;
            let duals: DualSelection = summary["duals"]
                .as_str()
                .unwrap_or("basic")
                .parse()
                .map_err(|message| RunError::Stored { path: summary_path.clone(), message })?;
            let (vars, rows) = read_solution(&dir.join("solution.csv"))?;
            let bundle = bundle_from_point(&inputs.bundle, spec, &options, &vars, &rows, duals, iterations)?;
            write_analytics(&dir, &bundle)?;
            write_summary(&dir, &bundle)?;
            Ok(Some((record.label.clone(), bundle)))
        })
        .collect();
    let mut bundles = BTreeMap::new();
    for r in results {
        if let Some((label, b)) = r? {
            bundles.insert(label, b);
        }
    }
    write_cross_scenario(out, &bundles)?;
    Ok(MatrixRun { manifest, bundles })
}

/// Rounds to 9 significant digits; zero loses its sign.
pub fn sig9(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if !x.is_finite() {
        return x;
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

pub fn fmt_num(x: f64) -> String {
    sig9(x).to_string()
}

fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n.as_f64().map(|f| Value::from(sig9(f))).unwrap_or(Value::Null),
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

fn write_json(path: &Path, value: Value) -> Result<(), RunError> {
    let mut text = serde_json::to_string_pretty(&round_json(value)).expect("json value serializes");
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<(), RunError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

fn clear_dir(dir: &Path) -> Result<(), RunError> {
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        if path.is_file() {
            fs::remove_file(&path).map_err(io_err(&path))?;
        }
    }
    Ok(())
}

fn s(v: &str) -> String {
    v.to_string()
}

/// Every per-scenario file.
pub fn write_bundle(dir: &Path, b: &ResultsBundle) -> Result<(), RunError> {
    write_capacity(&dir.join("capacity.csv"), b)?;
    write_dispatch(&dir.join("dispatch.csv"), b)?;
    write_flows(&dir.join("flows.csv"), b)?;
    write_csv(
        &dir.join("costs.csv"),
        &["category", "usd_per_year"],
        b.costs.iter().map(|(c, v)| vec![s(c.label()), fmt_num(*v)]),
    )?;
    write_solution(&dir.join("solution.csv"), b)?;
    write_analytics(dir, b)?;
    write_summary(dir, b)
}

/// The files `report` recomputes: prices (and the basic-dual prices when
/// another dual is reported), price distribution, rents, transmission
/// builds and degenerate hours.
pub fn write_analytics(dir: &Path, b: &ResultsBundle) -> Result<(), RunError> {
    let t_count = b.weights.len();
    write_csv(
        &dir.join("prices.csv"),
        &["zone", "timepoint", "price"],
        b.zones.iter().enumerate().flat_map(|(z, zone)| {
            (0..t_count).map(move |t| vec![zone.clone(), t.to_string(), fmt_num(b.prices.at(z, t))])
        }),
    )?;
    if b.duals == DualSelection::MinMax {
        write_csv(
            &dir.join("prices_basic.csv"),
            &["zone", "timepoint", "price"],
            b.zones.iter().enumerate().flat_map(|(z, zone)| {
                (0..t_count).map(move |t| vec![zone.clone(), t.to_string(), fmt_num(b.basic_prices.at(z, t))])
            }),
        )?;
    } else {
        remove_if_present(&dir.join("prices_basic.csv"))?;
    }
    let mut cuts = CDF_THRESHOLDS.to_vec();
    cuts.push(b.prices.max());
    write_csv(
        &dir.join("price_cdf.csv"),
        &["threshold", "mwh_fraction"],
        price_distribution(&b.prices, &b.loads, &b.weights, &cuts)
            .into_iter()
            .map(|p| vec![fmt_num(p.threshold), fmt_num(p.mwh_fraction)]),
    )?;
    write_csv(
        &dir.join("rents.csv"),
        &["asset", "kind", "zone", "tech", "revenue", "cost", "rent"],
        b.rents.entries.iter().map(|e| {
            vec![
                e.asset.clone(),
                e.kind.label().to_string(),
                e.zone.clone(),
                e.technology.clone(),
                fmt_num(e.revenue),
                fmt_num(e.cost),
                fmt_num(e.rent),
            ]
        }),
    )?;
    let congestion = analytics::congestion_rents(b);
    write_csv(
        &dir.join("transmission_builds.csv"),
        &[
            "corridor",
            "zone_a",
            "zone_b",
            "expandable",
            "existing_mw",
            "new_mw",
            "capacity_mw",
            "length_miles",
            "new_gw_miles",
            "congestion_rent",
        ],
        b.corridors.iter().zip(&congestion).map(|(c, rent)| {
            vec![
                c.id.clone(),
                c.zone_a.clone(),
                c.zone_b.clone(),
                c.expandable.to_string(),
                fmt_num(c.existing_mw),
                fmt_num(c.new_mw),
                fmt_num(c.capacity_mw),
                c.length_miles.map(fmt_num).unwrap_or_default(),
                c.length_miles.map(|l| fmt_num(c.new_mw / 1000.0 * l)).unwrap_or_default(),
                fmt_num(*rent),
            ]
        }),
    )?;
    write_csv(
        &dir.join("degenerate_hours.csv"),
        &["zone", "timepoint"],
        b.degenerate.iter().map(|&(z, t)| vec![b.zones[z].clone(), t.to_string()]),
    )
}

/// New transmission in GW-miles; corridors without a length count zero.
pub fn new_gw_miles(b: &ResultsBundle) -> f64 {
    b.corridors.iter().filter_map(|c| c.length_miles.map(|l| c.new_mw / 1000.0 * l)).sum()
}

fn write_summary(dir: &Path, b: &ResultsBundle) -> Result<(), RunError> {
    let costs: BTreeMap<&str, f64> = b.costs.iter().map(|(c, v)| (c.label(), *v)).collect();
    let average = b.average_prices.as_ref().map(|a| json!({ "overall": a.overall, "zones": a.per_zone }));
    let c = &b.certificate;
    let summary = json!({
        "scenario": b.scenario.label(),
        "status": b.status.to_string(),
        "objective": b.objective,
        "direct_cost": b.direct_cost,
        "emissions_cost": b.emissions_cost,
        "sunk_cost": b.sunk_cost,
        "emissions_tco2": b.emissions,
        "costs": costs,
        "average_price": average,
        "iterations": b.iterations,
        "duals": b.duals.label(),
        "degenerate_hours": b.degenerate.len(),
        "certificate": {
            "primal_residual": c.primal_residual,
            "dual_residual": c.dual_residual,
            "duality_gap": c.duality_gap,
            "complementary_slackness": c.complementary_slackness,
        },
        "transmission": {
            "new_mw": b.corridors.iter().map(|c| c.new_mw).sum::<f64>(),
            "new_gw_miles": new_gw_miles(b),
        },
    });
    write_json(&dir.join("summary.json"), summary)
}

fn write_capacity(path: &Path, b: &ResultsBundle) -> Result<(), RunError> {
    let mut rows = Vec::new();
    let mut row = |asset: &str, kind: &str, zone: &str, tech: &str, existing: f64, new: f64, total: f64, unit: &str| {
        rows.push(vec![s(asset), s(kind), s(zone), s(tech), fmt_num(existing), fmt_num(new), fmt_num(total), s(unit)]);
    };
    for g in &b.generators {
        row(&g.id, "generator", &g.zone, &g.technology, g.existing_mw, g.new_mw, g.capacity_mw, "MW");
    }
    for st in &b.storage {
        row(&st.id, "storage_power", &st.zone, &st.technology, st.existing_power_mw, st.new_power_mw, st.power_mw, "MW");
        row(&st.id, "storage_energy", &st.zone, &st.technology, st.existing_energy_mwh, st.new_energy_mwh, st.energy_mwh, "MWh");
    }
    for h in &b.hydro {
        row(&h.id, "hydro", &h.zone, "hydro", h.capacity_mw, 0.0, h.capacity_mw, "MW");
    }
    for h in &b.hydrogen {
        let id = format!("hydrogen:{}", h.zone);
        row(&id, "electrolyzer", &h.zone, "hydrogen", 0.0, h.electrolyzer_mw, h.electrolyzer_mw, "MW");
        row(&id, "liquifier", &h.zone, "hydrogen", 0.0, h.liquifier_kg_per_h, h.liquifier_kg_per_h, "kg/h");
        row(&id, "tank", &h.zone, "hydrogen", 0.0, h.tank_kg, h.tank_kg, "kg");
        row(&id, "fuel_cell", &h.zone, "hydrogen", 0.0, h.fuel_cell_mw, h.fuel_cell_mw, "MW");
    }
    for c in &b.corridors {
        let zone = format!("{}-{}", c.zone_a, c.zone_b);
        row(&c.id, "corridor", &zone, "transmission", c.existing_mw, c.new_mw, c.capacity_mw, "MW");
    }
    write_csv(path, &["asset", "kind", "zone", "technology", "existing", "new", "total", "unit"], rows)
}

fn write_dispatch(path: &Path, b: &ResultsBundle) -> Result<(), RunError> {
    let mut rows = Vec::new();
    let mut series = |asset: &str, zone: &str, quantity: &str, values: &[f64]| {
        for (t, v) in values.iter().enumerate() {
            rows.push(vec![s(asset), s(zone), s(quantity), t.to_string(), fmt_num(*v)]);
        }
    };
    for g in &b.generators {
        series(&g.id, &g.zone, "generation", &g.dispatch);
    }
    for st in &b.storage {
        series(&st.id, &st.zone, "charge", &st.charge);
        series(&st.id, &st.zone, "discharge", &st.discharge);
        series(&st.id, &st.zone, "soc", &st.soc);
    }
    for h in &b.hydro {
        series(&h.id, &h.zone, "generation", &h.dispatch);
    }
    for h in &b.hydrogen {
        let id = format!("hydrogen:{}", h.zone);
        series(&id, &h.zone, "electrolysis", &h.electrolysis);
        series(&id, &h.zone, "liquefaction", &h.liquefaction);
        series(&id, &h.zone, "tank_level", &h.level);
        series(&id, &h.zone, "fuel_cell", &h.generation);
    }
    write_csv(path, &["asset", "zone", "quantity", "timepoint", "value"], rows)
}

fn write_flows(path: &Path, b: &ResultsBundle) -> Result<(), RunError> {
    let rows = b.corridors.iter().flat_map(|c| {
        let keep = 1.0 - c.loss_fraction;
        (0..c.send_ab.len()).map(move |t| {
            let (ab, ba) = (c.send_ab[t], c.send_ba[t]);
            vec![
                c.id.clone(),
                t.to_string(),
                fmt_num(ab),
                fmt_num(ba),
                fmt_num(keep * ab),
                fmt_num(keep * ba),
                fmt_num(ab - ba),
            ]
        })
    });
    write_csv(
        path,
        &["corridor", "timepoint", "send_ab", "send_ba", "delivered_ab", "delivered_ba", "net_ab"],
        rows,
    )
}

fn write_solution(path: &Path, b: &ResultsBundle) -> Result<(), RunError> {
    let sol = &b.solution;
    let vars = sol.primal.iter().zip(&b.variable_tags).map(|(v, tag)| vec![s("var"), tag.clone(), v.to_string()]);
    let rows = sol
        .dual
        .iter()
        .zip(&b.basic_dual)
        .zip(&b.row_tags)
        .map(|((y, basic), tag)| vec![s("row"), tag.clone(), y.to_string(), basic.to_string()]);
    let vars = vars.map(|mut v| {
        v.push(String::new());
        v
    });
    write_csv(path, &["kind", "tag", "value", "basic_dual"], vars.chain(rows))
}

#[derive(Deserialize)]
struct SolutionRow {
    kind: String,
    tag: String,
    value: f64,
    basic_dual: Option<f64>,
}

type StoredPoint = (Vec<(String, f64)>, Vec<(String, f64, f64)>);

fn read_solution(path: &Path) -> Result<StoredPoint, RunError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let (mut vars, mut rows) = (Vec::new(), Vec::new());
    for rec in r.deserialize::<SolutionRow>() {
        let rec = rec.map_err(csv_err(path))?;
        match rec.kind.as_str() {
            "var" => vars.push((rec.tag, rec.value)),
            "row" => {
                let basic = rec.basic_dual.unwrap_or(rec.value);
                rows.push((rec.tag, rec.value, basic))
            }
            other => {
                return Err(RunError::Stored { path: path.to_path_buf(), message: format!("unknown kind `{other}`") })
            }
        }
    }
    Ok((vars, rows))
}

/// `decarb_report.json` when LE, LO, ZE and ZO are all present, and the
/// existing-to-full rent changes for each regime with both ends present.
fn write_cross_scenario(out: &Path, bundles: &BTreeMap<String, ResultsBundle>) -> Result<(), RunError> {
    let averages: BTreeMap<String, _> = bundles
        .iter()
        .filter_map(|(l, b)| b.average_prices.clone().map(|a| (l.clone(), a)))
        .collect();
    let path = out.join(DECARB_REPORT);
    match decarbonization_metrics(&averages) {
        Ok(report) => {
            let mut value = serde_json::to_value(&report).expect("report serializes");
            let avg: BTreeMap<&String, Value> = averages
                .iter()
                .map(|(l, a)| (l, json!({ "overall": a.overall, "zones": a.per_zone })))
                .collect();
            value["average_prices"] = json!(avg);
            write_json(&path, value)?;
        }
        Err(_) => remove_if_present(&path)?,
    }

    let mut rows = Vec::new();
    for regime in [EmissionsRegime::Least, EmissionsRegime::Social, EmissionsRegime::Zero] {
        let from = ScenarioSpec::new(regime, TransmissionMode::Existing).label();
        let to = ScenarioSpec::new(regime, TransmissionMode::Full).label();
        if let (Some(a), Some(b)) = (bundles.get(&from), bundles.get(&to)) {
            let Ok(delta) = rent_delta(&a.rents, &b.rents) else { continue };
            for c in delta.per_asset {
                rows.push(vec![from.clone(), to.clone(), c.asset, c.zone, c.technology, fmt_num(c.delta)]);
            }
        }
    }
    let path = out.join(RENT_CHANGES);
    if rows.is_empty() {
        remove_if_present(&path)
    } else {
        write_csv(&path, &["from", "to", "asset", "zone", "technology", "delta"], rows)
    }
}

fn remove_if_present(path: &Path) -> Result<(), RunError> {
    match fs::remove_file(path) {
        Err(e) if e.kind() != io::ErrorKind::NotFound => Err(RunError::Io { path: path.to_path_buf(), source: e }),
        _ => Ok(()),
    }
}
