#![allow(dead_code)]

pub mod checks;
pub mod oracle;

use std::fs;
use std::path::PathBuf;

use gridplan::assembly::{solve_scenario, ResultsBundle, ScenarioOptions};
use gridplan::inputs::{load_inputs, InputBundle, InputError};
use tempfile::TempDir;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

/// An input directory described file by file.
#[derive(Clone, Default)]
pub struct Case {
    files: Vec<(String, String)>,
}

impl Case {
    pub fn new() -> Self {
        Self::default()
    }

    /// One zone `z1` in EAST with a single `n`-hour series scaled to 8760 h.
    pub fn one_zone(n: usize) -> Self {
        Self::new()
            .with("timeseries.csv", series(&[("s1", n, 1.0, 8760.0 / n as f64)]))
            .with("zones.csv", "zone_id,interconnect\nz1,EAST\n")
    }

    /// Every file of a checked-in fixture, ready to be edited.
    pub fn from_fixture(name: &str) -> Self {
        let mut files: Vec<(String, String)> = fs::read_dir(fixture(name))
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().into_string().unwrap(), fs::read_to_string(e.path()).unwrap())
            })
            .collect();
        files.sort();
        Self { files }
    }

    pub fn get(&self, name: &str) -> &str {
        &self.files.iter().find(|(n, _)| n == name).expect("file in case").1
    }

    pub fn with(mut self, name: &str, contents: impl Into<String>) -> Self {
        self.files.retain(|(n, _)| n != name);
        self.files.push((name.to_string(), contents.into()));
        self
    }

    pub fn without(mut self, name: &str) -> Self {
        self.files.retain(|(n, _)| n != name);
        self
    }

    pub fn write(&self) -> TempDir {
        let dir = tempfile::tempdir().unwrap();
        for (name, body) in &self.files {
            fs::write(dir.path().join(name), body).unwrap();
        }
        dir
    }

    pub fn try_load(&self) -> Result<InputBundle, InputError> {
        let dir = self.write();
        load_inputs(dir.path())
    }

    pub fn load(&self) -> InputBundle {
        self.try_load().unwrap_or_else(|e| panic!("case does not load: {e}"))
    }
}

/// `timeseries.csv` from (id, timepoints, hours each, scale).
pub fn series(defs: &[(&str, usize, f64, f64)]) -> String {
    let mut s = String::from("timeseries_id,num_timepoints,hours_per_timepoint,scale_to_year\n");
    for (id, n, h, scale) in defs {
        s += &format!("{id},{n},{h},{scale}\n");
    }
    s
}

/// `loads.csv` from per-zone hourly MW.
pub fn loads(per_zone: &[(&str, &[f64])]) -> String {
    let mut s = String::from("zone_id,timepoint_id,mw\n");
    for (z, mw) in per_zone {
        for (t, v) in mw.iter().enumerate() {
            s += &format!("{z},{t},{v}\n");
        }
    }
    s
}

pub const GEN_HEADER: &str = "project_id,zone,tech,existing_mw,buildable,max_total_mw,annualized_cost_per_mw_yr,fixed_om_per_mw_yr,variable_om_per_mwh,heat_rate,fuel,sunk_cost_per_yr";

/// A generator row matching [`GEN_HEADER`].
#[derive(Clone)]
pub struct Gen {
    pub id: &'static str,
    pub zone: &'static str,
    pub tech: &'static str,
    pub existing: f64,
    pub buildable: bool,
    pub max_total: Option<f64>,
    pub annual: f64,
    pub fixed_om: f64,
    pub vom: f64,
    pub heat_rate: f64,
    pub fuel: Option<&'static str>,
    pub sunk: f64,
}

impl Gen {
    pub fn new(id: &'static str, zone: &'static str, annual: f64, vom: f64) -> Self {
        Self {
            id,
            zone,
            tech: "gas",
            existing: 0.0,
            buildable: true,
            max_total: None,
            annual,
            fixed_om: 0.0,
            vom,
            heat_rate: 0.0,
            fuel: None,
            sunk: 0.0,
        }
    }

    pub fn row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            self.id,
            self.zone,
            self.tech,
            self.existing,
            self.buildable,
            opt(self.max_total),
            self.annual,
            self.fixed_om,
            self.vom,
            self.heat_rate,
            self.fuel.unwrap_or(""),
            self.sunk
        )
    }
}

pub fn generators(gens: &[Gen]) -> String {
    let mut s = format!("{GEN_HEADER}\n");
    for g in gens {
        s += &g.row();
    }
    s
}

/// `cf_profiles.csv` from (project, hourly cf).
pub fn profiles(per_project: &[(&str, &[f64])]) -> String {
    let mut s = String::from("project_id,timepoint_id,cf\n");
    for (p, cf) in per_project {
        for (t, v) in cf.iter().enumerate() {
            s += &format!("{p},{t},{v}\n");
        }
    }
    s
}

pub const STORAGE_HEADER: &str = "project_id,zone,tech,existing_power_mw,existing_energy_mwh,power_buildable,energy_buildable,power_cost_per_mw_yr,energy_cost_per_mwh_yr,fixed_om_per_mw_yr,round_trip_efficiency";

pub const CORRIDOR_HEADER: &str = "corridor_id,zone_a,zone_b,existing_mw,loss_fraction,capital_cost_per_mw_yr,fixed_om_per_mw_yr,new_build_allowed,max_new_mw,length_miles";

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Solves one labelled scenario with default options and checks every
/// bundle invariant on the way out.
pub fn solve(inputs: &InputBundle, label: &str) -> ResultsBundle {
    let b = solve_scenario(inputs, label.parse().unwrap(), &ScenarioOptions::default())
        .unwrap_or_else(|e| panic!("{label}: {e}"));
    checks::assert_invariants(inputs, &b);
    b
}
