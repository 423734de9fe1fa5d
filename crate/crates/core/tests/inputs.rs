mod common;

use common::{fixture, generators, loads, profiles, series, Case, Gen};
use gridplan::generation::CapacityFactor;
use gridplan::inputs::load_inputs;
use gridplan::runner::input_digest;

#[test]
fn fixtures_load() {
    for name in ["micro", "two_week", "three_zone"] {
        let b = load_inputs(&fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!((b.calendar.total_weight() - 8760.0).abs() < 1e-3, "{name}");
    }
    let b = load_inputs(&fixture("three_zone")).unwrap();
    assert_eq!(b.network.zones().len(), 3);
    assert_eq!(b.calendar.len(), 336);
}

fn two_hour_wind(cf: f64) -> Case {
    let mut wind = Gen::new("wind", "z1", 100.0, 0.0);
    wind.tech = "wind";
    Case::one_zone(2)
        .with("loads.csv", loads(&[("z1", &[1.0, 1.0])]))
        .with("generators.csv", generators(&[Gen::new("gas", "z1", 10.0, 5.0), wind]))
        .with("cf_profiles.csv", profiles(&[("wind", &[0.5, cf])]))
}

#[test]
fn capacity_factor_above_tolerance_names_the_row() {
    let e = two_hour_wind(1.2).try_load().unwrap_err();
    assert_eq!(e.file, "cf_profiles.csv");
    assert_eq!(e.line, Some(3));
    assert!(e.message.contains("wind"), "{e}");
}

#[test]
fn capacity_factor_within_tolerance_is_kept() {
    let b = two_hour_wind(1.04).load();
    let wind = b.generators.iter().find(|g| g.id == "wind").unwrap();
    assert_eq!(wind.capacity_factor, CapacityFactor::Profile(vec![0.5, 1.04]));
    let gas = b.generators.iter().find(|g| g.id == "gas").unwrap();
    assert_eq!(gas.capacity_factor.at(1), 1.0);
}

#[test]
fn empty_demand_is_rejected() {
    let e = Case::from_fixture("micro").with("loads.csv", "zone_id,timepoint_id,mw\n").try_load().unwrap_err();
    assert_eq!(e.file, "loads.csv");
    assert!(e.message.contains("no demand"), "{e}");
}

#[test]
fn partial_demand_is_rejected() {
    let case = Case::one_zone(3).with("loads.csv", loads(&[("z1", &[1.0, 2.0])])).with(
        "generators.csv",
        generators(&[Gen::new("gas", "z1", 10.0, 5.0)]),
    );
    let e = case.try_load().unwrap_err();
    assert!(e.message.contains("2 of 3"), "{e}");
}

#[test]
fn missing_required_file() {
    let e = Case::from_fixture("micro").without("generators.csv").try_load().unwrap_err();
    assert_eq!(e.file, "generators.csv");
    assert!(e.message.contains("missing file"));
}

#[test]
fn unknown_column() {
    let micro = Case::from_fixture("micro");
    let zones = micro.get("zones.csv").replace("zone_id,interconnect", "zone_id,interconnect,colour");
    let zones = zones.replace("z1,EAST", "z1,EAST,red");
    let e = micro.with("zones.csv", zones).try_load().unwrap_err();
    assert_eq!((e.file.as_str(), e.line), ("zones.csv", Some(1)));
    assert!(e.message.contains("colour"), "{e}");
}

#[test]
fn type_mismatch_names_the_column() {
    let micro = Case::from_fixture("micro");
    let loads = micro.get("loads.csv").replacen("z1,3,10", "z1,3,ten", 1);
    let e = micro.with("loads.csv", loads).try_load().unwrap_err();
    assert_eq!((e.file.as_str(), e.line), ("loads.csv", Some(5)));
    assert!(e.message.contains("`mw`"), "{e}");
}

#[test]
fn unknown_zone_reference() {
    let micro = Case::from_fixture("micro");
    let gens = micro.get("generators.csv").replace("gas,z1,gas", "gas,z9,gas");
    let e = micro.with("generators.csv", gens).try_load().unwrap_err();
    assert_eq!((e.file.as_str(), e.line), ("generators.csv", Some(2)));
    assert!(e.message.contains("z9"), "{e}");
}

#[test]
fn unknown_fuel_reference() {
    let mut g = Gen::new("coal", "z1", 10.0, 1.0);
    g.heat_rate = 10.0;
    g.fuel = Some("coal");
    let e = Case::one_zone(1)
        .with("loads.csv", loads(&[("z1", &[1.0])]))
        .with("generators.csv", generators(&[g]))
        .try_load()
        .unwrap_err();
    assert_eq!(e.file, "generators.csv");
    assert!(e.message.contains("coal"), "{e}");
}

#[test]
fn corridor_to_unknown_zone() {
    let micro = Case::from_fixture("micro");
    let corridors = format!("{}\nx,z1,z2,10,0.01,1,0,true,,\n", common::CORRIDOR_HEADER);
    let e = micro.with("corridors.csv", corridors).try_load().unwrap_err();
    assert_eq!((e.file.as_str(), e.line), ("corridors.csv", Some(2)));
}

#[test]
fn calendar_must_cover_a_year() {
    let e = Case::from_fixture("micro").with("timeseries.csv", series(&[("day", 24, 1.0, 300.0)])).try_load().unwrap_err();
    assert_eq!(e.file, "timeseries.csv");
}

#[test]
fn digest_follows_bytes() {
    let a = Case::from_fixture("micro");
    let d1 = input_digest(a.write().path()).unwrap();
    let d2 = input_digest(a.write().path()).unwrap();
    assert_eq!(d1, d2);
    let loads = a.get("loads.csv").replacen("z1,0,10", "z1,0,11", 1);
    let d3 = input_digest(a.clone().with("loads.csv", loads).write().path()).unwrap();
    assert_ne!(d1, d3);
    let renamed = a.clone().without("loads.csv").with("loads2.csv", a.get("loads.csv").to_string());
    assert_ne!(d1, input_digest(renamed.write().path()).unwrap());
}
