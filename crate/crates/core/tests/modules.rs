mod common;

use common::{fixture, generators, loads, profiles, rel, series, solve, Case, Gen, CORRIDOR_HEADER, STORAGE_HEADER};
use gridplan::assembly::{build_model, solve_scenario, ScenarioError, ScenarioOptions};
use gridplan::inputs::load_inputs;
use gridplan::lp::Sense;

const FUELS: &str = "fuel_id,price_per_mmbtu,tco2_per_mmbtu\ngas,3.0,0.053\n";

fn burner(id: &'static str, zone: &'static str, annual: f64, vom: f64) -> Gen {
    let mut g = Gen::new(id, zone, annual, vom);
    g.heat_rate = 7.0;
    g.fuel = Some("gas");
    g
}

fn wind(id: &'static str, zone: &'static str, annual: f64) -> Gen {
    let mut g = Gen::new(id, zone, annual, 0.0);
    g.tech = "wind";
    g
}

// Free solar in the first hour only; a battery beats a 1000 $/MW-yr peaker.
#[test]
fn storage_shifts_free_energy_to_the_scarce_hour() {
    let inputs = Case::one_zone(2)
        .with("loads.csv", loads(&[("z1", &[1.0, 1.0])]))
        .with("generators.csv", generators(&[wind("solar", "z1", 0.0), Gen::new("peaker", "z1", 1000.0, 100.0)]))
        .with("cf_profiles.csv", profiles(&[("solar", &[1.0, 0.0])]))
        .with("storage.csv", format!("{STORAGE_HEADER}\nbat,z1,battery,0,0,true,true,1,1,0,0.8\n"))
        .load();
    let b = solve(&inputs, "LE");
    let s = &b.storage[0];
    assert!((s.charge[0] - 1.25).abs() < 1e-9 && s.charge[1].abs() < 1e-9, "{:?}", s.charge);
    assert!((s.discharge[1] - 1.0).abs() < 1e-9 && s.discharge[0].abs() < 1e-9, "{:?}", s.discharge);
    assert!((s.power_mw - 1.25).abs() < 1e-9 && (s.energy_mwh - 1.0).abs() < 1e-9);
    assert!((s.soc[0] - 1.0).abs() < 1e-9 && s.soc[1].abs() < 1e-9);
    assert!(b.generators[1].dispatch.iter().all(|d| d.abs() < 1e-9));
    assert!(rel(b.objective, 2.25) < 1e-9, "{}", b.objective);
}

#[test]
fn one_timepoint_series_cannot_store() {
    let inputs = Case::one_zone(1)
        .with("loads.csv", loads(&[("z1", &[3.0])]))
        .with("generators.csv", generators(&[Gen::new("gas", "z1", 100.0, 10.0)]))
        .with("storage.csv", format!("{STORAGE_HEADER}\nbat,z1,battery,10,10,false,false,0,0,0,0.8\n"))
        .load();
    let b = solve(&inputs, "LE");
    let s = &b.storage[0];
    assert!((0.8 * s.charge[0] - s.discharge[0]).abs() < 1e-9);
    assert!((b.generators[0].dispatch[0] - 3.0 - s.charge[0] + s.discharge[0]).abs() < 1e-9);
}

fn hydro_case(capacity: f64, min: f64, avg: f64) -> Case {
    let load: Vec<f64> = (0..168).map(|t| 60.0 + 2.0 * (t % 24) as f64).collect();
    Case::one_zone(168)
        .with("loads.csv", loads(&[("z1", &load)]))
        .with("generators.csv", generators(&[Gen::new("gas", "z1", 50_000.0, 30.0)]))
        .with("hydro.csv", format!("project_id,zone,capacity_mw\ndam,z1,{capacity}\n"))
        .with("hydro_series.csv", format!("project_id,timeseries_id,min_flow_mw,avg_flow_mw\ndam,s1,{min},{avg}\n"))
}

#[test]
fn hydro_meets_its_average_and_minimum_flow() {
    let inputs = hydro_case(100.0, 20.0, 50.0).load();
    let b = solve(&inputs, "LE");
    let d = &b.hydro[0].dispatch;
    let energy: f64 = d.iter().sum();
    assert!((energy - 8400.0).abs() < 1e-6 * 8400.0, "{energy}");
    assert!(d.iter().all(|&x| x >= 20.0 - 1e-9 && x <= 100.0 + 1e-9));
    // Peak shaving: the dam works hardest in the top load hour.
    assert!(d[23] > d[0]);
}

#[test]
fn hydro_pinned_when_min_avg_and_capacity_agree() {
    let inputs = hydro_case(50.0, 50.0, 50.0).load();
    let b = solve(&inputs, "LE");
    assert!(b.hydro[0].dispatch.iter().all(|&x| (x - 50.0).abs() < 1e-9));
}

#[test]
fn hydrogen_carries_energy_between_weeks_and_the_battery_does_not() {
    let inputs = load_inputs(&fixture("two_week")).unwrap();
    let b = solve(&inputs, "ZO");
    let week = |s: usize| inputs.calendar.series_range(s);
    let h = &b.hydrogen[0];
    let fc = inputs.hydrogen[0].fuel_cell_mwh_per_kg;
    let kg_in = |s: usize| week(s).map(|t| h.liquefaction[t]).sum::<f64>();
    let kg_out = |s: usize| week(s).map(|t| h.generation[t] / fc).sum::<f64>();
    let carried = kg_in(0) - kg_out(0);
    assert!(carried > 1.0, "surplus week stores only {carried} kg");
    assert!((kg_out(1) - kg_in(1) - carried).abs() < 1e-6 * h.tank_kg.max(1.0));
    assert!(h.tank_kg > 0.0 && h.fuel_cell_mw > 0.0);
    assert!(!b.storage.is_empty());
    for (s, p) in b.storage.iter().zip(&inputs.storage) {
        for k in 0..2 {
            let net: f64 = week(k).map(|t| p.round_trip_efficiency * s.charge[t] - s.discharge[t]).sum();
            assert!(net.abs() <= 1e-6 * s.energy_mwh.max(1.0), "{} moves {net} MWh out of week {k}", s.id);
        }
    }
}

fn flat_gas_year() -> Case {
    Case::new()
        .with("timeseries.csv", series(&[("day", 24, 1.0, 365.0)]))
        .with("zones.csv", "zone_id,interconnect\nz1,EAST\n")
        .with("loads.csv", loads(&[("z1", &[10.0; 24])]))
        .with("fuels.csv", FUELS)
        .with("generators.csv", generators(&[burner("gas", "z1", 50_000.0, 2.0)]))
}

#[test]
fn annual_emissions_of_flat_gas() {
    let inputs = flat_gas_year().load();
    let b = solve(&inputs, "LE");
    assert!(rel(b.emissions, 32_499.6) < 1e-9, "{}", b.emissions);
}

#[test]
fn carbon_price_adds_price_times_rate_to_each_emitting_dispatch() {
    let inputs = flat_gas_year().load();
    let opts = ScenarioOptions::default();
    let least = build_model(&inputs, "LE".parse().unwrap(), &opts).unwrap();
    let social = build_model(&inputs, "SE".parse().unwrap(), &opts).unwrap();
    let mut audited = 0;
    for (t, terms) in social.emissions.per_timepoint.iter().enumerate() {
        let w = inputs.calendar.weight(t);
        for &(v, rate) in terms {
            let extra = social.lp.variable(v).objective - least.lp.variable(v).objective;
            assert!((extra - w * 190.0 * rate).abs() < 1e-9 * extra.abs());
            assert!((extra / w - 70.49).abs() < 1e-9);
            audited += 1;
        }
    }
    assert_eq!(audited, 24);
}

#[test]
fn zero_cap_on_fossil_only_system_is_infeasible() {
    let inputs = flat_gas_year().load();
    match solve_scenario(&inputs, "ZE".parse().unwrap(), &ScenarioOptions::default()) {
        Err(e @ ScenarioError::Infeasible { .. }) => assert_eq!(e.status(), "infeasible"),
        other => panic!("expected infeasible, got {other:?}"),
    }
}

#[test]
fn zero_cap_shuts_every_emitting_unit() {
    let cf: Vec<f64> = (0..24).map(|t| if (6..18).contains(&t) { 1.0 } else { 0.2 }).collect();
    let inputs = flat_gas_year()
        .with("generators.csv", generators(&[burner("gas", "z1", 50_000.0, 2.0), wind("wind", "z1", 300_000.0)]))
        .with("cf_profiles.csv", profiles(&[("wind", &cf)]))
        .with("storage.csv", format!("{STORAGE_HEADER}\nbat,z1,battery,0,0,true,true,10000,500,0,0.9\n"))
        .load();
    let z = solve(&inputs, "ZE");
    assert!(z.emissions.abs() <= 1e-6);
    assert!(z.generators[0].dispatch.iter().all(|d| d.abs() <= 1e-6));
    let l = solve(&inputs, "LE");
    assert!(l.emissions > 1.0);
    assert!(l.direct_cost <= z.direct_cost * (1.0 + 1e-9));
}

fn two_zone(local_b: bool, existing: f64) -> Case {
    let mut gens = vec![Gen::new("cheap", "A", 1_000.0, 10.0)];
    if local_b {
        gens.push(Gen::new("local", "B", 5_000.0, 200.0));
    }
    Case::one_zone(4)
        .with("zones.csv", "zone_id,interconnect\nA,EAST\nB,EAST\n")
        .with("loads.csv", loads(&[("A", &[0.0; 4]), ("B", &[5.0, 10.0, 8.0, 3.0])]))
        .with("generators.csv", generators(&gens))
        .with("corridors.csv", format!("{CORRIDOR_HEADER}\nAB,A,B,{existing},0.05,100,0,true,,120\n"))
}

#[test]
fn corridor_build_matches_peak_send() {
    let inputs = two_zone(false, 0.0).load();
    let b = solve(&inputs, "LO");
    let c = &b.corridors[0];
    let peak = 10.0 / 0.95;
    assert!((c.new_mw - peak).abs() < 1e-9, "{}", c.new_mw);
    assert!((c.send_ab[1] - peak).abs() < 1e-9);
    assert!((b.generators[0].capacity_mw - peak).abs() < 1e-9);
}

#[test]
fn corridor_without_expansion_and_no_local_supply_is_infeasible() {
    let inputs = two_zone(false, 0.0).load();
    let r = solve_scenario(&inputs, "LE".parse().unwrap(), &ScenarioOptions::default());
    assert!(matches!(r, Err(ScenarioError::Infeasible { .. })), "{r:?}");
    let inputs = two_zone(true, 0.0).load();
    let b = solve(&inputs, "LE");
    assert!(b.corridors[0].send_ab.iter().all(|f| f.abs() < 1e-12));
}

// The existing-mode optimum stays feasible, at the same cost, once
// expansion is allowed and its build pinned at zero.
#[test]
fn existing_mode_point_is_feasible_under_full_mode() {
    let inputs = two_zone(true, 4.0).load();
    let opts = ScenarioOptions::default();
    let e = solve(&inputs, "LE");
    let full = build_model(&inputs, "LO".parse().unwrap(), &opts).unwrap();
    let lp = &full.lp;
    assert_eq!(e.variable_tags.len(), lp.num_variables());
    let x: Vec<f64> = lp
        .variables()
        .iter()
        .map(|v| e.solution.primal[e.variable_tags.iter().position(|t| *t == v.tag).unwrap()])
        .collect();
    for (v, &xj) in lp.variables().iter().zip(&x) {
        assert!(xj >= v.lower - 1e-9 && xj <= v.upper + 1e-9, "{}", v.tag);
    }
    for row in lp.constraints() {
        let a = row.activity(&x);
        let ok = match row.sense {
            Sense::Le => a <= row.rhs + 1e-9,
            Sense::Ge => a >= row.rhs - 1e-9,
            Sense::Eq => (a - row.rhs).abs() <= 1e-9,
        };
        assert!(ok, "{} activity {a} rhs {}", row.tag, row.rhs);
    }
    assert!(rel(lp.evaluate_objective(&x), e.objective) < 1e-12);
    let o = solve(&inputs, "LO");
    assert!(o.objective <= e.objective * (1.0 + 1e-12));
}
