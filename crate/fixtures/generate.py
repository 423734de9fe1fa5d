"""Writes the bundled input fixtures. Output is deterministic; rerun after editing."""

import csv
import math
import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))


def write(dirname, name, header, rows):
    path = os.path.join(HERE, dirname, name)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])


def fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        s = f"{v:.6f}".rstrip("0").rstrip(".")
        return s if s not in ("", "-0") else "0"
    return "" if v is None else str(v)


GEN_HEADER = [
    "project_id", "zone", "tech", "existing_mw", "buildable", "max_total_mw",
    "overnight_cost_per_mw", "lifetime_years", "annualized_cost_per_mw_yr",
    "fixed_om_per_mw_yr", "variable_om_per_mwh", "heat_rate", "fuel", "sunk_cost_per_yr",
]
STORAGE_HEADER = [
    "project_id", "zone", "tech", "existing_power_mw", "existing_energy_mwh",
    "power_buildable", "energy_buildable", "max_power_mw", "max_energy_mwh",
    "power_cost_per_mw_yr", "energy_cost_per_mwh_yr", "fixed_om_per_mw_yr",
    "round_trip_efficiency", "max_duration_hours",
]
H2_HEADER = [
    "zone", "electrolyzer_cost_per_mw_yr", "fuel_cell_cost_per_mw_yr",
    "liquifier_cost_per_kg_h_yr", "tank_cost_per_kg_yr", "electrolyzer_kg_per_mwh",
    "liquifier_mwh_per_kg", "fuel_cell_mwh_per_kg",
]
CORRIDOR_HEADER = [
    "corridor_id", "zone_a", "zone_b", "existing_mw", "loss_fraction",
    "capital_cost_per_mw_yr", "fixed_om_per_mw_yr", "new_build_allowed", "max_new_mw",
    "length_miles",
]
FINANCIALS = (["base_year", "interest_rate", "discount_rate", "report_discount_factor"],
              [[2022, 0.05, 0.05, 1.0]])
FUELS = (["fuel_id", "price_per_mmbtu", "tco2_per_mmbtu"],
         [["natural_gas", 3.0, 0.053], ["natural_gas_west", 2.0, 0.053], ["natural_gas_ccs", 3.0, 0.0053]])


def micro():
    d = "micro"
    write(d, "timeseries.csv", ["timeseries_id", "num_timepoints", "hours_per_timepoint", "scale_to_year"],
          [["day", 24, 1.0, 365.0]])
    write(d, "zones.csv", ["zone_id", "interconnect"], [["z1", "EAST"]])
    write(d, "loads.csv", ["zone_id", "timepoint_id", "mw"], [["z1", t, 10.0] for t in range(24)])
    write(d, "generators.csv", GEN_HEADER,
          [["gas", "z1", "gas", 0.0, True, None, None, None, 50000.0, 0.0, 20.0, 0.0, None, None]])


def solar_shape(hour, strength):
    h = hour % 24
    return max(0.0, math.sin(math.pi * (h - 6) / 12)) * strength if 6 <= h <= 18 else 0.0


def two_week():
    d = "two_week"
    n = 168
    write(d, "timeseries.csv", ["timeseries_id", "num_timepoints", "hours_per_timepoint", "scale_to_year"],
          [["surplus", n, 1.0, 8760 / (2 * n)], ["deficit", n, 1.0, 8760 / (2 * n)]])
    write(d, "zones.csv", ["zone_id", "interconnect"], [["z1", "EAST"]])
    write(d, "loads.csv", ["zone_id", "timepoint_id", "mw"], [["z1", t, 100.0] for t in range(2 * n)])
    write(d, "generators.csv", GEN_HEADER,
          [["solar", "z1", "solar", 0.0, True, None, None, None, 40000.0, 0.0, 0.0, 0.0, None, None]])
    cf = []
    for t in range(2 * n):
        # The second week is dark: anything served then must come from stored energy.
        cf.append(["solar", t, round(solar_shape(t, 1.0), 4) if t < n else 0.0])
    write(d, "cf_profiles.csv", ["project_id", "timepoint_id", "cf"], cf)
    write(d, "storage.csv", STORAGE_HEADER,
          [["battery", "z1", "battery", 0.0, 0.0, True, True, None, None, 20000.0, 5000.0, 0.0, 0.85, None]])
    write(d, "hydrogen.csv", H2_HEADER, [["z1", 60000.0, 80000.0, 500.0, 0.5, 20.0, 0.01, 0.0175]])
    write(d, "financials.csv", *FINANCIALS)


def three_zone():
    d = "three_zone"
    n = 168
    weeks = ["winter", "summer"]
    rng = random.Random(20220101)
    write(d, "timeseries.csv", ["timeseries_id", "num_timepoints", "hours_per_timepoint", "scale_to_year"],
          [[w, n, 1.0, 8760 / (len(weeks) * n)] for w in weeks])
    zones = [("A", "EAST"), ("B", "EAST"), ("C", "WECC")]
    write(d, "zones.csv", ["zone_id", "interconnect"], zones)
    T = n * len(weeks)
    base = {"A": 1800.0, "B": 1200.0, "C": 900.0}
    loads = []
    for z, _ in zones:
        for t in range(T):
            h = t % 24
            season = 1.0 if t < n else 1.12
            daily = 0.82 + 0.18 * math.sin(math.pi * (h - 8) / 12) if 8 <= h <= 20 else 0.8
            weekday = 0.93 if (t // 24) % 7 >= 5 else 1.0
            loads.append([z, t, round(base[z] * season * daily * weekday, 2)])
    write(d, "loads.csv", ["zone_id", "timepoint_id", "mw"], loads)

    g = []
    # Thermal fleet. B cannot add gas and the West burns cheaper gas, so the
    # corridors carry energy under every emissions regime.
    g.append(["gas_A", "A", "gas", 1200.0, True, None, 1000000.0, 30.0, None, 12000.0, 3.0, 7.0, "natural_gas", 40000000.0])
    g.append(["gas_B", "B", "gas", 600.0, False, None, 1000000.0, 30.0, None, 12000.0, 3.0, 7.2, "natural_gas", 20000000.0])
    g.append(["gas_C", "C", "gas", 500.0, True, None, 1000000.0, 30.0, None, 12000.0, 3.0, 7.0, "natural_gas_west", 15000000.0])
    g.append(["gasccs_A", "A", "gas_ccs", 0.0, True, None, None, None, 190000.0, 25000.0, 6.0, 7.6, "natural_gas_ccs", None])
    g.append(["nuclear_A", "A", "nuclear", 600.0, False, None, None, None, 0.0, 95000.0, 2.5, 0.0, None, 250000000.0])
    # Renewables.
    g.append(["wind_A", "A", "wind", 0.0, True, 6000.0, None, None, 120000.0, 0.0, 0.0, 0.0, None, None])
    g.append(["solar_A", "A", "solar", 0.0, True, None, None, None, 70000.0, 0.0, 0.0, 0.0, None, None])
    g.append(["wind_B", "B", "wind", 0.0, True, 900.0, None, None, 100000.0, 0.0, 0.0, 0.0, None, None])
    g.append(["solar_B", "B", "solar", 0.0, True, None, None, None, 75000.0, 0.0, 0.0, 0.0, None, None])
    g.append(["solar_C", "C", "solar", 0.0, True, None, None, None, 55000.0, 0.0, 0.0, 0.0, None, None])
    g.append(["wind_C", "C", "wind", 0.0, True, None, None, None, 130000.0, 0.0, 0.0, 0.0, None, None])
    write(d, "generators.csv", GEN_HEADER, g)

    cf = []
    for pid, strength, seasonal in [("solar_A", 0.85, (0.7, 1.0)), ("solar_B", 0.8, (0.65, 1.0)), ("solar_C", 1.0, (0.85, 1.0))]:
        for t in range(T):
            s = seasonal[0] if t < n else seasonal[1]
            cloud = 0.75 + 0.25 * rng.random()
            cf.append([pid, t, round(min(1.0, solar_shape(t, strength * s) * cloud), 4)])
    for pid, mean, season_wt in [("wind_A", 0.38, (1.15, 0.8)), ("wind_B", 0.46, (1.1, 0.85)), ("wind_C", 0.33, (1.0, 0.9))]:
        level = mean
        for t in range(T):
            s = season_wt[0] if t < n else season_wt[1]
            level += 0.25 * (mean - level) + rng.gauss(0.0, 0.09)
            level = min(1.0, max(0.02, level))
            cf.append([pid, t, round(min(1.0, level * s), 4)])
    write(d, "cf_profiles.csv", ["project_id", "timepoint_id", "cf"], cf)

    write(d, "storage.csv", STORAGE_HEADER, [
        ["battery_A", "A", "battery", 0.0, 0.0, True, True, None, None, 30000.0, 9000.0, 2500.0, 0.85, 12.0],
        ["battery_B", "B", "battery", 100.0, 400.0, True, True, None, None, 30000.0, 9000.0, 2500.0, 0.85, 12.0],
        ["battery_C", "C", "battery", 0.0, 0.0, True, True, None, None, 30000.0, 9000.0, 2500.0, 0.85, 12.0],
    ])
    write(d, "hydro.csv", ["project_id", "zone", "capacity_mw"], [["hydro_C", "C", 300.0]])
    write(d, "hydro_series.csv", ["project_id", "timeseries_id", "min_flow_mw", "avg_flow_mw"],
          [["hydro_C", "winter", 40.0, 120.0], ["hydro_C", "summer", 60.0, 180.0]])
    write(d, "hydrogen.csv", H2_HEADER, [
        ["A", 70000.0, 90000.0, 600.0, 0.6, 20.0, 0.01, 0.0175],
        ["C", 70000.0, 90000.0, 600.0, 0.6, 20.0, 0.01, 0.0175],
    ])
    write(d, "corridors.csv", CORRIDOR_HEADER, [
        ["AB", "A", "B", 400.0, 0.02, 45000.0, 1500.0, True, None, 300.0],
        ["BC", "B", "C", 150.0, 0.04, 40000.0, 2500.0, True, None, 700.0],
    ])
    write(d, "financials.csv", *FINANCIALS)
    write(d, "fuels.csv", *FUELS)


if __name__ == "__main__":
    micro()
    two_week()
    three_zone()
