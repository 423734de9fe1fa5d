//! Invariants every optimal bundle must satisfy, recomputed from the
//! extracted results and the raw inputs rather than from the LP.

use gridplan::analytics::congestion_rents;
use gridplan::assembly::ResultsBundle;
use gridplan::inputs::InputBundle;

pub const TOL: f64 = 1e-6;

fn scaled(x: f64) -> f64 {
    x.abs().max(1.0)
}

/// Violations of the bundle-level invariants, empty when all hold.
pub fn invariants(inputs: &InputBundle, b: &ResultsBundle) -> Vec<String> {
    let mut bad = Vec::new();
    let label = b.scenario.label();
    let cal = &inputs.calendar;
    let n = cal.len();

    if !b.certificate.passes(TOL) {
        bad.push(format!("{label}: certificate {:?}", b.certificate));
    }

    for (z, zone) in b.zones.iter().enumerate() {
        for t in 0..n {
            let mut terms: Vec<f64> = Vec::new();
            terms.extend(b.generators.iter().filter(|g| &g.zone == zone).map(|g| g.dispatch[t]));
            terms.extend(b.hydro.iter().filter(|h| &h.zone == zone).map(|h| h.dispatch[t]));
            for s in b.storage.iter().filter(|s| &s.zone == zone) {
                terms.push(s.discharge[t]);
                terms.push(-s.charge[t]);
            }
            for h in b.hydrogen.iter().filter(|h| &h.zone == zone) {
                terms.push(h.generation[t]);
                terms.push(-h.electrolysis[t]);
                terms.push(-h.liquifier_mwh_per_kg * h.liquefaction[t]);
            }
            for c in &b.corridors {
                let keep = 1.0 - c.loss_fraction;
                if &c.zone_a == zone {
                    terms.push(-c.send_ab[t]);
                    terms.push(keep * c.send_ba[t]);
                }
                if &c.zone_b == zone {
                    terms.push(-c.send_ba[t]);
                    terms.push(keep * c.send_ab[t]);
                }
            }
            let load = b.loads[z][t];
            let residual = terms.iter().sum::<f64>() - load;
            let mag = terms.iter().fold(load.abs().max(1.0), |m, v| m.max(v.abs()));
            if residual.abs() > TOL * mag {
                bad.push(format!("{label}: balance {zone}:{t} residual {residual}"));
            }
        }
    }

    for g in &b.generators {
        let p = inputs.generators.iter().find(|p| p.id == g.id).expect("generator in inputs");
        if (g.capacity_mw - p.existing_mw - g.new_mw).abs() > 1e-9 * scaled(g.capacity_mw) {
            bad.push(format!("{label}: {} capacity accounting", g.id));
        }
        for t in 0..n {
            let limit = p.capacity_factor.at(t) * g.capacity_mw;
            if g.dispatch[t] > limit + TOL * scaled(g.capacity_mw) || g.dispatch[t] < -TOL {
                bad.push(format!("{label}: {} dispatch {} outside [0, {limit}] at {t}", g.id, g.dispatch[t]));
            }
        }
    }

    for s in &b.storage {
        let p = inputs.storage.iter().find(|p| p.id == s.id).expect("storage in inputs");
        let e = scaled(s.energy_mwh);
        for k in 0..cal.timeseries().len() {
            let r = cal.series_range(k);
            let (first, last) = (r.start, r.end - 1);
            let h = cal.hours(first);
            let closed = s.soc[last] + p.round_trip_efficiency * h * s.charge[first] - h * s.discharge[first];
            if (s.soc[first] - closed).abs() > TOL * e {
                bad.push(format!("{label}: {} soc does not close on series {k}", s.id));
            }
            let net: f64 = r
                .clone()
                .map(|t| (p.round_trip_efficiency * s.charge[t] - s.discharge[t]) * cal.hours(t))
                .sum();
            if net.abs() > TOL * e {
                bad.push(format!("{label}: {} moves {net} MWh out of series {k}", s.id));
            }
        }
        for t in 0..n {
            if s.soc[t] < -TOL * e || s.soc[t] > s.energy_mwh + TOL * e {
                bad.push(format!("{label}: {} soc {} outside [0, {}]", s.id, s.soc[t], s.energy_mwh));
            }
            let pw = s.power_mw + TOL * scaled(s.power_mw);
            if s.charge[t] > pw || s.discharge[t] > pw {
                bad.push(format!("{label}: {} power limit at {t}", s.id));
            }
        }
    }

    for h in &b.hydrogen {
        let p = inputs.hydrogen.iter().find(|p| p.zone == h.zone).expect("hydrogen in inputs");
        let cap = scaled(h.tank_kg);
        let hrs = cal.hours(0);
        let closed = h.level[n - 1] + hrs * h.liquefaction[0] - hrs * h.generation[0] / p.fuel_cell_mwh_per_kg;
        if (h.level[0] - closed).abs() > TOL * cap {
            bad.push(format!("{label}: hydrogen {} tank does not close over the year", h.zone));
        }
        for t in 0..n {
            if h.level[t] < -TOL * cap || h.level[t] > h.tank_kg + TOL * cap {
                bad.push(format!("{label}: hydrogen {} level {} outside tank", h.zone, h.level[t]));
            }
        }
    }

    for hy in &b.hydro {
        let p = inputs.hydro.iter().find(|p| p.id == hy.id).expect("hydro in inputs");
        for (k, sp) in p.series.iter().enumerate() {
            let r = cal.series_range(k);
            let hours: f64 = r.clone().map(|t| cal.hours(t)).sum();
            let energy: f64 = r.clone().map(|t| hy.dispatch[t] * cal.hours(t)).sum();
            if (energy / hours - sp.avg_flow_mw).abs() > TOL * scaled(sp.avg_flow_mw) {
                bad.push(format!("{label}: {} series {k} average {}", hy.id, energy / hours));
            }
            for t in r {
                let d = hy.dispatch[t];
                if d < sp.min_flow_mw - TOL * scaled(sp.min_flow_mw) || d > p.capacity_mw + TOL * scaled(p.capacity_mw) {
                    bad.push(format!("{label}: {} dispatch {d} outside flow limits at {t}", hy.id));
                }
            }
        }
    }

    for (c, rent) in b.corridors.iter().zip(congestion_rents(b)) {
        let k = c.capacity_mw + TOL * scaled(c.capacity_mw);
        if c.send_ab.iter().chain(&c.send_ba).any(|&f| f > k || f < -TOL) {
            bad.push(format!("{label}: {} flow outside [0, {}]", c.id, c.capacity_mw));
        }
        let (za, zb) = (b.zones.iter().position(|z| *z == c.zone_a).unwrap(), b.zones.iter().position(|z| *z == c.zone_b).unwrap());
        let scale: f64 = (0..n)
            .map(|t| b.weights[t] * (b.prices.at(za, t).abs() + b.prices.at(zb, t).abs()) * (c.send_ab[t] + c.send_ba[t]))
            .sum::<f64>()
            .max(1.0);
        if rent < -TOL * scale {
            bad.push(format!("{label}: {} congestion rent {rent} is negative", c.id));
        }
    }

    let categories: f64 = b.costs.iter().map(|(_, v)| v).sum();
    let reconstructed = categories + b.sunk_cost;
    if (reconstructed - b.objective).abs() > 1e-9 * scaled(b.objective) {
        bad.push(format!("{label}: categories {reconstructed} vs objective {}", b.objective));
    }
    bad
}

pub fn assert_invariants(inputs: &InputBundle, b: &ResultsBundle) {
    let bad = invariants(inputs, b);
    assert!(bad.is_empty(), "{}", bad.join("\n"));
}
