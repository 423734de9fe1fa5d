//! Prices from balance duals, load-weighted averages, price distributions,
//! rents, and cross-scenario decarbonization metrics.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::assembly::ResultsBundle;
use crate::lp::{Sense, Solution};
use crate::model::Model;
use crate::network::Network;
use crate::temporal::Calendar;

/// The near-zero price cut, $/MWh.
pub const NEAR_ZERO_PRICE: f64 = 1.0;

pub const DEFAULT_THRESHOLDS: [f64; 16] = [
    0.0, 1.0, 5.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 80.0, 100.0, 150.0, 200.0, 300.0, 500.0, 1000.0,
];

#[derive(Debug, Error, PartialEq)]
pub enum AnalyticsError {
    #[error("solution is not optimal; no duals to price with")]
    NotOptimal,
    #[error("total load is zero")]
    ZeroLoad,
    #[error("rent statements cover different assets: `{0}`")]
    AssetMismatch(String),
    #[error("missing scenario `{0}`")]
    MissingScenario(String),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PriceSurface {
    pub zones: Vec<String>,
    /// `price[z][t]`, $/MWh.
    pub price: Vec<Vec<f64>>,
}

impl PriceSurface {
    pub fn at(&self, z: usize, t: usize) -> f64 {
        self.price[z][t]
    }

    pub fn max(&self) -> f64 {
        self.price.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// price(z, t) = dual(balance:z:t) / w_t.
pub fn zonal_prices(model: &Model, sol: &Solution, calendar: &Calendar, network: &Network) -> PriceSurface {
    let price = model
        .balance_rows
        .iter()
        .map(|rows| rows.iter().enumerate().map(|(t, r)| sol.dual[r.0] / calendar.weight(t)).collect())
        .collect();
    PriceSurface { zones: network.zones().iter().map(|z| z.id.clone()).collect(), price }
}

/// Checked variant for callers holding an arbitrary solution.
pub fn try_zonal_prices(
    model: &Model,
    sol: &Solution,
    calendar: &Calendar,
    network: &Network,
) -> Result<PriceSurface, AnalyticsError> {
    if !sol.is_optimal() || sol.dual.len() != model.lp.num_constraints() {
        return Err(AnalyticsError::NotOptimal);
    }
    Ok(zonal_prices(model, sol, calendar, network))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadWeightedPrices {
    /// Zones with zero load are omitted.
    pub per_zone: BTreeMap<String, f64>,
    pub overall: f64,
}

pub fn load_weighted_average(
    prices: &PriceSurface,
    loads: &[Vec<f64>],
    weights: &[f64],
) -> Result<LoadWeightedPrices, AnalyticsError> {
    let mut per_zone = BTreeMap::new();
    let (mut num, mut den) = (0.0, 0.0);
    for (z, zone) in prices.zones.iter().enumerate() {
        let (mut zn, mut zd) = (0.0, 0.0);
        for (t, &w) in weights.iter().enumerate() {
            let m = w * loads[z][t];
            zn += m * prices.price[z][t];
            zd += m;
        }
        if zd > 0.0 {
            per_zone.insert(zone.clone(), zn / zd);
        }
        num += zn;
        den += zd;
    }
    if den <= 0.0 {
        return Err(AnalyticsError::ZeroLoad);
    }
    Ok(LoadWeightedPrices { per_zone, overall: num / den })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CdfPoint {
    pub threshold: f64,
    pub mwh_fraction: f64,
}

/// Fraction of delivered MWh priced at or below each threshold. The
/// near-zero cut is always among the reported thresholds.
pub fn price_distribution(
    prices: &PriceSurface,
    loads: &[Vec<f64>],
    weights: &[f64],
    thresholds: &[f64],
) -> Vec<CdfPoint> {
    let mut cuts: Vec<f64> = thresholds.iter().copied().filter(|v| !v.is_nan()).collect();
    cuts.push(NEAR_ZERO_PRICE);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut mass: Vec<(f64, f64)> = Vec::new();
    for (z, row) in prices.price.iter().enumerate() {
        for (t, &p) in row.iter().enumerate() {
            let m = weights[t] * loads[z][t];
            if m > 0.0 {
                mass.push((p, m));
            }
        }
    }
    mass.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = mass.iter().map(|m| m.1).sum();
    let mut out = Vec::with_capacity(cuts.len());
    let mut k = 0;
    let mut acc = 0.0;
    for tau in cuts {
        while k < mass.len() && mass[k].0 <= tau {
            acc += mass[k].1;
            k += 1;
        }
        let frac = if total > 0.0 { if k == mass.len() { 1.0 } else { acc / total } } else { 0.0 };
        out.push(CdfPoint { threshold: tau, mwh_fraction: frac });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AssetKind {
    Generator,
    Storage,
    Hydro,
    Hydrogen,
    Corridor,
}

impl AssetKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::Generator => "generator",
            Self::Storage => "storage",
            Self::Hydro => "hydro",
            Self::Hydrogen => "hydrogen",
            Self::Corridor => "corridor",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RentEntry {
    pub asset: String,
    pub kind: AssetKind,
    pub zone: String,
    pub technology: String,
    /// $/yr at zonal prices; congestion rent for corridors.
    pub revenue: f64,
    /// Annualized cost excluding sunk capital, $/yr.
    pub cost: f64,
    pub rent: f64,
    pub interior_new_build: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct RentStatement {
    pub entries: Vec<RentEntry>,
}

impl RentStatement {
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.rent).sum()
    }

    pub fn get(&self, asset: &str) -> Option<&RentEntry> {
        self.entries.iter().find(|e| e.asset == asset)
    }
}

fn weighted(weights: &[f64], price: &[f64], qty: impl Fn(usize) -> f64) -> f64 {
    weights.iter().enumerate().map(|(t, &w)| w * price[t] * qty(t)).sum()
}

/// Congestion rent of every corridor in `bundle`, in corridor order.
pub fn congestion_rents(bundle: &ResultsBundle) -> Vec<f64> {
    bundle
        .corridors
        .iter()
        .map(|c| {
            let za = bundle.zones.iter().position(|z| *z == c.zone_a).expect("zone in bundle");
            let zb = bundle.zones.iter().position(|z| *z == c.zone_b).expect("zone in bundle");
            let (pa, pb) = (&bundle.prices.price[za], &bundle.prices.price[zb]);
            let keep = 1.0 - c.loss_fraction;
            bundle
                .weights
                .iter()
                .enumerate()
                .map(|(t, &w)| w * ((pb[t] * keep - pa[t]) * c.send_ab[t] + (pa[t] * keep - pb[t]) * c.send_ba[t]))
                .sum()
        })
        .collect()
}

pub fn resource_rents(bundle: &ResultsBundle) -> RentStatement {
    let w = &bundle.weights;
    let zprice = |zone: &str| {
        let z = bundle.zones.iter().position(|x| x == zone).expect("zone in bundle");
        &bundle.prices.price[z]
    };
    let mut entries = Vec::new();
    for g in &bundle.generators {
        let p = zprice(&g.zone);
        let revenue = weighted(w, p, |t| g.dispatch[t]);
        let energy: f64 = w.iter().zip(&g.dispatch).map(|(w, d)| w * d).sum();
        let cost = g.annual_capital * g.new_mw + g.fixed_om * g.capacity_mw + (g.energy_cost + g.carbon_cost) * energy;
        entries.push(RentEntry {
            asset: g.id.clone(),
            kind: AssetKind::Generator,
            zone: g.zone.clone(),
            technology: g.technology.clone(),
            revenue,
            cost,
            rent: revenue - cost,
            interior_new_build: g.interior_new_build,
        });
    }
    for s in &bundle.storage {
        let p = zprice(&s.zone);
        let revenue = weighted(w, p, |t| s.discharge[t] - s.charge[t]);
        let cost = s.power_cost * s.new_power_mw + s.energy_cost * s.new_energy_mwh + s.fixed_om * s.power_mw;
        entries.push(RentEntry {
            asset: s.id.clone(),
            kind: AssetKind::Storage,
            zone: s.zone.clone(),
            technology: s.technology.clone(),
            revenue,
            cost,
            rent: revenue - cost,
            interior_new_build: s.interior_new_build,
        });
    }
    for h in &bundle.hydro {
        let revenue = weighted(w, zprice(&h.zone), |t| h.dispatch[t]);
        entries.push(RentEntry {
            asset: h.id.clone(),
            kind: AssetKind::Hydro,
            zone: h.zone.clone(),
            technology: "hydro".into(),
            revenue,
            cost: 0.0,
            rent: revenue,
            interior_new_build: false,
        });
    }
    for h in &bundle.hydrogen {
        let revenue = weighted(w, zprice(&h.zone), |t| {
            h.generation[t] - h.electrolysis[t] - h.liquifier_mwh_per_kg * h.liquefaction[t]
        });
        entries.push(RentEntry {
            asset: format!("hydrogen:{}", h.zone),
            kind: AssetKind::Hydrogen,
            zone: h.zone.clone(),
            technology: "hydrogen".into(),
            revenue,
            cost: h.annual_cost,
            rent: revenue - h.annual_cost,
            interior_new_build: h.interior_new_build,
        });
    }
    for (c, revenue) in bundle.corridors.iter().zip(congestion_rents(bundle)) {
        let cost = c.capital_cost * c.new_mw + c.fixed_om * c.capacity_mw;
        entries.push(RentEntry {
            asset: c.id.clone(),
            kind: AssetKind::Corridor,
            zone: format!("{}-{}", c.zone_a, c.zone_b),
            technology: "transmission".into(),
            revenue,
            cost,
            rent: revenue - cost,
            interior_new_build: c.existing_mw == 0.0 && c.new_mw > 1e-7,
        });
    }
    RentStatement { entries }
}

/// Σ w·price·load, and Σ asset revenues plus congestion rents. Equal at any
/// primal point satisfying the balance rows.
pub fn market_clearing(bundle: &ResultsBundle) -> (f64, f64) {
    let payments: f64 = bundle
        .loads
        .iter()
        .enumerate()
        .map(|(z, load)| weighted(&bundle.weights, &bundle.prices.price[z], |t| load[t]))
        .sum();
    let revenues = bundle.rents.entries.iter().map(|e| e.revenue).sum();
    (payments, revenues)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RentChange {
    pub asset: String,
    pub zone: String,
    pub technology: String,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RentDelta {
    pub per_asset: Vec<RentChange>,
    pub by_zone: BTreeMap<String, f64>,
    pub by_technology: BTreeMap<String, f64>,
    pub total: f64,
}

/// Per-asset `b − a`.
pub fn rent_delta(a: &RentStatement, b: &RentStatement) -> Result<RentDelta, AnalyticsError> {
    let names_a: BTreeSet<&str> = a.entries.iter().map(|e| e.asset.as_str()).collect();
    let names_b: BTreeSet<&str> = b.entries.iter().map(|e| e.asset.as_str()).collect();
    if let Some(odd) = names_a.symmetric_difference(&names_b).next() {
        return Err(AnalyticsError::AssetMismatch(odd.to_string()));
    }
    let mut per_asset = Vec::with_capacity(a.entries.len());
    let mut by_zone = BTreeMap::new();
    let mut by_technology = BTreeMap::new();
    for ea in &a.entries {
        let eb = b.get(&ea.asset).expect("same asset set");
        let delta = eb.rent - ea.rent;
        *by_zone.entry(ea.zone.clone()).or_insert(0.0) += delta;
        *by_technology.entry(ea.technology.clone()).or_insert(0.0) += delta;
        per_asset.push(RentChange {
            asset: ea.asset.clone(),
            zone: ea.zone.clone(),
            technology: ea.technology.clone(),
            delta,
        });
    }
    let total = per_asset.iter().map(|c| c.delta).sum();
    Ok(RentDelta { per_asset, by_zone, by_technology, total })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecarbMetrics {
    /// avg(ZE) − avg(LE).
    #[serde(rename = "A")]
    pub a: f64,
    /// avg(ZO) − avg(LO).
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "A-B")]
    pub a_minus_b: f64,
    /// avg(ZE) − avg(ZO), $/MWh.
    pub zero_emissions_savings: f64,
    /// Savings as a fraction of avg(ZE).
    pub zero_emissions_savings_fraction: f64,
    /// avg(LE) − avg(LO), $/MWh.
    pub least_cost_savings: f64,
    pub least_cost_savings_fraction: f64,
}

impl DecarbMetrics {
    pub fn from_averages(le: f64, lo: f64, ze: f64, zo: f64) -> Self {
        let a = ze - le;
        let b = zo - lo;
        let frac = |num: f64, den: f64| if den != 0.0 { num / den } else { 0.0 };
        Self {
            a,
            b,
            a_minus_b: a - b,
            zero_emissions_savings: ze - zo,
            zero_emissions_savings_fraction: frac(ze - zo, ze),
            least_cost_savings: le - lo,
            least_cost_savings_fraction: frac(le - lo, le),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecarbReport {
    pub overall: DecarbMetrics,
    pub zones: BTreeMap<String, DecarbMetrics>,
}

/// Needs the LE, LO, ZE and ZO averages keyed by scenario label.
pub fn decarbonization_metrics(
    averages: &BTreeMap<String, LoadWeightedPrices>,
) -> Result<DecarbReport, AnalyticsError> {
    let get = |l: &str| averages.get(l).ok_or_else(|| AnalyticsError::MissingScenario(l.into()));
    let (le, lo, ze, zo) = (get("LE")?, get("LO")?, get("ZE")?, get("ZO")?);
    let overall = DecarbMetrics::from_averages(le.overall, lo.overall, ze.overall, zo.overall);
    let mut zones = BTreeMap::new();
    for (zone, &v_le) in &le.per_zone {
        if let (Some(&v_lo), Some(&v_ze), Some(&v_zo)) =
            (lo.per_zone.get(zone), ze.per_zone.get(zone), zo.per_zone.get(zone))
        {
            zones.insert(zone.clone(), DecarbMetrics::from_averages(v_le, v_lo, v_ze, v_zo));
        }
    }
    Ok(DecarbReport { overall, zones })
}

/// Zone-hours with more than one optimal dual in evidence: the balance row
/// shares variables with at least two tight inequality rows carrying zero
/// dual, or `alternative` (another optimal dual) prices the hour differently.
pub fn degenerate_hours(
    model: &Model,
    sol: &Solution,
    prices: &PriceSurface,
    alternative: Option<&PriceSurface>,
) -> Vec<(usize, usize)> {
    let lp = &model.lp;
    let x = &sol.primal;
    let mut rows_of: Vec<Vec<usize>> = vec![Vec::new(); lp.num_variables()];
    for (i, row) in lp.constraints().iter().enumerate() {
        for &(v, _) in &row.terms {
            rows_of[v.0].push(i);
        }
    }
    let dual_scale = sol.dual.iter().fold(1.0f64, |m, y| m.max(y.abs()));
    let tight_zero = |i: usize| {
        let row = &lp.constraints()[i];
        if row.sense == Sense::Eq || sol.dual[i].abs() > 1e-9 * dual_scale {
            return false;
        }
        let act = row.activity(x);
        let mag = row.terms.iter().map(|&(v, c)| (c * x[v.0]).abs()).fold(row.rhs.abs().max(1.0), f64::max);
        (act - row.rhs).abs() <= 1e-9 * mag
    };
    let mut out = Vec::new();
    for (z, rows) in model.balance_rows.iter().enumerate() {
        for (t, r) in rows.iter().enumerate() {
            let differs = alternative.is_some_and(|b| {
                let (pa, pb) = (prices.price[z][t], b.price[z][t]);
                (pa - pb).abs() > 1e-6 * pa.abs().max(pb.abs()).max(1.0)
            });
            let structural = || {
                let mut seen = BTreeSet::new();
                for &(v, _) in &lp.constraints()[r.0].terms {
                    for &i in &rows_of[v.0] {
                        if i != r.0 && tight_zero(i) {
                            seen.insert(i);
                        }
                    }
                }
                seen.len() >= 2
            };
            if differs || structural() {
                out.push((z, t));
            }
        }
    }
    out
}
