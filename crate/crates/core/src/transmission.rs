//! Transport-model corridors: directional sends capped by corridor capacity,
//! with losses taken at the receiving end.

use crate::costing::{CostCategory, Expr};
use crate::lp::{RowId, Sense, VarId};
use crate::model::{upper, Model, ModelError};
use crate::network::{Corridor, Network, TransmissionMode};
use crate::temporal::Calendar;

#[derive(Debug, Clone, PartialEq)]
pub struct CorridorVars {
    pub corridor: usize,
    pub zone_a: usize,
    pub zone_b: usize,
    pub build: VarId,
    pub capacity: VarId,
    pub capacity_row: RowId,
    /// MW sent from a towards b.
    pub send_ab: Vec<VarId>,
    /// MW sent from b towards a.
    pub send_ba: Vec<VarId>,
    pub expandable: bool,
}

pub fn register_transmission(
    model: &mut Model,
    calendar: &Calendar,
    network: &Network,
    mode: TransmissionMode,
) -> Result<(), ModelError> {
    for (ci, c) in network.corridors().iter().enumerate() {
        let zone_a = network.zone_index(&c.zone_a).expect("validated network");
        let zone_b = network.zone_index(&c.zone_b).expect("validated network");
        let expandable = network.expansion_allowed(c, mode);
        let id = &c.id;
        let lp = &mut model.lp;
        let build_ub = if expandable { upper(c.max_new_mw) } else { 0.0 };
        let build = lp.add_variable(0.0, build_ub, 0.0, format!("tx_build:{id}"))?;
        let capacity = lp.add_variable(0.0, f64::INFINITY, 0.0, format!("tx_capacity:{id}"))?;
        let capacity_row = lp.add_constraint(
            [(capacity, 1.0), (build, -1.0)],
            Sense::Eq,
            c.existing_mw,
            format!("tx_capacity_def:{id}"),
        )?;
        let keep = 1.0 - c.loss_fraction;
        let mut send_ab = Vec::with_capacity(calendar.len());
        let mut send_ba = Vec::with_capacity(calendar.len());
        for t in 0..calendar.len() {
            for (dir, from, to, store) in
                [("ab", zone_a, zone_b, &mut send_ab), ("ba", zone_b, zone_a, &mut send_ba)]
            {
                let f = lp.add_variable(0.0, f64::INFINITY, 0.0, format!("flow:{id}:{dir}:{t}"))?;
                lp.add_constraint([(f, 1.0), (capacity, -1.0)], Sense::Le, 0.0, format!("flow_limit:{id}:{dir}:{t}"))?;
                model.balance.withdraw(from, t, f, 1.0);
                model.balance.inject(to, t, f, keep);
                store.push(f);
            }
        }
        let lp = &model.lp;
        model.costs.register_fixed(lp, format!("tx_capital:{id}"), CostCategory::Transmission, Expr::term(build, c.capital_cost))?;
        model.costs.register_fixed(lp, format!("tx_fixed_om:{id}"), CostCategory::Transmission, Expr::term(capacity, c.fixed_om))?;
        model.corridors.push(CorridorVars {
            corridor: ci,
            zone_a,
            zone_b,
            build,
            capacity,
            capacity_row,
            send_ab,
            send_ba,
            expandable,
        });
    }
    Ok(())
}

/// Delivered MW for a send of `send` MW.
pub fn received(corridor: &Corridor, send: f64) -> f64 {
    (1.0 - corridor.loss_fraction) * send
}

/// $/yr earned by buying at the sending price and selling the delivered
/// energy at the receiving price, both directions.
pub fn congestion_rent(
    corridor: &Corridor,
    send_ab: &[f64],
    send_ba: &[f64],
    price_a: &[f64],
    price_b: &[f64],
    calendar: &Calendar,
) -> f64 {
    let keep = 1.0 - corridor.loss_fraction;
    (0..calendar.len())
        .map(|t| {
            let w = calendar.weight(t);
            w * ((price_b[t] * keep - price_a[t]) * send_ab[t] + (price_a[t] * keep - price_b[t]) * send_ba[t])
        })
        .sum()
}
