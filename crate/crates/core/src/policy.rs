//! Carbon accounting and the three emissions regimes.

use crate::costing::{CostCategory, Expr};
use crate::lp::Sense;
use crate::model::{Model, ModelError};
use crate::temporal::Calendar;

pub const SOCIAL_CARBON_PRICE: f64 = 190.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CarbonPolicy {
    None,
    /// $/tCO2 added to every emitting dispatch.
    Price(f64),
    /// Annual tCO2 limit.
    Cap(f64),
}

pub fn apply_carbon_policy(
    model: &mut Model,
    calendar: &Calendar,
    policy: CarbonPolicy,
) -> Result<(), ModelError> {
    if policy != CarbonPolicy::None && !model.emissions.registered {
        return Err(ModelError::NoEmissionTerms);
    }
    match policy {
        CarbonPolicy::None => {}
        CarbonPolicy::Price(price) => {
            if !(price >= 0.0 && price.is_finite()) {
                return Err(ModelError::invalid("carbon policy", "price", format!("price {price} must be non-negative")));
            }
            for (t, terms) in model.emissions.per_timepoint.iter().enumerate() {
                for &(d, rate) in terms {
                    model.costs.register_variable(
                        &model.lp,
                        calendar,
                        format!("carbon:{}", model.lp.variable(d).tag),
                        CostCategory::Emissions,
                        t,
                        Expr::term(d, price * rate),
                    )?;
                }
            }
        }
        CarbonPolicy::Cap(cap) => {
            if !(cap >= 0.0 && cap.is_finite()) {
                return Err(ModelError::invalid("carbon policy", "cap", format!("cap {cap} must be non-negative")));
            }
            let mut terms = Vec::new();
            for (t, per_t) in model.emissions.per_timepoint.iter().enumerate() {
                let w = calendar.weight(t);
                terms.extend(per_t.iter().map(|&(d, rate)| (d, w * rate)));
            }
            model.carbon_cap_row = Some(model.lp.add_constraint(terms, Sense::Le, cap, "carbon_cap")?);
        }
    }
    Ok(())
}

/// tCO2/yr at primal point `x`.
pub fn annual_emissions(model: &Model, x: &[f64], calendar: &Calendar) -> f64 {
    model
        .emissions
        .per_timepoint
        .iter()
        .enumerate()
        .map(|(t, terms)| calendar.weight(t) * terms.iter().map(|&(d, r)| r * x[d.0]).sum::<f64>())
        .sum()
}
