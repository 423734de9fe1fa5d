//! Capital recovery and the fixed / per-timepoint cost registries behind the
//! objective.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::lp::{LinearProgram, VarId};
use crate::temporal::Calendar;

#[derive(Debug, Error, PartialEq)]
pub enum CostingError {
    #[error("lifetime must be at least 1 year, got {0}")]
    Lifetime(f64),
    #[error("rate must be finite and non-negative, got {0}")]
    Rate(f64),
    #[error("cost must be finite and non-negative, got {0}")]
    Cost(f64),
    #[error("cost term `{description}` references unknown variable {var}")]
    UnknownVariable { description: String, var: usize },
    #[error("cost term `{description}` references unknown timepoint {timepoint}")]
    UnknownTimepoint { description: String, timepoint: usize },
    #[error("cost term `{0}` has a non-finite coefficient")]
    NonFinite(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FinancialParams {
    pub base_year: i32,
    pub interest_rate: f64,
    pub discount_rate: f64,
    /// Multiplies reported $/yr figures; never enters the optimization.
    pub report_discount_factor: f64,
}

impl Default for FinancialParams {
    fn default() -> Self {
        Self { base_year: 2022, interest_rate: 0.05, discount_rate: 0.05, report_discount_factor: 1.0 }
    }
}

/// Capital recovery factor: the annuity per unit of principal.
pub fn crf(rate: f64, lifetime: f64) -> Result<f64, CostingError> {
    if !(lifetime >= 1.0 && lifetime.is_finite()) {
        return Err(CostingError::Lifetime(lifetime));
    }
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(CostingError::Rate(rate));
    }
    if rate == 0.0 {
        return Ok(1.0 / lifetime);
    }
    // r / (1 - (1+r)^-n), with exp_m1 to keep small rates accurate.
    let g = (-lifetime * rate.ln_1p()).exp_m1();
    Ok(rate / -g)
}

pub fn annualize_overnight(overnight: f64, rate: f64, lifetime: f64) -> Result<f64, CostingError> {
    if !(overnight >= 0.0 && overnight.is_finite()) {
        return Err(CostingError::Cost(overnight));
    }
    Ok(overnight * crf(rate, lifetime)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum CostCategory {
    #[serde(rename = "O&M")]
    OperationsMaintenance,
    Fuel,
    Storage,
    Generation,
    Transmission,
    Hydrogen,
    Emissions,
    /// Capital already spent on existing assets; a constant.
    Sunk,
}

impl CostCategory {
    /// The reported decomposition, in report order. Sunk capital is excluded.
    pub const REPORTED: [CostCategory; 7] = [
        Self::OperationsMaintenance,
        Self::Fuel,
        Self::Storage,
        Self::Generation,
        Self::Transmission,
        Self::Hydrogen,
        Self::Emissions,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Self::OperationsMaintenance => "O&M",
            Self::Fuel => "Fuel",
            Self::Storage => "Storage",
            Self::Generation => "Generation",
            Self::Transmission => "Transmission",
            Self::Hydrogen => "Hydrogen",
            Self::Emissions => "Emissions",
            Self::Sunk => "Sunk",
        }
    }
}

impl fmt::Display for CostCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Affine expression over LP variables.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Expr {
    pub terms: Vec<(VarId, f64)>,
    pub constant: f64,
}

impl Expr {
    pub fn term(var: VarId, coef: f64) -> Self {
        Self { terms: vec![(var, coef)], constant: 0.0 }
    }

    pub fn constant(value: f64) -> Self {
        Self { terms: Vec::new(), constant: value }
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(v, a)| a * x[v.0]).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedTerm {
    pub description: String,
    pub category: CostCategory,
    /// $/yr.
    pub expr: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariableTerm {
    pub description: String,
    pub category: CostCategory,
    pub timepoint: usize,
    /// $/h at the timepoint; weighted by w_t when annualized.
    pub expr: Expr,
}

#[derive(Debug, Clone, Default)]
pub struct CostRegistry {
    fixed: Vec<FixedTerm>,
    variable: Vec<VariableTerm>,
}

fn check_expr(lp: &LinearProgram, description: &str, expr: &Expr) -> Result<(), CostingError> {
    if !expr.constant.is_finite() {
        return Err(CostingError::NonFinite(description.into()));
    }
    for &(v, a) in &expr.terms {
        if v.0 >= lp.num_variables() {
            return Err(CostingError::UnknownVariable { description: description.into(), var: v.0 });
        }
        if !a.is_finite() {
            return Err(CostingError::NonFinite(description.into()));
        }
    }
    Ok(())
}

impl CostRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register_fixed(
        &mut self,
        lp: &LinearProgram,
        description: impl Into<String>,
        category: CostCategory,
        expr: Expr,
    ) -> Result<(), CostingError> {
        let description = description.into();
        check_expr(lp, &description, &expr)?;
        self.fixed.push(FixedTerm { description, category, expr });
        Ok(())
    }

    pub fn register_variable(
        &mut self,
        lp: &LinearProgram,
        calendar: &Calendar,
        description: impl Into<String>,
        category: CostCategory,
        timepoint: usize,
        expr: Expr,
    ) -> Result<(), CostingError> {
        let description = description.into();
        if timepoint >= calendar.len() {
            return Err(CostingError::UnknownTimepoint { description, timepoint });
        }
        check_expr(lp, &description, &expr)?;
        self.variable.push(VariableTerm { description, category, timepoint, expr });
        Ok(())
    }

    pub fn fixed_terms(&self) -> &[FixedTerm] {
        &self.fixed
    }

    pub fn variable_terms(&self) -> &[VariableTerm] {
        &self.variable
    }

    /// Objective coefficients and constant offset implied by the registry.
    pub fn objective(&self, num_vars: usize, calendar: &Calendar) -> (Vec<f64>, f64) {
        let mut c = vec![0.0; num_vars];
        let mut offset = 0.0;
        for t in &self.fixed {
            offset += t.expr.constant;
            for &(v, a) in &t.expr.terms {
                c[v.0] += a;
            }
        }
        for t in &self.variable {
            let w = calendar.weight(t.timepoint);
            offset += w * t.expr.constant;
            for &(v, a) in &t.expr.terms {
                c[v.0] += w * a;
            }
        }
        (c, offset)
    }

    /// Writes the registry into the LP objective, replacing what was there.
    pub fn apply(&self, lp: &mut LinearProgram, calendar: &Calendar) {
        let (c, offset) = self.objective(lp.num_variables(), calendar);
        for (j, cj) in c.into_iter().enumerate() {
            lp.set_objective(VarId(j), cj);
        }
        lp.set_objective_offset(offset);
    }

    pub fn by_category(&self, x: &[f64], calendar: &Calendar) -> BTreeMap<CostCategory, f64> {
        let mut out = BTreeMap::new();
        for t in &self.fixed {
            *out.entry(t.category).or_insert(0.0) += t.expr.evaluate(x);
        }
        for t in &self.variable {
            *out.entry(t.category).or_insert(0.0) += calendar.weight(t.timepoint) * t.expr.evaluate(x);
        }
        out
    }

    pub fn evaluate(&self, x: &[f64], calendar: &Calendar) -> f64 {
        self.by_category(x, calendar).values().sum()
    }

    /// Total per-timepoint coefficient of `var` in `category`, if any; $/h per unit.
    pub fn variable_coefficient(&self, var: VarId, category: CostCategory) -> f64 {
        self.variable
            .iter()
            .filter(|t| t.category == category)
            .flat_map(|t| t.expr.terms.iter())
            .filter(|&&(v, _)| v == var)
            .map(|&(_, a)| a)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::temporal::{build_calendar, Timeseries};
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn crf_values() {
        // Reference value from a 40-digit evaluation of r(1+r)^n / ((1+r)^n - 1).
        let hi = 0.080_242_587_190_691_32;
        assert!(rel(crf(0.05, 20.0).unwrap(), hi) < 1e-14);
        assert!((crf(0.05, 20.0).unwrap() - 0.0802426).abs() < 5e-8);
        assert_eq!(crf(0.0, 25.0).unwrap(), 0.04);
        assert!(rel(crf(0.05, 1.0).unwrap(), 1.05) < 1e-14);
        assert_eq!(crf(0.05, 0.5), Err(CostingError::Lifetime(0.5)));
        assert_eq!(crf(-0.01, 10.0), Err(CostingError::Rate(-0.01)));
    }

    #[test]
    fn annualization() {
        let a = annualize_overnight(1_000_000.0, 0.05, 20.0).unwrap();
        assert!(rel(a, 80_242.587_190_691_32) < 1e-13);
        assert!((a - 80_242.6).abs() < 0.05);
        assert_eq!(annualize_overnight(0.0, 0.05, 20.0).unwrap(), 0.0);
        assert!(rel(annualize_overnight(500_000.0, 0.0, 25.0).unwrap(), 20_000.0) < 1e-15);
        assert!(annualize_overnight(-1.0, 0.05, 20.0).is_err());
    }

    #[test]
    fn registry_terms_and_objective() {
        let cal = build_calendar(vec![Timeseries::new("d", 2, 1.0, 4380.0)], &Default::default())
            .unwrap();
        let mut lp = LinearProgram::new();
        let k = lp.add_variable(0.0, f64::INFINITY, 0.0, "K").unwrap();
        let p0 = lp.add_variable(0.0, f64::INFINITY, 0.0, "P0").unwrap();
        let mut reg = CostRegistry::new();
        // 30 $/kW-yr expressed per MW.
        reg.register_fixed(&lp, "fom", CostCategory::OperationsMaintenance, Expr::term(k, 30.0 * 1000.0))
            .unwrap();
        reg.register_variable(&lp, &cal, "fuel", CostCategory::Fuel, 0, Expr::term(p0, 7.0 * 3.0))
            .unwrap();
        reg.register_fixed(&lp, "sunk", CostCategory::Sunk, Expr::constant(5.0)).unwrap();
        assert!(matches!(
            reg.register_fixed(&lp, "ghost", CostCategory::Fuel, Expr::term(VarId(9), 1.0)),
            Err(CostingError::UnknownVariable { var: 9, .. })
        ));
        assert!(reg
            .register_variable(&lp, &cal, "late", CostCategory::Fuel, 2, Expr::term(p0, 1.0))
            .is_err());
        reg.apply(&mut lp, &cal);
        assert_eq!(lp.variables()[0].objective, 30_000.0);
        assert_eq!(lp.variables()[1].objective, 21.0 * 4380.0);
        assert_eq!(lp.objective_offset(), 5.0);
        let x = [2.0, 3.0];
        assert_eq!(reg.evaluate(&x, &cal), lp.evaluate_objective(&x));
        let cats = reg.by_category(&x, &cal);
        assert_eq!(cats[&CostCategory::Fuel], 21.0 * 3.0 * 4380.0);
        assert_eq!(reg.variable_coefficient(p0, CostCategory::Fuel), 21.0);
    }

    proptest! {
        #[test]
        fn crf_monotone(r in 0.001f64..0.3, dr in 0.001f64..0.1, n in 1.0f64..60.0, dn in 1.0f64..20.0) {
            prop_assert!(crf(r + dr, n).unwrap() > crf(r, n).unwrap());
            prop_assert!(crf(r, n + dn).unwrap() < crf(r, n).unwrap());
        }

        #[test]
        fn crf_matches_closed_form(r in 0.001f64..0.3, n in 1u32..80) {
            let g = (1.0 + r).powi(n as i32);
            let closed = r * g / (g - 1.0);
            prop_assert!(rel(crf(r, n as f64).unwrap(), closed) < 1e-10);
        }
    }
}
