use super::{LinearProgram, Sense, Solution};

/// Optimality evidence recomputed from the program data and a candidate
/// primal/dual pair. All metrics are relative: row and bound violations to
/// the magnitude of the row, gap and slackness products to `max(1, |objective|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub duality_gap: f64,
    pub complementary_slackness: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
}

impl Certificate {
    pub fn passes(&self, tol: f64) -> bool {
        self.primal_residual <= tol
            && self.dual_residual <= tol
            && self.duality_gap <= tol
            && self.complementary_slackness <= tol
    }

    pub fn worst(&self) -> f64 {
        self.primal_residual
            .max(self.dual_residual)
            .max(self.duality_gap)
            .max(self.complementary_slackness)
    }
}

/// Checks `sol` against `lp` without trusting anything the solver reported
/// beyond the primal values and row duals; reduced costs are recomputed.
pub fn certify(lp: &LinearProgram, sol: &Solution) -> Certificate {
    let x = &sol.primal;
    let y = &sol.dual;
    let d = super::reduced_costs(lp, y);
    let primal_objective = lp.evaluate_objective(x);
    let obj_scale = primal_objective.abs().max(1.0);
    let cost_scale = lp
        .variables()
        .iter()
        .map(|v| v.objective.abs())
        .fold(1.0f64, f64::max);

    let mut primal_residual = 0.0f64;
    let mut dual_residual = 0.0f64;
    let mut cs = 0.0f64;
    let mut dual_objective = lp.objective_offset();

    for (row, &yi) in lp.constraints().iter().zip(y) {
        let mut act = 0.0;
        let mut mag = row.rhs.abs().max(1.0);
        for &(v, a) in &row.terms {
            let t = a * x[v.0];
            act += t;
            mag = mag.max(t.abs());
        }
        let (violation, slack) = match row.sense {
            Sense::Le => ((act - row.rhs).max(0.0), (row.rhs - act).max(0.0)),
            Sense::Ge => ((row.rhs - act).max(0.0), (act - row.rhs).max(0.0)),
            Sense::Eq => ((act - row.rhs).abs(), 0.0),
        };
        primal_residual = primal_residual.max(violation / mag);
        let wrong_sign = match row.sense {
            Sense::Le => yi.max(0.0),
            Sense::Ge => (-yi).max(0.0),
            Sense::Eq => 0.0,
        };
        dual_residual = dual_residual.max(wrong_sign / cost_scale);
        cs = cs.max((yi * slack).abs() / obj_scale);
        dual_objective += yi * row.rhs;
    }

    for ((var, &xj), &dj) in lp.variables().iter().zip(x).zip(&d) {
        let below = (var.lower - xj).max(0.0);
        let above = (xj - var.upper).max(0.0);
        let bound_mag = var.lower.abs().max(var.upper.abs());
        let bound_mag = if bound_mag.is_finite() { bound_mag.max(1.0) } else { xj.abs().max(1.0) };
        primal_residual = primal_residual.max(below.max(above) / bound_mag);
        if dj > 0.0 {
            if var.lower.is_finite() {
                dual_objective += dj * var.lower;
                cs = cs.max(dj * (xj - var.lower).abs() / obj_scale);
            } else {
                dual_residual = dual_residual.max(dj / cost_scale);
                dual_objective += dj * xj;
            }
        } else if dj < 0.0 {
            if var.upper.is_finite() {
                dual_objective += dj * var.upper;
                cs = cs.max(-dj * (var.upper - xj).abs() / obj_scale);
            } else {
                dual_residual = dual_residual.max(-dj / cost_scale);
                dual_objective += dj * xj;
            }
        }
    }

    Certificate {
        primal_residual,
        dual_residual,
        duality_gap: (primal_objective - dual_objective).abs() / obj_scale,
        complementary_slackness: cs,
        primal_objective,
        dual_objective,
    }
}

#[cfg(test)]
mod tests {
    use super::super::{LinearProgram, Sense};
    use super::*;

    fn small() -> LinearProgram {
        let mut lp = LinearProgram::new();
        let a = lp.add_variable(0.0, 8.0, 2.0, "a").unwrap();
        let b = lp.add_variable(0.0, f64::INFINITY, 3.0, "b").unwrap();
        lp.add_constraint([(a, 1.0), (b, 1.0)], Sense::Ge, 10.0, "cover").unwrap();
        lp.add_constraint([(a, 1.0), (b, -1.0)], Sense::Le, 4.0, "spread").unwrap();
        lp
    }

    #[test]
    fn optimal_solve_certifies() {
        let lp = small();
        let sol = lp.solve().unwrap();
        let cert = certify(&lp, &sol);
        assert!(cert.passes(1e-9), "{cert:?}");
        assert!((sol.objective - 23.0).abs() < 1e-9);
    }

    #[test]
    fn perturbed_primal_is_flagged() {
        let lp = small();
        let mut sol = lp.solve().unwrap();
        sol.primal[0] += 1e-3;
        let cert = certify(&lp, &sol);
        assert!(cert.primal_residual > 0.0);
        assert!(!cert.passes(1e-6));
    }

    #[test]
    fn zero_objective_has_zero_gap() {
        let mut lp = LinearProgram::new();
        let a = lp.add_variable(0.0, 5.0, 0.0, "a").unwrap();
        lp.add_constraint([(a, 1.0)], Sense::Ge, 2.0, "floor").unwrap();
        let sol = lp.solve().unwrap();
        let cert = certify(&lp, &sol);
        assert_eq!(cert.duality_gap, 0.0);
        assert!(cert.passes(1e-12));
    }
}
