//! Selection among alternative optimal duals.
//!
//! A degenerate optimum has a whole face of optimal duals; the basic dual the
//! simplex returns is one vertex of it. [`minmax_row_duals`] instead returns the
//! dual on that face minimizing the largest normalized dual over a set of
//! target rows. The face is described purely through complementary slackness
//! with the given primal point, so any dual it returns certifies that point.

use super::{
    certify, LinearProgram, LpError, RevisedSimplex, RowId, Sense, Solution, Status, VarId,
};

const CLASSIFY_TOL: f64 = 1e-7;

/// Returns `None` when the face program is not solved to optimality or its
/// answer fails certification; callers then keep the basic dual.
pub fn minmax_row_duals(
    lp: &LinearProgram,
    sol: &Solution,
    targets: &[(RowId, f64)],
) -> Result<Option<Vec<f64>>, LpError> {
    if sol.status != Status::Optimal || targets.is_empty() {
        return Ok(None);
    }
    let x = &sol.primal;
    let mut face = LinearProgram::new();
    let mut yvar: Vec<Option<VarId>> = vec![None; lp.num_constraints()];
    for (i, row) in lp.constraints().iter().enumerate() {
        let act = row.activity(x);
        let mag = row
            .terms
            .iter()
            .map(|&(v, a)| (a * x[v.0]).abs())
            .fold(row.rhs.abs().max(1.0), f64::max);
        let slack = match row.sense {
            Sense::Le => row.rhs - act,
            Sense::Ge => act - row.rhs,
            Sense::Eq => 0.0,
        };
        if slack > CLASSIFY_TOL * mag {
            continue;
        }
        let (lo, up) = match row.sense {
            Sense::Le => (f64::NEG_INFINITY, 0.0),
            Sense::Ge => (0.0, f64::INFINITY),
            Sense::Eq => (f64::NEG_INFINITY, f64::INFINITY),
        };
        yvar[i] = Some(face.add_variable(lo, up, 0.0, format!("y{i}"))?);
    }
    let z = face.add_variable(f64::NEG_INFINITY, f64::INFINITY, 1.0, "z")?;

    let mut columns: Vec<Vec<(VarId, f64)>> = vec![Vec::new(); lp.num_variables()];
    // Face row of each original variable that keeps one, in order.
    let mut face_row: Vec<Option<usize>> = vec![None; lp.num_variables()];
    for (i, row) in lp.constraints().iter().enumerate() {
        if let Some(y) = yvar[i] {
            for &(v, a) in &row.terms {
                columns[v.0].push((y, a));
            }
        }
    }
    for (j, (var, col)) in lp.variables().iter().zip(columns).enumerate() {
        let xj = x[j];
        let near = |b: f64| b.is_finite() && (xj - b).abs() <= CLASSIFY_TOL * b.abs().max(1.0);
        let sense = match (near(var.lower), near(var.upper)) {
            (true, true) => continue,
            (true, false) => Sense::Le,
            (false, true) => Sense::Ge,
            (false, false) => Sense::Eq,
        };
        face_row[j] = Some(face.add_constraint(col, sense, var.objective, format!("d{j}"))?.0);
    }
    let first_cap = face.num_constraints();
    let mut top: Option<(usize, f64)> = None;
    for (k, &(row, divisor)) in targets.iter().enumerate() {
        let level = sol.dual[row.0] / divisor;
        if top.is_none_or(|(_, v)| level > v) {
            top = Some((k, level));
        }
        let mut terms = vec![(z, -1.0)];
        if let Some(y) = yvar[row.0] {
            terms.push((y, 1.0 / divisor));
        }
        face.add_constraint(terms, Sense::Le, 0.0, format!("cap{k}"))?;
    }

    let start = warm_basis(lp, sol, &face, &yvar, &face_row, z, first_cap + top.map_or(0, |(k, _)| k));
    let face_sol = RevisedSimplex::default().solve_from(&face, &start)?;
    if face_sol.status != Status::Optimal {
        return Ok(None);
    }
    let dual: Vec<f64> = yvar
        .iter()
        .map(|y| y.map_or(0.0, |v| face_sol.primal[v.0]))
        .collect();
    let candidate = sol.clone().with_duals(lp, dual.clone());
    let base = certify(lp, sol).worst().max(1e-9);
    if certify(lp, &candidate).worst() > base.max(1e-7) {
        return Ok(None);
    }
    Ok(Some(dual))
}

/// A face basis whose dual point is the basic dual of `sol`: the duals of
/// rows whose logical is nonbasic, `z`, the face rows of nonbasic variables,
/// and every cap row except the one that sets the current maximum.
fn warm_basis(
    lp: &LinearProgram,
    sol: &Solution,
    face: &LinearProgram,
    yvar: &[Option<VarId>],
    face_row: &[Option<usize>],
    z: VarId,
    top_cap: usize,
) -> Vec<usize> {
    let n = lp.num_variables();
    let fn_ = face.num_variables();
    let mut basic = vec![false; n + lp.num_constraints()];
    for &j in &sol.basis {
        basic[j] = true;
    }
    let mut head: Vec<usize> = Vec::with_capacity(face.num_constraints());
    for (i, y) in yvar.iter().enumerate() {
        if let Some(y) = y {
            if !basic[n + i] {
                head.push(y.0);
            }
        }
    }
    head.push(z.0);
    for (j, r) in face_row.iter().enumerate() {
        if let Some(r) = r {
            if !basic[j] {
                head.push(fn_ + r);
            }
        }
    }
    let first_cap = face_row.iter().flatten().count();
    for r in first_cap..face.num_constraints() {
        if r != top_cap {
            head.push(fn_ + r);
        }
    }
    // Basic variables pinned at both bounds have no face row; pad or trim so
    // the count is right and let the factorization repair the rest.
    let mut used = vec![false; fn_ + face.num_constraints()];
    head.retain(|&j| !std::mem::replace(&mut used[j], true));
    head.truncate(face.num_constraints());
    let mut r = 0;
    while head.len() < face.num_constraints() {
        if !used[fn_ + r] {
            used[fn_ + r] = true;
            head.push(fn_ + r);
        }
        r += 1;
    }
    head
}
