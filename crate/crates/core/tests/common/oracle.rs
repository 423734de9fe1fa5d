//! Brute-force reference for small bounded LPs: enumerate every basic point
//! (each variable at a bound or basic, each inequality active or not), keep the
//! feasible ones and take the cheapest. Independent of the simplex code path.

use gridplan::lp::{LinearProgram, Sense, VarId};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub struct RandomLp {
    pub lp: LinearProgram,
}

/// Feasible, box-bounded instance with up to `max_dim` variables and rows.
pub fn random_lp(seed: u64, max_dim: usize) -> RandomLp {
    let mut rng = StdRng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_dim);
    let m = rng.gen_range(1..=max_dim);
    let mut lp = LinearProgram::new();
    let mut interior = Vec::with_capacity(n);
    for j in 0..n {
        let lo: f64 = rng.gen_range(-5.0..0.0);
        let up = lo + rng.gen_range(1.0..10.0);
        let c: f64 = rng.gen_range(-10.0..10.0);
        lp.add_variable(lo, up, c, format!("x{j}")).unwrap();
        interior.push(rng.gen_range(lo..up));
    }
    for i in 0..m {
        let mut terms = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.7) {
                terms.push((VarId(j), rng.gen_range(-5.0..5.0)));
            }
        }
        let act: f64 = terms.iter().map(|&(v, a): &(VarId, f64)| a * interior[v.0]).sum();
        let roll: f64 = rng.gen();
        let (sense, rhs) = if roll < 0.15 {
            (Sense::Eq, act)
        } else if roll < 0.6 {
            (Sense::Le, act + rng.gen_range(0.0..3.0))
        } else {
            (Sense::Ge, act - rng.gen_range(0.0..3.0))
        };
        lp.add_constraint(terms, sense, rhs, format!("r{i}")).unwrap();
    }
    RandomLp { lp }
}

fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let k = b.len();
    for col in 0..k {
        let piv = (col..k).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..k {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..k {
                        a[r][c] -= f * a[col][c];
                    }
                    b[r] -= f * b[col];
                }
            }
        }
    }
    Some((0..k).map(|i| b[i] / a[i][i]).collect())
}

/// Minimum objective over all basic feasible points, or `None` if none exist.
pub fn vertex_enumeration(lp: &LinearProgram) -> Option<f64> {
    let n = lp.num_variables();
    let rows = lp.constraints();
    let dense: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            let mut d = vec![0.0; n];
            for &(v, a) in &r.terms {
                d[v.0] += a;
            }
            d
        })
        .collect();
    // Equalities take part in the active-set choice like inequalities so that
    // dependent equality rows still admit vertices; feasibility checks them all.
    let m = rows.len();
    let vars = lp.variables();
    let mut best: Option<f64> = None;
    let mut status = vec![0u8; n];
    let total_status = 3usize.pow(n as u32);
    for code in 0..total_status {
        let mut c = code;
        for s in status.iter_mut() {
            *s = (c % 3) as u8;
            c /= 3;
        }
        let basic: Vec<usize> = (0..n).filter(|&j| status[j] == 2).collect();
        if basic.len() > m {
            continue;
        }
        for mask in 0u32..(1u32 << m) {
            if mask.count_ones() as usize != basic.len() {
                continue;
            }
            let active: Vec<usize> = (0..m).filter(|&i| mask & (1 << i) != 0).collect();
            let mut x = vec![0.0; n];
            for j in 0..n {
                x[j] = match status[j] {
                    0 => vars[j].lower,
                    1 => vars[j].upper,
                    _ => 0.0,
                };
            }
            if !basic.is_empty() {
                let a: Vec<Vec<f64>> =
                    active.iter().map(|&i| basic.iter().map(|&j| dense[i][j]).collect()).collect();
                let b: Vec<f64> = active
                    .iter()
                    .map(|&i| {
                        rows[i].rhs
                            - (0..n).filter(|j| status[*j] != 2).map(|j| dense[i][j] * x[j]).sum::<f64>()
                    })
                    .collect();
                let Some(sol) = solve_square(a, b) else { continue };
                for (k, &j) in basic.iter().enumerate() {
                    x[j] = sol[k];
                }
            }
            let feasible_bounds = (0..n).all(|j| x[j] >= vars[j].lower - 1e-9 && x[j] <= vars[j].upper + 1e-9);
            let feasible_rows = rows.iter().zip(&dense).all(|(r, d)| {
                let act: f64 = d.iter().zip(&x).map(|(p, q)| p * q).sum();
                let tol = 1e-9 * (1.0 + r.rhs.abs());
                match r.sense {
                    Sense::Le => act <= r.rhs + tol,
                    Sense::Ge => act >= r.rhs - tol,
                    Sense::Eq => (act - r.rhs).abs() <= tol,
                }
            });
            if feasible_bounds && feasible_rows {
                let obj = lp.evaluate_objective(&x);
                best = Some(best.map_or(obj, |b: f64| b.min(obj)));
            }
        }
    }
    best
}
