//! Bounded-variable primal revised simplex.
//!
//! Every row `i` gets a logical variable `r_i = a_i·x` whose bounds encode the
//! row sense, so the working system is `[A  -I] (x, r) = 0` with bounds on all
//! columns. The start basis is all logicals; phase one minimizes the sum of
//! bound violations of basic variables, phase two the true objective. Pricing
//! is devex (largest squared reduced cost over reference weight, lowest index
//! on ties) with a Harris two-pass ratio test; a long streak of degenerate
//! pivots switches to Bland's rule until the objective moves again. Reduced
//! costs are updated from the pivot row in phase two and recomputed from fresh
//! duals after every refactorization.

use super::lu::{LuFactors, SparseColumn};
use super::{
    reduced_costs, LinearProgram, LpError, LpSolver, RowId, Sense, Solution, Status, VarId,
    Witness,
};

#[derive(Debug, Clone)]
pub struct SimplexOptions {
    /// Defaults to `100·(rows + columns) + 1000`.
    pub max_iterations: Option<usize>,
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    pub pivot_tol: f64,
    pub refactor_interval: usize,
    pub degenerate_streak: usize,
    pub scaling: bool,
    /// Run the dual simplex first when the starting basis is dual feasible;
    /// the primal always finishes, so the result is certified the same way.
    pub dual: bool,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_iterations: None,
            feasibility_tol: 1e-7,
            optimality_tol: 1e-9,
            pivot_tol: 1e-9,
            refactor_interval: 100,
            degenerate_streak: 50,
            scaling: true,
            dual: true,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RevisedSimplex {
    pub options: SimplexOptions,
}

impl RevisedSimplex {
    pub fn new(options: SimplexOptions) -> Self {
        Self { options }
    }

    pub fn solve(&self, lp: &LinearProgram) -> Result<Solution, LpError> {
        let mut work = Work::new(lp, &self.options);
        let outcome = work.solve()?;
        Ok(work.into_solution(lp, outcome))
    }

    /// Starts from the given basic columns (numbered as in
    /// [`Solution::basis`]) instead of the all-logical basis. Columns that
    /// turn out dependent are swapped for logicals.
    pub fn solve_from(&self, lp: &LinearProgram, basis: &[usize]) -> Result<Solution, LpError> {
        let mut work = Work::new(lp, &self.options);
        work.install_basis(basis)?;
        let outcome = work.solve()?;
        Ok(work.into_solution(lp, outcome))
    }
}

impl LpSolver for RevisedSimplex {
    fn solve(&self, lp: &LinearProgram) -> Result<Solution, LpError> {
        RevisedSimplex::solve(self, lp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Basic,
    Lower,
    Upper,
    Free,
}

enum Outcome {
    Optimal,
    Infeasible,
    Unbounded(usize),
}

const NEG_ONE: [f64; 1] = [-1.0];
const DEGENERATE_STEP: f64 = 1e-12;
const DEVEX_RESET: f64 = 1e6;

struct Work<'o> {
    opts: &'o SimplexOptions,
    m: usize,
    n: usize,
    col_start: Vec<usize>,
    col_row: Vec<usize>,
    col_val: Vec<f64>,
    row_start: Vec<usize>,
    row_col: Vec<usize>,
    row_val: Vec<f64>,
    row_ids: Vec<usize>,
    row_scale: Vec<f64>,
    col_scale: Vec<f64>,
    obj_scale: f64,
    cost: Vec<f64>,
    lo: Vec<f64>,
    up: Vec<f64>,
    x: Vec<f64>,
    state: Vec<State>,
    head: Vec<usize>,
    /// Reduced costs of nonbasic columns for the current phase.
    d: Vec<f64>,
    /// Devex reference weights.
    weight: Vec<f64>,
    lu: LuFactors,
    iterations: usize,
    bland: bool,
    streak: usize,
}

fn pow2_near(v: f64) -> f64 {
    if v > 0.0 && v.is_finite() {
        (2.0f64).powi(v.log2().round() as i32)
    } else {
        1.0
    }
}

impl<'o> Work<'o> {
    fn new(lp: &LinearProgram, opts: &'o SimplexOptions) -> Self {
        let m = lp.num_constraints();
        let n = lp.num_variables();
        let mut counts = vec![0usize; n];
        for row in lp.constraints() {
            for &(v, _) in &row.terms {
                counts[v.0] += 1;
            }
        }
        let mut col_start = Vec::with_capacity(n + 1);
        col_start.push(0);
        for c in &counts {
            col_start.push(col_start.last().unwrap() + c);
        }
        let nnz = *col_start.last().unwrap();
        let mut col_row = vec![0usize; nnz];
        let mut col_val = vec![0.0f64; nnz];
        let mut fill = col_start.clone();
        for (i, row) in lp.constraints().iter().enumerate() {
            for &(v, a) in &row.terms {
                col_row[fill[v.0]] = i;
                col_val[fill[v.0]] = a;
                fill[v.0] += 1;
            }
        }

        let mut row_scale = vec![1.0f64; m];
        let mut col_scale = vec![1.0f64; n];
        if opts.scaling && nnz > 0 {
            // Geometric passes, then equilibrate rows so the largest entry is ~1.
            for _ in 0..4 {
                let mut rmin = vec![f64::INFINITY; m];
                let mut rmax = vec![0.0f64; m];
                for j in 0..n {
                    for k in col_start[j]..col_start[j + 1] {
                        let a = (col_val[k] * col_scale[j]).abs();
                        let i = col_row[k];
                        rmin[i] = rmin[i].min(a);
                        rmax[i] = rmax[i].max(a);
                    }
                }
                for i in 0..m {
                    if rmax[i] > 0.0 {
                        row_scale[i] = 1.0 / (rmin[i] * rmax[i]).sqrt();
                    }
                }
                for j in 0..n {
                    let (mut cmin, mut cmax) = (f64::INFINITY, 0.0f64);
                    for k in col_start[j]..col_start[j + 1] {
                        let a = (col_val[k] * row_scale[col_row[k]]).abs();
                        cmin = cmin.min(a);
                        cmax = cmax.max(a);
                    }
                    if cmax > 0.0 {
                        col_scale[j] = 1.0 / (cmin * cmax).sqrt();
                    }
                }
            }
            let mut rmax = vec![0.0f64; m];
            for j in 0..n {
                for k in col_start[j]..col_start[j + 1] {
                    let i = col_row[k];
                    rmax[i] = rmax[i].max((col_val[k] * col_scale[j] * row_scale[i]).abs());
                }
            }
            for i in 0..m {
                if rmax[i] > 0.0 {
                    row_scale[i] /= rmax[i];
                }
            }
            for s in row_scale.iter_mut().chain(col_scale.iter_mut()) {
                *s = pow2_near(*s);
            }
            for j in 0..n {
                for k in col_start[j]..col_start[j + 1] {
                    col_val[k] *= row_scale[col_row[k]] * col_scale[j];
                }
            }
        }

        let mut row_start = vec![0usize; m + 1];
        for &i in &col_row {
            row_start[i + 1] += 1;
        }
        for i in 0..m {
            row_start[i + 1] += row_start[i];
        }
        let mut row_col = vec![0usize; nnz];
        let mut row_val = vec![0.0f64; nnz];
        let mut next = row_start.clone();
        for j in 0..n {
            for k in col_start[j]..col_start[j + 1] {
                let i = col_row[k];
                row_col[next[i]] = j;
                row_val[next[i]] = col_val[k];
                next[i] += 1;
            }
        }

        let total = n + m;
        let mut cost = vec![0.0f64; total];
        let mut lo = vec![0.0f64; total];
        let mut up = vec![0.0f64; total];
        let mut cmax = 0.0f64;
        for (j, v) in lp.variables().iter().enumerate() {
            cost[j] = v.objective * col_scale[j];
            cmax = cmax.max(cost[j].abs());
            lo[j] = v.lower / col_scale[j];
            up[j] = v.upper / col_scale[j];
        }
        let obj_scale = if opts.scaling && cmax > 0.0 { pow2_near(1.0 / cmax) } else { 1.0 };
        for c in cost.iter_mut().take(n) {
            *c *= obj_scale;
        }
        for (i, row) in lp.constraints().iter().enumerate() {
            let b = row.rhs * row_scale[i];
            let (l, u) = match row.sense {
                Sense::Le => (f64::NEG_INFINITY, b),
                Sense::Ge => (b, f64::INFINITY),
                Sense::Eq => (b, b),
            };
            lo[n + i] = l;
            up[n + i] = u;
        }

        let mut x = vec![0.0f64; total];
        let mut state = vec![State::Basic; total];
        for j in 0..n {
            let (s, v) = if lo[j].is_finite() {
                (State::Lower, lo[j])
            } else if up[j].is_finite() {
                (State::Upper, up[j])
            } else {
                (State::Free, 0.0)
            };
            state[j] = s;
            x[j] = v;
        }
        Work {
            opts,
            m,
            n,
            col_start,
            col_row,
            col_val,
            row_start,
            row_col,
            row_val,
            row_ids: (0..m).collect(),
            row_scale,
            col_scale,
            obj_scale,
            cost,
            lo,
            up,
            x,
            state,
            head: (n..n + m).collect(),
            d: vec![0.0; total],
            weight: vec![1.0; total],
            lu: LuFactors::default(),
            iterations: 0,
            bland: false,
            streak: 0,
        }
    }

    fn install_basis(&mut self, basis: &[usize]) -> Result<(), LpError> {
        let total = self.n + self.m;
        let mut seen = vec![false; total];
        if basis.len() != self.m || basis.iter().any(|&j| j >= total || std::mem::replace(&mut seen[j], true)) {
            return Err(LpError::Numerical(format!(
                "starting basis must list {} distinct columns below {total}",
                self.m
            )));
        }
        for i in 0..self.m {
            let logical = self.n + i;
            if !seen[logical] {
                self.state[logical] = State::Lower;
                self.park_nonbasic(logical);
            }
        }
        for &j in basis {
            self.state[j] = State::Basic;
        }
        self.head = basis.to_vec();
        Ok(())
    }

    fn column(&self, j: usize) -> SparseColumn<'_> {
        if j < self.n {
            let r = self.col_start[j]..self.col_start[j + 1];
            SparseColumn { rows: &self.col_row[r.clone()], vals: &self.col_val[r] }
        } else {
            let i = j - self.n;
            SparseColumn { rows: &self.row_ids[i..i + 1], vals: &NEG_ONE }
        }
    }

    fn dot(&self, j: usize, y: &[f64]) -> f64 {
        if j < self.n {
            (self.col_start[j]..self.col_start[j + 1])
                .map(|k| self.col_val[k] * y[self.col_row[k]])
                .sum()
        } else {
            -y[j - self.n]
        }
    }

    fn park_nonbasic(&mut self, j: usize) {
        let (lo, up, v) = (self.lo[j], self.up[j], self.x[j]);
        let (s, val) = match (lo.is_finite(), up.is_finite()) {
            (true, true) => {
                if (v - lo).abs() <= (up - v).abs() {
                    (State::Lower, lo)
                } else {
                    (State::Upper, up)
                }
            }
            (true, false) => (State::Lower, lo),
            (false, true) => (State::Upper, up),
            (false, false) => (State::Free, 0.0),
        };
        self.state[j] = s;
        self.x[j] = val;
    }

    fn refactor(&mut self) {
        let (lu, replacements) = {
            let cols: Vec<SparseColumn<'_>> = self.head.iter().map(|&j| self.column(j)).collect();
            LuFactors::factorize(self.m, &cols)
        };
        self.lu = lu;
        for rep in replacements {
            let old = self.head[rep.position];
            let logical = self.n + rep.row;
            self.head[rep.position] = logical;
            self.state[logical] = State::Basic;
            self.park_nonbasic(old);
        }
        self.recompute_basics();
    }

    fn recompute_basics(&mut self) {
        let mut rhs = vec![0.0f64; self.m];
        for j in 0..self.n + self.m {
            if self.state[j] != State::Basic && self.x[j] != 0.0 {
                let xj = self.x[j];
                let col = self.column(j);
                for (&r, &a) in col.rows.iter().zip(col.vals) {
                    rhs[r] -= a * xj;
                }
            }
        }
        let mut xb = vec![0.0f64; self.m];
        self.lu.ftran(&mut rhs, &mut xb);
        for (i, &j) in self.head.iter().enumerate() {
            self.x[j] = xb[i];
        }
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let tol = self.opts.feasibility_tol;
        let v = self.x[j];
        if v < self.lo[j] - tol {
            -1.0
        } else if v > self.up[j] + tol {
            1.0
        } else {
            0.0
        }
    }

    fn duals(&self, phase_one: bool) -> Vec<f64> {
        let mut cb: Vec<f64> = self
            .head
            .iter()
            .map(|&j| if phase_one { self.infeasibility(j) } else { self.cost[j] })
            .collect();
        let mut y = vec![0.0f64; self.m];
        self.lu.btran(&mut cb, &mut y);
        y
    }

    fn compute_reduced_costs(&mut self, phase_one: bool) {
        let y = self.duals(phase_one);
        for j in 0..self.n + self.m {
            self.d[j] = if self.state[j] == State::Basic {
                0.0
            } else {
                let c = if phase_one { 0.0 } else { self.cost[j] };
                c - self.dot(j, &y)
            };
        }
    }

    /// Returns the entering column and its direction of motion.
    fn price(&self) -> Option<(usize, f64)> {
        let tol = self.opts.optimality_tol;
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.n + self.m {
            let st = self.state[j];
            if st == State::Basic || self.lo[j] == self.up[j] {
                continue;
            }
            let d = self.d[j];
            let dir = match st {
                State::Lower if d < -tol => 1.0,
                State::Upper if d > tol => -1.0,
                State::Free if d.abs() > tol => -d.signum(),
                _ => continue,
            };
            if self.bland {
                return Some((j, dir));
            }
            let score = d * d / self.weight[j];
            if best.is_none_or(|(_, _, s)| score > s) {
                best = Some((j, dir, score));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    /// Row `r` of `B^-1 [A -I]` over the nonbasic columns, as touched indices
    /// with values written into `row`.
    fn pivot_row(&self, r: usize, row: &mut [f64], seen: &mut [bool], touched: &mut Vec<usize>) -> Vec<f64> {
        let mut e = vec![0.0f64; self.m];
        e[r] = 1.0;
        let mut rho = vec![0.0f64; self.m];
        self.lu.btran(&mut e, &mut rho);
        touched.clear();
        for (i, &p) in rho.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for k in self.row_start[i]..self.row_start[i + 1] {
                let j = self.row_col[k];
                if self.state[j] == State::Basic {
                    continue;
                }
                if !seen[j] {
                    seen[j] = true;
                    touched.push(j);
                }
                row[j] += p * self.row_val[k];
            }
            let logical = self.n + i;
            if self.state[logical] != State::Basic {
                row[logical] = -p;
                seen[logical] = true;
                touched.push(logical);
            }
        }
        rho
    }

    /// Bound a basic variable runs into when moving at `rate`, with whether it
    /// is the upper bound.
    fn limit(&self, j: usize, rate: f64, phase_one: bool) -> Option<(f64, bool)> {
        let tol = self.opts.feasibility_tol;
        let (v, lo, up) = (self.x[j], self.lo[j], self.up[j]);
        if rate < 0.0 {
            if phase_one && v > up + tol {
                Some((up, true))
            } else if phase_one && v < lo - tol {
                None
            } else if lo.is_finite() {
                Some((lo, false))
            } else {
                None
            }
        } else if phase_one && v < lo - tol {
            Some((lo, false))
        } else if phase_one && v > up + tol {
            None
        } else if up.is_finite() {
            Some((up, true))
        } else {
            None
        }
    }

    fn solve(&mut self) -> Result<Outcome, LpError> {
        if self.opts.dual && self.prepare_dual() {
            self.run_dual()?;
        }
        self.run()
    }

    /// Moves every nonbasic column to the bound its reduced cost favours.
    /// Returns false when some column would need an infinite bound.
    fn prepare_dual(&mut self) -> bool {
        self.refactor();
        self.compute_reduced_costs(false);
        let tol = self.opts.optimality_tol;
        for j in 0..self.n + self.m {
            if self.state[j] == State::Basic || self.lo[j] == self.up[j] {
                continue;
            }
            let d = self.d[j];
            if d > tol {
                if !self.lo[j].is_finite() {
                    return false;
                }
                self.state[j] = State::Lower;
                self.x[j] = self.lo[j];
            } else if d < -tol {
                if !self.up[j].is_finite() {
                    return false;
                }
                self.state[j] = State::Upper;
                self.x[j] = self.up[j];
            }
        }
        self.recompute_basics();
        true
    }

    /// Bounded dual simplex with dual steepest-edge row selection. Stops at
    /// primal feasibility, at a row with no entering candidate, or when the
    /// dual objective stalls; the primal pass that follows settles the status.
    fn run_dual(&mut self) -> Result<(), LpError> {
        let max_iter = self
            .opts
            .max_iterations
            .unwrap_or(100 * (self.m + self.n) + 1000);
        let ftol = self.opts.feasibility_tol;
        let dtol = self.opts.optimality_tol;
        let ptol = self.opts.pivot_tol;
        let total = self.n + self.m;
        let mut row = vec![0.0f64; total];
        let mut seen = vec![false; total];
        let mut touched: Vec<usize> = Vec::new();
        let mut beta = vec![1.0f64; self.m];
        let mut stall = 0usize;
        let stall_limit = 2 * self.m.max(100);
        let mut fresh = true;
        // Squared bound violation of each basic position.
        let mut infeas = vec![0.0f64; self.m];
        let violation = |w: &Self, j: usize| -> f64 {
            let v = w.x[j];
            if v < w.lo[j] - ftol {
                v - w.lo[j]
            } else if v > w.up[j] + ftol {
                v - w.up[j]
            } else {
                0.0
            }
        };
        let mut stale = true;
        loop {
            if self.iterations >= max_iter {
                return Err(LpError::IterationLimit(max_iter));
            }
            if self.lu.num_etas() >= self.opts.refactor_interval {
                self.refactor();
                self.compute_reduced_costs(false);
                fresh = true;
                stale = true;
            }
            if stale {
                for i in 0..self.m {
                    let v = violation(self, self.head[i]);
                    infeas[i] = v * v;
                }
                stale = false;
            }
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let f = infeas[i];
                if f == 0.0 {
                    continue;
                }
                let score = f / beta[i];
                if leave.is_none_or(|(_, s)| score > s) {
                    leave = Some((i, score));
                }
            }
            let Some((r, _)) = leave else {
                if !fresh {
                    self.refactor();
                    self.compute_reduced_costs(false);
                    fresh = true;
                    stale = true;
                    continue;
                }
                return Ok(());
            };
            let out = self.head[r];
            let to_upper = self.x[out] > self.up[out];
            let bound = if to_upper { self.up[out] } else { self.lo[out] };
            let delta = self.x[out] - bound;
            let sgn = if to_upper { 1.0 } else { -1.0 };

            let rho = self.pivot_row(r, &mut row, &mut seen, &mut touched);
            // Harris two-pass dual ratio test.
            let eligible = |w: &Self, j: usize, a: f64| -> bool {
                let t = sgn * a;
                match w.state[j] {
                    State::Lower => t > ptol,
                    State::Upper => t < -ptol,
                    State::Free => t.abs() > ptol,
                    State::Basic => false,
                }
            };
            let mut theta_max = f64::INFINITY;
            for &j in &touched {
                let a = row[j];
                if self.lo[j] == self.up[j] || !eligible(self, j, a) {
                    continue;
                }
                let t = sgn * a;
                let relaxed = match self.state[j] {
                    State::Lower => (self.d[j] + dtol) / t,
                    State::Upper => (self.d[j] - dtol) / t,
                    _ => (self.d[j].abs() + dtol) / t.abs(),
                };
                theta_max = theta_max.min(relaxed);
            }
            let mut enter: Option<(usize, f64)> = None;
            if theta_max.is_finite() {
                for &j in &touched {
                    let a = row[j];
                    if self.lo[j] == self.up[j] || !eligible(self, j, a) {
                        continue;
                    }
                    let t = sgn * a;
                    let ratio = match self.state[j] {
                        State::Free => self.d[j].abs() / t.abs(),
                        _ => self.d[j] / t,
                    };
                    if ratio <= theta_max && enter.is_none_or(|(_, m)| a.abs() > m) {
                        enter = Some((j, a.abs()));
                    }
                }
            }
            let Some((q, _)) = enter else {
                for &j in &touched {
                    row[j] = 0.0;
                    seen[j] = false;
                }
                // No entering column: the row proves infeasibility, which the
                // primal phase one reports with its own witness.
                return Ok(());
            };
            let alpha_rq = row[q];

            let mut rhs = vec![0.0f64; self.m];
            {
                let col = self.column(q);
                for (&i, &a) in col.rows.iter().zip(col.vals) {
                    rhs[i] = a;
                }
            }
            let mut alpha = vec![0.0f64; self.m];
            self.lu.ftran_spike(&mut rhs, &mut alpha);
            if (alpha[r] - alpha_rq).abs() > 1e-7 * alpha_rq.abs().max(1.0) {
                for &j in &touched {
                    row[j] = 0.0;
                    seen[j] = false;
                }
                if self.lu.num_etas() == 0 {
                    return Ok(());
                }
                self.refactor();
                self.compute_reduced_costs(false);
                fresh = true;
                stale = true;
                continue;
            }

            // Dual step; a reduced cost on the wrong side within tolerance
            // is treated as zero.
            let dq = match self.state[q] {
                State::Lower => self.d[q].max(0.0),
                State::Upper => self.d[q].min(0.0),
                _ => self.d[q],
            };
            let theta_d = dq / alpha_rq;
            for &j in &touched {
                if j != q {
                    self.d[j] -= theta_d * row[j];
                }
                row[j] = 0.0;
                seen[j] = false;
            }
            self.d[q] = 0.0;
            self.d[out] = -theta_d;
            if (theta_d * delta).abs() <= DEGENERATE_STEP {
                stall += 1;
                if stall >= stall_limit {
                    return Ok(());
                }
            } else {
                stall = 0;
            }

            // Steepest-edge weights, with the pivot row norm taken exactly.
            let beta_r: f64 = rho.iter().map(|v| v * v).sum();
            let mut rho_rhs = rho;
            let mut tau = vec![0.0f64; self.m];
            self.lu.ftran(&mut rho_rhs, &mut tau);
            for i in 0..self.m {
                let a = alpha[i];
                if i == r || a == 0.0 {
                    continue;
                }
                let k = a / alpha_rq;
                beta[i] = (beta[i] - 2.0 * k * tau[i] + k * k * beta_r).max(k * k).max(1e-6);
            }
            beta[r] = (beta_r / (alpha_rq * alpha_rq)).max(1e-6);

            let theta_p = delta / alpha_rq;
            for i in 0..self.m {
                let a = alpha[i];
                if a != 0.0 {
                    let j = self.head[i];
                    self.x[j] -= theta_p * a;
                    let v = violation(self, j);
                    infeas[i] = v * v;
                }
            }
            self.x[q] += theta_p;
            self.x[out] = bound;
            self.state[out] = if to_upper { State::Upper } else { State::Lower };
            self.head[r] = q;
            self.state[q] = State::Basic;
            let v = violation(self, q);
            infeas[r] = v * v;
            self.iterations += 1;
            fresh = false;
            if !self.lu.update(r, alpha_rq) {
                self.refactor();
                self.compute_reduced_costs(false);
                fresh = true;
                stale = true;
            }
        }
    }

    fn run(&mut self) -> Result<Outcome, LpError> {
        let max_iter = self
            .opts
            .max_iterations
            .unwrap_or(100 * (self.m + self.n) + 1000);
        self.refactor();
        let tol = self.opts.feasibility_tol;
        let total = self.n + self.m;
        let mut row = vec![0.0f64; total];
        let mut seen = vec![false; total];
        let mut touched: Vec<usize> = Vec::new();
        let mut nz: Vec<usize> = Vec::new();
        let mut fresh = false;
        let mut last_phase_one = None;
        loop {
            if self.iterations >= max_iter {
                return Err(LpError::IterationLimit(max_iter));
            }
            if self.lu.num_etas() >= self.opts.refactor_interval {
                self.refactor();
                fresh = false;
            }
            let phase_one = self.head.iter().any(|&j| self.infeasibility(j) != 0.0);
            if phase_one || !fresh || last_phase_one != Some(phase_one) {
                self.compute_reduced_costs(phase_one);
                fresh = true;
            }
            last_phase_one = Some(phase_one);
            let Some((q, dir)) = self.price() else {
                // Confirm on a fresh factorization before declaring the end.
                if self.lu.num_etas() > 0 {
                    self.refactor();
                    fresh = false;
                    continue;
                }
                return Ok(if phase_one { Outcome::Infeasible } else { Outcome::Optimal });
            };

            let mut rhs = vec![0.0f64; self.m];
            {
                let col = self.column(q);
                for (&r, &a) in col.rows.iter().zip(col.vals) {
                    rhs[r] = a;
                }
            }
            let mut alpha = vec![0.0f64; self.m];
            self.lu.ftran_spike(&mut rhs, &mut alpha);
            nz.clear();
            nz.extend((0..self.m).filter(|&i| alpha[i] != 0.0));

            let mut leave: Option<(usize, f64, f64, bool)> = None;
            if self.bland {
                for &i in &nz {
                    let a = alpha[i];
                    if a.abs() <= self.opts.pivot_tol {
                        continue;
                    }
                    let rate = -dir * a;
                    let j = self.head[i];
                    let Some((bound, is_upper)) = self.limit(j, rate, phase_one) else {
                        continue;
                    };
                    let theta = ((bound - self.x[j]) / rate).max(0.0);
                    let better = match leave {
                        None => true,
                        Some((bi, bt, _, _)) => {
                            theta < bt - DEGENERATE_STEP
                                || (theta <= bt + DEGENERATE_STEP && j < self.head[bi])
                        }
                    };
                    if better {
                        leave = Some((i, theta, bound, is_upper));
                    }
                }
            } else {
                let mut theta_max = f64::INFINITY;
                for &i in &nz {
                    let a = alpha[i];
                    if a.abs() <= self.opts.pivot_tol {
                        continue;
                    }
                    let rate = -dir * a;
                    let j = self.head[i];
                    if let Some((bound, _)) = self.limit(j, rate, phase_one) {
                        let relaxed = if rate < 0.0 {
                            (self.x[j] - bound + tol) / -rate
                        } else {
                            (bound - self.x[j] + tol) / rate
                        };
                        theta_max = theta_max.min(relaxed);
                    }
                }
                if theta_max.is_finite() {
                    let mut best_mag = 0.0f64;
                    for &i in &nz {
                        let a = alpha[i];
                        if a.abs() <= self.opts.pivot_tol {
                            continue;
                        }
                        let rate = -dir * a;
                        let j = self.head[i];
                        let Some((bound, is_upper)) = self.limit(j, rate, phase_one) else {
                            continue;
                        };
                        let theta = (bound - self.x[j]) / rate;
                        if theta <= theta_max && a.abs() > best_mag {
                            best_mag = a.abs();
                            leave = Some((i, theta.max(0.0), bound, is_upper));
                        }
                    }
                }
            }

            let span = self.up[q] - self.lo[q];
            let flip = span.is_finite() && leave.is_none_or(|(_, t, _, _)| span <= t);
            if leave.is_none() && !flip {
                if phase_one {
                    return Err(LpError::Numerical(
                        "phase one found an unlimited improving direction".into(),
                    ));
                }
                return Ok(Outcome::Unbounded(q));
            }
            let theta = if flip { span } else { leave.unwrap().1 };

            self.iterations += 1;
            if theta <= DEGENERATE_STEP {
                self.streak += 1;
                if self.streak >= self.opts.degenerate_streak {
                    self.bland = true;
                }
            } else {
                self.streak = 0;
                self.bland = false;
            }

            let step = dir * theta;
            if step != 0.0 {
                self.x[q] += step;
                for &i in &nz {
                    self.x[self.head[i]] -= step * alpha[i];
                }
            }
            if flip {
                if dir > 0.0 {
                    self.state[q] = State::Upper;
                    self.x[q] = self.up[q];
                } else {
                    self.state[q] = State::Lower;
                    self.x[q] = self.lo[q];
                }
                continue;
            }
            let (r, _, bound, is_upper) = leave.unwrap();
            let out = self.head[r];
            let alpha_r = alpha[r];

            let _ = self.pivot_row(r, &mut row, &mut seen, &mut touched);
            let dq = self.d[q];
            let wq = self.weight[q];
            let theta_d = dq / alpha_r;
            let mut wmax = 0.0f64;
            for &j in &touched {
                let ratio = row[j] / alpha_r;
                if j != q {
                    self.d[j] -= theta_d * row[j];
                    self.weight[j] = self.weight[j].max(ratio * ratio * wq);
                    wmax = wmax.max(self.weight[j]);
                }
                row[j] = 0.0;
                seen[j] = false;
            }
            self.d[q] = 0.0;
            self.d[out] = -theta_d;
            self.weight[out] = (wq / (alpha_r * alpha_r)).max(1.0);
            if self.weight[out].max(wmax) > DEVEX_RESET {
                self.weight.iter_mut().for_each(|w| *w = 1.0);
            }

            self.x[out] = bound;
            self.state[out] = if is_upper { State::Upper } else { State::Lower };
            self.head[r] = q;
            self.state[q] = State::Basic;
            if !self.lu.update(r, alpha_r) {
                self.refactor();
                fresh = false;
            }
        }
    }

    fn into_solution(self, lp: &LinearProgram, outcome: Outcome) -> Solution {
        let primal: Vec<f64> = (0..self.n).map(|j| self.x[j] * self.col_scale[j]).collect();
        let (status, witness, dual) = match outcome {
            Outcome::Optimal => {
                let y = self.duals(false);
                let dual: Vec<f64> = y
                    .iter()
                    .zip(&self.row_scale)
                    .map(|(&yi, &ri)| {
                        let v = yi * ri / self.obj_scale;
                        if v == 0.0 {
                            0.0
                        } else {
                            v
                        }
                    })
                    .collect();
                (Status::Optimal, None, dual)
            }
            Outcome::Infeasible => {
                let mut rows = Vec::new();
                let mut variables = Vec::new();
                for &j in &self.head {
                    if self.infeasibility(j) != 0.0 {
                        if j < self.n {
                            variables.push(VarId(j));
                        } else {
                            rows.push(RowId(j - self.n));
                        }
                    }
                }
                rows.sort();
                variables.sort();
                (
                    Status::Infeasible,
                    Some(Witness::Infeasibility { rows, variables }),
                    vec![0.0; self.m],
                )
            }
            Outcome::Unbounded(q) => {
                let witness = if q < self.n {
                    Witness::UnboundedRay { variable: VarId(q) }
                } else {
                    Witness::Infeasibility { rows: vec![RowId(q - self.n)], variables: vec![] }
                };
                (Status::Unbounded, Some(witness), vec![0.0; self.m])
            }
        };
        let objective = match status {
            Status::Optimal => lp.evaluate_objective(&primal),
            Status::Unbounded => f64::NEG_INFINITY,
            Status::Infeasible => f64::INFINITY,
        };
        let reduced_cost = reduced_costs(lp, &dual);
        Solution {
            status,
            objective,
            primal,
            dual,
            reduced_cost,
            iterations: self.iterations,
            witness,
            basis: self.head.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounded_variable_flip_without_rows() {
        let mut lp = LinearProgram::new();
        let x = lp.add_variable(-2.0, 7.0, -3.0, "x").unwrap();
        let sol = lp.solve().unwrap();
        assert_eq!(sol.status, Status::Optimal);
        assert_eq!(sol.value(x), 7.0);
        assert_eq!(sol.objective, -21.0);
        assert_eq!(sol.reduced_cost[0], -3.0);
    }

    #[test]
    fn two_by_two_textbook() {
        // max 3a + 5b s.t. a <= 4, 2b <= 12, 3a + 2b <= 18
        let mut lp = LinearProgram::new();
        let a = lp.add_variable(0.0, f64::INFINITY, -3.0, "a").unwrap();
        let b = lp.add_variable(0.0, f64::INFINITY, -5.0, "b").unwrap();
        lp.add_constraint([(a, 1.0)], Sense::Le, 4.0, "r1").unwrap();
        let r2 = lp.add_constraint([(b, 2.0)], Sense::Le, 12.0, "r2").unwrap();
        let r3 = lp.add_constraint([(a, 3.0), (b, 2.0)], Sense::Le, 18.0, "r3").unwrap();
        let sol = lp.solve().unwrap();
        assert!((sol.objective + 36.0).abs() < 1e-9);
        assert!((sol.value(a) - 2.0).abs() < 1e-9);
        assert!((sol.value(b) - 6.0).abs() < 1e-9);
        assert!((sol.row_dual(r2) + 1.5).abs() < 1e-9);
        assert!((sol.row_dual(r3) + 1.0).abs() < 1e-9);
    }

    #[test]
    fn free_variable_and_equality() {
        // min |style| : x free, x + y = 1, y in [0, 3], cost x=1, y=2 -> x = -2, y = 3
        let mut lp = LinearProgram::new();
        let x = lp.add_variable(f64::NEG_INFINITY, f64::INFINITY, 1.0, "x").unwrap();
        let y = lp.add_variable(0.0, 3.0, -2.0, "y").unwrap();
        let r = lp.add_constraint([(x, 1.0), (y, 1.0)], Sense::Eq, 1.0, "sum").unwrap();
        let sol = lp.solve().unwrap();
        assert_eq!(sol.status, Status::Optimal);
        assert!((sol.value(x) + 2.0).abs() < 1e-9);
        assert!((sol.value(y) - 3.0).abs() < 1e-9);
        assert!((sol.row_dual(r) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn iteration_limit_is_distinct_from_infeasible() {
        let mut lp = LinearProgram::new();
        let a = lp.add_variable(0.0, f64::INFINITY, -1.0, "a").unwrap();
        let b = lp.add_variable(0.0, f64::INFINITY, -1.0, "b").unwrap();
        lp.add_constraint([(a, 1.0), (b, 2.0)], Sense::Le, 4.0, "r1").unwrap();
        lp.add_constraint([(a, 3.0), (b, 1.0)], Sense::Le, 6.0, "r2").unwrap();
        let solver = RevisedSimplex::new(SimplexOptions {
            max_iterations: Some(1),
            ..Default::default()
        });
        assert_eq!(solver.solve(&lp), Err(LpError::IterationLimit(1)));
    }

    #[test]
    fn repeated_solves_are_bitwise_identical() {
        let mut lp = LinearProgram::new();
        let vars: Vec<_> = (0..6)
            .map(|k| lp.add_variable(0.0, 10.0, 1.0 + k as f64 * 0.37, format!("v{k}")).unwrap())
            .collect();
        for r in 0..4 {
            let terms: Vec<_> =
                vars.iter().enumerate().map(|(k, &v)| (v, ((k * 7 + r * 3) % 5) as f64 + 0.5)).collect();
            lp.add_constraint(terms, Sense::Ge, 3.0 + r as f64, format!("r{r}")).unwrap();
        }
        let first = lp.solve().unwrap();
        let second = lp.solve().unwrap();
        assert_eq!(first, second);
    }
}
