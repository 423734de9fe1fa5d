//! Left-looking sparse LU of a simplex basis with threshold partial pivoting,
//! updated in place by Forrest-Tomlin row eliminations between refactorizations.

/// One sparse basis column in row coordinates.
pub(crate) struct SparseColumn<'a> {
    pub rows: &'a [usize],
    pub vals: &'a [f64],
}

const PIVOT_THRESHOLD: f64 = 0.01;
const SINGULAR_TOL: f64 = 1e-11;
const DROP_TOL: f64 = 1e-14;
/// Relative disagreement between the updated pivot and the ratio-test pivot
/// above which an update is refused.
const UPDATE_TOL: f64 = 1e-7;

/// `B[:, qcol] = P^T L R^-1 U`: unit lower `L` stored by elimination step,
/// row etas `R` from updates, and `U` upper triangular in `order`.
#[derive(Debug, Clone, Default)]
pub(crate) struct LuFactors {
    m: usize,
    prow: Vec<usize>,
    qcol: Vec<usize>,
    step_of: Vec<usize>,
    l_start: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<f64>,
    // L by row for the scatter form of `btran`.
    lt_start: Vec<usize>,
    lt_idx: Vec<usize>,
    lt_val: Vec<f64>,
    /// Off-diagonal U entries by column step: (row step, value).
    ucol: Vec<Vec<(usize, f64)>>,
    /// The same entries by row step: (column step, value).
    urow: Vec<Vec<(usize, f64)>>,
    diag: Vec<f64>,
    /// Steps in the order that makes U upper triangular.
    order: Vec<usize>,
    rank: Vec<usize>,
    etas: Vec<RowEta>,
    /// `L^-1 R a` from the last [`LuFactors::ftran_spike`], by step.
    spike: Vec<(usize, f64)>,
    work: Vec<f64>,
}

#[derive(Debug, Clone)]
struct RowEta {
    target: usize,
    idx: Vec<usize>,
    val: Vec<f64>,
}

/// A basis position whose column could not be pivoted, replaced by the
/// logical column of `row`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Replacement {
    pub position: usize,
    pub row: usize,
}

impl LuFactors {
    pub fn num_etas(&self) -> usize {
        self.etas.len()
    }

    pub fn factorize(m: usize, columns: &[SparseColumn<'_>]) -> (Self, Vec<Replacement>) {
        debug_assert_eq!(columns.len(), m);
        let mut row_count = vec![0usize; m];
        for c in columns {
            for &r in c.rows {
                row_count[r] += 1;
            }
        }
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&k| (columns[k].rows.len(), k));

        let mut f = LuFactors {
            m,
            prow: Vec::with_capacity(m),
            qcol: Vec::with_capacity(m),
            l_start: vec![0],
            diag: Vec::with_capacity(m),
            ..Default::default()
        };
        let mut u_start = vec![0usize];
        let mut u_idx: Vec<usize> = Vec::new();
        let mut u_val: Vec<f64> = Vec::new();
        let mut pinv = vec![usize::MAX; m];
        let mut work = vec![0.0f64; m];
        let mut mark = vec![0u32; m];
        let mut stamp = 0u32;
        let mut pattern: Vec<usize> = Vec::new();
        let mut topo: Vec<usize> = Vec::new();
        let mut stack: Vec<(usize, usize)> = Vec::new();
        let mut dropped: Vec<usize> = Vec::new();

        for &pos in &order {
            let col = &columns[pos];
            stamp += 1;
            pattern.clear();
            topo.clear();
            // Depth-first reach through L from the column pattern. Pivoted rows
            // are emitted in postorder; reversing gives a valid elimination order.
            for &start in col.rows {
                if mark[start] == stamp {
                    continue;
                }
                mark[start] = stamp;
                pattern.push(start);
                stack.push((start, 0));
                while let Some(top) = stack.last_mut() {
                    let (row, child) = *top;
                    let step = pinv[row];
                    if step == usize::MAX {
                        stack.pop();
                        continue;
                    }
                    let (lo, hi) = (f.l_start[step], f.l_start[step + 1]);
                    if lo + child < hi {
                        top.1 += 1;
                        let next = f.l_idx[lo + child];
                        if mark[next] != stamp {
                            mark[next] = stamp;
                            pattern.push(next);
                            stack.push((next, 0));
                        }
                    } else {
                        topo.push(step);
                        stack.pop();
                    }
                }
            }
            for (&r, &v) in col.rows.iter().zip(col.vals) {
                work[r] = v;
            }
            for &step in topo.iter().rev() {
                let v = work[f.prow[step]];
                if v != 0.0 {
                    for k in f.l_start[step]..f.l_start[step + 1] {
                        work[f.l_idx[k]] -= f.l_val[k] * v;
                    }
                }
            }

            let mut max_abs = 0.0f64;
            for &r in &pattern {
                if pinv[r] == usize::MAX {
                    max_abs = max_abs.max(work[r].abs());
                }
            }
            if max_abs <= SINGULAR_TOL {
                for &r in &pattern {
                    work[r] = 0.0;
                }
                dropped.push(pos);
                continue;
            }
            let mut best: Option<usize> = None;
            for &r in &pattern {
                if pinv[r] != usize::MAX || work[r].abs() < PIVOT_THRESHOLD * max_abs {
                    continue;
                }
                best = match best {
                    None => Some(r),
                    Some(b) => {
                        let key_r = (row_count[r], r);
                        let key_b = (row_count[b], b);
                        if key_r < key_b {
                            Some(r)
                        } else {
                            Some(b)
                        }
                    }
                };
            }
            let prow = best.expect("threshold admits the largest candidate");
            let piv = work[prow];
            let step = f.prow.len();

            let mut ucol: Vec<(usize, f64)> = Vec::new();
            for &r in &pattern {
                let s = pinv[r];
                if s != usize::MAX && work[r].abs() > DROP_TOL {
                    ucol.push((s, work[r]));
                }
            }
            ucol.sort_unstable_by_key(|&(s, _)| s);
            for (s, v) in ucol {
                u_idx.push(s);
                u_val.push(v);
            }
            u_start.push(u_idx.len());
            f.diag.push(piv);

            for &r in &pattern {
                if pinv[r] == usize::MAX && r != prow && work[r].abs() > DROP_TOL {
                    f.l_idx.push(r);
                    f.l_val.push(work[r] / piv);
                }
            }
            f.l_start.push(f.l_idx.len());
            for &r in &pattern {
                work[r] = 0.0;
            }
            pinv[prow] = step;
            f.prow.push(prow);
            f.qcol.push(pos);
        }

        let mut replacements = Vec::new();
        if !dropped.is_empty() {
            let free_rows: Vec<usize> = (0..m).filter(|&r| pinv[r] == usize::MAX).collect();
            debug_assert_eq!(free_rows.len(), dropped.len());
            for (&pos, &row) in dropped.iter().zip(&free_rows) {
                let step = f.prow.len();
                u_start.push(u_idx.len());
                f.diag.push(-1.0);
                f.l_start.push(f.l_idx.len());
                pinv[row] = step;
                f.prow.push(row);
                f.qcol.push(pos);
                replacements.push(Replacement { position: pos, row });
            }
        }
        f.finish(&u_start, &u_idx, &u_val);
        (f, replacements)
    }

    fn finish(&mut self, u_start: &[usize], u_idx: &[usize], u_val: &[f64]) {
        let m = self.m;
        let (start, idx, val) = transpose(m, &self.l_start, &self.l_idx, &self.l_val);
        self.lt_start = start;
        self.lt_idx = idx;
        self.lt_val = val;
        self.ucol = vec![Vec::new(); m];
        self.urow = vec![Vec::new(); m];
        for step in 0..m {
            for k in u_start[step]..u_start[step + 1] {
                self.ucol[step].push((u_idx[k], u_val[k]));
                self.urow[u_idx[k]].push((step, u_val[k]));
            }
        }
        self.order = (0..m).collect();
        self.rank = (0..m).collect();
        self.step_of = vec![0; m];
        for (s, &p) in self.qcol.iter().enumerate() {
            self.step_of[p] = s;
        }
        self.work = vec![0.0; m];
    }

    /// Solves `B x = rhs`. `rhs` is indexed by row and is overwritten;
    /// the result is written into `out`, indexed by basis position.
    pub fn ftran(&self, rhs: &mut [f64], out: &mut [f64]) {
        let mut v = self.lower_solve(rhs);
        self.upper_solve(&mut v, out);
    }

    /// [`LuFactors::ftran`] that also keeps the partial result needed by
    /// [`LuFactors::update`].
    pub fn ftran_spike(&mut self, rhs: &mut [f64], out: &mut [f64]) {
        let mut v = self.lower_solve(rhs);
        self.spike.clear();
        self.spike.extend(v.iter().enumerate().filter(|(_, &x)| x != 0.0).map(|(s, &x)| (s, x)));
        self.upper_solve(&mut v, out);
    }

    fn lower_solve(&self, rhs: &mut [f64]) -> Vec<f64> {
        let m = self.m;
        for step in 0..m {
            let v = rhs[self.prow[step]];
            if v != 0.0 {
                for k in self.l_start[step]..self.l_start[step + 1] {
                    rhs[self.l_idx[k]] -= self.l_val[k] * v;
                }
            }
        }
        let mut v: Vec<f64> = (0..m).map(|s| rhs[self.prow[s]]).collect();
        for e in &self.etas {
            let mut acc = v[e.target];
            for (&j, &r) in e.idx.iter().zip(&e.val) {
                acc -= r * v[j];
            }
            v[e.target] = acc;
        }
        v
    }

    fn upper_solve(&self, v: &mut [f64], out: &mut [f64]) {
        for &step in self.order.iter().rev() {
            let x = v[step] / self.diag[step];
            v[step] = x;
            if x != 0.0 {
                for &(i, u) in &self.ucol[step] {
                    v[i] -= u * x;
                }
            }
        }
        for step in 0..self.m {
            out[self.qcol[step]] = v[step];
        }
    }

    /// Solves `B^T y = c`. `c` is indexed by basis position and is overwritten;
    /// `y` is indexed by row.
    pub fn btran(&self, c: &mut [f64], y: &mut [f64]) {
        let m = self.m;
        let mut v: Vec<f64> = (0..m).map(|s| c[self.qcol[s]]).collect();
        for &step in &self.order {
            let x = v[step] / self.diag[step];
            v[step] = x;
            if x != 0.0 {
                for &(j, u) in &self.urow[step] {
                    v[j] -= u * x;
                }
            }
        }
        for e in self.etas.iter().rev() {
            let t = v[e.target];
            if t != 0.0 {
                for (&j, &r) in e.idx.iter().zip(&e.val) {
                    v[j] -= r * t;
                }
            }
        }
        for step in (0..m).rev() {
            let row = self.prow[step];
            let x = v[step];
            y[row] = x;
            if x != 0.0 {
                for k in self.lt_start[row]..self.lt_start[row + 1] {
                    v[self.lt_idx[k]] -= self.lt_val[k] * x;
                }
            }
        }
    }

    /// Replaces the column at basis position `pos` by the one last passed to
    /// [`LuFactors::ftran_spike`], whose solve gave `pivot` at `pos`. Returns
    /// false, leaving the factors unusable until the next factorization, when
    /// the update is numerically unsafe.
    pub fn update(&mut self, pos: usize, pivot: f64) -> bool {
        let p = self.step_of[pos];
        let old_col = std::mem::take(&mut self.ucol[p]);
        for &(i, _) in &old_col {
            self.urow[i].retain(|e| e.0 != p);
        }
        let row = std::mem::take(&mut self.urow[p]);
        for &(j, _) in &row {
            self.ucol[j].retain(|e| e.0 != p);
        }

        // Eliminate row p against the rows that follow it in order.
        let w = &mut self.work;
        for &(j, u) in &row {
            w[j] = u;
        }
        let mut idx = Vec::new();
        let mut val = Vec::new();
        let start = self.rank[p] + 1;
        for k in start..self.m {
            let j = self.order[k];
            let wj = w[j];
            if wj == 0.0 {
                continue;
            }
            w[j] = 0.0;
            let r = wj / self.diag[j];
            if r.abs() <= DROP_TOL {
                continue;
            }
            idx.push(j);
            val.push(r);
            for &(c, u) in &self.urow[j] {
                w[c] -= r * u;
            }
        }

        for &(i, x) in &self.spike {
            w[i] = x;
        }
        let mut new_diag = w[p];
        for (&j, &r) in idx.iter().zip(&val) {
            new_diag -= r * w[j];
        }
        let expected = pivot * self.diag[p];
        let scale = expected.abs().max(new_diag.abs()).max(1e-300);
        let ok = new_diag.abs() > SINGULAR_TOL && (new_diag - expected).abs() <= UPDATE_TOL * scale;
        for &(i, x) in &self.spike {
            w[i] = 0.0;
            if i != p && x.abs() > DROP_TOL {
                self.ucol[p].push((i, x));
                self.urow[i].push((p, x));
            }
        }
        self.diag[p] = new_diag;
        let r = self.rank[p];
        self.order.remove(r);
        self.order.push(p);
        for k in r..self.m {
            self.rank[self.order[k]] = k;
        }
        self.etas.push(RowEta { target: p, idx, val });
        ok
    }
}

/// Transposes a compressed matrix whose `start` has one entry per outer index
/// plus one; the inner indices must be below `m`.
fn transpose(m: usize, start: &[usize], idx: &[usize], val: &[f64]) -> (Vec<usize>, Vec<usize>, Vec<f64>) {
    let mut counts = vec![0usize; m + 1];
    for &i in idx {
        counts[i + 1] += 1;
    }
    for i in 0..m {
        counts[i + 1] += counts[i];
    }
    let mut fill = counts.clone();
    let mut t_idx = vec![0usize; idx.len()];
    let mut t_val = vec![0.0f64; idx.len()];
    for outer in 0..start.len().saturating_sub(1) {
        for k in start[outer]..start[outer + 1] {
            let p = fill[idx[k]];
            t_idx[p] = outer;
            t_val[p] = val[k];
            fill[idx[k]] += 1;
        }
    }
    (counts, t_idx, t_val)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_to_cols(a: &[Vec<f64>]) -> Vec<(Vec<usize>, Vec<f64>)> {
        let m = a.len();
        (0..m)
            .map(|j| {
                let mut rows = Vec::new();
                let mut vals = Vec::new();
                for (i, row) in a.iter().enumerate() {
                    if row[j] != 0.0 {
                        rows.push(i);
                        vals.push(row[j]);
                    }
                }
                (rows, vals)
            })
            .collect()
    }

    fn factor(a: &[Vec<f64>]) -> (LuFactors, Vec<Replacement>) {
        let cols = dense_to_cols(a);
        let sc: Vec<SparseColumn> =
            cols.iter().map(|(r, v)| SparseColumn { rows: r, vals: v }).collect();
        LuFactors::factorize(a.len(), &sc)
    }

    fn matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        a.iter().map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
    }

    #[test]
    fn solves_match_dense_products() {
        let a = vec![
            vec![2.0, 0.0, 1.0, 0.0],
            vec![1.0, 3.0, 0.0, 0.0],
            vec![0.0, 1.0, 4.0, 1.0],
            vec![0.0, 0.0, 1.0, 5.0],
        ];
        let (lu, rep) = factor(&a);
        assert!(rep.is_empty());
        let b = vec![1.0, -2.0, 3.0, 0.5];
        let mut rhs = b.clone();
        let mut x = vec![0.0; 4];
        lu.ftran(&mut rhs, &mut x);
        let back = matvec(&a, &x);
        for (p, q) in back.iter().zip(&b) {
            assert!((p - q).abs() < 1e-12);
        }
        let mut c = b.clone();
        let mut y = vec![0.0; 4];
        lu.btran(&mut c, &mut y);
        let at: Vec<Vec<f64>> = (0..4).map(|j| (0..4).map(|i| a[i][j]).collect()).collect();
        let back = matvec(&at, &y);
        for (p, q) in back.iter().zip(&b) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn eta_update_tracks_column_replacement() {
        let a = vec![vec![1.0, 2.0, 0.0], vec![0.0, 1.0, 1.0], vec![3.0, 0.0, 1.0]];
        let (mut lu, _) = factor(&a);
        let entering = vec![1.0, 1.0, 1.0];
        let mut rhs = entering.clone();
        let mut alpha = vec![0.0; 3];
        lu.ftran_spike(&mut rhs, &mut alpha);
        assert!(lu.update(1, alpha[1]));
        let mut updated = a.clone();
        for i in 0..3 {
            updated[i][1] = entering[i];
        }
        let b = vec![0.3, -1.0, 2.0];
        let mut rhs = b.clone();
        let mut x = vec![0.0; 3];
        lu.ftran(&mut rhs, &mut x);
        let back = matvec(&updated, &x);
        for (p, q) in back.iter().zip(&b) {
            assert!((p - q).abs() < 1e-12);
        }
        let mut c = b.clone();
        let mut y = vec![0.0; 3];
        lu.btran(&mut c, &mut y);
        for j in 0..3 {
            let col: f64 = (0..3).map(|i| updated[i][j] * y[i]).sum();
            assert!((col - b[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn successive_updates_stay_exact() {
        // Deterministic pseudo-random columns; several replacements per position.
        let n = 7;
        let mut seed = 12345u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 33) % 1000) as f64 / 250.0 - 2.0
        };
        let mut a: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 4.0 } else if (i + 2 * j) % 3 == 0 { next() } else { 0.0 }).collect())
            .collect();
        let (mut lu, rep) = factor(&a);
        assert!(rep.is_empty());
        for k in 0..20 {
            let pos = (k * 3) % n;
            let entering: Vec<f64> = (0..n).map(|i| if i == pos || (i + k) % 4 == 0 { next() + 3.0 } else { 0.0 }).collect();
            let mut rhs = entering.clone();
            let mut alpha = vec![0.0; n];
            lu.ftran_spike(&mut rhs, &mut alpha);
            if alpha[pos].abs() < 1e-3 {
                continue;
            }
            assert!(lu.update(pos, alpha[pos]), "update {k}");
            for i in 0..n {
                a[i][pos] = entering[i];
            }
            let b: Vec<f64> = (0..n).map(|i| i as f64 - 2.5).collect();
            let mut rhs = b.clone();
            let mut x = vec![0.0; n];
            lu.ftran(&mut rhs, &mut x);
            for (p, q) in matvec(&a, &x).iter().zip(&b) {
                assert!((p - q).abs() < 1e-9, "ftran after update {k}");
            }
            let mut c = b.clone();
            let mut y = vec![0.0; n];
            lu.btran(&mut c, &mut y);
            for j in 0..n {
                let col: f64 = (0..n).map(|i| a[i][j] * y[i]).sum();
                assert!((col - b[j]).abs() < 1e-9, "btran after update {k}");
            }
        }
        assert!(lu.num_etas() > 5);
    }

    #[test]
    fn dependent_column_is_replaced_by_a_logical() {
        let a = vec![vec![1.0, 2.0, 0.0], vec![1.0, 2.0, 0.0], vec![0.0, 0.0, 1.0]];
        let (_, rep) = factor(&a);
        assert_eq!(rep.len(), 1);
        assert_eq!(rep[0].row, 1);
    }
}
