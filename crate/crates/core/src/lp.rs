//! Dense Phase-I simplex for linear feasibility problems
//! `A x = b, G x <= h`.
//!
//! Variables are free unless the inequality block contains a plain bound row
//! `-c * x_i <= 0` (`c > 0`), which is absorbed as `x_i >= 0`.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-7;
pub const MAX_ITERATIONS: usize = 10_000;

const PIVOT_EPS: f64 = 1e-9;
const COST_EPS: f64 = 1e-10;
const REFACTOR_EVERY: usize = 50;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    pub n: usize,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub g: Vec<Vec<f64>>,
    pub h: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Feasible(Vec<f64>),
    Infeasible,
    Indeterminate(String),
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LpOutcome::Feasible(_))
    }
}

impl LinearProgram {
    pub fn new(n: usize) -> LinearProgram {
        LinearProgram {
            n,
            ..Default::default()
        }
    }

    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) {
        self.a.push(row);
        self.b.push(rhs);
    }

    pub fn add_le(&mut self, row: Vec<f64>, rhs: f64) {
        self.g.push(row);
        self.h.push(rhs);
    }

    /// Adds `x_i >= 0`.
    pub fn add_nonneg(&mut self, i: usize) {
        let mut row = vec![0.0; self.n];
        row[i] = -1.0;
        self.add_le(row, 0.0);
    }

    pub fn validate(&self) -> Result<()> {
        if self.a.len() != self.b.len() {
            return Err(Error::Dimension(format!(
                "{} equality rows but {} right-hand sides",
                self.a.len(),
                self.b.len()
            )));
        }
        if self.g.len() != self.h.len() {
            return Err(Error::Dimension(format!(
                "{} inequality rows but {} right-hand sides",
                self.g.len(),
                self.h.len()
            )));
        }
        for (name, rows) in [("A", &self.a), ("G", &self.g)] {
            if let Some((k, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != self.n) {
                return Err(Error::Dimension(format!(
                    "row {k} of {name} has {} entries, expected {}",
                    r.len(),
                    self.n
                )));
            }
        }
        let finite = self
            .a
            .iter()
            .chain(&self.g)
            .flatten()
            .chain(&self.b)
            .chain(&self.h)
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Dimension("non-finite coefficient".into()));
        }
        Ok(())
    }

    /// Largest equality residual and largest inequality violation at `x`.
    pub fn residuals(&self, x: &[f64]) -> (f64, f64) {
        let dot = |r: &[f64]| r.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        let eq = self
            .a
            .iter()
            .zip(&self.b)
            .map(|(r, b)| (dot(r) - b).abs())
            .fold(0.0, f64::max);
        let ineq = self
            .g
            .iter()
            .zip(&self.h)
            .map(|(r, h)| dot(r) - h)
            .fold(0.0, f64::max);
        (eq, ineq)
    }

    /// Plain-text listing of `(A, b, G, h)`.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        writeln!(s, "n = {}, equalities = {}, inequalities = {}", self.n, self.a.len(), self.g.len()).unwrap();
        let fmt_row = |r: &[f64]| r.iter().map(|v| format!("{v:>12.5e}")).collect::<Vec<_>>().join(" ");
        writeln!(s, "A | b").unwrap();
        for (r, b) in self.a.iter().zip(&self.b) {
            writeln!(s, "{} | {:>12.5e}", fmt_row(r), b).unwrap();
        }
        writeln!(s, "G | h").unwrap();
        for (r, h) in self.g.iter().zip(&self.h) {
            writeln!(s, "{} | {:>12.5e}", fmt_row(r), h).unwrap();
        }
        s
    }
}

/// Column of the standard-form problem a decision variable maps to.
#[derive(Clone, Copy)]
enum VarMap {
    NonNeg(usize),
    Free(usize, usize),
}

/// Decides feasibility of `lp`. A returned certificate satisfies every
/// constraint to within `tol`.
pub fn solve_feasibility(lp: &LinearProgram, tol: f64) -> Result<LpOutcome> {
    lp.validate()?;
    let n = lp.n;

    let mut nonneg = vec![false; n];
    let mut bound_rows = vec![false; lp.g.len()];
    for (k, (row, &h)) in lp.g.iter().zip(&lp.h).enumerate() {
        let mut nz = row.iter().enumerate().filter(|(_, v)| **v != 0.0);
        if let (Some((i, &c)), None) = (nz.next(), nz.next()) {
            if c < 0.0 && h == 0.0 {
                nonneg[i] = true;
                bound_rows[k] = true;
            }
        }
    }

    let mut cols = 0;
    let map: Vec<VarMap> = nonneg
        .iter()
        .map(|&nn| {
            if nn {
                cols += 1;
                VarMap::NonNeg(cols - 1)
            } else {
                cols += 2;
                VarMap::Free(cols - 2, cols - 1)
            }
        })
        .collect();

    let ineq: Vec<usize> = (0..lp.g.len()).filter(|&k| !bound_rows[k]).collect();
    let n_slack = ineq.len();
    let n_struct = cols + n_slack;
    let m = lp.a.len() + ineq.len();

    // Rows of [structural | slack | artificial | rhs].
    let width = n_struct + m + 1;
    let mut t = vec![vec![0.0; width]; m];
    let expand = |src: &[f64], dst: &mut [f64]| {
        for (i, &v) in src.iter().enumerate() {
            match map[i] {
                VarMap::NonNeg(c) => dst[c] = v,
                VarMap::Free(p, q) => {
                    dst[p] = v;
                    dst[q] = -v;
                }
            }
        }
    };
    for (r, (row, &b)) in lp.a.iter().zip(&lp.b).enumerate() {
        expand(row, &mut t[r]);
        t[r][width - 1] = b;
    }
    for (s, &k) in ineq.iter().enumerate() {
        let r = lp.a.len() + s;
        expand(&lp.g[k], &mut t[r]);
        t[r][cols + s] = 1.0;
        t[r][width - 1] = lp.h[k];
    }
    for (r, row) in t.iter_mut().enumerate() {
        // Equilibrate, then make the right-hand side non-negative.
        let scale = row[..n_struct]
            .iter()
            .chain(std::iter::once(&row[width - 1]))
            .fold(0.0f64, |a, v| a.max(v.abs()));
        let sign = if row[width - 1] < 0.0 { -1.0 } else { 1.0 };
        let f = if scale > 0.0 { sign / scale } else { sign };
        for v in row.iter_mut() {
            *v *= f;
        }
        row[n_struct + r] = 1.0;
    }

    let orig = t.clone();
    let mut basis: Vec<usize> = (n_struct..n_struct + m).collect();
    // Phase-I objective: minimize the sum of artificials. `cost[j]` holds
    // reduced costs, `cost[width - 1]` minus the current objective.
    let mut cost = vec![0.0; width];
    for row in &t {
        for j in 0..n_struct {
            cost[j] -= row[j];
        }
        cost[width - 1] -= row[width - 1];
    }

    let mut iterations = 0;
    let mut fresh = true;
    loop {
        // Bland: lowest-index improving column that has a pivot row.
        let choice = (0..n_struct + m)
            .filter(|&j| cost[j] < -COST_EPS && !basis.contains(&j))
            .find_map(|j| ratio_test(&t, &basis, j, width).map(|r| (j, r)));
        let Some((enter, pr)) = choice else {
            // Columns that improve only by amounts below the pivot tolerance
            // are numerical noise; confirm optimality on a fresh tableau.
            if fresh {
                break;
            }
            if !refactor(&orig, &basis, n_struct, &mut t, &mut cost) {
                return Ok(LpOutcome::Indeterminate("singular basis".into()));
            }
            fresh = true;
            continue;
        };
        iterations += 1;
        if iterations > MAX_ITERATIONS {
            return Ok(LpOutcome::Indeterminate(format!(
                "iteration limit {MAX_ITERATIONS} reached"
            )));
        }
        pivot(&mut t, &mut cost, pr, enter);
        basis[pr] = enter;
        fresh = false;
        if iterations % REFACTOR_EVERY == 0 {
            if !refactor(&orig, &basis, n_struct, &mut t, &mut cost) {
                return Ok(LpOutcome::Indeterminate("singular basis".into()));
            }
            fresh = true;
        }
    }

    let phase1: f64 = basis
        .iter()
        .enumerate()
        .filter(|(_, &b)| b >= n_struct)
        .map(|(r, _)| t[r][width - 1])
        .sum();
    if !phase1.is_finite() {
        return Ok(LpOutcome::Indeterminate("non-finite Phase-I objective".into()));
    }
    if phase1 > tol {
        return Ok(LpOutcome::Infeasible);
    }

    let mut y = vec![0.0; n_struct + m];
    for (r, &bv) in basis.iter().enumerate() {
        y[bv] = t[r][width - 1];
    }
    let x: Vec<f64> = map
        .iter()
        .map(|m| match *m {
            VarMap::NonNeg(c) => y[c].max(0.0),
            VarMap::Free(p, q) => y[p] - y[q],
        })
        .collect();
    let (eq, ineq) = lp.residuals(&x);
    if eq > tol || ineq > tol {
        return Ok(LpOutcome::Indeterminate(format!(
            "certificate residuals {eq:e} / {ineq:e} exceed tolerance"
        )));
    }
    Ok(LpOutcome::Feasible(x))
}

/// Rebuilds the tableau and reduced costs for `basis` from the original
/// rows. Returns false if the basis matrix is singular.
fn refactor(orig: &[Vec<f64>], basis: &[usize], n_struct: usize, t: &mut [Vec<f64>], cost: &mut [f64]) -> bool {
    let m = orig.len();
    let width = cost.len();
    let b = DMatrix::from_fn(m, m, |r, c| orig[r][basis[c]]);
    let Some(inv) = b.try_inverse() else {
        return false;
    };
    let full = DMatrix::from_fn(m, width, |r, c| orig[r][c]);
    let next = inv * full;
    for (r, row) in t.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = next[(r, c)];
        }
    }
    for (&bv, row) in basis.iter().zip(t.iter_mut()) {
        for (c, v) in row.iter_mut().enumerate().take(width - 1) {
            if c == bv {
                *v = 1.0;
            } else if basis.contains(&c) {
                *v = 0.0;
            }
        }
    }
    // Artificials cost 1, everything else 0.
    for c in 0..width {
        let base = if c >= n_struct && c < width - 1 { 1.0 } else { 0.0 };
        let cb: f64 = basis
            .iter()
            .zip(t.iter())
            .filter(|(&bv, _)| bv >= n_struct)
            .map(|(_, row)| row[c])
            .sum();
        cost[c] = base - cb;
    }
    true
}

/// Minimum-ratio row for entering column `enter`, ties to the lowest basic
/// variable index.
fn ratio_test(t: &[Vec<f64>], basis: &[usize], enter: usize, width: usize) -> Option<usize> {
    let mut leave: Option<(usize, f64)> = None;
    for (r, row) in t.iter().enumerate() {
        let a = row[enter];
        if a > PIVOT_EPS {
            let ratio = row[width - 1].max(0.0) / a;
            leave = match leave {
                Some((lr, lratio)) if !(ratio < lratio - 1e-12 || (ratio <= lratio + 1e-12 && basis[r] < basis[lr])) => {
                    Some((lr, lratio))
                }
                _ => Some((r, ratio)),
            };
        }
    }
    leave.map(|(r, _)| r)
}

fn pivot(t: &mut [Vec<f64>], cost: &mut [f64], pr: usize, pc: usize) {
    let p = t[pr][pc];
    for v in t[pr].iter_mut() {
        *v /= p;
    }
    let prow = t[pr].clone();
    for (r, row) in t.iter_mut().enumerate() {
        if r == pr {
            continue;
        }
        let f = row[pc];
        if f != 0.0 {
            for (v, pv) in row.iter_mut().zip(&prow) {
                *v -= f * pv;
            }
            row[pc] = 0.0;
        }
    }
    let f = cost[pc];
    if f != 0.0 {
        for (v, pv) in cost.iter_mut().zip(&prow) {
            *v -= f * pv;
        }
        cost[pc] = 0.0;
    }
}
