//! Dense two-phase primal simplex.
//!
//! Problems have the form
//!
//! ```text
//! maximize    c·x
//! subject to  A_ub x ≤ b_ub
//!             A_eq x = b_eq
//!             x ≥ 0
//! ```
//!
//! Bland's rule is used in both phases, so the pivot sequence is a pure
//! function of the input. [`exact`] holds a rational-arithmetic solver used
//! as a reference in tests.

pub mod exact;

use crate::error::LpError;

/// Entries below this magnitude are never chosen as pivots.
pub const PIVOT_TOL: f64 = 1e-9;
/// Phase-one residual above which a problem is declared infeasible.
pub const FEASIBILITY_TOL: f64 = 1e-7;
const OPTIMALITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub ub_rows: Vec<Vec<f64>>,
    pub ub_rhs: Vec<f64>,
    pub eq_rows: Vec<Vec<f64>>,
    pub eq_rhs: Vec<f64>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        LinearProgram { objective, ..Default::default() }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_ub(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        self.ub_rows.push(row);
        self.ub_rhs.push(rhs);
        self
    }

    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        self.eq_rows.push(row);
        self.eq_rhs.push(rhs);
        self
    }

    fn check(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.ub_rows.len() != self.ub_rhs.len() || self.eq_rows.len() != self.eq_rhs.len() {
            return Err(LpError::Dimension("row count differs from right-hand side length".into()));
        }
        for (kind, rows) in [("inequality", &self.ub_rows), ("equality", &self.eq_rows)] {
            if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
                return Err(LpError::Dimension(format!(
                    "{kind} row {i} has {} coefficients, expected {n}",
                    r.len()
                )));
            }
        }
        let finite = self.objective.iter().all(|v| v.is_finite())
            && self.ub_rows.iter().flatten().all(|v| v.is_finite())
            && self.eq_rows.iter().flatten().all(|v| v.is_finite())
            && self.ub_rhs.iter().chain(&self.eq_rhs).all(|v| v.is_finite());
        if finite {
            Ok(())
        } else {
            Err(LpError::NonFinite)
        }
    }

    /// Largest absolute constraint violation of `x`, including `x ≥ 0`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let dot = |r: &[f64]| r.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        let ub = self.ub_rows.iter().zip(&self.ub_rhs).map(|(r, b)| dot(r) - b);
        let eq = self.eq_rows.iter().zip(&self.eq_rhs).map(|(r, b)| (dot(r) - b).abs());
        let neg = x.iter().map(|v| -v);
        ub.chain(eq).chain(neg).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
    /// Multipliers of the inequality rows (nonnegative at optimality).
    pub dual_ub: Vec<f64>,
    /// Multipliers of the equality rows.
    pub dual_eq: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpResult {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

impl LpResult {
    pub fn status(&self) -> LpStatus {
        match self {
            LpResult::Optimal(_) => LpStatus::Optimal,
            LpResult::Infeasible => LpStatus::Infeasible,
            LpResult::Unbounded => LpStatus::Unbounded,
        }
    }

    pub fn optimal(&self) -> Option<&LpSolution> {
        match self {
            LpResult::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

/// Row-major simplex tableau. The final column holds the right-hand side;
/// `obj` holds reduced costs `z_j - c_j` and, last, the current objective.
struct Tableau {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    obj: Vec<f64>,
    basis: Vec<usize>,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * (self.cols + 1) + c]
    }

    #[inline]
    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn row(&self, r: usize) -> &[f64] {
        let w = self.cols + 1;
        &self.data[r * w..(r + 1) * w]
    }

    fn set_costs(&mut self, cost: &[f64]) {
        let w = self.cols + 1;
        let mut obj = vec![0.0; w];
        for (j, c) in cost.iter().enumerate() {
            obj[j] = -c;
        }
        for r in 0..self.rows {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                for (o, a) in obj.iter_mut().zip(self.row(r)) {
                    *o += cb * a;
                }
            }
        }
        self.obj = obj;
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.cols + 1;
        let p = self.at(r, c);
        {
            let row = &mut self.data[r * w..(r + 1) * w];
            for v in row.iter_mut() {
                *v /= p;
            }
            row[c] = 1.0;
        }
        let pivot_row: Vec<f64> = self.row(r).to_vec();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.data[i * w + c];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.data[i * w..(i + 1) * w];
            for (v, pr) in row.iter_mut().zip(&pivot_row) {
                *v -= f * pr;
            }
            row[c] = 0.0;
        }
        let f = self.obj[c];
        if f != 0.0 {
            for (v, pr) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= f * pr;
            }
            self.obj[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Bland's rule: lowest-index improving column, then among the
    /// minimum-ratio rows the one whose basic variable has lowest index.
    fn run(&mut self, allowed: &[bool], max_iters: usize) -> Result<Outcome, LpError> {
        for _ in 0..max_iters {
            let entering = (0..self.cols).find(|&j| allowed[j] && self.obj[j] < -OPTIMALITY_TOL);
            let Some(c) = entering else {
                return Ok(Outcome::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, c);
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(r).max(0.0) / a;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((lr, lratio)) => {
                        let tie = (ratio - lratio).abs() <= 1e-12 * (1.0 + lratio.abs());
                        if (tie && self.basis[r] < self.basis[lr]) || (!tie && ratio < lratio) {
                            Some((r, ratio))
                        } else {
                            Some((lr, lratio))
                        }
                    }
                };
            }
            match leave {
                None => return Ok(Outcome::Unbounded),
                Some((r, _)) => self.pivot(r, c),
            }
        }
        Err(LpError::IterationLimit(max_iters))
    }
}

/// Solves `lp` with the two-phase simplex method.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpResult, LpError> {
    lp.check()?;
    let n = lp.num_vars();
    let n_ub = lp.ub_rows.len();
    let n_eq = lp.eq_rows.len();
    let rows = n_ub + n_eq;

    // Normalize every row to a nonnegative right-hand side. Rows whose slack
    // cannot start in the basis receive an artificial column.
    let mut sign = vec![1.0; rows];
    let mut needs_art = vec![false; rows];
    for i in 0..n_ub {
        if lp.ub_rhs[i] < 0.0 {
            sign[i] = -1.0;
            needs_art[i] = true;
        }
    }
    for e in 0..n_eq {
        let i = n_ub + e;
        if lp.eq_rhs[e] < 0.0 {
            sign[i] = -1.0;
        }
        needs_art[i] = true;
    }
    let n_art = needs_art.iter().filter(|b| **b).count();
    let slack0 = n;
    let art0 = n + n_ub;
    let cols = n + n_ub + n_art;
    let w = cols + 1;

    let mut data = vec![0.0; rows * w];
    let mut basis = vec![0usize; rows];
    let mut art_of_row = vec![usize::MAX; rows];
    let mut next_art = art0;
    for i in 0..rows {
        let (coeffs, rhs) = if i < n_ub {
            (&lp.ub_rows[i], lp.ub_rhs[i])
        } else {
            (&lp.eq_rows[i - n_ub], lp.eq_rhs[i - n_ub])
        };
        let row = &mut data[i * w..(i + 1) * w];
        for (dst, a) in row.iter_mut().zip(coeffs) {
            *dst = sign[i] * a;
        }
        row[cols] = sign[i] * rhs;
        if i < n_ub {
            row[slack0 + i] = sign[i];
            basis[i] = slack0 + i;
        }
        if needs_art[i] {
            row[next_art] = 1.0;
            basis[i] = next_art;
            art_of_row[i] = next_art;
            next_art += 1;
        }
    }

    let mut t = Tableau { rows, cols, data, obj: Vec::new(), basis };
    let max_iters = 50 * (rows + cols) + 1000;

    // Phase one: maximize the negated sum of artificials.
    let mut is_art = vec![false; cols];
    for j in art0..cols {
        is_art[j] = true;
    }
    let allowed: Vec<bool> = is_art.iter().map(|a| !a).collect();
    if n_art > 0 {
        let cost: Vec<f64> = (0..cols).map(|j| if is_art[j] { -1.0 } else { 0.0 }).collect();
        t.set_costs(&cost);
        t.run(&allowed, max_iters)?;
        let residual = -t.obj[cols];
        if residual > FEASIBILITY_TOL {
            return Ok(LpResult::Infeasible);
        }
        // Drive remaining artificials out of the basis where possible; rows
        // with no usable pivot are redundant and keep a zero artificial.
        for r in 0..rows {
            if is_art[t.basis[r]] {
                if let Some(c) = (0..art0).find(|&j| t.at(r, j).abs() > PIVOT_TOL) {
                    t.pivot(r, c);
                }
            }
        }
    }

    let mut cost = vec![0.0; cols];
    cost[..n].copy_from_slice(&lp.objective);
    t.set_costs(&cost);
    if let Outcome::Unbounded = t.run(&allowed, max_iters)? {
        return Ok(LpResult::Unbounded);
    }

    let mut x = vec![0.0; n];
    for r in 0..rows {
        let b = t.basis[r];
        if b < n {
            x[b] = t.rhs(r).max(0.0);
        }
    }
    let value = x.iter().zip(&lp.objective).map(|(a, c)| a * c).sum();
    // z_j of a column that started as sign·e_i equals sign·y'_i, where y' are
    // the duals of the normalized rows; y = sign·y'.
    let dual_ub = (0..n_ub).map(|i| t.obj[slack0 + i]).collect();
    let dual_eq = (n_ub..rows).map(|i| sign[i] * t.obj[art_of_row[i]]).collect();
    Ok(LpResult::Optimal(LpSolution { x, value, dual_ub, dual_eq }))
}

/// Whether `{x ≥ 0 : A_ub x ≤ b_ub, A_eq x = b_eq}` is non-empty.
pub fn check_feasible(
    ub_rows: &[Vec<f64>],
    ub_rhs: &[f64],
    eq_rows: &[Vec<f64>],
    eq_rhs: &[f64],
) -> Result<bool, LpError> {
    let n = ub_rows.first().or(eq_rows.first()).map_or(0, Vec::len);
    let lp = LinearProgram {
        objective: vec![0.0; n],
        ub_rows: ub_rows.to_vec(),
        ub_rhs: ub_rhs.to_vec(),
        eq_rows: eq_rows.to_vec(),
        eq_rhs: eq_rhs.to_vec(),
    };
    Ok(solve_lp(&lp)?.status() != LpStatus::Infeasible)
}
