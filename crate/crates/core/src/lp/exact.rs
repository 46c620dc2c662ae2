//! Exact rational simplex, used to cross-check [`solve_lp`](super::solve_lp).
//!
//! This is a separate formulation from the floating solver: equalities are
//! split into opposing inequalities and phase one uses a single auxiliary
//! variable `x₀` (the dictionary method), so the two solvers share neither
//! arithmetic nor pivot paths. Intended for small problems only.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{LinearProgram, LpStatus};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RationalLp {
    pub objective: Vec<BigRational>,
    pub ub_rows: Vec<Vec<BigRational>>,
    pub ub_rhs: Vec<BigRational>,
    pub eq_rows: Vec<Vec<BigRational>>,
    pub eq_rhs: Vec<BigRational>,
}

impl RationalLp {
    /// The same problem in floating point.
    pub fn to_f64(&self) -> LinearProgram {
        let v = |xs: &[BigRational]| xs.iter().map(to_f64).collect::<Vec<_>>();
        LinearProgram {
            objective: v(&self.objective),
            ub_rows: self.ub_rows.iter().map(|r| v(r)).collect(),
            ub_rhs: v(&self.ub_rhs),
            eq_rows: self.eq_rows.iter().map(|r| v(r)).collect(),
            eq_rhs: v(&self.eq_rhs),
        }
    }
}

pub fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactResult {
    pub status: LpStatus,
    pub value: Option<BigRational>,
    pub x: Option<Vec<BigRational>>,
}

struct Dict {
    cols: usize,
    rows: Vec<Vec<BigRational>>,
    rhs: Vec<BigRational>,
    basis: Vec<usize>,
}

impl Dict {
    fn pivot(&mut self, r: usize, c: usize, obj: &mut [BigRational], obj_val: &mut BigRational) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v = &*v / &p;
        }
        self.rhs[r] = &self.rhs[r] / &p;
        let prow = self.rows[r].clone();
        let prhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let f = self.rows[i][c].clone();
            for (v, pv) in self.rows[i].iter_mut().zip(&prow) {
                if !pv.is_zero() {
                    *v = &*v - &f * pv;
                }
            }
            self.rhs[i] = &self.rhs[i] - &f * &prhs;
        }
        // obj holds reduced profits c̄_j; objective value = obj_val.
        if !obj[c].is_zero() {
            let f = obj[c].clone();
            for (v, pv) in obj.iter_mut().zip(&prow) {
                if !pv.is_zero() {
                    *v = &*v - &f * pv;
                }
            }
            *obj_val = &*obj_val + &f * &prhs;
        }
        self.basis[r] = c;
    }

    /// Maximizes with Bland's rule. Returns false when unbounded.
    fn optimize(&mut self, obj: &mut [BigRational], obj_val: &mut BigRational, allowed: &[bool]) -> bool {
        loop {
            let Some(c) = (0..self.cols).find(|&j| allowed[j] && obj[j].is_positive()) else {
                return true;
            };
            let mut best: Option<(usize, BigRational)> = None;
            for r in 0..self.rows.len() {
                if !self.rows[r][c].is_positive() {
                    continue;
                }
                let ratio = &self.rhs[r] / &self.rows[r][c];
                best = match best {
                    None => Some((r, ratio)),
                    Some((br, bratio)) => {
                        if ratio < bratio || (ratio == bratio && self.basis[r] < self.basis[br]) {
                            Some((r, ratio))
                        } else {
                            Some((br, bratio))
                        }
                    }
                };
            }
            match best {
                None => return false,
                Some((r, _)) => self.pivot(r, c, obj, obj_val),
            }
        }
    }
}

/// Solves `lp` exactly.
///
/// Column layout: `x₀` (auxiliary), original variables, then one slack per
/// inequality row.
pub fn solve_exact(lp: &RationalLp) -> ExactResult {
    let n = lp.objective.len();
    let mut a: Vec<Vec<BigRational>> = lp.ub_rows.clone();
    let mut b: Vec<BigRational> = lp.ub_rhs.clone();
    for (row, rhs) in lp.eq_rows.iter().zip(&lp.eq_rhs) {
        a.push(row.clone());
        b.push(rhs.clone());
        a.push(row.iter().map(|v| -v).collect());
        b.push(-rhs);
    }
    let m = a.len();
    let cols = 1 + n + m;
    let rows: Vec<Vec<BigRational>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = vec![BigRational::zero(); cols];
            row[0] = -BigRational::one();
            for (j, v) in r.iter().enumerate() {
                row[1 + j] = v.clone();
            }
            row[1 + n + i] = BigRational::one();
            row
        })
        .collect();
    let basis = (0..m).map(|i| 1 + n + i).collect();
    let mut dict = Dict { cols, rows, rhs: b, basis };
    let mut allowed = vec![true; cols];

    let most_negative = (0..m).filter(|&i| dict.rhs[i].is_negative()).min_by(|&i, &j| {
        dict.rhs[i].cmp(&dict.rhs[j]).then(i.cmp(&j))
    });
    if let Some(r) = most_negative {
        let mut obj = vec![BigRational::zero(); cols];
        obj[0] = -BigRational::one();
        let mut val = BigRational::zero();
        dict.pivot(r, 0, &mut obj, &mut val);
        dict.optimize(&mut obj, &mut val, &allowed);
        if val.is_negative() {
            return ExactResult { status: LpStatus::Infeasible, value: None, x: None };
        }
        if let Some(r) = dict.basis.iter().position(|&v| v == 0) {
            if let Some(c) = (1..cols).find(|&j| !dict.rows[r][j].is_zero()) {
                dict.pivot(r, c, &mut obj, &mut val);
            }
        }
    }
    allowed[0] = false;

    // Reduced profits of the real objective under the current basis.
    let mut obj = vec![BigRational::zero(); cols];
    for (j, c) in lp.objective.iter().enumerate() {
        obj[1 + j] = c.clone();
    }
    let mut val = BigRational::zero();
    for r in 0..m {
        let bv = dict.basis[r];
        if obj[bv].is_zero() {
            continue;
        }
        let f = obj[bv].clone();
        for (v, pv) in obj.iter_mut().zip(&dict.rows[r]) {
            *v = &*v - &f * pv;
        }
        val = &val + &f * &dict.rhs[r];
    }
    if !dict.optimize(&mut obj, &mut val, &allowed) {
        return ExactResult { status: LpStatus::Unbounded, value: None, x: None };
    }
    let mut x = vec![BigRational::zero(); n];
    for r in 0..m {
        let bv = dict.basis[r];
        if (1..=n).contains(&bv) {
            x[bv - 1] = dict.rhs[r].clone();
        }
    }
    ExactResult { status: LpStatus::Optimal, value: Some(val), x: Some(x) }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        ratio(n, 1)
    }

    #[test]
    fn small_cases() {
        let lp = RationalLp {
            objective: vec![q(1)],
            ub_rows: vec![vec![q(1)]],
            ub_rhs: vec![q(1)],
            ..Default::default()
        };
        let r = solve_exact(&lp);
        assert_eq!(r.status, LpStatus::Optimal);
        assert_eq!(r.value, Some(q(1)));

        let lp = RationalLp {
            objective: vec![q(0)],
            ub_rows: vec![vec![q(1)]],
            ub_rhs: vec![q(-1)],
            ..Default::default()
        };
        assert_eq!(solve_exact(&lp).status, LpStatus::Infeasible);

        let lp = RationalLp { objective: vec![q(1)], ..Default::default() };
        assert_eq!(solve_exact(&lp).status, LpStatus::Unbounded);
    }

    #[test]
    fn equality_rows() {
        // max x + 2y, x + y = 1, y ≤ 3/4
        let lp = RationalLp {
            objective: vec![q(1), q(2)],
            ub_rows: vec![vec![q(0), q(1)]],
            ub_rhs: vec![ratio(3, 4)],
            eq_rows: vec![vec![q(1), q(1)]],
            eq_rhs: vec![q(1)],
        };
        let r = solve_exact(&lp);
        assert_eq!(r.value, Some(ratio(7, 4)));
        assert_eq!(r.x, Some(vec![ratio(1, 4), ratio(3, 4)]));
    }

    #[test]
    fn beale_example_terminates() {
        let lp = RationalLp {
            objective: vec![ratio(3, 4), q(-150), ratio(1, 50), q(-6)],
            ub_rows: vec![
                vec![ratio(1, 4), q(-60), ratio(-1, 25), q(9)],
                vec![ratio(1, 2), q(-90), ratio(-1, 50), q(3)],
                vec![q(0), q(0), q(1), q(0)],
            ],
            ub_rhs: vec![q(0), q(0), q(1)],
            ..Default::default()
        };
        assert_eq!(solve_exact(&lp).value, Some(ratio(1, 20)));
    }
}
