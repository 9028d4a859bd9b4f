//! Dense rational simplex for `max cᵀx s.t. Ax ≤ b, x ≥ 0` with `b ≥ 0`.
//!
//! Starts from the slack basis and pivots with Bland's rule, so it always
//! terminates. Dual values are read off the reduced costs of the slacks.

use crate::error::{Error, Result};
use crate::value::Value;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpSolution {
    pub objective: Value,
    pub x: Vec<Value>,
    /// Optimal dual: `min bᵀy s.t. Aᵀy ≥ c, y ≥ 0`.
    pub y: Vec<Value>,
    pub pivots: usize,
}

/// Solves the LP exactly. Fails on an unbounded objective or negative `b`.
pub fn maximize(a: &[Vec<Value>], b: &[Value], c: &[Value]) -> Result<LpSolution> {
    let rows = a.len();
    let cols = c.len();
    if b.len() != rows || a.iter().any(|r| r.len() != cols) {
        return Err(Error::Domain("inconsistent LP dimensions".into()));
    }
    if b.iter().any(Value::is_negative) {
        return Err(Error::Domain("right-hand side must be non-negative".into()));
    }
    let width = cols + rows;
    let mut t: Vec<Vec<Value>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..rows).map(|k| if k == i { Value::one() } else { Value::zero() }));
            row
        })
        .collect();
    let mut rhs: Vec<Value> = b.to_vec();
    let mut basis: Vec<usize> = (cols..width).collect();
    // Reduced costs z_j - c_j.
    let mut d: Vec<Value> = c.iter().map(|v| -v.clone()).chain((0..rows).map(|_| Value::zero())).collect();
    let mut objective = Value::zero();
    let mut pivots = 0;

    while let Some(enter) = d.iter().position(Value::is_negative) {
        let mut leave: Option<(usize, Value)> = None;
        for i in 0..rows {
            if !t[i][enter].is_positive() {
                continue;
            }
            let ratio = &rhs[i] / &t[i][enter];
            let better = match &leave {
                None => true,
                Some((l, r)) => ratio < *r || (ratio == *r && basis[i] < basis[*l]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        let Some((r, _)) = leave else {
            return Err(Error::Infeasible("LP objective is unbounded".into()));
        };
        let piv = t[r][enter].clone();
        for v in t[r].iter_mut() {
            *v = &*v / &piv;
        }
        rhs[r] = &rhs[r] / &piv;
        let prow = t[r].clone();
        let prhs = rhs[r].clone();
        for i in 0..rows {
            if i == r || t[i][enter].is_zero() {
                continue;
            }
            let factor = t[i][enter].clone();
            for (v, p) in t[i].iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
            rhs[i] -= &factor * &prhs;
        }
        let factor = d[enter].clone();
        for (v, p) in d.iter_mut().zip(&prow) {
            if !p.is_zero() {
                *v -= &factor * p;
            }
        }
        objective -= &factor * &prhs;
        basis[r] = enter;
        pivots += 1;
    }

    let mut x = vec![Value::zero(); cols];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < cols {
            x[bv] = rhs[i].clone();
        }
    }
    let y = d[cols..].to_vec();
    Ok(LpSolution {
        objective,
        x,
        y,
        pivots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: i64) -> Value {
        Value::from_int(n)
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 5y s.t. x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18; optimum 36 at (2, 6).
        let a = vec![vec![v(1), v(0)], vec![v(0), v(2)], vec![v(3), v(2)]];
        let s = maximize(&a, &[v(4), v(12), v(18)], &[v(3), v(5)]).unwrap();
        assert_eq!(s.objective, v(36));
        assert_eq!(s.x, vec![v(2), v(6)]);
        assert_eq!(s.y, vec![v(0), Value::ratio(3, 2), v(1)]);
    }

    #[test]
    fn unbounded_is_reported() {
        let a = vec![vec![v(1), v(-1)]];
        assert!(maximize(&a, &[v(1)], &[v(0), v(1)]).is_err());
    }

    #[test]
    fn degenerate_problem_terminates() {
        // A classic cycling example under the largest-coefficient rule.
        let a = vec![
            vec![Value::ratio(1, 4), v(-8), v(-1), v(9)],
            vec![Value::ratio(1, 2), v(-12), Value::ratio(-1, 2), v(3)],
            vec![v(0), v(0), v(1), v(0)],
        ];
        let c = [Value::ratio(3, 4), v(-20), Value::ratio(1, 2), v(-6)];
        let s = maximize(&a, &[v(0), v(0), v(1)], &c).unwrap();
        assert_eq!(s.objective, Value::ratio(5, 4));
    }
}
