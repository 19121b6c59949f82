//! Meta-strategy solvers: uniform, and the exact maximin of a zero-sum
//! matrix game by a rational simplex method.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use super::payoff::PayoffMatrix;
use crate::error::{Error, Result};
use crate::num::Q;
use crate::policy::MetaStrategy;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NashSolution {
    pub row_strategy: MetaStrategy,
    pub col_strategy: MetaStrategy,
    /// Game value for the row player.
    pub value: Q,
}

pub fn solve_uniform(n: usize) -> Result<MetaStrategy> {
    if n == 0 {
        return Err(Error::Empty("population"));
    }
    Ok(MetaStrategy::uniform(n))
}

/// Nash equilibrium of the payoff matrix read as a zero-sum game with row
/// payoff `win_rate − 1/2`.
pub fn solve_nash(p: &PayoffMatrix) -> Result<NashSolution> {
    solve_zero_sum(&p.zero_sum()?)
}

/// Worst-case payoff of the row mixture `x` over the columns of `a`.
pub fn row_guarantee(a: &[Vec<Q>], x: &[Q]) -> Q {
    let n = a[0].len();
    (0..n)
        .map(|j| a.iter().zip(x).fold(Q::zero(), |acc, (row, xi)| acc + &row[j] * xi))
        .min()
        .expect("nonempty matrix")
}

/// Best-case payoff the row player can reach against the column mixture `y`.
pub fn col_guarantee(a: &[Vec<Q>], y: &[Q]) -> Q {
    a.iter()
        .map(|row| row.iter().zip(y).fold(Q::zero(), |acc, (aij, yj)| acc + aij * yj))
        .max()
        .expect("nonempty matrix")
}

/// Exact equilibrium of the zero-sum game with row payoffs `a`.
///
/// With `b = a + c > 0` the column player's problem is
/// `max 1ᵀy  s.t.  b·y ≤ 1, y ≥ 0`; the optimal duals of the rows give the
/// row strategy. Both are normalised by the optimum `1/(v + c)`. The result
/// is checked for a zero duality gap before it is returned.
pub fn solve_zero_sum(a: &[Vec<Q>]) -> Result<NashSolution> {
    let m = a.len();
    if m == 0 || a[0].is_empty() {
        return Err(Error::Empty("payoff matrix"));
    }
    let n = a[0].len();
    if a.iter().any(|r| r.len() != n) {
        return Err(Error::Invalid(format!("ragged {m}-row payoff matrix")));
    }
    let min = a.iter().flatten().min().expect("nonempty").clone();
    let shift = Q::one() - min;

    // Tableau rows 0..m are constraints, row m is the objective. Columns
    // 0..n are y, n..n+m are slacks, the last column is the right-hand side.
    let width = n + m + 1;
    let mut t: Vec<Vec<Q>> = Vec::with_capacity(m + 1);
    for (i, row) in a.iter().enumerate() {
        let mut r = vec![Q::zero(); width];
        for (j, v) in row.iter().enumerate() {
            r[j] = v + &shift;
        }
        r[n + i] = Q::one();
        r[width - 1] = Q::one();
        t.push(r);
    }
    let mut obj = vec![Q::zero(); width];
    obj[..n].fill(-Q::one());
    t.push(obj);
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Bland's rule: lowest entering index, ties on the ratio broken by the
    // lowest basic variable. Terminates without cycling.
    while let Some(e) = (0..n + m).find(|&j| t[m][j].is_negative()) {
        let mut leave: Option<(usize, Q)> = None;
        for i in 0..m {
            if !t[i][e].is_positive() {
                continue;
            }
            let ratio = &t[i][width - 1] / &t[i][e];
            let better = match &leave {
                None => true,
                Some((l, r)) => ratio < *r || (ratio == *r && basis[i] < basis[*l]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        let (l, _) = leave.ok_or_else(|| Error::Invalid(alloc::string::String::from("unbounded matrix-game program")))?;
        pivot(&mut t, l, e);
        basis[l] = e;
    }

    let total = t[m][width - 1].clone();
    let mut y = vec![Q::zero(); n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            y[b] = &t[i][width - 1] / &total;
        }
    }
    let x: Vec<Q> = (0..m).map(|i| &t[m][n + i] / &total).collect();
    let value = Q::one() / &total - &shift;

    let lower = row_guarantee(a, &x);
    let upper = col_guarantee(a, &y);
    if lower != value || upper != value {
        return Err(Error::Invalid(format!("duality gap: row guarantees {lower}, column concedes {upper}")));
    }
    Ok(NashSolution { row_strategy: MetaStrategy::new(x)?, col_strategy: MetaStrategy::new(y)?, value })
}

fn pivot(t: &mut [Vec<Q>], l: usize, e: usize) {
    let p = t[l][e].clone();
    for v in t[l].iter_mut() {
        *v /= &p;
    }
    let prow = t[l].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i == l || row[e].is_zero() {
            continue;
        }
        let f = row[e].clone();
        for (v, pv) in row.iter_mut().zip(&prow) {
            if !pv.is_zero() {
                *v -= &f * pv;
            }
        }
    }
}
