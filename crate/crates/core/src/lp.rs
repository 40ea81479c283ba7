//! Exact rational linear feasibility.
//!
//! All systems we meet are homogeneous cones, so strict constraints
//! `f(x) > 0` are posed by callers as `f(x) >= 1`. Feasibility uses
//! Fourier-Motzkin elimination for small variable counts and falls back to
//! an exact phase-1 simplex with Bland's rule; the variable order is the
//! given coordinate order throughout, so results are deterministic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// One constraint `coeffs . x >= rhs`.
#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<BigRational>,
    pub rhs: BigRational,
}

impl Constraint {
    pub fn from_int(coeffs: &[BigInt], rhs: i64) -> Self {
        Constraint {
            coeffs: coeffs.iter().map(|c| BigRational::from(c.clone())).collect(),
            rhs: BigRational::from(BigInt::from(rhs)),
        }
    }

    /// Equality `coeffs . x = rhs` as a pair of inequalities.
    pub fn eq_pair(coeffs: Vec<BigRational>, rhs: BigRational) -> [Constraint; 2] {
        let neg = Constraint {
            coeffs: coeffs.iter().map(|c| -c).collect(),
            rhs: -rhs.clone(),
        };
        [Constraint { coeffs, rhs }, neg]
    }
}

const FM_VAR_LIMIT: usize = 6;
const FM_ROW_LIMIT: usize = 6000;

/// Is `{x : A x >= b}` nonempty?
pub fn feasible(n_vars: usize, constraints: &[Constraint]) -> bool {
    if n_vars <= FM_VAR_LIMIT {
        if let Some(ans) = fourier_motzkin_feasible(n_vars, constraints) {
            return ans;
        }
    }
    simplex_point(n_vars, constraints).is_some()
}

/// A rational point of `{x : A x >= b}`, if any.
pub fn find_point(n_vars: usize, constraints: &[Constraint]) -> Option<Vec<BigRational>> {
    simplex_point(n_vars, constraints)
}

/// Fourier-Motzkin feasibility; `None` when the row blowup guard trips.
fn fourier_motzkin_feasible(n_vars: usize, constraints: &[Constraint]) -> Option<bool> {
    // rows as (coeffs, rhs) meaning coeffs.x >= rhs
    let mut rows: Vec<(Vec<BigRational>, BigRational)> = constraints
        .iter()
        .map(|c| {
            assert_eq!(c.coeffs.len(), n_vars);
            (c.coeffs.clone(), c.rhs.clone())
        })
        .collect();
    for var in (0..n_vars).rev() {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        let mut zero = Vec::new();
        for (coeffs, rhs) in rows.drain(..) {
            let c = coeffs[var].clone();
            if c.is_zero() {
                zero.push((coeffs, rhs));
            } else if c.is_positive() {
                pos.push((coeffs, rhs, c));
            } else {
                neg.push((coeffs, rhs, c));
            }
        }
        if pos.len() * neg.len() + zero.len() > FM_ROW_LIMIT {
            return None;
        }
        rows = zero;
        for (pc, pr, pcv) in &pos {
            for (nc, nr, ncv) in &neg {
                // pcv > 0 >= x-bound from below, ncv < 0 bound from above:
                // combine so the var cancels: (-ncv)*p + pcv*n
                let a = -ncv.clone();
                let mut coeffs = vec![BigRational::zero(); n_vars];
                for k in 0..n_vars {
                    coeffs[k] = &a * &pc[k] + pcv * &nc[k];
                }
                debug_assert!(coeffs[var].is_zero());
                let rhs = &a * pr + pcv * nr;
                rows.push((coeffs, rhs));
            }
        }
    }
    // no variables left: every row must have 0 >= rhs
    Some(rows.iter().all(|(_, rhs)| !rhs.is_positive()))
}

/// Exact phase-1 simplex. Standard form with split free variables,
/// surplus variables and artificials; Bland's rule prevents cycling.
fn simplex_point(n_vars: usize, constraints: &[Constraint]) -> Option<Vec<BigRational>> {
    let m = constraints.len();
    if m == 0 {
        return Some(vec![BigRational::zero(); n_vars]);
    }
    // columns: x+ (n), x- (n), surplus (m), artificial (m)
    let n_total = 2 * n_vars + 2 * m;
    // tableau rows: m constraint rows, 1 objective row; columns + rhs
    let mut t = vec![vec![BigRational::zero(); n_total + 1]; m + 1];
    for (i, c) in constraints.iter().enumerate() {
        let flip = c.rhs.is_negative();
        let sgn = if flip { -BigRational::one() } else { BigRational::one() };
        for j in 0..n_vars {
            t[i][j] = &sgn * &c.coeffs[j];
            t[i][n_vars + j] = -&t[i][j];
        }
        // a.x - s = rhs, s >= 0 (after the optional sign flip)
        t[i][2 * n_vars + i] = -&sgn;
        t[i][2 * n_vars + m + i] = BigRational::one();
        t[i][n_total] = &sgn * &c.rhs;
    }
    // objective: minimize sum of artificials -> row = -(sum of constraint rows)
    // expressed in the current basis (artificials basic).
    let mut basis: Vec<usize> = (0..m).map(|i| 2 * n_vars + m + i).collect();
    for j in 0..=n_total {
        let mut s = BigRational::zero();
        for i in 0..m {
            s += &t[i][j];
        }
        t[m][j] = -s;
    }
    for i in 0..m {
        t[m][2 * n_vars + m + i] = BigRational::zero();
    }

    loop {
        // Bland: entering column = smallest index with negative cost
        let mut enter = None;
        for j in 0..n_total {
            if t[m][j].is_negative() {
                enter = Some(j);
                break;
            }
        }
        let Some(e) = enter else { break };
        // ratio test, Bland tie-break by basis variable index
        let mut leave: Option<usize> = None;
        let mut best: Option<BigRational> = None;
        for i in 0..m {
            if t[i][e].is_positive() {
                let ratio = &t[i][n_total] / &t[i][e];
                let better = match &best {
                    None => true,
                    Some(b) => &ratio < b || (&ratio == b && basis[i] < basis[leave.unwrap()]),
                };
                if better {
                    best = Some(ratio);
                    leave = Some(i);
                }
            }
        }
        let Some(l) = leave else {
            // unbounded phase-1 objective cannot happen (bounded below by 0)
            return None;
        };
        // pivot at (l, e)
        let piv = t[l][e].clone();
        for j in 0..=n_total {
            t[l][j] = &t[l][j] / &piv;
        }
        for i in 0..=m {
            if i != l && !t[i][e].is_zero() {
                let f = t[i][e].clone();
                for j in 0..=n_total {
                    let sub = &f * &t[l][j];
                    t[i][j] = &t[i][j] - sub;
                }
            }
        }
        basis[l] = e;
    }

    // feasible iff optimum 0
    if !t[m][n_total].is_zero() {
        return None;
    }
    let mut x = vec![BigRational::zero(); n_vars];
    for i in 0..m {
        let b = basis[i];
        if b < n_vars {
            x[b] += &t[i][n_total];
        } else if b < 2 * n_vars {
            x[b - n_vars] -= &t[i][n_total];
        }
    }
    debug_assert!(constraints.iter().all(|c| {
        let lhs: BigRational = c.coeffs.iter().zip(&x).map(|(a, b)| a * b).sum();
        lhs >= c.rhs
    }));
    Some(x)
}
