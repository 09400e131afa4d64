//! Phase-one simplex for `A x = b, x ≥ 0` with Bland's pivoting rule.
//!
//! In rational mode every pivot is exact. In floating mode entries within
//! `tol` of zero are treated as zero during pricing and the ratio test.

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility<T> {
    /// A nonnegative solution of `A x = b`.
    Feasible(Vec<T>),
    /// Farkas certificate: `yᵀA ≤ 0` columnwise and `yᵀb = gap > 0`.
    Infeasible { y: Vec<T>, gap: T },
}

/// Dense constraint system; `rows[i]` has one entry per variable.
#[derive(Debug, Clone)]
pub struct EqualitySystem<T> {
    pub rows: Vec<Vec<T>>,
    pub rhs: Vec<T>,
}

impl<T: Scalar> EqualitySystem<T> {
    pub fn n_vars(&self) -> usize {
        self.rows.first().map_or(0, |r| r.len())
    }

    /// Minimizes the sum of one artificial per row, starting from the
    /// all-artificial basis. Terminates by Bland's rule.
    pub fn solve(&self, tol: f64) -> Feasibility<T> {
        let m = self.rows.len();
        let n = self.n_vars();
        let width = n + m;
        // row sign flips keep the starting basis feasible
        let signs: Vec<bool> = self.rhs.iter().map(|b| b.is_negative()).collect();
        let mut tab: Vec<Vec<T>> = Vec::with_capacity(m);
        let mut rhs: Vec<T> = Vec::with_capacity(m);
        for (i, (row, b)) in self.rows.iter().zip(&self.rhs).enumerate() {
            let mut r: Vec<T> = row.clone();
            r.extend((0..m).map(|k| if k == i { T::one() } else { T::zero() }));
            let mut b = b.clone();
            if signs[i] {
                for v in r[..n].iter_mut() {
                    *v = -v.clone();
                }
                b = -b;
            }
            tab.push(r);
            rhs.push(b);
        }
        let mut basis: Vec<usize> = (n..width).collect();
        // reduced costs of the phase-one objective, and its current value
        let mut cost: Vec<T> = (0..width)
            .map(|j| {
                if j < n {
                    let mut s = T::zero();
                    for row in &tab {
                        s -= &row[j];
                    }
                    s
                } else {
                    T::zero()
                }
            })
            .collect();
        let mut objective: T = rhs.iter().cloned().sum();

        while let Some(enter) = (0..width).find(|&j| (-cost[j].clone()).positive_beyond(tol)) {
            let mut leave: Option<usize> = None;
            for i in 0..m {
                if !tab[i][enter].positive_beyond(tol) {
                    continue;
                }
                leave = match leave {
                    None => Some(i),
                    Some(l) => {
                        let ri = rhs[i].clone() / tab[i][enter].clone();
                        let rl = rhs[l].clone() / tab[l][enter].clone();
                        if ri < rl || (ri == rl && basis[i] < basis[l]) {
                            Some(i)
                        } else {
                            Some(l)
                        }
                    }
                };
            }
            // the phase-one objective is bounded below by zero
            let Some(row) = leave else { break };
            pivot(&mut tab, &mut rhs, &mut cost, &mut objective, row, enter);
            basis[row] = enter;
        }

        if objective.positive_beyond(tol) {
            let y = (0..m)
                .map(|i| {
                    let yi = T::one() - cost[n + i].clone();
                    if signs[i] {
                        -yi
                    } else {
                        yi
                    }
                })
                .collect();
            return Feasibility::Infeasible { y, gap: objective };
        }
        let mut x = vec![T::zero(); n];
        for (i, &b) in basis.iter().enumerate() {
            if b < n {
                x[b] = rhs[i].clone();
            }
        }
        Feasibility::Feasible(x)
    }
}

fn pivot<T: Scalar>(tab: &mut [Vec<T>], rhs: &mut [T], cost: &mut [T], objective: &mut T, row: usize, col: usize) {
    let p = tab[row][col].clone();
    for v in tab[row].iter_mut() {
        *v = v.clone() / p.clone();
    }
    rhs[row] = rhs[row].clone() / p;
    let pivot_row = tab[row].clone();
    let pivot_rhs = rhs[row].clone();
    for (i, r) in tab.iter_mut().enumerate() {
        if i == row || r[col].is_zero() {
            continue;
        }
        let f = r[col].clone();
        for (v, pv) in r.iter_mut().zip(&pivot_row) {
            if !pv.is_zero() {
                *v -= &(f.clone() * pv.clone());
            }
        }
        rhs[i] -= &(f * pivot_rhs.clone());
    }
    let f = cost[col].clone();
    if !f.is_zero() {
        for (v, pv) in cost.iter_mut().zip(&pivot_row) {
            if !pv.is_zero() {
                *v -= &(f.clone() * pv.clone());
            }
        }
        *objective += &(f * pivot_rhs);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rational};
    use num_traits::Signed;

    fn sys(rows: Vec<Vec<i64>>, rhs: Vec<i64>) -> EqualitySystem<Rational> {
        EqualitySystem {
            rows: rows
                .into_iter()
                .map(|r| r.into_iter().map(|v| rat(v, 1)).collect())
                .collect(),
            rhs: rhs.into_iter().map(|v| rat(v, 1)).collect(),
        }
    }

    fn check_solution(s: &EqualitySystem<Rational>, x: &[Rational]) {
        assert!(x.iter().all(|v| !v.is_negative()));
        for (row, b) in s.rows.iter().zip(&s.rhs) {
            let lhs: Rational = row.iter().zip(x).map(|(a, v)| a.clone() * v.clone()).sum();
            assert_eq!(&lhs, b);
        }
    }

    fn check_certificate(s: &EqualitySystem<Rational>, y: &[Rational], gap: &Rational) {
        for j in 0..s.n_vars() {
            let col: Rational = s.rows.iter().zip(y).map(|(r, yi)| r[j].clone() * yi.clone()).sum();
            assert!(!col.is_positive(), "column {j} has yᵀA = {col}");
        }
        let yb: Rational = s.rhs.iter().zip(y).map(|(b, yi)| b.clone() * yi.clone()).sum();
        assert_eq!(&yb, gap);
        assert!(gap.is_positive());
    }

    #[test]
    fn simple_feasible() {
        let s = sys(vec![vec![1, 1, 0], vec![0, 1, 1]], vec![2, 3]);
        match s.solve(0.0) {
            Feasibility::Feasible(x) => check_solution(&s, &x),
            other => panic!("expected feasible, got {other:?}"),
        }
    }

    #[test]
    fn simple_infeasible() {
        // x1 + x2 = 1, x1 + x2 = 2
        let s = sys(vec![vec![1, 1], vec![1, 1]], vec![1, 2]);
        match s.solve(0.0) {
            Feasibility::Infeasible { y, gap } => check_certificate(&s, &y, &gap),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn negative_rhs_and_redundant_rows() {
        // −x1 = −1 twice, x2 − x1 = 0
        let s = sys(vec![vec![-1, 0], vec![-1, 0], vec![-1, 1]], vec![-1, -1, 0]);
        match s.solve(0.0) {
            Feasibility::Feasible(x) => {
                check_solution(&s, &x);
                assert_eq!(x, vec![rat(1, 1), rat(1, 1)]);
            }
            other => panic!("expected feasible, got {other:?}"),
        }
        let s = sys(vec![vec![1, -1]], vec![-3]);
        assert!(matches!(s.solve(0.0), Feasibility::Feasible(_)));
        let s = sys(vec![vec![1, 1]], vec![-3]);
        match s.solve(0.0) {
            Feasibility::Infeasible { y, gap } => check_certificate(&s, &y, &gap),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn float_mode_matches() {
        let s = EqualitySystem {
            rows: vec![vec![0.5, 0.5, 0.0], vec![0.0, 1.0, 1.0]],
            rhs: vec![0.25, 0.75],
        };
        let Feasibility::Feasible(x) = s.solve(1e-12) else {
            panic!("expected feasible")
        };
        assert!((0.5 * x[0] + 0.5 * x[1] - 0.25).abs() < 1e-12);
        assert!((x[1] + x[2] - 0.75).abs() < 1e-12);
    }
}
