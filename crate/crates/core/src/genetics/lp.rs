//! Dense exact simplex for `maximize c·x subject to A x ≤ b, x ≥ 0` with
//! `b ≥ 0`, so the slack basis is feasible from the start. Bland's rule
//! keeps the degenerate (mostly homogeneous) systems used here from cycling.

use num_traits::{Signed, Zero};

use crate::exact::Rational;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal {
        value: Rational,
        solution: Vec<Rational>,
    },
    Unbounded,
}

/// Panics if `rhs` has a negative entry or the row widths disagree.
pub fn maximize(objective: &[Rational], rows: &[Vec<Rational>], rhs: &[Rational]) -> LpOutcome {
    let vars = objective.len();
    let cons = rows.len();
    assert_eq!(cons, rhs.len());
    assert!(
        rhs.iter().all(|b| !b.is_negative()),
        "initial basis must be feasible"
    );
    let width = vars + cons + 1;

    // row i: [A_i | e_i | b_i]; last row holds reduced costs and −z
    let mut table: Vec<Vec<Rational>> = Vec::with_capacity(cons + 1);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), vars);
        let mut r = Vec::with_capacity(width);
        r.extend(row.iter().cloned());
        r.extend((0..cons).map(|j| {
            if i == j {
                Rational::from_integer(1.into())
            } else {
                Rational::zero()
            }
        }));
        r.push(rhs[i].clone());
        table.push(r);
    }
    let mut cost = Vec::with_capacity(width);
    cost.extend(objective.iter().cloned());
    cost.resize(width, Rational::zero());
    table.push(cost);
    let mut basis: Vec<usize> = (vars..vars + cons).collect();

    while let Some(enter) = (0..vars + cons).find(|&j| table[cons][j].is_positive()) {
        let mut leave: Option<(usize, Rational)> = None;
        for i in 0..cons {
            let a = &table[i][enter];
            if !a.is_positive() {
                continue;
            }
            let ratio = &table[i][width - 1] / a;
            let better = match &leave {
                None => true,
                Some((li, best)) => ratio < *best || (ratio == *best && basis[i] < basis[*li]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        let Some((pivot_row, _)) = leave else {
            return LpOutcome::Unbounded;
        };
        pivot(&mut table, pivot_row, enter);
        basis[pivot_row] = enter;
    }

    let mut solution = vec![Rational::zero(); vars];
    for (i, &b) in basis.iter().enumerate() {
        if b < vars {
            solution[b] = table[i][width - 1].clone();
        }
    }
    LpOutcome::Optimal {
        value: -table[cons][width - 1].clone(),
        solution,
    }
}

fn pivot(table: &mut [Vec<Rational>], row: usize, col: usize) {
    let p = table[row][col].clone();
    for x in table[row].iter_mut() {
        if !x.is_zero() {
            *x /= &p;
        }
    }
    let pivot_row = table[row].clone();
    for (i, r) in table.iter_mut().enumerate() {
        if i == row || r[col].is_zero() {
            continue;
        }
        let f = r[col].clone();
        for (x, y) in r.iter_mut().zip(pivot_row.iter()) {
            if !y.is_zero() {
                *x -= &f * y;
            }
        }
    }
}
