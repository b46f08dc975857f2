//! Integer row echelon forms and Smith normal form invariants.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Row echelon form of an integer lattice, reduced above every pivot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Echelon {
    pub rows: Vec<Vec<BigInt>>,
    /// Pivot column of each row, strictly increasing.
    pub pivots: Vec<usize>,
    pub ncols: usize,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn unit_pivots(&self) -> bool {
        self.rows
            .iter()
            .zip(&self.pivots)
            .all(|(r, &c)| r[c].is_one())
    }

    /// Columns without a pivot.
    pub fn free_columns(&self) -> Vec<usize> {
        let mut is_pivot = vec![false; self.ncols];
        for &p in &self.pivots {
            is_pivot[p] = true;
        }
        (0..self.ncols).filter(|&c| !is_pivot[c]).collect()
    }
}

/// Hermite-style echelon form: integer row operations only, pivots positive,
/// entries above each pivot reduced into [0, pivot).
pub fn echelon(mut rows: Vec<Vec<BigInt>>, ncols: usize) -> Echelon {
    rows.retain(|r| r.iter().any(|x| !x.is_zero()));
    let mut pivots = Vec::new();
    let mut top = 0;
    for col in 0..ncols {
        if top == rows.len() {
            break;
        }
        while let Some(best) = (top..rows.len())
            .filter(|&i| !rows[i][col].is_zero())
            .min_by(|&a, &b| rows[a][col].abs().cmp(&rows[b][col].abs()))
        {
            rows.swap(top, best);
            let mut clean = true;
            for i in top + 1..rows.len() {
                if rows[i][col].is_zero() {
                    continue;
                }
                let q = rows[i][col].div_floor(&rows[top][col]);
                let (head, tail) = rows.split_at_mut(i);
                axpy(&mut tail[0], &q, &head[top]);
                if !tail[0][col].is_zero() {
                    clean = false;
                }
            }
            if clean {
                if rows[top][col].is_negative() {
                    for x in rows[top].iter_mut() {
                        *x = -&*x;
                    }
                }
                pivots.push(col);
                top += 1;
                break;
            }
        }
    }
    rows.truncate(top);
    for (p, &col) in pivots.iter().enumerate() {
        for i in 0..p {
            if rows[i][col].is_zero() {
                continue;
            }
            let q = rows[i][col].div_floor(&rows[p][col]);
            let (head, tail) = rows.split_at_mut(p);
            axpy(&mut head[i], &q, &tail[0]);
        }
    }
    Echelon {
        rows,
        pivots,
        ncols,
    }
}

// target -= q * source
fn axpy(target: &mut [BigInt], q: &BigInt, source: &[BigInt]) {
    for (t, s) in target.iter_mut().zip(source) {
        if !s.is_zero() {
            *t -= q * s;
        }
    }
}

/// Nonzero Smith normal form diagonal d_1 | d_2 | … of an integer matrix.
pub fn invariant_factors(matrix: &[Vec<BigInt>], ncols: usize) -> Vec<BigInt> {
    let mut a: Vec<Vec<BigInt>> = matrix
        .iter()
        .filter(|r| r.iter().any(|x| !x.is_zero()))
        .cloned()
        .collect();
    let nrows = a.len();
    let mut diag = Vec::new();
    let mut t = 0;
    while t < nrows.min(ncols) {
        // smallest nonzero entry in the remaining block
        let mut best: Option<(usize, usize)> = None;
        for i in t..nrows {
            for j in t..ncols {
                if a[i][j].is_zero() {
                    continue;
                }
                if best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        a.swap(t, bi);
        for row in a.iter_mut() {
            row.swap(t, bj);
        }
        let mut dirty = false;
        for i in t + 1..nrows {
            if a[i][t].is_zero() {
                continue;
            }
            let q = a[i][t].div_floor(&a[t][t]);
            let (head, tail) = a.split_at_mut(i);
            axpy(&mut tail[0], &q, &head[t]);
            dirty |= !tail[0][t].is_zero();
        }
        for j in t + 1..ncols {
            if a[t][j].is_zero() {
                continue;
            }
            let q = a[t][j].div_floor(&a[t][t]);
            for row in a.iter_mut() {
                let s = row[t].clone();
                if !s.is_zero() {
                    row[j] -= &q * s;
                }
            }
            dirty |= !a[t][j].is_zero();
        }
        if dirty {
            continue;
        }
        // divisibility: fold any entry not divisible by the pivot into row t
        let p = a[t][t].clone();
        let offender = (t + 1..nrows).find(|&i| (t + 1..ncols).any(|j| !(&a[i][j] % &p).is_zero()));
        if let Some(i) = offender {
            let (head, tail) = a.split_at_mut(i);
            for (x, y) in head[t].iter_mut().zip(tail[0].iter()) {
                *x += y;
            }
            continue;
        }
        diag.push(p.abs());
        t += 1;
    }
    diag
}

/// Determinant by fraction-free elimination (Bareiss).
pub fn determinant(matrix: &[Vec<BigInt>]) -> BigInt {
    let n = matrix.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a = matrix.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}
