//! Exhaustive search for realizable genetic codes.
//!
//! A code is the set of maximal elements of its downset of short sets
//! containing n. The search walks the subsets T ⊆ {1, …, n−1} in a linear
//! extension of the order and decides short/long for each one. A set with a
//! long lower cover is forced long; otherwise each choice is kept only if
//! the strict system so far stays feasible. A witness length vector is
//! carried down the tree so only the branch it does not already certify
//! needs an LP.

use num_bigint::BigInt;
use num_traits::Signed;

use super::realize::margin_lp;
use super::{GeneticCode, GeneticsError, SubsetMask};
use crate::exact::Rational;

pub const MAX_ENUMERATION_N: usize = 9;

// Below this depth both branches are explored in parallel.
const PARALLEL_DEPTH: usize = 12;

struct Poset {
    n: usize,
    elements: Vec<SubsetMask>,
    lower: Vec<Vec<usize>>,
    upper: Vec<Vec<usize>>,
}

impl Poset {
    fn new(n: usize) -> Self {
        let mut elements: Vec<SubsetMask> = (0..1u32 << (n - 1)).map(SubsetMask).collect();
        elements.sort_by_key(|t| (t.index_sum(), t.bits()));
        let mut position = vec![0usize; elements.len()];
        for (p, t) in elements.iter().enumerate() {
            position[t.bits() as usize] = p;
        }
        let lower = elements
            .iter()
            .map(|t| {
                t.lower_covers()
                    .iter()
                    .map(|c| position[c.bits() as usize])
                    .collect()
            })
            .collect();
        let upper = elements
            .iter()
            .map(|t| {
                t.upper_covers(n - 1)
                    .iter()
                    .map(|c| position[c.bits() as usize])
                    .collect()
            })
            .collect();
        Poset {
            n,
            elements,
            lower,
            upper,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Short,
    Long,
}

/// Weights of a witness scaled to integers; `short(T)` is exact.
#[derive(Clone)]
struct Witness {
    weights: Vec<BigInt>,
    total: BigInt,
}

impl Witness {
    fn new(lengths: &[Rational]) -> Self {
        let lcm = lengths.iter().fold(BigInt::from(1), |acc, x| {
            num_integer::Integer::lcm(&acc, x.denom())
        });
        let weights: Vec<BigInt> = lengths
            .iter()
            .map(|x| x.numer() * (&lcm / x.denom()))
            .collect();
        let total = weights.iter().sum();
        Witness { weights, total }
    }

    fn status(&self, t: SubsetMask) -> Option<Status> {
        let n = self.weights.len();
        let inside: BigInt =
            t.iter().map(|i| &self.weights[i - 1]).sum::<BigInt>() + &self.weights[n - 1];
        let twice = inside * 2;
        if twice < self.total {
            Some(Status::Short)
        } else if twice > self.total {
            Some(Status::Long)
        } else {
            None
        }
    }
}

/// All realizable genetic codes with at least one gene, canonically sorted.
pub fn enumerate_codes(n: usize) -> Result<Vec<GeneticCode>, GeneticsError> {
    if !(3..=MAX_ENUMERATION_N).contains(&n) {
        return Err(GeneticsError::UnsupportedRange {
            n,
            max: MAX_ENUMERATION_N,
        });
    }
    let poset = Poset::new(n);
    let mut status = vec![None; poset.elements.len()];
    // the empty set comes first: {n} must be short
    status[0] = Some(Status::Short);
    let Some(witness) = feasible(&poset, &status) else {
        return Ok(Vec::new());
    };
    let downsets = search(&poset, 1, status, witness);
    let mut codes = downsets
        .into_iter()
        .map(|d| to_code(&poset, &d))
        .collect::<Result<Vec<_>, _>>()?;
    codes.sort();
    codes.dedup();
    Ok(codes)
}

fn search(
    poset: &Poset,
    pos: usize,
    mut status: Vec<Option<Status>>,
    witness: Witness,
) -> Vec<Vec<Option<Status>>> {
    if pos == poset.elements.len() {
        return vec![status];
    }
    if poset.lower[pos]
        .iter()
        .any(|&c| status[c] == Some(Status::Long))
    {
        status[pos] = Some(Status::Long);
        return search(poset, pos + 1, status, witness);
    }

    let t = poset.elements[pos];
    let certified = witness.status(t);
    let branch = |choice: Status| -> Vec<Vec<Option<Status>>> {
        let mut next = status.clone();
        next[pos] = Some(choice);
        if certified == Some(choice) {
            return search(poset, pos + 1, next, witness.clone());
        }
        match feasible(poset, &next) {
            Some(w) => search(poset, pos + 1, next, w),
            None => Vec::new(),
        }
    };
    if pos < PARALLEL_DEPTH {
        let (mut a, b) = rayon::join(|| branch(Status::Short), || branch(Status::Long));
        a.extend(b);
        a
    } else {
        let mut a = branch(Status::Short);
        a.extend(branch(Status::Long));
        a
    }
}

/// Strict feasibility of the decided statuses, imposing only the maximal
/// decided short sets and minimal decided long sets.
fn feasible(poset: &Poset, status: &[Option<Status>]) -> Option<Witness> {
    let mut short = Vec::new();
    let mut long = Vec::new();
    for (p, s) in status.iter().enumerate() {
        match s {
            Some(Status::Short)
                if !poset.upper[p]
                    .iter()
                    .any(|&c| status[c] == Some(Status::Short)) =>
            {
                short.push(poset.elements[p]);
            }
            Some(Status::Long)
                if !poset.lower[p]
                    .iter()
                    .any(|&c| status[c] == Some(Status::Long)) =>
            {
                long.push(poset.elements[p]);
            }
            _ => {}
        }
    }
    let (margin, lengths) = margin_lp(poset.n, &short, &long);
    margin.is_positive().then(|| Witness::new(&lengths))
}

fn to_code(poset: &Poset, status: &[Option<Status>]) -> Result<GeneticCode, GeneticsError> {
    let n = poset.n;
    let top = SubsetMask::singleton(n);
    let genes = status
        .iter()
        .enumerate()
        .filter(|(p, s)| {
            **s == Some(Status::Short)
                && !poset.upper[*p]
                    .iter()
                    .any(|&c| status[c] == Some(Status::Short))
        })
        .map(|(p, _)| poset.elements[p].union(top))
        .collect();
    GeneticCode::new(n, genes)
}
