use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::lp::{maximize, LpOutcome};
use super::{genetic_code, subgee_lattice, GeneticCode, GeneticsError, LengthVector, SubsetMask};
use crate::exact::Rational;

/// Finds a generic length vector with the given genetic code.
///
/// Every set containing n is short iff it lies below a gene; shortness of
/// the remaining sets is then forced by complements. With ℓ sorted, only the
/// genes and the minimal long sets need to be imposed, each with a common
/// margin t that the LP maximizes.
pub fn realize(code: &GeneticCode) -> Result<LengthVector, GeneticsError> {
    // re-validate: codes can be built from deserialized data
    let code = GeneticCode::new(code.n(), code.genes().to_vec())?;
    let n = code.n();
    if code.is_empty() {
        // {n} long: one huge side
        let mut v = vec![1i64; n];
        v[n - 1] = n as i64;
        return LengthVector::from_integers(&v);
    }
    let lattice = subgee_lattice(&code);
    let short: Vec<SubsetMask> = code.gees().collect();
    let long: Vec<SubsetMask> = (0..1u32 << (n - 1))
        .map(SubsetMask)
        .filter(|&t| !lattice.contains(t) && t.lower_covers().iter().all(|&c| lattice.contains(c)))
        .collect();
    let (margin, witness) = margin_lp(n, &short, &long);
    if !margin.is_positive() {
        return Err(GeneticsError::Unrealizable {
            code: code.to_string(),
            margin,
        });
    }
    let lengths = LengthVector::new(witness)?;
    let primitive: Vec<Rational> = lengths
        .to_primitive_integers()
        .into_iter()
        .map(Rational::from_integer)
        .collect();
    let lengths = LengthVector::new(primitive)?;
    let back = genetic_code(&lengths)?;
    if back != code {
        return Err(GeneticsError::Internal(format!(
            "witness {lengths} realizes {back}, expected {code}"
        )));
    }
    Ok(lengths)
}

/// Maximizes t subject to: T∪{n} short by margin t for T in `short`, long by
/// margin t for T in `long`, t ≤ ℓ_1 ≤ … ≤ ℓ_n ≤ 1.
///
/// Returns the optimal margin and the optimal ℓ rescaled so that ℓ_n = 1.
pub(crate) fn margin_lp(
    n: usize,
    short: &[SubsetMask],
    long: &[SubsetMask],
) -> (Rational, Vec<Rational>) {
    let one = || Rational::one();
    let zero = || Rational::zero();
    let vars = n + 1;
    let t = n;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();

    let mut side_row = |set: SubsetMask, sign: i64| {
        let top = SubsetMask::singleton(n);
        let a = set.union(top);
        let mut row = vec![zero(); vars];
        for i in 1..=n {
            let c = if a.contains(i) { sign } else { -sign };
            row[i - 1] = Rational::from_integer(BigInt::from(c));
        }
        row[t] = one();
        rows.push(row);
        rhs.push(zero());
    };
    for &s in short {
        side_row(s, 1);
    }
    for &l in long {
        side_row(l, -1);
    }

    let mut row = vec![zero(); vars];
    row[t] = one();
    row[0] = -one();
    rows.push(row);
    rhs.push(zero());
    for i in 0..n - 1 {
        let mut row = vec![zero(); vars];
        row[i] = one();
        row[i + 1] = -one();
        rows.push(row);
        rhs.push(zero());
    }
    let mut row = vec![zero(); vars];
    row[n - 1] = one();
    rows.push(row);
    rhs.push(one());

    let mut objective = vec![zero(); vars];
    objective[t] = one();

    match maximize(&objective, &rows, &rhs) {
        LpOutcome::Optimal {
            value,
            mut solution,
        } => {
            solution.truncate(n);
            let top = solution[n - 1].clone();
            if top.is_positive() {
                for x in solution.iter_mut() {
                    *x /= &top;
                }
            }
            (value, solution)
        }
        LpOutcome::Unbounded => unreachable!("margin is bounded by l_n <= 1"),
    }
}
