//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line with its runtime against the budget.

use std::io::Write;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use polyspace::cohomology::build_context;
use polyspace::exact::Valuation;
use polyspace::genetics::{enumerate_codes, genetic_code, realize, GeneticCode, LengthVector};
use polyspace::immersion::{
    gould_sides, immerses_in_4m_minus_2, m_formula_dim, nonimmersion_dim, ratio_coefficient,
    refined_nk1_certificate, sw_nonimmersion_dim, table1, Verdict,
};
use polyspace::ktheory::{chern_oracle, k_context, KMode};

// Runtime budgets are wall-clock; running the criteria one at a time keeps
// them from being charged for each other's work.
static SERIAL: Mutex<()> = Mutex::new(());

fn criterion(number: u32, title: &str, budget: Duration, body: impl FnOnce() -> Vec<String>) {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut failures = body();
    let elapsed = start.elapsed();
    if elapsed > budget {
        failures.push(format!("runtime {elapsed:.2?} exceeds budget {budget:?}"));
    }
    let status = if failures.is_empty() { "PASS" } else { "FAIL" };
    // Written straight to stdout so the line survives the test harness's
    // output capture for passing tests too.
    let mut line = format!("criterion {number}: {status} [{elapsed:.2?} / {budget:?}] {title}\n");
    for f in failures.iter().take(10) {
        line.push_str(&format!("    {f}\n"));
    }
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
    assert!(
        failures.is_empty(),
        "criterion {number} failed: {failures:#?}"
    );
}

fn code(text: &str) -> GeneticCode {
    GeneticCode::parse(text).unwrap()
}

fn popcount(m: u64) -> i64 {
    m.count_ones() as i64
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Descending elementwise domination: |a| ≤ |b| and a_i ≤ b_i.
fn dominated(a: &[usize], b: &[usize]) -> bool {
    a.len() <= b.len() && a.iter().zip(b).all(|(x, y)| x <= y)
}

/// Checks that `genes` is the genetic code of `lengths` straight from the
/// definition: the maximal short sets containing n, under domination.
fn brute_force_code_failures(lengths: &[BigRational], genes: &[Vec<usize>]) -> Vec<String> {
    let n = lengths.len();
    let total: BigRational = lengths.iter().sum();
    let short = |set: &[usize]| {
        let s: BigRational = set.iter().map(|&i| &lengths[i - 1]).sum();
        &s + &s < total
    };
    let mut out = Vec::new();
    for bits in 0u32..(1 << (n - 1)) {
        let mut set: Vec<usize> = (1..n).filter(|i| bits & (1 << (i - 1)) != 0).collect();
        set.push(n);
        set.reverse();
        let below_gene = genes.iter().any(|g| dominated(&set, g));
        if short(&set) != below_gene {
            out.push(format!("{lengths:?}: set {set:?} short = {}", short(&set)));
        }
    }
    out
}

/// ν₂ of binom(a + b, b) as the number of carries when adding a and b in base 2.
fn kummer(a: u64, b: u64) -> i64 {
    popcount(a) + popcount(b) - popcount(a + b)
}

fn binom_i128(x: i64, j: u32) -> i128 {
    let mut num: i128 = 1;
    let mut den: i128 = 1;
    for t in 0..j as i64 {
        num *= (x - t) as i128;
        den *= (t + 1) as i128;
    }
    num / den
}

fn nu2_big(x: &BigInt) -> Option<i64> {
    (!x.is_zero()).then(|| x.trailing_zeros().unwrap() as i64)
}

#[test]
fn criterion_1_family_genetic_codes() {
    criterion(
        1,
        "genetic codes of the family length vectors, 5 <= n <= 12",
        Duration::from_secs(1),
        || {
            let mut failures = Vec::new();
            for n in 5..=12usize {
                let mut nk1_valid = Vec::new();
                for k in 1..n {
                    let mut v: Vec<BigRational> = vec![q(1, 1); k];
                    v.extend(vec![q(2, 1); n - k - 1]);
                    v.push(q(2 * n as i64 - k as i64 - 5, 1));
                    let got = genetic_code(&LengthVector::new(v.clone()).unwrap()).unwrap();
                    if got != code(&format!("{{{{{n},{k}}}}}")) {
                        failures.push(format!("n={n} k={k}: got {got}"));
                    }
                    failures.extend(brute_force_code_failures(&v, &[vec![n, k]]));

                    if k < 2 {
                        continue;
                    }
                    let mut w = vec![q(1, 2)];
                    w.extend(vec![q(1, 1); k - 1]);
                    w.extend(vec![q(2, 1); n - k - 1]);
                    let last = q(2 * n as i64 - k as i64 - 6, 1);
                    if !last.is_positive() || w.iter().any(|x| *x > last) {
                        continue;
                    }
                    w.push(last);
                    nk1_valid.push(k);
                    let got = genetic_code(&LengthVector::new(w.clone()).unwrap()).unwrap();
                    if got != code(&format!("{{{{{n},{k},1}}}}")) {
                        failures.push(format!("n={n} k={k}: got {got}"));
                    }
                    failures.extend(brute_force_code_failures(&w, &[vec![n, k, 1]]));
                }
                let expected: Vec<usize> = if n == 5 { vec![2] } else { (2..n).collect() };
                if nk1_valid != expected {
                    failures.push(format!(
                        "n={n}: valid k for the second family {nk1_valid:?}"
                    ));
                }
            }
            failures
        },
    );
}

#[test]
fn criterion_2_enumeration_count() {
    criterion(
        2,
        "enumerate_codes(7) has 134 nonempty codes",
        Duration::from_secs(300),
        || {
            let codes = enumerate_codes(7).unwrap();
            let mut failures = Vec::new();
            if codes.len() != 134 {
                failures.push(format!("found {} codes", codes.len()));
            }
            if !codes.windows(2).all(|w| w[0] < w[1]) {
                failures.push("codes not strictly increasing".into());
            }
            for c in &codes {
                match realize(c).and_then(|l| genetic_code(&l)) {
                    Ok(back) if back == *c => {}
                    other => failures.push(format!("{c}: realization gives {other:?}")),
                }
            }
            failures
        },
    );
}

/// Reference nonimmersion dimensions, rows m = 16..31, columns s = 1..8.
const PRINTED_TABLE: [[i64; 8]; 16] = [
    [61, 59, 57, 55, 53, 51, 49, 47],
    [63, 61, 61, 57, 57, 53, 53, 49],
    [67, 65, 61, 61, 61, 59, 55, 53],
    [69, 67, 67, 61, 61, 61, 61, 55],
    [75, 73, 71, 69, 63, 61, 61, 61],
    [77, 75, 75, 71, 71, 63, 63, 61],
    [81, 79, 75, 75, 75, 73, 65, 63],
    [83, 81, 81, 75, 75, 75, 75, 65],
    [91, 89, 87, 85, 83, 81, 79, 77],
    [93, 91, 91, 87, 87, 83, 83, 79],
    [97, 95, 91, 91, 91, 89, 85, 83],
    [99, 97, 97, 91, 91, 91, 91, 85],
    [105, 103, 101, 99, 95, 93, 91, 89],
    [107, 105, 105, 101, 101, 95, 95, 91],
    [111, 109, 105, 105, 105, 103, 97, 95],
    [113, 111, 111, 105, 105, 105, 105, 97],
];

/// 2m + 2·max_{i ≤ m−s}(i − ν binom(m+i, i)) − 1 via Kummer.
fn table_cell(m: u64, s: u64) -> i64 {
    let big_m = (0..=m - s).map(|i| i as i64 - kummer(m, i)).max().unwrap();
    2 * m as i64 + 2 * big_m - 1
}

#[test]
fn criterion_3_table1() {
    criterion(
        3,
        "reference dimension table, m = 16..31, s = 1..8",
        Duration::from_secs(1),
        || {
            let grid = table1(16..=31, 1..=8).unwrap();
            let mut failures = Vec::new();
            for (r, m) in (16u64..=31).enumerate() {
                for (c, s) in (1u64..=8).enumerate() {
                    let oracle = table_cell(m, s);
                    if grid[r][c] != oracle {
                        failures.push(format!(
                            "m={m} s={s}: library {} != formula {oracle}",
                            grid[r][c]
                        ));
                    }
                    if grid[r][c] != PRINTED_TABLE[r][c] {
                        failures.push(format!(
                            "m={m} s={s}: computed {}, reference {}",
                            grid[r][c], PRINTED_TABLE[r][c]
                        ));
                    }
                }
            }
            failures
        },
    );
}

#[test]
fn criterion_4_nk_bound() {
    criterion(
        4,
        "{{n,k}} bound 4m-2α(m)-1, 5 <= n <= 20",
        Duration::from_secs(10),
        || {
            let mut failures = Vec::new();
            for n in 5..=20usize {
                let m = n as u64 - 3;
                let expected = 4 * m as i64 - 2 * popcount(m) - 1;
                if table_cell(m, 1) != expected || m_formula_dim(m as u32, 1).unwrap() != expected {
                    failures.push(format!("m={m}: formula disagrees with {expected}"));
                }
                for k in 1..n {
                    let b = nonimmersion_dim(&code(&format!("{{{{{n},{k}}}}}"))).unwrap();
                    if b.dim as i64 != expected || b.mode != KMode::FamilyNk {
                        failures.push(format!("{{{{{n},{k}}}}}: {b:?}, expected {expected}"));
                    }
                }
            }
            failures
        },
    );
}

#[test]
fn criterion_5_nk1_bound() {
    criterion(
        5,
        "{{n,k,1}} bounds and certificate, 5 <= n <= 16",
        Duration::from_secs(30),
        || {
            let mut failures = Vec::new();
            for n in 5..=16usize {
                let m = n as u64 - 3;
                let sharp = 4 * m as i64 - 2 * popcount(m) - 1;
                let realizable: Vec<usize> = (2..n)
                    .filter(|&k| realize(&code(&format!("{{{{{n},{k},1}}}}"))).is_ok())
                    .collect();
                let expected: Vec<usize> = if n == 5 { vec![2] } else { (2..n).collect() };
                if realizable != expected {
                    failures.push(format!("n={n}: realizable k {realizable:?}"));
                }
                for k in realizable {
                    let c = code(&format!("{{{{{n},{k},1}}}}"));
                    let b = nonimmersion_dim(&c).unwrap();
                    let dim = b.dim as i64;
                    let cert = refined_nk1_certificate(n, k).unwrap();
                    let target = popcount(m) - m as i64;
                    if k % 2 == 1 {
                        if dim != sharp {
                            failures.push(format!("{c}: dim {dim}, expected {sharp}"));
                        }
                        if cert.valuation != Valuation::Finite(target) {
                            failures.push(format!(
                                "{c}: certificate valuation {}, expected {target}",
                                cert.valuation
                            ));
                        }
                    } else if dim < sharp - 2 {
                        failures.push(format!("{c}: dim {dim} below {}", sharp - 2));
                    }
                }
            }
            failures
        },
    );
}

#[test]
fn criterion_6_valuation_bound_and_gould() {
    criterion(
        6,
        "ν[x^i]((1+2x)/(1+x))^(m+1) >= i+α(m)-m and Gould identity",
        Duration::from_secs(10),
        || {
            let mut failures = Vec::new();
            for m in 1..=40u32 {
                // (1+x)^{-(m+1)} has [x^r] = (−1)^r binom(m+r, r).
                let mut pascal = vec![vec![BigInt::one()]];
                for row in 1..=(2 * m as usize + 2) {
                    let prev: &Vec<BigInt> = &pascal[row - 1];
                    let mut next = vec![BigInt::one(); row + 1];
                    for j in 1..row {
                        next[j] = &prev[j - 1] + &prev[j];
                    }
                    pascal.push(next);
                }
                let c = |a: usize, b: usize| pascal[a][b].clone();
                for i in 0..m {
                    let oracle: BigInt = (0..=i as usize)
                        .map(|j| {
                            let r = i as usize - j;
                            let sign = if r.is_multiple_of(2) {
                                BigInt::one()
                            } else {
                                -BigInt::one()
                            };
                            (BigInt::one() << j)
                                * c(m as usize + 1, j)
                                * c(m as usize + r, r)
                                * sign
                        })
                        .sum();
                    if ratio_coefficient(m, i) != oracle {
                        failures.push(format!("m={m} i={i}: coefficient mismatch"));
                    }
                    let bound = i as i64 + popcount(m as u64) - m as i64;
                    if let Some(v) = nu2_big(&oracle) {
                        if v < bound {
                            failures.push(format!("m={m} i={i}: ν = {v} < {bound}"));
                        }
                    }
                }
            }
            for x in -20..=20i64 {
                for y in -20..=20i64 {
                    for i in 0..=12u32 {
                        let lhs: i128 = (0..=i)
                            .map(|j| (1i128 << j) * binom_i128(x, j) * binom_i128(y, i - j))
                            .sum();
                        let rhs: i128 = (0..=i)
                            .map(|j| binom_i128(x, j) * binom_i128(x + y - j as i64, i - j))
                            .sum();
                        if lhs != rhs {
                            failures.push(format!("Gould x={x} y={y} i={i}: {lhs} != {rhs}"));
                        }
                        let (l, r) = gould_sides(x, y, i);
                        if l != BigInt::from(lhs) || r != BigInt::from(rhs) {
                            failures.push(format!("Gould x={x} y={y} i={i}: library sides differ"));
                        }
                    }
                }
            }
            failures
        },
    );
}

#[test]
fn criterion_7_immersion_verdicts() {
    criterion(
        7,
        "immersion in R^(4m-2) for both families, 5 <= n <= 12",
        Duration::from_secs(10),
        || {
            let mut failures = Vec::new();
            for n in 5..=12usize {
                let m = n - 3;
                for k in 1..n {
                    let expected = if m.count_ones() == 1 && k % 2 == 0 {
                        Verdict::DoesNotImmerse
                    } else {
                        Verdict::Immerses
                    };
                    let got = immerses_in_4m_minus_2(&code(&format!("{{{{{n},{k}}}}}"))).unwrap();
                    if got != expected {
                        failures.push(format!("{{{{{n},{k}}}}}: {got:?}"));
                    }
                }
                for k in 2..n {
                    let c = code(&format!("{{{{{n},{k},1}}}}"));
                    if realize(&c).is_err() {
                        continue;
                    }
                    let got = immerses_in_4m_minus_2(&c).unwrap();
                    if got != Verdict::Immerses {
                        failures.push(format!("{c}: {got:?}"));
                    }
                }
            }
            failures
        },
    );
}

#[test]
fn criterion_8_ring_oracles() {
    criterion(
        8,
        "ring oracles on every code with n <= 7",
        Duration::from_secs(120),
        || {
            let mut failures = Vec::new();
            let mut family_codes = 0;
            for n in 3..=7usize {
                for c in enumerate_codes(n).unwrap() {
                    let ctx = match build_context(&c) {
                        Ok(ctx) => ctx,
                        Err(e) => {
                            failures.push(format!("{c}: {e}"));
                            continue;
                        }
                    };
                    let m = c.m();
                    let betti = ctx.betti_numbers();
                    if betti.len() != m + 1 || !betti.iter().eq(betti.iter().rev()) || betti[m] != 1
                    {
                        failures.push(format!("{c}: Betti numbers {betti:?}"));
                    }
                    if ctx.rank_above_top() != 0 {
                        failures.push(format!("{c}: nonzero classes above the top grading"));
                    }
                    for d in 0..=m {
                        if ctx.invariant_factors(d).iter().any(|f| !f.is_one()) {
                            failures.push(format!(
                                "{c}: Smith factors {:?} in grading {d}",
                                ctx.invariant_factors(d)
                            ));
                        }
                    }
                    let product = ctx.mul(&ctx.chern_tangent(), &ctx.chern_normal()).unwrap();
                    if product != ctx.one() {
                        failures.push(format!("{c}: c(τ)c(η) = {product}"));
                    }
                    let mode = match c.genes().len() {
                        1 if c.genes()[0].len() == 2 => Some(KMode::FamilyNk),
                        1 if c.genes()[0].len() == 3 && c.genes()[0].contains(1) && c.n() >= 5 => {
                            Some(KMode::FamilyNk1)
                        }
                        _ => None,
                    };
                    let Some(mode) = mode else { continue };
                    let kctx = match k_context(&c, mode) {
                        Ok(k) => k,
                        Err(_) => continue,
                    };
                    family_codes += 1;
                    let report = chern_oracle(&kctx, &ctx).unwrap();
                    for r in report.relations.iter().filter(|r| !r.chern_vanishes) {
                        failures.push(format!("{c}: ch({}) != 0", r.relation));
                    }
                }
            }
            if family_codes < 10 {
                failures.push(format!("only {family_codes} family codes checked"));
            }
            failures
        },
    );
}

#[test]
fn criterion_9_stiefel_whitney_comparison() {
    const K_DIMS: [i64; 16] = [
        61, 63, 67, 69, 75, 77, 81, 83, 91, 93, 97, 99, 105, 107, 111, 113,
    ];
    criterion(
        9,
        "Stiefel-Whitney versus K-theory at s = 1, m = 16..31",
        Duration::from_secs(1),
        || {
            let mut failures = Vec::new();
            let sw: Vec<i64> = (16..=31)
                .map(|m| sw_nonimmersion_dim(m, 1).unwrap())
                .collect();
            // Largest i ≤ m−1 with binom(m+i, i) odd, from Kummer.
            let sw_oracle: Vec<i64> = (16..=31u64)
                .map(|m| {
                    2 * m as i64 + 2 * (0..m).rev().find(|&i| kummer(m, i) == 0).unwrap() as i64 - 1
                })
                .collect();
            if sw != sw_oracle {
                failures.push(format!("SW dimensions {sw:?}, oracle {sw_oracle:?}"));
            }
            if sw.iter().any(|&d| d > 61) || sw.iter().max() != Some(&61) {
                failures.push(format!("SW dimensions {sw:?}"));
            }
            let k: Vec<i64> = (16..=31).map(|m| m_formula_dim(m, 1).unwrap()).collect();
            if k != K_DIMS {
                failures.push(format!("K-theory dimensions {k:?}"));
            }
            let closed: Vec<i64> = (16..=31u64)
                .map(|m| 4 * m as i64 - 2 * popcount(m) - 1)
                .collect();
            if closed != K_DIMS {
                failures.push(format!("4m-2α(m)-1 gives {closed:?}"));
            }
            failures
        },
    );
}
