//! Regression suite over the published results: family genetic codes, the
//! n = 7 count, the reference dimension table, the Γ bounds for both families, the binomial
//! valuation bound, immersion verdicts, ring oracles and the
//! Stiefel–Whitney comparison.

use rayon::prelude::*;
use serde::Serialize;

use crate::cohomology::{build_context, relation_check_family};
use crate::exact::{alpha, nu2_int, Valuation};
use crate::genetics::{
    enumerate_codes, family_nk1_lengths, family_nk_lengths, genetic_code, realize, GeneticCode,
};
use crate::immersion::{
    cancelling_terms_valuation, gould_sides, immerses_in_4m_minus_2, m_formula, m_formula_dim,
    nonimmersion_dim, ratio_coefficient, refined_nk1_certificate, sw_nonimmersion_dim, Verdict,
};
use crate::ktheory::{chern_oracle, strongest_context};

/// Reference nonimmersion dimensions 2m + 2M(m,s) − 1: rows m = 16..31, columns s = 1..8.
pub const TABLE1: [[i64; 8]; 16] = [
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

/// K-theory nonimmersion dimensions of {{n,k}} for m = 16..31.
pub const K_THEORY_DIMS: [i64; 16] = [
    61, 63, 67, 69, 75, 77, 81, 83, 91, 93, 97, 99, 105, 107, 111, 113,
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// First failures, empty when the check passes.
    pub failures: Vec<String>,
}

impl Check {
    fn new(name: &str, failures: Vec<String>) -> Self {
        Check {
            name: name.to_string(),
            passed: failures.is_empty(),
            failures: failures.into_iter().take(20).collect(),
        }
    }
}

fn code(text: &str) -> GeneticCode {
    GeneticCode::parse(text).expect("well-formed literal")
}

/// Codes {{n,k,1}} that some length vector realizes.
pub fn realizable_nk1(n: usize) -> Vec<usize> {
    (2..n)
        .filter(|&k| realize(&code(&format!("{{{{{n},{k},1}}}}"))).is_ok())
        .collect()
}

pub fn check_family_codes() -> Check {
    let mut failures = Vec::new();
    for n in 5..=12 {
        for k in 1..n {
            if let Some(l) = family_nk_lengths(n, k) {
                let expected = code(&format!("{{{{{n},{k}}}}}"));
                match genetic_code(&l) {
                    Ok(c) if c == expected => {}
                    other => failures.push(format!("{l}: {other:?}, expected {expected}")),
                }
            }
            if k > 1 {
                if let Some(l) = family_nk1_lengths(n, k) {
                    let expected = code(&format!("{{{{{n},{k},1}}}}"));
                    match genetic_code(&l) {
                        Ok(c) if c == expected => {}
                        other => failures.push(format!("{l}: {other:?}, expected {expected}")),
                    }
                }
            }
        }
    }
    Check::new("family genetic codes, n = 5..12", failures)
}

pub fn check_enumeration_count() -> Check {
    let failures = match enumerate_codes(7) {
        Ok(codes) if codes.len() == 134 => Vec::new(),
        Ok(codes) => vec![format!("found {} codes", codes.len())],
        Err(e) => vec![e.to_string()],
    };
    Check::new("134 nonempty genetic codes for n = 7", failures)
}

pub fn check_table1() -> Check {
    let mut failures = Vec::new();
    for (row, m) in TABLE1.iter().zip(16u32..) {
        for (&expected, s) in row.iter().zip(1u32..) {
            let got = m_formula_dim(m, s).expect("s <= m");
            if got != expected {
                failures.push(format!("m={m} s={s}: computed {got}, table {expected}"));
            }
        }
    }
    Check::new("reference dimension table, m = 16..31, s = 1..8", failures)
}

pub fn check_nk_bounds() -> Check {
    let failures: Vec<String> = (5..=20usize)
        .into_par_iter()
        .flat_map_iter(|n| {
            (1..n).filter_map(move |k| {
                let m = (n - 3) as u32;
                let expected = 4 * m as u64 - 2 * alpha(m as u64) as u64 - 1;
                let got = nonimmersion_dim(&code(&format!("{{{{{n},{k}}}}}"))).map(|b| b.dim);
                let formula = m_formula_dim(m, 1).ok();
                (got.as_ref().ok() != Some(&expected) || formula != Some(expected as i64)).then(
                    || {
                        format!(
                            "{{{{{n},{k}}}}}: Γ {got:?}, formula {formula:?}, expected {expected}"
                        )
                    },
                )
            })
        })
        .collect();
    Check::new("{{n,k}} Γ bound 4m-2α(m)-1, n = 5..20", failures)
}

pub fn check_nk1_bounds() -> Check {
    let failures: Vec<String> = (5..=16usize)
        .into_par_iter()
        .flat_map_iter(|n| {
            realizable_nk1(n).into_iter().filter_map(move |k| {
                let m = (n - 3) as i64;
                let base = 4 * m - 2 * alpha(m as u64) as i64;
                let dim = match nonimmersion_dim(&code(&format!("{{{{{n},{k},1}}}}"))) {
                    Ok(b) => b.dim as i64,
                    Err(e) => return Some(format!("{{{{{n},{k},1}}}}: {e}")),
                };
                let cert = match refined_nk1_certificate(n, k) {
                    Ok(c) => c,
                    Err(e) => return Some(format!("{{{{{n},{k},1}}}}: {e}")),
                };
                let ok = if k % 2 == 1 {
                    dim == base - 1 && cert.certifies()
                } else {
                    dim >= base - 3
                };
                let cancel_ok = cert.cancelling_terms_valuation >= Valuation::Finite(cert.target);
                (!ok || !cancel_ok)
                    .then(|| format!("{{{{{n},{k},1}}}}: dim {dim}, certificate {cert:?}"))
            })
        })
        .collect();
    Check::new("{{n,k,1}} Γ bounds and certificates, n = 5..16", failures)
}

pub fn check_binomial_valuations() -> Check {
    let mut failures = Vec::new();
    for m in 1..=40u32 {
        let a = alpha(m as u64) as i64;
        for i in 0..m {
            let v = nu2_int(&ratio_coefficient(m, i));
            if v < Valuation::Finite(i as i64 + a - m as i64) {
                failures.push(format!("m={m} i={i}: valuation {v}"));
            }
        }
        if m >= 2 && cancelling_terms_valuation(m) < Valuation::Finite(a - m as i64) {
            failures.push(format!("m={m}: cancelling terms below α(m)-m"));
        }
    }
    for x in -20..=20 {
        for y in -20..=20 {
            for i in 0..=12 {
                let (l, r) = gould_sides(x, y, i);
                if l != r {
                    failures.push(format!("Gould x={x} y={y} i={i}: {l} != {r}"));
                }
            }
        }
    }
    Check::new(
        "valuation bound for ((1+2x)/(1+x))^(m+1) and Gould identity",
        failures,
    )
}

pub fn check_verdicts() -> Check {
    let mut failures = Vec::new();
    for n in 5..=12usize {
        let m = n - 3;
        for k in 1..n {
            let expected = if m.is_power_of_two() && k % 2 == 0 {
                Verdict::DoesNotImmerse
            } else {
                Verdict::Immerses
            };
            match immerses_in_4m_minus_2(&code(&format!("{{{{{n},{k}}}}}"))) {
                Ok(v) if v == expected => {}
                other => failures.push(format!("{{{{{n},{k}}}}}: {other:?}")),
            }
        }
        for k in realizable_nk1(n) {
            match immerses_in_4m_minus_2(&code(&format!("{{{{{n},{k},1}}}}"))) {
                Ok(Verdict::Immerses) => {}
                other => failures.push(format!("{{{{{n},{k},1}}}}: {other:?}")),
            }
        }
    }
    Check::new(
        "immersion in R^(4m-2) for both families, n = 5..12",
        failures,
    )
}

/// Ring-level oracles on one code; returns the failures.
pub fn ring_oracle_failures(c: &GeneticCode) -> Vec<String> {
    let mut out = Vec::new();
    let ctx = match build_context(c) {
        Ok(ctx) => ctx,
        Err(e) => return vec![format!("{c}: {e}")],
    };
    let betti = ctx.betti_numbers();
    if !betti.iter().eq(betti.iter().rev()) || betti.last() != Some(&1) || ctx.rank_above_top() != 0
    {
        out.push(format!("{c}: Betti numbers {betti:?}"));
    }
    for d in 0..=ctx.m() {
        if ctx
            .invariant_factors(d)
            .iter()
            .any(|f| *f != num_bigint::BigInt::from(1))
        {
            out.push(format!("{c}: torsion in grading {d}"));
        }
    }
    let product = ctx.mul(&ctx.chern_tangent(), &ctx.chern_normal());
    if product.as_ref() != Ok(&ctx.one()) {
        out.push(format!("{c}: c(τ)c(η) = {product:?}"));
    }
    if let Some(report) = relation_check_family(&ctx) {
        out.extend(report.failures().map(|f| format!("{c}: {}", f.claim)));
    }
    match strongest_context(c).and_then(|k| chern_oracle(&k, &ctx)) {
        Ok(r) if r.consistent() => {}
        other => out.push(format!("{c}: K-theory oracle {other:?}")),
    }
    out
}

pub fn check_ring_oracles() -> Check {
    let codes: Vec<GeneticCode> = (3..=7)
        .flat_map(|n| enumerate_codes(n).unwrap_or_default())
        .collect();
    let failures: Vec<String> = codes
        .par_iter()
        .flat_map_iter(ring_oracle_failures)
        .collect();
    Check::new("ring oracles on all codes with n <= 7", failures)
}

pub fn check_stiefel_whitney() -> Check {
    let mut failures = Vec::new();
    let sw: Vec<i64> = (16..=31)
        .map(|m| sw_nonimmersion_dim(m, 1).expect("s <= m"))
        .collect();
    if sw.iter().any(|&d| d > 61) || sw.iter().max() != Some(&61) {
        failures.push(format!("SW dimensions {sw:?}"));
    }
    let k: Vec<i64> = (16..=31u32)
        .map(|m| 2 * m as i64 + 2 * m_formula(m, 1).expect("s <= m") - 1)
        .collect();
    if k != K_THEORY_DIMS {
        failures.push(format!("K-theory dimensions {k:?}"));
    }
    Check::new("Stiefel-Whitney versus K-theory, m = 16..31", failures)
}

pub fn run_all() -> Vec<Check> {
    vec![
        check_family_codes(),
        check_enumeration_count(),
        check_table1(),
        check_nk_bounds(),
        check_nk1_bounds(),
        check_binomial_valuations(),
        check_verdicts(),
        check_ring_oracles(),
        check_stiefel_whitney(),
    ]
}
