//! Immersion and nonimmersion results for N(ℓ) in Euclidean space.
//!
//! Nonimmersions come from the Γ-class of the stable normal bundle η: if
//! 2^{t−1}Γ(η) is not integral then η has no representative of real
//! dimension 2(t−1)+1, so N(ℓ) does not immerse in ℝ^{2m+2t−1}. The
//! existence question in codimension 2m−2 is decided from c_m(η) mod 4
//! and the indeterminacy Sq²y + w₂(η)y.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use serde::Serialize;
use thiserror::Error;

use crate::cohomology::{build_context, reduce_mod, CohRingContext, CohomologyError};
use crate::exact::{
    alpha, binom, binom_is_odd, nu2, nu2_binom, Rational, TruncatedSeries, Valuation,
};
use crate::genetics::{subgee_lattice, GeneticCode};
use crate::ktheory::{
    integrality_gap, strongest_context, KElement, KMode, KMonomial, KRingContext, KTheoryError,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ImmersionError {
    #[error("s = {s} exceeds m = {m}")]
    SizeOutOfRange { m: u32, s: u32 },
    #[error("the immersion criterion needs n >= 5, got n = {0}")]
    TooSmall(usize),
    #[error("{code} is not of the form {{{{n,k,1}}}} with 1 < k < n")]
    NotNk1 { code: String },
    #[error(transparent)]
    KTheory(#[from] KTheoryError),
    #[error(transparent)]
    Cohomology(#[from] CohomologyError),
}

fn half() -> Rational {
    Rational::new(BigInt::one(), BigInt::from(2))
}

/// Γ(η) = Π_{i≤k} (1+α_i)^{−1} · (1+β/2)^{−(m+1)}.
pub fn gamma_normal(kctx: &KRingContext) -> Result<KElement, KTheoryError> {
    let mut acc = kctx.unit_pow(&kctx.beta(), &half(), -(kctx.m() as i64 + 1))?;
    for i in 1..=kctx.k() {
        let factor = kctx.unit_pow(&kctx.alpha(i), &Rational::one(), -1)?;
        acc = kctx.k_mul(&acc, &factor)?;
    }
    Ok(acc)
}

/// Γ(η) from the line bundle splitting of the tangent bundle:
/// Π_{i≤k} Γ(L_i²L_R)^{−1} · Γ(L_R)^{−(m+1−k)} with
/// Γ(L_i²L_R) = 1 + (2α_i + β + α_iβ)/2.
pub fn gamma_normal_via_line_bundles(kctx: &KRingContext) -> Result<KElement, KTheoryError> {
    let m = kctx.m() as i64;
    let k = kctx.k() as i64;
    let mut acc = kctx.unit_pow(&kctx.beta(), &half(), -(m + 1 - k))?;
    for i in 1..=kctx.k() {
        let a = kctx.alpha(i);
        let x = a
            .scale(&Rational::from_integer(2.into()))
            .add(&kctx.beta())
            .add(&kctx.k_mul(&a, &kctx.beta())?);
        let inv = kctx.unit_pow(&x, &half(), -1)?;
        acc = kctx.k_mul(&acc, &inv)?;
    }
    Ok(acc)
}

/// Γ(τ) = Π_{i≤k} (1+α_i) · (1+β/2)^{m+1}.
pub fn gamma_tangent(kctx: &KRingContext) -> Result<KElement, KTheoryError> {
    let mut acc = kctx.unit_pow(&kctx.beta(), &half(), kctx.m() as i64 + 1)?;
    for i in 1..=kctx.k() {
        acc = kctx.k_mul(&acc, &kctx.one().add(&kctx.alpha(i)))?;
    }
    Ok(acc)
}

/// The coordinates of Γ(η) that the presentation lets us trust: all of
/// them for the families, only the pure β^i with i ≤ m−s in general.
pub fn gamma_gap(kctx: &KRingContext, gamma: &KElement) -> u64 {
    match kctx.mode() {
        KMode::GeneralQuotient => integrality_gap(&gamma.pure_beta_part()),
        _ => integrality_gap(gamma),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NonimmersionBound {
    pub mode: KMode,
    pub truncation: u32,
    pub gamma_gap: u64,
    /// N(ℓ) does not immerse in ℝ^dim.
    pub dim: u64,
}

pub fn nonimmersion_dim(code: &GeneticCode) -> Result<NonimmersionBound, ImmersionError> {
    let kctx = strongest_context(code)?;
    let gamma = gamma_normal(&kctx)?;
    let t = gamma_gap(&kctx, &gamma);
    Ok(NonimmersionBound {
        mode: kctx.mode(),
        truncation: kctx.truncation(),
        gamma_gap: t,
        dim: 2 * code.m() as u64 + 2 * t - 1,
    })
}

/// M = max_{0≤i≤m−s} (i − ν binom(m+i, i)).
pub fn m_formula(m: u32, s: u32) -> Result<i64, ImmersionError> {
    if s > m {
        return Err(ImmersionError::SizeOutOfRange { m, s });
    }
    Ok((0..=m - s)
        .map(|i| i as i64 - nu2_binom((m + i) as u64, i as u64) as i64)
        .max()
        .expect("i = 0 is always in range"))
}

pub fn m_formula_dim(m: u32, s: u32) -> Result<i64, ImmersionError> {
    Ok(2 * m as i64 + 2 * m_formula(m, s)? - 1)
}

/// Rows m, columns s, cells 2m + 2M − 1.
pub fn table1(
    m_range: std::ops::RangeInclusive<u32>,
    s_range: std::ops::RangeInclusive<u32>,
) -> Result<Vec<Vec<i64>>, ImmersionError> {
    m_range
        .map(|m| s_range.clone().map(|s| m_formula_dim(m, s)).collect())
        .collect()
}

/// 2m + 2i* − 1 with i* the largest i ≤ m−s having binom(m+i, i) odd,
/// the top nonzero dual Stiefel–Whitney class of (1+R)^{−(m+1)}.
pub fn sw_nonimmersion_dim(m: u32, s: u32) -> Result<i64, ImmersionError> {
    if s > m {
        return Err(ImmersionError::SizeOutOfRange { m, s });
    }
    let i = (0..=m - s)
        .rev()
        .find(|&i| binom_is_odd((m + i) as u64, i as u64))
        .expect("binom(m, 0) = 1 is odd");
    Ok(2 * m as i64 + 2 * i as i64 - 1)
}

/// [x^i] ((1+2x)/(1+x))^{m+1}.
pub fn ratio_coefficient(m: u32, i: u32) -> BigInt {
    (0..=i)
        .map(|j| {
            (BigInt::one() << j as usize)
                * binom(m as i64 + 1, j as u64)
                * binom(-(m as i64 + 1), (i - j) as u64)
        })
        .sum()
}

/// Both sides of Σ_j 2^j C(x,j) C(y,i−j) = Σ_j C(x,j) C(x+y−j, i−j).
pub fn gould_sides(x: i64, y: i64, i: u32) -> (BigInt, BigInt) {
    let lhs = (0..=i)
        .map(|j| (BigInt::one() << j as usize) * binom(x, j as u64) * binom(y, (i - j) as u64))
        .sum();
    let rhs = (0..=i)
        .map(|j| binom(x, j as u64) * binom(x + y - j as i64, (i - j) as u64))
        .sum();
    (lhs, rhs)
}

/// Exact trace of the 2-adic argument for {{n,k,1}}.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Nk1Certificate {
    pub n: usize,
    pub k: usize,
    pub m: u32,
    /// Coordinate of Γ(η) on the basis element α_k^{m−1}.
    #[serde(serialize_with = "crate::catalog::serialize_rational")]
    pub coordinate: Rational,
    #[serde(serialize_with = "crate::catalog::serialize_valuation")]
    pub valuation: Valuation,
    /// α(m) − m.
    pub target: i64,
    /// Smallest valuation among the coefficients of
    /// (1+x)^{m+1}/(1+x/2)^{m+1} that feed α_j^{m−1} through the terms
    /// α_j^t, t ≥ 1.
    #[serde(serialize_with = "crate::catalog::serialize_valuation")]
    pub cancelling_terms_valuation: Valuation,
}

impl Nk1Certificate {
    /// The coordinate is an odd multiple of 2^{α(m)−m}.
    pub fn certifies(&self) -> bool {
        self.valuation == Valuation::Finite(self.target)
    }
}

pub fn refined_nk1_certificate(n: usize, k: usize) -> Result<Nk1Certificate, ImmersionError> {
    let text = format!("{{{{{n},{k},1}}}}");
    let code =
        GeneticCode::parse(&text).map_err(|_| ImmersionError::NotNk1 { code: text.clone() })?;
    let kctx = crate::ktheory::k_context(&code, KMode::FamilyNk1)
        .map_err(|_| ImmersionError::NotNk1 { code: text.clone() })?;
    let m = kctx.m();
    let gamma = gamma_normal(&kctx)?;
    let coordinate = gamma.coeff(&KMonomial::alpha_power(k, m - 1));
    Ok(Nk1Certificate {
        n,
        k,
        m,
        valuation: nu2(&coordinate),
        coordinate,
        target: alpha(m as u64) as i64 - m as i64,
        cancelling_terms_valuation: cancelling_terms_valuation(m),
    })
}

/// Coefficients [x^i] (1+x)^{m+1} / (1+x/2)^{m+1} for i ≤ m−2: the
/// multipliers of α_j^{m−1} coming from α_j^{m−1−i}.
pub fn cancelling_coefficients(m: u32) -> Vec<Rational> {
    let d = m as usize;
    let one_plus = |c: Rational| TruncatedSeries::one_plus(d, c);
    let num = one_plus(Rational::one()).pow(m as i64 + 1).expect("unit");
    let den = one_plus(half()).pow(-(m as i64 + 1)).expect("unit");
    let f = num.mul(&den);
    (0..m.saturating_sub(1))
        .map(|i| f.coeff(i as usize))
        .collect()
}

pub fn cancelling_terms_valuation(m: u32) -> Valuation {
    cancelling_coefficients(m)
        .iter()
        .map(nu2)
        .min()
        .unwrap_or(Valuation::Infinite)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
pub enum Verdict {
    Immerses,
    DoesNotImmerse,
}

/// Whether N(ℓ) immerses in ℝ^{4m−2}.
pub fn immerses_in_4m_minus_2(code: &GeneticCode) -> Result<Verdict, ImmersionError> {
    if code.n() < 5 {
        return Err(ImmersionError::TooSmall(code.n()));
    }
    let ctx = build_context(code)?;
    Ok(immersion_verdict(&ctx))
}

pub fn immersion_verdict(ctx: &CohRingContext) -> Verdict {
    let m = ctx.m();
    let c_m = ctx.chern_normal().component(m);
    let verdict = |ok: bool| {
        if ok {
            Verdict::Immerses
        } else {
            Verdict::DoesNotImmerse
        }
    };
    if !reduce_mod(&c_m, 2).is_zero() {
        // for m odd this is the whole criterion; for m even ρ4(c_m) is not
        // in the image of i_* = multiplication by 2
        return Verdict::DoesNotImmerse;
    }
    if m % 2 == 1 {
        return Verdict::Immerses;
    }
    let two = BigInt::from(2);
    let mut halved = ctx.zero::<BigInt>();
    for (mono, c) in c_m.terms() {
        halved = halved.add(
            &ctx.monomial::<BigInt>(mono.r_exp, mono.v_set)
                .scale(&c.div_floor(&two)),
        );
    }
    let target: Vec<bool> = coords_mod2(ctx, &reduce_mod(&halved, 2), m);
    let w2 = ctx.w2_normal();
    let image: Vec<Vec<bool>> = ctx
        .basis(m - 1)
        .iter()
        .map(|&b| {
            let y = ctx.basis_element_mod(b, 2);
            let sq = ctx.sq2(&y).expect("homogeneous mod 2 class");
            let wy = ctx.mul_mod(&w2, &y).expect("same modulus");
            let sum = reduce_mod(&sq.lift().add(&wy.lift()), 2);
            coords_mod2(ctx, &sum, m)
        })
        .collect();
    verdict(in_span_gf2(&image, &target))
}

fn coords_mod2(ctx: &CohRingContext, x: &crate::cohomology::ModElement, d: usize) -> Vec<bool> {
    ctx.basis(d).iter().map(|b| x.coeff(b) % 2 == 1).collect()
}

fn in_span_gf2(vectors: &[Vec<bool>], target: &[bool]) -> bool {
    let mut rows: Vec<Vec<bool>> = vectors.to_vec();
    let mut t = target.to_vec();
    let mut rank = 0;
    for col in 0..target.len() {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][col]) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[col] {
                row.iter_mut().zip(&pivot).for_each(|(a, b)| *a ^= b);
            }
        }
        if t[col] {
            t.iter_mut().zip(&pivot).for_each(|(a, b)| *a ^= b);
        }
        rank += 1;
    }
    t.iter().all(|&b| !b)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ImmersionReport {
    pub code: GeneticCode,
    pub n: usize,
    pub m: usize,
    pub s: usize,
    pub k: usize,
    pub betti: Vec<usize>,
    pub mode: KMode,
    pub truncation: u32,
    pub gamma_gap: u64,
    pub nonimmersion_dim: u64,
    pub m_formula_dim: i64,
    pub sw_dim: i64,
    /// None for n < 5.
    pub immerses_4m_minus_2: Option<Verdict>,
}

impl ImmersionReport {
    /// Consistency conditions every report must satisfy.
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let m = self.m as i64;
        let dim = self.nonimmersion_dim as i64;
        if dim < self.m_formula_dim {
            out.push(format!(
                "Γ bound {dim} below formula bound {}",
                self.m_formula_dim
            ));
        }
        if self.m_formula_dim < self.sw_dim {
            out.push(format!(
                "formula bound {} below SW bound {}",
                self.m_formula_dim, self.sw_dim
            ));
        }
        if dim > 4 * m - 1 || dim < 2 * m - 1 {
            out.push(format!("bound {dim} outside [2m-1, 4m-1] for m = {m}"));
        }
        if self.immerses_4m_minus_2 == Some(Verdict::Immerses) && dim >= 4 * m - 2 {
            out.push(format!(
                "immersion in R^{} contradicts nonimmersion in R^{dim}",
                4 * m - 2
            ));
        }
        let symmetric = self.betti.iter().eq(self.betti.iter().rev());
        if !symmetric || self.betti.last() != Some(&1) {
            out.push(format!(
                "Betti numbers {:?} fail Poincaré duality",
                self.betti
            ));
        }
        out
    }
}

pub fn immersion_report(code: &GeneticCode) -> Result<ImmersionReport, ImmersionError> {
    let ctx = build_context(code)?;
    let lattice = subgee_lattice(code);
    let m = code.m();
    let s = lattice.s();
    let bound = nonimmersion_dim(code)?;
    let verdict = (code.n() >= 5).then(|| immersion_verdict(&ctx));
    Ok(ImmersionReport {
        code: code.clone(),
        n: code.n(),
        m,
        s,
        k: lattice.k(),
        betti: ctx.betti_numbers(),
        mode: bound.mode,
        truncation: bound.truncation,
        gamma_gap: bound.gamma_gap,
        nonimmersion_dim: bound.dim,
        m_formula_dim: m_formula_dim(m as u32, s as u32)?,
        sw_dim: sw_nonimmersion_dim(m as u32, s as u32)?,
        immerses_4m_minus_2: verdict,
    })
}

/// The pure-β coordinate of β^i in Γ(η): binom(−m−1, i)/2^i.
pub fn expected_beta_coefficient(m: u32, i: u32) -> Rational {
    Rational::new(
        binom(-(m as i64 + 1), i as u64),
        BigInt::one() << i as usize,
    )
}

/// Whether the bound equals 4m − 2α(m) − 1.
pub fn matches_complex_projective_bound(m: u32, dim: u64) -> bool {
    dim as i64 == 4 * m as i64 - 2 * alpha(m as u64) as i64 - 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational;
    use crate::ktheory::k_context;

    fn code(text: &str) -> GeneticCode {
        GeneticCode::parse(text).unwrap()
    }

    #[test]
    fn gamma_two_routes_agree_and_invert_tangent() {
        for text in [
            "{{5,2}}",
            "{{7,3}}",
            "{{7,4,1}}",
            "{{7,5},{7,4,1}}",
            "{{6}}",
        ] {
            let k = strongest_context(&code(text)).unwrap();
            let g = gamma_normal(&k).unwrap();
            assert_eq!(g, gamma_normal_via_line_bundles(&k).unwrap(), "{text}");
            assert_eq!(
                k.k_mul(&g, &gamma_tangent(&k).unwrap()).unwrap(),
                k.one(),
                "{text}"
            );
        }
    }

    #[test]
    fn small_gamma_examples() {
        let k = k_context(&code("{{5,2}}"), KMode::FamilyNk).unwrap();
        let g = gamma_normal(&k).unwrap();
        assert_eq!(g.coeff(&KMonomial::Beta(1)), rational(-3, 2));
        assert_eq!(gamma_gap(&k, &g), 1);
        assert_eq!(nonimmersion_dim(&code("{{5,2}}")).unwrap().dim, 5);
        assert_eq!(nonimmersion_dim(&code("{{5}}")).unwrap().dim, 5);
        for m in 2..=12u32 {
            let c = code(&format!("{{{{{},2}}}}", m + 3));
            let k = strongest_context(&c).unwrap();
            let g = gamma_normal(&k).unwrap();
            assert_eq!(
                g.coeff(&KMonomial::Beta(m - 1)),
                expected_beta_coefficient(m, m - 1)
            );
            assert_eq!(
                nu2(&g.coeff(&KMonomial::Beta(m - 1))),
                Valuation::Finite(alpha(m as u64) as i64 - m as i64)
            );
            assert_eq!(gamma_gap(&k, &g), (m - alpha(m as u64)) as u64);
        }
    }

    #[test]
    fn formula_examples() {
        assert_eq!(m_formula_dim(16, 1).unwrap(), 61);
        assert_eq!(m_formula_dim(16, 8).unwrap(), 47);
        assert_eq!(m_formula_dim(24, 4).unwrap(), 85);
        assert!(matches!(
            m_formula(3, 4),
            Err(ImmersionError::SizeOutOfRange { .. })
        ));
        for m in 1..=64 {
            assert_eq!(
                m_formula(m, 1).unwrap(),
                m as i64 - alpha(m as u64) as i64,
                "m={m}"
            );
            for s in 0..=m {
                assert!(sw_nonimmersion_dim(m, s).unwrap() <= m_formula_dim(m, s).unwrap());
            }
        }
    }

    #[test]
    fn ratio_coefficients_brute_force() {
        // expand ((1+2x)/(1+x))^{m+1} as a truncated series
        for m in 1..=12u32 {
            let base = TruncatedSeries::one_plus(m as usize, rational(2, 1)).mul(
                &TruncatedSeries::one_plus(m as usize, rational(1, 1))
                    .inverse()
                    .unwrap(),
            );
            let p = base.pow(m as i64 + 1).unwrap();
            for i in 0..=m {
                assert_eq!(
                    Rational::from_integer(ratio_coefficient(m, i)),
                    p.coeff(i as usize)
                );
            }
        }
        for x in -5..=5 {
            for y in -5..=5 {
                for i in 0..=6 {
                    let (a, b) = gould_sides(x, y, i);
                    assert_eq!(a, b, "x={x} y={y} i={i}");
                }
            }
        }
    }

    #[test]
    fn nk1_certificates() {
        let c = refined_nk1_certificate(7, 3).unwrap();
        assert_eq!(c.target, -3);
        assert!(c.certifies(), "{c:?}");
        let c = refined_nk1_certificate(7, 4).unwrap();
        assert!(c.valuation > Valuation::Finite(c.target), "{c:?}");
        assert!(matches!(
            refined_nk1_certificate(7, 1),
            Err(ImmersionError::NotNk1 { .. })
        ));
    }

    #[test]
    fn immersion_examples() {
        assert_eq!(
            immerses_in_4m_minus_2(&code("{{5,2}}")).unwrap(),
            Verdict::DoesNotImmerse
        );
        assert_eq!(
            immerses_in_4m_minus_2(&code("{{5,3}}")).unwrap(),
            Verdict::Immerses
        );
        assert_eq!(
            immerses_in_4m_minus_2(&code("{{5,2,1}}")).unwrap(),
            Verdict::Immerses
        );
        assert_eq!(
            immerses_in_4m_minus_2(&code("{{4,1}}")).unwrap_err(),
            ImmersionError::TooSmall(4)
        );
    }

    #[test]
    fn span_over_gf2() {
        assert!(in_span_gf2(
            &[vec![true, false], vec![true, true]],
            &[false, true]
        ));
        assert!(!in_span_gf2(&[vec![true, true]], &[true, false]));
        assert!(in_span_gf2(&[], &[false]));
    }

    #[test]
    fn report_invariants_on_small_codes() {
        for n in 5..=6 {
            for c in crate::genetics::enumerate_codes(n).unwrap() {
                let r = immersion_report(&c).unwrap();
                assert!(
                    r.invariant_violations().is_empty(),
                    "{c}: {:?}",
                    r.invariant_violations()
                );
            }
        }
    }
}
