//! Complex K-theory of N(ℓ) with α_i = [L_i − 1] and β = [L_R − 1].
//!
//! Elements are stored in a normal form without mixed α·β monomials. On
//! multiples of α_S every α_j with j ∈ S acts the same way, and β acts as
//! −a/(1+a) where a is any of them, so a monomial is either a power of β or
//! α_S·a^t with S a nonempty subgee.
//!
//! Three presentations are available: the closed forms for the {{n,k}} and
//! {{n,k,1}} families, and for any code the quotient by products of more
//! than m−s generators.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::cohomology::{next_context_id, CohRingContext, CohomElement, CohomologyError};
use crate::exact::{binom, nu2, Rational, TruncatedSeries};
use crate::genetics::{subgee_lattice, Family, GeneticCode, SubgeeLattice, SubsetMask};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KTheoryError {
    #[error("the empty genetic code describes an empty space")]
    EmptyCode,
    #[error("mode {mode} does not apply to code {code}")]
    ModeMismatch { code: String, mode: KMode },
    #[error("elements belong to different ring contexts")]
    ContextMismatch,
    #[error(transparent)]
    Cohomology(#[from] CohomologyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KMode {
    FamilyNk,
    FamilyNk1,
    GeneralQuotient,
}

impl KMode {
    pub fn name(self) -> &'static str {
        match self {
            KMode::FamilyNk => "family_nk",
            KMode::FamilyNk1 => "family_nk1",
            KMode::GeneralQuotient => "general_quotient",
        }
    }
}

impl fmt::Display for KMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for KMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "family_nk" => Ok(KMode::FamilyNk),
            "family_nk1" => Ok(KMode::FamilyNk1),
            "general_quotient" | "general" => Ok(KMode::GeneralQuotient),
            other => Err(format!(
                "unknown mode {other:?}, expected family_nk, family_nk1 or general_quotient"
            )),
        }
    }
}

/// β^i (β^0 = 1) or α_S·a^{degree−|S|}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KMonomial {
    Beta(u32),
    Alpha { support: SubsetMask, degree: u32 },
}

impl KMonomial {
    pub fn one() -> Self {
        KMonomial::Beta(0)
    }

    /// α_i^p
    pub fn alpha_power(i: usize, p: u32) -> Self {
        KMonomial::Alpha {
            support: SubsetMask::singleton(i),
            degree: p,
        }
    }

    /// α_1·α_i^p
    pub fn alpha_one_times(i: usize, p: u32) -> Self {
        KMonomial::Alpha {
            support: SubsetMask::from_elements([1, i]),
            degree: p + 1,
        }
    }

    pub fn degree(&self) -> u32 {
        match *self {
            KMonomial::Beta(i) => i,
            KMonomial::Alpha { degree, .. } => degree,
        }
    }

    pub fn is_pure_beta(&self) -> bool {
        matches!(self, KMonomial::Beta(_))
    }

    fn key(&self) -> (u32, u8, SubsetMask) {
        match *self {
            KMonomial::Beta(i) => (i, 0, SubsetMask::EMPTY),
            KMonomial::Alpha { support, degree } => (degree, 1, support),
        }
    }
}

impl Ord for KMonomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for KMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for KMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            KMonomial::Beta(0) => f.write_str("1"),
            KMonomial::Beta(1) => f.write_str("b"),
            KMonomial::Beta(i) => write!(f, "b^{i}"),
            KMonomial::Alpha { support, degree } => {
                // the extra powers go on the largest index
                let top = support.max_element().expect("nonempty support");
                let extra = degree - support.len() as u32 + 1;
                let mut parts: Vec<String> = support
                    .without(top)
                    .iter()
                    .map(|i| format!("a{i}"))
                    .collect();
                if extra == 1 {
                    parts.push(format!("a{top}"));
                } else {
                    parts.push(format!("a{top}^{extra}"));
                }
                f.write_str(&parts.join("*"))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KElement {
    ctx_id: u64,
    terms: BTreeMap<KMonomial, Rational>,
}

impl KElement {
    pub fn terms(&self) -> &BTreeMap<KMonomial, Rational> {
        &self.terms
    }

    pub fn coeff(&self, mono: &KMonomial) -> Rational {
        self.terms.get(mono).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &KElement) -> KElement {
        assert_eq!(self.ctx_id, other.ctx_id, "context mismatch");
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            add_term(&mut terms, *m, c.clone());
        }
        KElement {
            ctx_id: self.ctx_id,
            terms,
        }
    }

    pub fn sub(&self, other: &KElement) -> KElement {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> KElement {
        KElement {
            ctx_id: self.ctx_id,
            terms: if c.is_zero() {
                BTreeMap::new()
            } else {
                self.terms.iter().map(|(m, x)| (*m, x * c)).collect()
            },
        }
    }

    /// The β^i components, i ≥ 0.
    pub fn pure_beta_part(&self) -> KElement {
        KElement {
            ctx_id: self.ctx_id,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.is_pure_beta())
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }
}

impl fmt::Display for KElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| format!("({c})*{m}"))
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

fn add_term(terms: &mut BTreeMap<KMonomial, Rational>, m: KMonomial, c: Rational) {
    if c.is_zero() {
        return;
    }
    let entry = terms.entry(m).or_insert_with(Rational::zero);
    *entry += c;
    if entry.is_zero() {
        terms.remove(&m);
    }
}

/// Least t with 2^t·x integral in the basis coordinates of x.
pub fn integrality_gap(x: &KElement) -> u64 {
    x.terms
        .values()
        .filter_map(|c| nu2(c).finite())
        .map(|v| (-v).max(0) as u64)
        .max()
        .unwrap_or(0)
}

/// A ring presentation of K(N(ℓ)) in normal form.
#[derive(Debug, Clone)]
pub struct KRingContext {
    id: u64,
    code: GeneticCode,
    mode: KMode,
    lattice: SubgeeLattice,
    m: u32,
    k: usize,
    truncation: u32,
    basis: Vec<KMonomial>,
}

pub fn k_context(code: &GeneticCode, mode: KMode) -> Result<KRingContext, KTheoryError> {
    if code.is_empty() {
        return Err(KTheoryError::EmptyCode);
    }
    let matches = matches!(
        (mode, code.family()),
        (KMode::GeneralQuotient, _)
            | (KMode::FamilyNk, Some(Family::Nk { .. }))
            | (KMode::FamilyNk1, Some(Family::Nk1 { .. }))
    );
    if !matches {
        return Err(KTheoryError::ModeMismatch {
            code: code.to_string(),
            mode,
        });
    }
    let lattice = subgee_lattice(code);
    let m = code.m() as u32;
    let k = lattice.k();
    let truncation = match mode {
        KMode::GeneralQuotient => m - lattice.s() as u32,
        _ => m,
    };
    let mut ctx = KRingContext {
        id: next_context_id(),
        code: code.clone(),
        mode,
        lattice,
        m,
        k,
        truncation,
        basis: Vec::new(),
    };
    ctx.basis = ctx.build_basis();
    Ok(ctx)
}

/// Family presentation when the code has one, else the general quotient.
pub fn strongest_context(code: &GeneticCode) -> Result<KRingContext, KTheoryError> {
    let mode = match code.family() {
        Some(Family::Nk { .. }) => KMode::FamilyNk,
        Some(Family::Nk1 { .. }) => KMode::FamilyNk1,
        None => KMode::GeneralQuotient,
    };
    k_context(code, mode)
}

impl KRingContext {
    pub fn code(&self) -> &GeneticCode {
        &self.code
    }

    pub fn mode(&self) -> KMode {
        self.mode
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Products of more generators than this vanish (or are discarded).
    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    pub fn basis(&self) -> &[KMonomial] {
        &self.basis
    }

    fn build_basis(&self) -> Vec<KMonomial> {
        let m = self.m;
        let k = self.k;
        let mut out = vec![KMonomial::one()];
        match self.mode {
            KMode::GeneralQuotient => {
                let t = self.truncation;
                out.extend((1..=t).map(KMonomial::Beta));
                for &s in self.lattice.members() {
                    if s.is_empty() {
                        continue;
                    }
                    for p in s.len() as u32..=t {
                        out.push(KMonomial::Alpha {
                            support: s,
                            degree: p,
                        });
                    }
                }
            }
            KMode::FamilyNk => {
                out.extend((1..=m).map(|j| KMonomial::alpha_power(1, j)));
                for j in 1..m {
                    out.extend((2..=k).map(|i| KMonomial::alpha_power(i, j)));
                    out.push(KMonomial::Beta(j));
                }
            }
            KMode::FamilyNk1 => {
                for j in 1..m.saturating_sub(1) {
                    out.extend((1..=k).map(|i| KMonomial::alpha_power(i, j)));
                    out.push(KMonomial::Beta(j));
                    out.extend((2..=k).map(|i| KMonomial::alpha_one_times(i, j)));
                }
                if m >= 2 {
                    out.push(KMonomial::alpha_power(1, m - 1));
                    out.push(KMonomial::alpha_power(k, m - 1));
                }
                out.push(KMonomial::alpha_one_times(k, m - 1));
            }
        }
        out.sort();
        out.dedup();
        out
    }

    fn check(&self, x: &KElement) -> Result<(), KTheoryError> {
        if x.ctx_id == self.id {
            Ok(())
        } else {
            Err(KTheoryError::ContextMismatch)
        }
    }

    pub fn zero(&self) -> KElement {
        KElement {
            ctx_id: self.id,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(&self, c: Rational) -> KElement {
        self.normalize(vec![(KMonomial::one(), c)])
    }

    pub fn one(&self) -> KElement {
        self.constant(Rational::one())
    }

    pub fn beta(&self) -> KElement {
        self.normalize(vec![(KMonomial::Beta(1), Rational::one())])
    }

    /// α_i, zero unless {i} is a subgee.
    pub fn alpha(&self, i: usize) -> KElement {
        self.normalize(vec![(KMonomial::alpha_power(i, 1), Rational::one())])
    }

    /// A normal-form monomial reduced in this context.
    pub fn monomial(&self, mono: KMonomial) -> KElement {
        self.normalize(vec![(mono, Rational::one())])
    }

    pub fn k_mul(&self, x: &KElement, y: &KElement) -> Result<KElement, KTheoryError> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.mul_unchecked(x, y))
    }

    fn mul_unchecked(&self, x: &KElement, y: &KElement) -> KElement {
        let mut raw = Vec::new();
        for (a, ca) in &x.terms {
            for (b, cb) in &y.terms {
                if a.degree() + b.degree() > self.truncation {
                    continue;
                }
                let c = ca * cb;
                self.raw_product(*a, *b, &c, &mut raw);
            }
        }
        self.normalize(raw)
    }

    fn raw_product(
        &self,
        a: KMonomial,
        b: KMonomial,
        c: &Rational,
        out: &mut Vec<(KMonomial, Rational)>,
    ) {
        use KMonomial::*;
        match (a, b) {
            (Beta(i), Beta(j)) => out.push((Beta(i + j), c.clone())),
            (
                Alpha {
                    support: s,
                    degree: p,
                },
                Alpha {
                    support: t,
                    degree: q,
                },
            ) => {
                let u = s.union(t);
                if self.lattice.contains(u) {
                    out.push((
                        Alpha {
                            support: u,
                            degree: p + q,
                        },
                        c.clone(),
                    ));
                }
            }
            (Alpha { support, degree }, Beta(i)) | (Beta(i), Alpha { support, degree }) => {
                if i == 0 {
                    out.push((Alpha { support, degree }, c.clone()));
                    return;
                }
                // β^i acts as (−a)^i (1+a)^{−i}
                let sign = if i % 2 == 0 {
                    Rational::one()
                } else {
                    -Rational::one()
                };
                for t in 0..=self.truncation.saturating_sub(degree + i) {
                    let coeff = Rational::from_integer(binom(-(i as i64), t as u64));
                    out.push((
                        Alpha {
                            support,
                            degree: degree + i + t,
                        },
                        c * &sign * coeff,
                    ));
                }
            }
        }
    }

    fn normalize(&self, raw: Vec<(KMonomial, Rational)>) -> KElement {
        let mut terms = BTreeMap::new();
        for (mono, c) in raw {
            for (m, f) in self.rewrite(mono) {
                add_term(&mut terms, m, &c * f);
            }
        }
        KElement {
            ctx_id: self.id,
            terms,
        }
    }

    /// Expresses one monomial in the basis.
    fn rewrite(&self, mono: KMonomial) -> Vec<(KMonomial, Rational)> {
        let d = mono.degree();
        if d > self.truncation {
            return Vec::new();
        }
        if let KMonomial::Alpha { support, .. } = mono {
            if !self.lattice.contains(support) {
                return Vec::new();
            }
        }
        let m = self.m;
        let k = self.k;
        let int = |x: i64| Rational::from_integer(BigInt::from(x));
        let sign = |e: u32| if e.is_multiple_of(2) { 1 } else { -1 };
        match self.mode {
            KMode::GeneralQuotient => vec![(mono, Rational::one())],
            KMode::FamilyNk => {
                if d < m {
                    return vec![(mono, Rational::one())];
                }
                let top = KMonomial::alpha_power(1, m);
                match mono {
                    KMonomial::Beta(_) => vec![(top, int(sign(m) * (k as i64 - 1)))],
                    KMonomial::Alpha { .. } => vec![(top, Rational::one())],
                }
            }
            KMode::FamilyNk1 => {
                let single = |mono: KMonomial| match mono {
                    KMonomial::Alpha { support, .. } if support.len() == 1 => support.max_element(),
                    _ => None,
                };
                if d + 1 == m && d > 0 {
                    match mono {
                        KMonomial::Beta(_) => {
                            vec![(KMonomial::alpha_power(k, d), int(sign(d) * (k as i64 - 2)))]
                        }
                        _ => match single(mono) {
                            Some(i) if i >= 2 => {
                                vec![(KMonomial::alpha_power(k, d), Rational::one())]
                            }
                            _ => vec![(mono, Rational::one())],
                        },
                    }
                } else if d == m {
                    let gen = KMonomial::alpha_one_times(k, m - 1);
                    match mono {
                        KMonomial::Beta(0) => vec![(mono, Rational::one())],
                        KMonomial::Beta(_) => Vec::new(),
                        _ => match single(mono) {
                            Some(1) => vec![(gen, int(k as i64 - 2))],
                            Some(_) => Vec::new(),
                            None => vec![(gen, Rational::one())],
                        },
                    }
                } else {
                    vec![(mono, Rational::one())]
                }
            }
        }
    }

    /// Σ_j c_j x^j for x without constant term.
    pub fn series_eval(
        &self,
        series: &TruncatedSeries,
        x: &KElement,
    ) -> Result<KElement, KTheoryError> {
        self.check(x)?;
        let mut acc = self.zero();
        let mut power = self.one();
        for j in 0..=series.degree().min(self.truncation as usize) {
            let c = series.coeff(j);
            if !c.is_zero() {
                acc = acc.add(&power.scale(&c));
            }
            power = self.mul_unchecked(&power, x);
            if power.is_zero() {
                break;
            }
        }
        Ok(acc)
    }

    /// (1 + c·x)^e for x without constant term.
    pub fn unit_pow(&self, x: &KElement, c: &Rational, e: i64) -> Result<KElement, KTheoryError> {
        let base = TruncatedSeries::one_plus(self.truncation as usize, c.clone());
        let series = base.pow(e).expect("unit constant term");
        self.series_eval(&series, x)
    }

    /// Coordinates of x in the basis order.
    pub fn coordinates(&self, x: &KElement) -> Vec<Rational> {
        self.basis.iter().map(|b| x.coeff(b)).collect()
    }

    /// Evaluates a polynomial in the generators.
    pub fn eval_poly(&self, p: &KPoly) -> KElement {
        let mut acc = self.zero();
        for (mono, c) in &p.terms {
            let mut x = self.one();
            for _ in 0..mono.b_exp {
                x = self.mul_unchecked(&x, &self.beta());
            }
            for (idx, &e) in mono.a_exps.iter().enumerate() {
                for _ in 0..e {
                    x = self.mul_unchecked(&x, &self.alpha(idx + 1));
                }
            }
            acc = acc.add(&x.scale(c));
        }
        acc
    }

    /// The defining relations of this presentation, plus derived ones for
    /// the families, as polynomials in α_i and β.
    pub fn relations(&self) -> Vec<KRelation> {
        let m = self.m;
        let k = self.k;
        let mut out = Vec::new();
        let cap = self.truncation + 1;
        for i in 1..=k {
            out.push(KRelation::new(
                format!("a{i}*b + a{i}^2/(1+a{i}) = 0"),
                KPoly::alpha_beta_relation(k, i, cap),
            ));
        }
        // products over minimal non-subgees of {1..k}
        for bits in 1u32..(1 << k) {
            let t = SubsetMask(bits);
            if self.lattice.contains(t)
                || !t
                    .lower_covers_by_removal()
                    .iter()
                    .all(|&c| self.lattice.contains(c))
            {
                continue;
            }
            let exps: Vec<u32> = (1..=k).map(|i| u32::from(t.contains(i))).collect();
            let name = t
                .iter()
                .map(|i| format!("a{i}"))
                .collect::<Vec<_>>()
                .join("*");
            out.push(KRelation::new(
                format!("{name} = 0"),
                KPoly::monomial(k, 0, &exps),
            ));
        }
        let power = |i: usize, e: u32| {
            let mut exps = vec![0; k];
            exps[i - 1] = e;
            KPoly::monomial(k, 0, &exps)
        };
        let beta = |e: u32| KPoly::monomial(k, e, &vec![0; k]);
        let sign = |e: u32| if e.is_multiple_of(2) { 1i64 } else { -1 };
        match self.mode {
            KMode::GeneralQuotient => {}
            KMode::FamilyNk => {
                for i in 2..=k {
                    out.push(KRelation::new(
                        format!("a1^{m} = a{i}^{m}"),
                        power(1, m).sub(&power(i, m)),
                    ));
                }
                for i in 1..=k {
                    out.push(KRelation::new(
                        format!("b^{m} = (-1)^{m}({k}-1) a{i}^{m}"),
                        beta(m).sub(&power(i, m).scale_int(sign(m) * (k as i64 - 1))),
                    ));
                    out.push(KRelation::new(
                        format!("a{i}^{} = 0", m + 1),
                        power(i, m + 1),
                    ));
                }
                out.push(KRelation::new(format!("b^{} = 0", m + 1), beta(m + 1)));
            }
            KMode::FamilyNk1 => {
                let d = m - 1;
                for j in 2..k {
                    out.push(KRelation::new(
                        format!("a{j}^{d} = a{k}^{d}"),
                        power(j, d).sub(&power(k, d)),
                    ));
                }
                out.push(KRelation::new(
                    format!("b^{d} = (-1)^{d}({k}-2) a{k}^{d}"),
                    beta(d).sub(&power(k, d).scale_int(sign(d) * (k as i64 - 2))),
                ));
                for i in 2..=k {
                    for j in 1..m {
                        for t in 2..=m - j {
                            let mut exps = vec![0; k];
                            exps[0] = t;
                            exps[i - 1] = j;
                            let mut rhs = vec![0; k];
                            rhs[0] = 1;
                            rhs[i - 1] = j + t - 1;
                            out.push(KRelation::new(
                                format!("a1^{t}*a{i}^{j} = a1*a{i}^{}", j + t - 1),
                                KPoly::monomial(k, 0, &exps).sub(&KPoly::monomial(k, 0, &rhs)),
                            ));
                        }
                    }
                    out.push(KRelation::new(format!("a{i}^{m} = 0"), power(i, m)));
                }
                out.push(KRelation::new(format!("b^{m} = 0"), beta(m)));
                let mut top = vec![0; k];
                top[0] = 1;
                top[k - 1] = m - 1;
                out.push(KRelation::new(
                    format!("a1^{m} = ({k}-2) a1*a{k}^{}", m - 1),
                    power(1, m).sub(&KPoly::monomial(k, 0, &top).scale_int(k as i64 - 2)),
                ));
            }
        }
        out
    }
}

trait RemovalCovers {
    fn lower_covers_by_removal(self) -> Vec<SubsetMask>;
}

impl RemovalCovers for SubsetMask {
    fn lower_covers_by_removal(self) -> Vec<SubsetMask> {
        self.iter().map(|i| self.without(i)).collect()
    }
}

/// β^{b_exp} Π α_i^{a_exps[i−1]} with no normal-form rewriting.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RawMonomial {
    pub b_exp: u32,
    pub a_exps: Vec<u32>,
}

impl RawMonomial {
    pub fn degree(&self) -> u32 {
        self.b_exp + self.a_exps.iter().sum::<u32>()
    }
}

/// A polynomial in the generators α_1, …, α_k, β.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct KPoly {
    pub terms: BTreeMap<RawMonomial, Rational>,
}

impl KPoly {
    pub fn monomial(k: usize, b_exp: u32, a_exps: &[u32]) -> Self {
        let mut a = a_exps.to_vec();
        a.resize(k, 0);
        let mut terms = BTreeMap::new();
        terms.insert(RawMonomial { b_exp, a_exps: a }, Rational::one());
        KPoly { terms }
    }

    pub fn add(&self, other: &KPoly) -> KPoly {
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            let e = terms.entry(m.clone()).or_insert_with(Rational::zero);
            *e += c;
            if e.is_zero() {
                terms.remove(m);
            }
        }
        KPoly { terms }
    }

    pub fn sub(&self, other: &KPoly) -> KPoly {
        self.add(&other.scale_int(-1))
    }

    pub fn scale_int(&self, c: i64) -> KPoly {
        let c = Rational::from_integer(BigInt::from(c));
        KPoly {
            terms: if c.is_zero() {
                BTreeMap::new()
            } else {
                self.terms
                    .iter()
                    .map(|(m, x)| (m.clone(), x * &c))
                    .collect()
            },
        }
    }

    /// α_i·β + Σ_{t≥0} (−1)^t α_i^{t+2}, through degree `cap`.
    pub fn alpha_beta_relation(k: usize, i: usize, cap: u32) -> KPoly {
        let mut exps = vec![0; k];
        exps[i - 1] = 1;
        let mut p = KPoly::monomial(k, 1, &exps);
        for t in 0..=cap.saturating_sub(2) {
            exps[i - 1] = t + 2;
            p = p.add(&KPoly::monomial(k, 0, &exps).scale_int(if t % 2 == 0 { 1 } else { -1 }));
        }
        p
    }
}

impl fmt::Display for KPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut factors = Vec::new();
                match m.b_exp {
                    0 => {}
                    1 => factors.push("b".to_string()),
                    e => factors.push(format!("b^{e}")),
                }
                for (i, &e) in m.a_exps.iter().enumerate() {
                    match e {
                        0 => {}
                        1 => factors.push(format!("a{}", i + 1)),
                        e => factors.push(format!("a{}^{e}", i + 1)),
                    }
                }
                let body = if factors.is_empty() {
                    "1".to_string()
                } else {
                    factors.join("*")
                };
                format!("({c})*{body}")
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KRelation {
    pub name: String,
    pub poly: KPoly,
}

impl KRelation {
    fn new(name: String, poly: KPoly) -> Self {
        KRelation { name, poly }
    }
}

/// ch(α_i) = e^{V_i} − 1 and ch(β) = e^R − 1, as elements of the rational
/// cohomology ring.
struct ChernImages {
    beta: CohomElement<Rational>,
    alphas: Vec<CohomElement<Rational>>,
}

fn chern_images(kctx: &KRingContext, cctx: &CohRingContext) -> Result<ChernImages, KTheoryError> {
    if kctx.code != *cctx.code() {
        return Err(KTheoryError::ContextMismatch);
    }
    let e = TruncatedSeries::exp_minus_one(cctx.m());
    let beta = cctx.eval_series(&e, &cctx.r())?;
    let alphas = (1..=kctx.k)
        .map(|i| cctx.eval_series(&e, &cctx.v(i)))
        .collect::<Result<_, _>>()?;
    Ok(ChernImages { beta, alphas })
}

fn ch_pow(cctx: &CohRingContext, x: &CohomElement<Rational>, e: u32) -> CohomElement<Rational> {
    cctx.pow(x, e)
}

/// The Chern character of a K-theory element, in rational cohomology.
pub fn chern_character(
    x: &KElement,
    kctx: &KRingContext,
    cctx: &CohRingContext,
) -> Result<CohomElement<Rational>, KTheoryError> {
    kctx.check(x)?;
    let images = chern_images(kctx, cctx)?;
    let mut acc = cctx.zero();
    for (mono, c) in &x.terms {
        let image = match *mono {
            KMonomial::Beta(i) => ch_pow(cctx, &images.beta, i),
            KMonomial::Alpha { support, degree } => {
                let top = support.max_element().expect("nonempty support");
                let mut y = ch_pow(
                    cctx,
                    &images.alphas[top - 1],
                    degree - support.len() as u32 + 1,
                );
                for i in support.without(top).iter() {
                    y = cctx.mul(&y, &images.alphas[i - 1])?;
                }
                y
            }
        };
        acc = acc.add(&image.scale(c));
    }
    Ok(acc)
}

/// The Chern character of a polynomial in the generators, computed
/// directly in cohomology.
pub fn chern_of_poly(
    p: &KPoly,
    kctx: &KRingContext,
    cctx: &CohRingContext,
) -> Result<CohomElement<Rational>, KTheoryError> {
    let images = chern_images(kctx, cctx)?;
    let mut acc = cctx.zero();
    for (mono, c) in &p.terms {
        let mut y = ch_pow(cctx, &images.beta, mono.b_exp);
        for (idx, &e) in mono.a_exps.iter().enumerate() {
            if e > 0 {
                y = cctx.mul(&y, &ch_pow(cctx, &images.alphas[idx], e))?;
            }
        }
        acc = acc.add(&y.scale(c));
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelationCheck {
    pub relation: String,
    /// ch(relation) vanishes in the trusted gradings.
    pub chern_vanishes: bool,
    /// The relation reduces to zero in normal form.
    pub normal_form_vanishes: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KOracleReport {
    pub code: String,
    pub mode: KMode,
    pub truncation: u32,
    pub relations: Vec<RelationCheck>,
    /// Leading ch terms of the basis form a ℤ-basis of each cohomology group.
    pub basis_unimodular: bool,
    /// ch(x·y) = ch(x)·ch(y) on all pairs of basis monomials.
    pub multiplicative: bool,
}

impl KOracleReport {
    pub fn consistent(&self) -> bool {
        self.basis_unimodular
            && self.multiplicative
            && self
                .relations
                .iter()
                .all(|r| r.chern_vanishes && r.normal_form_vanishes)
    }
}

/// Checks a K-theory presentation against the Chern character.
pub fn chern_oracle(
    kctx: &KRingContext,
    cctx: &CohRingContext,
) -> Result<KOracleReport, KTheoryError> {
    let t = kctx.truncation as usize;
    let trusted = |x: &CohomElement<Rational>| x.truncate(t).is_zero();
    let mut relations = Vec::new();
    for rel in kctx.relations() {
        let ch = chern_of_poly(&rel.poly, kctx, cctx)?;
        relations.push(RelationCheck {
            relation: rel.name,
            chern_vanishes: trusted(&ch),
            normal_form_vanishes: kctx.eval_poly(&rel.poly).is_zero(),
        });
    }

    let mut basis_unimodular = true;
    for d in 0..=t {
        let leading: Vec<CohomElement<BigInt>> = kctx
            .basis
            .iter()
            .filter(|b| b.degree() as usize == d)
            .map(|b| {
                let ch = chern_character(&kctx.monomial(*b), kctx, cctx)?.component(d);
                Ok(to_integral(cctx, &ch))
            })
            .collect::<Result<_, KTheoryError>>()?;
        basis_unimodular &= cctx.is_integral_basis(&leading, d);
    }

    let mut multiplicative = true;
    let images: Vec<(KElement, CohomElement<Rational>)> = kctx
        .basis
        .iter()
        .map(|b| {
            let x = kctx.monomial(*b);
            let ch = chern_character(&x, kctx, cctx)?;
            Ok((x, ch))
        })
        .collect::<Result<_, KTheoryError>>()?;
    for (i, (x, cx)) in images.iter().enumerate() {
        for (y, cy) in &images[i..] {
            let lhs = chern_character(&kctx.mul_unchecked(x, y), kctx, cctx)?;
            let rhs = cctx.mul(cx, cy)?;
            if !trusted(&lhs.sub(&rhs)) {
                multiplicative = false;
            }
        }
    }
    Ok(KOracleReport {
        code: kctx.code.to_string(),
        mode: kctx.mode,
        truncation: kctx.truncation,
        relations,
        basis_unimodular,
        multiplicative,
    })
}

fn to_integral(cctx: &CohRingContext, x: &CohomElement<Rational>) -> CohomElement<BigInt> {
    let mut acc = cctx.zero::<BigInt>();
    for (mono, c) in x.terms() {
        if !c.is_integer() {
            // not integral: cannot be part of a ℤ-basis
            return cctx.zero();
        }
        let term = cctx
            .monomial::<BigInt>(mono.r_exp, mono.v_set)
            .scale(&c.to_integer());
        acc = acc.add(&term);
    }
    acc
}
