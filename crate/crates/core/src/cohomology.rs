//! The integral cohomology ring H*(N(ℓ)), generated by degree-2 classes R
//! and V_i subject to:
//!
//! * V_S = 0 unless S is a subgee,
//! * R·V_i + V_i² = 0,
//! * for every subgee T with |T| ≥ n−2−d, Σ_{S ∩ T = ∅} R^{d−|S|} V_S = 0 in
//!   grading d.
//!
//! Monomials are kept squarefree in V (V_i² is rewritten as −R·V_i on the
//! spot), so grading d is spanned by finitely many R^{d−|S|} V_S. Each
//! grading stores the echelon form of its relation lattice; the columns
//! without a pivot are the basis monomials.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::Neg;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Num, One, Zero};
use thiserror::Error;

use crate::exact::{series_pow, Rational, TruncatedSeries};
use crate::genetics::{subgee_lattice, Family, GeneticCode, SubgeeLattice, SubsetMask};
use crate::linalg::{echelon, invariant_factors, Echelon};

static NEXT_CONTEXT_ID: AtomicU64 = AtomicU64::new(1);

pub(crate) fn next_context_id() -> u64 {
    NEXT_CONTEXT_ID.fetch_add(1, AtomicOrdering::Relaxed)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CohomologyError {
    #[error("the empty genetic code describes an empty space")]
    EmptyCode,
    #[error("elements belong to different ring contexts")]
    ContextMismatch,
    #[error("grading {degree} has torsion: invariant factors {factors:?}")]
    Torsion { degree: usize, factors: Vec<BigInt> },
    #[error("grading {degree} has no monomial basis in the fixed column order")]
    NonMonomialBasis { degree: usize },
    #[error("expected a homogeneous element, found gradings {0:?}")]
    NotHomogeneous(Vec<usize>),
    #[error("operation needs coefficients mod {expected}, found mod {found}")]
    WrongModulus { expected: u32, found: u32 },
    #[error("coefficient {0} is not an integer")]
    NonIntegral(Rational),
}

/// R^r_exp · V_{v_set} with `v_set` a subgee.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct CohMonomial {
    pub r_exp: u32,
    pub v_set: SubsetMask,
}

impl CohMonomial {
    pub fn new(r_exp: u32, v_set: SubsetMask) -> Self {
        CohMonomial { r_exp, v_set }
    }

    pub fn one() -> Self {
        Self::new(0, SubsetMask::EMPTY)
    }

    /// Grading index d; the cohomological degree is 2d.
    pub fn grading(&self) -> usize {
        self.r_exp as usize + self.v_set.len()
    }
}

// grading, then higher R-powers first, then the subset order
impl Ord for CohMonomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.grading()
            .cmp(&other.grading())
            .then_with(|| other.r_exp.cmp(&self.r_exp))
            .then_with(|| self.v_set.cmp(&other.v_set))
    }
}

impl PartialOrd for CohMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for CohMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.r_exp {
            0 => {}
            1 => parts.push("R".to_string()),
            r => parts.push(format!("R^{r}")),
        }
        for i in self.v_set.iter() {
            parts.push(format!("V{i}"));
        }
        if parts.is_empty() {
            f.write_str("1")
        } else {
            f.write_str(&parts.join("*"))
        }
    }
}

/// Coefficient rings for cohomology elements: ℤ and ℚ.
pub trait Coeff:
    Clone + fmt::Debug + fmt::Display + PartialEq + Num + Neg<Output = Self> + Send + Sync
{
    fn from_int(x: &BigInt) -> Self;
    fn from_rational(x: &Rational) -> Option<Self>;
}

impl Coeff for BigInt {
    fn from_int(x: &BigInt) -> Self {
        x.clone()
    }

    fn from_rational(x: &Rational) -> Option<Self> {
        x.is_integer().then(|| x.to_integer())
    }
}

impl Coeff for Rational {
    fn from_int(x: &BigInt) -> Self {
        Rational::from_integer(x.clone())
    }

    fn from_rational(x: &Rational) -> Option<Self> {
        Some(x.clone())
    }
}

/// A class in H*(N(ℓ)) written in the basis monomials of its context.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohomElement<C> {
    ctx_id: u64,
    terms: BTreeMap<CohMonomial, C>,
}

impl<C: Coeff> CohomElement<C> {
    pub fn terms(&self) -> &BTreeMap<CohMonomial, C> {
        &self.terms
    }

    pub fn coeff(&self, mono: &CohMonomial) -> C {
        self.terms.get(mono).cloned().unwrap_or_else(C::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Gradings with a nonzero component.
    pub fn gradings(&self) -> Vec<usize> {
        let mut g: Vec<usize> = self.terms.keys().map(|m| m.grading()).collect();
        g.dedup();
        g
    }

    pub fn homogeneous_grading(&self) -> Option<usize> {
        match self.gradings().as_slice() {
            [] => Some(0),
            [d] => Some(*d),
            _ => None,
        }
    }

    /// The component [x]_{2d}.
    pub fn component(&self, d: usize) -> Self {
        self.filter(|m| m.grading() == d)
    }

    /// Components of grading ≤ d.
    pub fn truncate(&self, d: usize) -> Self {
        self.filter(|m| m.grading() <= d)
    }

    fn filter(&self, keep: impl Fn(&CohMonomial) -> bool) -> Self {
        CohomElement {
            ctx_id: self.ctx_id,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.ctx_id, other.ctx_id, "context mismatch");
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            let entry = terms.entry(*m).or_insert_with(C::zero);
            *entry = entry.clone() + c.clone();
            if entry.is_zero() {
                terms.remove(m);
            }
        }
        CohomElement {
            ctx_id: self.ctx_id,
            terms,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-C::one()))
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return CohomElement {
                ctx_id: self.ctx_id,
                terms: BTreeMap::new(),
            };
        }
        CohomElement {
            ctx_id: self.ctx_id,
            terms: self
                .terms
                .iter()
                .map(|(m, x)| (*m, x.clone() * c.clone()))
                .collect(),
        }
    }
}

impl<C: Coeff> fmt::Display for CohomElement<C> {
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

/// Coefficients reduced into [0, modulus).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModElement {
    ctx_id: u64,
    modulus: u32,
    terms: BTreeMap<CohMonomial, u32>,
}

impl ModElement {
    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn terms(&self) -> &BTreeMap<CohMonomial, u32> {
        &self.terms
    }

    pub fn coeff(&self, mono: &CohMonomial) -> u32 {
        self.terms.get(mono).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn component(&self, d: usize) -> Self {
        ModElement {
            ctx_id: self.ctx_id,
            modulus: self.modulus,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.grading() == d)
                .map(|(m, c)| (*m, *c))
                .collect(),
        }
    }

    /// Integer lift with coefficients in [0, modulus).
    pub fn lift(&self) -> CohomElement<BigInt> {
        CohomElement {
            ctx_id: self.ctx_id,
            terms: self
                .terms
                .iter()
                .map(|(m, &c)| (*m, BigInt::from(c)))
                .collect(),
        }
    }
}

impl fmt::Display for ModElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(m, c)| format!("{c}*{m}")).collect();
        write!(f, "{} (mod {})", parts.join(" + "), self.modulus)
    }
}

pub fn reduce_mod(x: &CohomElement<BigInt>, modulus: u32) -> ModElement {
    let q = BigInt::from(modulus);
    let terms = x
        .terms
        .iter()
        .filter_map(|(m, c)| {
            let r: u32 = c.mod_floor(&q).try_into().expect("residue fits");
            (r != 0).then_some((*m, r))
        })
        .collect();
    ModElement {
        ctx_id: x.ctx_id,
        modulus,
        terms,
    }
}

#[derive(Debug, Clone)]
struct Grading {
    /// Candidate monomials in elimination order: pivots are taken from the
    /// front, so later columns are preferred as basis elements.
    monomials: Vec<CohMonomial>,
    column: HashMap<CohMonomial, usize>,
    relations: Echelon,
    basis: Vec<CohMonomial>,
    invariant_factors: Vec<BigInt>,
}

/// Presentation of H*(N(ℓ)) for one genetic code.
#[derive(Debug, Clone)]
pub struct CohRingContext {
    id: u64,
    code: GeneticCode,
    lattice: SubgeeLattice,
    m: usize,
    gradings: Vec<Grading>,
    above_top_rank: usize,
}

impl CohRingContext {
    pub fn build(code: &GeneticCode) -> Result<Self, CohomologyError> {
        build_context(code)
    }

    pub fn code(&self) -> &GeneticCode {
        &self.code
    }

    pub fn lattice(&self) -> &SubgeeLattice {
        &self.lattice
    }

    pub fn n(&self) -> usize {
        self.code.n()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of singleton subgees; the nonzero V_i are V_1, …, V_k.
    pub fn k(&self) -> usize {
        self.lattice.k()
    }

    /// Ranks of H^0, H^2, …, H^{2m}.
    pub fn betti_numbers(&self) -> Vec<usize> {
        self.gradings.iter().map(|g| g.basis.len()).collect()
    }

    pub fn basis(&self, d: usize) -> &[CohMonomial] {
        self.gradings.get(d).map_or(&[], |g| g.basis.as_slice())
    }

    /// Candidate monomials spanning grading d before relations.
    pub fn candidate_monomials(&self, d: usize) -> &[CohMonomial] {
        self.gradings.get(d).map_or(&[], |g| g.monomials.as_slice())
    }

    /// Smith invariant factors of the relation lattice in grading d.
    pub fn invariant_factors(&self, d: usize) -> &[BigInt] {
        self.gradings
            .get(d)
            .map_or(&[], |g| g.invariant_factors.as_slice())
    }

    /// Rank of the quotient in grading m+1, which must vanish.
    pub fn rank_above_top(&self) -> usize {
        self.above_top_rank
    }

    fn check<C>(&self, x: &CohomElement<C>) -> Result<(), CohomologyError> {
        if x.ctx_id == self.id {
            Ok(())
        } else {
            Err(CohomologyError::ContextMismatch)
        }
    }

    pub fn zero<C: Coeff>(&self) -> CohomElement<C> {
        CohomElement {
            ctx_id: self.id,
            terms: BTreeMap::new(),
        }
    }

    pub fn one<C: Coeff>(&self) -> CohomElement<C> {
        self.constant(C::one())
    }

    pub fn constant<C: Coeff>(&self, c: C) -> CohomElement<C> {
        self.reduce_raw(vec![(CohMonomial::one(), c)])
    }

    pub fn r<C: Coeff>(&self) -> CohomElement<C> {
        self.monomial(1, SubsetMask::EMPTY)
    }

    /// V_i, which vanishes unless {i} is a subgee.
    pub fn v<C: Coeff>(&self, i: usize) -> CohomElement<C> {
        self.monomial(0, SubsetMask::singleton(i))
    }

    /// V_i^j = (−R)^{j−1} V_i for j ≥ 1.
    pub fn v_power<C: Coeff>(&self, i: usize, j: u32) -> CohomElement<C> {
        if j == 0 {
            return self.one();
        }
        let sign = if (j - 1).is_multiple_of(2) {
            C::one()
        } else {
            -C::one()
        };
        self.monomial::<C>(j - 1, SubsetMask::singleton(i))
            .scale(&sign)
    }

    pub fn r_power<C: Coeff>(&self, j: u32) -> CohomElement<C> {
        self.monomial(j, SubsetMask::EMPTY)
    }

    /// R^r · V_S reduced to the basis; zero if S is not a subgee.
    pub fn monomial<C: Coeff>(&self, r: u32, s: SubsetMask) -> CohomElement<C> {
        self.reduce_raw(vec![(CohMonomial::new(r, s), C::one())])
    }

    /// A squarefree monomial times extra powers: Π_i V_i^{e_i} · R^r.
    pub fn v_product<C: Coeff>(&self, r: u32, exps: &[(usize, u32)]) -> CohomElement<C> {
        let mut acc = self.r_power::<C>(r);
        for &(i, e) in exps {
            acc = self.mul_unchecked(&acc, &self.v_power(i, e));
        }
        acc
    }

    pub fn mul<C: Coeff>(
        &self,
        x: &CohomElement<C>,
        y: &CohomElement<C>,
    ) -> Result<CohomElement<C>, CohomologyError> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.mul_unchecked(x, y))
    }

    pub(crate) fn mul_unchecked<C: Coeff>(
        &self,
        x: &CohomElement<C>,
        y: &CohomElement<C>,
    ) -> CohomElement<C> {
        let mut raw = Vec::new();
        for (a, ca) in &x.terms {
            for (b, cb) in &y.terms {
                if a.grading() + b.grading() > self.m {
                    continue;
                }
                if let Some((negative, mono)) = self.multiply_monomials(*a, *b) {
                    let c = ca.clone() * cb.clone();
                    raw.push((mono, if negative { -c } else { c }));
                }
            }
        }
        self.reduce_raw(raw)
    }

    /// V_S·V_T = (−R)^{|S∩T|} V_{S∪T} when S∪T is a subgee, else 0.
    fn multiply_monomials(&self, a: CohMonomial, b: CohMonomial) -> Option<(bool, CohMonomial)> {
        let union = a.v_set.union(b.v_set);
        if !self.lattice.contains(union) {
            return None;
        }
        let overlap = a.v_set.intersection(b.v_set).len() as u32;
        Some((
            overlap % 2 == 1,
            CohMonomial::new(a.r_exp + b.r_exp + overlap, union),
        ))
    }

    pub fn pow<C: Coeff>(&self, x: &CohomElement<C>, e: u32) -> CohomElement<C> {
        let mut acc = self.one();
        for _ in 0..e {
            acc = self.mul_unchecked(&acc, x);
        }
        acc
    }

    /// Σ_j c_j x^j for a nilpotent x (no constant term needed).
    pub fn eval_series<C: Coeff>(
        &self,
        series: &TruncatedSeries,
        x: &CohomElement<C>,
    ) -> Result<CohomElement<C>, CohomologyError> {
        self.check(x)?;
        let mut acc = self.zero();
        let mut power = self.one();
        for j in 0..=series.degree().min(self.m) {
            let c = series.coeff(j);
            if !c.is_zero() {
                let c = C::from_rational(&c).ok_or(CohomologyError::NonIntegral(c))?;
                acc = acc.add(&power.scale(&c));
            }
            power = self.mul_unchecked(&power, x);
        }
        Ok(acc)
    }

    /// (1 + x)^e for x of positive grading and any integer e.
    pub fn unit_pow<C: Coeff>(
        &self,
        x: &CohomElement<C>,
        e: i64,
    ) -> Result<CohomElement<C>, CohomologyError> {
        let base = TruncatedSeries::one_plus(self.m, Rational::one());
        let series = series_pow(&base, e).expect("constant term is one");
        self.eval_series(&series, x)
    }

    fn reduce_raw<C: Coeff>(&self, raw: Vec<(CohMonomial, C)>) -> CohomElement<C> {
        let mut by_grading: BTreeMap<usize, Vec<C>> = BTreeMap::new();
        for (mono, c) in raw {
            let d = mono.grading();
            if d > self.m || !self.lattice.contains(mono.v_set) {
                continue;
            }
            let g = &self.gradings[d];
            let v = by_grading
                .entry(d)
                .or_insert_with(|| vec![C::zero(); g.monomials.len()]);
            let col = g.column[&mono];
            v[col] = v[col].clone() + c;
        }
        let mut terms = BTreeMap::new();
        for (d, mut v) in by_grading {
            let g = &self.gradings[d];
            for (row, &p) in g.relations.rows.iter().zip(&g.relations.pivots) {
                let f = v[p].clone();
                if f.is_zero() {
                    continue;
                }
                for (x, r) in v.iter_mut().zip(row) {
                    if !r.is_zero() {
                        *x = x.clone() - f.clone() * C::from_int(r);
                    }
                }
            }
            for (mono, c) in g.monomials.iter().zip(v) {
                if !c.is_zero() {
                    terms.insert(*mono, c);
                }
            }
        }
        CohomElement {
            ctx_id: self.id,
            terms,
        }
    }

    /// Total Chern class of the tangent bundle:
    /// Π_{i≤k} (1 + 2V_i + R) · (1 + R)^{m+1−k}.
    pub fn chern_tangent(&self) -> CohomElement<BigInt> {
        let two = BigInt::from(2);
        let mut acc = self.one::<BigInt>();
        for i in 1..=self.k() {
            let factor = self.one().add(&self.v(i).scale(&two)).add(&self.r());
            acc = self.mul_unchecked(&acc, &factor);
        }
        let tail = self
            .unit_pow(&self.r(), self.m as i64 + 1 - self.k() as i64)
            .expect("integral binomial series");
        self.mul_unchecked(&acc, &tail)
    }

    /// Total Chern class of the stable normal bundle:
    /// Π_{i≤k} (1 + 2V_i + R)^{−1} · (1 + R)^{−(m+1−k)}.
    pub fn chern_normal(&self) -> CohomElement<BigInt> {
        let two = BigInt::from(2);
        let mut acc = self
            .unit_pow(&self.r(), self.k() as i64 - self.m as i64 - 1)
            .expect("integral binomial series");
        for i in 1..=self.k() {
            let x = self.v(i).scale(&two).add(&self.r());
            let inv = self.unit_pow(&x, -1).expect("integral binomial series");
            acc = self.mul_unchecked(&acc, &inv);
        }
        acc
    }

    pub fn chern_normal_mod(&self, modulus: u32) -> ModElement {
        reduce_mod(&self.chern_normal(), modulus)
    }

    /// Total Stiefel–Whitney classes (w(τ), w(η)) = ((1+R)^{m+1}, (1+R)^{−(m+1)}) mod 2.
    pub fn sw_classes(&self) -> (ModElement, ModElement) {
        let e = self.m as i64 + 1;
        let tangent = self.unit_pow(&self.r::<BigInt>(), e).expect("integral");
        let normal = self.unit_pow(&self.r::<BigInt>(), -e).expect("integral");
        (reduce_mod(&tangent, 2), reduce_mod(&normal, 2))
    }

    /// w_2(η) = (m+1)·R mod 2.
    pub fn w2_normal(&self) -> ModElement {
        self.sw_classes().1.component(1)
    }

    pub fn mul_mod(&self, x: &ModElement, y: &ModElement) -> Result<ModElement, CohomologyError> {
        if x.modulus != y.modulus {
            return Err(CohomologyError::WrongModulus {
                expected: x.modulus,
                found: y.modulus,
            });
        }
        Ok(reduce_mod(&self.mul(&x.lift(), &y.lift())?, x.modulus))
    }

    pub fn basis_element_mod(&self, mono: CohMonomial, modulus: u32) -> ModElement {
        reduce_mod(&self.monomial::<BigInt>(mono.r_exp, mono.v_set), modulus)
    }

    /// Sq² on a homogeneous mod-2 class, by the Cartan formula from
    /// Sq²(g) = g² on the degree-2 generators:
    /// Sq²(g_1⋯g_r) = Σ_t g_t² Π_{s≠t} g_s.
    pub fn sq2(&self, x: &ModElement) -> Result<ModElement, CohomologyError> {
        if x.modulus != 2 {
            return Err(CohomologyError::WrongModulus {
                expected: 2,
                found: x.modulus,
            });
        }
        if x.ctx_id != self.id {
            return Err(CohomologyError::ContextMismatch);
        }
        let lifted = x.lift();
        let gradings = lifted.gradings();
        if gradings.len() > 1 {
            return Err(CohomologyError::NotHomogeneous(gradings));
        }
        let mut acc = self.zero::<BigInt>();
        for mono in lifted.terms.keys() {
            let base = self.monomial::<BigInt>(mono.r_exp, mono.v_set);
            let r_part = self.mul_unchecked(&base, &self.r());
            acc = acc.add(&r_part.scale(&BigInt::from(mono.r_exp)));
            for i in mono.v_set.iter() {
                acc = acc.add(&self.mul_unchecked(&base, &self.v(i)));
            }
        }
        Ok(reduce_mod(&acc, 2))
    }

    /// Coordinates of a class in the basis of grading d.
    pub fn coordinates<C: Coeff>(&self, x: &CohomElement<C>, d: usize) -> Vec<C> {
        self.basis(d).iter().map(|b| x.coeff(b)).collect()
    }

    /// Whether the given classes of grading d form a ℤ-basis of H^{2d}.
    pub fn is_integral_basis(&self, elements: &[CohomElement<BigInt>], d: usize) -> bool {
        if elements.len() != self.basis(d).len() {
            return false;
        }
        let rows: Vec<Vec<BigInt>> = elements
            .iter()
            .map(|e| self.coordinates(&e.component(d), d))
            .collect();
        if elements
            .iter()
            .any(|e| e.homogeneous_grading() != Some(d) && !e.is_zero())
        {
            return false;
        }
        let det = crate::linalg::determinant(&rows);
        det == BigInt::one() || det == -BigInt::one()
    }
}

/// Builds the presentation for a nonempty code.
pub fn build_context(code: &GeneticCode) -> Result<CohRingContext, CohomologyError> {
    if code.is_empty() {
        return Err(CohomologyError::EmptyCode);
    }
    let lattice = subgee_lattice(code);
    let m = code.m();
    let k = lattice.k();
    let mut gradings: Vec<Grading> = Vec::with_capacity(m + 2);
    for d in 0..=m + 1 {
        let mut monomials: Vec<CohMonomial> = lattice
            .members()
            .iter()
            .filter(|s| s.len() <= d)
            .map(|&s| CohMonomial::new((d - s.len()) as u32, s))
            .collect();
        // eliminate high R-powers and late subsets first
        monomials.sort_by(|a, b| b.r_exp.cmp(&a.r_exp).then_with(|| b.v_set.cmp(&a.v_set)));
        let column: HashMap<CohMonomial, usize> =
            monomials.iter().enumerate().map(|(i, m)| (*m, i)).collect();
        let width = monomials.len();
        let mut rows: Vec<Vec<BigInt>> = Vec::new();

        for &t in lattice.members() {
            if t.len() + d < m + 1 {
                continue;
            }
            let mut row = vec![BigInt::zero(); width];
            for &s in lattice.members() {
                if s.len() <= d && s.is_disjoint(t) {
                    row[column[&CohMonomial::new((d - s.len()) as u32, s)]] += 1;
                }
            }
            rows.push(row);
        }
        // the ideal in grading d also contains generator multiples of the
        // relations one grading down
        if let Some(prev) = gradings.last() {
            let generators: Vec<CohMonomial> =
                std::iter::once(CohMonomial::new(1, SubsetMask::EMPTY))
                    .chain((1..=k).map(|i| CohMonomial::new(0, SubsetMask::singleton(i))))
                    .collect();
            for rel in &prev.relations.rows {
                for &g in &generators {
                    let mut row = vec![BigInt::zero(); width];
                    for (mono, c) in prev.monomials.iter().zip(rel) {
                        if c.is_zero() {
                            continue;
                        }
                        let union = mono.v_set.union(g.v_set);
                        if !lattice.contains(union) {
                            continue;
                        }
                        let overlap = mono.v_set.intersection(g.v_set).len() as u32;
                        let prod = CohMonomial::new(mono.r_exp + g.r_exp + overlap, union);
                        if overlap % 2 == 1 {
                            row[column[&prod]] -= c;
                        } else {
                            row[column[&prod]] += c;
                        }
                    }
                    rows.push(row);
                }
            }
        }
        let factors = invariant_factors(&rows, width);
        let relations = echelon(rows, width);
        if factors.iter().any(|f| !f.is_one()) {
            return Err(CohomologyError::Torsion { degree: d, factors });
        }
        if !relations.unit_pivots() {
            return Err(CohomologyError::NonMonomialBasis { degree: d });
        }
        let basis = relations
            .free_columns()
            .into_iter()
            .map(|c| monomials[c])
            .collect();
        gradings.push(Grading {
            monomials,
            column,
            relations,
            basis,
            invariant_factors: factors,
        });
    }
    let above = gradings.pop().expect("grading m+1");
    Ok(CohRingContext {
        id: next_context_id(),
        code: code.clone(),
        lattice,
        m,
        gradings,
        above_top_rank: above.basis.len(),
    })
}

/// Outcome of one closed-form identity or basis claim.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct CheckOutcome {
    pub claim: String,
    pub holds: bool,
    /// Nonzero residue or offending coordinates when the claim fails.
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct FamilyCheckReport {
    pub family: String,
    pub checks: Vec<CheckOutcome>,
}

impl FamilyCheckReport {
    pub fn consistent(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.holds)
    }
}

struct Checker<'a> {
    ctx: &'a CohRingContext,
    checks: Vec<CheckOutcome>,
}

impl Checker<'_> {
    fn zero(&mut self, claim: String, x: CohomElement<BigInt>) {
        let holds = x.is_zero();
        self.checks.push(CheckOutcome {
            claim,
            holds,
            detail: (!holds).then(|| x.to_string()),
        });
    }

    fn equal(&mut self, claim: String, a: CohomElement<BigInt>, b: CohomElement<BigInt>) {
        self.zero(claim, a.sub(&b));
    }

    fn basis(&mut self, claim: String, elements: Vec<CohomElement<BigInt>>, d: usize) {
        let holds = self.ctx.is_integral_basis(&elements, d);
        self.checks.push(CheckOutcome {
            claim,
            holds,
            detail: (!holds).then(|| {
                format!(
                    "{} listed classes, rank {}",
                    elements.len(),
                    self.ctx.basis(d).len()
                )
            }),
        });
    }
}

/// Dedupe monomials written as (R power, [(i, V_i power)]).
type RawMono = (u32, Vec<(usize, u32)>);

fn dedup_raw(list: Vec<RawMono>) -> Vec<RawMono> {
    let mut out: Vec<RawMono> = Vec::new();
    for (r, exps) in list {
        let mut exps: Vec<(usize, u32)> = exps.into_iter().filter(|&(_, e)| e > 0).collect();
        exps.sort();
        if !out.contains(&(r, exps.clone())) {
            out.push((r, exps));
        }
    }
    out
}

/// Verifies the closed-form presentations of the {{n,k}} and {{n,k,1}}
/// families against the computed quotient. `None` for other codes.
pub fn relation_check_family(ctx: &CohRingContext) -> Option<FamilyCheckReport> {
    let family = ctx.code().family()?;
    let m = ctx.m() as u32;
    let mut c = Checker {
        ctx,
        checks: Vec::new(),
    };
    let sign = |e: u32| -> BigInt {
        if e.is_multiple_of(2) {
            BigInt::one()
        } else {
            -BigInt::one()
        }
    };
    let elements = |list: Vec<RawMono>| -> Vec<CohomElement<BigInt>> {
        dedup_raw(list)
            .iter()
            .map(|(r, e)| ctx.v_product(*r, e))
            .collect()
    };
    let name = match family {
        Family::Nk { k } => {
            for i in 1..=k {
                for j in i + 1..=k {
                    c.zero(
                        format!("V{i}*V{j} = 0"),
                        ctx.mul_unchecked(&ctx.v(i), &ctx.v(j)),
                    );
                }
                c.zero(
                    format!("R*V{i} + V{i}^2 = 0"),
                    ctx.mul_unchecked(&ctx.r(), &ctx.v(i))
                        .add(&ctx.v_power(i, 2)),
                );
            }
            for i in 2..=k {
                c.equal(
                    format!("V1^{m} = V{i}^{m}"),
                    ctx.v_power(1, m),
                    ctx.v_power(i, m),
                );
            }
            for i in 1..=k {
                c.equal(
                    format!("R^{m} = (-1)^{m}({k}-1) V{i}^{m}"),
                    ctx.r_power(m),
                    ctx.v_power(i, m)
                        .scale(&(sign(m) * BigInt::from(k as i64 - 1))),
                );
            }
            for j in 1..m {
                let mut list: Vec<RawMono> = vec![(j, vec![])];
                list.extend((1..=k).map(|i| (0, vec![(i, j)])));
                c.basis(
                    format!("basis of H^{}: R^{j}, V_i^{j} (i<={k})", 2 * j),
                    elements(list),
                    j as usize,
                );
            }
            c.basis(
                format!("basis of H^{}: V1^{m}", 2 * m),
                elements(vec![(0, vec![(1, m)])]),
                m as usize,
            );
            format!("{{{{n,k}}}} with n={}, k={k}", ctx.n())
        }
        Family::Nk1 { k } => {
            for i in 2..=k {
                for j in i + 1..=k {
                    c.zero(
                        format!("V{i}*V{j} = 0"),
                        ctx.mul_unchecked(&ctx.v(i), &ctx.v(j)),
                    );
                }
            }
            c.basis("basis of H^0: 1".into(), vec![ctx.one()], 0);
            if m >= 1 {
                let mut list: Vec<RawMono> = vec![(1, vec![])];
                list.extend((1..=k).map(|i| (0, vec![(i, 1)])));
                if m >= 2 {
                    let d = 1;
                    let kept = if m == 2 {
                        vec![(0, vec![(1, 1)]), (0, vec![(k, 1)])]
                    } else {
                        list
                    };
                    c.basis(format!("basis of H^{}", 2 * d), elements(kept), d);
                }
            }
            for i in 2..m.saturating_sub(1) {
                let mut list: Vec<RawMono> = vec![(i, vec![])];
                list.extend((1..=k).map(|a| (0, vec![(a, i)])));
                list.extend((2..=k).map(|a| (0, vec![(1, 1), (a, i - 1)])));
                c.basis(format!("basis of H^{}", 2 * i), elements(list), i as usize);
            }
            if m >= 2 {
                let d = m - 1;
                let mut list: Vec<RawMono> = vec![(0, vec![(1, d)]), (0, vec![(k, d)])];
                list.extend((2..=k).map(|a| (0, vec![(1, 1), (a, d - 1)])));
                c.basis(format!("basis of H^{}", 2 * d), elements(list), d as usize);
                for a in 2..k {
                    c.equal(
                        format!("V{a}^{d} = V{k}^{d}"),
                        ctx.v_power(a, d),
                        ctx.v_power(k, d),
                    );
                }
                c.equal(
                    format!("R^{d} = (-1)^{d}({k}-2) V{k}^{d}"),
                    ctx.r_power(d),
                    ctx.v_power(k, d)
                        .scale(&(sign(d) * BigInt::from(k as i64 - 2))),
                );
            }
            c.zero(format!("R^{m} = 0"), ctx.r_power(m));
            for a in 2..=k {
                c.zero(format!("V{a}^{m} = 0"), ctx.v_power(a, m));
            }
            let top = |a: usize| ctx.v_product(0, &[(1, 1), (a, m - 1)]);
            for a in 2..k {
                c.equal(
                    format!("V1*V{a}^{} = V1*V{k}^{}", m - 1, m - 1),
                    top(a),
                    top(k),
                );
            }
            c.basis(
                format!("V1*V{k}^{} generates H^{}", m - 1, 2 * m),
                vec![top(k)],
                m as usize,
            );
            c.equal(
                format!("V1^{m} = ({k}-2) V1*V{k}^{}", m - 1),
                ctx.v_power(1, m),
                top(k).scale(&BigInt::from(k as i64 - 2)),
            );
            format!("{{{{n,k,1}}}} with n={}, k={k}", ctx.n())
        }
    };
    Some(FamilyCheckReport {
        family: name,
        checks: c.checks,
    })
}
