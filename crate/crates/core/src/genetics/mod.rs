//! Length vectors, short subsets, genetic codes and their subgee lattices.
//!
//! Indices are 1-based throughout: a [`SubsetMask`] stores index `i` in bit
//! `i - 1`. The partial order on subsets is the descending elementwise
//! domination order of [`leq_sets`].

mod enumerate;
pub mod lp;
mod realize;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::exact::{parse_rational, ExactError, Rational};

pub use enumerate::{enumerate_codes, MAX_ENUMERATION_N};
pub use realize::realize;

/// Largest supported polygon length.
pub const MAX_N: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeneticsError {
    #[error("a length vector needs between 3 and {MAX_N} entries, got {0}")]
    BadLength(usize),
    #[error("length #{index} is not positive: {value}")]
    NonPositive { index: usize, value: Rational },
    #[error("length vector is not generic: subset {subset} has exactly half the total length")]
    NotGeneric { subset: SubsetMask },
    #[error("gene {gene} does not contain the top index {n}")]
    GeneMissingTop { gene: SubsetMask, n: usize },
    #[error("gene {gene} has elements outside 1..={n}")]
    GeneOutOfRange { gene: SubsetMask, n: usize },
    #[error("genes {lower} and {upper} are comparable ({lower} <= {upper}); a genetic code is an antichain")]
    NotAntichain {
        lower: SubsetMask,
        upper: SubsetMask,
    },
    #[error("genetic code of {0}")]
    Parse(#[from] ParseError),
    #[error("genetic code {code} is not realizable (optimal margin {margin})")]
    Unrealizable { code: String, margin: Rational },
    #[error("enumeration supports 3 <= n <= {max}, got {n}")]
    UnsupportedRange { n: usize, max: usize },
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{input:?} at byte {position}: {reason}")]
pub struct ParseError {
    pub input: String,
    pub position: usize,
    pub reason: String,
}

impl From<ExactError> for ParseError {
    fn from(e: ExactError) -> Self {
        match e {
            ExactError::Parse {
                input,
                position,
                reason,
            } => ParseError {
                input,
                position,
                reason,
            },
            other => ParseError {
                input: String::new(),
                position: 0,
                reason: other.to_string(),
            },
        }
    }
}

/// A subset of {1, …, n}, n ≤ 20, as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct SubsetMask(pub u32);

impl SubsetMask {
    pub const EMPTY: SubsetMask = SubsetMask(0);

    pub fn singleton(i: usize) -> Self {
        debug_assert!((1..=32).contains(&i));
        SubsetMask(1 << (i - 1))
    }

    pub fn from_elements<I: IntoIterator<Item = usize>>(elements: I) -> Self {
        elements.into_iter().fold(Self::EMPTY, |acc, i| acc.with(i))
    }

    /// {1, …, n}
    pub fn full(n: usize) -> Self {
        if n == 0 {
            Self::EMPTY
        } else {
            SubsetMask(u32::MAX >> (32 - n))
        }
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn contains(self, i: usize) -> bool {
        (1..=32).contains(&i) && self.0 & (1 << (i - 1)) != 0
    }

    pub fn with(self, i: usize) -> Self {
        SubsetMask(self.0 | (1 << (i - 1)))
    }

    pub fn without(self, i: usize) -> Self {
        SubsetMask(self.0 & !(1 << (i - 1)))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: Self) -> Self {
        SubsetMask(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        SubsetMask(self.0 & other.0)
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_subset_of(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn max_element(self) -> Option<usize> {
        (self.0 != 0).then(|| 32 - self.0.leading_zeros() as usize)
    }

    pub fn min_element(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize + 1)
    }

    /// Elements in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i + 1)
            }
        })
    }

    pub fn elements_desc(self) -> Vec<usize> {
        let mut v: Vec<usize> = self.iter().collect();
        v.reverse();
        v
    }

    /// Sum of the (1-based) elements. Strictly increasing along `<` in the
    /// [`leq_sets`] order, hence a linear-extension key.
    pub fn index_sum(self) -> usize {
        self.iter().sum()
    }

    /// Immediate successors under [`leq_sets`] among subsets of {1, …, universe}.
    pub fn upper_covers(self, universe: usize) -> Vec<SubsetMask> {
        let mut covers = Vec::new();
        if universe >= 1 && !self.contains(1) {
            covers.push(self.with(1));
        }
        for i in self.iter() {
            if i < universe && !self.contains(i + 1) {
                covers.push(self.without(i).with(i + 1));
            }
        }
        covers
    }

    /// Immediate predecessors under [`leq_sets`].
    pub fn lower_covers(self) -> Vec<SubsetMask> {
        let mut covers = Vec::new();
        if self.contains(1) {
            covers.push(self.without(1));
        }
        for i in self.iter() {
            if i >= 2 && !self.contains(i - 1) {
                covers.push(self.without(i).with(i - 1));
            }
        }
        covers
    }
}

/// Canonical order: by size, then lexicographically on the elements listed
/// in decreasing order.
impl Ord for SubsetMask {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.elements_desc().cmp(&other.elements_desc()))
    }
}

impl PartialOrd for SubsetMask {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (j, i) in self.elements_desc().iter().enumerate() {
            if j > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `A ≤ B` iff |A| ≤ |B| and, listing both in decreasing order, each element
/// of A is at most the corresponding element of B.
pub fn leq_sets(a: SubsetMask, b: SubsetMask) -> bool {
    if a.len() > b.len() {
        return false;
    }
    let a = a.elements_desc();
    let b = b.elements_desc();
    a.iter().zip(b.iter()).all(|(x, y)| x <= y)
}

/// Positive lengths, sorted nondecreasingly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LengthVector {
    lengths: Vec<Rational>,
    // lengths scaled by the lcm of their denominators
    weights: Vec<BigInt>,
    total: BigInt,
}

impl LengthVector {
    pub fn new(mut lengths: Vec<Rational>) -> Result<Self, GeneticsError> {
        let n = lengths.len();
        if !(3..=MAX_N).contains(&n) {
            return Err(GeneticsError::BadLength(n));
        }
        if let Some((index, value)) = lengths.iter().enumerate().find(|(_, x)| !x.is_positive()) {
            return Err(GeneticsError::NonPositive {
                index: index + 1,
                value: value.clone(),
            });
        }
        lengths.sort();
        let lcm = lengths
            .iter()
            .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let weights: Vec<BigInt> = lengths
            .iter()
            .map(|x| x.numer() * (&lcm / x.denom()))
            .collect();
        let total = weights.iter().sum();
        Ok(LengthVector {
            lengths,
            weights,
            total,
        })
    }

    pub fn from_integers(lengths: &[i64]) -> Result<Self, GeneticsError> {
        Self::new(
            lengths
                .iter()
                .map(|&x| Rational::from_integer(x.into()))
                .collect(),
        )
    }

    /// Parses a comma-separated list of rationals, e.g. `1/2,1,1,2`.
    pub fn parse(input: &str) -> Result<Self, GeneticsError> {
        let mut lengths = Vec::new();
        let mut offset = 0;
        for piece in input.split(',') {
            let value = parse_rational(piece).map_err(|e| {
                let mut pe = ParseError::from(e);
                pe.input = input.to_string();
                pe.position += offset;
                GeneticsError::Parse(pe)
            })?;
            lengths.push(value);
            offset += piece.len() + 1;
        }
        Self::new(lengths)
    }

    pub fn n(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[Rational] {
        &self.lengths
    }

    /// Σ_{i∈S} ℓ_i < Σ_{i∉S} ℓ_i
    pub fn is_short(&self, s: SubsetMask) -> bool {
        let inside: BigInt = s.iter().map(|i| &self.weights[i - 1]).sum();
        inside * 2 < self.total
    }

    /// A subset with exactly half the total length, if any. Only subsets
    /// containing n are searched; complements cover the rest.
    pub fn genericity_violation(&self) -> Option<SubsetMask> {
        let n = self.n();
        let sums = self.subset_sums();
        let top = SubsetMask::singleton(n);
        sums.find_tie().map(|t| SubsetMask(t).union(top))
    }

    pub fn is_generic(&self) -> bool {
        self.genericity_violation().is_none()
    }

    /// `table[T]` says whether T ∪ {n} is short, for every T ⊆ {1, …, n−1}.
    pub fn short_table(&self) -> Vec<bool> {
        self.subset_sums().short_flags()
    }

    fn subset_sums(&self) -> SubsetSums {
        let n = self.n();
        let fits = self.total.bits() < 100;
        if fits {
            let w: Vec<i128> = self.weights.iter().map(|x| x.to_i128().unwrap()).collect();
            let total = self.total.to_i128().unwrap();
            let mut sums = vec![w[n - 1]; 1 << (n - 1)];
            for t in 1..sums.len() {
                let low = t.trailing_zeros() as usize;
                sums[t] = sums[t & (t - 1)] + w[low];
            }
            SubsetSums::Small { sums, total }
        } else {
            let mut sums = vec![self.weights[n - 1].clone(); 1 << (n - 1)];
            for t in 1..sums.len() {
                let low = t.trailing_zeros() as usize;
                sums[t] = &sums[t & (t - 1)] + &self.weights[low];
            }
            SubsetSums::Big {
                sums,
                total: self.total.clone(),
            }
        }
    }

    /// Smallest positive integer multiple of this vector.
    pub fn to_primitive_integers(&self) -> Vec<BigInt> {
        let g = self
            .weights
            .iter()
            .fold(BigInt::zero(), |acc, w| acc.gcd(w));
        self.weights.iter().map(|w| w / &g).collect()
    }
}

impl fmt::Display for LengthVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.lengths.iter().map(|x| x.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

enum SubsetSums {
    Small { sums: Vec<i128>, total: i128 },
    Big { sums: Vec<BigInt>, total: BigInt },
}

impl SubsetSums {
    fn short_flags(&self) -> Vec<bool> {
        match self {
            SubsetSums::Small { sums, total } => sums.iter().map(|s| 2 * s < *total).collect(),
            SubsetSums::Big { sums, total } => sums.iter().map(|s| s * 2 < *total).collect(),
        }
    }

    fn find_tie(&self) -> Option<u32> {
        match self {
            SubsetSums::Small { sums, total } => {
                sums.iter().position(|s| 2 * s == *total).map(|t| t as u32)
            }
            SubsetSums::Big { sums, total } => {
                sums.iter().position(|s| s * 2 == *total).map(|t| t as u32)
            }
        }
    }
}

/// Canonical antichain of genes, each containing `n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GeneticCode {
    n: usize,
    genes: Vec<SubsetMask>,
}

impl GeneticCode {
    /// Validates and canonicalizes.
    pub fn new(n: usize, mut genes: Vec<SubsetMask>) -> Result<Self, GeneticsError> {
        if !(3..=MAX_N).contains(&n) {
            return Err(GeneticsError::BadLength(n));
        }
        let universe = SubsetMask::full(n);
        for &g in &genes {
            if !g.is_subset_of(universe) {
                return Err(GeneticsError::GeneOutOfRange { gene: g, n });
            }
            if !g.contains(n) {
                return Err(GeneticsError::GeneMissingTop { gene: g, n });
            }
        }
        genes.sort();
        for (i, &a) in genes.iter().enumerate() {
            for &b in &genes[i + 1..] {
                if leq_sets(a, b) {
                    return Err(GeneticsError::NotAntichain { lower: a, upper: b });
                }
                if leq_sets(b, a) {
                    return Err(GeneticsError::NotAntichain { lower: b, upper: a });
                }
            }
        }
        Ok(GeneticCode { n, genes })
    }

    pub fn empty(n: usize) -> Self {
        GeneticCode {
            n,
            genes: Vec::new(),
        }
    }

    /// Parses `{{7,4},{7,6,1}}`. The polygon length n is the largest element.
    pub fn parse(input: &str) -> Result<Self, GeneticsError> {
        let genes = parse_code_text(input)?;
        let n = genes
            .iter()
            .filter_map(|g| g.max_element())
            .max()
            .ok_or_else(|| ParseError {
                input: input.to_string(),
                position: 0,
                reason: "empty code has no polygon length".into(),
            })?;
        Self::new(n, genes)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// n − 3, half the manifold dimension.
    pub fn m(&self) -> usize {
        self.n - 3
    }

    pub fn genes(&self) -> &[SubsetMask] {
        &self.genes
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    /// Genes with n removed.
    pub fn gees(&self) -> impl Iterator<Item = SubsetMask> + '_ {
        self.genes.iter().map(move |g| g.without(self.n))
    }

    /// Recognizes the two families with closed-form ring presentations.
    pub fn family(&self) -> Option<Family> {
        if self.genes.len() != 1 {
            return None;
        }
        let gee = self.genes[0].without(self.n);
        match gee.len() {
            1 => Some(Family::Nk {
                k: gee.max_element().unwrap(),
            }),
            2 if gee.contains(1) && gee.max_element().unwrap() > 1 => Some(Family::Nk1 {
                k: gee.max_element().unwrap(),
            }),
            _ => None,
        }
    }

    pub fn gene_lists(&self) -> Vec<Vec<usize>> {
        self.genes.iter().map(|g| g.elements_desc()).collect()
    }
}

impl Ord for GeneticCode {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then_with(|| self.genes.cmp(&other.genes))
    }
}

impl PartialOrd for GeneticCode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for GeneticCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (j, g) in self.genes.iter().enumerate() {
            if j > 0 {
                f.write_str(",")?;
            }
            write!(f, "{g}")?;
        }
        f.write_str("}")
    }
}

impl FromStr for GeneticCode {
    type Err = GeneticsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

#[derive(Serialize, Deserialize)]
struct CodeJson {
    n: usize,
    genes: Vec<Vec<usize>>,
}

impl Serialize for GeneticCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        CodeJson {
            n: self.n,
            genes: self.gene_lists(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GeneticCode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = CodeJson::deserialize(deserializer)?;
        let genes = raw
            .genes
            .into_iter()
            .map(|g| {
                if g.iter().any(|&i| i == 0 || i > MAX_N) {
                    Err(serde::de::Error::custom("gene element out of range"))
                } else {
                    Ok(SubsetMask::from_elements(g))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        GeneticCode::new(raw.n, genes).map_err(serde::de::Error::custom)
    }
}

/// The two single-gene families {{n,k}} and {{n,k,1}}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Nk { k: usize },
    Nk1 { k: usize },
}

fn parse_code_text(input: &str) -> Result<Vec<SubsetMask>, ParseError> {
    let bytes = input.as_bytes();
    let err = |position: usize, reason: &str| ParseError {
        input: input.to_string(),
        position,
        reason: reason.to_string(),
    };
    let mut pos = 0;
    let skip_ws = |pos: &mut usize| {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
    };
    let expect = |pos: &mut usize, c: u8| -> Result<(), ParseError> {
        skip_ws(pos);
        if *pos < bytes.len() && bytes[*pos] == c {
            *pos += 1;
            Ok(())
        } else {
            Err(err(*pos, &format!("expected '{}'", c as char)))
        }
    };
    let peek = |pos: &mut usize| -> Option<u8> {
        skip_ws(pos);
        bytes.get(*pos).copied()
    };

    expect(&mut pos, b'{')?;
    let mut genes = Vec::new();
    if peek(&mut pos) == Some(b'}') {
        pos += 1;
    } else {
        loop {
            expect(&mut pos, b'{')?;
            let mut gene = SubsetMask::EMPTY;
            loop {
                skip_ws(&mut pos);
                let start = pos;
                while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                    pos += 1;
                }
                if start == pos {
                    return Err(err(start, "expected an index"));
                }
                let value: usize = input[start..pos]
                    .parse()
                    .map_err(|_| err(start, "index too large"))?;
                if value == 0 || value > MAX_N {
                    return Err(err(start, &format!("index must lie in 1..={MAX_N}")));
                }
                if gene.contains(value) {
                    return Err(err(start, "repeated index"));
                }
                gene = gene.with(value);
                match peek(&mut pos) {
                    Some(b',') => pos += 1,
                    Some(b'}') => {
                        pos += 1;
                        break;
                    }
                    _ => return Err(err(pos, "expected ',' or '}'")),
                }
            }
            if genes.contains(&gene) {
                return Err(err(pos, "repeated gene"));
            }
            genes.push(gene);
            match peek(&mut pos) {
                Some(b',') => pos += 1,
                Some(b'}') => {
                    pos += 1;
                    break;
                }
                _ => return Err(err(pos, "expected ',' or '}'")),
            }
        }
    }
    skip_ws(&mut pos);
    if pos != bytes.len() {
        return Err(err(pos, "trailing input"));
    }
    Ok(genes)
}

/// Genetic code of a generic length vector: the maximal short subsets
/// containing n.
pub fn genetic_code(lengths: &LengthVector) -> Result<GeneticCode, GeneticsError> {
    if let Some(subset) = lengths.genericity_violation() {
        return Err(GeneticsError::NotGeneric { subset });
    }
    let n = lengths.n();
    let short = lengths.short_table();
    let top = SubsetMask::singleton(n);
    let mut genes = Vec::new();
    for (t, &is_short) in short.iter().enumerate() {
        if !is_short {
            continue;
        }
        let t = SubsetMask(t as u32);
        if t.upper_covers(n - 1)
            .iter()
            .all(|c| !short[c.bits() as usize])
        {
            genes.push(t.union(top));
        }
    }
    GeneticCode::new(n, genes)
}

/// Subsets T ⊆ {1, …, n−1} lying below some gee.
#[derive(Debug, Clone)]
pub struct SubgeeLattice {
    n: usize,
    members: Vec<SubsetMask>,
    flags: Vec<bool>,
    k: usize,
    s: usize,
}

impl SubgeeLattice {
    pub fn n(&self) -> usize {
        self.n
    }

    /// All subgees, sorted by size then canonically.
    pub fn members(&self) -> &[SubsetMask] {
        &self.members
    }

    pub fn contains(&self, t: SubsetMask) -> bool {
        self.flags.get(t.bits() as usize).copied().unwrap_or(false)
    }

    /// Largest i with {i} a subgee, 0 if none.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Largest gee size.
    pub fn s(&self) -> usize {
        self.s
    }
}

pub fn subgee_lattice(code: &GeneticCode) -> SubgeeLattice {
    let n = code.n();
    let gees: Vec<SubsetMask> = code.gees().collect();
    let mut flags = vec![false; 1 << (n - 1)];
    let mut members = Vec::new();
    for (t, flag) in flags.iter_mut().enumerate() {
        let t = SubsetMask(t as u32);
        if gees.iter().any(|&g| leq_sets(t, g)) {
            *flag = true;
            members.push(t);
        }
    }
    members.sort();
    let k = (1..n)
        .rev()
        .find(|&i| flags[SubsetMask::singleton(i).bits() as usize])
        .unwrap_or(0);
    let s = gees.iter().map(|g| g.len()).max().unwrap_or(0);
    SubgeeLattice {
        n,
        members,
        flags,
        k,
        s,
    }
}

/// (1,…,1, 2,…,2, 2n−k−5) with k ones and n−k−1 twos.
pub fn family_nk_lengths(n: usize, k: usize) -> Option<LengthVector> {
    let mut v = vec![Rational::one(); k];
    v.extend(std::iter::repeat_n(
        Rational::from_integer(2.into()),
        n.checked_sub(k + 1)?,
    ));
    let last = 2 * n as i64 - k as i64 - 5;
    family_vector(v, last)
}

/// (1/2, 1,…,1, 2,…,2, 2n−k−6) with k−1 ones and n−k−1 twos.
pub fn family_nk1_lengths(n: usize, k: usize) -> Option<LengthVector> {
    let mut v = vec![Rational::new(1.into(), 2.into())];
    v.extend(std::iter::repeat_n(Rational::one(), k.checked_sub(1)?));
    v.extend(std::iter::repeat_n(
        Rational::from_integer(2.into()),
        n.checked_sub(k + 1)?,
    ));
    let last = 2 * n as i64 - k as i64 - 6;
    family_vector(v, last)
}

// Only meaningful when the last entry really is the largest.
fn family_vector(mut v: Vec<Rational>, last: i64) -> Option<LengthVector> {
    let last = Rational::from_integer(last.into());
    if !last.is_positive() || v.iter().any(|x| *x > last) {
        return None;
    }
    v.push(last);
    LengthVector::new(v).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational;

    fn mask(e: &[usize]) -> SubsetMask {
        SubsetMask::from_elements(e.iter().copied())
    }

    fn code(text: &str) -> GeneticCode {
        GeneticCode::parse(text).unwrap()
    }

    #[test]
    fn shortness() {
        let l = LengthVector::from_integers(&[1, 1, 2, 2, 3]).unwrap();
        assert!(l.is_short(mask(&[5])));
        assert!(!l.is_short(mask(&[3, 5])));
        assert!(l.is_generic());
        for s in 0..32u32 {
            let s = SubsetMask(s);
            let c = SubsetMask(!s.0 & 31);
            assert!(l.is_short(s) ^ l.is_short(c));
        }
    }

    #[test]
    fn leq_examples() {
        assert!(leq_sets(mask(&[5, 1]), mask(&[5, 2])));
        assert!(!leq_sets(mask(&[5, 3]), mask(&[5, 2])));
        assert!(leq_sets(mask(&[5]), mask(&[5, 1])));
        assert!(leq_sets(SubsetMask::EMPTY, mask(&[1])));
        assert!(!leq_sets(mask(&[1, 2]), mask(&[3])));
    }

    #[test]
    fn inclusion_implies_leq() {
        for b in 0..256u32 {
            let mut a = b;
            loop {
                assert!(leq_sets(SubsetMask(a), SubsetMask(b)));
                if a == 0 {
                    break;
                }
                a = (a - 1) & b;
            }
        }
    }

    /// The cover relations generate exactly the order.
    #[test]
    fn covers_generate_the_order() {
        let universe = 6;
        let all: Vec<SubsetMask> = (0..1u32 << universe).map(SubsetMask).collect();
        for &a in &all {
            let brute_up: Vec<SubsetMask> = all
                .iter()
                .copied()
                .filter(|&b| b != a && leq_sets(a, b))
                .filter(|&b| {
                    !all.iter()
                        .any(|&c| c != a && c != b && leq_sets(a, c) && leq_sets(c, b))
                })
                .collect();
            let mut covers = a.upper_covers(universe);
            covers.sort();
            let mut brute_up = brute_up;
            brute_up.sort();
            assert_eq!(covers, brute_up, "upper covers of {a}");
            for c in a.lower_covers() {
                assert!(c.upper_covers(universe).contains(&a));
            }
            for c in a.upper_covers(universe) {
                assert!(c.lower_covers().contains(&a));
            }
        }
    }

    #[test]
    fn family_examples() {
        let l = LengthVector::from_integers(&[1, 1, 2, 2, 3]).unwrap();
        assert_eq!(genetic_code(&l).unwrap(), code("{{5,2}}"));
        let l = LengthVector::new(vec![
            rational(1, 2),
            rational(1, 1),
            rational(1, 1),
            rational(2, 1),
            rational(2, 1),
            rational(3, 1),
        ])
        .unwrap();
        assert_eq!(genetic_code(&l).unwrap(), code("{{6,3,1}}"));
    }

    /// Maximal short sets by brute force over every pair of subsets.
    fn brute_code(l: &LengthVector) -> Vec<SubsetMask> {
        let n = l.n();
        let shorts: Vec<SubsetMask> = (0..1u32 << n)
            .map(SubsetMask)
            .filter(|s| s.contains(n) && l.is_short(*s))
            .collect();
        let mut max: Vec<SubsetMask> = shorts
            .iter()
            .copied()
            .filter(|&a| !shorts.iter().any(|&b| b != a && leq_sets(a, b)))
            .collect();
        max.sort();
        max
    }

    #[test]
    fn brute_force_examples() {
        let l = LengthVector::new(vec![
            rational(1, 1),
            rational(1, 1),
            rational(1, 1),
            rational(1, 1),
            rational(7, 2),
        ])
        .unwrap();
        assert_eq!(brute_code(&l), vec![mask(&[5])]);
        assert_eq!(genetic_code(&l).unwrap(), code("{{5}}"));

        let l = LengthVector::from_integers(&[1; 7]).unwrap();
        assert_eq!(brute_code(&l), vec![mask(&[7, 6, 5])]);
        assert_eq!(genetic_code(&l).unwrap(), code("{{7,6,5}}"));
    }

    #[test]
    fn matches_brute_force_on_random_vectors() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let mut checked = 0;
        while checked < 200 {
            let n = rng.gen_range(3..=8);
            let v: Vec<i64> = (0..n).map(|_| rng.gen_range(1..40)).collect();
            let l = LengthVector::from_integers(&v).unwrap();
            if !l.is_generic() {
                assert!(matches!(
                    genetic_code(&l),
                    Err(GeneticsError::NotGeneric { .. })
                ));
                continue;
            }
            assert_eq!(genetic_code(&l).unwrap().genes(), brute_code(&l).as_slice());
            checked += 1;
        }
    }

    #[test]
    fn empty_code_when_top_is_long() {
        let l = LengthVector::from_integers(&[1, 1, 1, 5]).unwrap();
        assert!(genetic_code(&l).unwrap().is_empty());
    }

    #[test]
    fn non_generic_names_tying_subset() {
        let l = LengthVector::from_integers(&[1, 1, 1, 1]).unwrap();
        match genetic_code(&l) {
            Err(GeneticsError::NotGeneric { subset }) => {
                assert!(subset.contains(4));
                assert_eq!(subset.len(), 2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn order_of_input_does_not_matter() {
        let a = LengthVector::from_integers(&[3, 1, 2, 1, 2]).unwrap();
        let b = LengthVector::from_integers(&[1, 1, 2, 2, 3]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn subgee_examples() {
        let l = subgee_lattice(&code("{{5,2}}"));
        assert_eq!(l.members(), &[SubsetMask::EMPTY, mask(&[1]), mask(&[2])]);
        assert_eq!((l.k(), l.s()), (2, 1));

        let l = subgee_lattice(&code("{{6,3,1}}"));
        assert_eq!(
            l.members(),
            &[
                SubsetMask::EMPTY,
                mask(&[1]),
                mask(&[2]),
                mask(&[3]),
                mask(&[2, 1]),
                mask(&[3, 1])
            ]
        );
        assert_eq!((l.k(), l.s()), (3, 2));

        let l = subgee_lattice(&code("{{7}}"));
        assert_eq!(l.members(), &[SubsetMask::EMPTY]);
        assert_eq!((l.k(), l.s()), (0, 0));
    }

    #[test]
    fn code_text_format() {
        let c = code("{{7,5,1},{7,4,3}}");
        assert_eq!(c.to_string(), "{{7,4,3},{7,5,1}}");
        assert_eq!(c.n(), 7);
        assert_eq!(
            serde_json::to_string(&c).unwrap(),
            r#"{"n":7,"genes":[[7,4,3],[7,5,1]]}"#
        );
        let back: GeneticCode =
            serde_json::from_str(r#"{"n":7,"genes":[[7,5,1],[7,4,3]]}"#).unwrap();
        assert_eq!(back, c);
        assert_eq!(code("{{7,6},{7,5,4}}").to_string(), "{{7,6},{7,5,4}}");
        // {7,4} lies below {7,6} ⊂ {7,6,1}
        assert!(matches!(
            GeneticCode::parse("{{7,4},{7,6,1}}"),
            Err(GeneticsError::NotAntichain { .. })
        ));
        assert!(matches!(
            GeneticCode::parse("{{5},{5,1}}"),
            Err(GeneticsError::NotAntichain { .. })
        ));
        assert!(matches!(
            GeneticCode::parse("{{5,2},{4}}"),
            Err(GeneticsError::GeneMissingTop { .. })
        ));
        match GeneticCode::parse("{{5,2}") {
            Err(GeneticsError::Parse(p)) => assert_eq!(p.position, 6),
            other => panic!("{other:?}"),
        }
        match GeneticCode::parse("{{5,x}}") {
            Err(GeneticsError::Parse(p)) => assert_eq!(p.position, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn families_are_recognized() {
        assert_eq!(code("{{7,4}}").family(), Some(Family::Nk { k: 4 }));
        assert_eq!(code("{{7,4,1}}").family(), Some(Family::Nk1 { k: 4 }));
        assert_eq!(code("{{7,4,2}}").family(), None);
        assert_eq!(code("{{7}}").family(), None);
        assert_eq!(code("{{7,4},{7,3,1}}").family(), None);
    }

    #[test]
    fn length_parsing() {
        let l = LengthVector::parse("1/2,1,1,2,2,3").unwrap();
        assert_eq!(l.n(), 6);
        assert_eq!(l.lengths()[0], rational(1, 2));
        match LengthVector::parse("1,1,2,x,3") {
            Err(GeneticsError::Parse(p)) => assert_eq!(p.position, 6),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            LengthVector::parse("1,0,2"),
            Err(GeneticsError::NonPositive { .. })
        ));
        assert!(matches!(
            LengthVector::parse("1,2"),
            Err(GeneticsError::BadLength(2))
        ));
    }
}
