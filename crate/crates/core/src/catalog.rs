//! Per-code invariant catalogs and their JSON form.

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::exact::{rational_to_string, Rational, Valuation};
use crate::genetics::{enumerate_codes, realize, GeneticCode, GeneticsError};
use crate::immersion::{immersion_report, ImmersionError, Verdict};
use crate::ktheory::KMode;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error(transparent)]
    Genetics(#[from] GeneticsError),
    #[error(transparent)]
    Immersion(#[from] ImmersionError),
    #[error("malformed catalog: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported catalog schema {found}, expected {SCHEMA_VERSION}")]
    Schema { found: u32 },
    #[error("catalog entries are not in canonical order at index {0}")]
    Unsorted(usize),
}

pub fn serialize_rational<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&rational_to_string(x))
}

/// Finite valuations as integers, the valuation of zero as the string "inf".
pub fn serialize_valuation<S: Serializer>(v: &Valuation, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Valuation::Finite(x) => s.serialize_i64(*x),
        Valuation::Infinite => s.serialize_str("inf"),
    }
}

/// Which presentation produced the Γ bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub mode: KMode,
    pub truncation: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub n: usize,
    pub code: GeneticCode,
    /// A realizing length vector, entries as exact rational strings.
    pub lengths: Vec<String>,
    pub betti: Vec<usize>,
    pub gamma_gap: u64,
    pub nonimmersion_dim: u64,
    pub m_formula_dim: i64,
    pub sw_dim: i64,
    pub immerses_4m_minus_2: Option<Verdict>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Catalog {
    pub schema: u32,
    pub n: usize,
    pub count: usize,
    pub entries: Vec<CatalogEntry>,
}

pub fn catalog_entry(code: &GeneticCode) -> Result<CatalogEntry, CatalogError> {
    let lengths = realize(code)?;
    let report = immersion_report(code)?;
    Ok(CatalogEntry {
        n: code.n(),
        code: code.clone(),
        lengths: lengths.lengths().iter().map(rational_to_string).collect(),
        betti: report.betti,
        gamma_gap: report.gamma_gap,
        nonimmersion_dim: report.nonimmersion_dim,
        m_formula_dim: report.m_formula_dim,
        sw_dim: report.sw_dim,
        immerses_4m_minus_2: report.immerses_4m_minus_2,
        provenance: Provenance {
            mode: report.mode,
            truncation: report.truncation,
        },
    })
}

/// Invariants of every nonempty code of length n, in canonical order.
pub fn build_catalog(n: usize) -> Result<Catalog, CatalogError> {
    let codes = enumerate_codes(n)?;
    let entries = codes
        .par_iter()
        .map(catalog_entry)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Catalog {
        schema: SCHEMA_VERSION,
        n,
        count: entries.len(),
        entries,
    })
}

impl Catalog {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("catalog serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Catalog, CatalogError> {
        let catalog: Catalog = serde_json::from_str(text)?;
        if catalog.schema != SCHEMA_VERSION {
            return Err(CatalogError::Schema {
                found: catalog.schema,
            });
        }
        if let Some(i) = catalog
            .entries
            .windows(2)
            .position(|w| w[0].code >= w[1].code)
        {
            return Err(CatalogError::Unsorted(i + 1));
        }
        Ok(catalog)
    }
}
