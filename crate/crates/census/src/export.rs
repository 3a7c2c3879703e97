//! Regular dessins as monodromy pairs.

use quasiplatonic_core::{CosetTable, Letter, Signature};
use serde::{Deserialize, Serialize};

use crate::store::{CensusRecord, CensusStore, StoreError};

/// A regular dessin: the permutations of `γ0` and `γ1` on its `n` darts
/// (numbered from 0), which generate a group of order `n` acting regularly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dessin {
    pub signature: String,
    pub genus: u64,
    /// Number of darts, which is also the order of the automorphism group.
    pub n: u64,
    pub key: String,
    pub x: Vec<u32>,
    pub y: Vec<u32>,
}

impl Dessin {
    pub fn from_record(r: &CensusRecord) -> Option<Dessin> {
        let t = CosetTable::from_bytes(&r.table).ok()?;
        Some(Dessin {
            signature: r.signature.to_string(),
            genus: r.genus,
            n: r.index,
            key: r.key.to_hex(),
            x: t.permutation(Letter::G0),
            y: t.permutation(Letter::G1),
        })
    }

    /// Canonical table bytes regenerated from the permutations.
    pub fn table_bytes(&self) -> Vec<u8> {
        CosetTable::from_permutations(&self.x, &self.y).standardize().to_bytes().expect("complete")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExportFilter {
    pub genus: Option<u64>,
    pub signature: Option<Signature>,
}

impl ExportFilter {
    pub fn accepts(&self, r: &CensusRecord) -> bool {
        self.genus.is_none_or(|g| r.genus == g) && self.signature.is_none_or(|s| r.signature == s)
    }
}

/// Dessins of the complete units in the store, in canonical record order.
pub fn export_dessins(store: &CensusStore, filter: &ExportFilter) -> Result<Vec<Dessin>, StoreError> {
    Ok(store.records()?.iter().filter(|r| filter.accepts(r)).filter_map(Dessin::from_record).collect())
}
