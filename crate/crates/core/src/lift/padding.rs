use serde::Serialize;

use super::{CopyIndex, LiftError, RelKey};
use crate::structure::Signature;

/// One padded copy sort: `width = arity + padding`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PadEntry {
    pub arity: usize,
    pub rank: usize,
    pub index: CopyIndex,
    pub padding: usize,
    pub width: usize,
}

/// Paddings for every `(arity, rank, copy index)` triple, in triple order
/// (copy indices `0..k`, then the limit index). Widths are pairwise distinct
/// and all greater than 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PaddingAssignment {
    entries: Vec<PadEntry>,
}

fn triples(sig: &Signature, k: usize) -> Vec<(RelKey, CopyIndex)> {
    RelKey::all(sig)
        .into_iter()
        .flat_map(|key| CopyIndex::all(k).map(move |i| (key, i)))
        .collect()
}

impl PaddingAssignment {
    /// Each triple in order gets the least width above the previous width,
    /// above `arity - 1` and above 1.
    pub fn canonical(sig: &Signature, k: usize) -> Self {
        let mut last = 0;
        let entries = triples(sig, k)
            .into_iter()
            .map(|(key, index)| {
                let width = last.max(key.arity - 1).max(1) + 1;
                last = width;
                PadEntry {
                    arity: key.arity,
                    rank: key.rank,
                    index,
                    padding: width - key.arity,
                    width,
                }
            })
            .collect();
        PaddingAssignment { entries }
    }

    /// Paddings listed in triple order.
    pub fn explicit(sig: &Signature, k: usize, paddings: &[usize]) -> Result<Self, LiftError> {
        let slots = triples(sig, k);
        if slots.len() != paddings.len() {
            return Err(LiftError::InvalidPadding(format!(
                "expected {} paddings, found {}",
                slots.len(),
                paddings.len()
            )));
        }
        let entries: Vec<PadEntry> = slots
            .into_iter()
            .zip(paddings)
            .map(|((key, index), &padding)| PadEntry {
                arity: key.arity,
                rank: key.rank,
                index,
                padding,
                width: key.arity + padding,
            })
            .collect();
        let mut widths: Vec<usize> = entries.iter().map(|e| e.width).collect();
        if let Some(w) = widths.iter().find(|&&w| w <= 1) {
            return Err(LiftError::InvalidPadding(format!("width {w} is not greater than 1")));
        }
        widths.sort_unstable();
        if let Some(w) = widths.windows(2).find(|w| w[0] == w[1]) {
            return Err(LiftError::InvalidPadding(format!("width {} is repeated", w[0])));
        }
        Ok(PaddingAssignment { entries })
    }

    pub fn entries(&self) -> &[PadEntry] {
        &self.entries
    }

    pub fn width(&self, key: RelKey, index: CopyIndex) -> usize {
        self.entries
            .iter()
            .find(|e| e.arity == key.arity && e.rank == key.rank && e.index == index)
            .map(|e| e.width)
            .expect("padding covers every triple")
    }
}

/// [`PaddingAssignment::canonical`].
pub fn canonical_padding(sig: &Signature, k: usize) -> PaddingAssignment {
    PaddingAssignment::canonical(sig, k)
}
