//! The stabilized lift `N_M` of a finite relational structure `M`.
//!
//! `N_M` has a constant `e`, a copy `P` of `M`, and for every relation `R`
//! of `M` and every eligible tuple `ā` a fiber of copies `Copy(R, i, ā)`,
//! `i < k`, plus a limit copy `Copy(R, ∞, ā)` exactly when `ā ∈ R`. The
//! functions `F_R_ι` return coordinates and `G_R_j` select copy `j` of the
//! same fiber; a limit copy is the fiber element fixed by no `G_R_j`, which
//! is what forces `Aut(N_M) ≅ Aut(M)`.
//!
//! Element ids: `e = 0`, then `P`-elements `1..=|M|` in the order of `M`,
//! then fibers ordered by (arity, rank among relations of that arity, tuple
//! lexicographically, copy index with `∞` last).

mod construct;
mod maps;
mod padding;
mod scheme;

use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

pub use construct::{lift, truncation_embedding, Fiber, LiftedStructure, RelLayout};
pub(crate) use construct::eligible_tuples;
pub use maps::{continuity_witness, direct_induced, limit_elements, project_automorphism};
pub use padding::{canonical_padding, PadEntry, PaddingAssignment};
pub use scheme::{generate_scheme, sort_kinds, SortKind};

use crate::interp::SchemeError;
use crate::perm::PermError;
use crate::structure::{Element, Signature, StructureError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LiftError {
    #[error("the lift is defined for relational structures only")]
    NotRelational,
    #[error("copy bound must be at least 1")]
    ZeroCopies,
    #[error("invalid padding: {0}")]
    InvalidPadding(String),
    #[error("lifted signature is invalid: {0}")]
    Signature(#[from] StructureError),
    #[error("fiber of {relation}{tuple:?}: limit element has no target, {relation}{image:?} does not hold")]
    LimitHasNoTarget {
        relation: String,
        tuple: Vec<Element>,
        image: Vec<Element>,
    },
    #[error("permutation is not an automorphism of the lift")]
    NotAutomorphism,
    #[error("permutation moves P-element {0} outside P")]
    LeavesP(Element),
    #[error("lift was not generated from this structure")]
    SourceMismatch,
    #[error("the source structure is empty")]
    EmptySource,
    #[error(transparent)]
    Perm(#[from] PermError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

/// `i < k` or the limit index, ordered with the limit last.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CopyIndex {
    Finite(usize),
    Limit,
}

impl CopyIndex {
    /// `0, …, k-1, ∞`.
    pub fn all(k: usize) -> impl Iterator<Item = CopyIndex> + Clone {
        (0..k).map(CopyIndex::Finite).chain(std::iter::once(CopyIndex::Limit))
    }
}

impl fmt::Display for CopyIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CopyIndex::Finite(j) => write!(f, "{j}"),
            CopyIndex::Limit => f.write_str("inf"),
        }
    }
}

impl Serialize for CopyIndex {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            CopyIndex::Finite(j) => s.serialize_u64(*j as u64),
            CopyIndex::Limit => s.serialize_str("inf"),
        }
    }
}

/// A relation of `M` by arity and rank among the relations of that arity;
/// the order on keys is the order in which fibers are laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct RelKey {
    pub arity: usize,
    pub rank: usize,
    pub relation: usize,
}

impl RelKey {
    pub fn all(sig: &Signature) -> Vec<RelKey> {
        let mut keys: Vec<RelKey> = sig
            .relations
            .iter()
            .enumerate()
            .map(|(relation, sym)| RelKey {
                arity: sym.arity,
                rank: sig.relations[..relation]
                    .iter()
                    .filter(|r| r.arity == sym.arity)
                    .count(),
                relation,
            })
            .collect();
        keys.sort();
        keys
    }
}

/// Which part of the lift an element belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Provenance {
    Econst,
    Pelem(Element),
    Copy {
        relation: usize,
        index: CopyIndex,
        tuple: Vec<Element>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Padding {
    Auto,
    /// Paddings in triple order.
    Explicit(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftConfig {
    pub k: usize,
    pub include_repetition_tuples: bool,
    pub padding: Padding,
}

impl LiftConfig {
    pub fn new(k: usize) -> Self {
        LiftConfig {
            k,
            include_repetition_tuples: false,
            padding: Padding::Auto,
        }
    }

    pub fn with_repetitions(mut self, include: bool) -> Self {
        self.include_repetition_tuples = include;
        self
    }

    pub fn with_padding(mut self, padding: Padding) -> Self {
        self.padding = padding;
        self
    }
}
