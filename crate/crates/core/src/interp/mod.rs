//! Sort-by-sort interpretation schemes: data model, validation, the
//! automorphism map a valid scheme induces, and a checker for classical
//! (single-domain) interpretations.

mod classical;
mod doc;
mod induced;
mod mutate;
mod quotient;
mod validate;

use serde::Serialize;
use thiserror::Error;

pub use classical::check_classical_interpretation;
pub use doc::{MapDoc, SchemeDoc, SchemeRelDoc, SchemeSortDoc};
pub use induced::{induced_automorphism, SchemeModel};
pub use mutate::Mutation;
pub use quotient::{quotient, Quotient, QuotientError};
pub use validate::{validate_scheme, SPOT_CHECK_MAX_SOURCE};

use crate::logic::{AtomicType, EvalError, Formula, ParseError};
use crate::perm::{PermError, Permutation};
use crate::structure::Element;

/// Interpretation of one sort `p` of the target: tuples of width `width`
/// satisfying `domain`, modulo `equivalence` (read on `2 * width` variables).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeSort {
    pub key: AtomicType,
    pub width: usize,
    pub domain: Formula,
    pub equivalence: Formula,
}

/// Translation of relation `relation` of the target restricted to the sort
/// tuple `sorts`. Free variables come in consecutive blocks, one per sort.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeRel {
    pub relation: usize,
    pub sorts: Vec<usize>,
    pub formula: Formula,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InterpretationScheme {
    pub sorts: Vec<SchemeSort>,
    pub relations: Vec<SchemeRel>,
}

impl InterpretationScheme {
    pub fn sort_index(&self, key: &AtomicType) -> Option<usize> {
        self.sorts.iter().position(|s| &s.key == key)
    }

    pub fn relation_formula(&self, relation: usize, sorts: &[usize]) -> Option<&SchemeRel> {
        self.relations
            .iter()
            .find(|r| r.relation == relation && r.sorts == sorts)
    }
}

/// For each scheme sort, the pairs `(b, b̄)` naming the class of `b̄` as the
/// image of target element `b`, sorted by element.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SortBijections {
    pub maps: Vec<Vec<(Element, Vec<Element>)>>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchemeError {
    #[error("interpretation requires relational structures")]
    NotRelational,
    #[error("sort index {0} is out of range")]
    UnknownSort(usize),
    #[error("relation index {0} is out of range")]
    UnknownRelation(usize),
    #[error("{subject}: expected width {expected}, found {found}")]
    WidthMismatch {
        subject: String,
        expected: usize,
        found: usize,
    },
    #[error("{maps} sort maps for {sorts} sorts")]
    MapCountMismatch { maps: usize, sorts: usize },
    #[error("element {0} is outside the target domain")]
    OutOfRange(Element),
    #[error("element {0} has no image")]
    NotTotal(Element),
    #[error("element {element} of sort {sort}: image class not in the quotient")]
    ClassNotInRange { sort: usize, element: Element },
    #[error("sort {sort} is not a valid quotient: {source}")]
    Quotient { sort: usize, source: QuotientError },
    #[error("sort map {0} is not a bijection onto the quotient")]
    NotBijective(usize),
    #[error("permutation is not an automorphism of the source")]
    NotAutomorphism,
    #[error(transparent)]
    Perm(#[from] PermError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    SortCoverage,
    Equivalence,
    RelationCoverage,
    SortBijection,
    RelationAgreement,
    RepresentativeIndependence,
    Domain,
    Bijection,
    Invariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

/// A counterexample small enough to re-check by hand.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    /// A target element whose sort has no scheme sort.
    UncoveredSort { element: Element },
    /// A scheme sort whose key is not realized, or repeats an earlier key.
    SpuriousSort { sort: usize },
    EmptyDomain { sort: usize },
    NotReflexive { sort: usize, tuple: Vec<Element> },
    NotSymmetric { sort: usize, pair: [Vec<Element>; 2] },
    NotTransitive { sort: usize, triple: [Vec<Element>; 3] },
    /// A realized (relation, sort tuple) without a formula, or with two.
    UncoveredRelation { relation: usize, sorts: Vec<usize> },
    DuplicateRelation { relation: usize, sorts: Vec<usize> },
    WrongSort { sort: usize, element: Element },
    Unmapped { sort: usize, element: Element },
    NotInDomain { sort: usize, element: Element, tuple: Vec<Element> },
    NotInjective { sort: usize, elements: [Element; 2], class: Vec<Element> },
    NotSurjective { sort: usize, class: Vec<Element> },
    /// `R(tuple)` in the target disagrees with the formula on `representatives`.
    RelationMismatch {
        relation: usize,
        tuple: Vec<Element>,
        representatives: Vec<Vec<Element>>,
        target_holds: bool,
    },
    /// Replacing one representative by another class member changes the truth value.
    RepresentativeDependence {
        relation: usize,
        tuple: Vec<Element>,
        position: usize,
        member: Vec<Element>,
    },
    /// `automorphism` moves a tuple of `relation` outside it.
    NotInvariant {
        relation: usize,
        tuple: Vec<Element>,
        image: Vec<Element>,
        automorphism: Permutation,
    },
}

impl Witness {
    pub(crate) fn from_quotient(sort: usize, err: QuotientError) -> Option<Witness> {
        match err {
            QuotientError::NotReflexive(tuple) => Some(Witness::NotReflexive { sort, tuple }),
            QuotientError::NotSymmetric(a, b) => Some(Witness::NotSymmetric { sort, pair: [a, b] }),
            QuotientError::NotTransitive(a, b, c) => Some(Witness::NotTransitive {
                sort,
                triple: [a, b, c],
            }),
            QuotientError::Eval(_) | QuotientError::WidthMismatch { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub condition: Condition,
    pub status: Status,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    /// No check failed (skipped checks do not count against).
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn check(&self, condition: Condition) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.condition == condition)
    }

    pub fn first_failure(&self) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.status == Status::Fail)
    }

    pub(crate) fn push(&mut self, condition: Condition, detail: String, witness: Option<Witness>) {
        let status = if witness.is_some() {
            Status::Fail
        } else {
            Status::Pass
        };
        self.checks.push(CheckResult {
            condition,
            status,
            detail,
            witness,
        });
    }

    pub(crate) fn skip(&mut self, condition: Condition, detail: String) {
        self.checks.push(CheckResult {
            condition,
            status: Status::Skipped,
            detail,
            witness: None,
        });
    }
}
