use std::fmt;
use std::str::FromStr;

use super::{quotient, InterpretationScheme, SortBijections};
use crate::logic::Formula;
use crate::structure::Structure;

/// A single-point corruption of a scheme, used to show that validation
/// notices it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mutation {
    /// Negate relation formula `i`.
    NegateRelFormula(usize),
    /// Negate the equivalence of sort `p`; it stops being reflexive.
    NegateEquivalence(usize),
    /// Refine the equivalence of sort `p` to equality of whole tuples, which
    /// splits every class of size > 1.
    RefineEquivalence(usize),
    /// Send the second element of sort `p` to the class of the first, so
    /// some class is left without a preimage.
    CollapseMap(usize),
    /// Remove the image of the first element of sort `p`.
    DropImage(usize),
}

impl Mutation {
    pub const KINDS: [&'static str; 5] = [
        "negate-relformula",
        "negate-equivalence",
        "refine-equivalence",
        "collapse-map",
        "drop-image",
    ];

    fn parts(&self) -> (&'static str, usize) {
        match *self {
            Mutation::NegateRelFormula(i) => (Self::KINDS[0], i),
            Mutation::NegateEquivalence(i) => (Self::KINDS[1], i),
            Mutation::RefineEquivalence(i) => (Self::KINDS[2], i),
            Mutation::CollapseMap(i) => (Self::KINDS[3], i),
            Mutation::DropImage(i) => (Self::KINDS[4], i),
        }
    }

    /// Whether the mutation changes `(s, f)`.
    pub fn applies(&self, s: &InterpretationScheme, f: &SortBijections) -> bool {
        match *self {
            Mutation::NegateRelFormula(i) => i < s.relations.len(),
            Mutation::NegateEquivalence(p) | Mutation::RefineEquivalence(p) => p < s.sorts.len(),
            Mutation::CollapseMap(p) => f.maps.get(p).is_some_and(|m| m.len() >= 2),
            Mutation::DropImage(p) => f.maps.get(p).is_some_and(|m| !m.is_empty()),
        }
    }

    /// Every single-point mutation that changes the meaning of `(s, f)`
    /// over `m1`, in a fixed order. Refinement is listed only for sorts with
    /// a class of size > 1, where it is not a no-op.
    pub fn all(m1: &Structure, s: &InterpretationScheme, f: &SortBijections) -> Vec<Mutation> {
        let sorts = 0..s.sorts.len();
        (0..s.relations.len())
            .map(Mutation::NegateRelFormula)
            .chain(sorts.clone().map(Mutation::NegateEquivalence))
            .chain(sorts.clone().map(Mutation::RefineEquivalence))
            .chain(sorts.clone().map(Mutation::CollapseMap))
            .chain(sorts.map(Mutation::DropImage))
            .filter(|m| m.applies(s, f))
            .filter(|m| match *m {
                Mutation::RefineEquivalence(p) => {
                    let sort = &s.sorts[p];
                    quotient(m1, &sort.domain, &sort.equivalence)
                        .is_ok_and(|q| q.classes().iter().any(|c| c.len() > 1))
                }
                _ => true,
            })
            .collect()
    }

    /// The mutated pair, or `None` if the mutation does not apply.
    pub fn apply(&self, s: &InterpretationScheme, f: &SortBijections) -> Option<(InterpretationScheme, SortBijections)> {
        if !self.applies(s, f) {
            return None;
        }
        let (mut s, mut f) = (s.clone(), f.clone());
        match *self {
            Mutation::NegateRelFormula(i) => {
                let rel = &mut s.relations[i];
                rel.formula = Formula::not(rel.formula.clone());
            }
            Mutation::NegateEquivalence(p) => {
                let sort = &mut s.sorts[p];
                sort.equivalence = Formula::not(sort.equivalence.clone());
            }
            Mutation::RefineEquivalence(p) => {
                let sort = &mut s.sorts[p];
                let w = sort.width;
                let mut members = vec![sort.equivalence.clone()];
                members.extend((0..w).map(|t| Formula::eq_vars(t, w + t)));
                sort.equivalence = Formula::conj(members);
            }
            Mutation::CollapseMap(p) => {
                let first = f.maps[p][0].1.clone();
                f.maps[p][1].1 = first;
            }
            Mutation::DropImage(p) => {
                f.maps[p].remove(0);
            }
        }
        Some((s, f))
    }
}

impl fmt::Display for Mutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, index) = self.parts();
        write!(f, "{kind}:{index}")
    }
}

impl FromStr for Mutation {
    type Err = String;

    /// `kind` or `kind:index`; the index defaults to 0.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let (kind, index) = match text.split_once(':') {
            Some((kind, index)) => (kind, index.parse().map_err(|_| format!("bad index in `{text}`"))?),
            None => (text, 0),
        };
        Ok(match kind {
            "negate-relformula" => Mutation::NegateRelFormula(index),
            "negate-equivalence" => Mutation::NegateEquivalence(index),
            "refine-equivalence" => Mutation::RefineEquivalence(index),
            "collapse-map" => Mutation::CollapseMap(index),
            "drop-image" => Mutation::DropImage(index),
            _ => {
                return Err(format!(
                    "unknown mutation `{kind}`, expected one of {}",
                    Self::KINDS.join(", ")
                ))
            }
        })
    }
}
