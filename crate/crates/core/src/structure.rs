//! Finite signatures and finite structures.
//!
//! Elements of a structure are the dense ids `0..domain`. Relation tuple
//! sets are kept in a `BTreeSet`, so two structures with the same
//! interpretation serialize byte-identically regardless of insertion order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Element = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StructureError {
    #[error("malformed structure document: {0}")]
    Syntax(String),
    #[error("invalid symbol name `{0}`")]
    BadName(String),
    #[error("duplicate symbol name `{0}`")]
    DuplicateName(String),
    #[error("relation `{0}` must have arity >= 1")]
    ZeroArity(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("missing interpretation for symbol `{0}`")]
    MissingSymbol(String),
    #[error("arity mismatch in `{name}`: expected {expected}, found {found}")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("out-of-range element {element} in `{name}` (domain size {domain})")]
    OutOfRange {
        name: String,
        element: usize,
        domain: usize,
    },
    #[error("function `{name}` is not total: {found} images for domain size {domain}")]
    NonTotal {
        name: String,
        found: usize,
        domain: usize,
    },
    #[error("repeated entry in relation `{name}` tuple {tuple:?}")]
    RepeatedEntry { name: String, tuple: Vec<Element> },
    #[error("signature mismatch")]
    SignatureMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationSymbol {
    pub name: String,
    pub arity: usize,
}

/// A finite vocabulary of relation symbols, unary function symbols and
/// constants. Symbols are referred to by their index within their kind.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Signature {
    #[serde(default)]
    pub relations: Vec<RelationSymbol>,
    #[serde(default)]
    pub functions: Vec<String>,
    #[serde(default)]
    pub constants: Vec<String>,
}

/// What a bare identifier resolves to inside a signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symbol {
    Relation(usize),
    Function(usize),
    Constant(usize),
}

pub(crate) fn is_variable_name(name: &str) -> bool {
    name.len() > 1 && name.starts_with('x') && name[1..].bytes().all(|b| b.is_ascii_digit())
}

fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !is_variable_name(name)
        && name != "exists"
}

impl Signature {
    pub fn new(
        relations: Vec<RelationSymbol>,
        functions: Vec<String>,
        constants: Vec<String>,
    ) -> Result<Self, StructureError> {
        let sig = Signature {
            relations,
            functions,
            constants,
        };
        sig.check()?;
        Ok(sig)
    }

    /// A signature with relation symbols only.
    pub fn relational<S: Into<String>>(
        relations: impl IntoIterator<Item = (S, usize)>,
    ) -> Result<Self, StructureError> {
        Self::new(
            relations
                .into_iter()
                .map(|(name, arity)| RelationSymbol {
                    name: name.into(),
                    arity,
                })
                .collect(),
            Vec::new(),
            Vec::new(),
        )
    }

    pub fn check(&self) -> Result<(), StructureError> {
        let mut seen = BTreeSet::new();
        let names = self
            .relations
            .iter()
            .map(|r| r.name.as_str())
            .chain(self.functions.iter().map(String::as_str))
            .chain(self.constants.iter().map(String::as_str));
        for name in names {
            if !is_valid_name(name) {
                return Err(StructureError::BadName(name.to_string()));
            }
            if !seen.insert(name) {
                return Err(StructureError::DuplicateName(name.to_string()));
            }
        }
        if let Some(r) = self.relations.iter().find(|r| r.arity == 0) {
            return Err(StructureError::ZeroArity(r.name.clone()));
        }
        Ok(())
    }

    pub fn lookup(&self, name: &str) -> Option<Symbol> {
        if let Some(i) = self.relations.iter().position(|r| r.name == name) {
            return Some(Symbol::Relation(i));
        }
        if let Some(i) = self.functions.iter().position(|f| f == name) {
            return Some(Symbol::Function(i));
        }
        self.constants
            .iter()
            .position(|c| c == name)
            .map(Symbol::Constant)
    }

    pub fn relation_index(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|r| r.name == name)
    }

    pub fn is_relational(&self) -> bool {
        self.functions.is_empty() && self.constants.is_empty()
    }
}

/// A finite structure over a [`Signature`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Structure {
    signature: Signature,
    domain: usize,
    relations: Vec<BTreeSet<Vec<Element>>>,
    functions: Vec<Vec<Element>>,
    constants: Vec<Element>,
    repetition_free: bool,
}

impl Structure {
    /// Builds and validates a structure. `relations`, `functions` and
    /// `constants` are indexed like the corresponding symbol lists.
    pub fn new(
        signature: Signature,
        domain: usize,
        relations: Vec<Vec<Vec<Element>>>,
        functions: Vec<Vec<Element>>,
        constants: Vec<Element>,
        repetition_free: bool,
    ) -> Result<Self, StructureError> {
        signature.check()?;
        if relations.len() != signature.relations.len() {
            return Err(StructureError::SignatureMismatch);
        }
        if functions.len() != signature.functions.len()
            || constants.len() != signature.constants.len()
        {
            return Err(StructureError::SignatureMismatch);
        }
        let mut rels = Vec::with_capacity(relations.len());
        for (sym, tuples) in signature.relations.iter().zip(relations) {
            let mut set = BTreeSet::new();
            for tuple in tuples {
                if tuple.len() != sym.arity {
                    return Err(StructureError::ArityMismatch {
                        name: sym.name.clone(),
                        expected: sym.arity,
                        found: tuple.len(),
                    });
                }
                if let Some(&bad) = tuple.iter().find(|&&a| a >= domain) {
                    return Err(StructureError::OutOfRange {
                        name: sym.name.clone(),
                        element: bad,
                        domain,
                    });
                }
                if repetition_free && has_repetition(&tuple) {
                    return Err(StructureError::RepeatedEntry {
                        name: sym.name.clone(),
                        tuple,
                    });
                }
                set.insert(tuple);
            }
            rels.push(set);
        }
        for (name, images) in signature.functions.iter().zip(&functions) {
            if images.len() != domain {
                return Err(StructureError::NonTotal {
                    name: name.clone(),
                    found: images.len(),
                    domain,
                });
            }
            if let Some(&bad) = images.iter().find(|&&a| a >= domain) {
                return Err(StructureError::OutOfRange {
                    name: name.clone(),
                    element: bad,
                    domain,
                });
            }
        }
        for (name, &c) in signature.constants.iter().zip(&constants) {
            if c >= domain {
                return Err(StructureError::OutOfRange {
                    name: name.clone(),
                    element: c,
                    domain,
                });
            }
        }
        Ok(Structure {
            signature,
            domain,
            relations: rels,
            functions,
            constants,
            repetition_free,
        })
    }

    /// Convenience constructor for purely relational structures.
    pub fn relational(
        signature: Signature,
        domain: usize,
        relations: Vec<Vec<Vec<Element>>>,
    ) -> Result<Self, StructureError> {
        Self::new(signature, domain, relations, Vec::new(), Vec::new(), true)
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn domain(&self) -> usize {
        self.domain
    }

    pub fn elements(&self) -> std::ops::Range<Element> {
        0..self.domain
    }

    pub fn relation(&self, index: usize) -> &BTreeSet<Vec<Element>> {
        &self.relations[index]
    }

    pub fn relations(&self) -> &[BTreeSet<Vec<Element>>] {
        &self.relations
    }

    pub fn holds(&self, relation: usize, tuple: &[Element]) -> bool {
        self.relations[relation].contains(tuple)
    }

    pub fn function(&self, index: usize) -> &[Element] {
        &self.functions[index]
    }

    pub fn apply(&self, function: usize, a: Element) -> Element {
        self.functions[function][a]
    }

    pub fn constant(&self, index: usize) -> Element {
        self.constants[index]
    }

    pub fn constants(&self) -> &[Element] {
        &self.constants
    }

    pub fn repetition_free(&self) -> bool {
        self.repetition_free
    }

    pub fn is_relational(&self) -> bool {
        self.signature.is_relational()
    }

    pub fn from_json(text: &str) -> Result<Self, StructureError> {
        let doc: StructureDoc =
            serde_json::from_str(text).map_err(|e| StructureError::Syntax(e.to_string()))?;
        Self::from_doc(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_doc()).expect("structure documents always serialize")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("structure documents always serialize")
    }

    pub fn to_doc(&self) -> StructureDoc {
        StructureDoc {
            signature: self.signature.clone(),
            domain: self.domain,
            relations: self
                .signature
                .relations
                .iter()
                .zip(&self.relations)
                .map(|(s, t)| (s.name.clone(), t.iter().cloned().collect()))
                .collect(),
            functions: self
                .signature
                .functions
                .iter()
                .cloned()
                .zip(self.functions.iter().cloned())
                .collect(),
            constants: self
                .signature
                .constants
                .iter()
                .cloned()
                .zip(self.constants.iter().copied())
                .collect(),
            repetition_free: self.repetition_free,
        }
    }

    pub fn from_doc(doc: StructureDoc) -> Result<Self, StructureError> {
        validate_structure(&doc.signature.clone(), doc)
    }
}

fn has_repetition(tuple: &[Element]) -> bool {
    tuple
        .iter()
        .enumerate()
        .any(|(i, a)| tuple[i + 1..].contains(a))
}

/// The on-disk JSON layout of a structure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureDoc {
    pub signature: Signature,
    pub domain: usize,
    #[serde(default)]
    pub relations: BTreeMap<String, Vec<Vec<Element>>>,
    #[serde(default)]
    pub functions: BTreeMap<String, Vec<Element>>,
    #[serde(default)]
    pub constants: BTreeMap<String, Element>,
    #[serde(default = "default_true")]
    pub repetition_free: bool,
}

fn default_true() -> bool {
    true
}

/// Checks a parsed document against `sig` and builds the structure.
pub fn validate_structure(sig: &Signature, raw: StructureDoc) -> Result<Structure, StructureError> {
    sig.check()?;
    if &raw.signature != sig {
        return Err(StructureError::SignatureMismatch);
    }
    let StructureDoc {
        domain,
        mut relations,
        mut functions,
        mut constants,
        repetition_free,
        ..
    } = raw;
    let mut rels = Vec::new();
    for sym in &sig.relations {
        rels.push(
            relations
                .remove(&sym.name)
                .ok_or_else(|| StructureError::MissingSymbol(sym.name.clone()))?,
        );
    }
    let mut funs = Vec::new();
    for name in &sig.functions {
        funs.push(
            functions
                .remove(name)
                .ok_or_else(|| StructureError::MissingSymbol(name.clone()))?,
        );
    }
    let mut consts = Vec::new();
    for name in &sig.constants {
        consts.push(
            constants
                .remove(name)
                .ok_or_else(|| StructureError::MissingSymbol(name.clone()))?,
        );
    }
    let stray = relations
        .into_keys()
        .chain(functions.into_keys())
        .chain(constants.into_keys())
        .next();
    if let Some(name) = stray {
        return Err(StructureError::UnknownSymbol(name));
    }
    Structure::new(sig.clone(), domain, rels, funs, consts, repetition_free)
}

/// Where a relation of a relational companion came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompanionOrigin {
    Relation(usize),
    FunctionGraph(usize),
    Constant(usize),
}

/// Replaces every unary function by its graph (a binary relation with the
/// same name) and every constant by a unary singleton relation with the same
/// name. Original relations keep their indices; graphs follow in function
/// order, then the constant relations in constant order.
pub fn relational_companion(m: &Structure) -> Structure {
    let sig = m.signature();
    let mut symbols = sig.relations.clone();
    let mut relations: Vec<Vec<Vec<Element>>> = m
        .relations
        .iter()
        .map(|t| t.iter().cloned().collect())
        .collect();
    for (f, name) in sig.functions.iter().enumerate() {
        symbols.push(RelationSymbol {
            name: name.clone(),
            arity: 2,
        });
        relations.push(m.elements().map(|x| vec![x, m.apply(f, x)]).collect());
    }
    for (c, name) in sig.constants.iter().enumerate() {
        symbols.push(RelationSymbol {
            name: name.clone(),
            arity: 1,
        });
        relations.push(vec![vec![m.constant(c)]]);
    }
    let companion_sig = Signature::new(symbols, Vec::new(), Vec::new())
        .expect("companion names are inherited from a valid signature");
    Structure::new(companion_sig, m.domain, relations, Vec::new(), Vec::new(), false)
        .expect("companion of a valid structure is valid")
}

/// Origin of each relation of `relational_companion(m)`, by index.
pub fn companion_origins(sig: &Signature) -> Vec<CompanionOrigin> {
    (0..sig.relations.len())
        .map(CompanionOrigin::Relation)
        .chain((0..sig.functions.len()).map(CompanionOrigin::FunctionGraph))
        .chain((0..sig.constants.len()).map(CompanionOrigin::Constant))
        .collect()
}

/// Identical interpretations (not isomorphism). The repetition-free flag is
/// a validation setting and does not take part in the comparison.
pub fn structures_equal(m1: &Structure, m2: &Structure) -> Result<bool, StructureError> {
    if m1.signature != m2.signature {
        return Err(StructureError::SignatureMismatch);
    }
    Ok(m1.domain == m2.domain
        && m1.relations == m2.relations
        && m1.functions == m2.functions
        && m1.constants == m2.constants)
}

/// A set of element ids of some structure.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubsetOfDomain(BTreeSet<Element>);

impl SubsetOfDomain {
    pub fn new(
        domain: usize,
        elements: impl IntoIterator<Item = Element>,
    ) -> Result<Self, StructureError> {
        let set: BTreeSet<_> = elements.into_iter().collect();
        if let Some(&bad) = set.iter().find(|&&a| a >= domain) {
            return Err(StructureError::OutOfRange {
                name: "subset".into(),
                element: bad,
                domain,
            });
        }
        Ok(SubsetOfDomain(set))
    }

    pub fn empty() -> Self {
        SubsetOfDomain(BTreeSet::new())
    }

    pub fn contains(&self, a: Element) -> bool {
        self.0.contains(&a)
    }

    pub fn iter(&self) -> impl Iterator<Item = Element> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn union(&self, other: &SubsetOfDomain) -> SubsetOfDomain {
        SubsetOfDomain(self.0.union(&other.0).copied().collect())
    }

    pub fn as_set(&self) -> &BTreeSet<Element> {
        &self.0
    }
}

impl FromIterator<Element> for SubsetOfDomain {
    fn from_iter<I: IntoIterator<Item = Element>>(iter: I) -> Self {
        SubsetOfDomain(iter.into_iter().collect())
    }
}

impl fmt::Display for SubsetOfDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m0_json() -> &'static str {
        r#"{"signature": {"relations": [{"name": "R", "arity": 2}], "functions": [], "constants": []}, "domain": 2, "relations": {"R": [[0,1]]}, "functions": {}, "constants": {}, "repetition_free": true}"#
    }

    fn binary() -> Signature {
        Signature::relational([("R", 2)]).unwrap()
    }

    #[test]
    fn minimal_structure_parses() {
        let m0 = Structure::from_json(m0_json()).unwrap();
        assert_eq!(m0.domain(), 2);
        assert!(m0.holds(0, &[0, 1]));
        assert!(!m0.holds(0, &[1, 0]));
    }

    #[test]
    fn out_of_range_element() {
        let err = Structure::relational(binary(), 2, vec![vec![vec![0, 2]]]).unwrap_err();
        assert!(matches!(err, StructureError::OutOfRange { element: 2, .. }));
        assert!(err.to_string().contains("out-of-range element"));
    }

    #[test]
    fn repeated_entry_rejected_when_flagged() {
        let err = Structure::relational(binary(), 2, vec![vec![vec![0, 0]]]).unwrap_err();
        assert!(err.to_string().contains("repeated entry"));
        let ok = Structure::new(binary(), 2, vec![vec![vec![0, 0]]], vec![], vec![], false);
        assert!(ok.is_ok());
    }

    #[test]
    fn arity_and_totality_errors() {
        let err = Structure::relational(binary(), 2, vec![vec![vec![0]]]).unwrap_err();
        assert!(matches!(err, StructureError::ArityMismatch { .. }));
        let sig = Signature::new(vec![], vec!["f".into()], vec![]).unwrap();
        let err = Structure::new(sig, 2, vec![], vec![vec![0]], vec![], true).unwrap_err();
        assert!(matches!(err, StructureError::NonTotal { .. }));
    }

    #[test]
    fn unknown_keys_and_symbols_rejected() {
        let extra = m0_json().replace("\"domain\": 2", "\"domain\": 2, \"colour\": 1");
        assert!(matches!(
            Structure::from_json(&extra),
            Err(StructureError::Syntax(_))
        ));
        let stray = m0_json().replace("\"constants\": {}", "\"constants\": {\"c\": 0}");
        assert!(matches!(
            Structure::from_json(&stray),
            Err(StructureError::UnknownSymbol(_))
        ));
    }

    #[test]
    fn bad_names_rejected() {
        assert!(Signature::relational([("x0", 1)]).is_err());
        assert!(Signature::relational([("exists", 1)]).is_err());
        assert!(Signature::relational([("R", 1), ("R", 2)]).is_err());
        assert!(Signature::relational([("R", 0)]).is_err());
        assert!(Signature::relational([("x", 1), ("xa1", 1)]).is_ok());
    }

    #[test]
    fn equality_ignores_tuple_order() {
        let a = Structure::relational(binary(), 3, vec![vec![vec![0, 1], vec![2, 1]]]).unwrap();
        let b = Structure::relational(binary(), 3, vec![vec![vec![2, 1], vec![0, 1]]]).unwrap();
        let c = Structure::relational(binary(), 3, vec![vec![]]).unwrap();
        assert!(structures_equal(&a, &b).unwrap());
        assert!(!structures_equal(&a, &c).unwrap());
        assert_eq!(a.to_json(), b.to_json());
        let other = Structure::relational(Signature::relational([("S", 2)]).unwrap(), 3, vec![vec![]])
            .unwrap();
        assert!(structures_equal(&a, &other).is_err());
    }

    #[test]
    fn companion_of_function_and_constant() {
        let sig = Signature::new(vec![], vec!["f".into()], vec!["c".into()]).unwrap();
        let m = Structure::new(sig, 2, vec![], vec![vec![0, 1]], vec![0], true).unwrap();
        let comp = relational_companion(&m);
        assert!(comp.is_relational());
        assert_eq!(comp.relation(0).iter().cloned().collect::<Vec<_>>(), vec![vec![0, 0], vec![1, 1]]);
        assert_eq!(comp.relation(1).iter().cloned().collect::<Vec<_>>(), vec![vec![0]]);
        assert!(!comp.repetition_free());
    }

    #[test]
    fn json_round_trip() {
        let m0 = Structure::from_json(m0_json()).unwrap();
        let back = Structure::from_json(&m0.to_json()).unwrap();
        assert_eq!(m0, back);
    }
}
