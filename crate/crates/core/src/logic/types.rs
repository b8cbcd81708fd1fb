use std::collections::BTreeMap;

use super::ast::{Formula, Term};
use super::eval::eval_tuple;
use crate::exec::unrank_tuple;
use crate::structure::{Element, Signature, Structure};

/// The set of depth-≤1 atomic one-variable formulas an element satisfies,
/// sorted canonically. Elements with equal atomic types form a sort.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomicType(Vec<Formula>);

impl AtomicType {
    pub fn from_formulas(mut formulas: Vec<Formula>) -> Self {
        formulas.sort();
        formulas.dedup();
        AtomicType(formulas)
    }

    pub fn formulas(&self) -> &[Formula] {
        &self.0
    }

    pub fn contains(&self, phi: &Formula) -> bool {
        self.0.binary_search(phi).is_ok()
    }

    /// Printed members, in order.
    pub fn to_strings(&self, sig: &Signature) -> Vec<String> {
        self.0.iter().map(|f| f.display(sig).to_string()).collect()
    }
}

/// Terms `x0`, `F(x0)` for every function `F`, and every constant.
fn depth_one_terms(sig: &Signature) -> Vec<Term> {
    std::iter::once(Term::Var(0))
        .chain((0..sig.functions.len()).map(|f| Term::app(f, Term::Var(0))))
        .chain((0..sig.constants.len()).map(Term::Const))
        .collect()
}

fn mentions_var(t: &Term) -> bool {
    !matches!(t, Term::Const(_))
}

/// All atomic formulas in the single free variable `x0` whose terms have at
/// most one function application: `t = t'`, `t = c` and `R(t, …, t)`.
/// Equalities are listed once per unordered pair.
pub fn delta2_formulas(sig: &Signature) -> Vec<Formula> {
    let terms = depth_one_terms(sig);
    let mut out = Vec::new();
    for (i, a) in terms.iter().enumerate() {
        for b in &terms[i..] {
            if mentions_var(a) || mentions_var(b) {
                out.push(Formula::Equal(a.clone(), b.clone()));
            }
        }
    }
    for (r, sym) in sig.relations.iter().enumerate() {
        for i in 0..terms.len().pow(sym.arity as u32) {
            let args: Vec<Term> = unrank_tuple(i, terms.len(), sym.arity)
                .into_iter()
                .map(|t| terms[t].clone())
                .collect();
            if args.iter().any(mentions_var) {
                out.push(Formula::Rel(r, args));
            }
        }
    }
    out.sort();
    out
}

fn type_with(m: &Structure, formulas: &[Formula], a: Element) -> AtomicType {
    AtomicType(
        formulas
            .iter()
            .filter(|phi| eval_tuple(m, phi, &[a]))
            .cloned()
            .collect(),
    )
}

/// `tp_Δ₂(a, ∅, M)`.
pub fn atomic_type(m: &Structure, a: Element) -> AtomicType {
    type_with(m, &delta2_formulas(m.signature()), a)
}

/// Atomic type of every element, indexed by element.
pub fn atomic_types(m: &Structure) -> Vec<AtomicType> {
    let formulas = delta2_formulas(m.signature());
    m.elements().map(|a| type_with(m, &formulas, a)).collect()
}

/// Partition of the domain into sorts, keyed and ordered by atomic type.
/// Each block lists its elements in increasing order.
pub fn sort_partition(m: &Structure) -> BTreeMap<AtomicType, Vec<Element>> {
    let mut blocks: BTreeMap<AtomicType, Vec<Element>> = BTreeMap::new();
    for (a, tp) in atomic_types(m).into_iter().enumerate() {
        blocks.entry(tp).or_default().push(a);
    }
    blocks
}
