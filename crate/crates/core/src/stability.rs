//! Orbit and type counting on lifts.
//!
//! The classes of `E*` over a parameter set `A` are the orbits of the
//! pointwise stabilizer `Aut(N/A)`. On a lift with `A ⊆ P^N` they are
//! classified by sort plus the `Aut(M/A)`-orbit of the fiber tuple, which
//! gives the decomposition identity
//!
//! ```text
//! |orbits Aut(N/A)| = 1 + |orbits Aut(M/A) on M|
//!                   + Σ_(R, i) |orbits Aut(M/A) on eligible tuples of (R, i)|
//! ```
//!
//! where the eligible tuples of a limit copy are the tuples of `R`. Summing
//! over copy indices gives the growth law `1 + o_M + Σ_R (k·o_fib + o_R)`.

use std::collections::BTreeMap;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::exec;
use crate::lift::{eligible_tuples, lift, CopyIndex, LiftConfig, LiftError, LiftedStructure, RelKey, SortKind};
use crate::perm::automorphism_group;
use crate::structure::{Element, Signature, Structure, SubsetOfDomain};

/// Largest term depth `qf_type_census` accepts.
pub const MAX_TYPE_DEPTH: usize = 2;

/// Stated at the top of every census report.
pub const CENSUS_NOTE: &str = "Orbits of Aut(N/A) inside one finite lift stand in for types over a saturated \
model. Extending an arbitrary permutation of P has no finite counterpart; the orbit decomposition identity is \
checked in its place. Counts are evidence about the construction, not a proof of stability.";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StabilityError {
    #[error("term depth {depth} exceeds the limit {max}")]
    DepthGuard { depth: usize, max: usize },
    #[error("parameter {0} is outside the domain")]
    OutOfRange(Element),
    #[error("parameter {0} is not a P-element of the lift")]
    NotInP(Element),
    #[error("lift was not generated from this structure")]
    SourceMismatch,
    #[error(transparent)]
    Lift(#[from] LiftError),
}

/// Orbits of `Aut(n/a)` on the domain of `n`, ordered by least element.
/// Points of `a` outside the domain are fixed by every permutation and are
/// ignored.
pub fn estar_classes(n: &Structure, a: &SubsetOfDomain) -> Vec<Vec<Element>> {
    let a: SubsetOfDomain = a.iter().filter(|&x| x < n.domain()).collect();
    automorphism_group(n).pointwise_stabilizer(&a).domain_orbits()
}

/// Elements of `n` grouped by quantifier-free type over `A`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TypeCensus {
    pub depth: usize,
    /// Blocks of equal type, each sorted, ordered by least element.
    pub classes: Vec<Vec<Element>>,
}

impl TypeCensus {
    pub fn count(&self) -> usize {
        self.classes.len()
    }

    /// The least element of each block.
    pub fn representatives(&self) -> Vec<Element> {
        self.classes.iter().map(|c| c[0]).collect()
    }
}

/// Equality pattern over all terms plus the relation facts among distinct
/// values, naming each value by the first term that takes it. Two elements
/// with equal keys satisfy exactly the same atomic formulas.
type TypeKey = (Vec<usize>, Vec<Vec<Vec<usize>>>);

fn type_key(n: &Structure, words: &[Vec<usize>], ground: &[Element], b: Element) -> TypeKey {
    let values: Vec<Element> = words
        .iter()
        .map(|w| w.iter().fold(b, |x, &f| n.apply(f, x)))
        .chain(ground.iter().copied())
        .collect();
    let pattern: Vec<usize> = values
        .iter()
        .map(|v| values.iter().position(|u| u == v).unwrap())
        .collect();
    let firsts: Vec<usize> = (0..values.len()).filter(|&i| pattern[i] == i).collect();
    let facts = n
        .signature()
        .relations
        .iter()
        .enumerate()
        .map(|(r, sym)| {
            let count = firsts.len().pow(sym.arity as u32);
            (0..count)
                .map(|i| exec::unrank_tuple(i, firsts.len(), sym.arity))
                .map(|t| t.into_iter().map(|s| firsts[s]).collect::<Vec<_>>())
                .filter(|t| {
                    let tuple: Vec<Element> = t.iter().map(|&s| values[s]).collect();
                    n.holds(r, &tuple)
                })
                .collect()
        })
        .collect();
    (pattern, facts)
}

/// Function words of length at most `depth`, shortest first.
fn words(functions: usize, depth: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..depth {
        layer = layer
            .iter()
            .flat_map(|w: &Vec<usize>| {
                (0..functions).map(move |f| {
                    let mut w = w.clone();
                    w.push(f);
                    w
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

/// Groups the elements of `n` by the atomic formulas in one variable they
/// satisfy, over terms of depth at most `depth` built from the variable,
/// the constants and the parameters `a`.
pub fn qf_type_census(n: &Structure, a: &SubsetOfDomain, depth: usize) -> Result<TypeCensus, StabilityError> {
    if depth > MAX_TYPE_DEPTH {
        return Err(StabilityError::DepthGuard {
            depth,
            max: MAX_TYPE_DEPTH,
        });
    }
    if let Some(x) = a.iter().find(|&x| x >= n.domain()) {
        return Err(StabilityError::OutOfRange(x));
    }
    let words = words(n.signature().functions.len(), depth);
    let ground: Vec<Element> = n
        .constants()
        .iter()
        .copied()
        .chain(a.iter())
        .flat_map(|base| words.iter().map(move |w| (base, w)))
        .map(|(base, w)| w.iter().fold(base, |x, &f| n.apply(f, x)))
        .collect();
    let elements: Vec<Element> = n.elements().collect();
    let keys = exec::map(&elements, |&b| type_key(n, &words, &ground, b));
    let mut blocks: BTreeMap<TypeKey, Vec<Element>> = BTreeMap::new();
    for (b, key) in keys.into_iter().enumerate() {
        blocks.entry(key).or_default().push(b);
    }
    let mut classes: Vec<Vec<Element>> = blocks.into_values().collect();
    classes.sort();
    Ok(TypeCensus { depth, classes })
}

/// `"e"`, `"P"`, or `"<relation>:<copy index>"`.
pub fn sort_label(sig: &Signature, kind: SortKind) -> String {
    match kind {
        SortKind::E => "e".into(),
        SortKind::P => "P".into(),
        SortKind::Copy { relation, index } => format!("{}:{index}", sig.relations[relation].name),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SortOrbits {
    pub sort: String,
    /// Orbits of `Aut(N/A)` inside the sort.
    pub left: usize,
    /// The orbit count predicted from `Aut(M/A)`.
    pub right: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecompositionReport {
    pub k: usize,
    #[serde(rename = "A")]
    pub parameters: Vec<Element>,
    pub left: usize,
    pub right: usize,
    pub per_sort: Vec<SortOrbits>,
    pub holds: bool,
}

fn check_parameters(n: &LiftedStructure, a: &SubsetOfDomain) -> Result<SubsetOfDomain, StabilityError> {
    a.iter()
        .map(|x| n.p_preimage(x).ok_or(StabilityError::NotInP(x)))
        .collect()
}

/// Predicted orbit counts per sort from `Aut(M/A_M)` alone.
fn predicted(m: &Structure, k: usize, repetition_free: bool, a_m: &SubsetOfDomain) -> Vec<(SortKind, usize)> {
    let g = automorphism_group(m).pointwise_stabilizer(a_m);
    let mut out = vec![(SortKind::E, 1), (SortKind::P, g.domain_orbits().len())];
    for key in RelKey::all(m.signature()) {
        let tuples = eligible_tuples(m, key.arity, repetition_free);
        let related: Vec<Vec<Element>> = tuples
            .iter()
            .filter(|t| m.holds(key.relation, t))
            .cloned()
            .collect();
        let o_fib = g.tuple_orbits(&tuples).len();
        let o_r = g.tuple_orbits(&related).len();
        out.extend(CopyIndex::all(k).map(|index| {
            let count = match index {
                CopyIndex::Finite(_) => o_fib,
                CopyIndex::Limit => o_r,
            };
            (
                SortKind::Copy {
                    relation: key.relation,
                    index,
                },
                count,
            )
        }));
    }
    out
}

/// Compares the orbits of `Aut(N/A)` with the count predicted from
/// `Aut(M/A)`, sort by sort. `a` is given in ids of `n` and must lie in
/// `P^N`.
pub fn orbit_decomposition_check(
    m: &Structure,
    n: &LiftedStructure,
    a: &SubsetOfDomain,
) -> Result<DecompositionReport, StabilityError> {
    if n.source() != m {
        return Err(StabilityError::SourceMismatch);
    }
    let a_m = check_parameters(n, a)?;
    let mut left: BTreeMap<SortKind, usize> = BTreeMap::new();
    for orbit in estar_classes(n.structure(), a) {
        *left.entry(SortKind::of(&n.provenance()[orbit[0]])).or_default() += 1;
    }
    let per_sort: Vec<SortOrbits> = predicted(m, n.k(), n.repetition_free_fibers(), &a_m)
        .into_iter()
        .map(|(kind, right)| SortOrbits {
            sort: sort_label(m.signature(), kind),
            left: left.remove(&kind).unwrap_or(0),
            right,
        })
        .filter(|s| s.left + s.right > 0)
        .collect();
    debug_assert!(left.is_empty(), "every realized sort is predicted");
    let total_left = per_sort.iter().map(|s| s.left).sum();
    let total_right = per_sort.iter().map(|s| s.right).sum();
    Ok(DecompositionReport {
        k: n.k(),
        parameters: a.iter().collect(),
        left: total_left,
        right: total_right,
        holds: per_sort.iter().all(|s| s.left == s.right),
        per_sort,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl From<bool> for Verdict {
    fn from(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SortCensus {
    pub sort: String,
    pub orbits: usize,
    pub types: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CensusRow {
    pub k: usize,
    #[serde(rename = "A")]
    pub parameters: Vec<Element>,
    pub total: usize,
    pub per_sort: Vec<SortCensus>,
    pub growth_law: Verdict,
}

/// Totals over `k` for one parameter set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GrowthRow {
    #[serde(rename = "A")]
    pub parameters: Vec<Element>,
    pub k: Vec<usize>,
    pub total: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CensusReport {
    pub note: &'static str,
    pub structure: String,
    pub rows: Vec<CensusRow>,
    pub growth: Vec<GrowthRow>,
    /// Sorts where the type count exceeds the orbit count, or where types
    /// and orbits differ at depth 1 over no parameters.
    pub findings: Vec<String>,
}

impl CensusReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.growth_law == Verdict::Pass)
    }
}

/// Content id of a structure: the first 16 hex digits of the SHA-256 of its
/// canonical JSON.
pub fn structure_id(m: &Structure) -> String {
    Sha256::digest(m.to_json().as_bytes())[..8]
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// The census of `lift(m, k)` for every `k` in `ks` and parameter set in
/// `params`. Parameter sets are ids of `P`-elements, `1..=|M|`, which are
/// the same in every lift. Rows are ordered by parameter set, then `k`.
pub fn stability_report(
    m: &Structure,
    ks: &[usize],
    params: &[SubsetOfDomain],
) -> Result<CensusReport, StabilityError> {
    let jobs: Vec<(usize, &SubsetOfDomain)> = params
        .iter()
        .flat_map(|a| ks.iter().map(move |&k| (k, a)))
        .collect();
    let rows = exec::map(&jobs, |&(k, a)| census_row(m, k, a));
    let mut findings = Vec::new();
    let rows = rows
        .into_iter()
        .map(|r| {
            r.map(|(row, notes)| {
                findings.extend(notes);
                row
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let growth = params
        .iter()
        .map(|a| {
            let parameters: Vec<Element> = a.iter().collect();
            let mine: Vec<&CensusRow> = rows.iter().filter(|r| r.parameters == parameters).collect();
            GrowthRow {
                k: mine.iter().map(|r| r.k).collect(),
                total: mine.iter().map(|r| r.total).collect(),
                parameters,
            }
        })
        .collect();
    Ok(CensusReport {
        note: CENSUS_NOTE,
        structure: structure_id(m),
        rows,
        growth,
        findings,
    })
}

fn census_row(m: &Structure, k: usize, a: &SubsetOfDomain) -> Result<(CensusRow, Vec<String>), StabilityError> {
    let n = lift(m, &LiftConfig::new(k))?;
    let decomposition = orbit_decomposition_check(m, &n, a)?;
    let types = qf_type_census(n.structure(), a, 1)?;
    let mut type_counts: BTreeMap<String, usize> = BTreeMap::new();
    for class in &types.classes {
        let kind = SortKind::of(&n.provenance()[class[0]]);
        *type_counts.entry(sort_label(m.signature(), kind)).or_default() += 1;
    }
    let parameters: Vec<Element> = a.iter().collect();
    let mut notes = Vec::new();
    let per_sort: Vec<SortCensus> = decomposition
        .per_sort
        .iter()
        .filter(|s| s.left > 0)
        .map(|s| {
            let types = type_counts.get(&s.sort).copied().unwrap_or(0);
            if types > s.left || (a.is_empty() && types != s.left) {
                notes.push(format!(
                    "k={k} A={parameters:?} sort {}: {} orbits, {types} depth-1 types",
                    s.sort, s.left
                ));
            }
            SortCensus {
                sort: s.sort.clone(),
                orbits: s.left,
                types,
            }
        })
        .collect();
    let row = CensusRow {
        k,
        total: decomposition.left,
        growth_law: Verdict::from(decomposition.holds && decomposition.left == decomposition.right),
        parameters,
        per_sort,
    };
    Ok((row, notes))
}
