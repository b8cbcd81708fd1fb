use std::collections::BTreeMap;

use super::padding::PaddingAssignment;
use super::{CopyIndex, LiftConfig, LiftError, Padding, Provenance, RelKey};
use crate::exec;
use crate::structure::{Element, RelationSymbol, Signature, Structure};

/// Symbol indices of the lifted signature belonging to one relation of `M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelLayout {
    pub key: RelKey,
    /// Relation index of `Q_R`.
    pub q: usize,
    /// Relation index of `E_R`.
    pub e: usize,
    /// Function indices of `F_R_0 … F_R_(n-1)`.
    pub f: Vec<usize>,
    /// Function indices of `G_R_0 … G_R_(k-1)`.
    pub g: Vec<usize>,
}

/// Ids of one fiber: `copies[j]` is copy `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fiber {
    pub copies: Vec<Element>,
    pub limit: Option<Element>,
}

impl Fiber {
    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        self.copies.iter().copied().chain(self.limit)
    }

    pub fn get(&self, index: CopyIndex) -> Option<Element> {
        match index {
            CopyIndex::Finite(j) => self.copies.get(j).copied(),
            CopyIndex::Limit => self.limit,
        }
    }
}

/// `N_M` with the provenance of every element.
#[derive(Debug, Clone)]
pub struct LiftedStructure {
    source: Structure,
    config: LiftConfig,
    padding: PaddingAssignment,
    structure: Structure,
    provenance: Vec<Provenance>,
    layouts: Vec<RelLayout>,
    fibers: BTreeMap<(usize, Vec<Element>), Fiber>,
}

impl LiftedStructure {
    pub fn source(&self) -> &Structure {
        &self.source
    }

    pub fn config(&self) -> &LiftConfig {
        &self.config
    }

    pub fn k(&self) -> usize {
        self.config.k
    }

    pub fn padding(&self) -> &PaddingAssignment {
        &self.padding
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    /// Layouts in fiber order.
    pub fn layouts(&self) -> &[RelLayout] {
        &self.layouts
    }

    pub fn layout(&self, relation: usize) -> &RelLayout {
        self.layouts
            .iter()
            .find(|l| l.key.relation == relation)
            .expect("every relation has a layout")
    }

    /// Fibers keyed by (relation of `M`, tuple), in id order within a relation.
    pub fn fibers(&self) -> &BTreeMap<(usize, Vec<Element>), Fiber> {
        &self.fibers
    }

    pub fn fiber(&self, relation: usize, tuple: &[Element]) -> Option<&Fiber> {
        self.fibers.get(&(relation, tuple.to_vec()))
    }

    /// Fibers range over repetition-free tuples only.
    pub fn repetition_free_fibers(&self) -> bool {
        self.source.repetition_free() && !self.config.include_repetition_tuples
    }

    /// Id of `Pelem(a)`.
    pub fn p_element(&self, a: Element) -> Element {
        1 + a
    }

    /// `a` if `x = Pelem(a)`.
    pub fn p_preimage(&self, x: Element) -> Option<Element> {
        (1..=self.source.domain()).contains(&x).then(|| x - 1)
    }

    /// `P`-elements, in order.
    pub fn p_elements(&self) -> std::ops::RangeInclusive<Element> {
        1..=self.source.domain()
    }
}

/// Tuples over `M` a fiber of a relation of arity `n` ranges over.
pub(crate) fn eligible_tuples(m: &Structure, n: usize, repetition_free: bool) -> Vec<Vec<Element>> {
    let size = m.domain();
    exec::filter_map_range(size.pow(n as u32), |i| {
        let t = exec::unrank_tuple(i, size, n);
        let distinct = (0..n).all(|s| (s + 1..n).all(|u| t[s] != t[u]));
        (!repetition_free || distinct).then_some(t)
    })
}

fn lifted_signature(m: &Structure, keys: &[RelKey], k: usize) -> Result<(Signature, Vec<RelLayout>), LiftError> {
    let sig = m.signature();
    let mut relations = vec![RelationSymbol {
        name: "P".into(),
        arity: 1,
    }];
    let mut functions = Vec::new();
    let mut layouts = Vec::new();
    for &key in keys {
        let name = &sig.relations[key.relation].name;
        let q = relations.len();
        relations.push(RelationSymbol {
            name: format!("Q_{name}"),
            arity: 1,
        });
        relations.push(RelationSymbol {
            name: format!("E_{name}"),
            arity: 2,
        });
        let f: Vec<usize> = (0..key.arity).map(|i| functions.len() + i).collect();
        functions.extend((0..key.arity).map(|i| format!("F_{name}_{i}")));
        let g: Vec<usize> = (0..k).map(|j| functions.len() + j).collect();
        functions.extend((0..k).map(|j| format!("G_{name}_{j}")));
        layouts.push(RelLayout { key, q, e: q + 1, f, g });
    }
    let lifted = Signature::new(relations, functions, vec!["c".into()])?;
    Ok((lifted, layouts))
}

/// Builds `N_M` with copy bound `cfg.k`.
pub fn lift(m: &Structure, cfg: &LiftConfig) -> Result<LiftedStructure, LiftError> {
    if !m.is_relational() {
        return Err(LiftError::NotRelational);
    }
    if cfg.k == 0 {
        return Err(LiftError::ZeroCopies);
    }
    let k = cfg.k;
    let padding = match &cfg.padding {
        Padding::Auto => PaddingAssignment::canonical(m.signature(), k),
        Padding::Explicit(list) => PaddingAssignment::explicit(m.signature(), k, list)?,
    };
    let keys = RelKey::all(m.signature());
    let (signature, layouts) = lifted_signature(m, &keys, k)?;
    let repetition_free = m.repetition_free() && !cfg.include_repetition_tuples;

    let mut provenance = vec![Provenance::Econst];
    provenance.extend(m.elements().map(Provenance::Pelem));
    let mut fibers = BTreeMap::new();
    for key in &keys {
        for tuple in eligible_tuples(m, key.arity, repetition_free) {
            let start = provenance.len();
            let copies: Vec<Element> = (start..start + k).collect();
            provenance.extend((0..k).map(|j| Provenance::Copy {
                relation: key.relation,
                index: CopyIndex::Finite(j),
                tuple: tuple.clone(),
            }));
            let limit = m.holds(key.relation, &tuple).then(|| {
                provenance.push(Provenance::Copy {
                    relation: key.relation,
                    index: CopyIndex::Limit,
                    tuple: tuple.clone(),
                });
                start + k
            });
            fibers.insert((key.relation, tuple), Fiber { copies, limit });
        }
    }

    let size = provenance.len();
    let mut relations: Vec<Vec<Vec<Element>>> = vec![Vec::new(); signature.relations.len()];
    relations[0] = m.elements().map(|a| vec![1 + a]).collect();
    let mut functions = vec![vec![0; size]; signature.functions.len()];
    for ((relation, tuple), fiber) in &fibers {
        let layout = layouts.iter().find(|l| l.key.relation == *relation).unwrap();
        for x in fiber.elements() {
            relations[layout.q].push(vec![x]);
            for y in fiber.elements() {
                relations[layout.e].push(vec![x, y]);
            }
            for (iota, &f) in layout.f.iter().enumerate() {
                functions[f][x] = 1 + tuple[iota];
            }
            for (j, &g) in layout.g.iter().enumerate() {
                functions[g][x] = fiber.copies[j];
            }
        }
    }
    let structure = Structure::new(signature, size, relations, functions, vec![0], false)?;
    Ok(LiftedStructure {
        source: m.clone(),
        config: cfg.clone(),
        padding,
        structure,
        provenance,
        layouts,
        fibers,
    })
}

/// The provenance-preserving map from the ids of `small` to the ids of
/// `large`, where both lift the same structure and `large` has a larger copy
/// bound. Symbols of `small` keep their names in `large`.
pub fn truncation_embedding(small: &LiftedStructure, large: &LiftedStructure) -> Result<Vec<Element>, LiftError> {
    if small.source != large.source
        || small.k() > large.k()
        || small.config.include_repetition_tuples != large.config.include_repetition_tuples
    {
        return Err(LiftError::SourceMismatch);
    }
    small
        .provenance
        .iter()
        .map(|p| match p {
            Provenance::Econst => Ok(0),
            Provenance::Pelem(a) => Ok(large.p_element(*a)),
            Provenance::Copy {
                relation,
                index,
                tuple,
            } => large
                .fiber(*relation, tuple)
                .and_then(|f| f.get(*index))
                .ok_or(LiftError::SourceMismatch),
        })
        .collect()
}
