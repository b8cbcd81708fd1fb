use serde::{Deserialize, Serialize};

use super::{InterpretationScheme, SchemeError, SchemeRel, SchemeSort, SortBijections};
use crate::logic::{parse_formula, AtomicType};
use crate::structure::{Element, Signature};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSortDoc {
    pub key: Vec<String>,
    pub width: usize,
    pub domain: String,
    pub equivalence: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeRelDoc {
    pub relation: String,
    pub sorts: Vec<usize>,
    pub formula: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDoc {
    pub sort: usize,
    pub map: Vec<(Element, Vec<Element>)>,
}

/// Serialized `(𝔰, F̄)`: formulas in the concrete grammar, sort keys as
/// their sorted printed members.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeDoc {
    pub sorts: Vec<SchemeSortDoc>,
    pub relations: Vec<SchemeRelDoc>,
    pub bijections: Vec<MapDoc>,
}

impl SchemeDoc {
    /// `source` is the signature the formulas are written in, `target` the
    /// signature of the interpreted structure.
    pub fn new(
        s: &InterpretationScheme,
        f: &SortBijections,
        source: &Signature,
        target: &Signature,
    ) -> Self {
        SchemeDoc {
            sorts: s
                .sorts
                .iter()
                .map(|p| SchemeSortDoc {
                    key: p.key.to_strings(target),
                    width: p.width,
                    domain: p.domain.display(source).to_string(),
                    equivalence: p.equivalence.display(source).to_string(),
                })
                .collect(),
            relations: s
                .relations
                .iter()
                .map(|r| SchemeRelDoc {
                    relation: target.relations[r.relation].name.clone(),
                    sorts: r.sorts.clone(),
                    formula: r.formula.display(source).to_string(),
                })
                .collect(),
            bijections: f
                .maps
                .iter()
                .enumerate()
                .map(|(sort, map)| MapDoc {
                    sort,
                    map: map.clone(),
                })
                .collect(),
        }
    }

    pub fn parse(
        &self,
        source: &Signature,
        target: &Signature,
    ) -> Result<(InterpretationScheme, SortBijections), SchemeError> {
        let sorts = self
            .sorts
            .iter()
            .map(|p| {
                let key = p
                    .key
                    .iter()
                    .map(|text| parse_formula(text, target))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(SchemeSort {
                    key: AtomicType::from_formulas(key),
                    width: p.width,
                    domain: parse_formula(&p.domain, source)?,
                    equivalence: parse_formula(&p.equivalence, source)?,
                })
            })
            .collect::<Result<Vec<_>, SchemeError>>()?;
        let relations = self
            .relations
            .iter()
            .map(|r| {
                let relation = target
                    .relation_index(&r.relation)
                    .ok_or_else(|| SchemeError::UnknownSymbol(r.relation.clone()))?;
                Ok(SchemeRel {
                    relation,
                    sorts: r.sorts.clone(),
                    formula: parse_formula(&r.formula, source)?,
                })
            })
            .collect::<Result<Vec<_>, SchemeError>>()?;
        let mut maps = vec![Vec::new(); sorts.len()];
        for m in &self.bijections {
            let slot = maps.get_mut(m.sort).ok_or(SchemeError::UnknownSort(m.sort))?;
            slot.extend(m.map.iter().cloned());
        }
        Ok((InterpretationScheme { sorts, relations }, SortBijections { maps }))
    }
}
