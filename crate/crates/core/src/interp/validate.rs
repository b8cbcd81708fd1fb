use std::collections::{BTreeMap, HashMap};

use super::quotient::{quotient, Quotient, QuotientError};
use super::{
    Condition, InterpretationScheme, SchemeError, SortBijections, ValidationReport, Witness,
};
use crate::exec;
use crate::logic::{eval_tuple, sort_partition, tuple_width};
use crate::structure::{Element, Structure};

/// Largest source domain for which representative independence is checked.
pub const SPOT_CHECK_MAX_SOURCE: usize = 4;

pub(crate) fn check_shape(
    m1: &Structure,
    m2: &Structure,
    s: &InterpretationScheme,
    f: &SortBijections,
) -> Result<(), SchemeError> {
    if !m1.is_relational() || !m2.is_relational() {
        return Err(SchemeError::NotRelational);
    }
    if f.maps.len() != s.sorts.len() {
        return Err(SchemeError::MapCountMismatch {
            maps: f.maps.len(),
            sorts: s.sorts.len(),
        });
    }
    for (i, sort) in s.sorts.iter().enumerate() {
        let found = tuple_width(&sort.domain)?;
        if found != sort.width || sort.width == 0 {
            return Err(SchemeError::WidthMismatch {
                subject: format!("domain formula of sort {i}"),
                expected: sort.width,
                found,
            });
        }
        if let Some(&v) = sort.equivalence.free_vars().iter().next_back() {
            if v >= 2 * sort.width {
                return Err(SchemeError::WidthMismatch {
                    subject: format!("equivalence formula of sort {i}"),
                    expected: 2 * sort.width,
                    found: v + 1,
                });
            }
        }
        for (b, tuple) in &f.maps[i] {
            if *b >= m2.domain() {
                return Err(SchemeError::OutOfRange(*b));
            }
            if tuple.len() != sort.width || tuple.iter().any(|&a| a >= m1.domain()) {
                return Err(SchemeError::WidthMismatch {
                    subject: format!("image of element {b} in sort {i}"),
                    expected: sort.width,
                    found: tuple.len(),
                });
            }
        }
    }
    let arities: Vec<usize> = m2.signature().relations.iter().map(|r| r.arity).collect();
    for (j, rel) in s.relations.iter().enumerate() {
        let arity = *arities
            .get(rel.relation)
            .ok_or(SchemeError::UnknownRelation(rel.relation))?;
        if let Some(&bad) = rel.sorts.iter().find(|&&p| p >= s.sorts.len()) {
            return Err(SchemeError::UnknownSort(bad));
        }
        if rel.sorts.len() != arity {
            return Err(SchemeError::WidthMismatch {
                subject: format!("sort tuple of relation formula {j}"),
                expected: arity,
                found: rel.sorts.len(),
            });
        }
        let expected: usize = rel.sorts.iter().map(|&p| s.sorts[p].width).sum();
        let found = tuple_width(&rel.formula)?;
        if found != expected {
            return Err(SchemeError::WidthMismatch {
                subject: format!("relation formula {j}"),
                expected,
                found,
            });
        }
    }
    Ok(())
}

/// Assigns each target element its scheme sort; returns the first coverage
/// failure, if any.
fn cover_sorts(m2: &Structure, s: &InterpretationScheme) -> (Vec<Option<usize>>, Option<Witness>) {
    let partition = sort_partition(m2);
    let mut sort_of = vec![None; m2.domain()];
    let mut witness = None;
    for (key, block) in &partition {
        match s.sort_index(key) {
            Some(p) => block.iter().for_each(|&b| sort_of[b] = Some(p)),
            None => {
                witness.get_or_insert(Witness::UncoveredSort { element: block[0] });
            }
        }
    }
    if witness.is_none() {
        let spurious = s.sorts.iter().enumerate().find(|(i, sort)| {
            !partition.contains_key(&sort.key) || s.sort_index(&sort.key) != Some(*i)
        });
        if let Some((sort, _)) = spurious {
            witness = Some(Witness::SpuriousSort { sort });
        }
    }
    (sort_of, witness)
}

fn check_bijection(
    sort: usize,
    q: &Quotient,
    map: &[(Element, Vec<Element>)],
    sort_of: &[Option<usize>],
) -> Result<Result<Vec<(Element, usize)>, Witness>, SchemeError> {
    let mut class_of: BTreeMap<Element, usize> = BTreeMap::new();
    for (b, tuple) in map {
        if sort_of[*b] != Some(sort) {
            return Ok(Err(Witness::WrongSort { sort, element: *b }));
        }
        let Some(c) = q.class_index(tuple) else {
            return Ok(Err(Witness::NotInDomain {
                sort,
                element: *b,
                tuple: tuple.clone(),
            }));
        };
        if class_of.insert(*b, c).is_some() {
            return Err(SchemeError::NotBijective(sort));
        }
    }
    if let Some(element) = (0..sort_of.len()).find(|&b| sort_of[b] == Some(sort) && !class_of.contains_key(&b)) {
        return Ok(Err(Witness::Unmapped { sort, element }));
    }
    let mut owner: Vec<Vec<Element>> = vec![Vec::new(); q.len()];
    for (&b, &c) in &class_of {
        owner[c].push(b);
    }
    if let Some(c) = owner.iter().position(Vec::is_empty) {
        return Ok(Err(Witness::NotSurjective {
            sort,
            class: q.representative(c).to_vec(),
        }));
    }
    if let Some(c) = owner.iter().position(|o| o.len() > 1) {
        return Ok(Err(Witness::NotInjective {
            sort,
            elements: [owner[c][0], owner[c][1]],
            class: q.representative(c).to_vec(),
        }));
    }
    Ok(Ok(class_of.into_iter().collect()))
}

fn concat(parts: &[&[Element]]) -> Vec<Element> {
    parts.iter().flat_map(|p| p.iter().copied()).collect()
}

/// Checks every condition of an interpretation scheme of `m2` in `m1`.
///
/// Relation agreement is decided exhaustively over `M2^k` using the least
/// member of each class; representative independence then re-evaluates with
/// every other class member, one coordinate at a time, when
/// `|M1| ≤ SPOT_CHECK_MAX_SOURCE`.
pub fn validate_scheme(
    m1: &Structure,
    m2: &Structure,
    s: &InterpretationScheme,
    f: &SortBijections,
) -> Result<ValidationReport, SchemeError> {
    check_shape(m1, m2, s, f)?;
    let mut report = ValidationReport::default();

    let (sort_of, coverage) = cover_sorts(m2, s);
    let covered = coverage.is_none();
    report.push(
        Condition::SortCoverage,
        format!("{} sorts for {} elements", s.sorts.len(), m2.domain()),
        coverage,
    );

    let quotients = exec::map(&s.sorts, |sort| quotient(m1, &sort.domain, &sort.equivalence));
    let mut healthy = vec![true; s.sorts.len()];
    let mut witness = None;
    let mut qs: Vec<Option<Quotient>> = Vec::with_capacity(s.sorts.len());
    for (i, result) in quotients.into_iter().enumerate() {
        match result {
            Ok(q) => {
                if q.is_empty() {
                    healthy[i] = false;
                    witness.get_or_insert(Witness::EmptyDomain { sort: i });
                }
                qs.push(Some(q));
            }
            Err(QuotientError::Eval(e)) => return Err(e.into()),
            Err(err) => {
                healthy[i] = false;
                if let Some(w) = Witness::from_quotient(i, err.clone()) {
                    witness.get_or_insert(w);
                } else {
                    return Err(SchemeError::Quotient { sort: i, source: err });
                }
                qs.push(None);
            }
        }
    }
    let class_total: usize = qs.iter().flatten().map(Quotient::len).sum();
    report.push(
        Condition::Equivalence,
        format!("{class_total} classes"),
        witness,
    );

    let mut formula_count: HashMap<(usize, &[usize]), usize> = HashMap::new();
    for rel in &s.relations {
        *formula_count.entry((rel.relation, &rel.sorts)).or_default() += 1;
    }
    let realized: Vec<usize> = (0..s.sorts.len())
        .filter(|&p| sort_of.contains(&Some(p)))
        .collect();
    let mut witness = None;
    let mut required = 0;
    'relations: for (r, sym) in m2.signature().relations.iter().enumerate() {
        let combos = realized.len().pow(sym.arity as u32);
        for i in 0..combos {
            let sorts: Vec<usize> = exec::unrank_tuple(i, realized.len(), sym.arity)
                .into_iter()
                .map(|j| realized[j])
                .collect();
            required += 1;
            match formula_count.get(&(r, sorts.as_slice())).copied().unwrap_or(0) {
                1 => {}
                0 => {
                    witness = Some(Witness::UncoveredRelation { relation: r, sorts });
                    break 'relations;
                }
                _ => {
                    witness = Some(Witness::DuplicateRelation { relation: r, sorts });
                    break 'relations;
                }
            }
        }
    }
    let relations_covered = witness.is_none();
    report.push(
        Condition::RelationCoverage,
        format!("{required} (relation, sort tuple) pairs"),
        witness,
    );

    let mut witness = None;
    let mut class_of_element: Vec<Option<usize>> = vec![None; m2.domain()];
    for (i, q) in qs.iter().enumerate() {
        let Some(q) = q else { continue };
        match check_bijection(i, q, &f.maps[i], &sort_of)? {
            Ok(pairs) => pairs.into_iter().for_each(|(b, c)| class_of_element[b] = Some(c)),
            Err(w) => {
                healthy[i] = false;
                witness.get_or_insert(w);
            }
        }
    }
    let bijective = witness.is_none();
    if healthy.iter().all(|&h| h) || !bijective {
        report.push(
            Condition::SortBijection,
            format!("{} elements mapped", f.maps.iter().map(Vec::len).sum::<usize>()),
            witness,
        );
    } else {
        report.skip(Condition::SortBijection, "some sort has no valid quotient".into());
    }

    if !(covered && relations_covered && healthy.iter().all(|&h| h)) {
        let why = "requires valid sorts, quotients, bijections and relation coverage";
        report.skip(Condition::RelationAgreement, why.into());
        report.skip(Condition::RepresentativeIndependence, why.into());
        return Ok(report);
    }

    let reps: Vec<&[Element]> = (0..m2.domain())
        .map(|b| {
            let p = sort_of[b].unwrap();
            qs[p].as_ref().unwrap().representative(class_of_element[b].unwrap())
        })
        .collect();
    let sort_of: Vec<usize> = sort_of.into_iter().map(Option::unwrap).collect();
    let n = m2.domain();

    let mut witness = None;
    let mut checked = 0;
    for (r, sym) in m2.signature().relations.iter().enumerate() {
        let total = n.pow(sym.arity as u32);
        checked += total;
        witness = exec::find_map_first_range(total, |i| {
            let tuple = exec::unrank_tuple(i, n, sym.arity);
            let sorts: Vec<usize> = tuple.iter().map(|&b| sort_of[b]).collect();
            let rel = s.relation_formula(r, &sorts).unwrap();
            let parts: Vec<&[Element]> = tuple.iter().map(|&b| reps[b]).collect();
            let target_holds = m2.holds(r, &tuple);
            (eval_tuple(m1, &rel.formula, &concat(&parts)) != target_holds).then(|| {
                Witness::RelationMismatch {
                    relation: r,
                    representatives: parts.iter().map(|p| p.to_vec()).collect(),
                    tuple,
                    target_holds,
                }
            })
        });
        if witness.is_some() {
            break;
        }
    }
    report.push(
        Condition::RelationAgreement,
        format!("{checked} target tuples"),
        witness,
    );

    if m1.domain() > SPOT_CHECK_MAX_SOURCE {
        report.skip(
            Condition::RepresentativeIndependence,
            format!("source has {} > {SPOT_CHECK_MAX_SOURCE} elements", m1.domain()),
        );
        return Ok(report);
    }
    let class_members = |b: Element| -> &[Vec<Element>] {
        let q = qs[sort_of[b]].as_ref().unwrap();
        &q.classes()[class_of_element[b].unwrap()]
    };
    let mut witness = None;
    let mut evaluations = 0;
    for (r, sym) in m2.signature().relations.iter().enumerate() {
        let total = n.pow(sym.arity as u32);
        evaluations += (0..total)
            .map(|i| {
                exec::unrank_tuple(i, n, sym.arity)
                    .iter()
                    .map(|&b| class_members(b).len() - 1)
                    .sum::<usize>()
            })
            .sum::<usize>();
        witness = exec::find_map_first_range(total, |i| {
            let tuple = exec::unrank_tuple(i, n, sym.arity);
            let sorts: Vec<usize> = tuple.iter().map(|&b| sort_of[b]).collect();
            let rel = s.relation_formula(r, &sorts).unwrap();
            let mut parts: Vec<&[Element]> = tuple.iter().map(|&b| reps[b]).collect();
            let base = eval_tuple(m1, &rel.formula, &concat(&parts));
            for (position, &b) in tuple.iter().enumerate() {
                for member in &class_members(b)[1..] {
                    parts[position] = member;
                    if eval_tuple(m1, &rel.formula, &concat(&parts)) != base {
                        return Some(Witness::RepresentativeDependence {
                            relation: r,
                            tuple: tuple.clone(),
                            position,
                            member: member.clone(),
                        });
                    }
                }
                parts[position] = reps[b];
            }
            None
        });
        if witness.is_some() {
            break;
        }
    }
    report.push(
        Condition::RepresentativeIndependence,
        format!("{evaluations} substitutions"),
        witness,
    );
    Ok(report)
}
