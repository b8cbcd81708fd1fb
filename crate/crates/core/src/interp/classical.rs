use super::quotient::{quotient, QuotientError};
use super::{Condition, SchemeError, ValidationReport, Witness};
use crate::logic::{tuple_width, Formula};
use crate::perm::automorphism_group;
use crate::structure::{Element, Structure};

/// Checks that `n` is interpreted in `m` on the single domain `D(M)/E(M)`
/// via `alpha`, which sends each element of `n` to a tuple naming its class.
///
/// Every relation of `n`, pulled back along `alpha`, must be invariant under
/// `Aut(m)`; on a finite structure that is equivalent to `∅`-definability.
/// Invariance is tested on the generators found by the automorphism search,
/// so a failure carries one of them as the witness.
pub fn check_classical_interpretation(
    m: &Structure,
    n: &Structure,
    d: &Formula,
    e: &Formula,
    alpha: &[Vec<Element>],
) -> Result<ValidationReport, SchemeError> {
    if !m.is_relational() || !n.is_relational() {
        return Err(SchemeError::NotRelational);
    }
    if alpha.len() != n.domain() {
        return Err(SchemeError::NotTotal(alpha.len().min(n.domain())));
    }
    let width = tuple_width(d)?;
    if let Some(b) = alpha
        .iter()
        .position(|t| t.len() != width || t.iter().any(|&a| a >= m.domain()))
    {
        return Err(SchemeError::WidthMismatch {
            subject: format!("image of element {b}"),
            expected: width,
            found: alpha[b].len(),
        });
    }
    let mut report = ValidationReport::default();
    let q = match quotient(m, d, e) {
        Ok(q) => q,
        Err(QuotientError::Eval(err)) => return Err(err.into()),
        Err(err) => {
            report.push(Condition::Domain, format!("width {width}"), None);
            let w = Witness::from_quotient(0, err.clone())
                .ok_or(SchemeError::Quotient { sort: 0, source: err })?;
            report.push(Condition::Equivalence, String::new(), Some(w));
            report.skip(Condition::Bijection, "no quotient".into());
            report.skip(Condition::Invariance, "no quotient".into());
            return Ok(report);
        }
    };
    let empty = (q.is_empty() && n.domain() > 0).then_some(Witness::EmptyDomain { sort: 0 });
    report.push(
        Condition::Domain,
        format!("{} tuples of width {width}", q.members().len()),
        empty,
    );
    report.push(Condition::Equivalence, format!("{} classes", q.len()), None);

    let mut owner: Vec<Option<Element>> = vec![None; q.len()];
    let mut witness = None;
    let mut class_of = Vec::with_capacity(alpha.len());
    for (b, tuple) in alpha.iter().enumerate() {
        let Some(c) = q.class_index(tuple) else {
            witness.get_or_insert(Witness::NotInDomain {
                sort: 0,
                element: b,
                tuple: tuple.clone(),
            });
            continue;
        };
        class_of.push(c);
        if let Some(a) = owner[c].replace(b) {
            witness.get_or_insert(Witness::NotInjective {
                sort: 0,
                elements: [a, b],
                class: q.representative(c).to_vec(),
            });
        }
    }
    if witness.is_none() {
        if let Some(c) = owner.iter().position(Option::is_none) {
            witness = Some(Witness::NotSurjective {
                sort: 0,
                class: q.representative(c).to_vec(),
            });
        }
    }
    let bijective = witness.is_none();
    report.push(
        Condition::Bijection,
        format!("{} elements onto {} classes", alpha.len(), q.len()),
        witness,
    );
    if !bijective {
        report.skip(Condition::Invariance, "requires a bijection".into());
        return Ok(report);
    }

    let owner: Vec<Element> = owner.into_iter().map(Option::unwrap).collect();
    let group = automorphism_group(m);
    let mut witness = None;
    'search: for g in group.generators() {
        let image_of = |b: Element| {
            let moved = g.apply_tuple(q.representative(class_of[b]));
            q.class_index(&moved).map(|c| owner[c])
        };
        for (r, tuples) in n.relations().iter().enumerate() {
            for tuple in tuples {
                let image: Option<Vec<Element>> = tuple.iter().map(|&b| image_of(b)).collect();
                match image {
                    Some(image) if n.holds(r, &image) => {}
                    image => {
                        // a tuple leaving D(M) is already non-invariance of D
                        witness = Some(Witness::NotInvariant {
                            relation: r,
                            tuple: tuple.clone(),
                            image: image.unwrap_or_default(),
                            automorphism: g.clone(),
                        });
                        break 'search;
                    }
                }
            }
        }
    }
    report.push(
        Condition::Invariance,
        format!("{} generators of Aut(M)", group.generators().len()),
        witness,
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::Status;
    use crate::logic::parse_formula;
    use crate::perm::Permutation;
    use crate::structure::Signature;

    fn digraph(n: usize, edges: &[[Element; 2]]) -> Structure {
        Structure::relational(
            Signature::relational([("R", 2)]).unwrap(),
            n,
            vec![edges.iter().map(|e| e.to_vec()).collect()],
        )
        .unwrap()
    }

    fn identity_alpha(n: usize) -> Vec<Vec<Element>> {
        (0..n).map(|a| vec![a]).collect()
    }

    #[test]
    fn self_interpretation_passes() {
        let m0 = digraph(2, &[[0, 1]]);
        let sig = m0.signature();
        let d = parse_formula("x0 = x0", sig).unwrap();
        let e = parse_formula("x0 = x1", sig).unwrap();
        let report = check_classical_interpretation(&m0, &m0, &d, &e, &identity_alpha(2)).unwrap();
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.checks.len(), 4);
    }

    #[test]
    fn collapsed_alpha_is_not_a_bijection() {
        let m1 = digraph(2, &[]);
        let sig = m1.signature();
        let d = parse_formula("x0 = x0", sig).unwrap();
        let e = parse_formula("x0 = x1", sig).unwrap();
        let report = check_classical_interpretation(&m1, &m1, &d, &e, &[vec![0], vec![0]]).unwrap();
        let check = report.check(Condition::Bijection).unwrap();
        assert_eq!(check.status, Status::Fail);
        assert!(matches!(check.witness, Some(Witness::NotInjective { elements: [0, 1], .. })));
    }

    #[test]
    fn planted_non_invariant_relation_is_caught() {
        let m1 = digraph(2, &[]);
        let sig = m1.signature();
        let planted = Structure::relational(Signature::relational([("U", 1)]).unwrap(), 2, vec![vec![vec![0]]])
            .unwrap();
        let d = parse_formula("x0 = x0", sig).unwrap();
        let e = parse_formula("x0 = x1", sig).unwrap();
        let report = check_classical_interpretation(&m1, &planted, &d, &e, &identity_alpha(2)).unwrap();
        let check = report.check(Condition::Invariance).unwrap();
        assert_eq!(
            check.witness,
            Some(Witness::NotInvariant {
                relation: 0,
                tuple: vec![0],
                image: vec![1],
                automorphism: Permutation::transposition(2, 0, 1),
            })
        );
    }
}
