use super::{LiftError, LiftedStructure, Provenance};
use crate::perm::{is_automorphism, Permutation};
use crate::structure::{Element, SubsetOfDomain};

/// Elements of `Q_R` fixed by no `G_R_j`, read off the structure alone.
pub fn limit_elements(n: &LiftedStructure, relation: usize) -> Vec<Element> {
    let layout = n.layout(relation);
    let s = n.structure();
    s.relation(layout.q)
        .iter()
        .map(|t| t[0])
        .filter(|&x| layout.g.iter().all(|&g| s.apply(g, x) != x))
        .collect()
}

/// `π̂`: `e ↦ e`, `a ↦ π(a)`, `Copy(R, i, ā) ↦ Copy(R, i, π(ā))`.
///
/// Fails exactly when `π ∉ Aut(M)`: some limit copy over `ā ∈ R` would need
/// a limit copy over `π(ā) ∉ R`. The first such fiber in id order is
/// reported.
pub fn direct_induced(n: &LiftedStructure, pi: &Permutation) -> Result<Permutation, LiftError> {
    let m = n.source();
    if pi.degree() != m.domain() {
        return Err(crate::perm::PermError::DegreeMismatch {
            expected: m.domain(),
            found: pi.degree(),
        }
        .into());
    }
    let images = n
        .provenance()
        .iter()
        .map(|p| match p {
            Provenance::Econst => Ok(0),
            Provenance::Pelem(a) => Ok(n.p_element(pi.apply(*a))),
            Provenance::Copy {
                relation,
                index,
                tuple,
            } => {
                let image = pi.apply_tuple(tuple);
                n.fiber(*relation, &image)
                    .and_then(|f| f.get(*index))
                    .ok_or_else(|| LiftError::LimitHasNoTarget {
                        relation: m.signature().relations[*relation].name.clone(),
                        tuple: tuple.clone(),
                        image,
                    })
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Permutation::from_images(images)?)
}

/// `π₀ = π̂` restricted to `P`, as a permutation of `M`.
pub fn project_automorphism(n: &LiftedStructure, pihat: &Permutation) -> Result<Permutation, LiftError> {
    if !is_automorphism(n.structure(), pihat)? {
        return Err(LiftError::NotAutomorphism);
    }
    let images = n
        .source()
        .elements()
        .map(|a| {
            n.p_preimage(pihat.apply(n.p_element(a)))
                .ok_or(LiftError::LeavesP(n.p_element(a)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Permutation::from_images(images)?)
}

/// A finite `A ⊆ M` with `direct_induced(Aut(M/A)) ⊆ Aut(N/B)`: the
/// `P`-elements of `B` and every coordinate of every copy in `B`.
pub fn continuity_witness(n: &LiftedStructure, b: &SubsetOfDomain) -> SubsetOfDomain {
    b.iter()
        .flat_map(|x| match &n.provenance()[x] {
            Provenance::Econst => Vec::new(),
            Provenance::Pelem(a) => vec![*a],
            Provenance::Copy { tuple, .. } => tuple.clone(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lift::{lift, CopyIndex, LiftConfig};
    use crate::perm::{automorphism_group, automorphism_group_brute};
    use crate::structure::{Signature, Structure};

    fn digraph(n: usize, edges: &[[Element; 2]]) -> Structure {
        Structure::relational(
            Signature::relational([("R", 2)]).unwrap(),
            n,
            vec![edges.iter().map(|e| e.to_vec()).collect()],
        )
        .unwrap()
    }

    #[test]
    fn limit_elements_match_provenance() {
        let n = lift(&digraph(2, &[[0, 1]]), &LiftConfig::new(1)).unwrap();
        assert_eq!(limit_elements(&n, 0), vec![4]);
        assert!(matches!(
            n.provenance()[4],
            Provenance::Copy { index: CopyIndex::Limit, .. }
        ));
        let empty = lift(&digraph(2, &[]), &LiftConfig::new(1)).unwrap();
        assert!(limit_elements(&empty, 0).is_empty());
        let complete: Vec<[Element; 2]> = (0..3)
            .flat_map(|a| (0..3).filter(move |&b| b != a).map(move |b| [a, b]))
            .collect();
        let full = lift(&digraph(3, &complete), &LiftConfig::new(2)).unwrap();
        assert_eq!(limit_elements(&full, 0).len(), 6);
    }

    #[test]
    fn swap_on_the_empty_digraph() {
        let n = lift(&digraph(2, &[]), &LiftConfig::new(1)).unwrap();
        let swap = Permutation::transposition(2, 0, 1);
        let hat = direct_induced(&n, &swap).unwrap();
        assert_eq!(hat.images(), &[0, 2, 1, 4, 3]);
        assert_eq!(project_automorphism(&n, &hat).unwrap(), swap);
        assert!(direct_induced(&n, &Permutation::identity(2)).unwrap().is_identity());
    }

    #[test]
    fn non_automorphism_has_a_fiber_witness() {
        let n = lift(&digraph(2, &[[0, 1]]), &LiftConfig::new(1)).unwrap();
        let err = direct_induced(&n, &Permutation::transposition(2, 0, 1)).unwrap_err();
        assert_eq!(
            err,
            LiftError::LimitHasNoTarget {
                relation: "R".into(),
                tuple: vec![0, 1],
                image: vec![1, 0],
            }
        );
    }

    #[test]
    fn lifted_groups_project_back() {
        let m1 = lift(&digraph(2, &[]), &LiftConfig::new(1)).unwrap();
        let all = automorphism_group_brute(m1.structure()).unwrap();
        assert_eq!(all.len(), 2);
        for g in &all {
            let p = project_automorphism(&m1, g).unwrap();
            assert!(is_automorphism(m1.source(), &p).unwrap());
        }
        let m0 = lift(&digraph(2, &[[0, 1]]), &LiftConfig::new(1)).unwrap();
        assert_eq!(automorphism_group_brute(m0.structure()).unwrap().len(), 1);
        assert_eq!(automorphism_group(m0.structure()).order(), 1u32.into());
    }

    #[test]
    fn continuity_witness_examples() {
        let n = lift(&digraph(2, &[]), &LiftConfig::new(1)).unwrap();
        let set = |xs: &[Element]| SubsetOfDomain::new(n.structure().domain(), xs.iter().copied()).unwrap();
        assert!(continuity_witness(&n, &set(&[0])).is_empty());
        assert_eq!(continuity_witness(&n, &set(&[3])).iter().collect::<Vec<_>>(), [0, 1]);
        assert_eq!(continuity_witness(&n, &set(&[2])).iter().collect::<Vec<_>>(), [1]);
    }
}
