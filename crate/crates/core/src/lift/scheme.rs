use super::{CopyIndex, LiftError, LiftedStructure, Provenance};
use crate::interp::{InterpretationScheme, SchemeRel, SchemeSort, SortBijections};
use crate::logic::{atomic_type, Formula};
use crate::structure::{companion_origins, relational_companion, structures_equal, CompanionOrigin, Structure};

/// The sorts of the relational companion of a lift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SortKind {
    /// The constant `e`, interpreted by all pairs modulo the total relation.
    E,
    P,
    Copy { relation: usize, index: CopyIndex },
}

impl SortKind {
    pub fn of(p: &Provenance) -> SortKind {
        match p {
            Provenance::Econst => SortKind::E,
            Provenance::Pelem(_) => SortKind::P,
            Provenance::Copy { relation, index, .. } => SortKind::Copy {
                relation: *relation,
                index: *index,
            },
        }
    }
}

/// Realized sorts in scheme order: `e`, `P`, then copy sorts in fiber order.
pub fn sort_kinds(n: &LiftedStructure) -> Vec<SortKind> {
    let mut kinds: Vec<SortKind> = n.provenance().iter().map(SortKind::of).collect();
    kinds.sort_by_key(|k| match k {
        SortKind::Copy { relation, index } => (2, n.layouts().iter().position(|l| l.key.relation == *relation), *index),
        SortKind::P => (1, None, CopyIndex::Limit),
        SortKind::E => (0, None, CopyIndex::Limit),
    });
    kinds.dedup();
    kinds
}

struct Blocks {
    offsets: Vec<usize>,
    total: usize,
}

impl Blocks {
    fn new(widths: &[usize]) -> Self {
        let mut offsets = Vec::with_capacity(widths.len());
        let mut total = 0;
        for w in widths {
            offsets.push(total);
            total += w;
        }
        Blocks { offsets, total }
    }

    fn var(&self, block: usize, t: usize) -> usize {
        self.offsets[block] + t
    }

    /// `core`, closed off with `x = x` for every block variable it misses.
    fn holds(&self, core: Vec<Formula>) -> Formula {
        let mut mentioned = std::collections::BTreeSet::new();
        for f in &core {
            mentioned.extend(f.free_vars());
        }
        let mut members = core;
        members.extend(
            (0..self.total)
                .filter(|v| !mentioned.contains(v))
                .map(|v| Formula::eq_vars(v, v)),
        );
        Formula::conj(members)
    }

    fn fails(&self) -> Formula {
        Formula::not(Formula::tautology_over(0..self.total))
    }

    fn truth(&self, value: bool) -> Formula {
        if value {
            self.holds(Vec::new())
        } else {
            self.fails()
        }
    }

    /// First `n` coordinates of block `a` equal those of block `b`.
    fn same_tuple(&self, a: usize, b: usize, n: usize) -> Formula {
        self.holds((0..n).map(|t| Formula::eq_vars(self.var(a, t), self.var(b, t))).collect())
    }
}

/// Builds the interpretation of the relational companion of `n` in `m`
/// together with `F̄`. Sorts are the realized ones of [`sort_kinds`]; there is
/// one relation formula for every companion relation and every tuple of
/// sorts.
pub fn generate_scheme(m: &Structure, n: &LiftedStructure) -> Result<(InterpretationScheme, SortBijections), LiftError> {
    if !matches!(structures_equal(m, n.source()), Ok(true)) {
        return Err(LiftError::SourceMismatch);
    }
    if m.domain() == 0 {
        return Err(LiftError::EmptySource);
    }
    let kinds = sort_kinds(n);
    let companion = relational_companion(n.structure());
    let provenance = n.provenance();
    let arity_of = |relation: usize| m.signature().relations[relation].arity;

    let sorts: Vec<SchemeSort> = kinds
        .iter()
        .map(|kind| {
            let witness = provenance.iter().position(|p| SortKind::of(p) == *kind).unwrap();
            let key = atomic_type(&companion, witness);
            match *kind {
                SortKind::E => SchemeSort {
                    key,
                    width: 2,
                    domain: Formula::tautology_over(0..2),
                    equivalence: Formula::tautology_over(0..4),
                },
                SortKind::P => SchemeSort {
                    key,
                    width: 1,
                    domain: Formula::eq_vars(0, 0),
                    equivalence: Formula::eq_vars(0, 1),
                },
                SortKind::Copy { relation, index } => {
                    let layout = n.layout(relation);
                    let arity = layout.key.arity;
                    let width = n.padding().width(layout.key, index);
                    let mut domain: Vec<Formula> = (0..width).map(|t| Formula::eq_vars(t, t)).collect();
                    if index == CopyIndex::Limit {
                        domain.push(Formula::rel_vars(relation, 0..arity));
                    }
                    if n.repetition_free_fibers() {
                        for s in 0..arity {
                            domain.extend((s + 1..arity).map(|t| Formula::not(Formula::eq_vars(s, t))));
                        }
                    }
                    SchemeSort {
                        key,
                        width,
                        domain: Formula::conj(domain),
                        equivalence: Formula::conj((0..arity).map(|t| Formula::eq_vars(t, width + t)).collect()),
                    }
                }
            }
        })
        .collect();

    let sort_index = |kind: SortKind| kinds.iter().position(|k| *k == kind).unwrap();
    let mut maps = vec![Vec::new(); kinds.len()];
    for (x, p) in provenance.iter().enumerate() {
        let s = sort_index(SortKind::of(p));
        let image = match p {
            Provenance::Econst => vec![0, 0],
            Provenance::Pelem(a) => vec![*a],
            Provenance::Copy { tuple, .. } => {
                let mut t = tuple.clone();
                t.resize(sorts[s].width, 0);
                t
            }
        };
        maps[s].push((x, image));
    }

    // what each companion relation means, sort by sort
    #[derive(Clone, Copy)]
    enum Meaning {
        P,
        Q(usize),
        E(usize),
        F(usize, usize),
        G(usize, usize),
        C,
    }
    let tau = n.structure().signature();
    let meanings: Vec<Meaning> = companion_origins(tau)
        .into_iter()
        .map(|origin| match origin {
            CompanionOrigin::Relation(0) => Meaning::P,
            CompanionOrigin::Relation(r) => {
                let layout = n.layouts().iter().find(|l| l.q == r || l.e == r).unwrap();
                if layout.q == r {
                    Meaning::Q(layout.key.relation)
                } else {
                    Meaning::E(layout.key.relation)
                }
            }
            CompanionOrigin::FunctionGraph(f) => {
                let layout = n.layouts().iter().find(|l| l.f.contains(&f) || l.g.contains(&f)).unwrap();
                match layout.f.iter().position(|&g| g == f) {
                    Some(iota) => Meaning::F(layout.key.relation, iota),
                    None => Meaning::G(layout.key.relation, layout.g.iter().position(|&g| g == f).unwrap()),
                }
            }
            CompanionOrigin::Constant(_) => Meaning::C,
        })
        .collect();

    let copy_of = |kind: SortKind, rel: usize| matches!(kind, SortKind::Copy { relation, .. } if relation == rel);
    let mut relations = Vec::new();
    for (r, meaning) in meanings.into_iter().enumerate() {
        let arity = companion.signature().relations[r].arity;
        for i in 0..kinds.len().pow(arity as u32) {
            let tuple = crate::exec::unrank_tuple(i, kinds.len(), arity);
            let ks: Vec<SortKind> = tuple.iter().map(|&s| kinds[s]).collect();
            let widths: Vec<usize> = tuple.iter().map(|&s| sorts[s].width).collect();
            let blocks = Blocks::new(&widths);
            let formula = match meaning {
                Meaning::P => blocks.truth(ks[0] == SortKind::P),
                Meaning::C => blocks.truth(ks[0] == SortKind::E),
                Meaning::Q(rel) => blocks.truth(copy_of(ks[0], rel)),
                Meaning::E(rel) => {
                    if copy_of(ks[0], rel) && copy_of(ks[1], rel) {
                        blocks.same_tuple(0, 1, arity_of(rel))
                    } else {
                        blocks.fails()
                    }
                }
                Meaning::F(rel, iota) => match (copy_of(ks[0], rel), ks[1]) {
                    (true, SortKind::P) => blocks.holds(vec![Formula::eq_vars(blocks.var(0, iota), blocks.var(1, 0))]),
                    (true, _) => blocks.fails(),
                    (false, target) => blocks.truth(target == SortKind::E),
                },
                Meaning::G(rel, j) => match (copy_of(ks[0], rel), ks[1]) {
                    (true, SortKind::Copy { relation, index }) if relation == rel && index == CopyIndex::Finite(j) => {
                        blocks.same_tuple(0, 1, arity_of(rel))
                    }
                    (true, _) => blocks.fails(),
                    (false, target) => blocks.truth(target == SortKind::E),
                },
            };
            relations.push(SchemeRel {
                relation: r,
                sorts: tuple,
                formula,
            });
        }
    }
    Ok((InterpretationScheme { sorts, relations }, SortBijections { maps }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::{induced_automorphism, quotient, validate_scheme};
    use crate::lift::{direct_induced, lift, LiftConfig};
    use crate::interp::Mutation;
    use crate::perm::automorphism_group;
    use crate::structure::{Element, Signature};

    fn digraph(n: usize, edges: &[[Element; 2]]) -> Structure {
        Structure::relational(
            Signature::relational([("R", 2)]).unwrap(),
            n,
            vec![edges.iter().map(|e| e.to_vec()).collect()],
        )
        .unwrap()
    }

    #[test]
    fn m0_scheme_validates() {
        let m0 = digraph(2, &[[0, 1]]);
        let n = lift(&m0, &LiftConfig::new(1)).unwrap();
        let (s, f) = generate_scheme(&m0, &n).unwrap();
        assert_eq!(s.sorts.iter().map(|p| p.width).collect::<Vec<_>>(), [2, 1, 2, 3]);
        let companion = relational_companion(n.structure());
        let report = validate_scheme(&m0, &companion, &s, &f).unwrap();
        assert!(report.passed(), "{report:#?}");
        let p = quotient(&m0, &s.sorts[1].domain, &s.sorts[1].equivalence).unwrap();
        assert_eq!(p.len(), 2);
        let limit = quotient(&m0, &s.sorts[3].domain, &s.sorts[3].equivalence).unwrap();
        assert_eq!(limit.len(), 1);
        assert_eq!(limit.representative(0), &[0, 1, 0]);
    }

    #[test]
    fn sort_count_matches_partition() {
        let m1 = digraph(2, &[]);
        let n = lift(&m1, &LiftConfig::new(2)).unwrap();
        assert_eq!(sort_kinds(&n).len(), 4);
        let companion = relational_companion(n.structure());
        assert_eq!(crate::logic::sort_partition(&companion).len(), 4);
    }

    #[test]
    fn induced_matches_direct() {
        let m = digraph(3, &[[0, 1], [0, 2]]);
        for k in 1..=2 {
            let n = lift(&m, &LiftConfig::new(k)).unwrap();
            let (s, f) = generate_scheme(&m, &n).unwrap();
            let companion = relational_companion(n.structure());
            for g in automorphism_group(&m).generators() {
                assert_eq!(
                    induced_automorphism(&m, &companion, &s, &f, g).unwrap(),
                    direct_induced(&n, g).unwrap()
                );
            }
        }
    }

    #[test]
    fn rejects_foreign_source() {
        let n = lift(&digraph(2, &[]), &LiftConfig::new(1)).unwrap();
        assert_eq!(
            generate_scheme(&digraph(2, &[[0, 1]]), &n).unwrap_err(),
            LiftError::SourceMismatch
        );
    }

    #[test]
    fn every_mutation_is_caught() {
        for m in [digraph(2, &[[0, 1]]), digraph(3, &[[0, 1], [1, 2]])] {
            let n = lift(&m, &LiftConfig::new(1)).unwrap();
            let (s, f) = generate_scheme(&m, &n).unwrap();
            let companion = relational_companion(n.structure());
            let mutations = Mutation::all(&m, &s, &f);
            assert!(mutations.iter().any(|x| matches!(x, Mutation::RefineEquivalence(_))));
            for mutation in mutations {
                let (ms, mf) = mutation.apply(&s, &f).unwrap();
                let report = validate_scheme(&m, &companion, &ms, &mf).unwrap();
                let failure = report.first_failure();
                assert!(failure.is_some_and(|c| c.witness.is_some()), "{mutation} not caught");
            }
        }
    }

    #[test]
    fn lift_itself_has_four_sorts() {
        let n = lift(&digraph(2, &[[0, 1]]), &LiftConfig::new(1)).unwrap();
        assert_eq!(crate::logic::sort_partition(n.structure()).len(), 4);
        let m1 = lift(&digraph(2, &[]), &LiftConfig::new(2)).unwrap();
        assert_eq!(crate::logic::sort_partition(m1.structure()).len(), 4);
    }
}
