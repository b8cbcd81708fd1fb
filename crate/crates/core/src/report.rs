//! Machine-readable reports and the end-to-end checks behind them. Every
//! report is a deterministic function of its inputs, so repeated runs
//! serialize to identical bytes.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use serde::Serialize;
use serde_json::Value;

use crate::exec;
use crate::interp::{induced_automorphism, validate_scheme, Mutation, SchemeDoc, ValidationReport};
use crate::lift::{
    continuity_witness, direct_induced, generate_scheme, lift, limit_elements, project_automorphism, CopyIndex,
    LiftConfig, LiftError, LiftedStructure, PadEntry, Provenance, SortKind,
};
use crate::perm::{all_permutations, automorphism_group, automorphism_group_brute, PermGroup, Permutation, BRUTE_FORCE_MAX_DEGREE};
use crate::stability::{sort_label, stability_report, structure_id, CensusReport, StabilityError, Verdict};
use crate::structure::{relational_companion, Element, Signature, Structure, SubsetOfDomain};

/// Largest `|B|` for which continuity witnesses are checked.
pub const CONTINUITY_MAX_SET: usize = 2;

/// Group orders as JSON numbers while they fit in `u64`, else as decimal
/// strings.
fn order_value(order: &BigUint) -> Value {
    u64::try_from(order).map_or_else(|_| Value::String(order.to_string()), Value::from)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProvenanceDoc {
    E,
    P {
        element: Element,
    },
    Copy {
        relation: String,
        index: CopyIndex,
        tuple: Vec<Element>,
    },
}

impl ProvenanceDoc {
    pub fn new(sig: &Signature, p: &Provenance) -> Self {
        match p {
            Provenance::Econst => ProvenanceDoc::E,
            Provenance::Pelem(a) => ProvenanceDoc::P { element: *a },
            Provenance::Copy { relation, index, tuple } => ProvenanceDoc::Copy {
                relation: sig.relations[*relation].name.clone(),
                index: *index,
                tuple: tuple.clone(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ElementRow {
    pub id: Element,
    pub sort: String,
    pub provenance: ProvenanceDoc,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiberCount {
    pub size: usize,
    pub fibers: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LiftReport {
    pub structure: String,
    pub k: usize,
    pub include_repetitions: bool,
    pub size: usize,
    pub padding: Vec<PadEntry>,
    pub signature: Signature,
    pub elements: Vec<ElementRow>,
    /// Number of fibers of each size, by size.
    pub fiber_sizes: Vec<FiberCount>,
}

impl LiftReport {
    pub fn new(n: &LiftedStructure) -> Self {
        let sig = n.source().signature();
        let elements = n
            .provenance()
            .iter()
            .enumerate()
            .map(|(id, p)| ElementRow {
                id,
                sort: sort_label(sig, SortKind::of(p)),
                provenance: ProvenanceDoc::new(sig, p),
            })
            .collect();
        let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
        for fiber in n.fibers().values() {
            *histogram.entry(fiber.elements().count()).or_default() += 1;
        }
        LiftReport {
            structure: structure_id(n.source()),
            k: n.k(),
            include_repetitions: n.config().include_repetition_tuples,
            size: n.structure().domain(),
            padding: n.padding().entries().to_vec(),
            signature: n.structure().signature().clone(),
            elements,
            fiber_sizes: histogram
                .into_iter()
                .map(|(size, fibers)| FiberCount { size, fibers })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AutReport {
    pub structure: String,
    pub degree: usize,
    pub order: Value,
    pub generators: Vec<Vec<Element>>,
    pub orbits: Vec<Vec<Element>>,
    /// Whether search and the brute-force oracle give the same member set;
    /// absent above the oracle's degree bound.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub brute_agrees: Option<bool>,
}

impl AutReport {
    pub fn new(m: &Structure) -> Self {
        let group = automorphism_group(m);
        let brute_agrees = (m.domain() <= BRUTE_FORCE_MAX_DEGREE).then(|| same_members(&group, m));
        AutReport {
            structure: structure_id(m),
            degree: m.domain(),
            order: order_value(&group.order()),
            generators: group.generators().iter().map(|g| g.images().to_vec()).collect(),
            orbits: group.domain_orbits(),
            brute_agrees,
        }
    }

    pub fn passed(&self) -> bool {
        self.brute_agrees != Some(false)
    }
}

/// `group` and the brute-force automorphism list have the same members.
pub fn same_members(group: &PermGroup, m: &Structure) -> bool {
    let Ok(brute) = automorphism_group_brute(m) else {
        return false;
    };
    group.elements(brute.len() + 1).is_some_and(|members| members == brute)
}

/// A failed step of the isomorphism check, with the permutation involved.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IsoFailure {
    pub step: String,
    pub permutation: Vec<Element>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set: Option<Vec<Element>>,
}

impl IsoFailure {
    fn new(step: &str, pi: &Permutation, set: Option<&SubsetOfDomain>) -> Self {
        IsoFailure {
            step: step.into(),
            permutation: pi.images().to_vec(),
            set: set.map(|s| s.iter().collect()),
        }
    }
}

/// `direct_induced` and `project_automorphism` are homomorphisms on
/// generators and mutually inverse on both generating sets.
pub fn check_bijection(n: &LiftedStructure, gm: &PermGroup, gn: &PermGroup) -> Result<Option<IsoFailure>, LiftError> {
    for pi in gm.generators() {
        let pihat = direct_induced(n, pi)?;
        if project_automorphism(n, &pihat)? != *pi {
            return Ok(Some(IsoFailure::new("project-after-direct", pi, None)));
        }
    }
    for pihat in gn.generators() {
        let pi = project_automorphism(n, pihat)?;
        if direct_induced(n, &pi)? != *pihat {
            return Ok(Some(IsoFailure::new("direct-after-project", pihat, None)));
        }
    }
    Ok(None)
}

/// Sets of at most `max` points drawn from `points`, by size then lexically.
pub fn small_subsets(points: &[Element], max: usize) -> Vec<SubsetOfDomain> {
    let mut out = vec![Vec::new()];
    let mut layer: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..max {
        layer = layer
            .iter()
            .flat_map(|s| {
                let start = s.last().map_or(0, |&i| i + 1);
                (start..points.len()).map(move |i| {
                    let mut s = s.clone();
                    s.push(i);
                    s
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out.into_iter()
        .map(|s| s.into_iter().map(|i| points[i]).collect())
        .collect()
}

/// For every `B ⊆ N` with `|B| ≤ max`, the image under `direct_induced` of
/// `Aut(M/continuity_witness(B))` fixes `B`; for every `A ⊆ P^N` with
/// `|A| ≤ max`, the projection of `Aut(N/A)` fixes the preimage of `A`.
/// Inclusion of subgroups is checked on generators, which is exact.
pub fn check_continuity(
    n: &LiftedStructure,
    gm: &PermGroup,
    gn: &PermGroup,
    max: usize,
) -> Result<Option<IsoFailure>, LiftError> {
    let all: Vec<Element> = n.structure().elements().collect();
    let sets = small_subsets(&all, max);
    let forward = exec::map(&sets, |b| -> Result<Option<IsoFailure>, LiftError> {
        let a = continuity_witness(n, b);
        for h in gm.pointwise_stabilizer(&a).generators() {
            if !direct_induced(n, h)?.fixes_all(b.iter()) {
                return Ok(Some(IsoFailure::new("direct-fixes-set", h, Some(b))));
            }
        }
        Ok(None)
    });
    let p: Vec<Element> = n.p_elements().collect();
    let p_sets = small_subsets(&p, max);
    let backward = exec::map(&p_sets, |a| -> Result<Option<IsoFailure>, LiftError> {
        let a_m: Vec<Element> = a.iter().filter_map(|x| n.p_preimage(x)).collect();
        for h in gn.pointwise_stabilizer(a).generators() {
            if !project_automorphism(n, h)?.fixes_all(a_m.iter().copied()) {
                return Ok(Some(IsoFailure::new("project-fixes-set", h, Some(a))));
            }
        }
        Ok(None)
    });
    for r in forward.into_iter().chain(backward) {
        if let Some(failure) = r? {
            return Ok(Some(failure));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct IsoReport {
    pub order_M: Value,
    pub order_N: Value,
    pub bijective: bool,
    pub continuity_witnesses: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<IsoFailure>,
}

impl IsoReport {
    pub fn new(n: &LiftedStructure) -> Result<Self, LiftError> {
        let gm = automorphism_group(n.source());
        let gn = automorphism_group(n.structure());
        let bijection = check_bijection(n, &gm, &gn)?;
        let continuity = check_continuity(n, &gm, &gn, CONTINUITY_MAX_SET)?;
        let bijective = gm.order() == gn.order() && bijection.is_none();
        Ok(IsoReport {
            order_M: order_value(&gm.order()),
            order_N: order_value(&gn.order()),
            bijective,
            continuity_witnesses: Verdict::from(continuity.is_none()),
            failure: bijection.or(continuity),
        })
    }

    pub fn passed(&self) -> bool {
        self.bijective && self.continuity_witnesses == Verdict::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SchemeCheckReport {
    pub structure: String,
    pub k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mutation: Option<String>,
    pub scheme: SchemeDoc,
    pub validation: ValidationReport,
    /// Whether the scheme's induced map equals `direct_induced` on every
    /// generator of `Aut(M)`; absent when validation failed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub induced_matches_direct: Option<bool>,
}

impl SchemeCheckReport {
    pub fn new(n: &LiftedStructure, mutation: Option<Mutation>) -> Result<Self, ReportError> {
        let m = n.source();
        let (mut s, mut f) = generate_scheme(m, n)?;
        if let Some(mu) = mutation {
            (s, f) = mu.apply(&s, &f).ok_or(ReportError::MutationNotApplicable(mu.to_string()))?;
        }
        let companion = relational_companion(n.structure());
        let validation = validate_scheme(m, &companion, &s, &f).map_err(LiftError::from)?;
        let induced_matches_direct = if validation.passed() {
            let gens = automorphism_group(m);
            let mut agree = true;
            for pi in gens.generators() {
                let induced = induced_automorphism(m, &companion, &s, &f, pi).map_err(LiftError::from)?;
                agree &= induced == direct_induced(n, pi)?;
            }
            Some(agree)
        } else {
            None
        };
        Ok(SchemeCheckReport {
            structure: structure_id(m),
            k: n.k(),
            mutation: mutation.map(|mu| mu.to_string()),
            scheme: SchemeDoc::new(&s, &f, m.signature(), companion.signature()),
            validation,
            induced_matches_direct,
        })
    }

    pub fn passed(&self) -> bool {
        self.validation.passed() && self.induced_matches_direct != Some(false)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LimitEntry {
    pub element: Element,
    pub tuple: Vec<Element>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LimitRow {
    pub relation: String,
    pub limits: Vec<LimitEntry>,
}

/// A tuple where membership in `R` and the presence of a limit element
/// disagree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RigidityFailure {
    pub relation: String,
    pub tuple: Vec<Element>,
    pub holds: bool,
}

/// `F`-values of a fiber element, read back into `M`.
fn coordinates(n: &LiftedStructure, relation: usize, x: Element) -> Vec<Element> {
    n.layout(relation)
        .f
        .iter()
        .map(|&f| n.p_preimage(n.structure().apply(f, x)).expect("F maps into P"))
        .collect()
}

/// Limit elements of every relation with their `F`-values.
pub fn limit_rows(n: &LiftedStructure) -> Vec<LimitRow> {
    n.layouts()
        .iter()
        .map(|layout| {
            let relation = layout.key.relation;
            LimitRow {
                relation: n.source().signature().relations[relation].name.clone(),
                limits: limit_elements(n, relation)
                    .into_iter()
                    .map(|element| LimitEntry {
                        element,
                        tuple: coordinates(n, relation, element),
                    })
                    .collect(),
            }
        })
        .collect()
}

/// For every repetition-free tuple `ā` of every relation's arity:
/// `ā ∈ R` iff some limit element has `F`-values `ā`.
pub fn check_rigidity(n: &LiftedStructure) -> Option<RigidityFailure> {
    let m = n.source();
    let rows = limit_rows(n);
    n.layouts().iter().zip(&rows).find_map(|(layout, row)| {
        let arity = layout.key.arity;
        let size = m.domain();
        (0..size.pow(arity as u32))
            .map(|i| exec::unrank_tuple(i, size, arity))
            .filter(|t| (0..arity).all(|s| (s + 1..arity).all(|u| t[s] != t[u])))
            .find_map(|t| {
                let holds = m.holds(layout.key.relation, &t);
                let limit = row.limits.iter().any(|e| e.tuple == t);
                (holds != limit).then(|| RigidityFailure {
                    relation: row.relation.clone(),
                    tuple: t,
                    holds,
                })
            })
    })
}

/// The first permutation of `M`, in lexicographic order, that is not an
/// automorphism yet is not rejected by `direct_induced` with a fiber
/// witness. `None` when every non-automorphism is rejected.
pub fn check_rejections(n: &LiftedStructure) -> Result<Option<Permutation>, LiftError> {
    let m = n.source();
    let perms = all_permutations(m.domain())?;
    Ok(exec::find_map_first(&perms, |pi| {
        let is_aut = crate::perm::is_automorphism(m, pi).unwrap_or(false);
        let rejected = matches!(direct_induced(n, pi), Err(LiftError::LimitHasNoTarget { .. }));
        (!is_aut && !rejected).then(|| pi.clone())
    }))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LimitReport {
    pub structure: String,
    pub k: usize,
    pub relations: Vec<LimitRow>,
    pub rigidity: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rigidity_failure: Option<RigidityFailure>,
    /// Whether every non-automorphism of `M` is rejected with a fiber
    /// witness; absent above the brute-force degree bound.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rejects_non_automorphisms: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accepted_non_automorphism: Option<Vec<Element>>,
}

impl LimitReport {
    pub fn new(n: &LiftedStructure) -> Result<Self, LiftError> {
        let rigidity_failure = check_rigidity(n);
        let accepted = if n.source().domain() <= BRUTE_FORCE_MAX_DEGREE {
            Some(check_rejections(n)?)
        } else {
            None
        };
        Ok(LimitReport {
            structure: structure_id(n.source()),
            k: n.k(),
            relations: limit_rows(n),
            rigidity: Verdict::from(rigidity_failure.is_none()),
            rigidity_failure,
            rejects_non_automorphisms: accepted.as_ref().map(|a| Verdict::from(a.is_none())),
            accepted_non_automorphism: accepted.flatten().map(|p| p.images().to_vec()),
        })
    }

    pub fn passed(&self) -> bool {
        self.rigidity == Verdict::Pass && self.rejects_non_automorphisms != Some(Verdict::Fail)
    }
}

/// Every report for one structure and copy bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FullReport {
    pub lift: LiftReport,
    pub aut: AutReport,
    pub verify_iso: IsoReport,
    pub scheme_check: SchemeCheckReport,
    pub limit: LimitReport,
    pub census: CensusReport,
}

impl FullReport {
    /// The census runs over `k = 1..=cfg.k` with no parameters.
    pub fn new(m: &Structure, cfg: &LiftConfig) -> Result<Self, ReportError> {
        let n = lift(m, cfg)?;
        let ks: Vec<usize> = (1..=cfg.k).collect();
        Ok(FullReport {
            lift: LiftReport::new(&n),
            aut: AutReport::new(m),
            verify_iso: IsoReport::new(&n)?,
            scheme_check: SchemeCheckReport::new(&n, None)?,
            limit: LimitReport::new(&n)?,
            census: stability_report(m, &ks, &[SubsetOfDomain::empty()])?,
        })
    }

    pub fn passed(&self) -> bool {
        self.aut.passed()
            && self.verify_iso.passed()
            && self.scheme_check.passed()
            && self.limit.passed()
            && self.census.passed()
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ReportError {
    #[error(transparent)]
    Lift(#[from] LiftError),
    #[error(transparent)]
    Stability(#[from] StabilityError),
    #[error("mutation `{0}` does not apply to the generated scheme")]
    MutationNotApplicable(String),
}

#[cfg(test)]
mod tests {
    use super::*;

    fn digraph(n: usize, edges: &[[Element; 2]]) -> Structure {
        Structure::relational(
            Signature::relational([("R", 2)]).unwrap(),
            n,
            vec![edges.iter().map(|e| e.to_vec()).collect()],
        )
        .unwrap()
    }

    #[test]
    fn verify_iso_on_m1() {
        let n = lift(&digraph(2, &[]), &LiftConfig::new(1)).unwrap();
        let report = IsoReport::new(&n).unwrap();
        assert_eq!(
            serde_json::to_string(&report).unwrap(),
            r#"{"order_M":2,"order_N":2,"bijective":true,"continuity_witnesses":"pass"}"#
        );
    }

    #[test]
    fn lift_report_on_m0() {
        let n = lift(&digraph(2, &[[0, 1]]), &LiftConfig::new(1)).unwrap();
        let report = LiftReport::new(&n);
        assert_eq!(report.size, 6);
        assert_eq!(report.elements[4].sort, "R:inf");
        assert_eq!(
            report.fiber_sizes,
            [FiberCount { size: 1, fibers: 1 }, FiberCount { size: 2, fibers: 1 }]
        );
        let json = serde_json::to_string(&report.elements[4]).unwrap();
        assert_eq!(
            json,
            r#"{"id":4,"sort":"R:inf","provenance":{"kind":"copy","relation":"R","index":"inf","tuple":[0,1]}}"#
        );
    }

    #[test]
    fn limit_and_rejection_on_m0() {
        let n = lift(&digraph(2, &[[0, 1]]), &LiftConfig::new(2)).unwrap();
        let report = LimitReport::new(&n).unwrap();
        assert!(report.passed());
        assert_eq!(report.relations[0].limits, [LimitEntry { element: 5, tuple: vec![0, 1] }]);
    }

    #[test]
    fn scheme_check_mutation_fails_with_witness() {
        let n = lift(&digraph(2, &[[0, 1]]), &LiftConfig::new(1)).unwrap();
        let clean = SchemeCheckReport::new(&n, None).unwrap();
        assert!(clean.passed());
        assert_eq!(clean.induced_matches_direct, Some(true));
        let broken = SchemeCheckReport::new(&n, Some(Mutation::NegateRelFormula(0))).unwrap();
        assert!(!broken.passed());
        assert!(broken.validation.first_failure().unwrap().witness.is_some());
        assert!(SchemeCheckReport::new(&n, Some(Mutation::DropImage(99))).is_err());
    }

    #[test]
    fn full_report_is_deterministic() {
        let m = digraph(3, &[[0, 1], [1, 2]]);
        let a = FullReport::new(&m, &LiftConfig::new(2)).unwrap();
        let b = FullReport::new(&m, &LiftConfig::new(2)).unwrap();
        assert!(a.passed());
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn subsets_by_size() {
        let sets = small_subsets(&[3, 5, 7], 2);
        assert_eq!(sets.len(), 1 + 3 + 3);
        assert_eq!(sets[4].iter().collect::<Vec<_>>(), [3, 5]);
    }
}
