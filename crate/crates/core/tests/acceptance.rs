//! Acceptance suite. Prints one line per criterion and exits non-zero if any
//! fails. Every criterion is exact: counts, orders and member sets must
//! agree with no tolerance. Runtime budgets are checked for criteria 1
//! and 5.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stable_lift::corpus::{exhaustive_digraphs, random_structures, RandomSpec};
use stable_lift::exec;
use stable_lift::interp::{
    check_classical_interpretation, induced_automorphism, validate_scheme, Condition, Mutation, Witness,
};
use stable_lift::lift::{
    continuity_witness, direct_induced, generate_scheme, lift, project_automorphism, LiftConfig, LiftedStructure,
};
use stable_lift::logic::{parse_formula, Formula, Term};
use stable_lift::perm::{automorphism_group, is_automorphism, PermGroup};
use stable_lift::report::{
    check_bijection, check_continuity, check_rejections, check_rigidity, same_members, small_subsets, FullReport,
};
use stable_lift::stability::{orbit_decomposition_check, stability_report};
use stable_lift::structure::{relational_companion, RelationSymbol, Signature, Structure, SubsetOfDomain};

const COPY_BOUNDS: [usize; 2] = [1, 2];
const GROWTH_BOUNDS: [usize; 3] = [1, 2, 3];
const CORPUS_SIZE: usize = 69;
const ISO_BUDGET: Duration = Duration::from_secs(120);
const STABILITY_BUDGET: Duration = Duration::from_secs(300);
const EXHAUSTIVE_HOM_MAX: usize = 4;
const ORACLE_MAX_DEGREE: usize = 8;
const ORACLE_EQUIVALENCE_MAX_DEGREE: usize = 7;
const PARAMETER_MAX: usize = 2;
const FORMULA_CORPUS: usize = 1000;
const FORMULA_SEED: u64 = 0x5eed;

type Verdict = Result<String, String>;

struct Lifted {
    m: Structure,
    n: LiftedStructure,
    gm: PermGroup,
    gn: PermGroup,
}

fn lifts(corpus: &[Structure]) -> Vec<Lifted> {
    let jobs: Vec<(usize, usize)> = (0..corpus.len())
        .flat_map(|i| COPY_BOUNDS.iter().map(move |&k| (i, k)))
        .collect();
    exec::map(&jobs, |&(i, k)| {
        let m = corpus[i].clone();
        let n = lift(&m, &LiftConfig::new(k)).expect("corpus structures lift");
        let gm = automorphism_group(&m);
        let gn = automorphism_group(n.structure());
        Lifted { m, n, gm, gn }
    })
}

fn label(l: &Lifted) -> String {
    let edges: Vec<_> = l.m.relation(0).iter().collect();
    format!("|M|={} R={edges:?} k={}", l.m.domain(), l.n.k())
}

/// The first failure message, or the number of items checked.
fn all_ok(results: Vec<Result<usize, String>>) -> Result<usize, String> {
    results.into_iter().try_fold(0, |acc, r| r.map(|c| acc + c))
}

fn isomorphism(all: &[Lifted]) -> Verdict {
    let start = Instant::now();
    let results = exec::map(all, |l| -> Result<usize, String> {
        let fail = |what: String| format!("{}: {what}", label(l));
        if l.gm.order() != l.gn.order() {
            return Err(fail(format!("|Aut M| = {} but |Aut N| = {}", l.gm.order(), l.gn.order())));
        }
        if let Some(f) = check_bijection(&l.n, &l.gm, &l.gn).map_err(|e| fail(e.to_string()))? {
            return Err(fail(format!("{f:?}")));
        }
        let mut oracle = 0;
        if l.m.domain() <= EXHAUSTIVE_HOM_MAX {
            let members = l.gm.elements(usize::MAX).expect("small group");
            for pi in &members {
                let pihat = direct_induced(&l.n, pi).map_err(|e| fail(e.to_string()))?;
                if project_automorphism(&l.n, &pihat).map_err(|e| fail(e.to_string()))? != *pi {
                    return Err(fail(format!("project(direct({pi:?})) differs")));
                }
                for sigma in &members {
                    let lhs = direct_induced(&l.n, &pi.compose(sigma).unwrap()).unwrap();
                    let rhs = pihat.compose(&direct_induced(&l.n, sigma).unwrap()).unwrap();
                    if lhs != rhs {
                        return Err(fail(format!("not a homomorphism at {pi:?}, {sigma:?}")));
                    }
                }
            }
        }
        for (s, g) in [(&l.m, &l.gm), (l.n.structure(), &l.gn)] {
            if s.domain() <= ORACLE_MAX_DEGREE {
                if !same_members(g, s) {
                    return Err(fail(format!("search and oracle disagree on degree {}", s.domain())));
                }
                oracle += 1;
            }
        }
        Ok(oracle)
    });
    let oracle = all_ok(results)?;
    let elapsed = start.elapsed();
    if elapsed > ISO_BUDGET {
        return Err(format!("took {elapsed:?}, budget {ISO_BUDGET:?}"));
    }
    Ok(format!(
        "{} lifts, orders equal, maps mutually inverse, {oracle} oracle comparisons, {:.1}s",
        all.len(),
        elapsed.as_secs_f64()
    ))
}

fn rigidity(all: &[Lifted]) -> Verdict {
    let results = exec::map(all, |l| -> Result<usize, String> {
        if let Some(f) = check_rigidity(&l.n) {
            return Err(format!("{}: {f:?}", label(l)));
        }
        match check_rejections(&l.n) {
            Ok(None) => {}
            Ok(Some(pi)) => return Err(format!("{}: {pi:?} accepted", label(l))),
            Err(e) => return Err(format!("{}: {e}", label(l))),
        }
        let total: usize = (1..=l.m.domain()).product();
        Ok(total - l.gm.elements(usize::MAX).unwrap().len())
    });
    let rejected = all_ok(results)?;
    Ok(format!(
        "{} lifts, limit elements match R, {rejected} non-automorphisms rejected with fiber witnesses",
        all.len()
    ))
}

fn schemes(all: &[Lifted]) -> Verdict {
    let results = exec::map(all, |l| -> Result<[usize; 4], String> {
        let fail = |what: String| format!("{}: {what}", label(l));
        let (s, f) = generate_scheme(&l.m, &l.n).map_err(|e| fail(e.to_string()))?;
        let companion = relational_companion(l.n.structure());
        let report = validate_scheme(&l.m, &companion, &s, &f).map_err(|e| fail(e.to_string()))?;
        if let Some(c) = report.first_failure() {
            return Err(fail(format!("generated scheme fails {:?}: {:?}", c.condition, c.witness)));
        }
        let mut counts = [0; 4];
        for mutation in Mutation::all(&l.m, &s, &f) {
            let (ms, mf) = mutation.apply(&s, &f).expect("listed mutations apply");
            let caught = validate_scheme(&l.m, &companion, &ms, &mf)
                .is_ok_and(|r| r.first_failure().is_some_and(|c| c.witness.is_some()));
            if !caught {
                return Err(fail(format!("{mutation} not caught")));
            }
            counts[match mutation {
                Mutation::NegateRelFormula(_) => 0,
                Mutation::NegateEquivalence(_) | Mutation::RefineEquivalence(_) => 1,
                Mutation::CollapseMap(_) | Mutation::DropImage(_) => 2,
            }] += 1;
        }
        for pi in l.gm.generators() {
            let induced = induced_automorphism(&l.m, &companion, &s, &f, pi).map_err(|e| fail(e.to_string()))?;
            if induced != direct_induced(&l.n, pi).unwrap() {
                return Err(fail(format!("induced and direct maps differ on {pi:?}")));
            }
            counts[3] += 1;
        }
        Ok(counts)
    });
    let mut totals = [0; 4];
    for r in results {
        for (t, c) in totals.iter_mut().zip(r?) {
            *t += c;
        }
    }
    if totals[..3].contains(&0) {
        return Err(format!("a mutation family was never exercised: {totals:?}"));
    }
    Ok(format!(
        "{} schemes valid; caught {} relation, {} equivalence, {} map mutations; {} generators agree",
        all.len(),
        totals[0],
        totals[1],
        totals[2],
        totals[3]
    ))
}

fn continuity(all: &[Lifted]) -> Verdict {
    let results = exec::map(all, |l| -> Result<usize, String> {
        let fail = |what: String| format!("{}: {what}", label(l));
        let aut_m = l.gm.elements(usize::MAX).unwrap();
        let aut_n = l.gn.elements(usize::MAX).unwrap();
        let points: Vec<usize> = l.n.structure().elements().collect();
        let mut checked = 0;
        for b in small_subsets(&points, PARAMETER_MAX) {
            let a = continuity_witness(&l.n, &b);
            for pi in aut_m.iter().filter(|pi| pi.fixes_all(a.iter())) {
                if !direct_induced(&l.n, pi).unwrap().fixes_all(b.iter()) {
                    return Err(fail(format!("B={:?}: image of {pi:?} moves B", b.as_set())));
                }
                checked += 1;
            }
        }
        let p: Vec<usize> = l.n.p_elements().collect();
        for a in small_subsets(&p, PARAMETER_MAX) {
            let a_m: Vec<usize> = a.iter().map(|x| l.n.p_preimage(x).unwrap()).collect();
            for pihat in aut_n.iter().filter(|g| g.fixes_all(a.iter())) {
                if !project_automorphism(&l.n, pihat).unwrap().fixes_all(a_m.iter().copied()) {
                    return Err(fail(format!("A={:?}: projection of {pihat:?} moves A", a.as_set())));
                }
                checked += 1;
            }
        }
        match check_continuity(&l.n, &l.gm, &l.gn, PARAMETER_MAX) {
            Ok(None) => Ok(checked),
            Ok(Some(f)) => Err(fail(format!("generator check disagrees: {f:?}"))),
            Err(e) => Err(fail(e.to_string())),
        }
    });
    let checked = all_ok(results)?;
    Ok(format!("{} lifts, {checked} group members checked against |B| <= 2", all.len()))
}

fn stability(corpus: &[Structure], all: &[Lifted]) -> Verdict {
    let start = Instant::now();
    let results = exec::map(all, |l| -> Result<usize, String> {
        let p: Vec<usize> = l.n.p_elements().collect();
        let sets = small_subsets(&p, PARAMETER_MAX);
        for a in &sets {
            let r = orbit_decomposition_check(&l.m, &l.n, a).map_err(|e| e.to_string())?;
            if !r.holds || r.left != r.right {
                return Err(format!("{} A={:?}: {r:?}", label(l), a.as_set()));
            }
        }
        Ok(sets.len())
    });
    let identities = all_ok(results)?;
    let reports = exec::map(corpus, |m| -> Result<(usize, usize), String> {
        let p: Vec<usize> = (1..=m.domain()).collect();
        let sets: Vec<SubsetOfDomain> = small_subsets(&p, PARAMETER_MAX);
        let report = stability_report(m, &GROWTH_BOUNDS, &sets).map_err(|e| e.to_string())?;
        if let Some(row) = report.rows.iter().find(|r| r.growth_law != stable_lift::stability::Verdict::Pass) {
            return Err(format!("|M|={}: growth law fails at {row:?}", m.domain()));
        }
        Ok((report.rows.len(), report.findings.len()))
    });
    let (mut rows, mut findings) = (0, 0);
    for r in reports {
        let (a, b) = r?;
        rows += a;
        findings += b;
    }
    let elapsed = start.elapsed();
    if elapsed > STABILITY_BUDGET {
        return Err(format!("took {elapsed:?}, budget {STABILITY_BUDGET:?}"));
    }
    Ok(format!(
        "{identities} decomposition identities, {rows} growth-law rows over k in {GROWTH_BOUNDS:?}, \
         {findings} type/orbit findings, {:.1}s",
        elapsed.as_secs_f64()
    ))
}

fn oracle(corpus: &[Structure], all: &[Lifted]) -> Verdict {
    let structures: Vec<&Structure> = corpus
        .iter()
        .chain(all.iter().map(|l| l.n.structure()))
        .filter(|s| s.domain() <= ORACLE_EQUIVALENCE_MAX_DEGREE)
        .collect();
    let lifted = structures.len() - corpus.len();
    let disagree = exec::find_map_first(&structures, |s| (!same_members(&automorphism_group(s), s)).then_some(*s));
    match disagree {
        Some(s) => Err(format!("member sets differ on {}", s.to_json())),
        None => Ok(format!("{} structures ({lifted} lifts) of degree <= 7", structures.len())),
    }
}

fn formula_signature() -> Signature {
    let rel = |name: &str, arity| RelationSymbol {
        name: name.into(),
        arity,
    };
    Signature::new(
        vec![rel("R", 2), rel("S", 1), rel("T", 3)],
        vec!["f".into(), "g".into()],
        vec!["c".into(), "d".into()],
    )
    .unwrap()
}

fn random_term(rng: &mut ChaCha8Rng, depth: usize) -> Term {
    match rng.gen_range(0..if depth == 0 { 2 } else { 3 }) {
        0 => Term::var(rng.gen_range(0..4)),
        1 => Term::Const(rng.gen_range(0..2)),
        _ => Term::app(rng.gen_range(0..2), random_term(rng, depth - 1)),
    }
}

fn random_formula(rng: &mut ChaCha8Rng, sig: &Signature, depth: usize) -> Formula {
    let atom = |rng: &mut ChaCha8Rng| {
        if rng.gen_bool(0.3) {
            Formula::eq(random_term(rng, 2), random_term(rng, 2))
        } else {
            let r = rng.gen_range(0..sig.relations.len());
            let args = (0..sig.relations[r].arity).map(|_| random_term(rng, 2)).collect();
            Formula::Rel(r, args)
        }
    };
    if depth == 0 {
        return atom(rng);
    }
    let members = |rng: &mut ChaCha8Rng| -> Vec<Formula> {
        (0..rng.gen_range(2..=3)).map(|_| random_formula(rng, sig, depth - 1)).collect()
    };
    match rng.gen_range(0..5) {
        0 => atom(rng),
        1 => Formula::not(random_formula(rng, sig, depth - 1)),
        2 => Formula::And(members(rng)),
        3 => Formula::Or(members(rng)),
        _ => Formula::exists(rng.gen_range(0..4), random_formula(rng, sig, depth - 1)),
    }
}

fn formats(corpus: &[Structure], all: &[Lifted]) -> Verdict {
    let sig = formula_signature();
    let mut rng = ChaCha8Rng::seed_from_u64(FORMULA_SEED);
    for i in 0..FORMULA_CORPUS {
        let phi = random_formula(&mut rng, &sig, 4);
        let text = phi.display(&sig).to_string();
        match parse_formula(&text, &sig) {
            Ok(back) if back == phi => {}
            Ok(back) => return Err(format!("formula {i}: `{text}` reparses as {back:?}")),
            Err(e) => return Err(format!("formula {i}: `{text}`: {e}")),
        }
    }
    let random = random_structures(
        &RandomSpec {
            count: 100,
            max_size: 5,
            arities: vec![1, 2, 3],
        },
        FORMULA_SEED,
    )
    .unwrap();
    let structures: Vec<&Structure> = corpus
        .iter()
        .chain(&random)
        .chain(all.iter().map(|l| l.n.structure()))
        .collect();
    for s in &structures {
        match Structure::from_json(&s.to_json()) {
            Ok(back) if back == **s => {}
            _ => return Err(format!("structure does not round-trip: {}", s.to_json())),
        }
    }
    let render = |m: &Structure| serde_json::to_string(&FullReport::new(m, &LiftConfig::new(2)).unwrap()).unwrap();
    let first = exec::map(corpus, render);
    let again = exec::map(corpus, render);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let serial = pool.install(|| exec::map(corpus, render));
    if let Some(i) = (0..corpus.len()).find(|&i| first[i] != again[i] || first[i] != serial[i]) {
        return Err(format!("report for corpus item {i} differs between runs"));
    }
    Ok(format!(
        "{FORMULA_CORPUS} formulas, {} structures round-trip; {} reports identical across 3 runs incl. 1 thread",
        structures.len(),
        corpus.len()
    ))
}

fn definability(corpus: &[Structure]) -> Verdict {
    let results = exec::map(corpus, |m| -> Result<usize, String> {
        let fail = |what: String| format!("|M|={} R={:?}: {what}", m.domain(), m.relation(0));
        let d = parse_formula("x0 = x0", m.signature()).unwrap();
        let e = parse_formula("x0 = x1", m.signature()).unwrap();
        let alpha: Vec<Vec<usize>> = m.elements().map(|a| vec![a]).collect();
        let own = check_classical_interpretation(m, m, &d, &e, &alpha).map_err(|e| fail(e.to_string()))?;
        if !own.passed() {
            return Err(fail(format!("identity rejected: {:?}", own.first_failure())));
        }
        let Some(moved) = automorphism_group(m).generators().iter().find_map(|g| g.first_moved()) else {
            return Ok(0);
        };
        let planted = Structure::relational(
            Signature::relational([("U", 1)]).unwrap(),
            m.domain(),
            vec![vec![vec![moved]]],
        )
        .unwrap();
        let report = check_classical_interpretation(m, &planted, &d, &e, &alpha).map_err(|e| fail(e.to_string()))?;
        match &report.check(Condition::Invariance).and_then(|c| c.witness.clone()) {
            Some(Witness::NotInvariant {
                tuple,
                image,
                automorphism,
                ..
            }) if is_automorphism(m, automorphism).unwrap()
                && !planted.holds(0, image)
                && automorphism.apply_tuple(tuple) == *image =>
            {
                Ok(1)
            }
            other => Err(fail(format!("planted relation not rejected: {other:?}"))),
        }
    });
    let planted = all_ok(results)?;
    Ok(format!(
        "identity accepted on {} structures; {planted} planted relations rejected with automorphism witnesses",
        corpus.len()
    ))
}

fn main() -> ExitCode {
    let corpus = exhaustive_digraphs(3).expect("corpus bound");
    assert_eq!(corpus.len(), CORPUS_SIZE);
    let all = lifts(&corpus);
    let criteria: [(&str, &dyn Fn() -> Verdict); 8] = [
        ("isomorphism suite", &|| isomorphism(&all)),
        ("rigidity witness", &|| rigidity(&all)),
        ("scheme suite", &|| schemes(&all)),
        ("continuity witnesses", &|| continuity(&all)),
        ("stability evidence", &|| stability(&corpus, &all)),
        ("oracle equivalence", &|| oracle(&corpus, &all)),
        ("parser and format", &|| formats(&corpus, &all)),
        ("definability proxy", &|| definability(&corpus)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let line = match check() {
            Ok(detail) => format!("PASS  criterion {} {name} [exact]: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                format!("FAIL  criterion {} {name} [exact]: {why}", i + 1)
            }
        };
        println!("{line}");
    }
    println!("acceptance: {}/8 criteria passed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

