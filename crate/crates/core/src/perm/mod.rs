//! Permutations, permutation groups (Schreier–Sims), automorphism search and
//! the brute-force oracle it is tested against.

mod group;
mod permutation;
mod search;

use thiserror::Error;

pub use group::{GroupDoc, PermGroup, StabChain};
pub use permutation::Permutation;
pub use search::automorphism_group;

use crate::exec;
use crate::structure::{Element, Structure};

/// Largest degree the brute-force oracle accepts.
pub const BRUTE_FORCE_MAX_DEGREE: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PermError {
    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("image sequence {0:?} is not a bijection")]
    NotBijective(Vec<Element>),
    #[error("degree {0} is too large for the brute-force oracle (max {BRUTE_FORCE_MAX_DEGREE})")]
    TooLarge(usize),
}

/// True iff `pi` preserves every relation in both directions, commutes with
/// every function and fixes every constant.
pub fn is_automorphism(m: &Structure, pi: &Permutation) -> Result<bool, PermError> {
    if pi.degree() != m.domain() {
        return Err(PermError::DegreeMismatch {
            expected: m.domain(),
            found: pi.degree(),
        });
    }
    // a bijection mapping a finite relation into itself maps it onto itself
    let relations_ok = m
        .relations()
        .iter()
        .all(|rel| rel.iter().all(|t| rel.contains(&pi.apply_tuple(t))));
    let functions_ok = (0..m.signature().functions.len()).all(|f| {
        m.elements()
            .all(|x| pi.apply(m.apply(f, x)) == m.apply(f, pi.apply(x)))
    });
    let constants_ok = m.constants().iter().all(|&c| pi.apply(c) == c);
    Ok(relations_ok && functions_ok && constants_ok)
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// The `index`-th permutation of `0..n` in lexicographic order.
pub(crate) fn nth_permutation(mut index: usize, n: usize) -> Permutation {
    let mut pool: Vec<Element> = (0..n).collect();
    let mut images = Vec::with_capacity(n);
    for k in (0..n).rev() {
        let f = factorial(k);
        images.push(pool.remove(index / f));
        index %= f;
    }
    Permutation::from_images(images).unwrap()
}

/// All `n!` permutations of `0..n` in lexicographic order.
pub fn all_permutations(n: usize) -> Result<Vec<Permutation>, PermError> {
    if n > BRUTE_FORCE_MAX_DEGREE {
        return Err(PermError::TooLarge(n));
    }
    Ok(exec::filter_map_range(factorial(n), |i| Some(nth_permutation(i, n))))
}

/// Every automorphism of `m`, found by filtering all `|M|!` permutations, in
/// lexicographic order of image sequences.
pub fn automorphism_group_brute(m: &Structure) -> Result<Vec<Permutation>, PermError> {
    let n = m.domain();
    if n > BRUTE_FORCE_MAX_DEGREE {
        return Err(PermError::TooLarge(n));
    }
    Ok(exec::filter_map_range(factorial(n), |i| {
        let p = nth_permutation(i, n);
        is_automorphism(m, &p).unwrap().then_some(p)
    }))
}

pub fn compose(a: &Permutation, b: &Permutation) -> Result<Permutation, PermError> {
    a.compose(b)
}

pub fn invert(a: &Permutation) -> Permutation {
    a.invert()
}

pub fn identity(degree: usize) -> Permutation {
    Permutation::identity(degree)
}

#[cfg(test)]
mod tests {
    use num_bigint::BigUint;

    use super::*;
    use crate::structure::{Signature, SubsetOfDomain};

    fn digraph(n: usize, edges: &[(usize, usize)]) -> Structure {
        Structure::relational(
            Signature::relational([("R", 2)]).unwrap(),
            n,
            vec![edges.iter().map(|&(a, b)| vec![a, b]).collect()],
        )
        .unwrap()
    }

    #[test]
    fn automorphism_checks() {
        let m0 = digraph(2, &[(0, 1)]);
        let m1 = digraph(2, &[]);
        let swap = Permutation::transposition(2, 0, 1);
        assert!(is_automorphism(&m0, &identity(2)).unwrap());
        assert!(!is_automorphism(&m0, &swap).unwrap());
        assert!(is_automorphism(&m1, &swap).unwrap());
        assert!(is_automorphism(&m1, &identity(3)).is_err());
    }

    #[test]
    fn small_groups() {
        assert_eq!(automorphism_group(&digraph(2, &[])).order(), BigUint::from(2u32));
        assert_eq!(automorphism_group(&digraph(2, &[(0, 1)])).order(), BigUint::from(1u32));
        assert_eq!(automorphism_group(&digraph(3, &[])).order(), BigUint::from(6u32));
        let cycle = digraph(3, &[(0, 1), (1, 2), (2, 0)]);
        assert_eq!(automorphism_group(&cycle).order(), BigUint::from(3u32));
    }

    #[test]
    fn brute_oracle() {
        assert_eq!(
            automorphism_group_brute(&digraph(2, &[(0, 1)])).unwrap(),
            vec![identity(2)]
        );
        assert_eq!(
            automorphism_group_brute(&digraph(2, &[])).unwrap(),
            vec![identity(2), Permutation::transposition(2, 0, 1)]
        );
        assert!(automorphism_group_brute(&digraph(9, &[])).is_err());
    }

    #[test]
    fn lexicographic_unranking() {
        let all: Vec<_> = (0..24).map(|i| nth_permutation(i, 4)).collect();
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(all, sorted);
    }

    #[test]
    fn stabilizer_examples() {
        let m2 = automorphism_group(&digraph(3, &[]));
        assert_eq!(
            m2.pointwise_stabilizer(&SubsetOfDomain::new(3, [0]).unwrap()).order(),
            BigUint::from(2u32)
        );
        let m1 = automorphism_group(&digraph(2, &[]));
        assert_eq!(
            m1.pointwise_stabilizer(&SubsetOfDomain::new(2, [0]).unwrap()).order(),
            BigUint::from(1u32)
        );
        assert_eq!(m1.orbits(&SubsetOfDomain::new(2, 0..2).unwrap()), vec![vec![0, 1]]);
        let m0 = automorphism_group(&digraph(2, &[(0, 1)]));
        assert_eq!(m0.orbits(&SubsetOfDomain::new(2, 0..2).unwrap()), vec![vec![0], vec![1]]);
    }
}
