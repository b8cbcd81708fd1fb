//! Test corpora: every repetition-free digraph on a few vertices, and seeded
//! random relational structures. Both are deterministic.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exec;
use crate::structure::{Element, RelationSymbol, Signature, Structure};

/// Largest vertex count for exhaustive enumeration (`2^6` digraphs on 3).
pub const MAX_EXHAUSTIVE: usize = 3;
pub const MAX_RANDOM_SIZE: usize = 8;
pub const MAX_RANDOM_ARITY: usize = 3;
pub const MAX_RANDOM_COUNT: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CorpusError {
    #[error("{what} = {found} exceeds the bound {max}")]
    BoundExceeded {
        what: &'static str,
        found: usize,
        max: usize,
    },
    #[error("random structures need at least one element")]
    EmptyDomain,
}

fn guard(what: &'static str, found: usize, max: usize) -> Result<(), CorpusError> {
    if found > max {
        return Err(CorpusError::BoundExceeded { what, found, max });
    }
    Ok(())
}

fn digraph_signature() -> Signature {
    Signature::relational([("R", 2)]).expect("valid signature")
}

/// Off-diagonal pairs of `0..n` in lexicographic order.
fn off_diagonal(n: usize) -> Vec<[Element; 2]> {
    (0..n)
        .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| [a, b]))
        .collect()
}

/// All `2^(n²−n)` repetition-free digraphs on exactly `n` vertices; bit `i`
/// of the index selects the `i`-th off-diagonal pair.
pub fn digraphs_on(n: usize) -> Result<Vec<Structure>, CorpusError> {
    guard("vertices", n, MAX_EXHAUSTIVE)?;
    let pairs = off_diagonal(n);
    let masks: Vec<usize> = (0..1usize << pairs.len()).collect();
    Ok(exec::map(&masks, |&mask| {
        let edges = pairs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, p)| p.to_vec())
            .collect();
        Structure::relational(digraph_signature(), n, vec![edges]).expect("edges are in range")
    }))
}

/// Digraphs on `1..=max_vertices` vertices, ordered by size then index.
/// With the default bound this is the 69-structure corpus `1 + 4 + 64`.
pub fn exhaustive_digraphs(max_vertices: usize) -> Result<Vec<Structure>, CorpusError> {
    guard("vertices", max_vertices, MAX_EXHAUSTIVE)?;
    let mut out = Vec::new();
    for n in 1..=max_vertices {
        out.extend(digraphs_on(n)?);
    }
    Ok(out)
}

/// Bounds for seeded random structures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomSpec {
    pub count: usize,
    /// Domain sizes are drawn uniformly from `1..=max_size`.
    pub max_size: usize,
    /// One relation `R<i>` per entry, with that arity.
    pub arities: Vec<usize>,
}

impl Default for RandomSpec {
    fn default() -> Self {
        RandomSpec {
            count: 32,
            max_size: 4,
            arities: vec![2],
        }
    }
}

/// `spec.count` repetition-free structures; each eligible tuple is included
/// with probability 1/2. The stream depends only on `seed` and `spec`.
pub fn random_structures(spec: &RandomSpec, seed: u64) -> Result<Vec<Structure>, CorpusError> {
    guard("count", spec.count, MAX_RANDOM_COUNT)?;
    guard("max_size", spec.max_size, MAX_RANDOM_SIZE)?;
    if spec.max_size == 0 {
        return Err(CorpusError::EmptyDomain);
    }
    for &arity in &spec.arities {
        guard("arity", arity, MAX_RANDOM_ARITY)?;
    }
    let signature = Signature::new(
        spec.arities
            .iter()
            .enumerate()
            .map(|(i, &arity)| RelationSymbol {
                name: format!("R{i}"),
                arity,
            })
            .collect(),
        Vec::new(),
        Vec::new(),
    )
    .expect("generated names are valid");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(spec.count);
    for _ in 0..spec.count {
        let size = rng.gen_range(1..=spec.max_size);
        let relations = spec
            .arities
            .iter()
            .map(|&arity| {
                let total = size.pow(arity as u32);
                (0..total)
                    .map(|i| exec::unrank_tuple(i, size, arity))
                    .filter(|t| (0..arity).all(|s| (s + 1..arity).all(|u| t[s] != t[u])))
                    .filter(|_| rng.gen_bool(0.5))
                    .collect()
            })
            .collect();
        out.push(Structure::relational(signature.clone(), size, relations).expect("tuples are in range"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exhaustive_counts() {
        assert_eq!(digraphs_on(2).unwrap().len(), 4);
        assert_eq!(digraphs_on(3).unwrap().len(), 64);
        let all = exhaustive_digraphs(3).unwrap();
        assert_eq!(all.len(), 69);
        assert_eq!(all[0].domain(), 1);
        assert!(all[1].relation(0).is_empty());
        assert_eq!(all[68].relation(0).len(), 6);
        assert!(exhaustive_digraphs(4).is_err());
    }

    #[test]
    fn random_corpus_is_seeded() {
        let spec = RandomSpec {
            count: 20,
            max_size: 5,
            arities: vec![1, 2, 3],
        };
        let a = random_structures(&spec, 7).unwrap();
        assert_eq!(a, random_structures(&spec, 7).unwrap());
        assert_ne!(a, random_structures(&spec, 8).unwrap());
        assert!(a.iter().all(|m| (1..=5).contains(&m.domain()) && m.repetition_free()));
        assert!(random_structures(&RandomSpec { max_size: 9, ..spec }, 0).is_err());
    }
}
