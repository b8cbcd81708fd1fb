use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::OnceLock;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::{PermError, Permutation};
use crate::structure::{Element, SubsetOfDomain};

/// One level of a stabilizer chain: the fundamental orbit of `point` under
/// the strong generators fixing all earlier base points, with a transversal
/// `u[β]` satisfying `u[β](point) = β`.
#[derive(Debug, Clone)]
struct Level {
    point: Element,
    transversal: BTreeMap<Element, Permutation>,
}

/// Base and strong generating set over a full ordering of the points.
/// Levels whose fundamental orbit is trivial are kept; they cost nothing and
/// make the level of a point a plain lookup.
#[derive(Debug, Clone)]
pub struct StabChain {
    levels: Vec<Level>,
    strong: Vec<(Permutation, usize)>,
}

impl StabChain {
    /// Schreier–Sims over the base `order` (a permutation of `0..degree`).
    fn build(degree: usize, generators: &[Permutation], order: &[Element]) -> StabChain {
        debug_assert_eq!(order.len(), degree);
        let mut pos = vec![0; degree];
        for (i, &p) in order.iter().enumerate() {
            pos[p] = i;
        }
        let level_of = |g: &Permutation| -> usize {
            (0..degree)
                .filter(|&x| g.apply(x) != x)
                .map(|x| pos[x])
                .min()
                .expect("identity has no level")
        };
        let identity = Permutation::identity(degree);
        let mut chain = StabChain {
            levels: order
                .iter()
                .map(|&point| Level {
                    point,
                    transversal: BTreeMap::from([(point, identity.clone())]),
                })
                .collect(),
            strong: generators
                .iter()
                .filter(|g| !g.is_identity())
                .map(|g| (g.clone(), level_of(g)))
                .collect(),
        };

        let mut i = degree;
        'outer: while i > 0 {
            let lvl = i - 1;
            chain.recompute_level(lvl);
            let level = chain.levels[lvl].clone();
            let gens: Vec<Permutation> = chain
                .strong
                .iter()
                .filter(|(_, l)| *l >= lvl)
                .map(|(g, _)| g.clone())
                .collect();
            for u_alpha in level.transversal.values() {
                for s in &gens {
                    let moved = s.after(u_alpha);
                    let u_image = &level.transversal[&moved.apply(level.point)];
                    let schreier = u_image.invert().after(&moved);
                    if let Some((residue, j)) = chain.sift_from(schreier, lvl + 1) {
                        chain.strong.push((residue, j));
                        i = j + 1;
                        continue 'outer;
                    }
                }
            }
            i -= 1;
        }
        chain
    }

    fn recompute_level(&mut self, lvl: usize) {
        let point = self.levels[lvl].point;
        let degree = self.levels.len();
        let gens: Vec<&Permutation> = self
            .strong
            .iter()
            .filter(|(_, l)| *l >= lvl)
            .map(|(g, _)| g)
            .collect();
        let mut transversal = BTreeMap::from([(point, Permutation::identity(degree))]);
        let mut queue = VecDeque::from([point]);
        while let Some(alpha) = queue.pop_front() {
            for s in &gens {
                let beta = s.apply(alpha);
                if !transversal.contains_key(&beta) {
                    let u = s.after(&transversal[&alpha]);
                    transversal.insert(beta, u);
                    queue.push_back(beta);
                }
            }
        }
        self.levels[lvl].transversal = transversal;
    }

    /// Sifts `g` through levels `start..`; returns the non-trivial residue
    /// and the level where it dropped out, or `None` if `g` sifts to the
    /// identity.
    fn sift_from(&self, mut g: Permutation, start: usize) -> Option<(Permutation, usize)> {
        for (lvl, level) in self.levels.iter().enumerate().skip(start) {
            if g.is_identity() {
                return None;
            }
            let beta = g.apply(level.point);
            match level.transversal.get(&beta) {
                None => return Some((g, lvl)),
                Some(u) => {
                    if beta != level.point {
                        g = u.invert().after(&g);
                    }
                }
            }
        }
        debug_assert!(g.is_identity());
        None
    }

    fn order(&self) -> BigUint {
        self.levels
            .iter()
            .map(|l| BigUint::from(l.transversal.len()))
            .product()
    }

    fn nontrivial_levels(&self) -> impl Iterator<Item = &Level> {
        self.levels.iter().filter(|l| l.transversal.len() > 1)
    }
}

/// A permutation group given by generators. The stabilizer chain (ascending
/// base) is computed on first use and shared by all later queries.
#[derive(Debug, Clone)]
pub struct PermGroup {
    degree: usize,
    generators: Vec<Permutation>,
    chain: OnceLock<StabChain>,
}

impl PermGroup {
    /// Identity generators are dropped; the rest are sorted and deduplicated.
    pub fn new(degree: usize, generators: Vec<Permutation>) -> Result<Self, PermError> {
        if let Some(g) = generators.iter().find(|g| g.degree() != degree) {
            return Err(PermError::DegreeMismatch {
                expected: degree,
                found: g.degree(),
            });
        }
        let mut generators: Vec<Permutation> =
            generators.into_iter().filter(|g| !g.is_identity()).collect();
        generators.sort();
        generators.dedup();
        Ok(PermGroup {
            degree,
            generators,
            chain: OnceLock::new(),
        })
    }

    pub fn trivial(degree: usize) -> Self {
        PermGroup::new(degree, Vec::new()).unwrap()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    pub fn chain(&self) -> &StabChain {
        self.chain.get_or_init(|| {
            let order: Vec<Element> = (0..self.degree).collect();
            StabChain::build(self.degree, &self.generators, &order)
        })
    }

    pub fn order(&self) -> BigUint {
        self.chain().order()
    }

    /// Non-redundant base points, ascending.
    pub fn base(&self) -> Vec<Element> {
        self.chain().nontrivial_levels().map(|l| l.point).collect()
    }

    /// Fundamental orbit lengths along [`PermGroup::base`].
    pub fn fundamental_orbit_sizes(&self) -> Vec<usize> {
        self.chain()
            .nontrivial_levels()
            .map(|l| l.transversal.len())
            .collect()
    }

    pub fn contains(&self, g: &Permutation) -> bool {
        g.degree() == self.degree && self.chain().sift_from(g.clone(), 0).is_none()
    }

    /// All members, sorted. `None` if the order exceeds `limit`.
    pub fn elements(&self, limit: usize) -> Option<Vec<Permutation>> {
        if self.order() > BigUint::from(limit) {
            return None;
        }
        let mut out = vec![Permutation::identity(self.degree)];
        // g = u_0 ∘ u_1 ∘ … with u_i from the i-th transversal
        for level in self.chain().nontrivial_levels().collect::<Vec<_>>().into_iter().rev() {
            out = level
                .transversal
                .values()
                .flat_map(|u| out.iter().map(move |g| u.after(g)))
                .collect();
        }
        out.sort();
        Some(out)
    }

    /// Orbits of the group on `0..degree`, each sorted, ordered by least
    /// element.
    pub fn domain_orbits(&self) -> Vec<Vec<Element>> {
        let mut label = vec![usize::MAX; self.degree];
        let mut orbits = Vec::new();
        for start in 0..self.degree {
            if label[start] != usize::MAX {
                continue;
            }
            let id = orbits.len();
            let mut orbit = vec![start];
            label[start] = id;
            let mut k = 0;
            while k < orbit.len() {
                let a = orbit[k];
                for g in &self.generators {
                    let b = g.apply(a);
                    if label[b] == usize::MAX {
                        label[b] = id;
                        orbit.push(b);
                    }
                }
                k += 1;
            }
            orbit.sort_unstable();
            orbits.push(orbit);
        }
        orbits
    }

    /// Partition of `subset` into the traces of the group's orbits.
    pub fn orbits(&self, subset: &SubsetOfDomain) -> Vec<Vec<Element>> {
        self.domain_orbits()
            .into_iter()
            .map(|o| o.into_iter().filter(|&a| subset.contains(a)).collect::<Vec<_>>())
            .filter(|o| !o.is_empty())
            .collect()
    }

    /// Orbits on tuples under the coordinatewise action, starting from
    /// `tuples` (orbit closure may add tuples not listed). Each orbit is
    /// sorted; orbits are ordered by least member.
    pub fn tuple_orbits(&self, tuples: &[Vec<Element>]) -> Vec<Vec<Vec<Element>>> {
        let mut seen: BTreeSet<Vec<Element>> = BTreeSet::new();
        let mut orbits = Vec::new();
        let mut starts: Vec<&Vec<Element>> = tuples.iter().collect();
        starts.sort();
        for t in starts {
            if seen.contains(t) {
                continue;
            }
            seen.insert(t.clone());
            let mut orbit = vec![t.clone()];
            let mut k = 0;
            while k < orbit.len() {
                for g in &self.generators {
                    let img = g.apply_tuple(&orbit[k]);
                    if seen.insert(img.clone()) {
                        orbit.push(img);
                    }
                }
                k += 1;
            }
            orbit.sort();
            orbits.push(orbit);
        }
        orbits
    }

    /// `{ g ∈ G : g fixes every point of subset }`.
    pub fn pointwise_stabilizer(&self, subset: &SubsetOfDomain) -> PermGroup {
        if subset.is_empty() {
            return self.clone();
        }
        let order: Vec<Element> = subset
            .iter()
            .chain((0..self.degree).filter(|&a| !subset.contains(a)))
            .collect();
        let chain = StabChain::build(self.degree, &self.generators, &order);
        let gens = chain
            .strong
            .into_iter()
            .filter(|(_, lvl)| *lvl >= subset.len())
            .map(|(g, _)| g)
            .collect();
        PermGroup::new(self.degree, gens).expect("strong generators share the degree")
    }

    pub fn to_doc(&self) -> GroupDoc {
        GroupDoc {
            degree: self.degree,
            generators: self.generators.iter().map(|g| g.images().to_vec()).collect(),
            order: self.order().to_string(),
        }
    }

    pub fn from_doc(doc: &GroupDoc) -> Result<Self, PermError> {
        let gens = doc
            .generators
            .iter()
            .map(|g| Permutation::from_images(g.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        PermGroup::new(doc.degree, gens)
    }
}

/// JSON form of a group: generator image sequences, degree, and the order as
/// a decimal string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupDoc {
    pub degree: usize,
    pub generators: Vec<Vec<Element>>,
    pub order: String,
}
