//! Automorphism groups by individualization–refinement with backtracking.
//!
//! Colourings are refined by an isomorphism-invariant rule, so two branches
//! whose refinement traces differ cannot be related by an automorphism and
//! are pruned. Each leaf candidate is checked with [`is_automorphism`].

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use super::{is_automorphism, PermGroup, Permutation};
use crate::logic::atomic_types;
use crate::structure::{Element, Structure};

/// Incidence data of a structure, precomputed once per search.
struct Incidence {
    n: usize,
    tuples: Vec<Vec<Vec<Element>>>,
    /// For each element: (relation, position, tuple index).
    rel_inc: Vec<Vec<(u32, u32, u32)>>,
    images: Vec<Vec<Element>>,
    preimages: Vec<Vec<Vec<Element>>>,
}

impl Incidence {
    fn new(m: &Structure) -> Self {
        let n = m.domain();
        let tuples: Vec<Vec<Vec<Element>>> = m
            .relations()
            .iter()
            .map(|r| r.iter().cloned().collect())
            .collect();
        let mut rel_inc = vec![Vec::new(); n];
        for (r, ts) in tuples.iter().enumerate() {
            for (ti, t) in ts.iter().enumerate() {
                for (pos, &a) in t.iter().enumerate() {
                    rel_inc[a].push((r as u32, pos as u32, ti as u32));
                }
            }
        }
        let images: Vec<Vec<Element>> = (0..m.signature().functions.len())
            .map(|f| m.function(f).to_vec())
            .collect();
        let preimages = images
            .iter()
            .map(|img| {
                let mut pre = vec![Vec::new(); n];
                for (x, &y) in img.iter().enumerate() {
                    pre[y].push(x);
                }
                pre
            })
            .collect();
        Incidence {
            n,
            tuples,
            rel_inc,
            images,
            preimages,
        }
    }

    fn signature_of(&self, x: Element, colors: &[u32]) -> Vec<u32> {
        let mut sig = vec![colors[x]];
        for img in &self.images {
            sig.push(colors[img[x]]);
        }
        for pre in &self.preimages {
            let mut cs: Vec<u32> = pre[x].iter().map(|&y| colors[y]).collect();
            cs.sort_unstable();
            sig.push(cs.len() as u32);
            sig.extend(cs);
        }
        let mut incs: Vec<Vec<u32>> = self.rel_inc[x]
            .iter()
            .map(|&(r, pos, ti)| {
                let mut v = vec![r, pos];
                v.extend(self.tuples[r as usize][ti as usize].iter().map(|&a| colors[a]));
                v
            })
            .collect();
        incs.sort_unstable();
        sig.push(incs.len() as u32);
        for v in incs {
            sig.extend(v);
        }
        sig
    }
}

/// An equitable ordered colouring with the hash of how it was reached.
#[derive(Clone)]
struct Node {
    colors: Vec<u32>,
    sizes: Vec<u32>,
    trace: u64,
}

impl Node {
    fn is_discrete(&self) -> bool {
        self.sizes.len() == self.colors.len()
    }

    fn first_nontrivial_cell(&self) -> Option<u32> {
        self.sizes.iter().position(|&s| s > 1).map(|c| c as u32)
    }

    fn cell(&self, c: u32) -> impl Iterator<Item = Element> + '_ {
        self.colors
            .iter()
            .enumerate()
            .filter(move |(_, &k)| k == c)
            .map(|(x, _)| x)
    }

    fn compatible(&self, other: &Node) -> bool {
        self.trace == other.trace && self.sizes == other.sizes
    }
}

/// Ranks `keys` so that equal keys share a colour and colours follow key
/// order. Returns the colours and the cell sizes.
fn rank<K: Ord + Clone>(keys: &[K]) -> (Vec<u32>, Vec<u32>) {
    let mut sorted: Vec<K> = keys.to_vec();
    sorted.sort();
    sorted.dedup();
    let colors: Vec<u32> = keys
        .iter()
        .map(|k| sorted.binary_search(k).unwrap() as u32)
        .collect();
    let mut sizes = vec![0; sorted.len()];
    for &c in &colors {
        sizes[c as usize] += 1;
    }
    (colors, sizes)
}

fn refine(inc: &Incidence, colors: Vec<u32>, sizes: Vec<u32>, mut hasher: DefaultHasher) -> Node {
    let mut colors = colors;
    let mut sizes = sizes;
    loop {
        let sigs: Vec<Vec<u32>> = (0..inc.n).map(|x| inc.signature_of(x, &colors)).collect();
        let (next, next_sizes) = rank(&sigs);
        let mut distinct: Vec<&Vec<u32>> = sigs.iter().collect();
        distinct.sort();
        distinct.dedup();
        distinct.hash(&mut hasher);
        next_sizes.hash(&mut hasher);
        let stable = next_sizes.len() == sizes.len();
        colors = next;
        sizes = next_sizes;
        if stable {
            break;
        }
    }
    Node {
        colors,
        sizes,
        trace: hasher.finish(),
    }
}

fn individualize(inc: &Incidence, node: &Node, x: Element) -> Node {
    let keys: Vec<(u32, bool)> = (0..inc.n).map(|y| (node.colors[y], y != x)).collect();
    let (colors, sizes) = rank(&keys);
    let mut hasher = DefaultHasher::new();
    node.trace.hash(&mut hasher);
    node.colors[x].hash(&mut hasher);
    refine(inc, colors, sizes, hasher)
}

fn leaf_permutation(left: &Node, right: &Node) -> Permutation {
    let mut by_color = vec![0; right.colors.len()];
    for (y, &c) in right.colors.iter().enumerate() {
        by_color[c as usize] = y;
    }
    let images = left.colors.iter().map(|&c| by_color[c as usize]).collect();
    Permutation::from_images(images).expect("discrete colourings give a bijection")
}

/// Depth-first search for an automorphism taking the left colouring onto
/// the right one.
fn extend(m: &Structure, inc: &Incidence, left: &Node, right: &Node) -> Option<Permutation> {
    if left.is_discrete() {
        if !right.is_discrete() {
            return None;
        }
        let p = leaf_permutation(left, right);
        return is_automorphism(m, &p).unwrap_or(false).then_some(p);
    }
    let c = left.first_nontrivial_cell()?;
    let x = left.cell(c).next()?;
    let lchild = individualize(inc, left, x);
    for y in right.cell(c) {
        let rchild = individualize(inc, right, y);
        if lchild.compatible(&rchild) {
            if let Some(p) = extend(m, inc, &lchild, &rchild) {
                return Some(p);
            }
        }
    }
    None
}

fn orbit_of(point: Element, gens: &[Permutation], n: usize) -> Vec<bool> {
    let mut inside = vec![false; n];
    inside[point] = true;
    let mut stack = vec![point];
    while let Some(a) = stack.pop() {
        for g in gens {
            let b = g.apply(a);
            if !inside[b] {
                inside[b] = true;
                stack.push(b);
            }
        }
    }
    inside
}

/// `Aut(M)`. The initial colouring is the sort partition (atomic types, which
/// already isolate constants and encode function-image facts); refinement
/// then adds function and relation incidence. The generating set is the
/// sorted set of coset representatives found along the leftmost path.
pub fn automorphism_group(m: &Structure) -> PermGroup {
    let n = m.domain();
    if n == 0 {
        return PermGroup::trivial(0);
    }
    let inc = Incidence::new(m);
    let (colors, sizes) = rank(&atomic_types(m));
    let root = refine(&inc, colors, sizes, DefaultHasher::new());

    let mut path = vec![root];
    let mut base = Vec::new();
    while let Some(c) = path.last().unwrap().first_nontrivial_cell() {
        let node = path.last().unwrap();
        let b = node.cell(c).next().unwrap();
        base.push((b, node.cell(c).collect::<Vec<_>>()));
        let child = individualize(&inc, node, b);
        path.push(child);
    }

    let mut gens: Vec<Permutation> = Vec::new();
    for (i, (b, cell)) in base.iter().enumerate().rev() {
        let parent = &path[i];
        let left = &path[i + 1];
        let mut orbit = orbit_of(*b, &gens, n);
        for &gamma in cell {
            if orbit[gamma] {
                continue;
            }
            let right = individualize(&inc, parent, gamma);
            if !left.compatible(&right) {
                continue;
            }
            if let Some(p) = extend(m, &inc, left, &right) {
                gens.push(p);
                orbit = orbit_of(*b, &gens, n);
            }
        }
    }
    PermGroup::new(n, gens).expect("automorphisms share the degree")
}
