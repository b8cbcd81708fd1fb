use thiserror::Error;

use crate::exec;
use crate::logic::{definable_set, eval_tuple, EvalError, Formula};
use crate::structure::{Element, Structure};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuotientError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("equivalence formula uses variable x{var}, outside 0..{limit}")]
    WidthMismatch { var: usize, limit: usize },
    #[error("not reflexive at {0:?}")]
    NotReflexive(Vec<Element>),
    #[error("not symmetric: E({0:?}, {1:?}) but not E({1:?}, {0:?})")]
    NotSymmetric(Vec<Element>, Vec<Element>),
    #[error("not transitive: E({0:?}, {1:?}) and E({1:?}, {2:?}) but not E({0:?}, {2:?})")]
    NotTransitive(Vec<Element>, Vec<Element>, Vec<Element>),
}

/// `r(M)/E(M)`: the tuples of `r(M)` in lexicographic order and their
/// classes, ordered by least member. A class is named by its least member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quotient {
    width: usize,
    members: Vec<Vec<Element>>,
    class_of: Vec<usize>,
    classes: Vec<Vec<Vec<Element>>>,
}

impl Quotient {
    pub fn width(&self) -> usize {
        self.width
    }

    /// `r(M)`, sorted.
    pub fn members(&self) -> &[Vec<Element>] {
        &self.members
    }

    pub fn classes(&self) -> &[Vec<Vec<Element>>] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Index of the class containing `tuple`, or `None` if `tuple ∉ r(M)`.
    pub fn class_index(&self, tuple: &[Element]) -> Option<usize> {
        self.members
            .binary_search_by(|m| m.as_slice().cmp(tuple))
            .ok()
            .map(|i| self.class_of[i])
    }

    /// Least member of class `c`.
    pub fn representative(&self, c: usize) -> &[Element] {
        &self.classes[c][0]
    }
}

pub(crate) fn pair(a: &[Element], b: &[Element]) -> Vec<Element> {
    let mut t = Vec::with_capacity(a.len() + b.len());
    t.extend_from_slice(a);
    t.extend_from_slice(b);
    t
}

/// One row of the relation matrix, packed into words.
#[derive(PartialEq, Eq)]
struct Row(Vec<u64>);

impl Row {
    fn get(&self, j: usize) -> bool {
        self.0[j / 64] >> (j % 64) & 1 == 1
    }

    fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &bits)| {
            (0..64).filter(move |b| bits >> b & 1 == 1).map(move |b| w * 64 + b)
        })
    }
}

/// Computes `r(M)/E(M)` where `E` reads its `2w` variables as the pair
/// `(x0..x(w-1), xw..x(2w-1))`. Fails with a witness if `E` is not an
/// equivalence relation on `r(M)`.
pub fn quotient(m: &Structure, r: &Formula, e: &Formula) -> Result<Quotient, QuotientError> {
    let members = definable_set(m, r)?;
    let width = crate::logic::tuple_width(r)?;
    if let Some(&var) = e.free_vars().iter().find(|&&v| v >= 2 * width) {
        return Err(QuotientError::WidthMismatch {
            var,
            limit: 2 * width,
        });
    }
    let n = members.len();
    let rows: Vec<Row> = exec::map(&members, |u| {
        let mut words = vec![0u64; n.div_ceil(64)];
        for (j, v) in members.iter().enumerate() {
            if eval_tuple(m, e, &pair(u, v)) {
                words[j / 64] |= 1 << (j % 64);
            }
        }
        Row(words)
    });
    if let Some(i) = (0..n).find(|&i| !rows[i].get(i)) {
        return Err(QuotientError::NotReflexive(members[i].clone()));
    }
    for (i, row) in rows.iter().enumerate() {
        if let Some(j) = row.ones().find(|&j| !rows[j].get(i)) {
            return Err(QuotientError::NotSymmetric(
                members[i].clone(),
                members[j].clone(),
            ));
        }
    }
    // reflexive + symmetric: transitive iff related tuples have equal rows,
    // and each row is compared once against the row that opens its class
    let mut class_of = vec![usize::MAX; n];
    let mut classes: Vec<Vec<Vec<Element>>> = Vec::new();
    for i in 0..n {
        if class_of[i] != usize::MAX {
            continue;
        }
        let id = classes.len();
        let mut class = Vec::new();
        for j in rows[i].ones() {
            if rows[j] != rows[i] {
                let w = (0..n).find(|&w| rows[i].get(w) != rows[j].get(w)).unwrap();
                let (a, b) = if rows[j].get(w) { (i, j) } else { (j, i) };
                return Err(QuotientError::NotTransitive(
                    members[a].clone(),
                    members[b].clone(),
                    members[w].clone(),
                ));
            }
            class_of[j] = id;
            class.push(members[j].clone());
        }
        classes.push(class);
    }
    Ok(Quotient {
        width,
        members,
        class_of,
        classes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;
    use crate::structure::Signature;

    fn m0() -> Structure {
        Structure::relational(Signature::relational([("R", 2)]).unwrap(), 2, vec![vec![vec![0, 1]]])
            .unwrap()
    }

    fn f(text: &str) -> Formula {
        parse_formula(text, m0().signature()).unwrap()
    }

    #[test]
    fn equality_quotient_is_the_domain() {
        let q = quotient(&m0(), &f("x0 = x0"), &f("x0 = x1")).unwrap();
        assert_eq!(q.classes(), &[vec![vec![0]], vec![vec![1]]]);
    }

    #[test]
    fn total_relation_gives_one_class() {
        let q = quotient(
            &m0(),
            &f("x0 = x0 & x1 = x1"),
            &f("x0 = x0 & x1 = x1 & x2 = x2 & x3 = x3"),
        )
        .unwrap();
        assert_eq!(q.len(), 1);
        assert_eq!(q.classes()[0].len(), 4);
        assert_eq!(q.representative(0), &[0, 0]);
    }

    #[test]
    fn non_reflexive_relation_rejected() {
        let err = quotient(&m0(), &f("x0 = x0"), &f("R(x0,x1)")).unwrap_err();
        assert_eq!(err, QuotientError::NotReflexive(vec![0]));
    }

    #[test]
    fn symmetry_and_transitivity_witnesses() {
        let path = Structure::relational(
            Signature::relational([("R", 2)]).unwrap(),
            3,
            vec![vec![vec![0, 1], vec![1, 0], vec![1, 2], vec![2, 1]]],
        )
        .unwrap();
        let sig = path.signature().clone();
        let refl_or_edge = parse_formula("x0 = x1 | R(x0,x1)", &sig).unwrap();
        let err = quotient(&path, &parse_formula("x0 = x0", &sig).unwrap(), &refl_or_edge).unwrap_err();
        assert!(matches!(err, QuotientError::NotTransitive(..)), "{err:?}");
        let m = m0();
        let asym = parse_formula("x0 = x1 | R(x0,x1)", m.signature()).unwrap();
        let err = quotient(&m, &f("x0 = x0"), &asym).unwrap_err();
        assert_eq!(err, QuotientError::NotSymmetric(vec![0], vec![1]));
    }
}
