use std::fmt;

use serde::{Deserialize, Serialize};

use super::PermError;
use crate::structure::Element;

/// A permutation of `0..degree`, stored as its image sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation(Vec<Element>);

impl Permutation {
    pub fn identity(degree: usize) -> Self {
        Permutation((0..degree).collect())
    }

    pub fn from_images(images: Vec<Element>) -> Result<Self, PermError> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || std::mem::replace(&mut seen[i], true) {
                return Err(PermError::NotBijective(images));
            }
        }
        Ok(Permutation(images))
    }

    /// Swap of `a` and `b`.
    pub fn transposition(degree: usize, a: Element, b: Element) -> Self {
        let mut p = Self::identity(degree);
        p.0.swap(a, b);
        p
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn images(&self) -> &[Element] {
        &self.0
    }

    #[inline]
    pub fn apply(&self, a: Element) -> Element {
        self.0[a]
    }

    pub fn apply_tuple(&self, tuple: &[Element]) -> Vec<Element> {
        tuple.iter().map(|&a| self.0[a]).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &a)| i == a)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation, PermError> {
        if self.degree() != other.degree() {
            return Err(PermError::DegreeMismatch {
                expected: self.degree(),
                found: other.degree(),
            });
        }
        Ok(self.after(other))
    }

    /// Unchecked `self ∘ other`.
    pub(crate) fn after(&self, other: &Permutation) -> Permutation {
        debug_assert_eq!(self.degree(), other.degree());
        Permutation(other.0.iter().map(|&a| self.0[a]).collect())
    }

    pub fn invert(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (i, &a) in self.0.iter().enumerate() {
            inv[a] = i;
        }
        Permutation(inv)
    }

    pub fn fixes_all(&self, points: impl IntoIterator<Item = Element>) -> bool {
        points.into_iter().all(|a| self.0[a] == a)
    }

    /// Smallest moved point.
    pub fn first_moved(&self) -> Option<Element> {
        self.0.iter().enumerate().position(|(i, &a)| i != a)
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = PermError;

    fn try_from(images: Vec<usize>) -> Result<Self, Self::Error> {
        Permutation::from_images(images)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.0
    }
}

impl fmt::Display for Permutation {
    /// Cycle notation; the identity prints as `()`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut seen = vec![false; self.0.len()];
        let mut any = false;
        for start in 0..self.0.len() {
            if seen[start] || self.0[start] == start {
                continue;
            }
            any = true;
            write!(f, "(")?;
            let mut x = start;
            let mut first = true;
            while !seen[x] {
                seen[x] = true;
                if !first {
                    write!(f, " ")?;
                }
                write!(f, "{x}")?;
                first = false;
                x = self.0[x];
            }
            write!(f, ")")?;
        }
        if !any {
            write!(f, "()")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn swap_squared_is_identity() {
        let s = Permutation::transposition(2, 0, 1);
        assert!(s.compose(&s).unwrap().is_identity());
        assert!(Permutation::identity(3).invert().is_identity());
        assert_eq!(s.to_string(), "(0 1)");
        assert_eq!(Permutation::identity(2).to_string(), "()");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Permutation::from_images(vec![0, 0]).is_err());
        assert!(Permutation::from_images(vec![0, 2]).is_err());
        let a = Permutation::identity(2);
        let b = Permutation::identity(3);
        assert!(matches!(a.compose(&b), Err(PermError::DegreeMismatch { .. })));
    }

    fn arb_perm() -> impl Strategy<Value = Permutation> {
        (1usize..9).prop_flat_map(|n| {
            Just((0..n).collect::<Vec<_>>())
                .prop_shuffle()
                .prop_map(|v| Permutation::from_images(v).unwrap())
        })
    }

    proptest! {
        #[test]
        fn inverse_cancels(p in arb_perm()) {
            prop_assert!(p.compose(&p.invert()).unwrap().is_identity());
            prop_assert!(p.invert().compose(&p).unwrap().is_identity());
        }

        #[test]
        fn composition_applies_right_first(p in arb_perm(), seed in any::<u64>()) {
            let n = p.degree();
            let mut q: Vec<usize> = (0..n).collect();
            q.rotate_left((seed as usize) % n);
            let q = Permutation::from_images(q).unwrap();
            let pq = p.compose(&q).unwrap();
            for x in 0..n {
                prop_assert_eq!(pq.apply(x), p.apply(q.apply(x)));
            }
        }
    }
}
