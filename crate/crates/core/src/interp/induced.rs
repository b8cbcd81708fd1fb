use super::quotient::{quotient, Quotient, QuotientError};
use super::validate::check_shape;
use super::{InterpretationScheme, SchemeError, SortBijections};
use crate::logic::sort_partition;
use crate::perm::{is_automorphism, Permutation};
use crate::structure::{Element, Structure};

/// The quotients of a scheme together with `F̄` and its inverse, ready to
/// transport automorphisms. Construction fails unless every sort map is a
/// bijection onto its quotient.
#[derive(Debug, Clone)]
pub struct SchemeModel<'a> {
    source: &'a Structure,
    target_size: usize,
    quotients: Vec<Quotient>,
    /// `(sort, class)` of each target element.
    place: Vec<(usize, usize)>,
    /// Target element owning each class, per sort.
    owner: Vec<Vec<Element>>,
}

impl<'a> SchemeModel<'a> {
    pub fn new(
        m1: &'a Structure,
        m2: &Structure,
        s: &InterpretationScheme,
        f: &SortBijections,
    ) -> Result<Self, SchemeError> {
        check_shape(m1, m2, s, f)?;
        let quotients = s
            .sorts
            .iter()
            .enumerate()
            .map(|(i, sort)| {
                quotient(m1, &sort.domain, &sort.equivalence).map_err(|e| match e {
                    QuotientError::Eval(e) => SchemeError::Eval(e),
                    source => SchemeError::Quotient { sort: i, source },
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut place = vec![None; m2.domain()];
        let mut owner = Vec::with_capacity(quotients.len());
        for (i, q) in quotients.iter().enumerate() {
            let mut classes = vec![None; q.len()];
            for (b, tuple) in &f.maps[i] {
                let c = q
                    .class_index(tuple)
                    .ok_or(SchemeError::ClassNotInRange { sort: i, element: *b })?;
                if classes[c].replace(*b).is_some() || place[*b].replace((i, c)).is_some() {
                    return Err(SchemeError::NotBijective(i));
                }
            }
            owner.push(
                classes
                    .into_iter()
                    .collect::<Option<Vec<_>>>()
                    .ok_or(SchemeError::NotBijective(i))?,
            );
        }
        let place = place
            .into_iter()
            .enumerate()
            .map(|(b, p)| p.ok_or(SchemeError::NotTotal(b)))
            .collect::<Result<Vec<_>, _>>()?;
        for block in sort_partition(m2).values() {
            let sort = place[block[0]].0;
            if block.iter().any(|&b| place[b].0 != sort) {
                return Err(SchemeError::NotBijective(sort));
            }
        }
        Ok(SchemeModel {
            source: m1,
            target_size: m2.domain(),
            quotients,
            place,
            owner,
        })
    }

    pub fn quotients(&self) -> &[Quotient] {
        &self.quotients
    }

    /// Least member of the class `F̄` assigns to `b`.
    pub fn representative(&self, b: Element) -> &[Element] {
        let (sort, class) = self.place[b];
        self.quotients[sort].representative(class)
    }

    /// `π̂(b) = F_p⁻¹([π(b̄)])` where `F_p(b) = [b̄]`.
    pub fn induced(&self, pi: &Permutation) -> Result<Permutation, SchemeError> {
        if !is_automorphism(self.source, pi)? {
            return Err(SchemeError::NotAutomorphism);
        }
        let images = (0..self.target_size)
            .map(|b| {
                let (sort, class) = self.place[b];
                let q = &self.quotients[sort];
                let moved = pi.apply_tuple(q.representative(class));
                q.class_index(&moved)
                    .map(|c| self.owner[sort][c])
                    .ok_or(SchemeError::ClassNotInRange { sort, element: b })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Permutation::from_images(images)?)
    }
}

/// The automorphism of `m2` that `pi ∈ Aut(m1)` induces through `(s, f)`.
pub fn induced_automorphism(
    m1: &Structure,
    m2: &Structure,
    s: &InterpretationScheme,
    f: &SortBijections,
    pi: &Permutation,
) -> Result<Permutation, SchemeError> {
    SchemeModel::new(m1, m2, s, f)?.induced(pi)
}
