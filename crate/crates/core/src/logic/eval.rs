use std::collections::BTreeMap;

use thiserror::Error;

use super::ast::{Formula, Term};
use crate::exec;
use crate::structure::{Element, Structure};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("free variable x{0} is not covered by the valuation")]
    UncoveredVariable(usize),
    #[error("free variables {0:?} are not exactly x0..x(n-1)")]
    FreeVariableGap(Vec<usize>),
    #[error("element {0} is outside the domain")]
    OutOfRange(Element),
    #[error("tuple space |M|^{arity} is too large to enumerate")]
    TooLarge { arity: usize },
}

/// Assignment of elements to variable indices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Valuation(BTreeMap<usize, Element>);

impl Valuation {
    pub fn new() -> Self {
        Self::default()
    }

    /// `x_i ↦ tuple[i]`.
    pub fn from_tuple(tuple: &[Element]) -> Self {
        Valuation(tuple.iter().copied().enumerate().collect())
    }

    pub fn with(mut self, var: usize, a: Element) -> Self {
        self.0.insert(var, a);
        self
    }

    pub fn get(&self, var: usize) -> Option<Element> {
        self.0.get(&var).copied()
    }
}

pub(crate) fn eval_term(m: &Structure, t: &Term, env: &[Element]) -> Element {
    match t {
        Term::Var(v) => env[*v],
        Term::Const(c) => m.constant(*c),
        Term::App(f, inner) => m.apply(*f, eval_term(m, inner, env)),
    }
}

/// Evaluates with an environment indexed by variable number. `env` must be
/// long enough for every variable occurring in `phi`, bound ones included.
pub(crate) fn eval_env(m: &Structure, phi: &Formula, env: &mut [Element]) -> bool {
    match phi {
        Formula::Equal(a, b) => eval_term(m, a, env) == eval_term(m, b, env),
        Formula::Rel(r, ts) => {
            let tuple: Vec<Element> = ts.iter().map(|t| eval_term(m, t, env)).collect();
            m.holds(*r, &tuple)
        }
        Formula::Not(f) => !eval_env(m, f, env),
        Formula::And(fs) => fs.iter().all(|f| eval_env(m, f, env)),
        Formula::Or(fs) => fs.iter().any(|f| eval_env(m, f, env)),
        Formula::Exists(v, body) => {
            let saved = env[*v];
            let mut found = false;
            for a in m.elements() {
                env[*v] = a;
                if eval_env(m, body, env) {
                    found = true;
                    break;
                }
            }
            env[*v] = saved;
            found
        }
    }
}

/// Evaluates a tuple-bound formula: `tuple[i]` is the value of `x_i`.
pub(crate) fn eval_tuple(m: &Structure, phi: &Formula, tuple: &[Element]) -> bool {
    let needed = phi.max_var().map_or(0, |v| v + 1).max(tuple.len());
    if needed == tuple.len() {
        let mut env = tuple.to_vec();
        eval_env(m, phi, &mut env)
    } else {
        let mut env = vec![0; needed];
        env[..tuple.len()].copy_from_slice(tuple);
        eval_env(m, phi, &mut env)
    }
}

/// Classical satisfaction `M ⊨ φ[v]`; quantifiers range over the whole domain.
pub fn eval_formula(m: &Structure, phi: &Formula, v: &Valuation) -> Result<bool, EvalError> {
    let free = phi.free_vars();
    for &x in &free {
        match v.get(x) {
            None => return Err(EvalError::UncoveredVariable(x)),
            Some(a) if a >= m.domain() => return Err(EvalError::OutOfRange(a)),
            Some(_) => {}
        }
    }
    let size = phi.max_var().map_or(0, |x| x + 1);
    let mut env = vec![0; size];
    for &x in &free {
        env[x] = v.get(x).unwrap();
    }
    Ok(eval_env(m, phi, &mut env))
}

/// Number of free variables if they are exactly `x0..x(n-1)`.
pub fn tuple_width(phi: &Formula) -> Result<usize, EvalError> {
    let free: Vec<usize> = phi.free_vars().into_iter().collect();
    if free.iter().enumerate().all(|(i, &v)| i == v) {
        Ok(free.len())
    } else {
        Err(EvalError::FreeVariableGap(free))
    }
}

/// Enumerates `M^arity` in lexicographic order and keeps the tuples accepted
/// by `keep`.
pub(crate) fn filter_tuples<F>(m: &Structure, arity: usize, keep: F) -> Result<Vec<Vec<Element>>, EvalError>
where
    F: Fn(&[Element]) -> bool + Sync + Send,
{
    let n = m.domain();
    let total = n
        .checked_pow(arity as u32)
        .filter(|&t| t <= 1 << 26)
        .ok_or(EvalError::TooLarge { arity })?;
    Ok(exec::filter_map_range(total, |i| {
        let t = exec::unrank_tuple(i, n, arity);
        keep(&t).then_some(t)
    }))
}

/// `φ(M) = { ā ∈ M^n : M ⊨ φ(ā) }` for `φ` with free variables `x0..x(n-1)`,
/// in lexicographic order.
pub fn definable_set(m: &Structure, phi: &Formula) -> Result<Vec<Vec<Element>>, EvalError> {
    let width = tuple_width(phi)?;
    filter_tuples(m, width, |t| eval_tuple(m, phi, t))
}
