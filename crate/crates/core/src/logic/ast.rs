use std::collections::BTreeSet;
use std::fmt;

use crate::structure::Signature;

/// A term: a variable `x<i>`, a constant, or a unary function applied to a
/// term.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(usize),
    Const(usize),
    App(usize, Box<Term>),
}

impl Term {
    pub fn var(i: usize) -> Term {
        Term::Var(i)
    }

    pub fn app(function: usize, inner: Term) -> Term {
        Term::App(function, Box::new(inner))
    }

    /// Function-nesting depth.
    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) | Term::Const(_) => 0,
            Term::App(_, t) => 1 + t.depth(),
        }
    }

    fn collect_vars(&self, out: &mut BTreeSet<usize>) {
        match self {
            Term::Var(v) => {
                out.insert(*v);
            }
            Term::Const(_) => {}
            Term::App(_, t) => t.collect_vars(out),
        }
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            Term::Var(v) => Some(*v),
            Term::Const(_) => None,
            Term::App(_, t) => t.max_var(),
        }
    }
}

/// Formulas of the finitary fragment. `And`/`Or` built by the parser always
/// have at least two members; use [`Formula::conj`] / [`Formula::disj`] to
/// build them programmatically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Equal(Term, Term),
    Rel(usize, Vec<Term>),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Exists(usize, Box<Formula>),
}

impl Formula {
    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Equal(a, b)
    }

    pub fn eq_vars(a: usize, b: usize) -> Formula {
        Formula::Equal(Term::Var(a), Term::Var(b))
    }

    pub fn rel_vars(relation: usize, vars: impl IntoIterator<Item = usize>) -> Formula {
        Formula::Rel(relation, vars.into_iter().map(Term::Var).collect())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn exists(var: usize, body: Formula) -> Formula {
        Formula::Exists(var, Box::new(body))
    }

    /// Conjunction; a single member is returned as is.
    ///
    /// Panics on an empty list.
    pub fn conj(mut members: Vec<Formula>) -> Formula {
        assert!(!members.is_empty(), "empty conjunction");
        if members.len() == 1 {
            members.pop().unwrap()
        } else {
            Formula::And(members)
        }
    }

    /// Disjunction; a single member is returned as is.
    pub fn disj(mut members: Vec<Formula>) -> Formula {
        assert!(!members.is_empty(), "empty disjunction");
        if members.len() == 1 {
            members.pop().unwrap()
        } else {
            Formula::Or(members)
        }
    }

    /// `x_v = x_v` for every `v` in `vars`: true, with exactly `vars` free.
    pub fn tautology_over(vars: impl IntoIterator<Item = usize>) -> Formula {
        Formula::conj(vars.into_iter().map(|v| Formula::eq_vars(v, v)).collect())
    }

    pub fn free_vars(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<usize>) {
        match self {
            Formula::Equal(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Formula::Rel(_, ts) => ts.iter().for_each(|t| t.collect_vars(out)),
            Formula::Not(f) => f.collect_free(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_free(out)),
            Formula::Exists(v, body) => {
                let mut inner = BTreeSet::new();
                body.collect_free(&mut inner);
                inner.remove(v);
                out.extend(inner);
            }
        }
    }

    /// Largest variable index occurring anywhere, bound or free.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Formula::Equal(a, b) => a.max_var().max(b.max_var()),
            Formula::Rel(_, ts) => ts.iter().filter_map(Term::max_var).max(),
            Formula::Not(f) => f.max_var(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().filter_map(Formula::max_var).max(),
            Formula::Exists(v, body) => Some(*v).max(body.max_var()),
        }
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Formula::Equal(..) | Formula::Rel(..))
    }

    /// Atomic with exactly one free variable.
    pub fn is_atomic_one_free_variable(&self) -> bool {
        self.is_atomic() && self.free_vars().len() == 1
    }

    /// Printable view in the concrete grammar.
    pub fn display<'a>(&'a self, sig: &'a Signature) -> FormulaDisplay<'a> {
        FormulaDisplay { formula: self, sig }
    }

    /// Ends with an `exists` body that would swallow a following `&` or `|`.
    fn open_right(&self) -> bool {
        match self {
            Formula::Exists(..) => true,
            Formula::Not(f) => f.open_right(),
            _ => false,
        }
    }
}

pub struct FormulaDisplay<'a> {
    formula: &'a Formula,
    sig: &'a Signature,
}

impl fmt::Display for FormulaDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(f, self.formula, self.sig)
    }
}

pub struct TermDisplay<'a> {
    term: &'a Term,
    sig: &'a Signature,
}

impl Term {
    pub fn display<'a>(&'a self, sig: &'a Signature) -> TermDisplay<'a> {
        TermDisplay { term: self, sig }
    }
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self.term, self.sig)
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, t: &Term, sig: &Signature) -> fmt::Result {
    match t {
        Term::Var(v) => write!(f, "x{v}"),
        Term::Const(c) => write!(f, "{}", sig.constants[*c]),
        Term::App(g, inner) => {
            write!(f, "{}(", sig.functions[*g])?;
            write_term(f, inner, sig)?;
            write!(f, ")")
        }
    }
}

fn write_formula(f: &mut fmt::Formatter<'_>, phi: &Formula, sig: &Signature) -> fmt::Result {
    match phi {
        Formula::And(fs) => write_joined(f, fs, " & ", sig),
        Formula::Or(fs) => write_joined(f, fs, " | ", sig),
        other => write_lit(f, other, sig),
    }
}

fn write_joined(
    f: &mut fmt::Formatter<'_>,
    members: &[Formula],
    sep: &str,
    sig: &Signature,
) -> fmt::Result {
    for (i, m) in members.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        if matches!(m, Formula::And(_) | Formula::Or(_)) || m.open_right() {
            f.write_str("(")?;
            write_formula(f, m, sig)?;
            f.write_str(")")?;
        } else {
            write_lit(f, m, sig)?;
        }
    }
    Ok(())
}

fn write_lit(f: &mut fmt::Formatter<'_>, phi: &Formula, sig: &Signature) -> fmt::Result {
    match phi {
        Formula::Equal(a, b) => {
            write_term(f, a, sig)?;
            f.write_str(" = ")?;
            write_term(f, b, sig)
        }
        Formula::Rel(r, ts) => {
            write!(f, "{}(", sig.relations[*r].name)?;
            for (i, t) in ts.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write_term(f, t, sig)?;
            }
            f.write_str(")")
        }
        Formula::Not(inner) => {
            f.write_str("~")?;
            write_lit(f, inner, sig)
        }
        Formula::Exists(v, body) => {
            write!(f, "exists x{v}. ")?;
            write_formula(f, body, sig)
        }
        Formula::And(_) | Formula::Or(_) => {
            f.write_str("(")?;
            write_formula(f, phi, sig)?;
            f.write_str(")")
        }
    }
}
