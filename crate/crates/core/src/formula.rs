//! Formula schemata: atoms over both sorts, defined predicate symbols,
//! the usual connectives, and quantifiers over individual variables or
//! passive parameters.
//!
//! Structural equality is alpha-equivalence, decided through a canonical
//! form that renames bound entities positionally. Active and internal
//! parameters can never be bound.

use std::collections::BTreeSet;
use std::fmt;

use crate::subst::{Subst, SubstKey};
use crate::term::{ParamKind, Parameter, Term, TermError};

/// What a quantifier may bind: an individual variable or a passive
/// parameter acting as an eigenvariable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Binder {
    Var(String),
    Passive(String),
}

impl Binder {
    pub fn subst_key(&self) -> SubstKey {
        match self {
            Binder::Var(v) => SubstKey::Var(v.clone()),
            Binder::Passive(p) => SubstKey::Param(Parameter::passive(p.clone())),
        }
    }

    /// The term form of the bound entity.
    pub fn as_term(&self) -> Term {
        match self {
            Binder::Var(v) => Term::Var(v.clone()),
            Binder::Passive(p) => Term::Param(Parameter::passive(p.clone())),
        }
    }
}

impl fmt::Display for Binder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Binder::Var(v) => write!(f, "v:{}", v),
            Binder::Passive(p) => write!(f, "p:{}", p),
        }
    }
}

/// The equality predicate name. Equality is an ordinary binary predicate;
/// the equational axiom schemes are leaves of the calculus, not rewrite
/// rules.
pub const EQ: &str = "=";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    /// Predicate atom; defined predicates carry the `^` prefix in the name.
    Atom(String, Vec<Term>),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    Forall(Binder, Box<Formula>),
    Exists(Binder, Box<Formula>),
}

impl Formula {
    pub fn eq(lhs: Term, rhs: Term) -> Formula {
        Formula::Atom(EQ.into(), vec![lhs, rhs])
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn imp(a: Formula, b: Formula) -> Formula {
        Formula::Imp(Box::new(a), Box::new(b))
    }

    pub fn forall(b: Binder, f: Formula) -> Formula {
        Formula::Forall(b, Box::new(f))
    }

    pub fn exists(b: Binder, f: Formula) -> Formula {
        Formula::Exists(b, Box::new(f))
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, Formula::Atom(_, _))
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Atom(_, _) => true,
            Formula::Not(f) => f.is_quantifier_free(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                a.is_quantifier_free() && b.is_quantifier_free()
            }
            Formula::Forall(_, _) | Formula::Exists(_, _) => false,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Formula::Atom(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
            Formula::Not(f) => 1 + f.size(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => 1 + a.size() + b.size(),
            Formula::Forall(_, f) | Formula::Exists(_, f) => 1 + f.size(),
        }
    }

    /// Free parameters of the given kind. A passive binder removes its
    /// parameter from the body's free set; active and internal parameters
    /// are always free.
    pub fn params_of(&self, kind: ParamKind, out: &mut BTreeSet<Parameter>) {
        match self {
            Formula::Atom(_, args) => {
                for a in args {
                    a.params_of(kind, out);
                }
            }
            Formula::Not(f) => f.params_of(kind, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                a.params_of(kind, out);
                b.params_of(kind, out);
            }
            Formula::Forall(b, f) | Formula::Exists(b, f) => {
                let mut inner = BTreeSet::new();
                f.params_of(kind, &mut inner);
                if let Binder::Passive(name) = b {
                    if kind == ParamKind::Passive {
                        inner.remove(&Parameter::passive(name.clone()));
                    }
                }
                out.extend(inner);
            }
        }
    }

    pub fn free_params(&self, kind: ParamKind) -> BTreeSet<Parameter> {
        let mut out = BTreeSet::new();
        self.params_of(kind, &mut out);
        out
    }

    pub fn contains_param_free(&self, p: &Parameter) -> bool {
        self.free_params(p.kind).contains(p)
    }

    /// Free individual variables.
    pub fn free_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(_, args) => {
                for a in args {
                    collect_vars(a, out);
                }
            }
            Formula::Not(f) => f.free_vars(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                a.free_vars(out);
                b.free_vars(out);
            }
            Formula::Forall(b, f) | Formula::Exists(b, f) => {
                let mut inner = BTreeSet::new();
                f.free_vars(&mut inner);
                if let Binder::Var(v) = b {
                    inner.remove(v);
                }
                out.extend(inner);
            }
        }
    }

    /// Capture-avoiding check only: applies the substitution, reporting an
    /// error if a range term would be captured by a binder or if a bound
    /// entity is in the domain of the substitution in a conflicting way.
    pub fn substitute(&self, s: &Subst) -> Result<Formula, TermError> {
        match self {
            Formula::Atom(p, args) => Ok(Formula::Atom(
                p.clone(),
                args.iter().map(|a| s.apply_term(a)).collect(),
            )),
            Formula::Not(f) => Ok(Formula::not(f.substitute(s)?)),
            Formula::And(a, b) => Ok(Formula::and(a.substitute(s)?, b.substitute(s)?)),
            Formula::Or(a, b) => Ok(Formula::or(a.substitute(s)?, b.substitute(s)?)),
            Formula::Imp(a, b) => Ok(Formula::imp(a.substitute(s)?, b.substitute(s)?)),
            Formula::Forall(b, f) => {
                let s2 = under_binder(b, f, s)?;
                Ok(Formula::forall(b.clone(), f.substitute(&s2)?))
            }
            Formula::Exists(b, f) => {
                let s2 = under_binder(b, f, s)?;
                Ok(Formula::exists(b.clone(), f.substitute(&s2)?))
            }
        }
    }

    /// Canonical form for alpha-equivalence: bound entities are renamed to
    /// positional names `$0`, `$1`, ... by binding depth.
    pub fn alpha_canon(&self) -> Formula {
        self.canon_rec(&mut Vec::new())
    }

    fn canon_rec(&self, scope: &mut Vec<(SubstKey, usize)>) -> Formula {
        match self {
            Formula::Atom(p, args) => Formula::Atom(
                p.clone(),
                args.iter().map(|t| canon_term(t, scope)).collect(),
            ),
            Formula::Not(f) => Formula::not(f.canon_rec(scope)),
            Formula::And(a, b) => Formula::and(a.canon_rec(scope), b.canon_rec(scope)),
            Formula::Or(a, b) => Formula::or(a.canon_rec(scope), b.canon_rec(scope)),
            Formula::Imp(a, b) => Formula::imp(a.canon_rec(scope), b.canon_rec(scope)),
            Formula::Forall(b, f) => {
                let depth = scope.len();
                scope.push((b.subst_key(), depth));
                let body = f.canon_rec(scope);
                scope.pop();
                Formula::forall(canon_binder(b, depth), body)
            }
            Formula::Exists(b, f) => {
                let depth = scope.len();
                scope.push((b.subst_key(), depth));
                let body = f.canon_rec(scope);
                scope.pop();
                Formula::exists(canon_binder(b, depth), body)
            }
        }
    }

    /// Alpha-equivalence.
    pub fn alpha_eq(&self, other: &Formula) -> bool {
        self == other || self.alpha_canon() == other.alpha_canon()
    }
}

fn canon_binder(b: &Binder, depth: usize) -> Binder {
    match b {
        Binder::Var(_) => Binder::Var(format!("$b{}", depth)),
        Binder::Passive(_) => Binder::Passive(format!("$b{}", depth)),
    }
}

fn canon_term(t: &Term, scope: &[(SubstKey, usize)]) -> Term {
    // Innermost binding wins, so scan the scope stack from the top.
    let lookup = |key: &SubstKey| -> Option<usize> {
        scope.iter().rev().find(|(k, _)| k == key).map(|(_, d)| *d)
    };
    match t {
        Term::Zero => Term::Zero,
        Term::Succ(inner) => Term::succ(canon_term(inner, scope)),
        Term::Param(p) => {
            if p.kind == ParamKind::Passive {
                if let Some(d) = lookup(&SubstKey::Param(p.clone())) {
                    return Term::Param(Parameter::passive(format!("$b{}", d)));
                }
            }
            t.clone()
        }
        Term::Var(v) => {
            if let Some(d) = lookup(&SubstKey::Var(v.clone())) {
                Term::Var(format!("$b{}", d))
            } else {
                t.clone()
            }
        }
        Term::App(name, args) => Term::App(
            name.clone(),
            args.iter().map(|a| canon_term(a, scope)).collect(),
        ),
        Term::PatVar(v) => Term::PatVar(v.clone()),
    }
}

fn collect_vars(t: &Term, out: &mut BTreeSet<String>) {
    match t {
        Term::Var(v) => {
            out.insert(v.clone());
        }
        Term::Succ(inner) => collect_vars(inner, out),
        Term::App(_, args) => {
            for a in args {
                collect_vars(a, out);
            }
        }
        _ => {}
    }
}

/// Restricts a substitution for descent under a binder and checks that no
/// remaining range term mentions the bound entity.
fn under_binder(b: &Binder, body: &Formula, s: &Subst) -> Result<Subst, TermError> {
    let key = b.subst_key();
    let mut s2 = s.clone();
    s2.remove(&key);
    let bound = b.as_term();
    for (k, range) in s2.iter() {
        let relevant = match k {
            SubstKey::Param(p) => body.contains_param_free(p),
            SubstKey::Var(v) => {
                let mut vs = BTreeSet::new();
                body.free_vars(&mut vs);
                vs.contains(v)
            }
            SubstKey::PatVar(_) => false,
        };
        if !relevant {
            continue;
        }
        let captured = match (&bound, range) {
            (Term::Var(v), r) => r.contains_var(v),
            (Term::Param(p), r) => r.contains_param(p),
            _ => false,
        };
        if captured {
            return Err(TermError::CaptureError {
                entity: k.to_string(),
                captured: bound.to_string(),
            });
        }
    }
    Ok(s2)
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(p, args) => {
                if p == EQ && args.len() == 2 {
                    write!(f, "{} = {}", args[0], args[1])
                } else if args.is_empty() {
                    write!(f, "{}", p)
                } else {
                    write!(f, "{}(", p)?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{}", a)?;
                    }
                    write!(f, ")")
                }
            }
            Formula::Not(g) => write!(f, "~({})", g),
            Formula::And(a, b) => write!(f, "({} & {})", a, b),
            Formula::Or(a, b) => write!(f, "({} | {})", a, b),
            Formula::Imp(a, b) => write!(f, "({} -> {})", a, b),
            Formula::Forall(b, g) => write!(f, "forall {}. ({})", b, g),
            Formula::Exists(b, g) => write!(f, "exists {}. ({})", b, g),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::numeral;

    fn atom_p(t: Term) -> Formula {
        Formula::Atom("P".into(), vec![t])
    }

    #[test]
    fn binder_removes_passive_from_free_set() {
        // forall p:a. P(p:a, i:m)
        let f = Formula::forall(
            Binder::Passive("a".into()),
            Formula::Atom(
                "P".into(),
                vec![
                    Term::Param(Parameter::passive("a")),
                    Term::Param(Parameter::internal("m")),
                ],
            ),
        );
        assert!(f.free_params(ParamKind::Passive).is_empty());
        assert_eq!(f.free_params(ParamKind::Internal).len(), 1);
    }

    #[test]
    fn alpha_equivalence_across_binder_names() {
        let f = Formula::exists(Binder::Var("x".into()), atom_p(Term::Var("x".into())));
        let g = Formula::exists(Binder::Var("y".into()), atom_p(Term::Var("y".into())));
        assert!(f.alpha_eq(&g));
        let h = Formula::exists(Binder::Var("y".into()), atom_p(Term::Var("z".into())));
        assert!(!f.alpha_eq(&h));
        // Var binders and passive binders are different sorts, never equal.
        let p = Formula::exists(
            Binder::Passive("a".into()),
            atom_p(Term::Param(Parameter::passive("a"))),
        );
        assert!(!f.alpha_eq(&p));
    }

    #[test]
    fn substitute_reports_capture() {
        // (exists v:x. P(^g(n:n, v:x)))  with  n <- term containing v:x
        let f = Formula::exists(
            Binder::Var("x".into()),
            atom_p(Term::app(
                "g",
                vec![Term::Param(Parameter::active("n")), Term::Var("x".into())],
            )),
        );
        // Substituting inside requires a numeric term; use a defined symbol
        // application mentioning x so the capture is real.
        let mut s = Subst::new();
        s.bind_unchecked(
            SubstKey::Param(Parameter::active("n")),
            Term::app("^len", vec![Term::Var("x".into())]),
        );
        assert!(matches!(
            f.substitute(&s),
            Err(TermError::CaptureError { .. })
        ));
    }

    #[test]
    fn substitute_under_binder_drops_shadowed_key() {
        let f = Formula::forall(
            Binder::Passive("a".into()),
            Formula::eq(Term::Param(Parameter::passive("a")), numeral(0)),
        );
        let s = Subst::param(Parameter::passive("a"), numeral(3)).unwrap();
        // The bound occurrence must not be replaced.
        assert_eq!(f.substitute(&s).unwrap(), f);
    }

    #[test]
    fn ground_numeric_substitution_clears_passives() {
        let f = Formula::eq(
            Term::app(
                "^a",
                vec![
                    Term::Param(Parameter::passive("a")),
                    Term::Param(Parameter::passive("b")),
                ],
            ),
            Term::Param(Parameter::passive("b")),
        );
        let s = Subst::ground_numeric(vec![("a".into(), 2), ("b".into(), 5)]);
        let g = f.substitute(&s).unwrap();
        assert!(g.free_params(ParamKind::Passive).is_empty());
    }
}
