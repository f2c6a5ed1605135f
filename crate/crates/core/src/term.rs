//! Sorts, parameters, and the shared term language for both the numeric
//! and individual sorts.
//!
//! Numeric terms are built from `0`, `s(.)`, parameters of the three kinds,
//! and defined function symbols (written with a `^` prefix). Individual
//! terms are built from variables, constants, and function applications.
//! A single `Term` enum covers both; sorts are recovered structurally and,
//! for defined symbols, from the equational theory's signature.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// The three sorts of the language. `Bool` is the result sort of predicate
/// symbols; no term ever carries it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sort {
    Omega,
    Iota,
    Bool,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Omega => write!(f, "omega"),
            Sort::Iota => write!(f, "iota"),
            Sort::Bool => write!(f, "o"),
        }
    }
}

/// Parameter kinds: active parameters drive a recursion, passive parameters
/// mark completed inductions and act as eigenvariables, internal parameters
/// thread auxiliary arguments through links.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ParamKind {
    Active,
    Passive,
    Internal,
}

impl ParamKind {
    pub fn prefix(self) -> &'static str {
        match self {
            ParamKind::Active => "n:",
            ParamKind::Passive => "p:",
            ParamKind::Internal => "i:",
        }
    }
}

/// A numeric parameter. Identity is the pair (kind, name); the same name
/// under two kinds denotes two distinct parameters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Parameter {
    pub kind: ParamKind,
    pub name: String,
}

impl Parameter {
    pub fn new(kind: ParamKind, name: impl Into<String>) -> Self {
        Parameter { kind, name: name.into() }
    }

    pub fn active(name: impl Into<String>) -> Self {
        Self::new(ParamKind::Active, name)
    }

    pub fn passive(name: impl Into<String>) -> Self {
        Self::new(ParamKind::Passive, name)
    }

    pub fn internal(name: impl Into<String>) -> Self {
        Self::new(ParamKind::Internal, name)
    }
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind.prefix(), self.name)
    }
}

/// A term of either sort.
///
/// Defined symbols keep their `^` prefix in the symbol name, so `^a` is the
/// defined addition symbol while `f` is a plain individual function symbol.
/// `PatVar` only appears in rewrite-rule patterns, never in proofs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Zero,
    Succ(Box<Term>),
    Param(Parameter),
    /// Individual-sort variable.
    Var(String),
    /// Function application; zero arguments make a constant.
    App(String, Vec<Term>),
    /// Pattern variable of a rewrite rule.
    PatVar(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("not a numeral: {0}")]
    NotANumeral(String),
    #[error("sort mismatch: cannot substitute {entity} by {term}")]
    SortError { entity: String, term: String },
    #[error("capture: substituted term for {entity} would bind {captured}")]
    CaptureError { entity: String, captured: String },
}

/// True for symbol names that denote defined (hatted) symbols.
pub fn is_defined_symbol(name: &str) -> bool {
    name.starts_with('^')
}

impl Term {
    pub fn succ(t: Term) -> Term {
        Term::Succ(Box::new(t))
    }

    pub fn param(kind: ParamKind, name: impl Into<String>) -> Term {
        Term::Param(Parameter::new(kind, name))
    }

    pub fn app(name: impl Into<String>, args: Vec<Term>) -> Term {
        Term::App(name.into(), args)
    }

    pub fn cnst(name: impl Into<String>) -> Term {
        Term::App(name.into(), Vec::new())
    }

    /// Structural sort when it is determined by the shape alone. Defined
    /// symbols and pattern variables yield `None`; their sort comes from
    /// the theory signature.
    pub fn sort_hint(&self) -> Option<Sort> {
        match self {
            Term::Zero | Term::Succ(_) | Term::Param(_) => Some(Sort::Omega),
            Term::Var(_) => Some(Sort::Iota),
            Term::App(name, _) => {
                if is_defined_symbol(name) {
                    None
                } else {
                    Some(Sort::Iota)
                }
            }
            Term::PatVar(_) => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Succ(t) => std::slice::from_ref(t),
            Term::App(_, args) => args,
            _ => &[],
        }
    }

    /// Collects free parameters of the given kind. Terms have no binders,
    /// so every parameter occurrence is free.
    pub fn params_of(&self, kind: ParamKind, out: &mut BTreeSet<Parameter>) {
        match self {
            Term::Param(p) => {
                if p.kind == kind {
                    out.insert(p.clone());
                }
            }
            Term::Succ(t) => t.params_of(kind, out),
            Term::App(_, args) => {
                for a in args {
                    a.params_of(kind, out);
                }
            }
            _ => {}
        }
    }

    pub fn contains_param(&self, p: &Parameter) -> bool {
        match self {
            Term::Param(q) => q == p,
            Term::Succ(t) => t.contains_param(p),
            Term::App(_, args) => args.iter().any(|a| a.contains_param(p)),
            _ => false,
        }
    }

    pub fn contains_var(&self, v: &str) -> bool {
        match self {
            Term::Var(w) => w == v,
            Term::Succ(t) => t.contains_var(v),
            Term::App(_, args) => args.iter().any(|a| a.contains_var(v)),
            _ => false,
        }
    }

    /// True when the term contains no parameters, variables, or pattern
    /// variables.
    pub fn is_ground(&self) -> bool {
        match self {
            Term::Zero => true,
            Term::Succ(t) => t.is_ground(),
            Term::Param(_) | Term::Var(_) | Term::PatVar(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn has_defined_symbol(&self) -> bool {
        match self {
            Term::App(name, args) => {
                is_defined_symbol(name) || args.iter().any(Term::has_defined_symbol)
            }
            Term::Succ(t) => t.has_defined_symbol(),
            _ => false,
        }
    }

    pub fn has_pattern_var(&self) -> bool {
        match self {
            Term::PatVar(_) => true,
            Term::Succ(t) => t.has_pattern_var(),
            Term::App(_, args) => args.iter().any(Term::has_pattern_var),
            _ => false,
        }
    }

    /// Size counted in nodes.
    pub fn size(&self) -> usize {
        match self {
            Term::Succ(t) => 1 + t.size(),
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
            _ => 1,
        }
    }
}

/// The unary numeral for `k`.
pub fn numeral(k: u64) -> Term {
    let mut t = Term::Zero;
    for _ in 0..k {
        t = Term::succ(t);
    }
    t
}

fn numeral_value(t: &Term) -> Option<u64> {
    match t {
        Term::Zero => Some(0),
        Term::Succ(inner) => numeral_value(inner).map(|k| k + 1),
        _ => None,
    }
}

/// Reads a pure `{0, s}` numeral back to a natural number.
pub fn value_of(t: &Term) -> Result<u64, TermError> {
    numeral_value(t).ok_or_else(|| TermError::NotANumeral(t.to_string()))
}

/// True for terms built only from `0` and `s`.
pub fn is_numeral(t: &Term) -> bool {
    numeral_value(t).is_some()
}

/// Numerals up to this value print in decimal; longer chains print as
/// explicit `s(...)` applications.
pub const NUMERAL_SUGAR_LIMIT: u64 = 20;

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(k) = numeral_value(self) {
            if k <= NUMERAL_SUGAR_LIMIT {
                return write!(f, "{}", k);
            }
            for _ in 0..k {
                write!(f, "s(")?;
            }
            write!(f, "0")?;
            for _ in 0..k {
                write!(f, ")")?;
            }
            return Ok(());
        }
        match self {
            Term::Zero => write!(f, "0"),
            Term::Succ(t) => write!(f, "s({})", t),
            Term::Param(p) => write!(f, "{}", p),
            Term::Var(v) => write!(f, "v:{}", v),
            Term::App(name, args) => {
                if args.is_empty() {
                    write!(f, "{}", name)
                } else {
                    write!(f, "{}(", name)?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{}", a)?;
                    }
                    write!(f, ")")
                }
            }
            Term::PatVar(v) => write!(f, "?{}", v),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numeral_value_roundtrip() {
        for k in 0..40 {
            assert_eq!(value_of(&numeral(k)).unwrap(), k);
        }
        assert_eq!(numeral(2), Term::succ(Term::succ(Term::Zero)));
    }

    #[test]
    fn value_of_rejects_defined_symbols_and_params() {
        let t = Term::app("^a", vec![Term::Zero, Term::Zero]);
        assert!(matches!(value_of(&t), Err(TermError::NotANumeral(_))));
        let p = Term::param(ParamKind::Active, "n");
        assert!(matches!(value_of(&p), Err(TermError::NotANumeral(_))));
        assert!(matches!(
            value_of(&Term::succ(Term::param(ParamKind::Passive, "a"))),
            Err(TermError::NotANumeral(_))
        ));
    }

    #[test]
    fn display_uses_decimal_sugar() {
        assert_eq!(numeral(3).to_string(), "3");
        assert_eq!(numeral(21).to_string().matches("s(").count(), 21);
        let t = Term::app("^a", vec![numeral(1), Term::param(ParamKind::Passive, "b")]);
        assert_eq!(t.to_string(), "^a(1,p:b)");
    }

    #[test]
    fn param_kinds_are_distinct_entities() {
        let a = Parameter::active("n");
        let i = Parameter::internal("n");
        assert_ne!(a, i);
        let t = Term::Param(a.clone());
        assert!(t.contains_param(&a));
        assert!(!t.contains_param(&i));
    }
}
