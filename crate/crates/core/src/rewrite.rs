//! The equational theory E as a rewrite system: matching, one-step
//! rewriting with a fixed leftmost-innermost strategy, bounded
//! normalization, and joinability.
//!
//! Rules have the shape `^f(tbar) = E` where `tbar` contains no defined
//! symbols. The theory is assumed convergent, so the strategy cannot
//! change normal forms; fixing it keeps traces reproducible.

use std::fmt;

use thiserror::Error;

use crate::formula::Formula;
use crate::subst::{Subst, SubstKey};
use crate::term::{is_defined_symbol, numeral, Term};

/// Default step budget for normalization, overridable from the CLI and the
/// `SCHEMAKERN_FUEL` environment variable.
pub const DEFAULT_FUEL: u64 = 10_000;

/// Either side of a rewrite rule.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Expr {
    Term(Term),
    Formula(Formula),
}

impl Expr {
    pub fn alpha_eq(&self, other: &Expr) -> bool {
        match (self, other) {
            (Expr::Term(a), Expr::Term(b)) => a == b,
            (Expr::Formula(a), Expr::Formula(b)) => a.alpha_eq(b),
            _ => false,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Term(t) => write!(f, "{}", t),
            Expr::Formula(g) => write!(f, "{}", g),
        }
    }
}

/// An oriented rewrite rule. Orientation is left-to-right for
/// normalization; the E inference rule of the calculus applies rules in
/// both directions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteRule {
    pub lhs: Expr,
    pub rhs: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("no fixpoint within {fuel} rewrite steps")]
    FuelExhausted { fuel: u64 },
    #[error("rule head is not a defined symbol: {0}")]
    LhsNotDefined(String),
    #[error("rule arguments contain a defined symbol: {0}")]
    DefinedInLhsArgs(String),
    #[error("rule right side uses {0} which does not occur on the left")]
    UnboundRhsVar(String),
}

impl RewriteRule {
    pub fn term(lhs: Term, rhs: Term) -> Self {
        RewriteRule { lhs: Expr::Term(lhs), rhs: Expr::Term(rhs) }
    }

    pub fn formula(lhs: Formula, rhs: Formula) -> Self {
        RewriteRule { lhs: Expr::Formula(lhs), rhs: Expr::Formula(rhs) }
    }

    pub fn validate(&self) -> Result<(), RewriteError> {
        let (head_ok, args): (bool, Vec<&Term>) = match &self.lhs {
            Expr::Term(Term::App(name, args)) => {
                (is_defined_symbol(name), args.iter().collect())
            }
            Expr::Formula(Formula::Atom(name, args)) => {
                (is_defined_symbol(name), args.iter().collect())
            }
            other => {
                return Err(RewriteError::LhsNotDefined(other.to_string()));
            }
        };
        if !head_ok {
            return Err(RewriteError::LhsNotDefined(self.lhs.to_string()));
        }
        for a in &args {
            if a.has_defined_symbol() {
                return Err(RewriteError::DefinedInLhsArgs(a.to_string()));
            }
        }
        let lhs_vars = expr_pattern_vars(&self.lhs);
        for v in expr_pattern_vars(&self.rhs) {
            if !lhs_vars.contains(&v) {
                return Err(RewriteError::UnboundRhsVar(format!("?{}", v)));
            }
        }
        Ok(())
    }
}

fn expr_pattern_vars(e: &Expr) -> Vec<String> {
    fn term(t: &Term, out: &mut Vec<String>) {
        match t {
            Term::PatVar(v) => out.push(v.clone()),
            Term::Succ(inner) => term(inner, out),
            Term::App(_, args) => args.iter().for_each(|a| term(a, out)),
            _ => {}
        }
    }
    fn formula(f: &Formula, out: &mut Vec<String>) {
        match f {
            Formula::Atom(_, args) => args.iter().for_each(|a| term(a, out)),
            Formula::Not(g) => formula(g, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                formula(a, out);
                formula(b, out);
            }
            Formula::Forall(_, g) | Formula::Exists(_, g) => formula(g, out),
        }
    }
    let mut out = Vec::new();
    match e {
        Expr::Term(t) => term(t, &mut out),
        Expr::Formula(f) => formula(f, &mut out),
    }
    out
}

/// A named equational theory.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EqTheory {
    pub name: String,
    pub rules: Vec<RewriteRule>,
}

impl EqTheory {
    pub fn new(name: impl Into<String>) -> Self {
        EqTheory { name: name.into(), rules: Vec::new() }
    }

    pub fn validate(&self) -> Result<(), RewriteError> {
        for r in &self.rules {
            r.validate()?;
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

/// The E_PA theory: primitive recursive addition and multiplication.
pub fn e_pa() -> EqTheory {
    let n = || Term::PatVar("n".into());
    let b = || Term::PatVar("b".into());
    EqTheory {
        name: "E_PA".into(),
        rules: vec![
            RewriteRule::term(
                Term::app("^a", vec![Term::succ(n()), b()]),
                Term::succ(Term::app("^a", vec![n(), b()])),
            ),
            RewriteRule::term(Term::app("^a", vec![Term::Zero, b()]), b()),
            RewriteRule::term(
                Term::app("^m", vec![Term::succ(n()), b()]),
                Term::app("^a", vec![Term::app("^m", vec![n(), b()]), b()]),
            ),
            RewriteRule::term(Term::app("^m", vec![Term::Zero, b()]), Term::Zero),
        ],
    }
}

/// Iterated disjunction and conjunction of a unary predicate `P`.
pub fn e_iter() -> EqTheory {
    let y = || Term::PatVar("y".into());
    let p = |t: Term| Formula::Atom("P".into(), vec![t]);
    EqTheory {
        name: "E_ITER".into(),
        rules: vec![
            RewriteRule::formula(
                Formula::Atom("^bigor".into(), vec![Term::Zero]),
                p(Term::Zero),
            ),
            RewriteRule::formula(
                Formula::Atom("^bigor".into(), vec![Term::succ(y())]),
                Formula::or(Formula::Atom("^bigor".into(), vec![y()]), p(Term::succ(y()))),
            ),
            RewriteRule::formula(
                Formula::Atom("^bigand".into(), vec![Term::Zero]),
                p(Term::Zero),
            ),
            RewriteRule::formula(
                Formula::Atom("^bigand".into(), vec![Term::succ(y())]),
                Formula::and(Formula::Atom("^bigand".into(), vec![y()]), p(Term::succ(y()))),
            ),
        ],
    }
}

pub fn builtin_theory(name: &str) -> Option<EqTheory> {
    match name {
        "E_PA" => Some(e_pa()),
        "E_ITER" => Some(e_iter()),
        _ => None,
    }
}

/// First-order matching of a rule pattern against a subject term.
/// Pattern variables bind; repeated variables must match equal subterms.
pub(crate) fn match_term(pattern: &Term, subject: &Term, bindings: &mut Subst) -> bool {
    match (pattern, subject) {
        (Term::PatVar(v), s) => match bindings.get(&SubstKey::PatVar(v.clone())) {
            Some(prev) => prev == s,
            None => {
                bindings.bind_unchecked(SubstKey::PatVar(v.clone()), s.clone());
                true
            }
        },
        (Term::Zero, Term::Zero) => true,
        (Term::Succ(p), Term::Succ(s)) => match_term(p, s, bindings),
        (Term::Param(p), Term::Param(q)) => p == q,
        (Term::Var(p), Term::Var(q)) => p == q,
        (Term::App(f, pargs), Term::App(g, sargs)) => {
            f == g
                && pargs.len() == sargs.len()
                && pargs.iter().zip(sargs).all(|(p, s)| match_term(p, s, bindings))
        }
        _ => false,
    }
}

fn match_rule_term(rule: &RewriteRule, subject: &Term) -> Option<Term> {
    let Expr::Term(lhs) = &rule.lhs else { return None };
    let Expr::Term(rhs) = &rule.rhs else { return None };
    let mut bindings = Subst::new();
    if match_term(lhs, subject, &mut bindings) {
        Some(bindings.apply_term(rhs))
    } else {
        None
    }
}

fn match_rule_atom(rule: &RewriteRule, name: &str, args: &[Term]) -> Option<Formula> {
    let Expr::Formula(Formula::Atom(pname, pargs)) = &rule.lhs else {
        return None;
    };
    let Expr::Formula(rhs) = &rule.rhs else { return None };
    if pname != name || pargs.len() != args.len() {
        return None;
    }
    let mut bindings = Subst::new();
    if !pargs.iter().zip(args).all(|(p, s)| match_term(p, s, &mut bindings)) {
        return None;
    }
    // A capture during instantiation means the rule cannot apply here.
    rhs.substitute(&bindings).ok()
}

/// One leftmost-innermost rewrite step on a term; `None` when no redex.
pub fn rewrite_term_once(t: &Term, theory: &EqTheory) -> Option<Term> {
    match t {
        Term::Succ(inner) => {
            if let Some(r) = rewrite_term_once(inner, theory) {
                return Some(Term::succ(r));
            }
            None
        }
        Term::App(name, args) => {
            for (i, a) in args.iter().enumerate() {
                if let Some(r) = rewrite_term_once(a, theory) {
                    let mut new_args = args.clone();
                    new_args[i] = r;
                    return Some(Term::App(name.clone(), new_args));
                }
            }
            if is_defined_symbol(name) {
                for rule in &theory.rules {
                    if let Some(r) = match_rule_term(rule, t) {
                        return Some(r);
                    }
                }
            }
            None
        }
        _ => None,
    }
}

/// One leftmost-innermost rewrite step on a formula, descending into term
/// arguments first and allowing redexes under quantifiers.
pub fn rewrite_formula_once(f: &Formula, theory: &EqTheory) -> Option<Formula> {
    match f {
        Formula::Atom(name, args) => {
            for (i, a) in args.iter().enumerate() {
                if let Some(r) = rewrite_term_once(a, theory) {
                    let mut new_args = args.clone();
                    new_args[i] = r;
                    return Some(Formula::Atom(name.clone(), new_args));
                }
            }
            if is_defined_symbol(name) {
                for rule in &theory.rules {
                    if let Some(r) = match_rule_atom(rule, name, args) {
                        return Some(r);
                    }
                }
            }
            None
        }
        Formula::Not(g) => rewrite_formula_once(g, theory).map(Formula::not),
        Formula::And(a, b) => rewrite_binary(a, b, theory, Formula::and),
        Formula::Or(a, b) => rewrite_binary(a, b, theory, Formula::or),
        Formula::Imp(a, b) => rewrite_binary(a, b, theory, Formula::imp),
        Formula::Forall(binder, g) => {
            rewrite_formula_once(g, theory).map(|r| Formula::forall(binder.clone(), r))
        }
        Formula::Exists(binder, g) => {
            rewrite_formula_once(g, theory).map(|r| Formula::exists(binder.clone(), r))
        }
    }
}

fn rewrite_binary(
    a: &Formula,
    b: &Formula,
    theory: &EqTheory,
    mk: fn(Formula, Formula) -> Formula,
) -> Option<Formula> {
    if let Some(r) = rewrite_formula_once(a, theory) {
        return Some(mk(r, b.clone()));
    }
    rewrite_formula_once(b, theory).map(|r| mk(a.clone(), r))
}

/// Rewrites the leftmost-innermost redex by the first matching rule.
pub fn apply_rule_once(e: &Expr, theory: &EqTheory) -> Option<Expr> {
    match e {
        Expr::Term(t) => rewrite_term_once(t, theory).map(Expr::Term),
        Expr::Formula(f) => rewrite_formula_once(f, theory).map(Expr::Formula),
    }
}

/// The fixpoint of `apply_rule_once`, reached within `fuel` steps.
pub fn normalize(e: &Expr, theory: &EqTheory, fuel: u64) -> Result<Expr, RewriteError> {
    let mut cur = e.clone();
    for _ in 0..fuel {
        match apply_rule_once(&cur, theory) {
            Some(next) => cur = next,
            None => return Ok(cur),
        }
    }
    if apply_rule_once(&cur, theory).is_none() {
        Ok(cur)
    } else {
        Err(RewriteError::FuelExhausted { fuel })
    }
}

pub fn normalize_term(t: &Term, theory: &EqTheory, fuel: u64) -> Result<Term, RewriteError> {
    match normalize(&Expr::Term(t.clone()), theory, fuel)? {
        Expr::Term(r) => Ok(r),
        Expr::Formula(_) => unreachable!("term rewriting stays term-sorted"),
    }
}

pub fn normalize_formula(
    f: &Formula,
    theory: &EqTheory,
    fuel: u64,
) -> Result<Formula, RewriteError> {
    match normalize(&Expr::Formula(f.clone()), theory, fuel)? {
        Expr::Formula(r) => Ok(r),
        Expr::Term(_) => unreachable!("formula rewriting stays formula-sorted"),
    }
}

/// True iff both expressions reach alpha-equal normal forms.
pub fn joinable(a: &Expr, b: &Expr, theory: &EqTheory, fuel: u64) -> Result<bool, RewriteError> {
    if a.alpha_eq(b) {
        return Ok(true);
    }
    let na = normalize(a, theory, fuel)?;
    let nb = normalize(b, theory, fuel)?;
    Ok(na.alpha_eq(&nb))
}

pub fn joinable_formulas(
    a: &Formula,
    b: &Formula,
    theory: &EqTheory,
    fuel: u64,
) -> Result<bool, RewriteError> {
    joinable(
        &Expr::Formula(a.clone()),
        &Expr::Formula(b.clone()),
        theory,
        fuel,
    )
}

/// Convenience: E_PA-normalizes a ground numeric term to its numeral value.
pub fn eval_numeric(t: &Term, theory: &EqTheory, fuel: u64) -> Result<Term, RewriteError> {
    normalize_term(t, theory, fuel)
}

/// The numeral for `k` as a term (re-exported for callers of the engine).
pub fn num(k: u64) -> Term {
    numeral(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::value_of;

    fn add(a: Term, b: Term) -> Term {
        Term::app("^a", vec![a, b])
    }

    fn mul(a: Term, b: Term) -> Term {
        Term::app("^m", vec![a, b])
    }

    #[test]
    fn single_step_on_base_rule() {
        // ^a(0, s(0)) -> s(0)
        let t = Expr::Term(add(Term::Zero, num(1)));
        let r = apply_rule_once(&t, &e_pa()).unwrap();
        assert_eq!(r, Expr::Term(num(1)));
    }

    #[test]
    fn no_redex_reports_none() {
        let t = Expr::Formula(Formula::Atom("P".into(), vec![Term::Zero]));
        assert!(apply_rule_once(&t, &e_pa()).is_none());
    }

    #[test]
    fn iterated_or_unfolds_one_level() {
        let t = Expr::Formula(Formula::Atom("^bigor".into(), vec![num(1)]));
        let r = apply_rule_once(&t, &e_iter()).unwrap();
        let expected = Formula::or(
            Formula::Atom("^bigor".into(), vec![Term::Zero]),
            Formula::Atom("P".into(), vec![num(1)]),
        );
        assert_eq!(r, Expr::Formula(expected));
    }

    #[test]
    fn normalize_addition() {
        let r = normalize_term(&add(num(2), Term::Zero), &e_pa(), 10).unwrap();
        assert_eq!(r, num(2));
    }

    #[test]
    fn normalize_multiplication() {
        let r = normalize_term(&mul(num(1), num(2)), &e_pa(), 20).unwrap();
        assert_eq!(r, num(2));
    }

    #[test]
    fn normalize_is_identity_on_normal_forms() {
        let r = normalize_term(&Term::Zero, &e_pa(), 1).unwrap();
        assert_eq!(r, Term::Zero);
    }

    #[test]
    fn arithmetic_oracle_small() {
        for a in 0..=8u64 {
            for b in 0..=8u64 {
                let s = normalize_term(&add(num(a), num(b)), &e_pa(), DEFAULT_FUEL).unwrap();
                assert_eq!(value_of(&s).unwrap(), a + b);
                let m = normalize_term(&mul(num(a), num(b)), &e_pa(), DEFAULT_FUEL).unwrap();
                assert_eq!(value_of(&m).unwrap(), a * b);
            }
        }
    }

    #[test]
    fn joinable_examples() {
        let th = e_pa();
        assert!(joinable(
            &Expr::Term(add(Term::Zero, Term::Zero)),
            &Expr::Term(Term::Zero),
            &th,
            5
        )
        .unwrap());
        assert!(!joinable(&Expr::Term(num(1)), &Expr::Term(Term::Zero), &th, 5).unwrap());
        // ^a(n', i:k) joins with s(^a(n, i:k)) in one step.
        let n = Term::param(crate::term::ParamKind::Active, "n");
        let k = Term::param(crate::term::ParamKind::Internal, "k");
        assert!(joinable(
            &Expr::Term(add(Term::succ(n.clone()), k.clone())),
            &Expr::Term(Term::succ(add(n, k))),
            &th,
            5
        )
        .unwrap());
    }

    #[test]
    fn fuel_exhaustion_on_looping_theory() {
        let mut th = EqTheory::new("loop");
        th.rules.push(RewriteRule::term(
            Term::app("^f", vec![Term::Zero]),
            Term::app("^f", vec![Term::Zero]),
        ));
        let t = Term::app("^f", vec![Term::Zero]);
        assert!(matches!(
            normalize_term(&t, &th, 50),
            Err(RewriteError::FuelExhausted { fuel: 50 })
        ));
    }

    #[test]
    fn rule_validation_rejects_bad_shapes() {
        let bad_head = RewriteRule::term(Term::Zero, Term::Zero);
        assert!(matches!(
            bad_head.validate(),
            Err(RewriteError::LhsNotDefined(_))
        ));
        let nested = RewriteRule::term(
            Term::app("^f", vec![Term::app("^g", vec![])]),
            Term::Zero,
        );
        assert!(matches!(
            nested.validate(),
            Err(RewriteError::DefinedInLhsArgs(_))
        ));
        let unbound = RewriteRule::term(
            Term::app("^f", vec![Term::PatVar("x".into())]),
            Term::PatVar("y".into()),
        );
        assert!(matches!(
            unbound.validate(),
            Err(RewriteError::UnboundRhsVar(_))
        ));
        e_pa().validate().unwrap();
        e_iter().validate().unwrap();
    }

    #[test]
    fn normalize_idempotent() {
        let th = e_pa();
        for a in 0..4u64 {
            for b in 0..4u64 {
                let t = mul(add(num(a), num(b)), num(2));
                let n1 = normalize_term(&t, &th, DEFAULT_FUEL).unwrap();
                let n2 = normalize_term(&n1, &th, DEFAULT_FUEL).unwrap();
                assert_eq!(n1, n2);
            }
        }
    }

    // Desk-scale convergence sanity: overlapping instances of rule left
    // sides stay joinable for small numeric arguments.
    #[test]
    fn critical_pair_candidates_join_at_small_depth() {
        let th = e_pa();
        for a in 0..=3u64 {
            for b in 0..=3u64 {
                let t = Expr::Term(mul(num(a), add(num(b), num(a))));
                let lhs_first = apply_rule_once(&t, &th).unwrap();
                // Any other single step from the same term must rejoin.
                let n0 = normalize(&t, &th, DEFAULT_FUEL).unwrap();
                let n1 = normalize(&lhs_first, &th, DEFAULT_FUEL).unwrap();
                assert!(n0.alpha_eq(&n1));
            }
        }
    }
}
