//! Result-sort inference for defined symbols, derived from the equational
//! theory. Plain function symbols are always individual-sorted; numeric
//! terms are built only from `0`, `s`, parameters, and defined symbols.

use std::collections::BTreeMap;

use crate::formula::Formula;
use crate::rewrite::{EqTheory, Expr};
use crate::term::{is_defined_symbol, Sort, Term};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    defined_fn_sorts: BTreeMap<String, Sort>,
    defined_preds: Vec<String>,
}

impl Signature {
    /// Infers defined-symbol result sorts from rule right-hand sides,
    /// iterating until a fixpoint. Symbols whose sort stays undetermined
    /// are left unknown; checks that need them degrade to lenient.
    pub fn infer(theory: &EqTheory) -> Signature {
        let mut sig = Signature::default();
        for rule in &theory.rules {
            if let Expr::Formula(Formula::Atom(name, _)) = &rule.lhs {
                if is_defined_symbol(name) && !sig.defined_preds.contains(name) {
                    sig.defined_preds.push(name.clone());
                }
            }
        }
        for _ in 0..theory.rules.len() + 1 {
            let mut changed = false;
            for rule in &theory.rules {
                let (Expr::Term(Term::App(name, _)), Expr::Term(rhs)) = (&rule.lhs, &rule.rhs)
                else {
                    continue;
                };
                if sig.defined_fn_sorts.contains_key(name) {
                    continue;
                }
                if let Some(sort) = sig.term_sort(rhs) {
                    sig.defined_fn_sorts.insert(name.clone(), sort);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        sig
    }

    pub fn is_defined_pred(&self, name: &str) -> bool {
        self.defined_preds.iter().any(|p| p == name)
    }

    /// The sort of a term, when determinable.
    pub fn term_sort(&self, t: &Term) -> Option<Sort> {
        match t {
            Term::App(name, _) if is_defined_symbol(name) => {
                self.defined_fn_sorts.get(name).copied()
            }
            other => other.sort_hint(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewrite::{e_pa, RewriteRule};

    #[test]
    fn infers_numeric_sort_through_chained_rules() {
        // ^m's rules mention ^a, so inference needs the fixpoint loop.
        let sig = Signature::infer(&e_pa());
        let t = Term::app("^m", vec![Term::Zero, Term::Zero]);
        assert_eq!(sig.term_sort(&t), Some(Sort::Omega));
    }

    #[test]
    fn infers_iota_sort_from_constant() {
        let mut th = EqTheory::new("it");
        th.rules.push(RewriteRule::term(
            Term::app("^it", vec![Term::Zero]),
            Term::cnst("a"),
        ));
        th.rules.push(RewriteRule::term(
            Term::app("^it", vec![Term::succ(Term::PatVar("n".into()))]),
            Term::app("f", vec![Term::app("^it", vec![Term::PatVar("n".into())])]),
        ));
        let sig = Signature::infer(&th);
        assert_eq!(
            sig.term_sort(&Term::app("^it", vec![Term::Zero])),
            Some(Sort::Iota)
        );
    }
}
