//! Schematic sequents: pairs of formula multisets. Exchange is implicit;
//! there is no exchange rule anywhere in the calculus.

use std::collections::BTreeSet;
use std::fmt;

use crate::formula::Formula;
use crate::subst::Subst;
use crate::term::{ParamKind, Parameter, TermError};

#[derive(Debug, Clone, PartialEq, Eq, Default, Hash, PartialOrd, Ord)]
pub struct Sequent {
    pub antecedent: Vec<Formula>,
    pub succedent: Vec<Formula>,
}

impl Sequent {
    pub fn new(antecedent: Vec<Formula>, succedent: Vec<Formula>) -> Self {
        Sequent { antecedent, succedent }
    }

    pub fn from_suc(f: Formula) -> Self {
        Sequent::new(Vec::new(), vec![f])
    }

    pub fn formulas(&self) -> impl Iterator<Item = &Formula> {
        self.antecedent.iter().chain(self.succedent.iter())
    }

    pub fn params_of(&self, kind: ParamKind) -> BTreeSet<Parameter> {
        let mut out = BTreeSet::new();
        for f in self.formulas() {
            f.params_of(kind, &mut out);
        }
        out
    }

    pub fn is_quantifier_free(&self) -> bool {
        self.formulas().all(Formula::is_quantifier_free)
    }

    pub fn substitute(&self, s: &Subst) -> Result<Sequent, TermError> {
        Ok(Sequent::new(
            self.antecedent
                .iter()
                .map(|f| f.substitute(s))
                .collect::<Result<_, _>>()?,
            self.succedent
                .iter()
                .map(|f| f.substitute(s))
                .collect::<Result<_, _>>()?,
        ))
    }

    /// Multiset equality on both sides, up to alpha-equivalence.
    pub fn multiset_eq(&self, other: &Sequent) -> bool {
        multiset_eq(&self.antecedent, &other.antecedent)
            && multiset_eq(&self.succedent, &other.succedent)
    }

    pub fn size(&self) -> usize {
        self.formulas().map(Formula::size).sum()
    }

    /// Canonical key used for deterministic ordering and hashing: both
    /// sides alpha-canonicalized and sorted.
    pub fn canonical(&self) -> Sequent {
        let mut ant: Vec<Formula> = self.antecedent.iter().map(Formula::alpha_canon).collect();
        let mut suc: Vec<Formula> = self.succedent.iter().map(Formula::alpha_canon).collect();
        ant.sort();
        suc.sort();
        Sequent::new(ant, suc)
    }
}

/// Multiset equality of formula lists up to alpha-equivalence.
pub fn multiset_eq(a: &[Formula], b: &[Formula]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut ka: Vec<Formula> = a.iter().map(Formula::alpha_canon).collect();
    let mut kb: Vec<Formula> = b.iter().map(Formula::alpha_canon).collect();
    ka.sort();
    kb.sort();
    ka == kb
}

/// Removes one occurrence of `f` (up to alpha) from the list; `None` when
/// absent.
pub fn remove_one(list: &[Formula], f: &Formula) -> Option<Vec<Formula>> {
    let pos = list.iter().position(|g| g.alpha_eq(f))?;
    let mut out = list.to_vec();
    out.remove(pos);
    Some(out)
}

/// Removes each formula of `fs` (multiset-wise, up to alpha); `None` when
/// any is missing.
pub fn remove_all(list: &[Formula], fs: &[Formula]) -> Option<Vec<Formula>> {
    let mut cur = list.to_vec();
    for f in fs {
        cur = remove_one(&cur, f)?;
    }
    Some(cur)
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.antecedent.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", a)?;
        }
        if self.antecedent.is_empty() {
            write!(f, "|-")?;
        } else {
            write!(f, " |-")?;
        }
        for (i, s) in self.succedent.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, " {}", s)?;
        }
        Ok(())
    }
}
