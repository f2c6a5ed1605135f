//! Proof trees of the schematic sequent calculus: LK rules, the four
//! equational axiom schemes, the E rule, proof links, and the multivariate
//! induction rule.
//!
//! Binary rules are multiplicative (contexts concatenate), unary
//! conjunction/disjunction rules are the projection forms, and exchange is
//! implicit in the multiset sequents.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::formula::Formula;
use crate::sequent::Sequent;
use crate::subst::{Subst, SubstKey};
use crate::term::{ParamKind, Parameter, Term};

/// The four equational axiom schemes of the calculus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EqScheme {
    /// `|- s = s`
    Refl,
    /// `s = t |- s(s) = s(t)`
    SuccCong,
    /// `s1 = t1, ..., sk = tk |- f(s1..sk, r) = f(t1..tk, r)`
    FnCong,
    /// `s1 = t1, ..., sk = tk, R(s1..sk, r) |- R(t1..tk, r)`
    PredRepl,
}

impl EqScheme {
    pub fn tag(self) -> &'static str {
        match self {
            EqScheme::Refl => "refl",
            EqScheme::SuccCong => "succ",
            EqScheme::FnCong => "fn",
            EqScheme::PredRepl => "pred",
        }
    }
}

/// An eigenvariable payload. Parsing admits any parameter kind here so the
/// checker can reject quantification of active or internal parameters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Eigen {
    Var(String),
    Param(Parameter),
}

impl Eigen {
    pub fn as_term(&self) -> Term {
        match self {
            Eigen::Var(v) => Term::Var(v.clone()),
            Eigen::Param(p) => Term::Param(p.clone()),
        }
    }

    pub fn subst_key(&self) -> SubstKey {
        match self {
            Eigen::Var(v) => SubstKey::Var(v.clone()),
            Eigen::Param(p) => SubstKey::Param(p.clone()),
        }
    }
}

impl fmt::Display for Eigen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Eigen::Var(v) => write!(f, "v:{}", v),
            Eigen::Param(p) => write!(f, "{}", p),
        }
    }
}

/// Inference rules. Leaves have no premises; every other arity is fixed by
/// the rule.
#[derive(Debug, Clone, PartialEq)]
pub enum Rule {
    /// `A |- A`
    Axiom,
    /// Instance of one of the four equational axiom schemes.
    EqAxiom(EqScheme),
    /// Named axiom from the document's axiom table, or a boundary sequent
    /// recorded during evaluation.
    TheoryAxiom { label: String },
    /// Proof link: a 0-ary inference standing for a call to a component.
    /// Arguments are in component signature order, dispatch first.
    Link { target: String, args: Vec<Term> },
    WeakL { formula: Formula },
    WeakR { formula: Formula },
    ContrL { formula: Formula },
    ContrR { formula: Formula },
    NotL { formula: Formula },
    NotR { formula: Formula },
    /// `principal` is the conjunction `A & B`; the premise holds the kept
    /// component.
    AndL1 { principal: Formula },
    AndL2 { principal: Formula },
    AndR { principal: Formula },
    OrL { principal: Formula },
    OrR1 { principal: Formula },
    OrR2 { principal: Formula },
    ImpL { principal: Formula },
    ImpR { principal: Formula },
    ForallL { principal: Formula, witness: Term },
    ForallR { principal: Formula, eigen: Eigen },
    ExistsL { principal: Formula, eigen: Eigen },
    ExistsR { principal: Formula, witness: Term },
    Cut { formula: Formula },
    /// The E rule: one formula of the premise is replaced by an
    /// E-equivalent one.
    ERule,
    /// Multivariate induction. The premise derives
    /// `F(n, m..), Gamma |- Delta, F(n', m..)`; the conclusion instantiates
    /// the slots with `args` and the induction parameter with `target`.
    MvInd {
        formula: Formula,
        param: Parameter,
        slots: Vec<Parameter>,
        args: Vec<Term>,
        target: Term,
    },
}

impl Rule {
    pub fn tag(&self) -> &'static str {
        match self {
            Rule::Axiom => "axiom",
            Rule::EqAxiom(_) => "eqax",
            Rule::TheoryAxiom { .. } => "thax",
            Rule::Link { .. } => "link",
            Rule::WeakL { .. } => "weak-l",
            Rule::WeakR { .. } => "weak-r",
            Rule::ContrL { .. } => "contr-l",
            Rule::ContrR { .. } => "contr-r",
            Rule::NotL { .. } => "not-l",
            Rule::NotR { .. } => "not-r",
            Rule::AndL1 { .. } => "and-l1",
            Rule::AndL2 { .. } => "and-l2",
            Rule::AndR { .. } => "and-r",
            Rule::OrL { .. } => "or-l",
            Rule::OrR1 { .. } => "or-r1",
            Rule::OrR2 { .. } => "or-r2",
            Rule::ImpL { .. } => "imp-l",
            Rule::ImpR { .. } => "imp-r",
            Rule::ForallL { .. } => "forall-l",
            Rule::ForallR { .. } => "forall-r",
            Rule::ExistsL { .. } => "exists-l",
            Rule::ExistsR { .. } => "exists-r",
            Rule::Cut { .. } => "cut",
            Rule::ERule => "e",
            Rule::MvInd { .. } => "ind",
        }
    }

    /// Number of premises the rule takes.
    pub fn arity(&self) -> usize {
        match self {
            Rule::Axiom
            | Rule::EqAxiom(_)
            | Rule::TheoryAxiom { .. }
            | Rule::Link { .. } => 0,
            Rule::AndR { .. } | Rule::OrL { .. } | Rule::ImpL { .. } | Rule::Cut { .. } => 2,
            _ => 1,
        }
    }
}

/// A node of a proof tree. Every node carries its conclusion; the checker
/// re-derives it from the premises and the rule.
#[derive(Debug, Clone, PartialEq)]
pub struct ProofTree {
    pub conclusion: Sequent,
    pub rule: Rule,
    pub premises: Vec<ProofTree>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("substitution would capture eigenvariable {0}")]
    EigenCapture(String),
    #[error("{0}")]
    Term(#[from] crate::term::TermError),
}

impl ProofTree {
    pub fn leaf(conclusion: Sequent, rule: Rule) -> Self {
        ProofTree { conclusion, rule, premises: Vec::new() }
    }

    pub fn unary(conclusion: Sequent, rule: Rule, premise: ProofTree) -> Self {
        ProofTree { conclusion, rule, premises: vec![premise] }
    }

    pub fn binary(conclusion: Sequent, rule: Rule, left: ProofTree, right: ProofTree) -> Self {
        ProofTree { conclusion, rule, premises: vec![left, right] }
    }

    /// The end-sequent `es(.)` of the derivation.
    pub fn end_sequent(&self) -> &Sequent {
        &self.conclusion
    }

    pub fn node_count(&self) -> usize {
        1 + self.premises.iter().map(ProofTree::node_count).sum::<usize>()
    }

    /// Visits every node together with its premise-index path from the root.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a ProofTree, &[usize])) {
        fn rec<'a>(
            t: &'a ProofTree,
            path: &mut Vec<usize>,
            f: &mut impl FnMut(&'a ProofTree, &[usize]),
        ) {
            f(t, path);
            for (i, p) in t.premises.iter().enumerate() {
                path.push(i);
                rec(p, path, f);
                path.pop();
            }
        }
        rec(self, &mut Vec::new(), f);
    }

    pub fn links(&self) -> Vec<(&str, &[Term], &Sequent)> {
        let mut out = Vec::new();
        self.walk(&mut |node, _| {
            if let Rule::Link { target, args } = &node.rule {
                out.push((target.as_str(), args.as_slice(), &node.conclusion));
            }
        });
        out
    }

    pub fn has_links(&self) -> bool {
        !self.links().is_empty()
    }

    pub fn count_rule(&self, tag: &str) -> usize {
        let mut n = 0;
        self.walk(&mut |node, _| {
            if node.rule.tag() == tag {
                n += 1;
            }
        });
        n
    }

    /// Free parameters of the given kind over every node conclusion.
    pub fn params_of(&self, kind: ParamKind) -> BTreeSet<Parameter> {
        let mut out = BTreeSet::new();
        self.walk(&mut |node, _| {
            for f in node.conclusion.formulas() {
                f.params_of(kind, &mut out);
            }
            // Payload terms matter too: a witness or link argument can
            // mention a parameter that no sequent of the subtree retains.
            for t in node.rule_terms() {
                t.params_of(kind, &mut out);
            }
        });
        out
    }

    /// Terms carried in the rule payload.
    pub fn rule_terms(&self) -> Vec<&Term> {
        match &self.rule {
            Rule::Link { args, .. } => args.iter().collect(),
            Rule::ForallL { witness, .. } | Rule::ExistsR { witness, .. } => vec![witness],
            Rule::MvInd { args, target, .. } => {
                let mut v: Vec<&Term> = args.iter().collect();
                v.push(target);
                v
            }
            _ => Vec::new(),
        }
    }

    /// Applies a substitution to every sequent and payload. Eigenvariables
    /// scope their subtree: the bound entity is dropped from the
    /// substitution there, and capture is an error.
    pub fn substitute(&self, s: &Subst) -> Result<ProofTree, TreeError> {
        if s.is_empty() {
            return Ok(self.clone());
        }
        let conclusion = self.conclusion.substitute(s)?;
        let rule = self.rule.substitute(s)?;
        let premises = match &self.rule {
            Rule::ForallR { eigen, .. } | Rule::ExistsL { eigen, .. } => {
                let key = eigen.subst_key();
                let mut s2 = s.clone();
                s2.remove(&key);
                for (_, range) in s2.iter() {
                    let captured = match eigen {
                        Eigen::Var(v) => range.contains_var(v),
                        Eigen::Param(p) => range.contains_param(p),
                    };
                    if captured {
                        return Err(TreeError::EigenCapture(eigen.to_string()));
                    }
                }
                self.premises
                    .iter()
                    .map(|p| p.substitute(&s2))
                    .collect::<Result<_, _>>()?
            }
            _ => self
                .premises
                .iter()
                .map(|p| p.substitute(s))
                .collect::<Result<_, _>>()?,
        };
        Ok(ProofTree { conclusion, rule, premises })
    }

    /// Total tree size: nodes plus sequent sizes, the measure used for the
    /// monotone-cost property.
    pub fn proof_size(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |node, _| {
            n += 1 + node.conclusion.size();
        });
        n
    }

    /// Alpha-aware structural equality.
    pub fn alpha_eq(&self, other: &ProofTree) -> bool {
        if !self.conclusion.multiset_eq(&other.conclusion)
            || self.rule.tag() != other.rule.tag()
            || self.premises.len() != other.premises.len()
        {
            return false;
        }
        self.premises
            .iter()
            .zip(&other.premises)
            .all(|(a, b)| a.alpha_eq(b))
    }
}

impl Rule {
    fn substitute(&self, s: &Subst) -> Result<Rule, TreeError> {
        let sub_f = |f: &Formula| f.substitute(s);
        Ok(match self {
            Rule::Link { target, args } => Rule::Link {
                target: target.clone(),
                args: args.iter().map(|a| s.apply_term(a)).collect(),
            },
            Rule::WeakL { formula } => Rule::WeakL { formula: sub_f(formula)? },
            Rule::WeakR { formula } => Rule::WeakR { formula: sub_f(formula)? },
            Rule::ContrL { formula } => Rule::ContrL { formula: sub_f(formula)? },
            Rule::ContrR { formula } => Rule::ContrR { formula: sub_f(formula)? },
            Rule::NotL { formula } => Rule::NotL { formula: sub_f(formula)? },
            Rule::NotR { formula } => Rule::NotR { formula: sub_f(formula)? },
            Rule::AndL1 { principal } => Rule::AndL1 { principal: sub_f(principal)? },
            Rule::AndL2 { principal } => Rule::AndL2 { principal: sub_f(principal)? },
            Rule::AndR { principal } => Rule::AndR { principal: sub_f(principal)? },
            Rule::OrL { principal } => Rule::OrL { principal: sub_f(principal)? },
            Rule::OrR1 { principal } => Rule::OrR1 { principal: sub_f(principal)? },
            Rule::OrR2 { principal } => Rule::OrR2 { principal: sub_f(principal)? },
            Rule::ImpL { principal } => Rule::ImpL { principal: sub_f(principal)? },
            Rule::ImpR { principal } => Rule::ImpR { principal: sub_f(principal)? },
            Rule::ForallL { principal, witness } => Rule::ForallL {
                principal: sub_f(principal)?,
                witness: s.apply_term(witness),
            },
            Rule::ForallR { principal, eigen } => Rule::ForallR {
                principal: sub_f(principal)?,
                eigen: eigen.clone(),
            },
            Rule::ExistsL { principal, eigen } => Rule::ExistsL {
                principal: sub_f(principal)?,
                eigen: eigen.clone(),
            },
            Rule::ExistsR { principal, witness } => Rule::ExistsR {
                principal: sub_f(principal)?,
                witness: s.apply_term(witness),
            },
            Rule::Cut { formula } => Rule::Cut { formula: sub_f(formula)? },
            Rule::MvInd { formula, param, slots, args, target } => Rule::MvInd {
                formula: sub_f(formula)?,
                param: param.clone(),
                slots: slots.clone(),
                args: args.iter().map(|a| s.apply_term(a)).collect(),
                target: s.apply_term(target),
            },
            other => other.clone(),
        })
    }
}

/// Named axiom sequents a document may declare and use as leaves.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AxiomTable {
    entries: Vec<(String, Sequent)>,
}

impl AxiomTable {
    pub fn new() -> Self {
        AxiomTable::default()
    }

    pub fn insert(&mut self, label: impl Into<String>, seq: Sequent) {
        self.entries.push((label.into(), seq));
    }

    pub fn get(&self, label: &str) -> Option<&Sequent> {
        self.entries
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, s)| s)
    }

    /// All sequents declared under a label; boundary labels can carry one
    /// per recorded link.
    pub fn matching<'a>(&'a self, label: &'a str) -> impl Iterator<Item = &'a Sequent> {
        self.entries
            .iter()
            .filter(move |(l, _)| l == label)
            .map(|(_, s)| s)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Sequent)> {
        self.entries.iter().map(|(l, s)| (l.as_str(), s))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
