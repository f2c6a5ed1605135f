//! The proof checker: validates every inference's side conditions and
//! classifies derivations.
//!
//! Checking is local per node (context preservation, principal-formula
//! decomposition, eigenvariable freshness, joinability for E steps, scheme
//! instantiation for equational axiom leaves) plus the sequent-level
//! one-active-parameter discipline. Identical inputs yield identical
//! reports.

use std::collections::BTreeSet;
use std::fmt;

use crate::calculus::{AxiomTable, Eigen, EqScheme, ProofTree, Rule};
use crate::formula::{Binder, Formula, EQ};
use crate::rewrite::{joinable_formulas, match_term, EqTheory, Expr, RewriteError, DEFAULT_FUEL};
use crate::sequent::{multiset_eq, remove_one, Sequent};
use crate::sig::Signature;
use crate::subst::{Subst, SubstKey};
use crate::term::{ParamKind, Parameter, Sort, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ViolationCode {
    ArityMismatch,
    PrincipalMismatch,
    ContextMismatch,
    EigenvariableCaptured,
    ActiveQuantified,
    NotJoinable,
    BadSchemeInstance,
    MultipleActiveParams,
    LinkNotAllowed,
    MvIndNotAllowed,
    MvIndMalformed,
    IndEigenCondition,
    UnknownAxiom,
    AxiomMismatch,
    TheoryAxiomNotAllowed,
    SortMismatch,
    SubstitutionError,
    FuelExhausted,
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: Vec<usize>,
    pub code: ViolationCode,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] at ", self.code)?;
        if self.path.is_empty() {
            write!(f, "root")?;
        } else {
            let p: Vec<String> = self.path.iter().map(|i| i.to_string()).collect();
            write!(f, "{}", p.join("."))?;
        }
        write!(f, ": {}", self.message)
    }
}

/// How induction nodes are checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MvIndMode {
    #[default]
    Off,
    /// Active induction parameter, internal slot parameters.
    MvLkie,
    /// Passive induction and slot parameters with eigenvariable conditions;
    /// no active or internal parameter anywhere in the node.
    Pra,
}

#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub allow_links: bool,
    pub mvind: MvIndMode,
    pub allow_theory_axioms: bool,
    pub fuel: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            allow_links: false,
            mvind: MvIndMode::Off,
            allow_theory_axioms: true,
            fuel: DEFAULT_FUEL,
        }
    }
}

pub struct CheckContext<'a> {
    pub theory: &'a EqTheory,
    pub axioms: &'a AxiomTable,
    pub signature: &'a Signature,
    pub options: CheckOptions,
}

impl<'a> CheckContext<'a> {
    pub fn new(
        theory: &'a EqTheory,
        axioms: &'a AxiomTable,
        signature: &'a Signature,
        options: CheckOptions,
    ) -> Self {
        CheckContext { theory, axioms, signature, options }
    }
}

/// Active-parameter content of a derivation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Activity {
    Inactive,
    Active(String),
    Mixed(Vec<String>),
}

impl fmt::Display for Activity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Activity::Inactive => write!(f, "inactive"),
            Activity::Active(n) => write!(f, "{{{}}}-active", n),
            Activity::Mixed(ns) => write!(f, "mixed-active({})", ns.join(",")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProofKind {
    /// End-sequent free of active and internal parameters.
    Proof,
    Derivation,
}

impl fmt::Display for ProofKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProofKind::Proof => write!(f, "proof"),
            ProofKind::Derivation => write!(f, "derivation"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub violations: Vec<Violation>,
    pub activity: Activity,
    pub kind: ProofKind,
    pub node_count: usize,
}

impl CheckReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn classification(&self) -> String {
        format!("{}, {}", self.activity, self.kind)
    }
}

/// Checks one inference locally, assuming the premises are well-formed.
pub fn check_inference(node: &ProofTree, ctx: &CheckContext) -> Vec<Violation> {
    let mut out = Vec::new();
    check_node(node, ctx, &[], &mut out);
    out
}

/// Full traversal: every inference, the per-sequent active-parameter
/// limit, and the derivation classification.
pub fn check_derivation(tree: &ProofTree, ctx: &CheckContext) -> CheckReport {
    let mut violations = Vec::new();
    tree.walk(&mut |node, path| {
        check_node(node, ctx, path, &mut violations);
        let actives = node.conclusion.params_of(ParamKind::Active);
        if actives.len() > 1 {
            let names: Vec<String> = actives.iter().map(|p| p.name.clone()).collect();
            violations.push(Violation {
                path: path.to_vec(),
                code: ViolationCode::MultipleActiveParams,
                message: format!(
                    "sequent has {} distinct active parameters: {}",
                    names.len(),
                    names.join(", ")
                ),
            });
        }
    });
    let actives = tree.params_of(ParamKind::Active);
    let activity = match actives.len() {
        0 => Activity::Inactive,
        1 => Activity::Active(actives.iter().next().unwrap().name.clone()),
        _ => Activity::Mixed(actives.iter().map(|p| p.name.clone()).collect()),
    };
    let es = tree.end_sequent();
    let kind = if es.params_of(ParamKind::Active).is_empty()
        && es.params_of(ParamKind::Internal).is_empty()
    {
        ProofKind::Proof
    } else {
        ProofKind::Derivation
    };
    CheckReport {
        violations,
        activity,
        kind,
        node_count: tree.node_count(),
    }
}

fn violation(
    out: &mut Vec<Violation>,
    path: &[usize],
    code: ViolationCode,
    message: impl Into<String>,
) {
    out.push(Violation { path: path.to_vec(), code, message: message.into() });
}

fn check_node(node: &ProofTree, ctx: &CheckContext, path: &[usize], out: &mut Vec<Violation>) {
    if node.premises.len() != node.rule.arity() {
        violation(
            out,
            path,
            ViolationCode::ArityMismatch,
            format!(
                "rule {} takes {} premises, found {}",
                node.rule.tag(),
                node.rule.arity(),
                node.premises.len()
            ),
        );
        return;
    }
    let conc = &node.conclusion;
    match &node.rule {
        Rule::Axiom => {
            let ok = conc.antecedent.len() == 1
                && conc.succedent.len() == 1
                && conc.antecedent[0].alpha_eq(&conc.succedent[0]);
            if !ok {
                violation(
                    out,
                    path,
                    ViolationCode::PrincipalMismatch,
                    format!("axiom leaf must be A |- A, found {}", conc),
                );
            }
        }
        Rule::EqAxiom(scheme) => check_scheme(*scheme, conc, path, out),
        Rule::TheoryAxiom { label } => {
            if !ctx.options.allow_theory_axioms {
                violation(
                    out,
                    path,
                    ViolationCode::TheoryAxiomNotAllowed,
                    format!("theory axiom {} not allowed here", label),
                );
                return;
            }
            if label == "$theory" {
                if !is_theory_equation_instance(conc, ctx.theory) {
                    violation(
                        out,
                        path,
                        ViolationCode::AxiomMismatch,
                        format!("{} is not an instance of a theory equation", conc),
                    );
                }
            } else {
                let patterns: Vec<&Sequent> = ctx.axioms.matching(label).collect();
                if patterns.is_empty() {
                    violation(
                        out,
                        path,
                        ViolationCode::UnknownAxiom,
                        format!("no axiom named {}", label),
                    );
                } else if !patterns.iter().any(|p| is_sequent_instance(p, conc)) {
                    violation(
                        out,
                        path,
                        ViolationCode::AxiomMismatch,
                        format!("{} is not an instance of axiom {}", conc, label),
                    );
                }
            }
        }
        Rule::Link { target, .. } => {
            if !ctx.options.allow_links {
                violation(
                    out,
                    path,
                    ViolationCode::LinkNotAllowed,
                    format!("link to {} not allowed here", target),
                );
            }
        }
        Rule::WeakL { formula } => {
            let p = &node.premises[0].conclusion;
            match remove_one(&conc.antecedent, formula) {
                Some(rest)
                    if multiset_eq(&rest, &p.antecedent)
                        && multiset_eq(&conc.succedent, &p.succedent) => {}
                _ => violation(
                    out,
                    path,
                    ViolationCode::ContextMismatch,
                    format!("weak-l of {} does not map {} to {}", formula, p, conc),
                ),
            }
        }
        Rule::WeakR { formula } => {
            let p = &node.premises[0].conclusion;
            match remove_one(&conc.succedent, formula) {
                Some(rest)
                    if multiset_eq(&rest, &p.succedent)
                        && multiset_eq(&conc.antecedent, &p.antecedent) => {}
                _ => violation(
                    out,
                    path,
                    ViolationCode::ContextMismatch,
                    format!("weak-r of {} does not map {} to {}", formula, p, conc),
                ),
            }
        }
        Rule::ContrL { formula } => {
            let p = &node.premises[0].conclusion;
            let ok = conc.antecedent.iter().any(|f| f.alpha_eq(formula))
                && match remove_one(&p.antecedent, formula) {
                    Some(rest) => {
                        multiset_eq(&rest, &conc.antecedent)
                            && multiset_eq(&p.succedent, &conc.succedent)
                    }
                    None => false,
                };
            if !ok {
                violation(
                    out,
                    path,
                    ViolationCode::ContextMismatch,
                    format!("contr-l of {} does not map {} to {}", formula, p, conc),
                );
            }
        }
        Rule::ContrR { formula } => {
            let p = &node.premises[0].conclusion;
            let ok = conc.succedent.iter().any(|f| f.alpha_eq(formula))
                && match remove_one(&p.succedent, formula) {
                    Some(rest) => {
                        multiset_eq(&rest, &conc.succedent)
                            && multiset_eq(&p.antecedent, &conc.antecedent)
                    }
                    None => false,
                };
            if !ok {
                violation(
                    out,
                    path,
                    ViolationCode::ContextMismatch,
                    format!("contr-r of {} does not map {} to {}", formula, p, conc),
                );
            }
        }
        Rule::NotL { formula } => {
            let p = &node.premises[0].conclusion;
            let expected = unary_result(p, conc, &Formula::not(formula.clone()), true, formula, false);
            report_unary(expected, "not-l", p, conc, path, out);
        }
        Rule::NotR { formula } => {
            let p = &node.premises[0].conclusion;
            let expected = unary_result(p, conc, &Formula::not(formula.clone()), false, formula, true);
            report_unary(expected, "not-r", p, conc, path, out);
        }
        Rule::AndL1 { principal } => check_proj_left(node, principal, true, path, out),
        Rule::AndL2 { principal } => check_proj_left(node, principal, false, path, out),
        Rule::OrR1 { principal } => check_proj_right(node, principal, true, path, out),
        Rule::OrR2 { principal } => check_proj_right(node, principal, false, path, out),
        Rule::ImpR { principal } => {
            let Formula::Imp(a, b) = principal else {
                violation(out, path, ViolationCode::PrincipalMismatch,
                    format!("imp-r principal {} is not an implication", principal));
                return;
            };
            let p = &node.premises[0].conclusion;
            let ok = (|| {
                let ant = remove_one(&p.antecedent, a)?;
                let suc = remove_one(&p.succedent, b)?;
                let cs = remove_one(&conc.succedent, principal)?;
                Some(multiset_eq(&ant, &conc.antecedent) && multiset_eq(&suc, &cs))
            })()
            .unwrap_or(false);
            if !ok {
                violation(
                    out,
                    path,
                    ViolationCode::PrincipalMismatch,
                    format!("imp-r of {} does not map {} to {}", principal, p, conc),
                );
            }
        }
        Rule::AndR { principal } => {
            let Formula::And(a, b) = principal else {
                violation(out, path, ViolationCode::PrincipalMismatch,
                    format!("and-r principal {} is not a conjunction", principal));
                return;
            };
            check_binary_right(node, principal, a, b, "and-r", path, out);
        }
        Rule::OrL { principal } => {
            let Formula::Or(a, b) = principal else {
                violation(out, path, ViolationCode::PrincipalMismatch,
                    format!("or-l principal {} is not a disjunction", principal));
                return;
            };
            check_binary_left(node, principal, a, b, "or-l", path, out);
        }
        Rule::ImpL { principal } => {
            let Formula::Imp(a, b) = principal else {
                violation(out, path, ViolationCode::PrincipalMismatch,
                    format!("imp-l principal {} is not an implication", principal));
                return;
            };
            // p1 proves A on the right, p2 consumes B on the left.
            let p1 = &node.premises[0].conclusion;
            let p2 = &node.premises[1].conclusion;
            let ok = (|| {
                let s1 = remove_one(&p1.succedent, a)?;
                let a2 = remove_one(&p2.antecedent, b)?;
                let cant = remove_one(&conc.antecedent, principal)?;
                let mut ants = p1.antecedent.clone();
                ants.extend(a2);
                let mut sucs = s1;
                sucs.extend(p2.succedent.clone());
                Some(multiset_eq(&ants, &cant) && multiset_eq(&sucs, &conc.succedent))
            })()
            .unwrap_or(false);
            if !ok {
                violation(
                    out,
                    path,
                    ViolationCode::PrincipalMismatch,
                    format!("imp-l of {} does not fit premises", principal),
                );
            }
        }
        Rule::Cut { formula } => {
            let p1 = &node.premises[0].conclusion;
            let p2 = &node.premises[1].conclusion;
            let ok = (|| {
                let s1 = remove_one(&p1.succedent, formula)?;
                let a2 = remove_one(&p2.antecedent, formula)?;
                let mut ants = p1.antecedent.clone();
                ants.extend(a2);
                let mut sucs = s1;
                sucs.extend(p2.succedent.clone());
                Some(multiset_eq(&ants, &conc.antecedent) && multiset_eq(&sucs, &conc.succedent))
            })()
            .unwrap_or(false);
            if !ok {
                violation(
                    out,
                    path,
                    ViolationCode::PrincipalMismatch,
                    format!("cut on {} does not fit premises", formula),
                );
            }
        }
        Rule::ForallL { principal, witness } => {
            check_instantiation(node, principal, witness, true, ctx, path, out);
        }
        Rule::ExistsR { principal, witness } => {
            check_instantiation(node, principal, witness, false, ctx, path, out);
        }
        Rule::ForallR { principal, eigen } => {
            check_eigen_rule(node, principal, eigen, false, ctx, path, out);
        }
        Rule::ExistsL { principal, eigen } => {
            check_eigen_rule(node, principal, eigen, true, ctx, path, out);
        }
        Rule::ERule => check_e_rule(node, ctx, path, out),
        Rule::MvInd { formula, param, slots, args, target } => {
            check_mvind(node, formula, param, slots, args, target, ctx, path, out);
        }
    }
}

fn unary_result(
    premise: &Sequent,
    conclusion: &Sequent,
    principal: &Formula,
    principal_left: bool,
    side_formula: &Formula,
    side_left: bool,
) -> bool {
    // Premise must contain side_formula on the stated side; conclusion
    // replaces it by the principal on its stated side.
    let (pf_list, pf_other) = if side_left {
        (&premise.antecedent, &premise.succedent)
    } else {
        (&premise.succedent, &premise.antecedent)
    };
    let (cf_list, cf_other) = if principal_left {
        (&conclusion.antecedent, &conclusion.succedent)
    } else {
        (&conclusion.succedent, &conclusion.antecedent)
    };
    let Some(prest) = remove_one(pf_list, side_formula) else {
        return false;
    };
    let Some(crest) = remove_one(cf_list, principal) else {
        return false;
    };
    if side_left == principal_left {
        multiset_eq(&prest, &crest) && multiset_eq(pf_other, cf_other)
    } else {
        multiset_eq(&prest, cf_other) && multiset_eq(pf_other, &crest)
    }
}

fn report_unary(
    ok: bool,
    tag: &str,
    premise: &Sequent,
    conclusion: &Sequent,
    path: &[usize],
    out: &mut Vec<Violation>,
) {
    if !ok {
        violation(
            out,
            path,
            ViolationCode::PrincipalMismatch,
            format!("{} does not map {} to {}", tag, premise, conclusion),
        );
    }
}

fn check_proj_left(
    node: &ProofTree,
    principal: &Formula,
    first: bool,
    path: &[usize],
    out: &mut Vec<Violation>,
) {
    let Formula::And(a, b) = principal else {
        violation(out, path, ViolationCode::PrincipalMismatch,
            format!("and-l principal {} is not a conjunction", principal));
        return;
    };
    let kept: &Formula = if first { a } else { b };
    let p = &node.premises[0].conclusion;
    let ok = unary_result(p, &node.conclusion, principal, true, kept, true);
    report_unary(ok, "and-l", p, &node.conclusion, path, out);
}

fn check_proj_right(
    node: &ProofTree,
    principal: &Formula,
    first: bool,
    path: &[usize],
    out: &mut Vec<Violation>,
) {
    let Formula::Or(a, b) = principal else {
        violation(out, path, ViolationCode::PrincipalMismatch,
            format!("or-r principal {} is not a disjunction", principal));
        return;
    };
    let kept: &Formula = if first { a } else { b };
    let p = &node.premises[0].conclusion;
    let ok = unary_result(p, &node.conclusion, principal, false, kept, false);
    report_unary(ok, "or-r", p, &node.conclusion, path, out);
}

fn check_binary_right(
    node: &ProofTree,
    principal: &Formula,
    a: &Formula,
    b: &Formula,
    tag: &str,
    path: &[usize],
    out: &mut Vec<Violation>,
) {
    let p1 = &node.premises[0].conclusion;
    let p2 = &node.premises[1].conclusion;
    let conc = &node.conclusion;
    let ok = (|| {
        let s1 = remove_one(&p1.succedent, a)?;
        let s2 = remove_one(&p2.succedent, b)?;
        let cs = remove_one(&conc.succedent, principal)?;
        let mut ants = p1.antecedent.clone();
        ants.extend(p2.antecedent.clone());
        let mut sucs = s1;
        sucs.extend(s2);
        Some(multiset_eq(&ants, &conc.antecedent) && multiset_eq(&sucs, &cs))
    })()
    .unwrap_or(false);
    if !ok {
        violation(
            out,
            path,
            ViolationCode::PrincipalMismatch,
            format!("{} of {} does not fit premises", tag, principal),
        );
    }
}

fn check_binary_left(
    node: &ProofTree,
    principal: &Formula,
    a: &Formula,
    b: &Formula,
    tag: &str,
    path: &[usize],
    out: &mut Vec<Violation>,
) {
    let p1 = &node.premises[0].conclusion;
    let p2 = &node.premises[1].conclusion;
    let conc = &node.conclusion;
    let ok = (|| {
        let a1 = remove_one(&p1.antecedent, a)?;
        let a2 = remove_one(&p2.antecedent, b)?;
        let ca = remove_one(&conc.antecedent, principal)?;
        let mut ants = a1;
        ants.extend(a2);
        let mut sucs = p1.succedent.clone();
        sucs.extend(p2.succedent.clone());
        Some(multiset_eq(&ants, &ca) && multiset_eq(&sucs, &conc.succedent))
    })()
    .unwrap_or(false);
    if !ok {
        violation(
            out,
            path,
            ViolationCode::PrincipalMismatch,
            format!("{} of {} does not fit premises", tag, principal),
        );
    }
}

/// forall-l / exists-r: the premise holds the instance at the witness.
fn check_instantiation(
    node: &ProofTree,
    principal: &Formula,
    witness: &Term,
    left: bool,
    ctx: &CheckContext,
    path: &[usize],
    out: &mut Vec<Violation>,
) {
    let (binder, body) = match (left, principal) {
        (true, Formula::Forall(b, f)) => (b, f),
        (false, Formula::Exists(b, f)) => (b, f),
        _ => {
            violation(
                out,
                path,
                ViolationCode::PrincipalMismatch,
                format!("principal {} does not match the quantifier rule", principal),
            );
            return;
        }
    };
    let want = match binder {
        Binder::Var(_) => Sort::Iota,
        Binder::Passive(_) => Sort::Omega,
    };
    if let Some(got) = ctx.signature.term_sort(witness) {
        if got != want {
            violation(
                out,
                path,
                ViolationCode::SortMismatch,
                format!("witness {} has sort {}, binder wants {}", witness, got, want),
            );
            return;
        }
    }
    let mut s = Subst::new();
    s.bind_unchecked(binder.subst_key(), witness.clone());
    let instance = match body.substitute(&s) {
        Ok(f) => f,
        Err(e) => {
            violation(out, path, ViolationCode::SubstitutionError, e.to_string());
            return;
        }
    };
    let p = &node.premises[0].conclusion;
    let ok = unary_result(p, &node.conclusion, principal, left, &instance, left);
    report_unary(ok, if left { "forall-l" } else { "exists-r" }, p, &node.conclusion, path, out);
}

/// forall-r / exists-l: eigenvariable rules.
fn check_eigen_rule(
    node: &ProofTree,
    principal: &Formula,
    eigen: &Eigen,
    left: bool,
    _ctx: &CheckContext,
    path: &[usize],
    out: &mut Vec<Violation>,
) {
    let (binder, body) = match (left, principal) {
        (false, Formula::Forall(b, f)) => (b, f),
        (true, Formula::Exists(b, f)) => (b, f),
        _ => {
            violation(
                out,
                path,
                ViolationCode::PrincipalMismatch,
                format!("principal {} does not match the quantifier rule", principal),
            );
            return;
        }
    };
    if let Eigen::Param(p) = eigen {
        if p.kind != ParamKind::Passive {
            violation(
                out,
                path,
                ViolationCode::ActiveQuantified,
                format!("eigenvariable {} is {:?}; only passive parameters can be quantified",
                    p, p.kind),
            );
            return;
        }
    }
    let sort_ok = matches!(
        (binder, eigen),
        (Binder::Var(_), Eigen::Var(_)) | (Binder::Passive(_), Eigen::Param(_))
    );
    if !sort_ok {
        violation(
            out,
            path,
            ViolationCode::SortMismatch,
            format!("eigenvariable {} does not fit binder {}", eigen, binder),
        );
        return;
    }
    // Freshness: the eigenvariable must not occur in the conclusion.
    let fresh = match eigen {
        Eigen::Var(v) => {
            let mut vs = BTreeSet::new();
            for f in node.conclusion.formulas() {
                f.free_vars(&mut vs);
            }
            !vs.contains(v)
        }
        Eigen::Param(p) => !node.conclusion.params_of(ParamKind::Passive).contains(p),
    };
    if !fresh {
        violation(
            out,
            path,
            ViolationCode::EigenvariableCaptured,
            format!("eigenvariable {} occurs in the conclusion", eigen),
        );
        return;
    }
    let mut s = Subst::new();
    s.bind_unchecked(binder.subst_key(), eigen.as_term());
    let instance = match body.substitute(&s) {
        Ok(f) => f,
        Err(e) => {
            violation(out, path, ViolationCode::SubstitutionError, e.to_string());
            return;
        }
    };
    let p = &node.premises[0].conclusion;
    let ok = unary_result(p, &node.conclusion, principal, left, &instance, left);
    report_unary(ok, if left { "exists-l" } else { "forall-r" }, p, &node.conclusion, path, out);
}

/// E rule: both sides of premise and conclusion must pair up into
/// E-joinable formulas.
fn check_e_rule(node: &ProofTree, ctx: &CheckContext, path: &[usize], out: &mut Vec<Violation>) {
    let p = &node.premises[0].conclusion;
    let conc = &node.conclusion;
    if p.antecedent.len() != conc.antecedent.len() || p.succedent.len() != conc.succedent.len() {
        violation(
            out,
            path,
            ViolationCode::ContextMismatch,
            format!("e-step changes sequent width: {} to {}", p, conc),
        );
        return;
    }
    let fuel = ctx.options.fuel;
    let mut fuel_hit = false;
    let mut rel = |a: &Formula, b: &Formula| -> bool {
        match joinable_formulas(a, b, ctx.theory, fuel) {
            Ok(j) => j,
            Err(RewriteError::FuelExhausted { .. }) => {
                fuel_hit = true;
                false
            }
            Err(_) => false,
        }
    };
    let ok = multiset_bijection(&p.antecedent, &conc.antecedent, &mut rel)
        && multiset_bijection(&p.succedent, &conc.succedent, &mut rel);
    if fuel_hit {
        violation(
            out,
            path,
            ViolationCode::FuelExhausted,
            format!("normalization ran out of fuel ({}) while checking e-step", fuel),
        );
    } else if !ok {
        violation(
            out,
            path,
            ViolationCode::NotJoinable,
            format!("e-step premise {} and conclusion {} are not joinable", p, conc),
        );
    }
}

/// Backtracking search for a bijection between two formula lists under the
/// given relation. Lists are small.
fn multiset_bijection(
    xs: &[Formula],
    ys: &[Formula],
    rel: &mut impl FnMut(&Formula, &Formula) -> bool,
) -> bool {
    fn rec(
        xs: &[Formula],
        used: &mut Vec<bool>,
        ys: &[Formula],
        i: usize,
        rel: &mut impl FnMut(&Formula, &Formula) -> bool,
    ) -> bool {
        if i == xs.len() {
            return true;
        }
        for (j, y) in ys.iter().enumerate() {
            if !used[j] && rel(&xs[i], y) {
                used[j] = true;
                if rec(xs, used, ys, i + 1, rel) {
                    return true;
                }
                used[j] = false;
            }
        }
        false
    }
    if xs.len() != ys.len() {
        return false;
    }
    rec(xs, &mut vec![false; ys.len()], ys, 0, rel)
}

#[allow(clippy::too_many_arguments)]
fn check_mvind(
    node: &ProofTree,
    formula: &Formula,
    param: &Parameter,
    slots: &[Parameter],
    args: &[Term],
    target: &Term,
    ctx: &CheckContext,
    path: &[usize],
    out: &mut Vec<Violation>,
) {
    match ctx.options.mvind {
        MvIndMode::Off => {
            violation(
                out,
                path,
                ViolationCode::MvIndNotAllowed,
                "induction rule not allowed here",
            );
            return;
        }
        MvIndMode::MvLkie => {
            // The arithmetic induction rule is the all-passive special
            // case, so passive parameters are admitted here too.
            let param_ok = matches!(param.kind, ParamKind::Active | ParamKind::Passive);
            let slots_ok = slots
                .iter()
                .all(|s| matches!(s.kind, ParamKind::Internal | ParamKind::Passive));
            if !param_ok || !slots_ok {
                violation(
                    out,
                    path,
                    ViolationCode::MvIndMalformed,
                    "induction parameter must be active or passive, slots internal or passive",
                );
                return;
            }
        }
        MvIndMode::Pra => {
            let kinds_ok = param.kind == ParamKind::Passive
                && slots.iter().all(|s| s.kind == ParamKind::Passive);
            if !kinds_ok {
                violation(
                    out,
                    path,
                    ViolationCode::MvIndMalformed,
                    "induction parameter and slots must be passive in the PRA profile",
                );
                return;
            }
        }
    }
    if slots.len() != args.len() {
        violation(
            out,
            path,
            ViolationCode::MvIndMalformed,
            format!("{} slots but {} instantiation arguments", slots.len(), args.len()),
        );
        return;
    }
    let mut distinct: BTreeSet<&Parameter> = slots.iter().collect();
    distinct.insert(param);
    if distinct.len() != slots.len() + 1 {
        violation(
            out,
            path,
            ViolationCode::MvIndMalformed,
            "induction parameter and slots must be pairwise distinct",
        );
        return;
    }
    let subst_of = |pairs: Vec<(&Parameter, Term)>| {
        let mut s = Subst::new();
        for (p, t) in pairs {
            s.bind_unchecked(SubstKey::Param((*p).clone()), t);
        }
        s
    };
    let succ_inst = subst_of(vec![(param, Term::succ(Term::Param(param.clone())))]);
    let mut base_pairs: Vec<(&Parameter, Term)> = vec![(param, Term::Zero)];
    let mut target_pairs: Vec<(&Parameter, Term)> = vec![(param, target.clone())];
    for (s, a) in slots.iter().zip(args) {
        base_pairs.push((s, a.clone()));
        target_pairs.push((s, a.clone()));
    }
    let f_succ = formula.substitute(&succ_inst);
    let f_base = formula.substitute(&subst_of(base_pairs));
    let f_target = formula.substitute(&subst_of(target_pairs));
    let (f_succ, f_base, f_target) = match (f_succ, f_base, f_target) {
        (Ok(a), Ok(b), Ok(c)) => (a, b, c),
        _ => {
            violation(
                out,
                path,
                ViolationCode::SubstitutionError,
                "induction instantiation captures a bound entity",
            );
            return;
        }
    };
    let p = &node.premises[0].conclusion;
    let (gamma, delta) = match (
        remove_one(&p.antecedent, formula),
        remove_one(&p.succedent, &f_succ),
    ) {
        (Some(g), Some(d)) => (g, d),
        _ => {
            violation(
                out,
                path,
                ViolationCode::PrincipalMismatch,
                format!(
                    "induction premise {} must contain {} on the left and {} on the right",
                    p, formula, f_succ
                ),
            );
            return;
        }
    };
    // Context side condition: the induction parameter and the slots must
    // not occur in the passive context.
    let mentions = |f: &Formula, q: &Parameter| f.free_params(q.kind).contains(q);
    let bad_ctx = gamma
        .iter()
        .chain(delta.iter())
        .any(|f| mentions(f, param) || slots.iter().any(|s| mentions(f, s)));
    if bad_ctx {
        violation(
            out,
            path,
            ViolationCode::IndEigenCondition,
            "induction parameter or slot occurs in the side context",
        );
        return;
    }
    let mut want_ant = vec![f_base];
    want_ant.extend(gamma);
    let mut want_suc = delta;
    want_suc.push(f_target);
    let conc = &node.conclusion;
    if !multiset_eq(&want_ant, &conc.antecedent) || !multiset_eq(&want_suc, &conc.succedent) {
        violation(
            out,
            path,
            ViolationCode::ContextMismatch,
            format!("induction conclusion {} does not match the instantiated premise", conc),
        );
        return;
    }
    if ctx.options.mvind == MvIndMode::Pra {
        let conc_passives = conc.params_of(ParamKind::Passive);
        if conc_passives.contains(param) {
            violation(
                out,
                path,
                ViolationCode::IndEigenCondition,
                format!("PRA induction parameter {} occurs in conclusion", param),
            );
        }
    }
}

/// The four LKS_e schemes. They are checked sort-generically: successor
/// congruence is numeric, function and predicate congruence apply to
/// symbols of either sort.
fn check_scheme(scheme: EqScheme, conc: &Sequent, path: &[usize], out: &mut Vec<Violation>) {
    let ok = match scheme {
        EqScheme::Refl => {
            conc.antecedent.is_empty()
                && conc.succedent.len() == 1
                && matches!(&conc.succedent[0], Formula::Atom(p, args)
                    if p == EQ && args.len() == 2 && args[0] == args[1])
        }
        EqScheme::SuccCong => {
            if conc.antecedent.len() != 1 || conc.succedent.len() != 1 {
                false
            } else {
                match (&conc.antecedent[0], &conc.succedent[0]) {
                    (Formula::Atom(p1, a1), Formula::Atom(p2, a2))
                        if p1 == EQ && p2 == EQ && a1.len() == 2 && a2.len() == 2 =>
                    {
                        a2[0] == Term::succ(a1[0].clone()) && a2[1] == Term::succ(a1[1].clone())
                    }
                    _ => false,
                }
            }
        }
        EqScheme::FnCong => check_fn_cong(conc),
        EqScheme::PredRepl => check_pred_repl(conc),
    };
    if !ok {
        violation(
            out,
            path,
            ViolationCode::BadSchemeInstance,
            format!("{} is not an instance of the {} scheme", conc, scheme.tag()),
        );
    }
}

fn split_eq(f: &Formula) -> Option<(&Term, &Term)> {
    match f {
        Formula::Atom(p, args) if p == EQ && args.len() == 2 => Some((&args[0], &args[1])),
        _ => None,
    }
}

/// `s1=t1, ..., sk=tk |- f(s1..sk, w..) = f(t1..tk, w..)` with k >= 1 and a
/// shared trailing argument vector.
fn check_fn_cong(conc: &Sequent) -> bool {
    if conc.succedent.len() != 1 || conc.antecedent.is_empty() {
        return false;
    }
    let Some((lhs, rhs)) = split_eq(&conc.succedent[0]) else {
        return false;
    };
    let (Term::App(f, largs), Term::App(g, rargs)) = (lhs, rhs) else {
        return false;
    };
    if f != g || largs.len() != rargs.len() {
        return false;
    }
    args_congruent(&conc.antecedent, largs, rargs)
}

/// `s1=t1, ..., sk=tk, R(s..), |- R(t..)`.
fn check_pred_repl(conc: &Sequent) -> bool {
    if conc.succedent.len() != 1 || conc.antecedent.len() < 2 {
        return false;
    }
    let Formula::Atom(rp, rargs) = &conc.succedent[0] else {
        return false;
    };
    let Formula::Atom(lp, largs) = conc.antecedent.last().unwrap() else {
        return false;
    };
    if lp != rp || largs.len() != rargs.len() {
        return false;
    }
    let eqs = &conc.antecedent[..conc.antecedent.len() - 1];
    args_congruent(eqs, largs, rargs)
}

/// The first `k` argument pairs follow the listed equations in order; the
/// remaining arguments agree syntactically.
fn args_congruent(eqs: &[Formula], largs: &[Term], rargs: &[Term]) -> bool {
    let k = eqs.len();
    if k > largs.len() {
        return false;
    }
    for (i, eq) in eqs.iter().enumerate() {
        let Some((s, t)) = split_eq(eq) else {
            return false;
        };
        if &largs[i] != s || &rargs[i] != t {
            return false;
        }
    }
    largs[k..] == rargs[k..]
}

/// Converts the free parameters and variables of an axiom sequent into
/// pattern variables, so instances can be recognized by matching.
fn pattern_of(seq: &Sequent) -> Sequent {
    fn term(t: &Term) -> Term {
        match t {
            Term::Param(p) => Term::PatVar(format!("{}{}", p.kind.prefix(), p.name)),
            Term::Var(v) => Term::PatVar(format!("v:{}", v)),
            Term::Succ(inner) => Term::succ(term(inner)),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(term).collect()),
            other => other.clone(),
        }
    }
    fn formula(f: &Formula) -> Formula {
        match f {
            Formula::Atom(p, args) => Formula::Atom(p.clone(), args.iter().map(term).collect()),
            Formula::Not(g) => Formula::not(formula(g)),
            Formula::And(a, b) => Formula::and(formula(a), formula(b)),
            Formula::Or(a, b) => Formula::or(formula(a), formula(b)),
            Formula::Imp(a, b) => Formula::imp(formula(a), formula(b)),
            // Quantified axioms must match exactly; bound structure is not
            // generalized.
            q @ (Formula::Forall(_, _) | Formula::Exists(_, _)) => q.clone(),
        }
    }
    Sequent::new(
        seq.antecedent.iter().map(formula).collect(),
        seq.succedent.iter().map(formula).collect(),
    )
}

fn match_formula_pattern(pattern: &Formula, subject: &Formula, bindings: &mut Subst) -> bool {
    match (pattern, subject) {
        (Formula::Atom(p, pargs), Formula::Atom(q, sargs)) => {
            p == q
                && pargs.len() == sargs.len()
                && pargs
                    .iter()
                    .zip(sargs)
                    .all(|(pa, sa)| match_term(pa, sa, bindings))
        }
        (Formula::Not(a), Formula::Not(b)) => match_formula_pattern(a, b, bindings),
        (Formula::And(a1, b1), Formula::And(a2, b2))
        | (Formula::Or(a1, b1), Formula::Or(a2, b2))
        | (Formula::Imp(a1, b1), Formula::Imp(a2, b2)) => {
            match_formula_pattern(a1, a2, bindings) && match_formula_pattern(b1, b2, bindings)
        }
        (q1 @ (Formula::Forall(_, _) | Formula::Exists(_, _)), q2) => q1.alpha_eq(q2),
        _ => false,
    }
}

/// Does `subject` arise from the axiom `pattern` by substituting its free
/// parameters and variables?
pub fn is_sequent_instance(pattern: &Sequent, subject: &Sequent) -> bool {
    let pat = pattern_of(pattern);
    if pat.antecedent.len() != subject.antecedent.len()
        || pat.succedent.len() != subject.succedent.len()
    {
        return false;
    }
    fn rec(
        pats: &[&Formula],
        subs: &[&Formula],
        used: &mut Vec<bool>,
        i: usize,
        bindings: &Subst,
        next: &dyn Fn(&Subst) -> bool,
    ) -> bool {
        if i == pats.len() {
            return next(bindings);
        }
        for (j, s) in subs.iter().enumerate() {
            if used[j] {
                continue;
            }
            let mut b = bindings.clone();
            if match_formula_pattern(pats[i], s, &mut b) {
                used[j] = true;
                if rec(pats, subs, used, i + 1, &b, next) {
                    return true;
                }
                used[j] = false;
            }
        }
        false
    }
    let pa: Vec<&Formula> = pat.antecedent.iter().collect();
    let sa: Vec<&Formula> = subject.antecedent.iter().collect();
    let ps: Vec<&Formula> = pat.succedent.iter().collect();
    let ss: Vec<&Formula> = subject.succedent.iter().collect();
    rec(&pa, &sa, &mut vec![false; sa.len()], 0, &Subst::new(), &|b| {
        rec(&ps, &ss, &mut vec![false; ss.len()], 0, b, &|_| true)
    })
}

/// Is the sequent `|- s = t` (or `|- t = s`) an instance of an equation of
/// the theory applied at the root?
pub(crate) fn is_theory_equation_instance(conc: &Sequent, theory: &EqTheory) -> bool {
    if !conc.antecedent.is_empty() || conc.succedent.len() != 1 {
        return false;
    }
    let Some((s, t)) = split_eq(&conc.succedent[0]) else {
        return false;
    };
    for rule in &theory.rules {
        let (Expr::Term(lhs), Expr::Term(rhs)) = (&rule.lhs, &rule.rhs) else {
            continue;
        };
        for (a, b) in [(s, t), (t, s)] {
            let mut bind = Subst::new();
            if match_term(lhs, a, &mut bind) && &bind.apply_term(rhs) == b {
                return true;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::ProofTree;
    use crate::term::numeral;

    fn lk_ctx<'a>(
        theory: &'a EqTheory,
        axioms: &'a AxiomTable,
        signature: &'a Signature,
    ) -> CheckContext<'a> {
        CheckContext::new(theory, axioms, signature, CheckOptions::default())
    }

    // A ground, link-free, E-trivial tree over the empty theory is checked
    // exactly as a plain LK proof.
    #[test]
    fn plain_lk_coincidence_over_the_empty_theory() {
        let p = Formula::Atom("P".into(), vec![numeral(0)]);
        let q = Formula::Atom("Q".into(), vec![numeral(0)]);
        let conj = Formula::and(p.clone(), q.clone());
        let ax_p = ProofTree::leaf(
            Sequent::new(vec![p.clone()], vec![p.clone()]),
            crate::calculus::Rule::Axiom,
        );
        let ax_q = ProofTree::leaf(
            Sequent::new(vec![q.clone()], vec![q.clone()]),
            crate::calculus::Rule::Axiom,
        );
        let and_r = ProofTree::binary(
            Sequent::new(vec![p.clone(), q.clone()], vec![conj.clone()]),
            crate::calculus::Rule::AndR { principal: conj.clone() },
            ax_p,
            ax_q,
        );
        let and_l1 = ProofTree::unary(
            Sequent::new(vec![conj.clone(), q.clone()], vec![conj.clone()]),
            crate::calculus::Rule::AndL1 { principal: conj.clone() },
            and_r,
        );
        let and_l2 = ProofTree::unary(
            Sequent::new(vec![conj.clone(), conj.clone()], vec![conj.clone()]),
            crate::calculus::Rule::AndL2 { principal: conj.clone() },
            and_l1,
        );
        let root = ProofTree::unary(
            Sequent::new(vec![conj.clone()], vec![conj.clone()]),
            crate::calculus::Rule::ContrL { formula: conj.clone() },
            and_l2,
        );
        let empty = EqTheory::new("empty");
        let axioms = AxiomTable::new();
        let signature = Signature::infer(&empty);
        let ctx = lk_ctx(&empty, &axioms, &signature);
        let report = check_derivation(&root, &ctx);
        assert!(report.is_valid(), "{:?}", report.violations);
        assert_eq!(report.kind, ProofKind::Proof);
        assert_eq!(report.activity, Activity::Inactive);

        // Swapping the principal of the projection is rejected.
        let mut broken = root.clone();
        broken.premises[0].rule =
            crate::calculus::Rule::AndL1 { principal: conj.clone() };
        let report = check_derivation(&broken, &ctx);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].code, ViolationCode::PrincipalMismatch);
    }

    #[test]
    fn theory_equation_instances_match_both_directions() {
        let th = crate::rewrite::e_pa();
        let inst = Sequent::from_suc(Formula::eq(
            Term::app("^a", vec![Term::Zero, numeral(3)]),
            numeral(3),
        ));
        assert!(is_theory_equation_instance(&inst, &th));
        let flipped = Sequent::from_suc(Formula::eq(
            numeral(3),
            Term::app("^a", vec![Term::Zero, numeral(3)]),
        ));
        assert!(is_theory_equation_instance(&flipped, &th));
        let wrong = Sequent::from_suc(Formula::eq(
            Term::app("^a", vec![Term::Zero, numeral(3)]),
            numeral(4),
        ));
        assert!(!is_theory_equation_instance(&wrong, &th));
    }

    #[test]
    fn values_are_send_and_sync() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<Term>();
        assert_send_sync::<Formula>();
        assert_send_sync::<Sequent>();
        assert_send_sync::<ProofTree>();
        assert_send_sync::<crate::schema::PSchema>();
        assert_send_sync::<crate::rewrite::EqTheory>();
    }
}
