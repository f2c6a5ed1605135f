//! Unfolding: compiles a schema plus a ground passive substitution into a
//! ground, link-free proof and re-verifies it.
//!
//! Link leaves rewrite by the base rule when their dispatch argument
//! normalizes to the base instance and by the step rule when it normalizes
//! to a successor, binding the recursion parameter to the predecessor.
//! Numeric arguments are E-normalized between steps, with a trivial E
//! inference bridging the normalized instance back to the link's literal
//! sequent. Links into computational sub-schemata become labeled theory
//! axiom leaves unless full expansion is requested.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::calculus::{AxiomTable, ProofTree, Rule, TreeError};
use crate::check::{check_derivation, CheckContext, CheckOptions, CheckReport};
use crate::rewrite::{normalize_term, EqTheory, RewriteError, DEFAULT_FUEL};
use crate::schema::{computational_targets, validate_schema, Component, ComponentShape, PSchema};
use crate::sequent::Sequent;
use crate::sig::Signature;
use crate::subst::{Subst, SubstKey};
use crate::term::{numeral, ParamKind, Term};

/// Default step budget for unfolding.
pub const UNFOLD_FUEL: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkRuleKind {
    Base,
    Step,
}

/// One of the two rewrite rules a component contributes: the left side is
/// the link pattern, the right side is the base or step derivation.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkRule {
    pub symbol: String,
    pub kind: LinkRuleKind,
    pub pattern: Term,
}

impl fmt::Display for LinkRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rhs = match self.kind {
            LinkRuleKind::Base => "pi",
            LinkRuleKind::Step => "nu",
        };
        write!(f, "{} -> {}[{}]", self.pattern, rhs, self.symbol)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinkRuleSet {
    pub rules: Vec<LinkRule>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("schema has no components")]
    EmptySchema,
    #[error("schema does not validate: {0}")]
    SchemaInvalid(String),
    #[error("substitution misses passive parameter(s): {0}")]
    SubstIncomplete(String),
    #[error("end sequent has the active parameter {0}; give an instance value")]
    NeedsActiveArgument(String),
    #[error("link argument {0} normalizes to neither the base instance nor a successor")]
    StuckLink(String),
    #[error("no normal form within {fuel} expansion steps")]
    FuelExhausted { fuel: u64 },
    #[error("{0}")]
    Tree(#[from] TreeError),
    #[error("{0}")]
    Rewrite(#[from] RewriteError),
}

/// The rewrite rules for links: one base and one step rule per component,
/// with the component parameters abstracted in signature order.
pub fn link_rules(schema: &PSchema) -> Result<LinkRuleSet, EvalError> {
    if schema.components.is_empty() {
        return Err(EvalError::EmptySchema);
    }
    let mut rules = Vec::new();
    for c in &schema.components {
        let head = format!("^{}", c.symbol);
        let formals: Vec<Term> = c.formals.iter().map(|f| f.as_term()).collect();
        let mut base_args = vec![c.base_arg.clone()];
        base_args.extend(formals.clone());
        let mut step_args = vec![Term::succ(Term::Param(c.dispatch.clone()))];
        step_args.extend(formals);
        rules.push(LinkRule {
            symbol: c.symbol.clone(),
            kind: LinkRuleKind::Base,
            pattern: Term::App(head.clone(), base_args),
        });
        rules.push(LinkRule {
            symbol: c.symbol.clone(),
            kind: LinkRuleKind::Step,
            pattern: Term::App(head, step_args),
        });
    }
    Ok(LinkRuleSet { rules })
}

#[derive(Debug, Clone)]
pub struct UnfoldOptions {
    pub fuel: u64,
    pub seed: u64,
    /// Expand links into computational sub-schemata instead of cutting
    /// them into theory axioms.
    pub expand_computational: bool,
    /// Instance value for the active parameter of an active end sequent.
    pub active_arg: Option<u64>,
}

impl Default for UnfoldOptions {
    fn default() -> Self {
        UnfoldOptions {
            fuel: UNFOLD_FUEL,
            seed: 0,
            expand_computational: false,
            active_arg: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct UnfoldReport {
    pub tree: ProofTree,
    /// Link expansions performed.
    pub steps: u64,
    /// Boundary leaves introduced for computational sub-schemata: the
    /// theory T the resulting proof is over.
    pub theory_leaves: Vec<(String, Sequent)>,
    pub check: CheckReport,
    /// The schema's end sequent under the substitution.
    pub expected_end: Sequent,
}

impl UnfoldReport {
    pub fn proof_size(&self) -> usize {
        self.tree.proof_size()
    }
}

/// Unfolds a valid schema at a ground passive substitution.
pub fn unfold(
    schema: &PSchema,
    sigma: &Subst,
    theory: &EqTheory,
    axioms: &AxiomTable,
    options: &UnfoldOptions,
) -> Result<UnfoldReport, EvalError> {
    if schema.components.is_empty() {
        return Err(EvalError::EmptySchema);
    }
    let report = validate_schema(schema, theory, axioms, options.fuel.max(DEFAULT_FUEL));
    if !report.is_valid() {
        let mut msgs: Vec<String> = report.issues.iter().map(|i| i.to_string()).collect();
        for (sym, b, s) in &report.component_reports {
            for v in b.violations.iter().chain(s.violations.iter()) {
                msgs.push(format!("{}: {}", sym, v));
            }
        }
        return Err(EvalError::SchemaInvalid(msgs.join("; ")));
    }

    // Check coverage: every passive parameter a component uses freely and
    // does not receive through its signature must be grounded.
    let mut missing = BTreeSet::new();
    for c in &schema.components {
        let own: BTreeSet<String> = signature_passives(c);
        for tree in [&c.base, &c.step] {
            for p in tree.params_of(ParamKind::Passive) {
                if !own.contains(&p.name) && sigma.get_param(&p).is_none() {
                    missing.insert(p.name.clone());
                }
            }
        }
    }
    if !missing.is_empty() {
        let names: Vec<String> = missing.into_iter().collect();
        return Err(EvalError::SubstIncomplete(names.join(", ")));
    }

    // Ground each component's derivations over the passives outside its
    // own signature.
    let mut grounded: Vec<(String, Component)> = Vec::new();
    for c in &schema.components {
        let own = signature_passives(c);
        let restricted: Subst = sigma
            .iter()
            .filter(|(k, _)| match k {
                SubstKey::Param(p) => {
                    p.kind == ParamKind::Passive && !own.contains(&p.name)
                }
                _ => false,
            })
            .map(|(k, t)| (k.clone(), t.clone()))
            .collect();
        let mut gc = c.clone();
        gc.base = c.base.substitute(&restricted)?;
        gc.step = c.step.substitute(&restricted)?;
        grounded.push((c.symbol.clone(), gc));
    }
    let component = |symbol: &str| -> &Component {
        &grounded.iter().find(|(s, _)| s == symbol).expect("validated symbol").1
    };

    // Entry instance.
    let entry = schema.entry().expect("non-empty");
    let entry_dispatch = match entry.dispatch.kind {
        ParamKind::Active => match options.active_arg {
            Some(k) => numeral(k),
            None => return Err(EvalError::NeedsActiveArgument(entry.dispatch.to_string())),
        },
        _ => match sigma.get_param(&entry.dispatch) {
            Some(t) => t.clone(),
            None => {
                // A dispatch parameter that occurs nowhere in the family is
                // vacuous; any instance works, so take zero.
                let vacuous = entry
                    .es_family()
                    .map(|f| !f.params_of(ParamKind::Passive).contains(&entry.dispatch))
                    .unwrap_or(false);
                if vacuous {
                    Term::Zero
                } else {
                    return Err(EvalError::SubstIncomplete(entry.dispatch.to_string()));
                }
            }
        },
    };
    let mut entry_args = Vec::new();
    for f in &entry.formals {
        match f {
            crate::schema::Formal::Param(p) if p.kind == ParamKind::Passive => {
                match sigma.get_param(p) {
                    Some(t) => entry_args.push(t.clone()),
                    None => return Err(EvalError::SubstIncomplete(p.to_string())),
                }
            }
            other => {
                return Err(EvalError::SubstIncomplete(format!(
                    "entry component carries non-passive slot {}",
                    other
                )));
            }
        }
    }
    let entry_sequent = component(&entry.symbol)
        .instance(&entry_dispatch, &entry_args)
        .ok_or_else(|| EvalError::SchemaInvalid("entry instance".into()))?;
    let mut tree = ProofTree::leaf(
        entry_sequent,
        Rule::Link { target: entry.symbol.clone(), args: {
            let mut a = vec![entry_dispatch];
            a.extend(entry_args);
            a
        } },
    );

    let marked = if options.expand_computational {
        BTreeSet::new()
    } else {
        computational_targets(schema)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut steps: u64 = 0;
    let mut theory_leaves: Vec<(String, Sequent)> = Vec::new();

    loop {
        let mut paths: Vec<Vec<usize>> = Vec::new();
        tree.walk(&mut |node, path| {
            if matches!(node.rule, Rule::Link { .. }) {
                paths.push(path.to_vec());
            }
        });
        if paths.is_empty() {
            break;
        }
        paths.shuffle(&mut rng);
        let path = &paths[0];
        steps += 1;
        if steps > options.fuel {
            return Err(EvalError::FuelExhausted { fuel: options.fuel });
        }
        let node = node_at_mut(&mut tree, path);
        let (target, args) = match &node.rule {
            Rule::Link { target, args } => (target.clone(), args.clone()),
            _ => unreachable!("collected link paths"),
        };
        if marked.contains(&target) {
            let label = format!("sub:{}", target);
            theory_leaves.push((label.clone(), node.conclusion.clone()));
            node.rule = Rule::TheoryAxiom { label };
            continue;
        }
        let replacement =
            expand_link(component(&target), &args, theory, options.fuel, &node.conclusion)?;
        *node = replacement;
    }

    theory_leaves.sort();
    theory_leaves.dedup();

    // Re-check: links are gone; boundary labels check against a table
    // extended with the recorded sequents.
    let mut table = axioms.clone();
    for (label, seq) in &theory_leaves {
        table.insert(label.clone(), seq.clone());
    }
    let signature = Signature::infer(theory);
    let ctx = CheckContext::new(
        theory,
        &table,
        &signature,
        CheckOptions { allow_links: false, fuel: options.fuel, ..CheckOptions::default() },
    );
    let check = check_derivation(&tree, &ctx);

    let expected_end = tree_expected_end(schema, sigma, options)?;
    Ok(UnfoldReport { tree, steps, theory_leaves, check, expected_end })
}

fn signature_passives(c: &Component) -> BTreeSet<String> {
    let mut own = BTreeSet::new();
    if c.dispatch.kind == ParamKind::Passive {
        own.insert(c.dispatch.name.clone());
    }
    for f in &c.formals {
        if let crate::schema::Formal::Param(p) = f {
            if p.kind == ParamKind::Passive {
                own.insert(p.name.clone());
            }
        }
    }
    own
}

fn tree_expected_end(
    schema: &PSchema,
    sigma: &Subst,
    options: &UnfoldOptions,
) -> Result<Sequent, EvalError> {
    let entry = schema.entry().expect("non-empty");
    let family = entry
        .es_family()
        .ok_or_else(|| EvalError::SchemaInvalid("entry family".into()))?;
    let mut s = sigma.clone();
    if entry.dispatch.kind == ParamKind::Active {
        if let Some(k) = options.active_arg {
            s.bind_unchecked(SubstKey::Param(entry.dispatch.clone()), numeral(k));
        }
    }
    family.substitute(&s).map_err(|e| EvalError::Tree(TreeError::Term(e)))
}

/// Replaces a link leaf by the matching branch of its target component,
/// normalizing arguments first and bridging with a trivial E step when
/// normalization changed the instance.
fn expand_link(
    comp: &Component,
    args: &[Term],
    theory: &EqTheory,
    fuel: u64,
    literal_sequent: &Sequent,
) -> Result<ProofTree, EvalError> {
    let mut norm_args = Vec::with_capacity(args.len());
    for a in args {
        if a.is_ground() {
            norm_args.push(normalize_term(a, theory, fuel)?);
        } else {
            norm_args.push(a.clone());
        }
    }
    let (dispatch_arg, rest) = norm_args.split_first().expect("dispatch argument");
    if !dispatch_arg.is_ground() {
        return Err(EvalError::StuckLink(dispatch_arg.to_string()));
    }

    let mut binding = Subst::new();
    for (f, a) in comp.formals.iter().zip(rest) {
        binding.bind_unchecked(f.subst_key(), a.clone());
    }
    let branch = if *dispatch_arg == comp.base_arg {
        comp.base.clone()
    } else {
        match dispatch_arg {
            Term::Succ(pred) => {
                let bound = match comp.shape() {
                    ComponentShape::Successor => pred.as_ref().clone(),
                    ComponentShape::General => dispatch_arg.clone(),
                };
                binding.bind_unchecked(SubstKey::Param(comp.dispatch.clone()), bound);
                comp.step.clone()
            }
            other => return Err(EvalError::StuckLink(other.to_string())),
        }
    };
    let expanded = branch.substitute(&binding)?;
    if expanded.conclusion.multiset_eq(literal_sequent) {
        Ok(expanded)
    } else {
        // The literal link sequent mentioned unnormalized arguments; keep
        // it reachable through a trivial E inference.
        Ok(ProofTree::unary(literal_sequent.clone(), Rule::ERule, expanded))
    }
}

fn node_at_mut<'a>(tree: &'a mut ProofTree, path: &[usize]) -> &'a mut ProofTree {
    let mut cur = tree;
    for &i in path {
        cur = &mut cur.premises[i];
    }
    cur
}

/// Re-checks an unfolded proof: valid, link-free, and ending in the
/// schema's instantiated end sequent up to E-normal form.
pub fn verify_unfolded(
    report: &UnfoldReport,
    theory: &EqTheory,
    axioms: &AxiomTable,
    fuel: u64,
) -> bool {
    if report.tree.has_links() {
        return false;
    }
    let mut table = axioms.clone();
    for (label, seq) in &report.theory_leaves {
        table.insert(label.clone(), seq.clone());
    }
    let signature = Signature::infer(theory);
    let ctx = CheckContext::new(
        theory,
        &table,
        &signature,
        CheckOptions { allow_links: false, fuel, ..CheckOptions::default() },
    );
    let check = check_derivation(&report.tree, &ctx);
    if !check.is_valid() {
        return false;
    }
    sequents_e_equal(report.tree.end_sequent(), &report.expected_end, theory, fuel)
}

/// Multiset equality after E-normalizing every formula.
pub fn sequents_e_equal(a: &Sequent, b: &Sequent, theory: &EqTheory, fuel: u64) -> bool {
    let norm = |s: &Sequent| -> Option<Sequent> {
        let mut ant = Vec::new();
        for f in &s.antecedent {
            ant.push(crate::rewrite::normalize_formula(f, theory, fuel).ok()?);
        }
        let mut suc = Vec::new();
        for f in &s.succedent {
            suc.push(crate::rewrite::normalize_formula(f, theory, fuel).ok()?);
        }
        Some(Sequent::new(ant, suc))
    };
    match (norm(a), norm(b)) {
        (Some(na), Some(nb)) => na.multiset_eq(&nb),
        _ => false,
    }
}

/// Convenience wrapper: ground numeral dispatch for every passive of the
/// schema from `(name, value)` pairs.
pub fn ground_subst(pairs: &[(&str, u64)]) -> Subst {
    Subst::ground_numeric(pairs.iter().map(|(n, v)| ((*n).to_owned(), *v)).collect())
}
