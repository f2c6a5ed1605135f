//! Translation passes: schemata to explicit-induction derivations and
//! back, elimination of the E rule over the arithmetic base, renaming into
//! the PRA profile, and quantification of passive parameters.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::calculus::{AxiomTable, Eigen, EqScheme, ProofTree, Rule, TreeError};
use crate::check::{check_derivation, CheckContext, CheckOptions, MvIndMode};
use crate::formula::{Binder, Formula};
use crate::rewrite::{apply_rule_once, e_pa, EqTheory, Expr};
use crate::schema::{
    computational_targets, validate_schema, Component, ComponentShape, Formal, PSchema,
};
use crate::sequent::{remove_one, Sequent};
use crate::sig::Signature;
use crate::subst::{Subst, SubstKey};
use crate::term::{ParamKind, Parameter, Term};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TranslateError {
    #[error("schema is not strict: {0}")]
    NotStrict(String),
    #[error("schema does not validate: {0}")]
    SchemaInvalid(String),
    #[error("derivation does not validate: {0}")]
    DerivationInvalid(String),
    #[error("a sequent carries more than one active parameter: {0}")]
    MultipleActive(String),
    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),
    #[error("E step not covered by the arithmetic base: {0}")]
    NonPaRule(String),
    #[error("fresh passive namespace exhausted: {0}")]
    FreshNameClash(String),
    #[error("{0}")]
    Tree(#[from] TreeError),
}

impl From<crate::term::TermError> for TranslateError {
    fn from(e: crate::term::TermError) -> Self {
        TranslateError::Tree(TreeError::Term(e))
    }
}

/// Output of a schema translation; boundary axioms appear when links into
/// computational sub-schemata were cut into theory leaves.
#[derive(Debug, Clone)]
pub struct Translation {
    pub tree: ProofTree,
    pub boundary_axioms: Vec<(String, Sequent)>,
}

// ----- schema -> explicit induction -----

/// Replaces each component's link pair by one induction inference whose
/// premise is the step derivation with the self-link axiomatized, cutting
/// in the base derivation.
pub fn schema_to_mvlkie(
    schema: &PSchema,
    theory: &EqTheory,
    axioms: &AxiomTable,
    fuel: u64,
) -> Result<Translation, TranslateError> {
    let report = validate_schema(schema, theory, axioms, fuel);
    if !report.is_valid() {
        let msgs: Vec<String> = report.issues.iter().map(|i| i.to_string()).collect();
        return Err(TranslateError::SchemaInvalid(msgs.join("; ")));
    }
    if !report.classes.strict_links {
        return Err(TranslateError::NotStrict(
            "a link instantiates away a passive parameter of its target's end sequent".into(),
        ));
    }
    let entry = schema.entry().expect("validated non-empty");
    let mut tx = SchemaTx {
        schema,
        marked: computational_targets(schema),
        boundary: Vec::new(),
    };
    let dispatch_term = Term::Param(entry.dispatch.clone());
    let formal_terms: Vec<Term> = entry.formals.iter().map(Formal::as_term).collect();
    let tree = tx.component_proof(entry, &dispatch_term, &formal_terms)?;
    tx.boundary.sort();
    tx.boundary.dedup();
    Ok(Translation { tree, boundary_axioms: tx.boundary })
}

struct SchemaTx<'a> {
    schema: &'a PSchema,
    marked: BTreeSet<String>,
    boundary: Vec<(String, Sequent)>,
}

impl<'a> SchemaTx<'a> {
    /// A derivation of the component's family at the given dispatch term
    /// and argument vector, with links resolved.
    fn component_proof(
        &mut self,
        c: &Component,
        dispatch: &Term,
        args: &[Term],
    ) -> Result<ProofTree, TranslateError> {
        // Passive and individual slots are instantiated directly; internal
        // slots become induction slots.
        let mut pre = Subst::new();
        let mut slots: Vec<Parameter> = Vec::new();
        let mut slot_args: Vec<Term> = Vec::new();
        for (f, a) in c.formals.iter().zip(args) {
            match f {
                Formal::Param(p) if p.kind == ParamKind::Internal => {
                    slots.push(p.clone());
                    slot_args.push(a.clone());
                }
                other => pre.bind_unchecked(other.subst_key(), a.clone()),
            }
        }
        let step = c.step.substitute(&pre)?;
        let base = c.base.substitute(&pre)?;
        let family = c
            .es_family()
            .expect("validated component")
            .substitute(&pre)?;

        if c.shape() == ComponentShape::General {
            // Wrapper: inline the step at the dispatch instance; the base
            // is the grounded copy and is subsumed.
            let mut s = Subst::new();
            s.bind_unchecked(SubstKey::Param(c.dispatch.clone()), dispatch.clone());
            let instance = step.substitute(&s)?;
            return self.inline_links(&instance, None);
        }

        // Successor shape: find the distinguished succedent formula.
        let pivot = distinguished_formula(&family, &c.dispatch)?;
        let gamma = family.antecedent.clone();
        let delta = remove_one(&family.succedent, &pivot)
            .expect("distinguished formula came from the succedent");
        for g in gamma.iter().chain(delta.iter()) {
            for p in &slots {
                if g.free_params(ParamKind::Internal).contains(p) {
                    return Err(TranslateError::UnsupportedShape(format!(
                        "context formula {} mentions the internal slot {}",
                        g, p
                    )));
                }
            }
        }
        if c.base_arg != Term::Zero {
            return Err(TranslateError::UnsupportedShape(format!(
                "induction base instance must be 0, component {} uses {}",
                c.symbol, c.base_arg
            )));
        }

        // Premise: step derivation with cross links inlined and self links
        // replaced by axioms on the pivot, threading the hypothesis down.
        let (threaded, count) = self.transform_step(&step, c, &pivot, &gamma, &delta)?;
        let mut premise = threaded;
        if count == 0 {
            let mut ant = vec![pivot.clone()];
            ant.extend(premise.conclusion.antecedent.clone());
            let conclusion = Sequent::new(ant, premise.conclusion.succedent.clone());
            premise = ProofTree::unary(conclusion, Rule::WeakL { formula: pivot.clone() }, premise);
        }
        for _ in 1..count.max(1) {
            let ant = remove_one(&premise.conclusion.antecedent, &pivot)
                .expect("threaded hypothesis present");
            let conclusion = Sequent::new(ant, premise.conclusion.succedent.clone());
            premise =
                ProofTree::unary(conclusion, Rule::ContrL { formula: pivot.clone() }, premise);
        }

        // The induction inference.
        let rule = Rule::MvInd {
            formula: pivot.clone(),
            param: c.dispatch.clone(),
            slots: slots.clone(),
            args: slot_args.clone(),
            target: dispatch.clone(),
        };
        let mut inst_base = Subst::new();
        let mut inst_target = Subst::new();
        inst_base.bind_unchecked(SubstKey::Param(c.dispatch.clone()), Term::Zero);
        inst_target.bind_unchecked(SubstKey::Param(c.dispatch.clone()), dispatch.clone());
        for (p, a) in slots.iter().zip(&slot_args) {
            inst_base.bind_unchecked(SubstKey::Param(p.clone()), a.clone());
            inst_target.bind_unchecked(SubstKey::Param(p.clone()), a.clone());
        }
        let pivot_base = pivot.substitute(&inst_base)?;
        let pivot_target = pivot.substitute(&inst_target)?;
        let mut ind_ant = vec![pivot_base.clone()];
        ind_ant.extend(gamma.clone());
        let mut ind_suc = delta.clone();
        ind_suc.push(pivot_target.clone());
        let ind = ProofTree::unary(Sequent::new(ind_ant, ind_suc), rule, premise);

        // Cut in the base derivation at the slot instantiation.
        let mut slot_subst = Subst::new();
        for (p, a) in slots.iter().zip(&slot_args) {
            slot_subst.bind_unchecked(SubstKey::Param(p.clone()), a.clone());
        }
        let base_inst = self.inline_links(&base.substitute(&slot_subst)?, None)?;
        let mut cut_ant = base_inst.conclusion.antecedent.clone();
        cut_ant.extend(gamma.iter().cloned());
        let mut cut_suc = remove_one(&base_inst.conclusion.succedent, &pivot_base)
            .ok_or_else(|| {
                TranslateError::UnsupportedShape(format!(
                    "base derivation does not prove the pivot instance {}",
                    pivot_base
                ))
            })?;
        cut_suc.extend(delta.iter().cloned());
        cut_suc.push(pivot_target.clone());
        let mut tree = ProofTree::binary(
            Sequent::new(cut_ant, cut_suc),
            Rule::Cut { formula: pivot_base },
            base_inst,
            ind,
        );

        // Contract the duplicated context back to the family instance.
        let target_seq = {
            let mut s = Subst::new();
            s.bind_unchecked(SubstKey::Param(c.dispatch.clone()), dispatch.clone());
            for (p, a) in slots.iter().zip(&slot_args) {
                s.bind_unchecked(SubstKey::Param(p.clone()), a.clone());
            }
            family.substitute(&s)?
        };
        for g in &gamma {
            if tree.conclusion.antecedent.len() > target_seq.antecedent.len() {
                let ant = match remove_one(&tree.conclusion.antecedent, g) {
                    Some(a) => a,
                    None => continue,
                };
                let conclusion = Sequent::new(ant, tree.conclusion.succedent.clone());
                tree = ProofTree::unary(conclusion, Rule::ContrL { formula: g.clone() }, tree);
            }
        }
        for d in &delta {
            if tree.conclusion.succedent.len() > target_seq.succedent.len() {
                let suc = match remove_one(&tree.conclusion.succedent, d) {
                    Some(s) => s,
                    None => continue,
                };
                let conclusion = Sequent::new(tree.conclusion.antecedent.clone(), suc);
                tree = ProofTree::unary(conclusion, Rule::ContrR { formula: d.clone() }, tree);
            }
        }
        Ok(tree)
    }

    /// Inlines every cross link; `own` carries the enclosing component when
    /// self links must be left alone (never the case here: callers pass
    /// `None` for trees that have no self links left).
    fn inline_links(
        &mut self,
        tree: &ProofTree,
        own: Option<&str>,
    ) -> Result<ProofTree, TranslateError> {
        if let Rule::Link { target, args } = &tree.rule {
            if Some(target.as_str()) != own {
                return self.link_proof(target, args, &tree.conclusion);
            }
        }
        let mut premises = Vec::with_capacity(tree.premises.len());
        for p in &tree.premises {
            premises.push(self.inline_links(p, own)?);
        }
        Ok(ProofTree {
            conclusion: tree.conclusion.clone(),
            rule: tree.rule.clone(),
            premises,
        })
    }

    fn link_proof(
        &mut self,
        target: &str,
        args: &[Term],
        sequent: &Sequent,
    ) -> Result<ProofTree, TranslateError> {
        if self.marked.contains(target) {
            let label = format!("sub:{}", target);
            self.boundary.push((label.clone(), sequent.clone()));
            return Ok(ProofTree::leaf(sequent.clone(), Rule::TheoryAxiom { label }));
        }
        let comp = self
            .schema
            .component(target)
            .expect("validated link target");
        let (dispatch, rest) = args.split_first().expect("validated arity");
        self.component_proof(comp, dispatch, rest)
    }

    /// Rebuilds the step derivation: cross links inlined, self links
    /// replaced by an axiom on the pivot plus weakenings, and the
    /// hypothesis threaded down through every ancestor. Returns the number
    /// of replaced self links.
    fn transform_step(
        &mut self,
        tree: &ProofTree,
        c: &Component,
        pivot: &Formula,
        gamma: &[Formula],
        delta: &[Formula],
    ) -> Result<(ProofTree, usize), TranslateError> {
        if let Rule::Link { target, args } = &tree.rule {
            if target == &c.symbol {
                let mut node = ProofTree::leaf(
                    Sequent::new(vec![pivot.clone()], vec![pivot.clone()]),
                    Rule::Axiom,
                );
                for g in gamma {
                    let mut ant = vec![g.clone()];
                    ant.extend(node.conclusion.antecedent.clone());
                    let conclusion = Sequent::new(ant, node.conclusion.succedent.clone());
                    node = ProofTree::unary(conclusion, Rule::WeakL { formula: g.clone() }, node);
                }
                for d in delta {
                    let mut suc = node.conclusion.succedent.clone();
                    suc.push(d.clone());
                    let conclusion = Sequent::new(node.conclusion.antecedent.clone(), suc);
                    node = ProofTree::unary(conclusion, Rule::WeakR { formula: d.clone() }, node);
                }
                return Ok((node, 1));
            }
            let inlined = self.link_proof(target, args, &tree.conclusion)?;
            return Ok((inlined, 0));
        }
        let mut premises = Vec::with_capacity(tree.premises.len());
        let mut count = 0usize;
        for p in &tree.premises {
            let (t, k) = self.transform_step(p, c, pivot, gamma, delta)?;
            premises.push(t);
            count += k;
        }
        let mut ant = vec![pivot.clone(); count];
        ant.extend(tree.conclusion.antecedent.clone());
        let conclusion = Sequent::new(ant, tree.conclusion.succedent.clone());
        Ok((
            ProofTree { conclusion, rule: tree.rule.clone(), premises },
            count,
        ))
    }
}

/// The unique succedent formula carrying the dispatch parameter; for a
/// constant family, the single succedent formula.
fn distinguished_formula(
    family: &Sequent,
    dispatch: &Parameter,
) -> Result<Formula, TranslateError> {
    for f in &family.antecedent {
        if f.free_params(dispatch.kind).contains(dispatch) {
            return Err(TranslateError::UnsupportedShape(format!(
                "antecedent formula {} mentions the recursion parameter",
                f
            )));
        }
    }
    let carriers: Vec<&Formula> = family
        .succedent
        .iter()
        .filter(|f| f.free_params(dispatch.kind).contains(dispatch))
        .collect();
    match carriers.len() {
        1 => Ok(carriers[0].clone()),
        0 if family.succedent.len() == 1 => Ok(family.succedent[0].clone()),
        0 => Err(TranslateError::UnsupportedShape(
            "constant family with a non-singleton succedent".into(),
        )),
        _ => Err(TranslateError::UnsupportedShape(
            "more than one succedent formula carries the recursion parameter".into(),
        )),
    }
}

// ----- explicit induction -> schema -----

/// Builds a schema from a strict derivation: each induction inference
/// becomes a component whose step cuts the self link against the
/// transformed premise; the part below the topmost inductions becomes the
/// entry component.
pub fn mvlkie_to_schema(
    tree: &ProofTree,
    theory: &EqTheory,
    axioms: &AxiomTable,
    name: &str,
    fuel: u64,
) -> Result<PSchema, TranslateError> {
    let signature = Signature::infer(theory);
    let ctx = CheckContext::new(
        theory,
        axioms,
        &signature,
        CheckOptions {
            allow_links: false,
            mvind: MvIndMode::MvLkie,
            fuel,
            ..CheckOptions::default()
        },
    );
    let report = check_derivation(tree, &ctx);
    if !report.is_valid() {
        let msgs: Vec<String> =
            report.violations.iter().map(|v| v.to_string()).collect();
        let text = msgs.join("; ");
        if text.contains("MultipleActiveParams") {
            return Err(TranslateError::MultipleActive(text));
        }
        return Err(TranslateError::DerivationInvalid(text));
    }
    // Strictness: every passive used anywhere occurs in the end sequent.
    let es_passives = tree.end_sequent().params_of(ParamKind::Passive);
    let used = tree.params_of(ParamKind::Passive);
    let missing: Vec<String> = used
        .difference(&es_passives)
        .map(|p| p.name.clone())
        .collect();
    if !missing.is_empty() {
        return Err(TranslateError::NotStrict(format!(
            "passive parameter(s) {} do not occur in the end sequent",
            missing.join(", ")
        )));
    }

    let mut builder = SchemaBuilder {
        components: Vec::new(),
        order: Vec::new(),
        next: 1,
    };
    let entry_step = builder.strip(tree, "w")?;
    // The entry wrapper dispatches on a fresh passive parameter that
    // occurs nowhere, so base and step coincide.
    let fresh = fresh_passive_name(&used, "u");
    let entry = Component {
        symbol: "w".into(),
        dispatch: Parameter::passive(fresh),
        formals: Vec::new(),
        base_arg: Term::Zero,
        base: entry_step.clone(),
        step: entry_step,
    };
    let mut components = vec![entry];
    components.extend(builder.components);
    let passive_ns = es_passives.into_iter().map(|p| p.name).collect();
    Ok(PSchema {
        name: name.into(),
        passive_ns,
        components,
        order: builder.order,
    })
}

struct SchemaBuilder {
    components: Vec<Component>,
    order: Vec<(String, String)>,
    next: usize,
}

impl SchemaBuilder {
    /// Replaces each topmost induction node in the tree by a link to a
    /// freshly built component; `parent` receives the order edges.
    fn strip(&mut self, tree: &ProofTree, parent: &str) -> Result<ProofTree, TranslateError> {
        if let Rule::MvInd { formula, param, slots, args, target } = &tree.rule {
            let symbol = format!("c{}", self.next);
            self.next += 1;
            self.order.push((parent.to_owned(), symbol.clone()));

            let premise = &tree.premises[0];
            // Family: F(0, m..), Gamma |- Delta, F(n, m..).
            let f_at = |t: Term| -> Result<Formula, TranslateError> {
                let mut s = Subst::new();
                s.bind_unchecked(SubstKey::Param(param.clone()), t);
                Ok(formula.substitute(&s)?)
            };
            let f_zero = f_at(Term::Zero)?;
            let f_n = formula.clone();
            let f_succ = f_at(Term::succ(Term::Param(param.clone())))?;
            let gamma = remove_one(&premise.conclusion.antecedent, &f_n)
                .expect("checked induction premise");
            let delta = remove_one(&premise.conclusion.succedent, &f_succ)
                .expect("checked induction premise");

            // Base: F(0,m..), Gamma |- Delta, F(0,m..).
            let mut base = ProofTree::leaf(
                Sequent::new(vec![f_zero.clone()], vec![f_zero.clone()]),
                Rule::Axiom,
            );
            for g in &gamma {
                let mut ant = vec![g.clone()];
                ant.extend(base.conclusion.antecedent.clone());
                let conclusion = Sequent::new(ant, base.conclusion.succedent.clone());
                base = ProofTree::unary(conclusion, Rule::WeakL { formula: g.clone() }, base);
            }
            for d in &delta {
                let mut suc = base.conclusion.succedent.clone();
                suc.push(d.clone());
                let conclusion = Sequent::new(base.conclusion.antecedent.clone(), suc);
                base = ProofTree::unary(conclusion, Rule::WeakR { formula: d.clone() }, base);
            }

            // Step: cut the self link against the transformed premise.
            let inner = self.strip(premise, &symbol)?;
            let mut link_args = vec![Term::Param(param.clone())];
            link_args.extend(slots.iter().map(|p| Term::Param(p.clone())));
            let mut link_ant = vec![f_zero.clone()];
            link_ant.extend(gamma.clone());
            let mut link_suc = delta.clone();
            link_suc.push(f_n.clone());
            let link = ProofTree::leaf(
                Sequent::new(link_ant, link_suc),
                Rule::Link { target: symbol.clone(), args: link_args },
            );
            let mut cut_ant = vec![f_zero.clone()];
            cut_ant.extend(gamma.clone());
            cut_ant.extend(gamma.clone());
            let mut cut_suc = delta.clone();
            cut_suc.extend(delta.clone());
            cut_suc.push(f_succ.clone());
            let mut step = ProofTree::binary(
                Sequent::new(cut_ant, cut_suc),
                Rule::Cut { formula: f_n.clone() },
                link,
                inner,
            );
            for g in &gamma {
                let ant = remove_one(&step.conclusion.antecedent, g)
                    .expect("duplicated context");
                let conclusion = Sequent::new(ant, step.conclusion.succedent.clone());
                step = ProofTree::unary(conclusion, Rule::ContrL { formula: g.clone() }, step);
            }
            for d in &delta {
                let suc = remove_one(&step.conclusion.succedent, d)
                    .expect("duplicated context");
                let conclusion = Sequent::new(step.conclusion.antecedent.clone(), suc);
                step = ProofTree::unary(conclusion, Rule::ContrR { formula: d.clone() }, step);
            }

            self.components.push(Component {
                symbol: symbol.clone(),
                dispatch: param.clone(),
                formals: slots.iter().map(|p| Formal::Param(p.clone())).collect(),
                base_arg: Term::Zero,
                base,
                step,
            });

            // The original node becomes a link at the instantiation.
            let mut args_inst = vec![target.clone()];
            args_inst.extend(args.clone());
            return Ok(ProofTree::leaf(
                tree.conclusion.clone(),
                Rule::Link { target: symbol, args: args_inst },
            ));
        }
        let mut premises = Vec::with_capacity(tree.premises.len());
        for p in &tree.premises {
            premises.push(self.strip(p, parent)?);
        }
        Ok(ProofTree {
            conclusion: tree.conclusion.clone(),
            rule: tree.rule.clone(),
            premises,
        })
    }
}

fn fresh_passive_name(used: &BTreeSet<Parameter>, stem: &str) -> String {
    let names: BTreeSet<&str> = used.iter().map(|p| p.name.as_str()).collect();
    if !names.contains(stem) {
        return stem.to_owned();
    }
    let mut i = 1usize;
    loop {
        let cand = format!("{}{}", stem, i);
        if !names.contains(cand.as_str()) {
            return cand;
        }
        i += 1;
    }
}

// ----- E elimination -----

/// The arithmetic base: the equations of E_PA used as axiom leaves,
/// together with the four equational axiom schemes.
#[derive(Debug, Clone)]
pub struct AxPaBase {
    pub theory: EqTheory,
}

impl AxPaBase {
    pub fn new() -> Self {
        AxPaBase { theory: e_pa() }
    }
}

impl Default for AxPaBase {
    fn default() -> Self {
        Self::new()
    }
}

/// Replaces every E inference by cuts against axiom instances and
/// congruence-scheme leaves. The output is E-free.
pub fn eliminate_e_rule(tree: &ProofTree, base: &AxPaBase) -> Result<ProofTree, TranslateError> {
    let mut premises = Vec::with_capacity(tree.premises.len());
    for p in &tree.premises {
        premises.push(eliminate_e_rule(p, base)?);
    }
    if !matches!(tree.rule, Rule::ERule) {
        return Ok(ProofTree {
            conclusion: tree.conclusion.clone(),
            rule: tree.rule.clone(),
            premises,
        });
    }
    let premise = premises.pop().expect("E rule has one premise");
    eliminate_one(premise, &tree.conclusion, base)
}

/// Number of cut nodes in a tree, used by the growth-bound checks.
pub fn count_cuts(tree: &ProofTree) -> usize {
    tree.count_rule("cut")
}

pub fn count_e_nodes(tree: &ProofTree) -> usize {
    tree.count_rule("e")
}

fn eliminate_one(
    premise: ProofTree,
    conclusion: &Sequent,
    base: &AxPaBase,
) -> Result<ProofTree, TranslateError> {
    // Pair off alpha-equal formulas; what remains is the changed pair.
    let (pa, ca) = strip_common(&premise.conclusion.antecedent, &conclusion.antecedent);
    let (ps, cs) = strip_common(&premise.conclusion.succedent, &conclusion.succedent);
    match (pa.len(), ps.len(), ca.len(), cs.len()) {
        (0, 0, 0, 0) => Ok(premise), // trivial E step
        (1, 0, 1, 0) => {
            let from = pa[0].clone();
            let to = ca[0].clone();
            // Antecedent: derive to |- from, then cut.
            let bridge = atom_replacement(&to, &from, base)?;
            let mut ant = vec![to];
            ant.extend(remove_one(&premise.conclusion.antecedent, &from).expect("paired"));
            let conclusion_seq = Sequent::new(ant, premise.conclusion.succedent.clone());
            debug_assert!(conclusion_seq.multiset_eq(conclusion));
            Ok(ProofTree::binary(
                conclusion.clone(),
                Rule::Cut { formula: from },
                bridge,
                premise,
            ))
        }
        (0, 1, 0, 1) => {
            let from = ps[0].clone();
            let to = cs[0].clone();
            // Succedent: derive from |- to, then cut.
            let bridge = atom_replacement(&from, &to, base)?;
            Ok(ProofTree::binary(
                conclusion.clone(),
                Rule::Cut { formula: from },
                premise,
                bridge,
            ))
        }
        _ => Err(TranslateError::NonPaRule(format!(
            "E step changes more than one formula: {} to {}",
            premise.conclusion, conclusion
        ))),
    }
}

fn strip_common(xs: &[Formula], ys: &[Formula]) -> (Vec<Formula>, Vec<Formula>) {
    let mut rest_y: Vec<Formula> = ys.to_vec();
    let mut rest_x = Vec::new();
    for x in xs {
        match rest_y.iter().position(|y| y.alpha_eq(x)) {
            Some(i) => {
                rest_y.remove(i);
            }
            None => rest_x.push(x.clone()),
        }
    }
    (rest_x, rest_y)
}

/// A derivation of `R(u..) |- R(v..)` from scheme leaves and theory axiom
/// instances, for atoms whose arguments are joinable under the base.
fn atom_replacement(
    from: &Formula,
    to: &Formula,
    base: &AxPaBase,
) -> Result<ProofTree, TranslateError> {
    let (Formula::Atom(p1, args1), Formula::Atom(p2, args2)) = (from, to) else {
        return Err(TranslateError::NonPaRule(format!(
            "E step rewrites a non-atomic formula: {}",
            from
        )));
    };
    if p1 != p2 || args1.len() != args2.len() {
        return Err(TranslateError::NonPaRule(format!(
            "E step changes the predicate: {} to {}",
            from, to
        )));
    }
    // The scheme takes equations for a prefix of the arguments; cover
    // exactly up to the last changed position.
    let last_changed = (0..args1.len())
        .rev()
        .find(|&i| args1[i] != args2[i]);
    let Some(last_changed) = last_changed else {
        return Err(TranslateError::NonPaRule(format!(
            "atoms {} and {} do not differ",
            from, to
        )));
    };
    let prefix = last_changed + 1;
    let mut eq_proofs = Vec::new();
    for (u, v) in args1.iter().zip(args2).take(prefix) {
        eq_proofs.push(equality_proof(u, v, base)?);
    }
    // Predicate replacement scheme: u1=v1, .., uk=vk, R(u..) |- R(v..).
    let mut scheme_ant: Vec<Formula> = args1
        .iter()
        .zip(args2)
        .take(prefix)
        .map(|(u, v)| Formula::eq(u.clone(), v.clone()))
        .collect();
    scheme_ant.push(from.clone());
    let scheme = ProofTree::leaf(
        Sequent::new(scheme_ant, vec![to.clone()]),
        Rule::EqAxiom(EqScheme::PredRepl),
    );
    // Cut each equation into the scheme.
    let mut tree = scheme;
    for (eq, (u, v)) in eq_proofs
        .into_iter()
        .zip(args1.iter().zip(args2).take(prefix))
        .rev()
    {
        let cutf = Formula::eq(u.clone(), v.clone());
        let ant = remove_one(&tree.conclusion.antecedent, &cutf).expect("scheme lists it");
        let conclusion = Sequent::new(ant, tree.conclusion.succedent.clone());
        tree = ProofTree::binary(conclusion, Rule::Cut { formula: cutf }, eq, tree);
    }
    Ok(tree)
}

/// `|- u = v` for terms joinable under the base theory.
fn equality_proof(u: &Term, v: &Term, base: &AxPaBase) -> Result<ProofTree, TranslateError> {
    if u == v {
        return Ok(refl_leaf(u));
    }
    // Terms one rewrite apart, in either direction, need no chain.
    if let Ok(direct) = one_step_equality(u, v, base) {
        return Ok(direct);
    }
    let (to_nf_u, nf_u) = reduction_chain(u, base)?;
    let (to_nf_v, nf_v) = reduction_chain(v, base)?;
    if nf_u != nf_v {
        return Err(TranslateError::NonPaRule(format!(
            "{} and {} do not join under {}",
            u, v, base.theory.name
        )));
    }
    match (to_nf_u, to_nf_v) {
        (None, None) => Ok(refl_leaf(u)),
        (Some(pu), None) => Ok(pu),
        (None, Some(pv)) => symmetry(pv, v, u),
        (Some(pu), Some(pv)) => {
            // |- u = w and |- v = w give |- u = v by symmetry and
            // transitivity.
            let vw_sym = symmetry(pv, v, &nf_v)?; // |- w = v
            transitivity(pu, vw_sym, u, &nf_u, v)
        }
    }
}

fn refl_leaf(t: &Term) -> ProofTree {
    ProofTree::leaf(
        Sequent::from_suc(Formula::eq(t.clone(), t.clone())),
        Rule::EqAxiom(EqScheme::Refl),
    )
}

/// From `|- a = b` derive `|- b = a` through the replacement scheme.
fn symmetry(ab: ProofTree, a: &Term, b: &Term) -> Result<ProofTree, TranslateError> {
    // a=b, a=a, a=a |- b=a instantiates predicate replacement on equality.
    let eq_ab = Formula::eq(a.clone(), b.clone());
    let eq_aa = Formula::eq(a.clone(), a.clone());
    let goal = Formula::eq(b.clone(), a.clone());
    let scheme = ProofTree::leaf(
        Sequent::new(
            vec![eq_ab.clone(), eq_aa.clone(), eq_aa.clone()],
            vec![goal.clone()],
        ),
        Rule::EqAxiom(EqScheme::PredRepl),
    );
    let after_refl = ProofTree::binary(
        Sequent::new(vec![eq_ab.clone(), eq_aa.clone()], vec![goal.clone()]),
        Rule::Cut { formula: eq_aa.clone() },
        refl_leaf(a),
        scheme,
    );
    let after_refl2 = ProofTree::binary(
        Sequent::new(vec![eq_ab.clone()], vec![goal.clone()]),
        Rule::Cut { formula: eq_aa },
        refl_leaf(a),
        after_refl,
    );
    Ok(ProofTree::binary(
        Sequent::from_suc(goal),
        Rule::Cut { formula: eq_ab },
        ab,
        after_refl2,
    ))
}

/// From `|- a = b` and `|- b = c` derive `|- a = c`.
fn transitivity(
    ab: ProofTree,
    bc: ProofTree,
    a: &Term,
    b: &Term,
    c: &Term,
) -> Result<ProofTree, TranslateError> {
    // a=a, b=c, a=b |- a=c.
    let eq_aa = Formula::eq(a.clone(), a.clone());
    let eq_bc = Formula::eq(b.clone(), c.clone());
    let eq_ab = Formula::eq(a.clone(), b.clone());
    let goal = Formula::eq(a.clone(), c.clone());
    let scheme = ProofTree::leaf(
        Sequent::new(
            vec![eq_aa.clone(), eq_bc.clone(), eq_ab.clone()],
            vec![goal.clone()],
        ),
        Rule::EqAxiom(EqScheme::PredRepl),
    );
    let s1 = ProofTree::binary(
        Sequent::new(vec![eq_bc.clone(), eq_ab.clone()], vec![goal.clone()]),
        Rule::Cut { formula: eq_aa },
        refl_leaf(a),
        scheme,
    );
    let s2 = ProofTree::binary(
        Sequent::new(vec![eq_ab.clone()], vec![goal.clone()]),
        Rule::Cut { formula: eq_bc },
        bc,
        s1,
    );
    Ok(ProofTree::binary(
        Sequent::from_suc(goal),
        Rule::Cut { formula: eq_ab },
        ab,
        s2,
    ))
}

/// `|- t = nf(t)` following the reduction sequence, or `None` when `t` is
/// already normal. Also returns the normal form.
fn reduction_chain(
    t: &Term,
    base: &AxPaBase,
) -> Result<(Option<ProofTree>, Term), TranslateError> {
    let mut cur = t.clone();
    let mut proof: Option<ProofTree> = None;
    let mut guard = 0usize;
    loop {
        guard += 1;
        if guard > 100_000 {
            return Err(TranslateError::NonPaRule(format!(
                "no normal form for {} under {}",
                t, base.theory.name
            )));
        }
        let next = match apply_rule_once(&Expr::Term(cur.clone()), &base.theory) {
            Some(Expr::Term(n)) => n,
            Some(Expr::Formula(_)) => unreachable!("term rewriting"),
            None => break,
        };
        let step_proof = one_step_equality(&cur, &next, base)?;
        proof = Some(match proof {
            None => step_proof,
            Some(prefix) => {
                let prev = cur.clone();
                transitivity(prefix, step_proof, t, &prev, &next)?
            }
        });
        cur = next;
    }
    Ok((proof, cur))
}

/// `|- a = b` when `b` arises from `a` by one rewrite: the axiom instance
/// at the redex, lifted through the surrounding context by congruence
/// schemes.
fn one_step_equality(
    a: &Term,
    b: &Term,
    base: &AxPaBase,
) -> Result<ProofTree, TranslateError> {
    if a == b {
        return Ok(refl_leaf(a));
    }
    match (a, b) {
        (Term::Succ(ia), Term::Succ(ib)) if ia != ib => {
            let inner = one_step_equality(ia, ib, base)?;
            let scheme = ProofTree::leaf(
                Sequent::new(
                    vec![Formula::eq(ia.as_ref().clone(), ib.as_ref().clone())],
                    vec![Formula::eq(a.clone(), b.clone())],
                ),
                Rule::EqAxiom(EqScheme::SuccCong),
            );
            Ok(ProofTree::binary(
                Sequent::from_suc(Formula::eq(a.clone(), b.clone())),
                Rule::Cut {
                    formula: Formula::eq(ia.as_ref().clone(), ib.as_ref().clone()),
                },
                inner,
                scheme,
            ))
        }
        (Term::App(f, fa), Term::App(g, ga)) if f == g && fa.len() == ga.len() => {
            let diffs: Vec<usize> =
                (0..fa.len()).filter(|&i| fa[i] != ga[i]).collect();
            if diffs.len() == 1 {
                let j = diffs[0];
                // Congruence through the changed argument: provide
                // reflexive equations for the prefix.
                let inner = one_step_equality(&fa[j], &ga[j], base)?;
                let mut eqs = Vec::new();
                for i in 0..=j {
                    eqs.push(Formula::eq(fa[i].clone(), ga[i].clone()));
                }
                let scheme = ProofTree::leaf(
                    Sequent::new(eqs.clone(), vec![Formula::eq(a.clone(), b.clone())]),
                    Rule::EqAxiom(EqScheme::FnCong),
                );
                let mut tree = scheme;
                for i in (0..=j).rev() {
                    let cutf = eqs[i].clone();
                    let left = if i == j { inner.clone() } else { refl_leaf(&fa[i]) };
                    let ant = remove_one(&tree.conclusion.antecedent, &cutf)
                        .expect("scheme lists it");
                    let conclusion = Sequent::new(ant, tree.conclusion.succedent.clone());
                    tree = ProofTree::binary(conclusion, Rule::Cut { formula: cutf }, left, tree);
                }
                return Ok(tree);
            }
            root_axiom_instance(a, b, base)
        }
        _ => root_axiom_instance(a, b, base),
    }
}

/// `|- a = b` as a direct instance of a base equation at the root.
fn root_axiom_instance(
    a: &Term,
    b: &Term,
    base: &AxPaBase,
) -> Result<ProofTree, TranslateError> {
    for rule in &base.theory.rules {
        let (Expr::Term(lhs), Expr::Term(rhs)) = (&rule.lhs, &rule.rhs) else {
            continue;
        };
        for (s, t) in [(a, b), (b, a)] {
            let mut bind = Subst::new();
            if crate::rewrite::match_term(lhs, s, &mut bind) && &bind.apply_term(rhs) == t {
                return Ok(ProofTree::leaf(
                    Sequent::from_suc(Formula::eq(a.clone(), b.clone())),
                    Rule::TheoryAxiom { label: "$theory".into() },
                ));
            }
        }
    }
    Err(TranslateError::NonPaRule(format!(
        "{} = {} is not an instance of a base equation",
        a, b
    )))
}

// ----- PRA renaming -----

/// Renames every active and internal parameter to a fresh passive
/// parameter with the reserved `pra` prefix. Induction parameters and
/// slots scope over their premise subtree, so nested inductions sharing a
/// name receive distinct fresh parameters; names free at the root are
/// renamed globally.
pub fn to_pra(tree: &ProofTree) -> Result<ProofTree, TranslateError> {
    let passives = tree.params_of(ParamKind::Passive);
    for p in &passives {
        if p.name.strip_prefix("pra").is_some_and(|rest| {
            !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit())
        }) {
            return Err(TranslateError::FreshNameClash(format!(
                "input already uses the reserved passive name {}",
                p
            )));
        }
    }
    let mut counter = 0usize;
    let mut env: BTreeMap<Parameter, Parameter> = BTreeMap::new();
    // Actives and internals free in the end sequent behave as if bound at
    // the root.
    for kind in [ParamKind::Active, ParamKind::Internal] {
        for p in tree.end_sequent().params_of(kind) {
            let fresh = Parameter::passive(format!("pra{}", counter));
            counter += 1;
            env.insert(p, fresh);
        }
    }
    let renamed = rename_scoped(tree, &env, &mut counter)?;
    let leftover_active = renamed.params_of(ParamKind::Active);
    let leftover_internal = renamed.params_of(ParamKind::Internal);
    if !leftover_active.is_empty() || !leftover_internal.is_empty() {
        return Err(TranslateError::UnsupportedShape(
            "active or internal parameters survived the renaming".into(),
        ));
    }
    Ok(renamed)
}

fn env_subst(env: &BTreeMap<Parameter, Parameter>) -> Subst {
    let mut s = Subst::new();
    for (old, fresh) in env {
        s.bind_unchecked(SubstKey::Param(old.clone()), Term::Param(fresh.clone()));
    }
    s
}

fn rename_scoped(
    tree: &ProofTree,
    env: &BTreeMap<Parameter, Parameter>,
    counter: &mut usize,
) -> Result<ProofTree, TranslateError> {
    let outer = env_subst(env);
    if let Rule::MvInd { formula, param, slots, args, target } = &tree.rule {
        // The conclusion and the instantiation belong to the outer scope;
        // the parameter, the slots, and the premise open a new one.
        let conclusion = tree.conclusion.substitute(&outer)?;
        let args: Vec<Term> = args.iter().map(|a| outer.apply_term(a)).collect();
        let target = outer.apply_term(target);
        let mut inner_env = env.clone();
        let fresh_param = Parameter::passive(format!("pra{}", counter));
        *counter += 1;
        inner_env.insert(param.clone(), fresh_param.clone());
        let mut fresh_slots = Vec::with_capacity(slots.len());
        for s in slots {
            let fp = Parameter::passive(format!("pra{}", counter));
            *counter += 1;
            inner_env.insert(s.clone(), fp.clone());
            fresh_slots.push(fp);
        }
        let inner = env_subst(&inner_env);
        let formula = formula.substitute(&inner)?;
        let premise = rename_scoped(&tree.premises[0], &inner_env, counter)?;
        return Ok(ProofTree::unary(
            conclusion,
            Rule::MvInd {
                formula,
                param: fresh_param,
                slots: fresh_slots,
                args,
                target,
            },
            premise,
        ));
    }
    let conclusion = tree.conclusion.substitute(&outer)?;
    let rule = substitute_rule_payload(&tree.rule, &outer)?;
    let mut premises = Vec::with_capacity(tree.premises.len());
    for p in &tree.premises {
        premises.push(rename_scoped(p, env, counter)?);
    }
    Ok(ProofTree { conclusion, rule, premises })
}

fn substitute_rule_payload(rule: &Rule, s: &Subst) -> Result<Rule, TranslateError> {
    // Reuse the payload substitution from tree substitution by wrapping a
    // leaf; eigen scoping does not apply to a bare payload.
    let shim = ProofTree::leaf(Sequent::default(), rule.clone());
    Ok(shim.substitute(s)?.rule)
}

// ----- quantifying passive parameters -----

/// Folds the antecedent into implications and universally quantifies the
/// passive parameters of the end sequent, bottom-up.
pub fn generalize(tree: &ProofTree) -> Result<ProofTree, TranslateError> {
    let es = tree.end_sequent().clone();
    if es.succedent.len() != 1 {
        return Err(TranslateError::UnsupportedShape(
            "generalization needs a single succedent formula".into(),
        ));
    }
    let mut cur = tree.clone();
    while !cur.conclusion.antecedent.is_empty() {
        let a = cur.conclusion.antecedent[0].clone();
        let b = cur.conclusion.succedent[0].clone();
        let principal = Formula::imp(a.clone(), b);
        let ant = cur.conclusion.antecedent[1..].to_vec();
        let conclusion = Sequent::new(ant, vec![principal.clone()]);
        cur = ProofTree::unary(conclusion, Rule::ImpR { principal }, cur);
    }
    let passives = cur.conclusion.params_of(ParamKind::Passive);
    for p in passives {
        let body = cur.conclusion.succedent[0].clone();
        let principal = Formula::forall(Binder::Passive(p.name.clone()), body);
        let conclusion = Sequent::from_suc(principal.clone());
        cur = ProofTree::unary(
            conclusion,
            Rule::ForallR { principal, eigen: Eigen::Param(p) },
            cur,
        );
    }
    Ok(cur)
}
