//! Components, linkability, the linkability ordering, and P-schema
//! validation: the global soundness condition that individual derivations
//! lack.
//!
//! A component bundles a proof symbol with a base derivation and a step
//! derivation forming an inductive pair. The declared order must be a
//! well-founded partial order with the first component least, links may
//! only point upward in it, and self-links recurse on the bare active
//! parameter.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::calculus::{AxiomTable, ProofTree, Rule};
use crate::check::{check_derivation, CheckContext, CheckOptions, CheckReport};
use crate::formula::Formula;
use crate::rewrite::EqTheory;
use crate::sequent::Sequent;
use crate::sig::Signature;
use crate::subst::{Subst, SubstKey};
use crate::term::{is_numeral, ParamKind, Parameter, Term};

/// A non-dispatch slot of a component's link signature: an internal or
/// passive parameter, or an individual-sort variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Formal {
    Param(Parameter),
    Var(String),
}

impl Formal {
    pub fn subst_key(&self) -> SubstKey {
        match self {
            Formal::Param(p) => SubstKey::Param(p.clone()),
            Formal::Var(v) => SubstKey::Var(v.clone()),
        }
    }

    pub fn as_term(&self) -> Term {
        match self {
            Formal::Param(p) => Term::Param(p.clone()),
            Formal::Var(v) => Term::Var(v.clone()),
        }
    }
}

impl fmt::Display for Formal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formal::Param(p) => write!(f, "{}", p),
            Formal::Var(v) => write!(f, "v:{}", v),
        }
    }
}

/// How the step derivation relates to the end-sequent family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentShape {
    /// Active dispatch: the step proves the family at `s(n)`.
    Successor,
    /// Passive dispatch: the step proves the family at the bare parameter.
    /// This is the shape of the wrapper components that turn a derivation
    /// schema into a proof schema.
    General,
}

/// A component `(psi, pi, nu)`: proof symbol, base derivation, step
/// derivation.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub symbol: String,
    /// The recursion slot: the active parameter for ordinary components, a
    /// passive parameter for wrapper components.
    pub dispatch: Parameter,
    /// Remaining slots of the link signature, in order.
    pub formals: Vec<Formal>,
    /// Ground instance proved by the base; `0` unless declared otherwise.
    pub base_arg: Term,
    pub base: ProofTree,
    pub step: ProofTree,
}

impl Component {
    pub fn shape(&self) -> ComponentShape {
        match self.dispatch.kind {
            ParamKind::Active => ComponentShape::Successor,
            _ => ComponentShape::General,
        }
    }

    /// The end-sequent family `S` at the bare dispatch parameter, when the
    /// step has the right shape.
    pub fn es_family(&self) -> Option<Sequent> {
        match self.shape() {
            ComponentShape::General => Some(self.step.conclusion.clone()),
            ComponentShape::Successor => {
                let cand = unsuccessor_sequent(&self.step.conclusion, &self.dispatch);
                let s = Subst::param(
                    self.dispatch.clone(),
                    Term::succ(Term::Param(self.dispatch.clone())),
                )
                .ok()?;
                let back = cand.substitute(&s).ok()?;
                if back.multiset_eq(&self.step.conclusion) {
                    Some(cand)
                } else {
                    None
                }
            }
        }
    }

    /// The family instantiated at a dispatch term and argument vector.
    pub fn instance(&self, dispatch: &Term, args: &[Term]) -> Option<Sequent> {
        if args.len() != self.formals.len() {
            return None;
        }
        let family = self.es_family()?;
        let mut s = Subst::new();
        s.bind_unchecked(SubstKey::Param(self.dispatch.clone()), dispatch.clone());
        for (f, a) in self.formals.iter().zip(args) {
            s.bind_unchecked(f.subst_key(), a.clone());
        }
        family.substitute(&s).ok()
    }

    /// Link leaves of the base and step: (in_step, target, args, sequent).
    pub fn links(&self) -> Vec<(bool, String, Vec<Term>, Sequent)> {
        let mut out = Vec::new();
        for (in_step, tree) in [(false, &self.base), (true, &self.step)] {
            tree.walk(&mut |node, _| {
                if let Rule::Link { target, args } = &node.rule {
                    out.push((in_step, target.clone(), args.clone(), node.conclusion.clone()));
                }
            });
        }
        out
    }
}

/// Replaces every occurrence of `s(d)` by `d`, the inverse image of the
/// step instantiation `d <- s(d)`.
fn unsuccessor_term(t: &Term, d: &Parameter) -> Term {
    if let Term::Succ(inner) = t {
        if matches!(inner.as_ref(), Term::Param(p) if p == d) {
            return Term::Param(d.clone());
        }
    }
    match t {
        Term::Succ(inner) => Term::succ(unsuccessor_term(inner, d)),
        Term::App(f, args) => Term::App(
            f.clone(),
            args.iter().map(|a| unsuccessor_term(a, d)).collect(),
        ),
        other => other.clone(),
    }
}

fn unsuccessor_formula(f: &Formula, d: &Parameter) -> Formula {
    match f {
        Formula::Atom(p, args) => Formula::Atom(
            p.clone(),
            args.iter().map(|a| unsuccessor_term(a, d)).collect(),
        ),
        Formula::Not(g) => Formula::not(unsuccessor_formula(g, d)),
        Formula::And(a, b) => Formula::and(unsuccessor_formula(a, d), unsuccessor_formula(b, d)),
        Formula::Or(a, b) => Formula::or(unsuccessor_formula(a, d), unsuccessor_formula(b, d)),
        Formula::Imp(a, b) => Formula::imp(unsuccessor_formula(a, d), unsuccessor_formula(b, d)),
        Formula::Forall(b, g) => Formula::forall(b.clone(), unsuccessor_formula(g, d)),
        Formula::Exists(b, g) => Formula::exists(b.clone(), unsuccessor_formula(g, d)),
    }
}

fn unsuccessor_sequent(s: &Sequent, d: &Parameter) -> Sequent {
    Sequent::new(
        s.antecedent.iter().map(|f| unsuccessor_formula(f, d)).collect(),
        s.succedent.iter().map(|f| unsuccessor_formula(f, d)).collect(),
    )
}

/// A P-schema: an ordered finite set of components over a passive
/// namespace, with a declared well-founded suborder of the linkability
/// ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct PSchema {
    pub name: String,
    /// Declared passive namespace; empty means inferred from use.
    pub passive_ns: BTreeSet<String>,
    pub components: Vec<Component>,
    /// Declared order edges `a < b`, meaning `a` may link to `b`.
    pub order: Vec<(String, String)>,
}

impl PSchema {
    pub fn component(&self, symbol: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.symbol == symbol)
    }

    pub fn entry(&self) -> Option<&Component> {
        self.components.first()
    }

    /// The schema's end sequent: the family of the least component.
    pub fn end_sequent(&self) -> Option<Sequent> {
        self.entry().and_then(Component::es_family)
    }

    /// The effective passive namespace: declared, or every passive
    /// parameter that occurs.
    pub fn passive_namespace(&self) -> BTreeSet<String> {
        if !self.passive_ns.is_empty() {
            return self.passive_ns.clone();
        }
        let mut out = BTreeSet::new();
        for c in &self.components {
            for tree in [&c.base, &c.step] {
                for p in tree.params_of(ParamKind::Passive) {
                    out.insert(p.name);
                }
            }
        }
        out
    }

    /// Transitive closure of the declared order as index pairs.
    pub fn order_closure(&self) -> BTreeSet<(usize, usize)> {
        let index: BTreeMap<&str, usize> = self
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| (c.symbol.as_str(), i))
            .collect();
        let mut rel = BTreeSet::new();
        for (a, b) in &self.order {
            if let (Some(&i), Some(&j)) = (index.get(a.as_str()), index.get(b.as_str())) {
                rel.insert((i, j));
            }
        }
        loop {
            let mut grew = false;
            let snapshot: Vec<(usize, usize)> = rel.iter().copied().collect();
            for &(a, b) in &snapshot {
                for &(c, d) in &snapshot {
                    if b == c && rel.insert((a, d)) {
                        grew = true;
                    }
                }
            }
            if !grew {
                break;
            }
        }
        rel
    }
}

/// Verdict of the linkability test between two components.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Linkability {
    /// No links, or a link that instantiates away a passive parameter of
    /// the target's end sequent.
    None,
    Linkable,
    StrictlyLinkable,
}

/// Checks every link-annotated sequent in `c` targeting `d`. Returns the
/// verdict plus diagnostics for violating links.
pub fn linkable(c: &Component, d: &Component) -> (Linkability, Vec<String>) {
    let mut diags = Vec::new();
    let Some(es_d) = d.es_family() else {
        return (Linkability::None, vec![format!("{} has no end-sequent family", d.symbol)]);
    };
    let target_passives = es_d.params_of(ParamKind::Passive);
    let mut found = false;
    for (_, target, _, seq) in c.links() {
        if target != d.symbol {
            continue;
        }
        found = true;
        let link_passives = seq.params_of(ParamKind::Passive);
        let missing: Vec<&Parameter> =
            target_passives.iter().filter(|p| !link_passives.contains(p)).collect();
        if !missing.is_empty() {
            let names: Vec<String> = missing.iter().map(|p| p.to_string()).collect();
            diags.push(format!(
                "link from {} to {} loses passive parameter(s) {} of es({})",
                c.symbol,
                d.symbol,
                names.join(", "),
                d.symbol
            ));
        }
    }
    if !found || !diags.is_empty() {
        return (Linkability::None, diags);
    }
    let es_c = match c.es_family() {
        Some(s) => s,
        None => return (Linkability::Linkable, diags),
    };
    let source_passives = es_c.params_of(ParamKind::Passive);
    if target_passives.iter().all(|p| source_passives.contains(p)) {
        (Linkability::StrictlyLinkable, diags)
    } else {
        (Linkability::Linkable, diags)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SchemaCode {
    EmptySchema,
    SymbolClash,
    MissingInductivePair,
    CyclicLinks,
    OrderViolation,
    UnknownLinkTarget,
    LinkMismatch,
    BadSelfLink,
    ActiveDiscipline,
    UnboundParam,
    DerivationInvalid,
    BadBaseArg,
}

impl fmt::Display for SchemaCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemaIssue {
    pub component: Option<String>,
    pub code: SchemaCode,
    pub message: String,
}

impl fmt::Display for SchemaIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.component {
            Some(c) => write!(f, "[{}] {}: {}", self.code, c, self.message),
            None => write!(f, "[{}] {}", self.code, self.message),
        }
    }
}

/// Classification flags; `strict` implies `complete` implies `valid`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SchemaClasses {
    pub complete: bool,
    pub strict: bool,
    /// Every linked pair is strictly linkable (the part of strictness that
    /// translation needs, independent of completeness).
    pub strict_links: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemaReport {
    pub issues: Vec<SchemaIssue>,
    /// Per component: (symbol, base report, step report).
    pub component_reports: Vec<(String, CheckReport, CheckReport)>,
    pub classes: SchemaClasses,
}

impl SchemaReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
            && self
                .component_reports
                .iter()
                .all(|(_, b, s)| b.is_valid() && s.is_valid())
    }

    pub fn classification(&self) -> &'static str {
        if !self.is_valid() {
            "invalid"
        } else if self.classes.strict {
            "strict"
        } else if self.classes.complete {
            "complete"
        } else {
            "general"
        }
    }
}

fn issue(
    out: &mut Vec<SchemaIssue>,
    component: Option<&str>,
    code: SchemaCode,
    message: impl Into<String>,
) {
    out.push(SchemaIssue {
        component: component.map(str::to_owned),
        code,
        message: message.into(),
    });
}

/// Validates a schema: distinct symbols, inductive pairs, the
/// one-active-parameter discipline, link well-formedness including the
/// subterm condition for self-links, and consistency of the declared order
/// with linkability and with well-foundedness.
pub fn validate_schema(
    schema: &PSchema,
    theory: &EqTheory,
    axioms: &AxiomTable,
    fuel: u64,
) -> SchemaReport {
    let mut issues = Vec::new();
    let mut component_reports = Vec::new();
    if schema.components.is_empty() {
        issue(&mut issues, None, SchemaCode::EmptySchema, "schema has no components");
        return SchemaReport {
            issues,
            component_reports,
            classes: SchemaClasses::default(),
        };
    }
    let mut seen = BTreeSet::new();
    for c in &schema.components {
        if !seen.insert(c.symbol.clone()) {
            issue(
                &mut issues,
                Some(&c.symbol),
                SchemaCode::SymbolClash,
                "component symbol declared twice",
            );
        }
    }

    let signature = Signature::infer(theory);
    let options = CheckOptions {
        allow_links: true,
        fuel,
        ..CheckOptions::default()
    };
    let ctx = CheckContext::new(theory, axioms, &signature, options);
    let passive_ns = schema.passive_namespace();

    for c in &schema.components {
        check_component(c, schema, &passive_ns, &mut issues);
        let base_report = check_derivation(&c.base, &ctx);
        let step_report = check_derivation(&c.step, &ctx);
        component_reports.push((c.symbol.clone(), base_report, step_report));
    }

    check_order(schema, &mut issues);

    let valid = issues.is_empty()
        && component_reports.iter().all(|(_, b, s)| b.is_valid() && s.is_valid());
    let classes = if valid {
        classify(schema)
    } else {
        SchemaClasses::default()
    };
    SchemaReport { issues, component_reports, classes }
}

fn check_component(
    c: &Component,
    schema: &PSchema,
    passive_ns: &BTreeSet<String>,
    issues: &mut Vec<SchemaIssue>,
) {
    let sym = Some(c.symbol.as_str());
    if !is_numeral(&c.base_arg) {
        issue(
            issues,
            sym,
            SchemaCode::BadBaseArg,
            format!("base instance {} is not a ground numeral", c.base_arg),
        );
    }
    // Inductive pair: the step fits the family shape and the base proves
    // the family at the base instance.
    let family = match c.es_family() {
        Some(f) => f,
        None => {
            issue(
                issues,
                sym,
                SchemaCode::MissingInductivePair,
                format!(
                    "step end-sequent {} is not the successor instance of a family in {}",
                    c.step.conclusion, c.dispatch
                ),
            );
            return;
        }
    };
    let base_expected = Subst::param(c.dispatch.clone(), c.base_arg.clone())
        .ok()
        .and_then(|s| family.substitute(&s).ok());
    match base_expected {
        Some(expected) if expected.multiset_eq(&c.base.conclusion) => {}
        Some(expected) => issue(
            issues,
            sym,
            SchemaCode::MissingInductivePair,
            format!(
                "base proves {} but the inductive pair needs {}",
                c.base.conclusion, expected
            ),
        ),
        None => issue(
            issues,
            sym,
            SchemaCode::MissingInductivePair,
            "cannot instantiate the family at the base instance",
        ),
    }
    // pi is inactive, nu is at most {n}-active.
    let base_actives = c.base.params_of(ParamKind::Active);
    if !base_actives.is_empty() {
        let names: Vec<String> = base_actives.iter().map(|p| p.name.clone()).collect();
        issue(
            issues,
            sym,
            SchemaCode::ActiveDiscipline,
            format!("base derivation must be inactive, found {}", names.join(", ")),
        );
    }
    let step_actives = c.step.params_of(ParamKind::Active);
    let own_active = match c.dispatch.kind {
        ParamKind::Active => Some(c.dispatch.clone()),
        _ => None,
    };
    for p in &step_actives {
        if Some(p) != own_active.as_ref() {
            issue(
                issues,
                sym,
                SchemaCode::ActiveDiscipline,
                format!("step derivation uses active parameter {} besides the declared one", p),
            );
        }
    }
    // Parameter discipline: everything free in the derivations is the
    // dispatch, a formal, or a namespace passive.
    let mut allowed: BTreeSet<Parameter> = BTreeSet::new();
    allowed.insert(c.dispatch.clone());
    for f in &c.formals {
        if let Formal::Param(p) = f {
            allowed.insert(p.clone());
        }
    }
    for name in passive_ns {
        allowed.insert(Parameter::passive(name.clone()));
    }
    for (which, tree) in [("base", &c.base), ("step", &c.step)] {
        for kind in [ParamKind::Active, ParamKind::Passive, ParamKind::Internal] {
            for p in tree.params_of(kind) {
                if !allowed.contains(&p) {
                    issue(
                        issues,
                        sym,
                        SchemaCode::UnboundParam,
                        format!("{} derivation mentions {} which is not in the signature", which, p),
                    );
                }
            }
        }
    }
    // Links: arity, sequent shape, self-link subterm condition.
    for (in_step, target, args, seq) in c.links() {
        if target == c.symbol {
            if !in_step {
                issue(
                    issues,
                    sym,
                    SchemaCode::BadSelfLink,
                    "base derivation may not link to its own component",
                );
                continue;
            }
            if c.shape() == ComponentShape::General {
                issue(
                    issues,
                    sym,
                    SchemaCode::BadSelfLink,
                    "a component dispatching on a passive parameter cannot link to itself",
                );
                continue;
            }
            let ok_dispatch = matches!(
                args.first(),
                Some(Term::Param(p)) if *p == c.dispatch
            );
            if !ok_dispatch {
                issue(
                    issues,
                    sym,
                    SchemaCode::BadSelfLink,
                    format!(
                        "self-link recursion argument must be the bare parameter {}, found {}",
                        c.dispatch,
                        args.first().map(|t| t.to_string()).unwrap_or_default()
                    ),
                );
            }
        }
        let Some(target_c) = schema.component(&target) else {
            issue(
                issues,
                sym,
                SchemaCode::UnknownLinkTarget,
                format!("link targets unknown component {}", target),
            );
            continue;
        };
        if args.len() != target_c.formals.len() + 1 {
            issue(
                issues,
                sym,
                SchemaCode::LinkMismatch,
                format!(
                    "link to {} carries {} arguments, signature has {}",
                    target,
                    args.len(),
                    target_c.formals.len() + 1
                ),
            );
            continue;
        }
        let (dispatch_arg, rest) = args.split_first().expect("checked non-empty");
        match target_c.instance(dispatch_arg, rest) {
            Some(expected) if expected.multiset_eq(&seq) => {}
            Some(expected) => issue(
                issues,
                sym,
                SchemaCode::LinkMismatch,
                format!(
                    "link sequent {} differs from the instance {} of es({})",
                    seq, expected, target
                ),
            ),
            None => issue(
                issues,
                sym,
                SchemaCode::LinkMismatch,
                format!("cannot instantiate es({}) at the link arguments", target),
            ),
        }
    }
}

fn check_order(schema: &PSchema, issues: &mut Vec<SchemaIssue>) {
    let index: BTreeMap<&str, usize> = schema
        .components
        .iter()
        .enumerate()
        .map(|(i, c)| (c.symbol.as_str(), i))
        .collect();
    for (a, b) in &schema.order {
        for s in [a, b] {
            if !index.contains_key(s.as_str()) {
                issue(
                    issues,
                    None,
                    SchemaCode::OrderViolation,
                    format!("order edge mentions unknown component {}", s),
                );
            }
        }
    }
    let closure = schema.order_closure();
    for &(i, j) in &closure {
        if i == j {
            issue(
                issues,
                None,
                SchemaCode::CyclicLinks,
                format!(
                    "declared order has a cycle through {}",
                    schema.components[i].symbol
                ),
            );
            return;
        }
    }
    // C1 is the least element.
    for i in 1..schema.components.len() {
        if !closure.contains(&(0, i)) {
            issue(
                issues,
                None,
                SchemaCode::OrderViolation,
                format!(
                    "component {} is not above the least component {}",
                    schema.components[i].symbol, schema.components[0].symbol
                ),
            );
        }
    }
    // Every cross-component link follows the order and keeps passive
    // parameters of the target alive.
    for (ci, c) in schema.components.iter().enumerate() {
        let mut targets = BTreeSet::new();
        for (_, target, _, _) in c.links() {
            if target != c.symbol {
                targets.insert(target);
            }
        }
        for t in targets {
            let Some(&ti) = index.get(t.as_str()) else { continue };
            if !closure.contains(&(ci, ti)) {
                issue(
                    issues,
                    Some(&c.symbol),
                    SchemaCode::OrderViolation,
                    format!("link to {} is not covered by the declared order", t),
                );
            }
            let (verdict, diags) = linkable(c, &schema.components[ti]);
            if verdict == Linkability::None {
                for d in diags {
                    issue(issues, Some(&c.symbol), SchemaCode::LinkMismatch, d);
                }
            }
        }
    }
}

fn classify(schema: &PSchema) -> SchemaClasses {
    let es = match schema.end_sequent() {
        Some(s) => s,
        None => return SchemaClasses::default(),
    };
    let es_proof = es.params_of(ParamKind::Active).is_empty()
        && es.params_of(ParamKind::Internal).is_empty();
    // Complete: all cross-component dispatch arguments stay free of active
    // and internal parameters, so a ground passive substitution unfolds
    // every link.
    let mut cross_ok = true;
    for c in &schema.components {
        for (_, target, args, _) in c.links() {
            if target == c.symbol {
                continue;
            }
            if let Some(d) = args.first() {
                let active_free = d.free_params_count(ParamKind::Active) == 0;
                let internal_free = d.free_params_count(ParamKind::Internal) == 0;
                if !active_free || !internal_free {
                    cross_ok = false;
                }
            }
        }
    }
    let complete = es_proof && cross_ok;
    // Strict links: every linked pair strictly linkable.
    let mut strict_links = true;
    for c in &schema.components {
        let mut targets = BTreeSet::new();
        for (_, target, _, _) in c.links() {
            if target != c.symbol {
                targets.insert(target);
            }
        }
        for t in targets {
            if let Some(d) = schema.component(&t) {
                let (verdict, _) = linkable(c, d);
                if verdict != Linkability::StrictlyLinkable {
                    strict_links = false;
                }
            }
        }
    }
    let es_passives: BTreeSet<String> =
        es.params_of(ParamKind::Passive).into_iter().map(|p| p.name).collect();
    let strict = complete && strict_links && es_passives == schema.passive_namespace();
    SchemaClasses { complete, strict, strict_links }
}

trait ParamCount {
    fn free_params_count(&self, kind: ParamKind) -> usize;
}

impl ParamCount for Term {
    fn free_params_count(&self, kind: ParamKind) -> usize {
        let mut out = BTreeSet::new();
        self.params_of(kind, &mut out);
        out.len()
    }
}

/// One sub-P-schema: a link-closed subset with a unique least component.
#[derive(Debug, Clone, PartialEq)]
pub struct SubSchema {
    pub symbols: Vec<String>,
    pub least: String,
    /// Invoked from outside with a dispatch argument that is not ground
    /// after a passive substitution, i.e. mentions an active or internal
    /// parameter.
    pub computational: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SubSchemaReport {
    pub entries: Vec<SubSchema>,
}

/// Enumerates all component subsets that are closed under link targets and
/// have a unique least element in the declared order, and marks the
/// computational ones.
pub fn sub_schemata(schema: &PSchema) -> SubSchemaReport {
    let n = schema.components.len();
    let index: BTreeMap<&str, usize> = schema
        .components
        .iter()
        .enumerate()
        .map(|(i, c)| (c.symbol.as_str(), i))
        .collect();
    let closure = schema.order_closure();
    // Link graph as index pairs, with the dispatch argument of each edge.
    let mut edges: Vec<(usize, usize, Term)> = Vec::new();
    for (ci, c) in schema.components.iter().enumerate() {
        for (_, target, args, _) in c.links() {
            if let Some(&ti) = index.get(target.as_str()) {
                if ti != ci {
                    if let Some(d) = args.first() {
                        edges.push((ci, ti, d.clone()));
                    }
                }
            }
        }
    }
    let mut entries = Vec::new();
    for mask in 1u32..(1 << n) {
        let members: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let inside = |i: usize| mask & (1 << i) != 0;
        // Closed under links.
        if edges.iter().any(|&(a, b, _)| inside(a) && !inside(b)) {
            continue;
        }
        // Unique least element.
        let least = members.iter().copied().find(|&m| {
            members.iter().all(|&o| o == m || closure.contains(&(m, o)))
        });
        let Some(least) = least else { continue };
        let computational = edges.iter().any(|&(a, b, ref d)| {
            !inside(a)
                && inside(b)
                && (d.free_params_count(ParamKind::Active) > 0
                    || d.free_params_count(ParamKind::Internal) > 0)
        });
        entries.push(SubSchema {
            symbols: members
                .iter()
                .map(|&i| schema.components[i].symbol.clone())
                .collect(),
            least: schema.components[least].symbol.clone(),
            computational,
        });
    }
    SubSchemaReport { entries }
}

/// Component symbols that some incoming cross-link invokes with an active
/// or internal parameter in dispatch position. Evaluation treats links to
/// these as theory-axiom boundaries.
pub fn computational_targets(schema: &PSchema) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for c in &schema.components {
        for (_, target, args, _) in c.links() {
            if target == c.symbol {
                continue;
            }
            if let Some(d) = args.first() {
                if d.free_params_count(ParamKind::Active) > 0
                    || d.free_params_count(ParamKind::Internal) > 0
                {
                    out.insert(target);
                }
            }
        }
    }
    out
}
