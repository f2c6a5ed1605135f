//! Herbrand-system extraction for strict schemata with quantifier-free
//! cuts, witness normalization, and ground validity of the Herbrand
//! disjunction.
//!
//! Extraction yields two rewrite rules per component over the list
//! constructors `nil`/`cons` and head symbols `^W_<component>`: the rules
//! collect the witness terms of the exists-right inferences top-down,
//! left to right, and append a recursive call per link. At ground
//! parameters the head symbol normalizes to the witness lists of a valid
//! Herbrand disjunction.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::calculus::{AxiomTable, ProofTree, Rule};
use crate::formula::{Binder, Formula};
use crate::rewrite::{
    normalize_formula, normalize_term, EqTheory, RewriteError, RewriteRule,
};
use crate::schema::{validate_schema, Component, ComponentShape, Formal, PSchema};
use crate::sexp::{parse_all, Doc, SExp};
use crate::subst::{Subst, SubstKey};
use crate::term::{numeral, ParamKind, Parameter, Term};

pub const NIL: &str = "nil";
pub const CONS: &str = "cons";
pub const APPEND: &str = "^append";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HerbrandError {
    #[error("schema is not strict: {0}")]
    NotStrict(String),
    #[error("schema does not validate: {0}")]
    SchemaInvalid(String),
    #[error("a cut formula is quantified: {0}")]
    QuantifiedCut(String),
    #[error("end sequent is not of the form |- exists x.. F with F quantifier-free: {0}")]
    WrongEndSequentShape(String),
    #[error("witness tuple arity differs from the existential prefix")]
    ArityMismatch,
    #[error("parameter vector has {got} entries, system takes {want}")]
    BadParams { got: usize, want: usize },
    #[error("normal form of {0} is not a constructor list")]
    NonConstructorNormalForm(String),
    #[error("{0}")]
    Rewrite(#[from] RewriteError),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// A Herbrand system: the matrix formula with its parameter and
/// existential signature, the per-component witness rules, and the list
/// rules.
#[derive(Debug, Clone, PartialEq)]
pub struct HerbrandSystem {
    /// Parameter slots of the head symbol, in order.
    pub params: Vec<Parameter>,
    /// Existential prefix binders, outermost first.
    pub ex_vars: Vec<Binder>,
    /// The quantifier-free matrix.
    pub matrix: Formula,
    /// Head symbol of the entry component.
    pub entry: String,
    /// Two rules per component.
    pub w_rules: Vec<RewriteRule>,
    /// Constructor bookkeeping (append), not counted against the
    /// linear-size bound.
    pub list_rules: Vec<RewriteRule>,
}

/// Witness lists for one ground parameter vector.
pub type WitnessTable = Vec<Vec<Term>>;

fn w_symbol(component: &str) -> String {
    format!("^W_{}", component)
}

fn list_rules() -> Vec<RewriteRule> {
    let h = || Term::PatVar("h".into());
    let t = || Term::PatVar("t".into());
    let l = || Term::PatVar("l".into());
    vec![
        RewriteRule::term(Term::app(APPEND, vec![Term::cnst(NIL), l()]), l()),
        RewriteRule::term(
            Term::app(APPEND, vec![Term::app(CONS, vec![h(), t()]), l()]),
            Term::app(CONS, vec![h(), Term::app(APPEND, vec![t(), l()])]),
        ),
    ]
}

/// Extracts the Herbrand system of a strict schema whose cuts are
/// quantifier-free and whose end sequent is an existential statement.
pub fn extract_herbrand_system(
    schema: &PSchema,
    theory: &EqTheory,
    axioms: &AxiomTable,
    fuel: u64,
) -> Result<HerbrandSystem, HerbrandError> {
    let report = validate_schema(schema, theory, axioms, fuel);
    if !report.is_valid() {
        let msgs: Vec<String> = report.issues.iter().map(|i| i.to_string()).collect();
        return Err(HerbrandError::SchemaInvalid(msgs.join("; ")));
    }
    if !report.classes.strict {
        return Err(HerbrandError::NotStrict(
            "extraction needs a strict schema".into(),
        ));
    }
    // Quantifier-free cuts only.
    for c in &schema.components {
        for tree in [&c.base, &c.step] {
            let mut bad: Option<String> = None;
            tree.walk(&mut |node, _| {
                if let Rule::Cut { formula } = &node.rule {
                    if !formula.is_quantifier_free() && bad.is_none() {
                        bad = Some(formula.to_string());
                    }
                }
            });
            if let Some(f) = bad {
                return Err(HerbrandError::QuantifiedCut(f));
            }
        }
    }
    // End sequent |- exists x1 .. exists xk F.
    let es = schema.end_sequent().expect("validated schema");
    if !es.antecedent.is_empty() || es.succedent.len() != 1 {
        return Err(HerbrandError::WrongEndSequentShape(es.to_string()));
    }
    let mut ex_vars = Vec::new();
    let mut matrix = es.succedent[0].clone();
    while let Formula::Exists(b, body) = matrix {
        ex_vars.push(b);
        matrix = *body;
    }
    if ex_vars.is_empty() || !matrix.is_quantifier_free() {
        return Err(HerbrandError::WrongEndSequentShape(es.to_string()));
    }

    let mut w_rules = Vec::new();
    for c in &schema.components {
        let (base_rule, step_rule) = component_rules(c, schema)?;
        w_rules.push(base_rule);
        w_rules.push(step_rule);
    }
    let entry = schema.entry().expect("validated");
    let params = component_params(entry);
    Ok(HerbrandSystem {
        params,
        ex_vars,
        matrix,
        entry: entry.symbol.clone(),
        w_rules,
        list_rules: list_rules(),
    })
}

/// The parameter slots of a component's head symbol: dispatch, declared
/// formals, then any loose passives, sorted.
fn component_params(c: &Component) -> Vec<Parameter> {
    let mut params = vec![c.dispatch.clone()];
    for f in &c.formals {
        if let Formal::Param(p) = f {
            params.push(p.clone());
        }
    }
    let mut loose = BTreeSet::new();
    for tree in [&c.base, &c.step] {
        for p in tree.params_of(ParamKind::Passive) {
            if !params.contains(&p) {
                loose.insert(p);
            }
        }
    }
    params.extend(loose);
    params
}

fn pattern_var(p: &Parameter) -> Term {
    Term::PatVar(format!("{}{}", p.kind.prefix(), p.name))
}

fn component_rules(
    c: &Component,
    schema: &PSchema,
) -> Result<(RewriteRule, RewriteRule), HerbrandError> {
    let params = component_params(c);
    let head = w_symbol(&c.symbol);
    // Pattern substitution: every signature entity becomes a pattern
    // variable.
    let mut to_pat = Subst::new();
    for p in &params {
        to_pat.bind_unchecked(SubstKey::Param(p.clone()), pattern_var(p));
    }
    for f in &c.formals {
        if let Formal::Var(v) = f {
            to_pat.bind_unchecked(SubstKey::Var(v.clone()), Term::PatVar(format!("v:{}", v)));
        }
    }
    let slot_terms = |dispatch: Term| -> Vec<Term> {
        let mut args = vec![dispatch];
        for f in &c.formals {
            match f {
                Formal::Param(p) => args.push(pattern_var(p)),
                Formal::Var(v) => args.push(Term::PatVar(format!("v:{}", v))),
            }
        }
        for p in &params[1 + c.formals.len()..] {
            args.push(pattern_var(p));
        }
        args
    };

    // Base rule.
    let base_lhs = Term::App(head.clone(), slot_terms(c.base_arg.clone()));
    let base_rhs = collect_rhs(&c.base, &to_pat, schema)?;

    // Step rule: the step derivation sits at the successor instance. For
    // the successor shape the recursion parameter stays; for the general
    // shape the dispatch is the whole successor term.
    let step_var = Term::PatVar(format!("{}{}", c.dispatch.kind.prefix(), c.dispatch.name));
    let step_lhs = Term::App(head.clone(), slot_terms(Term::succ(step_var.clone())));
    let mut step_subst = to_pat.clone();
    match c.shape() {
        ComponentShape::Successor => {
            step_subst.bind_unchecked(SubstKey::Param(c.dispatch.clone()), step_var);
        }
        ComponentShape::General => {
            step_subst
                .bind_unchecked(SubstKey::Param(c.dispatch.clone()), Term::succ(step_var));
        }
    }
    let step_rhs = collect_rhs(&c.step, &step_subst, schema)?;
    Ok((
        RewriteRule::term(base_lhs, base_rhs),
        RewriteRule::term(step_lhs, step_rhs),
    ))
}

/// Folds the witnesses and recursive calls of a derivation, top-down and
/// left to right, into a constructor list term.
fn collect_rhs(
    tree: &ProofTree,
    subst: &Subst,
    schema: &PSchema,
) -> Result<Term, HerbrandError> {
    enum Piece {
        Tuple(Term),
        Call(Term),
    }
    let mut pieces = Vec::new();
    let mut err = None;
    tree.walk(&mut |node, _| {
        if err.is_some() {
            return;
        }
        match &node.rule {
            Rule::ExistsR { witness, .. } => {
                let w = subst.apply_term(witness);
                let tuple = Term::app(CONS, vec![w, Term::cnst(NIL)]);
                pieces.push(Piece::Tuple(tuple));
            }
            Rule::Link { target, args } => {
                let Some(target_c) = schema.component(target) else {
                    err = Some(HerbrandError::Unsupported(format!(
                        "link to unknown component {}",
                        target
                    )));
                    return;
                };
                let mut call_args: Vec<Term> =
                    args.iter().map(|a| subst.apply_term(a)).collect();
                // Thread loose passives of the target.
                let target_params = component_params(target_c);
                for p in &target_params[1 + target_c.formals.len()..] {
                    let threaded =
                        subst.apply_term(&Term::Param(p.clone()));
                    call_args.push(threaded);
                }
                pieces.push(Piece::Call(Term::App(w_symbol(target), call_args)));
            }
            _ => {}
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let mut rhs = Term::cnst(NIL);
    for piece in pieces.into_iter().rev() {
        rhs = match piece {
            Piece::Tuple(t) => Term::app(CONS, vec![t, rhs]),
            Piece::Call(w) => {
                if rhs == Term::cnst(NIL) {
                    w
                } else {
                    Term::app(APPEND, vec![w, rhs])
                }
            }
        };
    }
    Ok(rhs)
}

/// Rewrites the head symbol at ground parameters to constructor normal
/// form and decodes the witness lists.
pub fn normalize_witnesses(
    system: &HerbrandSystem,
    values: &[u64],
    fuel: u64,
) -> Result<WitnessTable, HerbrandError> {
    if values.len() != system.params.len() {
        return Err(HerbrandError::BadParams {
            got: values.len(),
            want: system.params.len(),
        });
    }
    let mut theory = EqTheory::new("herbrand");
    theory.rules.extend(system.w_rules.iter().cloned());
    theory.rules.extend(system.list_rules.iter().cloned());
    let args: Vec<Term> = values.iter().map(|&v| numeral(v)).collect();
    let start = Term::App(w_symbol(&system.entry), args);
    let nf = normalize_term(&start, &theory, fuel)?;
    decode_table(&nf)
}

fn decode_table(t: &Term) -> Result<WitnessTable, HerbrandError> {
    let lists = decode_list(t)?;
    let mut table = Vec::new();
    for l in lists {
        table.push(decode_list(&l)?);
    }
    Ok(table)
}

fn decode_list(t: &Term) -> Result<Vec<Term>, HerbrandError> {
    let mut out = Vec::new();
    let mut cur = t;
    loop {
        match cur {
            Term::App(name, args) if name == NIL && args.is_empty() => return Ok(out),
            Term::App(name, args) if name == CONS && args.len() == 2 => {
                out.push(args[0].clone());
                cur = &args[1];
            }
            other => {
                return Err(HerbrandError::NonConstructorNormalForm(other.to_string()))
            }
        }
    }
}

/// Builds the instantiated disjunction and decides its ground validity by
/// congruence closure over equality atoms combined with boolean case
/// analysis of the remaining atoms.
pub fn verify_herbrand_disjunction(
    system: &HerbrandSystem,
    values: &[u64],
    table: &WitnessTable,
    theory: &EqTheory,
    fuel: u64,
) -> Result<bool, HerbrandError> {
    if table.is_empty() {
        return Ok(false);
    }
    if values.len() != system.params.len() {
        return Err(HerbrandError::BadParams {
            got: values.len(),
            want: system.params.len(),
        });
    }
    let mut disjunction: Option<Formula> = None;
    for tuple in table {
        if tuple.len() != system.ex_vars.len() {
            return Err(HerbrandError::ArityMismatch);
        }
        let mut s = Subst::new();
        for (p, &v) in system.params.iter().zip(values) {
            s.bind_unchecked(SubstKey::Param(p.clone()), numeral(v));
        }
        for (b, t) in system.ex_vars.iter().zip(tuple) {
            s.bind_unchecked(b.subst_key(), t.clone());
        }
        let inst = system
            .matrix
            .substitute(&s)
            .map_err(|e| HerbrandError::Unsupported(e.to_string()))?;
        let norm = normalize_formula(&inst, theory, fuel)?;
        disjunction = Some(match disjunction {
            None => norm,
            Some(d) => Formula::or(d, norm),
        });
    }
    Ok(ground_valid(&disjunction.expect("non-empty table")))
}

/// Validity of a ground quantifier-free formula modulo the theory of
/// equality: every branch of the refutation tableau closes under
/// congruence closure.
pub fn ground_valid(f: &Formula) -> bool {
    branch_closes(vec![(f.clone(), false)], Vec::new())
}

fn branch_closes(mut todo: Vec<(Formula, bool)>, mut literals: Vec<(Formula, bool)>) -> bool {
    while let Some((f, sign)) = todo.pop() {
        match (f, sign) {
            (Formula::Not(g), s) => todo.push((*g, !s)),
            (Formula::And(a, b), true) | (Formula::Or(a, b), false) => {
                todo.push((*a, sign));
                todo.push((*b, sign));
            }
            (Formula::And(a, b), false) | (Formula::Or(a, b), true) => {
                let mut left = todo.clone();
                left.push((*a, sign));
                let mut right = todo;
                right.push((*b, sign));
                return branch_closes(left, literals.clone())
                    && branch_closes(right, literals);
            }
            (Formula::Imp(a, b), true) => {
                let mut left = todo.clone();
                left.push((*a, false));
                let mut right = todo;
                right.push((*b, true));
                return branch_closes(left, literals.clone())
                    && branch_closes(right, literals);
            }
            (Formula::Imp(a, b), false) => {
                todo.push((*a, true));
                todo.push((*b, false));
            }
            (q @ (Formula::Forall(_, _) | Formula::Exists(_, _)), s) => {
                // Quantified subformulas are opaque literals here.
                literals.push((q, s));
            }
            (atom, s) => literals.push((atom, s)),
        }
    }
    literals_inconsistent(&literals)
}

fn literals_inconsistent(literals: &[(Formula, bool)]) -> bool {
    // Congruence closure over the positive equalities.
    let mut cc = Congruence::default();
    for (f, sign) in literals {
        if let (Formula::Atom(p, args), true) = (f, sign) {
            if p == crate::formula::EQ && args.len() == 2 {
                cc.note(&args[0]);
                cc.note(&args[1]);
                cc.union_terms(&args[0], &args[1]);
                continue;
            }
        }
        if let Formula::Atom(_, args) = f {
            for a in args {
                cc.note(a);
            }
        }
    }
    cc.close();
    for (f, sign) in literals {
        if *sign {
            continue;
        }
        // A refuted equality between congruent terms closes the branch.
        if let Formula::Atom(p, args) = f {
            if p == crate::formula::EQ && args.len() == 2 && cc.same(&args[0], &args[1]) {
                return true;
            }
        }
        // A predicate both asserted and refuted at congruent arguments
        // closes the branch.
        for (g, gsign) in literals {
            if !gsign {
                continue;
            }
            if let (Formula::Atom(p, pa), Formula::Atom(q, qa)) = (f, g) {
                if p == q
                    && pa.len() == qa.len()
                    && pa.iter().zip(qa).all(|(x, y)| cc.same(x, y))
                {
                    return true;
                }
            }
            if f.alpha_eq(g) {
                return true;
            }
        }
    }
    false
}

/// Small congruence closure over ground terms.
#[derive(Default)]
struct Congruence {
    terms: Vec<Term>,
    parent: Vec<usize>,
    pending: Vec<(usize, usize)>,
}

impl Congruence {
    fn note(&mut self, t: &Term) -> usize {
        for a in t.args() {
            self.note(a);
        }
        if let Some(i) = self.terms.iter().position(|u| u == t) {
            return i;
        }
        self.terms.push(t.clone());
        self.parent.push(self.terms.len() - 1);
        self.terms.len() - 1
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }

    fn union_terms(&mut self, a: &Term, b: &Term) {
        let (ia, ib) = (self.note(a), self.note(b));
        self.pending.push((ia, ib));
    }

    fn close(&mut self) {
        let pending = std::mem::take(&mut self.pending);
        for (a, b) in pending {
            self.union(a, b);
        }
        loop {
            let mut merged = false;
            for i in 0..self.terms.len() {
                for j in (i + 1)..self.terms.len() {
                    if self.find(i) == self.find(j) {
                        continue;
                    }
                    if self.congruent(i, j) {
                        self.union(i, j);
                        merged = true;
                    }
                }
            }
            if !merged {
                break;
            }
        }
    }

    fn congruent(&mut self, i: usize, j: usize) -> bool {
        let (a, b) = (self.terms[i].clone(), self.terms[j].clone());
        match (&a, &b) {
            (Term::Succ(x), Term::Succ(y)) => {
                let (ix, iy) = (self.note(x), self.note(y));
                self.find(ix) == self.find(iy)
            }
            (Term::App(f, xs), Term::App(g, ys)) if f == g && xs.len() == ys.len() => {
                xs.iter().zip(ys).all(|(x, y)| {
                    let (ix, iy) = (self.note(x), self.note(y));
                    self.find(ix) == self.find(iy)
                })
            }
            _ => false,
        }
    }

    fn same(&mut self, a: &Term, b: &Term) -> bool {
        if a == b {
            return true;
        }
        let (ia, ib) = (self.note(a), self.note(b));
        self.find(ia) == self.find(ib)
    }
}

/// Witnesses harvested from the exists-right inferences of a ground
/// proof, top-down and left to right, as singleton tuples.
pub fn harvest_witnesses(tree: &ProofTree) -> Vec<Vec<Term>> {
    let mut out = Vec::new();
    tree.walk(&mut |node, _| {
        if let Rule::ExistsR { witness, .. } = &node.rule {
            out.push(vec![witness.clone()]);
        }
    });
    out
}

/// Multiset equality of witness tables after E-normalizing every entry.
pub fn witness_tables_match(
    a: &WitnessTable,
    b: &WitnessTable,
    theory: &EqTheory,
    fuel: u64,
) -> Result<bool, RewriteError> {
    let norm = |t: &WitnessTable| -> Result<Vec<Vec<Term>>, RewriteError> {
        let mut out = Vec::new();
        for tuple in t {
            let mut row = Vec::new();
            for entry in tuple {
                row.push(normalize_term(entry, theory, fuel)?);
            }
            out.push(row);
        }
        out.sort();
        Ok(out)
    };
    Ok(norm(a)? == norm(b)?)
}

// ----- the .hrs format -----

pub fn print_system(system: &HerbrandSystem) -> String {
    use crate::psk::{formula_doc, term_doc};
    let mut children = Vec::new();
    let mut params = vec![Doc::atom("params")];
    params.extend(system.params.iter().map(|p| Doc::atom(p.to_string())));
    children.push(Doc::inline(params));
    let mut exvars = vec![Doc::atom("exvars")];
    exvars.extend(system.ex_vars.iter().map(|b| Doc::atom(b.to_string())));
    children.push(Doc::inline(exvars));
    children.push(Doc::inline(vec![
        Doc::atom("matrix"),
        formula_doc(&system.matrix),
    ]));
    children.push(Doc::inline(vec![Doc::atom("entry"), Doc::atom(&system.entry)]));
    for r in &system.w_rules {
        if let (crate::rewrite::Expr::Term(l), crate::rewrite::Expr::Term(rr)) =
            (&r.lhs, &r.rhs)
        {
            children.push(Doc::inline(vec![
                Doc::atom("wrule"),
                term_doc(l),
                term_doc(rr),
            ]));
        }
    }
    let doc = Doc::block(vec![Doc::atom("herbrand-system")], children);
    let mut out = String::new();
    doc.render(0, &mut out);
    out.push('\n');
    out
}

pub fn parse_system(source: &str) -> Result<HerbrandSystem, String> {
    let forms = parse_all(source).map_err(|e| e.message)?;
    let form = forms.first().ok_or("empty document")?;
    let Some(("herbrand-system", clauses)) = form.tagged() else {
        return Err("expected (herbrand-system ...)".into());
    };
    let mut params = Vec::new();
    let mut ex_vars = Vec::new();
    let mut matrix = None;
    let mut entry = None;
    let mut w_rules = Vec::new();
    for clause in clauses {
        let Some((head, rest)) = clause.tagged() else {
            return Err("malformed clause".into());
        };
        match head {
            "params" => {
                for a in rest {
                    match crate::psk::lower_term(a) {
                        Ok(Term::Param(p)) => params.push(p),
                        _ => return Err("params must be parameters".into()),
                    }
                }
            }
            "exvars" => {
                for a in rest {
                    match crate::psk::lower_term(a) {
                        Ok(Term::Var(v)) => ex_vars.push(Binder::Var(v)),
                        Ok(Term::Param(p)) if p.kind == ParamKind::Passive => {
                            ex_vars.push(Binder::Passive(p.name))
                        }
                        _ => return Err("exvars must be variables".into()),
                    }
                }
            }
            "matrix" => {
                let f = rest.first().ok_or("matrix needs a formula")?;
                matrix = Some(crate::psk::lower_formula(f).map_err(|d| d.message)?);
            }
            "entry" => {
                entry = rest.first().and_then(SExp::atom).map(str::to_owned);
            }
            "wrule" => {
                if rest.len() != 2 {
                    return Err("wrule takes two terms".into());
                }
                let l = crate::psk::lower_term(&rest[0]).map_err(|d| d.message)?;
                let r = crate::psk::lower_term(&rest[1]).map_err(|d| d.message)?;
                w_rules.push(RewriteRule::term(l, r));
            }
            other => return Err(format!("unknown clause {}", other)),
        }
    }
    Ok(HerbrandSystem {
        params,
        ex_vars,
        matrix: matrix.ok_or("missing matrix")?,
        entry: entry.ok_or("missing entry")?,
        w_rules,
        list_rules: list_rules(),
    })
}

impl fmt::Display for HerbrandSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", print_system(self))
    }
}

/// Total right-hand-side size of the witness rules, for the linear-size
/// bound.
pub fn system_size(system: &HerbrandSystem) -> usize {
    system
        .w_rules
        .iter()
        .map(|r| match (&r.lhs, &r.rhs) {
            (crate::rewrite::Expr::Term(l), crate::rewrite::Expr::Term(rr)) => {
                l.size() + rr.size()
            }
            _ => 0,
        })
        .sum()
}

/// Size of a schema counted over its derivations, the reference measure
/// for the linear-size bound.
pub fn schema_size(schema: &PSchema) -> usize {
    schema
        .components
        .iter()
        .map(|c| c.base.proof_size() + c.step.proof_size())
        .sum()
}
