//! Translation passes: schema to explicit induction and back, E
//! elimination, the PRA renaming, and generalization.

use schemakern::check::{check_derivation, CheckContext, CheckOptions, MvIndMode};
use schemakern::evaluation::{ground_subst, unfold, verify_unfolded, UnfoldOptions};
use schemakern::psk::{parse_document, PskDocument};
use schemakern::rewrite::DEFAULT_FUEL;
use schemakern::schema::validate_schema;
use schemakern::sig::Signature;
use schemakern::term::ParamKind;
use schemakern::translate::{
    count_cuts, count_e_nodes, eliminate_e_rule, generalize, mvlkie_to_schema, schema_to_mvlkie,
    to_pra, AxPaBase, TranslateError,
};

fn load(name: &str) -> PskDocument {
    let path = format!("{}/fixtures/{}", env!("CARGO_MANIFEST_DIR"), name);
    let source = std::fs::read_to_string(&path).unwrap();
    let (doc, diags) = parse_document(&source);
    assert!(diags.is_empty(), "{}: {:?}", name, diags);
    doc
}

fn check_mvlkie(
    tree: &schemakern::calculus::ProofTree,
    doc: &PskDocument,
    boundary: &[(String, schemakern::sequent::Sequent)],
) -> schemakern::check::CheckReport {
    let theory = doc.theory();
    let mut axioms = doc.axioms();
    for (label, seq) in boundary {
        axioms.insert(label.clone(), seq.clone());
    }
    let signature = Signature::infer(&theory);
    let ctx = CheckContext::new(
        &theory,
        &axioms,
        &signature,
        CheckOptions { mvind: MvIndMode::MvLkie, ..CheckOptions::default() },
    );
    check_derivation(tree, &ctx)
}

#[test]
fn zero_comm_translates_to_a_single_induction() {
    let doc = load("zero_comm.psk");
    let schema = doc.schema("zero_comm_raw").unwrap();
    let tr = schema_to_mvlkie(schema, &doc.theory(), &doc.axioms(), DEFAULT_FUEL).unwrap();
    assert!(tr.boundary_axioms.is_empty());
    assert_eq!(tr.tree.count_rule("ind"), 1);
    assert_eq!(
        tr.tree.end_sequent().to_string(),
        "|- ^a(n:n,0) = ^a(0,n:n)"
    );
    let report = check_mvlkie(&tr.tree, &doc, &[]);
    assert!(report.is_valid(), "{:?}", report.violations);
}

#[test]
fn comm_translates_to_nested_inductions_with_the_papers_end_sequent() {
    let doc = load("comm.psk");
    let schema = doc.schema("comm").unwrap();
    let tr = schema_to_mvlkie(schema, &doc.theory(), &doc.axioms(), DEFAULT_FUEL).unwrap();
    assert_eq!(
        tr.tree.end_sequent().to_string(),
        "^a(p:a,0) = ^a(0,p:a) |- ^a(p:a,p:b) = ^a(p:b,p:a)"
    );
    // One induction per recursive component: xi, psi, phi.
    assert_eq!(tr.tree.count_rule("ind"), 3);
    let report = check_mvlkie(&tr.tree, &doc, &[]);
    assert!(report.is_valid(), "{:?}", report.violations);
    assert_eq!(report.kind, schemakern::check::ProofKind::Proof);
}

#[test]
fn round_trip_preserves_end_sequent_and_revalidates() {
    for (file, name) in [
        ("zero_comm.psk", "zero_comm"),
        ("assoc.psk", "assoc"),
        ("comm.psk", "comm"),
    ] {
        let doc = load(file);
        let schema = doc.schema(name).unwrap();
        let theory = doc.theory();
        let axioms = doc.axioms();
        let tr = schema_to_mvlkie(schema, &theory, &axioms, DEFAULT_FUEL).unwrap();
        let back = mvlkie_to_schema(&tr.tree, &theory, &axioms, "rt", DEFAULT_FUEL)
            .unwrap_or_else(|e| panic!("{}: {}", name, e));
        let report = validate_schema(&back, &theory, &axioms, DEFAULT_FUEL);
        assert!(report.is_valid(), "{}: {:?}", name, report.issues);
        let es = schema.end_sequent().unwrap();
        let es_back = back.end_sequent().unwrap();
        assert!(es.multiset_eq(&es_back), "{}: {} vs {}", name, es, es_back);
    }
}

#[test]
fn round_tripped_schema_unfolds_soundly() {
    let doc = load("comm.psk");
    let schema = doc.schema("comm").unwrap();
    let theory = doc.theory();
    let axioms = doc.axioms();
    let tr = schema_to_mvlkie(schema, &theory, &axioms, DEFAULT_FUEL).unwrap();
    let back = mvlkie_to_schema(&tr.tree, &theory, &axioms, "rt", DEFAULT_FUEL).unwrap();
    for a in 0..=2u64 {
        for b in 0..=2u64 {
            let sigma = ground_subst(&[("a", a), ("b", b)]);
            let report = unfold(&back, &sigma, &theory, &axioms, &UnfoldOptions::default())
                .unwrap_or_else(|e| panic!("a={} b={}: {}", a, b, e));
            assert!(
                verify_unfolded(&report, &theory, &axioms, DEFAULT_FUEL),
                "a={} b={}",
                a,
                b
            );
        }
    }
}

#[test]
fn induction_free_proof_becomes_a_one_component_schema() {
    let doc = load("zero_comm.psk");
    let theory = doc.theory();
    let axioms = doc.axioms();
    let pi = doc.proof("pi").unwrap();
    let schema = mvlkie_to_schema(pi, &theory, &axioms, "pi_schema", DEFAULT_FUEL).unwrap();
    assert_eq!(schema.components.len(), 1);
    assert!(!schema.components[0].step.has_links());
    let report = validate_schema(&schema, &theory, &axioms, DEFAULT_FUEL);
    assert!(report.is_valid(), "{:?}", report.issues);
    assert!(schema.end_sequent().unwrap().multiset_eq(pi.end_sequent()));
}

#[test]
fn e_elimination_removes_all_e_nodes_within_the_cut_budget() {
    let doc = load("zero_comm.psk");
    let pi = doc.proof("pi").unwrap();
    assert_eq!(count_e_nodes(pi), 2);
    let cuts_before = count_cuts(pi);
    let e_free = eliminate_e_rule(pi, &AxPaBase::new()).unwrap();
    assert_eq!(count_e_nodes(&e_free), 0);
    let report = check_mvlkie(&e_free, &doc, &[]);
    assert!(report.is_valid(), "{:?}", report.violations);
    assert!(e_free.end_sequent().multiset_eq(pi.end_sequent()));
    let growth = count_cuts(&e_free) - cuts_before;
    assert!(growth <= 4 * 2, "grew by {} cuts for 2 E nodes", growth);
}

#[test]
fn e_free_input_passes_through_unchanged() {
    let doc = load("zero_comm.psk");
    let pi = doc.proof("pi").unwrap();
    let e_free = eliminate_e_rule(pi, &AxPaBase::new()).unwrap();
    let again = eliminate_e_rule(&e_free, &AxPaBase::new()).unwrap();
    assert!(again.alpha_eq(&e_free));
}

#[test]
fn e_elimination_rejects_foreign_rules() {
    // An E step that needs a rule outside the arithmetic base.
    let src = r#"
(theory T
  (use E_PA)
  (rule (^f 0) 0))
(proof p
  (rule e (seq (ant) (suc (= (^f 0) 0)))
    (eqax refl (seq (ant) (suc (= 0 0))))))
"#;
    let (doc, diags) = parse_document(src);
    assert!(diags.is_empty(), "{:?}", diags);
    let p = doc.proof("p").unwrap();
    let err = eliminate_e_rule(p, &AxPaBase::new()).unwrap_err();
    assert!(matches!(err, TranslateError::NonPaRule(_)), "{}", err);
}

#[test]
fn full_pipeline_reaches_the_pra_profile() {
    let doc = load("comm.psk");
    let theory = doc.theory();
    let axioms = doc.axioms();
    let schema = doc.schema("comm").unwrap();
    let tr = schema_to_mvlkie(schema, &theory, &axioms, DEFAULT_FUEL).unwrap();
    let e_free = eliminate_e_rule(&tr.tree, &AxPaBase::new()).unwrap();
    assert_eq!(count_e_nodes(&e_free), 0);
    let pra = to_pra(&e_free).unwrap();
    assert!(pra.params_of(ParamKind::Active).is_empty());
    assert!(pra.params_of(ParamKind::Internal).is_empty());
    assert_eq!(pra.count_rule("ind"), 3);
    let signature = Signature::infer(&theory);
    let ctx = CheckContext::new(
        &theory,
        &axioms,
        &signature,
        CheckOptions { mvind: MvIndMode::Pra, ..CheckOptions::default() },
    );
    let report = check_derivation(&pra, &ctx);
    assert!(report.is_valid(), "{:?}", report.violations);
    assert!(pra
        .end_sequent()
        .multiset_eq(tr.tree.end_sequent()));
}

#[test]
fn to_pra_rejects_reserved_names() {
    let src = "(proof p (ax (P p:pra0)))";
    let (doc, diags) = parse_document(src);
    assert!(diags.is_empty());
    let err = to_pra(doc.proof("p").unwrap()).unwrap_err();
    assert!(matches!(err, TranslateError::FreshNameClash(_)));
}

#[test]
fn to_pra_leaves_ground_proofs_alone() {
    let doc = load("zero_comm.psk");
    let pi = doc.proof("pi").unwrap();
    let pra = to_pra(pi).unwrap();
    assert!(pra.alpha_eq(pi));
}

#[test]
fn generalize_quantifies_the_passive_parameters() {
    let doc = load("comm.psk");
    let theory = doc.theory();
    let axioms = doc.axioms();
    let schema = doc.schema("comm").unwrap();
    let tr = schema_to_mvlkie(schema, &theory, &axioms, DEFAULT_FUEL).unwrap();
    let gen = generalize(&tr.tree).unwrap();
    let es = gen.end_sequent();
    assert!(es.antecedent.is_empty());
    assert_eq!(es.succedent.len(), 1);
    assert!(es.params_of(ParamKind::Passive).is_empty());
    let shown = es.to_string();
    assert!(shown.starts_with("|- forall"), "{}", shown);
    // The added inferences keep the derivation valid.
    let report = check_mvlkie(&gen, &doc, &[]);
    assert!(report.is_valid(), "{:?}", report.violations);
}

#[test]
fn translated_output_counts_inductions_against_links() {
    // Each component that actually recurses contributes exactly one
    // induction; the wrapper contributes none.
    let doc = load("assoc.psk");
    let schema = doc.schema("assoc").unwrap();
    let tr = schema_to_mvlkie(schema, &doc.theory(), &doc.axioms(), DEFAULT_FUEL).unwrap();
    assert_eq!(tr.tree.count_rule("ind"), 1);
    assert!(tr.tree.links().is_empty(), "translation must be link-free");
}
