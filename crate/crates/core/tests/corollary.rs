//! Remaining worked cases: parallel inductions joined by a binary rule,
//! mutation of unfold reports, the empty schema, and the back-validation
//! of the arithmetic profile.

mod common;

use common::load_fixture;
use schemakern::calculus::Rule;
use schemakern::check::{check_derivation, CheckContext, CheckOptions, MvIndMode};
use schemakern::evaluation::{
    ground_subst, link_rules, unfold, verify_unfolded, EvalError, UnfoldOptions,
};
use schemakern::formula::Formula;
use schemakern::psk::parse_document;
use schemakern::rewrite::DEFAULT_FUEL;
use schemakern::schema::{validate_schema, PSchema};
use schemakern::sig::Signature;
use schemakern::term::numeral;
use schemakern::translate::{eliminate_e_rule, mvlkie_to_schema, schema_to_mvlkie, to_pra, AxPaBase};

const PARALLEL: &str = r#"
(axioms
  (axiom HP (seq (ant (P n:n)) (suc (P (s n:n)))))
  (axiom HQ (seq (ant (Q n:n)) (suc (Q (s n:n))))))
(proof parallel
  (rule and-r (main (and (P p:a) (Q p:a)))
    (rule ind (f (P n:n)) (on n:n) (to p:a)
      (thax HP (seq (ant (P n:n)) (suc (P (s n:n))))))
    (rule ind (f (Q n:n)) (on n:n) (to p:a)
      (thax HQ (seq (ant (Q n:n)) (suc (Q (s n:n))))))))
"#;

#[test]
fn parallel_inductions_become_two_components_joined_in_the_entry() {
    let (doc, diags) = parse_document(PARALLEL);
    assert!(diags.is_empty(), "{:?}", diags);
    let theory = doc.theory();
    let axioms = doc.axioms();
    let tree = doc.proof("parallel").unwrap();
    let schema = mvlkie_to_schema(tree, &theory, &axioms, "par", DEFAULT_FUEL).unwrap();
    // Entry plus one component per induction.
    assert_eq!(schema.components.len(), 3);
    let report = validate_schema(&schema, &theory, &axioms, DEFAULT_FUEL);
    assert!(report.is_valid(), "{:?}", report.issues);
    assert!(schema.end_sequent().unwrap().multiset_eq(tree.end_sequent()));
    // The entry component holds both links, combined by the original
    // binary inference.
    let entry = schema.entry().unwrap();
    assert_eq!(entry.step.links().len(), 2);
    for a in 0..=4u64 {
        let sigma = ground_subst(&[("a", a)]);
        let run = unfold(&schema, &sigma, &theory, &axioms, &UnfoldOptions::default())
            .unwrap_or_else(|e| panic!("a={}: {}", a, e));
        assert!(verify_unfolded(&run, &theory, &axioms, DEFAULT_FUEL), "a={}", a);
    }
}

#[test]
fn empty_schema_has_no_link_rules() {
    let schema = PSchema {
        name: "empty".into(),
        passive_ns: Default::default(),
        components: Vec::new(),
        order: Vec::new(),
    };
    assert!(matches!(link_rules(&schema), Err(EvalError::EmptySchema)));
}

#[test]
fn corrupting_an_unfolded_report_fails_verification() {
    let doc = load_fixture("assoc.psk");
    let theory = doc.theory();
    let axioms = doc.axioms();
    let schema = doc.schema("assoc").unwrap();
    let sigma = ground_subst(&[("a", 1), ("b", 1), ("g", 0)]);
    let report = unfold(schema, &sigma, &theory, &axioms, &UnfoldOptions::default()).unwrap();
    assert!(verify_unfolded(&report, &theory, &axioms, DEFAULT_FUEL));

    // Corrupt one axiom leaf.
    let mut broken = report.clone();
    let mut done = false;
    fn corrupt(t: &mut schemakern::calculus::ProofTree, done: &mut bool) {
        if *done {
            return;
        }
        if matches!(t.rule, Rule::EqAxiom(_)) {
            t.conclusion.succedent = vec![Formula::eq(numeral(0), numeral(1))];
            *done = true;
            return;
        }
        for p in &mut t.premises {
            corrupt(p, done);
        }
    }
    corrupt(&mut broken.tree, &mut done);
    assert!(done);
    assert!(!verify_unfolded(&broken, &theory, &axioms, DEFAULT_FUEL));

    // Rewrite the end sequent to something that does not join.
    let mut skewed = report.clone();
    skewed.expected_end.succedent = vec![Formula::eq(numeral(0), numeral(1))];
    assert!(!verify_unfolded(&skewed, &theory, &axioms, DEFAULT_FUEL));
}

#[test]
fn pra_output_still_validates_in_the_wider_profile() {
    let doc = load_fixture("comm.psk");
    let theory = doc.theory();
    let axioms = doc.axioms();
    let schema = doc.schema("comm").unwrap();
    let tr = schema_to_mvlkie(schema, &theory, &axioms, DEFAULT_FUEL).unwrap();
    let pra = to_pra(&eliminate_e_rule(&tr.tree, &AxPaBase::new()).unwrap()).unwrap();
    let signature = Signature::infer(&theory);
    let ctx = CheckContext::new(
        &theory,
        &axioms,
        &signature,
        CheckOptions { mvind: MvIndMode::MvLkie, ..CheckOptions::default() },
    );
    let report = check_derivation(&pra, &ctx);
    assert!(report.is_valid(), "{:?}", report.violations);
}

#[test]
fn stuck_link_is_reported_for_underdetermined_arguments() {
    // A base instance above zero leaves smaller instances stuck.
    let src = r#"
(theory PA (use E_PA))
(schema shifted
  (passive a)
  (component w
    (active p:a)
    (basearg 2)
    (base
      (link c (args 2) (seq (ant) (suc (= (^a 2 0) (^a 2 0))))))
    (step
      (link c (args p:a) (seq (ant) (suc (= (^a p:a 0) (^a p:a 0)))))))
  (component c
    (active n:n)
    (basearg 2)
    (base
      (eqax refl (seq (ant) (suc (= (^a 2 0) (^a 2 0))))))
    (step
      (rule cut (cutf (= (^a n:n 0) (^a n:n 0)))
        (link c (args n:n) (seq (ant) (suc (= (^a n:n 0) (^a n:n 0)))))
        (rule weak-l (f (= (^a n:n 0) (^a n:n 0)))
          (eqax refl (seq (ant) (suc (= (^a (s n:n) 0) (^a (s n:n) 0)))))))))
  (order (< w c)))
"#;
    let (doc, diags) = parse_document(src);
    assert!(diags.is_empty(), "{:?}", diags);
    let theory = doc.theory();
    let axioms = doc.axioms();
    let schema = doc.schema("shifted").unwrap();
    let report = validate_schema(schema, &theory, &axioms, DEFAULT_FUEL);
    assert!(report.is_valid(), "{:?}", report.issues);
    // Above the base instance everything unfolds.
    let ok = unfold(
        schema,
        &ground_subst(&[("a", 4)]),
        &theory,
        &axioms,
        &UnfoldOptions::default(),
    )
    .unwrap();
    assert!(ok.check.is_valid());
    // Below it the recursion runs past the base case and sticks at zero.
    let err = unfold(
        schema,
        &ground_subst(&[("a", 1)]),
        &theory,
        &axioms,
        &UnfoldOptions::default(),
    )
    .unwrap_err();
    assert!(matches!(err, EvalError::StuckLink(_)), "{}", err);
}

#[test]
fn translation_cuts_computational_boundaries_into_theory_axioms() {
    let doc = load_fixture("general.psk");
    let theory = doc.theory();
    let axioms = doc.axioms();
    let schema = doc.schema("general").unwrap();
    let tr = schema_to_mvlkie(schema, &theory, &axioms, DEFAULT_FUEL).unwrap();
    assert!(!tr.boundary_axioms.is_empty());
    assert!(tr.boundary_axioms.iter().all(|(l, _)| l == "sub:u"));
    let mut table = axioms.clone();
    for (label, seq) in &tr.boundary_axioms {
        table.insert(label.clone(), seq.clone());
    }
    let signature = Signature::infer(&theory);
    let ctx = CheckContext::new(
        &theory,
        &table,
        &signature,
        CheckOptions { mvind: MvIndMode::MvLkie, ..CheckOptions::default() },
    );
    let report = check_derivation(&tr.tree, &ctx);
    assert!(report.is_valid(), "{:?}", report.violations);
    assert!(tr.tree.end_sequent().multiset_eq(&schema.end_sequent().unwrap()));
}
