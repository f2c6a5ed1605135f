//! Acceptance suite: one test per criterion, each printing a pass line
//! with its measurements.

mod common;

use std::time::Instant;

use common::{load_fixture, mutation_catalog, run_mutation};
use schemakern::check::{check_derivation, CheckContext, CheckOptions, MvIndMode};
use schemakern::evaluation::{ground_subst, unfold, verify_unfolded, UnfoldOptions, UNFOLD_FUEL};
use schemakern::herbrand::{
    extract_herbrand_system, harvest_witnesses, normalize_witnesses,
    verify_herbrand_disjunction, witness_tables_match,
};
use schemakern::psk::{parse_document, print_document, Item, PskDocument};
use schemakern::rewrite::{e_pa, normalize_term, DEFAULT_FUEL};
use schemakern::schema::validate_schema;
use schemakern::sig::Signature;
use schemakern::subst::Subst;
use schemakern::term::{numeral, value_of, ParamKind, Term};
use schemakern::translate::{
    count_cuts, count_e_nodes, eliminate_e_rule, mvlkie_to_schema, schema_to_mvlkie, to_pra,
    AxPaBase,
};

fn all_substs(params: &[&str], max: u64) -> Vec<Subst> {
    let mut out = vec![Vec::new()];
    for p in params {
        let mut next = Vec::new();
        for partial in &out {
            for v in 0..=max {
                let mut ext = partial.clone();
                ext.push(((*p).to_owned(), v));
                next.push(ext);
            }
        }
        out = next;
    }
    out.into_iter().map(Subst::ground_numeric).collect()
}

/// Criterion 1: every bundled complete schema unfolds and verifies at all
/// passive values 0..=6 within the unfolding fuel.
#[test]
fn criterion_1_soundness_suite() {
    let started = Instant::now();
    let mut instances = 0usize;
    for (file, name, params) in [
        ("zero_comm.psk", "zero_comm", vec!["a"]),
        ("assoc.psk", "assoc", vec!["a", "b", "g"]),
        ("comm.psk", "comm", vec!["a", "b"]),
    ] {
        let doc = load_fixture(file);
        let theory = doc.theory();
        let axioms = doc.axioms();
        let schema = doc.schema(name).unwrap();
        let report = validate_schema(schema, &theory, &axioms, DEFAULT_FUEL);
        assert!(report.is_valid() && report.classes.complete, "{}", name);
        for sigma in all_substs(&params, 6) {
            let options = UnfoldOptions { fuel: UNFOLD_FUEL, ..UnfoldOptions::default() };
            let run = unfold(schema, &sigma, &theory, &axioms, &options)
                .unwrap_or_else(|e| panic!("{} at {}: {}", name, sigma, e));
            assert!(
                verify_unfolded(&run, &theory, &axioms, DEFAULT_FUEL),
                "{} at {}",
                name,
                sigma
            );
            instances += 1;
        }
    }
    assert!(instances >= 50, "only {} instances", instances);
    println!(
        "criterion 1 (soundness suite): PASS - {} instances verified in {:.2?}",
        instances,
        started.elapsed()
    );
}

/// Criterion 2: addition and multiplication normalize to the exact values
/// for all arguments up to 8.
#[test]
fn criterion_2_arithmetic_oracle() {
    let th = e_pa();
    let mut cases = 0;
    for a in 0..=8u64 {
        for b in 0..=8u64 {
            let sum = Term::app("^a", vec![numeral(a), numeral(b)]);
            let prod = Term::app("^m", vec![numeral(a), numeral(b)]);
            assert_eq!(
                value_of(&normalize_term(&sum, &th, DEFAULT_FUEL).unwrap()).unwrap(),
                a + b
            );
            assert_eq!(
                value_of(&normalize_term(&prod, &th, DEFAULT_FUEL).unwrap()).unwrap(),
                a * b
            );
            cases += 2;
        }
    }
    println!(
        "criterion 2 (arithmetic oracle): PASS - {} cases exact",
        cases
    );
}

/// Criterion 3: the mutation catalog is rejected with the expected codes
/// and the untouched fixture proofs stay accepted.
#[test]
fn criterion_3_checker_mutation_suite() {
    let catalog = mutation_catalog();
    assert!(catalog.len() >= 10);
    for case in &catalog {
        let codes = run_mutation(case);
        assert!(
            codes.contains(&case.expect),
            "{}: expected {:?}, got {:?}",
            case.name,
            case.expect,
            codes
        );
    }
    // No false accepts on the valid counterparts.
    let doc = load_fixture("zero_comm.psk");
    let theory = doc.theory();
    let axioms = doc.axioms();
    let signature = Signature::infer(&theory);
    let ctx = CheckContext::new(
        &theory,
        &axioms,
        &signature,
        CheckOptions { allow_links: true, ..CheckOptions::default() },
    );
    for name in ["pi", "nu"] {
        assert!(check_derivation(doc.proof(name).unwrap(), &ctx).is_valid());
    }
    println!(
        "criterion 3 (checker mutation suite): PASS - {} corruptions rejected, 0 false accepts",
        catalog.len()
    );
}

/// Criterion 4: translation round-trips preserve end sequents and
/// re-validate; the induction fixture becomes a schema that unfolds
/// soundly.
#[test]
fn criterion_4_translation_round_trips() {
    let mut round_trips = 0;
    for (file, name) in [
        ("zero_comm.psk", "zero_comm"),
        ("assoc.psk", "assoc"),
        ("comm.psk", "comm"),
        ("exists_it.psk", "exists_it"),
        ("exists_two.psk", "exists_two"),
        ("exists_qcut.psk", "exists_qcut"),
    ] {
        let doc = load_fixture(file);
        let theory = doc.theory();
        let axioms = doc.axioms();
        let schema = doc.schema(name).unwrap();
        let tr = schema_to_mvlkie(schema, &theory, &axioms, DEFAULT_FUEL)
            .unwrap_or_else(|e| panic!("{}: {}", name, e));
        let back = mvlkie_to_schema(&tr.tree, &theory, &axioms, "rt", DEFAULT_FUEL)
            .unwrap_or_else(|e| panic!("{}: {}", name, e));
        let report = validate_schema(&back, &theory, &axioms, DEFAULT_FUEL);
        assert!(report.is_valid(), "{}: {:?}", name, report.issues);
        assert!(
            schema
                .end_sequent()
                .unwrap()
                .multiset_eq(&back.end_sequent().unwrap()),
            "{}",
            name
        );
        round_trips += 1;
    }
    // The explicit-induction fixture translates to a schema that unfolds
    // soundly at all small instances.
    let doc = load_fixture("mvlkie_comm.psk");
    let theory = doc.theory();
    let axioms = doc.axioms();
    let tree = doc.proof("comm_mvlkie").unwrap();
    let schema = mvlkie_to_schema(tree, &theory, &axioms, "comm_rt", DEFAULT_FUEL).unwrap();
    let mut unfolds = 0;
    for sigma in all_substs(&["a", "b"], 6) {
        let run = unfold(&schema, &sigma, &theory, &axioms, &UnfoldOptions::default())
            .unwrap_or_else(|e| panic!("comm_rt at {}: {}", sigma, e));
        assert!(verify_unfolded(&run, &theory, &axioms, DEFAULT_FUEL), "at {}", sigma);
        unfolds += 1;
    }
    println!(
        "criterion 4 (translation round-trips): PASS - {} round-trips, induction fixture re-unfolds at {} instances",
        round_trips, unfolds
    );
}

/// Criterion 5: E elimination yields E-free checkable proofs within the
/// cut budget.
#[test]
fn criterion_5_e_elimination() {
    let snippets = [
        (
            "one-step",
            r#"(theory PA (use E_PA))
(proof p (rule e (seq (ant) (suc (= (^a 0 0) 0))) (eqax refl (seq (ant) (suc (= 0 0))))))"#,
        ),
        (
            "zero-comm base",
            r#"(theory PA (use E_PA))
(proof p
  (rule e (seq (ant) (suc (= (^a 0 0) (^a 0 0))))
    (rule e (seq (ant) (suc (= (^a 0 0) 0)))
      (eqax refl (seq (ant) (suc (= 0 0)))))))"#,
        ),
        (
            "three steps with a successor layer",
            r#"(theory PA (use E_PA))
(proof p
  (rule e (seq (ant) (suc (= (^a 0 1) (^a (s 0) 0))))
    (rule e (seq (ant) (suc (= (^a 0 1) (s (^a 0 0)))))
      (rule e (seq (ant) (suc (= (^a 0 1) 1)))
        (eqax refl (seq (ant) (suc (= 1 1))))))))"#,
        ),
        (
            "five steps",
            r#"(theory PA (use E_PA))
(proof p
  (rule e (seq (ant) (suc (= (^a 0 (^a 0 0)) (^a 0 (^a 0 0)))))
    (rule e (seq (ant) (suc (= (^a 0 (^a 0 0)) (^a 0 0))))
      (rule e (seq (ant) (suc (= (^a 0 (^a 0 0)) 0)))
        (rule e (seq (ant) (suc (= (^a 0 0) 0)))
          (rule e (seq (ant) (suc (= (^a 0 0) (^a 0 0))))
            (eqax refl (seq (ant) (suc (= (^a 0 0) (^a 0 0)))))))))))"#,
        ),
    ];
    for (name, src) in snippets {
        let (doc, diags) = parse_document(src);
        assert!(diags.is_empty(), "{}: {:?}", name, diags);
        let theory = doc.theory();
        let axioms = doc.axioms();
        let tree = doc.proof("p").unwrap();
        let e_nodes = count_e_nodes(tree);
        assert!(e_nodes <= 5);
        let cuts_before = count_cuts(tree);
        let out = eliminate_e_rule(tree, &AxPaBase::new())
            .unwrap_or_else(|e| panic!("{}: {}", name, e));
        assert_eq!(count_e_nodes(&out), 0, "{}", name);
        let growth = count_cuts(&out) - cuts_before;
        assert!(
            growth <= 4 * e_nodes,
            "{}: {} cuts for {} E nodes",
            name,
            growth,
            e_nodes
        );
        let signature = Signature::infer(&theory);
        let ctx = CheckContext::new(&theory, &axioms, &signature, CheckOptions::default());
        let report = check_derivation(&out, &ctx);
        assert!(report.is_valid(), "{}: {:?}", name, report.violations);
        assert!(out.end_sequent().multiset_eq(tree.end_sequent()));
    }
    println!(
        "criterion 5 (E elimination): PASS - {} fixtures, growth within 4 cuts per E node",
        snippets.len()
    );
}

/// Criterion 6: the PRA pass clears every active and internal parameter
/// and reproduces the bundled arithmetic proof.
#[test]
fn criterion_6_pra_pass() {
    let doc = load_fixture("comm.psk");
    let theory = doc.theory();
    let axioms = doc.axioms();
    let schema = doc.schema("comm").unwrap();
    let tr = schema_to_mvlkie(schema, &theory, &axioms, DEFAULT_FUEL).unwrap();
    let e_free = eliminate_e_rule(&tr.tree, &AxPaBase::new()).unwrap();
    let pra = to_pra(&e_free).unwrap();
    // No active or internal parameter anywhere, node by node.
    pra.walk(&mut |node, path| {
        assert!(
            node.conclusion.params_of(ParamKind::Active).is_empty()
                && node.conclusion.params_of(ParamKind::Internal).is_empty(),
            "actives or internals at {:?}",
            path
        );
    });
    let signature = Signature::infer(&theory);
    let ctx = CheckContext::new(
        &theory,
        &axioms,
        &signature,
        CheckOptions { mvind: MvIndMode::Pra, ..CheckOptions::default() },
    );
    let report = check_derivation(&pra, &ctx);
    assert!(report.is_valid(), "{:?}", report.violations);
    assert!(pra.end_sequent().multiset_eq(tr.tree.end_sequent()));
    assert_eq!(pra.count_rule("ind"), 3);
    // Byte-identical to the bundled translation, pinning the fresh-name
    // choice.
    let bundled = std::fs::read_to_string(format!(
        "{}/fixtures/pra_comm.psk",
        env!("CARGO_MANIFEST_DIR")
    ))
    .unwrap();
    let mut items = vec![Item::Theory { name: theory.name.clone(), theory: theory.clone() }];
    items.push(Item::Axioms(axioms.clone()));
    items.push(Item::Proof { name: "comm_pra".into(), tree: pra });
    let printed = print_document(&PskDocument { items });
    assert_eq!(printed, bundled);
    println!(
        "criterion 6 (PRA pass): PASS - parameter-free, PRA-profile valid, bundled proof reproduced"
    );
}

/// Criterion 7: Herbrand witnesses agree with the unfolded proofs, the
/// disjunction is valid, and the system is linear in the schema.
#[test]
fn criterion_7_herbrand_cross_validation() {
    let mut checked = 0;
    for (file, name) in [("exists_it.psk", "exists_it"), ("exists_two.psk", "exists_two")] {
        let doc = load_fixture(file);
        let theory = doc.theory();
        let axioms = doc.axioms();
        let schema = doc.schema(name).unwrap();
        let system =
            extract_herbrand_system(schema, &theory, &axioms, DEFAULT_FUEL).unwrap();
        assert!(system.w_rules.len() <= 2 * schema.components.len(), "{}", name);
        let param = system.params[0].name.clone();
        for g in 0..=5u64 {
            let table = normalize_witnesses(&system, &[g], DEFAULT_FUEL).unwrap();
            let sigma = ground_subst(&[(param.as_str(), g)]);
            let run =
                unfold(schema, &sigma, &theory, &axioms, &UnfoldOptions::default()).unwrap();
            let harvested = harvest_witnesses(&run.tree);
            assert!(
                witness_tables_match(&table, &harvested, &theory, DEFAULT_FUEL).unwrap(),
                "{} at {}",
                name,
                g
            );
            assert!(
                verify_herbrand_disjunction(&system, &[g], &table, &theory, DEFAULT_FUEL)
                    .unwrap(),
                "{} at {}",
                name,
                g
            );
            checked += 1;
        }
    }
    println!(
        "criterion 7 (Herbrand cross-validation): PASS - {} parameter values matched and valid",
        checked
    );
}

/// Criterion 8: identical invocations produce byte-identical output.
#[test]
fn criterion_8_determinism() {
    let fixture = |name: &str| {
        format!("{}/fixtures/{}", env!("CARGO_MANIFEST_DIR"), name)
    };
    let cases: Vec<Vec<String>> = vec![
        vec!["check".into(), fixture("comm.psk"), "--format".into(), "json".into()],
        vec![
            "unfold".into(),
            fixture("comm.psk"),
            "--subst".into(),
            "a=3,b=2".into(),
            "--seed".into(),
            "11".into(),
        ],
        vec![
            "translate".into(),
            fixture("comm.psk"),
            "--to".into(),
            "pra".into(),
        ],
        vec![
            "herbrand".into(),
            "verify".into(),
            fixture("exists_two.psk"),
            "--params".into(),
            "4".into(),
        ],
        vec!["fmt".into(), fixture("assoc.psk")],
    ];
    for args in &cases {
        let run = || {
            std::process::Command::new(env!("CARGO_BIN_EXE_schemakern"))
                .args(args)
                .output()
                .expect("binary runs")
        };
        let (a, b) = (run(), run());
        assert_eq!(a.stdout, b.stdout, "args {:?}", args);
        assert_eq!(a.stderr, b.stderr, "args {:?}", args);
        assert_eq!(a.status.code(), b.status.code());
    }
    println!(
        "criterion 8 (determinism): PASS - {} commands byte-identical across runs",
        cases.len()
    );
}
