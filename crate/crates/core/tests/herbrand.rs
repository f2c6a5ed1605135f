//! Herbrand-system extraction, witness normalization, cross-validation
//! against unfolded proofs, and disjunction validity.

use schemakern::evaluation::{ground_subst, unfold, UnfoldOptions};
use schemakern::herbrand::{
    extract_herbrand_system, harvest_witnesses, normalize_witnesses, parse_system,
    print_system, schema_size, system_size, verify_herbrand_disjunction,
    witness_tables_match, HerbrandError,
};
use schemakern::psk::{parse_document, PskDocument};
use schemakern::rewrite::DEFAULT_FUEL;
use schemakern::term::Term;

fn load(name: &str) -> PskDocument {
    let path = format!("{}/fixtures/{}", env!("CARGO_MANIFEST_DIR"), name);
    let source = std::fs::read_to_string(&path).unwrap();
    let (doc, diags) = parse_document(&source);
    assert!(diags.is_empty(), "{}: {:?}", name, diags);
    doc
}

#[test]
fn extraction_yields_two_rules_per_component() {
    let doc = load("exists_it.psk");
    let schema = doc.schema("exists_it").unwrap();
    let system =
        extract_herbrand_system(schema, &doc.theory(), &doc.axioms(), DEFAULT_FUEL).unwrap();
    assert_eq!(system.w_rules.len(), 4);
    assert!(system.w_rules.len() <= 2 * schema.components.len());
    assert_eq!(system.params.len(), 1);
    assert_eq!(system.ex_vars.len(), 1);
}

#[test]
fn iterator_witnesses_normalize_to_f_chains() {
    let doc = load("exists_it.psk");
    let theory = doc.theory();
    let schema = doc.schema("exists_it").unwrap();
    let system = extract_herbrand_system(schema, &theory, &doc.axioms(), DEFAULT_FUEL).unwrap();
    // gamma = 0: base only.
    let t0 = normalize_witnesses(&system, &[0], DEFAULT_FUEL).unwrap();
    let expected0 = vec![vec![Term::app("^jt", vec![Term::Zero])]];
    assert!(witness_tables_match(&t0, &expected0, &theory, DEFAULT_FUEL).unwrap());
    // gamma = 2: the single witness is f(f(c)).
    let t2 = normalize_witnesses(&system, &[2], DEFAULT_FUEL).unwrap();
    assert_eq!(t2.len(), 1);
    let expected2 = vec![vec![Term::app(
        "f",
        vec![Term::app("f", vec![Term::cnst("c")])],
    )]];
    assert!(witness_tables_match(&t2, &expected2, &theory, DEFAULT_FUEL).unwrap());
}

#[test]
fn witness_count_grows_with_two_per_step() {
    let doc = load("exists_two.psk");
    let theory = doc.theory();
    let schema = doc.schema("exists_two").unwrap();
    let system = extract_herbrand_system(schema, &theory, &doc.axioms(), DEFAULT_FUEL).unwrap();
    for g in 0..=5u64 {
        let table = normalize_witnesses(&system, &[g], DEFAULT_FUEL).unwrap();
        assert_eq!(table.len() as u64, 1 + 2 * g, "gamma = {}", g);
    }
}

#[test]
fn cross_validation_against_unfolded_proofs() {
    for (file, name) in [("exists_it.psk", "exists_it"), ("exists_two.psk", "exists_two")] {
        let doc = load(file);
        let theory = doc.theory();
        let axioms = doc.axioms();
        let schema = doc.schema(name).unwrap();
        let system =
            extract_herbrand_system(schema, &theory, &axioms, DEFAULT_FUEL).unwrap();
        let param = system.params[0].name.clone();
        for g in 0..=5u64 {
            let table = normalize_witnesses(&system, &[g], DEFAULT_FUEL).unwrap();
            let sigma = ground_subst(&[(param.as_str(), g)]);
            let report =
                unfold(schema, &sigma, &theory, &axioms, &UnfoldOptions::default()).unwrap();
            assert!(report.check.is_valid());
            let harvested = harvest_witnesses(&report.tree);
            assert!(
                witness_tables_match(&table, &harvested, &theory, DEFAULT_FUEL).unwrap(),
                "{} at {}: {:?} vs {:?}",
                name,
                g,
                table,
                harvested
            );
        }
    }
}

#[test]
fn disjunction_is_valid_and_monotone() {
    let doc = load("exists_it.psk");
    let theory = doc.theory();
    let schema = doc.schema("exists_it").unwrap();
    let system = extract_herbrand_system(schema, &theory, &doc.axioms(), DEFAULT_FUEL).unwrap();
    for g in 0..=4u64 {
        let table = normalize_witnesses(&system, &[g], DEFAULT_FUEL).unwrap();
        assert!(
            verify_herbrand_disjunction(&system, &[g], &table, &theory, DEFAULT_FUEL).unwrap()
        );
        // Monotone: junk lists never flip a valid disjunction.
        let mut padded = table.clone();
        padded.push(vec![Term::cnst("c")]);
        assert!(
            verify_herbrand_disjunction(&system, &[g], &padded, &theory, DEFAULT_FUEL).unwrap()
        );
    }
    // The empty disjunction is invalid, and a wrong witness alone fails.
    assert!(!verify_herbrand_disjunction(&system, &[2], &vec![], &theory, DEFAULT_FUEL).unwrap());
    let wrong = vec![vec![Term::cnst("c")]];
    assert!(
        !verify_herbrand_disjunction(&system, &[2], &wrong, &theory, DEFAULT_FUEL).unwrap()
    );
}

#[test]
fn quantified_cut_is_rejected() {
    let doc = load("exists_qcut.psk");
    let schema = doc.schema("exists_qcut").unwrap();
    let err = extract_herbrand_system(schema, &doc.theory(), &doc.axioms(), DEFAULT_FUEL)
        .unwrap_err();
    assert!(matches!(err, HerbrandError::QuantifiedCut(_)), "{}", err);
}

#[test]
fn qcut_schema_still_unfolds() {
    let doc = load("exists_qcut.psk");
    let theory = doc.theory();
    let axioms = doc.axioms();
    let schema = doc.schema("exists_qcut").unwrap();
    for g in 0..=4u64 {
        let sigma = ground_subst(&[("a", g)]);
        let report = unfold(schema, &sigma, &theory, &axioms, &UnfoldOptions::default())
            .unwrap_or_else(|e| panic!("a={}: {}", g, e));
        assert!(report.check.is_valid(), "a={}: {:?}", g, report.check.violations);
    }
}

#[test]
fn non_existential_end_sequent_is_rejected() {
    let doc = load("comm.psk");
    let schema = doc.schema("comm").unwrap();
    let err = extract_herbrand_system(schema, &doc.theory(), &doc.axioms(), DEFAULT_FUEL)
        .unwrap_err();
    assert!(matches!(err, HerbrandError::WrongEndSequentShape(_)), "{}", err);
}

#[test]
fn system_size_is_linear_in_the_schema() {
    for (file, name) in [("exists_it.psk", "exists_it"), ("exists_two.psk", "exists_two")] {
        let doc = load(file);
        let schema = doc.schema(name).unwrap();
        let system =
            extract_herbrand_system(schema, &doc.theory(), &doc.axioms(), DEFAULT_FUEL).unwrap();
        assert!(system.w_rules.len() <= 2 * schema.components.len());
        assert!(
            system_size(&system) <= schema_size(schema),
            "{}: {} vs {}",
            name,
            system_size(&system),
            schema_size(schema)
        );
    }
}

#[test]
fn hrs_round_trips() {
    let doc = load("exists_it.psk");
    let schema = doc.schema("exists_it").unwrap();
    let system =
        extract_herbrand_system(schema, &doc.theory(), &doc.axioms(), DEFAULT_FUEL).unwrap();
    let text = print_system(&system);
    let back = parse_system(&text).unwrap();
    assert_eq!(system, back);
    assert_eq!(text, print_system(&back));
}
