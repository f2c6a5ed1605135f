//! The checker rejects every curated single-node corruption with the
//! expected violation code, and accepts the untouched fixture proofs.

mod common;

use common::{load_fixture, mutation_catalog, run_mutation};
use schemakern::check::{check_derivation, CheckContext, CheckOptions, MvIndMode};
use schemakern::sig::Signature;

#[test]
fn every_mutation_is_rejected_with_its_code() {
    let catalog = mutation_catalog();
    assert!(catalog.len() >= 10);
    for case in &catalog {
        let codes = run_mutation(case);
        assert!(
            codes.contains(&case.expect),
            "{}: expected {:?}, checker reported {:?}",
            case.name,
            case.expect,
            codes
        );
    }
}

#[test]
fn no_false_accepts_on_valid_fixture_proofs() {
    for (file, proofs, mvind) in [
        ("zero_comm.psk", vec!["pi", "nu"], MvIndMode::Off),
        ("mvlkie_comm.psk", vec!["comm_mvlkie"], MvIndMode::MvLkie),
        ("pra_comm.psk", vec!["comm_pra"], MvIndMode::Pra),
    ] {
        let doc = load_fixture(file);
        let theory = doc.theory();
        let axioms = doc.axioms();
        let signature = Signature::infer(&theory);
        let ctx = CheckContext::new(
            &theory,
            &axioms,
            &signature,
            CheckOptions { allow_links: true, mvind, ..CheckOptions::default() },
        );
        for name in proofs {
            let report = check_derivation(doc.proof(name).unwrap(), &ctx);
            assert!(
                report.is_valid(),
                "{}/{}: {:?}",
                file,
                name,
                report.violations
            );
        }
    }
}
