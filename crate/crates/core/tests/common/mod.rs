#![allow(dead_code)]

//! Shared test helpers: fixture loading and the checker mutation catalog.

use schemakern::check::{MvIndMode, ViolationCode};
use schemakern::psk::{parse_document, PskDocument};

pub fn load_fixture(name: &str) -> PskDocument {
    let path = format!("{}/fixtures/{}", env!("CARGO_MANIFEST_DIR"), name);
    let source = std::fs::read_to_string(&path).unwrap();
    let (doc, diags) = parse_document(&source);
    let rendered: Vec<String> = diags.iter().map(|d| d.render(&source)).collect();
    assert!(diags.is_empty(), "{}: {}", name, rendered.join("\n"));
    doc
}

pub struct MutationCase {
    pub name: &'static str,
    pub source: &'static str,
    pub proof: &'static str,
    pub expect: ViolationCode,
    pub allow_links: bool,
    pub mvind: MvIndMode,
}

/// Single-node corruptions of otherwise well-formed derivations, each
/// carrying the violation code the checker must report.
pub fn mutation_catalog() -> Vec<MutationCase> {
    fn case(
        name: &'static str,
        source: &'static str,
        expect: ViolationCode,
    ) -> MutationCase {
        MutationCase {
            name,
            source,
            proof: "bad",
            expect,
            allow_links: true,
            mvind: MvIndMode::MvLkie,
        }
    }
    let mut cases = vec![
        case(
            "and-r principal swapped across premises",
            r#"(proof bad
  (rule and-r (main (and (P 0) (Q 0))) (seq (ant (Q 0) (P 0)) (suc (and (P 0) (Q 0))))
    (ax (Q 0))
    (ax (P 0))))"#,
            ViolationCode::PrincipalMismatch,
        ),
        case(
            "weakening drops the premise context",
            r#"(proof bad
  (rule weak-l (f (P 0)) (seq (ant (P 0)) (suc (Q 0)))
    (ax (Q 0))))"#,
            ViolationCode::ContextMismatch,
        ),
        case(
            "eigenvariable reused in the conclusion",
            r#"(proof bad
  (rule forall-r (main (forall p:x (P p:x p:y))) (eigen p:y)
    (ax (P p:y p:y))))"#,
            ViolationCode::EigenvariableCaptured,
        ),
        case(
            "active parameter used as eigenvariable",
            r#"(proof bad
  (rule forall-r (main (forall p:x (P p:x))) (eigen n:y)
    (ax (P n:y))))"#,
            ViolationCode::ActiveQuantified,
        ),
        case(
            "e-step between distinct normal forms",
            r#"(theory PA (use E_PA))
(proof bad
  (rule e (seq (ant) (suc (= 1 0)))
    (eqax refl (seq (ant) (suc (= 0 0))))))"#,
            ViolationCode::NotJoinable,
        ),
        case(
            "reflexivity leaf with unequal sides",
            r#"(proof bad
  (eqax refl (seq (ant) (suc (= 0 1)))))"#,
            ViolationCode::BadSchemeInstance,
        ),
        case(
            "function congruence across different symbols",
            r#"(proof bad
  (eqax fn (seq (ant (= 0 1)) (suc (= (f 0) (g 1))))))"#,
            ViolationCode::BadSchemeInstance,
        ),
        case(
            "two distinct active parameters in one sequent",
            r#"(proof bad
  (ax (= n:a n:b)))"#,
            ViolationCode::MultipleActiveParams,
        ),
        case(
            "cut formula missing from both premises",
            r#"(proof bad
  (rule cut (cutf (R 9)) (seq (ant) (suc (P 0)))
    (ax (P 0))
    (ax (P 0))))"#,
            ViolationCode::PrincipalMismatch,
        ),
        case(
            "induction parameter occurs in the side context",
            r#"(axioms (axiom H (seq (ant (P n:n) (Q n:n)) (suc (P (s n:n))))))
(proof bad
  (rule ind (f (P n:n)) (on n:n) (to 3)
    (thax H (seq (ant (P n:n) (Q n:n)) (suc (P (s n:n)))))))"#,
            ViolationCode::IndEigenCondition,
        ),
        case(
            "theory axiom used at a non-instance",
            r#"(axioms (axiom H3 (seq (ant) (suc (P 0)))))
(proof bad
  (thax H3 (seq (ant) (suc (Q 1)))))"#,
            ViolationCode::AxiomMismatch,
        ),
        case(
            "contraction of a formula that is not there",
            r#"(proof bad
  (rule contr-l (f (P 0)) (seq (ant) (suc (P 0)))
    (ax (P 0))))"#,
            ViolationCode::ContextMismatch,
        ),
        case(
            "numeric witness for an individual binder",
            r#"(proof bad
  (rule exists-r (main (exists v:x (P v:x))) (witness 3)
    (ax (P 3))))"#,
            ViolationCode::SortMismatch,
        ),
        case(
            "cut with a single premise",
            r#"(proof bad
  (rule cut (cutf (P 0)) (seq (ant) (suc (P 0)))
    (ax (P 0))))"#,
            ViolationCode::ArityMismatch,
        ),
    ];
    cases.push(MutationCase {
        name: "link where links are forbidden",
        source: r#"(proof bad
  (link chi (args 0) (seq (ant) (suc (P 0)))))"#,
        proof: "bad",
        expect: ViolationCode::LinkNotAllowed,
        allow_links: false,
        mvind: MvIndMode::MvLkie,
    });
    cases.push(MutationCase {
        name: "induction where induction is forbidden",
        source: r#"(axioms (axiom H2 (seq (ant (P n:n)) (suc (P (s n:n))))))
(proof bad
  (rule ind (f (P n:n)) (on n:n) (to 2)
    (thax H2 (seq (ant (P n:n)) (suc (P (s n:n)))))))"#,
        proof: "bad",
        expect: ViolationCode::MvIndNotAllowed,
        allow_links: true,
        mvind: MvIndMode::Off,
    });
    cases
}

/// Runs one case; returns the violation codes the checker reported.
pub fn run_mutation(case: &MutationCase) -> Vec<ViolationCode> {
    use schemakern::check::{check_derivation, CheckContext, CheckOptions};
    use schemakern::sig::Signature;
    let (doc, diags) = parse_document(case.source);
    assert!(diags.is_empty(), "{}: {:?}", case.name, diags);
    let theory = doc.theory();
    let axioms = doc.axioms();
    let signature = Signature::infer(&theory);
    let options = CheckOptions {
        allow_links: case.allow_links,
        mvind: case.mvind,
        ..CheckOptions::default()
    };
    let ctx = CheckContext::new(&theory, &axioms, &signature, options);
    let tree = doc.proof(case.proof).expect("proof present");
    let report = check_derivation(tree, &ctx);
    report.violations.iter().map(|v| v.code).collect()
}
