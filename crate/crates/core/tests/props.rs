//! Property tests for the term layer and the rewrite engine.

use proptest::prelude::*;

use schemakern::formula::Formula;
use schemakern::psk::{parse_document, print_document, Item, PskDocument};
use schemakern::rewrite::{e_pa, joinable, normalize, Expr, DEFAULT_FUEL};
use schemakern::subst::Subst;
use schemakern::term::{numeral, ParamKind, Parameter, Term};

fn numeric_term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        Just(Term::Zero),
        (0u64..4).prop_map(numeral),
        prop_oneof![Just("a"), Just("b"), Just("g")]
            .prop_map(|n| Term::param(ParamKind::Passive, n)),
        Just(Term::param(ParamKind::Active, "n")),
        Just(Term::param(ParamKind::Internal, "k")),
    ];
    leaf.prop_recursive(3, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Term::succ),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Term::app("^a", vec![a, b])),
            (inner.clone(), inner).prop_map(|(a, b)| Term::app("^m", vec![a, b])),
        ]
    })
}

fn small_formula() -> impl Strategy<Value = Formula> {
    (numeric_term(), numeric_term()).prop_map(|(a, b)| Formula::eq(a, b))
}

proptest! {
    #[test]
    fn parameter_kind_sets_are_pairwise_disjoint(f in small_formula()) {
        let actives = f.free_params(ParamKind::Active);
        let passives = f.free_params(ParamKind::Passive);
        let internals = f.free_params(ParamKind::Internal);
        for p in &actives {
            prop_assert!(!passives.contains(p) && !internals.contains(p));
        }
        for p in &passives {
            prop_assert!(!internals.contains(p));
        }
    }

    #[test]
    fn substitution_composes_on_disjoint_domains(t in numeric_term(), k in 0u64..5, v in 0u64..5) {
        let s1 = Subst::param(Parameter::active("n"), numeral(k)).unwrap();
        let s2 = Subst::param(Parameter::internal("k"), numeral(v)).unwrap();
        let sequential = s2.apply_term(&s1.apply_term(&t));
        let composed = s1.then(&s2).apply_term(&t);
        prop_assert_eq!(sequential, composed);
    }

    #[test]
    fn ground_substitution_clears_passives(f in small_formula()) {
        let sigma = Subst::ground_numeric(vec![
            ("a".into(), 1),
            ("b".into(), 2),
            ("g".into(), 3),
        ]);
        let g = f.substitute(&sigma).unwrap();
        prop_assert!(g.free_params(ParamKind::Passive).is_empty());
    }

    #[test]
    fn normalize_is_idempotent(t in numeric_term()) {
        let th = e_pa();
        let n1 = normalize(&Expr::Term(t), &th, DEFAULT_FUEL).unwrap();
        let n2 = normalize(&n1, &th, DEFAULT_FUEL).unwrap();
        prop_assert_eq!(n1, n2);
    }

    #[test]
    fn joinable_is_reflexive_and_symmetric(a in numeric_term(), b in numeric_term()) {
        let th = e_pa();
        let ea = Expr::Term(a);
        let eb = Expr::Term(b);
        prop_assert!(joinable(&ea, &ea, &th, DEFAULT_FUEL).unwrap());
        let ab = joinable(&ea, &eb, &th, DEFAULT_FUEL).unwrap();
        let ba = joinable(&eb, &ea, &th, DEFAULT_FUEL).unwrap();
        prop_assert_eq!(ab, ba);
    }

    #[test]
    fn joinable_is_transitive_at_this_scale(
        a in numeric_term(),
        b in numeric_term(),
        c in numeric_term(),
    ) {
        let th = e_pa();
        let (ea, eb, ec) = (Expr::Term(a), Expr::Term(b), Expr::Term(c));
        let ab = joinable(&ea, &eb, &th, DEFAULT_FUEL).unwrap();
        let bc = joinable(&eb, &ec, &th, DEFAULT_FUEL).unwrap();
        if ab && bc {
            prop_assert!(joinable(&ea, &ec, &th, DEFAULT_FUEL).unwrap());
        }
    }

    #[test]
    fn printed_formulas_parse_back(f in small_formula()) {
        let tree = schemakern::calculus::ProofTree::leaf(
            schemakern::sequent::Sequent::new(vec![f.clone()], vec![f.clone()]),
            schemakern::calculus::Rule::Axiom,
        );
        let doc = PskDocument {
            items: vec![Item::Proof { name: "p".into(), tree }],
        };
        let text = print_document(&doc);
        let (back, diags) = parse_document(&text);
        prop_assert!(diags.is_empty(), "{:?}", diags);
        prop_assert_eq!(doc, back);
    }
}
