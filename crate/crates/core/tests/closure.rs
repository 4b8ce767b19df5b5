use sroel::closure::{compute_ranks, rc_consistent, rc_entails, Rank, RankAssignment};
use sroel::{parse_concept, parse_kb, parse_query, Concept, KnowledgeBase, SroelError};

fn fixture(name: &str) -> KnowledgeBase {
    let path = format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    parse_kb(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn concepts(kb: &KnowledgeBase, src: &[&str]) -> Vec<Concept> {
    src.iter().map(|s| parse_concept(s, kb).unwrap()).collect()
}

fn rank(ranks: &RankAssignment, kb: &KnowledgeBase, c: &str) -> Rank {
    ranks.rank_of(&parse_concept(c, kb).unwrap()).unwrap_or_else(|| panic!("no rank for {c}"))
}

const STUDENT_QUERIES: [&str; 3] = ["Student and Italian", "Student and Young", "Young and Italian"];

#[test]
fn student_tbox_ranks() {
    let kb = fixture("tbox_af.kbt");
    let ranks = compute_ranks(&kb, &concepts(&kb, &STUDENT_QUERIES)).unwrap();
    for (c, r) in [
        ("top", 0),
        ("Student", 0),
        ("Italian", 0),
        ("Student and Italian", 0),
        ("Student and Young", 0),
        ("Young and Italian", 0),
        ("Student and Nerd", 1),
    ] {
        assert_eq!(rank(&ranks, &kb, c), Rank::Finite(r), "{c}");
    }
    assert!(ranks.infinite().is_empty());
    assert_eq!(ranks.fixpoint_stage, Some(2));
}

#[test]
fn student_tbox_closure() {
    let kb = fixture("tbox_af.kbt");
    let yes = |q: &str| rc_entails(&kb, &parse_query(q, &kb).unwrap()).unwrap().in_closure;
    assert!(yes("T(Young and Italian) <= some hasHair.{Black}"));
    assert!(yes("T(Student) <= MathHater"));
    assert!(yes("T(Student and Nerd) <= MathLover"));
    // Exceptional subclasses inherit no defeasible property of the parent.
    assert!(!yes("T(Student and Nerd) <= Young"));
    assert!(!yes("T(Student and Nerd) <= MathHater"));
    assert!(!yes("T(Italian) <= Young"));
    assert!(rc_consistent(&kb).unwrap());
}

#[test]
fn nominal_typicality_clash() {
    let kb = fixture("rc_clash.kbt");
    assert!(sroel::calculus::check_consistency(&kb).unwrap());
    assert!(!rc_consistent(&kb).unwrap());

    let base = fixture("rc_clash_base.kbt");
    assert!(rc_consistent(&base).unwrap());
    let q = &STUDENT_QUERIES;
    let before = compute_ranks(&fixture("tbox_af.kbt"), &concepts(&fixture("tbox_af.kbt"), q)).unwrap();
    let after = compute_ranks(&base, &concepts(&base, q)).unwrap();
    for e in &before.entries {
        assert_eq!(after.rank_of(&e.concept), Some(e.rank), "{}", e.label());
    }
}

#[test]
fn disjoint_typical_parents() {
    let kb = fixture("example4.kbt");
    let ranks = compute_ranks(&kb, &concepts(&kb, &["D"])).unwrap();
    assert_eq!(rank(&ranks, &kb, "A"), Rank::Finite(0));
    assert_eq!(rank(&ranks, &kb, "B"), Rank::Finite(0));
    assert_eq!(rank(&ranks, &kb, "D"), Rank::Finite(1));
}

#[test]
fn rejects_non_simple_and_inconsistent() {
    let kb = fixture("example1.kbt");
    assert!(matches!(compute_ranks(&kb, &[]), Err(SroelError::NotSimple { .. })));
    let kb = parse_kb("class A.\nindividual a.\nA <= bot.\nA(a).\n").unwrap();
    assert!(matches!(compute_ranks(&kb, &[]), Err(SroelError::Inconsistent)));
    let kb = parse_kb("class A, B.\nT(A) <= B.\n").unwrap();
    let q = parse_query("T(A) <= T(B)", &kb);
    if let Ok(q) = q {
        assert!(matches!(rc_entails(&kb, &q), Err(SroelError::Unsupported(_))));
    }
}

#[test]
fn unsatisfiable_concept_has_infinite_rank() {
    let kb = parse_kb("class A, B.\nA <= bot.\nT(A) <= B.\n").unwrap();
    let ranks = compute_ranks(&kb, &[]).unwrap();
    assert_eq!(ranks.rank_of(&Concept::Name("A".into())), Some(Rank::Infinite));
    let q = parse_query("T(A) <= B", &kb).unwrap();
    assert!(rc_entails(&kb, &q).unwrap().in_closure);
}
