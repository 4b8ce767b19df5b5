use sroel::calculus::{check_consistency, check_instance, check_subsumption, Materialization};
use sroel::{parse_kb, parse_query, KnowledgeBase};

fn fixture(name: &str) -> KnowledgeBase {
    let path = format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    parse_kb(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn entailed(kb: &KnowledgeBase, q: &str) -> bool {
    let q = parse_query(q, kb).unwrap();
    match q {
        sroel::Query::Subsumes { .. } | sroel::Query::TypSubsumes { .. } => check_subsumption(kb, &q).unwrap().entailed,
        _ => check_instance(kb, &q).unwrap().entailed,
    }
}

#[test]
fn example_one_instances() {
    let kb = fixture("example1.kbt");
    assert!(check_consistency(&kb).unwrap());
    for q in ["Young(mario)", "T(Student)(mario)", "MathHater(luigi)", "MathHater(paul)", "MathLover(tom)"] {
        assert!(entailed(&kb, q), "{q}");
    }
    assert!(!entailed(&kb, "(some hasHair.{Black})(luigi)"));
    assert!(!entailed(&kb, "MathHater(tom)"));
    assert!(entailed(&kb, "friendOf(mario, mary)"));
}

#[test]
fn example_one_subsumptions() {
    let kb = fixture("example1.kbt");
    assert!(entailed(&kb, "some friendOf.{mary} <= Young"));
    assert!(entailed(&kb, "Student <= Student"));
    assert!(!entailed(&kb, "Student <= Young"));
    assert!(entailed(&kb, "T(Student) <= Young"));
    assert!(!entailed(&kb, "T(Young and Italian) <= some hasHair.{Black}"));
}

#[test]
fn batch_matches_single_queries() {
    let kb = fixture("example1.kbt");
    let qs: Vec<_> = ["Young(mario)", "MathLover(tom)", "Nerd(paul)"]
        .iter()
        .map(|q| parse_query(q, &kb).unwrap())
        .collect();
    let m = Materialization::new(&kb, &qs).unwrap();
    let got: Vec<bool> = (0..qs.len()).map(|i| m.verdict(i).unwrap().entailed).collect();
    assert_eq!(got, vec![true, true, false]);
}

#[test]
fn simple_inconsistency() {
    let kb = parse_kb("class A. individual a. A <= bot. A(a).").unwrap();
    assert!(!check_consistency(&kb).unwrap());
    let empty = parse_kb("").unwrap();
    assert!(check_consistency(&empty).unwrap());
}

#[test]
fn role_constructs() {
    let kb = fixture("roles.kbt");
    assert!(check_consistency(&kb).unwrap());
    for q in [
        "hasDescendant(ann, cid)",
        "caresFor(ann, bob)",
        "Person(bob)",
        "Narcissist(bob)",
        "Parent(bob)",
        "related(bob, cid)",
        "(some hasDescendant.{cid})(ann)",
    ] {
        assert!(entailed(&kb, q), "{q}");
    }
    for q in ["Narcissist(ann)", "related(ann, ann)", "Proud(ann)"] {
        assert!(!entailed(&kb, q), "{q}");
    }
}
