use proptest::prelude::*;
use sroel::calculus::{check_consistency, Materialization};
use sroel::closure::compute_ranks;
use sroel::normalize::{normalize, Mode};
use sroel::ranked::{check_soundness, RankedInterpretation};
use sroel::{parse_kb, print_kb, Axiom, Concept, KnowledgeBase, Query, Signature, SroelError};

const CLASSES: [&str; 4] = ["A", "B", "C", "D"];
const INDIVIDUALS: [&str; 2] = ["a", "b"];
// `t` heads role chains; `r` and `s` stay simple.
const SIMPLE: [&str; 2] = ["r", "s"];

fn signature() -> Signature {
    let set = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
    Signature {
        concept_names: set(&CLASSES),
        role_names: set(&["r", "s", "t"]),
        individual_names: set(&INDIVIDUALS),
        simple_roles: Default::default(),
    }
}

fn plain() -> impl Strategy<Value = Concept> {
    let leaf = prop_oneof![
        Just(Concept::Top),
        proptest::sample::select(&CLASSES[..]).prop_map(Concept::name),
        proptest::sample::select(&INDIVIDUALS[..]).prop_map(Concept::nominal),
        proptest::sample::select(&SIMPLE[..]).prop_map(Concept::self_of),
    ];
    leaf.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.and(b)),
            (proptest::sample::select(&["r", "s", "t"][..]), inner).prop_map(|(r, c)| Concept::some(r, c)),
        ]
    })
}

fn rhs() -> impl Strategy<Value = Concept> {
    prop_oneof![4 => plain(), 1 => Just(Concept::Bot)]
}

/// Left-hand sides, possibly typical.
fn lhs() -> impl Strategy<Value = Concept> {
    prop_oneof![
        2 => plain(),
        2 => plain().prop_map(Concept::typical),
        1 => (plain().prop_map(Concept::typical), plain()).prop_map(|(t, c)| t.and(c)),
    ]
}

fn tbox_axiom(simple_only: bool) -> BoxedStrategy<Axiom> {
    if simple_only {
        (lhs(), rhs()).prop_map(|(l, r)| Axiom::gci(l, r)).boxed()
    } else {
        prop_oneof![
            3 => (lhs(), rhs()).prop_map(|(l, r)| Axiom::gci(l, r)),
            1 => (plain(), plain().prop_map(Concept::typical)).prop_map(|(l, r)| Axiom::gci(l, r)),
        ]
        .boxed()
    }
}

fn rbox_axiom() -> impl Strategy<Value = Axiom> {
    let role = || proptest::sample::select(&SIMPLE[..]).prop_map(String::from);
    prop_oneof![
        Just(Axiom::RoleIncl { sub: "r".into(), sup: "s".into() }),
        Just(Axiom::RoleChain { r1: "r".into(), r2: "s".into(), sup: "t".into() }),
        Just(Axiom::RoleChain { r1: "t".into(), r2: "t".into(), sup: "t".into() }),
        (role(), role()).prop_map(|(r1, r2)| Axiom::RoleConj { r1, r2, sup: "t".into() }),
        (plain(), plain()).prop_map(|(c, d)| Axiom::ProductToRole { c, d, sup: "t".into() }),
        (plain(), plain()).prop_map(|(c, d)| Axiom::RoleToProduct { sub: "s".into(), c, d }),
    ]
}

fn abox_axiom(simple_only: bool) -> BoxedStrategy<Axiom> {
    let ind = || proptest::sample::select(&INDIVIDUALS[..]).prop_map(String::from);
    let concept = if simple_only {
        plain().boxed()
    } else {
        prop_oneof![3 => plain(), 1 => plain().prop_map(Concept::typical)].boxed()
    };
    prop_oneof![
        (concept, ind()).prop_map(|(c, a)| Axiom::ConceptAssertion { c, a }),
        (proptest::sample::select(&["r", "s", "t"][..]), ind(), ind())
            .prop_map(|(r, a, b)| Axiom::RoleAssertion { r: r.into(), a, b }),
    ]
    .boxed()
}

fn kb_with(simple_only: bool, tbox: usize, rbox: usize, abox: usize) -> impl Strategy<Value = KnowledgeBase> {
    (
        proptest::collection::vec(tbox_axiom(simple_only), 0..=tbox),
        proptest::collection::vec(rbox_axiom(), 0..=rbox),
        proptest::collection::vec(abox_axiom(simple_only), 0..=abox),
    )
        .prop_map(|(tbox, rbox, abox)| {
            let mut kb = KnowledgeBase {
                signature: signature(),
                tbox,
                rbox,
                abox,
            };
            kb.compute_simple_roles();
            kb
        })
}

fn any_kb() -> impl Strategy<Value = KnowledgeBase> {
    kb_with(false, 5, 2, 4)
}

fn interpretation() -> impl Strategy<Value = RankedInterpretation> {
    (1usize..=3).prop_flat_map(|n| {
        let set = move || proptest::collection::btree_set(0..n, 0..=n);
        let pairs = move || proptest::collection::btree_set((0..n, 0..n), 0..=n * n);
        (
            proptest::collection::vec(0u32..3, n),
            proptest::collection::vec(set(), CLASSES.len()),
            proptest::collection::vec(pairs(), 3),
            proptest::collection::vec(0..n, INDIVIDUALS.len()),
        )
            .prop_map(move |(rank, cs, rs, inds)| RankedInterpretation {
                size: n,
                rank,
                concepts: CLASSES.iter().map(|c| c.to_string()).zip(cs).collect(),
                roles: ["r", "s", "t"].iter().map(|r| r.to_string()).zip(rs).collect(),
                individuals: INDIVIDUALS.iter().map(|a| a.to_string()).zip(inds).collect(),
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_kbs_are_valid(kb in any_kb()) {
        prop_assert!(kb.validate().violations.is_empty(), "{:?}", kb.validate().violations);
    }

    #[test]
    fn printing_round_trips(kb in any_kb()) {
        let text = print_kb(&kb);
        let back = parse_kb(&text).unwrap();
        prop_assert_eq!(back, kb);
    }

    #[test]
    fn normal_form_is_linear(kb in any_kb()) {
        let size: usize = kb.axioms().map(|(_, _, a)| a.size()).sum();
        let (nkb, _) = normalize(&kb, &[], Mode::General);
        prop_assert!(nkb.axioms.len() <= 4 * size + 1, "{} axioms from size {size}", nkb.axioms.len());
        let (simple, _) = normalize(&kb, &[], Mode::Simple);
        prop_assert!(simple.axioms.len() <= 4 * size + 1, "{} simple axioms from size {size}", simple.axioms.len());
    }

    #[test]
    fn typical_elements_are_minimal_members(m in interpretation(), c in plain()) {
        let ext = m.extension(&c).unwrap();
        let typ = m.extension(&c.clone().typical()).unwrap();
        prop_assert!(typ.is_subset(&ext));
        prop_assert_eq!(ext.is_empty(), typ.is_empty());
        let low = ext.iter().map(|&e| m.rank[e]).min();
        prop_assert!(typ.iter().all(|&e| Some(m.rank[e]) == low));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn derived_facts_hold_in_small_models(kb in kb_with(false, 3, 1, 3)) {
        let report = check_soundness(&kb, 2, 2).unwrap();
        prop_assert!(report.violations.is_empty(), "{} fails", report.violations[0].0);
    }

    #[test]
    fn normalized_kb_has_the_same_instances(kb in kb_with(false, 3, 1, 3)) {
        let (nkb, _) = normalize(&kb, &[], Mode::General);
        let a = Materialization::new(&kb, &[]).unwrap();
        let b = Materialization::new(&nkb.to_kb(), &[]).unwrap();
        prop_assert_eq!(a.consistent(), b.consistent());
        let sig = &kb.signature;
        let original = |t: &Vec<String>| t.iter().all(|x| sig.contains(x) || x == "top" || x == "bot");
        let pick = |m: &Materialization| -> Vec<Vec<String>> {
            let mut v: Vec<_> = m.tuples("inst").into_iter().filter(original).collect();
            v.sort();
            v
        };
        prop_assert_eq!(pick(&a), pick(&b));
    }

    #[test]
    fn every_ranked_concept_gets_one_rank(kb in kb_with(true, 4, 1, 2)) {
        match compute_ranks(&kb, &[]) {
            Ok(ranks) => {
                let occurrences = kb.tbox_typicality_count() as u32;
                for e in &ranks.entries {
                    if let sroel::closure::Rank::Finite(r) = e.rank {
                        prop_assert!(r <= occurrences, "rank {r} above {occurrences}");
                    }
                }
                prop_assert!(ranks.fixpoint_stage.is_some());
            }
            Err(SroelError::Inconsistent) => prop_assert!(!check_consistency(&kb).unwrap()),
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}

#[test]
fn instance_query_over_fresh_names_is_rejected() {
    let kb = parse_kb("class A.\nindividual a.\nT(A)(a).\n").unwrap();
    let (nkb, _) = normalize(&kb, &[], Mode::General);
    let fresh = nkb.fresh_name_log[0].name.clone();
    let q = Query::InstanceOf { c: Concept::name(fresh), a: "a".into() };
    assert!(sroel::calculus::check_instance(&kb, &q).is_err());
}
