//! End-to-end acceptance checks, one line per criterion.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use sroel::calculus::{check_consistency, check_instance, check_subsumption, Materialization};
use sroel::closure::{compute_ranks, rc_consistent, rc_entails, Rank, RankAssignment};
use sroel::normalize::{fresh_names, match_up_to_renaming, normalize, ClassRef, Mode, NormalAxiom};
use sroel::ranked::check_soundness;
use sroel::{parse_concept, parse_kb, parse_query, Concept, KnowledgeBase, Query};
use sroel_datalog::naive::evaluate_naive;
use sroel_datalog::random::random_program;
use sroel_datalog::{evaluate, Value};

type Outcome = Result<String, String>;

fn fixture(name: &str) -> KnowledgeBase {
    let path = format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    parse_kb(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn entailed(kb: &KnowledgeBase, q: &str) -> Result<bool, String> {
    let q = parse_query(q, kb).map_err(|e| e.to_string())?;
    let v = match q {
        Query::Subsumes { .. } | Query::TypSubsumes { .. } => check_subsumption(kb, &q),
        _ => check_instance(kb, &q),
    };
    v.map(|v| v.entailed).map_err(|e| e.to_string())
}

fn student_suite() -> Outcome {
    let start = Instant::now();
    let kb = fixture("example1.kbt");
    let expected = [
        ("Young(mario)", true),
        ("T(Student)(mario)", true),
        ("MathHater(luigi)", true),
        ("MathHater(paul)", true),
        ("MathLover(tom)", true),
        ("(some hasHair.{Black})(luigi)", false),
        ("T(Young and Italian) <= some hasHair.{Black}", false),
    ];
    for (q, want) in expected {
        let got = entailed(&kb, q)?;
        ensure(got == want, || format!("{q}: expected {want}, got {got}"))?;
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(5), || format!("took {took:?}"))?;
    Ok(format!("7 queries match in {:.2}s", took.as_secs_f64()))
}

fn normal_shapes() -> Outcome {
    let kb = parse_kb(concat!(
        "class Italian, Student, Young, MathHater, MathLover, Nerd.\n",
        "role hasHair, friendOf.\n",
        "individual Black, Blond.\n",
        "T(Italian) <= some hasHair.{Black}.\n",
        "T(Student and Nerd) <= MathLover.\n",
    ))
    .map_err(|e| e.to_string())?;
    let (nkb, _) = normalize(&kb, &[], Mode::General);
    let n = |s: &str| ClassRef::Name(s.to_owned());
    let expected = vec![
        NormalAxiom::SubExists {
            sub: n("X_I"),
            role: "hasHair".into(),
            filler: n("B"),
        },
        NormalAxiom::SubNominal {
            sub: n("B"),
            a: "Black".into(),
        },
        NormalAxiom::SubTyp {
            sub: n("X_I"),
            typ: n("Italian"),
        },
        NormalAxiom::TypSub {
            typ: n("Italian"),
            sup: n("X_I"),
        },
        NormalAxiom::Sub {
            sub: n("X_SN"),
            sup: n("MathLover"),
        },
        NormalAxiom::SubTyp {
            sub: n("X_SN"),
            typ: n("Y_SN"),
        },
        NormalAxiom::TypSub {
            typ: n("Y_SN"),
            sup: n("X_SN"),
        },
        NormalAxiom::Conj {
            left: n("Student"),
            right: n("Nerd"),
            sup: n("Y_SN"),
        },
        NormalAxiom::Sub {
            sub: n("Y_SN"),
            sup: n("Student"),
        },
        NormalAxiom::Sub {
            sub: n("Y_SN"),
            sup: n("Nerd"),
        },
    ];
    let fresh: Vec<String> = fresh_names(&nkb).into_iter().map(str::to_owned).collect();
    let holes: Vec<String> = ["X_I", "B", "X_SN", "Y_SN"].map(String::from).to_vec();
    match match_up_to_renaming(&nkb.axioms, &fresh, &expected, &holes) {
        Some(map) => Ok(format!("{} axioms, renaming {map:?}", nkb.axioms.len())),
        None => Err(format!(
            "no renaming matches:\n{}",
            nkb.axioms.iter().map(|a| format!("  {a}\n")).collect::<String>()
        )),
    }
}

const IR_LISTING: &str = "
(1) inst(x, x) ← nom(x)
(2) self(x, v) ← nom(x), triple(x, v, x)
(3) inst(x, z) ← top(z), inst(x, z')
(4) inst(x, y) ← bot(z), inst(u, z), inst(x, z'), cls(y)
(5) inst(x, z) ← subClass(y, z), inst(x, y)
(6) inst(x, z) ← subConj(y1, y2, z), inst(x, y1), inst(x, y2)
(7) inst(x, z) ← subEx(v, y, z), triple(x, v, x'), inst(x', y)
(8) inst(x, z) ← subEx(v, y, z), self(x, v), inst(x, y)
(9) triple(x, v, x') ← supEx(y, v, z, x'), inst(x, y)
(10) inst(x', z) ← supEx(y, v, z, x'), inst(x, y)
(11) inst(x, z) ← subSelf(v, z), self(x, v)
(12) self(x, v) ← supSelf(y, v), inst(x, y)
(13) triple(x, w, x') ← subRole(v, w), triple(x, v, x')
(14) self(x, w) ← subRole(v, w), self(x, v)
(15) triple(x, w, x'') ← subRChain(u, v, w), triple(x, u, x'), triple(x', v, x'')
(16) triple(x, w, x') ← subRChain(u, v, w), self(x, u), triple(x, v, x')
(17) triple(x, w, x') ← subRChain(u, v, w), triple(x, u, x'), self(x', v)
(18) triple(x, w, x) ← subRChain(u, v, w), self(x, u), self(x, v)
(19) triple(x, w, x') ← subRConj(v1, v2, w), triple(x, v1, x'), triple(x, v2, x')
(20) self(x, w) ← subRConj(v1, v2, w), self(x, v1), self(x, v2)
(21) triple(x, w, x') ← subProd(y1, y2, w), inst(x, y1), inst(x', y2)
(22) self(x, w) ← subProd(y1, y2, w), inst(x, y1), inst(x, y2)
(23) inst(x, z1) ← supProd(v, z1, z2), triple(x, v, x')
(24) inst(x, z1) ← supProd(v, z1, z2), self(x, v)
(25) inst(x', z2) ← supProd(v, z1, z2), triple(x, v, x')
(26) inst(x, z2) ← supProd(v, z1, z2), self(x, v)
(27) inst(y, z) ← inst(x, y), nom(y), inst(x, z)
(28) inst(x, z) ← inst(x, y), nom(y), inst(y, z)
(29) triple(z, u, y) ← inst(x, y), nom(y), triple(z, u, x)
";

const RT_LISTING: &str = "
(SupTyp) typ(x, z) ← supTyp(y, z), inst(x, y)
(SubTyp) inst(x, z) ← subTyp(y, z), typ(x, y)
(Refl) inst(x, y) ← typ(x, y)
(A0) typ(Aux, C) ← inst(x, C), auxrc(Aux, C)
(A1) leqRank(x, y) ← typ(x, B), inst(y, B)
(A2) sameRank(x, y) ← typ(x, A), typ(y, A)
(A3) typ(x, B) ← sameRank(x, y), inst(x, B), typ(y, B)
(B1) sameRank(x, z) ← sameRank(x, y), sameRank(y, z)
(B2) sameRank(x, y) ← sameRank(y, x)
(B3) leqRank(x, y) ← sameRank(y, x)
(B4) leqRank(x, z) ← leqRank(x, y), leqRank(y, z)
(B5) sameRank(x, y) ← leqRank(x, y), leqRank(y, x)
(B6) sameRank(x, y) ← nom(y), inst(x, y)
";

fn tokens(s: &str) -> Vec<String> {
    let s = s.replace('←', " :- ");
    let mut out = Vec::new();
    let mut word = String::new();
    for c in s.chars() {
        if c.is_alphanumeric() || c == '_' || c == '\'' {
            word.push(c);
        } else {
            if !word.is_empty() {
                out.push(std::mem::take(&mut word));
            }
            if !c.is_whitespace() {
                out.push(c.to_string());
            }
        }
    }
    if !word.is_empty() {
        out.push(word);
    }
    out.dedup_by(|b, a| a == ":" && b == "-" && {
        a.push('-');
        true
    });
    out
}

fn listing(text: &str) -> Vec<(String, Vec<String>)> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let (label, rule) = l.trim().split_once(") ").unwrap();
            (label.trim_start_matches('(').to_owned(), tokens(rule))
        })
        .collect()
}

fn rule_audit() -> Outcome {
    let m = Materialization::new(&fixture("example1.kbt"), &[]).map_err(|e| e.to_string())?;
    let mut built: Vec<(String, Vec<String>)> = m
        .program
        .rules
        .iter()
        .map(|r| {
            let label = r.label.as_deref().unwrap_or_default();
            (label.trim_matches(|c| c == '(' || c == ')').to_owned(), tokens(&r.clause_text()))
        })
        .collect();
    let ir = listing(IR_LISTING);
    let rt = listing(RT_LISTING);
    ensure(ir.len() == 29 && rt.len() == 13, || "listing size".into())?;
    ensure(built.len() == 42, || format!("{} rules built", built.len()))?;
    let expected: Vec<(String, Vec<String>)> = ir.into_iter().chain(rt).collect();
    let expected_set: BTreeSet<_> = expected.iter().cloned().collect();
    built.sort();
    let built_set: BTreeSet<_> = built.iter().cloned().collect();
    if let Some(missing) = expected_set.difference(&built_set).next() {
        return Err(format!("rule ({}) differs: expected {}", missing.0, missing.1.join(" ")));
    }
    ensure(built_set == expected_set, || "extra rules".into())?;
    Ok("29 + 13 rules match token for token".into())
}

const STUDENT_QUERIES: [&str; 3] = ["Student and Italian", "Student and Young", "Young and Italian"];

fn concepts(kb: &KnowledgeBase, src: &[&str]) -> Result<Vec<Concept>, String> {
    src.iter().map(|s| parse_concept(s, kb).map_err(|e| e.to_string())).collect()
}

fn expect_ranks(ranks: &RankAssignment, kb: &KnowledgeBase, want: &[(&str, u32)]) -> Result<String, String> {
    let mut shown = Vec::new();
    for (c, r) in want {
        let concept = parse_concept(c, kb).map_err(|e| e.to_string())?;
        let got = ranks.rank_of(&concept);
        ensure(got == Some(Rank::Finite(*r)), || format!("rank of {c}: expected {r}, got {got:?}"))?;
        let alias = ranks.entry_of(&concept).map(|e| e.name.to_string()).unwrap_or_default();
        shown.push(format!("{c}={r} [{alias}]"));
    }
    Ok(shown.join(", "))
}

fn student_closure() -> Outcome {
    let kb = fixture("tbox_af.kbt");
    let ranks = compute_ranks(&kb, &concepts(&kb, &STUDENT_QUERIES)?).map_err(|e| e.to_string())?;
    let shown = expect_ranks(
        &ranks,
        &kb,
        &[("Student", 0), ("Student and Italian", 0), ("Student and Young", 0), ("Student and Nerd", 1)],
    )?;
    let q = parse_query("T(Young and Italian) <= some hasHair.{Black}", &kb).map_err(|e| e.to_string())?;
    let v = rc_entails(&kb, &q).map_err(|e| e.to_string())?;
    ensure(v.in_closure, || "T(Young and Italian) <= some hasHair.{Black} not in closure".into())?;
    ensure(rc_consistent(&kb).map_err(|e| e.to_string())?, || "closure inconsistent".into())?;
    Ok(format!("{shown}; black hair in closure; consistent"))
}

fn nominal_clash() -> Outcome {
    let clash = fixture("rc_clash.kbt");
    ensure(check_consistency(&clash).map_err(|e| e.to_string())?, || "KB itself inconsistent".into())?;
    ensure(!rc_consistent(&clash).map_err(|e| e.to_string())?, || "closure reported consistent".into())?;
    let base = fixture("rc_clash_base.kbt");
    let tbox = fixture("tbox_af.kbt");
    let before = compute_ranks(&tbox, &concepts(&tbox, &STUDENT_QUERIES)?).map_err(|e| e.to_string())?;
    let after = compute_ranks(&base, &concepts(&base, &STUDENT_QUERIES)?).map_err(|e| e.to_string())?;
    for e in &before.entries {
        let got = after.rank_of(&e.concept);
        ensure(got == Some(e.rank), || format!("{} moved from {} to {got:?}", e.label(), e.rank))?;
    }
    Ok(format!("inconsistent with T({{a}}), T({{b}}); {} ranks unchanged without them", before.entries.len()))
}

fn disjoint_parents() -> Outcome {
    let kb = fixture("example4.kbt");
    let ranks = compute_ranks(&kb, &concepts(&kb, &["D"])?).map_err(|e| e.to_string())?;
    expect_ranks(&ranks, &kb, &[("A", 0), ("B", 0), ("D", 1)])
}

fn engine_oracle() -> Outcome {
    let mut derived = 0;
    let n = 200;
    for seed in 0..n {
        let p = random_program(seed);
        let fast: BTreeSet<(String, Vec<Value>)> = evaluate(&p)
            .map_err(|e| e.to_string())?
            .atoms()
            .into_iter()
            .map(|a| {
                let v = a.ground_values().unwrap();
                (a.predicate, v)
            })
            .collect();
        let slow = evaluate_naive(&p).map_err(|e| e.to_string())?;
        ensure(fast == slow, || format!("seed {seed} disagrees"))?;
        derived += fast.len();
    }
    Ok(format!("{n} programs agree, {derived} atoms"))
}

fn bounded_soundness() -> Outcome {
    let mut facts = 0;
    let mut names = Vec::new();
    for name in ["example1.kbt", "tbox_af.kbt", "rc_clash.kbt", "rc_clash_base.kbt", "example4.kbt", "roles.kbt"] {
        let r = check_soundness(&fixture(name), 3, 2).map_err(|e| e.to_string())?;
        ensure(!r.sizes_with_models.is_empty(), || format!("{name}: no model within bounds"))?;
        if let Some((q, m)) = r.violations.first() {
            return Err(format!("{name}: {q} fails in\n{m}"));
        }
        facts += r.checked.len();
        names.push(name);
    }
    Ok(format!("{facts} facts over {} fixtures hold in every model", names.len()))
}

fn klm_store() -> Outcome {
    let kb = fixture("example1.kbt");
    let m = Materialization::new(&kb, &[]).map_err(|e| e.to_string())?;
    let s = &m.store;
    let typ = m.tuples("typ");
    for t in &typ {
        ensure(s.holds("inst", &[&t[0], &t[1]]), || format!("Refl fails for typ({}, {})", t[0], t[1]))?;
    }
    let inst = m.tuples("inst");
    for a in m.tuples("auxrc") {
        if inst.iter().any(|t| t[1] == a[1]) {
            ensure(s.holds("typ", &[&a[0], &a[1]]), || format!("A0 fails for {}", a[1]))?;
        }
    }
    let same: BTreeSet<(String, String)> = m.tuples("sameRank").into_iter().map(|t| (t[0].clone(), t[1].clone())).collect();
    for (x, y) in &same {
        ensure(same.contains(&(y.clone(), x.clone())), || format!("sameRank({x}, {y}) not symmetric"))?;
        for (_, z) in same.range((y.clone(), String::new())..).take_while(|p| &p.0 == y) {
            ensure(same.contains(&(x.clone(), z.clone())), || format!("sameRank not transitive at {x} {y} {z}"))?;
        }
    }
    let sy = m
        .normalized
        .ranked_for(&Concept::name("Student").and(Concept::name("Young")))
        .ok_or("no name for Student and Young")?;
    let sy = sy.y.to_string();
    let aux = "aux[Student]";
    for (p, args) in [
        ("typ", vec!["paul", sy.as_str()]),
        ("leqRank", vec!["paul", aux]),
        ("leqRank", vec![aux, "paul"]),
        ("sameRank", vec!["paul", aux]),
        ("typ", vec!["paul", "Student"]),
        ("inst", vec!["paul", "MathHater"]),
    ] {
        ensure(s.holds(p, &args), || format!("{p}({}) missing", args.join(", ")))?;
    }
    Ok(format!("{} typ, {} sameRank checked; paul walkthrough holds", typ.len(), same.len()))
}

fn chain_kb(n: usize) -> KnowledgeBase {
    let mut src = String::new();
    let names = |p: &str| (0..=n).map(|i| format!("{p}{i}")).collect::<Vec<_>>().join(", ");
    src += &format!("class {}, {}.\nrole r.\nindividual {}.\n", names("A"), names("B"), names("a"));
    for i in 0..n {
        src += &format!("A{i} <= A{}.\n", i + 1);
        src += &format!("T(A{i}) <= B{i}.\n");
        src += &format!("some r.B{} <= B{i}.\n", i + 1);
        src += &format!("A{i}(a{i}).\nr(a{i}, a{}).\n", i + 1);
    }
    parse_kb(&src).unwrap()
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let k = points.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

fn growth() -> Outcome {
    let mut atoms = Vec::new();
    let mut times = Vec::new();
    for n in [10usize, 20, 40, 80] {
        let kb = chain_kb(n);
        let start = Instant::now();
        let m = Materialization::new(&kb, &[]).map_err(|e| e.to_string())?;
        let t = start.elapsed().as_secs_f64().max(1e-4);
        atoms.push((n as f64, m.store.len() as f64));
        times.push((n as f64, t));
    }
    let (sa, st) = (slope(&atoms), slope(&times));
    let detail = format!(
        "atoms {:?}, slopes atoms {sa:.2} time {st:.2}",
        atoms.iter().map(|p| p.1 as u64).collect::<Vec<_>>()
    );
    ensure(sa <= 2.5 && st <= 2.5, || detail.clone())?;
    Ok(detail)
}

type Check = (&'static str, fn() -> Outcome);

fn main() {
    let checks: [Check; 10] = [
        ("student KB rational entailment", student_suite),
        ("normal form shapes", normal_shapes),
        ("rule transcription", rule_audit),
        ("rational closure ranks", student_closure),
        ("closure inconsistency", nominal_clash),
        ("disjoint typical parents", disjoint_parents),
        ("semi-naive equals naive", engine_oracle),
        ("bounded-model soundness", bounded_soundness),
        ("rank properties on the store", klm_store),
        ("polynomial growth", growth),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
