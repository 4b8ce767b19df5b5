//! Rational closure of the TBox for simple knowledge bases.
//!
//! One stratified program computes exceptionality for every stage `E_i`
//! over hypothesis-carrying copies of the calculus, then ranks, the
//! fixpoint stage and closure membership.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use sroel_datalog::{evaluate_with, Atom, Program, Store, Term};

use crate::calculus::rules::{self, h_copy, parse_rules};
use crate::calculus::{
    build_program, check_inputs, class_const, consistent_store, grounding_options, symbol_tuples, translate,
    Materialization,
};
use crate::error::{Result, SroelError};
use crate::kb::{Concept, KnowledgeBase, Query};
use crate::normalize::{canonical_key, ClassRef, Mode, NormalAxiom, NormalQuery, NormalizedKB, Normalizer};
use crate::syntax::concept_to_string;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rank {
    Finite(u32),
    Infinite,
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rank::Finite(n) => write!(f, "{n}"),
            Rank::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankEntry {
    /// Name of the concept in the normalized KB.
    pub name: ClassRef,
    /// The concept in the source signature.
    pub concept: Concept,
    pub rank: Rank,
}

impl RankEntry {
    pub fn label(&self) -> String {
        concept_to_string(&self.concept)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankAssignment {
    /// Sorted by rank, infinite last, then by label.
    pub entries: Vec<RankEntry>,
    /// Least stage at which no concept receives a new rank.
    pub fixpoint_stage: Option<u32>,
    pub upper_bound: u32,
}

impl RankAssignment {
    /// The entry for `c`, compared up to conjunction order.
    pub fn entry_of(&self, c: &Concept) -> Option<&RankEntry> {
        let key = canonical_key(c);
        self.entries.iter().find(|e| canonical_key(&e.concept) == key)
    }

    pub fn rank_of(&self, c: &Concept) -> Option<Rank> {
        self.entry_of(c).map(|e| e.rank)
    }

    /// Finite ranks keyed by normalized name.
    pub fn ranks(&self) -> BTreeMap<String, u32> {
        self.entries
            .iter()
            .filter_map(|e| match e.rank {
                Rank::Finite(n) => Some((class_const(&e.name).to_owned(), n)),
                Rank::Infinite => None,
            })
            .collect()
    }

    pub fn infinite(&self) -> BTreeSet<String> {
        self.entries
            .iter()
            .filter(|e| e.rank == Rank::Infinite)
            .map(|e| class_const(&e.name).to_owned())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RcVerdict {
    pub in_closure: bool,
    /// Rank of the typicality argument.
    pub rank: Option<Rank>,
}

/// `n` for `upperbound(n)`: one more than the typicality occurrences of
/// the TBox.
pub fn upper_bound(nkb: &NormalizedKB) -> u32 {
    nkb.typicality_occurrences as u32 + 1
}

/// Builds the closure program over a simple-mode normalization. Pairs in
/// `def_subs` select which `T(C) ⊑ D` memberships are computed. With
/// `consistency`, computed ranks are fed back into the base calculus.
pub fn build_rc_program(nkb: &NormalizedKB, def_subs: &[(ClassRef, ClassRef)], consistency: bool) -> Result<Program> {
    if let Some(a) = nkb.axioms.iter().find(|a| matches!(a, NormalAxiom::SubTyp { .. })) {
        return Err(SroelError::NotSimple { axiom: a.to_string() });
    }
    let it = translate(nkb);
    let mut p = Program::new();
    for f in &it.facts {
        p.add_fact(f.clone());
    }
    let n = upper_bound(nkb);
    p.add_fact(Atom::new("upperbound", vec![Term::Int(n)]));
    for i in 0..=n {
        p.add_fact(Atom::new("possrank", vec![Term::Int(i)]));
    }
    for (c, d) in def_subs {
        p.add_fact(Atom::fact("def_subs", &[class_const(c), class_const(d)]));
    }
    let ir = rules::ir_rules();
    let rt = rules::rt_simple_rules();
    p.rules.extend(ir.iter().cloned());
    p.rules.extend(rt.iter().cloned());
    p.rules.extend(parse_rules(rules::RC));
    for r in ir.iter().chain(rt.iter().filter(|r| r.label.as_deref() != Some("SubTyp"))) {
        p.add_rule(h_copy(r));
    }
    p.rules.extend(parse_rules(rules::SUB_TYP_RC));
    p.rules.extend(parse_rules(rules::INRC));
    if consistency {
        p.rules.extend(parse_rules(rules::RC_CONSISTENCY));
    }
    Ok(p)
}

/// An evaluated closure program.
pub struct RcEvaluation {
    pub normalized: NormalizedKB,
    /// First spelling of each typicality argument, by canonical key.
    spelling: BTreeMap<String, Concept>,
    pub queries: Vec<NormalQuery>,
    pub program: Program,
    pub store: Store,
}

fn require_simple(kb: &KnowledgeBase) -> Result<()> {
    match kb.first_non_simple() {
        Some((_, _, a)) => Err(SroelError::NotSimple { axiom: a.to_string() }),
        None => Ok(()),
    }
}

impl RcEvaluation {
    /// Evaluates the closure program for `kb`. Typicality arguments of
    /// `queries` are ranked too, and `T(C) ⊑ D` queries select their
    /// closure membership.
    pub fn new(kb: &KnowledgeBase, queries: &[Query], consistency: bool) -> Result<Self> {
        let queries_in = queries;
        check_inputs(kb, queries)?;
        require_simple(kb)?;
        for q in queries {
            match q {
                Query::TypSubsumes { rhs, .. } if rhs.contains_typicality() => {
                    return Err(SroelError::Unsupported(format!(
                        "`{q}`: typicality on the right-hand side of a closure query"
                    )))
                }
                Query::TypSubsumes { .. } => {}
                _ => {
                    return Err(SroelError::Unsupported(format!(
                        "`{q}` is not a typicality inclusion"
                    )))
                }
            }
        }
        if !Materialization::new(kb, &[])?.consistent() {
            return Err(SroelError::Inconsistent);
        }
        let mut n = Normalizer::new(kb, Mode::Simple);
        let queries: Vec<NormalQuery> = queries.iter().map(|q| n.add_query(q)).collect();
        let normalized = n.finish();
        let def_subs: Vec<(ClassRef, ClassRef)> = queries
            .iter()
            .filter_map(|q| match q {
                NormalQuery::TypSubsumes { lhs, rhs } => Some((lhs.clone(), rhs.clone())),
                _ => None,
            })
            .collect();
        let program = build_rc_program(&normalized, &def_subs, consistency)?;
        let store = evaluate_with(&program, &grounding_options(&program))?;
        let mut spelling = BTreeMap::new();
        let mut note = |c: &Concept| {
            if let Concept::Typicality(arg) = c {
                spelling.entry(canonical_key(arg)).or_insert_with(|| (**arg).clone());
            }
        };
        for (_, _, a) in kb.axioms() {
            for c in a.concepts() {
                c.walk(&mut note);
            }
        }
        for q in queries_in {
            if let Query::TypSubsumes { lhs, .. } = q {
                note(&lhs.clone().typical());
            }
        }
        Ok(RcEvaluation {
            normalized,
            spelling,
            queries,
            program,
            store,
        })
    }

    pub fn ranks(&self) -> Result<RankAssignment> {
        let mut concept_of: BTreeMap<&str, &Concept> = BTreeMap::new();
        for r in &self.normalized.ranked {
            concept_of.entry(class_const(&r.y)).or_insert(&r.concept);
        }
        let top = Concept::Top;
        let finite: BTreeMap<String, Vec<u32>> =
            symbol_tuples(&self.store, "rank")
                .into_iter()
                .fold(BTreeMap::new(), |mut m, t| {
                    m.entry(t[0].clone()).or_default().push(t[1].parse().expect("integer rank"));
                    m
                });
        let infinite: BTreeSet<String> = symbol_tuples(&self.store, "inf_rank").into_iter().map(|t| t[0].clone()).collect();
        let mut entries = Vec::new();
        for t in symbol_tuples(&self.store, "t_cls") {
            let name = &t[0];
            let rank = match (finite.get(name).map(Vec::as_slice), infinite.contains(name)) {
                (Some([r]), false) => Rank::Finite(*r),
                (None, true) => Rank::Infinite,
                (ranks, inf) => {
                    return Err(SroelError::Invalid(format!(
                        "concept {name} has ranks {ranks:?} and infinite rank {inf}"
                    )))
                }
            };
            let concept = if name == "top" {
                &top
            } else {
                concept_of.get(name.as_str()).copied().unwrap_or(&top)
            };
            let class = if name == "top" {
                ClassRef::Top
            } else {
                ClassRef::Name(name.clone())
            };
            let concept = self.spelling.get(&canonical_key(concept)).unwrap_or(concept);
            entries.push(RankEntry {
                name: class,
                concept: concept.clone(),
                rank,
            });
        }
        entries.sort_by_cached_key(|e| (e.rank, e.label()));
        let fixpoint_stage = symbol_tuples(&self.store, "fixp")
            .into_iter()
            .filter_map(|t| t[0].parse().ok())
            .min();
        Ok(RankAssignment {
            entries,
            fixpoint_stage,
            upper_bound: upper_bound(&self.normalized),
        })
    }

    pub fn verdict(&self, i: usize) -> Result<RcVerdict> {
        let NormalQuery::TypSubsumes { lhs, rhs } = &self.queries[i] else {
            return Err(SroelError::Unsupported("closure membership needs T(C) <= D".into()));
        };
        let ranks = self.ranks()?;
        let rank = ranks.entries.iter().find(|e| e.name == *lhs).map(|e| e.rank);
        Ok(RcVerdict {
            in_closure: self.store.holds("inrc", &[class_const(lhs), class_const(rhs)]),
            rank,
        })
    }

    /// Whether the base calculus stays free of `⊥` instances.
    pub fn consistent(&self) -> bool {
        consistent_store(&self.store, "inst")
    }
}

/// Ranks of every concept under typicality in the TBox, plus the
/// arguments of `query_concepts`.
pub fn compute_ranks(kb: &KnowledgeBase, query_concepts: &[Concept]) -> Result<RankAssignment> {
    let queries: Vec<Query> = query_concepts
        .iter()
        .map(|c| Query::TypSubsumes {
            lhs: c.clone(),
            rhs: Concept::Top,
        })
        .collect();
    RcEvaluation::new(kb, &queries, false)?.ranks()
}

/// Whether `T(C) ⊑ D` belongs to the rational closure of the TBox.
pub fn rc_entails(kb: &KnowledgeBase, q: &Query) -> Result<RcVerdict> {
    RcEvaluation::new(kb, std::slice::from_ref(q), false)?.verdict(0)
}

/// Consistency of the rational closure: computed ranks are imposed on the
/// typical representatives and the base calculus must not derive `⊥`.
pub fn rc_consistent(kb: &KnowledgeBase) -> Result<bool> {
    Ok(RcEvaluation::new(kb, &[], true)?.consistent())
}

/// The base program of the closure construction without the closure
/// rules, for comparison with the instance calculus.
pub fn base_program(nkb: &NormalizedKB) -> Program {
    build_program(&translate(nkb))
}
