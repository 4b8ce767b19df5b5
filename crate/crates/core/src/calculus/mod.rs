//! Materialization calculus for rational entailment.
//!
//! A normalized knowledge base is translated into facts ([`translate`]),
//! joined with the fixed rule sets ([`rules`]) and evaluated by the Datalog
//! engine. Instance queries read the resulting store directly. Subsumption
//! uses a variant in which every derived predicate carries a hypothesis
//! parameter.

pub mod rules;
pub mod translate;

use sroel_datalog::{evaluate_with, Atom, EvalOptions, Program, Store, Term, Value};

pub use translate::{
    build_program, build_subsumption_program, class_const, is_aux, translate, typical_aux, InputTranslation, Seed,
};

use crate::error::{Result, SroelError};
use crate::kb::{KnowledgeBase, Query};
use crate::normalize::{normalize, Mode, NormalQuery, NormalizedKB};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub entailed: bool,
    /// The goal atom found in the store.
    pub witness: Option<Atom>,
}

impl Verdict {
    fn from_goal(store: &Store, goal: Atom) -> Self {
        if store.contains(&goal) {
            Verdict {
                entailed: true,
                witness: Some(goal),
            }
        } else {
            Verdict {
                entailed: false,
                witness: None,
            }
        }
    }
}

pub(crate) fn check_inputs(kb: &KnowledgeBase, queries: &[Query]) -> Result<()> {
    let report = kb.validate();
    if let Some(v) = report.violations.first() {
        return Err(SroelError::Invalid(v.to_string()));
    }
    for q in queries {
        if let Some(v) = q.violations(kb).first() {
            return Err(SroelError::Invalid(format!("query `{q}`: {v}")));
        }
    }
    Ok(())
}

/// Caps every relation at `n^k` tuples, where `n` counts the constants
/// of the program and `k` is the largest arity.
pub(crate) fn grounding_options(program: &Program) -> EvalOptions {
    let mut constants = std::collections::HashSet::new();
    let mut arity = 0;
    for f in &program.facts {
        arity = arity.max(f.arity());
        for t in &f.args {
            if let Term::Const(c) = t {
                constants.insert(c.as_str());
            }
        }
    }
    for r in &program.rules {
        arity = arity.max(r.head.arity());
    }
    let n = constants.len() + program.int_bound as usize + 1;
    EvalOptions {
        grounding_bound: Some(n.saturating_pow(arity as u32)),
    }
}

fn atom(pred: &str, args: &[&str]) -> Atom {
    Atom::fact(pred, args)
}

/// The evaluated base program for a knowledge base and a batch of
/// instance queries.
pub struct Materialization {
    pub normalized: NormalizedKB,
    pub queries: Vec<NormalQuery>,
    pub translation: InputTranslation,
    pub program: Program,
    pub store: Store,
}

impl Materialization {
    pub fn new(kb: &KnowledgeBase, queries: &[Query]) -> Result<Self> {
        check_inputs(kb, queries)?;
        let (normalized, queries) = normalize(kb, queries, Mode::General);
        let translation = translate(&normalized);
        let program = build_program(&translation);
        let store = evaluate_with(&program, &grounding_options(&program))?;
        Ok(Materialization {
            normalized,
            queries,
            translation,
            program,
            store,
        })
    }

    pub fn consistent(&self) -> bool {
        consistent_store(&self.store, "inst")
    }

    /// Verdict for the `i`-th query passed to [`Materialization::new`].
    pub fn verdict(&self, i: usize) -> Result<Verdict> {
        if !self.consistent() {
            return Ok(Verdict {
                entailed: true,
                witness: None,
            });
        }
        let s = &self.store;
        Ok(match &self.queries[i] {
            NormalQuery::Instance { a, class } => Verdict::from_goal(s, atom("inst", &[a, class_const(class)])),
            NormalQuery::TypicalInstance { a, class } => Verdict::from_goal(s, atom("typ", &[a, class_const(class)])),
            NormalQuery::Role { r, a, b } => {
                let v = Verdict::from_goal(s, atom("triple", &[a, r, b]));
                if v.entailed {
                    v
                } else if s.holds("inst", &[a, b]) {
                    Verdict::from_goal(s, atom("self", &[a, r]))
                } else {
                    v
                }
            }
            q @ (NormalQuery::Subsumes { .. } | NormalQuery::TypSubsumes { .. }) => {
                return Err(SroelError::Unsupported(format!(
                    "{q:?} needs the subsumption program"
                )))
            }
        })
    }

    /// Derived atoms of one predicate as symbol tuples.
    pub fn tuples(&self, pred: &str) -> Vec<Vec<String>> {
        symbol_tuples(&self.store, pred)
    }
}

pub(crate) fn symbol_tuples(store: &Store, pred: &str) -> Vec<Vec<String>> {
    store
        .facts(pred)
        .into_iter()
        .map(|t| {
            t.into_iter()
                .map(|v| match v {
                    Value::Sym(s) => s,
                    Value::Int(n) => n.to_string(),
                })
                .collect()
        })
        .collect()
}

pub(crate) fn consistent_store(store: &Store, inst: &str) -> bool {
    let n = store.facts(inst).first().map_or(2, Vec::len);
    let mut args = vec![Term::var("U"), Term::constant(translate::BOT)];
    args.extend((2..n).map(|i| Term::var(format!("P{i}"))));
    store.query(&Atom::new(inst, args)).is_empty()
}

/// Instance checking under rational entailment.
pub fn check_instance(kb: &KnowledgeBase, q: &Query) -> Result<Verdict> {
    match q {
        Query::InstanceOf { .. } | Query::TypicalInstanceOf { .. } | Query::RoleHolds { .. } => {}
        _ => return Err(SroelError::Unsupported(format!("`{q}` is not an instance query"))),
    }
    Materialization::new(kb, std::slice::from_ref(q))?.verdict(0)
}

/// Classical consistency: no element is derived to be in `⊥`.
pub fn check_consistency(kb: &KnowledgeBase) -> Result<bool> {
    Ok(Materialization::new(kb, &[])?.consistent())
}

/// The evaluated parameterized program for a batch of subsumption queries
/// sharing one seed.
pub struct SubsumptionStore {
    pub normalized: NormalizedKB,
    pub queries: Vec<NormalQuery>,
    pub program: Program,
    pub store: Store,
    pub seed: Seed,
}

impl SubsumptionStore {
    pub fn new(kb: &KnowledgeBase, queries: &[Query], seed: Seed) -> Result<Self> {
        check_inputs(kb, queries)?;
        let (normalized, queries) = normalize(kb, queries, Mode::General);
        let program = build_subsumption_program(&translate(&normalized), seed);
        let store = evaluate_with(&program, &grounding_options(&program))?;
        Ok(SubsumptionStore {
            normalized,
            queries,
            program,
            store,
            seed,
        })
    }

    /// Whether `sup(h)` follows under the hypothesis constant `h`.
    pub fn derives(&self, h: &str, sup: &str) -> Verdict {
        Verdict::from_goal(&self.store, atom("inst", &[h, sup, h]))
    }

    pub fn verdict(&self, i: usize) -> Result<Verdict> {
        match (&self.queries[i], self.seed) {
            (NormalQuery::Subsumes { lhs, rhs }, Seed::Instance) | (NormalQuery::TypSubsumes { lhs, rhs }, Seed::Typical) => {
                Ok(self.derives(class_const(lhs), class_const(rhs)))
            }
            (q, seed) => Err(SroelError::Unsupported(format!("{q:?} with the {seed:?} seed"))),
        }
    }
}

/// Subsumption `C ⊑ D` or `T(C) ⊑ D` through the parameterized calculus.
pub fn check_subsumption(kb: &KnowledgeBase, q: &Query) -> Result<Verdict> {
    let seed = match q {
        Query::Subsumes { .. } => Seed::Instance,
        Query::TypSubsumes { .. } => Seed::Typical,
        _ => return Err(SroelError::Unsupported(format!("`{q}` is not a subsumption query"))),
    };
    SubsumptionStore::new(kb, std::slice::from_ref(q), seed)?.verdict(0)
}
