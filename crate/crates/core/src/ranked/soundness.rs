//! Cross-check of the materialization against bounded models.

use super::model::RankedInterpretation;
use super::refute::Refuter;
use crate::calculus::Materialization;
use crate::error::Result;
use crate::kb::{Concept, KnowledgeBase, Query};

#[derive(Clone, Debug)]
pub struct SoundnessReport {
    /// Derived facts over the original signature, as queries.
    pub checked: Vec<Query>,
    /// Domain sizes within the bound that admit a model of the KB.
    pub sizes_with_models: Vec<usize>,
    /// Derived facts that fail in some bounded model.
    pub violations: Vec<(Query, RankedInterpretation)>,
}

fn class_concept(kb: &KnowledgeBase, c: &str) -> Option<Concept> {
    let sig = &kb.signature;
    match c {
        "top" => Some(Concept::Top),
        "bot" => Some(Concept::Bot),
        _ if sig.is_concept(c) => Some(Concept::name(c)),
        _ if sig.is_individual(c) => Some(Concept::nominal(c)),
        _ => None,
    }
}

/// Derived `inst`, `typ`, `triple` and `self` facts whose arguments are
/// all names of `kb`.
pub fn derived_facts(kb: &KnowledgeBase) -> Result<Vec<Query>> {
    let m = Materialization::new(kb, &[])?;
    let sig = &kb.signature;
    let ind = |a: &str| sig.is_individual(a);
    let mut out = Vec::new();
    for t in m.tuples("inst") {
        if let (true, Some(c)) = (ind(&t[0]), class_concept(kb, &t[1])) {
            out.push(Query::InstanceOf { c, a: t[0].clone() });
        }
    }
    for t in m.tuples("typ") {
        if let (true, Some(c)) = (ind(&t[0]), class_concept(kb, &t[1])) {
            out.push(Query::TypicalInstanceOf { c, a: t[0].clone() });
        }
    }
    for t in m.tuples("triple") {
        if ind(&t[0]) && sig.is_role(&t[1]) && ind(&t[2]) {
            out.push(Query::RoleHolds {
                r: t[1].clone(),
                a: t[0].clone(),
                b: t[2].clone(),
            });
        }
    }
    for t in m.tuples("self") {
        if ind(&t[0]) && sig.is_role(&t[1]) {
            out.push(Query::InstanceOf {
                c: Concept::self_of(&t[1]),
                a: t[0].clone(),
            });
        }
    }
    Ok(out)
}

/// Checks every derived fact against all models with at most
/// `max_domain` elements and ranks up to `max_rank`.
pub fn check_soundness(kb: &KnowledgeBase, max_domain: usize, max_rank: u32) -> Result<SoundnessReport> {
    let checked = derived_facts(kb)?;
    let mut sizes_with_models = Vec::new();
    let mut violations = Vec::new();
    for size in 1..=max_domain {
        let mut r = Refuter::new(kb, size, max_rank)?;
        if r.model()?.is_none() {
            continue;
        }
        sizes_with_models.push(size);
        for q in &checked {
            if let Some(m) = r.counter_model(q)? {
                violations.push((q.clone(), m));
            }
        }
    }
    Ok(SoundnessReport {
        checked,
        sizes_with_models,
        violations,
    })
}
