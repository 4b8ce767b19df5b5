//! Input translation of a normalized knowledge base into Datalog facts.

use std::collections::BTreeSet;

use sroel_datalog::{Atom, Program};

use super::rules;
use crate::normalize::{ClassRef, NormalAxiom, NormalizedKB};

/// Facts describing one normalized knowledge base.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputTranslation {
    pub facts: Vec<Atom>,
    /// Constants standing for anonymous elements.
    pub aux_constants: BTreeSet<String>,
}

pub const TOP: &str = "top";
pub const BOT: &str = "bot";

/// Constant for a class position.
pub fn class_const(c: &ClassRef) -> &str {
    match c {
        ClassRef::Top => TOP,
        ClassRef::Bot => BOT,
        ClassRef::Name(n) => n,
    }
}

/// Representative typical instance of a ranked concept.
pub fn typical_aux(y: &ClassRef) -> String {
    format!("aux[{}]", class_const(y))
}

/// Witness for an inclusion `A ⊑ ∃R.B`.
pub fn exists_aux(sub: &ClassRef, role: &str, filler: &ClassRef) -> String {
    format!("aux[{} <= some {}.{}]", class_const(sub), role, class_const(filler))
}

pub fn is_aux(constant: &str) -> bool {
    constant.starts_with("aux[")
}

pub fn translate(nkb: &NormalizedKB) -> InputTranslation {
    let mut facts = Vec::new();
    let mut aux_constants = BTreeSet::new();
    let sig = &nkb.signature;
    for a in &sig.individual_names {
        facts.push(Atom::fact("nom", &[a]));
    }
    facts.push(Atom::fact("top", &[TOP]));
    facts.push(Atom::fact("cls", &[TOP]));
    if nkb.mentions_bot() {
        facts.push(Atom::fact("bot", &[BOT]));
        facts.push(Atom::fact("cls", &[BOT]));
    }
    for c in sig.concept_names.iter().chain(&sig.individual_names) {
        facts.push(Atom::fact("cls", &[c]));
    }
    for r in &sig.role_names {
        facts.push(Atom::fact("rol", &[r]));
    }
    for ax in &nkb.axioms {
        use NormalAxiom as N;
        let c = class_const;
        let fact = match ax {
            N::ConceptAssertion { c: k, a } => Atom::fact("subClass", &[a.as_str(), c(k)]),
            N::RoleAssertion { r, a, b } => Atom::fact("supEx", &[a, r, b, b]),
            N::Sub { sub, sup } => Atom::fact("subClass", &[c(sub), c(sup)]),
            N::SubNominal { sub, a } => Atom::fact("subClass", &[c(sub), a.as_str()]),
            N::NominalSub { a, sup } => Atom::fact("subClass", &[a.as_str(), c(sup)]),
            N::Conj { left, right, sup } => Atom::fact("subConj", &[c(left), c(right), c(sup)]),
            N::ExistsSub { role, filler, sup } => Atom::fact("subEx", &[role.as_str(), c(filler), c(sup)]),
            N::SubExists { sub, role, filler } => {
                let aux = exists_aux(sub, role, filler);
                aux_constants.insert(aux.clone());
                Atom::fact("supEx", &[c(sub), role.as_str(), c(filler), aux.as_str()])
            }
            N::SelfSub { role, sup } => Atom::fact("subSelf", &[role.as_str(), c(sup)]),
            N::SubSelf { sub, role } => Atom::fact("supSelf", &[c(sub), role.as_str()]),
            N::RoleIncl { sub, sup } => Atom::fact("subRole", &[sub, sup]),
            N::RoleChain { r1, r2, sup } => Atom::fact("subRChain", &[r1, r2, sup]),
            N::RoleConj { r1, r2, sup } => Atom::fact("subRConj", &[r1, r2, sup]),
            N::ProductToRole { c: x, d, sup } => Atom::fact("subProd", &[c(x), c(d), sup.as_str()]),
            N::RoleToProduct { sub, c: x, d } => Atom::fact("supProd", &[sub.as_str(), c(x), c(d)]),
            N::SubTyp { sub, typ } => Atom::fact("supTyp", &[c(sub), c(typ)]),
            N::TypSub { typ, sup } => Atom::fact("subTyp", &[c(typ), c(sup)]),
        };
        facts.push(fact);
    }
    let mut ranked: Vec<&ClassRef> = vec![&ClassRef::Top];
    for r in &nkb.ranked {
        if !ranked.contains(&&r.y) {
            ranked.push(&r.y);
        }
    }
    for y in ranked {
        let aux = typical_aux(y);
        facts.push(Atom::fact("auxrc", &[aux.as_str(), class_const(y)]));
        aux_constants.insert(aux);
    }
    let mut seen = BTreeSet::new();
    facts.retain(|f| seen.insert(f.clone()));
    InputTranslation { facts, aux_constants }
}

fn with_facts(it: &InputTranslation) -> Program {
    let mut p = Program::new();
    for f in &it.facts {
        p.add_fact(f.clone());
    }
    p
}

/// Facts plus the classical and typicality rules.
pub fn build_program(it: &InputTranslation) -> Program {
    let mut p = with_facts(it);
    p.rules.extend(rules::ir_rules());
    p.rules.extend(rules::rt_rules());
    p
}

/// Hypothesis used by the parameterized program.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Seed {
    /// The constant `B` is an instance of `B`.
    Instance,
    /// The constant `B` is a typical instance of `B`.
    Typical,
}

/// The program with a trailing hypothesis parameter on every derived
/// predicate, seeded with one hypothetical element per class.
pub fn build_subsumption_program(it: &InputTranslation, seed: Seed) -> Program {
    let mut p = with_facts(it);
    for r in rules::ir_rules().iter().chain(&rules::rt_rules()) {
        p.add_rule(rules::parameterize(r, "H"));
    }
    let text = match seed {
        Seed::Instance => "inst(B, B, B) :- cls(B).   % seed\n",
        Seed::Typical => "typ(B, B, B) :- cls(B).   % seed\n",
    };
    p.rules.extend(rules::parse_rules(text));
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::{KnowledgeBase, Signature};
    use crate::normalize::{normalize, Mode};

    #[test]
    fn empty_kb_translation() {
        let kb = KnowledgeBase::new(Signature::default());
        let (n, _) = normalize(&kb, &[], Mode::General);
        let it = translate(&n);
        let text: Vec<String> = it.facts.iter().map(|f| f.to_string()).collect();
        assert_eq!(text, vec!["top(\"top\")", "cls(\"top\")", "auxrc(\"aux[top]\", \"top\")"]);
    }
}
