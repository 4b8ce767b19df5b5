//! Normal form.
//!
//! Normalization runs in two passes. The typicality pass replaces each
//! `T(C)` by a fresh name `X_C` and ties it to `T(Y_C)` with `Y_C ≡ C`.
//! The structural pass then flattens every axiom into one of the
//! [`NormalAxiom`] shapes, naming complex subconcepts along the way.
//!
//! Fresh names are derived from a hash of the canonical source expression,
//! so normalizing the same input twice gives the same output.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use sha2::{Digest, Sha256};

use crate::kb::{Axiom, Concept, KnowledgeBase, Query, Signature};
use crate::syntax::concept_to_string;

/// A concept position in a normal axiom: `⊤`, `⊥` or a concept name.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassRef {
    Top,
    Bot,
    Name(String),
}

impl ClassRef {
    pub fn name(n: impl Into<String>) -> Self {
        ClassRef::Name(n.into())
    }

    pub fn to_concept(&self) -> Concept {
        match self {
            ClassRef::Top => Concept::Top,
            ClassRef::Bot => Concept::Bot,
            ClassRef::Name(n) => Concept::Name(n.clone()),
        }
    }

    fn from_atomic(c: &Concept) -> Option<Self> {
        match c {
            Concept::Top => Some(ClassRef::Top),
            Concept::Bot => Some(ClassRef::Bot),
            Concept::Name(n) => Some(ClassRef::Name(n.clone())),
            _ => None,
        }
    }
}

impl fmt::Display for ClassRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassRef::Top => f.write_str("top"),
            ClassRef::Bot => f.write_str("bot"),
            ClassRef::Name(n) => f.write_str(n),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NormalAxiom {
    /// `C(a)`
    ConceptAssertion { c: ClassRef, a: String },
    /// `R(a, b)`
    RoleAssertion { r: String, a: String, b: String },
    /// `A ⊑ C`, which also covers `A ⊑ ⊥` and `⊤ ⊑ C`
    Sub { sub: ClassRef, sup: ClassRef },
    /// `A ⊑ {c}`
    SubNominal { sub: ClassRef, a: String },
    /// `{a} ⊑ C`
    NominalSub { a: String, sup: ClassRef },
    /// `A ⊓ B ⊑ C`
    Conj { left: ClassRef, right: ClassRef, sup: ClassRef },
    /// `∃R.A ⊑ C`
    ExistsSub { role: String, filler: ClassRef, sup: ClassRef },
    /// `A ⊑ ∃R.B`
    SubExists { sub: ClassRef, role: String, filler: ClassRef },
    /// `∃R.Self ⊑ C`
    SelfSub { role: String, sup: ClassRef },
    /// `A ⊑ ∃R.Self`
    SubSelf { sub: ClassRef, role: String },
    RoleIncl { sub: String, sup: String },
    RoleChain { r1: String, r2: String, sup: String },
    RoleConj { r1: String, r2: String, sup: String },
    /// `A × B ⊑ R`
    ProductToRole { c: ClassRef, d: ClassRef, sup: String },
    /// `R ⊑ C × D`
    RoleToProduct { sub: String, c: ClassRef, d: ClassRef },
    /// `A ⊑ T(B)`
    SubTyp { sub: ClassRef, typ: ClassRef },
    /// `T(B) ⊑ C`
    TypSub { typ: ClassRef, sup: ClassRef },
}

impl NormalAxiom {
    pub fn to_axiom(&self) -> Axiom {
        use NormalAxiom as N;
        let c = ClassRef::to_concept;
        match self {
            N::ConceptAssertion { c: k, a } => Axiom::ConceptAssertion { c: c(k), a: a.clone() },
            N::RoleAssertion { r, a, b } => Axiom::RoleAssertion {
                r: r.clone(),
                a: a.clone(),
                b: b.clone(),
            },
            N::Sub { sub, sup } => Axiom::gci(c(sub), c(sup)),
            N::SubNominal { sub, a } => Axiom::gci(c(sub), Concept::nominal(a)),
            N::NominalSub { a, sup } => Axiom::gci(Concept::nominal(a), c(sup)),
            N::Conj { left, right, sup } => Axiom::gci(c(left).and(c(right)), c(sup)),
            N::ExistsSub { role, filler, sup } => Axiom::gci(Concept::some(role, c(filler)), c(sup)),
            N::SubExists { sub, role, filler } => Axiom::gci(c(sub), Concept::some(role, c(filler))),
            N::SelfSub { role, sup } => Axiom::gci(Concept::self_of(role), c(sup)),
            N::SubSelf { sub, role } => Axiom::gci(c(sub), Concept::self_of(role)),
            N::RoleIncl { sub, sup } => Axiom::RoleIncl {
                sub: sub.clone(),
                sup: sup.clone(),
            },
            N::RoleChain { r1, r2, sup } => Axiom::RoleChain {
                r1: r1.clone(),
                r2: r2.clone(),
                sup: sup.clone(),
            },
            N::RoleConj { r1, r2, sup } => Axiom::RoleConj {
                r1: r1.clone(),
                r2: r2.clone(),
                sup: sup.clone(),
            },
            N::ProductToRole { c: x, d, sup } => Axiom::ProductToRole {
                c: c(x),
                d: c(d),
                sup: sup.clone(),
            },
            N::RoleToProduct { sub, c: x, d } => Axiom::RoleToProduct {
                sub: sub.clone(),
                c: c(x),
                d: c(d),
            },
            N::SubTyp { sub, typ } => Axiom::gci(c(sub), c(typ).typical()),
            N::TypSub { typ, sup } => Axiom::gci(c(typ).typical(), c(sup)),
        }
    }

    pub fn mentions_bot(&self) -> bool {
        self.class_refs().contains(&&ClassRef::Bot)
    }

    pub fn class_refs(&self) -> Vec<&ClassRef> {
        use NormalAxiom as N;
        match self {
            N::ConceptAssertion { c, .. } | N::NominalSub { sup: c, .. } | N::SubNominal { sub: c, .. } => {
                vec![c]
            }
            N::SelfSub { sup: c, .. } | N::SubSelf { sub: c, .. } => vec![c],
            N::Sub { sub, sup } => vec![sub, sup],
            N::Conj { left, right, sup } => vec![left, right, sup],
            N::ExistsSub { filler, sup, .. } => vec![filler, sup],
            N::SubExists { sub, filler, .. } => vec![sub, filler],
            N::ProductToRole { c, d, .. } | N::RoleToProduct { c, d, .. } => vec![c, d],
            N::SubTyp { sub, typ } => vec![sub, typ],
            N::TypSub { typ, sup } => vec![typ, sup],
            N::RoleAssertion { .. } | N::RoleIncl { .. } | N::RoleChain { .. } | N::RoleConj { .. } => vec![],
        }
    }
}

impl NormalAxiom {
    pub fn class_refs_mut(&mut self) -> Vec<&mut ClassRef> {
        use NormalAxiom as N;
        match self {
            N::ConceptAssertion { c, .. } | N::NominalSub { sup: c, .. } | N::SubNominal { sub: c, .. } => {
                vec![c]
            }
            N::SelfSub { sup: c, .. } | N::SubSelf { sub: c, .. } => vec![c],
            N::Sub { sub, sup } => vec![sub, sup],
            N::Conj { left, right, sup } => vec![left, right, sup],
            N::ExistsSub { filler, sup, .. } => vec![filler, sup],
            N::SubExists { sub, filler, .. } => vec![sub, filler],
            N::ProductToRole { c, d, .. } | N::RoleToProduct { c, d, .. } => vec![c, d],
            N::SubTyp { sub, typ } => vec![sub, typ],
            N::TypSub { typ, sup } => vec![typ, sup],
            N::RoleAssertion { .. } | N::RoleIncl { .. } | N::RoleChain { .. } | N::RoleConj { .. } => vec![],
        }
    }
}

fn erased_key(ax: &NormalAxiom, map: &BTreeMap<&str, &str>) -> String {
    let mut ax = ax.clone();
    for c in ax.class_refs_mut() {
        if let ClassRef::Name(n) = c {
            if let Some(to) = map.get(n.as_str()) {
                *n = (*to).to_owned();
            }
        }
    }
    if let NormalAxiom::Conj { left, right, .. } = &mut ax {
        if left.to_string() > right.to_string() {
            std::mem::swap(left, right);
        }
    }
    ax.to_string()
}

/// Searches for a bijection from `fresh` onto `placeholders` under which
/// `actual` and `expected` are the same set of axioms. Conjunctions are
/// compared as unordered pairs.
pub fn match_up_to_renaming(
    actual: &[NormalAxiom],
    fresh: &[String],
    expected: &[NormalAxiom],
    placeholders: &[String],
) -> Option<BTreeMap<String, String>> {
    if fresh.len() != placeholders.len() || fresh.len() > 8 {
        return None;
    }
    let target: BTreeSet<String> = expected.iter().map(|a| erased_key(a, &BTreeMap::new())).collect();
    let mut perm: Vec<usize> = (0..placeholders.len()).collect();
    fn search(
        k: usize,
        perm: &mut Vec<usize>,
        test: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if k == perm.len() {
            return test(perm);
        }
        for i in k..perm.len() {
            perm.swap(k, i);
            if search(k + 1, perm, test) {
                return true;
            }
            perm.swap(k, i);
        }
        false
    }
    let mut test = |p: &[usize]| {
        let map: BTreeMap<&str, &str> =
            fresh.iter().zip(p).map(|(f, &i)| (f.as_str(), placeholders[i].as_str())).collect();
        let got: BTreeSet<String> = actual.iter().map(|a| erased_key(a, &map)).collect();
        got == target
    };
    if search(0, &mut perm, &mut test) {
        Some(fresh.iter().cloned().zip(perm.iter().map(|&i| placeholders[i].clone())).collect())
    } else {
        None
    }
}

impl fmt::Display for NormalAxiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_axiom().fmt(f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Mode {
    /// Every typicality occurrence gets `X ⊑ T(Y)` and `T(Y) ⊑ X`.
    #[default]
    General,
    /// Typicality on left-hand sides only needs `T(Y) ⊑ X`; an outermost
    /// `T(C) ⊑ D` becomes `T(Y) ⊑ D` directly. For simple knowledge bases.
    Simple,
}

/// Names introduced for one typicality argument.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypEntry {
    /// Canonical form of the argument.
    pub argument: Concept,
    /// Name standing for `T(argument)`, when one was needed.
    pub x: Option<String>,
    /// Name equivalent to the argument; the argument itself if atomic.
    pub y: ClassRef,
}

/// A concept whose typical instances the calculus tracks with an `aux`
/// constant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankedConcept {
    pub y: ClassRef,
    pub concept: Concept,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FreshKind {
    Typical,
    Argument,
    Structural,
    Query,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreshName {
    pub name: String,
    pub kind: FreshKind,
    /// What the name stands for, in the text format.
    pub source: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalizedKB {
    pub signature: Signature,
    pub axioms: Vec<NormalAxiom>,
    /// Keyed by the canonical text of each typicality argument.
    pub aux_registry: BTreeMap<String, TypEntry>,
    pub ranked: Vec<RankedConcept>,
    pub fresh_name_log: Vec<FreshName>,
    /// Typicality occurrences in the source TBox.
    pub typicality_occurrences: usize,
    pub mode: Mode,
}

impl NormalizedKB {
    pub fn mentions_bot(&self) -> bool {
        self.axioms.iter().any(NormalAxiom::mentions_bot)
    }

    /// The ranked concept for a source concept, if registered.
    pub fn ranked_for(&self, c: &Concept) -> Option<&RankedConcept> {
        let key = canonical_key(c);
        let entry = self.aux_registry.get(&key)?;
        self.ranked.iter().find(|r| r.y == entry.y)
    }

    /// The normalized knowledge base in the text format.
    pub fn to_kb(&self) -> KnowledgeBase {
        let mut kb = KnowledgeBase::new(self.signature.clone());
        for a in &self.axioms {
            kb.add(a.to_axiom());
        }
        kb.compute_simple_roles();
        kb
    }
}

/// A query over the normalized signature.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NormalQuery {
    Instance { a: String, class: ClassRef },
    TypicalInstance { a: String, class: ClassRef },
    Role { r: String, a: String, b: String },
    Subsumes { lhs: ClassRef, rhs: ClassRef },
    TypSubsumes { lhs: ClassRef, rhs: ClassRef },
}

/// Canonical form used to key typicality arguments and fresh names:
/// conjunctions are flattened, sorted and deduplicated.
pub fn canonical(c: &Concept) -> Concept {
    match c {
        Concept::Conj(..) => {
            let mut parts: Vec<Concept> = c.conjuncts().into_iter().map(canonical).collect();
            parts.sort_by_cached_key(concept_to_string);
            parts.dedup();
            Concept::conj_all(parts)
        }
        Concept::Exists(r, f) => Concept::some(r.clone(), canonical(f)),
        Concept::Typicality(f) => canonical(f).typical(),
        other => other.clone(),
    }
}

pub fn canonical_key(c: &Concept) -> String {
    concept_to_string(&canonical(c))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Polarity {
    /// The named concept must include the expression.
    Neg,
    /// The named concept must be included in the expression.
    Pos,
}

pub struct Normalizer {
    mode: Mode,
    signature: Signature,
    axioms: Vec<NormalAxiom>,
    seen: HashSet<NormalAxiom>,
    typ: BTreeMap<String, TypEntry>,
    ranked: Vec<RankedConcept>,
    names: HashMap<(String, Polarity), String>,
    query_names: HashMap<(String, Polarity), String>,
    fresh: Vec<FreshName>,
    used: HashSet<String>,
    typicality_occurrences: usize,
}

impl Normalizer {
    /// Normalizes every axiom of `kb`. Queries can be added before
    /// [`Normalizer::finish`].
    pub fn new(kb: &KnowledgeBase, mode: Mode) -> Self {
        let mut n = Normalizer {
            mode,
            signature: kb.signature.clone(),
            axioms: Vec::new(),
            seen: HashSet::new(),
            typ: BTreeMap::new(),
            ranked: Vec::new(),
            names: HashMap::new(),
            query_names: HashMap::new(),
            fresh: Vec::new(),
            used: HashSet::new(),
            typicality_occurrences: kb.tbox_typicality_count(),
        };
        for (_, _, ax) in kb.axioms() {
            for a in n.typicality_pass(ax) {
                n.structural(&a);
            }
        }
        n
    }

    pub fn finish(self) -> NormalizedKB {
        NormalizedKB {
            signature: self.signature,
            axioms: self.axioms,
            aux_registry: self.typ,
            ranked: self.ranked,
            fresh_name_log: self.fresh,
            typicality_occurrences: self.typicality_occurrences,
            mode: self.mode,
        }
    }

    fn fresh(&mut self, prefix: &str, kind: FreshKind, key: &str, source: String) -> String {
        let mut salt = 0u32;
        let name = loop {
            let mut h = Sha256::new();
            h.update(prefix.as_bytes());
            h.update([0]);
            h.update(key.as_bytes());
            if salt > 0 {
                h.update(salt.to_le_bytes());
            }
            let digest = h.finalize();
            let hex: String = digest[..4].iter().map(|b| format!("{b:02x}")).collect();
            let candidate = format!("{prefix}_{hex}");
            if !self.used.contains(&candidate) && !self.signature.contains(&candidate) {
                break candidate;
            }
            salt += 1;
        };
        self.used.insert(name.clone());
        self.signature.concept_names.insert(name.clone());
        self.fresh.push(FreshName {
            name: name.clone(),
            kind,
            source,
        });
        name
    }

    fn emit(&mut self, a: NormalAxiom) {
        if self.seen.insert(a.clone()) {
            self.axioms.push(a);
        }
    }

    /// Registers `c` as a concept with typical instances and returns the
    /// name equivalent to it.
    pub fn rank_concept(&mut self, c: &Concept) -> ClassRef {
        let entry = self.typ_entry(c);
        entry.y
    }

    fn typ_entry(&mut self, c: &Concept) -> TypEntry {
        let canon = canonical(c);
        let key = concept_to_string(&canon);
        if let Some(e) = self.typ.get(&key) {
            return e.clone();
        }
        let y = match ClassRef::from_atomic(&canon) {
            Some(y) => y,
            None => {
                let y = self.fresh("Y", FreshKind::Argument, &key, key.clone());
                let yc = Concept::name(&y);
                self.structural(&Axiom::gci(yc.clone(), canon.clone()));
                self.structural(&Axiom::gci(canon.clone(), yc));
                ClassRef::Name(y)
            }
        };
        let entry = TypEntry {
            argument: canon.clone(),
            x: None,
            y: y.clone(),
        };
        self.typ.insert(key, entry.clone());
        if !self.ranked.iter().any(|r| r.y == y) {
            self.ranked.push(RankedConcept { y, concept: canon });
        }
        entry
    }

    /// Name standing for `T(c)` at a position of the given polarity.
    fn typ_name(&mut self, c: &Concept, pol: Polarity) -> Concept {
        let mut entry = self.typ_entry(c);
        let key = concept_to_string(&entry.argument);
        let x = match &entry.x {
            Some(x) => x.clone(),
            None => {
                let x = self.fresh("X", FreshKind::Typical, &key, format!("T({key})"));
                entry.x = Some(x.clone());
                self.typ.insert(key, entry.clone());
                x
            }
        };
        let xr = ClassRef::Name(x.clone());
        self.emit(NormalAxiom::TypSub {
            typ: entry.y.clone(),
            sup: xr.clone(),
        });
        if self.mode == Mode::General || pol == Polarity::Pos {
            self.emit(NormalAxiom::SubTyp {
                sub: xr,
                typ: entry.y,
            });
        }
        Concept::Name(x)
    }

    fn replace_typ(&mut self, c: &Concept, pol: Polarity) -> Concept {
        match c {
            Concept::Typicality(inner) => self.typ_name(inner, pol),
            Concept::Conj(a, b) => {
                let a = self.replace_typ(a, pol);
                let b = self.replace_typ(b, pol);
                a.and(b)
            }
            Concept::Exists(r, f) => Concept::some(r.clone(), self.replace_typ(f, pol)),
            other => other.clone(),
        }
    }

    /// Rewrites typicality occurrences of one axiom. The result contains
    /// typicality only as `T(Y) ⊑ D` with `Y` atomic.
    fn typicality_pass(&mut self, ax: &Axiom) -> Vec<Axiom> {
        use Polarity::*;
        match ax {
            Axiom::Gci { lhs: Concept::Typicality(arg), rhs } if self.mode == Mode::Simple => {
                let y = self.typ_entry(arg).y.to_concept();
                let rhs = self.replace_typ(rhs, Pos);
                vec![Axiom::gci(y.typical(), rhs)]
            }
            Axiom::Gci { lhs, rhs } => {
                let l = self.replace_typ(lhs, Neg);
                let r = self.replace_typ(rhs, Pos);
                vec![Axiom::gci(l, r)]
            }
            Axiom::ProductToRole { c, d, sup } => vec![Axiom::ProductToRole {
                c: self.replace_typ(c, Neg),
                d: self.replace_typ(d, Neg),
                sup: sup.clone(),
            }],
            Axiom::RoleToProduct { sub, c, d } => vec![Axiom::RoleToProduct {
                sub: sub.clone(),
                c: self.replace_typ(c, Pos),
                d: self.replace_typ(d, Pos),
            }],
            Axiom::ConceptAssertion { c, a } => vec![Axiom::ConceptAssertion {
                c: self.replace_typ(c, Pos),
                a: a.clone(),
            }],
            other => vec![other.clone()],
        }
    }

    /// A class reference for `c`, naming it when complex.
    fn name_of(&mut self, c: &Concept, pol: Polarity) -> ClassRef {
        if let Some(r) = ClassRef::from_atomic(c) {
            return r;
        }
        let canon = canonical(c);
        let key = concept_to_string(&canon);
        if let Some(n) = self.names.get(&(key.clone(), pol)) {
            return ClassRef::Name(n.clone());
        }
        let tag = match pol {
            Polarity::Neg => "lhs",
            Polarity::Pos => "rhs",
        };
        let n = self.fresh("N", FreshKind::Structural, &format!("{tag}:{key}"), key.clone());
        self.names.insert((key, pol), n.clone());
        let nc = Concept::name(&n);
        match pol {
            Polarity::Neg => self.gci(&canon, &nc),
            Polarity::Pos => self.gci(&nc, &canon),
        }
        ClassRef::Name(n)
    }

    fn structural(&mut self, ax: &Axiom) {
        use Polarity::*;
        match ax {
            Axiom::Gci { lhs, rhs } => self.gci(lhs, rhs),
            Axiom::RoleIncl { sub, sup } => self.emit(NormalAxiom::RoleIncl {
                sub: sub.clone(),
                sup: sup.clone(),
            }),
            Axiom::RoleChain { r1, r2, sup } => self.emit(NormalAxiom::RoleChain {
                r1: r1.clone(),
                r2: r2.clone(),
                sup: sup.clone(),
            }),
            Axiom::RoleConj { r1, r2, sup } => self.emit(NormalAxiom::RoleConj {
                r1: r1.clone(),
                r2: r2.clone(),
                sup: sup.clone(),
            }),
            Axiom::ProductToRole { c, d, sup } => {
                if *c == Concept::Bot || *d == Concept::Bot {
                    return;
                }
                let c = self.name_of(c, Neg);
                let d = self.name_of(d, Neg);
                self.emit(NormalAxiom::ProductToRole { c, d, sup: sup.clone() });
            }
            Axiom::RoleToProduct { sub, c, d } => {
                let c = self.name_of(c, Pos);
                let d = self.name_of(d, Pos);
                self.emit(NormalAxiom::RoleToProduct { sub: sub.clone(), c, d });
            }
            Axiom::ConceptAssertion { c, a } => {
                if let Concept::Conj(..) = c {
                    for part in c.conjuncts() {
                        self.structural(&Axiom::ConceptAssertion {
                            c: part.clone(),
                            a: a.clone(),
                        });
                    }
                    return;
                }
                if *c == Concept::Top {
                    return;
                }
                let c = self.name_of(c, Pos);
                self.emit(NormalAxiom::ConceptAssertion { c, a: a.clone() });
            }
            Axiom::RoleAssertion { r, a, b } => self.emit(NormalAxiom::RoleAssertion {
                r: r.clone(),
                a: a.clone(),
                b: b.clone(),
            }),
        }
    }

    fn gci(&mut self, lhs: &Concept, rhs: &Concept) {
        use Polarity::*;
        match rhs {
            Concept::Top => return,
            Concept::Conj(..) => {
                let l = match lhs {
                    Concept::Typicality(_) => lhs.clone(),
                    l => self.name_of(l, Neg).to_concept(),
                };
                for part in rhs.conjuncts() {
                    self.gci(&l, part);
                }
                return;
            }
            _ => {}
        }
        if *lhs == Concept::Bot {
            return;
        }
        if let Concept::Typicality(arg) = lhs {
            let typ = ClassRef::from_atomic(arg).expect("typicality argument named by the typicality pass");
            let sup = self.name_of(rhs, Pos);
            self.emit(NormalAxiom::TypSub { typ, sup });
            return;
        }
        if let Concept::Typicality(arg) = rhs {
            let typ = ClassRef::from_atomic(arg).expect("typicality argument named by the typicality pass");
            let sub = self.name_of(lhs, Neg);
            self.emit(NormalAxiom::SubTyp { sub, typ });
            return;
        }
        if let Some(sub) = ClassRef::from_atomic(lhs) {
            let a = match rhs {
                Concept::Top | Concept::Bot | Concept::Name(_) => NormalAxiom::Sub {
                    sub,
                    sup: ClassRef::from_atomic(rhs).unwrap(),
                },
                Concept::Nominal(c) => NormalAxiom::SubNominal { sub, a: c.clone() },
                Concept::Exists(r, f) => {
                    let filler = self.name_of(f, Pos);
                    NormalAxiom::SubExists {
                        sub,
                        role: r.clone(),
                        filler,
                    }
                }
                Concept::SelfRestriction(r) => NormalAxiom::SubSelf { sub, role: r.clone() },
                Concept::Conj(..) | Concept::Typicality(_) => unreachable!(),
            };
            self.emit(a);
            return;
        }
        // complex left-hand side
        let Some(sup) = ClassRef::from_atomic(rhs) else {
            let mid = self.name_of(lhs, Neg);
            self.gci(&mid.to_concept(), rhs);
            return;
        };
        match lhs {
            Concept::Nominal(a) => self.emit(NormalAxiom::NominalSub { a: a.clone(), sup }),
            Concept::SelfRestriction(r) => self.emit(NormalAxiom::SelfSub { role: r.clone(), sup }),
            Concept::Exists(r, f) => {
                if **f == Concept::Bot {
                    return;
                }
                let filler = self.name_of(f, Neg);
                self.emit(NormalAxiom::ExistsSub {
                    role: r.clone(),
                    filler,
                    sup,
                });
            }
            Concept::Conj(..) => {
                let parts = lhs.conjuncts();
                if parts.contains(&&Concept::Bot) {
                    return;
                }
                let mut atoms: Vec<ClassRef> = Vec::new();
                for p in parts.into_iter().filter(|p| **p != Concept::Top) {
                    let r = self.name_of(p, Neg);
                    if !atoms.contains(&r) {
                        atoms.push(r);
                    }
                }
                match atoms.len() {
                    0 => self.gci(&Concept::Top, rhs),
                    1 => self.gci(&atoms[0].to_concept(), rhs),
                    k => {
                        let mut cur = atoms[0].clone();
                        let mut cur_concept = cur.to_concept();
                        for (i, next) in atoms.iter().enumerate().skip(1) {
                            if i == k - 1 {
                                self.emit(NormalAxiom::Conj {
                                    left: cur.clone(),
                                    right: next.clone(),
                                    sup: sup.clone(),
                                });
                            } else {
                                cur_concept = cur_concept.and(next.to_concept());
                                let key = concept_to_string(&cur_concept);
                                let n = match self.names.get(&(key.clone(), Neg)) {
                                    Some(n) => n.clone(),
                                    None => {
                                        let n = self.fresh("N", FreshKind::Structural, &format!("lhs:{key}"), key.clone());
                                        self.names.insert((key, Neg), n.clone());
                                        n
                                    }
                                };
                                let n = ClassRef::Name(n);
                                self.emit(NormalAxiom::Conj {
                                    left: cur.clone(),
                                    right: next.clone(),
                                    sup: n.clone(),
                                });
                                cur = n;
                            }
                        }
                    }
                }
            }
            Concept::Top | Concept::Bot | Concept::Name(_) | Concept::Typicality(_) => unreachable!(),
        }
    }

    fn query_name(&mut self, c: &Concept, pol: Polarity) -> ClassRef {
        if let Some(r) = ClassRef::from_atomic(c) {
            return r;
        }
        let key = canonical_key(c);
        if let Some(n) = self.query_names.get(&(key.clone(), pol)) {
            return ClassRef::Name(n.clone());
        }
        let tag = match pol {
            Polarity::Neg => "goal",
            Polarity::Pos => "hypothesis",
        };
        let q = self.fresh("Q", FreshKind::Query, &format!("{tag}:{key}"), key);
        let qc = Concept::name(&q);
        let ax = match pol {
            Polarity::Neg => Axiom::gci(c.clone(), qc),
            Polarity::Pos => Axiom::gci(qc, c.clone()),
        };
        for a in self.typicality_pass(&ax) {
            self.structural(&a);
        }
        self.query_names.insert((canonical_key(c), pol), q.clone());
        ClassRef::Name(q)
    }

    /// Rewrites a query over names, adding the bridging axioms it needs.
    pub fn add_query(&mut self, q: &Query) -> NormalQuery {
        match q {
            Query::InstanceOf { c, a } => NormalQuery::Instance {
                a: a.clone(),
                class: self.query_name(c, Polarity::Neg),
            },
            Query::TypicalInstanceOf { c, a } => NormalQuery::TypicalInstance {
                a: a.clone(),
                class: self.rank_concept(c),
            },
            Query::RoleHolds { r, a, b } => NormalQuery::Role {
                r: r.clone(),
                a: a.clone(),
                b: b.clone(),
            },
            Query::Subsumes { lhs, rhs } => NormalQuery::Subsumes {
                lhs: self.query_name(lhs, Polarity::Pos),
                rhs: self.query_name(rhs, Polarity::Neg),
            },
            Query::TypSubsumes { lhs, rhs } => NormalQuery::TypSubsumes {
                lhs: self.rank_concept(lhs),
                rhs: self.query_name(rhs, Polarity::Neg),
            },
        }
    }
}

/// Replaces typicality by fresh names, leaving `A ⊑ T(B)` and
/// `T(B) ⊑ C` inclusions over names. Not structurally normalized.
pub fn normalize_typicality(kb: &KnowledgeBase, mode: Mode) -> KnowledgeBase {
    let mut n = Normalizer {
        mode,
        signature: kb.signature.clone(),
        axioms: Vec::new(),
        seen: HashSet::new(),
        typ: BTreeMap::new(),
        ranked: Vec::new(),
        names: HashMap::new(),
        query_names: HashMap::new(),
        fresh: Vec::new(),
        used: HashSet::new(),
        typicality_occurrences: 0,
    };
    let mut out = Vec::new();
    for (_, _, ax) in kb.axioms() {
        out.extend(n.typicality_pass(ax));
    }
    // the bridging axioms were normalized as they were produced; report
    // them in plain form too
    let mut result = KnowledgeBase::new(n.signature.clone());
    for a in n.axioms.iter().map(NormalAxiom::to_axiom).chain(out) {
        result.add(a);
    }
    result.compute_simple_roles();
    result
}

/// Normalizes a knowledge base together with a batch of queries.
pub fn normalize(kb: &KnowledgeBase, queries: &[Query], mode: Mode) -> (NormalizedKB, Vec<NormalQuery>) {
    let mut n = Normalizer::new(kb, mode);
    let qs = queries.iter().map(|q| n.add_query(q)).collect();
    (n.finish(), qs)
}

/// Names that occur in a normalized KB but not in the source signature.
pub fn fresh_names(nkb: &NormalizedKB) -> BTreeSet<&str> {
    nkb.fresh_name_log.iter().map(|f| f.name.as_str()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_kb;

    fn normal(src: &str, mode: Mode) -> NormalizedKB {
        normalize(&parse_kb(src).unwrap(), &[], mode).0
    }

    #[test]
    fn plain_subsumption_is_unchanged() {
        let n = normal("class A, B. A <= B.", Mode::General);
        assert_eq!(
            n.axioms,
            vec![NormalAxiom::Sub {
                sub: ClassRef::name("A"),
                sup: ClassRef::name("B")
            }]
        );
        assert!(n.fresh_name_log.is_empty());
    }

    #[test]
    fn conjunction_order_shares_names() {
        let n = normal("class A, B, C. T(A and B) <= C. T(B and A) <= C.", Mode::General);
        assert_eq!(n.aux_registry.len(), 1);
        assert_eq!(n.ranked.len(), 1);
    }

    #[test]
    fn simple_mode_has_no_sub_typ() {
        let n = normal("class A, B, C. role r. T(A) <= B. T(A) and T(B) <= bot. T(A and B) <= some r.C.", Mode::Simple);
        assert!(!n.axioms.iter().any(|a| matches!(a, NormalAxiom::SubTyp { .. })));
        assert!(n.axioms.contains(&NormalAxiom::TypSub {
            typ: ClassRef::name("A"),
            sup: ClassRef::name("B")
        }));
    }

    #[test]
    fn general_mode_links_both_directions() {
        let n = normal("class A, B. T(A) <= B.", Mode::General);
        let x = n.aux_registry["A"].x.clone().unwrap();
        let x = ClassRef::Name(x);
        assert!(n.axioms.contains(&NormalAxiom::SubTyp { sub: x.clone(), typ: ClassRef::name("A") }));
        assert!(n.axioms.contains(&NormalAxiom::TypSub { typ: ClassRef::name("A"), sup: x.clone() }));
        assert!(n.axioms.contains(&NormalAxiom::Sub { sub: x, sup: ClassRef::name("B") }));
    }

    #[test]
    fn lhs_conjunction_becomes_binary_chain() {
        let n = normal("class A, B, C, D. A and B and C <= D.", Mode::General);
        let conj = n.axioms.iter().filter(|a| matches!(a, NormalAxiom::Conj { .. })).count();
        assert_eq!(conj, 2);
        assert_eq!(n.axioms.len(), 2);
    }

    #[test]
    fn complex_on_both_sides_is_split() {
        let n = normal("class A, B. role r. some r.A <= some r.B.", Mode::General);
        assert_eq!(n.axioms.len(), 2);
        assert!(matches!(n.axioms[0], NormalAxiom::ExistsSub { .. }));
        assert!(matches!(n.axioms[1], NormalAxiom::SubExists { .. }));
    }

    #[test]
    fn normalization_is_deterministic() {
        let src = "class A, B, C. role r. individual a. T(A and some r.{a}) <= some r.(B and C). (A and B)(a).";
        assert_eq!(normal(src, Mode::General), normal(src, Mode::General));
    }

    #[test]
    fn fresh_names_avoid_the_signature() {
        let first = normal("class A, B. role r. A <= some r.(A and B).", Mode::General);
        let taken = first.fresh_name_log[0].name.clone();
        let src = format!("class A, B, {taken}. role r. A <= some r.(A and B).");
        let second = normal(&src, Mode::General);
        assert_ne!(second.fresh_name_log[0].name, taken);
    }

    #[test]
    fn normalized_kb_prints_and_parses() {
        let n = normal(
            "class A, B, C. role r, s. individual a, b. T(A and B) <= some r.{a}. A x some s.B <= r. r <= A x (B and C). (A and T(C))(b).",
            Mode::General,
        );
        let kb = n.to_kb();
        let text = crate::syntax::print_kb(&kb);
        assert_eq!(parse_kb(&text).unwrap(), kb);
    }

    #[test]
    fn query_concepts_are_named() {
        let kb = parse_kb("class Student, Italian. individual mario.").unwrap();
        let q = Query::InstanceOf {
            c: Concept::name("Student").and(Concept::name("Italian")),
            a: "mario".into(),
        };
        let (n, qs) = normalize(&kb, &[q], Mode::General);
        let NormalQuery::Instance { class, .. } = &qs[0] else { panic!() };
        assert!(n.axioms.contains(&NormalAxiom::Conj {
            left: ClassRef::name("Student"),
            right: ClassRef::name("Italian"),
            sup: class.clone(),
        }));
        let plain = Query::InstanceOf {
            c: Concept::name("Student"),
            a: "mario".into(),
        };
        let (_, qs) = normalize(&kb, &[plain], Mode::General);
        assert_eq!(
            qs[0],
            NormalQuery::Instance {
                a: "mario".into(),
                class: ClassRef::name("Student")
            }
        );
    }

    #[test]
    fn renaming_comparator() {
        let kb = parse_kb("class A, B.\nA and B <= T(A).\n").unwrap();
        let (n, _) = normalize(&kb, &[], Mode::General);
        let fresh: Vec<String> = fresh_names(&n).into_iter().map(str::to_owned).collect();
        let name = |s: &str| ClassRef::name(s);
        let mut expected = vec![
            NormalAxiom::Conj {
                left: name("B"),
                right: name("A"),
                sup: name("X"),
            },
            NormalAxiom::SubTyp {
                sub: name("X"),
                typ: name("A"),
            },
            NormalAxiom::TypSub {
                typ: name("A"),
                sup: name("X"),
            },
        ];
        let holes = ["X".to_owned()];
        assert!(match_up_to_renaming(&n.axioms, &fresh, &expected, &holes).is_some());
        expected.pop();
        assert!(match_up_to_renaming(&n.axioms, &fresh, &expected, &holes).is_none());
        assert!(match_up_to_renaming(&n.axioms, &fresh, &expected, &[]).is_none());
    }
}
