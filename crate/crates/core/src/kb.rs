//! Knowledge bases, concepts and queries.

use std::collections::BTreeSet;
use std::fmt;

/// A concept expression. Typicality may wrap any concept that does not
/// itself contain typicality.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Concept {
    Top,
    Bot,
    Name(String),
    Nominal(String),
    Conj(Box<Concept>, Box<Concept>),
    Exists(String, Box<Concept>),
    SelfRestriction(String),
    Typicality(Box<Concept>),
}

impl Concept {
    pub fn name(n: impl Into<String>) -> Self {
        Concept::Name(n.into())
    }

    pub fn nominal(a: impl Into<String>) -> Self {
        Concept::Nominal(a.into())
    }

    pub fn and(self, other: Concept) -> Self {
        Concept::Conj(Box::new(self), Box::new(other))
    }

    pub fn some(role: impl Into<String>, filler: Concept) -> Self {
        Concept::Exists(role.into(), Box::new(filler))
    }

    pub fn self_of(role: impl Into<String>) -> Self {
        Concept::SelfRestriction(role.into())
    }

    pub fn typical(self) -> Self {
        Concept::Typicality(Box::new(self))
    }

    /// Left-nested conjunction of the given concepts; `Top` when empty.
    pub fn conj_all(parts: impl IntoIterator<Item = Concept>) -> Self {
        parts
            .into_iter()
            .reduce(|a, b| a.and(b))
            .unwrap_or(Concept::Top)
    }

    /// Top, bottom or a concept name.
    pub fn is_atomic(&self) -> bool {
        matches!(self, Concept::Top | Concept::Bot | Concept::Name(_))
    }

    pub fn contains_typicality(&self) -> bool {
        match self {
            Concept::Typicality(_) => true,
            Concept::Conj(a, b) => a.contains_typicality() || b.contains_typicality(),
            Concept::Exists(_, c) => c.contains_typicality(),
            _ => false,
        }
    }

    /// Number of typicality nodes.
    pub fn typicality_count(&self) -> usize {
        match self {
            Concept::Typicality(c) => 1 + c.typicality_count(),
            Concept::Conj(a, b) => a.typicality_count() + b.typicality_count(),
            Concept::Exists(_, c) => c.typicality_count(),
            _ => 0,
        }
    }

    /// Whether a typicality node occurs below another one.
    pub fn has_nested_typicality(&self) -> bool {
        match self {
            Concept::Typicality(c) => c.contains_typicality(),
            Concept::Conj(a, b) => a.has_nested_typicality() || b.has_nested_typicality(),
            Concept::Exists(_, c) => c.has_nested_typicality(),
            _ => false,
        }
    }

    /// Conjuncts of a (possibly nested) conjunction, left to right.
    pub fn conjuncts(&self) -> Vec<&Concept> {
        match self {
            Concept::Conj(a, b) => {
                let mut v = a.conjuncts();
                v.extend(b.conjuncts());
                v
            }
            c => vec![c],
        }
    }

    /// Number of constructor nodes.
    pub fn size(&self) -> usize {
        match self {
            Concept::Conj(a, b) => 1 + a.size() + b.size(),
            Concept::Exists(_, c) | Concept::Typicality(c) => 1 + c.size(),
            _ => 1,
        }
    }

    pub(crate) fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Concept)) {
        f(self);
        match self {
            Concept::Conj(a, b) => {
                a.walk(f);
                b.walk(f);
            }
            Concept::Exists(_, c) | Concept::Typicality(c) => c.walk(f),
            _ => {}
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Axiom {
    Gci { lhs: Concept, rhs: Concept },
    RoleIncl { sub: String, sup: String },
    RoleChain { r1: String, r2: String, sup: String },
    RoleConj { r1: String, r2: String, sup: String },
    ProductToRole { c: Concept, d: Concept, sup: String },
    RoleToProduct { sub: String, c: Concept, d: Concept },
    ConceptAssertion { c: Concept, a: String },
    RoleAssertion { r: String, a: String, b: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoxKind {
    TBox,
    RBox,
    ABox,
}

impl fmt::Display for BoxKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoxKind::TBox => "tbox",
            BoxKind::RBox => "rbox",
            BoxKind::ABox => "abox",
        })
    }
}

impl Axiom {
    pub fn gci(lhs: Concept, rhs: Concept) -> Self {
        Axiom::Gci { lhs, rhs }
    }

    pub fn box_kind(&self) -> BoxKind {
        match self {
            Axiom::Gci { .. } => BoxKind::TBox,
            Axiom::ConceptAssertion { .. } | Axiom::RoleAssertion { .. } => BoxKind::ABox,
            _ => BoxKind::RBox,
        }
    }

    pub fn concepts(&self) -> Vec<&Concept> {
        match self {
            Axiom::Gci { lhs, rhs } => vec![lhs, rhs],
            Axiom::ProductToRole { c, d, .. } | Axiom::RoleToProduct { c, d, .. } => vec![c, d],
            Axiom::ConceptAssertion { c, .. } => vec![c],
            _ => vec![],
        }
    }

    /// Role names mentioned directly by the axiom (not inside concepts).
    pub fn roles(&self) -> Vec<&str> {
        match self {
            Axiom::RoleIncl { sub, sup } => vec![sub, sup],
            Axiom::RoleChain { r1, r2, sup } | Axiom::RoleConj { r1, r2, sup } => vec![r1, r2, sup],
            Axiom::ProductToRole { sup, .. } => vec![sup],
            Axiom::RoleToProduct { sub, .. } => vec![sub],
            Axiom::RoleAssertion { r, .. } => vec![r],
            _ => vec![],
        }
    }

    pub fn individuals(&self) -> Vec<&str> {
        match self {
            Axiom::ConceptAssertion { a, .. } => vec![a],
            Axiom::RoleAssertion { a, b, .. } => vec![a, b],
            _ => vec![],
        }
    }

    pub fn size(&self) -> usize {
        1 + self.concepts().iter().map(|c| c.size()).sum::<usize>() + self.roles().len()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    pub concept_names: BTreeSet<String>,
    pub role_names: BTreeSet<String>,
    pub individual_names: BTreeSet<String>,
    pub simple_roles: BTreeSet<String>,
}

impl Signature {
    pub fn is_concept(&self, n: &str) -> bool {
        self.concept_names.contains(n)
    }

    pub fn is_role(&self, n: &str) -> bool {
        self.role_names.contains(n)
    }

    pub fn is_individual(&self, n: &str) -> bool {
        self.individual_names.contains(n)
    }

    pub fn contains(&self, n: &str) -> bool {
        self.is_concept(n) || self.is_role(n) || self.is_individual(n)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KnowledgeBase {
    pub signature: Signature,
    pub tbox: Vec<Axiom>,
    pub rbox: Vec<Axiom>,
    pub abox: Vec<Axiom>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationKind {
    NestedTypicality,
    Undeclared { kind: &'static str, name: String },
    NonSimpleRole { role: String },
    NameClash { name: String },
    MisplacedAxiom { expected: BoxKind },
    SimpleRoleNotDeclared { role: String },
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViolationKind::NestedTypicality => f.write_str("nested typicality"),
            ViolationKind::Undeclared { kind, name } => write!(f, "undeclared {kind} `{name}`"),
            ViolationKind::NonSimpleRole { role } => {
                write!(f, "role `{role}` must be simple here but occurs on the right of a role chain")
            }
            ViolationKind::NameClash { name } => {
                write!(f, "`{name}` is declared with more than one kind")
            }
            ViolationKind::MisplacedAxiom { expected } => write!(f, "axiom belongs in the {expected}"),
            ViolationKind::SimpleRoleNotDeclared { role } => {
                write!(f, "simple role `{role}` is not a declared role")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Violation {
    /// Box and position of the offending axiom, if any.
    pub location: Option<(BoxKind, usize)>,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.location {
            Some((b, i)) => write!(f, "{b} axiom {}: {}", i + 1, self.kind),
            None => write!(f, "{}", self.kind),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub simple: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl KnowledgeBase {
    pub fn new(signature: Signature) -> Self {
        KnowledgeBase {
            signature,
            ..Default::default()
        }
    }

    /// Appends an axiom to the box it belongs to.
    pub fn add(&mut self, axiom: Axiom) {
        match axiom.box_kind() {
            BoxKind::TBox => self.tbox.push(axiom),
            BoxKind::RBox => self.rbox.push(axiom),
            BoxKind::ABox => self.abox.push(axiom),
        }
    }

    pub fn axioms(&self) -> impl Iterator<Item = (BoxKind, usize, &Axiom)> {
        fn tagged(kind: BoxKind, v: &[Axiom]) -> impl Iterator<Item = (BoxKind, usize, &Axiom)> {
            v.iter().enumerate().map(move |(i, a)| (kind, i, a))
        }
        tagged(BoxKind::TBox, &self.tbox)
            .chain(tagged(BoxKind::RBox, &self.rbox))
            .chain(tagged(BoxKind::ABox, &self.abox))
    }

    pub fn size(&self) -> usize {
        self.axioms().map(|(_, _, a)| a.size()).sum()
    }

    /// Roles that occur (transitively) as the super role of a role chain.
    pub fn non_simple_roles(&self) -> BTreeSet<String> {
        let mut non_simple: BTreeSet<String> = self
            .rbox
            .iter()
            .filter_map(|a| match a {
                Axiom::RoleChain { sup, .. } => Some(sup.clone()),
                _ => None,
            })
            .collect();
        loop {
            let before = non_simple.len();
            for a in &self.rbox {
                if let Axiom::RoleIncl { sub, sup } = a {
                    if non_simple.contains(sub) {
                        non_simple.insert(sup.clone());
                    }
                }
            }
            if non_simple.len() == before {
                return non_simple;
            }
        }
    }

    /// Sets `signature.simple_roles` from the role box.
    pub fn compute_simple_roles(&mut self) {
        let non_simple = self.non_simple_roles();
        self.signature.simple_roles = self
            .signature
            .role_names
            .iter()
            .filter(|r| !non_simple.contains(*r))
            .cloned()
            .collect();
    }

    /// Typicality occurs only on left-hand sides of TBox inclusions (never
    /// nested), and nowhere in right-hand sides, the RBox or the ABox.
    pub fn is_simple(&self) -> bool {
        self.tbox.iter().all(|a| match a {
            Axiom::Gci { lhs, rhs } => !lhs.has_nested_typicality() && !rhs.contains_typicality(),
            _ => true,
        }) && self
            .rbox
            .iter()
            .chain(&self.abox)
            .all(|a| a.concepts().iter().all(|c| !c.contains_typicality()))
    }

    /// First axiom that breaks the simple-KB condition.
    pub fn first_non_simple(&self) -> Option<(BoxKind, usize, &Axiom)> {
        self.axioms().find(|(kind, _, a)| match (kind, a) {
            (BoxKind::TBox, Axiom::Gci { lhs, rhs }) => {
                lhs.has_nested_typicality() || rhs.contains_typicality()
            }
            _ => a.concepts().iter().any(|c| c.contains_typicality()),
        })
    }

    /// Number of typicality occurrences in the TBox.
    pub fn tbox_typicality_count(&self) -> usize {
        self.tbox
            .iter()
            .flat_map(|a| a.concepts())
            .map(Concept::typicality_count)
            .sum()
    }

    pub fn validate(&self) -> ValidationReport {
        let sig = &self.signature;
        let mut violations = BTreeSet::new();
        let mut push = |location, kind| {
            violations.insert(Violation { location, kind });
        };
        for n in &sig.concept_names {
            if sig.is_role(n) || sig.is_individual(n) {
                push(None, ViolationKind::NameClash { name: n.clone() });
            }
        }
        for n in &sig.role_names {
            if sig.is_individual(n) {
                push(None, ViolationKind::NameClash { name: n.clone() });
            }
        }
        for r in &sig.simple_roles {
            if !sig.is_role(r) {
                push(None, ViolationKind::SimpleRoleNotDeclared { role: r.clone() });
            }
        }
        let non_simple = self.non_simple_roles();
        for (kind, i, ax) in self.axioms() {
            let loc = Some((kind, i));
            if ax.box_kind() != kind {
                push(loc, ViolationKind::MisplacedAxiom { expected: ax.box_kind() });
            }
            for r in ax.roles() {
                if !sig.is_role(r) {
                    push(loc, ViolationKind::Undeclared { kind: "role", name: r.to_owned() });
                }
            }
            for a in ax.individuals() {
                if !sig.is_individual(a) {
                    push(loc, ViolationKind::Undeclared { kind: "individual", name: a.to_owned() });
                }
            }
            if let Axiom::RoleConj { r1, r2, .. } = ax {
                for r in [r1, r2] {
                    if non_simple.contains(r) {
                        push(loc, ViolationKind::NonSimpleRole { role: r.clone() });
                    }
                }
            }
            for c in ax.concepts() {
                for v in concept_violations(c, sig, &non_simple) {
                    push(loc, v);
                }
            }
        }
        ValidationReport {
            violations: violations.into_iter().collect(),
            simple: self.is_simple(),
        }
    }
}

pub(crate) fn concept_violations(
    c: &Concept,
    sig: &Signature,
    non_simple: &BTreeSet<String>,
) -> Vec<ViolationKind> {
    let mut out = Vec::new();
    if c.has_nested_typicality() {
        out.push(ViolationKind::NestedTypicality);
    }
    c.walk(&mut |n| match n {
        Concept::Name(a) if !sig.is_concept(a) => out.push(ViolationKind::Undeclared {
            kind: "class",
            name: a.clone(),
        }),
        Concept::Nominal(a) if !sig.is_individual(a) => out.push(ViolationKind::Undeclared {
            kind: "individual",
            name: a.clone(),
        }),
        Concept::Exists(r, _) if !sig.is_role(r) => out.push(ViolationKind::Undeclared {
            kind: "role",
            name: r.clone(),
        }),
        Concept::SelfRestriction(r) => {
            if !sig.is_role(r) {
                out.push(ViolationKind::Undeclared {
                    kind: "role",
                    name: r.clone(),
                });
            } else if non_simple.contains(r) {
                out.push(ViolationKind::NonSimpleRole { role: r.clone() });
            }
        }
        _ => {}
    });
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Query {
    InstanceOf { c: Concept, a: String },
    TypicalInstanceOf { c: Concept, a: String },
    RoleHolds { r: String, a: String, b: String },
    Subsumes { lhs: Concept, rhs: Concept },
    TypSubsumes { lhs: Concept, rhs: Concept },
}

impl Query {
    pub fn concepts(&self) -> Vec<&Concept> {
        match self {
            Query::InstanceOf { c, .. } | Query::TypicalInstanceOf { c, .. } => vec![c],
            Query::RoleHolds { .. } => vec![],
            Query::Subsumes { lhs, rhs } | Query::TypSubsumes { lhs, rhs } => vec![lhs, rhs],
        }
    }

    /// Violations of the query against a knowledge base's signature.
    pub fn violations(&self, kb: &KnowledgeBase) -> Vec<ViolationKind> {
        let sig = &kb.signature;
        let non_simple = kb.non_simple_roles();
        let mut out: Vec<ViolationKind> = self
            .concepts()
            .into_iter()
            .flat_map(|c| concept_violations(c, sig, &non_simple))
            .collect();
        if let Query::TypicalInstanceOf { c, .. } | Query::TypSubsumes { lhs: c, .. } = self {
            if c.contains_typicality() {
                out.push(ViolationKind::NestedTypicality);
            }
        }
        let mut individual = |a: &String| {
            if !sig.is_individual(a) {
                out.push(ViolationKind::Undeclared {
                    kind: "individual",
                    name: a.clone(),
                });
            }
        };
        match self {
            Query::InstanceOf { a, .. } | Query::TypicalInstanceOf { a, .. } => individual(a),
            Query::RoleHolds { r, a, b } => {
                individual(a);
                individual(b);
                if !sig.is_role(r) {
                    out.push(ViolationKind::Undeclared {
                        kind: "role",
                        name: r.clone(),
                    });
                }
            }
            _ => {}
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(classes: &[&str], roles: &[&str], inds: &[&str]) -> Signature {
        let set = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
        Signature {
            concept_names: set(classes),
            role_names: set(roles),
            individual_names: set(inds),
            simple_roles: set(roles),
        }
    }

    #[test]
    fn empty_kb_is_valid_and_simple() {
        let r = KnowledgeBase::default().validate();
        assert!(r.is_valid());
        assert!(r.simple);
    }

    #[test]
    fn nested_typicality_is_reported() {
        let mut kb = KnowledgeBase::new(sig(&["A", "B"], &[], &[]));
        kb.add(Axiom::gci(Concept::name("A").typical().typical(), Concept::name("B")));
        let r = kb.validate();
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].kind, ViolationKind::NestedTypicality);
        assert_eq!(r.violations[0].to_string(), "tbox axiom 1: nested typicality");
    }

    #[test]
    fn typicality_on_the_right_is_not_simple() {
        let mut kb = KnowledgeBase::new(sig(&["A", "B"], &[], &[]));
        kb.add(Axiom::gci(Concept::name("A"), Concept::name("B")));
        assert!(kb.is_simple());
        kb.add(Axiom::gci(Concept::name("A"), Concept::name("B").typical()));
        assert!(!kb.is_simple());
        assert_eq!(kb.first_non_simple().map(|(_, i, _)| i), Some(1));
    }

    #[test]
    fn typicality_in_abox_is_not_simple() {
        let mut kb = KnowledgeBase::new(sig(&["A"], &[], &["a"]));
        kb.add(Axiom::ConceptAssertion {
            c: Concept::name("A").typical(),
            a: "a".into(),
        });
        assert!(!kb.validate().simple);
    }

    #[test]
    fn self_on_chain_role_is_rejected() {
        let mut kb = KnowledgeBase::new(sig(&["A"], &["r", "s", "t"], &[]));
        kb.add(Axiom::RoleChain {
            r1: "r".into(),
            r2: "s".into(),
            sup: "t".into(),
        });
        kb.add(Axiom::gci(Concept::self_of("t"), Concept::name("A")));
        kb.compute_simple_roles();
        let r = kb.validate();
        assert!(r.violations.iter().any(|v| v.kind == ViolationKind::NonSimpleRole { role: "t".into() }));
        assert!(!kb.signature.simple_roles.contains("t"));
    }

    #[test]
    fn undeclared_names_are_reported() {
        let mut kb = KnowledgeBase::new(sig(&["A"], &[], &[]));
        kb.add(Axiom::gci(Concept::name("A"), Concept::some("r", Concept::name("B"))));
        let kinds: Vec<_> = kb.validate().violations.into_iter().map(|v| v.kind).collect();
        assert!(kinds.contains(&ViolationKind::Undeclared { kind: "class", name: "B".into() }));
        assert!(kinds.contains(&ViolationKind::Undeclared { kind: "role", name: "r".into() }));
    }

    #[test]
    fn validation_ignores_axiom_order() {
        let mut kb = KnowledgeBase::new(sig(&["A"], &[], &[]));
        kb.add(Axiom::gci(Concept::name("B"), Concept::name("A")));
        kb.add(Axiom::gci(Concept::name("A").typical().typical(), Concept::name("A")));
        let mut rev = kb.clone();
        rev.tbox.reverse();
        let kinds = |k: &KnowledgeBase| {
            let mut v: Vec<_> = k.validate().violations.into_iter().map(|v| v.kind).collect();
            v.sort();
            v
        };
        assert_eq!(kinds(&kb), kinds(&rev));
    }
}
