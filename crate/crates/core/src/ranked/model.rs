//! Finite ranked interpretations and their direct evaluation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Result, SroelError};
use crate::kb::{Axiom, Concept, KnowledgeBase, Query};

/// Elements are `0..size`; `x < y` iff `rank[x] < rank[y]`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RankedInterpretation {
    pub size: usize,
    pub rank: Vec<u32>,
    pub concepts: BTreeMap<String, BTreeSet<usize>>,
    pub roles: BTreeMap<String, BTreeSet<(usize, usize)>>,
    pub individuals: BTreeMap<String, usize>,
}

fn unknown(kind: &str, name: &str) -> SroelError {
    SroelError::Invalid(format!("unknown {kind} `{name}` in interpretation"))
}

impl RankedInterpretation {
    /// An interpretation with all ranks 0 and every name of `kb` interpreted
    /// as empty, individuals mapped to element 0.
    pub fn empty_over(kb: &KnowledgeBase, size: usize) -> Self {
        let sig = &kb.signature;
        RankedInterpretation {
            size,
            rank: vec![0; size],
            concepts: sig.concept_names.iter().map(|c| (c.clone(), BTreeSet::new())).collect(),
            roles: sig.role_names.iter().map(|r| (r.clone(), BTreeSet::new())).collect(),
            individuals: sig.individual_names.iter().map(|a| (a.clone(), 0)).collect(),
        }
    }

    fn role(&self, r: &str) -> Result<&BTreeSet<(usize, usize)>> {
        self.roles.get(r).ok_or_else(|| unknown("role", r))
    }

    fn individual(&self, a: &str) -> Result<usize> {
        self.individuals.get(a).copied().ok_or_else(|| unknown("individual", a))
    }

    fn mask(&self, c: &Concept) -> Result<Vec<bool>> {
        let n = self.size;
        Ok(match c {
            Concept::Top => vec![true; n],
            Concept::Bot => vec![false; n],
            Concept::Name(a) => {
                let ext = self.concepts.get(a).ok_or_else(|| unknown("concept", a))?;
                (0..n).map(|e| ext.contains(&e)).collect()
            }
            Concept::Nominal(a) => {
                let i = self.individual(a)?;
                (0..n).map(|e| e == i).collect()
            }
            Concept::Conj(a, b) => {
                let (a, b) = (self.mask(a)?, self.mask(b)?);
                a.iter().zip(&b).map(|(x, y)| *x && *y).collect()
            }
            Concept::Exists(r, f) => {
                let f = self.mask(f)?;
                let mut out = vec![false; n];
                for &(x, y) in self.role(r)? {
                    if f[y] {
                        out[x] = true;
                    }
                }
                out
            }
            Concept::SelfRestriction(r) => {
                let ext = self.role(r)?;
                (0..n).map(|e| ext.contains(&(e, e))).collect()
            }
            Concept::Typicality(c) => {
                let c = self.mask(c)?;
                let min = (0..n).filter(|&e| c[e]).map(|e| self.rank[e]).min();
                (0..n).map(|e| c[e] && Some(self.rank[e]) == min).collect()
            }
        })
    }

    /// The extension `C^I`.
    pub fn extension(&self, c: &Concept) -> Result<BTreeSet<usize>> {
        Ok(self.mask(c)?.into_iter().enumerate().filter(|(_, b)| *b).map(|(e, _)| e).collect())
    }

    pub fn satisfies(&self, ax: &Axiom) -> Result<bool> {
        let subset = |a: &BTreeSet<(usize, usize)>, b: &BTreeSet<(usize, usize)>| a.is_subset(b);
        Ok(match ax {
            Axiom::Gci { lhs, rhs } => self.extension(lhs)?.is_subset(&self.extension(rhs)?),
            Axiom::RoleIncl { sub, sup } => subset(self.role(sub)?, self.role(sup)?),
            Axiom::RoleChain { r1, r2, sup } => {
                let (r1, r2, sup) = (self.role(r1)?, self.role(r2)?, self.role(sup)?);
                r1.iter()
                    .all(|&(x, y)| r2.iter().filter(|p| p.0 == y).all(|&(_, z)| sup.contains(&(x, z))))
            }
            Axiom::RoleConj { r1, r2, sup } => {
                let (r2, sup) = (self.role(r2)?, self.role(sup)?);
                self.role(r1)?.iter().filter(|p| r2.contains(p)).all(|p| sup.contains(p))
            }
            Axiom::ProductToRole { c, d, sup } => {
                let (c, d, sup) = (self.extension(c)?, self.extension(d)?, self.role(sup)?);
                c.iter().all(|&x| d.iter().all(|&y| sup.contains(&(x, y))))
            }
            Axiom::RoleToProduct { sub, c, d } => {
                let (c, d) = (self.mask(c)?, self.mask(d)?);
                self.role(sub)?.iter().all(|&(x, y)| c[x] && d[y])
            }
            Axiom::ConceptAssertion { c, a } => self.mask(c)?[self.individual(a)?],
            Axiom::RoleAssertion { r, a, b } => self.role(r)?.contains(&(self.individual(a)?, self.individual(b)?)),
        })
    }

    /// First axiom of `kb` that fails, if any.
    pub fn violated<'a>(&self, kb: &'a KnowledgeBase) -> Result<Option<&'a Axiom>> {
        for (_, _, ax) in kb.axioms() {
            if !self.satisfies(ax)? {
                return Ok(Some(ax));
            }
        }
        Ok(None)
    }

    pub fn is_model(&self, kb: &KnowledgeBase) -> Result<bool> {
        Ok(self.violated(kb)?.is_none())
    }

    /// Whether the query holds in this interpretation.
    pub fn holds(&self, q: &Query) -> Result<bool> {
        Ok(match q {
            Query::InstanceOf { c, a } => self.mask(c)?[self.individual(a)?],
            Query::TypicalInstanceOf { c, a } => self.mask(&c.clone().typical())?[self.individual(a)?],
            Query::RoleHolds { r, a, b } => self.role(r)?.contains(&(self.individual(a)?, self.individual(b)?)),
            Query::Subsumes { lhs, rhs } => self.extension(lhs)?.is_subset(&self.extension(rhs)?),
            Query::TypSubsumes { lhs, rhs } => {
                self.extension(&lhs.clone().typical())?.is_subset(&self.extension(rhs)?)
            }
        })
    }
}

/// One row per element: rank, individuals, concepts, outgoing roles.
impl fmt::Display for RankedInterpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "element  rank  individuals  concepts  roles")?;
        let mut order: Vec<usize> = (0..self.size).collect();
        order.sort_by_key(|&e| (self.rank[e], e));
        for e in order {
            let names = |it: &mut dyn Iterator<Item = String>| {
                let v: Vec<String> = it.collect();
                if v.is_empty() {
                    "-".to_owned()
                } else {
                    v.join(",")
                }
            };
            let inds = names(&mut self.individuals.iter().filter(|(_, &x)| x == e).map(|(a, _)| a.clone()));
            let cons = names(&mut self.concepts.iter().filter(|(_, s)| s.contains(&e)).map(|(c, _)| c.clone()));
            let roles = names(&mut self.roles.iter().flat_map(|(r, s)| {
                s.iter().filter(move |p| p.0 == e).map(move |p| format!("{r}->e{}", p.1))
            }));
            writeln!(f, "e{e}  {}  {inds}  {cons}  {roles}", self.rank[e])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{parse_kb, parse_query};

    fn kb() -> KnowledgeBase {
        parse_kb("class Student, Young, C, D.\nrole R.\nindividual a.\n").unwrap()
    }

    #[test]
    fn typical_extension_is_minimum() {
        let kb = kb();
        let mut m = RankedInterpretation::empty_over(&kb, 2);
        m.rank = vec![1, 0];
        let t = Concept::name("C").typical();
        assert!(m.extension(&t).unwrap().is_empty());
        m.concepts.get_mut("C").unwrap().extend([0, 1]);
        assert_eq!(m.extension(&t).unwrap(), BTreeSet::from([1]));
        m.concepts.get_mut("D").unwrap().insert(0);
        let q = parse_query("T(C) <= D", &kb).unwrap();
        assert!(!m.holds(&q).unwrap());
        m.rank = vec![0, 1];
        assert!(m.holds(&q).unwrap());
    }

    #[test]
    fn self_and_products() {
        let kb = kb();
        let mut m = RankedInterpretation::empty_over(&kb, 2);
        m.roles.get_mut("R").unwrap().insert((0, 0));
        assert_eq!(m.extension(&Concept::self_of("R")).unwrap(), BTreeSet::from([0]));
        m.concepts.get_mut("C").unwrap().insert(0);
        let prod = Axiom::ProductToRole {
            c: Concept::name("C"),
            d: Concept::Top,
            sup: "R".into(),
        };
        assert!(!m.satisfies(&prod).unwrap());
        m.roles.get_mut("R").unwrap().insert((0, 1));
        assert!(m.satisfies(&prod).unwrap());
    }

    #[test]
    fn unknown_names_are_errors() {
        let m = RankedInterpretation::empty_over(&kb(), 1);
        assert!(m.extension(&Concept::name("Nope")).is_err());
    }
}
