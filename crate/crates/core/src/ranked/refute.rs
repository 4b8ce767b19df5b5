//! Bounded counter-model search through a SAT encoding.
//!
//! Ranks use an order encoding (`ge[e][k]` iff `rank(e) >= k`), and every
//! concept gets one defined literal per element. Elements are sorted by
//! rank, which removes the permutations of a model that only reorder equal
//! ranks.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use varisat::{ExtendFormula, Lit, Solver};

use super::model::RankedInterpretation;
use crate::calculus::check_inputs;
use crate::error::{Result, SroelError};
use crate::kb::{Axiom, Concept, KnowledgeBase, Query};

/// Largest number of clauses one encoding may reach.
pub const CLAUSE_CAP: usize = 4_000_000;

/// A knowledge base encoded over a fixed domain size and rank bound.
/// Queries are checked under assumptions, so one instance serves many.
pub struct Refuter<'k> {
    kb: &'k KnowledgeBase,
    solver: Solver<'static>,
    size: usize,
    max_rank: u32,
    truth: Lit,
    ge: Vec<Vec<Lit>>,
    names: BTreeMap<String, Vec<Lit>>,
    roles: BTreeMap<String, Vec<Vec<Lit>>>,
    inds: BTreeMap<String, Vec<Lit>>,
    memo: HashMap<Concept, Vec<Lit>>,
    lt: HashMap<(usize, usize), Lit>,
    clauses: usize,
}

impl<'k> Refuter<'k> {
    pub fn new(kb: &'k KnowledgeBase, size: usize, max_rank: u32) -> Result<Self> {
        if size == 0 {
            return Err(SroelError::Invalid("the domain needs at least one element".into()));
        }
        check_inputs(kb, &[])?;
        let estimate = kb
            .axioms()
            .map(|(_, _, a)| match a {
                Axiom::RoleChain { .. } => size.pow(3),
                _ => size * size * (1 + a.size()),
            })
            .sum::<usize>();
        if estimate > CLAUSE_CAP {
            return Err(SroelError::BoundOverflow(format!(
                "about {estimate} clauses for {size} elements"
            )));
        }
        let mut solver = Solver::new();
        let truth = solver.new_lit();
        solver.add_clause(&[truth]);
        let sig = &kb.signature;
        let mut fresh = |n: usize| -> Vec<Lit> { (0..n).map(|_| solver.new_lit()).collect() };
        let ge: Vec<Vec<Lit>> = (0..size).map(|_| fresh(max_rank as usize)).collect();
        let names = sig.concept_names.iter().map(|c| (c.clone(), fresh(size))).collect();
        let roles = sig
            .role_names
            .iter()
            .map(|r| (r.clone(), (0..size).map(|_| fresh(size)).collect()))
            .collect();
        let inds: BTreeMap<String, Vec<Lit>> = sig.individual_names.iter().map(|a| (a.clone(), fresh(size))).collect();
        let mut r = Refuter {
            kb,
            solver,
            size,
            max_rank,
            truth,
            ge,
            names,
            roles,
            inds,
            memo: HashMap::new(),
            lt: HashMap::new(),
            clauses: 1,
        };
        r.structure();
        for (_, _, ax) in kb.axioms() {
            r.axiom(ax)?;
        }
        Ok(r)
    }

    fn clause(&mut self, lits: &[Lit]) {
        self.clauses += 1;
        self.solver.add_clause(lits);
    }

    fn structure(&mut self) {
        for e in 0..self.size {
            for k in 1..self.max_rank as usize {
                let (hi, lo) = (self.ge[e][k], self.ge[e][k - 1]);
                self.clause(&[!hi, lo]);
            }
            if e + 1 < self.size {
                for k in 0..self.max_rank as usize {
                    let (a, b) = (self.ge[e][k], self.ge[e + 1][k]);
                    self.clause(&[!a, b]);
                }
            }
        }
        let inds: Vec<Vec<Lit>> = self.inds.values().cloned().collect();
        for v in inds {
            self.clause(&v);
            for i in 0..v.len() {
                for j in i + 1..v.len() {
                    self.clause(&[!v[i], !v[j]]);
                }
            }
        }
    }

    fn and(&mut self, lits: &[Lit]) -> Lit {
        match lits {
            [] => self.truth,
            [l] => *l,
            _ => {
                let g = self.solver.new_lit();
                for &l in lits {
                    self.clause(&[!g, l]);
                }
                let mut back: Vec<Lit> = lits.iter().map(|&l| !l).collect();
                back.push(g);
                self.clause(&back);
                g
            }
        }
    }

    fn or(&mut self, lits: &[Lit]) -> Lit {
        let neg: Vec<Lit> = lits.iter().map(|&l| !l).collect();
        !self.and(&neg)
    }

    /// `rank(z) < rank(e)`.
    fn less(&mut self, z: usize, e: usize) -> Lit {
        if let Some(&l) = self.lt.get(&(z, e)) {
            return l;
        }
        let terms: Vec<Lit> = (0..self.max_rank as usize)
            .map(|k| {
                let (a, b) = (!self.ge[z][k], self.ge[e][k]);
                self.and(&[a, b])
            })
            .collect();
        let l = self.or(&terms);
        self.lt.insert((z, e), l);
        l
    }

    fn role(&self, r: &str) -> Result<&Vec<Vec<Lit>>> {
        self.roles.get(r).ok_or_else(|| SroelError::Invalid(format!("unknown role `{r}`")))
    }

    fn ind(&self, a: &str) -> Result<Vec<Lit>> {
        self.inds.get(a).cloned().ok_or_else(|| SroelError::Invalid(format!("unknown individual `{a}`")))
    }

    /// One literal per element equivalent to membership in `c`.
    fn concept(&mut self, c: &Concept) -> Result<Vec<Lit>> {
        if let Some(v) = self.memo.get(c) {
            return Ok(v.clone());
        }
        let n = self.size;
        let v = match c {
            Concept::Top => vec![self.truth; n],
            Concept::Bot => vec![!self.truth; n],
            Concept::Name(a) => self
                .names
                .get(a)
                .cloned()
                .ok_or_else(|| SroelError::Invalid(format!("unknown concept `{a}`")))?,
            Concept::Nominal(a) => self.ind(a)?,
            Concept::Conj(a, b) => {
                let (a, b) = (self.concept(a)?, self.concept(b)?);
                (0..n).map(|e| self.and(&[a[e], b[e]])).collect()
            }
            Concept::Exists(r, f) => {
                let f = self.concept(f)?;
                let r = self.role(r)?.clone();
                (0..n)
                    .map(|e| {
                        let pairs: Vec<Lit> = (0..n).map(|y| self.and(&[r[e][y], f[y]])).collect();
                        self.or(&pairs)
                    })
                    .collect()
            }
            Concept::SelfRestriction(r) => {
                let r = self.role(r)?;
                (0..n).map(|e| r[e][e]).collect()
            }
            Concept::Typicality(inner) => {
                let c = self.concept(inner)?;
                (0..n)
                    .map(|e| {
                        let mut parts = vec![c[e]];
                        for (z, &cz) in c.iter().enumerate() {
                            if z != e {
                                let lt = self.less(z, e);
                                let below = self.and(&[cz, lt]);
                                parts.push(!below);
                            }
                        }
                        self.and(&parts)
                    })
                    .collect()
            }
        };
        self.memo.insert(c.clone(), v.clone());
        Ok(v)
    }

    fn axiom(&mut self, ax: &Axiom) -> Result<()> {
        let n = self.size;
        match ax {
            Axiom::Gci { lhs, rhs } => {
                let (c, d) = (self.concept(lhs)?, self.concept(rhs)?);
                for e in 0..n {
                    self.clause(&[!c[e], d[e]]);
                }
            }
            Axiom::RoleIncl { sub, sup } => {
                let (r, s) = (self.role(sub)?.clone(), self.role(sup)?.clone());
                for x in 0..n {
                    for y in 0..n {
                        self.clause(&[!r[x][y], s[x][y]]);
                    }
                }
            }
            Axiom::RoleChain { r1, r2, sup } => {
                let (r, s, t) = (self.role(r1)?.clone(), self.role(r2)?.clone(), self.role(sup)?.clone());
                for x in 0..n {
                    for y in 0..n {
                        for z in 0..n {
                            self.clause(&[!r[x][y], !s[y][z], t[x][z]]);
                        }
                    }
                }
            }
            Axiom::RoleConj { r1, r2, sup } => {
                let (r, s, t) = (self.role(r1)?.clone(), self.role(r2)?.clone(), self.role(sup)?.clone());
                for x in 0..n {
                    for y in 0..n {
                        self.clause(&[!r[x][y], !s[x][y], t[x][y]]);
                    }
                }
            }
            Axiom::ProductToRole { c, d, sup } => {
                let (c, d, t) = (self.concept(c)?, self.concept(d)?, self.role(sup)?.clone());
                for x in 0..n {
                    for y in 0..n {
                        self.clause(&[!c[x], !d[y], t[x][y]]);
                    }
                }
            }
            Axiom::RoleToProduct { sub, c, d } => {
                let (c, d, r) = (self.concept(c)?, self.concept(d)?, self.role(sub)?.clone());
                for x in 0..n {
                    for y in 0..n {
                        self.clause(&[!r[x][y], c[x]]);
                        self.clause(&[!r[x][y], d[y]]);
                    }
                }
            }
            Axiom::ConceptAssertion { c, a } => {
                let (c, a) = (self.concept(c)?, self.ind(a)?);
                for e in 0..n {
                    self.clause(&[!a[e], c[e]]);
                }
            }
            Axiom::RoleAssertion { r, a, b } => {
                let (r, a, b) = (self.role(r)?.clone(), self.ind(a)?, self.ind(b)?);
                for x in 0..n {
                    for y in 0..n {
                        self.clause(&[!a[x], !b[y], r[x][y]]);
                    }
                }
            }
        }
        if self.clauses > CLAUSE_CAP {
            return Err(SroelError::BoundOverflow(format!("{} clauses", self.clauses)));
        }
        Ok(())
    }

    /// A literal equivalent to the query holding.
    fn query(&mut self, q: &Query) -> Result<Lit> {
        let n = self.size;
        let member = |me: &mut Self, c: &Concept, a: &str| -> Result<Lit> {
            let (c, a) = (me.concept(c)?, me.ind(a)?);
            let both: Vec<Lit> = (0..n).map(|e| me.and(&[a[e], c[e]])).collect();
            Ok(me.or(&both))
        };
        let included = |me: &mut Self, c: &Concept, d: &Concept| -> Result<Lit> {
            let (c, d) = (me.concept(c)?, me.concept(d)?);
            let bad: Vec<Lit> = (0..n).map(|e| me.and(&[c[e], !d[e]])).collect();
            Ok(!me.or(&bad))
        };
        match q {
            Query::InstanceOf { c, a } => member(self, c, a),
            Query::TypicalInstanceOf { c, a } => member(self, &c.clone().typical(), a),
            Query::RoleHolds { r, a, b } => {
                let (r, a, b) = (self.role(r)?.clone(), self.ind(a)?, self.ind(b)?);
                let mut any = Vec::new();
                for x in 0..n {
                    for y in 0..n {
                        any.push(self.and(&[a[x], b[y], r[x][y]]));
                    }
                }
                Ok(self.or(&any))
            }
            Query::Subsumes { lhs, rhs } => included(self, lhs, rhs),
            Query::TypSubsumes { lhs, rhs } => included(self, &lhs.clone().typical(), rhs),
        }
    }

    fn solve(&mut self, assumptions: &[Lit]) -> Result<Option<RankedInterpretation>> {
        self.solver.assume(assumptions);
        let sat = self
            .solver
            .solve()
            .map_err(|e| SroelError::Invalid(format!("SAT solver failed: {e}")))?;
        if !sat {
            return Ok(None);
        }
        let truth: BTreeSet<Lit> = self.solver.model().expect("satisfiable").into_iter().collect();
        let on = |l: &Lit| truth.contains(l);
        let mut m = RankedInterpretation::empty_over(self.kb, self.size);
        for e in 0..self.size {
            m.rank[e] = self.ge[e].iter().filter(|l| on(l)).count() as u32;
        }
        for (c, v) in &self.names {
            m.concepts.insert(c.clone(), (0..self.size).filter(|&e| on(&v[e])).collect());
        }
        for (r, v) in &self.roles {
            let pairs = (0..self.size)
                .flat_map(|x| (0..self.size).map(move |y| (x, y)))
                .filter(|&(x, y)| on(&v[x][y]))
                .collect();
            m.roles.insert(r.clone(), pairs);
        }
        for (a, v) in &self.inds {
            let e = (0..self.size).find(|&e| on(&v[e])).expect("individual mapped");
            m.individuals.insert(a.clone(), e);
        }
        Ok(Some(m))
    }

    /// Some model of the knowledge base within the bounds.
    pub fn model(&mut self) -> Result<Option<RankedInterpretation>> {
        let m = self.solve(&[])?;
        if let Some(m) = &m {
            if let Some(ax) = m.violated(self.kb)? {
                return Err(SroelError::Invalid(format!("decoded model violates `{ax}`")));
            }
        }
        Ok(m)
    }

    /// A model of the knowledge base in which `q` fails. Roles under
    /// `Self` need not be simple here.
    pub fn counter_model(&mut self, q: &Query) -> Result<Option<RankedInterpretation>> {
        let h = self.query(q)?;
        let m = self.solve(&[!h])?;
        if let Some(m) = &m {
            if let Some(ax) = m.violated(self.kb)? {
                return Err(SroelError::Invalid(format!("decoded model violates `{ax}`")));
            }
            if m.holds(q)? {
                return Err(SroelError::Invalid(format!("decoded model satisfies `{q}`")));
            }
        }
        Ok(m)
    }
}

/// First counter-model to `q` over domains of `1..=max_domain` elements
/// and ranks `0..=max_rank`. `None` proves nothing about entailment.
pub fn refute(kb: &KnowledgeBase, q: &Query, max_domain: usize, max_rank: u32) -> Result<Option<RankedInterpretation>> {
    for size in 1..=max_domain {
        if let Some(m) = Refuter::new(kb, size, max_rank)?.counter_model(q)? {
            return Ok(Some(m));
        }
    }
    Ok(None)
}

/// Some model of `kb` within the bounds.
pub fn find_model(kb: &KnowledgeBase, max_domain: usize, max_rank: u32) -> Result<Option<RankedInterpretation>> {
    for size in 1..=max_domain {
        if let Some(m) = Refuter::new(kb, size, max_rank)?.model()? {
            return Ok(Some(m));
        }
    }
    Ok(None)
}
