use std::collections::{BTreeMap, HashMap};

use crate::{Atom, Term, Value};

/// Interned value. Symbols index into the store's symbol table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) enum Val {
    Sym(u32),
    Int(u32),
}

pub type Substitution = BTreeMap<String, Value>;

#[derive(Default, Debug, Clone)]
pub(crate) struct Interner {
    names: Vec<String>,
    ids: HashMap<String, u32>,
}

impl Interner {
    pub(crate) fn intern(&mut self, s: &str) -> u32 {
        if let Some(&id) = self.ids.get(s) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(s.to_owned());
        self.ids.insert(s.to_owned(), id);
        id
    }

    pub(crate) fn lookup(&self, s: &str) -> Option<u32> {
        self.ids.get(s).copied()
    }

    pub(crate) fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }
}

/// Tuples of one predicate, indexed on every column and on any
/// combination of columns registered with [`Relation::add_index`].
#[derive(Debug, Clone)]
pub(crate) struct Relation {
    pub(crate) arity: usize,
    pub(crate) tuples: Vec<Box<[Val]>>,
    members: HashMap<Box<[Val]>, u32>,
    index: Vec<HashMap<Val, Vec<u32>>>,
    composite: HashMap<u64, HashMap<Box<[Val]>, Vec<u32>>>,
}

fn project(t: &[Val], mask: u64) -> Box<[Val]> {
    t.iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, v)| *v)
        .collect()
}

impl Relation {
    pub(crate) fn new(arity: usize) -> Self {
        Relation {
            arity,
            tuples: Vec::new(),
            members: HashMap::new(),
            index: vec![HashMap::new(); arity],
            composite: HashMap::new(),
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.tuples.len()
    }

    pub(crate) fn contains(&self, t: &[Val]) -> bool {
        self.members.contains_key(t)
    }

    fn full_mask(&self) -> u64 {
        if self.arity >= 64 {
            u64::MAX
        } else {
            (1u64 << self.arity) - 1
        }
    }

    /// Maintains an index on the columns set in `mask` from now on.
    pub(crate) fn add_index(&mut self, mask: u64) {
        if mask.count_ones() < 2 || mask == self.full_mask() || self.arity > 64 {
            return;
        }
        if self.composite.contains_key(&mask) {
            return;
        }
        let mut map: HashMap<Box<[Val]>, Vec<u32>> = HashMap::new();
        for (pos, t) in self.tuples.iter().enumerate() {
            map.entry(project(t, mask)).or_default().push(pos as u32);
        }
        self.composite.insert(mask, map);
    }

    /// Returns false when the tuple was already present.
    pub(crate) fn insert(&mut self, t: Box<[Val]>) -> bool {
        if self.members.contains_key(&t) {
            return false;
        }
        let pos = self.tuples.len() as u32;
        for (col, v) in t.iter().enumerate() {
            self.index[col].entry(*v).or_default().push(pos);
        }
        for (mask, map) in &mut self.composite {
            map.entry(project(&t, *mask)).or_default().push(pos);
        }
        self.members.insert(t.clone(), pos);
        self.tuples.push(t);
        true
    }

    /// Positions of candidate tuples agreeing with the bound columns, in
    /// ascending order. `None` means a full scan.
    pub(crate) fn candidates(&self, bound: &[Option<Val>]) -> Option<&[u32]> {
        let mut mask = 0u64;
        for (col, v) in bound.iter().enumerate() {
            if v.is_some() && col < 64 {
                mask |= 1 << col;
            }
        }
        if mask == 0 {
            return None;
        }
        if mask == self.full_mask() {
            let key: Box<[Val]> = bound.iter().map(|v| v.unwrap()).collect();
            return Some(self.members.get(&key).map_or(&[][..], std::slice::from_ref));
        }
        if let Some(map) = self.composite.get(&mask) {
            let key: Box<[Val]> = bound.iter().flatten().copied().collect();
            return Some(map.get(&key).map_or(&[][..], Vec::as_slice));
        }
        let mut best: Option<&[u32]> = None;
        for (col, v) in bound.iter().enumerate() {
            if let Some(v) = v {
                let bucket = self.index[col].get(v).map_or(&[][..], Vec::as_slice);
                if best.is_none_or(|b| bucket.len() < b.len()) {
                    best = Some(bucket);
                }
            }
        }
        best
    }
}

/// The set of ground atoms computed by evaluation.
#[derive(Debug, Clone, Default)]
pub struct Store {
    pub(crate) symbols: Interner,
    pub(crate) relations: BTreeMap<String, Relation>,
}

impl Store {
    pub(crate) fn value(&self, v: Val) -> Value {
        match v {
            Val::Sym(id) => Value::Sym(self.symbols.name(id).to_owned()),
            Val::Int(n) => Value::Int(n),
        }
    }

    fn lookup_term(&self, t: &Term) -> Option<Val> {
        match t {
            Term::Const(c) => self.symbols.lookup(c).map(Val::Sym),
            Term::Int(n) => Some(Val::Int(*n)),
            _ => None,
        }
    }

    /// Whether the ground atom holds. Non-ground atoms never hold.
    pub fn contains(&self, atom: &Atom) -> bool {
        let Some(rel) = self.relations.get(&atom.predicate) else {
            return false;
        };
        if rel.arity != atom.arity() {
            return false;
        }
        let tuple: Option<Vec<Val>> = atom.args.iter().map(|t| self.lookup_term(t)).collect();
        tuple.is_some_and(|t| rel.contains(&t))
    }

    /// Convenience for `contains` over symbolic arguments.
    pub fn holds<S: AsRef<str>>(&self, predicate: &str, args: &[S]) -> bool {
        self.contains(&Atom::fact(predicate, args))
    }

    /// All tuples of a predicate, in insertion order.
    pub fn facts(&self, predicate: &str) -> Vec<Vec<Value>> {
        self.relations.get(predicate).map_or_else(Vec::new, |rel| {
            rel.tuples
                .iter()
                .map(|t| t.iter().map(|v| self.value(*v)).collect())
                .collect()
        })
    }

    /// Matches a pattern atom against the store. Each answer binds the
    /// pattern's variables; `Minus` terms are not supported in patterns.
    pub fn query(&self, pattern: &Atom) -> Vec<Substitution> {
        let Some(rel) = self.relations.get(&pattern.predicate) else {
            return Vec::new();
        };
        if rel.arity != pattern.arity() {
            return Vec::new();
        }
        let mut bound = Vec::with_capacity(rel.arity);
        for t in &pattern.args {
            match t {
                Term::Var(_) | Term::Minus(..) => bound.push(None),
                _ => match self.lookup_term(t) {
                    Some(v) => bound.push(Some(v)),
                    None => return Vec::new(),
                },
            }
        }
        let positions: Vec<u32> = match rel.candidates(&bound) {
            Some(c) => c.to_vec(),
            None => (0..rel.len() as u32).collect(),
        };
        let mut out = Vec::new();
        'tuples: for pos in positions {
            let tuple = &rel.tuples[pos as usize];
            let mut sub: BTreeMap<String, Val> = BTreeMap::new();
            for (t, v) in pattern.args.iter().zip(tuple.iter()) {
                match t {
                    Term::Var(x) => {
                        if let Some(prev) = sub.insert(x.clone(), *v) {
                            if prev != *v {
                                continue 'tuples;
                            }
                        }
                    }
                    Term::Minus(..) => continue 'tuples,
                    _ => {
                        if self.lookup_term(t) != Some(*v) {
                            continue 'tuples;
                        }
                    }
                }
            }
            out.push(sub.into_iter().map(|(k, v)| (k, self.value(v))).collect());
        }
        out
    }

    /// Number of tuples of one predicate.
    pub fn count(&self, predicate: &str) -> usize {
        self.relations.get(predicate).map_or(0, Relation::len)
    }

    /// Total number of ground atoms.
    pub fn len(&self) -> usize {
        self.relations.values().map(Relation::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn predicates(&self) -> impl Iterator<Item = &str> {
        self.relations.keys().map(String::as_str)
    }

    /// Every atom as a ground [`Atom`], sorted.
    pub fn atoms(&self) -> Vec<Atom> {
        let mut out: Vec<Atom> = self
            .relations
            .iter()
            .flat_map(|(p, rel)| {
                rel.tuples.iter().map(move |t| {
                    Atom::new(
                        p.clone(),
                        t.iter().map(|v| Term::from(&self.value(*v))).collect(),
                    )
                })
            })
            .collect();
        out.sort();
        out
    }
}
