//! A small bottom-up Datalog engine.
//!
//! Programs are sets of ground facts plus rules whose bodies may contain
//! negated atoms and comparisons over a bounded sort of natural numbers.
//! Evaluation is stratified: predicates are partitioned so that no predicate
//! depends negatively on itself, each stratum is saturated with semi-naive
//! iteration, and negation is read against the completed lower strata. The
//! result is the unique perfect model of the program.
//!
//! The textual format (see [`text`]) is one fact or rule per line, with
//! `:-` between head and body and `not ` in front of negated atoms.

use std::collections::BTreeSet;
use std::fmt;

pub mod eval;
pub mod naive;
pub mod random;
pub mod store;
pub mod stratify;
pub mod text;

pub use eval::{evaluate, evaluate_with, EvalOptions};
pub use store::{Store, Substitution};
pub use stratify::{stratify, Stratification};
pub use text::{parse_program, ParseError};

/// A ground value: a symbolic constant or a natural number of the bounded sort.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Sym(String),
    Int(u32),
}

impl Value {
    pub fn sym(s: impl Into<String>) -> Self {
        Value::Sym(s.into())
    }

    pub fn as_sym(&self) -> Option<&str> {
        match self {
            Value::Sym(s) => Some(s),
            Value::Int(_) => None,
        }
    }

    pub fn as_int(&self) -> Option<u32> {
        match self {
            Value::Int(n) => Some(*n),
            Value::Sym(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Const(String),
    Int(u32),
    Var(String),
    /// `var - k` over the integer sort. Binds `var` to `value + k` when the
    /// variable is still free at the point of matching.
    Minus(String, u32),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn constant(name: impl Into<String>) -> Self {
        Term::Const(name.into())
    }

    pub fn variable(&self) -> Option<&str> {
        match self {
            Term::Var(v) | Term::Minus(v, _) => Some(v),
            _ => None,
        }
    }

    pub fn is_ground(&self) -> bool {
        matches!(self, Term::Const(_) | Term::Int(_))
    }

    pub fn to_value(&self) -> Option<Value> {
        match self {
            Term::Const(c) => Some(Value::Sym(c.clone())),
            Term::Int(n) => Some(Value::Int(*n)),
            _ => None,
        }
    }
}

impl From<&Value> for Term {
    fn from(v: &Value) -> Self {
        match v {
            Value::Sym(s) => Term::Const(s.clone()),
            Value::Int(n) => Term::Int(*n),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Atom {
            predicate: predicate.into(),
            args,
        }
    }

    /// A ground atom over symbolic constants.
    pub fn fact<S: AsRef<str>>(predicate: impl Into<String>, args: &[S]) -> Self {
        Atom::new(
            predicate,
            args.iter().map(|a| Term::Const(a.as_ref().to_owned())).collect(),
        )
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(Term::variable)
    }

    pub fn ground_values(&self) -> Option<Vec<Value>> {
        self.args.iter().map(Term::to_value).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Lt,
    Gt,
    Eq,
}

impl CmpOp {
    pub fn holds(self, lhs: u32, rhs: u32) -> bool {
        match self {
            CmpOp::Lt => lhs < rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Eq => lhs == rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
            CmpOp::Eq => "=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Literal {
    Pos(Atom),
    Neg(Atom),
    Cmp(CmpOp, Term, Term),
}

impl Literal {
    pub fn atom(&self) -> Option<&Atom> {
        match self {
            Literal::Pos(a) | Literal::Neg(a) => Some(a),
            Literal::Cmp(..) => None,
        }
    }

    pub fn variables(&self) -> Vec<&str> {
        match self {
            Literal::Pos(a) | Literal::Neg(a) => a.variables().collect(),
            Literal::Cmp(_, l, r) => l.variable().into_iter().chain(r.variable()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub head: Atom,
    pub body: Vec<Literal>,
    /// Free-form name carried through the textual format as a trailing comment.
    pub label: Option<String>,
}

impl Rule {
    pub fn new(head: Atom, body: Vec<Literal>) -> Self {
        Rule {
            head,
            body,
            label: None,
        }
    }

    pub fn labelled(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// Variables occurring in positive body atoms.
    pub fn bound_variables(&self) -> BTreeSet<&str> {
        self.body
            .iter()
            .filter_map(|l| match l {
                Literal::Pos(a) => Some(a.variables()),
                _ => None,
            })
            .flatten()
            .collect()
    }

    /// Checks that every head variable and every variable of a negated or
    /// comparison literal also occurs in a positive body atom.
    pub fn check_safety(&self) -> Result<(), DatalogError> {
        let bound = self.bound_variables();
        let unsafe_var = self
            .head
            .variables()
            .chain(
                self.body
                    .iter()
                    .filter(|l| !matches!(l, Literal::Pos(_)))
                    .flat_map(|l| l.variables()),
            )
            .find(|v| !bound.contains(v));
        match unsafe_var {
            Some(v) => Err(DatalogError::Unsafe {
                rule: self.to_string(),
                variable: v.to_owned(),
            }),
            None => Ok(()),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub facts: Vec<Atom>,
    pub rules: Vec<Rule>,
    /// Largest natural number of the integer sort.
    pub int_bound: u32,
}

impl Program {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a ground fact, widening the integer sort to cover its literals.
    pub fn add_fact(&mut self, fact: Atom) {
        let max = fact
            .args
            .iter()
            .filter_map(|t| match t {
                Term::Int(n) => Some(*n),
                _ => None,
            })
            .max();
        if let Some(n) = max {
            self.int_bound = self.int_bound.max(n);
        }
        self.facts.push(fact);
    }

    pub fn add_rule(&mut self, rule: Rule) {
        self.rules.push(rule);
    }

    pub fn extend(&mut self, other: Program) {
        for f in other.facts {
            self.add_fact(f);
        }
        self.rules.extend(other.rules);
        self.int_bound = self.int_bound.max(other.int_bound);
    }

    /// Largest integer literal mentioned anywhere in the program.
    pub fn max_int_literal(&self) -> u32 {
        let term_ints = |a: &Atom| {
            a.args
                .iter()
                .filter_map(|t| match t {
                    Term::Int(n) => Some(*n),
                    _ => None,
                })
                .collect::<Vec<_>>()
        };
        let mut max = 0;
        for f in &self.facts {
            max = term_ints(f).into_iter().fold(max, u32::max);
        }
        for r in &self.rules {
            max = term_ints(&r.head).into_iter().fold(max, u32::max);
            for l in &r.body {
                let ints: Vec<u32> = match l {
                    Literal::Pos(a) | Literal::Neg(a) => term_ints(a),
                    Literal::Cmp(_, x, y) => [x, y]
                        .iter()
                        .filter_map(|t| match t {
                            Term::Int(n) => Some(*n),
                            _ => None,
                        })
                        .collect(),
                };
                max = ints.into_iter().fold(max, u32::max);
            }
        }
        max
    }

    /// All predicate names occurring in the program.
    pub fn predicates(&self) -> BTreeSet<&str> {
        let mut preds: BTreeSet<&str> = self.facts.iter().map(|f| f.predicate.as_str()).collect();
        for r in &self.rules {
            preds.insert(&r.head.predicate);
            preds.extend(r.body.iter().filter_map(Literal::atom).map(|a| a.predicate.as_str()));
        }
        preds
    }

    /// Checks ground facts, rule safety and consistent predicate arities.
    pub fn validate(&self) -> Result<(), DatalogError> {
        let mut arities: std::collections::HashMap<&str, usize> = Default::default();
        let mut atoms: Vec<&Atom> = self.facts.iter().collect();
        for r in &self.rules {
            atoms.push(&r.head);
            atoms.extend(r.body.iter().filter_map(Literal::atom));
        }
        for a in atoms {
            match arities.get(a.predicate.as_str()) {
                Some(&n) if n != a.arity() => {
                    return Err(DatalogError::ArityMismatch {
                        predicate: a.predicate.clone(),
                        expected: n,
                        found: a.arity(),
                    })
                }
                Some(_) => {}
                None => {
                    arities.insert(&a.predicate, a.arity());
                }
            }
        }
        for f in &self.facts {
            if !f.is_ground() {
                return Err(DatalogError::NonGroundFact(f.to_string()));
            }
            for t in &f.args {
                if let Term::Int(n) = t {
                    if *n > self.int_bound {
                        return Err(DatalogError::IntOutOfBound {
                            value: *n,
                            bound: self.int_bound,
                        });
                    }
                }
            }
        }
        for r in &self.rules {
            r.check_safety()?;
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum DatalogError {
    #[error("program is not stratifiable: negative cycle through {}", cycle.join(" -> "))]
    NotStratifiable { cycle: Vec<String> },
    #[error("unsafe rule `{rule}`: variable {variable} does not occur in a positive body atom")]
    Unsafe { rule: String, variable: String },
    #[error("predicate {predicate} used with arity {found}, expected {expected}")]
    ArityMismatch {
        predicate: String,
        expected: usize,
        found: usize,
    },
    #[error("fact `{0}` is not ground")]
    NonGroundFact(String),
    #[error("integer {value} exceeds the bound {bound} of the integer sort")]
    IntOutOfBound { value: u32, bound: u32 },
    #[error("predicate {predicate} has {count} ground atoms, more than the grounding bound {bound}")]
    GroundingBound {
        predicate: String,
        count: usize,
        bound: usize,
    },
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Sym(s) => text::write_quoted(f, s),
            Value::Int(n) => write!(f, "{n}"),
        }
    }
}
