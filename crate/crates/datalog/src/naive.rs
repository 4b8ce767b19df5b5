//! Reference evaluator used to cross-check [`crate::evaluate`].
//!
//! It recomputes strata by relaxation and saturates each one by applying
//! every rule to the whole database until nothing changes. No indexing, no
//! deltas, no planning: one nested loop per body atom, filters at the end.

use std::collections::{BTreeMap, BTreeSet};

use crate::{CmpOp, DatalogError, Literal, Program, Term, Value};

pub type Database = BTreeSet<(String, Vec<Value>)>;

fn strata(program: &Program) -> Result<BTreeMap<String, usize>, DatalogError> {
    let preds = program.predicates();
    let mut level: BTreeMap<String, usize> = preds.iter().map(|p| ((*p).to_owned(), 0)).collect();
    let limit = preds.len();
    loop {
        let mut changed = false;
        for r in &program.rules {
            for l in &r.body {
                let (p, strict) = match l {
                    Literal::Pos(a) => (&a.predicate, 0),
                    Literal::Neg(a) => (&a.predicate, 1),
                    Literal::Cmp(..) => continue,
                };
                let need = level[p] + strict;
                if level[&r.head.predicate] < need {
                    if need > limit {
                        return Err(DatalogError::NotStratifiable {
                            cycle: vec![r.head.predicate.clone(), p.clone()],
                        });
                    }
                    level.insert(r.head.predicate.clone(), need);
                    changed = true;
                }
            }
        }
        if !changed {
            return Ok(level);
        }
    }
}

type Env = BTreeMap<String, Value>;

fn term_value(t: &Term, env: &Env) -> Option<Value> {
    match t {
        Term::Const(c) => Some(Value::Sym(c.clone())),
        Term::Int(n) => Some(Value::Int(*n)),
        Term::Var(v) => env.get(v).cloned(),
        Term::Minus(v, k) => match env.get(v) {
            Some(Value::Int(n)) if n >= k => Some(Value::Int(n - k)),
            _ => None,
        },
    }
}

fn matches(args: &[Term], tuple: &[Value], env: &Env, bound: u32) -> Option<Env> {
    let mut env = env.clone();
    for (t, v) in args.iter().zip(tuple) {
        match t {
            Term::Var(x) => match env.get(x) {
                Some(b) if b != v => return None,
                Some(_) => {}
                None => {
                    env.insert(x.clone(), v.clone());
                }
            },
            Term::Minus(x, k) => {
                let Value::Int(n) = v else { return None };
                let want = n.checked_add(*k).filter(|m| *m <= bound)?;
                match env.get(x) {
                    Some(b) if *b != Value::Int(want) => return None,
                    Some(_) => {}
                    None => {
                        env.insert(x.clone(), Value::Int(want));
                    }
                }
            }
            _ => {
                if term_value(t, &env).as_ref() != Some(v) {
                    return None;
                }
            }
        }
    }
    Some(env)
}

/// Evaluates the program and returns every derived atom.
pub fn evaluate_naive(program: &Program) -> Result<Database, DatalogError> {
    program.validate()?;
    let level = strata(program)?;
    let mut db: Database = program
        .facts
        .iter()
        .map(|f| (f.predicate.clone(), f.ground_values().expect("ground fact")))
        .collect();
    let top = level.values().copied().max().unwrap_or(0);
    for s in 0..=top {
        loop {
            let mut new = Vec::new();
            for r in program.rules.iter().filter(|r| level[&r.head.predicate] == s) {
                let mut envs = vec![Env::new()];
                for l in &r.body {
                    if let Literal::Pos(a) = l {
                        let mut next = Vec::new();
                        for env in &envs {
                            for (p, tuple) in &db {
                                if *p == a.predicate && tuple.len() == a.args.len() {
                                    if let Some(e) = matches(&a.args, tuple, env, program.int_bound) {
                                        next.push(e);
                                    }
                                }
                            }
                        }
                        envs = next;
                    }
                }
                for env in envs {
                    let ok = r.body.iter().all(|l| match l {
                        Literal::Pos(_) => true,
                        Literal::Neg(a) => {
                            let vals: Option<Vec<Value>> =
                                a.args.iter().map(|t| term_value(t, &env)).collect();
                            vals.is_none_or(|v| !db.contains(&(a.predicate.clone(), v)))
                        }
                        Literal::Cmp(op, x, y) => match (term_value(x, &env), term_value(y, &env)) {
                            (Some(x), Some(y)) => match (op, x, y) {
                                (CmpOp::Eq, x, y) => x == y,
                                (op, Value::Int(a), Value::Int(b)) => op.holds(a, b),
                                _ => false,
                            },
                            _ => false,
                        },
                    });
                    if !ok {
                        continue;
                    }
                    let head: Option<Vec<Value>> =
                        r.head.args.iter().map(|t| term_value(t, &env)).collect();
                    if let Some(h) = head {
                        let atom = (r.head.predicate.clone(), h);
                        if !db.contains(&atom) {
                            new.push(atom);
                        }
                    }
                }
            }
            if new.is_empty() {
                break;
            }
            db.extend(new);
        }
    }
    Ok(db)
}
