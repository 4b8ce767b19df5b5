//! Semi-naive evaluation of stratified programs.

use std::collections::HashMap;
use std::ops::Range;

use crate::store::{Relation, Store, Val};
use crate::stratify::stratify;
use crate::{CmpOp, DatalogError, Literal, Program, Rule, Term};

#[derive(Clone, Debug, Default)]
pub struct EvalOptions {
    /// Maximum number of ground atoms any single predicate may reach.
    pub grounding_bound: Option<usize>,
}

/// Computes the perfect model of a stratified program.
pub fn evaluate(program: &Program) -> Result<Store, DatalogError> {
    evaluate_with(program, &EvalOptions::default())
}

pub fn evaluate_with(program: &Program, options: &EvalOptions) -> Result<Store, DatalogError> {
    program.validate()?;
    let strata = stratify(program)?;
    let mut store = Store::default();
    let mut pred_ids: HashMap<String, usize> = HashMap::new();
    let mut pred_names: Vec<String> = Vec::new();
    let arity_of = |store: &mut Store, pred: &str, arity: usize| {
        if !store.relations.contains_key(pred) {
            store.relations.insert(pred.to_owned(), Relation::new(arity));
        }
    };
    for f in &program.facts {
        arity_of(&mut store, &f.predicate, f.arity());
    }
    for r in &program.rules {
        arity_of(&mut store, &r.head.predicate, r.head.arity());
        for a in r.body.iter().filter_map(Literal::atom) {
            arity_of(&mut store, &a.predicate, a.arity());
        }
    }
    for p in store.relations.keys() {
        pred_ids.insert(p.clone(), pred_names.len());
        pred_names.push(p.clone());
    }
    // Relations are moved into a vector for the duration of evaluation so
    // that they can be addressed by index.
    let mut rels: Vec<Relation> = pred_names
        .iter()
        .map(|p| store.relations.remove(p).expect("relation registered"))
        .collect();
    for f in &program.facts {
        let tuple: Box<[Val]> = f
            .args
            .iter()
            .map(|t| match t {
                Term::Const(c) => Val::Sym(store.symbols.intern(c)),
                Term::Int(n) => Val::Int(*n),
                _ => unreachable!("validated ground fact"),
            })
            .collect();
        rels[pred_ids[&f.predicate]].insert(tuple);
    }
    check_bound(&rels, &pred_names, options)?;

    let compiled: Vec<CompiledRule> = program
        .rules
        .iter()
        .map(|r| CompiledRule::new(r, &pred_ids, &mut store))
        .collect();
    let stratum_of_pred: Vec<usize> = pred_names
        .iter()
        .map(|p| strata.of(p).unwrap_or(0))
        .collect();
    let ctx = Ctx {
        int_bound: program.int_bound,
    };
    for s in 0..strata.len() {
        let rules: Vec<&CompiledRule> = compiled
            .iter()
            .filter(|r| stratum_of_pred[r.head.pred] == s)
            .collect();
        if rules.is_empty() {
            continue;
        }
        // Positions of each body literal that refer to this stratum.
        let recursive: Vec<Vec<usize>> = rules
            .iter()
            .map(|r| {
                r.body
                    .iter()
                    .enumerate()
                    .filter_map(|(i, l)| match l {
                        CLit::Pos(a) if stratum_of_pred[a.pred] == s => Some(i),
                        _ => None,
                    })
                    .collect()
            })
            .collect();

        let full: Vec<Plan> = rules.iter().map(|r| r.plan(None)).collect();
        let deltas: Vec<Vec<Plan>> = rules
            .iter()
            .zip(&recursive)
            .map(|(r, rec)| rec.iter().map(|&d| r.plan(Some(d))).collect())
            .collect();
        for (r, p) in rules.iter().zip(&full).chain(
            rules
                .iter()
                .zip(&deltas)
                .flat_map(|(r, ps)| ps.iter().map(move |p| (r, p))),
        ) {
            r.register_indexes(p, &mut rels);
        }

        let mut before: Vec<usize> = rels.iter().map(Relation::len).collect();
        let mut derived: Vec<(usize, Box<[Val]>)> = Vec::new();
        for (r, plan) in rules.iter().zip(&full) {
            r.run(plan, &rels, None, &ctx, &mut derived);
        }
        let mut changed = insert_all(&mut rels, derived);
        check_bound(&rels, &pred_names, options)?;
        while changed {
            let now: Vec<usize> = rels.iter().map(Relation::len).collect();
            let delta: Vec<Range<usize>> = before.iter().zip(&now).map(|(b, n)| *b..*n).collect();
            before = now;
            let mut derived = Vec::new();
            for ((r, rec), plans) in rules.iter().zip(&recursive).zip(&deltas) {
                for (&d, plan) in rec.iter().zip(plans) {
                    let CLit::Pos(a) = &r.body[d] else {
                        unreachable!()
                    };
                    if delta[a.pred].is_empty() {
                        continue;
                    }
                    r.run(plan, &rels, Some((d, delta[a.pred].clone())), &ctx, &mut derived);
                }
            }
            changed = insert_all(&mut rels, derived);
            check_bound(&rels, &pred_names, options)?;
        }
    }
    for (name, rel) in pred_names.into_iter().zip(rels) {
        store.relations.insert(name, rel);
    }
    Ok(store)
}

fn insert_all(rels: &mut [Relation], derived: Vec<(usize, Box<[Val]>)>) -> bool {
    let mut changed = false;
    for (p, t) in derived {
        changed |= rels[p].insert(t);
    }
    changed
}

fn check_bound(rels: &[Relation], names: &[String], options: &EvalOptions) -> Result<(), DatalogError> {
    if let Some(bound) = options.grounding_bound {
        for (rel, name) in rels.iter().zip(names) {
            if rel.len() > bound {
                return Err(DatalogError::GroundingBound {
                    predicate: name.clone(),
                    count: rel.len(),
                    bound,
                });
            }
        }
    }
    Ok(())
}

struct Ctx {
    int_bound: u32,
}

#[derive(Clone, Copy, Debug)]
enum CTerm {
    Const(Val),
    Var(usize),
    Minus(usize, u32),
}

#[derive(Debug)]
struct CAtom {
    pred: usize,
    args: Vec<CTerm>,
}

#[derive(Debug)]
enum CLit {
    Pos(CAtom),
    Neg(CAtom),
    Cmp(CmpOp, CTerm, CTerm),
}

struct Plan {
    order: Vec<usize>,
    /// Variables first bound at each step of `order`.
    fresh: Vec<Vec<usize>>,
}

#[derive(Debug)]
struct CompiledRule {
    head: CAtom,
    body: Vec<CLit>,
    nvars: usize,
}

impl CTerm {
    fn vars(self) -> Option<usize> {
        match self {
            CTerm::Var(v) | CTerm::Minus(v, _) => Some(v),
            CTerm::Const(_) => None,
        }
    }

    /// Value under the current binding. `Err` means the term has no value
    /// in the integer sort (a subtraction below zero or on a symbol).
    fn eval(self, env: &[Option<Val>]) -> Result<Option<Val>, ()> {
        match self {
            CTerm::Const(v) => Ok(Some(v)),
            CTerm::Var(x) => Ok(env[x]),
            CTerm::Minus(x, k) => match env[x] {
                None => Ok(None),
                Some(Val::Int(n)) if n >= k => Ok(Some(Val::Int(n - k))),
                Some(_) => Err(()),
            },
        }
    }
}

fn compile_term(t: &Term, vars: &mut HashMap<String, usize>, store: &mut Store) -> CTerm {
    let mut slot = |v: &str| {
        let n = vars.len();
        *vars.entry(v.to_owned()).or_insert(n)
    };
    match t {
        Term::Const(c) => CTerm::Const(Val::Sym(store.symbols.intern(c))),
        Term::Int(n) => CTerm::Const(Val::Int(*n)),
        Term::Var(v) => CTerm::Var(slot(v)),
        Term::Minus(v, k) => CTerm::Minus(slot(v), *k),
    }
}

fn compile_atom(
    a: &crate::Atom,
    preds: &HashMap<String, usize>,
    vars: &mut HashMap<String, usize>,
    store: &mut Store,
) -> CAtom {
    CAtom {
        pred: preds[&a.predicate],
        args: a.args.iter().map(|t| compile_term(t, vars, store)).collect(),
    }
}

impl CompiledRule {
    fn new(rule: &Rule, preds: &HashMap<String, usize>, store: &mut Store) -> Self {
        let mut vars: HashMap<String, usize> = HashMap::new();
        let body: Vec<CLit> = rule
            .body
            .iter()
            .map(|l| match l {
                Literal::Pos(a) => CLit::Pos(compile_atom(a, preds, &mut vars, store)),
                Literal::Neg(a) => CLit::Neg(compile_atom(a, preds, &mut vars, store)),
                Literal::Cmp(op, l, r) => CLit::Cmp(
                    *op,
                    compile_term(l, &mut vars, store),
                    compile_term(r, &mut vars, store),
                ),
            })
            .collect();
        let head = compile_atom(&rule.head, preds, &mut vars, store);
        CompiledRule {
            head,
            body,
            nvars: vars.len(),
        }
    }

    /// Orders the body: the delta literal first, then repeatedly the positive
    /// atom with most bound arguments. Filters go in as soon as their
    /// variables are bound.
    fn plan(&self, delta: Option<usize>) -> Plan {
        let mut bound = vec![false; self.nvars];
        let mut done = vec![false; self.body.len()];
        let mut order = Vec::with_capacity(self.body.len());
        let bind = |i: usize, bound: &mut Vec<bool>| {
            if let CLit::Pos(a) = &self.body[i] {
                for v in a.args.iter().filter_map(|t| t.vars()) {
                    bound[v] = true;
                }
            }
        };
        let lit_vars = |l: &CLit| -> Vec<usize> {
            match l {
                CLit::Pos(a) | CLit::Neg(a) => a.args.iter().filter_map(|t| t.vars()).collect(),
                CLit::Cmp(_, x, y) => x.vars().into_iter().chain(y.vars()).collect(),
            }
        };
        let flush_filters = |bound: &Vec<bool>, done: &mut Vec<bool>, order: &mut Vec<usize>| {
            for (i, l) in self.body.iter().enumerate() {
                if !done[i]
                    && !matches!(l, CLit::Pos(_))
                    && lit_vars(l).iter().all(|v| bound[*v])
                {
                    done[i] = true;
                    order.push(i);
                }
            }
        };
        flush_filters(&bound, &mut done, &mut order);
        if let Some(d) = delta {
            done[d] = true;
            order.push(d);
            bind(d, &mut bound);
            flush_filters(&bound, &mut done, &mut order);
        }
        loop {
            let next = self
                .body
                .iter()
                .enumerate()
                .filter(|(i, l)| !done[*i] && matches!(l, CLit::Pos(_)))
                .max_by_key(|(i, l)| {
                    let CLit::Pos(a) = l else { unreachable!() };
                    let score = a
                        .args
                        .iter()
                        .filter(|t| t.vars().is_none_or(|v| bound[v]))
                        .count();
                    (score, std::cmp::Reverse(*i))
                })
                .map(|(i, _)| i);
            let Some(i) = next else { break };
            done[i] = true;
            order.push(i);
            bind(i, &mut bound);
            flush_filters(&bound, &mut done, &mut order);
        }
        let mut bound = vec![false; self.nvars];
        let mut fresh = Vec::with_capacity(order.len());
        for &i in &order {
            let mut f = Vec::new();
            if let CLit::Pos(a) = &self.body[i] {
                for v in a.args.iter().filter_map(|t| t.vars()) {
                    if !bound[v] {
                        bound[v] = true;
                        f.push(v);
                    }
                }
            }
            fresh.push(f);
        }
        Plan { order, fresh }
    }

    /// Registers an index for every combination of bound columns the plan
    /// looks up.
    fn register_indexes(&self, plan: &Plan, rels: &mut [Relation]) {
        let mut bound = vec![false; self.nvars];
        for (&i, fresh) in plan.order.iter().zip(&plan.fresh) {
            if let CLit::Pos(a) = &self.body[i] {
                let mut mask = 0u64;
                for (col, t) in a.args.iter().enumerate().take(64) {
                    if t.vars().is_none_or(|v| bound[v]) {
                        mask |= 1 << col;
                    }
                }
                rels[a.pred].add_index(mask);
            }
            for &v in fresh {
                bound[v] = true;
            }
        }
    }

    fn run(
        &self,
        plan: &Plan,
        rels: &[Relation],
        delta: Option<(usize, Range<usize>)>,
        ctx: &Ctx,
        out: &mut Vec<(usize, Box<[Val]>)>,
    ) {
        let mut env = vec![None; self.nvars];
        self.step(plan, 0, rels, &delta, ctx, &mut env, out);
    }

    #[allow(clippy::too_many_arguments)]
    fn step(
        &self,
        plan: &Plan,
        k: usize,
        rels: &[Relation],
        delta: &Option<(usize, Range<usize>)>,
        ctx: &Ctx,
        env: &mut Vec<Option<Val>>,
        out: &mut Vec<(usize, Box<[Val]>)>,
    ) {
        if k == plan.order.len() {
            let mut tuple = Vec::with_capacity(self.head.args.len());
            for t in &self.head.args {
                match t.eval(env) {
                    Ok(Some(v)) => tuple.push(v),
                    _ => return,
                }
            }
            if !rels[self.head.pred].contains(&tuple) {
                out.push((self.head.pred, tuple.into_boxed_slice()));
            }
            return;
        }
        let i = plan.order[k];
        match &self.body[i] {
            CLit::Cmp(op, l, r) => {
                let (Ok(Some(l)), Ok(Some(r))) = (l.eval(env), r.eval(env)) else {
                    return;
                };
                let holds = match (op, l, r) {
                    (CmpOp::Eq, l, r) => l == r,
                    (op, Val::Int(a), Val::Int(b)) => op.holds(a, b),
                    _ => false,
                };
                if holds {
                    self.step(plan, k + 1, rels, delta, ctx, env, out);
                }
            }
            CLit::Neg(a) => {
                let mut tuple = Vec::with_capacity(a.args.len());
                for t in &a.args {
                    match t.eval(env) {
                        Ok(Some(v)) => tuple.push(v),
                        // an undefined term cannot name a stored tuple
                        Ok(None) | Err(()) => {
                            self.step(plan, k + 1, rels, delta, ctx, env, out);
                            return;
                        }
                    }
                }
                if !rels[a.pred].contains(&tuple) {
                    self.step(plan, k + 1, rels, delta, ctx, env, out);
                }
            }
            CLit::Pos(a) => {
                let rel = &rels[a.pred];
                let mut small = [None; 8];
                let mut large;
                let bound: &mut [Option<Val>] = if a.args.len() <= small.len() {
                    &mut small[..a.args.len()]
                } else {
                    large = vec![None; a.args.len()];
                    &mut large[..]
                };
                for (slot, t) in bound.iter_mut().zip(&a.args) {
                    match t.eval(env) {
                        Ok(v) => *slot = v,
                        Err(()) => return,
                    }
                }
                let fresh = &plan.fresh[k];
                let range = match delta {
                    Some((d, r)) if *d == i => r.clone(),
                    _ => 0..rel.len(),
                };
                let mut visit = |pos: usize, env: &mut Vec<Option<Val>>| {
                    let tuple = &rel.tuples[pos];
                    let mut ok = true;
                    for (t, v) in a.args.iter().zip(tuple.iter()) {
                        match *t {
                            CTerm::Const(c) => ok = c == *v,
                            CTerm::Var(x) => match env[x] {
                                Some(b) => ok = b == *v,
                                None => env[x] = Some(*v),
                            },
                            CTerm::Minus(x, kk) => match (env[x], *v) {
                                (Some(Val::Int(b)), Val::Int(n)) => ok = b >= kk && b - kk == n,
                                (None, Val::Int(n)) => match n.checked_add(kk) {
                                    Some(m) if m <= ctx.int_bound => env[x] = Some(Val::Int(m)),
                                    _ => ok = false,
                                },
                                _ => ok = false,
                            },
                        }
                        if !ok {
                            break;
                        }
                    }
                    if ok {
                        self.step(plan, k + 1, rels, delta, ctx, env, out);
                    }
                    for &x in fresh {
                        env[x] = None;
                    }
                };
                match rel.candidates(bound) {
                    Some(bucket) => {
                        let lo = bucket.partition_point(|p| (*p as usize) < range.start);
                        let hi = bucket.partition_point(|p| (*p as usize) < range.end);
                        for &pos in &bucket[lo..hi] {
                            visit(pos as usize, env);
                        }
                    }
                    None => {
                        for pos in range {
                            visit(pos, env);
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse_program;

    fn run(src: &str) -> Store {
        evaluate(&parse_program(src).unwrap()).unwrap()
    }

    #[test]
    fn transitive_closure() {
        let s = run(concat!(
            "e(\"a\", \"b\").\ne(\"b\", \"c\").\ne(\"c\", \"d\").\n",
            "t(X, Y) :- e(X, Y).\nt(X, Z) :- t(X, Y), e(Y, Z).\n"
        ));
        assert_eq!(s.count("t"), 6);
        assert!(s.holds("t", &["a", "d"]));
        assert!(!s.holds("t", &["d", "a"]));
    }

    #[test]
    fn stratified_negation() {
        let s = run(concat!(
            "n(\"a\").\nn(\"b\").\nn(\"c\").\ne(\"a\", \"b\").\n",
            "r(X) :- e(\"a\", X).\nr(Y) :- r(X), e(X, Y).\n",
            "unreached(X) :- n(X), not r(X).\n"
        ));
        assert!(s.holds("unreached", &["a"]));
        assert!(s.holds("unreached", &["c"]));
        assert!(!s.holds("unreached", &["b"]));
    }

    #[test]
    fn integer_predecessor_binds_upwards() {
        let s = run(concat!(
            "#int_bound 3.\nrank(0).\n",
            "rank(I) :- rank(I - 1).\n",
            "pos(I) :- rank(I), I > 0.\n"
        ));
        assert_eq!(s.count("rank"), 4);
        assert_eq!(s.count("pos"), 3);
    }

    #[test]
    fn repeated_variable_in_atom() {
        let s = run("e(\"a\", \"a\").\ne(\"a\", \"b\").\nloop(X) :- e(X, X).");
        assert_eq!(s.facts("loop"), vec![vec![crate::Value::sym("a")]]);
    }

    #[test]
    fn grounding_bound_is_reported() {
        let p = parse_program(concat!(
            "n(\"a\").\nn(\"b\").\nn(\"c\").\n",
            "pair(X, Y) :- n(X), n(Y).\n"
        ))
        .unwrap();
        let err = evaluate_with(
            &p,
            &EvalOptions {
                grounding_bound: Some(5),
            },
        )
        .unwrap_err();
        assert!(matches!(err, DatalogError::GroundingBound { ref predicate, count: 9, bound: 5 } if predicate == "pair"));
    }

    #[test]
    fn query_binds_variables() {
        let s = run("e(\"a\", \"b\").\ne(\"a\", \"c\").\ne(\"b\", \"c\").");
        let pattern = crate::Atom::new("e", vec![Term::constant("a"), Term::var("Y")]);
        let ys: Vec<_> = s.query(&pattern).into_iter().map(|m| m["Y"].clone()).collect();
        assert_eq!(ys, vec![crate::Value::sym("b"), crate::Value::sym("c")]);
    }
}
