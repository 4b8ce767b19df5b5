//! The fixed rule sets, kept in the Datalog text format.

use sroel_datalog::{parse_program, Atom, Literal, Rule, Term};

/// Inference rules of the classical calculus.
pub const IR: &str = r#"inst(x, x) :- nom(x).   % (1)
self(x, v) :- nom(x), triple(x, v, x).   % (2)
inst(x, z) :- top(z), inst(x, z').   % (3)
inst(x, y) :- bot(z), inst(u, z), inst(x, z'), cls(y).   % (4)
inst(x, z) :- subClass(y, z), inst(x, y).   % (5)
inst(x, z) :- subConj(y1, y2, z), inst(x, y1), inst(x, y2).   % (6)
inst(x, z) :- subEx(v, y, z), triple(x, v, x'), inst(x', y).   % (7)
inst(x, z) :- subEx(v, y, z), self(x, v), inst(x, y).   % (8)
triple(x, v, x') :- supEx(y, v, z, x'), inst(x, y).   % (9)
inst(x', z) :- supEx(y, v, z, x'), inst(x, y).   % (10)
inst(x, z) :- subSelf(v, z), self(x, v).   % (11)
self(x, v) :- supSelf(y, v), inst(x, y).   % (12)
triple(x, w, x') :- subRole(v, w), triple(x, v, x').   % (13)
self(x, w) :- subRole(v, w), self(x, v).   % (14)
triple(x, w, x'') :- subRChain(u, v, w), triple(x, u, x'), triple(x', v, x'').   % (15)
triple(x, w, x') :- subRChain(u, v, w), self(x, u), triple(x, v, x').   % (16)
triple(x, w, x') :- subRChain(u, v, w), triple(x, u, x'), self(x', v).   % (17)
triple(x, w, x) :- subRChain(u, v, w), self(x, u), self(x, v).   % (18)
triple(x, w, x') :- subRConj(v1, v2, w), triple(x, v1, x'), triple(x, v2, x').   % (19)
self(x, w) :- subRConj(v1, v2, w), self(x, v1), self(x, v2).   % (20)
triple(x, w, x') :- subProd(y1, y2, w), inst(x, y1), inst(x', y2).   % (21)
self(x, w) :- subProd(y1, y2, w), inst(x, y1), inst(x, y2).   % (22)
inst(x, z1) :- supProd(v, z1, z2), triple(x, v, x').   % (23)
inst(x, z1) :- supProd(v, z1, z2), self(x, v).   % (24)
inst(x', z2) :- supProd(v, z1, z2), triple(x, v, x').   % (25)
inst(x, z2) :- supProd(v, z1, z2), self(x, v).   % (26)
inst(y, z) :- inst(x, y), nom(y), inst(x, z).   % (27)
inst(x, z) :- inst(x, y), nom(y), inst(y, z).   % (28)
triple(z, u, y) :- inst(x, y), nom(y), triple(z, u, x).   % (29)
"#;

/// Typicality and rank rules.
pub const RT: &str = r#"typ(x, z) :- supTyp(y, z), inst(x, y).   % SupTyp
inst(x, z) :- subTyp(y, z), typ(x, y).   % SubTyp
inst(x, y) :- typ(x, y).   % Refl
typ(Aux, C) :- inst(x, C), auxrc(Aux, C).   % A0
leqRank(x, y) :- typ(x, B), inst(y, B).   % A1
sameRank(x, y) :- typ(x, A), typ(y, A).   % A2
typ(x, B) :- sameRank(x, y), inst(x, B), typ(y, B).   % A3
sameRank(x, z) :- sameRank(x, y), sameRank(y, z).   % B1
sameRank(x, y) :- sameRank(y, x).   % B2
leqRank(x, y) :- sameRank(y, x).   % B3
leqRank(x, z) :- leqRank(x, y), leqRank(y, z).   % B4
sameRank(x, y) :- leqRank(x, y), leqRank(y, x).   % B5
sameRank(x, y) :- nom(y), inst(x, y).   % B6
"#;

/// Exceptionality, ranks and closure membership. The staged inclusions
/// `subTyp(C, D, I)` are stored as `subTyp_i` since the engine fixes one
/// arity per predicate.
pub const RC: &str = r#"t_cls(C) :- auxrc(Aux, C).   % C0
exceptional(C, I) :- t_cls(C), possrank(I), cls(Z), inst_h(C, Z, C, I), bot(Z).   % C2
subTyp_i(C, D, 0) :- subTyp(C, D).   % C3
subTyp_i(C, D, I) :- possrank(I), subTyp_i(C, D, I - 1), exceptional(C, I - 1).   % C4
typ_h(C, "top", C, I) :- t_cls(C), possrank(I).   % C5
inst_h(C, C, C, I) :- t_cls(C), possrank(I).   % C6
rank(C, 0) :- t_cls(C), not exceptional(C, 0).   % C7
rank(C, I) :- t_cls(C), possrank(I), exceptional(C, I - 1), not exceptional(C, I).   % C8
newNonEx(I) :- t_cls(C), rank(C, I).   % C9
fixp(I) :- possrank(I), I > 0, not newNonEx(I).   % C10
fixp(I) :- possrank(I), fixp(I - 1).   % C11
inf_rank(C) :- fixp(I), exceptional(C, I).   % C12
"#;

pub const SUB_TYP_RC: &str =
    "inst_h(X, C, D, I) :- t_cls(D), possrank(I), subTyp_i(A, C, I), typ_h(X, A, D, I).   % subTypRC\n";

/// Closure membership, restricted to the requested pairs.
pub const INRC: &str = r#"inrc(C, D) :- def_subs(C, D), t_cls(C), cls(D), rank(C, I), inst_h(C, D, C, I).   % inrc1
inrc(C, D) :- def_subs(C, D), t_cls(C), cls(D), inf_rank(C).   % inrc2
"#;

/// Feeds computed ranks back into the base calculus.
pub const RC_CONSISTENCY: &str = r#"sameRank(A_C, A_D) :- auxrc(A_C, C), auxrc(A_D, D), rank(C, I), rank(D, I).   % SameRank_rc1
leqRank(A_C, A_D) :- auxrc(A_C, C), auxrc(A_D, D), rank(C, I), rank(D, J), I < J.   % LeqRank_rc2
"#;

/// Predicates that describe the interpretation, as opposed to the input.
pub const DERIVED: [&str; 6] = ["inst", "typ", "triple", "self", "sameRank", "leqRank"];

pub fn parse_rules(text: &str) -> Vec<Rule> {
    parse_program(text).expect("built-in rules parse").rules
}

pub fn ir_rules() -> Vec<Rule> {
    parse_rules(IR)
}

pub fn rt_rules() -> Vec<Rule> {
    parse_rules(RT)
}

/// `RT` without `SupTyp`, for simple knowledge bases.
pub fn rt_simple_rules() -> Vec<Rule> {
    rt_rules().into_iter().filter(|r| r.label.as_deref() != Some("SupTyp")).collect()
}

fn map_atoms(rule: &Rule, f: &impl Fn(&Atom) -> Atom) -> Rule {
    Rule {
        head: f(&rule.head),
        body: rule
            .body
            .iter()
            .map(|l| match l {
                Literal::Pos(a) => Literal::Pos(f(a)),
                Literal::Neg(a) => Literal::Neg(f(a)),
                c @ Literal::Cmp(..) => c.clone(),
            })
            .collect(),
        label: rule.label.clone(),
    }
}

/// Appends the hypothesis variable `param` to every derived predicate.
/// Rules that would leave it unbound get a `cls(param)` guard.
pub fn parameterize(rule: &Rule, param: &str) -> Rule {
    let mut r = map_atoms(rule, &|a: &Atom| {
        if DERIVED.contains(&a.predicate.as_str()) {
            let mut a = a.clone();
            a.args.push(Term::var(param));
            a
        } else {
            a.clone()
        }
    });
    if !r.bound_variables().contains(param) {
        r.body.push(Literal::Pos(Atom::new("cls", vec![Term::var(param)])));
    }
    r
}

/// Copy over `*_h` predicates carrying a hypothesis concept `D` and a
/// stage `I`.
pub fn h_copy(rule: &Rule) -> Rule {
    let mut r = map_atoms(rule, &|a: &Atom| {
        if DERIVED.contains(&a.predicate.as_str()) {
            let mut args = a.args.clone();
            args.push(Term::var("D"));
            args.push(Term::var("I"));
            Atom::new(format!("{}_h", a.predicate), args)
        } else {
            a.clone()
        }
    });
    let mut body = vec![
        Literal::Pos(Atom::new("t_cls", vec![Term::var("D")])),
        Literal::Pos(Atom::new("possrank", vec![Term::var("I")])),
    ];
    body.append(&mut r.body);
    r.body = body;
    r.label = rule.label.as_ref().map(|l| format!("{l}_h"));
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_counts() {
        assert_eq!(ir_rules().len(), 29);
        assert_eq!(rt_rules().len(), 13);
        assert_eq!(rt_simple_rules().len(), 12);
        assert_eq!(parse_rules(RC).len(), 12);
        assert_eq!(parse_rules(INRC).len(), 2);
        assert_eq!(parse_rules(RC_CONSISTENCY).len(), 2);
    }

    #[test]
    fn rules_are_safe() {
        for r in ir_rules().iter().chain(&rt_rules()).chain(&parse_rules(RC)) {
            r.check_safety().unwrap();
            parameterize(r, "H").check_safety().unwrap();
            h_copy(r).check_safety().unwrap();
        }
    }

    #[test]
    fn parameterized_rule_one_is_guarded() {
        let r = parameterize(&ir_rules()[0], "H");
        assert_eq!(r.clause_text(), "inst(x, x, H) :- nom(x), cls(H)");
        let r = parameterize(&ir_rules()[4], "H");
        assert_eq!(r.clause_text(), "inst(x, z, H) :- subClass(y, z), inst(x, y, H)");
    }

    #[test]
    fn h_copy_shape() {
        let r = h_copy(&rt_rules()[2]);
        assert_eq!(r.clause_text(), "inst_h(x, y, D, I) :- t_cls(D), possrank(I), typ_h(x, y, D, I)");
    }
}
