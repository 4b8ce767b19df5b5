//! Seeded generator of small stratified programs for differential testing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Atom, Literal, Program, Rule, Term};

// Predicate name, arity, level. Negation only reaches strictly lower levels.
const PREDS: [(&str, usize, usize); 6] = [
    ("e", 2, 0),
    ("n", 1, 0),
    ("p", 2, 1),
    ("q", 1, 1),
    ("r", 1, 2),
    ("s", 2, 2),
];
const VARS: [&str; 3] = ["X", "Y", "Z"];

/// A safe, stratified program drawn from `seed`: at most five constants and
/// eight rules, with negation only on predicates of lower levels.
pub fn random_program(seed: u64) -> Program {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let consts = rng.gen_range(1..=5);
    let constant = |rng: &mut ChaCha8Rng| Term::constant(format!("c{}", rng.gen_range(0..consts)));
    let mut program = Program::new();
    for _ in 0..rng.gen_range(2..=12) {
        let (name, arity, _) = PREDS[rng.gen_range(0..2)];
        let args = (0..arity).map(|_| constant(&mut rng)).collect();
        program.add_fact(Atom::new(name, args));
    }
    for _ in 0..rng.gen_range(1..=8) {
        let (head_name, head_arity, level) = PREDS[rng.gen_range(2..PREDS.len())];
        let mut body = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            let candidates: Vec<_> = PREDS.iter().filter(|p| p.2 <= level).collect();
            let (name, arity, _) = *candidates[rng.gen_range(0..candidates.len())];
            let args = (0..arity)
                .map(|_| {
                    if rng.gen_bool(0.9) {
                        Term::var(VARS[rng.gen_range(0..VARS.len())])
                    } else {
                        constant(&mut rng)
                    }
                })
                .collect();
            body.push(Literal::Pos(Atom::new(name, args)));
        }
        let bound: Vec<String> = body
            .iter()
            .filter_map(Literal::atom)
            .flat_map(|a| a.variables().map(str::to_owned).collect::<Vec<_>>())
            .collect();
        let pick = |rng: &mut ChaCha8Rng| {
            if bound.is_empty() || rng.gen_bool(0.1) {
                constant(rng)
            } else {
                Term::var(bound[rng.gen_range(0..bound.len())].clone())
            }
        };
        if rng.gen_bool(0.4) {
            let lower: Vec<_> = PREDS.iter().filter(|p| p.2 < level).collect();
            let (name, arity, _) = *lower[rng.gen_range(0..lower.len())];
            let args = (0..arity).map(|_| pick(&mut rng)).collect();
            body.push(Literal::Neg(Atom::new(name, args)));
        }
        let head = Atom::new(head_name, (0..head_arity).map(|_| pick(&mut rng)).collect());
        program.add_rule(Rule::new(head, body));
    }
    program
}
