use std::collections::{BTreeMap, HashMap, VecDeque};

use crate::{DatalogError, Literal, Program};

/// Assignment of predicates to strata.
///
/// For every rule, the head's stratum is at least the stratum of each
/// positive body predicate and strictly greater than that of each negated one.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Stratification {
    pub stratum: BTreeMap<String, usize>,
}

impl Stratification {
    pub fn of(&self, predicate: &str) -> Option<usize> {
        self.stratum.get(predicate).copied()
    }

    pub fn len(&self) -> usize {
        self.stratum.values().max().map_or(0, |m| m + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.stratum.is_empty()
    }

    pub fn predicates_in(&self, stratum: usize) -> impl Iterator<Item = &str> {
        self.stratum
            .iter()
            .filter(move |(_, s)| **s == stratum)
            .map(|(p, _)| p.as_str())
    }

    /// Checks the defining condition against a program.
    pub fn is_valid_for(&self, program: &Program) -> bool {
        program.rules.iter().all(|r| {
            let head = self.of(&r.head.predicate);
            r.body.iter().all(|l| match l {
                Literal::Pos(a) => self.of(&a.predicate) <= head,
                Literal::Neg(a) => self.of(&a.predicate) < head,
                Literal::Cmp(..) => true,
            })
        })
    }
}

struct Graph<'a> {
    names: Vec<&'a str>,
    // edges body -> head, flagged when the body literal is negated
    succ: Vec<Vec<(usize, bool)>>,
}

impl<'a> Graph<'a> {
    fn new(program: &'a Program) -> Self {
        let names: Vec<&str> = program.predicates().into_iter().collect();
        let id: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        let mut succ = vec![Vec::new(); names.len()];
        for r in &program.rules {
            let h = id[r.head.predicate.as_str()];
            for l in &r.body {
                match l {
                    Literal::Pos(a) => succ[id[a.predicate.as_str()]].push((h, false)),
                    Literal::Neg(a) => succ[id[a.predicate.as_str()]].push((h, true)),
                    Literal::Cmp(..) => {}
                }
            }
        }
        Graph { names, succ }
    }

    /// Tarjan's algorithm; components come out in reverse topological order.
    fn sccs(&self) -> Vec<Vec<usize>> {
        struct State {
            index: Vec<Option<usize>>,
            low: Vec<usize>,
            on_stack: Vec<bool>,
            stack: Vec<usize>,
            next: usize,
            out: Vec<Vec<usize>>,
        }
        fn visit(g: &Graph<'_>, v: usize, st: &mut State) {
            st.index[v] = Some(st.next);
            st.low[v] = st.next;
            st.next += 1;
            st.stack.push(v);
            st.on_stack[v] = true;
            for &(w, _) in &g.succ[v] {
                match st.index[w] {
                    None => {
                        visit(g, w, st);
                        st.low[v] = st.low[v].min(st.low[w]);
                    }
                    Some(iw) if st.on_stack[w] => st.low[v] = st.low[v].min(iw),
                    Some(_) => {}
                }
            }
            if Some(st.low[v]) == st.index[v] {
                let mut comp = Vec::new();
                while let Some(w) = st.stack.pop() {
                    st.on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                st.out.push(comp);
            }
        }
        let n = self.names.len();
        let mut st = State {
            index: vec![None; n],
            low: vec![0; n],
            on_stack: vec![false; n],
            stack: Vec::new(),
            next: 0,
            out: Vec::new(),
        };
        for v in 0..n {
            if st.index[v].is_none() {
                visit(self, v, &mut st);
            }
        }
        st.out
    }

    fn path_within(&self, from: usize, to: usize, comp: &[bool]) -> Vec<usize> {
        let mut prev = vec![usize::MAX; self.names.len()];
        let mut queue = VecDeque::from([from]);
        prev[from] = from;
        while let Some(v) = queue.pop_front() {
            if v == to {
                break;
            }
            for &(w, _) in &self.succ[v] {
                if comp[w] && prev[w] == usize::MAX {
                    prev[w] = v;
                    queue.push_back(w);
                }
            }
        }
        let mut path = vec![to];
        let mut cur = to;
        while cur != from {
            cur = prev[cur];
            path.push(cur);
        }
        path.reverse();
        path
    }
}

/// Computes the least stratification of the program, or reports a cycle that
/// passes through a negated dependency.
pub fn stratify(program: &Program) -> Result<Stratification, DatalogError> {
    let g = Graph::new(program);
    let sccs = g.sccs();
    let mut comp_of = vec![0; g.names.len()];
    for (c, members) in sccs.iter().enumerate() {
        for &v in members {
            comp_of[v] = c;
        }
    }
    for members in &sccs {
        let mut in_comp = vec![false; g.names.len()];
        for &v in members {
            in_comp[v] = true;
        }
        for &v in members {
            for &(w, neg) in &g.succ[v] {
                if neg && in_comp[w] {
                    let mut cycle: Vec<String> = g
                        .path_within(w, v, &in_comp)
                        .into_iter()
                        .map(|i| g.names[i].to_owned())
                        .collect();
                    cycle.push(g.names[w].to_owned());
                    return Err(DatalogError::NotStratifiable { cycle });
                }
            }
        }
    }
    // Reverse topological order from Tarjan: walk it backwards, pushing
    // strata along edges.
    let mut comp_stratum = vec![0usize; sccs.len()];
    for c in (0..sccs.len()).rev() {
        for &v in &sccs[c] {
            for &(w, neg) in &g.succ[v] {
                let d = comp_of[w];
                if d != c {
                    let s = comp_stratum[c] + usize::from(neg);
                    comp_stratum[d] = comp_stratum[d].max(s);
                }
            }
        }
    }
    Ok(Stratification {
        stratum: g
            .names
            .iter()
            .enumerate()
            .map(|(i, n)| ((*n).to_owned(), comp_stratum[comp_of[i]]))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse_program;

    #[test]
    fn positive_program_is_one_stratum() {
        let p = parse_program("p(\"a\").\nq(X) :- p(X).\nr(X) :- q(X), r(X).").unwrap();
        let s = stratify(&p).unwrap();
        assert!(s.stratum.values().all(|&v| v == 0));
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn negation_raises_stratum() {
        let p = parse_program(
            "p(\"a\").\nr(X) :- p(X), not s(X).\nt(X) :- r(X), not u(X).\nu(X) :- s(X).",
        )
        .unwrap();
        let s = stratify(&p).unwrap();
        assert_eq!(s.of("p"), Some(0));
        assert_eq!(s.of("s"), Some(0));
        assert_eq!(s.of("r"), Some(1));
        assert_eq!(s.of("t"), Some(1));
        assert!(s.is_valid_for(&p));
    }

    #[test]
    fn negative_self_loop_is_rejected() {
        let p = parse_program("p :- not p.").unwrap();
        assert_eq!(
            stratify(&p),
            Err(DatalogError::NotStratifiable {
                cycle: vec!["p".into(), "p".into()]
            })
        );
    }

    #[test]
    fn negative_cycle_names_its_members() {
        let p = parse_program("p(X) :- q(X).\nq(X) :- r(X), not p(X).\nr(\"a\").").unwrap();
        let Err(DatalogError::NotStratifiable { cycle }) = stratify(&p) else {
            panic!("expected a cycle");
        };
        assert_eq!(cycle.first(), cycle.last());
        assert!(cycle.contains(&"p".to_owned()) && cycle.contains(&"q".to_owned()));
    }
}
