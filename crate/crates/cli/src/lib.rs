//! Command dispatch for `sroelrt`.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sroel::calculus::{build_program, build_subsumption_program, translate, Materialization, Seed, SubsumptionStore};
use sroel::closure::{build_rc_program, RcEvaluation};
use sroel::normalize::{normalize, Mode};
use sroel::ranked::refute;
use sroel::{parse_concept, parse_kb, parse_query, print_kb, KnowledgeBase, ParseError, Query, SroelError};
use sroel_datalog::Program;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}:{}:{}: {}", path.display(), err.line, err.col, err.message)]
    Parse { path: PathBuf, err: ParseError },
    #[error("query `{text}`: {err}")]
    Query { text: String, err: ParseError },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Reasoner(#[from] SroelError),
    #[error("writing output: {0}")]
    Output(#[from] io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Records,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    /// Instance checking.
    Base,
    /// Subsumption `C <= D`.
    Subsumption,
    /// Subsumption `T(C) <= D`.
    Typical,
    /// Rational closure ranks.
    Closure,
}

#[derive(Debug, Parser)]
#[command(name = "sroelrt", version, about = "Reasoning with typicality in SROEL(and, x)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output style.
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    pub format: Format,
    /// Also write the evaluated Datalog program to this file.
    #[arg(long, global = true, value_name = "PATH")]
    pub dump_program: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the normalized knowledge base.
    Normalize {
        kb: PathBuf,
        /// Use the normal form for simple knowledge bases.
        #[arg(long)]
        simple: bool,
    },
    /// Print the Datalog program for the knowledge base.
    Translate {
        kb: PathBuf,
        #[arg(long, value_enum, default_value_t = Variant::Base)]
        variant: Variant,
    },
    /// Decide queries under rational entailment.
    Check {
        kb: PathBuf,
        #[arg(required = true)]
        queries: Vec<String>,
    },
    /// Decide `C <= D` or `T(C) <= D`.
    Subsumes {
        kb: PathBuf,
        #[arg(required = true)]
        queries: Vec<String>,
    },
    /// Classical consistency.
    Consistent { kb: PathBuf },
    /// Ranks of the rational closure.
    RcRanks {
        kb: PathBuf,
        /// Extra concept to rank; repeatable.
        #[arg(long = "concept", value_name = "CONCEPT")]
        concepts: Vec<String>,
    },
    /// Membership of `T(C) <= D` in the rational closure.
    RcCheck {
        kb: PathBuf,
        #[arg(required = true)]
        queries: Vec<String>,
    },
    /// Whether the ranks of the rational closure admit a model.
    RcConsistent { kb: PathBuf },
    /// Search for a small model in which the query fails.
    Refute {
        kb: PathBuf,
        query: String,
        #[arg(long, default_value_t = 3)]
        max_domain: usize,
        #[arg(long, default_value_t = 2)]
        max_rank: u32,
    },
}

/// Outcome of a successful run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Yes,
    No,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Yes => 0,
            Status::No => 1,
        }
    }

    fn all(flags: impl IntoIterator<Item = bool>) -> Self {
        if flags.into_iter().all(|b| b) {
            Status::Yes
        } else {
            Status::No
        }
    }
}

#[derive(Serialize)]
struct Record<'a> {
    query: String,
    verdict: String,
    mode: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    closure: Option<&'a str>,
}

struct Printer<'w> {
    out: &'w mut dyn Write,
    format: Format,
}

impl Printer<'_> {
    fn verdict(&mut self, query: &str, verdict: &str, mode: &str, note: Option<&str>) -> io::Result<()> {
        match self.format {
            Format::Human => match note {
                Some(n) => writeln!(self.out, "{query}: {verdict} ({n})"),
                None => writeln!(self.out, "{query}: {verdict}"),
            },
            Format::Records => {
                let r = Record {
                    query: query.to_owned(),
                    verdict: verdict.to_owned(),
                    mode,
                    closure: None,
                };
                self.record(&r)
            }
        }
    }

    fn record(&mut self, r: &Record) -> io::Result<()> {
        writeln!(self.out, "{}", serde_json::to_string(r).expect("records serialize"))
    }
}

fn read_kb(path: &Path) -> Result<KnowledgeBase, CliError> {
    let src = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_kb(&src).map_err(|err| CliError::Parse {
        path: path.to_owned(),
        err,
    })
}

fn read_queries(kb: &KnowledgeBase, texts: &[String]) -> Result<Vec<Query>, CliError> {
    texts
        .iter()
        .map(|t| {
            parse_query(t, kb).map_err(|err| CliError::Query {
                text: t.clone(),
                err,
            })
        })
        .collect()
}

fn dump(cli: &Cli, program: &Program) -> Result<(), CliError> {
    if let Some(path) = &cli.dump_program {
        fs::write(path, program.to_string()).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
    }
    Ok(())
}

fn entailment_word(b: bool) -> &'static str {
    if b {
        "entailed"
    } else {
        "not entailed"
    }
}

fn closure_word(b: bool) -> &'static str {
    if b {
        "in closure"
    } else {
        "not in closure"
    }
}

fn is_subsumption(q: &Query) -> bool {
    matches!(q, Query::Subsumes { .. } | Query::TypSubsumes { .. })
}

/// Subsumption verdicts in query order, one program per seed.
fn subsumptions(cli: &Cli, kb: &KnowledgeBase, qs: &[Query]) -> Result<Vec<bool>, CliError> {
    let mut verdicts = vec![false; qs.len()];
    for seed in [Seed::Instance, Seed::Typical] {
        let idx: Vec<usize> = (0..qs.len())
            .filter(|&i| matches!((&qs[i], seed), (Query::Subsumes { .. }, Seed::Instance) | (Query::TypSubsumes { .. }, Seed::Typical)))
            .collect();
        if idx.is_empty() {
            continue;
        }
        let batch: Vec<Query> = idx.iter().map(|&i| qs[i].clone()).collect();
        let store = SubsumptionStore::new(kb, &batch, seed)?;
        dump(cli, &store.program)?;
        let consistent = Materialization::new(kb, &[])?.consistent();
        for (j, &i) in idx.iter().enumerate() {
            verdicts[i] = !consistent || store.verdict(j)?.entailed;
        }
    }
    Ok(verdicts)
}

/// Closure membership of `T(C) <= D` when the knowledge base admits the
/// closure construction.
fn closure_opinion(kb: &KnowledgeBase, q: &Query) -> Option<bool> {
    let Query::TypSubsumes { .. } = q else { return None };
    RcEvaluation::new(kb, std::slice::from_ref(q), false)
        .and_then(|e| e.verdict(0))
        .ok()
        .map(|v| v.in_closure)
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<Status, CliError> {
    let mut p = Printer { out, format: cli.format };
    match &cli.command {
        Command::Normalize { kb, simple } => {
            let kb = read_kb(kb)?;
            let mode = if *simple { Mode::Simple } else { Mode::General };
            let (nkb, _) = normalize(&kb, &[], mode);
            match cli.format {
                Format::Human => write!(p.out, "{}", print_kb(&nkb.to_kb()))?,
                Format::Records => {
                    for a in &nkb.axioms {
                        writeln!(p.out, "{}", serde_json::json!({ "axiom": a.to_string() }))?;
                    }
                }
            }
            Ok(Status::Yes)
        }
        Command::Translate { kb, variant } => {
            let kb = read_kb(kb)?;
            let program = match variant {
                Variant::Base => build_program(&translate(&normalize(&kb, &[], Mode::General).0)),
                Variant::Subsumption => build_subsumption_program(&translate(&normalize(&kb, &[], Mode::General).0), Seed::Instance),
                Variant::Typical => build_subsumption_program(&translate(&normalize(&kb, &[], Mode::General).0), Seed::Typical),
                Variant::Closure => {
                    if let Some((_, _, a)) = kb.first_non_simple() {
                        return Err(SroelError::NotSimple { axiom: a.to_string() }.into());
                    }
                    build_rc_program(&normalize(&kb, &[], Mode::Simple).0, &[], false)?
                }
            };
            dump(cli, &program)?;
            write!(p.out, "{program}")?;
            Ok(Status::Yes)
        }
        Command::Check { kb, queries } => {
            let kb = read_kb(kb)?;
            let qs = read_queries(&kb, queries)?;
            let instance: Vec<Query> = qs.iter().filter(|q| !is_subsumption(q)).cloned().collect();
            let m = Materialization::new(&kb, &instance)?;
            dump(cli, &m.program)?;
            let note = (!m.consistent()).then_some("knowledge base is inconsistent");
            let subs = if qs.iter().any(is_subsumption) {
                subsumptions(cli, &kb, &qs)?
            } else {
                vec![false; qs.len()]
            };
            let mut flags = Vec::new();
            let mut k = 0;
            for (i, q) in qs.iter().enumerate() {
                let (yes, mode) = if is_subsumption(q) {
                    (subs[i], "subsumption")
                } else {
                    k += 1;
                    (m.verdict(k - 1)?.entailed, "instance")
                };
                p.verdict(&q.to_string(), entailment_word(yes), mode, note)?;
                flags.push(yes);
            }
            Ok(Status::all(flags))
        }
        Command::Subsumes { kb, queries } => {
            let kb = read_kb(kb)?;
            let qs = read_queries(&kb, queries)?;
            if let Some(q) = qs.iter().find(|q| !is_subsumption(q)) {
                return Err(CliError::Usage(format!("`{q}` is not a subsumption; use `check`")));
            }
            let verdicts = subsumptions(cli, &kb, &qs)?;
            for (q, &yes) in qs.iter().zip(&verdicts) {
                let rc = closure_opinion(&kb, q).filter(|&c| c != yes);
                match p.format {
                    Format::Human => {
                        p.verdict(&q.to_string(), entailment_word(yes), "subsumption", rc.map(closure_word))?
                    }
                    Format::Records => p.record(&Record {
                        query: q.to_string(),
                        verdict: entailment_word(yes).into(),
                        mode: "subsumption",
                        closure: rc.map(closure_word),
                    })?,
                }
            }
            Ok(Status::all(verdicts))
        }
        Command::Consistent { kb } => {
            let kb = read_kb(kb)?;
            let m = Materialization::new(&kb, &[])?;
            dump(cli, &m.program)?;
            let yes = m.consistent();
            p.verdict("knowledge base", if yes { "consistent" } else { "inconsistent" }, "classical", None)?;
            Ok(Status::all([yes]))
        }
        Command::RcRanks { kb, concepts } => {
            let kb = read_kb(kb)?;
            let extra: Vec<Query> = concepts
                .iter()
                .map(|t| {
                    parse_concept(t, &kb)
                        .map(|c| Query::TypSubsumes {
                            lhs: c,
                            rhs: sroel::Concept::Top,
                        })
                        .map_err(|err| CliError::Query { text: t.clone(), err })
                })
                .collect::<Result<_, _>>()?;
            let e = rc_evaluation(&kb, &extra, false)?;
            let Some(e) = e else { return inconsistent(&mut p) };
            dump(cli, &e.program)?;
            let ranks = e.ranks()?;
            match p.format {
                Format::Human => {
                    if let Some(s) = ranks.fixpoint_stage {
                        writeln!(p.out, "fixpoint stage {s} of {}", ranks.upper_bound)?;
                    }
                    for r in &ranks.entries {
                        let label = r.label();
                        let name = r.name.to_string();
                        if name == label {
                            writeln!(p.out, "{label} {}", r.rank)?;
                        } else {
                            writeln!(p.out, "{label} {}  [{name}]", r.rank)?;
                        }
                    }
                }
                Format::Records => {
                    for r in &ranks.entries {
                        p.verdict(&r.label(), &r.rank.to_string(), "rank", None)?;
                    }
                }
            }
            Ok(Status::Yes)
        }
        Command::RcCheck { kb, queries } => {
            let kb = read_kb(kb)?;
            let qs = read_queries(&kb, queries)?;
            if let Some(q) = qs.iter().find(|q| !matches!(q, Query::TypSubsumes { .. })) {
                return Err(CliError::Usage(format!("`{q}` is not of the form T(C) <= D")));
            }
            let Some(e) = rc_evaluation(&kb, &qs, false)? else {
                return inconsistent(&mut p);
            };
            dump(cli, &e.program)?;
            let mut flags = Vec::new();
            for (i, q) in qs.iter().enumerate() {
                let v = e.verdict(i)?;
                let note = v.rank.map(|r| format!("rank {r}"));
                p.verdict(&q.to_string(), closure_word(v.in_closure), "closure", note.as_deref())?;
                flags.push(v.in_closure);
            }
            Ok(Status::all(flags))
        }
        Command::RcConsistent { kb } => {
            let kb = read_kb(kb)?;
            let Some(e) = rc_evaluation(&kb, &[], true)? else {
                return inconsistent(&mut p);
            };
            dump(cli, &e.program)?;
            let yes = e.consistent();
            p.verdict("rational closure", if yes { "consistent" } else { "inconsistent" }, "closure", None)?;
            Ok(Status::all([yes]))
        }
        Command::Refute {
            kb,
            query,
            max_domain,
            max_rank,
        } => {
            let kb = read_kb(kb)?;
            let q = read_queries(&kb, std::slice::from_ref(query))?.remove(0);
            let found = refute(&kb, &q, *max_domain, *max_rank)?;
            let verdict = if found.is_some() { "counter-model found" } else { "none found" };
            match p.format {
                Format::Human => {
                    let bounds = format!("at most {max_domain} elements, ranks up to {max_rank}");
                    p.verdict(&q.to_string(), verdict, "refute", Some(&bounds))?;
                    if let Some(m) = &found {
                        write!(p.out, "{m}")?;
                    }
                }
                Format::Records => p.verdict(&q.to_string(), verdict, "refute", None)?,
            }
            Ok(Status::all([found.is_none()]))
        }
    }
}

/// `None` when the knowledge base is classically inconsistent.
fn rc_evaluation(kb: &KnowledgeBase, qs: &[Query], consistency: bool) -> Result<Option<RcEvaluation>, CliError> {
    match RcEvaluation::new(kb, qs, consistency) {
        Ok(e) => Ok(Some(e)),
        Err(SroelError::Inconsistent) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn inconsistent(p: &mut Printer) -> Result<Status, CliError> {
    p.verdict("knowledge base", "inconsistent", "classical", Some("the closure is not computed"))?;
    Ok(Status::No)
}
