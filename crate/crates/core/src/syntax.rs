//! The `.kbt` text format.
//!
//! ```text
//! class Student, Young.
//! role friendOf.
//! individual mary, mario.
//! T(Student) <= Young.            % typical students are young
//! some friendOf.{mary} <= T(Student).
//! friendOf(mario, mary).
//! ```
//!
//! Names must be declared before use. `some r.C` binds tighter than `and`,
//! and `and` associates to the left.

use std::fmt::{self, Write};

use crate::kb::{Axiom, BoxKind, Concept, KnowledgeBase, Query, Signature};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

const KEYWORDS: &[&str] = &[
    "class", "role", "individual", "top", "bot", "and", "some", "self", "T", "x", "o",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

/// Whether `s` can be written as a name in the text format.
pub fn is_valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
        && !is_keyword(s)
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Le,
    Dot,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Amp,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Le => f.write_str("`<=`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Amp => f.write_str("`&`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    let (mut line, mut col) = (1, 1);
    while let Some(&c) = chars.peek() {
        let (tl, tc) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars<'_>>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        let tok = match c {
            c if c.is_whitespace() => {
                bump(&mut chars);
                continue;
            }
            '%' => {
                while chars.peek().is_some_and(|c| *c != '\n') {
                    bump(&mut chars);
                }
                continue;
            }
            '<' => {
                bump(&mut chars);
                if chars.peek() == Some(&'=') {
                    bump(&mut chars);
                    Tok::Le
                } else {
                    return Err(ParseError {
                        line: tl,
                        col: tc,
                        message: "expected `<=`".into(),
                    });
                }
            }
            '.' | '(' | ')' | '{' | '}' | ',' | '&' => {
                bump(&mut chars);
                match c {
                    '.' => Tok::Dot,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    ',' => Tok::Comma,
                    _ => Tok::Amp,
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' || c == '\'' {
                        s.push(c);
                        bump(&mut chars);
                    } else {
                        break;
                    }
                }
                Tok::Ident(s)
            }
            other => {
                return Err(ParseError {
                    line: tl,
                    col: tc,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        out.push(Token {
            tok,
            line: tl,
            col: tc,
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    sig: Signature,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn new(src: &str, sig: Signature) -> PResult<Self> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
            sig,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn error<T>(&self, message: impl Into<String>) -> PResult<T> {
        let (line, col) = self.here();
        Err(ParseError {
            line,
            col,
            message: message.into(),
        })
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> PResult<()> {
        if *self.peek() == want {
            self.next();
            Ok(())
        } else {
            self.error(format!("expected {want}, found {}", self.peek()))
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.next();
                Ok(s)
            }
            t => self.error(format!("expected {what}, found {t}")),
        }
    }

    fn role(&mut self) -> PResult<String> {
        let save = self.pos;
        let r = self.ident("a role name")?;
        if self.sig.is_role(&r) {
            Ok(r)
        } else {
            self.pos = save;
            self.error(self.misuse(&r, "a role"))
        }
    }

    fn individual(&mut self) -> PResult<String> {
        let save = self.pos;
        let a = self.ident("an individual name")?;
        if self.sig.is_individual(&a) {
            Ok(a)
        } else {
            self.pos = save;
            self.error(self.misuse(&a, "an individual"))
        }
    }

    fn misuse(&self, name: &str, wanted: &str) -> String {
        let actual = if self.sig.is_concept(name) {
            "a class"
        } else if self.sig.is_role(name) {
            "a role"
        } else if self.sig.is_individual(name) {
            "an individual"
        } else {
            return format!("undeclared name `{name}`");
        };
        format!("expected {wanted}, but `{name}` is declared as {actual}")
    }

    fn declarations(&mut self, kind: &str) -> PResult<()> {
        loop {
            let name = self.ident("a name to declare")?;
            if self.sig.contains(&name) {
                self.pos -= 1;
                return self.error(format!("`{name}` is already declared"));
            }
            match kind {
                "class" => self.sig.concept_names.insert(name),
                "role" => self.sig.role_names.insert(name),
                _ => self.sig.individual_names.insert(name),
            };
            match self.next() {
                Tok::Comma => {}
                Tok::Dot => return Ok(()),
                t => {
                    self.pos -= 1;
                    return self.error(format!("expected `,` or `.`, found {t}"));
                }
            }
        }
    }

    fn primary(&mut self) -> PResult<Concept> {
        match self.peek().clone() {
            Tok::Ident(k) if k == "top" => {
                self.next();
                Ok(Concept::Top)
            }
            Tok::Ident(k) if k == "bot" => {
                self.next();
                Ok(Concept::Bot)
            }
            Tok::Ident(k) if k == "some" => {
                self.next();
                let r = self.role()?;
                self.expect(Tok::Dot)?;
                let filler = self.primary()?;
                Ok(Concept::some(r, filler))
            }
            Tok::Ident(k) if k == "self" => {
                self.next();
                self.expect(Tok::LParen)?;
                let r = self.role()?;
                self.expect(Tok::RParen)?;
                Ok(Concept::SelfRestriction(r))
            }
            Tok::Ident(k) if k == "T" => {
                self.next();
                self.expect(Tok::LParen)?;
                let c = self.concept()?;
                self.expect(Tok::RParen)?;
                Ok(c.typical())
            }
            Tok::LBrace => {
                self.next();
                let a = self.individual()?;
                self.expect(Tok::RBrace)?;
                Ok(Concept::Nominal(a))
            }
            Tok::LParen => {
                self.next();
                let c = self.concept()?;
                self.expect(Tok::RParen)?;
                Ok(c)
            }
            Tok::Ident(n) if !is_keyword(&n) => {
                if self.sig.is_concept(&n) {
                    self.next();
                    Ok(Concept::Name(n))
                } else {
                    self.error(self.misuse(&n, "a class"))
                }
            }
            t => self.error(format!("expected a concept, found {t}")),
        }
    }

    fn concept(&mut self) -> PResult<Concept> {
        let mut c = self.primary()?;
        while self.at_keyword("and") {
            self.next();
            let rhs = self.primary()?;
            c = c.and(rhs);
        }
        Ok(c)
    }

    fn starts_with_role(&self) -> bool {
        matches!(self.peek(), Tok::Ident(s) if self.sig.is_role(s))
    }

    fn role_statement(&mut self) -> PResult<Axiom> {
        let r = self.role()?;
        match self.peek().clone() {
            Tok::LParen => {
                self.next();
                let a = self.individual()?;
                self.expect(Tok::Comma)?;
                let b = self.individual()?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::Dot)?;
                Ok(Axiom::RoleAssertion { r, a, b })
            }
            Tok::Ident(k) if k == "o" => {
                self.next();
                let r2 = self.role()?;
                self.expect(Tok::Le)?;
                let sup = self.role()?;
                self.expect(Tok::Dot)?;
                Ok(Axiom::RoleChain { r1: r, r2, sup })
            }
            Tok::Amp => {
                self.next();
                let r2 = self.role()?;
                self.expect(Tok::Le)?;
                let sup = self.role()?;
                self.expect(Tok::Dot)?;
                Ok(Axiom::RoleConj { r1: r, r2, sup })
            }
            Tok::Le => {
                self.next();
                if self.starts_with_role() && *self.peek_at(1) == Tok::Dot {
                    let sup = self.role()?;
                    self.next();
                    return Ok(Axiom::RoleIncl { sub: r, sup });
                }
                let c = self.concept()?;
                if !self.at_keyword("x") {
                    return self.error(format!("expected `x`, found {}", self.peek()));
                }
                self.next();
                let d = self.concept()?;
                self.expect(Tok::Dot)?;
                Ok(Axiom::RoleToProduct { sub: r, c, d })
            }
            t => self.error(format!("expected `(`, `o`, `&` or `<=` after a role, found {t}")),
        }
    }

    fn concept_statement(&mut self) -> PResult<Axiom> {
        let c = self.concept()?;
        match self.peek().clone() {
            Tok::Le => {
                self.next();
                let d = self.concept()?;
                self.expect(Tok::Dot)?;
                Ok(Axiom::gci(c, d))
            }
            Tok::Ident(k) if k == "x" => {
                self.next();
                let d = self.concept()?;
                self.expect(Tok::Le)?;
                let sup = self.role()?;
                self.expect(Tok::Dot)?;
                Ok(Axiom::ProductToRole { c, d, sup })
            }
            Tok::LParen => {
                self.next();
                let a = self.individual()?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::Dot)?;
                Ok(Axiom::ConceptAssertion { c, a })
            }
            t => self.error(format!("expected `<=`, `x` or `(`, found {t}")),
        }
    }
}

/// Parses and validates a knowledge base.
pub fn parse_kb(src: &str) -> Result<KnowledgeBase, ParseError> {
    let mut p = Parser::new(src, Signature::default())?;
    let mut axioms: Vec<(Axiom, (usize, usize))> = Vec::new();
    loop {
        let at = p.here();
        match p.peek().clone() {
            Tok::Eof => break,
            Tok::Ident(k) if matches!(k.as_str(), "class" | "role" | "individual") => {
                p.next();
                p.declarations(&k)?;
            }
            _ => {
                let ax = if p.starts_with_role() {
                    p.role_statement()?
                } else {
                    p.concept_statement()?
                };
                axioms.push((ax, at));
            }
        }
    }
    let mut kb = KnowledgeBase::new(p.sig);
    let mut positions: Vec<(BoxKind, usize, (usize, usize))> = Vec::new();
    for (ax, at) in axioms {
        let kind = ax.box_kind();
        let index = match kind {
            BoxKind::TBox => kb.tbox.len(),
            BoxKind::RBox => kb.rbox.len(),
            BoxKind::ABox => kb.abox.len(),
        };
        positions.push((kind, index, at));
        kb.add(ax);
    }
    kb.compute_simple_roles();
    let report = kb.validate();
    if let Some(v) = report.violations.first() {
        let (line, col) = v
            .location
            .and_then(|(b, i)| positions.iter().find(|p| p.0 == b && p.1 == i).map(|p| p.2))
            .unwrap_or((1, 1));
        return Err(ParseError {
            line,
            col,
            message: v.to_string(),
        });
    }
    Ok(kb)
}

/// Parses a query against the signature of `kb`.
pub fn parse_query(src: &str, kb: &KnowledgeBase) -> Result<Query, ParseError> {
    let mut p = Parser::new(src, kb.signature.clone())?;
    let q = if p.starts_with_role() && *p.peek_at(1) == Tok::LParen {
        let r = p.role()?;
        p.expect(Tok::LParen)?;
        let a = p.individual()?;
        p.expect(Tok::Comma)?;
        let b = p.individual()?;
        p.expect(Tok::RParen)?;
        Query::RoleHolds { r, a, b }
    } else {
        let c = p.concept()?;
        match p.next() {
            Tok::LParen => {
                let a = p.individual()?;
                p.expect(Tok::RParen)?;
                match c {
                    Concept::Typicality(inner) => Query::TypicalInstanceOf { c: *inner, a },
                    c => Query::InstanceOf { c, a },
                }
            }
            Tok::Le => {
                let d = p.concept()?;
                match c {
                    Concept::Typicality(inner) => Query::TypSubsumes { lhs: *inner, rhs: d },
                    c => Query::Subsumes { lhs: c, rhs: d },
                }
            }
            t => {
                p.pos -= 1;
                return p.error(format!("expected `(` or `<=`, found {t}"));
            }
        }
    };
    if *p.peek() == Tok::Dot {
        p.next();
    }
    if *p.peek() != Tok::Eof {
        return p.error(format!("unexpected {} after query", p.peek()));
    }
    if let Some(v) = q.violations(kb).first() {
        return Err(ParseError {
            line: 1,
            col: 1,
            message: v.to_string(),
        });
    }
    Ok(q)
}

/// Parses a single concept against the signature of `kb`.
pub fn parse_concept(src: &str, kb: &KnowledgeBase) -> Result<Concept, ParseError> {
    let mut p = Parser::new(src, kb.signature.clone())?;
    let c = p.concept()?;
    if *p.peek() != Tok::Eof {
        return p.error(format!("unexpected {} after concept", p.peek()));
    }
    Ok(c)
}

fn write_concept(out: &mut String, c: &Concept) {
    match c {
        Concept::Top => out.push_str("top"),
        Concept::Bot => out.push_str("bot"),
        Concept::Name(n) => out.push_str(n),
        Concept::Nominal(a) => {
            let _ = write!(out, "{{{a}}}");
        }
        Concept::Conj(a, b) => {
            write_concept(out, a);
            out.push_str(" and ");
            write_primary(out, b);
        }
        Concept::Exists(r, f) => {
            let _ = write!(out, "some {r}.");
            write_primary(out, f);
        }
        Concept::SelfRestriction(r) => {
            let _ = write!(out, "self({r})");
        }
        Concept::Typicality(c) => {
            out.push_str("T(");
            write_concept(out, c);
            out.push(')');
        }
    }
}

fn write_primary(out: &mut String, c: &Concept) {
    if matches!(c, Concept::Conj(..)) {
        out.push('(');
        write_concept(out, c);
        out.push(')');
    } else {
        write_concept(out, c);
    }
}

pub fn concept_to_string(c: &Concept) -> String {
    let mut s = String::new();
    write_concept(&mut s, c);
    s
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&concept_to_string(self))
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axiom::Gci { lhs, rhs } => write!(f, "{lhs} <= {rhs}."),
            Axiom::RoleIncl { sub, sup } => write!(f, "{sub} <= {sup}."),
            Axiom::RoleChain { r1, r2, sup } => write!(f, "{r1} o {r2} <= {sup}."),
            Axiom::RoleConj { r1, r2, sup } => write!(f, "{r1} & {r2} <= {sup}."),
            Axiom::ProductToRole { c, d, sup } => write!(f, "{c} x {d} <= {sup}."),
            Axiom::RoleToProduct { sub, c, d } => write!(f, "{sub} <= {c} x {d}."),
            Axiom::ConceptAssertion { c, a } => {
                let mut s = String::new();
                match c {
                    Concept::Conj(..) | Concept::Exists(..) => {
                        s.push('(');
                        write_concept(&mut s, c);
                        s.push(')');
                    }
                    _ => write_concept(&mut s, c),
                }
                write!(f, "{s}({a}).")
            }
            Axiom::RoleAssertion { r, a, b } => write!(f, "{r}({a}, {b})."),
        }
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let assertion = |f: &mut fmt::Formatter<'_>, c: &Concept, a: &str| {
            if matches!(c, Concept::Conj(..) | Concept::Exists(..)) {
                write!(f, "({c})({a})")
            } else {
                write!(f, "{c}({a})")
            }
        };
        match self {
            Query::InstanceOf { c, a } => assertion(f, c, a),
            Query::TypicalInstanceOf { c, a } => write!(f, "T({c})({a})"),
            Query::RoleHolds { r, a, b } => write!(f, "{r}({a}, {b})"),
            Query::Subsumes { lhs, rhs } => write!(f, "{lhs} <= {rhs}"),
            Query::TypSubsumes { lhs, rhs } => write!(f, "T({lhs}) <= {rhs}"),
        }
    }
}

/// Prints a knowledge base so that [`parse_kb`] reads it back unchanged.
pub fn print_kb(kb: &KnowledgeBase) -> String {
    let mut out = String::new();
    let sig = &kb.signature;
    for (kw, names) in [
        ("class", &sig.concept_names),
        ("role", &sig.role_names),
        ("individual", &sig.individual_names),
    ] {
        if !names.is_empty() {
            let list: Vec<&str> = names.iter().map(String::as_str).collect();
            let _ = writeln!(out, "{kw} {}.", list.join(", "));
        }
    }
    for (i, (_, _, ax)) in kb.axioms().enumerate() {
        if i == 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "{ax}");
    }
    out
}
