//! Line-oriented textual format.
//!
//! ```text
//! subClass("Student", "Young").
//! inst(x, z) :- subClass(y, z), inst(x, y).   % (5)
//! rank(C, I) :- t_cls(C), possrank(I), exceptional(C, I - 1), not exceptional(C, I).
//! ```
//!
//! Bare identifiers are variables, constants are double-quoted, integers are
//! decimal. A `%` comment after a rule on the same line becomes the rule's
//! label; printing and re-parsing a program is the identity on the text.

use std::fmt;

use crate::{Atom, CmpOp, Literal, Program, Rule, Term};

pub(crate) fn write_quoted(f: &mut impl fmt::Write, s: &str) -> fmt::Result {
    f.write_char('"')?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            c => f.write_char(c)?,
        }
    }
    f.write_char('"')
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) => write_quoted(f, c),
            Term::Int(n) => write!(f, "{n}"),
            Term::Var(v) => f.write_str(v),
            Term::Minus(v, k) => write!(f, "{v} - {k}"),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Pos(a) => write!(f, "{a}"),
            Literal::Neg(a) => write!(f, "not {a}"),
            Literal::Cmp(op, l, r) => write!(f, "{l} {} {r}", op.symbol()),
        }
    }
}

impl Rule {
    /// The rule without its label and without the trailing period.
    pub fn clause_text(&self) -> String {
        let mut s = self.head.to_string();
        if !self.body.is_empty() {
            s.push_str(" :- ");
            let body: Vec<String> = self.body.iter().map(|l| l.to_string()).collect();
            s.push_str(&body.join(", "));
        }
        s
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.", self.clause_text())?;
        if let Some(label) = &self.label {
            write!(f, "   % {label}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.int_bound != self.max_int_literal() {
            writeln!(f, "#int_bound {}.", self.int_bound)?;
        }
        for fact in &self.facts {
            writeln!(f, "{fact}.")?;
        }
        for rule in &self.rules {
            writeln!(f, "{rule}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

/// Parses the textual format. The integer bound is the largest integer literal
/// unless an explicit `#int_bound N.` directive says otherwise.
pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    let mut program = Program::new();
    let mut explicit_bound = None;
    for (lineno, line) in src.lines().enumerate() {
        let mut p = LineParser {
            chars: line.char_indices().peekable(),
            line: lineno + 1,
            text: line,
        };
        p.skip_ws();
        if p.at_end_or_comment() {
            continue;
        }
        if p.eat('#') {
            let word = p.ident()?;
            if word != "int_bound" {
                return Err(p.error(format!("unknown directive #{word}")));
            }
            p.skip_ws();
            let n = p.number()?;
            p.skip_ws();
            p.expect('.')?;
            explicit_bound = Some(n);
            continue;
        }
        let head = p.atom()?;
        p.skip_ws();
        let mut body = Vec::new();
        if p.eat(':') {
            p.expect('-')?;
            loop {
                p.skip_ws();
                body.push(p.literal()?);
                p.skip_ws();
                if !p.eat(',') {
                    break;
                }
            }
        }
        p.skip_ws();
        p.expect('.')?;
        p.skip_ws();
        let label = p.trailing_comment()?;
        if body.is_empty() && label.is_none() {
            if !head.is_ground() {
                return Err(p.error(format!("fact `{head}` is not ground")));
            }
            program.add_fact(head);
        } else {
            let mut rule = Rule::new(head, body);
            rule.label = label;
            program.add_rule(rule);
        }
    }
    program.int_bound = explicit_bound.unwrap_or_else(|| program.max_int_literal());
    Ok(program)
}

struct LineParser<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    line: usize,
    text: &'a str,
}

impl LineParser<'_> {
    fn col(&mut self) -> usize {
        match self.chars.peek() {
            Some((i, _)) => self.text[..*i].chars().count() + 1,
            None => self.text.chars().count() + 1,
        }
    }

    fn error(&mut self, message: String) -> ParseError {
        ParseError {
            line: self.line,
            col: self.col(),
            message,
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|(_, c)| *c)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.chars.next();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            let found = self.peek().map_or("end of line".to_owned(), |c| format!("`{c}`"));
            Err(self.error(format!("expected `{c}`, found {found}")))
        }
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.chars.next();
        }
    }

    fn at_end_or_comment(&mut self) -> bool {
        matches!(self.peek(), None | Some('%'))
    }

    fn trailing_comment(&mut self) -> Result<Option<String>, ParseError> {
        match self.peek() {
            None => Ok(None),
            Some('%') => {
                self.chars.next();
                let rest: String = self.chars.by_ref().map(|(_, c)| c).collect();
                let rest = rest.trim();
                Ok((!rest.is_empty()).then(|| rest.to_owned()))
            }
            Some(c) => Err(self.error(format!("unexpected `{c}` after end of clause"))),
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        let mut s = String::new();
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
            _ => return Err(self.error("expected an identifier".into())),
        }
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' || c == '\'' {
                s.push(c);
                self.chars.next();
            } else {
                break;
            }
        }
        Ok(s)
    }

    fn number(&mut self) -> Result<u32, ParseError> {
        let mut s = String::new();
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            s.push(c);
            self.chars.next();
        }
        s.parse()
            .map_err(|_| self.error("expected a natural number".into()))
    }

    fn quoted(&mut self) -> Result<String, ParseError> {
        self.expect('"')?;
        let mut s = String::new();
        loop {
            match self.chars.next().map(|(_, c)| c) {
                None => return Err(self.error("unterminated string constant".into())),
                Some('"') => return Ok(s),
                Some('\\') => match self.chars.next().map(|(_, c)| c) {
                    Some('n') => s.push('\n'),
                    Some(c @ ('"' | '\\')) => s.push(c),
                    _ => return Err(self.error("invalid escape in string constant".into())),
                },
                Some(c) => s.push(c),
            }
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek() {
            Some('"') => Ok(Term::Const(self.quoted()?)),
            Some(c) if c.is_ascii_digit() => Ok(Term::Int(self.number()?)),
            _ => {
                let v = self.ident()?;
                // `I - 1`: lookahead for a minus sign followed by digits.
                let save = self.chars.clone();
                self.skip_ws();
                if self.eat('-') {
                    self.skip_ws();
                    if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                        return Ok(Term::Minus(v, self.number()?));
                    }
                }
                self.chars = save;
                Ok(Term::Var(v))
            }
        }
    }

    fn atom(&mut self) -> Result<Atom, ParseError> {
        let predicate = self.ident()?;
        let mut args = Vec::new();
        if self.eat('(') {
            loop {
                self.skip_ws();
                args.push(self.term()?);
                self.skip_ws();
                if self.eat(')') {
                    break;
                }
                self.expect(',')?;
            }
        }
        Ok(Atom { predicate, args })
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        let save = self.chars.clone();
        if let Ok(word) = self.ident() {
            if word == "not" && matches!(self.peek(), Some(c) if c.is_whitespace()) {
                self.skip_ws();
                return Ok(Literal::Neg(self.atom()?));
            }
        }
        self.chars = save;
        // Either an atom or a comparison `t1 op t2`.
        let save = self.chars.clone();
        let quoted_or_int = matches!(self.peek(), Some(c) if c == '"' || c.is_ascii_digit());
        if !quoted_or_int {
            let atom = self.atom()?;
            let after = self.chars.clone();
            self.skip_ws();
            let is_cmp = matches!(self.peek(), Some('<' | '>' | '=' | '-'));
            if !is_cmp || !atom.args.is_empty() {
                self.chars = after;
                return Ok(Literal::Pos(atom));
            }
            self.chars = save;
        }
        let lhs = self.term()?;
        self.skip_ws();
        let op = match self.peek() {
            Some('<') => CmpOp::Lt,
            Some('>') => CmpOp::Gt,
            Some('=') => CmpOp::Eq,
            _ => return Err(self.error("expected a comparison operator".into())),
        };
        self.chars.next();
        self.skip_ws();
        let rhs = self.term()?;
        Ok(Literal::Cmp(op, lhs, rhs))
    }
}
