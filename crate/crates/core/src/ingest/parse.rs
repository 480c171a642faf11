//! Text formats: facts, clauses, declarations, instance pools and term examples.
//!
//! Identifiers starting with an uppercase letter or `_` are variables; all
//! other identifiers (including numerals) are constants or predicate names.
//! `%` starts a comment that runs to the end of the line.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::lp::{Clause, Database, Declaration, ExtendedInstance, Fact, Literal, Mode, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Bar,
    Dot,
    Neck,
    Eof,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn lex(src: &str, first_line: usize) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, first_line, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut push = |tok: Tok| out.push(Spanned { tok, line: l0, col: c0 });
        match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => {}
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '(' => push(Tok::LParen),
            ')' => push(Tok::RParen),
            '[' => push(Tok::LBracket),
            ']' => push(Tok::RBracket),
            ',' | '∧' => push(Tok::Comma),
            '|' => push(Tok::Bar),
            '.' => push(Tok::Dot),
            '←' => push(Tok::Neck),
            ':' if chars.get(i + 1) == Some(&'-') => {
                push(Tok::Neck);
                i += 2;
                col += 2;
                continue;
            }
            '<' if chars.get(i + 1) == Some(&'-') => {
                push(Tok::Neck);
                i += 2;
                col += 2;
                continue;
            }
            c if is_ident_char(c) => {
                let start = i;
                while i < chars.len() && is_ident_char(chars[i]) {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                col += i - start;
                push(Tok::Ident(word));
                continue;
            }
            other => {
                return Err(Error::Syntax {
                    line,
                    col,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        }
        i += 1;
        col += 1;
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

fn is_variable_name(s: &str) -> bool {
    s.starts_with(|c: char| c.is_uppercase() || c == '_')
}

/// A term of the example language: atoms and (possibly partial) lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TermValue {
    Atom(String),
    Var(String),
    List(Vec<TermValue>, Option<Box<TermValue>>),
    Compound(String, Vec<TermValue>),
}

/// A term-level example such as `append([1,2],[3],[1,2,3])`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermExample {
    pub pred: String,
    pub args: Vec<TermValue>,
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn new(src: &str, first_line: usize) -> Result<Self> {
        Ok(Parser {
            toks: lex(src, first_line)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn next(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T> {
        let t = &self.toks[self.pos];
        Err(Error::Syntax {
            line: t.line,
            col: t.col,
            msg: msg.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if *self.peek() == tok {
            self.next();
            Ok(())
        } else {
            self.error(format!("expected {what}, found {:?}", self.peek()))
        }
    }

    fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            other => self.error(format!("expected {what}, found {other:?}")),
        }
    }

    fn literal(&mut self) -> Result<Literal> {
        let pred = self.ident("predicate name")?;
        if is_variable_name(&pred) {
            return self.error(format!("predicate name `{pred}` must not start with an uppercase letter"));
        }
        let mut args = Vec::new();
        if *self.peek() == Tok::LParen {
            self.next();
            loop {
                let a = self.ident("argument")?;
                args.push(if is_variable_name(&a) {
                    Term::var(&a)
                } else {
                    Term::constant(&a)
                });
                match self.peek() {
                    Tok::Comma => {
                        self.next();
                    }
                    Tok::RParen => {
                        self.next();
                        break;
                    }
                    other => return self.error(format!("expected `,` or `)`, found {other:?}")),
                }
            }
        }
        Ok(Literal::new(pred.as_str(), args))
    }

    fn clause(&mut self) -> Result<Clause> {
        let head = self.literal()?;
        let mut body = Vec::new();
        if *self.peek() == Tok::Neck {
            self.next();
            loop {
                body.push(self.literal()?);
                match self.peek() {
                    Tok::Comma => {
                        self.next();
                    }
                    Tok::Dot => break,
                    other => return self.error(format!("expected `,` or `.`, found {other:?}")),
                }
            }
        }
        self.expect(Tok::Dot, "`.`")?;
        Ok(Clause::new(head, body))
    }

    fn fact(&mut self) -> Result<Fact> {
        let (line, col) = (self.toks[self.pos].line, self.toks[self.pos].col);
        let lit = self.literal()?;
        self.expect(Tok::Dot, "`.`")?;
        lit.to_fact().ok_or_else(|| Error::Syntax {
            line,
            col,
            msg: format!("fact {lit} contains variables"),
        })
    }

    fn term(&mut self) -> Result<TermValue> {
        match self.peek().clone() {
            Tok::LBracket => {
                self.next();
                let mut items = Vec::new();
                let mut tail = None;
                if *self.peek() != Tok::RBracket {
                    loop {
                        items.push(self.term()?);
                        match self.peek() {
                            Tok::Comma => {
                                self.next();
                            }
                            Tok::Bar => {
                                self.next();
                                tail = Some(Box::new(self.term()?));
                                break;
                            }
                            _ => break,
                        }
                    }
                }
                self.expect(Tok::RBracket, "`]`")?;
                Ok(TermValue::List(items, tail))
            }
            Tok::Ident(name) => {
                self.next();
                if *self.peek() == Tok::LParen {
                    self.next();
                    let mut args = vec![self.term()?];
                    while *self.peek() == Tok::Comma {
                        self.next();
                        args.push(self.term()?);
                    }
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(TermValue::Compound(name, args))
                } else if is_variable_name(&name) {
                    Ok(TermValue::Var(name))
                } else {
                    Ok(TermValue::Atom(name))
                }
            }
            other => self.error(format!("expected a term, found {other:?}")),
        }
    }

    fn term_example(&mut self) -> Result<TermExample> {
        let pred = self.ident("predicate name")?;
        let mut args = Vec::new();
        if *self.peek() == Tok::LParen {
            self.next();
            args.push(self.term()?);
            while *self.peek() == Tok::Comma {
                self.next();
                args.push(self.term()?);
            }
            self.expect(Tok::RParen, "`)`")?;
        }
        self.expect(Tok::Dot, "`.`")?;
        Ok(TermExample { pred, args })
    }
}

/// Parses a single literal, e.g. `components(Xs,X,Xs1)`.
pub fn parse_literal(src: &str) -> Result<Literal> {
    let mut p = Parser::new(src, 1)?;
    let l = p.literal()?;
    if !p.at_eof() {
        return p.error("trailing input after literal");
    }
    Ok(l)
}

/// Parses a single ground fact; the trailing `.` is optional.
pub fn parse_fact(src: &str) -> Result<Fact> {
    let lit = parse_literal(src.trim().trim_end_matches('.'))?;
    lit.to_fact()
        .ok_or_else(|| Error::Invalid(format!("fact {lit} contains variables")))
}

pub fn parse_clause(src: &str) -> Result<Clause> {
    let mut p = Parser::new(src, 1)?;
    let c = p.clause()?;
    if !p.at_eof() {
        return p.error("trailing input after clause");
    }
    Ok(c)
}

/// Parses a sequence of clauses; order is preserved.
pub fn parse_program(src: &str) -> Result<Vec<Clause>> {
    let mut p = Parser::new(src, 1)?;
    let mut out = Vec::new();
    while !p.at_eof() {
        out.push(p.clause()?);
    }
    Ok(out)
}

fn facts_from(src: &str, first_line: usize) -> Result<Vec<Fact>> {
    let mut p = Parser::new(src, first_line)?;
    let mut out = Vec::new();
    while !p.at_eof() {
        out.push(p.fact()?);
    }
    Ok(out)
}

pub fn parse_facts(src: &str) -> Result<Vec<Fact>> {
    facts_from(src, 1)
}

pub fn parse_database(src: &str) -> Result<Database> {
    Ok(Database::new(parse_facts(src)?))
}

/// Parses a single mode in either `q(+,-)` or `q+-` notation.
pub fn parse_mode(src: &str) -> Result<Mode> {
    let s: String = src.trim().trim_end_matches('.').chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Invalid(format!("malformed mode `{src}`"));
    let (pred, signs) = match s.find('(') {
        Some(open) => {
            let inner = s[open + 1..].strip_suffix(')').ok_or_else(bad)?;
            (&s[..open], inner.replace(',', ""))
        }
        None => {
            let cut = s.find(['+', '-', '−']).ok_or_else(bad)?;
            (&s[..cut], s[cut..].to_string())
        }
    };
    if pred.is_empty() || !pred.chars().all(is_ident_char) || is_variable_name(pred) {
        return Err(bad());
    }
    Mode::parse_signs(pred, &signs).ok_or_else(bad)
}

fn strip_comment(line: &str) -> &str {
    match line.find('%') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        col,
        msg: msg.into(),
    }
}

/// Declaration file: a `head: p/a` line followed by `mode:` lines.
pub fn parse_declaration(src: &str) -> Result<Declaration> {
    let mut head: Option<(String, usize)> = None;
    let mut modes = Vec::new();
    for (n, raw) in src.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("head:") {
            let rest = rest.trim().trim_end_matches('.');
            let (p, a) = rest
                .split_once('/')
                .ok_or_else(|| syntax(n + 1, 1, "expected `head: name/arity`"))?;
            let arity = a
                .trim()
                .parse::<usize>()
                .map_err(|_| syntax(n + 1, 1, format!("bad arity `{a}`")))?;
            head = Some((p.trim().to_string(), arity));
        } else if let Some(rest) = line.strip_prefix("mode:") {
            let m = parse_mode(rest).map_err(|e| syntax(n + 1, 1, e.to_string()))?;
            modes.push(m);
        } else {
            return Err(syntax(n + 1, 1, format!("expected `head:` or `mode:`, found `{line}`")));
        }
    }
    let (p, a) = head.ok_or_else(|| syntax(1, 1, "declaration has no `head:` line"))?;
    Ok(Declaration::new(p.as_str(), a, modes))
}

/// Instance file: blocks of `fact:`, optional `label: +|-`, then `desc:` fact lines.
pub fn parse_instances(src: &str) -> Result<Vec<ExtendedInstance>> {
    let mut out: Vec<ExtendedInstance> = Vec::new();
    let mut in_desc = false;
    for (n, raw) in src.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("fact:") {
            let f = facts_from(rest, n + 1)?;
            if f.len() != 1 {
                return Err(syntax(n + 1, 1, "expected exactly one instance fact"));
            }
            out.push(ExtendedInstance::new(f[0].clone(), []));
            in_desc = false;
        } else if let Some(rest) = line.strip_prefix("label:") {
            let cur = out
                .last_mut()
                .ok_or_else(|| syntax(n + 1, 1, "`label:` before any `fact:`"))?;
            cur.label = Some(match rest.trim() {
                "+" => true,
                "-" | "−" => false,
                other => return Err(syntax(n + 1, 1, format!("bad label `{other}`"))),
            });
        } else if let Some(rest) = line.strip_prefix("desc:") {
            if out.is_empty() {
                return Err(syntax(n + 1, 1, "`desc:` before any `fact:`"));
            }
            in_desc = true;
            let cur = out.last_mut().unwrap();
            cur.description.extend(facts_from(rest, n + 1)?);
        } else if in_desc {
            let cur = out.last_mut().unwrap();
            cur.description.extend(facts_from(line, n + 1)?);
        } else {
            return Err(syntax(n + 1, 1, format!("unexpected line `{line}`")));
        }
    }
    Ok(out)
}

/// Term-level examples, one per `.`-terminated entry.
pub fn parse_term_examples(src: &str) -> Result<Vec<TermExample>> {
    let mut p = Parser::new(src, 1)?;
    let mut out = Vec::new();
    while !p.at_eof() {
        out.push(p.term_example()?);
    }
    Ok(out)
}

pub fn serialize_facts<'a>(facts: impl IntoIterator<Item = &'a Fact>) -> String {
    let mut sorted: Vec<&Fact> = facts.into_iter().collect();
    sorted.sort();
    sorted.dedup();
    let mut s = String::new();
    for f in sorted {
        let _ = writeln!(s, "{f}.");
    }
    s
}

pub fn serialize_program(program: &[Clause]) -> String {
    let mut s = String::new();
    for c in program {
        let _ = writeln!(s, "{c}");
    }
    s
}

pub fn serialize_declaration(dec: &Declaration) -> String {
    let mut s = format!("head: {}/{}\n", dec.head, dec.arity);
    for m in dec.modes() {
        let _ = writeln!(s, "mode: {m}");
    }
    s
}

pub fn serialize_instance(inst: &ExtendedInstance) -> String {
    let mut s = format!("fact: {}.\n", inst.fact);
    if let Some(l) = inst.label {
        let _ = writeln!(s, "label: {}", if l { '+' } else { '-' });
    }
    s.push_str("desc:\n");
    s.push_str(&serialize_facts(&inst.description));
    s
}

pub fn serialize_instances(pool: &[ExtendedInstance]) -> String {
    pool.iter().map(serialize_instance).collect::<Vec<_>>().join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clause_round_trip() {
        let src = "append(Xs,Ys,Ys) :- null(Xs).\nappend(Xs,Ys,Zs) :- components(Xs,X,Xs1), components(Zs,X,Zs1), append(Xs1,Ys,Zs1).\n";
        let prog = parse_program(src).unwrap();
        assert_eq!(prog.len(), 2);
        assert_eq!(prog[1].body[2].to_string(), "append(Xs1,Ys,Zs1)");
        assert_eq!(serialize_program(&prog), src);
    }

    #[test]
    fn alternative_connectives() {
        let c = parse_clause("p(X,Y) ← q(X,Z) ∧ r(Z,Y).").unwrap();
        assert_eq!(c.to_string(), "p(X,Y) :- q(X,Z), r(Z,Y).");
        let c = parse_clause("p(X) <- q(X).").unwrap();
        assert_eq!(c.body.len(), 1);
    }

    #[test]
    fn syntax_errors_are_positioned() {
        match parse_program("p(X) :- q(X).\np(X :- q(X).") {
            Err(Error::Syntax { line, col, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(col, 5);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_facts("p(X)."), Err(Error::Syntax { line: 1, .. })));
        assert!(matches!(parse_program("p(a) :- q(a) r."), Err(Error::Syntax { .. })));
    }

    #[test]
    fn empty_facts_file() {
        assert!(parse_database("% nothing here\n").unwrap().is_empty());
    }

    #[test]
    fn declaration_round_trip() {
        let src = "head: append/3\nmode: components(+,-,-)\nmode: null(+)\nmode: equal(+,+)\nmode: odd(+)\nmode: append(+,+,+)\n";
        let dec = parse_declaration(src).unwrap();
        assert_eq!(dec.size(), 5);
        assert_eq!(serialize_declaration(&dec), src);
        let compact = parse_declaration("head: p/1\nmode: q+-\n").unwrap();
        assert_eq!(format!("{:?}", compact.modes()[0]), "q+-");
    }

    #[test]
    fn instance_round_trip() {
        let src = "fact: append(l12,l3,l123).\nlabel: +\ndesc:\ncomponents(l12,1,l2).\ncomponents(l2,2,nil).\n";
        let pool = parse_instances(src).unwrap();
        assert_eq!(pool.len(), 1);
        assert_eq!(pool[0].label, Some(true));
        assert_eq!(pool[0].size(), 2);
        assert_eq!(serialize_instances(&pool), src);
    }

    #[test]
    fn term_examples() {
        let ex = parse_term_examples("append([1,2],[3],[1,2,3]).\nappend([],[],[]).").unwrap();
        assert_eq!(ex.len(), 2);
        assert_eq!(ex[0].args[0], TermValue::List(vec![TermValue::Atom("1".into()), TermValue::Atom("2".into())], None));
        let ex = parse_term_examples("p([a|[b]], f(x)).").unwrap();
        assert!(matches!(ex[0].args[1], TermValue::Compound(..)));
    }
}
