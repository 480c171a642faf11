//! Line protocol between a learner and a teacher process.
//!
//! ```text
//! EQ                      -> YES
//! <clause lines>             or CEX + | CEX -
//! .                          <instance lines>
//!                            .
//! BASECASE                -> YES | NO
//! <instance lines>
//! .
//! MEMBER <fact>           -> YES | NO
//! MEMBER                  -> YES | NO
//! <instance lines>
//! .
//! QUIT
//! ```
//!
//! Any request that cannot be served is answered with `ERR <message>`.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::ingest::parse::{parse_fact, parse_instances, parse_program, serialize_instance, serialize_program};
use crate::learner::{BasecaseOracle, EqAnswer, EquivalenceOracle, Hypothesis, MembershipOracle};
use crate::lp::{ExtendedInstance, Fact};
use crate::teacher::Teacher;

fn read_block(input: &mut impl BufRead) -> Result<String> {
    let mut block = String::new();
    loop {
        let mut line = String::new();
        if input.read_line(&mut line)? == 0 {
            return Err(Error::Teacher("unexpected end of input inside a block".into()));
        }
        if line.trim() == "." {
            return Ok(block);
        }
        block.push_str(&line);
    }
}

fn hypothesis_from(program: Vec<crate::lp::Clause>) -> Result<Hypothesis> {
    let mut it = program.into_iter();
    match (it.next(), it.next(), it.next()) {
        (Some(c), None, None) => Ok(Hypothesis::Single(c)),
        (Some(recursive), Some(base), None) => Ok(Hypothesis::Pair { recursive, base }),
        _ => Err(Error::Invalid("a hypothesis has one or two clauses".into())),
    }
}

fn one_instance(src: &str) -> Result<ExtendedInstance> {
    let mut v = parse_instances(src)?;
    if v.len() != 1 {
        return Err(Error::Invalid(format!("expected one instance, got {}", v.len())));
    }
    Ok(v.remove(0))
}

/// Serves requests until `QUIT` or end of input.
pub fn serve(teacher: &mut Teacher, input: &mut impl BufRead, output: &mut impl Write) -> Result<()> {
    loop {
        let mut line = String::new();
        if input.read_line(&mut line)? == 0 {
            return Ok(());
        }
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (cmd, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let reply: Result<String> = match cmd {
            "QUIT" => return Ok(()),
            "EQ" => read_block(input).and_then(|b| {
                let h = hypothesis_from(parse_program(&b)?)?;
                Ok(match teacher.equivalent(&h)? {
                    EqAnswer::Yes => "YES\n".to_string(),
                    EqAnswer::Counterexample { instance, positive } => {
                        let sign = if positive { '+' } else { '-' };
                        let plain = instance.with_fact(instance.fact.clone());
                        format!("CEX {sign}\n{}.\n", serialize_instance(&plain))
                    }
                })
            }),
            "BASECASE" => read_block(input).and_then(|b| {
                let inst = one_instance(&b)?;
                Ok(if teacher.basecase(&inst)? { "YES\n" } else { "NO\n" }.to_string())
            }),
            "MEMBER" => {
                let inst = if rest.trim().is_empty() {
                    read_block(input).and_then(|b| one_instance(&b))
                } else {
                    parse_fact(rest.trim()).map(|f| ExtendedInstance::new(f, []))
                };
                inst.and_then(|i| {
                    Ok(if teacher.member(&i.fact, &i.description)? { "YES\n" } else { "NO\n" }.to_string())
                })
            }
            other => Err(Error::Invalid(format!("unknown request `{other}`"))),
        };
        match reply {
            Ok(s) => output.write_all(s.as_bytes())?,
            Err(e) => writeln!(output, "ERR {}", e.to_string().replace('\n', " "))?,
        }
        output.flush()?;
    }
}

/// Client side: forwards oracle calls over the protocol.
pub struct ProtocolTeacher<R, W> {
    input: R,
    output: W,
}

impl<R: BufRead, W: Write> ProtocolTeacher<R, W> {
    pub fn new(input: R, output: W) -> Self {
        ProtocolTeacher { input, output }
    }

    fn reply_line(&mut self) -> Result<String> {
        let mut line = String::new();
        if self.input.read_line(&mut line)? == 0 {
            return Err(Error::Teacher("teacher closed the connection".into()));
        }
        let line = line.trim().to_string();
        if let Some(msg) = line.strip_prefix("ERR") {
            return Err(Error::Teacher(msg.trim().to_string()));
        }
        Ok(line)
    }

    fn yes_no(&mut self) -> Result<bool> {
        match self.reply_line()?.as_str() {
            "YES" => Ok(true),
            "NO" => Ok(false),
            other => Err(Error::Teacher(format!("unexpected reply `{other}`"))),
        }
    }

    pub fn quit(mut self) -> Result<()> {
        self.output.write_all(b"QUIT\n")?;
        self.output.flush()?;
        Ok(())
    }
}

impl<R: BufRead, W: Write> EquivalenceOracle for ProtocolTeacher<R, W> {
    fn equivalent(&mut self, h: &Hypothesis) -> Result<EqAnswer> {
        write!(self.output, "EQ\n{}.\n", serialize_program(&h.program()))?;
        self.output.flush()?;
        let line = self.reply_line()?;
        if line == "YES" {
            return Ok(EqAnswer::Yes);
        }
        let positive = match line.as_str() {
            "CEX +" => true,
            "CEX -" => false,
            other => return Err(Error::Teacher(format!("unexpected reply `{other}`"))),
        };
        let block = read_block(&mut self.input)?;
        let instance = one_instance(&block)?.labelled(positive);
        Ok(EqAnswer::Counterexample { instance, positive })
    }
}

impl<R: BufRead, W: Write> BasecaseOracle for ProtocolTeacher<R, W> {
    fn basecase(&mut self, instance: &ExtendedInstance) -> Result<bool> {
        let plain = instance.with_fact(instance.fact.clone());
        write!(self.output, "BASECASE\n{}.\n", serialize_instance(&plain))?;
        self.output.flush()?;
        self.yes_no()
    }
}

impl<R: BufRead, W: Write> MembershipOracle for ProtocolTeacher<R, W> {
    fn member(&mut self, fact: &Fact, description: &BTreeSet<Fact>) -> Result<bool> {
        if description.is_empty() {
            writeln!(self.output, "MEMBER {fact}.")?;
        } else {
            let inst = ExtendedInstance::new(fact.clone(), description.iter().cloned());
            write!(self.output, "MEMBER\n{}.\n", serialize_instance(&inst))?;
        }
        self.output.flush()?;
        self.yes_no()
    }
}
