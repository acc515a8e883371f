//! The line-oriented automaton file format and the `u ; v` word syntax.
//!
//! ```text
//! automaton session
//! state q0 []
//! state q1 [x]
//! init q0 {}
//! accept {q0,q1}
//! trans q0 * q1 {x=*}
//! trans q1 * q1 {x=x}
//! trans q1 x q0 {}
//! ```
//!
//! `#` followed by whitespace (or as the first character of a line) starts a
//! comment; elsewhere it is an ordinary token character, so generated names
//! such as `#0` can appear in files.

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::automaton::{
    validate, AcceptingCondition, Automaton, AutomatonDesc, InitDesc, Label, StateDesc,
    TransitionDesc, Violations,
};
use crate::config::{UpWord, WordError};
use crate::decision;
use crate::name::{is_token, Name};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("invalid automaton:\n{0}")]
    Invalid(#[from] Violations),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Star,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Eq,
    Comma,
    ComplementOf,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "'{s}'"),
            Tok::Star => f.write_str("'*'"),
            Tok::LBracket => f.write_str("'['"),
            Tok::RBracket => f.write_str("']'"),
            Tok::LBrace => f.write_str("'{'"),
            Tok::RBrace => f.write_str("'}'"),
            Tok::Eq => f.write_str("'='"),
            Tok::Comma => f.write_str("','"),
            Tok::ComplementOf => f.write_str("'complement-of'"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn is_token_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '#'
}

fn tokenize(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let first_nonblank = chars.iter().position(|c| !c.is_whitespace());
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let (line_no, column) = (li + 1, i + 1);
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c == '#'
                && (Some(i) == first_nonblank || chars.get(i + 1).is_none_or(|n| n.is_whitespace()))
            {
                break;
            }
            let simple = match c {
                '*' => Some(Tok::Star),
                '[' => Some(Tok::LBracket),
                ']' => Some(Tok::RBracket),
                '{' => Some(Tok::LBrace),
                '}' => Some(Tok::RBrace),
                '=' => Some(Tok::Eq),
                ',' => Some(Tok::Comma),
                _ => None,
            };
            if let Some(tok) = simple {
                out.push(Spanned {
                    tok,
                    line: line_no,
                    column,
                });
                i += 1;
                continue;
            }
            if is_token_char(c) {
                let start = i;
                while i < chars.len() && (is_token_char(chars[i]) || chars[i] == '-') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let tok = if word == "complement-of" {
                    Tok::ComplementOf
                } else if word.contains('-') {
                    return Err(ParseError {
                        line: line_no,
                        column,
                        message: format!("invalid token '{word}'"),
                    });
                } else {
                    Tok::Ident(word)
                };
                out.push(Spanned {
                    tok,
                    line: line_no,
                    column,
                });
                continue;
            }
            return Err(ParseError {
                line: line_no,
                column,
                message: format!("unexpected character '{c}'"),
            });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map_or(self.end, |s| (s.line, s.column))
    }

    fn error(&self, expected: &str) -> ParseError {
        let (line, column) = self.here();
        let found = self
            .peek()
            .map_or_else(|| "end of input".to_string(), ToString::to_string);
        ParseError {
            line,
            column,
            message: format!("expected {expected}, found {found}"),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&tok.to_string()))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error(what)),
        }
    }

    fn ident_or_star(&mut self, what: &str) -> Result<Option<String>, ParseError> {
        if self.eat(&Tok::Star) {
            Ok(None)
        } else {
            self.ident(what).map(Some)
        }
    }

    /// `{ (k = v (, k = v)*)? }`
    fn bindings<T>(
        &mut self,
        value: impl Fn(&mut Self) -> Result<T, ParseError>,
    ) -> Result<Vec<(String, T)>, ParseError> {
        self.expect(Tok::LBrace)?;
        let mut out = Vec::new();
        if self.eat(&Tok::RBrace) {
            return Ok(out);
        }
        loop {
            let key = self.ident("a register")?;
            self.expect(Tok::Eq)?;
            out.push((key, value(self)?));
            if self.eat(&Tok::RBrace) {
                return Ok(out);
            }
            if !self.eat(&Tok::Comma) {
                return Err(self.error("',' or '}'"));
            }
        }
    }

    fn state_set(&mut self) -> Result<Vec<String>, ParseError> {
        self.expect(Tok::LBrace)?;
        let mut out = Vec::new();
        if self.eat(&Tok::RBrace) {
            return Ok(out);
        }
        loop {
            out.push(self.ident("a state")?);
            if self.eat(&Tok::RBrace) {
                return Ok(out);
            }
            if !self.eat(&Tok::Comma) {
                return Err(self.error("',' or '}'"));
            }
        }
    }
}

/// Parses the textual format into an unchecked description.
pub fn parse_automaton(text: &str) -> Result<AutomatonDesc, ParseError> {
    let toks = tokenize(text)?;
    let end = (text.lines().count() + 1, 1);
    let mut p = Parser { toks, pos: 0, end };

    match p.peek() {
        Some(Tok::Ident(k)) if k == "automaton" => p.pos += 1,
        _ => return Err(p.error("'automaton'")),
    }
    let name = p.ident("an automaton name")?;
    let mut desc = AutomatonDesc {
        name,
        ..Default::default()
    };
    let mut init: Option<InitDesc> = None;
    let mut accept_kind: Option<bool> = None;

    while p.peek().is_some() {
        let (line, column) = p.here();
        let keyword = p.ident("'state', 'init', 'accept' or 'trans'")?;
        match keyword.as_str() {
            "state" => {
                let name = p.ident("a state name")?;
                p.expect(Tok::LBracket)?;
                let mut registers = Vec::new();
                while !p.eat(&Tok::RBracket) {
                    registers.push(p.ident("a register or ']'")?);
                }
                desc.states.push(StateDesc { name, registers });
            }
            "init" => {
                if init.is_some() {
                    return Err(ParseError {
                        line,
                        column,
                        message: "expected exactly one init, found a second one".into(),
                    });
                }
                let state = p.ident("a state name")?;
                let assignment = p.bindings(|p| p.ident("a name"))?;
                init = Some(InitDesc { state, assignment });
            }
            "accept" => {
                let negated = p.eat(&Tok::ComplementOf);
                if accept_kind.is_some_and(|k| k != negated) {
                    return Err(ParseError {
                        line,
                        column,
                        message: "cannot mix 'accept' and 'accept complement-of' lines".into(),
                    });
                }
                accept_kind = Some(negated);
                desc.accept.negated = negated;
                desc.accept.sets.push(p.state_set()?);
                while p.peek() == Some(&Tok::LBrace) {
                    desc.accept.sets.push(p.state_set()?);
                }
            }
            "trans" => {
                let source = p.ident("a source state")?;
                let label = p.ident_or_star("a register label or '*'")?;
                let target = p.ident("a target state")?;
                let history = p.bindings(|p| p.ident_or_star("a source register or '*'"))?;
                desc.transitions.push(TransitionDesc {
                    source,
                    label,
                    target,
                    history,
                });
            }
            _ => {
                return Err(ParseError {
                    line,
                    column,
                    message: format!(
                        "expected 'state', 'init', 'accept' or 'trans', found '{keyword}'"
                    ),
                })
            }
        }
    }

    desc.init = init.ok_or_else(|| ParseError {
        line: end.0,
        column: end.1,
        message: "expected exactly one init, found none".into(),
    })?;
    Ok(desc)
}

/// Parses and validates.
pub fn load_automaton(text: &str) -> Result<Automaton, LoadError> {
    Ok(validate(&parse_automaton(text)?)?)
}

/// Conditions that are not explicit (or the complement of an explicit family)
/// are exported as the family of accepted sets that can occur as an Inf set;
/// this refuses to enumerate more than this many candidate sets.
pub const EXPORT_LIMIT: usize = 50_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("accepting condition too large to export ({0} candidate sets or more)")]
pub struct ExportError(pub usize);

fn write_sets(
    out: &mut String,
    a: &Automaton,
    sets: &std::collections::BTreeSet<std::collections::BTreeSet<usize>>,
) {
    for (i, set) in sets.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let names: Vec<&str> = set.iter().map(|&q| a.state_name(q)).collect();
        let _ = write!(out, "{{{}}}", names.join(","));
    }
}

/// Writes an automaton in the textual format.
pub fn serialize_automaton(a: &Automaton) -> Result<String, ExportError> {
    let mut out = String::new();
    let _ = writeln!(out, "automaton {}", a.name());
    for s in a.states() {
        let regs: Vec<&str> = s.registers.iter().map(|r| r.as_str()).collect();
        let _ = writeln!(out, "state {} [{}]", s.name, regs.join(" "));
    }
    let q0 = a.state(a.initial());
    let init: Vec<String> = q0
        .registers
        .iter()
        .map(|r| format!("{r}={}", a.initial_assignment()[r]))
        .collect();
    let _ = writeln!(out, "init {} {{{}}}", q0.name, init.join(", "));

    match a.accepting() {
        AcceptingCondition::Explicit(sets) => {
            if !sets.is_empty() {
                out.push_str("accept ");
                write_sets(&mut out, a, sets);
                out.push('\n');
            }
        }
        AcceptingCondition::Negated(inner)
            if matches!(**inner, AcceptingCondition::Explicit(_)) =>
        {
            let AcceptingCondition::Explicit(sets) = &**inner else {
                unreachable!()
            };
            out.push_str("accept complement-of ");
            if sets.is_empty() {
                out.push_str("{}");
            } else {
                write_sets(&mut out, a, sets);
            }
            out.push('\n');
        }
        cond => {
            let sets = decision::accepted_inf_sets(a, cond, EXPORT_LIMIT)
                .ok_or(ExportError(EXPORT_LIMIT))?;
            if !sets.is_empty() {
                out.push_str("accept ");
                write_sets(&mut out, a, &sets);
                out.push('\n');
            }
        }
    }

    for t in a.transitions() {
        let target = a.state(t.target);
        let history: Vec<String> = target
            .registers
            .iter()
            .filter_map(|r| t.history.get(r).map(|s| format!("{r}={s}")))
            .collect();
        let label = match &t.label {
            Label::Reg(r) => r.to_string(),
            Label::Star => "*".into(),
        };
        let _ = writeln!(
            out,
            "trans {} {} {} {{{}}}",
            a.state_name(t.source),
            label,
            target.name,
            history.join(", ")
        );
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordParseError {
    #[error("expected exactly one ';' separating prefix and period")]
    Separator,
    #[error("invalid name {0:?}")]
    Token(String),
    #[error(transparent)]
    Word(#[from] WordError),
}

fn names(text: &str) -> Result<Vec<Name>, WordParseError> {
    text.split_whitespace()
        .map(|t| {
            if is_token(t) {
                Ok(Name::new(t).expect("checked token"))
            } else {
                Err(WordParseError::Token(t.to_string()))
            }
        })
        .collect()
}

/// Parses a finite word of whitespace-separated names.
pub fn parse_word(text: &str) -> Result<Vec<Name>, WordParseError> {
    names(text)
}

/// Parses `u ; v` into the word `u·v^ω`.
pub fn parse_upword(text: &str) -> Result<UpWord, WordParseError> {
    let mut parts = text.split(';');
    let (Some(u), Some(v), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(WordParseError::Separator);
    };
    Ok(UpWord::new(names(u)?, names(v)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn normalize(s: &str) -> Vec<String> {
        s.lines()
            .map(|l| l.split_whitespace().collect::<Vec<_>>().join(" "))
            .filter(|l| !l.is_empty())
            .collect()
    }

    #[test]
    fn session_round_trips() {
        let a = load_automaton(fixtures::SESSION).unwrap();
        let text = serialize_automaton(&a).unwrap();
        assert_eq!(normalize(&text), normalize(fixtures::SESSION));
    }

    #[test]
    fn universal_parses() {
        let a = load_automaton(fixtures::UNIVERSAL).unwrap();
        assert_eq!(a.num_states(), 1);
    }

    #[test]
    fn missing_init() {
        let err = parse_automaton("automaton x\nstate q0 []\ntrans q0 * q0 {}\n").unwrap_err();
        assert!(err.message.contains("expected exactly one init"), "{err}");
    }

    #[test]
    fn duplicate_init() {
        let err =
            parse_automaton("automaton x\nstate q0 []\ninit q0 {}\ninit q0 {}\n").unwrap_err();
        assert!(err.message.contains("expected exactly one init"));
        assert_eq!((err.line, err.column), (4, 1));
    }

    #[test]
    fn positioned_errors() {
        let err = parse_automaton("automaton x\nstate q0 [\ninit q0 {x=}\n").unwrap_err();
        assert_eq!(err.line, 3);
        let err = parse_automaton("automaton x\ntrans q0 * q0 {x y}\n").unwrap_err();
        assert_eq!((err.line, err.column), (2, 18));
        assert!(err.message.starts_with("expected '='"), "{err}");
        let err = parse_automaton("automaton x\nstate q0 [] ; \n").unwrap_err();
        assert_eq!((err.line, err.column), (2, 13));
    }

    #[test]
    fn comments_and_fresh_names() {
        let text = "# leading comment\nautomaton x # trailing\nstate q0 [r]\n  # indented\ninit q0 {r=#0}\naccept {q0}\ntrans q0 r q0 {r=r}\ntrans q0 * q0 {r=r}\n";
        let a = load_automaton(text).unwrap();
        assert_eq!(
            a.initial_assignment().values().next().unwrap().as_str(),
            "#0"
        );
    }

    #[test]
    fn complement_round_trip() {
        let text =
            "automaton x\nstate q0 []\ninit q0 {}\naccept complement-of {q0}\ntrans q0 * q0 {}\n";
        let a = load_automaton(text).unwrap();
        assert!(matches!(a.accepting(), AcceptingCondition::Negated(_)));
        let out = serialize_automaton(&a).unwrap();
        assert!(out.contains("accept complement-of {q0}"));
        let err =
            parse_automaton("automaton x\ninit q0 {}\naccept {q0}\naccept complement-of {q0}\n")
                .unwrap_err();
        assert!(err.message.contains("mix"));
    }

    #[test]
    fn repeated_accept_lines_union() {
        let text =
            "automaton x\nstate q0 []\ninit q0 {}\naccept {q0}\naccept {} {q0}\ntrans q0 * q0 {}\n";
        let desc = parse_automaton(text).unwrap();
        assert_eq!(desc.accept.sets.len(), 3);
    }

    #[test]
    fn upwords() {
        let w = parse_upword("; a a").unwrap();
        assert!(w.prefix().is_empty());
        assert_eq!(w.period().len(), 2);
        let w = parse_upword("a ; b").unwrap();
        assert_eq!(w.prefix().len(), 1);
        assert_eq!(
            parse_upword("a ;"),
            Err(WordParseError::Word(WordError::EmptyPeriod))
        );
        assert_eq!(parse_upword("a b"), Err(WordParseError::Separator));
        assert!(matches!(
            parse_upword("; a-b"),
            Err(WordParseError::Token(_))
        ));
    }
}
