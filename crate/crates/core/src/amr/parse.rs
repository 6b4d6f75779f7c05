use std::collections::HashSet;

use super::{validate, AmrError, AmrGraph, Attribute, Constant, Edge, Node, ViolationCode};

#[derive(Debug, Clone, PartialEq)]
enum Token<'a> {
    Open,
    Close,
    Slash,
    Role(&'a str),
    Quoted(String),
    Symbol(&'a str),
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src, pos: 0 }
    }

    fn err(&self, offset: usize, message: impl Into<String>) -> AmrError {
        AmrError::Syntax { offset, message: message.into() }
    }

    fn skip_trivia(&mut self) {
        let bytes = self.src.as_bytes();
        loop {
            while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            // `# ::snt ...` metadata lines
            if self.pos < bytes.len() && bytes[self.pos] == b'#' {
                while self.pos < bytes.len() && bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
    }

    fn next(&mut self) -> Result<Option<(usize, Token<'a>)>, AmrError> {
        self.skip_trivia();
        let bytes = self.src.as_bytes();
        let start = self.pos;
        let Some(&b) = bytes.get(start) else {
            return Ok(None);
        };
        let token = match b {
            b'(' => {
                self.pos += 1;
                Token::Open
            }
            b')' => {
                self.pos += 1;
                Token::Close
            }
            b'/' => {
                self.pos += 1;
                Token::Slash
            }
            b'"' => {
                let mut value = String::new();
                let mut chars = self.src[start + 1..].char_indices();
                loop {
                    match chars.next() {
                        None => return Err(self.err(start, "unterminated string")),
                        Some((i, '"')) => {
                            self.pos = start + 1 + i + 1;
                            break;
                        }
                        Some((_, '\\')) => match chars.next() {
                            Some((_, c)) => value.push(c),
                            None => return Err(self.err(start, "unterminated string")),
                        },
                        Some((_, c)) => value.push(c),
                    }
                }
                Token::Quoted(value)
            }
            _ => {
                let end = self.src[start..]
                    .find(|c: char| c.is_whitespace() || matches!(c, '(' | ')' | '"'))
                    .map_or(self.src.len(), |i| start + i);
                self.pos = end;
                let text = &self.src[start..end];
                if let Some(name) = text.strip_prefix(':') {
                    if name.is_empty() {
                        return Err(self.err(start, "empty role name"));
                    }
                    Token::Role(text)
                } else {
                    Token::Symbol(text)
                }
            }
        };
        Ok(Some((start, token)))
    }
}

enum Value<'a> {
    Node(String),
    Reference(&'a str),
    Constant(Constant),
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    peeked: Option<(usize, Token<'a>)>,
    nodes: Vec<Node>,
    declared: HashSet<String>,
    items: Vec<(String, String, Value<'a>, usize)>,
}

impl<'a> Parser<'a> {
    fn peek(&mut self) -> Result<Option<&(usize, Token<'a>)>, AmrError> {
        if self.peeked.is_none() {
            self.peeked = self.lexer.next()?;
        }
        Ok(self.peeked.as_ref())
    }

    fn bump(&mut self) -> Result<Option<(usize, Token<'a>)>, AmrError> {
        match self.peeked.take() {
            Some(t) => Ok(Some(t)),
            None => self.lexer.next(),
        }
    }

    fn eof_offset(&self) -> usize {
        self.lexer.src.len()
    }

    fn expect_open(&mut self) -> Result<(), AmrError> {
        match self.bump()? {
            Some((_, Token::Open)) => Ok(()),
            Some((at, t)) => Err(self.lexer.err(at, format!("expected `(`, found {t:?}"))),
            None => Err(self.lexer.err(self.eof_offset(), "expected `(`, found end of input")),
        }
    }

    /// Parses `( var / concept (role value)* )`, the opening paren included.
    fn node(&mut self) -> Result<String, AmrError> {
        self.expect_open()?;
        let variable = match self.bump()? {
            Some((_, Token::Symbol(v))) => v.to_string(),
            Some((at, t)) => return Err(self.lexer.err(at, format!("expected variable, found {t:?}"))),
            None => return Err(self.lexer.err(self.eof_offset(), "expected variable")),
        };
        match self.bump()? {
            Some((_, Token::Slash)) => {}
            Some((at, _)) => return Err(self.lexer.err(at, format!("expected `/` after `{variable}`"))),
            None => return Err(self.lexer.err(self.eof_offset(), "expected `/`")),
        }
        let concept = match self.bump()? {
            Some((_, Token::Symbol(c))) => c.to_string(),
            Some((at, _)) => return Err(self.lexer.err(at, format!("missing concept after `{variable} /`"))),
            None => return Err(self.lexer.err(self.eof_offset(), "missing concept")),
        };
        if !self.declared.insert(variable.clone()) {
            return Err(AmrError::DuplicateVariable(variable));
        }
        self.nodes.push(Node { variable: variable.clone(), concept });

        loop {
            match self.bump()? {
                Some((_, Token::Close)) => return Ok(variable),
                Some((at, Token::Role(role))) => {
                    let value = match self.peek()? {
                        Some((_, Token::Open)) => Value::Node(self.node()?),
                        Some((_, Token::Quoted(_))) => match self.bump()? {
                            Some((_, Token::Quoted(s))) => Value::Constant(Constant::text(s)),
                            _ => unreachable!(),
                        },
                        Some((_, Token::Symbol(_))) => match self.bump()? {
                            Some((_, Token::Symbol(s))) => classify_symbol(s),
                            _ => unreachable!(),
                        },
                        Some(&(vat, _)) => return Err(self.lexer.err(vat, format!("missing value for role `{role}`"))),
                        None => return Err(self.lexer.err(self.eof_offset(), "unbalanced parentheses")),
                    };
                    self.items.push((variable.clone(), role.to_string(), value, at));
                }
                Some((at, t)) => return Err(self.lexer.err(at, format!("expected role or `)`, found {t:?}"))),
                None => return Err(self.lexer.err(self.eof_offset(), "unbalanced parentheses")),
            }
        }
    }
}

fn classify_symbol(s: &str) -> Value<'_> {
    if s == "-" {
        return Value::Constant(Constant::minus());
    }
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    if digits.starts_with(|c: char| c.is_ascii_digit() || c == '.') && s.parse::<f64>().is_ok() {
        return Value::Constant(Constant::number(s));
    }
    Value::Reference(s)
}

/// Parses a single PENMAN expression.
///
/// A bare symbol after a role is a reference to a variable declared
/// somewhere in the same expression (before or after the reference). The
/// exceptions are `-`, numbers, `+`, and the value of `:mode`, which are
/// constants.
pub fn parse(text: &str) -> Result<AmrGraph, AmrError> {
    let mut parser = Parser {
        lexer: Lexer::new(text),
        peeked: None,
        nodes: Vec::new(),
        declared: HashSet::new(),
        items: Vec::new(),
    };
    let root = parser.node()?;
    if let Some((at, _)) = parser.bump()? {
        return Err(parser.lexer.err(at, "trailing input after the root expression"));
    }

    let mut edges = Vec::new();
    let mut attributes = Vec::new();
    for (source, role, value, _) in parser.items {
        match value {
            Value::Node(target) => edges.push(Edge { source, role, target }),
            Value::Constant(value) => attributes.push(Attribute { source, role, value }),
            Value::Reference(name) if parser.declared.contains(name) => {
                edges.push(Edge { source, role, target: name.to_string() })
            }
            Value::Reference(name) if name == "+" || role == ":mode" => {
                attributes.push(Attribute { source, role, value: Constant::symbol(name) })
            }
            Value::Reference(name) => return Err(AmrError::UndeclaredVariable(name.to_string())),
        }
    }

    let graph = AmrGraph::from_parts(root, parser.nodes, edges, attributes);
    let report = validate(&graph);
    if let Some(v) = report.violations.iter().find(|v| v.code == ViolationCode::Cycle) {
        return Err(AmrError::Cycle(v.subject.clone()));
    }
    if !report.ok {
        return Err(AmrError::Invalid(report));
    }
    Ok(graph.canonicalized())
}
