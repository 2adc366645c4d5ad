use thiserror::Error;

use super::{is_keyword, BooleanQuery, Node};
use crate::kos::normalize_term;

/// Parse failure; `position` counts characters from the start of the input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at position {position}: {message}")]
pub struct SyntaxError {
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Quoted(String),
    Open,
    Close,
    And,
    Or,
}

fn error(position: usize, message: impl Into<String>) -> SyntaxError {
    SyntaxError {
        position,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, SyntaxError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '(' {
            out.push((Tok::Open, i));
            i += 1;
        } else if c == ')' {
            out.push((Tok::Close, i));
            i += 1;
        } else if c == '"' {
            let start = i;
            let mut s = String::new();
            i += 1;
            loop {
                match chars.get(i) {
                    None => return Err(error(start, "unterminated quoted phrase")),
                    Some('"') => break,
                    Some('\\') if matches!(chars.get(i + 1), Some('"' | '\\')) => {
                        s.push(chars[i + 1]);
                        i += 2;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            i += 1;
            out.push((Tok::Quoted(s), start));
        } else {
            let start = i;
            while i < chars.len() && !chars[i].is_whitespace() && !matches!(chars[i], '(' | ')' | '"') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            let tok = if word.eq_ignore_ascii_case("and") {
                Tok::And
            } else if word.eq_ignore_ascii_case("or") {
                Tok::Or
            } else {
                Tok::Word(word)
            };
            debug_assert!(!matches!(&tok, Tok::Word(w) if is_keyword(w)));
            out.push((tok, start));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn position(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(_, p)| *p)
    }

    fn or_expr(&mut self) -> Result<Node, SyntaxError> {
        let mut items = vec![self.and_expr()?];
        while self.peek() == Some(&Tok::Or) {
            self.at += 1;
            items.push(self.and_expr()?);
        }
        Ok(Node::or(items))
    }

    fn and_expr(&mut self) -> Result<Node, SyntaxError> {
        let mut items = vec![self.primary()?];
        loop {
            match self.peek() {
                Some(Tok::And) => {
                    self.at += 1;
                    items.push(self.primary()?);
                }
                Some(Tok::Word(_) | Tok::Quoted(_) | Tok::Open) => items.push(self.primary()?),
                _ => break,
            }
        }
        Ok(Node::and(items))
    }

    fn primary(&mut self) -> Result<Node, SyntaxError> {
        let position = self.position();
        match self.peek().cloned() {
            Some(Tok::Open) => {
                self.at += 1;
                let inner = self.or_expr()?;
                if self.peek() != Some(&Tok::Close) {
                    return Err(error(self.position(), "expected ')'"));
                }
                self.at += 1;
                Ok(inner)
            }
            Some(Tok::Word(_)) => {
                let mut words = Vec::new();
                while let Some(Tok::Word(w)) = self.peek() {
                    words.push(w.clone());
                    self.at += 1;
                }
                let term = normalize_term(&words.join(" ")).map_err(|e| error(position, e.to_string()))?;
                Ok(Node::leaf(term))
            }
            Some(Tok::Quoted(s)) => {
                self.at += 1;
                let term = normalize_term(&s).map_err(|_| error(position, "empty quoted phrase"))?;
                Ok(Node::leaf(term))
            }
            Some(Tok::Close) => Err(error(position, "unexpected ')'")),
            Some(Tok::And | Tok::Or) => Err(error(position, "operator without left operand")),
            None => Err(error(position, "expected a term or '('")),
        }
    }
}

/// Parses query text into an associatively normalized tree.
pub fn parse_query(text: &str) -> Result<BooleanQuery, SyntaxError> {
    let toks = lex(text)?;
    let end = text.chars().count();
    if toks.is_empty() {
        return Err(error(end, "empty query"));
    }
    let mut parser = Parser { toks, at: 0, end };
    let root = parser.or_expr()?;
    if parser.at < parser.toks.len() {
        let position = parser.position();
        let message = match parser.peek() {
            Some(Tok::Close) => "unexpected ')'",
            _ => "unexpected token",
        };
        return Err(error(position, message));
    }
    Ok(BooleanQuery::new(root.normalized()))
}
