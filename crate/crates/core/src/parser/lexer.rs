use std::fmt;

use super::SourceLoc;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Token {
    /// Lowercase- or digit-initial identifier: predicate or constant.
    Ident(String),
    /// Uppercase- or underscore-initial identifier.
    Var(String),
    Exists,
    False,
    LParen,
    RParen,
    Comma,
    Dot,
    Arrow,
    ColonDash,
    Pipe,
    Eq,
    Eof,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Ident(s) => write!(f, "identifier `{s}`"),
            Token::Var(s) => write!(f, "variable `{s}`"),
            Token::Exists => f.write_str("`exists`"),
            Token::False => f.write_str("`false`"),
            Token::LParen => f.write_str("`(`"),
            Token::RParen => f.write_str("`)`"),
            Token::Comma => f.write_str("`,`"),
            Token::Dot => f.write_str("`.`"),
            Token::Arrow => f.write_str("`->`"),
            Token::ColonDash => f.write_str("`:-`"),
            Token::Pipe => f.write_str("`|`"),
            Token::Eq => f.write_str("`=`"),
            Token::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Spanned {
    pub token: Token,
    pub loc: SourceLoc,
}

#[derive(Debug)]
pub(crate) struct LexError {
    pub loc: SourceLoc,
    pub found: char,
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Spanned>, LexError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1usize, 1usize);

    while let Some(&c) = chars.peek() {
        let loc = SourceLoc { line, column };
        if c == '\n' {
            chars.next();
            line += 1;
            column = 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            column += 1;
            continue;
        }
        if c == '%' {
            while chars.peek().is_some_and(|&c| c != '\n') {
                chars.next();
            }
            continue;
        }
        if c.is_ascii_alphanumeric() || c == '_' {
            let mut word = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    word.push(c);
                    chars.next();
                    column += 1;
                } else {
                    break;
                }
            }
            let token = match word.as_str() {
                "exists" => Token::Exists,
                "false" => Token::False,
                _ if word.starts_with(|c: char| c.is_ascii_uppercase() || c == '_') => {
                    Token::Var(word)
                }
                _ => Token::Ident(word),
            };
            out.push(Spanned { token, loc });
            continue;
        }
        chars.next();
        column += 1;
        let token = match c {
            '(' => Token::LParen,
            ')' => Token::RParen,
            ',' => Token::Comma,
            '.' => Token::Dot,
            '|' => Token::Pipe,
            '=' => Token::Eq,
            '-' if chars.peek() == Some(&'>') => {
                chars.next();
                column += 1;
                Token::Arrow
            }
            ':' if chars.peek() == Some(&'-') => {
                chars.next();
                column += 1;
                Token::ColonDash
            }
            other => return Err(LexError { loc, found: other }),
        };
        out.push(Spanned { token, loc });
    }
    out.push(Spanned {
        token: Token::Eof,
        loc: SourceLoc { line, column },
    });
    Ok(out)
}
