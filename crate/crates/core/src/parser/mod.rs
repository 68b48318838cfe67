//! Textual syntax for programs: facts, dependencies and named queries.
//!
//! ```text
//! student(s1, c1).                                % fact
//! student(X, Y) -> exists Z person(X, Z).         % TGD
//! parent(X, Y) -> male(Y) | female(Y).            % disjunctive TGD
//! r(X, Y), r(X, Z) -> Y = Z.                      % EGD
//! male(X), female(X) -> false.                    % negative constraint
//! q(X) :- person(X, Y), Y = c1.                   % query
//! ```
//!
//! Identifiers starting with an uppercase letter or `_` are variables; all
//! others are predicates or constants. `exists` and `false` are reserved.
//! Labelled nulls cannot be written in source text.

mod lexer;
mod printer;

use std::fmt;

use thiserror::Error;

use crate::dependency::{Dependency, Disjunct, Dtgd, Egd, NegConstraint, SafetyError};
use crate::instance::{Instance, Schema};
use crate::query::{normalize_query, ConjunctiveQuery};
use crate::terms::{Atom, Term, Variable};

use lexer::{tokenize, Spanned, Token};
pub use printer::serialize_program;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct SourceLoc {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for SourceLoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NamedQuery {
    pub name: String,
    pub query: ConjunctiveQuery,
}

/// A database together with its dependencies and queries.
///
/// Source locations are diagnostics only and do not take part in equality.
#[derive(Clone, Debug, Default)]
pub struct Program {
    pub facts: Instance,
    pub dependencies: Vec<Dependency>,
    pub queries: Vec<NamedQuery>,
    pub dependency_locs: Vec<SourceLoc>,
    pub query_locs: Vec<SourceLoc>,
}

impl PartialEq for Program {
    fn eq(&self, other: &Self) -> bool {
        self.facts == other.facts
            && self.dependencies == other.dependencies
            && self.queries == other.queries
    }
}

impl Eq for Program {}

impl Program {
    pub fn new(facts: Instance, dependencies: Vec<Dependency>, queries: Vec<NamedQuery>) -> Self {
        Program {
            facts,
            dependencies,
            queries,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{loc}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        loc: SourceLoc,
        expected: Vec<String>,
        found: String,
    },
    #[error("{loc}: predicate {predicate} used with arity {found}, previously {expected}")]
    ArityMismatch {
        loc: SourceLoc,
        predicate: String,
        expected: usize,
        found: usize,
    },
    #[error("{loc}: unsafe rule: {reason}")]
    UnsafeRule { loc: SourceLoc, reason: SafetyError },
    #[error("{loc}: fact {atom} contains a variable")]
    NonGroundFact { loc: SourceLoc, atom: String },
    #[error("{loc}: answer variable {variable} does not occur in the query body")]
    UnsafeQuery { loc: SourceLoc, variable: String },
}

impl ParseError {
    pub fn loc(&self) -> SourceLoc {
        match self {
            ParseError::Syntax { loc, .. }
            | ParseError::ArityMismatch { loc, .. }
            | ParseError::UnsafeRule { loc, .. }
            | ParseError::NonGroundFact { loc, .. }
            | ParseError::UnsafeQuery { loc, .. } => *loc,
        }
    }
}

/// Parses a complete program.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let tokens = tokenize(text).map_err(|e| ParseError::Syntax {
        loc: e.loc,
        expected: vec!["a token".into()],
        found: format!("`{}`", e.found),
    })?;
    let mut p = Parser {
        tokens,
        pos: 0,
        schema: Schema::new(),
        program: Program::default(),
    };
    while p.peek() != &Token::Eof {
        p.statement()?;
    }
    Ok(p.program)
}

/// Parses a sequence of facts only.
pub fn parse_facts(text: &str) -> Result<Instance, ParseError> {
    let p = parse_program(text)?;
    if let Some(loc) = p.dependency_locs.first().or(p.query_locs.first()) {
        return Err(ParseError::Syntax {
            loc: *loc,
            expected: vec!["a fact".into()],
            found: "a rule or query".into(),
        });
    }
    Ok(p.facts)
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
    schema: Schema,
    program: Program,
}

enum Literal {
    Atom(Atom),
    Equality(Term, Term),
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].token
    }

    fn peek_at(&self, offset: usize) -> &Token {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].token
    }

    fn loc(&self) -> SourceLoc {
        self.tokens[self.pos].loc
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].token.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &[&str]) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            loc: self.loc(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().to_string(),
        })
    }

    fn expect(&mut self, token: Token, name: &str) -> Result<(), ParseError> {
        if self.peek() == &token {
            self.bump();
            Ok(())
        } else {
            self.error(&[name])
        }
    }

    fn statement(&mut self) -> Result<(), ParseError> {
        let start = self.loc();
        let first = self.atom()?;
        match self.peek() {
            Token::ColonDash => {
                self.bump();
                self.query(first, start)
            }
            Token::Dot => {
                self.bump();
                self.fact(first, start)
            }
            Token::Comma | Token::Arrow => {
                let mut body = vec![first];
                while self.peek() == &Token::Comma {
                    self.bump();
                    body.push(self.atom()?);
                }
                self.expect(Token::Arrow, "`->`")?;
                let dep = self.head(body)?;
                self.expect(Token::Dot, "`.`")?;
                self.dependency(dep, start)
            }
            _ => self.error(&["`.`", "`,`", "`->`", "`:-`"]),
        }
    }

    fn fact(&mut self, atom: Atom, loc: SourceLoc) -> Result<(), ParseError> {
        if !atom.is_ground() {
            return Err(ParseError::NonGroundFact {
                loc,
                atom: atom.to_string(),
            });
        }
        self.observe(&atom, loc)?;
        self.program.facts.insert(atom);
        Ok(())
    }

    fn dependency(&mut self, dep: Dependency, loc: SourceLoc) -> Result<(), ParseError> {
        for a in dep.atoms() {
            self.observe(a, loc)?;
        }
        dep.check_safety()
            .map_err(|reason| ParseError::UnsafeRule { loc, reason })?;
        self.program.dependencies.push(dep);
        self.program.dependency_locs.push(loc);
        Ok(())
    }

    fn query(&mut self, head: Atom, loc: SourceLoc) -> Result<(), ParseError> {
        if let Some(t) = head.args.iter().find(|t| t.as_variable().is_none()) {
            return Err(ParseError::Syntax {
                loc,
                expected: vec!["a variable in the query head".into()],
                found: format!("`{t}`"),
            });
        }
        let mut query = ConjunctiveQuery::new(head.args, Vec::new());
        loop {
            match self.literal()? {
                Literal::Atom(a) => query.body.push(a),
                Literal::Equality(l, r) => query.equalities.push((l, r)),
            }
            if self.peek() == &Token::Comma {
                self.bump();
            } else {
                break;
            }
        }
        self.expect(Token::Dot, "`.`")?;
        for a in &query.body {
            self.observe(a, loc)?;
        }
        if let Ok(normal) = normalize_query(&query) {
            if let Some(v) = normal.unbound_answer_variables().first() {
                return Err(ParseError::UnsafeQuery {
                    loc,
                    variable: v.to_string(),
                });
            }
        }
        self.program.queries.push(NamedQuery {
            name: head.predicate.to_string(),
            query,
        });
        self.program.query_locs.push(loc);
        Ok(())
    }

    fn observe(&mut self, atom: &Atom, loc: SourceLoc) -> Result<(), ParseError> {
        self.schema.observe(atom).map_err(|e| match e {
            crate::error::CoreError::ArityMismatch {
                predicate,
                expected,
                found,
            } => ParseError::ArityMismatch {
                loc,
                predicate,
                expected,
                found,
            },
            other => unreachable!("schema only reports arity errors: {other}"),
        })
    }

    fn head(&mut self, body: Vec<Atom>) -> Result<Dependency, ParseError> {
        match (self.peek(), self.peek_at(1)) {
            (Token::False, _) => {
                self.bump();
                Ok(NegConstraint { body }.into())
            }
            (Token::Var(_), Token::Eq) => {
                let left = self.variable()?;
                self.bump();
                let right = self.variable()?;
                Ok(Egd { body, left, right }.into())
            }
            _ => {
                let mut disjuncts = vec![self.disjunct()?];
                while self.peek() == &Token::Pipe {
                    self.bump();
                    disjuncts.push(self.disjunct()?);
                }
                Ok(Dtgd::new(body, disjuncts).into())
            }
        }
    }

    fn disjunct(&mut self) -> Result<Disjunct, ParseError> {
        let mut existentials = Vec::new();
        if self.peek() == &Token::Exists {
            self.bump();
            existentials.push(self.variable()?);
            while self.peek() == &Token::Comma && matches!(self.peek_at(1), Token::Var(_)) {
                self.bump();
                existentials.push(self.variable()?);
            }
        }
        let mut head = vec![self.atom()?];
        while self.peek() == &Token::Comma {
            self.bump();
            head.push(self.atom()?);
        }
        Ok(Disjunct::new(existentials, head))
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        match (self.peek(), self.peek_at(1)) {
            (Token::Var(_), _) | (Token::Ident(_), Token::Eq) => {
                let l = self.term()?;
                self.expect(Token::Eq, "`=`")?;
                let r = self.term()?;
                Ok(Literal::Equality(l, r))
            }
            _ => Ok(Literal::Atom(self.atom()?)),
        }
    }

    fn atom(&mut self) -> Result<Atom, ParseError> {
        let Token::Ident(name) = self.peek().clone() else {
            return self.error(&["a predicate name"]);
        };
        self.bump();
        let mut args = Vec::new();
        if self.peek() == &Token::LParen {
            self.bump();
            if self.peek() != &Token::RParen {
                args.push(self.term()?);
                while self.peek() == &Token::Comma {
                    self.bump();
                    args.push(self.term()?);
                }
            }
            self.expect(Token::RParen, "`)`")?;
        }
        Ok(Atom::new(name, args))
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Token::Ident(name) => {
                self.bump();
                Ok(Term::constant(name))
            }
            Token::Var(name) => {
                self.bump();
                Ok(Term::variable(name))
            }
            _ => self.error(&["a constant", "a variable"]),
        }
    }

    fn variable(&mut self) -> Result<Variable, ParseError> {
        match self.peek().clone() {
            Token::Var(name) => {
                self.bump();
                Ok(Variable::new(name))
            }
            _ => self.error(&["a variable"]),
        }
    }
}
