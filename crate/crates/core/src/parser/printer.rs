use std::fmt::Write;

use super::Program;
use crate::terms::Term;

/// Canonical text: facts, then dependencies, then queries, one statement per
/// line, LF endings.
pub fn serialize_program(p: &Program) -> String {
    let mut out = String::new();
    for fact in p.facts.atoms() {
        let _ = writeln!(out, "{fact}.");
    }
    for dep in &p.dependencies {
        let _ = writeln!(out, "{dep}.");
    }
    for nq in &p.queries {
        let head: Vec<String> = nq.query.head.iter().map(Term::to_string).collect();
        let body = nq
            .query
            .body
            .iter()
            .map(|a| a.to_string())
            .chain(
                nq.query
                    .equalities
                    .iter()
                    .map(|(l, r)| format!("{l} = {r}")),
            )
            .collect::<Vec<_>>()
            .join(", ");
        let _ = writeln!(out, "{}({}) :- {}.", nq.name, head.join(", "), body);
    }
    out
}

#[cfg(test)]
mod tests {
    use crate::parser::{parse_program, serialize_program};

    #[test]
    fn canonical_fact() {
        let p = parse_program("student( s1 ,c1 ).").unwrap();
        assert_eq!(serialize_program(&p), "student(s1, c1).\n");
    }

    #[test]
    fn guarded_rule_round_trips() {
        let src = "student(X, Y), firstsemester(X) -> exists Z tutor(X, Z).";
        let p = parse_program(src).unwrap();
        let text = serialize_program(&p);
        assert_eq!(text, format!("{src}\n"));
        assert_eq!(parse_program(&text).unwrap(), p);
    }

    #[test]
    fn egd_round_trips() {
        let p = parse_program("r(X,Y), r(X,Z) -> Y = Z.").unwrap();
        let text = serialize_program(&p);
        assert_eq!(text, "r(X, Y), r(X, Z) -> Y = Z.\n");
        assert_eq!(parse_program(&text).unwrap(), p);
    }

    #[test]
    fn mixed_program_layout() {
        let src = "q(X) :- p(X), X = a.\np(X) -> r(X) | exists Y s(X, Y).\np(a).\nc() :- p(X).\nr(X), s(X, Y) -> false.";
        let p = parse_program(src).unwrap();
        let text = serialize_program(&p);
        assert_eq!(
            text,
            "p(a).\n\
             p(X) -> r(X) | exists Y s(X, Y).\n\
             r(X), s(X, Y) -> false.\n\
             q(X) :- p(X), X = a.\n\
             c() :- p(X).\n"
        );
        assert_eq!(parse_program(&text).unwrap(), p);
    }
}
