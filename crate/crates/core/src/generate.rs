//! Seeded random generators for programs, databases and queries.
//!
//! Every generator draws from a caller-supplied [`ChaCha8Rng`], so a seed
//! fixes the output across platforms. All generated rules are safe and all
//! generated programs respect a single arity per predicate.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dependency::{Dependency, Disjunct, Dtgd, Egd, NegConstraint};
use crate::instance::Instance;
use crate::parser::{NamedQuery, Program};
use crate::query::ConjunctiveQuery;
use crate::terms::{Atom, Term, Variable};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Predicate names with fixed arities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    pub predicates: Vec<(String, usize)>,
    pub constants: Vec<String>,
}

impl Signature {
    pub fn random(
        rng: &mut ChaCha8Rng,
        predicates: usize,
        max_arity: usize,
        constants: usize,
    ) -> Self {
        Signature {
            predicates: (0..predicates)
                .map(|i| (format!("p{i}"), rng.gen_range(1..=max_arity)))
                .collect(),
            constants: (0..constants).map(|i| format!("c{i}")).collect(),
        }
    }

    fn pick(&self, rng: &mut ChaCha8Rng) -> (String, usize) {
        self.predicates
            .choose(rng)
            .expect("nonempty signature")
            .clone()
    }

    fn constant(&self, rng: &mut ChaCha8Rng) -> Term {
        Term::constant(self.constants.choose(rng).expect("nonempty constants"))
    }

    /// Number of ground atoms over the signature.
    pub fn herbrand_size(&self) -> usize {
        let c = self.constants.len();
        self.predicates.iter().map(|(_, a)| c.pow(*a as u32)).sum()
    }

    /// Every ground atom over the signature, in a fixed order.
    pub fn herbrand_base(&self) -> Vec<Atom> {
        let mut out = Vec::new();
        for (p, arity) in &self.predicates {
            let mut tuples: Vec<Vec<Term>> = vec![Vec::new()];
            for _ in 0..*arity {
                tuples = tuples
                    .into_iter()
                    .flat_map(|t| {
                        self.constants.iter().map(move |c| {
                            let mut t = t.clone();
                            t.push(Term::constant(c));
                            t
                        })
                    })
                    .collect();
            }
            out.extend(tuples.into_iter().map(|args| Atom::new(p, args)));
        }
        out
    }
}

fn var(i: usize) -> Variable {
    Variable::new(format!("X{i}"))
}

fn existential(i: usize) -> Variable {
    Variable::new(format!("Y{i}"))
}

/// An atom over `pred` whose arguments are drawn from `vars`, with an
/// occasional constant when `constant_bias > 0`.
fn atom_over(
    rng: &mut ChaCha8Rng,
    sig: &Signature,
    (pred, arity): &(String, usize),
    vars: &[Variable],
    constant_bias: f64,
) -> Atom {
    let args = (0..*arity)
        .map(|_| {
            if vars.is_empty() || (constant_bias > 0.0 && rng.gen_bool(constant_bias)) {
                sig.constant(rng)
            } else {
                Term::Variable(vars.choose(rng).expect("nonempty").clone())
            }
        })
        .collect();
    Atom::new(pred, args)
}

/// A head disjunct over the frontier `exported` and up to `max_ex` fresh existentials.
fn disjunct(
    rng: &mut ChaCha8Rng,
    sig: &Signature,
    exported: &[Variable],
    max_atoms: usize,
    max_ex: usize,
) -> Disjunct {
    let ex: Vec<Variable> = (0..rng.gen_range(0..=max_ex)).map(existential).collect();
    let pool: Vec<Variable> = exported.iter().chain(&ex).cloned().collect();
    let head: Vec<Atom> = (0..rng.gen_range(1..=max_atoms))
        .map(|_| {
            let p = sig.pick(rng);
            atom_over(rng, sig, &p, &pool, 0.0)
        })
        .collect();
    let used: Vec<Variable> = ex
        .into_iter()
        .filter(|y| head.iter().any(|h| h.contains_variable(y)))
        .collect();
    Disjunct::new(used, head)
}

fn body(
    rng: &mut ChaCha8Rng,
    sig: &Signature,
    max_atoms: usize,
    max_vars: usize,
    constant_bias: f64,
) -> Vec<Atom> {
    let vars: Vec<Variable> = (0..rng.gen_range(1..=max_vars)).map(var).collect();
    (0..rng.gen_range(1..=max_atoms))
        .map(|_| {
            let p = sig.pick(rng);
            atom_over(rng, sig, &p, &vars, constant_bias)
        })
        .collect()
}

fn vars_of(atoms: &[Atom]) -> Vec<Variable> {
    let mut vs: Vec<Variable> = atoms.iter().flat_map(|a| a.variables().cloned()).collect();
    vs.sort();
    vs.dedup();
    vs
}

/// Shape limits for random rule sets.
#[derive(Clone, Debug)]
pub struct RuleShape {
    pub rules: usize,
    pub predicates: usize,
    pub max_arity: usize,
    pub max_body: usize,
    pub max_head: usize,
    pub max_existentials: usize,
    pub max_disjuncts: usize,
    pub constants: usize,
}

impl Default for RuleShape {
    fn default() -> Self {
        RuleShape {
            rules: 6,
            predicates: 4,
            max_arity: 3,
            max_body: 2,
            max_head: 2,
            max_existentials: 1,
            max_disjuncts: 1,
            constants: 2,
        }
    }
}

pub fn random_dtgd(rng: &mut ChaCha8Rng, sig: &Signature, shape: &RuleShape) -> Dtgd {
    let b = body(rng, sig, shape.max_body, 3, 0.0);
    let frontier = vars_of(&b);
    let n = rng.gen_range(1..=shape.max_disjuncts);
    let disjuncts = (0..n)
        .map(|_| disjunct(rng, sig, &frontier, shape.max_head, shape.max_existentials))
        .collect();
    Dtgd::new(b, disjuncts)
}

/// A set of between one and `shape.rules` single-head TGDs over a fresh signature.
pub fn random_tgd_set(rng: &mut ChaCha8Rng, shape: &RuleShape) -> (Signature, Vec<Dependency>) {
    let sig = Signature::random(rng, shape.predicates, shape.max_arity, shape.constants);
    let n = rng.gen_range(1..=shape.rules);
    let sigma = (0..n)
        .map(|_| random_dtgd(rng, &sig, shape).into())
        .collect();
    (sig, sigma)
}

/// Up to `max_facts` ground atoms over the signature (at least one).
pub fn random_database(rng: &mut ChaCha8Rng, sig: &Signature, max_facts: usize) -> Instance {
    let n = rng.gen_range(1..=max_facts);
    (0..n)
        .map(|_| {
            let p = sig.pick(rng);
            atom_over(rng, sig, &p, &[], 1.0)
        })
        .collect()
}

/// A boolean query of up to `max_atoms` atoms over the signature.
pub fn random_bcq(
    rng: &mut ChaCha8Rng,
    sig: &Signature,
    max_atoms: usize,
    max_vars: usize,
) -> ConjunctiveQuery {
    ConjunctiveQuery::boolean(body(rng, sig, max_atoms, max_vars, 0.3))
}

/// A query whose head keeps a random subset of its body variables.
pub fn random_query(
    rng: &mut ChaCha8Rng,
    sig: &Signature,
    max_atoms: usize,
    max_vars: usize,
) -> ConjunctiveQuery {
    let b = body(rng, sig, max_atoms, max_vars, 0.3);
    let head = vars_of(&b)
        .into_iter()
        .filter(|_| rng.gen_bool(0.5))
        .map(Term::Variable)
        .collect();
    ConjunctiveQuery::new(head, b)
}

/// One body atom and one head atom, no repeated variables within either.
pub fn random_inclusion_dependency(rng: &mut ChaCha8Rng, sig: &Signature) -> Dtgd {
    let (bp, ba) = sig.pick(rng);
    let body_vars: Vec<Variable> = (0..ba).map(var).collect();
    let (hp, ha) = sig.pick(rng);
    let mut exported = body_vars.clone();
    exported.shuffle(rng);
    let mut ex = Vec::new();
    let args = (0..ha)
        .map(|k| match exported.pop() {
            Some(v) if rng.gen_bool(0.7) => Term::Variable(v),
            _ => {
                let y = existential(k);
                ex.push(y.clone());
                Term::Variable(y)
            }
        })
        .collect();
    let body_atom = Atom::new(bp, body_vars.into_iter().map(Term::Variable).collect());
    Dtgd::tgd(vec![body_atom], ex, vec![Atom::new(hp, args)])
}

/// A TGD whose first body atom is a guard: it holds every body variable.
pub fn random_guarded_tgd(rng: &mut ChaCha8Rng, sig: &Signature, shape: &RuleShape) -> Dtgd {
    let (gp, ga) = sig.pick(rng);
    let guard_vars: Vec<Variable> = (0..rng.gen_range(1..=ga)).map(var).collect();
    // Every guard variable occurs in the guard; extra slots repeat them.
    let mut args: Vec<Term> = guard_vars.iter().cloned().map(Term::Variable).collect();
    while args.len() < ga {
        args.push(Term::Variable(
            guard_vars.choose(rng).expect("nonempty").clone(),
        ));
    }
    args.shuffle(rng);
    let mut b = vec![Atom::new(gp, args)];
    for _ in 1..rng.gen_range(1..=shape.max_body) {
        let p = sig.pick(rng);
        b.push(atom_over(rng, sig, &p, &guard_vars, 0.1));
    }
    let frontier = vars_of(&b);
    let d = disjunct(rng, sig, &frontier, shape.max_head, shape.max_existentials);
    Dtgd::new(b, vec![d])
}

pub fn random_id_set(rng: &mut ChaCha8Rng, shape: &RuleShape) -> Vec<Dependency> {
    let sig = Signature::random(rng, shape.predicates, shape.max_arity, shape.constants);
    (0..rng.gen_range(1..=shape.rules))
        .map(|_| random_inclusion_dependency(rng, &sig).into())
        .collect()
}

pub fn random_guarded_set(rng: &mut ChaCha8Rng, shape: &RuleShape) -> Vec<Dependency> {
    let sig = Signature::random(rng, shape.predicates, shape.max_arity, shape.constants);
    (0..rng.gen_range(1..=shape.rules))
        .map(|_| random_guarded_tgd(rng, &sig, shape).into())
        .collect()
}

/// A single TGD drawn from a mix of shapes, so that inclusion
/// dependencies, linear, guarded and unguarded rules all occur.
pub fn random_singleton_tgd(rng: &mut ChaCha8Rng) -> Dtgd {
    let sig = Signature::random(rng, 3, 3, 2);
    let shape = RuleShape {
        max_body: 3,
        max_head: 2,
        max_existentials: 2,
        ..RuleShape::default()
    };
    match rng.gen_range(0..4) {
        0 => random_inclusion_dependency(rng, &sig),
        1 => {
            let p = sig.pick(rng);
            let vars: Vec<Variable> = (0..3).map(var).collect();
            let b = vec![atom_over(rng, &sig, &p, &vars, 0.1)];
            let frontier = vars_of(&b);
            Dtgd::new(b, vec![disjunct(rng, &sig, &frontier, 2, 2)])
        }
        2 => random_guarded_tgd(rng, &sig, &shape),
        _ => random_dtgd(rng, &sig, &shape),
    }
}

/// A signature of at most four constants and arity at most two whose
/// Herbrand base has at most `max_base` atoms.
pub fn small_signature(rng: &mut ChaCha8Rng, max_base: usize) -> Signature {
    let constants: usize = rng.gen_range(2..=4);
    let mut sig = Signature {
        predicates: Vec::new(),
        constants: (0..constants).map(|i| format!("c{i}")).collect(),
    };
    for i in 0..4 {
        let arity = rng.gen_range(1..=2);
        let cost = constants.pow(arity as u32);
        if sig.herbrand_size() + cost <= max_base {
            sig.predicates.push((format!("p{i}"), arity));
        } else if sig.herbrand_size() + constants <= max_base {
            sig.predicates.push((format!("p{i}"), 1));
        }
    }
    sig
}

/// A disjunctive program without existentials: rules, occasional negative
/// constraints and EGDs, and a small database.
pub fn random_existential_free_program(
    rng: &mut ChaCha8Rng,
    max_base: usize,
) -> (Signature, Instance, Vec<Dependency>) {
    let sig = small_signature(rng, max_base);
    let db = random_database(rng, &sig, 4);
    let mut sigma: Vec<Dependency> = Vec::new();
    for _ in 0..rng.gen_range(1..=4) {
        let b = body(rng, &sig, 2, 2, 0.15);
        let frontier = vars_of(&b);
        let roll = rng.gen_range(0..10);
        if roll == 0 {
            sigma.push(NegConstraint { body: b }.into());
        } else if roll == 1 && frontier.len() >= 2 {
            sigma.push(
                Egd {
                    body: b,
                    left: frontier[0].clone(),
                    right: frontier[1].clone(),
                }
                .into(),
            );
        } else {
            let n = rng.gen_range(1..=3);
            let disjuncts = (0..n)
                .map(|_| disjunct(rng, &sig, &frontier, 2, 0))
                .collect();
            sigma.push(Dtgd::new(b, disjuncts).into());
        }
    }
    (sig, db, sigma)
}

/// A program exercising the whole surface syntax: facts, existential and
/// disjunctive rules, EGDs, constraints and named queries with equalities.
pub fn random_program(rng: &mut ChaCha8Rng) -> Program {
    let n = rng.gen_range(1..=5);
    let sig = Signature::random(rng, n, 3, 4);
    let facts = random_database(rng, &sig, 6);
    let mut deps: Vec<Dependency> = Vec::new();
    let shape = RuleShape {
        max_body: 3,
        max_head: 3,
        max_existentials: 2,
        max_disjuncts: 3,
        ..RuleShape::default()
    };
    for _ in 0..rng.gen_range(0..=5) {
        match rng.gen_range(0..6) {
            0 => deps.push(
                NegConstraint {
                    body: body(rng, &sig, 2, 3, 0.2),
                }
                .into(),
            ),
            1 => {
                let b = body(rng, &sig, 2, 3, 0.2);
                let vs = vars_of(&b);
                if let (Some(l), Some(r)) = (vs.choose(rng).cloned(), vs.choose(rng).cloned()) {
                    deps.push(
                        Egd {
                            body: b,
                            left: l,
                            right: r,
                        }
                        .into(),
                    );
                }
            }
            _ => {
                let mut d = random_dtgd(rng, &sig, &shape);
                if rng.gen_bool(0.2) {
                    // Allow constants in bodies too.
                    let p = sig.pick(rng);
                    let vs = vars_of(&d.body);
                    d.body.push(atom_over(rng, &sig, &p, &vs, 0.5));
                }
                deps.push(d.into());
            }
        }
    }
    let mut queries = Vec::new();
    for i in 0..rng.gen_range(0..=3) {
        let mut q = random_query(rng, &sig, 3, 3);
        let vs = vars_of(&q.body);
        if !vs.is_empty() && rng.gen_bool(0.3) {
            let l = Term::Variable(vs.choose(rng).expect("body has variables").clone());
            let r = if rng.gen_bool(0.5) {
                sig.constant(rng)
            } else {
                Term::Variable(vs.choose(rng).expect("body has variables").clone())
            };
            q.equalities.push((l, r));
        }
        queries.push(NamedQuery {
            name: format!("q{i}"),
            query: q,
        });
    }
    Program::new(facts, deps, queries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_program, serialize_program};

    #[test]
    fn same_seed_same_output() {
        let a = random_program(&mut rng(7));
        let b = random_program(&mut rng(7));
        assert_eq!(serialize_program(&a), serialize_program(&b));
    }

    #[test]
    fn generated_programs_parse() {
        let mut r = rng(1);
        for _ in 0..200 {
            let p = random_program(&mut r);
            let text = serialize_program(&p);
            parse_program(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
        }
    }

    #[test]
    fn small_signatures_respect_bounds() {
        let mut r = rng(2);
        for _ in 0..200 {
            let sig = small_signature(&mut r, 14);
            assert!(sig.herbrand_size() <= 14);
            assert!(sig.constants.len() <= 4);
            assert!(sig.predicates.iter().all(|(_, a)| *a <= 2));
            assert_eq!(sig.herbrand_base().len(), sig.herbrand_size());
        }
    }

    #[test]
    fn generated_rules_are_safe() {
        let mut r = rng(3);
        for _ in 0..300 {
            let d: Dependency = random_singleton_tgd(&mut r).into();
            d.check_safety().unwrap();
            let (_, _, sigma) = random_existential_free_program(&mut r, 14);
            for d in sigma {
                d.check_safety().unwrap();
                if let Some(t) = d.as_dtgd() {
                    assert!(t.disjuncts.iter().all(|dj| dj.existentials.is_empty()));
                }
            }
        }
    }

    #[test]
    fn guarded_tgds_have_guard_first() {
        let mut r = rng(4);
        let sig = Signature::random(&mut r, 4, 3, 2);
        for _ in 0..200 {
            let d = random_guarded_tgd(&mut r, &sig, &RuleShape::default());
            let all = d.body_variables();
            assert!(all.iter().all(|v| d.body[0].contains_variable(v)));
        }
    }
}
